//! Unital *-homomorphisms given by generator images.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::actions::RotationAction;
use crate::algebra::{parse, Context, StarPolynomial};
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::rep::{eval_poly, RationalRep, SpherePoint};
use crate::scalar::Coefficient;

/// How relations are checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValidationMode {
    /// Exact identities in the free-with-phases algebra.
    Symbolic,
    /// Residuals at random sphere points in a representation of the codomain.
    Numeric { samples: usize, seed: u64, tolerance: f64 },
}

/// One failed relation, with its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationFailure {
    pub relation: String,
    pub residual: String,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub valid: bool,
    pub mode: ValidationMode,
    pub checked: Vec<String>,
    pub failures: Vec<RelationFailure>,
    /// Which form the sphere sum took in symbolic mode.
    pub sphere_witness: Option<String>,
    pub max_residual: Option<f64>,
}

impl ValidationReport {
    pub fn to_json_value(&self) -> Value {
        let mode = match self.mode {
            ValidationMode::Symbolic => json!("symbolic"),
            ValidationMode::Numeric { samples, seed, tolerance } => {
                json!({ "numeric": { "samples": samples, "seed": seed, "tolerance": tolerance } })
            }
        };
        json!({
            "valid": self.valid,
            "mode": mode,
            "checked": self.checked,
            "failures": self.failures.iter().map(|f| json!({ "relation": f.relation, "residual": f.residual })).collect::<Vec<_>>(),
            "sphere_witness": self.sphere_witness,
            "max_residual": self.max_residual,
        })
    }
}

/// z_j ↦ images[j] (and x ↦ image_x on even domains).
#[derive(Clone, Debug)]
pub struct GeneratorMap {
    domain: Arc<Context>,
    codomain: Arc<Context>,
    images: Vec<StarPolynomial>,
    image_x: Option<StarPolynomial>,
    validated: bool,
}

/// A named relation residual in the codomain.
struct Relation {
    name: String,
    residual: StarPolynomial,
}

impl GeneratorMap {
    pub fn new(
        domain: &Arc<Context>,
        codomain: &Arc<Context>,
        images: Vec<StarPolynomial>,
        image_x: Option<StarPolynomial>,
    ) -> Result<Self> {
        if images.len() != domain.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} generators",
                images.len(),
                domain.n()
            )));
        }
        if domain.has_x() != image_x.is_some() {
            return Err(Error::DimensionMismatch(if domain.has_x() {
                "even domain needs an image for x".into()
            } else {
                "odd domain has no x to map".into()
            }));
        }
        for p in images.iter().chain(image_x.iter()) {
            if p.ctx() != codomain {
                return Err(Error::ContextMismatch("image lives outside the codomain".into()));
            }
        }
        Ok(GeneratorMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            images,
            image_x,
            validated: false,
        })
    }

    /// Images given as expressions in the codomain grammar.
    pub fn from_strings(domain: &Arc<Context>, codomain: &Arc<Context>, images: &[&str], image_x: Option<&str>) -> Result<Self> {
        let imgs = images.iter().map(|s| parse(s, codomain)).collect::<Result<Vec<_>>>()?;
        let ix = image_x.map(|s| parse(s, codomain)).transpose()?;
        Self::new(domain, codomain, imgs, ix)
    }

    pub fn identity(ctx: &Arc<Context>) -> Self {
        let images = (0..ctx.n()).map(|j| ctx.gen(j)).collect();
        let image_x = ctx.has_x().then(|| ctx.x().expect("even"));
        GeneratorMap {
            domain: ctx.clone(),
            codomain: ctx.clone(),
            images,
            image_x,
            validated: true,
        }
    }

    pub fn domain(&self) -> &Arc<Context> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Context> {
        &self.codomain
    }

    pub fn images(&self) -> &[StarPolynomial] {
        &self.images
    }

    pub fn image_x(&self) -> Option<&StarPolynomial> {
        self.image_x.as_ref()
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// A domain coefficient moved into the codomain field.
    fn coeff(&self, c: &Coefficient) -> Result<Coefficient> {
        self.codomain.scalars().embed(c).or_else(|_| self.codomain.scalars().complex(c.to_complex()))
    }

    fn domain_phase(&self, j: usize, k: usize) -> Result<Coefficient> {
        self.codomain.scalars().phase(&self.domain.rho().angle(j, k))
    }

    fn relations(&self) -> Result<Vec<Relation>> {
        let n = self.domain.n();
        let h = &self.images;
        let adj: Vec<StarPolynomial> = h.iter().map(StarPolynomial::adjoint).collect();
        let mut out = Vec::new();
        for j in 0..n {
            out.push(Relation {
                name: format!("z{0} z{0}' = z{0}' z{0}", j + 1),
                residual: &(&h[j] * &adj[j]) - &(&adj[j] * &h[j]),
            });
        }
        for j in 0..n {
            for k in (j + 1)..n {
                let rjk = self.codomain.constant(self.domain_phase(j, k)?);
                let rkj = self.codomain.constant(self.domain_phase(k, j)?);
                out.push(Relation {
                    name: format!("z{1} z{0} = rho_{0}{1} z{0} z{1}", j + 1, k + 1),
                    residual: &(&h[k] * &h[j]) - &(&rjk * &(&h[j] * &h[k])),
                });
                out.push(Relation {
                    name: format!("z{1}' z{0} = rho_{1}{0} z{0} z{1}'", j + 1, k + 1),
                    residual: &(&adj[k] * &h[j]) - &(&rkj * &(&h[j] * &adj[k])),
                });
            }
        }
        if let Some(x) = &self.image_x {
            out.push(Relation {
                name: "x' = x".into(),
                residual: &x.adjoint() - x,
            });
            for j in 0..n {
                out.push(Relation {
                    name: format!("x z{} = z{} x", j + 1, j + 1),
                    residual: &(x * &h[j]) - &(&h[j] * x),
                });
                out.push(Relation {
                    name: format!("x z{}' = z{}' x", j + 1, j + 1),
                    residual: &(x * &adj[j]) - &(&adj[j] * x),
                });
            }
        }
        Ok(out)
    }

    fn sphere_sum(&self) -> StarPolynomial {
        let mut s = self.codomain.zero();
        for p in &self.images {
            s = &s + &(p * &p.adjoint());
        }
        if let Some(x) = &self.image_x {
            s = &s + &(x * x);
        }
        s
    }

    /// Checks every domain relation on the images; marks the map validated on
    /// success.
    pub fn validate(&mut self, mode: ValidationMode) -> Result<ValidationReport> {
        let report = match mode {
            ValidationMode::Symbolic => self.validate_symbolic()?,
            ValidationMode::Numeric { samples, seed, tolerance } => self.validate_numeric(samples, seed, tolerance)?,
        };
        self.validated = report.valid;
        Ok(report)
    }

    fn validate_symbolic(&self) -> Result<ValidationReport> {
        let mut checked = Vec::new();
        let mut failures = Vec::new();
        for rel in self.relations()? {
            if !rel.residual.is_zero() {
                failures.push(RelationFailure {
                    relation: rel.name.clone(),
                    residual: rel.residual.to_string(),
                });
            }
            checked.push(rel.name);
        }
        let sum = self.sphere_sum();
        let name = if self.domain.has_x() {
            "x^2 + sum z_j z_j' = 1"
        } else {
            "sum z_j z_j' = 1"
        };
        checked.push(name.into());
        let witness = if sum == self.codomain.one() {
            Some("constant 1".to_string())
        } else if sum == self.codomain.sphere_polynomial() {
            Some("codomain sphere polynomial".to_string())
        } else {
            failures.push(RelationFailure {
                relation: name.into(),
                residual: (&sum - &self.codomain.one()).to_string(),
            });
            None
        };
        Ok(ValidationReport {
            valid: failures.is_empty(),
            mode: ValidationMode::Symbolic,
            checked,
            failures,
            sphere_witness: witness,
            max_residual: None,
        })
    }

    fn validate_numeric(&self, samples: usize, seed: u64, tolerance: f64) -> Result<ValidationReport> {
        let rep = RationalRep::build(self.codomain.rho())?;
        let mut rels = self.relations()?;
        rels.push(Relation {
            name: "sphere sum = 1".into(),
            residual: &self.sphere_sum() - &self.codomain.one(),
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<SpherePoint> = (0..samples)
            .map(|_| SpherePoint::random(self.codomain.n(), self.codomain.has_x(), &mut rng))
            .collect();
        let mut worst: f64 = 0.0;
        let mut failures = Vec::new();
        let mut checked = Vec::new();
        for rel in rels {
            let mut rel_worst: f64 = 0.0;
            for pt in &points {
                let m = eval_poly(&rel.residual, pt, &rep)?;
                let r = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
                rel_worst = rel_worst.max(r);
            }
            worst = worst.max(rel_worst);
            if rel_worst >= tolerance {
                failures.push(RelationFailure {
                    relation: rel.name.clone(),
                    residual: format!("{rel_worst:e}"),
                });
            }
            checked.push(rel.name);
        }
        Ok(ValidationReport {
            valid: failures.is_empty(),
            mode: ValidationMode::Numeric { samples, seed, tolerance },
            checked,
            failures,
            sphere_witness: None,
            max_residual: Some(worst),
        })
    }

    fn substitute(&self, p: &StarPolynomial) -> Result<StarPolynomial> {
        if p.ctx() != &self.domain {
            return Err(Error::ContextMismatch("polynomial is not in the domain".into()));
        }
        let cod = &self.codomain;
        let adj: Vec<StarPolynomial> = self.images.iter().map(StarPolynomial::adjoint).collect();
        let mut out = cod.zero();
        for (m, c) in p.terms() {
            let mut term = cod.constant(self.coeff(c)?);
            for j in 0..self.domain.n() {
                for _ in 0..m.plain()[j] {
                    term = &term * &self.images[j];
                }
                for _ in 0..m.starred()[j] {
                    term = &term * &adj[j];
                }
            }
            if m.x_power() > 0 {
                let x = self.image_x.as_ref().ok_or(Error::XInOddSphere)?;
                term = &term * &x.pow(m.x_power());
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// h(p); the map must be validated.
    pub fn apply(&self, p: &StarPolynomial) -> Result<StarPolynomial> {
        if !self.validated {
            return Err(Error::Unvalidated);
        }
        self.substitute(p)
    }

    pub fn apply_matrix(&self, m: &PolyMatrix) -> Result<PolyMatrix> {
        if !self.validated {
            return Err(Error::Unvalidated);
        }
        let entries = m.entries().iter().map(|p| self.substitute(p)).collect::<Result<Vec<_>>>()?;
        PolyMatrix::new(&self.codomain, m.rows(), m.cols(), entries)
    }

    /// `next ∘ self`. Validated when both factors are.
    pub fn then(&self, next: &GeneratorMap) -> Result<GeneratorMap> {
        if self.codomain != next.domain {
            return Err(Error::ContextMismatch("codomain and next domain differ".into()));
        }
        let images = self.images.iter().map(|p| next.substitute(p)).collect::<Result<Vec<_>>>()?;
        let image_x = self.image_x.as_ref().map(|p| next.substitute(p)).transpose()?;
        let mut out = GeneratorMap::new(&self.domain, &next.codomain, images, image_x)?;
        out.validated = self.validated && next.validated;
        Ok(out)
    }

    /// R_cod(h(g)) = h(R_dom(g)) for every generator g.
    pub fn check_equivariance(&self, r_dom: &RotationAction, r_cod: &RotationAction) -> Result<bool> {
        Ok(self.equivariance_failures(r_dom, r_cod)?.is_empty())
    }

    /// Generators where equivariance fails.
    pub fn equivariance_failures(&self, r_dom: &RotationAction, r_cod: &RotationAction) -> Result<Vec<String>> {
        if !self.validated {
            return Err(Error::Unvalidated);
        }
        if r_dom.k() != r_cod.k() {
            return Err(Error::OrderMismatch {
                domain: r_dom.k(),
                codomain: r_cod.k(),
            });
        }
        if r_dom.n() != self.domain.n() || r_cod.n() != self.codomain.n() {
            return Err(Error::ContextMismatch("action sizes do not match the map".into()));
        }
        let k = r_dom.k();
        let cod = self.codomain.extended(k);
        let mut gens: Vec<(String, StarPolynomial, u64)> = (0..self.domain.n())
            .map(|j| {
                let g = self.domain.gen(j);
                let class = r_dom.monomial_class(g.terms().keys().next().expect("generator"));
                (format!("z{}", j + 1), self.images[j].clone(), class)
            })
            .collect();
        if let Some(x) = &self.image_x {
            let class = if r_dom.x_odd() { k / 2 } else { 0 };
            gens.push(("x".into(), x.clone(), class));
        }
        let mut failures = Vec::new();
        for (name, image, class) in gens {
            let image = image.moved_to(&cod)?;
            let lhs = r_cod.apply(&image)?;
            let phase = cod.scalars().phase(&crate::scalar::Angle::exact(class as i64, k as i64)?)?;
            let rhs = image.scale(&phase);
            if lhs != rhs {
                failures.push(name);
            }
        }
        Ok(failures)
    }

    pub fn to_json_value(&self) -> Value {
        let mut images = BTreeMap::new();
        for (j, p) in self.images.iter().enumerate() {
            images.insert(format!("z{}", j + 1), Value::String(p.to_string()));
        }
        if let Some(x) = &self.image_x {
            images.insert("x".into(), Value::String(x.to_string()));
        }
        json!({
            "domain": self.domain.to_json_value(),
            "codomain": self.codomain.to_json_value(),
            "images": images,
        })
    }

    /// `{"domain": ctx, "codomain": ctx, "images": {"z1": expr, …, "x": expr}}`;
    /// the result is not yet validated.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let domain = Context::from_json_value(v.get("domain").ok_or_else(|| Error::Json("missing `domain`".into()))?)?;
        let codomain =
            Context::from_json_value(v.get("codomain").ok_or_else(|| Error::Json("missing `codomain`".into()))?)?;
        let imgs = v
            .get("images")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Json("missing `images` object".into()))?;
        for key in imgs.keys() {
            let known = key == "x" || key.strip_prefix('z').and_then(|d| d.parse::<usize>().ok()).is_some_and(|j| (1..=domain.n()).contains(&j));
            if !known {
                return Err(Error::UnknownGenerator(key.clone()));
            }
        }
        let text = |key: &str| -> Result<Option<StarPolynomial>> {
            imgs.get(key)
                .map(|e| {
                    let s = e.as_str().ok_or_else(|| Error::Json(format!("image of {key} must be a string")))?;
                    parse(s, &codomain)
                })
                .transpose()
        };
        let images = (1..=domain.n())
            .map(|j| text(&format!("z{j}"))?.ok_or_else(|| Error::Json(format!("missing image of z{j}"))))
            .collect::<Result<Vec<_>>>()?;
        let image_x = text("x")?;
        Self::new(&domain, &codomain, images, image_x)
    }
}

/// z_i ↦ z_i (i < n), z_n ↦ x into the even sphere of the leading minor.
/// Needs the last row and column of ρ to be 1.
pub fn to_even(domain: &Arc<Context>) -> Result<GeneratorMap> {
    let n = domain.n();
    if domain.has_x() || n < 2 {
        return Err(Error::Precondition("to_even needs an odd sphere with n ≥ 2".into()));
    }
    for i in 0..n - 1 {
        if !domain.rho().angle(i, n - 1).is_zero() {
            return Err(Error::Precondition(format!("rho_{}{} ≠ 1", i + 1, n)));
        }
    }
    let codomain = Context::with_scalars(domain.rho().minor(n - 1)?, true, domain.scalars().clone())?;
    let mut images: Vec<StarPolynomial> = (0..n - 1).map(|j| codomain.gen(j)).collect();
    images.push(codomain.x()?);
    finish(GeneratorMap::new(domain, &codomain, images, None)?)
}

/// z_i ↦ z_i, x ↦ 0 from the even sphere to the odd sphere.
pub fn x_to_zero(domain: &Arc<Context>) -> Result<GeneratorMap> {
    if !domain.has_x() {
        return Err(Error::Precondition("x_to_zero needs an even sphere".into()));
    }
    let codomain = Context::with_scalars(domain.rho().clone(), false, domain.scalars().clone())?;
    let images = (0..domain.n()).map(|j| codomain.gen(j)).collect();
    finish(GeneratorMap::new(domain, &codomain, images, Some(codomain.zero()))?)
}

/// z_i ↦ z_i (i < n), z_n ↦ 0 onto the sphere of the leading (n−1)×(n−1) block.
pub fn kill_zn(domain: &Arc<Context>) -> Result<GeneratorMap> {
    let n = domain.n();
    if domain.has_x() || n < 2 {
        return Err(Error::Precondition("kill_zn needs an odd sphere with n ≥ 2".into()));
    }
    let codomain = Context::with_scalars(domain.rho().upper_left(n - 1)?, false, domain.scalars().clone())?;
    let mut images: Vec<StarPolynomial> = (0..n - 1).map(|j| codomain.gen(j)).collect();
    images.push(codomain.zero());
    finish(GeneratorMap::new(domain, &codomain, images, None)?)
}

/// For ρ of size m: the (m+1)×(m+1) matrix P with ρ in the upper left and 1
/// elsewhere, and the map C(S_P) → C(S^{even}_ρ) sending the last generator to x.
/// `extra` enlarges the coefficient field.
pub fn embed_corner(rho: &crate::param::ParameterMatrix, extra: u64) -> Result<GeneratorMap> {
    let p = rho.embed_corner(rho.n() + 1)?;
    to_even(&Context::new(p, false, extra))
}

/// z_i ↦ β_i z_{σ(i)} into the sphere of ω with ω_{σ(j)σ(k)} = ρ_{jk};
/// `betas` are phases.
pub fn rescale_permute(domain: &Arc<Context>, sigma: &[usize], betas: &[crate::scalar::Angle]) -> Result<GeneratorMap> {
    let n = domain.n();
    if betas.len() != n {
        return Err(Error::DimensionMismatch("one phase per generator".into()));
    }
    let omega = domain.rho().permuted(sigma)?;
    let codomain = Context::with_scalars(omega, domain.has_x(), domain.scalars().clone())?;
    let images = (0..n)
        .map(|i| Ok(codomain.gen(sigma[i]).scale(&codomain.scalars().phase(&betas[i])?)))
        .collect::<Result<Vec<_>>>()?;
    let image_x = domain.has_x().then(|| codomain.x()).transpose()?;
    finish(GeneratorMap::new(domain, &codomain, images, image_x)?)
}

fn finish(mut h: GeneratorMap) -> Result<GeneratorMap> {
    let report = h.validate(ValidationMode::Symbolic)?;
    if !report.valid {
        let f = &report.failures[0];
        return Err(Error::FailedRelation(format!("{} (residual {})", f.relation, f.residual)));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParameterMatrix;
    use crate::scalar::Angle;
    use crate::zgen::zgen;

    fn generic(n: usize) -> Arc<Context> {
        Context::odd(ParameterMatrix::from_upper(n, |j, k| Angle::exact(1, (j + 2 * k + 1) as i64).unwrap()))
    }

    #[test]
    fn swap_is_rejected_with_witness() {
        let ctx = generic(2);
        let mut h = GeneratorMap::from_strings(&ctx, &ctx, &["z2", "z1"], None).unwrap();
        let rep = h.validate(ValidationMode::Symbolic).unwrap();
        assert!(!rep.valid);
        assert!(rep.failures.iter().any(|f| f.relation.starts_with("z2 z1 = rho_12")));
        assert!(matches!(h.apply(&ctx.gen(0)), Err(Error::Unvalidated)));
    }

    #[test]
    fn standard_maps_validate() {
        let rho = ParameterMatrix::from_upper(3, |j, k| if k == 2 { Angle::zero() } else { Angle::exact(1, 5 + j as i64).unwrap() });
        let pi = to_even(&Context::odd(rho.clone())).unwrap();
        assert!(pi.is_validated() && pi.codomain().has_x());
        let z = x_to_zero(pi.codomain()).unwrap();
        let both = pi.then(&z).unwrap();
        assert_eq!(both.images()[2], both.codomain().zero());
        assert_eq!(both.images()[0], both.codomain().gen(0));
        let bad = ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap());
        assert!(matches!(to_even(&Context::odd(bad)), Err(Error::Precondition(_))));
        assert!(embed_corner(&ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap()), 1).is_ok());
    }

    #[test]
    fn x_vanishes_under_x_to_zero() {
        let even = Context::even(ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 4).unwrap()));
        let h = x_to_zero(&even).unwrap();
        let p = parse("x z1", &even).unwrap();
        assert!(h.apply(&p).unwrap().is_zero());
    }

    #[test]
    fn kill_zn_splits_zgen() {
        let ctx = generic(3);
        let h = kill_zn(&ctx).unwrap();
        let img = h.apply_matrix(&zgen(&ctx, 3).unwrap()).unwrap();
        let z2 = zgen(h.codomain(), 2).unwrap();
        assert_eq!(img, z2.direct_sum(&z2.adjoint()).unwrap());
        let t = RotationAction::antipodal(3);
        assert!(h.check_equivariance(&t, &RotationAction::antipodal(2)).unwrap());
    }

    #[test]
    fn parity_mismatch_breaks_equivariance() {
        let ctx = Context::odd(ParameterMatrix::commutative(2));
        let mut h = GeneratorMap::from_strings(&ctx, &ctx, &["z1^2", "z2"], None).unwrap();
        // not a sphere map, but still a *-map; mark valid to test equivariance alone
        h.validated = true;
        let t = RotationAction::antipodal(2);
        assert_eq!(h.equivariance_failures(&t, &t).unwrap(), vec!["z1".to_string()]);
        let r3 = RotationAction::uniform(2, 3).unwrap();
        assert!(matches!(h.check_equivariance(&t, &r3), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn numeric_validation_agrees() {
        let ctx = generic(2);
        let mut good = GeneratorMap::identity(&ctx);
        let rep = good.validate(ValidationMode::Numeric { samples: 20, seed: 1, tolerance: 1e-9 }).unwrap();
        assert!(rep.valid, "{:?}", rep.failures);
        let mut bad = GeneratorMap::from_strings(&ctx, &ctx, &["z2", "z1"], None).unwrap();
        let rep = bad.validate(ValidationMode::Numeric { samples: 20, seed: 1, tolerance: 1e-9 }).unwrap();
        assert!(!rep.valid);
    }

    #[test]
    fn json_round_trip() {
        let ctx = generic(3);
        let h = kill_zn(&ctx).unwrap();
        let mut back = GeneratorMap::from_json_value(&h.to_json_value()).unwrap();
        assert!(back.validate(ValidationMode::Symbolic).unwrap().valid);
        assert_eq!(back.images(), h.images());
    }
}
