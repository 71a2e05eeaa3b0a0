use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::monomial::Monomial;
use super::poly::StarPolynomial;
use crate::error::{Error, Result};
use crate::param::ParameterMatrix;
use crate::scalar::{lcm, Angle, Coefficient, Scalars};

/// Generator count, parameter matrix, optional central `x`, and the
/// coefficient domain shared by every polynomial built in it.
#[derive(Debug)]
pub struct Context {
    rho: ParameterMatrix,
    has_x: bool,
    scalars: Scalars,
    /// θ_{jk}·N in exact mode.
    rho_exp: Option<Vec<Vec<i64>>>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.has_x == other.has_x && self.scalars == other.scalars && self.rho == other.rho)
    }
}

/// Star-parity of a generator factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Star {
    Plain,
    Adjoint,
}

impl Star {
    pub fn sign(self) -> i64 {
        match self {
            Star::Plain => 1,
            Star::Adjoint => -1,
        }
    }
}

impl Context {
    /// Exact when every angle is rational; the conductor is the lcm of the
    /// angle denominators and `extra`.
    pub fn new(rho: ParameterMatrix, has_x: bool, extra: u64) -> Arc<Self> {
        let scalars = match rho.conductor() {
            Some(n) => Scalars::exact(lcm(n, extra.max(1))),
            None => Scalars::Float,
        };
        Self::with_scalars(rho, has_x, scalars).expect("conductor covers the angles")
    }

    /// The odd sphere C(S^{2n−1}_ρ).
    pub fn odd(rho: ParameterMatrix) -> Arc<Self> {
        Self::new(rho, false, 1)
    }

    /// The even sphere C(S^{2n}_ρ).
    pub fn even(rho: ParameterMatrix) -> Arc<Self> {
        Self::new(rho, true, 1)
    }

    /// Float coefficients regardless of the angles.
    pub fn float(rho: ParameterMatrix, has_x: bool) -> Arc<Self> {
        Self::with_scalars(rho, has_x, Scalars::Float).expect("float scalars accept any angle")
    }

    pub fn with_scalars(rho: ParameterMatrix, has_x: bool, scalars: Scalars) -> Result<Arc<Self>> {
        let rho_exp = match &scalars {
            Scalars::Exact(f) => {
                let n = f.conductor() as i64;
                let mut m = vec![vec![0i64; rho.n()]; rho.n()];
                for (j, row) in m.iter_mut().enumerate() {
                    for (k, slot) in row.iter_mut().enumerate() {
                        match rho.angle(j, k) {
                            Angle::Exact(r) if n % r.denom() == 0 => *slot = r.numer() * (n / r.denom()),
                            a => {
                                return Err(Error::OutsideField {
                                    angle: a.to_string(),
                                    conductor: f.conductor(),
                                })
                            }
                        }
                    }
                }
                Some(m)
            }
            Scalars::Float => None,
        };
        Ok(Arc::new(Context {
            rho,
            has_x,
            scalars,
            rho_exp,
        }))
    }

    /// Same relations, coefficient field enlarged by `extra`.
    pub fn extended(&self, extra: u64) -> Arc<Self> {
        match self.scalars.conductor() {
            Some(n) => Self::with_scalars(self.rho.clone(), self.has_x, Scalars::exact(lcm(n, extra)))
                .expect("larger field"),
            None => Self::float(self.rho.clone(), self.has_x),
        }
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }

    pub fn rho(&self) -> &ParameterMatrix {
        &self.rho
    }

    pub fn has_x(&self) -> bool {
        self.has_x
    }

    pub fn scalars(&self) -> &Scalars {
        &self.scalars
    }

    pub fn conductor(&self) -> Option<u64> {
        self.scalars.conductor()
    }

    pub fn is_exact(&self) -> bool {
        self.scalars.is_exact()
    }

    /// ρ_{jk} as a coefficient.
    pub fn rho_entry(&self, j: usize, k: usize) -> Coefficient {
        self.scalars.phase(&self.rho.angle(j, k)).expect("context field contains ρ")
    }

    pub fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.n() {
            Err(Error::IndexOutOfRange { index: j + 1, n: self.n() })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "monomial has {} generators, context has {}",
                m.n(),
                self.n()
            )));
        }
        if m.c > 0 && !self.has_x {
            return Err(Error::XInOddSphere);
        }
        Ok(())
    }

    /// Phase acquired when a generator-k factor of parity `sk` moves left past a
    /// generator-j factor of parity `sj` (j < k): ρ_{jk}^{sj·sk}.
    pub fn swap_phase(&self, j: usize, sj: Star, k: usize, sk: Star) -> Result<Coefficient> {
        let angle = swap_phase(j, sj, k, sk, &self.rho)?;
        self.scalars.phase(&angle)
    }

    fn phase_from_exponents(&self, exps: &BTreeMap<(usize, usize), i64>) -> Coefficient {
        match &self.rho_exp {
            Some(table) => {
                let e: i64 = exps.iter().map(|(&(j, k), &m)| table[j][k] * m).sum();
                self.scalars.zeta_pow(e).expect("exact scalars")
            }
            None => {
                let t: f64 = exps.iter().map(|(&(j, k), &m)| self.rho.angle(j, k).to_f64() * m as f64).sum();
                Coefficient::Float(Complex64::from_polar(1.0, std::f64::consts::TAU * t.rem_euclid(1.0)))
            }
        }
    }

    /// Multiplies `c` by the phase with the given symbolic exponents.
    pub(crate) fn apply_phase(&self, c: &Coefficient, exps: &BTreeMap<(usize, usize), i64>) -> Coefficient {
        if exps.is_empty() {
            return c.clone();
        }
        match (&self.rho_exp, c) {
            (Some(table), Coefficient::Exact(e)) => {
                let total: i64 = exps.iter().map(|(&(j, k), &m)| table[j][k] * m).sum();
                Coefficient::Exact(e.mul_zeta(total))
            }
            _ => c.mul(&self.phase_from_exponents(exps)),
        }
    }

    /// Normal-ordered product of two monomials: (phase, monomial).
    pub fn mono_mul(&self, m1: &Monomial, m2: &Monomial) -> Result<(Coefficient, Monomial)> {
        self.check_monomial(m1)?;
        self.check_monomial(m2)?;
        let exps = m1.product_phase_exponents(m2);
        Ok((self.phase_from_exponents(&exps), m1.merged(m2)))
    }

    pub fn zero(self: &Arc<Self>) -> StarPolynomial {
        StarPolynomial::zero(self)
    }

    pub fn one(self: &Arc<Self>) -> StarPolynomial {
        StarPolynomial::one(self)
    }

    pub fn constant(self: &Arc<Self>, c: Coefficient) -> StarPolynomial {
        StarPolynomial::monomial(self, Monomial::one(self.n()), c)
    }

    /// z_j, zero-based.
    pub fn gen(self: &Arc<Self>, j: usize) -> StarPolynomial {
        StarPolynomial::monomial(self, Monomial::gen(self.n(), j), self.scalars.one())
    }

    /// z_j^*, zero-based.
    pub fn gen_star(self: &Arc<Self>, j: usize) -> StarPolynomial {
        StarPolynomial::monomial(self, Monomial::gen_star(self.n(), j), self.scalars.one())
    }

    pub fn x(self: &Arc<Self>) -> Result<StarPolynomial> {
        if !self.has_x {
            return Err(Error::XInOddSphere);
        }
        Ok(StarPolynomial::monomial(self, Monomial::x(self.n()), self.scalars.one()))
    }

    /// z_j z_j^*.
    pub fn norm_square(self: &Arc<Self>, j: usize) -> StarPolynomial {
        let mut m = Monomial::one(self.n());
        m.a[j] = 1;
        m.b[j] = 1;
        StarPolynomial::monomial(self, m, self.scalars.one())
    }

    /// Σ_{j<k} z_j z_j^*.
    pub fn partial_sphere_sum(self: &Arc<Self>, k: usize) -> StarPolynomial {
        let mut p = self.zero();
        for j in 0..k.min(self.n()) {
            p = &p + &self.norm_square(j);
        }
        p
    }

    /// Σ z_j z_j^* (+ x² on even spheres): the left side of the sphere relation.
    pub fn sphere_polynomial(self: &Arc<Self>) -> StarPolynomial {
        let mut p = self.partial_sphere_sum(self.n());
        if self.has_x {
            let mut m = Monomial::one(self.n());
            m.c = 2;
            p = &p + &StarPolynomial::monomial(self, m, self.scalars.one());
        }
        p
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({ "rho": self.rho.to_json_value(), "even": self.has_x });
        if let Some(n) = self.conductor() {
            v["conductor"] = json!(n);
        }
        v
    }

    /// `{"rho": ParameterMatrix, "even": bool, "conductor": int?}`, or a bare
    /// parameter matrix.
    pub fn from_json_value(v: &Value) -> Result<Arc<Self>> {
        if v.get("angles").is_some() {
            return Ok(Self::odd(ParameterMatrix::from_json_value(v)?));
        }
        let rho = ParameterMatrix::from_json_value(v.get("rho").ok_or_else(|| Error::Json("missing `rho`".into()))?)?;
        let has_x = v.get("even").and_then(Value::as_bool).unwrap_or(false);
        let extra = v.get("conductor").and_then(Value::as_u64).unwrap_or(1);
        let float = v.get("float").and_then(Value::as_bool).unwrap_or(false);
        if float {
            return Ok(Self::float(rho, has_x));
        }
        match rho.conductor() {
            Some(n) if !extra.is_multiple_of(n) && v.get("conductor").is_some() => {
                Err(Error::ContextMismatch(format!("conductor {extra} is not a multiple of {n}")))
            }
            _ => Ok(Self::new(rho, has_x, extra)),
        }
    }
}

/// ρ_{jk}^{sj·sk} as an angle: the phase when a generator-k factor moves left
/// past a generator-j factor, j < k.
pub fn swap_phase(j: usize, sj: Star, k: usize, sk: Star, rho: &ParameterMatrix) -> Result<Angle> {
    let n = rho.n();
    for idx in [j, k] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx + 1, n });
        }
    }
    if j == k {
        return Err(Error::SameIndex(j + 1));
    }
    if j > k {
        return Err(Error::IndexOrder { j: j + 1, k: k + 1 });
    }
    Ok(rho.angle(j, k).times(sj.sign() * sk.sign()))
}

/// Closed-form phase of m1·m2 as an angle.
pub fn mono_phase(m1: &Monomial, m2: &Monomial, rho: &ParameterMatrix) -> Result<Angle> {
    if m1.n() != rho.n() || m2.n() != rho.n() {
        return Err(Error::DimensionMismatch("monomial and parameter matrix sizes differ".into()));
    }
    Ok(m1
        .product_phase_exponents(m2)
        .iter()
        .fold(Angle::zero(), |acc, (&(j, k), &e)| acc.add(&rho.angle(j, k).times(e))))
}
