//! Rotation actions z_i ↦ α_i z_i, the antipodal map, graded projections,
//! conjugated actions R_U and the diagonal factorization R(M) = A·M·B.

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::algebra::{Context, Monomial, StarPolynomial};
use crate::config::EPS_EQ;
use crate::error::{Error, Result};
use crate::matrix::{coefficient_from_json, coefficient_to_json, PolyMatrix};
use crate::param::angle_from_json;
use crate::scalar::{Angle, Coefficient, Scalars};

/// z_i ↦ α_i z_i with every α_i a primitive k-th root of unity.
///
/// `x_odd` makes the central generator flip sign (x ↦ −x); it defaults to
/// true exactly for the antipodal map.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationAction {
    k: u64,
    alphas: Vec<Angle>,
    x_odd: bool,
}

impl RotationAction {
    pub fn new(k: u64, alphas: Vec<Angle>) -> Result<Self> {
        let x_odd = k == 2;
        Self::with_x_parity(k, alphas, x_odd)
    }

    pub fn with_x_parity(k: u64, alphas: Vec<Angle>, x_odd: bool) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidAction(format!("order {k} < 2")));
        }
        if alphas.is_empty() {
            return Err(Error::InvalidAction("no rotation angles".into()));
        }
        for (i, a) in alphas.iter().enumerate() {
            match a.denominator() {
                Some(d) if d == k => {}
                _ => {
                    return Err(Error::InvalidAction(format!(
                        "alpha_{} = w({a}) is not a primitive {k}-th root of unity",
                        i + 1
                    )))
                }
            }
        }
        if x_odd && !k.is_multiple_of(2) {
            return Err(Error::InvalidAction("x ↦ −x needs an even order".into()));
        }
        Ok(RotationAction { k, alphas, x_odd })
    }

    /// T: every generator negated.
    pub fn antipodal(n: usize) -> Self {
        RotationAction {
            k: 2,
            alphas: vec![Angle::half(); n],
            x_odd: true,
        }
    }

    /// All α_i = e^{2πi/k}.
    pub fn uniform(n: usize, k: u64) -> Result<Self> {
        Self::new(k, vec![Angle::exact(1, k as i64)?; n])
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Angle] {
        &self.alphas
    }

    pub fn x_odd(&self) -> bool {
        self.x_odd
    }

    /// e_i with α_i = ω^{e_i}, ω = e^{2πi/k}.
    pub fn exponents(&self) -> Vec<i64> {
        self.alphas
            .iter()
            .map(|a| match a {
                Angle::Exact(r) => r.numer() * (self.k as i64 / r.denom()),
                Angle::Float(_) => unreachable!("validated exact"),
            })
            .collect()
    }

    /// The class j of a monomial: R(m) = ω^j·m.
    pub fn monomial_class(&self, m: &Monomial) -> u64 {
        let k = self.k as i64;
        let mut total: i64 = self.exponents().iter().enumerate().map(|(i, e)| e * m.charge(i)).sum();
        if self.x_odd {
            total += (k / 2) * m.x_power() as i64;
        }
        total.rem_euclid(k) as u64
    }

    fn check_ctx(&self, ctx: &Context) -> Result<()> {
        if ctx.n() != self.n() {
            return Err(Error::ContextMismatch(format!(
                "action on {} generators, context has {}",
                self.n(),
                ctx.n()
            )));
        }
        if let Some(n) = ctx.conductor() {
            if n % self.k != 0 {
                return Err(Error::OutsideField {
                    angle: format!("1/{}", self.k),
                    conductor: n,
                });
            }
        }
        Ok(())
    }

    fn omega_pow(&self, scalars: &Scalars, j: i64) -> Coefficient {
        let a = Angle::exact(j, self.k as i64).expect("k ≥ 2");
        scalars.phase(&a).expect("checked field")
    }

    pub fn apply(&self, p: &StarPolynomial) -> Result<StarPolynomial> {
        self.check_ctx(p.ctx())?;
        let s = p.ctx().scalars();
        Ok(p.map_terms(|m, c| c.mul(&self.omega_pow(s, self.monomial_class(m) as i64))))
    }

    pub fn apply_matrix(&self, m: &PolyMatrix) -> Result<PolyMatrix> {
        m.try_map(|p| self.apply(p))
    }

    /// R^m(p).
    pub fn apply_power(&self, p: &StarPolynomial, power: i64) -> Result<StarPolynomial> {
        self.check_ctx(p.ctx())?;
        let s = p.ctx().scalars();
        Ok(p.map_terms(|m, c| c.mul(&self.omega_pow(s, self.monomial_class(m) as i64 * power))))
    }

    /// `Some(j)` if every monomial has class j, `None` if classes mix.
    pub fn homogeneity_class(&self, p: &StarPolynomial) -> Result<Option<u64>> {
        if p.ctx().n() != self.n() {
            return Err(Error::ContextMismatch("action and polynomial sizes differ".into()));
        }
        let mut classes = p.terms().keys().map(|m| self.monomial_class(m));
        let first = classes.next().ok_or(Error::ZeroPolynomial)?;
        Ok(classes.all(|c| c == first).then_some(first))
    }

    /// π_j by filtering monomials of class j.
    pub fn project_filter(&self, p: &StarPolynomial, j: u64) -> Result<StarPolynomial> {
        self.check_class(j)?;
        self.check_ctx(p.ctx())?;
        Ok(p.filter_terms(|m| self.monomial_class(m) == j))
    }

    /// π_j = (1/k) Σ_m ω^{−jm} R^m(p).
    pub fn project_fourier(&self, p: &StarPolynomial, j: u64) -> Result<StarPolynomial> {
        self.check_class(j)?;
        let ctx = p.ctx();
        let s = ctx.scalars();
        let mut acc = ctx.zero();
        let mut rm = p.clone();
        for m in 0..self.k as i64 {
            acc = &acc + &rm.scale(&self.omega_pow(s, -(j as i64) * m));
            rm = self.apply(&rm)?;
        }
        Ok(acc.scale(&s.rational(&BigRational::new(BigInt::from(1), BigInt::from(self.k)))))
    }

    /// π_j computed both ways; the two must agree.
    pub fn graded_project(&self, p: &StarPolynomial, j: u64) -> Result<StarPolynomial> {
        let a = self.project_filter(p, j)?;
        let b = self.project_fourier(p, j)?;
        if a != b {
            return Err(Error::ProjectionMismatch(j as usize));
        }
        Ok(a)
    }

    fn check_class(&self, j: u64) -> Result<()> {
        if j >= self.k {
            return Err(Error::InvalidAction(format!("class {j} outside Z_{}", self.k)));
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "k": self.k,
            "alphas": self.alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        });
        if self.x_odd != (self.k == 2) {
            v["x_odd"] = json!(self.x_odd);
        }
        v
    }

    /// `{"k": int, "alphas": ["p/k", ...], "x_odd": bool?}`.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let k = v
            .get("k")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("rotation needs integer `k`".into()))?;
        let alphas = v
            .get("alphas")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("rotation needs `alphas`".into()))?
            .iter()
            .map(angle_from_json)
            .collect::<Result<Vec<_>>>()?;
        let x_odd = v.get("x_odd").and_then(Value::as_bool).unwrap_or(k == 2);
        Self::with_x_parity(k, alphas, x_odd)
    }
}

/// A d×d unitary with constant entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarUnitary {
    scalars: Scalars,
    d: usize,
    entries: Vec<Coefficient>,
}

impl ScalarUnitary {
    pub fn new(scalars: &Scalars, d: usize, entries: Vec<Coefficient>) -> Result<Self> {
        if d == 0 || entries.len() != d * d {
            return Err(Error::InvalidUnitary(format!("{} entries for dimension {d}", entries.len())));
        }
        let entries = entries.iter().map(|c| scalars.embed(c)).collect::<Result<Vec<_>>>()?;
        let u = ScalarUnitary {
            scalars: scalars.clone(),
            d,
            entries,
        };
        let uu = u.mul(&u.adjoint());
        if !uu.is_identity() {
            return Err(Error::InvalidUnitary("U·U^* ≠ I".into()));
        }
        Ok(u)
    }

    pub fn identity(scalars: &Scalars, d: usize) -> Self {
        Self::diagonal(scalars, &vec![scalars.one(); d]).expect("identity is unitary")
    }

    pub fn diagonal(scalars: &Scalars, diag: &[Coefficient]) -> Result<Self> {
        let d = diag.len();
        let mut entries = vec![scalars.zero(); d * d];
        for (i, c) in diag.iter().enumerate() {
            entries[i * d + i] = c.clone();
        }
        Self::new(scalars, d, entries)
    }

    /// diag(ω^{e_0}, ω^{e_1}, ...), ω = e^{2πi/k}.
    pub fn root_diagonal(scalars: &Scalars, k: u64, exps: &[i64]) -> Result<Self> {
        let diag = exps
            .iter()
            .map(|&e| scalars.phase(&Angle::exact(e, k as i64)?))
            .collect::<Result<Vec<_>>>()?;
        Self::diagonal(scalars, &diag)
    }

    /// The permutation matrix with 1 at (σ(j), j).
    pub fn permutation(scalars: &Scalars, sigma: &[usize]) -> Result<Self> {
        let d = sigma.len();
        let mut entries = vec![scalars.zero(); d * d];
        for (j, &s) in sigma.iter().enumerate() {
            if s >= d {
                return Err(Error::InvalidUnitary("permutation index out of range".into()));
            }
            entries[s * d + j] = scalars.one();
        }
        Self::new(scalars, d, entries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn scalars(&self) -> &Scalars {
        &self.scalars
    }

    pub fn get(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[Coefficient] {
        &self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| i == j || self.get(i, j).is_zero()))
    }

    fn is_identity(&self) -> bool {
        (0..self.d).all(|i| {
            (0..self.d).all(|j| {
                let c = self.get(i, j);
                match c {
                    Coefficient::Exact(_) => (i == j && c.is_one()) || (i != j && c.is_zero()),
                    Coefficient::Float(z) => {
                        let target = if i == j { 1.0 } else { 0.0 };
                        (z - Complex64::new(target, 0.0)).norm() <= EPS_EQ
                    }
                }
            })
        })
    }

    fn mul(&self, other: &Self) -> Self {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = self.scalars.zero();
                for k in 0..d {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                entries.push(acc);
            }
        }
        ScalarUnitary {
            scalars: self.scalars.clone(),
            d,
            entries,
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let entries = (0..d * d).map(|idx| self.get(idx % d, idx / d).conj()).collect();
        ScalarUnitary {
            scalars: self.scalars.clone(),
            d,
            entries,
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.d != other.d || self.scalars != other.scalars {
            return Err(Error::InvalidUnitary("dimension or field mismatch".into()));
        }
        Ok(self.mul(other))
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut acc = Self::identity(&self.scalars, self.d);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// U^k = I.
    pub fn has_order_dividing(&self, k: u64) -> bool {
        self.pow(k).is_identity()
    }

    /// diag(U, …, U) with `copies` blocks, as constants in `ctx`.
    pub fn block_matrix(&self, ctx: &Arc<Context>, copies: usize) -> Result<PolyMatrix> {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d * copies * copies);
        for i in 0..d * copies {
            for j in 0..d * copies {
                if i / d == j / d {
                    entries.push(ctx.constant(ctx.scalars().embed(self.get(i % d, j % d))?));
                } else {
                    entries.push(ctx.zero());
                }
            }
        }
        PolyMatrix::new(ctx, d * copies, d * copies, entries)
    }

    pub fn to_complex(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.d, self.d, |i, j| self.get(i, j).to_complex())
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "rows": self.d,
            "cols": self.d,
            "entries": self.entries.iter().map(coefficient_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json_value(v: &Value, scalars: &Scalars) -> Result<Self> {
        let d = v
            .get("rows")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Json("unitary needs `rows`".into()))? as usize;
        if v.get("cols").and_then(Value::as_u64) != Some(d as u64) {
            return Err(Error::InvalidUnitary("unitary must be square".into()));
        }
        let entries = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("unitary needs `entries`".into()))?
            .iter()
            .map(|c| coefficient_from_json(c, scalars))
            .collect::<Result<Vec<_>>>()?;
        Self::new(scalars, d, entries)
    }
}

/// R_U(M) = Ũ^* R(M) Ũ with Ũ = diag(U, …, U).
pub fn apply_ru(u: &ScalarUnitary, r: &RotationAction, m: &PolyMatrix) -> Result<PolyMatrix> {
    let d = u.d();
    if !m.rows().is_multiple_of(d) || !m.cols().is_multiple_of(d) {
        return Err(Error::DimensionMismatch(format!(
            "unitary of size {d} does not tile a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !u.has_order_dividing(r.k()) {
        return Err(Error::InvalidUnitary(format!("U^{} ≠ I", r.k())));
    }
    let ctx = m.ctx();
    let left = u.adjoint().block_matrix(ctx, m.rows() / d)?;
    let right = u.block_matrix(ctx, m.cols() / d)?;
    left.mul(&r.apply_matrix(m)?)?.mul(&right)
}

pub fn is_ru_fixed(u: &ScalarUnitary, r: &RotationAction, m: &PolyMatrix) -> Result<bool> {
    Ok(&apply_ru(u, r, m)? == m)
}

/// Diagonal unitaries with R(M) = A·M·B.
#[derive(Clone, Debug)]
pub struct RotationFactors {
    /// A_ii = ω^{a_i}.
    pub a_exponents: Vec<u64>,
    /// B_jj = ω^{b_j}, with b_0 = 0.
    pub b_exponents: Vec<u64>,
    pub a: ScalarUnitary,
    pub b: ScalarUnitary,
}

impl RotationFactors {
    pub fn to_json_value(&self) -> Value {
        json!({
            "a_exponents": self.a_exponents,
            "b_exponents": self.b_exponents,
            "A": self.a.to_json_value(),
            "B": self.b.to_json_value(),
        })
    }
}

/// Solves a_i + b_j ≡ χ_ij (mod k) over the nonzero entries of M, where χ_ij
/// is the homogeneity class of M_ij, then verifies R(M) = A·M·B exactly.
///
/// The solution is normalized by b_0 = 0; connected components of the
/// row/column graph not touching column 0 are rooted at exponent 0.
pub fn factor_rotation(m: &PolyMatrix, r: &RotationAction) -> Result<RotationFactors> {
    let (rows, cols) = (m.rows(), m.cols());
    let k = r.k() as i64;
    let mut chi = vec![None; rows * cols];
    for (i, j, p) in m.nonzero_entries() {
        match r.homogeneity_class(p)? {
            Some(c) => chi[i * cols + j] = Some(c as i64),
            None => return Err(Error::InhomogeneousEntry { row: i + 1, col: j + 1 }),
        }
    }
    // nodes 0..rows are rows, rows..rows+cols are columns
    let mut value: Vec<Option<i64>> = vec![None; rows + cols];
    let mut roots: Vec<usize> = (rows..rows + cols).collect();
    roots.extend(0..rows);
    for root in roots {
        if value[root].is_some() {
            continue;
        }
        value[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(node) = queue.pop_front() {
            let v = value[node].expect("queued nodes are assigned");
            let neighbours: Vec<(usize, usize, usize)> = if node < rows {
                (0..cols).map(|j| (node, j, rows + j)).collect()
            } else {
                (0..rows).map(|i| (i, node - rows, i)).collect()
            };
            for (i, j, other) in neighbours {
                let Some(c) = chi[i * cols + j] else { continue };
                let want = (c - v).rem_euclid(k);
                match value[other] {
                    None => {
                        value[other] = Some(want);
                        queue.push_back(other);
                    }
                    Some(w) if w == want => {}
                    Some(_) => return Err(Error::InconsistentPhases { row: i + 1, col: j + 1 }),
                }
            }
        }
    }
    let a_exponents: Vec<u64> = value[..rows].iter().map(|v| v.unwrap_or(0) as u64).collect();
    let b_exponents: Vec<u64> = value[rows..].iter().map(|v| v.unwrap_or(0) as u64).collect();
    let s = m.ctx().scalars();
    let to_i = |v: &[u64]| v.iter().map(|&e| e as i64).collect::<Vec<_>>();
    let a = ScalarUnitary::root_diagonal(s, r.k(), &to_i(&a_exponents))?;
    let b = ScalarUnitary::root_diagonal(s, r.k(), &to_i(&b_exponents))?;
    let lhs = r.apply_matrix(m)?;
    let rhs = a.block_matrix(m.ctx(), 1)?.mul(m)?.mul(&b.block_matrix(m.ctx(), 1)?)?;
    if lhs != rhs {
        let (i, j) = (0..rows * cols)
            .find(|&idx| lhs.entries()[idx] != rhs.entries()[idx])
            .map(|idx| (idx / cols, idx % cols))
            .unwrap_or((0, 0));
        return Err(Error::InconsistentPhases { row: i + 1, col: j + 1 });
    }
    Ok(RotationFactors {
        a_exponents,
        b_exponents,
        a,
        b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse;
    use crate::param::ParameterMatrix;
    use crate::zgen::zgen;

    fn ctx(n: usize, extra: u64) -> Arc<Context> {
        let rho = ParameterMatrix::from_upper(n, |j, k| Angle::exact(1, (j + k + 2) as i64).unwrap());
        Context::new(rho, false, extra)
    }

    #[test]
    fn antipodal_classes() {
        let c = ctx(3, 2);
        let t = RotationAction::antipodal(3);
        let p = |s| parse(s, &c).unwrap();
        assert_eq!(t.homogeneity_class(&p("z1")).unwrap(), Some(1));
        assert_eq!(t.homogeneity_class(&p("z1 z1'")).unwrap(), Some(0));
        assert_eq!(t.apply(&p("z1 z2")).unwrap(), p("z1 z2"));
        assert!(matches!(t.homogeneity_class(&c.zero()), Err(Error::ZeroPolynomial)));
        assert_eq!(t.graded_project(&p("z1 + z1 z1'"), 1).unwrap(), p("z1"));
        assert!(t.graded_project(&p("z1"), 0).unwrap().is_zero());
    }

    #[test]
    fn order_three_mixing() {
        let c = ctx(3, 3);
        let r = RotationAction::uniform(3, 3).unwrap();
        let p = parse("z1 + z1 z2 z3", &c).unwrap();
        assert_eq!(r.homogeneity_class(&p).unwrap(), None);
        let rs = r.apply(&parse("z1'", &c).unwrap()).unwrap();
        assert_eq!(rs, parse("w(-1/3) z1'", &c).unwrap());
    }

    #[test]
    fn action_validation() {
        assert!(RotationAction::new(4, vec![Angle::exact(1, 2).unwrap()]).is_err());
        assert!(RotationAction::new(1, vec![Angle::zero()]).is_err());
        let r = RotationAction::new(5, vec![Angle::exact(2, 5).unwrap(); 2]).unwrap();
        assert_eq!(RotationAction::from_json_value(&r.to_json_value()).unwrap(), r);
        // conductor without fifth roots
        let c = ctx(2, 1);
        assert!(r.apply(&c.gen(0)).is_err());
    }

    #[test]
    fn zgen_two_factorization() {
        let c = ctx(2, 4);
        let r = RotationAction::uniform(2, 4).unwrap();
        let f = factor_rotation(&zgen(&c, 2).unwrap(), &r).unwrap();
        assert_eq!(f.a_exponents, vec![1, 3]);
        assert_eq!(f.b_exponents, vec![0, 0]);
    }

    #[test]
    fn identity_factorization_is_trivial() {
        let c = ctx(2, 3);
        let r = RotationAction::uniform(2, 3).unwrap();
        let f = factor_rotation(&PolyMatrix::identity(&c, 3), &r).unwrap();
        assert!(f.a_exponents.iter().chain(&f.b_exponents).all(|&e| e == 0));
    }

    #[test]
    fn inconsistent_and_inhomogeneous() {
        let c = ctx(2, 3);
        let r = RotationAction::uniform(2, 3).unwrap();
        let p = |s| parse(s, &c).unwrap();
        let bad = PolyMatrix::new(&c, 1, 1, vec![p("z1 + 1")]).unwrap();
        assert!(matches!(factor_rotation(&bad, &r), Err(Error::InhomogeneousEntry { .. })));
        let m = PolyMatrix::new(&c, 2, 2, vec![p("z1"), p("z2"), p("z1'"), p("z2")]).unwrap();
        assert!(matches!(factor_rotation(&m, &r), Err(Error::InconsistentPhases { .. })));
    }

    #[test]
    fn ru_with_identity_is_rotation() {
        let c = ctx(3, 3);
        let r = RotationAction::uniform(3, 3).unwrap();
        let z = zgen(&c, 3).unwrap();
        let u = ScalarUnitary::identity(c.scalars(), 2);
        assert_eq!(apply_ru(&u, &r, &z).unwrap(), r.apply_matrix(&z).unwrap());
        let u3 = ScalarUnitary::identity(c.scalars(), 3);
        assert!(apply_ru(&u3, &r, &z).is_err());
        let p = ScalarUnitary::permutation(c.scalars(), &[1, 0]).unwrap();
        assert!(apply_ru(&p, &r, &z).is_err(), "swap has order 2, not dividing 3");
    }

    #[test]
    fn unitary_checks() {
        let s = Scalars::exact(4);
        assert!(ScalarUnitary::new(&s, 1, vec![s.int(2)]).is_err());
        let u = ScalarUnitary::root_diagonal(&s, 4, &[1, 3]).unwrap();
        assert!(u.has_order_dividing(4) && !u.has_order_dividing(2));
        assert_eq!(ScalarUnitary::from_json_value(&u.to_json_value(), &s).unwrap(), u);
    }
}
