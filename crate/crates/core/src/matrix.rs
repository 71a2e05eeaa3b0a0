//! Matrices over [`StarPolynomial`] sharing one context.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{Context, Monomial, StarPolynomial};
use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Scalars};

#[derive(Clone, PartialEq)]
pub struct PolyMatrix {
    ctx: Arc<Context>,
    rows: usize,
    cols: usize,
    entries: Vec<StarPolynomial>,
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PolyMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
            write!(f, "[ {} ]", padded.join("  "))?;
        }
        Ok(())
    }
}

impl PolyMatrix {
    pub fn new(ctx: &Arc<Context>, rows: usize, cols: usize, entries: Vec<StarPolynomial>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.ctx() != ctx) {
            return Err(Error::ContextMismatch("matrix entries belong to different contexts".into()));
        }
        Ok(PolyMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(ctx: &Arc<Context>, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> StarPolynomial) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        PolyMatrix {
            ctx: ctx.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(ctx: &Arc<Context>, rows: usize, cols: usize) -> Self {
        Self::from_fn(ctx, rows, cols, |_, _| ctx.zero())
    }

    pub fn identity(ctx: &Arc<Context>, d: usize) -> Self {
        Self::from_fn(ctx, d, d, |i, j| if i == j { ctx.one() } else { ctx.zero() })
    }

    /// Diagonal matrix of constants.
    pub fn scalar_diag(ctx: &Arc<Context>, coeffs: &[Coefficient]) -> Self {
        let d = coeffs.len();
        Self::from_fn(ctx, d, d, |i, j| if i == j { ctx.constant(coeffs[i].clone()) } else { ctx.zero() })
    }

    /// `p·I`.
    pub fn scalar_multiple_of_identity(p: &StarPolynomial, d: usize) -> Self {
        let ctx = p.ctx();
        Self::from_fn(ctx, d, d, |i, j| if i == j { p.clone() } else { ctx.zero() })
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[StarPolynomial] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &StarPolynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: StarPolynomial) -> Result<()> {
        if p.ctx() != &self.ctx {
            return Err(Error::ContextMismatch("entry context differs from matrix".into()));
        }
        self.entries[i * self.cols + j] = p;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(StarPolynomial::is_zero)
    }

    /// Nonzero entries as (row, col, polynomial).
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, &StarPolynomial)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(idx, p)| (idx / self.cols, idx % self.cols, p))
            .collect()
    }

    pub fn map(&self, f: impl Fn(&StarPolynomial) -> StarPolynomial + Sync + Send) -> Self {
        PolyMatrix {
            ctx: self.ctx.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.par_iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&StarPolynomial) -> Result<StarPolynomial> + Sync + Send) -> Result<Self> {
        let entries = self.entries.par_iter().map(f).collect::<Result<Vec<_>>>()?;
        let ctx = entries.first().map(|e| e.ctx().clone()).unwrap_or_else(|| self.ctx.clone());
        Self::new(&ctx, self.rows, self.cols, entries)
    }

    fn check_context(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch("matrices belong to different contexts".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(PolyMatrix { entries, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|p| -p)
    }

    /// Left multiplication of every entry by `p`.
    pub fn scale_left(&self, p: &StarPolynomial) -> Result<Self> {
        self.try_map(|e| p.try_mul(e))
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        self.map(|p| p.scale(c))
    }

    /// Matrix product over the noncommutative ring; entries are expanded in
    /// parallel.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (r, c, inner) = (self.rows, other.cols, self.cols);
        let entries = (0..r * c)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / c, idx % c);
                let mut acc = self.ctx.zero();
                for k in 0..inner {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                acc
            })
            .collect();
        Ok(PolyMatrix {
            ctx: self.ctx.clone(),
            rows: r,
            cols: c,
            entries,
        })
    }

    /// Conjugate transpose with entrywise adjoint.
    pub fn adjoint(&self) -> Self {
        let entries = (0..self.rows * self.cols)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / self.rows, idx % self.rows);
                self.get(j, i).adjoint()
            })
            .collect();
        PolyMatrix {
            ctx: self.ctx.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Block-diagonal [[self, 0], [0, other]].
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.check_context(other)?;
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Ok(Self::from_fn(&self.ctx, r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols).clone()
            } else {
                self.ctx.zero()
            }
        }))
    }

    /// [[a, b], [c, d]] from four blocks with compatible shapes.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        for m in [b, c, d] {
            a.check_context(m)?;
        }
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::DimensionMismatch("incompatible 2x2 block shapes".into()));
        }
        let (r, cc) = (a.rows + c.rows, a.cols + b.cols);
        Ok(Self::from_fn(&a.ctx, r, cc, |i, j| {
            let (top, left) = (i < a.rows, j < a.cols);
            let (ii, jj) = (if top { i } else { i - a.rows }, if left { j } else { j - a.cols });
            match (top, left) {
                (true, true) => a.get(ii, jj),
                (true, false) => b.get(ii, jj),
                (false, true) => c.get(ii, jj),
                (false, false) => d.get(ii, jj),
            }
            .clone()
        }))
    }

    /// Diagonal entries as constants, if the matrix is a scalar diagonal.
    pub fn as_scalar_diagonal(&self) -> Option<Vec<Coefficient>> {
        if !self.is_square() {
            return None;
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let c = self.get(i, j).as_constant()?;
                if i == j {
                    out.push(c);
                } else if !c.is_zero() {
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Equality as formal *-monomial matrices, across contexts: exponents are
    /// compared with unused trailing generators dropped, coefficients in a
    /// common field (or to within `EPS_EQ` when either side is float).
    pub fn formally_equal(&self, other: &Self) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let common = match (self.ctx.scalars().conductor(), other.ctx.scalars().conductor()) {
            (Some(a), Some(b)) => Scalars::exact(crate::scalar::lcm(a, b)),
            _ => Scalars::Float,
        };
        self.entries.iter().zip(&other.entries).all(|(p, q)| {
            let (a, b) = (formal_terms(p, &common), formal_terms(q, &common));
            a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && x.1.same(&y.1))
        })
    }

    /// Same entries read in another context of equal shape.
    pub fn moved_to(&self, ctx: &Arc<Context>) -> Result<Self> {
        let entries = self.entries.iter().map(|p| p.moved_to(ctx)).collect::<Result<Vec<_>>>()?;
        Self::new(ctx, self.rows, self.cols, entries)
    }

    /// `{"rows", "cols", "entries": [[term, ...], ...], "context"}`, one term
    /// list per entry in row-major order.
    pub fn to_json_value(&self) -> Value {
        let entries: Vec<Value> = self.entries.iter().map(poly_to_json).collect();
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": entries,
            "context": self.ctx.to_json_value(),
        })
    }

    /// Reads a matrix; `ctx` takes precedence over an embedded context.
    pub fn from_json_value(v: &Value, ctx: Option<&Arc<Context>>) -> Result<Self> {
        let ctx = match (ctx, v.get("context")) {
            (Some(c), _) => c.clone(),
            (None, Some(c)) => Context::from_json_value(c)?,
            (None, None) => return Err(Error::Json("matrix has no context and none was supplied".into())),
        };
        let rows = json_usize(v, "rows")?;
        let cols = json_usize(v, "cols")?;
        let raw = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Json("missing `entries` array".into()))?;
        let entries = raw.iter().map(|e| poly_from_json(e, &ctx)).collect::<Result<Vec<_>>>()?;
        Self::new(&ctx, rows, cols, entries)
    }
}

fn json_usize(v: &Value, key: &str) -> Result<usize> {
    v.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| Error::Json(format!("missing or invalid `{key}`")))
}

fn bigint_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(i) => json!(i),
        None => Value::String(b.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Json(format!("non-integer `{n}`"))),
        Value::String(s) => s.parse().map_err(|_| Error::Json(format!("bad integer `{s}`"))),
        other => Err(Error::Json(format!("expected integer, got {other}"))),
    }
}

type FormalKey = (Vec<u32>, Vec<u32>, u32);

enum FormalCoeff {
    Exact(Coefficient),
    Float(Complex64),
}

impl FormalCoeff {
    fn same(&self, other: &Self) -> bool {
        match (self, other) {
            (FormalCoeff::Exact(a), FormalCoeff::Exact(b)) => a == b,
            (FormalCoeff::Float(a), FormalCoeff::Float(b)) => (a - b).norm() < crate::config::EPS_EQ,
            _ => false,
        }
    }
}

fn formal_terms(p: &StarPolynomial, common: &Scalars) -> Vec<(FormalKey, FormalCoeff)> {
    let trim = |v: &[u32]| {
        let end = v.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        v[..end].to_vec()
    };
    let mut out: Vec<(FormalKey, FormalCoeff)> = p
        .terms()
        .iter()
        .map(|(m, c)| {
            let key = (trim(m.plain()), trim(m.starred()), m.x_power());
            let coeff = match common.embed(c) {
                Ok(e @ Coefficient::Exact(_)) => FormalCoeff::Exact(e),
                _ => FormalCoeff::Float(c.to_complex()),
            };
            (key, coeff)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn coefficient_to_json(c: &Coefficient) -> Value {
    match c {
        Coefficient::Exact(e) => json!({
            "num": e.numerators().iter().map(bigint_to_json).collect::<Vec<_>>(),
            "den": bigint_to_json(e.denominator()),
        }),
        Coefficient::Float(z) => json!({ "re": z.re, "im": z.im }),
    }
}

pub fn coefficient_from_json(v: &Value, scalars: &Scalars) -> Result<Coefficient> {
    if let (Some(re), Some(im)) = (v.get("re").and_then(Value::as_f64), v.get("im").and_then(Value::as_f64)) {
        return scalars.complex(Complex64::new(re, im));
    }
    let num = v
        .get("num")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Json("coefficient needs `num`/`den` or `re`/`im`".into()))?
        .iter()
        .map(bigint_from_json)
        .collect::<Result<Vec<_>>>()?;
    let den = bigint_from_json(v.get("den").ok_or_else(|| Error::Json("missing `den`".into()))?)?;
    scalars.from_parts(num, den)
}

pub fn poly_to_json(p: &StarPolynomial) -> Value {
    Value::Array(
        p.terms()
            .iter()
            .map(|(m, c)| {
                json!({
                    "mono": { "a": m.plain(), "b": m.starred(), "c": m.x_power() },
                    "coeff": coefficient_to_json(c),
                })
            })
            .collect(),
    )
}

pub fn poly_from_json(v: &Value, ctx: &Arc<Context>) -> Result<StarPolynomial> {
    let terms = v.as_array().ok_or_else(|| Error::Json("polynomial must be a term array".into()))?;
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let mono = t.get("mono").ok_or_else(|| Error::Json("term without `mono`".into()))?;
        let exps = |key: &str| -> Result<Vec<u32>> {
            Ok(serde_json::from_value(mono.get(key).cloned().unwrap_or(Value::Null))?)
        };
        let (a, b) = (exps("a")?, exps("b")?);
        if a.len() != b.len() {
            return Err(Error::Json("exponent vectors differ in length".into()));
        }
        let c = mono.get("c").and_then(Value::as_u64).unwrap_or(0) as u32;
        let coeff = coefficient_from_json(
            t.get("coeff").ok_or_else(|| Error::Json("term without `coeff`".into()))?,
            ctx.scalars(),
        )?;
        out.push((Monomial::new(a, b, c), coeff));
    }
    StarPolynomial::from_terms(ctx, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse;
    use crate::param::ParameterMatrix;
    use crate::scalar::Angle;

    fn ctx() -> Arc<Context> {
        let rho = ParameterMatrix::from_upper(3, |j, k| Angle::exact(1, (2 * (j + k) + 1) as i64).unwrap());
        Context::odd(rho)
    }

    fn m2(ctx: &Arc<Context>, e: [&str; 4]) -> PolyMatrix {
        let entries = e.iter().map(|s| parse(s, ctx).unwrap()).collect();
        PolyMatrix::new(ctx, 2, 2, entries).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let c = ctx();
        let m = m2(&c, ["z1 z2", "z3'", "2 z2", "z1' z3 - 1"]);
        let i = PolyMatrix::identity(&c, 2);
        assert_eq!(i.mul(&m).unwrap(), m);
        assert_eq!(m.mul(&i).unwrap(), m);
    }

    #[test]
    fn adjoint_reverses_products() {
        let c = ctx();
        let m = m2(&c, ["z1", "z2 z3", "z3'", "w(1/3) z2'"]);
        let n = m2(&c, ["z2", "z1'", "z3 z1", "1/2"]);
        let lhs = m.mul(&n).unwrap().adjoint();
        let rhs = n.adjoint().mul(&m.adjoint()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn shape_errors() {
        let c = ctx();
        let a = PolyMatrix::zeros(&c, 2, 3);
        assert!(matches!(a.mul(&a), Err(Error::DimensionMismatch(_))));
        assert!(a.add(&PolyMatrix::zeros(&c, 3, 2)).is_err());
        assert!(PolyMatrix::new(&c, 2, 2, vec![c.one()]).is_err());
    }

    #[test]
    fn blocks_and_sums() {
        let c = ctx();
        let a = m2(&c, ["z1", "0", "0", "z1'"]);
        let s = a.direct_sum(&PolyMatrix::identity(&c, 1)).unwrap();
        assert_eq!((s.rows(), s.cols()), (3, 3));
        assert_eq!(s.get(2, 2), &c.one());
        assert!(s.get(0, 2).is_zero());
        let z = PolyMatrix::zeros(&c, 2, 2);
        let b = PolyMatrix::block2(&a, &z, &z, &a).unwrap();
        assert_eq!(b, a.direct_sum(&a).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        let m = m2(&c, ["z1 z2 - w(2/5) z3'", "(1 + w(1/15)) z2'^2", "0", "-7/3"]);
        let back = PolyMatrix::from_json_value(&m.to_json_value(), None).unwrap();
        assert_eq!(back, m);
        let again = PolyMatrix::from_json_value(&m.to_json_value(), Some(&c)).unwrap();
        assert_eq!(again, m);
    }
}
