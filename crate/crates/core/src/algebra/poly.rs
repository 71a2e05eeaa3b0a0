use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::context::Context;
use super::monomial::Monomial;
use crate::error::{Error, Result};
use crate::scalar::Coefficient;

/// A finite sum of normal-form monomials with nonzero coefficients.
#[derive(Clone)]
pub struct StarPolynomial {
    ctx: Arc<Context>,
    terms: BTreeMap<Monomial, Coefficient>,
}

impl PartialEq for StarPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.terms == other.terms
    }
}

impl fmt::Debug for StarPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarPolynomial({})", super::parse::print(self))
    }
}

impl fmt::Display for StarPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::parse::print(self))
    }
}

impl StarPolynomial {
    pub fn zero(ctx: &Arc<Context>) -> Self {
        StarPolynomial {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, Monomial::one(ctx.n()), ctx.scalars().one())
    }

    pub fn monomial(ctx: &Arc<Context>, m: Monomial, c: Coefficient) -> Self {
        let mut p = Self::zero(ctx);
        p.accumulate(m, c);
        p
    }

    /// Builds a polynomial from (monomial, coefficient) pairs, validating each
    /// monomial against the context.
    pub fn from_terms(ctx: &Arc<Context>, terms: impl IntoIterator<Item = (Monomial, Coefficient)>) -> Result<Self> {
        let mut p = Self::zero(ctx);
        for (m, c) in terms {
            ctx.check_monomial(&m)?;
            let c = ctx.scalars().embed(&c)?;
            p.accumulate(m, c);
        }
        Ok(p)
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Coefficient> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single (monomial, coefficient) pair, if there is exactly one term.
    pub fn as_single_term(&self) -> Option<(&Monomial, &Coefficient)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Coefficient of `m` (zero if absent).
    pub fn coefficient(&self, m: &Monomial) -> Coefficient {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ctx.scalars().zero())
    }

    /// The constant term if the polynomial is a scalar.
    pub fn as_constant(&self) -> Option<Coefficient> {
        match self.terms.len() {
            0 => Some(self.ctx.scalars().zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn accumulate(&mut self, m: Monomial, c: Coefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch("polynomials belong to different contexts".into()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg_poly())
    }

    pub fn neg_poly(&self) -> Self {
        StarPolynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, s: &Coefficient) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), c.mul(s));
        }
        out
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = Self::zero(&self.ctx);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let exps = m1.product_phase_exponents(m2);
                let c = self.ctx.apply_phase(&c1.mul(c2), &exps);
                out.accumulate(m1.merged(m2), c);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// p^*: conjugate coefficients, swap exponents, re-normal-order.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let exps = m.adjoint_phase_exponents();
            let c = self.ctx.apply_phase(&c.conj(), &exps);
            out.accumulate(m.swapped(), c);
        }
        out
    }

    /// Applies `f` to every monomial coefficient; zero results are dropped.
    pub fn map_terms(&self, mut f: impl FnMut(&Monomial, &Coefficient) -> Coefficient) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), f(m, c));
        }
        out
    }

    /// Keeps only the monomials satisfying `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        StarPolynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Same terms, read in another context of equal shape (e.g. an enlarged
    /// coefficient field).
    pub fn moved_to(&self, ctx: &Arc<Context>) -> Result<Self> {
        Self::from_terms(ctx, self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }
}

impl Add for &StarPolynomial {
    type Output = StarPolynomial;
    fn add(self, rhs: &StarPolynomial) -> StarPolynomial {
        self.try_add(rhs).expect("context mismatch in +")
    }
}

impl Sub for &StarPolynomial {
    type Output = StarPolynomial;
    fn sub(self, rhs: &StarPolynomial) -> StarPolynomial {
        self.try_sub(rhs).expect("context mismatch in -")
    }
}

impl Mul for &StarPolynomial {
    type Output = StarPolynomial;
    fn mul(self, rhs: &StarPolynomial) -> StarPolynomial {
        self.try_mul(rhs).expect("context mismatch in *")
    }
}

impl Neg for &StarPolynomial {
    type Output = StarPolynomial;
    fn neg(self) -> StarPolynomial {
        self.neg_poly()
    }
}
