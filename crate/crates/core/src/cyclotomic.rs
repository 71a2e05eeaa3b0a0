//! Exact arithmetic in the cyclotomic field Q(ζ_N).
//!
//! Elements are stored in the power basis 1, ζ, …, ζ^{φ(N)−1} with integer
//! numerators over one positive common denominator. Products are reduced
//! modulo the N-th cyclotomic polynomial, so two elements are equal iff their
//! stored coordinates are identical.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The field Q(ζ_N) together with the reduction table for powers of ζ.
#[derive(Debug)]
pub struct CyclotomicField {
    conductor: u64,
    degree: usize,
    /// Monic Φ_N, lowest degree first.
    modulus: Vec<i64>,
    /// `powers[e]` holds the power-basis coordinates of ζ^e for 0 ≤ e < N.
    powers: Vec<Vec<i64>>,
}

pub fn totient(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Integer coefficients of Φ_n, lowest degree first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    // x^n - 1 divided by Φ_d for every proper divisor d.
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            poly = exact_div(&poly, &cyclotomic_polynomial(d));
        }
    }
    poly
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = num.len() - dd;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

impl CyclotomicField {
    pub fn new(conductor: u64) -> Arc<Self> {
        assert!(conductor >= 1, "conductor must be positive");
        let modulus = cyclotomic_polynomial(conductor);
        let degree = modulus.len() - 1;
        let mut powers = Vec::with_capacity(conductor as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..conductor {
            powers.push(cur.clone());
            // multiply by ζ and reduce the overflow coefficient
            let top = cur[degree - 1];
            let mut next = vec![0i64; degree];
            next[1..degree].copy_from_slice(&cur[..(degree - 1)]);
            if top != 0 {
                for i in 0..degree {
                    next[i] -= top * modulus[i];
                }
            }
            cur = next;
        }
        Arc::new(CyclotomicField {
            conductor,
            degree,
            modulus,
            powers,
        })
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// φ(N), the dimension over Q.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    fn power_coords(&self, e: i64) -> &[i64] {
        &self.powers[e.rem_euclid(self.conductor as i64) as usize]
    }
}

/// An element of Q(ζ_N).
#[derive(Clone)]
pub struct CycloElem {
    field: Arc<CyclotomicField>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CycloElem {
    fn eq(&self, other: &Self) -> bool {
        self.field.conductor == other.field.conductor
            && self.den == other.den
            && self.num == other.num
    }
}

impl Eq for CycloElem {}

impl fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloElem(N={}, num={:?}, den={})", self.field.conductor, self.num, self.den)
    }
}

impl CycloElem {
    pub fn zero(field: &Arc<CyclotomicField>) -> Self {
        CycloElem {
            field: field.clone(),
            num: vec![BigInt::zero(); field.degree],
            den: BigInt::one(),
        }
    }

    pub fn from_rational(field: &Arc<CyclotomicField>, r: &BigRational) -> Self {
        let mut num = vec![BigInt::zero(); field.degree];
        num[0] = r.numer().clone();
        CycloElem {
            field: field.clone(),
            num,
            den: r.denom().clone(),
        }
        .normalized()
    }

    pub fn one(field: &Arc<CyclotomicField>) -> Self {
        Self::from_rational(field, &BigRational::one())
    }

    /// ζ_N^e.
    pub fn zeta_pow(field: &Arc<CyclotomicField>, e: i64) -> Self {
        CycloElem {
            field: field.clone(),
            num: field.power_coords(e).iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// Builds an element from raw coordinates; the result is normalized.
    pub fn from_parts(field: &Arc<CyclotomicField>, num: Vec<BigInt>, den: BigInt) -> Option<Self> {
        if num.len() != field.degree || den.is_zero() {
            return None;
        }
        Some(
            CycloElem {
                field: field.clone(),
                num,
                den,
            }
            .normalized(),
        )
    }

    pub fn field(&self) -> &Arc<CyclotomicField> {
        &self.field
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    fn normalized(mut self) -> Self {
        if self.den.is_negative() {
            self.den = -self.den;
            for c in self.num.iter_mut() {
                *c = -std::mem::take(c);
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            if !c.is_zero() {
                g = g.gcd(c);
            }
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
        } else if !g.is_one() {
            self.den /= &g;
            for c in self.num.iter_mut() {
                *c /= &g;
            }
        }
        self
    }

    fn check_field(&self, other: &Self) {
        assert_eq!(
            self.field.conductor, other.field.conductor,
            "cyclotomic coefficients from different fields"
        );
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    /// Returns the value as a rational if it lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_field(other);
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let num = if self.den == other.den {
            self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect()
        } else {
            self.num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| a * &other.den + b * &self.den)
                .collect()
        };
        let den = if self.den == other.den {
            self.den.clone()
        } else {
            &self.den * &other.den
        };
        CycloElem {
            field: self.field.clone(),
            num,
            den,
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        CycloElem {
            field: self.field.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_field(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let d = self.field.degree;
        let mut conv = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    conv[i + j] += a * b;
                }
            }
        }
        let num = self.reduce(conv.into_iter().enumerate().map(|(e, c)| (e as i64, c)));
        CycloElem {
            field: self.field.clone(),
            num,
            den: &self.den * &other.den,
        }
        .normalized()
    }

    fn reduce(&self, terms: impl Iterator<Item = (i64, BigInt)>) -> Vec<BigInt> {
        let d = self.field.degree;
        let mut out = vec![BigInt::zero(); d];
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            let e = e.rem_euclid(self.field.conductor as i64);
            if (e as usize) < d {
                out[e as usize] += c;
            } else {
                for (slot, &p) in out.iter_mut().zip(self.field.power_coords(e)) {
                    if p != 0 {
                        *slot += &c * p;
                    }
                }
            }
        }
        out
    }

    /// Multiplies by ζ^e.
    pub fn mul_zeta(&self, e: i64) -> Self {
        if e.rem_euclid(self.field.conductor as i64) == 0 {
            return self.clone();
        }
        let num = self.reduce(self.num.iter().enumerate().map(|(i, c)| (i as i64 + e, c.clone())));
        CycloElem {
            field: self.field.clone(),
            num,
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycloElem {
            field: self.field.clone(),
            num: self.num.iter().map(|c| c * r.numer()).collect(),
            den: &self.den * r.denom(),
        }
        .normalized()
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        let num = self.reduce(self.num.iter().enumerate().map(|(i, c)| (-(i as i64), c.clone())));
        CycloElem {
            field: self.field.clone(),
            num,
            den: self.den.clone(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.field.conductor as f64;
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                let theta = std::f64::consts::TAU * i as f64 / n;
                acc += Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), theta);
            }
        }
        acc / den
    }

    /// Writes the element as r·ζ^e when it has that shape.
    pub fn as_scaled_root(&self) -> Option<(BigRational, u64)> {
        if self.is_zero() {
            return None;
        }
        for e in 0..self.field.conductor {
            let coords = self.field.power_coords(e as i64);
            let pivot = coords.iter().position(|&c| c != 0)?;
            if self.num[pivot].is_zero() {
                continue;
            }
            // candidate ratio num[pivot] / coords[pivot]
            let ratio_num = &self.num[pivot];
            let ratio_den = BigInt::from(coords[pivot]);
            let matches = self
                .num
                .iter()
                .zip(coords)
                .all(|(a, &b)| a * &ratio_den == ratio_num * BigInt::from(b));
            if matches {
                let r = BigRational::new(ratio_num.clone(), &ratio_den * &self.den);
                return Some((r, e));
            }
        }
        None
    }

    /// Maps the element into Q(ζ_M) for a multiple M of the conductor.
    pub fn embed(&self, target: &Arc<CyclotomicField>) -> Option<Self> {
        let (n, m) = (self.field.conductor, target.conductor);
        if m % n != 0 {
            return None;
        }
        if n == m {
            return Some(CycloElem {
                field: target.clone(),
                num: self.num.clone(),
                den: self.den.clone(),
            });
        }
        let step = (m / n) as i64;
        let shell = CycloElem::zero(target);
        let num = shell.reduce(self.num.iter().enumerate().map(|(i, c)| (i as i64 * step, c.clone())));
        Some(
            CycloElem {
                field: target.clone(),
                num,
                den: self.den.clone(),
            }
            .normalized(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials_match_known_values() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        // Φ_105 is the first with a coefficient of absolute value 2
        assert!(cyclotomic_polynomial(105).contains(&-2));
        for n in 1..40 {
            assert_eq!(cyclotomic_polynomial(n).len() as u64 - 1, totient(n));
        }
    }

    #[test]
    fn sum_of_cube_roots_is_exactly_zero() {
        let f = CyclotomicField::new(3);
        let s = CycloElem::one(&f)
            .add(&CycloElem::zeta_pow(&f, 1))
            .add(&CycloElem::zeta_pow(&f, 2));
        assert!(s.is_zero());
        // also when the cube roots live in a larger field
        let g = CyclotomicField::new(12);
        let s = CycloElem::one(&g)
            .add(&CycloElem::zeta_pow(&g, 4))
            .add(&CycloElem::zeta_pow(&g, 8));
        assert!(s.is_zero());
    }

    #[test]
    fn zeta_has_order_n_and_conj_inverts() {
        for n in [1u64, 2, 5, 7, 12, 15, 105] {
            let f = CyclotomicField::new(n);
            let z = CycloElem::zeta_pow(&f, 1);
            let mut acc = CycloElem::one(&f);
            for _ in 0..n {
                acc = acc.mul(&z);
            }
            assert!(acc.is_one(), "ζ^{n} != 1");
            assert!(z.mul(&z.conj()).is_one());
            assert_eq!(z.conj().conj(), z);
        }
    }

    #[test]
    fn complex_values_agree() {
        let f = CyclotomicField::new(15);
        let a = CycloElem::zeta_pow(&f, 4).add(&CycloElem::zeta_pow(&f, 13).scale(&BigRational::new(3.into(), 2.into())));
        let b = CycloElem::zeta_pow(&f, 11).sub(&CycloElem::one(&f));
        let ab = a.mul(&b).to_complex();
        let expect = a.to_complex() * b.to_complex();
        assert!((ab - expect).norm() < 1e-12);
        assert!((a.conj().to_complex() - a.to_complex().conj()).norm() < 1e-12);
    }

    #[test]
    fn scaled_root_detection() {
        let f = CyclotomicField::new(7);
        let z = CycloElem::zeta_pow(&f, 6).scale(&BigRational::new((-2).into(), 3.into()));
        let (r, e) = z.as_scaled_root().unwrap();
        assert_eq!(e, 6);
        assert_eq!(r, BigRational::new((-2).into(), 3.into()));
        let mixed = CycloElem::one(&f).add(&CycloElem::zeta_pow(&f, 1));
        // 1 + ζ_7 is not a rational multiple of a root of unity
        assert!(mixed.as_scaled_root().is_none());
    }

    #[test]
    fn embedding_preserves_arithmetic() {
        let small = CyclotomicField::new(3);
        let big = CyclotomicField::new(15);
        let a = CycloElem::zeta_pow(&small, 1);
        let b = a.embed(&big).unwrap();
        assert_eq!(b, CycloElem::zeta_pow(&big, 5));
        assert!(a.embed(&CyclotomicField::new(5)).is_none());
    }
}
