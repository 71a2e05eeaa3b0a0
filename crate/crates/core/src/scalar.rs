//! Angles (phases e^{2πiθ}) and polynomial coefficients in exact or float mode.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::EPS_EQ;
use crate::cyclotomic::{CycloElem, CyclotomicField};
use crate::error::{Error, Result};

/// A phase angle θ in [0, 1), standing for e^{2πiθ}.
#[derive(Clone, Copy, Debug)]
pub enum Angle {
    Exact(Ratio<i64>),
    Float(f64),
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::Exact(a), Angle::Exact(b)) => a == b,
            _ => {
                let d = (self.to_f64() - other.to_f64()).rem_euclid(1.0);
                d.min(1.0 - d) <= 1e-12
            }
        }
    }
}

impl Angle {
    pub fn zero() -> Self {
        Angle::Exact(Ratio::from_integer(0))
    }

    pub fn half() -> Self {
        Angle::Exact(Ratio::new(1, 2))
    }

    /// The reduced angle p/q mod 1.
    pub fn exact(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidAngle(format!("{p}/0")));
        }
        let r = Ratio::new(p, q);
        let (n, d) = (*r.numer(), *r.denom());
        Ok(Angle::Exact(Ratio::new(n.rem_euclid(d), d)))
    }

    pub fn float(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidAngle(x.to_string()));
        }
        let mut v = x.rem_euclid(1.0);
        if v >= 1.0 {
            v = 0.0;
        }
        Ok(Angle::Float(v))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Angle::Exact(r) => r.is_zero(),
            Angle::Float(x) => x.min(1.0 - x) <= 1e-12,
        }
    }

    /// Reduced denominator in exact mode.
    pub fn denominator(&self) -> Option<u64> {
        match self {
            Angle::Exact(r) => Some(*r.denom() as u64),
            Angle::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Angle::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Angle::Float(x) => *x,
        }
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.to_f64())
    }

    pub fn neg(&self) -> Self {
        self.times(-1)
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Angle::Exact(a), Angle::Exact(b)) => {
                let s = a + b;
                Angle::exact(*s.numer(), *s.denom()).expect("nonzero denominator")
            }
            _ => Angle::float(self.to_f64() + other.to_f64()).expect("finite"),
        }
    }

    pub fn times(&self, m: i64) -> Self {
        match self {
            Angle::Exact(r) => {
                let p = (*r.numer() as i128 * m as i128).rem_euclid(*r.denom() as i128) as i64;
                Angle::exact(p, *r.denom()).expect("nonzero denominator")
            }
            Angle::Float(x) => Angle::float(x * m as f64).expect("finite"),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact(r) if r.is_zero() => write!(f, "0"),
            Angle::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Angle::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    /// `"p/q"` or an integer gives an exact angle; a decimal gives a float one.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| Error::InvalidAngle(s.into()))?;
            let q: i64 = q.trim().parse().map_err(|_| Error::InvalidAngle(s.into()))?;
            return Angle::exact(p, q);
        }
        if let Ok(p) = s.parse::<i64>() {
            return Angle::exact(p, 1);
        }
        let x: f64 = s.parse().map_err(|_| Error::InvalidAngle(s.into()))?;
        Angle::float(x)
    }
}

/// A polynomial coefficient.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Exact(CycloElem),
    Float(Complex64),
}

impl PartialEq for Coefficient {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => a == b,
            _ => (self.to_complex() - other.to_complex()).norm() <= EPS_EQ,
        }
    }
}

impl Coefficient {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coefficient::Exact(c) => c.to_complex(),
            Coefficient::Float(z) => *z,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(c) => c.is_zero(),
            Coefficient::Float(z) => z.norm() <= EPS_EQ,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Exact(c) => c.is_one(),
            Coefficient::Float(z) => (z - 1.0).norm() <= EPS_EQ,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(a.add(b)),
            _ => Coefficient::Float(self.to_complex() + other.to_complex()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        match self {
            Coefficient::Exact(a) => Coefficient::Exact(a.neg()),
            Coefficient::Float(z) => Coefficient::Float(-z),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Coefficient::Exact(a), Coefficient::Exact(b)) => Coefficient::Exact(a.mul(b)),
            _ => Coefficient::Float(self.to_complex() * other.to_complex()),
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Coefficient::Exact(a) => Coefficient::Exact(a.conj()),
            Coefficient::Float(z) => Coefficient::Float(z.conj()),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        match self {
            Coefficient::Exact(a) => Coefficient::Exact(a.scale(r)),
            Coefficient::Float(z) => Coefficient::Float(z * r.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// |c|² when it can be computed exactly (it is always real).
    pub fn abs_squared(&self) -> Coefficient {
        self.mul(&self.conj())
    }
}

/// The coefficient domain of an algebra context.
#[derive(Clone, Debug)]
pub enum Scalars {
    Exact(Arc<CyclotomicField>),
    Float,
}

impl PartialEq for Scalars {
    fn eq(&self, other: &Self) -> bool {
        self.conductor() == other.conductor()
    }
}

impl Scalars {
    pub fn exact(conductor: u64) -> Self {
        Scalars::Exact(CyclotomicField::new(conductor))
    }

    pub fn conductor(&self) -> Option<u64> {
        match self {
            Scalars::Exact(f) => Some(f.conductor()),
            Scalars::Float => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalars::Exact(_))
    }

    pub fn zero(&self) -> Coefficient {
        match self {
            Scalars::Exact(f) => Coefficient::Exact(CycloElem::zero(f)),
            Scalars::Float => Coefficient::Float(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn one(&self) -> Coefficient {
        self.rational(&BigRational::one())
    }

    pub fn int(&self, v: i64) -> Coefficient {
        self.rational(&BigRational::from_integer(v.into()))
    }

    pub fn rational(&self, r: &BigRational) -> Coefficient {
        match self {
            Scalars::Exact(f) => Coefficient::Exact(CycloElem::from_rational(f, r)),
            Scalars::Float => Coefficient::Float(Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)),
        }
    }

    /// ζ_N^e in exact mode.
    pub fn zeta_pow(&self, e: i64) -> Option<Coefficient> {
        match self {
            Scalars::Exact(f) => Some(Coefficient::Exact(CycloElem::zeta_pow(f, e))),
            Scalars::Float => None,
        }
    }

    /// e^{2πiθ}; in exact mode θ's denominator must divide the conductor.
    pub fn phase(&self, angle: &Angle) -> Result<Coefficient> {
        match (self, angle) {
            (Scalars::Exact(f), Angle::Exact(r)) => {
                let n = f.conductor() as i64;
                let q = *r.denom();
                if n % q != 0 {
                    return Err(Error::OutsideField {
                        angle: angle.to_string(),
                        conductor: f.conductor(),
                    });
                }
                Ok(Coefficient::Exact(CycloElem::zeta_pow(f, r.numer() * (n / q))))
            }
            (Scalars::Exact(f), Angle::Float(_)) => Err(Error::OutsideField {
                angle: angle.to_string(),
                conductor: f.conductor(),
            }),
            (Scalars::Float, a) => Ok(Coefficient::Float(a.phase())),
        }
    }

    /// The imaginary unit (needs 4 | N in exact mode).
    pub fn i(&self) -> Result<Coefficient> {
        self.phase(&Angle::exact(1, 4)?)
    }

    pub fn complex(&self, z: Complex64) -> Result<Coefficient> {
        match self {
            Scalars::Float => Ok(Coefficient::Float(z)),
            Scalars::Exact(f) => Err(Error::OutsideField {
                angle: format!("{z}"),
                conductor: f.conductor(),
            }),
        }
    }

    /// Moves a coefficient into this domain.
    pub fn embed(&self, c: &Coefficient) -> Result<Coefficient> {
        match (self, c) {
            (Scalars::Exact(f), Coefficient::Exact(e)) => e.embed(f).map(Coefficient::Exact).ok_or_else(|| {
                Error::ContextMismatch(format!(
                    "conductor {} does not divide {}",
                    e.field().conductor(),
                    f.conductor()
                ))
            }),
            (Scalars::Exact(_), Coefficient::Float(_)) => Err(Error::ContextMismatch(
                "cannot move a float coefficient into an exact field".into(),
            )),
            (Scalars::Float, c) => Ok(Coefficient::Float(c.to_complex())),
        }
    }

    /// Coefficient from a serialized exact form.
    pub fn from_parts(&self, num: Vec<BigInt>, den: BigInt) -> Result<Coefficient> {
        match self {
            Scalars::Exact(f) => CycloElem::from_parts(f, num, den)
                .map(Coefficient::Exact)
                .ok_or_else(|| Error::Invalid("coefficient coordinates do not match the field degree".into())),
            Scalars::Float => Err(Error::ContextMismatch("exact coefficient in float context".into())),
        }
    }
}

/// Least common multiple helper used for conductors.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Parses "p/q", an integer, or a decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_decimal(p)?.to_integer_checked()?;
        let q: BigInt = parse_decimal(q)?.to_integer_checked()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    parse_decimal(s)
}

trait ToIntegerChecked {
    fn to_integer_checked(self) -> Option<BigInt>;
}

impl ToIntegerChecked for BigRational {
    fn to_integer_checked(self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.to_integer())
        } else {
            None
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Formats a rational as "p" or "p/q".
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True if r is negative.
pub fn rational_is_negative(r: &BigRational) -> bool {
    r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_reduce_mod_one() {
        assert_eq!(Angle::exact(4, 3).unwrap(), Angle::exact(1, 3).unwrap());
        assert_eq!(Angle::exact(-1, 3).unwrap(), Angle::exact(2, 3).unwrap());
        assert_eq!(Angle::exact(2, 6).unwrap().denominator(), Some(3));
        assert!(Angle::exact(1, 0).is_err());
        assert!(Angle::exact(5, 5).unwrap().is_zero());
        assert_eq!("3/4".parse::<Angle>().unwrap(), Angle::exact(3, 4).unwrap());
        assert!(matches!("0.25".parse::<Angle>().unwrap(), Angle::Float(_)));
        assert_eq!(Angle::float(-0.25).unwrap().to_f64(), 0.75);
    }

    #[test]
    fn phases_need_divisible_conductor() {
        let s = Scalars::exact(6);
        assert!(s.phase(&Angle::exact(1, 3).unwrap()).is_ok());
        assert!(matches!(
            s.phase(&Angle::exact(1, 4).unwrap()),
            Err(Error::OutsideField { .. })
        ));
        assert!(s.i().is_err());
        let c = Scalars::exact(12).i().unwrap();
        assert!((c.to_complex() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-2").unwrap(), BigRational::from_integer((-2).into()));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
        assert_eq!(format_rational(&BigRational::new(6.into(), 4.into())), "3/2");
    }
}
