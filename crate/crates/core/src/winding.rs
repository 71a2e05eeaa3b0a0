//! Winding numbers of determinant loops on the circle.
//!
//! This is the commutative surrogate for K₁ classes: a loop of invertible
//! matrices θ ↦ F(θ) has class deg(det F). Nothing here applies to
//! noncommutative ρ.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::rep::{cmatrix_from_json, cmatrix_to_json, CMatrix, NumericMatrix, RationalRep, SpherePoint};

/// Printed by front ends next to every winding result.
pub const SCOPE_NOTE: &str =
    "winding numbers are computed for commutative evaluations only; no noncommutative K1 index is attempted";

/// Samples of a matrix loop at θ_m = 2πm/M.
///
/// With `closed` the loop wraps from the last sample to the first. Otherwise
/// the last sample is the endpoint θ = 2π and has to agree with the first.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLoop {
    samples: Vec<CMatrix>,
    closed: bool,
}

impl MatrixLoop {
    pub fn new(samples: Vec<CMatrix>, closed: bool) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyGrid)?;
        let d = first.nrows();
        if d == 0 || samples.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::DimensionMismatch("loop samples must be square of one size".into()));
        }
        if samples.len() < 2 + (!closed) as usize {
            return Err(Error::EmptyGrid);
        }
        Ok(MatrixLoop { samples, closed })
    }

    /// Samples `f` at M equally spaced angles, in parallel.
    pub fn from_fn<F>(m: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> CMatrix + Sync,
    {
        let samples = (0..m).into_par_iter().map(|i| f(TAU * i as f64 / m as f64)).collect();
        Self::new(samples, true)
    }

    /// A 1×1 loop.
    pub fn scalar<F>(m: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        Self::from_fn(m, |t| CMatrix::from_element(1, 1, f(t)))
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        self.samples[0].nrows()
    }

    /// Number of distinct sample angles.
    pub fn resolution(&self) -> usize {
        self.samples.len() - (!self.closed) as usize
    }

    /// max ‖F(θ + π) + F(θ)‖ (odd) or ‖F(θ + π) − F(θ)‖ (even), over samples.
    pub fn parity_residual(&self, odd: bool) -> Result<f64> {
        let m = self.resolution();
        if !m.is_multiple_of(2) {
            return Err(Error::Precondition("parity needs an even number of samples".into()));
        }
        let sign = if odd { 1.0 } else { -1.0 };
        Ok((0..m / 2)
            .map(|i| {
                let diff = &self.samples[i + m / 2] + &self.samples[i] * Complex64::new(sign, 0.0);
                diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max))
    }

    /// A JSON array of sampled matrices for closed loops, otherwise
    /// `{"closed": false, "samples": […]}`.
    pub fn to_json_value(&self) -> Value {
        let samples: Vec<Value> = self.samples.iter().map(cmatrix_to_json).collect();
        if self.closed {
            Value::Array(samples)
        } else {
            json!({ "closed": false, "samples": samples })
        }
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let (arr, closed) = match v {
            Value::Array(a) => (a, true),
            Value::Object(o) => (
                o.get("samples").and_then(Value::as_array).ok_or_else(|| Error::Json("missing `samples`".into()))?,
                o.get("closed").and_then(Value::as_bool).unwrap_or(true),
            ),
            _ => return Err(Error::Json("loop must be an array or an object".into())),
        };
        Self::new(arr.iter().map(cmatrix_from_json).collect::<Result<_>>()?, closed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    /// Accumulated argument divided by 2π, before rounding.
    pub turns: f64,
    pub samples: usize,
    pub refinements: usize,
    pub min_abs_det: f64,
    pub max_jump: f64,
}

impl WindingReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "winding": self.winding,
            "turns": self.turns,
            "samples": self.samples,
            "refinements": self.refinements,
            "min_abs_det": self.min_abs_det,
            "max_jump": self.max_jump,
            "scope": SCOPE_NOTE,
        })
    }
}

/// Winding of det F with the default tolerances.
pub fn winding(lp: &MatrixLoop) -> Result<i64> {
    Ok(winding_report(lp, &Tolerances::default())?.winding)
}

/// Sums principal-branch argument increments of det F around the loop.
pub fn winding_report(lp: &MatrixLoop, tol: &Tolerances) -> Result<WindingReport> {
    if !lp.closed {
        let (a, b) = (&lp.samples[0], lp.samples.last().expect("nonempty"));
        let gap = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if gap > tol.closure {
            return Err(Error::NotClosed(gap));
        }
    }
    let dets: Vec<Complex64> = lp.samples.par_iter().map(|m| m.determinant()).collect();
    let mut min_abs = f64::INFINITY;
    for (index, d) in dets.iter().enumerate() {
        let a = d.norm();
        if a <= tol.delta_inv {
            return Err(Error::NearSingular { index, abs_det: a });
        }
        min_abs = min_abs.min(a);
    }
    let steps = if lp.closed { dets.len() } else { dets.len() - 1 };
    let mut total = 0.0;
    let mut max_jump: f64 = 0.0;
    for i in 0..steps {
        let next = dets[(i + 1) % dets.len()];
        let inc = (next / dets[i]).arg();
        if inc.abs() >= FRAC_PI_2 {
            return Err(Error::InsufficientResolution { index: i, jump: inc.abs() });
        }
        max_jump = max_jump.max(inc.abs());
        total += inc;
    }
    let turns = total / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > tol.closure {
        return Err(Error::NotClosed(turns));
    }
    Ok(WindingReport {
        winding: winding as i64,
        turns,
        samples: lp.resolution(),
        refinements: 0,
        min_abs_det: min_abs,
        max_jump,
    })
}

/// Samples `f` at `m0` points and doubles the resolution until two
/// consecutive resolutions give the same winding without a large argument
/// jump. The agreement test guards against aliasing, which no single
/// sampling can detect. At most `tol.max_refinements` doublings.
pub fn adaptive_winding<F>(f: F, m0: usize, tol: &Tolerances) -> Result<WindingReport>
where
    F: Fn(f64) -> CMatrix + Sync,
{
    let mut m = m0.max(4);
    let mut prev: Option<i64> = None;
    let mut last = None;
    for refinements in 0..=tol.max_refinements {
        let lp = MatrixLoop::from_fn(m, &f)?;
        match winding_report(&lp, tol) {
            Ok(mut r) => {
                if prev == Some(r.winding) {
                    r.refinements = refinements;
                    return Ok(r);
                }
                prev = Some(r.winding);
                last = Some(Error::InsufficientResolution { index: 0, jump: r.max_jump });
            }
            Err(e @ Error::InsufficientResolution { .. }) => {
                prev = None;
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
        m *= 2;
    }
    Err(last.expect("at least one attempt"))
}

fn check_commutative(m: &PolyMatrix) -> Result<()> {
    let ctx = m.ctx();
    for j in 0..ctx.n() {
        for k in (j + 1)..ctx.n() {
            if !ctx.rho().angle(j, k).is_zero() {
                return Err(Error::Precondition(format!(
                    "circle loops need a commutative context; angle ({}, {}) is nonzero",
                    j + 1,
                    k + 1
                )));
            }
        }
    }
    Ok(())
}

/// The evaluation θ ↦ M(t = e_j, w_j = e^{iθ}, other w = 1) in the trivial
/// representation. `j` is zero-based.
pub fn circle_sampler(m: &PolyMatrix, j: usize) -> Result<impl Fn(f64) -> CMatrix + Sync + '_> {
    check_commutative(m)?;
    let ctx = m.ctx();
    ctx.check_index(j)?;
    let n = ctx.n();
    let rep = RationalRep::trivial(n);
    let numeric = NumericMatrix::new(m, &rep)?;
    let s = ctx.has_x().then_some(0.0);
    Ok(move |theta: f64| {
        let mut t = vec![0.0; n];
        t[j] = 1.0;
        let mut w = vec![Complex64::new(1.0, 0.0); n];
        w[j] = Complex64::from_polar(1.0, theta);
        let pt = SpherePoint { t, w, s };
        numeric.eval(&pt, &rep).expect("point matches the context")
    })
}

pub fn circle_loop(m: &PolyMatrix, j: usize, resolution: usize) -> Result<MatrixLoop> {
    MatrixLoop::from_fn(resolution, circle_sampler(m, j)?)
}

/// Winding of a circle loop with adaptive refinement from `resolution`.
pub fn circle_winding(m: &PolyMatrix, j: usize, resolution: usize, tol: &Tolerances) -> Result<WindingReport> {
    adaptive_winding(circle_sampler(m, j)?, resolution, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub k: usize,
    /// max ‖F(θ + 2π/k) − U^* F(θ) U‖ over samples.
    pub residual: f64,
    pub winding: i64,
    pub divisible: bool,
}

impl InvarianceReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "k": self.k,
            "residual": self.residual,
            "winding": self.winding,
            "divisible": self.divisible,
            "scope": SCOPE_NOTE,
        })
    }
}

/// For a loop with F(θ + 2π/k) = U^* F(θ) U, det F has period 2π/k, so its
/// winding lies in kℤ. Errors if the loop is not invariant.
pub fn invariant_winding_check(lp: &MatrixLoop, k: usize, u: &CMatrix, tol: &Tolerances) -> Result<InvarianceReport> {
    let m = lp.resolution();
    if k == 0 || !m.is_multiple_of(k) {
        return Err(Error::Precondition(format!("{m} samples are not divisible by k = {k}")));
    }
    if u.nrows() != lp.dim() || u.ncols() != lp.dim() {
        return Err(Error::DimensionMismatch("U and loop sizes differ".into()));
    }
    let ua = u.adjoint();
    let shift = m / k;
    let residual = (0..m)
        .into_par_iter()
        .map(|i| {
            let expect = &ua * &lp.samples[i] * u;
            (&lp.samples[(i + shift) % m] - expect).iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    if residual > tol.invariance {
        return Err(Error::NotInvariant(residual));
    }
    let w = winding_report(lp, tol)?.winding;
    Ok(InvarianceReport {
        k,
        residual,
        winding: w,
        divisible: w.rem_euclid(k as i64) == 0,
    })
}

/// Σ c_n e^{inθ}.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub terms: Vec<(i64, Complex64)>,
}

/// Which frequencies a random trig polynomial may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    Any,
}

impl Parity {
    fn allows(self, n: i64) -> bool {
        match self {
            Parity::Odd => n.rem_euclid(2) == 1,
            Parity::Even => n.rem_euclid(2) == 0,
            Parity::Any => true,
        }
    }
}

impl TrigPoly {
    pub fn new(terms: Vec<(i64, Complex64)>) -> Self {
        TrigPoly { terms }
    }

    pub fn monomial(n: i64) -> Self {
        TrigPoly::new(vec![(n, Complex64::new(1.0, 0.0))])
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms.iter().map(|&(n, c)| c * Complex64::from_polar(1.0, n as f64 * theta)).sum()
    }

    /// Every frequency multiplied by `k`: θ ↦ f(kθ).
    pub fn compose_power(&self, k: i64) -> Self {
        TrigPoly::new(self.terms.iter().map(|&(n, c)| (n * k, c)).collect())
    }

    /// Gaussian coefficients on the allowed frequencies in [−deg, deg]
    /// satisfying `keep`.
    pub fn random_filtered<R: Rng, K: Fn(i64) -> bool>(deg: i64, keep: K, rng: &mut R) -> Self {
        let terms = (-deg..=deg)
            .filter(|&n| keep(n))
            .map(|n| (n, Complex64::new(gauss(rng), gauss(rng))))
            .collect();
        TrigPoly::new(terms)
    }

    pub fn random<R: Rng>(deg: i64, parity: Parity, rng: &mut R) -> Self {
        Self::random_filtered(deg, |n| parity.allows(n), rng)
    }
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// A d×d matrix of trig polynomials, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMatrix {
    pub d: usize,
    pub entries: Vec<TrigPoly>,
}

/// Rejects random draws whose |det| dips below this fraction of its mean.
const NONVANISHING_MARGIN: f64 = 0.05;
const SCREEN_SAMPLES: usize = 512;
const MAX_DRAWS: usize = 10_000;

impl TrigMatrix {
    pub fn eval(&self, theta: f64) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |i, j| self.entries[i * self.d + j].eval(theta))
    }

    pub fn sampler(&self) -> impl Fn(f64) -> CMatrix + Sync + '_ {
        move |t| self.eval(t)
    }

    fn well_conditioned(&self) -> bool {
        let dets: Vec<f64> = (0..SCREEN_SAMPLES)
            .map(|i| self.eval(TAU * i as f64 / SCREEN_SAMPLES as f64).determinant().norm())
            .collect();
        let mean = dets.iter().sum::<f64>() / dets.len() as f64;
        dets.iter().all(|&a| a > NONVANISHING_MARGIN * mean)
    }

    /// Random entries with entry (i, j) drawn by `entry(i, j, rng)`, redrawn
    /// until the determinant stays well away from zero on the circle.
    pub fn random_nonvanishing<R, E>(d: usize, mut entry: E, rng: &mut R) -> Result<Self>
    where
        R: Rng,
        E: FnMut(usize, usize, &mut R) -> TrigPoly,
    {
        for _ in 0..MAX_DRAWS {
            let entries = (0..d * d).map(|ij| entry(ij / d, ij % d, rng)).collect();
            let f = TrigMatrix { d, entries };
            if f.well_conditioned() {
                return Ok(f);
            }
        }
        Err(Error::Precondition("no nonvanishing loop found".into()))
    }

    /// Entries of a single parity: F(θ + π) = −F(θ) for `Odd`, F(θ + π) = F(θ) for `Even`.
    pub fn random_parity<R: Rng>(d: usize, deg: i64, parity: Parity, rng: &mut R) -> Result<Self> {
        Self::random_nonvanishing(d, |_, _, r| TrigPoly::random(deg, parity, r), rng)
    }

    /// Entry (i, j) uses only frequencies n ≡ e_j − e_i (mod k), so that
    /// F(θ + 2π/k) = U^* F(θ) U for U = diag(e^{2πi e_j / k}).
    pub fn random_invariant<R: Rng>(k: i64, exps: &[i64], deg: i64, rng: &mut R) -> Result<Self> {
        let d = exps.len();
        Self::random_nonvanishing(
            d,
            |i, j, r| TrigPoly::random_filtered(deg, |n| (n - exps[j] + exps[i]).rem_euclid(k) == 0, r),
            rng,
        )
    }
}

/// diag(e^{2πi e_j / k}).
pub fn root_diagonal(k: i64, exps: &[i64]) -> CMatrix {
    let d = exps.len();
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, TAU * exps[i] as f64 / k as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Π_{m<k} U^m G(θ + 2πm/k) U^{−m} for a diagonal loop G and a diagonal or
/// permutation U with U^k = I; the factors commute, so the product is
/// invariant under θ ↦ θ + 2π/k, F ↦ U^* F U.
pub fn commuting_product<'a>(g: &'a [TrigPoly], u: &CMatrix, k: usize) -> impl Fn(f64) -> CMatrix + Sync + 'a {
    let d = g.len();
    let u = u.clone();
    move |theta| {
        let mut out = CMatrix::identity(d, d);
        let mut um = CMatrix::identity(d, d);
        for m in 0..k {
            let gd = CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    g[i].eval(theta + TAU * m as f64 / k as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            out *= &um * gd * um.adjoint();
            um = &um * &u;
        }
        out
    }
}

/// True when θ ↦ g(θ) has no zero close to the circle (screened at 512 points).
pub fn scalar_nonvanishing(g: &TrigPoly) -> bool {
    TrigMatrix { d: 1, entries: vec![g.clone()] }.well_conditioned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Context;
    use crate::param::ParameterMatrix;
    use crate::zgen::zgen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_winding(f: impl Fn(f64) -> Complex64 + Sync) -> i64 {
        adaptive_winding(|t| CMatrix::from_element(1, 1, f(t)), 16, &Tolerances::default())
            .unwrap()
            .winding
    }

    #[test]
    fn textbook_windings() {
        let z = |t: f64| Complex64::from_polar(1.0, t);
        assert_eq!(scalar_winding(|_| Complex64::new(2.0, -1.0)), 0);
        assert_eq!(scalar_winding(|t| z(t).powi(3)), 3);
        assert_eq!(scalar_winding(|t| z(t).powi(3) - z(t) * 0.2), 3);
        assert_eq!(scalar_winding(|t| z(t).powi(-2)), -2);
    }

    #[test]
    fn coarse_sampling_is_refined() {
        let r = adaptive_winding(|t| CMatrix::from_element(1, 1, Complex64::from_polar(1.0, 9.0 * t)), 4, &Tolerances::default())
            .unwrap();
        assert_eq!(r.winding, 9);
        assert!(r.refinements > 0);
        let lp = MatrixLoop::scalar(4, |t| Complex64::from_polar(1.0, 9.0 * t)).unwrap();
        assert!(matches!(winding(&lp), Err(Error::InsufficientResolution { .. })));
    }

    #[test]
    fn singular_and_open_loops() {
        let lp = MatrixLoop::scalar(8, |t| Complex64::new(t.cos(), 0.0)).unwrap();
        assert!(matches!(winding(&lp), Err(Error::NearSingular { index: 2, .. })));
        let open: Vec<CMatrix> = (0..=8).map(|i| CMatrix::from_element(1, 1, Complex64::new(1.0 + i as f64 * 0.01, 0.0))).collect();
        assert!(matches!(winding(&MatrixLoop::new(open, false).unwrap()), Err(Error::NotClosed(_))));
    }

    #[test]
    fn circle_loops_of_generators() {
        let ctx = Context::odd(ParameterMatrix::commutative(2));
        let tol = Tolerances::default();
        let z1 = PolyMatrix::from_fn(&ctx, 1, 1, |_, _| ctx.gen(0));
        assert_eq!(circle_winding(&z1, 0, 16, &tol).unwrap().winding, 1);
        let z = zgen(&ctx, 2).unwrap();
        assert_eq!(circle_winding(&z, 0, 16, &tol).unwrap().winding, 0);
        let nc = Context::odd(ParameterMatrix::from_upper(2, |_, _| crate::scalar::Angle::exact(1, 3).unwrap()));
        assert!(circle_loop(&zgen(&nc, 2).unwrap(), 0, 8).is_err());
    }

    #[test]
    fn invariant_loops() {
        let tol = Tolerances::default();
        let one = CMatrix::identity(1, 1);
        let lp = MatrixLoop::scalar(48, |t| Complex64::from_polar(1.0, 3.0 * t)).unwrap();
        let r = invariant_winding_check(&lp, 3, &one, &tol).unwrap();
        assert_eq!((r.winding, r.divisible), (3, true));
        let lp = MatrixLoop::scalar(48, |t| Complex64::from_polar(1.0, t)).unwrap();
        assert!(matches!(invariant_winding_check(&lp, 3, &one, &tol), Err(Error::NotInvariant(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = loop {
            let g = TrigPoly::random(2, Parity::Any, &mut rng);
            if scalar_nonvanishing(&g) {
                break g;
            }
        };
        let g3 = g.compose_power(3);
        let lp = MatrixLoop::scalar(384, |t| g3.eval(t)).unwrap();
        assert!(invariant_winding_check(&lp, 3, &one, &tol).unwrap().divisible);

        let u = root_diagonal(2, &[0, 1]);
        let gs = vec![g.clone(), TrigPoly::monomial(1)];
        let lp = MatrixLoop::from_fn(256, commuting_product(&gs, &u, 2)).unwrap();
        assert!(invariant_winding_check(&lp, 2, &u, &tol).unwrap().divisible);

        let f = TrigMatrix::random_invariant(4, &[0, 1, 3], 3, &mut rng).unwrap();
        let u = root_diagonal(4, &[0, 1, 3]);
        let lp = MatrixLoop::from_fn(1024, f.sampler()).unwrap();
        let r = invariant_winding_check(&lp, 4, &u, &tol).unwrap();
        assert!(r.residual < 1e-12 && r.divisible);
    }

    #[test]
    fn odd_three_by_three_is_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = TrigMatrix::random_parity(3, 3, Parity::Odd, &mut rng).unwrap();
        let r = adaptive_winding(f.sampler(), 64, &Tolerances::default()).unwrap();
        assert_eq!(r.winding.rem_euclid(2), 1);
        let lp = MatrixLoop::from_fn(64, f.sampler()).unwrap();
        assert!(lp.parity_residual(true).unwrap() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let lp = MatrixLoop::scalar(8, |t| Complex64::from_polar(2.0, t)).unwrap();
        assert_eq!(MatrixLoop::from_json_value(&lp.to_json_value()).unwrap(), lp);
    }
}
