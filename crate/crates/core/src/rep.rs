//! Clock-shift representations of rational quantum tori, point evaluation of
//! sphere elements, and grid estimates of norms.
//!
//! A sphere element is evaluated through z_j ↦ t_j·w_j·V_j with t on the
//! positive part of the unit sphere, w on the torus, and V_j the unitaries of
//! a rational representation. The even-sphere generator `x` goes to s·I.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::actions::RotationAction;
use crate::algebra::{Context, Monomial, StarPolynomial};
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::param::ParameterMatrix;
use crate::scalar::{Angle, Coefficient};

pub type CMatrix = DMatrix<Complex64>;

/// C = diag(1, ζ, …, ζ^{q−1}) and the cyclic shift S (S e_c = e_{c−1}),
/// ζ = e^{2πip/q}, so that S·C = ζ·C·S.
pub fn clock_shift(q: usize, p: i64) -> Result<(CMatrix, CMatrix)> {
    if q == 0 {
        return Err(Error::Invalid("clock-shift dimension must be positive".into()));
    }
    let theta = |e: i64| Complex64::from_polar(1.0, TAU * ((p * e).rem_euclid(q as i64)) as f64 / q as f64);
    let c = CMatrix::from_fn(q, q, |r, s| if r == s { theta(r as i64) } else { Complex64::new(0.0, 0.0) });
    let s = CMatrix::from_fn(q, q, |r, col| {
        if (r + 1) % q == col {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok((c, s))
}

fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn min_singular(m: &CMatrix) -> f64 {
    m.clone().singular_values().min()
}

/// Unitaries V_1, …, V_n on C^q with V_k V_j = e^{2πiψ_{jk}} V_j V_k.
#[derive(Clone, Debug)]
pub struct RationalRep {
    psi: ParameterMatrix,
    q: usize,
    v: Vec<CMatrix>,
    /// (j, k, q_jk) for every tensor factor.
    factors: Vec<(usize, usize, usize)>,
}

impl RationalRep {
    /// One tensor factor of dimension q_jk per pair j < k with q_jk > 1: V_j
    /// acts there as a clock and V_k as the shift.
    pub fn build(psi: &ParameterMatrix) -> Result<Self> {
        let n = psi.n();
        let mut factors = Vec::new();
        let mut blocks: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
        for j in 0..n {
            for k in (j + 1)..n {
                let Angle::Exact(r) = psi.angle(j, k) else {
                    return Err(Error::IrrationalAngle(j + 1, k + 1));
                };
                let q = *r.denom() as usize;
                if q == 1 {
                    continue;
                }
                factors.push((j, k, q));
                let (c, s) = clock_shift(q, *r.numer())?;
                for (m, slot) in blocks.iter_mut().enumerate() {
                    slot.push(if m == j {
                        c.clone()
                    } else if m == k {
                        s.clone()
                    } else {
                        CMatrix::identity(q, q)
                    });
                }
            }
        }
        let q: usize = factors.iter().map(|f| f.2).product();
        let v = blocks
            .into_iter()
            .map(|bs| bs.iter().fold(CMatrix::identity(1, 1), |acc, b| acc.kronecker(b)))
            .collect();
        Ok(RationalRep {
            psi: psi.clone(),
            q,
            v,
            factors,
        })
    }

    /// q = 1, every V_j = [1], for the commutative torus.
    pub fn trivial(n: usize) -> Self {
        RationalRep {
            psi: ParameterMatrix::commutative(n),
            q: 1,
            v: vec![CMatrix::identity(1, 1); n],
            factors: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.psi.n()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn psi(&self) -> &ParameterMatrix {
        &self.psi
    }

    pub fn v(&self, j: usize) -> &CMatrix {
        &self.v[j]
    }

    pub fn factors(&self) -> &[(usize, usize, usize)] {
        &self.factors
    }

    /// max_{j<k} ‖V_k V_j − ρ_{jk} V_j V_k‖.
    pub fn relation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n() {
            for k in (j + 1)..self.n() {
                let rho = self.psi.angle(j, k).phase();
                let lhs = &self.v[k] * &self.v[j];
                let rhs = (&self.v[j] * &self.v[k]) * rho;
                worst = worst.max(operator_norm(&(lhs - rhs)));
            }
        }
        worst
    }

    /// max_j ‖V_j V_j^* − I‖.
    pub fn unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.q, self.q);
        self.v
            .iter()
            .map(|v| operator_norm(&(v * v.adjoint() - &id)))
            .fold(0.0, f64::max)
    }

    fn check_context(&self, ctx: &Context) -> Result<()> {
        if ctx.n() != self.n() {
            return Err(Error::ContextMismatch(format!(
                "representation of {} generators, context has {}",
                self.n(),
                ctx.n()
            )));
        }
        for j in 0..self.n() {
            for k in (j + 1)..self.n() {
                if ctx.rho().angle(j, k) != self.psi.angle(j, k) {
                    return Err(Error::ContextMismatch(format!(
                        "representation angle at ({}, {}) differs from the context",
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "n": self.n(),
            "q": self.q,
            "psi": self.psi.to_json_value(),
            "factors": self.factors.iter().map(|(j, k, q)| json!([j + 1, k + 1, q])).collect::<Vec<_>>(),
            "V": self.v.iter().map(cmatrix_to_json).collect::<Vec<_>>(),
        })
    }

    /// Rebuilds from `psi`; embedded matrices are checked against the rebuild.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let psi = ParameterMatrix::from_json_value(v.get("psi").unwrap_or(v))?;
        let rep = Self::build(&psi)?;
        if let Some(Value::Array(ms)) = v.get("V") {
            if ms.len() != rep.n() {
                return Err(Error::Json("`V` has the wrong number of matrices".into()));
            }
            for (j, m) in ms.iter().enumerate() {
                let m = cmatrix_from_json(m)?;
                if m.shape() != rep.v[j].shape() || operator_norm(&(m - &rep.v[j])) > 1e-12 {
                    return Err(Error::Json(format!("`V[{j}]` does not match the clock-shift construction")));
                }
            }
        }
        Ok(rep)
    }
}

pub fn cmatrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn cmatrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone())?;
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Json("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// A point of S^{n−1}_+ × T^n, with an optional value s of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    pub t: Vec<f64>,
    pub w: Vec<Complex64>,
    pub s: Option<f64>,
}

impl SpherePoint {
    pub fn new(t: Vec<f64>, w: Vec<Complex64>, s: Option<f64>) -> Result<Self> {
        if t.len() != w.len() {
            return Err(Error::DimensionMismatch("t and w lengths differ".into()));
        }
        if t.iter().any(|&x| x < -1e-12) {
            return Err(Error::Invalid("radial coordinates must be non-negative".into()));
        }
        if w.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Invalid("angular coordinates must have modulus 1".into()));
        }
        let r2: f64 = t.iter().map(|x| x * x).sum::<f64>() + s.map_or(0.0, |s| s * s);
        if (r2 - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("point is off the sphere: |t|² + s² = {r2}")));
        }
        Ok(SpherePoint { t, w, s })
    }

    /// w_j = e^{iθ_j}.
    pub fn from_angles(t: Vec<f64>, thetas: &[f64], s: Option<f64>) -> Result<Self> {
        Self::new(t, thetas.iter().map(|&th| Complex64::from_polar(1.0, th)).collect(), s)
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    /// The same radial part with every w_j negated.
    pub fn antipode(&self) -> Self {
        SpherePoint {
            t: self.t.clone(),
            w: self.w.iter().map(|z| -z).collect(),
            s: self.s,
        }
    }

    /// A random point; `even` adds an x-coordinate.
    pub fn random<R: Rng>(n: usize, even: bool, rng: &mut R) -> Self {
        let m = n + even as usize;
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut t: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let s = even.then(|| {
            let s = t.pop().expect("m > n");
            if rng.gen_bool(0.5) {
                -s
            } else {
                s
            }
        });
        let w = (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
        SpherePoint { t, w, s }
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "t": self.t,
            "w": self.w.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
        });
        if let Some(s) = self.s {
            v["s"] = json!(s);
        }
        v
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let t: Vec<f64> = serde_json::from_value(v.get("t").cloned().unwrap_or(Value::Null))?;
        let w: Vec<[f64; 2]> = serde_json::from_value(v.get("w").cloned().unwrap_or(Value::Null))?;
        let s = v.get("s").and_then(Value::as_f64);
        Self::new(t, w.iter().map(|p| Complex64::new(p[0], p[1])).collect(), s)
    }
}

/// A matrix of polynomials with coefficients converted to floats once, for
/// repeated evaluation.
pub struct NumericMatrix {
    n: usize,
    has_x: bool,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<(Complex64, Monomial)>>,
}

impl NumericMatrix {
    pub fn new(m: &PolyMatrix, rep: &RationalRep) -> Result<Self> {
        let ctx = m.ctx();
        rep.check_context(ctx)?;
        Ok(NumericMatrix {
            n: ctx.n(),
            has_x: ctx.has_x(),
            rows: m.rows(),
            cols: m.cols(),
            entries: m
                .entries()
                .iter()
                .map(|p| p.terms().iter().map(|(mono, c)| (c.to_complex(), mono.clone())).collect())
                .collect(),
        })
    }

    pub fn eval(&self, pt: &SpherePoint, rep: &RationalRep) -> Result<CMatrix> {
        if pt.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, context has {} generators",
                pt.n(),
                self.n
            )));
        }
        let s = match (self.has_x, pt.s) {
            (true, Some(s)) => s,
            (true, None) => return Err(Error::Invalid("even-sphere evaluation needs an x-coordinate".into())),
            (false, _) => 0.0,
        };
        let q = rep.q();
        let gens: Vec<CMatrix> = (0..self.n).map(|j| rep.v(j) * (pt.w[j] * pt.t[j])).collect();
        let stars: Vec<CMatrix> = gens.iter().map(|g| g.adjoint()).collect();
        let mut out = CMatrix::zeros(self.rows * q, self.cols * q);
        for (idx, terms) in self.entries.iter().enumerate() {
            if terms.is_empty() {
                continue;
            }
            let mut block = CMatrix::zeros(q, q);
            for (c, m) in terms {
                let mut term = CMatrix::identity(q, q) * *c;
                for j in 0..self.n {
                    for _ in 0..m.plain()[j] {
                        term *= &gens[j];
                    }
                    for _ in 0..m.starred()[j] {
                        term *= &stars[j];
                    }
                }
                if m.x_power() > 0 {
                    term *= Complex64::new(s.powi(m.x_power() as i32), 0.0);
                }
                block += term;
            }
            let (i, j) = (idx / self.cols, idx % self.cols);
            out.view_mut((i * q, j * q), (q, q)).copy_from(&block);
        }
        Ok(out)
    }
}

/// Image of a polynomial at a point: a q×q matrix.
pub fn eval_poly(p: &StarPolynomial, pt: &SpherePoint, rep: &RationalRep) -> Result<CMatrix> {
    eval_matrix(&PolyMatrix::new(p.ctx(), 1, 1, vec![p.clone()])?, pt, rep)
}

/// Blockwise image of a matrix: (rows·q)×(cols·q).
pub fn eval_matrix(m: &PolyMatrix, pt: &SpherePoint, rep: &RationalRep) -> Result<CMatrix> {
    NumericMatrix::new(m, rep)?.eval(pt, rep)
}

/// Resolution of the evaluation grid.
///
/// Radial points come from spherical angles in [0, π/2] with `t_steps`
/// values each (inclusive), or verbatim from `t_path`. Torus points are
/// w_j = e^{2πi m_j / w_steps}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_steps: usize,
    pub w_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_path: Option<Vec<Vec<f64>>>,
}

impl GridSpec {
    pub fn new(t_steps: usize, w_steps: usize) -> Self {
        GridSpec {
            t_steps,
            w_steps,
            t_path: None,
        }
    }

    /// Radial parts (t, s). Even spheres put s = cos φ_0 with φ_0 ∈ [0, π].
    pub fn radial_points(&self, n: usize, even: bool) -> Result<Vec<(Vec<f64>, Option<f64>)>> {
        if let Some(path) = &self.t_path {
            if path.is_empty() {
                return Err(Error::EmptyGrid);
            }
            return path
                .iter()
                .map(|row| {
                    let want = n + even as usize;
                    if row.len() != want {
                        return Err(Error::DimensionMismatch(format!("t_path entry has {} values, need {want}", row.len())));
                    }
                    let (t, s) = if even { (row[..n].to_vec(), Some(row[n])) } else { (row.clone(), None) };
                    Ok((t, s))
                })
                .collect();
        }
        if self.t_steps < 2 {
            return Err(Error::EmptyGrid);
        }
        let m = n + even as usize;
        let steps = self.t_steps;
        let count = steps.pow((m - 1) as u32);
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let mut rest = idx;
            let mut phis = Vec::with_capacity(m - 1);
            for a in 0..m - 1 {
                let i = rest % steps;
                rest /= steps;
                let top = if even && a == 0 { PI } else { FRAC_PI_2 };
                phis.push(top * i as f64 / (steps - 1) as f64);
            }
            let mut coords = Vec::with_capacity(m);
            let mut sin_prod = 1.0;
            for phi in &phis {
                coords.push(sin_prod * phi.cos());
                sin_prod *= phi.sin();
            }
            coords.push(sin_prod);
            let (s, t) = if even {
                (Some(coords[0]), coords[1..].iter().map(|x| x.max(0.0)).collect())
            } else {
                (None, coords.iter().map(|x| x.max(0.0)).collect())
            };
            out.push((t, s));
        }
        Ok(out)
    }

    pub fn torus_points(&self, n: usize) -> Result<Vec<Vec<Complex64>>> {
        if self.w_steps < 2 {
            return Err(Error::EmptyGrid);
        }
        let count = self.w_steps.pow(n as u32);
        Ok((0..count)
            .map(|idx| {
                let mut rest = idx;
                (0..n)
                    .map(|_| {
                        let m = rest % self.w_steps;
                        rest /= self.w_steps;
                        Complex64::from_polar(1.0, TAU * m as f64 / self.w_steps as f64)
                    })
                    .collect()
            })
            .collect())
    }

    pub fn points(&self, n: usize, even: bool) -> Result<Vec<SpherePoint>> {
        let radial = self.radial_points(n, even)?;
        let torus = self.torus_points(n)?;
        let mut out = Vec::with_capacity(radial.len() * torus.len());
        for (t, s) in &radial {
            for w in &torus {
                out.push(SpherePoint {
                    t: t.clone(),
                    w: w.clone(),
                    s: *s,
                });
            }
        }
        Ok(out)
    }
}

/// A grid extremum and where it was attained.
#[derive(Clone, Debug)]
pub struct GridExtremum {
    pub value: f64,
    pub point: SpherePoint,
    pub points: usize,
}

impl GridExtremum {
    pub fn to_json_value(&self) -> Value {
        json!({ "value": self.value, "point": self.point.to_json_value(), "points": self.points })
    }
}

fn grid_extremum(
    m: &PolyMatrix,
    rep: &RationalRep,
    grid: &GridSpec,
    score: impl Fn(&CMatrix) -> f64 + Sync,
    maximize: bool,
) -> Result<GridExtremum> {
    let numeric = NumericMatrix::new(m, rep)?;
    let pts = grid.points(m.ctx().n(), m.ctx().has_x())?;
    if pts.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let scored = pts
        .par_iter()
        .enumerate()
        .map(|(i, pt)| numeric.eval(pt, rep).map(|e| (score(&e), i)))
        .collect::<Result<Vec<_>>>()?;
    let pick = |a: &(f64, usize), b: &(f64, usize)| {
        let ord = a.0.total_cmp(&b.0);
        let ord = if maximize { ord } else { ord.reverse() };
        ord.then(b.1.cmp(&a.1))
    };
    let best = scored.iter().max_by(|a, b| pick(a, b)).expect("nonempty");
    Ok(GridExtremum {
        value: best.0,
        point: pts[best.1].clone(),
        points: pts.len(),
    })
}

/// Largest operator norm over the grid. This is a lower bound on the
/// C*-norm, never a certified upper bound.
pub fn grid_norm(m: &PolyMatrix, rep: &RationalRep, grid: &GridSpec) -> Result<GridExtremum> {
    grid_extremum(m, rep, grid, operator_norm, true)
}

/// Smallest singular value over the grid: heuristic invertibility evidence.
pub fn grid_min_singular(m: &PolyMatrix, rep: &RationalRep, grid: &GridSpec) -> Result<GridExtremum> {
    grid_extremum(m, rep, grid, min_singular, false)
}

/// The square sum (x_j+x_k)² + (y_j+y_k)² + Σ_{m∉{j,k}} z_m z_m^* with
/// x = (z+z^*)/2, y = (z−z^*)/2i.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub ctx: Arc<Context>,
    pub j: usize,
    pub k: usize,
    pub sum: StarPolynomial,
    /// (1+ρ_{kj})/2·(z_j z_k^* + z_j^* z_k).
    pub cross: StarPolynomial,
    /// |1+ρ_{kj}|²/4, exact when the context is.
    pub bound_squared: Coefficient,
    /// |1+ρ_{kj}|/2.
    pub bound: f64,
}

/// Builds the square sum for the pair (j, k) (zero-based) and checks the
/// identity sum = (sphere polynomial) + cross term exactly.
pub fn counterexample_sum(rho: &ParameterMatrix, j: usize, k: usize) -> Result<Counterexample> {
    let n = rho.n();
    for idx in [j, k] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx + 1, n });
        }
    }
    if j == k {
        return Err(Error::SameIndex(j + 1));
    }
    if rho.angle(j, k).is_zero() {
        return Err(Error::Precondition(format!("z{} and z{} commute", j + 1, k + 1)));
    }
    let ctx = Context::new(rho.clone(), false, 4);
    let s = ctx.scalars();
    let half = ctx.constant(s.rational(&num_rational::BigRational::new(1.into(), 2.into())));
    let minus_half_i = ctx.constant(s.i()?.mul(&s.rational(&num_rational::BigRational::new((-1).into(), 2.into()))));
    let xs = |m: usize| &half * &(&ctx.gen(m) + &ctx.gen_star(m));
    let ys = |m: usize| &minus_half_i * &(&ctx.gen(m) - &ctx.gen_star(m));
    let xa = &xs(j) + &xs(k);
    let ya = &ys(j) + &ys(k);
    let mut sum = &(&xa * &xa) + &(&ya * &ya);
    for m in (0..n).filter(|&m| m != j && m != k) {
        sum = &sum + &ctx.norm_square(m);
    }
    let rho_kj = ctx.rho_entry(k, j);
    let factor = rho_kj.add(&s.one()).mul(&s.rational(&num_rational::BigRational::new(1.into(), 2.into())));
    let pair = &(&ctx.gen(j) * &ctx.gen_star(k)) + &(&ctx.gen_star(j) * &ctx.gen(k));
    let cross = pair.scale(&factor);
    let residual = &(&sum - &ctx.sphere_polynomial()) - &cross;
    if !residual.is_zero() {
        return Err(Error::FailedRelation(format!("square-sum identity, residual {residual}")));
    }
    let bound_squared = factor.mul(&factor.conj());
    let bound = bound_squared.to_complex().re.max(0.0).sqrt();
    Ok(Counterexample {
        ctx,
        j,
        k,
        sum,
        cross,
        bound_squared,
        bound,
    })
}

impl Counterexample {
    /// max over the grid of ‖sum − 1‖ at sphere points.
    pub fn grid_deviation(&self, rep: &RationalRep, grid: &GridSpec) -> Result<GridExtremum> {
        let dev = &self.sum - &self.ctx.one();
        grid_norm(&PolyMatrix::new(&self.ctx, 1, 1, vec![dev])?, rep, grid)
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "j": self.j + 1,
            "k": self.k + 1,
            "sum": self.sum.to_string(),
            "cross": self.cross.to_string(),
            "bound": self.bound,
            "bound_squared": self.bound_squared.to_complex().re,
            "identity": "sum - (z1 z1' + ... + zn zn') - cross = 0",
        })
    }
}

/// Result of the determinant antisymmetry check.
#[derive(Clone, Debug)]
pub struct DetParityReport {
    pub q: usize,
    pub samples: usize,
    /// max |det E(b)(−w) + det E(b)(w)| / max(1, |det E(b)(w)|, |det E(b)(−w)|).
    pub max_antisymmetry: f64,
    /// max ‖E(b) − E(b)^*‖ when b is self-adjoint.
    pub self_adjoint_residual: Option<f64>,
    pub min_abs_det: f64,
}

impl DetParityReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "q": self.q,
            "samples": self.samples,
            "max_antisymmetry": self.max_antisymmetry,
            "self_adjoint_residual": self.self_adjoint_residual,
            "min_abs_det": self.min_abs_det,
        })
    }
}

/// For odd q and an odd element b, det E(b) is an odd function of w. The
/// radial part is fixed at `t` (default 1/√n for every coordinate).
pub fn det_parity_demo(rep: &RationalRep, b: &StarPolynomial, w_steps: usize, t: Option<Vec<f64>>) -> Result<DetParityReport> {
    if rep.q().is_multiple_of(2) {
        return Err(Error::Precondition(format!("representation dimension {} is even", rep.q())));
    }
    let n = b.ctx().n();
    if b.ctx().has_x() {
        return Err(Error::Precondition("torus elements only; x is not allowed".into()));
    }
    match RotationAction::antipodal(n).homogeneity_class(b)? {
        Some(1) => {}
        _ => return Err(Error::Precondition("element is not odd under the antipodal map".into())),
    }
    let t = t.unwrap_or_else(|| vec![1.0 / (n as f64).sqrt(); n]);
    let grid = GridSpec::new(2, w_steps);
    let torus = grid.torus_points(n)?;
    let self_adjoint = &b.adjoint() == b;
    let rows = torus
        .par_iter()
        .map(|w| {
            let pt = SpherePoint::new(t.clone(), w.clone(), None)?;
            let a = eval_poly(b, &pt, rep)?;
            let am = eval_poly(b, &pt.antipode(), rep)?;
            let (d, dm) = (a.determinant(), am.determinant());
            let sa = self_adjoint.then(|| operator_norm(&(&a - a.adjoint())));
            Ok(((d + dm).norm() / d.norm().max(dm.norm()).max(1.0), sa, d.norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetParityReport {
        q: rep.q(),
        samples: rows.len(),
        max_antisymmetry: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        self_adjoint_residual: self_adjoint.then(|| rows.iter().filter_map(|r| r.1).fold(0.0, f64::max)),
        min_abs_det: rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse;
    use crate::zgen::zgen;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) < tol
    }

    #[test]
    fn clock_shift_relation() {
        let (c, s) = clock_shift(3, 1).unwrap();
        let zeta = Angle::exact(1, 3).unwrap().phase();
        assert!(close(&(&s * &c), &((&c * &s) * zeta), 1e-14));
        let (c1, s1) = clock_shift(1, 0).unwrap();
        assert_eq!(c1, CMatrix::identity(1, 1));
        assert_eq!(s1, CMatrix::identity(1, 1));
        let (c5, s5) = clock_shift(5, 2).unwrap();
        assert!(close(&c5.pow(5), &CMatrix::identity(5, 5), 1e-12));
        assert!(close(&s5.pow(5), &CMatrix::identity(5, 5), 1e-12));
        assert!(clock_shift(0, 1).is_err());
    }

    #[test]
    fn rational_rep_dimensions() {
        let a = |p, q| Angle::exact(p, q).unwrap();
        let psi = ParameterMatrix::from_upper(2, |_, _| a(1, 3));
        let rep = RationalRep::build(&psi).unwrap();
        assert_eq!(rep.q(), 3);
        assert!(rep.relation_residual() < 1e-12);
        let psi3 = ParameterMatrix::from_upper(3, |j, k| match (j, k) {
            (0, 1) => a(1, 3),
            (0, 2) => a(2, 5),
            _ => a(2, 3),
        });
        let rep3 = RationalRep::build(&psi3).unwrap();
        assert_eq!(rep3.q(), 45);
        assert!(rep3.relation_residual() < 1e-12 && rep3.unitarity_residual() < 1e-12);
        let triv = RationalRep::build(&ParameterMatrix::commutative(3)).unwrap();
        assert_eq!(triv.q(), 1);
        let irr = ParameterMatrix::from_upper(2, |_, _| Angle::float(0.3).unwrap());
        assert!(matches!(RationalRep::build(&irr), Err(Error::IrrationalAngle(1, 2))));
    }

    #[test]
    fn sphere_sum_evaluates_to_identity() {
        let psi = ParameterMatrix::from_upper(2, |_, _| Angle::exact(2, 5).unwrap());
        let ctx = Context::odd(psi.clone());
        let rep = RationalRep::build(&psi).unwrap();
        let mut rng = rand::thread_rng();
        for _ in 0..5 {
            let pt = SpherePoint::random(2, false, &mut rng);
            let e = eval_poly(&ctx.sphere_polynomial(), &pt, &rep).unwrap();
            assert!(close(&e, &CMatrix::identity(5, 5), 1e-12));
            let rel = parse("z2 z1 - w(2/5) z1 z2", &ctx).unwrap();
            assert!(operator_norm(&eval_poly(&rel, &pt, &rep).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn commutative_zgen_at_pole() {
        let ctx = Context::odd(ParameterMatrix::commutative(2));
        let z = zgen(&ctx, 2).unwrap();
        let theta = 0.7;
        let pt = SpherePoint::from_angles(vec![1.0, 0.0], &[theta, 0.0], None).unwrap();
        let e = eval_matrix(&z, &pt, &RationalRep::trivial(2)).unwrap();
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
        ]));
        assert!(close(&e, &expect, 1e-14));
    }

    #[test]
    fn grid_shapes() {
        let g = GridSpec::new(3, 4);
        assert_eq!(g.points(2, false).unwrap().len(), 3 * 16);
        assert_eq!(g.points(2, true).unwrap().len(), 9 * 16);
        for p in g.points(3, true).unwrap() {
            let r2: f64 = p.t.iter().map(|x| x * x).sum::<f64>() + p.s.unwrap().powi(2);
            assert!((r2 - 1.0).abs() < 1e-12);
        }
        assert!(matches!(GridSpec::new(1, 4).points(2, false), Err(Error::EmptyGrid)));
    }

    #[test]
    fn z1_norm_approaches_one() {
        let ctx = Context::odd(ParameterMatrix::commutative(2));
        let m = PolyMatrix::new(&ctx, 1, 1, vec![ctx.gen(0)]).unwrap();
        let r = grid_norm(&m, &RationalRep::trivial(2), &GridSpec::new(5, 3)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.point.t[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_third_root() {
        let rho = ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap());
        let cx = counterexample_sum(&rho, 0, 1).unwrap();
        assert!((cx.bound - 0.5).abs() < 1e-15);
        let half = cx.ctx.scalars().rational(&num_rational::BigRational::new(1.into(), 4.into()));
        assert_eq!(cx.bound_squared, half);
        let minus = ParameterMatrix::from_upper(2, |_, _| Angle::half());
        let cm = counterexample_sum(&minus, 0, 1).unwrap();
        assert!(cm.bound == 0.0 && cm.cross.is_zero());
        assert_eq!(cm.sum, cm.ctx.sphere_polynomial());
        assert!(counterexample_sum(&ParameterMatrix::commutative(2), 0, 1).is_err());
    }

    #[test]
    fn det_parity_small() {
        let ctx = Context::odd(ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap()));
        let rep = RationalRep::build(ctx.rho()).unwrap();
        let b = parse("z1 + z1'", &ctx).unwrap();
        let r = det_parity_demo(&rep, &b, 8, None).unwrap();
        assert!(r.max_antisymmetry < 1e-9);
        assert!(r.self_adjoint_residual.unwrap() < 1e-12);
        let even = parse("z1 z1'", &ctx).unwrap();
        assert!(det_parity_demo(&rep, &even, 8, None).is_err());
    }
}
