//! Seeded end-to-end scenarios with pass/fail reports.
//!
//! Every suite draws its randomness from one ChaCha8 stream: trial seeds are
//! taken up front, trials run in parallel, and results are gathered in trial
//! order, so a seed reproduces a report byte for byte.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::actions::{factor_rotation, is_ru_fixed, RotationAction};
use crate::algebra::{Context, StarPolynomial};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::homs::rescale_permute;
use crate::matrix::PolyMatrix;
use crate::param::ParameterMatrix;
use crate::rep::{counterexample_sum, det_parity_demo, GridSpec, RationalRep};
use crate::scalar::Angle;
use crate::winding::{adaptive_winding, commuting_product, invariant_winding_check, root_diagonal, MatrixLoop, Parity, TrigMatrix, TrigPoly};
use crate::zgen::{is_sphere_unitary, zgen};

pub const SUITE_NAMES: [&str; 5] = ["zgen", "borsuk-ulam-engine", "counterexample", "winding", "rational-rep"];

/// Denominators for random exact parameter matrices.
pub const RANDOM_DENOMINATORS: [i64; 7] = [2, 3, 4, 5, 6, 7, 8];

/// Largest representation dimension drawn by the rational-rep suite.
pub const MAX_REP_DIM: usize = 135;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    /// Largest generator count for zgen-based suites.
    pub nmax: usize,
    /// Rotation orders tried by the Borsuk-Ulam engine.
    pub orders: Vec<u64>,
    /// Parameter matrices for the counterexample suite; random when empty.
    pub rhos: Vec<ParameterMatrix>,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    /// Wall-clock timings in the report; off by default so reports stay
    /// reproducible.
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            trials: 10,
            nmax: 4,
            orders: vec![2, 3, 5],
            rhos: Vec::new(),
            grid: GridSpec::new(30, 30),
            tolerances: Tolerances::default(),
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub pass: bool,
    /// Minimal descriptions of failures.
    pub witnesses: Vec<Value>,
    /// Aggregate numbers (counts, worst residuals).
    pub summary: Value,
    pub timings: Map<String, Value>,
}

impl SuiteReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "pass": self.pass,
            "witnesses": self.witnesses,
            "summary": self.summary,
            "timings": self.timings,
        })
    }
}

/// Collects witnesses and timings while a suite runs.
struct Recorder {
    name: &'static str,
    seed: u64,
    timings_on: bool,
    witnesses: Vec<Value>,
    timings: Map<String, Value>,
}

impl Recorder {
    fn new(name: &'static str, cfg: &SuiteConfig) -> Self {
        Recorder {
            name,
            seed: cfg.seed,
            timings_on: cfg.timings,
            witnesses: Vec::new(),
            timings: Map::new(),
        }
    }

    fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.timings_on {
            self.timings.insert(label.into(), json!(start.elapsed().as_secs_f64()));
        }
        out
    }

    fn fail(&mut self, w: Value) {
        self.witnesses.push(w);
    }

    fn finish(self, summary: Value) -> SuiteReport {
        SuiteReport {
            suite: self.name.into(),
            seed: self.seed,
            pass: self.witnesses.is_empty(),
            witnesses: self.witnesses,
            summary,
            timings: self.timings,
        }
    }
}

fn trial_seeds(rng: &mut ChaCha8Rng, trials: usize) -> Vec<u64> {
    (0..trials).map(|_| rng.gen()).collect()
}

pub fn run(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "zgen" => suite_zgen(cfg),
        "borsuk-ulam-engine" => suite_borsuk_ulam_engine(cfg),
        "counterexample" => suite_counterexample(cfg),
        "winding" => suite_winding(cfg),
        "rational-rep" => suite_rational_rep(cfg),
        _ => Err(Error::Invalid(format!("unknown suite `{name}`; expected one of {}", SUITE_NAMES.join(", ")))),
    }
}

/// Z(1), Z(2), Z(3) written out entry by entry, with α = ρ₁₂, β = ρ₁₃, γ = ρ₂₃.
pub fn golden_zgen(ctx: &Arc<Context>, k: usize) -> Result<PolyMatrix> {
    if k > ctx.n() {
        return Err(Error::IndexOutOfRange { index: k, n: ctx.n() });
    }
    let z = |j: usize| ctx.gen(j);
    let zs = |j: usize| ctx.gen_star(j);
    let c = |p: &StarPolynomial, coeff: crate::scalar::Coefficient| p.scale(&coeff);
    let zero = ctx.zero();
    match k {
        1 => PolyMatrix::new(ctx, 1, 1, vec![z(0)]),
        2 => {
            let a = ctx.rho_entry(0, 1);
            PolyMatrix::new(ctx, 2, 2, vec![z(0), z(1), c(&zs(1), a.conj().neg()), zs(0)])
        }
        3 => {
            let (a, b, g) = (ctx.rho_entry(0, 1), ctx.rho_entry(0, 2), ctx.rho_entry(1, 2));
            #[rustfmt::skip]
            let entries = vec![
                z(0), z(1), z(2), zero.clone(),
                c(&zs(1), a.conj().neg()), zs(0), zero.clone(), c(&z(2), g.mul(&b)),
                c(&zs(2), b.conj().neg()), zero.clone(), zs(0), c(&z(1), a.neg()),
                zero.clone(), c(&zs(2), g.conj().neg()), zs(1), z(0),
            ];
            PolyMatrix::new(ctx, 4, 4, entries)
        }
        _ => Err(Error::Invalid("explicit matrices exist for levels 1 to 3".into())),
    }
}

fn first_difference(a: &PolyMatrix, b: &PolyMatrix) -> Value {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return json!({ "shape": [a.rows(), a.cols(), b.rows(), b.cols()] });
    }
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a.get(i, j) != b.get(i, j) {
                return json!({ "row": i + 1, "col": j + 1, "computed": a.get(i, j).to_string(), "expected": b.get(i, j).to_string() });
            }
        }
    }
    Value::Null
}

/// Sphere unitarity for k ≤ nmax on random ρ, the explicit low levels, and
/// agreement of Z(k) across parameter matrices sharing the upper-left block.
pub fn suite_zgen(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder::new("zgen", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nmax = cfg.nmax.max(1);
    let seeds = trial_seeds(&mut rng, cfg.trials);
    let results = rec.timed("unitarity", || {
        seeds
            .par_iter()
            .enumerate()
            .map(|(trial, &s)| -> Result<Vec<Value>> {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                let rho = ParameterMatrix::random_exact(nmax, &RANDOM_DENOMINATORS, &mut r);
                let ctx = Context::odd(rho.clone());
                let mut out = Vec::new();
                for k in 1..=nmax {
                    let z = zgen(&ctx, k)?;
                    let rep = is_sphere_unitary(&z, k)?;
                    if !rep.unitary {
                        let (side, row, col, res) = rep.witnesses().into_iter().next().expect("nonunitary has a witness");
                        out.push(json!({ "check": "unitarity", "trial": trial, "k": k, "rho": rho.to_json_value(), "side": side, "row": row + 1, "col": col + 1, "residual": res }));
                    }
                    if k <= 3 {
                        let diff = first_difference(&z, &golden_zgen(&ctx, k)?);
                        if !diff.is_null() {
                            out.push(json!({ "check": "golden", "trial": trial, "k": k, "rho": rho.to_json_value(), "entry": diff }));
                        }
                    }
                    // ω agrees with ρ on the upper-left k×k block only
                    let mut r2 = ChaCha8Rng::seed_from_u64(s ^ k as u64);
                    let other = ParameterMatrix::random_exact(nmax + 1, &RANDOM_DENOMINATORS, &mut r2);
                    let omega = ParameterMatrix::from_upper(nmax + 1, |a, b| if b < k { rho.angle(a, b) } else { other.angle(a, b) });
                    let zo = zgen(&Context::odd(omega), k)?;
                    if !zo.formally_equal(&z) {
                        out.push(json!({ "check": "submatrix", "trial": trial, "k": k, "rho": rho.to_json_value() }));
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for w in results.into_iter().flatten() {
        rec.fail(w);
    }
    let commutative = rec.timed("commutative", || -> Result<bool> {
        let ctx = Context::odd(ParameterMatrix::commutative(nmax.max(5)));
        Ok(is_sphere_unitary(&zgen(&ctx, nmax.max(5))?, nmax.max(5))?.unitary)
    })?;
    if !commutative {
        rec.fail(json!({ "check": "unitarity", "rho": "commutative" }));
    }
    let failures = rec.witnesses.len();
    Ok(rec.finish(json!({ "trials": cfg.trials, "nmax": nmax, "failures": failures })))
}

/// Primitive k-th roots as angles e/k.
pub fn random_primitive_alphas<R: Rng>(n: usize, k: u64, rng: &mut R) -> Vec<Angle> {
    let units: Vec<i64> = (1..k as i64).filter(|&e| num_integer::gcd(e, k as i64) == 1).collect();
    (0..n)
        .map(|_| Angle::exact(*units.choose(rng).expect("k ≥ 2 has units"), k as i64).expect("k > 0"))
        .collect()
}

/// A random permutation that only moves indices with equal angles.
fn class_preserving_permutation<R: Rng>(alphas: &[Angle], rng: &mut R) -> Vec<usize> {
    let n = alphas.len();
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match classes.iter_mut().find(|c| alphas[c[0]] == alphas[i]) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    for class in classes {
        let mut targets = class.clone();
        targets.shuffle(rng);
        for (src, dst) in class.into_iter().zip(targets) {
            sigma[src] = dst;
        }
    }
    sigma
}

/// One engine trial: Φ(z_i) = β_i z_{σ(i)} with root-of-unity β, the action R
/// with the same angles on both spheres, P = Z_ω(n)^*·Φ(Z_ρ(n)).
/// Returns witnesses.
pub fn engine_trial(rho: &ParameterMatrix, r: &RotationAction, sigma: &[usize], betas: &[Angle]) -> Result<Vec<Value>> {
    let n = rho.n();
    let k = r.k();
    let beta_den = betas.iter().filter_map(Angle::denominator).fold(1, crate::scalar::lcm);
    let dom = Context::new(rho.clone(), false, crate::scalar::lcm(k, beta_den));
    let phi = rescale_permute(&dom, sigma, betas)?;
    let cod = phi.codomain().clone();
    let mut out = Vec::new();
    let alphas_cod: Vec<Angle> = {
        let mut a = r.alphas().to_vec();
        for i in 0..n {
            a[sigma[i]] = r.alphas()[i];
        }
        a
    };
    let r_cod = RotationAction::with_x_parity(k, alphas_cod, r.x_odd())?;
    if !phi.check_equivariance(r, &r_cod)? {
        out.push(json!({ "check": "equivariance", "k": k }));
        return Ok(out);
    }
    let z_rho = zgen(&dom, n)?;
    let z_omega = zgen(&cod, n)?;
    let product = z_omega.adjoint().mul(&phi.apply_matrix(&z_rho)?)?;
    if k == 2 {
        for (i, j, p) in product.nonzero_entries() {
            let class = r_cod.homogeneity_class(p)?;
            if class != Some(0) {
                out.push(json!({ "check": "even entries", "row": i + 1, "col": j + 1, "class": class, "entry": p.to_string() }));
                break;
            }
        }
    }
    let f_rho = factor_rotation(&z_rho, r)?;
    let f_omega = factor_rotation(&z_omega, &r_cod)?;
    if f_rho.a_exponents != f_omega.a_exponents || f_rho.b_exponents != f_omega.b_exponents {
        out.push(json!({ "check": "same factors", "k": k, "rho": f_rho.to_json_value(), "omega": f_omega.to_json_value() }));
    }
    if !f_rho.a.has_order_dividing(k) || !f_rho.b.has_order_dividing(k) {
        out.push(json!({ "check": "A^k = B^k = I", "k": k }));
    }
    if !is_ru_fixed(&f_rho.b.adjoint(), &r_cod, &product)? {
        out.push(json!({ "check": "fixed by B R(.) B*", "k": k, "factors": f_rho.to_json_value() }));
    }
    Ok(out)
}

/// Antipodal and rotation cases of the Z_ω^*·Φ(Z_ρ) mechanism for n ≤ nmax.
pub fn suite_borsuk_ulam_engine(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder::new("borsuk-ulam-engine", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nmax = cfg.nmax.max(2);
    let mut cases = Vec::new();
    for n in 2..=nmax {
        // identity map under the antipodal action
        cases.push((n, 2u64, None, rng.gen::<u64>()));
        for &k in std::iter::once(&2).chain(cfg.orders.iter()) {
            for _ in 0..cfg.trials {
                cases.push((n, k, Some(()), rng.gen::<u64>()));
            }
        }
    }
    let results = rec.timed("trials", || {
        cases
            .par_iter()
            .map(|&(n, k, random, s)| -> Result<Vec<Value>> {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                let rho = ParameterMatrix::random_exact(n, &RANDOM_DENOMINATORS, &mut r);
                let (action, sigma, betas) = match random {
                    None => (RotationAction::antipodal(n), (0..n).collect(), vec![Angle::zero(); n]),
                    Some(()) => {
                        let action = if k == 2 { RotationAction::antipodal(n) } else { RotationAction::new(k, random_primitive_alphas(n, k, &mut r))? };
                        let sigma = class_preserving_permutation(action.alphas(), &mut r);
                        let betas = (0..n)
                            .map(|_| {
                                let d = *[1i64, 2, 4, k as i64].choose(&mut r).expect("nonempty");
                                Angle::exact(r.gen_range(0..d), d)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        (action, sigma, betas)
                    }
                };
                let ws = engine_trial(&rho, &action, &sigma, &betas)?;
                Ok(ws
                    .into_iter()
                    .map(|mut w| {
                        w["n"] = json!(n);
                        w["rho"] = rho.to_json_value();
                        w["sigma"] = json!(sigma.iter().map(|s| s + 1).collect::<Vec<_>>());
                        w["betas"] = json!(betas.iter().map(ToString::to_string).collect::<Vec<_>>());
                        w
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for w in results.into_iter().flatten() {
        rec.fail(w);
    }
    Ok(rec.finish(json!({ "cases": cases.len(), "nmax": nmax, "orders": cfg.orders })))
}

/// A random ρ_{kj} ≠ 1 on two generators.
fn random_noncommuting_pair<R: Rng>(rng: &mut R) -> ParameterMatrix {
    let q = *RANDOM_DENOMINATORS.choose(rng).expect("nonempty");
    let p = rng.gen_range(1..q);
    ParameterMatrix::from_upper(2, |_, _| Angle::exact(p, q).expect("q > 0"))
}

/// The square-sum identity, the bound |1+ρ_{kj}|/2 < 1, and the grid maximum
/// of ‖sum − 1‖ against that bound, for z₁, z₂.
pub fn suite_counterexample(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder::new("counterexample", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rhos = cfg.rhos.clone();
    if rhos.is_empty() {
        rhos.push(ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).expect("valid")));
        rhos.extend((0..cfg.trials).map(|_| random_noncommuting_pair(&mut rng)));
    }
    let grid = cfg.grid.clone();
    let slack = cfg.tolerances.eps_rel;
    let rows = rec.timed("cases", || {
        rhos.par_iter()
            .map(|rho| -> Result<(Value, Option<Value>)> {
                let ce = counterexample_sum(rho, 0, 1)?;
                let rep = RationalRep::build(rho)?;
                let dev = ce.grid_deviation(&rep, &grid)?;
                let row = json!({ "rho": rho.to_json_value(), "bound": ce.bound, "grid_max": dev.value, "q": rep.q() });
                let fail = (ce.bound >= 1.0 || dev.value > ce.bound + slack).then(|| {
                    json!({ "rho": rho.to_json_value(), "bound": ce.bound, "grid_max": dev.value, "point": dev.point.to_json_value() })
                });
                Ok((row, fail))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Vec::new();
    for (row, fail) in rows {
        table.push(row);
        if let Some(w) = fail {
            rec.fail(w);
        }
    }
    Ok(rec.finish(json!({ "cases": table, "grid": grid })))
}

fn random_parity_winding(d: usize, parity: Parity, seed: u64, tol: &Tolerances) -> Result<i64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let f = TrigMatrix::random_parity(d, 3, parity, &mut r)?;
    Ok(adaptive_winding(f.sampler(), 64, tol)?.winding)
}

/// Parity law for odd and even loops, and kℤ windings of invariant loops.
///
/// An odd loop F(θ + π) = −F(θ) has det F(θ + π) = (−1)^d det F(θ), so the
/// parity law is drawn at odd d; even loops are drawn at every d ≤ 3.
pub fn suite_winding(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder::new("winding", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = cfg.tolerances.clone();
    let trials = cfg.trials;
    let odd_seeds = trial_seeds(&mut rng, trials);
    let even_seeds = trial_seeds(&mut rng, trials);
    let odd = rec.timed("odd", || {
        odd_seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| random_parity_winding(if i % 2 == 0 { 1 } else { 3 }, Parity::Odd, s, &tol).map(|w| (i, w)))
            .collect::<Result<Vec<_>>>()
    })?;
    let even = rec.timed("even", || {
        even_seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| random_parity_winding(1 + i % 3, Parity::Even, s, &tol).map(|w| (i, w)))
            .collect::<Result<Vec<_>>>()
    })?;
    for &(i, w) in &odd {
        if w.rem_euclid(2) != 1 {
            rec.fail(json!({ "check": "odd loop", "trial": i, "dim": if i % 2 == 0 { 1 } else { 3 }, "winding": w }));
        }
    }
    for &(i, w) in &even {
        if w.rem_euclid(2) != 0 {
            rec.fail(json!({ "check": "even loop", "trial": i, "dim": 1 + i % 3, "winding": w }));
        }
    }
    let inv_seeds: Vec<(i64, u64)> = [2i64, 3, 4].iter().flat_map(|&k| trial_seeds(&mut rng, trials.div_ceil(3).max(1)).into_iter().map(move |s| (k, s))).collect();
    let invariant = rec.timed("invariant", || {
        inv_seeds
            .par_iter()
            .map(|&(k, s)| -> Result<(i64, i64, bool)> {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                let d = r.gen_range(1..=3usize);
                let exps: Vec<i64> = (0..d).map(|_| r.gen_range(0..k)).collect();
                let u = root_diagonal(k, &exps);
                let m = 256 * k as usize;
                let lp = if r.gen_bool(0.5) {
                    MatrixLoop::from_fn(m, TrigMatrix::random_invariant(k, &exps, 3, &mut r)?.sampler())?
                } else {
                    let g: Vec<TrigPoly> = (0..d)
                        .map(|_| TrigMatrix::random_parity(1, 2, Parity::Any, &mut r).map(|t| t.entries[0].clone()))
                        .collect::<Result<_>>()?;
                    MatrixLoop::from_fn(m, commuting_product(&g, &u, k as usize))?
                };
                let rep = invariant_winding_check(&lp, k as usize, &u, &tol)?;
                Ok((k, rep.winding, rep.divisible))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (i, &(k, w, ok)) in invariant.iter().enumerate() {
        if !ok {
            rec.fail(json!({ "check": "invariant loop", "trial": i, "k": k, "winding": w }));
        }
    }
    let windings = |v: &[(usize, i64)]| v.iter().map(|p| p.1).collect::<Vec<_>>();
    Ok(rec.finish(json!({
        "odd_windings": windings(&odd),
        "even_windings": windings(&even),
        "invariant": invariant.iter().map(|(k, w, _)| json!({ "k": k, "winding": w })).collect::<Vec<_>>(),
    })))
}

/// Random ψ with n ≤ 4 and odd denominators up to 9, kept to dimension at
/// most [`MAX_REP_DIM`].
pub fn random_odd_psi<R: Rng>(rng: &mut R) -> ParameterMatrix {
    loop {
        let n = rng.gen_range(2..=4);
        let psi = ParameterMatrix::from_upper(n, |_, _| {
            if rng.gen_bool(0.4) {
                Angle::zero()
            } else {
                let q = *[3i64, 5, 7, 9].choose(rng).expect("nonempty");
                Angle::exact(rng.gen_range(1..q), q).expect("q > 0")
            }
        });
        let q: u64 = (0..n)
            .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
            .map(|(j, k)| psi.angle(j, k).denominator().unwrap_or(1))
            .product();
        if q as usize <= MAX_REP_DIM {
            return psi;
        }
    }
}

/// Relation residuals and odd dimension of clock-shift representations, and
/// the antisymmetry of det E(z₁ + … + z_n) under w ↦ −w.
pub fn suite_rational_rep(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder::new("rational-rep", cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds = trial_seeds(&mut rng, cfg.trials);
    let tol = cfg.tolerances.clone();
    let rows = rec.timed("trials", || {
        seeds
            .par_iter()
            .enumerate()
            .map(|(trial, &s)| -> Result<(Value, Vec<Value>)> {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                let psi = random_odd_psi(&mut r);
                let rep = RationalRep::build(&psi)?;
                let (rel, uni) = (rep.relation_residual(), rep.unitarity_residual());
                let ctx = Context::odd(psi.clone());
                let b = (0..psi.n()).fold(ctx.zero(), |acc, j| &acc + &ctx.gen(j));
                let w_steps = if psi.n() <= 2 { 8 } else { 4 };
                let dp = det_parity_demo(&rep, &b, w_steps, None)?;
                let mut fails = Vec::new();
                if rel >= tol.eps_rep || uni >= tol.eps_rep {
                    fails.push(json!({ "check": "relations", "trial": trial, "psi": psi.to_json_value(), "relation_residual": rel, "unitarity_residual": uni }));
                }
                if rep.q() % 2 == 0 {
                    fails.push(json!({ "check": "odd dimension", "trial": trial, "q": rep.q() }));
                }
                if dp.max_antisymmetry >= tol.det_parity {
                    fails.push(json!({ "check": "det parity", "trial": trial, "psi": psi.to_json_value(), "residual": dp.max_antisymmetry }));
                }
                let row = json!({ "n": psi.n(), "q": rep.q(), "relation_residual": rel, "det_antisymmetry": dp.max_antisymmetry });
                Ok((row, fails))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = Vec::new();
    for (row, fails) in rows {
        table.push(row);
        for f in fails {
            rec.fail(f);
        }
    }
    Ok(rec.finish(json!({ "trials": table })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig {
            seed,
            trials: 3,
            nmax: 3,
            grid: GridSpec::new(8, 8),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn every_suite_passes_small() {
        for name in SUITE_NAMES {
            let rep = run(name, &small(5)).unwrap();
            assert!(rep.pass, "{name}: {:?}", rep.witnesses);
            assert!(rep.timings.is_empty());
        }
        assert!(run("nope", &small(1)).is_err());
    }

    #[test]
    fn reports_are_reproducible() {
        let a = run("borsuk-ulam-engine", &small(7)).unwrap().to_json_value().to_string();
        let b = run("borsuk-ulam-engine", &small(7)).unwrap().to_json_value().to_string();
        assert_eq!(a, b);
    }

    #[test]
    fn counterexample_third_root() {
        let cfg = SuiteConfig {
            rhos: vec![ParameterMatrix::from_upper(2, |_, _| Angle::exact(1, 3).unwrap())],
            grid: GridSpec::new(10, 10),
            ..SuiteConfig::default()
        };
        let rep = suite_counterexample(&cfg).unwrap();
        assert!(rep.pass);
        assert!((rep.summary["cases"][0]["bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn golden_levels_match() {
        let ctx = Context::odd(ParameterMatrix::from_upper(3, |j, k| Angle::exact(1, (2 * j + k + 2) as i64).unwrap()));
        for k in 1..=3 {
            assert_eq!(zgen(&ctx, k).unwrap(), golden_zgen(&ctx, k).unwrap());
        }
    }

    #[test]
    fn mixed_rotation_classes_are_witnessed() {
        // σ swaps generators with different rotation angles, so the two
        // spheres carry different actions and the factors disagree
        let rho = ParameterMatrix::commutative(2);
        let r = RotationAction::new(3, vec![Angle::exact(1, 3).unwrap(), Angle::exact(2, 3).unwrap()]).unwrap();
        let ws = engine_trial(&rho, &r, &[1, 0], &[Angle::zero(), Angle::zero()]).unwrap();
        assert_eq!(ws[0]["check"], "same factors");
    }
}
