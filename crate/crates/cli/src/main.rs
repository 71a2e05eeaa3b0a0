//! `ncsphere`: command-line front end. JSON on stdout, `--pretty` for text.
//!
//! Exit codes: 0 success, 1 mathematical failure, 2 usage or parse error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncsphere::matrix::poly_to_json;
use ncsphere::rep::{
    cmatrix_from_json, cmatrix_to_json, counterexample_sum, eval_matrix, grid_min_singular, grid_norm,
};
use ncsphere::suites::{self, SUITE_NAMES};
use ncsphere::winding::{circle_loop, circle_winding, invariant_winding_check, winding_report, SCOPE_NOTE};
use ncsphere::{
    factor_rotation, parse, print, zgen, Context, Error, GeneratorMap, GridSpec, MatrixLoop, PolyMatrix,
    RationalRep, RotationAction, SpherePoint, StarPolynomial, SuiteConfig, Tolerances, ValidationMode,
};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "ncsphere", version, about = "Symbolic and numeric tools for θ-deformed spheres")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Shared inputs. Each file flag also accepts inline JSON.
#[derive(Args, Default)]
struct Global {
    /// Parameter matrix or context JSON.
    #[arg(long, global = true)]
    rho: Option<String>,
    /// Use the even sphere (adds the central generator x).
    #[arg(long, global = true)]
    even: bool,
    /// Size of the zgen matrix (number of generators used).
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Rotation action JSON: {"k": 3, "alphas": ["1/3", ...]}.
    #[arg(long, global = true)]
    action: Option<String>,
    /// Generator map JSON.
    #[arg(long, global = true)]
    hom: Option<String>,
    /// Rational representation JSON (built from --rho when absent).
    #[arg(long, global = true)]
    rep: Option<String>,
    /// Grid JSON: {"t_steps": 30, "w_steps": 30}.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override, e.g. `--tolerance eps_rel=1e-10`. Repeatable.
    #[arg(long = "tolerance", global = true, value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
    /// JSON config with defaults for any of the flags above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Human-readable output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// The K1 generator matrix Z(level).
    Zgen {
        /// Also check Z Z* = Z* Z = (z1 z1' + ... ) I.
        #[arg(long)]
        check: bool,
    },
    /// Parse an expression and print its normal form.
    Normalize { expr: String },
    /// Product of two operands (expressions or matrix JSON).
    Mul { a: String, b: String },
    Adjoint { a: String },
    /// Graded projections under --action.
    Project {
        a: String,
        #[arg(long)]
        class: Option<u64>,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Homogeneity class under --action (null when inhomogeneous).
    Classify { a: String },
    /// Diagonal A, B with R(M) = A M B; M defaults to zgen.
    FactorRotation { a: Option<String> },
    ValidateHom {
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        samples: Option<usize>,
        /// Rotation on the codomain for the equivariance check (default: --action).
        #[arg(long)]
        codomain_action: Option<String>,
    },
    ApplyHom { a: String },
    /// Clock-shift representation for an exact --rho.
    RepBuild,
    /// Evaluate at a sphere point in the rational representation.
    Eval {
        a: String,
        /// {"t": [...], "w": [[re, im], ...], "s": x}; default t = 1/√n, w = 1.
        #[arg(long)]
        point: Option<String>,
    },
    /// Largest operator norm (or smallest singular value) over a grid.
    GridNorm {
        a: String,
        #[arg(long)]
        min_singular: bool,
    },
    /// Square-sum counterexample for a noncommuting pair.
    Counterexample {
        /// One-based pair "j,k".
        #[arg(long, default_value = "1,2")]
        pair: String,
    },
    /// Winding number of a sampled determinant loop.
    Winding {
        #[arg(name = "loop")]
        lp: String,
        /// Also check invariance under conjugation by a unitary of this order.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        unitary: Option<String>,
    },
    /// Loop θ ↦ M(e_j, e^{iθ}) for a matrix over a commutative sphere.
    CircleLoop {
        a: Option<String>,
        /// One-based coordinate.
        #[arg(long, default_value_t = 1)]
        coord: usize,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// Report the winding number instead of the samples.
        #[arg(long)]
        winding: bool,
    },
    /// Seeded verification suite; `all` runs every suite.
    Suite {
        #[arg(long)]
        name: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Filter,
    Fourier,
    Both,
}

enum Failure {
    Usage(String),
    Math(Value),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Out = std::result::Result<Output, Failure>;

struct Output {
    json: Value,
    text: Option<String>,
    /// false maps to exit code 1 while still printing the report.
    pass: bool,
}

impl Output {
    fn ok(json: Value) -> Self {
        Output { json, text: None, pass: true }
    }
    fn text(mut self, t: String) -> Self {
        self.text = Some(t);
        self
    }
    fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn is_usage(e: &Error) -> bool {
    use Error::*;
    matches!(
        e,
        IndexOutOfRange { .. }
            | SameIndex(_)
            | IndexOrder { .. }
            | DimensionMismatch(_)
            | ContextMismatch(_)
            | InvalidParameterMatrix(_)
            | InvalidAngle(_)
            | OutsideField { .. }
            | Parse { .. }
            | UnknownGenerator(_)
            | XInOddSphere
            | InvalidAction(_)
            | InvalidUnitary(_)
            | OrderMismatch { .. }
            | IrrationalAngle(..)
            | EmptyGrid
            | Invalid(_)
            | Json(_)
    )
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// Inline JSON when the argument looks like JSON, otherwise a file path.
fn read_json(arg: &str) -> std::result::Result<Value, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("{arg}: {e}")))
}

struct Env {
    g: Global,
    cfg: Map<String, Value>,
    tol: Tolerances,
}

impl Env {
    fn new(g: Global) -> std::result::Result<Self, Failure> {
        let cfg = match &g.config {
            Some(p) => match read_json(&p.to_string_lossy())? {
                Value::Object(m) => m,
                _ => return Err(usage("config must be a JSON object")),
            },
            None => Map::new(),
        };
        let mut tol = match cfg.get("tolerances") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| usage(format!("config tolerances: {e}")))?,
            None => Tolerances::default(),
        };
        for item in &g.tolerances {
            let (name, value) = item.split_once('=').ok_or_else(|| usage(format!("expected NAME=VALUE, got `{item}`")))?;
            tol.set(name.trim(), value.trim()).map_err(usage)?;
        }
        Ok(Env { g, cfg, tol })
    }

    /// A flag value, falling back to the config key of the same name.
    fn json_input(&self, flag: &Option<String>, key: &str) -> std::result::Result<Option<Value>, Failure> {
        match flag {
            Some(s) => read_json(s).map(Some),
            None => match self.cfg.get(key) {
                Some(Value::String(s)) => read_json(s).map(Some),
                Some(v) => Ok(Some(v.clone())),
                None => Ok(None),
            },
        }
    }

    fn cfg_u64(&self, key: &str) -> Option<u64> {
        self.cfg.get(key).and_then(Value::as_u64)
    }

    fn seed(&self) -> u64 {
        self.g.seed.or_else(|| self.cfg_u64("seed")).unwrap_or(0)
    }

    fn even(&self) -> bool {
        self.g.even || self.cfg.get("even").and_then(Value::as_bool).unwrap_or(false)
    }

    fn ctx(&self) -> std::result::Result<Arc<Context>, Failure> {
        let v = self.json_input(&self.g.rho, "rho")?.ok_or_else(|| usage("--rho is required"))?;
        let ctx = Context::from_json_value(&v)?;
        if self.even() && !ctx.has_x() {
            return Ok(Context::with_scalars(ctx.rho().clone(), true, ctx.scalars().clone())?);
        }
        Ok(ctx)
    }

    fn action(&self) -> std::result::Result<RotationAction, Failure> {
        let v = self.json_input(&self.g.action, "action")?.ok_or_else(|| usage("--action is required"))?;
        Ok(RotationAction::from_json_value(&v)?)
    }

    fn level(&self, ctx: &Context) -> usize {
        self.g.level.or_else(|| self.cfg_u64("level").map(|l| l as usize)).unwrap_or(ctx.n())
    }

    fn rep(&self, ctx: &Context) -> std::result::Result<RationalRep, Failure> {
        Ok(match self.json_input(&self.g.rep, "rep")? {
            Some(v) => RationalRep::from_json_value(&v)?,
            None => RationalRep::build(ctx.rho())?,
        })
    }

    fn grid(&self) -> std::result::Result<GridSpec, Failure> {
        Ok(match self.json_input(&self.g.grid, "grid")? {
            Some(v) => serde_json::from_value(v).map_err(|e| usage(format!("grid: {e}")))?,
            None => GridSpec::new(30, 30),
        })
    }

    fn hom(&self) -> std::result::Result<GeneratorMap, Failure> {
        let v = self.json_input(&self.g.hom, "hom")?.ok_or_else(|| usage("--hom is required"))?;
        Ok(GeneratorMap::from_json_value(&v)?)
    }

    /// An expression (needs --rho) or matrix JSON, which may carry its own context.
    fn operand(&self, arg: &str) -> std::result::Result<Operand, Failure> {
        let trimmed = arg.trim_start();
        let looks_json = trimmed.starts_with('{') || (arg.ends_with(".json") && std::path::Path::new(arg).exists());
        if !looks_json {
            return Ok(Operand::Poly(parse(arg, &self.ctx()?)?));
        }
        let v = read_json(arg)?;
        if let Some(nf) = v.get("normal_form").and_then(Value::as_str) {
            let ctx = match v.get("context") {
                Some(c) => Context::from_json_value(c)?,
                None => self.ctx()?,
            };
            return Ok(Operand::Poly(parse(nf, &ctx)?));
        }
        let ctx = if v.get("context").is_some() { None } else { Some(self.ctx()?) };
        Ok(Operand::Matrix(PolyMatrix::from_json_value(&v, ctx.as_ref())?))
    }
}

enum Operand {
    Poly(StarPolynomial),
    Matrix(PolyMatrix),
}

impl Operand {
    fn ctx(&self) -> &Arc<Context> {
        match self {
            Operand::Poly(p) => p.ctx(),
            Operand::Matrix(m) => m.ctx(),
        }
    }

    fn moved_to(&self, ctx: &Arc<Context>) -> ncsphere::Result<Operand> {
        Ok(match self {
            Operand::Poly(p) => Operand::Poly(p.moved_to(ctx)?),
            Operand::Matrix(m) => Operand::Matrix(m.moved_to(ctx)?),
        })
    }

    fn as_matrix(&self) -> ncsphere::Result<PolyMatrix> {
        match self {
            Operand::Poly(p) => PolyMatrix::new(p.ctx(), 1, 1, vec![p.clone()]),
            Operand::Matrix(m) => Ok(m.clone()),
        }
    }

    fn output(&self) -> Output {
        match self {
            Operand::Poly(p) => poly_output(p),
            Operand::Matrix(m) => Output::ok(m.to_json_value()).text(m.to_string()),
        }
    }
}

fn poly_output(p: &StarPolynomial) -> Output {
    let nf = print(p);
    Output::ok(json!({ "normal_form": nf, "terms": poly_to_json(p), "context": p.ctx().to_json_value() })).text(nf)
}

/// Moves the operand into a field containing the k-th roots of unity.
fn for_action(op: Operand, r: &RotationAction) -> std::result::Result<Operand, Failure> {
    if op.ctx().n() != r.n() {
        return Err(usage(format!("action has {} angles but the context has {} generators", r.n(), op.ctx().n())));
    }
    let ctx = op.ctx().extended(r.k());
    Ok(op.moved_to(&ctx)?)
}

fn run(cmd: &Command, env: &Env) -> Out {
    match cmd {
        Command::Zgen { check } => {
            let ctx = env.ctx()?;
            let level = env.level(&ctx);
            let z = zgen(&ctx, level)?;
            if !check {
                return Ok(Output::ok(z.to_json_value()).text(z.to_string()));
            }
            let rep = ncsphere::is_sphere_unitary(&z, level)?;
            let text = format!("{z}\n\nsphere unitary: {}", rep.unitary);
            Ok(Output::ok(json!({ "matrix": z.to_json_value(), "unitarity": rep.to_json_value() }))
                .text(text)
                .pass(rep.unitary))
        }
        Command::Normalize { expr } => Ok(poly_output(&parse(expr, &env.ctx()?)?)),
        Command::Mul { a, b } => {
            let (a, b) = (env.operand(a)?, env.operand(b)?);
            let b = b.moved_to(a.ctx())?;
            let out = match (&a, &b) {
                (Operand::Poly(x), Operand::Poly(y)) => Operand::Poly(x.try_mul(y)?),
                (Operand::Poly(x), Operand::Matrix(m)) => Operand::Matrix(m.scale_left(x)?),
                (Operand::Matrix(m), Operand::Poly(y)) => {
                    Operand::Matrix(m.mul(&PolyMatrix::scalar_multiple_of_identity(y, m.cols()))?)
                }
                (Operand::Matrix(x), Operand::Matrix(y)) => Operand::Matrix(x.mul(y)?),
            };
            Ok(out.output())
        }
        Command::Adjoint { a } => Ok(match env.operand(a)? {
            Operand::Poly(p) => Operand::Poly(p.adjoint()),
            Operand::Matrix(m) => Operand::Matrix(m.adjoint()),
        }
        .output()),
        Command::Project { a, class, method } => {
            let r = env.action()?;
            let op = for_action(env.operand(a)?, &r)?;
            let project = |p: &StarPolynomial, j: u64| -> ncsphere::Result<StarPolynomial> {
                match method {
                    Method::Filter => r.project_filter(p, j),
                    Method::Fourier => r.project_fourier(p, j),
                    Method::Both => r.graded_project(p, j),
                }
            };
            let classes: Vec<u64> = match class {
                Some(j) => vec![*j],
                None => (0..r.k()).collect(),
            };
            let mut comps = Vec::new();
            let mut text = Vec::new();
            for j in classes {
                let part = match &op {
                    Operand::Poly(p) => Operand::Poly(project(p, j)?),
                    Operand::Matrix(m) => Operand::Matrix(m.try_map(|p| project(p, j))?),
                };
                let o = part.output();
                text.push(format!("class {j}: {}", o.text.clone().unwrap_or_default()));
                comps.push(json!({ "class": j, "component": o.json }));
            }
            Ok(Output::ok(json!({ "k": r.k(), "components": comps })).text(text.join("\n")))
        }
        Command::Classify { a } => {
            let r = env.action()?;
            let op = for_action(env.operand(a)?, &r)?;
            let class = |p: &StarPolynomial| -> ncsphere::Result<Value> {
                if p.is_zero() {
                    return Ok(Value::Null);
                }
                Ok(r.homogeneity_class(p)?.map_or(Value::Null, |c| json!(c)))
            };
            match &op {
                Operand::Poly(p) => {
                    if p.is_zero() {
                        return Err(Error::ZeroPolynomial.into());
                    }
                    let c = class(p)?;
                    let mut parts = Map::new();
                    for j in 0..r.k() {
                        let q = r.graded_project(p, j)?;
                        if !q.is_zero() {
                            parts.insert(j.to_string(), json!(print(&q)));
                        }
                    }
                    let text = match &c {
                        Value::Null => "inhomogeneous".to_string(),
                        v => format!("class {v} mod {}", r.k()),
                    };
                    Ok(Output::ok(json!({ "k": r.k(), "class": c, "components": parts })).text(text))
                }
                Operand::Matrix(m) => {
                    let rows = (0..m.rows())
                        .map(|i| (0..m.cols()).map(|j| class(m.get(i, j))).collect::<ncsphere::Result<Vec<_>>>())
                        .collect::<ncsphere::Result<Vec<_>>>()?;
                    let text = rows
                        .iter()
                        .map(|row| row.iter().map(|c| if c.is_null() { "-".into() } else { c.to_string() }).collect::<Vec<_>>().join(" "))
                        .collect::<Vec<_>>()
                        .join("\n");
                    Ok(Output::ok(json!({ "k": r.k(), "classes": rows })).text(text))
                }
            }
        }
        Command::FactorRotation { a } => {
            let r = env.action()?;
            let m = match a {
                Some(a) => env.operand(a)?,
                None => {
                    let ctx = env.ctx()?;
                    Operand::Matrix(zgen(&ctx, env.level(&ctx))?)
                }
            };
            let m = for_action(m, &r)?.as_matrix()?;
            let f = factor_rotation(&m, &r)?;
            let mut v = f.to_json_value();
            v["A^k = I"] = json!(f.a.has_order_dividing(r.k()));
            v["B^k = I"] = json!(f.b.has_order_dividing(r.k()));
            let text = format!("a = {:?}\nb = {:?}", f.a_exponents, f.b_exponents);
            Ok(Output::ok(v).text(text))
        }
        Command::ValidateHom { numeric, samples, codomain_action } => {
            let mut h = env.hom()?;
            let mode = if *numeric {
                ValidationMode::Numeric {
                    samples: samples.unwrap_or(env.tol.numeric_samples),
                    seed: env.seed(),
                    tolerance: env.tol.eps_rel,
                }
            } else {
                ValidationMode::Symbolic
            };
            let report = h.validate(mode)?;
            let mut v = report.to_json_value();
            let mut pass = report.valid;
            if report.valid && (env.g.action.is_some() || env.cfg.contains_key("action")) {
                let r = env.action()?;
                let rc = match env.json_input(codomain_action, "codomain_action")? {
                    Some(v) => RotationAction::from_json_value(&v)?,
                    None => r.clone(),
                };
                let failures = h.equivariance_failures(&r, &rc)?;
                pass &= failures.is_empty();
                v["equivariant"] = json!(failures.is_empty());
                v["equivariance_failures"] = json!(failures);
            }
            let text = format!("valid: {}\n{}", report.valid, serde_json::to_string_pretty(&v).expect("json"));
            Ok(Output::ok(v).text(text).pass(pass))
        }
        Command::ApplyHom { a } => {
            let mut h = env.hom()?;
            let report = h.validate(ValidationMode::Symbolic)?;
            if !report.valid {
                return Err(Failure::Math(report.to_json_value()));
            }
            let op = match env.operand(a) {
                Ok(op) => op,
                Err(_) if !a.trim_start().starts_with('{') => Operand::Poly(parse(a, h.domain())?),
                Err(e) => return Err(e),
            };
            let op = op.moved_to(h.domain())?;
            Ok(match op {
                Operand::Poly(p) => Operand::Poly(h.apply(&p)?),
                Operand::Matrix(m) => Operand::Matrix(h.apply_matrix(&m)?),
            }
            .output())
        }
        Command::RepBuild => {
            let ctx = env.ctx()?;
            let rep = RationalRep::build(ctx.rho())?;
            let (rel, uni) = (rep.relation_residual(), rep.unitarity_residual());
            let mut v = rep.to_json_value();
            v["relation_residual"] = json!(rel);
            v["unitarity_residual"] = json!(uni);
            let pass = rel < env.tol.eps_rep && uni < env.tol.eps_rep;
            let text = format!("dimension {}\nrelation residual {rel:e}\nunitarity residual {uni:e}", rep.q());
            Ok(Output::ok(v).text(text).pass(pass))
        }
        Command::Eval { a, point } => {
            let m = env.operand(a)?.as_matrix()?;
            let ctx = m.ctx().clone();
            let rep = env.rep(&ctx)?;
            let n = ctx.n();
            let pt = match point {
                Some(p) => SpherePoint::from_json_value(&read_json(p)?)?,
                None => {
                    let (t, s) = if ctx.has_x() {
                        (vec![(1.0 / (n as f64 + 1.0)).sqrt(); n], Some((1.0 / (n as f64 + 1.0)).sqrt()))
                    } else {
                        (vec![1.0 / (n as f64).sqrt(); n], None)
                    };
                    SpherePoint::from_angles(t, &vec![0.0; n], s)?
                }
            };
            let val = eval_matrix(&m, &pt, &rep)?;
            Ok(Output::ok(json!({ "point": pt.to_json_value(), "value": cmatrix_to_json(&val) })).text(format!("{val:.6}")))
        }
        Command::GridNorm { a, min_singular } => {
            let m = env.operand(a)?.as_matrix()?;
            let rep = env.rep(m.ctx())?;
            let grid = env.grid()?;
            let ext = if *min_singular { grid_min_singular(&m, &rep, &grid)? } else { grid_norm(&m, &rep, &grid)? };
            let label = if *min_singular { "min singular value" } else { "max norm" };
            let text = format!("{label} {:.12} over {} points", ext.value, ext.points);
            Ok(Output::ok(ext.to_json_value()).text(text))
        }
        Command::Counterexample { pair } => {
            let ctx = env.ctx()?;
            let (j, k) = pair
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                .filter(|&(a, b)| a >= 1 && b >= 1)
                .ok_or_else(|| usage(format!("--pair expects one-based `j,k`, got `{pair}`")))?;
            let ce = counterexample_sum(ctx.rho(), j - 1, k - 1)?;
            let rep = env.rep(&ctx)?;
            let dev = ce.grid_deviation(&rep, &env.grid()?)?;
            let below_one = ce.bound < 1.0;
            let within = dev.value <= ce.bound + env.tol.eps_rel;
            let mut v = ce.to_json_value();
            v["grid"] = dev.to_json_value();
            v["bound_below_one"] = json!(below_one);
            v["grid_within_bound"] = json!(within);
            let text = format!(
                "sum - 1 = {}\nbound |1+rho|/2 = {:.12}\ngrid max |sum - 1| = {:.12}",
                ce.cross, ce.bound, dev.value
            );
            Ok(Output::ok(v).text(text).pass(below_one && within))
        }
        Command::Winding { lp, order, unitary } => {
            eprintln!("note: {SCOPE_NOTE}");
            let lp = MatrixLoop::from_json_value(&read_json(lp)?)?;
            match order {
                None => {
                    let rep = winding_report(&lp, &env.tol)?;
                    let text = format!("winding {}\n{SCOPE_NOTE}", rep.winding);
                    Ok(Output::ok(rep.to_json_value()).text(text))
                }
                Some(k) => {
                    let u = match unitary {
                        Some(u) => cmatrix_from_json(&read_json(u)?)?,
                        None => ncsphere::rep::CMatrix::identity(lp.dim(), lp.dim()),
                    };
                    let rep = invariant_winding_check(&lp, *k, &u, &env.tol)?;
                    let text = format!("winding {} divisible by {k}: {}\n{SCOPE_NOTE}", rep.winding, rep.divisible);
                    Ok(Output::ok(rep.to_json_value()).text(text).pass(rep.divisible))
                }
            }
        }
        Command::CircleLoop { a, coord, resolution, winding } => {
            let m = match a {
                Some(a) => env.operand(a)?.as_matrix()?,
                None => {
                    let ctx = env.ctx()?;
                    zgen(&ctx, env.level(&ctx))?
                }
            };
            if *coord == 0 {
                return Err(usage("--coord is one-based"));
            }
            if *winding {
                eprintln!("note: {SCOPE_NOTE}");
                let rep = circle_winding(&m, coord - 1, *resolution, &env.tol)?;
                let text = format!("winding {}\n{SCOPE_NOTE}", rep.winding);
                Ok(Output::ok(rep.to_json_value()).text(text))
            } else {
                let lp = circle_loop(&m, coord - 1, *resolution)?;
                let text = format!("{} samples of {}x{} matrices", lp.resolution(), lp.dim(), lp.dim());
                Ok(Output::ok(lp.to_json_value()).text(text))
            }
        }
        Command::Suite { name, trials, nmax, timings } => {
            let mut cfg = SuiteConfig {
                seed: env.seed(),
                tolerances: env.tol.clone(),
                timings: *timings,
                ..SuiteConfig::default()
            };
            if let Some(t) = trials.or_else(|| env.cfg_u64("trials").map(|t| t as usize)) {
                cfg.trials = t;
            }
            if let Some(n) = nmax.or_else(|| env.cfg_u64("nmax").map(|n| n as usize)) {
                cfg.nmax = n;
            }
            if env.g.grid.is_some() || env.cfg.contains_key("grid") {
                cfg.grid = env.grid()?;
            }
            if env.g.rho.is_some() || env.cfg.contains_key("rho") {
                cfg.rhos = vec![env.ctx()?.rho().clone()];
            }
            let names: Vec<&str> = if name == "all" { SUITE_NAMES.to_vec() } else { vec![name.as_str()] };
            let mut reports = Vec::new();
            for n in names {
                reports.push(suites::run(n, &cfg)?);
            }
            let pass = reports.iter().all(|r| r.pass);
            let text = reports
                .iter()
                .map(|r| format!("{}: {} (seed {}, {} witnesses)", r.suite, if r.pass { "PASS" } else { "FAIL" }, r.seed, r.witnesses.len()))
                .collect::<Vec<_>>()
                .join("\n");
            let json = if reports.len() == 1 {
                reports[0].to_json_value()
            } else {
                Value::Array(reports.iter().map(|r| r.to_json_value()).collect())
            };
            Ok(Output::ok(json).text(text).pass(pass))
        }
    }
}

fn emit(g: &Global, body: &str) -> std::result::Result<(), String> {
    match &g.out {
        Some(path) => fs::write(path, format!("{body}\n")).map_err(|e| format!("{}: {e}", path.display())),
        None => print_stdout(body),
    }
}

/// Prints to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(body: &str) -> std::result::Result<(), String> {
    match writeln!(std::io::stdout().lock(), "{body}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.global.pretty;
    let result = Env::new(cli.global).and_then(|env| run(&cli.command, &env).map(|o| (o, env)));
    match result {
        Ok((out, env)) => {
            let body = match (&out.text, pretty) {
                (Some(t), true) => t.clone(),
                _ => serde_json::to_string(&out.json).expect("json"),
            };
            if let Err(e) = emit(&env.g, &body) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let (code, v) = match f {
                Failure::Usage(msg) => (2, json!({ "error": { "kind": "Usage", "message": msg } })),
                Failure::Math(w) => (1, json!({ "error": { "kind": "Failure", "witness": w } })),
                Failure::Core(e) => {
                    let code = if is_usage(&e) { 2 } else { 1 };
                    (code, json!({ "error": { "kind": error_kind(&e), "message": e.to_string() } }))
                }
            };
            eprintln!("error: {}", v["error"]["message"].as_str().unwrap_or("mathematical failure"));
            let _ = print_stdout(&v.to_string());
            ExitCode::from(code)
        }
    }
}
