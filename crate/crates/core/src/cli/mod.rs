//! The `firstint` command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 the input could not be parsed
//! or validated (including usage errors).

mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

pub use report::Report;

use crate::catalog;
use crate::domain::Domain;
use crate::expr::{Expr, ZeroTestConfig};
use crate::first_integral::{chain_hk, integrability_report, theorem1, FirstIntegralError, FirstIntegralResult};
use crate::low_dim::{lie_one_form, planar_f_from_y, planar_lambda, planar_y_from_f, quadrature, LowDimError};
use crate::normalizer::{check_relation, solve_lambda_mu, NormalizerError};
use crate::numeric::rk4::{conservation_check, integrate_trajectory};
use crate::numeric::sampling::{Sampler, STREAM_STARTS};
use crate::parser::{parse_expr, parse_problem, write_problem, Problem};

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Parser, Debug)]
#[command(
    name = "firstint",
    version,
    about = "First integrals from integrating factors and normalizers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Overrides the seed given in the problem file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample points per numerical zero test.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Residual threshold of the numerical zero test.
    #[arg(long, default_value_t = 1e-7)]
    pub threshold: f64,
    /// Emit the report as one JSON object.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct Overrides {
    /// Use this λ instead of the file's or the solver's.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Use this μ instead of the file's or the solver's.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build H from X, Y, f and check every hypothesis.
    FirstIntegral {
        file: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate X from random starts and measure the drift of H.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 1.0)]
        tend: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        trajectories: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Planar constructions from a normalizer pair or an integrating factor.
    Planar {
        #[command(subcommand)]
        which: PlanarCommand,
    },
    /// Complete-integrability report for the fields Y1, Y2, ...
    Integrability {
        file: PathBuf,
        /// Sample points for the Jacobian rank.
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate H_k = L_Y H_{k-1} and check each as a first integral.
    Chain {
        file: PathBuf,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        common: Common,
    },
    /// Print a catalog problem in the problem-file format.
    Catalog {
        #[command(subcommand)]
        which: CatalogCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum PlanarCommand {
    /// f = 1/(ρ(X₁Y₂ − X₂Y₁)) and the first integral it yields.
    DeriveF {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The normalizer built from f and the first integral it yields.
    DeriveY {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// The closed 1-form of the pair and, with --target, its potential.
    LieForm {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        target: Option<Vec<f64>>,
        /// Basepoint of the potential; defaults to the domain centre.
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true)]
        base: Option<Vec<f64>>,
        #[arg(long, default_value_t = crate::low_dim::DEFAULT_PANELS)]
        panels: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    /// The planar example with H = 2(1+x⁴+y⁴)eˣ.
    Example5,
    /// Particle in ℝⁿ under the potential |x|^(2α).
    Hamiltonian {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Rational exponent such as 1, 2, -1/2.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        alpha: String,
    },
    /// A random instance with a known integrating factor.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
}

/// Output of one invocation.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

/// Parses arguments and runs; never exits the process.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    exit_code: 0,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    exit_code: 2,
                }
            };
        }
    };
    execute(cli.command)
}

fn execute(cmd: Command) -> Outcome {
    let (report, json) = match cmd {
        Command::FirstIntegral {
            file,
            overrides,
            common,
        } => (
            with_problem("first-integral", &file, &common, |p, r, cfg| {
                cmd_first_integral(p, &overrides, r, cfg)
            }),
            common.json,
        ),
        Command::Verify {
            file,
            overrides,
            tend,
            step,
            tol,
            trajectories,
            common,
        } => (
            with_problem("verify", &file, &common, |p, r, cfg| {
                cmd_verify(
                    p,
                    &overrides,
                    VerifyOpts {
                        tend,
                        step,
                        tol,
                        trajectories,
                    },
                    r,
                    cfg,
                )
            }),
            common.json,
        ),
        Command::Planar { which } => match which {
            PlanarCommand::DeriveF { file, common } => (
                with_problem("planar derive-f", &file, &common, cmd_derive_f),
                common.json,
            ),
            PlanarCommand::DeriveY { file, common } => (
                with_problem("planar derive-y", &file, &common, cmd_derive_y),
                common.json,
            ),
            PlanarCommand::LieForm {
                file,
                target,
                base,
                panels,
                common,
            } => (
                with_problem("planar lie-form", &file, &common, |p, r, cfg| {
                    cmd_lie_form(p, target.as_deref(), base.as_deref(), panels, r, cfg)
                }),
                common.json,
            ),
        },
        Command::Integrability { file, points, common } => (
            with_problem("integrability", &file, &common, |p, r, cfg| {
                cmd_integrability(p, points, r, cfg)
            }),
            common.json,
        ),
        Command::Chain {
            file,
            k,
            overrides,
            common,
        } => (
            with_problem("chain", &file, &common, |p, r, cfg| cmd_chain(p, k, &overrides, r, cfg)),
            common.json,
        ),
        Command::Catalog { which } => return cmd_catalog(which),
    };
    Outcome {
        stdout: if json { report.to_json() } else { report.to_text() },
        stderr: String::new(),
        exit_code: report.exit_code,
    }
}

type Step = Result<(), CmdError>;

/// A failure that ends a command: exit 1 for a failed check, 2 for bad input.
struct CmdError {
    code: i32,
    message: String,
}

impl CmdError {
    fn input(message: impl Into<String>) -> Self {
        CmdError {
            code: 2,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        CmdError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<FirstIntegralError> for CmdError {
    fn from(e: FirstIntegralError) -> Self {
        match e {
            FirstIntegralError::ZeroFactor | FirstIntegralError::Field(_) => CmdError::input(e.to_string()),
            _ => CmdError::check(e.to_string()),
        }
    }
}

impl From<NormalizerError> for CmdError {
    fn from(e: NormalizerError) -> Self {
        match e {
            NormalizerError::TooFewDimensions | NormalizerError::Field(_) => CmdError::input(e.to_string()),
            _ => CmdError::check(e.to_string()),
        }
    }
}

impl From<LowDimError> for CmdError {
    fn from(e: LowDimError) -> Self {
        match e {
            LowDimError::WrongDimension { .. }
            | LowDimError::ZeroFactor
            | LowDimError::PointDimension { .. }
            | LowDimError::Field(_) => CmdError::input(e.to_string()),
            _ => CmdError::check(e.to_string()),
        }
    }
}

impl From<crate::expr::ZeroTestError> for CmdError {
    fn from(e: crate::expr::ZeroTestError) -> Self {
        CmdError::check(e.to_string())
    }
}

fn with_problem(
    command: &str,
    path: &Path,
    common: &Common,
    body: impl FnOnce(&Problem, &mut Report, &ZeroTestConfig) -> Step,
) -> Report {
    let shown = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            let mut r = Report::new(command, None, common.seed.unwrap_or(0));
            r.text("input", &shown);
            r.fail(2, &format!("cannot read problem file: {e}"));
            return r;
        }
    };
    let parsed = std::str::from_utf8(&bytes)
        .map_err(|e| format!("problem file is not UTF-8: {e}"))
        .and_then(|t| parse_problem(t).map_err(|e| e.to_string()));
    let seed = match (&parsed, common.seed) {
        (_, Some(s)) => s,
        (Ok(p), None) => p.seed,
        (Err(_), None) => 0,
    };
    let mut r = Report::new(command, Some((&shown, &bytes)), seed);
    let problem = match parsed {
        Ok(p) => p,
        Err(e) => {
            r.fail(2, &e);
            return r;
        }
    };
    let cfg = ZeroTestConfig {
        samples: common.samples,
        threshold: common.threshold,
        seed,
        ..ZeroTestConfig::default()
    };
    if let Err(e) = body(&problem, &mut r, &cfg) {
        r.fail(e.code, &e.message);
    }
    r
}

fn show(p: &Problem, e: &Expr) -> String {
    e.display(&p.vars).to_string()
}

fn require<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, CmdError> {
    v.as_ref()
        .ok_or_else(|| CmdError::input(format!("problem file has no '{name}'")))
}

fn parse_override(p: &Problem, text: &Option<String>, name: &str) -> Result<Option<Expr>, CmdError> {
    text.as_ref()
        .map(|t| parse_expr(t, &p.vars).map_err(|e| CmdError::input(format!("--{name}: {e}"))))
        .transpose()
}

struct Relation {
    lambda: Expr,
    mu: Expr,
}

/// λ and μ from the flags, else from the file, else from the solver.
fn resolve_relation(p: &Problem, o: &Overrides, r: &mut Report, cfg: &ZeroTestConfig) -> Result<Relation, CmdError> {
    let y = require(&p.y, "Y")?;
    let lambda = parse_override(p, &o.lambda, "lambda")?;
    let mu = parse_override(p, &o.mu, "mu")?;
    let (lambda, l_src) = match (lambda, &p.lambda) {
        (Some(l), _) => (Some(l), "flag"),
        (None, Some(l)) => (Some(l.clone()), "file"),
        (None, None) => (None, "solved"),
    };
    let (mu, m_src) = match (mu, &p.mu) {
        (Some(m), _) => (Some(m), "flag"),
        (None, Some(m)) => (Some(m.clone()), "file"),
        (None, None) => (None, "solved"),
    };
    let (lambda, mu) = match (lambda, mu) {
        (Some(l), Some(m)) => (l, m),
        (l, m) => {
            let s = solve_lambda_mu(&p.x, y, &p.domain, cfg)?;
            r.put("normalizer_kind", json!(s.kind));
            (l.unwrap_or(s.lambda), m.unwrap_or(s.mu))
        }
    };
    r.text("lambda", &show(p, &lambda));
    r.text("lambda_source", l_src);
    r.text("mu", &show(p, &mu));
    r.text("mu_source", m_src);
    Ok(Relation { lambda, mu })
}

fn first_integral_steps(
    p: &Problem,
    o: &Overrides,
    r: &mut Report,
    cfg: &ZeroTestConfig,
) -> Result<(FirstIntegralResult, Relation), CmdError> {
    let y = require(&p.y, "Y")?;
    let f = require(&p.f, "f")?;
    let rel = resolve_relation(p, o, r, cfg)?;
    let res = theorem1(&p.x, y, f, &rel.lambda, &rel.mu, &p.volume, &p.domain, cfg)?;
    r.text("H", &show(p, &res.h));
    r.text("g", &show(p, &res.g));
    r.verdict("hypothesis.integrating_factor", &res.hypotheses.integrating_factor);
    r.verdict("hypothesis.mu_factor", &res.hypotheses.mu_factor);
    r.verdict("hypothesis.relation", &res.hypotheses.relation);
    r.verdict("conclusion", &res.conclusion);
    r.verdict("trivial", &res.trivial);
    r.put("is_trivial", json!(res.trivial.is_proven_zero()));
    r.text("domain", &res.domain_note);
    if res.hypotheses.any_violated() {
        r.text("warning", "a hypothesis failed; H is reported but not certified");
    }
    Ok((res, rel))
}

fn cmd_first_integral(p: &Problem, o: &Overrides, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    let (res, _) = first_integral_steps(p, o, r, cfg)?;
    if res.conclusion.is_proven_nonzero() {
        return Err(CmdError::check("L_X H is not zero"));
    }
    Ok(())
}

struct VerifyOpts {
    tend: f64,
    step: f64,
    tol: f64,
    trajectories: usize,
}

fn cmd_verify(p: &Problem, o: &Overrides, v: VerifyOpts, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    let (res, _) = first_integral_steps(p, o, r, cfg)?;
    let f = require(&p.f, "f")?;
    let domain: Domain = p.domain.clone().excluding(f.clone());
    let mut sampler = Sampler::new(&domain, cfg.seed, STREAM_STARTS);
    let mut runs = Vec::new();
    let mut max_drift = 0.0f64;
    let mut all_pass = true;
    let mut attempts = 0;
    while runs.len() < v.trajectories && attempts < 4 * v.trajectories.max(1) {
        attempts += 1;
        let Some(start) = sampler.draw_valid(1, 1).pop() else {
            continue;
        };
        if res.h.evaluate(&start).is_err() {
            continue;
        }
        let Ok(traj) = integrate_trajectory(&p.x, &start, v.tend, v.step) else {
            continue;
        };
        let c = conservation_check(&res.h, &traj, v.tol);
        max_drift = max_drift.max(c.max_drift);
        all_pass &= c.pass;
        runs.push(json!({
            "start": start,
            "end_time": traj.times.last().copied().unwrap_or(0.0),
            "aborted": traj.aborted,
            "max_drift": c.max_drift,
            "pass": c.pass,
        }));
    }
    r.put("trajectories", json!(runs));
    r.put("max_drift", json!(max_drift));
    r.put("tolerance", json!(v.tol));
    let pass = all_pass && runs.len() == v.trajectories;
    r.put("conserved", json!(pass));
    if !pass {
        return Err(CmdError::check(format!(
            "drift {max_drift:.3e} exceeds tolerance {:.1e} or too few trajectories",
            v.tol
        )));
    }
    Ok(())
}

fn planar_only(p: &Problem) -> Step {
    if p.dim() != 2 {
        return Err(CmdError::input(format!(
            "planar commands need 2 variables, the problem has {}",
            p.dim()
        )));
    }
    Ok(())
}

fn cmd_derive_f(p: &Problem, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    planar_only(p)?;
    let y = require(&p.y, "Y")?;
    let f0 = planar_f_from_y(&p.x, y, &p.volume)?;
    r.text("f", &show(p, &f0));
    let sol = solve_lambda_mu(&p.x, y, &p.domain, cfg)?;
    r.put("normalizer_kind", json!(sol.kind));
    r.text("lambda", &show(p, &sol.lambda));
    r.text("mu", &show(p, &sol.mu));
    let predicted = planar_lambda(y, &f0, &p.volume)?;
    let agree = crate::expr::is_zero(&(&predicted - &sol.lambda), &p.domain, cfg)?;
    r.verdict("lambda_matches_prediction", &agree);
    let res = theorem1(&p.x, y, &f0, &sol.lambda, &sol.mu, &p.volume, &p.domain, cfg)?;
    r.verdict("hypothesis.integrating_factor", &res.hypotheses.integrating_factor);
    r.text("H", &show(p, &res.h));
    r.verdict("trivial", &res.trivial);
    r.put("is_trivial", json!(res.trivial.is_proven_zero()));
    if res.trivial.is_proven_nonzero() {
        return Err(CmdError::check("H is not constant"));
    }
    Ok(())
}

fn cmd_derive_y(p: &Problem, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    planar_only(p)?;
    let f = require(&p.f, "f")?;
    let y = planar_y_from_f(&p.x, f, &p.volume)?;
    r.text("Y", &y.to_problem_syntax());
    let lambda = planar_lambda(&y, f, &p.volume)?;
    r.text("lambda", &show(p, &lambda));
    let domain = p.domain.clone().excluding(f.clone());
    let rel = check_relation(&p.x, &y, &lambda, &Expr::zero(), &domain, cfg)?;
    r.verdict("relation", &rel);
    let res = theorem1(&p.x, &y, f, &lambda, &Expr::zero(), &p.volume, &p.domain, cfg)?;
    r.text("H", &show(p, &res.h));
    r.verdict("trivial", &res.trivial);
    r.put("is_trivial", json!(res.trivial.is_proven_zero()));
    if rel.is_proven_nonzero() {
        return Err(CmdError::check("the constructed field is not a normalizer"));
    }
    if res.trivial.is_proven_nonzero() {
        return Err(CmdError::check("H is not constant"));
    }
    Ok(())
}

fn cmd_lie_form(
    p: &Problem,
    target: Option<&[f64]>,
    base: Option<&[f64]>,
    panels: usize,
    r: &mut Report,
    cfg: &ZeroTestConfig,
) -> Step {
    planar_only(p)?;
    let y = require(&p.y, "Y")?;
    let lf = lie_one_form(&p.x, y, &p.domain, cfg)?;
    r.text("omega", &lf.form.to_problem_syntax());
    r.verdict("closedness", &lf.closedness);
    if let Some(t) = target {
        let b = base.map(<[f64]>::to_vec).unwrap_or_else(|| p.domain.center());
        r.put("basepoint", json!(b));
        r.put("target", json!(t));
        let q = quadrature(&lf.form, &b, t, panels)?;
        r.put("panels", json!(panels));
        r.text("path", q.path.label());
        r.put("I", json!(q.value));
    }
    Ok(())
}

fn cmd_integrability(p: &Problem, points: usize, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    if p.ylist.is_empty() {
        return Err(CmdError::input("problem file has no 'Y1'"));
    }
    let rep = integrability_report(&p.x, &p.ylist, &p.volume, &p.domain, points, cfg)?;
    r.verdict("divergence_x", &rep.divergence_x);
    for (i, (c, h)) in rep.constants.iter().zip(&rep.integrals).enumerate() {
        r.text(&format!("c{}", i + 1), &show(p, c));
        r.verdict(&format!("relation{}", i + 1), &rep.relations[i]);
        r.text(&format!("H{}", i + 1), &show(p, h));
    }
    r.put("sample_points", json!(rep.rank.sampled_points.len()));
    r.put("jacobian_ranks", json!(rep.rank.jacobian_ranks));
    r.put("consensus_rank", json!(rep.rank.consensus_rank));
    r.put("rank_tolerance", json!(rep.rank.tolerance));
    r.put("completely_integrable", json!(rep.completely_integrable));
    r.text("conclusion", &rep.conclusion);
    Ok(())
}

fn cmd_chain(p: &Problem, k: usize, o: &Overrides, r: &mut Report, cfg: &ZeroTestConfig) -> Step {
    let (res, rel) = first_integral_steps(p, o, r, cfg)?;
    let y = require(&p.y, "Y")?;
    let f = require(&p.f, "f")?;
    let domain = p.domain.clone().excluding(f.clone());
    let steps = chain_hk(&p.x, y, &res.h, &rel.mu, k, &domain, cfg)?;
    let mut failed = false;
    for (j, s) in steps.iter().enumerate() {
        r.text(&format!("H{}", j + 1), &show(p, &s.h));
        r.verdict(&format!("H{}.conclusion", j + 1), &s.verdict);
        failed |= s.verdict.is_proven_nonzero();
    }
    if failed {
        return Err(CmdError::check("some H_k is not a first integral"));
    }
    Ok(())
}

fn cmd_catalog(which: CatalogCommand) -> Outcome {
    let text = match which {
        CatalogCommand::Example5 => Ok(catalog::EXAMPLE5_TEXT.to_string()),
        CatalogCommand::Hamiltonian { n, alpha } => parse_rational(&alpha)
            .and_then(|a| catalog::hamiltonian_homogeneous(n, a).map_err(|e| e.to_string()))
            .map(|h| write_problem(&h.to_problem())),
        CatalogCommand::Random { seed, dim, degree } => catalog::random_instance(seed, dim, degree)
            .map(|i| write_problem(&i.problem))
            .map_err(|e| e.to_string()),
    };
    match text {
        Ok(stdout) => Outcome {
            stdout,
            stderr: String::new(),
            exit_code: 0,
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            exit_code: 2,
        },
    }
}

fn parse_rational(s: &str) -> Result<crate::expr::Rational, String> {
    let e = parse_expr(s, &[]).map_err(|e| format!("--alpha: {e}"))?;
    e.as_constant()
        .cloned()
        .ok_or_else(|| format!("--alpha must be a rational number, got '{s}'"))
}
