use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use picardlab_core::engine::{self, Outcome, PicardVerdict, PipelineConfig};
use picardlab_core::gap::{self, GapOutcome, SeqWithMetric};
use picardlab_core::implicit::{self, sp, Property};
use picardlab_core::oracle::{self, InstanceBundle};
use picardlab_core::space::{self, Point};
use picardlab_core::{scalar, Certificate, CheckConfig, CheckResult, PropertyReport, SpaceModel, TheoremTag};
use serde::Serialize;

use crate::format::{self, CertFile, InputError, Instance, SeqFile, SpaceFile};
use crate::fuzz::{self, FuzzConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "picardlab", version, about = "Fixed-point certificates and Picard pipelines on quasi-ordered metric spaces")]
struct Cli {
    /// Also write the machine-readable report to this path
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Seed for every sampler
    #[arg(long, global = true, env = "PICARDLAB_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the metric and order axioms of a space file
    Validate { space: PathBuf },
    /// Run the property checks that apply to a certificate
    CheckCert {
        cert: PathBuf,
        /// Equispaced grid size
        #[arg(long)]
        grid: Option<usize>,
        /// Sequences per sampled check
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run a theorem pipeline on an instance
    Run {
        instance: PathBuf,
        #[arg(long, value_parser = parse_theorem)]
        theorem: Option<TheoremTag>,
    },
    /// Exhaustive oracle on a finite instance, compared with the pipeline
    Oracle { instance: PathBuf },
    /// Random finite instances, pipeline against oracle
    Fuzz {
        /// Points per instance (at most 20)
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Edge probability of the random order
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        /// Linear factor of the certificate
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Gap construction for a semi-Cauchy, non-Cauchy sequence
    ExtractGap {
        seq: PathBuf,
        /// Thresholds, comma separated (sorted descending before use)
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        /// Analysis length (defaults to the sequence length)
        #[arg(long)]
        n: Option<usize>,
        /// Tolerance of the limit claims on the last decile
        #[arg(long, default_value_t = 1e-3)]
        tail_tol: f64,
    },
}

fn parse_theorem(s: &str) -> Result<TheoremTag, String> {
    TheoremTag::parse(s).ok_or_else(|| format!("unknown theorem {s:?}, expected t1..t5"))
}

/// Entry point; returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if code == 0 { EXIT_PASS } else { EXIT_INPUT };
        }
    };
    match dispatch(&cli, out) {
        Ok((code, report)) => {
            if let Some(path) = &cli.json {
                let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
                if let Err(e) = std::fs::write(path, text) {
                    let _ = writeln!(err, "error: {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

type Dispatched = Result<(i32, serde_json::Value), InputError>;

fn json(v: impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn code(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Dispatched {
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { space } => validate(space, out),
        Command::CheckCert { cert, grid, trials } => check_cert(cert, checks(seed, *grid, *trials), out),
        Command::Run { instance, theorem } => run(instance, *theorem, seed, out),
        Command::Oracle { instance } => run_oracle(instance, seed, out),
        Command::Fuzz { n, count, density, factor, trials } => {
            if *n == 0 || *n > 20 {
                return Err(InputError::Arg(format!("--n {n} outside 1..=20")));
            }
            if !(*factor > 0.0 && *factor < 1.0) {
                return Err(InputError::Arg(format!("--factor {factor} outside (0, 1)")));
            }
            if !(0.0..=1.0).contains(density) {
                return Err(InputError::Arg(format!("--density {density} outside [0, 1]")));
            }
            let cfg = FuzzConfig {
                n: *n,
                count: *count,
                seed,
                density: *density,
                factor: *factor,
                checks: checks(seed, None, *trials),
            };
            run_fuzz(&cfg, out)
        }
        Command::ExtractGap { seq, theta, n, tail_tol } => extract_gap(seq, theta, *n, *tail_tol, out),
    }
}

fn checks(seed: u64, grid: Option<usize>, trials: Option<usize>) -> CheckConfig {
    let mut c = CheckConfig { seed, ..CheckConfig::default() };
    c.grid.seed = seed;
    c.families.seed = seed;
    if let Some(g) = grid {
        c.grid.equispaced = g.max(2);
    }
    if let Some(t) = trials {
        c.trials = t;
    }
    c
}

fn line(out: &mut dyn Write, s: impl AsRef<str>) {
    let _ = writeln!(out, "{}", s.as_ref());
}

fn show_check(out: &mut dyn Write, r: &CheckResult) {
    let verdict = r.verdict.as_str();
    let mut s = format!("  {:<30} {verdict}", r.check);
    if let Some(w) = &r.witness {
        s += &format!("  witness {:?}: {}", w.at, w.note);
    }
    line(out, s);
}

fn validate(path: &Path, out: &mut dyn Write) -> Dispatched {
    let file: SpaceFile = format::read_json(path)?;
    let space = file.space.build(path)?;
    let report = space::validate_space(&space);
    if report.is_valid() {
        line(out, format!("{}: valid", path.display()));
    } else {
        line(out, format!("{}: {} violation(s)", path.display(), report.violations.len()));
        for v in &report.violations {
            line(out, format!("  {:?} at {:?}: {}", v.axiom, v.witness, v.detail));
        }
    }
    Ok((code(report.is_valid()), json(&report)))
}

fn check_cert(path: &Path, cfg: CheckConfig, out: &mut dyn Write) -> Dispatched {
    let file: CertFile = format::read_json(path)?;
    let cert = file.cert.build(path)?;
    let report = certificate_report(&cert, &cfg);
    line(out, format!("{} ({})", cert.name(), cert.kind_name()));
    for c in &report.checks {
        show_check(out, c);
    }
    for f in &report.findings {
        line(out, format!("  finding ({:?}): {}", f.severity, f.message));
    }
    Ok((code(report.all_passed()), json(&report)))
}

/// Every property check that applies to the certificate kind.
pub fn certificate_report(cert: &Certificate, cfg: &CheckConfig) -> PropertyReport {
    match cert {
        Certificate::Phi(phi) => PropertyReport {
            checks: vec![
                scalar::check_increasing(phi, &cfg.grid),
                scalar::check_regressive(phi, &cfg.grid),
                scalar::check_matkowski(phi, &cfg.grid.positive_samples(), cfg.max_steps as u64, PipelineConfig::default().matkowski_eps),
            ],
            findings: Vec::new(),
        },
        Certificate::PsiExplicit(psi) => {
            let mut r = scalar::lemma_41_suite(psi, cfg);
            r.checks.insert(0, scalar::check_regressive(psi, &cfg.grid));
            r
        }
        Certificate::Implicit(f) => {
            let mut f = f.clone();
            match f.psi().cloned() {
                Some(psi) => {
                    let mut r = scalar::lemma_41_suite(&psi, cfg);
                    let p = implicit::from_psi_suite(&mut f, cfg);
                    r.checks.extend(p.checks);
                    r.findings.extend(p.findings);
                    r
                }
                None => {
                    let props: Vec<Property> =
                        Property::ALL.iter().copied().filter(|&p| p != Property::PsiCompatible).collect();
                    f.certify_all(&props, cfg)
                }
            }
        }
        Certificate::GeneralizedSp(c) => sp::check_sp_conditions(c, &cfg.grid),
    }
}

fn pipeline_config(inst: &Instance, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig { seed: inst.pipeline.seed.unwrap_or(seed), ..PipelineConfig::default() };
    cfg.checks = checks(cfg.seed, None, None);
    if let Some(m) = inst.pipeline.max_iter {
        cfg.max_iter = m;
    }
    if let Some(t) = inst.pipeline.tol {
        cfg.tol = t;
    }
    cfg
}

fn show_point(p: &Point) -> String {
    match p {
        Point::Index(i) => format!("#{i}"),
        Point::Real(x) => format!("{x}"),
    }
}

fn show_verdict(out: &mut dyn Write, v: &PicardVerdict) {
    line(out, format!("pipeline {:?}", v.theorem).to_lowercase());
    for s in &v.stages {
        show_check(out, s);
    }
    let outcome = match &v.outcome {
        Outcome::Rejected { stage } => format!("rejected at {stage}"),
        Outcome::NonConvergent => "no fixed point reached".to_string(),
        Outcome::Picard => "picard".to_string(),
        Outcome::GlobalPicard => "global picard".to_string(),
    };
    line(out, format!("outcome: {outcome}"));
    if let Some(t) = &v.trace {
        line(out, format!("iterations: {}", t.iterations));
    }
    if let Some(z) = &v.fixed_point {
        line(out, format!("fixed point: {}", show_point(z)));
    }
    if let Some(u) = v.order_unique {
        line(out, format!("order-unique: {u}"));
    }
}

fn run(path: &Path, theorem: Option<TheoremTag>, seed: u64, out: &mut dyn Write) -> Dispatched {
    let inst = Instance::load(path)?;
    let tag = inst.theorem(path, theorem)?;
    let x0 = inst.x0(path)?;
    let cfg = pipeline_config(&inst, seed);
    let v = engine::run(tag, &inst.space, &inst.map, &inst.certificate, x0, &cfg)
        .map_err(|e| InputError::Schema { path: path.to_path_buf(), msg: e.to_string() })?;
    show_verdict(out, &v);
    let ok = matches!(v.outcome, Outcome::Picard | Outcome::GlobalPicard);
    Ok((code(ok), json(&v)))
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    oracle: &'a oracle::OracleReport,
    agreement: &'a oracle::Agreement,
}

fn run_oracle(path: &Path, seed: u64, out: &mut dyn Write) -> Dispatched {
    let inst = Instance::load(path)?;
    let cfg = pipeline_config(&inst, seed);
    let bad = |msg: &str| InputError::Schema { path: path.to_path_buf(), msg: msg.to_string() };
    let SpaceModel::Finite(space) = &inst.space else {
        return Err(bad("the oracle needs a finite space"));
    };
    let Certificate::Implicit(f) = &inst.certificate else {
        return Err(bad("the oracle compares against the implicit pipeline; use a from_psi or expr6 certificate"));
    };
    let map = match &inst.map {
        picardlab_core::Selfmap::Finite(t) => t.clone(),
        _ => unreachable!("finite spaces carry table maps"),
    };
    let report_valid = space::validate_space(&inst.space);
    if !report_valid.is_valid() {
        return Err(bad("space fails validation; run `validate` for the witness"));
    }
    let bundle = InstanceBundle {
        space: space.clone(),
        map,
        certificate: inst.certificate.clone(),
        psi_factor: inst.linear_factor.clone(),
        config: cfg,
        seed,
    };
    let report = oracle::brute_force(&bundle);
    let (agreement, _) = oracle::agreement(&bundle, &mut f.clone(), &report);
    line(out, format!("fixed points: {:?}", report.fixed_points));
    line(out, format!("start set: {:?}", report.start_set));
    line(out, format!("increasing: {}", report.increasing));
    line(
        out,
        format!(
            "contraction: {}/{} guarded pairs",
            report.contraction.iter().filter(|p| p.holds).count(),
            report.contraction.len()
        ),
    );
    for (x, e) in &report.orbits {
        line(out, format!("  orbit from #{x}: {e:?}"));
    }
    line(out, format!("order-unique: {}", report.order_unique));
    line(out, format!("agreement: {}", agreement.agree));
    for m in &agreement.mismatches {
        line(out, format!("  mismatch: {m}"));
    }
    let ok = agreement.agree && (!report.hypotheses_hold || report.conclusion_holds);
    Ok((code(ok), json(OracleOutput { oracle: &report, agreement: &agreement })))
}

fn run_fuzz(cfg: &FuzzConfig, out: &mut dyn Write) -> Dispatched {
    let summary = fuzz::run(cfg);
    for c in summary.cases.iter().filter(|c| !c.agree || c.error.is_some()) {
        line(out, format!("  case {} (seed {}): {:?} {:?}", c.index, c.seed, c.mismatches, c.error));
    }
    line(out, format!("agreement: {}/{}", summary.agreements, cfg.count));
    line(out, format!("hypotheses held: {}/{}", summary.hypotheses_held, cfg.count));
    line(out, format!("conclusion failures: {}", summary.conclusion_failures));
    Ok((code(summary.all_agree()), json(&summary)))
}

#[derive(Serialize)]
struct GapOutput {
    outcome: GapOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CheckResult>,
}

fn extract_gap(path: &Path, theta: &[f64], n: Option<usize>, tail_tol: f64, out: &mut dyn Write) -> Dispatched {
    let file: SeqFile = format::read_json(path)?;
    let (points, len) = file.seq.build();
    let n = n.unwrap_or(len);
    let mut theta = theta.to_vec();
    theta.sort_by(|a, b| b.total_cmp(a));
    let seq = SeqWithMetric::from_reals(points);
    let outcome = match gap::extract_gap(&seq, &theta, n) {
        Ok(o) => o,
        Err(e) => {
            line(out, format!("rejected: {e}"));
            return Ok((EXIT_FAIL, serde_json::json!({ "rejected": e.to_string() })));
        }
    };
    let check = match &outcome {
        GapOutcome::NoGap { tails } => {
            line(out, "no gap: every threshold has a tail without far pairs");
            for (b, k) in tails {
                line(out, format!("  theta {b}: no pair beyond it from rank {k}"));
            }
            None
        }
        GapOutcome::Gap(w) => {
            let r = gap::verify_witness(&seq, w, &theta, tail_tol);
            line(out, format!("b = {}, j_b = {}, horizon = {}", w.b, w.j_b, w.horizon));
            if w.limit_unverified {
                line(out, "limit-unverified");
            }
            let dev = w.tail_deviation();
            line(out, format!("last-decile max |u(p,q) - b|: {dev:?}"));
            show_check(out, &r);
            Some(r)
        }
    };
    let ok = check.as_ref().is_none_or(CheckResult::passed);
    Ok((code(ok), json(GapOutput { outcome, check })))
}
