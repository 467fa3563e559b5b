//! Picard orbits and the theorem pipelines.
//!
//! Each pipeline runs its hypothesis checks in order, short-circuits on the
//! first failing one, then iterates `T`, classifies the orbit and decides
//! the fixed-point and order-uniqueness verdicts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::certificate::{self, Certificate};
use crate::check::{self, CheckConfig, CheckResult, Verdict, Witness};
use crate::implicit::sp::{self, SpCertificate};
use crate::implicit::{f_from_psi, ImplicitF, Property};
use crate::scalar::{self, ScalarFn};
use crate::space::{self, Point, Selfmap, SpaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremTag {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl TheoremTag {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "t1" => TheoremTag::T1,
            "t2" => TheoremTag::T2,
            "t3" => TheoremTag::T3,
            "t4" => TheoremTag::T4,
            "t5" => TheoremTag::T5,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub max_iter: usize,
    /// Step tolerance: continuous orbits stop once `r_n <= tol`.
    pub tol: f64,
    pub seed: u64,
    pub checks: CheckConfig,
    /// Tail length used by the Cauchy classification.
    pub window: usize,
    /// Tolerance of the Cauchy classification.
    pub cauchy_tol: f64,
    /// Extra starts for multi-start runs on intervals.
    pub starts: usize,
    /// Limits closer than this are the same fixed point.
    pub cluster_tol: f64,
    /// Threshold of the Matkowski iteration.
    pub matkowski_eps: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_iter: 1_000_000,
            tol: 1e-9,
            seed: 0x5eed,
            checks: CheckConfig::default(),
            window: 4,
            cauchy_tol: 1e-6,
            starts: 16,
            cluster_tol: 1e-6,
            matkowski_eps: 1e-8,
        }
    }
}

impl PipelineConfig {
    /// Residual bound for accepting a fixed point on intervals.
    pub fn accept_tol(&self) -> f64 {
        10.0 * self.tol
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TraceFlags {
    pub ascending: bool,
    pub semi_cauchy: bool,
    pub cauchy_estimate: bool,
    pub terminated_at_fixed_point: bool,
    pub converged: bool,
    /// Length of the cycle the orbit entered (finite spaces, length > 1).
    pub cycle: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub x0: Point,
    pub points: Vec<Point>,
    /// `r_n = d(x_n, x_{n+1})`.
    pub r: Vec<f64>,
    /// `s_n = d(x_n, x_{n+2})`.
    pub s: Vec<f64>,
    pub flags: TraceFlags,
    pub limit_candidate: Option<Point>,
    /// Applications of `T`.
    pub iterations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Iterates `T` from `x0` until `x_{n+1} = x_n` (finite), `r_n <= tol`
/// (interval), a repeated point (finite cycle) or `max_iter` steps.
pub fn picard_orbit(space: &SpaceModel, t: &Selfmap, x0: Point, max_iter: usize, tol: f64) -> OrbitTrace {
    let mut warnings = Vec::new();
    if !space.contains(&x0) {
        warnings.push(format!("x0 = {x0:?} is not a point of the space"));
    } else if !space::in_start_set(space, t, &x0) {
        warnings.push(String::from("x0 is not in the start set (x0 <= Tx0 fails)"));
    }
    let mut points = alloc::vec![x0];
    let mut r = Vec::new();
    let mut flags = TraceFlags::default();
    let mut seen: Vec<Option<usize>> = match space {
        SpaceModel::Finite(s) => alloc::vec![None; s.len()],
        SpaceModel::Interval(_) => Vec::new(),
    };
    if let Point::Index(i) = x0 {
        if i < seen.len() {
            seen[i] = Some(0);
        }
    }
    let mut iterations = 0;
    while iterations < max_iter {
        let x = *points.last().expect("nonempty");
        let tx = t.apply(&x);
        iterations += 1;
        let rn = space.dist(&x, &tx);
        points.push(tx);
        r.push(rn);
        match (space, tx) {
            (SpaceModel::Finite(_), Point::Index(j)) => {
                if tx == x {
                    flags.terminated_at_fixed_point = true;
                    flags.converged = true;
                    break;
                }
                if let Some(first) = seen.get(j).copied().flatten() {
                    flags.cycle = Some(points.len() - 1 - first);
                    break;
                }
                if let Some(slot) = seen.get_mut(j) {
                    *slot = Some(points.len() - 1);
                }
            }
            _ => {
                if rn <= tol {
                    flags.converged = true;
                    break;
                }
                if !rn.is_finite() {
                    warnings.push(String::from("orbit left the reals"));
                    break;
                }
            }
        }
    }
    let s: Vec<f64> = (0..points.len().saturating_sub(2))
        .map(|n| space.dist(&points[n], &points[n + 2]))
        .collect();
    flags.ascending = points.windows(2).all(|w| space.leq(&w[0], &w[1]));
    for n in 1..r.len() {
        // |s_{n-1} - r_{n-1}| <= r_n
        debug_assert!(check::leq_rounded((s[n - 1] - r[n - 1]).abs(), r[n]), "triangle at {n}");
    }
    let limit_candidate = flags.converged.then(|| *points.last().expect("nonempty"));
    OrbitTrace {
        x0,
        points,
        r,
        s,
        flags,
        limit_candidate,
        iterations,
        warnings,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CauchyFlags {
    pub semi_cauchy: bool,
    pub cauchy_estimate: bool,
}

/// Over the last `window` steps: semi-Cauchy iff every `r_n <= tol`;
/// Cauchy estimate iff the largest pairwise distance is `<= tol`. A finite
/// orbit that stopped at a fixed point continues as a constant sequence.
pub fn classify_cauchy(space: &SpaceModel, trace: &OrbitTrace, window: usize, tol: f64) -> CauchyFlags {
    if trace.flags.terminated_at_fixed_point {
        return CauchyFlags {
            semi_cauchy: true,
            cauchy_estimate: true,
        };
    }
    let w = window.max(1).min(trace.r.len());
    if w == 0 {
        return CauchyFlags {
            semi_cauchy: false,
            cauchy_estimate: false,
        };
    }
    let semi_cauchy = trace.r[trace.r.len() - w..].iter().all(|&x| x <= tol);
    let tail = &trace.points[trace.points.len() - w - 1..];
    let cauchy_estimate = match space {
        // on the line the diameter of the tail is max - min
        SpaceModel::Interval(_) => {
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.coord()), hi.max(p.coord()))
            });
            hi - lo <= tol
        }
        SpaceModel::Finite(_) => tail
            .iter()
            .all(|a| tail.iter().all(|b| space.dist(a, b) <= tol)),
    };
    CauchyFlags {
        semi_cauchy,
        cauchy_estimate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Rejected { stage: String },
    NonConvergent,
    Picard,
    GlobalPicard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardVerdict {
    pub theorem: TheoremTag,
    pub stages: Vec<CheckResult>,
    pub outcome: Outcome,
    pub trace: Option<OrbitTrace>,
    pub fixed_point: Option<Point>,
    pub order_unique: Option<bool>,
    /// Fixed points found by the multi-start runs (intervals) or by
    /// enumeration (finite spaces).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fixed_points: Vec<Point>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl PicardVerdict {
    fn new(theorem: TheoremTag) -> Self {
        PicardVerdict {
            theorem,
            stages: Vec::new(),
            outcome: Outcome::NonConvergent,
            trace: None,
            fixed_point: None,
            order_unique: None,
            fixed_points: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records a stage; returns `false` (and sets the rejection) on failure.
    fn stage(&mut self, r: CheckResult) -> bool {
        let ok = r.passed();
        if !ok {
            self.outcome = Outcome::Rejected { stage: r.check.clone() };
        }
        self.stages.push(r);
        ok
    }

    pub fn stage_result(&self, name: &str) -> Option<&CheckResult> {
        self.stages.iter().find(|s| s.check == name)
    }

    pub fn rejected_at(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::Rejected { stage } => Some(stage),
            _ => None,
        }
    }

    pub fn hypotheses_passed(&self) -> bool {
        !matches!(self.outcome, Outcome::Rejected { .. })
    }
}

fn validation_stage(space: &SpaceModel) -> CheckResult {
    let rep = space::validate_space(space);
    match rep.violations.first() {
        None => CheckResult::new(
            "space-axioms",
            if space.is_finite() { Verdict::Pass } else { Verdict::SampledPass },
        ),
        Some(v) => CheckResult::fail(
            "space-axioms",
            Witness::new(
                v.witness.iter().map(|&i| i as f64).collect::<Vec<_>>(),
                None,
                format!("{:?}: {}", v.axiom, v.detail),
            ),
        ),
    }
}

fn start_stage(space: &SpaceModel, t: &Selfmap, x0: &Point) -> CheckResult {
    const NAME: &str = "start-set";
    if let Err(e) = space.check_point(x0) {
        return CheckResult::new(NAME, Verdict::Fail).with_note(format!("{e}"));
    }
    if space::in_start_set(space, t, x0) {
        CheckResult::new(NAME, Verdict::Pass).with_evaluations(1)
    } else {
        CheckResult::fail(NAME, Witness::new([x0.coord(), t.apply(x0).coord()], None, "x0 <= Tx0 fails"))
    }
}

fn map_stage(space: &SpaceModel, t: &Selfmap, cfg: &PipelineConfig) -> CheckResult {
    match space::validate_map(space, t, &cfg.checks.grid) {
        Ok(()) => CheckResult::new("selfmap", if space.is_finite() { Verdict::Pass } else { Verdict::SampledPass }),
        Err(e) => CheckResult::new("selfmap", Verdict::Fail).with_note(format!("{e}")),
    }
}

/// Replays the first proof step on the orbit: `F(M(x_{n-1}, x_n)) <= 0`,
/// which reads `F(r_n, r_{n-1}, r_{n-1}, r_n, s_{n-1}, 0) <= 0`, wherever
/// consecutive points differ.
pub fn replay_step_one(space: &SpaceModel, t: &Selfmap, cert: &Certificate, trace: &OrbitTrace) -> CheckResult {
    const NAME: &str = "step-1-replay";
    let mut evals = 0;
    for n in 1..trace.r.len() {
        let (x, y) = (&trace.points[n - 1], &trace.points[n]);
        if !cert.guard(space, t, x, y) {
            continue;
        }
        evals += 1;
        let tuple = [trace.r[n], trace.r[n - 1], trace.r[n - 1], trace.r[n], trace.s[n - 1], 0.0];
        let ok = match space::m_vector_exact(space, t, x, y) {
            Ok(Some(m)) => {
                debug_assert_eq!(m.to_f64().m, tuple);
                cert.holds_exact(&m)
                    .unwrap_or_else(|| cert.holds(&m.to_f64()))
            }
            _ => cert.holds(&space::MVector { m: tuple }),
        };
        if !ok {
            return CheckResult::fail(NAME, Witness::new(tuple, Some(n as f64), "condition fails along the orbit"))
                .with_evaluations(evals);
        }
    }
    CheckResult::new(NAME, if space.is_finite() { Verdict::Pass } else { Verdict::SampledPass }).with_evaluations(evals)
}

fn cauchy_stage(space: &SpaceModel, trace: &OrbitTrace, cfg: &PipelineConfig) -> (CheckResult, CauchyFlags) {
    let flags = classify_cauchy(space, trace, cfg.window, cfg.cauchy_tol);
    let verdict = if flags.cauchy_estimate {
        if space.is_finite() {
            Verdict::Pass
        } else {
            Verdict::SampledPass
        }
    } else {
        Verdict::Fail
    };
    let mut r = CheckResult::new("cauchy", verdict);
    r.push_evidence("semi-cauchy", flags.semi_cauchy as u8 as f64);
    r.push_evidence("cauchy-estimate", flags.cauchy_estimate as u8 as f64);
    (r, flags)
}

/// Fixed point at the end of the orbit: `z = Tz` (finite) or
/// `d(z, Tz) <= 10 tol` (interval).
fn fixed_point_of(space: &SpaceModel, t: &Selfmap, trace: &OrbitTrace, cfg: &PipelineConfig) -> Option<Point> {
    let z = trace.limit_candidate?;
    space::is_fixed_point(space, t, &z, cfg.accept_tol()).then_some(z)
}

/// Groups limits closer than `tol`, keeping the first of each group.
fn cluster(space: &SpaceModel, pts: &[Point], tol: f64) -> Vec<Point> {
    let mut reps: Vec<Point> = Vec::new();
    for p in pts {
        if !reps.iter().any(|q| space.dist(p, q) <= tol) {
            reps.push(*p);
        }
    }
    reps
}

/// Evenly spread starts in `X(T, <=)` for multi-start runs (intervals), or
/// the whole start set (finite spaces).
pub fn multi_starts(space: &SpaceModel, t: &Selfmap, count: usize) -> Vec<Point> {
    match space {
        SpaceModel::Finite(s) => (0..s.len())
            .map(Point::Index)
            .filter(|x| space::in_start_set(space, t, x))
            .collect(),
        SpaceModel::Interval(i) => {
            let n = count.max(2);
            (0..n)
                .map(|k| Point::Real(i.lower + (i.upper - i.lower) * k as f64 / (n - 1) as f64))
                .filter(|x| space::in_start_set(space, t, x))
                .collect()
        }
    }
}

/// Fixed points for the order-uniqueness stage: exact enumeration on finite
/// spaces; limits of multi-start orbits on intervals.
fn discover_fixed_points(space: &SpaceModel, t: &Selfmap, found: Option<Point>, cfg: &PipelineConfig) -> Vec<Point> {
    match (space, t) {
        (SpaceModel::Finite(s), Selfmap::Finite(table)) => {
            space::fixed_points(s, table).into_iter().map(Point::Index).collect()
        }
        _ => {
            let mut limits: Vec<Point> = found.into_iter().collect();
            for x in multi_starts(space, t, cfg.starts) {
                let tr = picard_orbit(space, t, x, cfg.max_iter, cfg.tol);
                if let Some(z) = fixed_point_of(space, t, &tr, cfg) {
                    limits.push(z);
                }
            }
            cluster(space, &limits, cfg.cluster_tol)
        }
    }
}

fn order_unique_stage(space: &SpaceModel, fix: &[Point]) -> CheckResult {
    let os = space::is_order_singleton(fix, space);
    let verdict = match (os.holds, space.is_finite()) {
        (false, _) => Verdict::Fail,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::SampledPass,
    };
    let mut r = CheckResult::new("order-unique", verdict);
    if let Some((z, w)) = os.witness {
        r.witness = Some(Witness::new([z.coord(), w.coord()], None, "distinct comparable fixed points"));
    }
    if !space.is_finite() {
        r = r.with_note("evidence: fixed points discovered by multi-start orbits");
    }
    r
}

/// Orbit, step-1 replay, Cauchy classification and fixed point; shared by
/// the ordered pipelines. Returns `false` if the verdict is final.
fn iterate_stages(
    v: &mut PicardVerdict,
    space: &SpaceModel,
    t: &Selfmap,
    cert: &Certificate,
    x0: Point,
    cfg: &PipelineConfig,
) -> bool {
    let trace = picard_orbit(space, t, x0, cfg.max_iter, cfg.tol);
    let replay = replay_step_one(space, t, cert, &trace);
    let (cauchy, flags) = cauchy_stage(space, &trace, cfg);
    let mut trace = trace;
    trace.flags.semi_cauchy = flags.semi_cauchy;
    trace.flags.cauchy_estimate = flags.cauchy_estimate;
    let fixed = fixed_point_of(space, t, &trace, cfg);
    v.trace = Some(trace);
    if !v.stage(replay) {
        return false;
    }
    v.stages.push(cauchy);
    match fixed {
        Some(z) => {
            v.fixed_point = Some(z);
            v.stages.push(CheckResult::new("fixed-point", Verdict::Pass));
            v.outcome = Outcome::Picard;
            true
        }
        None => {
            v.stages.push(CheckResult::new("fixed-point", Verdict::Fail).with_note("orbit did not reach a fixed point"));
            v.outcome = Outcome::NonConvergent;
            false
        }
    }
}

fn prefixed(who: &str, mut r: CheckResult) -> CheckResult {
    r.check = format!("{who}-{}", r.check);
    r
}

fn contraction_stage(space: &SpaceModel, t: &Selfmap, cert: &Certificate, cfg: &PipelineConfig) -> CheckResult {
    let pairs = certificate::default_pairs(space, &cfg.checks.grid);
    certificate::verify_contraction_on_pairs(space, t, cert, &pairs)
}

/// Implicit certificate pipeline: increasing `T`, `x0 <= Tx0`, a compatible,
/// almost 2-right-lim-positive and 4-point-lim-positive `F`, contraction on
/// pairs; then the orbit. A (3,4)-normal `F` adds the order-uniqueness stage
/// and the global verdict. Certificate properties are taken from `f`'s cache
/// when present.
pub fn run_theorem2(space: &SpaceModel, t: &Selfmap, f: &mut ImplicitF, x0: Point, cfg: &PipelineConfig) -> PicardVerdict {
    run_theorem2_tagged(TheoremTag::T2, PicardVerdict::new(TheoremTag::T2), space, t, f, x0, cfg)
}

fn run_theorem2_tagged(
    tag: TheoremTag,
    mut v: PicardVerdict,
    space: &SpaceModel,
    t: &Selfmap,
    f: &mut ImplicitF,
    x0: Point,
    cfg: &PipelineConfig,
) -> PicardVerdict {
    v.theorem = tag;
    if !v.stage(validation_stage(space))
        || !v.stage(map_stage(space, t, cfg))
        || !v.stage(space::is_increasing(space, t, &cfg.checks.grid))
        || !v.stage(start_stage(space, t, &x0))
    {
        return v;
    }
    for p in [Property::Compatible, Property::Almost2Right, Property::Point4] {
        if !v.stage(f.certify(p, &cfg.checks)) {
            return v;
        }
    }
    let normal34 = f.certify(Property::Normal34, &cfg.checks);
    let global = normal34.passed();
    v.stages.push(normal34);
    let cert = Certificate::Implicit(f.clone());
    if !v.stage(contraction_stage(space, t, &cert, cfg)) {
        return v;
    }
    if !iterate_stages(&mut v, space, t, &cert, x0, cfg) {
        return v;
    }
    if global {
        let fix = discover_fixed_points(space, t, v.fixed_point, cfg);
        let ou = order_unique_stage(space, &fix);
        v.order_unique = Some(ou.passed());
        v.fixed_points = fix;
        if ou.passed() {
            v.outcome = Outcome::GlobalPicard;
        }
        v.stages.push(ou);
    }
    v
}

/// Explicit `phi` pipeline: `phi` increasing, regressive and Matkowski;
/// `d(Tx, Ty) <= phi(d(x, y))` on comparable pairs; orbit; order-singleton.
/// Continuity of `T` / self-closedness of the order are declared attributes
/// (intervals with either order are self-closed; on finite spaces
/// self-closedness follows from transitivity).
pub fn run_matkowski(space: &SpaceModel, t: &Selfmap, phi: &ScalarFn, x0: Point, cfg: &PipelineConfig) -> PicardVerdict {
    let mut v = PicardVerdict::new(TheoremTag::T1);
    let grid = &cfg.checks.grid;
    if !v.stage(validation_stage(space))
        || !v.stage(map_stage(space, t, cfg))
        || !v.stage(space::is_increasing(space, t, grid))
        || !v.stage(start_stage(space, t, &x0))
        || !v.stage(prefixed("phi", scalar::check_increasing(phi, grid)))
        || !v.stage(prefixed("phi", scalar::check_regressive(phi, grid)))
        || !v.stage(prefixed("phi", scalar::check_matkowski(phi, &grid.positive_samples(), 100_000, cfg.matkowski_eps)))
    {
        return v;
    }
    v.stages.push(
        CheckResult::new("self-closed", if space.is_finite() { Verdict::Pass } else { Verdict::SampledPass })
            .with_note(if space.is_finite() {
                "finite ascending sequences are eventually constant; follows from transitivity"
            } else {
                "declared: the usual and the amorphous order on an interval are self-closed"
            }),
    );
    let cert = Certificate::Phi(phi.clone());
    if !v.stage(contraction_stage(space, t, &cert, cfg)) {
        return v;
    }
    if !iterate_stages(&mut v, space, t, &cert, x0, cfg) {
        return v;
    }
    let fix = discover_fixed_points(space, t, v.fixed_point, cfg);
    let ou = order_unique_stage(space, &fix);
    v.order_unique = Some(ou.passed());
    v.fixed_points = fix;
    if ou.passed() {
        v.outcome = Outcome::GlobalPicard;
    }
    v.stages.push(ou);
    v
}

/// `psi` pipeline: `psi` regressive, compatible and almost Boyd-Wong
/// admissible, then the implicit pipeline on `t1 - psi(L*(t2..t6))`.
pub fn run_theorem3(space: &SpaceModel, t: &Selfmap, psi: &ScalarFn, x0: Point, cfg: &PipelineConfig) -> PicardVerdict {
    let mut v = PicardVerdict::new(TheoremTag::T3);
    if !v.stage(prefixed("psi", scalar::check_regressive(psi, &cfg.checks.grid)))
        || !v.stage(scalar::check_compatible_psi(psi, &cfg.checks))
        || !v.stage(scalar::check_almost_bw_admissible(psi, &cfg.checks.eps_grid))
    {
        return v;
    }
    let mut f = match f_from_psi(psi) {
        Ok(f) => f,
        Err(e) => {
            v.stage(CheckResult::new("from-psi", Verdict::Fail).with_note(format!("{e}")));
            return v;
        }
    };
    run_theorem2_tagged(TheoremTag::T3, v, space, t, &mut f, x0, cfg)
}

/// Lsc pipeline: `F` lsc, (3,4)-normal, (2,3,6)-normal and compatible;
/// contraction; orbit; order-uniqueness is part of the conclusion.
pub fn run_theorem4(space: &SpaceModel, t: &Selfmap, f: &mut ImplicitF, x0: Point, cfg: &PipelineConfig) -> PicardVerdict {
    let mut v = PicardVerdict::new(TheoremTag::T4);
    if !v.stage(validation_stage(space))
        || !v.stage(map_stage(space, t, cfg))
        || !v.stage(space::is_increasing(space, t, &cfg.checks.grid))
        || !v.stage(start_stage(space, t, &x0))
    {
        return v;
    }
    for p in [Property::Lsc, Property::Normal34, Property::Normal236, Property::Compatible] {
        if !v.stage(f.certify(p, &cfg.checks)) {
            return v;
        }
    }
    let cert = Certificate::Implicit(f.clone());
    if !v.stage(contraction_stage(space, t, &cert, cfg)) {
        return v;
    }
    if !iterate_stages(&mut v, space, t, &cert, x0, cfg) {
        return v;
    }
    let fix = discover_fixed_points(space, t, v.fixed_point, cfg);
    let ou = order_unique_stage(space, &fix);
    v.order_unique = Some(ou.passed());
    v.fixed_points = fix;
    if ou.passed() {
        v.outcome = Outcome::GlobalPicard;
    }
    v.stages.push(ou);
    v
}

/// Generalized certificate pipeline on the unordered space: conditions
/// (f01)-(f05), `F(M) in P` for every sampled pair with `Tx != Ty`, then
/// orbits from `x0` and from the multi-start batch, which must all reach
/// the same fixed point.
pub fn run_theorem5(space: &SpaceModel, t: &Selfmap, c: &SpCertificate, x0: Point, cfg: &PipelineConfig) -> PicardVerdict {
    let mut v = PicardVerdict::new(TheoremTag::T5);
    let space = &space.amorphous();
    if !v.stage(validation_stage(space)) || !v.stage(map_stage(space, t, cfg)) || !v.stage(start_stage(space, t, &x0))
    {
        return v;
    }
    for r in sp::check_sp_conditions(c, &cfg.checks.grid).checks {
        if !v.stage(r) {
            return v;
        }
    }
    let cert = Certificate::GeneralizedSp(c.clone());
    if !v.stage(contraction_stage(space, t, &cert, cfg)) {
        return v;
    }
    if !iterate_stages(&mut v, space, t, &cert, x0, cfg) {
        return v;
    }
    let mut limits: Vec<Point> = v.fixed_point.into_iter().collect();
    let mut all_converged = true;
    for x in multi_starts(space, t, cfg.starts) {
        let tr = picard_orbit(space, t, x, cfg.max_iter, cfg.tol);
        match fixed_point_of(space, t, &tr, cfg) {
            Some(z) => limits.push(z),
            None => all_converged = false,
        }
    }
    let reps = cluster(space, &limits, cfg.cluster_tol);
    let unique = all_converged && reps.len() == 1;
    let mut r = CheckResult::new("unique-limit", if unique { Verdict::SampledPass } else { Verdict::Fail });
    r.push_evidence("starts", limits.len() as f64);
    r.push_evidence("distinct-limits", reps.len() as f64);
    v.fixed_points = reps;
    v.order_unique = Some(unique);
    if v.stage(r) {
        v.outcome = Outcome::GlobalPicard;
    }
    v
}

/// Convenience dispatcher over the five pipelines.
pub fn run(
    tag: TheoremTag,
    space: &SpaceModel,
    t: &Selfmap,
    cert: &Certificate,
    x0: Point,
    cfg: &PipelineConfig,
) -> Result<PicardVerdict, crate::Error> {
    let mismatch = || crate::Error::InvalidCertificate(format!("certificate kind does not fit pipeline {tag:?}"));
    Ok(match (tag, cert) {
        (TheoremTag::T1, Certificate::Phi(phi)) => run_matkowski(space, t, phi, x0, cfg),
        (TheoremTag::T3, Certificate::PsiExplicit(psi)) => run_theorem3(space, t, psi, x0, cfg),
        (TheoremTag::T3, Certificate::Implicit(f)) => match f.psi() {
            Some(psi) => run_theorem3(space, t, psi, x0, cfg),
            None => return Err(mismatch()),
        },
        (TheoremTag::T2, Certificate::Implicit(f)) => run_theorem2(space, t, &mut f.clone(), x0, cfg),
        (TheoremTag::T2, Certificate::PsiExplicit(psi)) => {
            run_theorem2(space, t, &mut f_from_psi(psi)?, x0, cfg)
        }
        (TheoremTag::T4, Certificate::Implicit(f)) => run_theorem4(space, t, &mut f.clone(), x0, cfg),
        (TheoremTag::T4, Certificate::PsiExplicit(psi)) => {
            run_theorem4(space, t, &mut f_from_psi(psi)?, x0, cfg)
        }
        (TheoremTag::T5, Certificate::GeneralizedSp(c)) => run_theorem5(space, t, c, x0, cfg),
        _ => return Err(mismatch()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::space::{FiniteSpace, IntervalSpace, OrderKind};

    fn unit(order: OrderKind) -> SpaceModel {
        SpaceModel::Interval(IntervalSpace::new(0.0, 1.0, order).unwrap())
    }

    fn map(body: &str) -> Selfmap {
        Selfmap::Interval(ScalarFn::expr(body).unwrap())
    }

    fn fast() -> PipelineConfig {
        PipelineConfig {
            checks: CheckConfig {
                trials: 64,
                ..CheckConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    fn chain(n: usize) -> SpaceModel {
        let pos: Vec<_> = (0..n as i64).map(int).collect();
        SpaceModel::Finite(FiniteSpace::on_line(&pos, (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect()).unwrap())
    }

    #[test]
    fn geometric_orbit_closed_form() {
        let tr = picard_orbit(&unit(OrderKind::Usual), &map("(t+1)/2"), Point::Real(0.0), 1_000_000, 1e-9);
        // r_n = 2^-(n+1) <= 1e-9 first at n = 29
        assert_eq!(tr.iterations, 30);
        for (n, r) in tr.r.iter().enumerate() {
            assert_eq!(*r, 0.5f64.powi(n as i32 + 1));
        }
        assert!(tr.flags.ascending && tr.flags.converged);
        let z = tr.limit_candidate.unwrap().coord();
        assert!((z - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_map_on_finite_space() {
        let space = chain(3);
        let t = Selfmap::Finite(alloc::vec![2, 2, 2]);
        let tr = picard_orbit(&space, &t, Point::Index(0), 100, 0.0);
        assert_eq!(tr.points, [Point::Index(0), Point::Index(2), Point::Index(2)]);
        assert!(tr.flags.terminated_at_fixed_point);
        assert!(tr.iterations <= 2);
    }

    #[test]
    fn slow_orbit_amorphous() {
        let space = unit(OrderKind::Amorphous);
        let tr = picard_orbit(&space, &map("t/(1+t)"), Point::Real(1.0), 1_000_000, 1e-9);
        for (n, p) in tr.points.iter().enumerate().take(100) {
            assert!((p.coord() - 1.0 / (1.0 + n as f64)).abs() < 1e-12);
        }
        assert!(tr.flags.converged);
        assert!(tr.iterations > 30_000);
    }

    #[test]
    fn cycle_is_flagged() {
        let space = chain(2).amorphous();
        let t = Selfmap::Finite(alloc::vec![1, 0]);
        let tr = picard_orbit(&space, &t, Point::Index(0), 100, 0.0);
        assert_eq!(tr.flags.cycle, Some(2));
        assert!(!tr.flags.converged);
    }

    #[test]
    fn cauchy_classification() {
        let space = unit(OrderKind::Usual);
        let tr = picard_orbit(&space, &map("(t+1)/2"), Point::Real(0.0), 1_000_000, 1e-9);
        let f = classify_cauchy(&space, &tr, 4, 1e-6);
        assert!(f.semi_cauchy && f.cauchy_estimate);

        // 0 -> 1 -> 0 ... with the k-th leg in steps of 1/k
        let mut pts = alloc::vec![Point::Real(0.0)];
        let mut x = 0.0f64;
        let mut k = 1;
        while pts.len() < 20_000 {
            let dir = if k % 2 == 1 { 1.0 } else { -1.0 };
            for i in 1..=k {
                let target = if dir > 0.0 { i as f64 / k as f64 } else { 1.0 - i as f64 / k as f64 };
                x = target;
                pts.push(Point::Real(x));
            }
            k += 1;
        }
        let _ = x;
        let r: Vec<f64> = pts.windows(2).map(|w| (w[0].coord() - w[1].coord()).abs()).collect();
        let s = (0..pts.len() - 2).map(|n| (pts[n].coord() - pts[n + 2].coord()).abs()).collect();
        let walk = OrbitTrace {
            x0: pts[0],
            points: pts.clone(),
            r,
            s,
            flags: TraceFlags::default(),
            limit_candidate: None,
            iterations: pts.len() - 1,
            warnings: Vec::new(),
        };
        let f = classify_cauchy(&space, &walk, 2_000, 0.01);
        assert!(f.semi_cauchy);
        assert!(!f.cauchy_estimate);
    }

    #[test]
    fn theorem2_standard_interval() {
        let mut f = f_from_psi(&ScalarFn::linear_f64(0.6)).unwrap();
        let v = run_theorem2(&unit(OrderKind::Usual), &map("(t+1)/2"), &mut f, Point::Real(0.0), &fast());
        assert_eq!(v.outcome, Outcome::GlobalPicard, "{:?}", v.stages);
        assert!((v.fixed_point.unwrap().coord() - 1.0).abs() < 1e-8);
        assert_eq!(v.order_unique, Some(true));
    }

    #[test]
    fn theorem2_one_point_and_non_increasing() {
        let one = SpaceModel::Finite(FiniteSpace::new(alloc::vec![alloc::vec![int(0)]], alloc::vec![alloc::vec![true]]).unwrap());
        let mut f = f_from_psi(&ScalarFn::linear_f64(0.5)).unwrap();
        let v = run_theorem2(&one, &Selfmap::Finite(alloc::vec![0]), &mut f, Point::Index(0), &fast());
        assert_eq!(v.outcome, Outcome::GlobalPicard);

        let v = run_theorem2(&chain(3), &Selfmap::Finite(alloc::vec![1, 0, 2]), &mut f, Point::Index(0), &fast());
        assert_eq!(v.rejected_at(), Some("increasing"));
        assert!(v.stage_result("increasing").unwrap().witness.is_some());
    }

    #[test]
    fn theorem3_matches_theorem2_trace() {
        let psi = ScalarFn::linear_f64(0.6);
        let space = unit(OrderKind::Usual);
        let t = map("(t+1)/2");
        let v3 = run_theorem3(&space, &t, &psi, Point::Real(0.0), &fast());
        let v2 = run_theorem2(&space, &t, &mut f_from_psi(&psi).unwrap(), Point::Real(0.0), &fast());
        assert_eq!(v3.trace, v2.trace);
        assert!(v3.trace.as_ref().unwrap().iterations <= 40);
        assert_eq!(v3.outcome, Outcome::GlobalPicard);
    }

    #[test]
    fn theorem3_slow_amorphous() {
        let psi = ScalarFn::expr("t/(1+t)").unwrap();
        let v = run_theorem3(&unit(OrderKind::Amorphous), &map("t/(1+t)"), &psi, Point::Real(1.0), &fast());
        assert!(v.hypotheses_passed(), "{:?}", v.outcome);
        assert!(v.fixed_point.unwrap().coord() < 1e-4);
        let v = run_theorem3(&unit(OrderKind::Usual), &map("t/(1+t)"), &ScalarFn::identity(), Point::Real(0.0), &fast());
        assert_eq!(v.rejected_at(), Some("psi-regressive"));
    }

    #[test]
    fn matkowski_pipeline() {
        let v = run_matkowski(&unit(OrderKind::Usual), &map("(t+1)/2"), &ScalarFn::linear_f64(0.5), Point::Real(0.0), &fast());
        assert_eq!(v.outcome, Outcome::GlobalPicard);
        let v = run_matkowski(&unit(OrderKind::Usual), &map("(t+1)/2"), &ScalarFn::identity(), Point::Real(0.0), &fast());
        assert_eq!(v.rejected_at(), Some("phi-regressive"));
    }

    #[test]
    fn theorem4_examples() {
        let cfg = fast();
        let mut f = f_from_psi(&ScalarFn::linear_f64(0.5)).unwrap();
        let v = run_theorem4(&unit(OrderKind::Usual), &map("(t+1)/2"), &mut f, Point::Real(0.0), &cfg);
        assert_eq!(v.outcome, Outcome::GlobalPicard);
        let v = run_theorem4(&unit(OrderKind::Usual), &map("(t+1)/2"), &mut ImplicitF::zero(), Point::Real(0.0), &cfg);
        assert!(v.rejected_at().is_some());
        let mut step = ImplicitF::from_psi_unchecked(scalar::step_psi());
        let v = run_theorem4(&unit(OrderKind::Usual), &map("(t+1)/2"), &mut step, Point::Real(0.0), &cfg);
        assert_eq!(v.rejected_at(), Some("lsc"));
    }

    #[test]
    fn theorem5_unique_limit() {
        let c = SpCertificate::standard(ScalarFn::linear_f64(0.5), ScalarFn::linear_f64(0.25)).unwrap();
        let v = run_theorem5(&unit(OrderKind::Usual), &map("t/2"), &c, Point::Real(1.0), &fast());
        assert_eq!(v.outcome, Outcome::GlobalPicard, "{:?}", v.stages);
        assert!(v.fixed_point.unwrap().coord().abs() < 1e-8);
        assert_eq!(v.stage_result("unique-limit").unwrap().evidence("starts").next(), Some(17.0));
        let bad = SpCertificate::standard(ScalarFn::identity(), ScalarFn::linear_f64(0.25)).unwrap();
        let v = run_theorem5(&unit(OrderKind::Usual), &map("t/2"), &bad, Point::Real(1.0), &fast());
        assert_eq!(v.rejected_at(), Some("f01"));
    }
}
