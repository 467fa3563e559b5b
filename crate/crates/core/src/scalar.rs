//! Scalar comparison functions `R_+ -> R_+` and their admissibility classes:
//! regressive, increasing, Matkowski, compatible, (almost) Boyd-Wong
//! admissible; plus the right limsup `P`, `Q = max(psi, P)` and the altering
//! combiners `L` and `L*`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div};

#[allow(unused_imports)]
use num_traits::{Float, One};
use rand::Rng;

use crate::check::{self, CheckConfig, CheckResult, Finding, GridConfig, PropertyReport, Severity, Verdict, Witness};
use crate::error::Result;
use crate::expr::Expr;
use crate::rational::{self, Rational};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ScalarKind {
    Linear { alpha: Rational },
    Expr(Expr),
    Table { knots: Vec<(Rational, Rational)>, extrapolate: Extrapolate },
    /// Closure without an exact evaluation path.
    Custom(RealFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolate {
    /// Constant at the last knot value.
    Last,
    /// Continue the last segment.
    Linear,
}

/// A named, evaluable function on the reals together with the structural
/// claims its author makes about it (claims are inputs to checkers, not facts).
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    kind: ScalarKind,
    alpha_f64: f64,
    knots_f64: Vec<(f64, f64)>,
    pub claims_increasing: bool,
    pub claims_continuous: bool,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("name", &self.name).finish()
    }
}

impl ScalarFn {
    pub fn linear(alpha: Rational) -> Self {
        let a = rational::to_f64(&alpha);
        ScalarFn {
            name: format!("{}*t", rational::render(&alpha)),
            kind: ScalarKind::Linear { alpha },
            alpha_f64: a,
            knots_f64: Vec::new(),
            claims_increasing: a >= 0.0,
            claims_continuous: true,
        }
    }

    /// `alpha` is taken at its shortest decimal spelling (`0.6` is `3/5`).
    pub fn linear_f64(alpha: f64) -> Self {
        Self::linear(rational::from_f64_shortest(alpha).unwrap_or_else(|| rational::int(0)))
    }

    pub fn identity() -> Self {
        let mut f = Self::linear(rational::int(1));
        f.name = "t".to_string();
        f
    }

    pub fn expr(body: &str) -> Result<Self> {
        let e = Expr::scalar(body)?;
        Ok(ScalarFn {
            name: body.to_string(),
            kind: ScalarKind::Expr(e),
            alpha_f64: 0.0,
            knots_f64: Vec::new(),
            claims_increasing: false,
            claims_continuous: true,
        })
    }

    /// Piecewise-linear interpolation through `knots` (sorted by abscissa).
    /// Below the first knot the first value is used.
    pub fn table(knots: Vec<(Rational, Rational)>, extrapolate: Extrapolate) -> Result<Self> {
        if knots.is_empty() {
            return Err(crate::Error::InvalidCertificate("table needs at least one knot".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(crate::Error::InvalidCertificate(
                "table knots must be strictly increasing in t".into(),
            ));
        }
        let knots_f64 = knots
            .iter()
            .map(|(t, v)| (rational::to_f64(t), rational::to_f64(v)))
            .collect();
        Ok(ScalarFn {
            name: format!("table[{}]", knots.len()),
            kind: ScalarKind::Table { knots, extrapolate },
            alpha_f64: 0.0,
            knots_f64,
            claims_increasing: false,
            claims_continuous: true,
        })
    }

    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn {
            name: name.to_string(),
            kind: ScalarKind::Custom(Arc::new(f)),
            alpha_f64: 0.0,
            knots_f64: Vec::new(),
            claims_increasing: false,
            claims_continuous: false,
        }
    }

    pub fn with_claims(mut self, increasing: bool, continuous: bool) -> Self {
        self.claims_increasing = increasing;
        self.claims_continuous = continuous;
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ScalarKind {
        &self.kind
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            ScalarKind::Linear { .. } => self.alpha_f64 * t,
            ScalarKind::Expr(e) => e.eval(&[t]),
            ScalarKind::Table { extrapolate, .. } => interpolate(&self.knots_f64, *extrapolate, t),
            ScalarKind::Custom(f) => f(t),
        }
    }

    /// Exact evaluation; `None` for closures and divisions by zero.
    pub fn eval_exact(&self, t: &Rational) -> Option<Rational> {
        match &self.kind {
            ScalarKind::Linear { alpha } => Some(alpha * t),
            ScalarKind::Expr(e) => e.eval_exact(core::slice::from_ref(t)),
            ScalarKind::Table { knots, extrapolate } => Some(interpolate_exact(knots, *extrapolate, t)),
            ScalarKind::Custom(_) => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        !matches!(self.kind, ScalarKind::Custom(_))
    }
}

fn interpolate(knots: &[(f64, f64)], ex: Extrapolate, t: f64) -> f64 {
    let first = knots[0];
    if t <= first.0 {
        return first.1;
    }
    for w in knots.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    let (tl, vl) = knots[knots.len() - 1];
    match (ex, knots.len()) {
        (Extrapolate::Linear, n) if n >= 2 => {
            let (tp, vp) = knots[n - 2];
            vl + (vl - vp) * (t - tl) / (tl - tp)
        }
        _ => vl,
    }
}

fn interpolate_exact(knots: &[(Rational, Rational)], ex: Extrapolate, t: &Rational) -> Rational {
    let first = &knots[0];
    if t <= &first.0 {
        return first.1.clone();
    }
    for w in knots.windows(2) {
        let ((t0, v0), (t1, v1)) = (&w[0], &w[1]);
        if t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    let (tl, vl) = &knots[knots.len() - 1];
    match (ex, knots.len()) {
        (Extrapolate::Linear, n) if n >= 2 => {
            let (tp, vp) = &knots[n - 2];
            vl + (vl - vp) * (t - tl) / (tl - tp)
        }
        _ => vl.clone(),
    }
}

/// `f(0) = 0` exactly and `f(t) < t` on every positive sample.
pub fn check_regressive(f: &ScalarFn, grid: &GridConfig) -> CheckResult {
    const NAME: &str = "regressive";
    let at0 = f.eval(0.0);
    if at0 != 0.0 {
        return CheckResult::fail(NAME, Witness::new([0.0], Some(at0), "f(0) != 0"));
    }
    let samples = grid.positive_samples();
    for &t in &samples {
        let v = f.eval(t);
        if !(v >= 0.0) || !check::strictly_less(v, t) {
            return CheckResult::fail(NAME, Witness::new([t], Some(v), "f(t) < t violated"))
                .with_evaluations(samples.len() as u64 + 1);
        }
    }
    CheckResult::new(NAME, Verdict::SampledPass).with_evaluations(samples.len() as u64 + 1)
}

/// `s <= t` implies `f(s) <= f(t)` on consecutive sorted samples.
pub fn check_increasing(f: &ScalarFn, grid: &GridConfig) -> CheckResult {
    const NAME: &str = "increasing";
    let mut ts = grid.samples(0.0, grid.upper);
    ts.sort_by(|a, b| a.total_cmp(b));
    let vals: Vec<f64> = ts.iter().map(|&t| f.eval(t)).collect();
    for i in 1..ts.len() {
        if !check::leq_rounded(vals[i - 1], vals[i]) {
            return CheckResult::fail(
                NAME,
                Witness::new([ts[i - 1], ts[i]], Some(vals[i - 1] - vals[i]), "f(s) > f(t) with s < t"),
            )
            .with_evaluations(ts.len() as u64);
        }
    }
    CheckResult::new(NAME, Verdict::SampledPass).with_evaluations(ts.len() as u64)
}

/// Iterates `f` from each sample until the iterate drops below `eps`.
/// Evidence: `iterations@t` pairs (`t`, then the count) in sample order.
pub fn check_matkowski(f: &ScalarFn, t_samples: &[f64], n_max: u64, eps: f64) -> CheckResult {
    const NAME: &str = "matkowski";
    let mut result = CheckResult::new(NAME, Verdict::SampledPass);
    let mut evaluations = 0;
    for &t in t_samples.iter().filter(|&&t| t > 0.0) {
        let mut x = t;
        let mut n = 0;
        while x >= eps && n < n_max {
            let next = f.eval(x);
            n += 1;
            evaluations += 1;
            if !(next < x) {
                // the iterate stopped decreasing, so it can never reach eps
                n = n_max;
                x = next;
                break;
            }
            x = next;
        }
        if x >= eps || !x.is_finite() {
            let mut fail = CheckResult::fail(
                NAME,
                Witness::new([t], Some(x), format!("iterate still >= {eps} after {n} steps")),
            );
            fail.evaluations = evaluations;
            fail.evidence = result.evidence;
            return fail;
        }
        result.push_evidence("t", t);
        result.push_evidence("iterations", n as f64);
    }
    result.evaluations = evaluations;
    result
}

/// Shrinking-window estimate of `limsup_{t -> s+} f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimsupEstimate {
    pub value: f64,
    /// Sampled sup of `f` over `(s, s + delta_k]`, nonincreasing in `k`.
    pub envelope: Vec<f64>,
}

pub const LIMSUP_DELTA0: f64 = 1e-2;
pub const LIMSUP_LEVELS: usize = 21;
pub const LIMSUP_SAMPLES: usize = 33;

/// Windows `(s, s + delta_k]` with `delta_k = delta0 * min(1, s) * 2^-k`,
/// `k = 0..=20`, 33 samples each. The envelope at level `k` is the largest
/// sample seen inside window `k` (finer windows are nested in it); the
/// estimate is the last envelope value.
pub fn right_limsup_envelope(f: &ScalarFn, s: f64) -> LimsupEstimate {
    let scale = s.min(1.0);
    let mut level_sup = Vec::with_capacity(LIMSUP_LEVELS);
    for k in 0..LIMSUP_LEVELS {
        let delta = LIMSUP_DELTA0 * scale * (0.5f64).powi(k as i32);
        let sup = (1..=LIMSUP_SAMPLES)
            .map(|i| f.eval(s + delta * i as f64 / LIMSUP_SAMPLES as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        level_sup.push(sup);
    }
    let mut envelope = level_sup.clone();
    for k in (0..LIMSUP_LEVELS - 1).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    LimsupEstimate {
        value: envelope[LIMSUP_LEVELS - 1],
        envelope,
    }
}

/// `P(s)`.
pub fn right_limsup(f: &ScalarFn, s: f64) -> f64 {
    right_limsup_envelope(f, s).value
}

/// `Q(s) = max(f(s), P(s))`.
pub fn q_value(f: &ScalarFn, s: f64) -> f64 {
    f.eval(s).max(right_limsup(f, s))
}

/// `Q(s) < s` at every positive grid sample.
pub fn check_boyd_wong_admissible(f: &ScalarFn, grid: &GridConfig) -> CheckResult {
    const NAME: &str = "boyd-wong-admissible";
    let samples = grid.positive_samples();
    for &s in &samples {
        let q = q_value(f, s);
        if !check::strictly_less(q, s) {
            return CheckResult::fail(NAME, Witness::new([s], Some(q), "Q(s) < s violated"))
                .with_evaluations(samples.len() as u64);
        }
    }
    CheckResult::new(NAME, Verdict::SampledPass).with_evaluations(samples.len() as u64)
}

/// Halvings tried below each `eps` by the cofinality searches.
pub const GEOMETRIC_SEARCH_STEPS: usize = 40;

/// For each `eps`, a witness `s < eps` with `Q(s) < s` found by halving.
/// Evidence: `witness` values in `eps_grid` order.
pub fn check_almost_bw_admissible(f: &ScalarFn, eps_grid: &[f64]) -> CheckResult {
    const NAME: &str = "almost-boyd-wong-admissible";
    let mut result = CheckResult::new(NAME, Verdict::SampledPass);
    let mut evaluations = 0;
    for &eps in eps_grid {
        let mut s = eps;
        let found = (0..GEOMETRIC_SEARCH_STEPS).find_map(|_| {
            s *= 0.5;
            evaluations += 1;
            check::strictly_less(q_value(f, s), s).then_some(s)
        });
        match found {
            Some(s) => result.push_evidence("witness", s),
            None => {
                let mut fail = CheckResult::fail(
                    NAME,
                    Witness::new([eps], None, "no s < eps with Q(s) < s found"),
                );
                fail.evaluations = evaluations;
                return fail;
            }
        }
    }
    result.evaluations = evaluations;
    result
}

/// Sampler for the compatibility condition: every sequence with
/// `r_n <= f(r_{n-1})` must tend to zero. Each trial draws `r_0` in `(0, 10]`
/// and runs one random sequence `r_n = u_n f(r_{n-1})`, `u_n ~ U(0, 1]`, and
/// the extremal sequence `u_n = 1`. Necessary evidence only.
pub fn check_compatible_psi(f: &ScalarFn, cfg: &CheckConfig) -> CheckResult {
    const NAME: &str = "compatible-psi";
    let pre = check_regressive(f, &cfg.grid);
    if !pre.passed() {
        let mut r = CheckResult::new(NAME, Verdict::Fail).with_note("precondition: not regressive");
        r.witness = pre.witness;
        return r;
    }
    let mut rng = check::rng(cfg.seed);
    let mut evaluations = 0;
    let mut slowest = 0usize;
    for _ in 0..cfg.trials {
        let r0 = 10.0 * (1.0 - rng.random::<f64>());
        for extremal in [false, true] {
            let mut r = r0;
            let mut n = 0;
            while r >= cfg.zero_threshold && n < cfg.max_steps {
                let u = if extremal { 1.0 } else { 1.0 - rng.random::<f64>() };
                r = u * f.eval(r);
                n += 1;
            }
            evaluations += n as u64;
            slowest = slowest.max(n);
            if r >= cfg.zero_threshold || !r.is_finite() {
                return CheckResult::fail(
                    NAME,
                    Witness::new([r0], Some(r), format!("sequence above threshold after {n} steps")),
                )
                .with_evaluations(evaluations);
            }
        }
    }
    let mut out = CheckResult::new(NAME, Verdict::SampledPass).with_evaluations(evaluations);
    out.push_evidence("slowest-steps", slowest as f64);
    out
}

/// Boyd-Wong admissibility should imply compatibility; a BW pass paired
/// with a compatibility failure is reported as a high-severity finding.
pub fn lemma_41_suite(f: &ScalarFn, cfg: &CheckConfig) -> PropertyReport {
    let mut report = PropertyReport::default();
    let bw = check_boyd_wong_admissible(f, &cfg.grid);
    let bw_ok = bw.passed();
    report.checks.push(bw);
    if !bw_ok {
        report.findings.push(Finding {
            severity: Severity::Info,
            message: format!("{}: not Boyd-Wong admissible, suite vacuous", f.name()),
        });
        return report;
    }
    let almost = check_almost_bw_admissible(f, &cfg.eps_grid);
    if !almost.passed() {
        report.findings.push(Finding {
            severity: Severity::High,
            message: format!("{}: Boyd-Wong pass but almost-Boyd-Wong fail", f.name()),
        });
    }
    report.checks.push(almost);
    let compat = check_compatible_psi(f, cfg);
    if !compat.passed() {
        report.findings.push(Finding {
            severity: Severity::High,
            message: format!("{}: Boyd-Wong pass but compatibility fail", f.name()),
        });
    }
    report.checks.push(compat);
    report
}

/// `max(t1, t2, t3, t4)`.
pub fn eval_l<T: PartialOrd + Clone>(t1: &T, t2: &T, t3: &T, t4: &T) -> T {
    let mut m = t1;
    for t in [t2, t3, t4] {
        if t > m {
            m = t;
        }
    }
    m.clone()
}

/// `L(t1, t2, t3, (t4 + t5) / 2)`.
pub fn eval_lstar<T>(t1: &T, t2: &T, t3: &T, t4: &T, t5: &T) -> T
where
    T: PartialOrd + Clone + One + Add<Output = T> + Div<Output = T>,
{
    let two = T::one() + T::one();
    let mid = (t4.clone() + t5.clone()) / two;
    eval_l(t1, t2, t3, &mid)
}

type VecFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum AlteringKind {
    L,
    LStar,
    Custom(VecFn),
}

/// A candidate `k`-altering function `R_+^k -> R_+`.
#[derive(Clone)]
pub struct AlteringFn {
    pub name: String,
    pub arity: usize,
    kind: AlteringKind,
}

impl AlteringFn {
    pub fn l() -> Self {
        AlteringFn { name: "L".into(), arity: 4, kind: AlteringKind::L }
    }

    pub fn lstar() -> Self {
        AlteringFn { name: "L*".into(), arity: 5, kind: AlteringKind::LStar }
    }

    pub fn custom(name: &str, arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        AlteringFn {
            name: name.into(),
            arity,
            kind: AlteringKind::Custom(Arc::new(f)),
        }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.kind {
            AlteringKind::L => eval_l(&t[0], &t[1], &t[2], &t[3]),
            AlteringKind::LStar => eval_lstar(&t[0], &t[1], &t[2], &t[3], &t[4]),
            AlteringKind::Custom(f) => f(t),
        }
    }
}

/// Coordinatewise monotonicity, continuity (sampled modulus) and
/// reflexive-sufficiency (zero exactly at the origin) on grid points.
pub fn check_altering(g: &AlteringFn, grid: &GridConfig) -> PropertyReport {
    let mut report = PropertyReport::default();
    let k = g.arity;
    let mut rng = check::rng(grid.seed);
    // random points plus the equispaced diagonal c * (1, ..., 1)
    let mut anchors: Vec<Vec<f64>> = (0..grid.random.max(8))
        .map(|_| (0..k).map(|_| grid.upper * rng.random::<f64>()).collect())
        .collect();
    let diagonal = GridConfig { random: 0, ..*grid }.samples(0.0, grid.upper);
    anchors.extend(diagonal.into_iter().filter(|&c| c > 0.0).map(|c| alloc::vec![c; k]));
    let mut evals = 0u64;

    let zero = alloc::vec![0.0; k];
    let at_origin = g.eval(&zero);
    let mut sufficient = if at_origin != 0.0 {
        CheckResult::fail("reflexive-sufficient", Witness::new(zero.clone(), Some(at_origin), "G(0) != 0"))
    } else {
        CheckResult::new("reflexive-sufficient", Verdict::SampledPass)
    };
    if sufficient.passed() {
        // positive along each axis and at the random anchors
        let axis_points = grid.positive_samples().into_iter().flat_map(|t| {
            (0..k).map(move |i| {
                let mut p = alloc::vec![0.0; k];
                p[i] = t;
                p
            })
        });
        for p in axis_points.chain(anchors.iter().cloned()) {
            evals += 1;
            let v = g.eval(&p);
            if !(v > 0.0) {
                sufficient = CheckResult::fail("reflexive-sufficient", Witness::new(p, Some(v), "G vanishes off the origin"));
                break;
            }
        }
    }
    report.checks.push(sufficient.with_evaluations(evals));

    let steps = [1e-1, 1e-3, 1e-6];
    let mut increasing = CheckResult::new("increasing", Verdict::SampledPass);
    let mut continuous = CheckResult::new("continuous", Verdict::SampledPass);
    evals = 0;
    'outer: for a in &anchors {
        let base = g.eval(a);
        for i in 0..k {
            let mut diffs = [0.0; 3];
            for (slot, &h) in diffs.iter_mut().zip(&steps) {
                let mut b = a.clone();
                b[i] += h;
                let v = g.eval(&b);
                evals += 1;
                if increasing.passed() && !check::leq_rounded(base, v) {
                    increasing = CheckResult::fail(
                        "increasing",
                        Witness::new(b.clone(), Some(base - v), format!("decreases in coordinate {}", i + 1)),
                    );
                }
                *slot = (v - base).abs();
            }
            // a continuous function's increments shrink with the step
            if continuous.passed() && diffs[2] > 1e-4 {
                continuous = CheckResult::fail(
                    "continuous",
                    Witness::new(a.clone(), Some(diffs[2]), format!("jump in coordinate {}", i + 1)),
                );
            }
            if !increasing.passed() && !continuous.passed() {
                break 'outer;
            }
        }
    }
    report.checks.push(increasing.with_evaluations(evals));
    report.checks.push(continuous.with_evaluations(evals));
    report
}

/// The built-in comparison functions used by the property suites.
pub fn builtin_family() -> Vec<ScalarFn> {
    alloc::vec![
        ScalarFn::linear_f64(0.5),
        ScalarFn::linear_f64(0.9),
        ScalarFn::expr("t/(1+t)").expect("builtin").with_claims(true, true),
        ScalarFn::expr("min(t/2, 1)").expect("builtin").with_claims(true, true),
        ScalarFn::table(
            alloc::vec![
                (rational::int(0), rational::int(0)),
                (rational::int(1), rational::ratio(1, 2)),
                (rational::int(4), rational::int(3)),
            ],
            Extrapolate::Linear,
        )
        .expect("builtin")
        .with_claims(true, true),
        step_psi(),
        right_limit_psi(),
        ScalarFn::identity(),
    ]
}

/// `0` on `[0, 1]`, `0.9 t` beyond: increasing, regressive, discontinuous at 1.
pub fn step_psi() -> ScalarFn {
    ScalarFn::custom("step(0 | 0.9t @1)", |t| if t <= 1.0 { 0.0 } else { 0.9 * t }).with_claims(true, false)
}

/// `t/2` on `[0, 1]`, `1 + (t - 1)/2` beyond: regressive with right limit
/// equal to `s` at `s = 1`, so Boyd-Wong admissibility fails there.
pub fn right_limit_psi() -> ScalarFn {
    ScalarFn::custom("jump(t/2 | 1+(t-1)/2 @1)", |t| if t <= 1.0 { 0.5 * t } else { 1.0 + 0.5 * (t - 1.0) })
        .with_claims(true, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn grid() -> GridConfig {
        GridConfig::default()
    }

    #[test]
    fn regressive_examples() {
        assert_eq!(check_regressive(&ScalarFn::linear_f64(0.5), &grid()).verdict, Verdict::SampledPass);
        let id = check_regressive(&ScalarFn::identity(), &grid());
        assert_eq!(id.verdict, Verdict::Fail);
        assert!(id.witness.unwrap().at[0] > 0.0);
        let f = ScalarFn::expr("t/(1+t)").unwrap();
        assert!(check_regressive(&f, &grid()).passed());
        let shifted = ScalarFn::expr("t/2 + 0.1").unwrap();
        assert_eq!(check_regressive(&shifted, &grid()).witness.unwrap().at, [0.0]);
    }

    #[test]
    fn matkowski_linear_half_takes_27_steps() {
        let r = check_matkowski(&ScalarFn::linear_f64(0.5), &[1.0], 100_000, 1e-8);
        assert_eq!(r.verdict, Verdict::SampledPass);
        assert_eq!(r.evidence("iterations").next(), Some(27.0));
    }

    #[test]
    fn matkowski_hyperbolic_iterate_is_one_over_one_plus_n() {
        // the n-th iterate of t/(1+t) from 1 is 1/(1+n); first below 1e-4 at n = 10^4
        let r = check_matkowski(&ScalarFn::expr("t/(1+t)").unwrap(), &[1.0], 100_000, 1e-4);
        assert!(r.passed());
        let n = r.evidence("iterations").next().unwrap();
        assert!((9_999.0..=10_001.0).contains(&n), "{n}");
    }

    #[test]
    fn matkowski_identity_fails() {
        let r = check_matkowski(&ScalarFn::identity(), &[1.0], 100_000, 1e-8);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn right_limsup_examples() {
        assert!((right_limsup(&ScalarFn::linear_f64(0.5), 1.0) - 0.5).abs() < 1e-6);
        assert!((right_limsup(&ScalarFn::expr("t/(1+t)").unwrap(), 1.0) - 0.5).abs() < 1e-6);
        assert!((right_limsup(&step_psi(), 1.0) - 0.9).abs() < 1e-6);
        let est = right_limsup_envelope(&step_psi(), 1.0);
        assert_eq!(est.envelope.len(), LIMSUP_LEVELS);
        assert!(est.envelope.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn q_examples() {
        assert!((q_value(&ScalarFn::linear_f64(0.5), 1.0) - 0.5).abs() < 1e-6);
        assert!((q_value(&step_psi(), 1.0) - 0.9).abs() < 1e-6);
        assert_eq!(q_value(&ScalarFn::linear_f64(0.0), 1.0), 0.0);
    }

    #[test]
    fn boyd_wong_examples() {
        let g = grid();
        assert!(check_boyd_wong_admissible(&ScalarFn::expr("t/(1+t)").unwrap(), &g).passed());
        assert!(check_boyd_wong_admissible(&ScalarFn::linear_f64(0.9), &g).passed());
        let jump = check_boyd_wong_admissible(&right_limit_psi(), &g);
        assert_eq!(jump.verdict, Verdict::Fail);
        assert_eq!(jump.witness.unwrap().at, [1.0]);
        // but witnesses below every eps exist, away from the jump
        assert!(check_almost_bw_admissible(&right_limit_psi(), &check::default_eps_grid()).passed());
    }

    #[test]
    fn almost_bw_reaches_small_scales_for_hyperbolic_psi() {
        let r = check_almost_bw_admissible(&ScalarFn::expr("t/(1+t)").unwrap(), &check::default_eps_grid());
        assert!(r.passed(), "{r:?}");
        let w: Vec<f64> = r.evidence("witness").collect();
        assert_eq!(w.len(), 7);
        assert!(w[6] < 1e-6);
    }

    #[test]
    fn compatible_psi_examples() {
        let cfg = CheckConfig {
            trials: 50,
            ..CheckConfig::default()
        };
        assert_eq!(check_compatible_psi(&ScalarFn::linear_f64(0.5), &cfg).verdict, Verdict::SampledPass);
        let hyp = check_compatible_psi(&ScalarFn::expr("t/(1+t)").unwrap(), &cfg);
        assert!(hyp.passed());
        // the extremal sequence is r0/(1 + n r0): about 10^4 steps to reach 1e-4
        assert!(hyp.evidence("slowest-steps").next().unwrap() > 9_000.0);
        let not_regressive = ScalarFn::custom("t above 1, t/2 below", |t| if t >= 1.0 { t } else { t / 2.0 });
        let r = check_compatible_psi(&not_regressive, &cfg);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes[0].contains("precondition"));
    }

    #[test]
    fn lemma_41_examples() {
        let cfg = CheckConfig {
            trials: 50,
            ..CheckConfig::default()
        };
        for f in [ScalarFn::linear_f64(0.5), ScalarFn::expr("t/(1+t)").unwrap()] {
            let rep = lemma_41_suite(&f, &cfg);
            assert!(rep.all_passed(), "{}", f.name());
            assert_eq!(rep.checks.len(), 3);
        }
        let rep = lemma_41_suite(&ScalarFn::identity(), &cfg);
        assert_eq!(rep.checks.len(), 1);
        assert!(!rep.checks[0].passed());
        assert!(rep.findings.iter().all(|f| f.severity == Severity::Info));
    }

    #[test]
    fn l_and_lstar() {
        assert_eq!(eval_l(&1.0, &2.0, &3.0, &4.0), 4.0);
        assert_eq!(eval_lstar(&1.0, &2.0, &3.0, &4.0, &6.0), 5.0);
        assert_eq!(eval_lstar(&0.0, &0.0, &0.0, &0.0, &0.0), 0.0);
        assert_eq!(eval_lstar(&int(1), &int(0), &int(0), &int(1), &int(2)), ratio(3, 2));
    }

    #[test]
    fn altering_examples() {
        assert!(check_altering(&AlteringFn::l(), &grid()).all_passed());
        assert!(check_altering(&AlteringFn::lstar(), &grid()).all_passed());
        let one = check_altering(&AlteringFn::custom("1", 3, |_| 1.0), &grid());
        assert!(!one.get("reflexive-sufficient").unwrap().passed());
        let jumpy = AlteringFn::custom("ceil-sum", 2, |t| {
            let s = t[0] + t[1];
            if s > 0.0 { s.ceil() } else { 0.0 }
        });
        assert!(!check_altering(&jumpy, &grid()).get("continuous").unwrap().passed());
    }

    #[test]
    fn exact_paths_agree_with_floats() {
        let table = ScalarFn::table(
            alloc::vec![(int(0), int(0)), (int(2), int(1))],
            Extrapolate::Last,
        )
        .unwrap();
        assert_eq!(table.eval_exact(&int(1)).unwrap(), ratio(1, 2));
        assert_eq!(table.eval_exact(&int(5)).unwrap(), int(1));
        assert_eq!(table.eval(5.0), 1.0);
        assert_eq!(ScalarFn::linear_f64(0.6).eval_exact(&int(5)).unwrap(), int(3));
        assert!(step_psi().eval_exact(&int(1)).is_none());
    }

    #[test]
    fn builtin_family_is_deterministic() {
        let names: Vec<String> = builtin_family().iter().map(|f| f.name().into()).collect();
        assert!(names.contains(&"1/2*t".to_string()));
        assert_eq!(names.len(), 8);
    }
}
