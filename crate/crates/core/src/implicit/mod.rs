//! Six-variable implicit certificates `F: R_+^6 -> R` and the sampled
//! checkers for their properties.
//!
//! A certificate is used through `F(M(x, y)) <= 0` for comparable distinct
//! `x, y`. Every property below quantifies over sequences or limits, so the
//! checkers only return `sampled-pass` or a failure with a witness.

pub mod family;
pub mod sp;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::check::{self, CheckConfig, CheckResult, GridConfig, PropertyReport, Verdict, Witness};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::rational::{self, Rational};
use crate::scalar::{self, ScalarFn};
use family::{make_j_point, make_j_right, FamilyParams};

type SixFn = Arc<dyn Fn(&[f64; 6]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FKind {
    /// `t1 - psi(L*(t2, ..., t6))`.
    FromPsi(ScalarFn),
    /// `sum c_i t_i`.
    Linear([Rational; 6]),
    Expr(Expr),
    Custom(SixFn),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Compatible,
    Normal34,
    Almost2Right,
    Point4,
    Lsc,
    Normal236,
    Dec2to6,
    AlmostCompatible,
    PsiCompatible,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::Compatible,
        Property::Normal34,
        Property::Almost2Right,
        Property::Point4,
        Property::Lsc,
        Property::Normal236,
        Property::Dec2to6,
        Property::AlmostCompatible,
        Property::PsiCompatible,
    ];

    pub fn check_name(self) -> &'static str {
        match self {
            Property::Compatible => "compatible",
            Property::Normal34 => "normal-34",
            Property::Almost2Right => "almost-2-right-lim-positive",
            Property::Point4 => "4-point-lim-positive",
            Property::Lsc => "lsc",
            Property::Normal236 => "normal-236",
            Property::Dec2to6 => "decreasing-2-to-6",
            Property::AlmostCompatible => "almost-compatible",
            Property::PsiCompatible => "psi-compatible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheEntry {
    Unchecked,
    SampledPass,
    Fail(Option<Witness>),
}

#[derive(Clone)]
pub struct ImplicitF {
    name: String,
    kind: FKind,
    cache: BTreeMap<Property, CheckResult>,
}

impl fmt::Debug for ImplicitF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitF").field("name", &self.name).finish()
    }
}

/// `F = t1 - psi(L*(t2, ..., t6))`; `psi` must pass the regressive check.
pub fn f_from_psi(psi: &ScalarFn) -> Result<ImplicitF> {
    let reg = scalar::check_regressive(psi, &GridConfig::default());
    if !reg.passed() {
        return Err(Error::InvalidCertificate(format!("psi = {} is not regressive", psi.name())));
    }
    Ok(ImplicitF::from_psi_unchecked(psi.clone()))
}

impl ImplicitF {
    fn with_kind(name: String, kind: FKind) -> Self {
        ImplicitF {
            name,
            kind,
            cache: BTreeMap::new(),
        }
    }

    pub fn from_psi_unchecked(psi: ScalarFn) -> Self {
        Self::with_kind(format!("t1 - psi(L*) with psi = {}", psi.name()), FKind::FromPsi(psi))
    }

    pub fn linear(coeffs: [Rational; 6]) -> Self {
        let name = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}*t{}", rational::render(c), i + 1))
            .collect::<Vec<_>>()
            .join(" + ");
        Self::with_kind(name, FKind::Linear(coeffs))
    }

    pub fn expr(body: &str) -> Result<Self> {
        Ok(Self::with_kind(body.to_string(), FKind::Expr(Expr::six(body)?)))
    }

    pub fn custom(name: &str, f: impl Fn(&[f64; 6]) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_kind(name.to_string(), FKind::Custom(Arc::new(f)))
    }

    /// `F = 0` identically.
    pub fn zero() -> Self {
        Self::linear(core::array::from_fn(|_| Rational::zero()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &FKind {
        &self.kind
    }

    pub fn psi(&self) -> Option<&ScalarFn> {
        match &self.kind {
            FKind::FromPsi(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, t: &[f64; 6]) -> f64 {
        match &self.kind {
            FKind::FromPsi(psi) => {
                let l = scalar::eval_lstar(&t[1], &t[2], &t[3], &t[4], &t[5]);
                t[0] - psi.eval(l)
            }
            FKind::Linear(c) => c.iter().zip(t).map(|(c, t)| rational::to_f64(c) * t).sum(),
            FKind::Expr(e) => e.eval(t),
            FKind::Custom(f) => f(t),
        }
    }

    /// `None` for closures and divisions by zero.
    pub fn eval_exact(&self, t: &[Rational; 6]) -> Option<Rational> {
        match &self.kind {
            FKind::FromPsi(psi) => {
                let l = scalar::eval_lstar(&t[1], &t[2], &t[3], &t[4], &t[5]);
                Some(&t[0] - psi.eval_exact(&l)?)
            }
            FKind::Linear(c) => Some(c.iter().zip(t).fold(Rational::zero(), |acc, (c, t)| acc + c * t)),
            FKind::Expr(e) => e.eval_exact(t),
            FKind::Custom(_) => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        match &self.kind {
            FKind::FromPsi(psi) => psi.has_exact(),
            FKind::Custom(_) => false,
            _ => true,
        }
    }

    pub fn cached(&self, prop: Property) -> CacheEntry {
        match self.cache.get(&prop) {
            None => CacheEntry::Unchecked,
            Some(r) if r.passed() => CacheEntry::SampledPass,
            Some(r) => CacheEntry::Fail(r.witness.clone()),
        }
    }

    pub fn cached_result(&self, prop: Property) -> Option<&CheckResult> {
        self.cache.get(&prop)
    }

    /// Runs the checker for `prop` (unless cached) and stores its result.
    /// `PsiCompatible` needs a comparison function: use
    /// [`ImplicitF::certify_psi_compatible`].
    pub fn certify(&mut self, prop: Property, cfg: &CheckConfig) -> CheckResult {
        if let Some(r) = self.cache.get(&prop) {
            return r.clone();
        }
        let r = match prop {
            Property::Compatible => check_compatible_f(self, cfg),
            Property::Normal34 => check_34_normal(self, &cfg.grid),
            Property::Almost2Right => check_almost_2_right(self, &cfg.eps_grid, &cfg.families),
            Property::Point4 => check_4_point_lim_positive(self, &cfg.b_grid, &cfg.families),
            Property::Lsc => check_lsc(self, cfg),
            Property::Normal236 => check_236_normal(self, &cfg.grid),
            Property::Dec2to6 => check_2to6_decreasing(self, cfg),
            Property::AlmostCompatible => check_almost_compatible(self, cfg),
            Property::PsiCompatible => match self.psi().cloned() {
                Some(psi) => check_psi_compatible(self, &psi, &cfg.grid),
                None => CheckResult::new(prop.check_name(), Verdict::Fail).with_note("no psi supplied"),
            },
        };
        self.cache.insert(prop, r.clone());
        r
    }

    pub fn certify_psi_compatible(&mut self, psi: &ScalarFn, cfg: &CheckConfig) -> CheckResult {
        let r = check_psi_compatible(self, psi, &cfg.grid);
        self.cache.insert(Property::PsiCompatible, r.clone());
        r
    }

    /// Results for `props`, in the given order, as a report.
    pub fn certify_all(&mut self, props: &[Property], cfg: &CheckConfig) -> PropertyReport {
        PropertyReport {
            checks: props.iter().map(|&p| self.certify(p, cfg)).collect(),
            findings: Vec::new(),
        }
    }
}

/// How `r_n` is picked among the admissible values of a compatibility trial.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Pick {
    /// Largest admissible value in `(0, r_{n-1}]`.
    Persistent,
    /// Largest admissible value in `(0, 2 r_{n-1}]`.
    Extremal,
    /// `u * (largest admissible)`, `u ~ U(0, 1]`.
    Random,
}

/// Bisection steps for the largest admissible `r_n`.
const BISECTION_STEPS: usize = 40;
/// Halvings tried when looking for a first admissible `r_n`.
const ADMISSIBLE_SEARCH: usize = 60;

/// Largest `r` in `(0, hi]` with `ok(r)`, assuming the admissible set is an
/// initial segment near the found point; `None` if no admissible value is
/// found by halving.
fn largest_admissible(hi: f64, mut ok: impl FnMut(f64) -> bool) -> Option<f64> {
    if ok(hi) {
        return Some(hi);
    }
    let mut bad = hi;
    let mut good = None;
    let mut r = hi;
    for _ in 0..ADMISSIBLE_SEARCH {
        r *= 0.5;
        if ok(r) {
            good = Some(r);
            break;
        }
        bad = r;
    }
    let mut lo = good?;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + bad);
        if ok(mid) {
            lo = mid;
        } else {
            bad = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Default)]
struct SeqStats {
    evaluations: u64,
    vacuous: usize,
    slowest: usize,
}

/// Shared driver for the compatibility samplers. `skip(r_prev, r_n, lambda)`
/// returns the `s_{n-1}` paired with `r_n`.
fn run_compat_trials(
    name: &str,
    f: &ImplicitF,
    cfg: &CheckConfig,
    skip: impl Fn(f64, f64, f64) -> f64,
) -> CheckResult {
    let mut rng = check::rng(cfg.seed ^ 0xc0);
    let mut stats = SeqStats::default();
    for k in 0..cfg.trials {
        let pick = match k % 8 {
            0 => Pick::Persistent,
            1 => Pick::Extremal,
            _ => Pick::Random,
        };
        let r0 = 10.0 * (1.0 - rng.random::<f64>());
        let mut r = r0;
        let mut n = 0;
        let mut vacuous = false;
        while r >= cfg.zero_threshold && n < cfg.max_steps {
            let lambda = 2.0 * rng.random::<f64>() - 1.0;
            let prev = r;
            let mut ok = |x: f64| {
                stats.evaluations += 1;
                let s = skip(prev, x, lambda).max(0.0);
                f.eval(&[x, prev, prev, x, s, 0.0]) <= 0.0
            };
            let hi = if pick == Pick::Persistent { prev } else { 2.0 * prev };
            let Some(rmax) = largest_admissible(hi, &mut ok) else {
                vacuous = n == 0;
                // nothing admissible except possibly 0: the sequence stops
                r = 0.0;
                break;
            };
            r = match pick {
                Pick::Random => {
                    let u = 1.0 - rng.random::<f64>();
                    let cand = u * rmax;
                    if ok(cand) {
                        cand
                    } else {
                        rmax
                    }
                }
                _ => rmax,
            };
            n += 1;
            if !r.is_finite() || r > 1e12 {
                break;
            }
        }
        if vacuous {
            stats.vacuous += 1;
            continue;
        }
        stats.slowest = stats.slowest.max(n);
        if !(r < cfg.zero_threshold) {
            return CheckResult::fail(
                name,
                Witness::new([r0, r], None, format!("trial {k}: r_n = {r} after {n} steps")),
            )
            .with_evaluations(stats.evaluations);
        }
    }
    let verdict = if stats.vacuous == cfg.trials {
        Verdict::Vacuous
    } else {
        Verdict::SampledPass
    };
    let mut out = CheckResult::new(name, verdict).with_evaluations(stats.evaluations);
    out.push_evidence("slowest-steps", stats.slowest as f64);
    out.push_evidence("vacuous-trials", stats.vacuous as f64);
    out
}

/// Sampler for compatibility: coupled sequences with
/// `F(r_n, r_{n-1}, r_{n-1}, r_n, s_{n-1}, 0) <= 0` and
/// `|s_{n-1} - r_{n-1}| <= r_n` must drive `r_n` below the zero threshold.
/// `s_{n-1} = max(0, r_{n-1} + lambda r_n)` with `lambda ~ U[-1, 1]` per step.
/// Trials with no admissible first step count as vacuous.
pub fn check_compatible_f(f: &ImplicitF, cfg: &CheckConfig) -> CheckResult {
    run_compat_trials(Property::Compatible.check_name(), f, cfg, |prev, r, lambda| prev + lambda * r)
}

/// Same sampler with `s_{n-1} = r_n + r_{n-1}`.
pub fn check_almost_compatible(f: &ImplicitF, cfg: &CheckConfig) -> CheckResult {
    run_compat_trials(Property::AlmostCompatible.check_name(), f, cfg, |prev, r, _| prev + r)
}

fn positivity_scan(name: &str, f: &ImplicitF, grid: &GridConfig, at: impl Fn(f64) -> [f64; 6]) -> CheckResult {
    let samples = grid.positive_samples();
    let mut min_ratio = f64::INFINITY;
    for &r in &samples {
        let t = at(r);
        let v = f.eval(&t);
        if !check::strictly_positive(v, r) {
            return CheckResult::fail(name, Witness::new(t, Some(v), "F <= 0 at a normality point"))
                .with_evaluations(samples.len() as u64);
        }
        min_ratio = min_ratio.min(v / r);
    }
    let mut out = CheckResult::new(name, Verdict::SampledPass).with_evaluations(samples.len() as u64);
    out.push_evidence("min-value-over-r", min_ratio);
    out
}

/// `F(r, r, 0, 0, r, r) > 0` on the positive grid.
pub fn check_34_normal(f: &ImplicitF, grid: &GridConfig) -> CheckResult {
    positivity_scan(Property::Normal34.check_name(), f, grid, |r| [r, r, 0.0, 0.0, r, r])
}

/// `F(r, 0, 0, r, r, 0) > 0` on the positive grid.
pub fn check_236_normal(f: &ImplicitF, grid: &GridConfig) -> CheckResult {
    positivity_scan(Property::Normal236.check_name(), f, grid, |r| [r, 0.0, 0.0, r, r, 0.0])
}

/// Largest term over the last quarter of a sequence.
fn tail_max(f: &ImplicitF, seq: &[[f64; 6]]) -> f64 {
    let start = seq.len() - seq.len() / 4;
    seq[start..].iter().map(|t| f.eval(t)).fold(f64::NEG_INFINITY, f64::max)
}

fn lim_positive_at(name: &str, f: &ImplicitF, fam: &family::SeqFamily, b: f64) -> CheckResult {
    let mut min_tail = f64::INFINITY;
    let mut evals = 0;
    for seq in &fam.sequences {
        let m = tail_max(f, seq);
        evals += (seq.len() / 4) as u64;
        if !check::strictly_positive(m, b) {
            let mut w = alloc::vec![b];
            w.extend_from_slice(seq.last().expect("nonempty"));
            return CheckResult::fail(name, Witness::new(w, Some(m), "tail max of F(t^n) not positive"))
                .with_evaluations(evals);
        }
        min_tail = min_tail.min(m);
    }
    let mut out = CheckResult::new(name, Verdict::SampledPass).with_evaluations(evals);
    out.push_evidence("min-tail-max", min_tail);
    out
}

/// `limsup F(t^n) > 0` for the generated 2-right families at `(b, b, 0, 0, b, b)`.
pub fn check_2_right_lim_positive_at(f: &ImplicitF, b: f64, params: &FamilyParams) -> CheckResult {
    const NAME: &str = "2-right-lim-positive";
    match make_j_right([b, b, 0.0, 0.0, b, b], 2, params) {
        Ok(fam) => lim_positive_at(NAME, f, &fam, b),
        Err(e) => CheckResult::new(NAME, Verdict::Fail).with_note(e.to_string()),
    }
}

/// For each `eps`, a `b = eps 2^-k < eps` at which the 2-right check passes.
/// The found values are recorded as `theta` evidence.
pub fn check_almost_2_right(f: &ImplicitF, eps_grid: &[f64], params: &FamilyParams) -> CheckResult {
    let name = Property::Almost2Right.check_name();
    let mut out = CheckResult::new(name, Verdict::SampledPass);
    let mut evals = 0;
    for &eps in eps_grid {
        let mut b = eps;
        let mut found = None;
        let mut last = None;
        for _ in 0..scalar::GEOMETRIC_SEARCH_STEPS {
            b *= 0.5;
            let r = check_2_right_lim_positive_at(f, b, params);
            evals += r.evaluations;
            if r.passed() {
                found = Some(b);
                break;
            }
            last = r.witness;
        }
        match found {
            Some(b) => out.push_evidence("theta", b),
            None => {
                let mut fail = CheckResult::new(name, Verdict::Fail).with_evaluations(evals);
                fail.witness = last.map(|mut w| {
                    w.note = format!("no b < {eps} passes; last try: {}", w.note);
                    w
                });
                return fail;
            }
        }
    }
    out.evaluations = evals;
    out
}

/// The Θ-estimate recorded by [`check_almost_2_right`].
pub fn theta_values(r: &CheckResult) -> Vec<f64> {
    r.evidence("theta").collect()
}

/// `limsup F(t^n) > 0` for the generated 4-point families at `(b, 0, 0, b, b, 0)`,
/// for every `b` in `b_grid`.
pub fn check_4_point_lim_positive(f: &ImplicitF, b_grid: &[f64], params: &FamilyParams) -> CheckResult {
    let name = Property::Point4.check_name();
    let mut evals = 0;
    let mut min_tail = f64::INFINITY;
    for &b in b_grid {
        let fam = match make_j_point([b, 0.0, 0.0, b, b, 0.0], 4, params) {
            Ok(fam) => fam,
            Err(e) => return CheckResult::new(name, Verdict::Fail).with_note(e.to_string()),
        };
        let r = lim_positive_at(name, f, &fam, b);
        evals += r.evaluations;
        if !r.passed() {
            return r.with_evaluations(evals);
        }
        min_tail = r.evidence("min-tail-max").fold(min_tail, f64::min);
    }
    let mut out = CheckResult::new(name, Verdict::SampledPass).with_evaluations(evals);
    out.push_evidence("min-tail-max", min_tail);
    out
}

/// Slack for the lsc comparison `liminf F(t^n) >= F(a) - LSC_SLACK`.
pub const LSC_SLACK: f64 = 1e-7;

/// Anchors for the lsc scan: the normality points `(b,b,0,0,b,b)` and
/// `(b,0,0,b,b,0)` for `b` in `{0.25, ..., 2}`, plus random points of the
/// lattice `{0, 0.25, ..., 2}^6`.
fn lsc_anchors(seed: u64, random: usize) -> Vec<[f64; 6]> {
    let mut out = Vec::new();
    for k in 1..=8 {
        let b = 0.25 * k as f64;
        out.push([b, b, 0.0, 0.0, b, b]);
        out.push([b, 0.0, 0.0, b, b, 0.0]);
    }
    let mut rng = check::rng(seed ^ 0x15c);
    for _ in 0..random {
        out.push(core::array::from_fn(|_| 0.25 * rng.random_range(0..=8) as f64));
    }
    out
}

/// Lower semicontinuity along sequences `t^n -> a`: the minimum of `F(t^n)`
/// over the last tenth of the terms must not drop below `F(a) - 1e-7`. Directions include the
/// all-positive one and random sign patterns (clamped into `R_+^6`).
pub fn check_lsc(f: &ImplicitF, cfg: &CheckConfig) -> CheckResult {
    let name = Property::Lsc.check_name();
    let params = &cfg.families;
    let mut rng = check::rng(cfg.seed ^ 0x1c5);
    let mut evals = 0u64;
    for a in lsc_anchors(cfg.seed, 64) {
        let fa = f.eval(&a);
        for k in 0..params.count.max(2) / 2 {
            let dir: [f64; 6] = core::array::from_fn(|i| {
                let d = if k == 0 { 1.0 } else { 2.0 * rng.random::<f64>() - 1.0 };
                if a[i] == 0.0 {
                    d.abs()
                } else {
                    d
                }
            });
            let start = params.len - params.len / 10;
            let mut tail_min = f64::INFINITY;
            let mut at = a;
            for n in start..=params.len {
                let g = params.max_offset * params.rate.at(n);
                let t: [f64; 6] = core::array::from_fn(|i| (a[i] + dir[i] * g).max(0.0));
                let v = f.eval(&t);
                evals += 1;
                if v < tail_min {
                    tail_min = v;
                    at = t;
                }
            }
            if tail_min < fa - LSC_SLACK {
                let mut w = a.to_vec();
                w.extend_from_slice(&at);
                return CheckResult::fail(
                    name,
                    Witness::new(w, Some(fa - tail_min), format!("liminf below F(a) = {fa} (anchor, then term)")),
                )
                .with_evaluations(evals);
            }
        }
    }
    CheckResult::new(name, Verdict::SampledPass).with_evaluations(evals)
}

/// `F(t1, .)` decreasing: raising any of `t2..t6` never raises `F`.
pub fn check_2to6_decreasing(f: &ImplicitF, cfg: &CheckConfig) -> CheckResult {
    let name = Property::Dec2to6.check_name();
    let mut rng = check::rng(cfg.seed ^ 0xdec);
    let upper = cfg.grid.upper;
    for k in 0..cfg.trials {
        let t: [f64; 6] = core::array::from_fn(|_| upper * rng.random::<f64>());
        let mut t2 = t;
        if k % 2 == 0 {
            let i = rng.random_range(1..6);
            t2[i] += upper * rng.random::<f64>();
        } else {
            for x in &mut t2[1..] {
                *x += upper * rng.random::<f64>();
            }
        }
        let (a, b) = (f.eval(&t), f.eval(&t2));
        if !check::leq_rounded(b, a) {
            let mut w = t.to_vec();
            w.extend_from_slice(&t2);
            return CheckResult::fail(name, Witness::new(w, Some(b - a), "F increased when t2..t6 increased"))
                .with_evaluations(2 * k as u64 + 2);
        }
    }
    CheckResult::new(name, Verdict::SampledPass).with_evaluations(2 * cfg.trials as u64)
}

/// Grid points per axis for the psi-compatibility scan.
pub const PSI_COMPAT_GRID: usize = 65;

/// `F(u, v, v, u, u + v, 0) <= 0` implies `u <= psi(v) + 1e-9` on a
/// 65 x 65 grid of `[0, upper]^2`.
pub fn check_psi_compatible(f: &ImplicitF, psi: &ScalarFn, grid: &GridConfig) -> CheckResult {
    let name = Property::PsiCompatible.check_name();
    let axis: Vec<f64> = (0..PSI_COMPAT_GRID)
        .map(|i| grid.upper * i as f64 / (PSI_COMPAT_GRID - 1) as f64)
        .collect();
    let mut evals = 0;
    for &u in &axis {
        for &v in &axis {
            evals += 1;
            if f.eval(&[u, v, v, u, u + v, 0.0]) <= 0.0 && u > psi.eval(v) + 1e-9 {
                return CheckResult::fail(name, Witness::new([u, v], Some(u - psi.eval(v)), "u > psi(v)"))
                    .with_evaluations(evals);
            }
        }
    }
    CheckResult::new(name, Verdict::SampledPass).with_evaluations(evals)
}

/// The four properties `f_from_psi` guarantees for a compatible almost
/// Boyd-Wong admissible `psi`.
pub fn from_psi_suite(f: &mut ImplicitF, cfg: &CheckConfig) -> PropertyReport {
    f.certify_all(
        &[Property::Compatible, Property::Normal34, Property::Almost2Right, Property::Point4],
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn half() -> ImplicitF {
        f_from_psi(&ScalarFn::linear_f64(0.5)).unwrap()
    }

    fn quick() -> CheckConfig {
        CheckConfig {
            trials: 64,
            ..CheckConfig::default()
        }
    }

    #[test]
    fn from_psi_formula() {
        let f = half();
        let r = 3.0;
        assert_eq!(f.eval(&[r, r, 0.0, 0.0, r, r]), r / 2.0);
        assert_eq!(f.eval(&[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(f.eval(&[0.0; 6]), 0.0);
        let exact = f.eval_exact(&[int(1), int(2), int(0), int(0), int(4), int(6)]).unwrap();
        // L* = max(2, 0, 0, 5) = 5
        assert_eq!(exact, rational::ratio(-3, 2));
    }

    #[test]
    fn from_psi_requires_regressive() {
        assert!(f_from_psi(&ScalarFn::identity()).is_err());
        assert!(f_from_psi(&ScalarFn::expr("t/(1+t)").unwrap()).is_ok());
    }

    #[test]
    fn normality_examples() {
        let g = GridConfig::default();
        let r = check_34_normal(&half(), &g);
        assert_eq!(r.verdict, Verdict::SampledPass);
        assert!((r.evidence("min-value-over-r").next().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(check_34_normal(&ImplicitF::zero(), &g).verdict, Verdict::Fail);
        let id = ImplicitF::from_psi_unchecked(ScalarFn::identity());
        let fail = check_34_normal(&id, &g);
        assert_eq!(fail.witness.unwrap().value, Some(0.0));
        assert_eq!(check_236_normal(&half(), &g).verdict, Verdict::SampledPass);
        assert_eq!(check_236_normal(&ImplicitF::zero(), &g).verdict, Verdict::Fail);
    }

    #[test]
    fn compatible_examples() {
        let cfg = quick();
        assert_eq!(check_compatible_f(&half(), &cfg).verdict, Verdict::SampledPass);
        let always = ImplicitF::custom("-1", |_| -1.0);
        let r = check_compatible_f(&always, &cfg);
        assert_eq!(r.verdict, Verdict::Fail);
        // persistent trial first: the constant sequence r_n = r_0
        let w = r.witness.unwrap();
        assert_eq!(w.at[0], w.at[1]);
    }

    #[test]
    fn compatible_slow_decay() {
        let f = f_from_psi(&ScalarFn::expr("t/(1+t)").unwrap()).unwrap();
        let cfg = CheckConfig {
            trials: 16,
            ..CheckConfig::default()
        };
        let r = check_compatible_f(&f, &cfg);
        assert_eq!(r.verdict, Verdict::SampledPass);
        // extremal sequence r_0/(1 + n r_0) needs about 1/1e-4 steps
        let slowest = r.evidence("slowest-steps").next().unwrap();
        assert!(slowest > 9_000.0 && slowest < 10_001.0, "{slowest}");
    }

    #[test]
    fn two_right_examples() {
        let p = FamilyParams::default();
        let r = check_2_right_lim_positive_at(&half(), 1.0, &p);
        assert_eq!(r.verdict, Verdict::SampledPass);
        assert!(r.evidence("min-tail-max").next().unwrap() >= 0.5 - 1e-6);
        assert_eq!(check_2_right_lim_positive_at(&ImplicitF::zero(), 1.0, &p).verdict, Verdict::Fail);
        let f = f_from_psi(&ScalarFn::expr("t/(1+t)").unwrap()).unwrap();
        let r = check_2_right_lim_positive_at(&f, 0.3, &p);
        assert!(r.evidence("min-tail-max").next().unwrap() >= 0.3 - 0.3 / 1.3 - 1e-6);
    }

    #[test]
    fn almost_two_right_records_theta() {
        let cfg = CheckConfig::default();
        let r = check_almost_2_right(&half(), &cfg.eps_grid, &cfg.families);
        assert_eq!(r.verdict, Verdict::SampledPass);
        let theta = theta_values(&r);
        assert_eq!(theta.len(), 7);
        for (b, eps) in theta.iter().zip(&cfg.eps_grid) {
            assert!(b < eps);
        }
        assert_eq!(check_almost_2_right(&ImplicitF::zero(), &cfg.eps_grid, &cfg.families).verdict, Verdict::Fail);
    }

    #[test]
    fn four_point_examples() {
        let p = FamilyParams::default();
        let r = check_4_point_lim_positive(&half(), &[1.0], &p);
        assert!((r.evidence("min-tail-max").next().unwrap() - 0.5).abs() < 1e-6);
        let f = f_from_psi(&ScalarFn::expr("t/(1+t)").unwrap()).unwrap();
        let r = check_4_point_lim_positive(&f, &[2.0], &p);
        assert!((r.evidence("min-tail-max").next().unwrap() - (2.0 - 2.0 / 3.0)).abs() < 1e-6);
        assert_eq!(check_4_point_lim_positive(&ImplicitF::zero(), &[1.0], &p).verdict, Verdict::Fail);
    }

    #[test]
    fn lsc_examples() {
        let cfg = quick();
        assert_eq!(check_lsc(&half(), &cfg).verdict, Verdict::SampledPass);
        let step = ImplicitF::from_psi_unchecked(scalar::step_psi());
        let r = check_lsc(&step, &cfg);
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        // the anchor sits where L* = 1, the jump of the step function
        let a = &w.at[..6];
        let l = scalar::eval_lstar(&a[1], &a[2], &a[3], &a[4], &a[5]);
        assert_eq!(l, 1.0);
    }

    #[test]
    fn decreasing_and_psi_compatible() {
        let cfg = quick();
        assert_eq!(check_2to6_decreasing(&half(), &cfg).verdict, Verdict::SampledPass);
        let inc = ImplicitF::expr("t1 + t2").unwrap();
        assert_eq!(check_2to6_decreasing(&inc, &cfg).verdict, Verdict::Fail);
        let psi = ScalarFn::linear_f64(0.5);
        assert_eq!(check_psi_compatible(&half(), &psi, &cfg.grid).verdict, Verdict::SampledPass);
        let loose = ImplicitF::expr("t1 - 0.9*t2").unwrap();
        assert_eq!(check_psi_compatible(&loose, &psi, &cfg.grid).verdict, Verdict::Fail);
    }

    #[test]
    fn almost_compatible_follows_from_psi_compatible() {
        let cfg = quick();
        let mut f = half();
        assert!(f.certify(Property::Dec2to6, &cfg).passed());
        assert!(f.certify(Property::PsiCompatible, &cfg).passed());
        assert!(f.certify(Property::AlmostCompatible, &cfg).passed());
    }

    #[test]
    fn cache_tracks_checkers() {
        let cfg = quick();
        let mut f = ImplicitF::zero();
        assert_eq!(f.cached(Property::Normal34), CacheEntry::Unchecked);
        f.certify(Property::Normal34, &cfg);
        assert!(matches!(f.cached(Property::Normal34), CacheEntry::Fail(Some(_))));
        let mut g = half();
        g.certify(Property::Normal34, &cfg);
        assert_eq!(g.cached(Property::Normal34), CacheEntry::SampledPass);
    }

    #[test]
    fn linear_family_exact() {
        let f = ImplicitF::linear([int(1), int(-1), int(0), int(0), int(0), int(0)]);
        assert_eq!(f.eval(&[3.0, 1.0, 0.0, 0.0, 0.0, 0.0]), 2.0);
        assert_eq!(f.eval_exact(&core::array::from_fn(|i| int(i as i64))).unwrap(), int(-1));
    }
}
