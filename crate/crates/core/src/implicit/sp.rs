//! Generalized certificates `F: R_+^6 -> S` with a distinguished subset `P`
//! of `S` and a locality radius `a(r)` in `(0, r)`.
//!
//! `S` is represented by `f64` values plus a membership predicate for `P`;
//! the checks only ever ask whether a value lies in `P` or in `S \ P`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::check::{self, CheckResult, GridConfig, PropertyReport, Verdict, Witness};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::ScalarFn;

type SixFn = Arc<dyn Fn(&[f64; 6]) -> f64 + Send + Sync>;
type Pred = Arc<dyn Fn(f64) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Membership {
    /// `P = [0, inf)`.
    NonNeg,
    /// `P = (0, inf)`.
    Positive,
    Custom(String, Pred),
}

impl Membership {
    pub fn contains(&self, v: f64) -> bool {
        match self {
            Membership::NonNeg => v >= 0.0,
            Membership::Positive => v > 0.0,
            Membership::Custom(_, p) => p(v),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Membership::NonNeg => "nonneg",
            Membership::Positive => "positive",
            Membership::Custom(n, _) => n,
        }
    }
}

#[derive(Clone)]
pub enum SpKind {
    /// `psi(t2) - t1`.
    Standard(ScalarFn),
    Expr(Expr),
    Custom(SixFn),
}

#[derive(Clone)]
pub struct SpCertificate {
    name: String,
    kind: SpKind,
    pub p: Membership,
    radius: ScalarFn,
}

impl fmt::Debug for SpCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpCertificate")
            .field("name", &self.name)
            .field("p", &self.p.name())
            .field("radius", &self.radius.name())
            .finish()
    }
}

/// Radii at which `a(r) in (0, r)` is enforced on construction.
fn radius_samples() -> Vec<f64> {
    GridConfig::default().positive_samples()
}

impl SpCertificate {
    /// Rejects radius functions with `a(r)` outside `(0, r)` at a sampled `r`.
    pub fn new(name: &str, kind: SpKind, p: Membership, radius: ScalarFn) -> Result<Self> {
        for r in radius_samples() {
            let a = radius.eval(r);
            if !(a > 0.0 && a < r) {
                return Err(Error::InvalidCertificate(format!("a({r}) = {a} is not in (0, {r})")));
            }
        }
        Ok(SpCertificate {
            name: name.to_string(),
            kind,
            p,
            radius,
        })
    }

    /// `S = R`, `P = R_+`, `F(t, u, v, w, p, q) = psi(u) - t`.
    pub fn standard(psi: ScalarFn, radius: ScalarFn) -> Result<Self> {
        let name = format!("psi(u) - t with psi = {}", psi.name());
        Self::new(&name, SpKind::Standard(psi), Membership::NonNeg, radius)
    }

    pub fn expr(body: &str, p: Membership, radius: ScalarFn) -> Result<Self> {
        Self::new(body, SpKind::Expr(Expr::six(body)?), p, radius)
    }

    pub fn custom(
        name: &str,
        f: impl Fn(&[f64; 6]) -> f64 + Send + Sync + 'static,
        p: Membership,
        radius: ScalarFn,
    ) -> Result<Self> {
        Self::new(name, SpKind::Custom(Arc::new(f)), p, radius)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self, r: f64) -> f64 {
        self.radius.eval(r)
    }

    pub fn eval(&self, t: &[f64; 6]) -> f64 {
        match &self.kind {
            SpKind::Standard(psi) => psi.eval(t[1]) - t[0],
            SpKind::Expr(e) => e.eval(t),
            SpKind::Custom(f) => f(t),
        }
    }

    pub fn in_p(&self, t: &[f64; 6]) -> bool {
        self.p.contains(self.eval(t))
    }
}

/// Interior offset for open box endpoints, relative to `a(r)`.
const OPEN_OFFSET: f64 = 1e-12;
/// Points per box axis (endpoints included when closed, offset when open).
const BOX_POINTS: usize = 5;

/// `BOX_POINTS` points of an interval: endpoints (or their interior offsets)
/// plus evenly spaced interior points.
fn axis(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> [f64; BOX_POINTS] {
    let w = hi - lo;
    let lo_pt = if lo_closed { lo } else { lo + OPEN_OFFSET * w.max(f64::MIN_POSITIVE) };
    let hi_pt = if hi_closed { hi } else { hi - OPEN_OFFSET * w.max(f64::MIN_POSITIVE) };
    core::array::from_fn(|i| match i {
        0 => lo_pt,
        i if i == BOX_POINTS - 1 => hi_pt,
        i => lo + w * i as f64 / (BOX_POINTS - 1) as f64,
    })
}

struct BoxScan<'a> {
    c: &'a SpCertificate,
    name: &'static str,
    evals: u64,
}

impl BoxScan<'_> {
    /// `Some(fail)` if `F(t)` lands in `P` where `S \ P` is required.
    fn outside_p(&mut self, t: [f64; 6], note: &str) -> Option<CheckResult> {
        self.evals += 1;
        let v = self.c.eval(&t);
        self.c
            .p
            .contains(v)
            .then(|| CheckResult::fail(self.name, Witness::new(t, Some(v), note)))
    }

    fn done(self, fail: Option<CheckResult>) -> CheckResult {
        let evals = self.evals;
        fail.unwrap_or_else(|| CheckResult::new(self.name, Verdict::SampledPass))
            .with_evaluations(evals)
    }
}

/// Conditions (f01)-(f05) on grids over their stated domains, using the
/// certificate's own `a(r)`. Each box is sampled on a 5-point axis grid with
/// open ends offset by `1e-12 a(r)`; (f02) and (f01) use the positive grid
/// plus random draws.
pub fn check_sp_conditions(c: &SpCertificate, grid: &GridConfig) -> PropertyReport {
    let radii = grid.positive_samples();
    let mut report = PropertyReport::default();

    // (f01): F(w, w, 0, 0, w, w) in S \ P
    let mut s = BoxScan { c, name: "f01", evals: 0 };
    let fail = radii
        .iter()
        .find_map(|&w| s.outside_p([w, w, 0.0, 0.0, w, w], "F(w,w,0,0,w,w) in P"));
    report.checks.push(s.done(fail));

    // (f02): u, v > 0, p <= u + v, F(u, v, v, u, p, 0) in P  =>  u <= v
    let mut evals = 0u64;
    let mut fail = None;
    let uv = grid.samples(0.0, grid.upper);
    let mut rng = check::rng(grid.seed ^ 0xf02);
    'f02: for &u in uv.iter().filter(|&&x| x > 0.0) {
        for &v in uv.iter().step_by(8).filter(|&&x| x > 0.0) {
            for k in 0..4 {
                let p = match k {
                    0 => 0.0,
                    1 => u + v,
                    _ => (u + v) * rng.random::<f64>(),
                };
                evals += 1;
                let t = [u, v, v, u, p, 0.0];
                if c.in_p(&t) && u > v {
                    fail = Some(CheckResult::fail("f02", Witness::new(t, Some(c.eval(&t)), "F in P but u > v")));
                    break 'f02;
                }
            }
        }
    }
    report
        .checks
        .push(fail.unwrap_or_else(|| CheckResult::new("f02", Verdict::SampledPass)).with_evaluations(evals));

    // (f03): u, v in [r, r+a[, u <= v, p <= u + v  =>  S \ P
    let mut s = BoxScan { c, name: "f03", evals: 0 };
    let mut fail = None;
    'f03: for &r in &radii {
        let a = c.radius(r);
        let ax = axis(r, r + a, true, false);
        for &u in &ax {
            for &v in ax.iter().filter(|&&v| u <= v) {
                for p in [0.0, 0.5 * (u + v), u + v] {
                    if let Some(f) = s.outside_p([u, v, v, u, p, 0.0], "F(u,v,v,u,p,0) in P on the (f03) box") {
                        fail = Some(f);
                        break 'f03;
                    }
                }
            }
        }
    }
    report.checks.push(s.done(fail));

    // (f04): t, p, q in ]r-a, r+a[, u in [r, r+a[, v, w in ]0, a[  =>  S \ P
    let mut s = BoxScan { c, name: "f04", evals: 0 };
    let mut fail = None;
    'f04: for &r in radii.iter().step_by(4) {
        let a = c.radius(r);
        let near = axis(r - a, r + a, false, false);
        let up = axis(r, r + a, true, false);
        let small = axis(0.0, a, false, false);
        for &t in &near {
            for &u in &up {
                for &v in &small {
                    for &w in &small {
                        for (&p, &q) in near.iter().zip(near.iter().rev()) {
                            if let Some(f) = s.outside_p([t, u, v, w, p, q], "F in P on the (f04) box") {
                                fail = Some(f);
                                break 'f04;
                            }
                        }
                    }
                }
            }
        }
    }
    report.checks.push(s.done(fail));

    // (f05): t, p in ]r-a, r+a[, u, v, q in ]0, a[  =>  F(t, u, v, r, p, q) in S \ P
    let mut s = BoxScan { c, name: "f05", evals: 0 };
    let mut fail = None;
    'f05: for &r in radii.iter().step_by(4) {
        let a = c.radius(r);
        let near = axis(r - a, r + a, false, false);
        let small = axis(0.0, a, false, false);
        for &t in &near {
            for &p in &near {
                for &u in &small {
                    for (&v, &q) in small.iter().zip(small.iter().rev()) {
                        if let Some(f) = s.outside_p([t, u, v, r, p, q], "F in P on the (f05) box") {
                            fail = Some(f);
                            break 'f05;
                        }
                    }
                }
            }
        }
    }
    report.checks.push(s.done(fail));
    report
}
