//! Check results, sampling grids and numeric margins shared by every checker.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Margin used for every strict inequality evaluated on doubles. It is
/// scaled down for quantities below one so that conditions near the origin
/// stay decidable: `a < b` is accepted iff `a < b - MARGIN * min(1, |b|)`.
pub const MARGIN: f64 = 1e-9;

/// Slack for non-strict inequalities on doubles (rounding only).
pub const ROUNDING: f64 = 1e-12;

pub fn strictly_less(a: f64, b: f64) -> bool {
    a < b - MARGIN * b.abs().min(1.0)
}

/// `value > 0` with the margin scaled by `scale` (typically the radius `r`).
pub fn strictly_positive(value: f64, scale: f64) -> bool {
    value > MARGIN * scale.abs().min(1.0)
}

pub fn leq_rounded(a: f64, b: f64) -> bool {
    a <= b + ROUNDING * (1.0 + b.abs())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Decided exhaustively (finite spaces, exact arithmetic).
    Pass,
    /// No counterexample among the generated samples; evidence only.
    SampledPass,
    Fail,
    /// Nothing to check (empty guard, generator found no admissible input).
    Vacuous,
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        !matches!(self, Verdict::Fail)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::SampledPass => "sampled-pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Coordinates of the offending sample (point, pair, six-tuple, ...).
    pub at: Vec<f64>,
    pub value: Option<f64>,
    pub note: String,
}

impl Witness {
    pub fn new(at: impl Into<Vec<f64>>, value: Option<f64>, note: impl Into<String>) -> Self {
        Witness {
            at: at.into(),
            value,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Evidence>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn new(check: impl Into<String>, verdict: Verdict) -> Self {
        CheckResult {
            check: check.into(),
            verdict,
            witness: None,
            evaluations: 0,
            evidence: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn fail(check: impl Into<String>, witness: Witness) -> Self {
        let mut r = Self::new(check, Verdict::Fail);
        r.witness = Some(witness);
        r
    }

    pub fn with_evaluations(mut self, n: u64) -> Self {
        self.evaluations = n;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn push_evidence(&mut self, label: impl Into<String>, value: f64) {
        self.evidence.push(Evidence {
            label: label.into(),
            value,
        });
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_ok()
    }

    pub fn evidence(&self, label: &str) -> impl Iterator<Item = f64> + '_ {
        let label = String::from(label);
        self.evidence
            .iter()
            .filter(move |e| e.label == label)
            .map(|e| e.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Info,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
            && !self.findings.iter().any(|f| f.severity == Severity::High)
    }

    pub fn get(&self, check: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }
}

/// Sample layout for scans over an interval: `equispaced` points including
/// both endpoints plus `random` uniform draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub equispaced: usize,
    pub random: usize,
    /// Upper end of scans over `R_+` (radii, arguments of comparison functions).
    pub upper: f64,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            equispaced: 257,
            random: 64,
            upper: 8.0,
            seed: 0x5eed,
        }
    }
}

impl GridConfig {
    /// Equispaced samples of `[lo, hi]` followed by random samples of it.
    pub fn samples(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.equispaced + self.random);
        match self.equispaced {
            0 => {}
            1 => out.push(lo),
            n => out.extend((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)),
        }
        let mut rng = rng(self.seed);
        out.extend((0..self.random).map(|_| lo + (hi - lo) * rng.random::<f64>()));
        out
    }

    /// Samples of `(0, upper]`: the equispaced grid without the origin.
    pub fn positive_samples(&self) -> Vec<f64> {
        self.samples(0.0, self.upper)
            .into_iter()
            .filter(|&t| t > 0.0)
            .collect()
    }
}

/// Parameters for the sequence generators and the sampled checkers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckConfig {
    pub grid: GridConfig,
    /// Sequences generated by the compatibility samplers.
    pub trials: usize,
    pub seed: u64,
    /// Scales `eps` for the "almost" conditions (cofinality searches).
    pub eps_grid: Vec<f64>,
    /// Radii `b` for the 4-point-lim-positive check.
    pub b_grid: Vec<f64>,
    pub families: crate::implicit::family::FamilyParams,
    /// Step cap for sequences that must tend to zero.
    pub max_steps: usize,
    /// Threshold below which a sequence counts as having reached zero.
    pub zero_threshold: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            grid: GridConfig::default(),
            trials: 1000,
            seed: 0x5eed,
            eps_grid: default_eps_grid(),
            b_grid: geometric_grid(1e-4, 8.0, 64),
            families: Default::default(),
            max_steps: 100_000,
            zero_threshold: 1e-4,
        }
    }
}

/// `{1, 1e-1, ..., 1e-6}`.
pub fn default_eps_grid() -> Vec<f64> {
    alloc::vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    #[allow(unused_imports)]
    use num_traits::Float;
    if n == 1 {
        return alloc::vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_scale_near_zero() {
        assert!(strictly_less(0.5e-6, 1e-6));
        assert!(!strictly_less(1e-6 - 1e-17, 1e-6));
        assert!(strictly_less(0.5, 1.0));
        assert!(!strictly_less(1.0 - 1e-12, 1.0));
        assert!(!strictly_positive(0.0, 1.0));
        assert!(strictly_positive(1e-13, 1e-6));
    }

    #[test]
    fn grid_layout() {
        let g = GridConfig::default();
        let s = g.samples(0.0, 8.0);
        assert_eq!(s.len(), 257 + 64);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[32], 1.0);
        assert_eq!(s[256], 8.0);
        assert!(s[257..].iter().all(|&t| (0.0..=8.0).contains(&t)));
        assert_eq!(g.samples(0.0, 8.0), s);
    }

    #[test]
    fn eps_and_geometric_grids() {
        let e = default_eps_grid();
        assert_eq!(e.len(), 7);
        assert!((e[6] - 1e-6).abs() < 1e-18);
        let b = geometric_grid(1e-4, 8.0, 64);
        assert_eq!(b.len(), 64);
        assert!((b[0] - 1e-4).abs() < 1e-18 && (b[63] - 8.0).abs() < 1e-12);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }
}
