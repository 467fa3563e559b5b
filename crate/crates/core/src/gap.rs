//! Gap extraction for semi-Cauchy sequences that are not Cauchy.
//!
//! For such a sequence and a threshold set `Theta` reaching below every
//! positive level there is some `b` in `Theta` for which every tail holds a
//! pair further apart than `b`. With
//!
//! ```text
//! A(j) = {(m, n) : j <= m < n, d(x_m, x_n) > b}
//! m(j) = min Dom A(j),   n(j) = min {n > m(j) : d(x_m(j), x_n) > b}
//! ```
//!
//! the distances `u_j(p, q) = d(x_{m(j)+p}, x_{n(j)+q})` all tend to `b`, and
//! `u_j(0, 0)` does so from above. Everything here works on a finite prefix.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use serde::Serialize;

use crate::check::{self, CheckResult, Verdict, Witness};
use crate::error::{Error, Result};

/// A finite prefix `x_0, ..., x_{N-1}` with a distance oracle.
pub struct SeqWithMetric {
    len: usize,
    dist: Box<dyn Fn(usize, usize) -> f64 + Send + Sync>,
    /// Coordinates when the points are reals; enables linear-time scans.
    coords: Option<Vec<f64>>,
    r: Vec<f64>,
}

impl core::fmt::Debug for SeqWithMetric {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SeqWithMetric")
            .field("len", &self.len)
            .field("reals", &self.coords.is_some())
            .finish()
    }
}

impl SeqWithMetric {
    /// Points on the real line with `d(x, y) = |x - y|`.
    pub fn from_reals(points: Vec<f64>) -> Self {
        let pts = points.clone();
        let dist = Box::new(move |i: usize, j: usize| (pts[i] - pts[j]).abs());
        let r = points.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
        SeqWithMetric {
            len: points.len(),
            dist,
            coords: Some(points),
            r,
        }
    }

    /// Arbitrary metric given by index.
    pub fn from_fn(len: usize, dist: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        let r = (0..len.saturating_sub(1)).map(|i| dist(i, i + 1)).collect();
        SeqWithMetric {
            len,
            dist: Box::new(dist),
            coords: None,
            r,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        (self.dist)(i, j)
    }

    /// `r_i = d(x_i, x_{i+1})`, for `i < N - 1`.
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    /// Restriction to the first `n` points.
    pub fn prefix(&self, n: usize) -> SeqWithMetric {
        let n = n.min(self.len);
        match &self.coords {
            Some(c) => SeqWithMetric::from_reals(c[..n].to_vec()),
            None => {
                // re-borrowing the oracle would tie lifetimes; materialize instead
                let table: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect();
                SeqWithMetric::from_fn(n, move |i, j| table[i][j])
            }
        }
    }

    /// Whether some `n > m` in the prefix has `d(x_m, x_n) > b`, for every `m`.
    fn far_exists(&self, b: f64) -> Vec<bool> {
        let n = self.len;
        let mut out = alloc::vec![false; n];
        match &self.coords {
            Some(c) => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for m in (0..n).rev() {
                    out[m] = hi - c[m] > b || c[m] - lo > b;
                    lo = lo.min(c[m]);
                    hi = hi.max(c[m]);
                }
            }
            None => {
                for (m, slot) in out.iter_mut().enumerate() {
                    *slot = (m + 1..n).any(|k| self.dist(m, k) > b);
                }
            }
        }
        out
    }

    fn first_far_after(&self, m: usize, b: f64) -> Option<usize> {
        (m + 1..self.len).find(|&k| self.dist(m, k) > b)
    }
}

/// The oscillating walk `0 -> 1 -> 0 -> ...` whose `k`-th leg is made of
/// `k` steps of length `1/k`; `len` points starting at 0.
pub fn walk01(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    out.push(0.0);
    let mut k = 1usize;
    'legs: loop {
        for i in 1..=k {
            if out.len() >= len {
                break 'legs;
            }
            let up = i as f64 / k as f64;
            out.push(if k % 2 == 1 { up } else { 1.0 - up });
        }
        k += 1;
    }
    out.truncate(len);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapWitness {
    pub b: f64,
    /// First rank with `r_i < b/3` for every later `i` in the prefix.
    pub j_b: usize,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    /// `[u(0,0), u(0,1), u(1,0), u(1,1)]` per `j`.
    pub u: Vec<[f64; 4]>,
    /// Largest `j` for which `m(j)`, `n(j)` and `u_j` fit in the prefix.
    pub horizon: usize,
    pub prefix: usize,
    /// The convergence claims cannot be judged on this prefix.
    pub limit_unverified: bool,
}

/// `(p, q)` order of the `u` table.
pub const PQ: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GapOutcome {
    Gap(GapWitness),
    /// Every threshold admits a tail (the last decile) with no pair further
    /// apart than it. Lists `(theta, first rank of that tail)`.
    NoGap { tails: Vec<(f64, usize)> },
}

fn tail_start(n: usize) -> usize {
    n - n / 10
}

/// Runs the construction on the first `n` points for the thresholds in
/// `theta` (positive, descending), keeping the first one that shows a gap.
pub fn extract_gap(seq: &SeqWithMetric, theta: &[f64], n: usize) -> Result<GapOutcome> {
    if theta.is_empty() || theta.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::Precondition("theta must be a nonempty list of positive reals".into()));
    }
    if theta.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Precondition("theta must be sorted in descending order".into()));
    }
    let n = n.min(seq.len());
    if n < 10 {
        return Err(Error::Precondition(format!("prefix of {n} points is too short")));
    }
    let owned;
    let seq = if n < seq.len() {
        owned = seq.prefix(n);
        &owned
    } else {
        seq
    };
    let r = seq.r();
    if let Some(i) = r.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Precondition(format!("r_{i} = {} is not positive", r[i])));
    }
    let theta_min = *theta.last().expect("nonempty");
    let tail_r = r[tail_start(r.len())..].iter().cloned().fold(0.0, f64::max);
    if tail_r >= theta_min / 3.0 {
        return Err(Error::Precondition(format!(
            "not semi-Cauchy on the prefix: last-decile max r = {tail_r} >= theta_min/3"
        )));
    }
    let mut tails = Vec::new();
    for &b in theta {
        let far = seq.far_exists(b);
        let last_far = far.iter().rposition(|&f| f);
        let cauchy_from = last_far.map_or(0, |m| m + 1);
        if cauchy_from <= tail_start(n) {
            tails.push((b, cauchy_from));
            continue;
        }
        return Ok(GapOutcome::Gap(build_witness(seq, b, &far)));
    }
    Ok(GapOutcome::NoGap { tails })
}

fn build_witness(seq: &SeqWithMetric, b: f64, far: &[bool]) -> GapWitness {
    let len = seq.len();
    let r = seq.r();
    // next_dom[j] = min {m >= j : far[m]}
    let mut next_dom = alloc::vec![None; len + 1];
    for j in (0..len).rev() {
        next_dom[j] = if far[j] { Some(j) } else { next_dom[j + 1] };
    }
    let (mut ms, mut ns, mut us) = (Vec::new(), Vec::new(), Vec::new());
    let mut cached: Option<(usize, usize)> = None;
    for j in 0..len {
        let Some(m) = next_dom[j] else { break };
        let nn = match cached {
            Some((cm, cn)) if cm == m => cn,
            _ => seq.first_far_after(m, b).expect("far[m] holds"),
        };
        cached = Some((m, nn));
        if nn + 1 >= len {
            break;
        }
        ms.push(m);
        ns.push(nn);
        us.push(PQ.map(|(p, q)| seq.dist(m + p, nn + q)));
    }
    let horizon = ms.len().saturating_sub(1);
    // (2.6): r_i < b/3 for all i >= j_b
    let j_b = r.iter().rposition(|&x| x >= b / 3.0).map_or(0, |i| i + 1);
    let limit_unverified = ms.len() < 10 || j_b + (ms.len() - j_b.min(ms.len())) / 10 > horizon;
    GapWitness {
        b,
        j_b,
        m: ms,
        n: ns,
        u: us,
        horizon,
        prefix: len,
        limit_unverified,
    }
}

impl GapWitness {
    /// Ranks `j` of the last decile of `[j_b, horizon]`.
    pub fn tail_range(&self) -> core::ops::Range<usize> {
        let end = self.m.len();
        let start = self.j_b.min(end);
        (end - (end - start) / 10)..end
    }

    /// `max |u_j(p, q) - b|` over the tail, per `(p, q)`.
    pub fn tail_deviation(&self) -> [f64; 4] {
        let mut dev = [0.0f64; 4];
        for j in self.tail_range() {
            for (k, d) in dev.iter_mut().enumerate() {
                *d = d.max((self.u[j][k] - self.b).abs());
            }
        }
        dev
    }
}

/// Re-checks a witness against the prefix: `b` in `theta`, (2.1), both
/// minimalities, (2.2) and the sandwich from `j_b` on, the four perturbation
/// bounds, `u_j(0, 0) > b`, and `|u_j(p, q) - b| <= tail_tol` on the last
/// decile of `j`.
pub fn verify_witness(seq: &SeqWithMetric, w: &GapWitness, theta: &[f64], tail_tol: f64) -> CheckResult {
    const NAME: &str = "gap-witness";
    let fail = |j: usize, what: &str, value: Option<f64>| {
        CheckResult::fail(NAME, Witness::new([j as f64], value, what))
    };
    if !theta.contains(&w.b) {
        return CheckResult::fail(NAME, Witness::new([w.b], None, "b is not in theta"));
    }
    if w.m.len() != w.n.len() || w.m.len() != w.u.len() || w.prefix > seq.len() {
        return CheckResult::new(NAME, Verdict::Fail).with_note("witness tables are inconsistent");
    }
    let seq = &seq.prefix(w.prefix);
    let r = seq.r();
    let b = w.b;
    let far = seq.far_exists(b);
    let mut evals = 0u64;
    for j in 0..w.m.len() {
        let (m, n) = (w.m[j], w.n[j]);
        // (2.1)
        if !(j <= m && m < n && n + 1 < seq.len()) {
            return fail(j, "ranks violate j <= m(j) < n(j)", None);
        }
        let d = seq.dist(m, n);
        if !(d > b) {
            return fail(j, "d(x_m(j), x_n(j)) <= b", Some(d));
        }
        if let Some(mm) = (j..m).find(|&k| far[k]) {
            return fail(j, &format!("m(j) not minimal: rank {mm} already has a pair beyond b"), None);
        }
        if let Some(nn) = (m + 1..n).find(|&k| seq.dist(m, k) > b) {
            return fail(j, &format!("n(j) not minimal: rank {nn} is already beyond b"), None);
        }
        let u = PQ.map(|(p, q)| seq.dist(m + p, n + q));
        if u != w.u[j] {
            return fail(j, "u table does not match the sequence", None);
        }
        for k in 1..4 {
            let (p, q) = PQ[k];
            if !check::leq_rounded((u[k] - u[0]).abs(), r[m] + r[n]) {
                return fail(j, &format!("perturbation bound fails at (p, q) = ({p}, {q})"), Some(u[k] - u[0]));
            }
        }
        if j >= w.j_b {
            // (2.2) and the sandwich
            if n - m < 2 {
                return fail(j, "n(j) - m(j) < 2", None);
            }
            let before = seq.dist(m, n - 1);
            if before > b {
                return fail(j, "d(x_m(j), x_n(j)-1) > b", Some(before));
            }
            if !check::leq_rounded(u[0], b + r[n - 1]) {
                return fail(j, "u_j(0,0) > b + r_n(j)-1", Some(u[0] - b));
            }
        }
        evals += 1;
    }
    let j_b_ok = r[w.j_b.min(r.len())..].iter().all(|&x| x < b / 3.0);
    if !j_b_ok {
        return CheckResult::fail(NAME, Witness::new([w.j_b as f64], None, "r_i >= b/3 after j_b"));
    }
    let mut result = CheckResult::new(NAME, Verdict::SampledPass).with_evaluations(evals);
    result.push_evidence("horizon", w.horizon as f64);
    if w.limit_unverified {
        return result.with_note("limit-unverified: prefix too short for the convergence claims");
    }
    let dev = w.tail_deviation();
    for (k, d) in dev.iter().enumerate() {
        result.push_evidence(format!("tail-dev-{}{}", PQ[k].0, PQ[k].1), *d);
    }
    let range = w.tail_range();
    let mean = range.clone().map(|j| w.u[j][0] - b).sum::<f64>() / range.len().max(1) as f64;
    result.push_evidence("tail-mean-u00-minus-b", mean);
    if let Some(k) = (0..4).max_by(|&a, &c| dev[a].total_cmp(&dev[c])).filter(|&k| dev[k] > tail_tol) {
        let j = range
            .clone()
            .max_by(|&a, &c| (w.u[a][k] - b).abs().total_cmp(&(w.u[c][k] - b).abs()))
            .expect("nonempty tail");
        let mut f = CheckResult::fail(
            NAME,
            Witness::new(
                [j as f64, PQ[k].0 as f64, PQ[k].1 as f64],
                Some(w.u[j][k] - b),
                format!("|u_j(p,q) - b| exceeds {tail_tol} on the last decile"),
            ),
        )
        .with_evaluations(evals);
        f.evidence = result.evidence;
        return f;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk_gap(n: usize) -> (SeqWithMetric, GapWitness) {
        let seq = SeqWithMetric::from_reals(walk01(n));
        match extract_gap(&seq, &[0.3], n).unwrap() {
            GapOutcome::Gap(w) => (seq, w),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn walk_shape() {
        let w = walk01(8);
        assert_eq!(w, [0.0, 1.0, 0.5, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 0.75]);
    }

    #[test]
    fn walk_gives_verified_witness() {
        let (seq, w) = walk_gap(20_000);
        assert!(!w.limit_unverified);
        assert!(w.u.iter().all(|u| u[0] > 0.3));
        let r = verify_witness(&seq, &w, &[0.3], 0.05);
        assert!(r.passed(), "{r:?}");
        let dev = w.tail_deviation();
        assert!(dev.iter().all(|&d| d < 0.05));
    }

    #[test]
    fn generic_metric_matches_reals() {
        let pts = walk01(2_000);
        let by_fn = {
            let p = pts.clone();
            SeqWithMetric::from_fn(pts.len(), move |i, j| (p[i] - p[j]).abs())
        };
        let a = extract_gap(&SeqWithMetric::from_reals(pts), &[0.3], 2_000).unwrap();
        let b = extract_gap(&by_fn, &[0.3], 2_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn geometric_sequence_has_no_gap() {
        let pts: Vec<f64> = (0..40).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        let out = extract_gap(&SeqWithMetric::from_reals(pts), &[0.5, 0.1, 0.01], 40).unwrap();
        assert!(matches!(out, GapOutcome::NoGap { .. }));
    }

    #[test]
    fn alternating_sequence_is_screened() {
        let pts: Vec<f64> = (0..100).map(|n| (n % 2) as f64).collect();
        let err = extract_gap(&SeqWithMetric::from_reals(pts), &[0.3], 100).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn tampered_witnesses_fail() {
        let (seq, w) = walk_gap(5_000);
        let mut bad = w.clone();
        let j = bad.m.len() / 2;
        bad.m[j] += 1;
        bad.u[j] = PQ.map(|(p, q)| seq.dist(bad.m[j] + p, bad.n[j] + q));
        let r = verify_witness(&seq, &bad, &[0.3], 0.05);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.unwrap().note.contains("minimal"));

        let mut other = w.clone();
        other.b = 0.31;
        assert_eq!(verify_witness(&seq, &other, &[0.3], 0.05).verdict, Verdict::Fail);
    }

    #[test]
    fn theta_preconditions() {
        let seq = SeqWithMetric::from_reals(walk01(1000));
        assert!(extract_gap(&seq, &[0.1, 0.3], 1000).is_err());
        assert!(extract_gap(&seq, &[], 1000).is_err());
        assert!(extract_gap(&seq, &[-0.3], 1000).is_err());
    }
}
