//! Exhaustive oracle on finite spaces and random instance generation.
//!
//! The oracle recomputes everything from the distance matrix and the order
//! table in exact rational arithmetic, independently of the pipelines, so the
//! two can be compared instance by instance.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use crate::certificate::Certificate;
use crate::check;
use crate::engine::{self, PicardVerdict, PipelineConfig};
use crate::error::{Error, Result};
use crate::implicit::{f_from_psi, ImplicitF};
use crate::rational::{self, Rational};
use crate::scalar::ScalarFn;
use crate::space::{self, FiniteSpace, Point, Selfmap, SpaceModel};

#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub space: FiniteSpace,
    pub map: Vec<usize>,
    pub certificate: Certificate,
    /// `alpha` when the certificate is `t1 - alpha L*(t2..t6)`; lets the
    /// oracle decide contraction on its own.
    pub psi_factor: Option<Rational>,
    pub config: PipelineConfig,
    pub seed: u64,
}

impl InstanceBundle {
    pub fn model(&self) -> SpaceModel {
        SpaceModel::Finite(self.space.clone())
    }

    pub fn selfmap(&self) -> Selfmap {
        Selfmap::Finite(self.map.clone())
    }
}

/// Exact contraction outcome on one guarded pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub x: usize,
    pub y: usize,
    pub holds: bool,
    /// `d(Tx, Ty)` and the bound `alpha L*`, when the oracle computed them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "end", rename_all = "kebab-case")]
pub enum OrbitEnd {
    /// Reached the fixed point after `steps` applications of `T`.
    Fixed { point: usize, steps: usize },
    /// Entered a cycle of the given length (> 1).
    Cycle { length: usize, steps: usize },
}

impl OrbitEnd {
    pub fn fixed_point(self) -> Option<usize> {
        match self {
            OrbitEnd::Fixed { point, .. } => Some(point),
            OrbitEnd::Cycle { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub fixed_points: Vec<usize>,
    pub start_set: Vec<usize>,
    /// `Tx <= Ty` for every `x <= y`; first violating pair otherwise.
    pub increasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increasing_witness: Option<(usize, usize)>,
    pub contraction: Vec<PairOutcome>,
    pub contraction_holds: bool,
    pub orbits: Vec<(usize, OrbitEnd)>,
    pub order_unique: bool,
    /// Increasing map and contraction on every guarded pair.
    pub hypotheses_hold: bool,
    /// Every start reaches a fixed point within `|X|` steps and no two
    /// distinct fixed points are comparable.
    pub conclusion_holds: bool,
}

fn l_star(t: [&Rational; 5]) -> Rational {
    let half = (t[3] + t[4]) / rational::int(2);
    [t[0].clone(), t[1].clone(), t[2].clone(), half]
        .into_iter()
        .max()
        .expect("four values")
}

/// Exhaustive report for an instance.
pub fn brute_force(inst: &InstanceBundle) -> OracleReport {
    let s = &inst.space;
    let t = &inst.map;
    let n = s.len();
    let d = |i: usize, j: usize| s.dist(i, j);
    let le = |i: usize, j: usize| s.leq(i, j);

    let fixed_points: Vec<usize> = (0..n).filter(|&i| t[i] == i).collect();
    let start_set: Vec<usize> = (0..n).filter(|&i| le(i, t[i])).collect();

    let mut increasing_witness = None;
    'inc: for x in 0..n {
        for y in 0..n {
            if le(x, y) && !le(t[x], t[y]) {
                increasing_witness = Some((x, y));
                break 'inc;
            }
        }
    }

    let mut contraction = Vec::new();
    let sp = matches!(inst.certificate, Certificate::GeneralizedSp(_));
    for x in 0..n {
        for y in 0..n {
            let guarded = if sp { t[x] != t[y] } else { le(x, y) && x != y };
            if !guarded {
                continue;
            }
            let m = [d(t[x], t[y]), d(x, y), d(x, t[x]), d(y, t[y]), d(x, t[y]), d(t[x], y)];
            let outcome = match &inst.psi_factor {
                Some(alpha) => {
                    let rhs = alpha * l_star([m[1], m[2], m[3], m[4], m[5]]);
                    PairOutcome {
                        x,
                        y,
                        holds: *m[0] <= rhs,
                        lhs: Some(rational::render(m[0])),
                        rhs: Some(rational::render(&rhs)),
                    }
                }
                None => {
                    let mv = space::MVector { m: m.map(Clone::clone) };
                    let holds = inst
                        .certificate
                        .holds_exact(&mv)
                        .unwrap_or_else(|| inst.certificate.holds(&mv.to_f64()));
                    PairOutcome {
                        x,
                        y,
                        holds,
                        lhs: None,
                        rhs: None,
                    }
                }
            };
            contraction.push(outcome);
        }
    }
    let contraction_holds = contraction.iter().all(|p| p.holds);

    let orbits: Vec<(usize, OrbitEnd)> = start_set.iter().map(|&x| (x, follow(t, x))).collect();

    let order_unique = fixed_points
        .iter()
        .all(|&z| fixed_points.iter().all(|&w| z == w || !le(z, w)));
    let increasing = increasing_witness.is_none();
    let conclusion_holds = order_unique
        && orbits
            .iter()
            .all(|(_, e)| matches!(e, OrbitEnd::Fixed { steps, .. } if *steps <= n));
    OracleReport {
        fixed_points,
        start_set,
        increasing,
        increasing_witness,
        contraction,
        contraction_holds,
        orbits,
        order_unique,
        hypotheses_hold: increasing && contraction_holds,
        conclusion_holds,
    }
}

/// Follows `x, Tx, T^2 x, ...` until a point repeats.
fn follow(t: &[usize], x0: usize) -> OrbitEnd {
    let mut first_seen = alloc::vec![usize::MAX; t.len()];
    let mut x = x0;
    let mut k = 0;
    loop {
        if t[x] == x {
            return OrbitEnd::Fixed { point: x, steps: k };
        }
        if first_seen[x] != usize::MAX {
            return OrbitEnd::Cycle {
                length: k - first_seen[x],
                steps: k,
            };
        }
        first_seen[x] = k;
        x = t[x];
        k += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub agree: bool,
    pub pipeline_hypotheses: bool,
    pub oracle_hypotheses: bool,
    pub oracle_conclusion: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
}

const HYPOTHESIS_STAGES: [&str; 5] = ["space-axioms", "selfmap", "increasing", "start-set", "contraction"];

/// Runs the implicit pipeline from every start of `X(T, <=)` and compares
/// with the oracle: the hypothesis verdicts must match, and the pipeline's
/// fixed point (or the bare orbit's terminal, when the pipeline stopped
/// early) must equal the oracle terminal for every start. `f` should be the
/// instance certificate; its property cache is reused across starts.
pub fn agreement(inst: &InstanceBundle, f: &mut ImplicitF, report: &OracleReport) -> (Agreement, Vec<PicardVerdict>) {
    let model = inst.model();
    let t = inst.selfmap();
    let mut mismatches = Vec::new();
    let mut verdicts = Vec::new();
    let mut pipeline_hyp = true;
    for (x, end) in &report.orbits {
        let v = engine::run_theorem2(&model, &t, f, Point::Index(*x), &inst.config);
        match v.rejected_at() {
            Some(stage) if HYPOTHESIS_STAGES.contains(&stage) => pipeline_hyp = false,
            Some(stage) => mismatches.push(format!("start {x}: rejected at certificate stage {stage}")),
            None => {}
        }
        let reached = match (&v.trace, v.rejected_at()) {
            (Some(_), _) => v.fixed_point.and_then(Point::index),
            (None, _) => {
                let tr = engine::picard_orbit(&model, &t, Point::Index(*x), inst.config.max_iter, 0.0);
                tr.flags
                    .terminated_at_fixed_point
                    .then(|| tr.limit_candidate.and_then(Point::index))
                    .flatten()
            }
        };
        if reached != end.fixed_point() {
            mismatches.push(format!("start {x}: pipeline {reached:?}, oracle {:?}", end.fixed_point()));
        }
        if report.hypotheses_hold && v.order_unique.is_some_and(|u| u != report.order_unique) {
            mismatches.push(format!("start {x}: order-uniqueness disagrees"));
        }
        verdicts.push(v);
    }
    if report.orbits.is_empty() {
        // no start: compare the hypothesis stages on their own
        let model_ok = space::validate_space(&model).is_valid();
        let inc = space::is_increasing(&model, &t, &inst.config.checks.grid).passed();
        let cert = Certificate::Implicit(f.clone());
        let pairs = crate::certificate::default_pairs(&model, &inst.config.checks.grid);
        let con = crate::certificate::verify_contraction_on_pairs(&model, &t, &cert, &pairs).passed();
        pipeline_hyp = model_ok && inc && con;
    }
    if pipeline_hyp != report.hypotheses_hold {
        mismatches.push(format!(
            "hypotheses: pipeline {pipeline_hyp}, oracle {}",
            report.hypotheses_hold
        ));
    }
    let a = Agreement {
        agree: mismatches.is_empty(),
        pipeline_hypotheses: pipeline_hyp,
        oracle_hypotheses: report.hypotheses_hold,
        oracle_conclusion: report.conclusion_holds,
        mismatches,
    };
    (a, verdicts)
}

/// Random instance on `n <= 20` points at distinct rational positions on the
/// line. The order is the reflexive-transitive closure of a random DAG with
/// edge probability `density` (edges go from lower to higher index). `T` is
/// built increasing by assigning images in index order, preferring images
/// close to a random sink (within `factor` times the distance) that keep the
/// contraction `d(Tx, Ty) <= factor L*` on the pairs fixed so far. The
/// certificate is `t1 - factor L*(t2..t6)`.
pub fn random_instance(n: usize, density: f64, factor: f64, seed: u64) -> Result<InstanceBundle> {
    if n == 0 || n > 20 {
        return Err(Error::Precondition(format!("n = {n} outside 1..=20")));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Precondition(format!("density {density} outside [0, 1]")));
    }
    let alpha = rational::from_f64_shortest(factor)
        .filter(|a| a > &Rational::zero() && a < &Rational::one())
        .ok_or_else(|| Error::Precondition(format!("factor {factor} outside (0, 1)")))?;
    let psi = ScalarFn::linear(alpha.clone());
    let f = f_from_psi(&psi)?;
    let mut rng = check::rng(seed);
    const ATTEMPTS: usize = 100;
    for _ in 0..ATTEMPTS {
        let positions = distinct_positions(n, &mut rng);
        let leq = random_closure(n, density, &mut rng);
        let space = FiniteSpace::on_line(&positions, leq)?;
        if let Some(map) = assign_map(&space, &alpha, &mut rng) {
            return Ok(InstanceBundle {
                space,
                map,
                certificate: Certificate::Implicit(f),
                psi_factor: Some(alpha),
                config: PipelineConfig {
                    seed,
                    ..PipelineConfig::default()
                },
                seed,
            });
        }
    }
    Err(Error::Infeasible { attempts: ATTEMPTS })
}

fn distinct_positions(n: usize, rng: &mut impl Rng) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    while out.len() < n {
        let p = rational::ratio(rng.random_range(0..8 * n as i64), rng.random_range(1..=4));
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn random_closure(n: usize, density: f64, rng: &mut impl Rng) -> Vec<Vec<bool>> {
    let mut leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                leq[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    leq
}

fn assign_map(s: &FiniteSpace, alpha: &Rational, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let n = s.len();
    let sink = rng.random_range(0..n);
    let mut t: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        // predecessors y <= x all have smaller index, so T(y) is known
        let preds: Vec<usize> = (0..x).filter(|&y| s.leq(y, x)).collect();
        let monotone: Vec<usize> = (0..n)
            .filter(|&c| preds.iter().all(|&y| s.leq(t[y], c)))
            .filter(|&c| c != x || preds.iter().all(|&y| s.leq(t[y], x)))
            .collect();
        if monotone.is_empty() {
            return None;
        }
        let contracting: Vec<usize> = monotone
            .iter()
            .copied()
            .filter(|&c| preds.iter().all(|&y| pair_contracts(s, alpha, y, t[y], x, c)))
            .collect();
        let pool = if contracting.is_empty() { &monotone } else { &contracting };
        let reach = alpha * s.dist(x, sink);
        let near: Vec<usize> = pool.iter().copied().filter(|&c| s.dist(c, sink) <= &reach).collect();
        let choice = if !near.is_empty() && rng.random::<f64>() < 0.8 {
            *near.choose(rng).expect("nonempty")
        } else {
            *pool.choose(rng).expect("nonempty")
        };
        t.push(choice);
    }
    Some(t)
}

fn pair_contracts(s: &FiniteSpace, alpha: &Rational, x: usize, tx: usize, y: usize, ty: usize) -> bool {
    let rhs = alpha * l_star([s.dist(x, y), s.dist(x, tx), s.dist(y, ty), s.dist(x, ty), s.dist(tx, y)]);
    s.dist(tx, ty) <= &rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn chain(n: usize) -> FiniteSpace {
        let pos: Vec<_> = (0..n as i64).map(int).collect();
        FiniteSpace::on_line(&pos, (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect()).unwrap()
    }

    fn bundle(space: FiniteSpace, map: Vec<usize>, alpha: Rational) -> InstanceBundle {
        let f = f_from_psi(&ScalarFn::linear(alpha.clone())).unwrap();
        InstanceBundle {
            space,
            map,
            certificate: Certificate::Implicit(f),
            psi_factor: Some(alpha),
            config: PipelineConfig::default(),
            seed: 0,
        }
    }

    #[test]
    fn five_chain_ceil_half() {
        let t: Vec<usize> = (0..5usize).map(|i| i.div_ceil(2)).collect();
        assert_eq!(t, [0, 1, 1, 2, 2]);
        let inst = bundle(chain(5), t, rational::ratio(3, 5));
        let rep = brute_force(&inst);
        assert!(rep.increasing);
        // fixed points 0 and 1 are comparable, and M(0, 1) = (1, 1, 0, 0, 1, 1)
        assert_eq!(rep.fixed_points, [0, 1]);
        assert!(!rep.order_unique);
        assert!(!rep.contraction_holds);
        let bad = rep.contraction.iter().find(|p| !p.holds).unwrap();
        assert_eq!((bad.x, bad.y), (0, 1));
        assert_eq!(rep.start_set, [0, 1]);
        assert!(rep.orbits.iter().all(|(x, e)| e.fixed_point() == Some(*x)));
    }

    #[test]
    fn antichain_identity() {
        let s = FiniteSpace::on_line(
            &[int(0), int(1), int(3)],
            (0..3).map(|i| (0..3).map(|j| i == j).collect()).collect(),
        )
        .unwrap();
        let rep = brute_force(&bundle(s, alloc::vec![0, 1, 2], rational::ratio(1, 2)));
        assert_eq!(rep.fixed_points, [0, 1, 2]);
        assert!(rep.order_unique && rep.contraction.is_empty() && rep.conclusion_holds);
    }

    #[test]
    fn two_cycle() {
        let inst = bundle(chain(2), alloc::vec![1, 0], rational::ratio(1, 2));
        let rep = brute_force(&inst);
        assert!(rep.fixed_points.is_empty());
        assert!(!rep.hypotheses_hold);
        assert_eq!(rep.orbits, [(0, OrbitEnd::Cycle { length: 2, steps: 2 })]);
    }

    #[test]
    fn single_point_instance() {
        let inst = random_instance(1, 0.5, 0.5, 3).unwrap();
        let rep = brute_force(&inst);
        assert!(rep.hypotheses_hold && rep.conclusion_holds);
        assert_eq!(rep.fixed_points, [0]);
    }

    #[test]
    fn generated_maps_are_increasing() {
        for seed in 0..40 {
            let inst = random_instance(12, 0.3, 0.5, seed).unwrap();
            assert!(space::validate_space(&inst.model()).is_valid());
            assert!(brute_force(&inst).increasing, "seed {seed}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_instance(12, 0.3, 0.5, 7).unwrap();
        let b = random_instance(12, 0.3, 0.5, 7).unwrap();
        assert_eq!(a.map, b.map);
        assert_eq!(a.space, b.space);
    }

    #[test]
    fn density_zero_is_antichain() {
        let inst = random_instance(8, 0.0, 0.5, 1).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(inst.space.leq(i, j), i == j);
            }
        }
    }

    #[test]
    fn agreement_on_small_instances() {
        let mut f = f_from_psi(&ScalarFn::linear_f64(0.5)).unwrap();
        let cfg = crate::check::CheckConfig {
            trials: 64,
            ..Default::default()
        };
        for seed in 0..10 {
            let mut inst = random_instance(6, 0.4, 0.5, seed).unwrap();
            inst.config.checks = cfg.clone();
            let rep = brute_force(&inst);
            let (a, _) = agreement(&inst, &mut f, &rep);
            assert!(a.agree, "seed {seed}: {:?}", a.mismatches);
            if rep.hypotheses_hold {
                assert!(rep.conclusion_holds);
            }
        }
    }
}
