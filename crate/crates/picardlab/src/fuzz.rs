//! Pipeline-versus-oracle fuzzing over random finite instances.

use picardlab_core::implicit::{f_from_psi, Property};
use picardlab_core::oracle::{self, OrbitEnd};
use picardlab_core::{CheckConfig, ImplicitF, ScalarFn};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct FuzzConfig {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub density: f64,
    pub factor: f64,
    pub checks: CheckConfig,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            n: 12,
            count: 500,
            seed: 0x5eed,
            density: 0.3,
            factor: 0.5,
            checks: CheckConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzCase {
    pub index: usize,
    pub seed: u64,
    pub agree: bool,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
    pub fixed_points: Vec<usize>,
    /// Longest orbit (applications of `T`) over the start set.
    pub max_steps: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub certificate: Vec<(String, String)>,
    pub agreements: usize,
    pub hypotheses_held: usize,
    /// Instances whose hypotheses hold but whose conclusion fails.
    pub conclusion_failures: usize,
    pub cases: Vec<FuzzCase>,
}

impl FuzzSummary {
    pub fn all_agree(&self) -> bool {
        self.agreements == self.config.count && self.conclusion_failures == 0
    }
}

/// Seed of the `i`-th instance.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Certifies `t1 - factor L*(t2..t6)` once for the whole batch.
pub fn certified(factor: f64, checks: &CheckConfig) -> ImplicitF {
    let mut f = f_from_psi(&ScalarFn::linear_f64(factor)).expect("linear psi with factor < 1 is regressive");
    for p in [Property::Compatible, Property::Almost2Right, Property::Point4, Property::Normal34] {
        f.certify(p, checks);
    }
    f
}

pub fn run(cfg: &FuzzConfig) -> FuzzSummary {
    let f = certified(cfg.factor, &cfg.checks);
    let certificate = [Property::Compatible, Property::Almost2Right, Property::Point4, Property::Normal34]
        .iter()
        .map(|&p| {
            let v = f.cached_result(p).map(|r| r.verdict.as_str().to_string()).unwrap_or_default();
            (p.check_name().to_string(), v)
        })
        .collect();
    let cases: Vec<FuzzCase> = (0..cfg.count)
        .into_par_iter()
        .map(|i| one_case(cfg, &f, i))
        .collect();
    FuzzSummary {
        config: cfg.clone(),
        certificate,
        agreements: cases.iter().filter(|c| c.agree).count(),
        hypotheses_held: cases.iter().filter(|c| c.hypotheses_hold).count(),
        conclusion_failures: cases.iter().filter(|c| c.hypotheses_hold && !c.conclusion_holds).count(),
        cases,
    }
}

fn one_case(cfg: &FuzzConfig, f: &ImplicitF, index: usize) -> FuzzCase {
    let seed = case_seed(cfg.seed, index);
    let mut inst = match oracle::random_instance(cfg.n, cfg.density, cfg.factor, seed) {
        Ok(i) => i,
        Err(e) => {
            return FuzzCase {
                index,
                seed,
                agree: false,
                hypotheses_hold: false,
                conclusion_holds: false,
                fixed_points: Vec::new(),
                max_steps: 0,
                mismatches: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };
    inst.config.checks = cfg.checks.clone();
    let report = oracle::brute_force(&inst);
    let (agreement, _) = oracle::agreement(&inst, &mut f.clone(), &report);
    let max_steps = report
        .orbits
        .iter()
        .map(|(_, e)| match e {
            OrbitEnd::Fixed { steps, .. } | OrbitEnd::Cycle { steps, .. } => *steps,
        })
        .max()
        .unwrap_or(0);
    FuzzCase {
        index,
        seed,
        agree: agreement.agree,
        hypotheses_hold: report.hypotheses_hold,
        conclusion_holds: report.conclusion_holds,
        fixed_points: report.fixed_points,
        max_steps,
        mismatches: agreement.mismatches,
        error: None,
    }
}
