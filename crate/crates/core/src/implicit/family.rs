//! Generated j-right and j-point sequence families in `R_+^6`.
//!
//! Coordinate `i != j` approaches `w_i` as `w_i + c_i g(n)` and coordinate
//! `j` either approaches `w_j` strictly from above (j-right) or is pinned at
//! `w_j` (j-point). `g(n)` is the approach rate. The first sequence of every
//! family uses a fixed sign pattern; the others draw `c_i` at random.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use serde::Serialize;

use crate::check;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rate {
    /// `g(n) = rho^n`.
    Geometric(f64),
    /// `g(n) = 1/n`.
    Harmonic,
}

impl Rate {
    pub fn at(self, n: usize) -> f64 {
        match self {
            Rate::Geometric(rho) => rho.powi(n as i32),
            Rate::Harmonic => 1.0 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyParams {
    /// Sequences per family.
    pub count: usize,
    /// Terms per sequence.
    pub len: usize,
    pub rate: Rate,
    /// Largest offset `|c_i|`, relative to `max_i w_i` (absolute when `W = 0`).
    pub max_offset: f64,
    pub seed: u64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            count: 16,
            len: 400,
            rate: Rate::Geometric(0.95),
            max_offset: 0.5,
            seed: 0xfa31,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Right,
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqFamily {
    pub target: [f64; 6],
    /// 1-based coordinate index.
    pub j: usize,
    pub mode: Mode,
    pub rate: Rate,
    /// Offset bound used by the generator; the members satisfy
    /// `|t_i^n - w_i| <= bound * g(n)`.
    pub bound: f64,
    pub sequences: Vec<Vec<[f64; 6]>>,
}

const CANONICAL_SIGNS: [f64; 6] = [-1.0, 1.0, 1.0, 1.0, 1.0, -1.0];

fn scale_of(w: &[f64; 6]) -> f64 {
    let m = w.iter().cloned().fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn generate(w: [f64; 6], j: usize, mode: Mode, p: &FamilyParams) -> Result<SeqFamily> {
    if !(1..=6).contains(&j) {
        return Err(Error::Family(alloc::format!("rank j = {j} outside 1..=6")));
    }
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Family("target must lie in R_+^6".into()));
    }
    let jj = j - 1;
    let bound = p.max_offset * scale_of(&w);
    let mut rng = check::rng(p.seed ^ ((j as u64) << 32) ^ w[0].to_bits());
    let mut sequences = Vec::with_capacity(p.count);
    for k in 0..p.count {
        let mut c = [0.0; 6];
        for (i, ci) in c.iter_mut().enumerate() {
            let raw = if k == 0 {
                CANONICAL_SIGNS[i]
            } else {
                2.0 * rng.random::<f64>() - 1.0
            };
            *ci = if i == jj || w[i] == 0.0 {
                // strictly positive: these coordinates approach from above
                bound * raw.abs().max(1e-3)
            } else {
                bound * raw
            };
        }
        let seq = (1..=p.len)
            .map(|n| {
                let g = p.rate.at(n);
                core::array::from_fn(|i| {
                    if i == jj {
                        return match mode {
                            Mode::Point => w[i],
                            Mode::Right => {
                                let t = w[i] + c[i] * g;
                                if t > w[i] {
                                    t
                                } else {
                                    next_up(w[i])
                                }
                            }
                        };
                    }
                    let t = w[i] + c[i] * g;
                    if c[i] < 0.0 {
                        t.max(w[i] / 2.0)
                    } else {
                        t
                    }
                })
            })
            .collect();
        sequences.push(seq);
    }
    let fam = SeqFamily {
        target: w,
        j,
        mode,
        rate: p.rate,
        bound,
        sequences,
    };
    debug_assert!(fam.is_member());
    Ok(fam)
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        f64::from_bits(x.to_bits() + 1)
    }
}

pub fn make_j_right(w: [f64; 6], j: usize, p: &FamilyParams) -> Result<SeqFamily> {
    generate(w, j, Mode::Right, p)
}

pub fn make_j_point(w: [f64; 6], j: usize, p: &FamilyParams) -> Result<SeqFamily> {
    generate(w, j, Mode::Point, p)
}

impl SeqFamily {
    /// Membership predicate for every emitted term: coordinates in `R_+`,
    /// the j-th coordinate strictly above (j-right) or equal to (j-point)
    /// `w_j`, and every coordinate within the generator's envelope.
    pub fn is_member(&self) -> bool {
        let jj = self.j - 1;
        self.sequences.iter().all(|seq| {
            seq.iter().enumerate().all(|(k, t)| {
                let g = self.rate.at(k + 1);
                let j_ok = match self.mode {
                    Mode::Right => t[jj] > self.target[jj],
                    Mode::Point => t[jj] == self.target[jj],
                };
                j_ok && t.iter().zip(&self.target).enumerate().all(|(i, (&x, &wi))| {
                    let env = self.bound * g;
                    let slack = if i == jj && self.mode == Mode::Right {
                        // bumped to the next float above w_j
                        2.0 * f64::EPSILON * wi.max(f64::MIN_POSITIVE)
                    } else {
                        0.0
                    };
                    x >= 0.0 && (x - wi).abs() <= env + slack + 4.0 * f64::EPSILON * x.max(wi)
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_two_right_pattern() {
        let p = FamilyParams {
            rate: Rate::Harmonic,
            max_offset: 1.0,
            ..FamilyParams::default()
        };
        let fam = make_j_right([1.0, 1.0, 0.0, 0.0, 1.0, 1.0], 2, &p).unwrap();
        assert!(fam.is_member());
        let t = fam.sequences[0][1]; // n = 2
        assert_eq!(t, [0.5, 1.5, 0.5, 0.5, 1.5, 0.5]);
    }

    #[test]
    fn four_point_is_pinned() {
        let fam = make_j_point([1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 4, &FamilyParams::default()).unwrap();
        assert!(fam.is_member());
        assert!(fam.sequences.iter().flatten().all(|t| t[3] == 1.0));
        assert_eq!(fam.sequences.len(), 16);
        assert!(fam.sequences.iter().all(|s| s.len() == 400));
    }

    #[test]
    fn converges_to_target() {
        let w = [0.3, 0.3, 0.0, 0.0, 0.3, 0.3];
        let fam = make_j_right(w, 2, &FamilyParams::default()).unwrap();
        for seq in &fam.sequences {
            let last = seq.last().unwrap();
            for i in 0..6 {
                assert!((last[i] - w[i]).abs() < 1e-8);
            }
            assert!(last[1] > w[1]);
        }
    }

    #[test]
    fn membership_rejects_tampered_family() {
        let mut fam = make_j_right([1.0, 1.0, 0.0, 0.0, 1.0, 1.0], 2, &FamilyParams::default()).unwrap();
        fam.sequences[3][10][1] = 1.0;
        assert!(!fam.is_member());
        let mut fam = make_j_point([1.0, 0.0, 0.0, 1.0, 1.0, 0.0], 4, &FamilyParams::default()).unwrap();
        fam.sequences[0][0][3] = 1.0 + 1e-9;
        assert!(!fam.is_member());
    }

    #[test]
    fn tiny_targets_stay_strictly_right() {
        let b = 1e-300;
        let fam = make_j_right([b, b, 0.0, 0.0, b, b], 2, &FamilyParams::default()).unwrap();
        assert!(fam.is_member());
    }

    #[test]
    fn bad_rank_rejected() {
        assert!(make_j_right([0.0; 6], 7, &FamilyParams::default()).is_err());
        assert!(make_j_point([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1, &FamilyParams::default()).is_err());
    }
}
