//! Contraction evidence for a selfmap, checked pair by pair.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::check::{self, CheckResult, GridConfig, Verdict, Witness};
use crate::implicit::sp::SpCertificate;
use crate::implicit::ImplicitF;
use crate::rational::Rational;
use crate::scalar::{self, ScalarFn};
use crate::space::{self, MVector, Point, Selfmap, SpaceModel};

#[derive(Debug, Clone)]
pub enum Certificate {
    /// `d(Tx, Ty) <= phi(d(x, y))` for `x <= y`.
    Phi(ScalarFn),
    /// `d(Tx, Ty) <= psi(L*(M2, ..., M6))` for `x <= y`, `x != y`.
    PsiExplicit(ScalarFn),
    /// `F(M) <= 0` for `x <= y`, `x != y`.
    Implicit(ImplicitF),
    /// `F(M) in P` whenever `Tx != Ty`.
    GeneralizedSp(SpCertificate),
}

impl Certificate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Certificate::Phi(_) => "phi",
            Certificate::PsiExplicit(_) => "psi",
            Certificate::Implicit(_) => "implicit",
            Certificate::GeneralizedSp(_) => "sp",
        }
    }

    pub fn name(&self) -> String {
        match self {
            Certificate::Phi(f) | Certificate::PsiExplicit(f) => String::from(f.name()),
            Certificate::Implicit(f) => String::from(f.name()),
            Certificate::GeneralizedSp(c) => String::from(c.name()),
        }
    }

    /// Whether the pair `(x, y)` is subject to the condition.
    pub fn guard(&self, space: &SpaceModel, t: &Selfmap, x: &Point, y: &Point) -> bool {
        match self {
            Certificate::Phi(_) => space.leq(x, y),
            Certificate::PsiExplicit(_) | Certificate::Implicit(_) => space.leq(x, y) && !same_point(space, x, y),
            Certificate::GeneralizedSp(_) => !same_point(space, &t.apply(x), &t.apply(y)),
        }
    }

    /// The condition on a six-tuple, with rounding slack on doubles.
    pub fn holds(&self, m: &MVector<f64>) -> bool {
        let [m1, m2, m3, m4, m5, m6] = m.m;
        match self {
            Certificate::Phi(phi) => check::leq_rounded(m1, phi.eval(m2)),
            Certificate::PsiExplicit(psi) => {
                check::leq_rounded(m1, psi.eval(scalar::eval_lstar(&m2, &m3, &m4, &m5, &m6)))
            }
            Certificate::Implicit(f) => {
                let scale = m.m.iter().cloned().fold(1.0, f64::max);
                f.eval(&m.m) <= check::ROUNDING * scale
            }
            Certificate::GeneralizedSp(c) => c.in_p(&m.m),
        }
    }

    /// Exact condition; `None` when the certificate has no exact path.
    pub fn holds_exact(&self, m: &MVector<Rational>) -> Option<bool> {
        let [m1, m2, m3, m4, m5, m6] = &m.m;
        match self {
            Certificate::Phi(phi) => Some(m1 <= &phi.eval_exact(m2)?),
            Certificate::PsiExplicit(psi) => {
                Some(m1 <= &psi.eval_exact(&scalar::eval_lstar(m2, m3, m4, m5, m6))?)
            }
            Certificate::Implicit(f) => Some(f.eval_exact(&m.m)? <= Rational::zero()),
            Certificate::GeneralizedSp(_) => None,
        }
    }

    /// `(lhs, rhs)` of an explicit bound, for reports.
    pub fn sides(&self, m: &MVector<f64>) -> (f64, f64) {
        let [m1, m2, m3, m4, m5, m6] = m.m;
        match self {
            Certificate::Phi(phi) => (m1, phi.eval(m2)),
            Certificate::PsiExplicit(psi) => (m1, psi.eval(scalar::eval_lstar(&m2, &m3, &m4, &m5, &m6))),
            Certificate::Implicit(f) => (f.eval(&m.m), 0.0),
            Certificate::GeneralizedSp(c) => (c.eval(&m.m), 0.0),
        }
    }
}

fn same_point(space: &SpaceModel, x: &Point, y: &Point) -> bool {
    match space {
        SpaceModel::Finite(_) => x == y,
        SpaceModel::Interval(_) => x.coord() == y.coord(),
    }
}

/// Pairs for the contraction scan: every ordered pair on finite spaces, grid
/// pairs on intervals.
pub fn default_pairs(space: &SpaceModel, grid: &GridConfig) -> Vec<(Point, Point)> {
    let pts = space.sample_points(grid);
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for x in &pts {
        for y in &pts {
            out.push((*x, *y));
        }
    }
    out
}

/// The certificate's condition on every guarded pair. Exact and exhaustive
/// (`pass`) on finite spaces when the certificate evaluates exactly;
/// `sampled-pass` otherwise; `vacuous` if no pair is guarded.
pub fn verify_contraction_on_pairs(
    space: &SpaceModel,
    t: &Selfmap,
    cert: &Certificate,
    pairs: &[(Point, Point)],
) -> CheckResult {
    const NAME: &str = "contraction";
    let mut checked = 0u64;
    let mut exact_only = true;
    for (x, y) in pairs {
        if !cert.guard(space, t, x, y) {
            continue;
        }
        checked += 1;
        let exact = match space::m_vector_exact(space, t, x, y) {
            Ok(Some(m)) => cert.holds_exact(&m),
            Ok(None) => None,
            Err(e) => return CheckResult::new(NAME, Verdict::Fail).with_note(format!("{e}")),
        };
        let ok = match exact {
            Some(b) => b,
            None => {
                exact_only = false;
                let m = space::m_vector(space, t, x, y).expect("points checked above");
                cert.holds(&m)
            }
        };
        if !ok {
            let m = space::m_vector(space, t, x, y).expect("points checked above");
            let (lhs, rhs) = cert.sides(&m);
            let mut at = alloc::vec![x.coord(), y.coord()];
            at.extend_from_slice(&m.m);
            return CheckResult::fail(
                NAME,
                Witness::new(at, Some(lhs - rhs), format!("{} condition violated (x, y, M)", cert.kind_name())),
            )
            .with_evaluations(checked);
        }
    }
    let verdict = if checked == 0 {
        Verdict::Vacuous
    } else if space.is_finite() && exact_only && pairs.len() == space_pairs(space) {
        Verdict::Pass
    } else {
        Verdict::SampledPass
    };
    CheckResult::new(NAME, verdict).with_evaluations(checked)
}

fn space_pairs(space: &SpaceModel) -> usize {
    match space {
        SpaceModel::Finite(s) => s.len() * s.len(),
        SpaceModel::Interval(_) => usize::MAX,
    }
}
