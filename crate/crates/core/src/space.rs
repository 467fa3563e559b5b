//! Quasi-ordered metric spaces, selfmaps and the six distance quantities
//! `M1..M6` attached to a pair of points.
//!
//! Two flavors are supported. [`FiniteSpace`] carries an exact rational
//! distance matrix and an explicit relation matrix; every check on it is
//! exhaustive. [`IntervalSpace`] is a closed real interval with `|x - y|`
//! and either the usual order or the amorphous relation `X x X`; checks on
//! it are grid scans and report `sampled-pass`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;
use serde::Serialize;

use crate::check::{CheckResult, GridConfig, Verdict, Witness};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::scalar::ScalarFn;

/// Point-equality tolerance on interval spaces.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    Usual,
    Amorphous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    dist: Vec<Vec<Rational>>,
    leq: Vec<Vec<bool>>,
}

impl FiniteSpace {
    /// Rejects non-square or mismatched matrices and negative entries.
    /// Metric and quasi-order axioms are left to [`validate_space`].
    pub fn new(dist: Vec<Vec<Rational>>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::MalformedSpace("empty point set".into()));
        }
        if let Some(i) = dist.iter().position(|row| row.len() != n) {
            return Err(Error::MalformedSpace(format!("dist row {i} has wrong length")));
        }
        if leq.len() != n {
            return Err(Error::MalformedSpace("leq has wrong number of rows".into()));
        }
        if let Some(i) = leq.iter().position(|row| row.len() != n) {
            return Err(Error::MalformedSpace(format!("leq row {i} has wrong length")));
        }
        for (i, row) in dist.iter().enumerate() {
            if let Some(j) = row.iter().position(|d| d < &Rational::zero()) {
                return Err(Error::MalformedSpace(format!("negative distance at ({i}, {j})")));
            }
        }
        Ok(FiniteSpace { dist, leq })
    }

    /// Points on the rational line with `d = |p_i - p_j|`.
    pub fn on_line(positions: &[Rational], leq: Vec<Vec<bool>>) -> Result<Self> {
        let dist = positions
            .iter()
            .map(|a| positions.iter().map(|b| abs(&(a - b))).collect())
            .collect();
        Self::new(dist, leq)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn dist_matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn leq_matrix(&self) -> &[Vec<bool>] {
        &self.leq
    }

    /// Same distances, relation `X x X`.
    pub fn amorphous(&self) -> FiniteSpace {
        let n = self.len();
        FiniteSpace {
            dist: self.dist.clone(),
            leq: alloc::vec![alloc::vec![true; n]; n],
        }
    }
}

pub(crate) fn abs(r: &Rational) -> Rational {
    if r < &Rational::zero() {
        -r.clone()
    } else {
        r.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalSpace {
    pub lower: f64,
    pub upper: f64,
    pub order: OrderKind,
}

impl IntervalSpace {
    pub fn new(lower: f64, upper: f64, order: OrderKind) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::MalformedSpace(format!("bad interval [{lower}, {upper}]")));
        }
        Ok(IntervalSpace { lower, upper, order })
    }

    pub fn leq(&self, x: f64, y: f64) -> bool {
        match self.order {
            OrderKind::Usual => x <= y,
            OrderKind::Amorphous => true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower - TOL && x <= self.upper + TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceModel {
    Finite(FiniteSpace),
    Interval(IntervalSpace),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Real(f64),
}

impl Point {
    pub fn index(self) -> Option<usize> {
        match self {
            Point::Index(i) => Some(i),
            Point::Real(_) => None,
        }
    }

    pub fn real(self) -> Option<f64> {
        match self {
            Point::Real(x) => Some(x),
            Point::Index(_) => None,
        }
    }

    /// Coordinates for witnesses.
    pub fn coord(self) -> f64 {
        match self {
            Point::Index(i) => i as f64,
            Point::Real(x) => x,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Selfmap {
    Finite(Vec<usize>),
    Interval(ScalarFn),
}

impl SpaceModel {
    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (SpaceModel::Finite(s), Point::Index(i)) => *i < s.len(),
            (SpaceModel::Interval(s), Point::Real(x)) => s.contains(*x),
            _ => false,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::NotAPoint(format!("{p:?}")))
        }
    }

    pub fn dist(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (SpaceModel::Finite(s), Point::Index(i), Point::Index(j)) => rational::to_f64(s.dist(*i, *j)),
            (SpaceModel::Interval(_), Point::Real(a), Point::Real(b)) => (a - b).abs(),
            _ => f64::NAN,
        }
    }

    pub fn dist_exact(&self, x: &Point, y: &Point) -> Option<Rational> {
        match (self, x, y) {
            (SpaceModel::Finite(s), Point::Index(i), Point::Index(j)) => Some(s.dist(*i, *j).clone()),
            _ => None,
        }
    }

    pub fn leq(&self, x: &Point, y: &Point) -> bool {
        match (self, x, y) {
            (SpaceModel::Finite(s), Point::Index(i), Point::Index(j)) => s.leq(*i, *j),
            (SpaceModel::Interval(s), Point::Real(a), Point::Real(b)) => s.leq(*a, *b),
            _ => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SpaceModel::Finite(_))
    }

    /// Same metric, amorphous relation.
    pub fn amorphous(&self) -> SpaceModel {
        match self {
            SpaceModel::Finite(s) => SpaceModel::Finite(s.amorphous()),
            SpaceModel::Interval(s) => SpaceModel::Interval(IntervalSpace {
                order: OrderKind::Amorphous,
                ..*s
            }),
        }
    }

    /// Finite spaces: every point in index order. Intervals: the grid samples.
    pub fn sample_points(&self, grid: &GridConfig) -> Vec<Point> {
        match self {
            SpaceModel::Finite(s) => (0..s.len()).map(Point::Index).collect(),
            SpaceModel::Interval(s) => grid.samples(s.lower, s.upper).into_iter().map(Point::Real).collect(),
        }
    }
}

impl Selfmap {
    pub fn apply(&self, x: &Point) -> Point {
        match (self, x) {
            (Selfmap::Finite(t), Point::Index(i)) => Point::Index(t[*i]),
            (Selfmap::Interval(f), Point::Real(v)) => Point::Real(f.eval(*v)),
            (_, p) => *p,
        }
    }
}

/// Checks that `t` is total on the space and maps it into itself (finite:
/// exhaustively; interval: on the grid samples).
pub fn validate_map(space: &SpaceModel, t: &Selfmap, grid: &GridConfig) -> Result<()> {
    match (space, t) {
        (SpaceModel::Finite(s), Selfmap::Finite(table)) => {
            if table.len() != s.len() {
                return Err(Error::MalformedMap(format!(
                    "table has {} entries for {} points",
                    table.len(),
                    s.len()
                )));
            }
            if let Some(i) = table.iter().position(|&v| v >= s.len()) {
                return Err(Error::MalformedMap(format!("T({i}) = {} is not a point", table[i])));
            }
            Ok(())
        }
        (SpaceModel::Interval(s), Selfmap::Interval(f)) => {
            for x in grid.samples(s.lower, s.upper) {
                let y = f.eval(x);
                if !s.contains(y) {
                    return Err(Error::MalformedMap(format!("T({x}) = {y} leaves the interval")));
                }
            }
            Ok(())
        }
        _ => Err(Error::MalformedMap("map flavor does not match the space".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    ZeroSelfDistance,
    Symmetry,
    Separation,
    Triangle,
    Reflexivity,
    Transitivity,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Metric axioms and the quasi-order axioms; exhaustive and exact on finite
/// spaces (one witness per violated instance, in index order).
pub fn validate_space(model: &SpaceModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let s = match model {
        SpaceModel::Finite(s) => s,
        SpaceModel::Interval(i) => {
            if !(i.lower <= i.upper) {
                report.violations.push(Violation {
                    axiom: Axiom::Interval,
                    witness: Vec::new(),
                    detail: format!("lower {} > upper {}", i.lower, i.upper),
                });
            }
            return report;
        }
    };
    let n = s.len();
    let mut push = |axiom, witness: &[usize], detail: String| {
        report.violations.push(Violation {
            axiom,
            witness: witness.to_vec(),
            detail,
        })
    };
    for x in 0..n {
        if !s.dist(x, x).is_zero() {
            push(Axiom::ZeroSelfDistance, &[x], format!("d({x},{x}) = {}", rational::render(s.dist(x, x))));
        }
        if !s.leq(x, x) {
            push(Axiom::Reflexivity, &[x], format!("{x} <= {x} missing"));
        }
        for y in x + 1..n {
            if s.dist(x, y) != s.dist(y, x) {
                push(Axiom::Symmetry, &[x, y], format!("d({x},{y}) != d({y},{x})"));
            }
            if s.dist(x, y).is_zero() || s.dist(y, x).is_zero() {
                push(Axiom::Separation, &[x, y], format!("d({x},{y}) = 0 for distinct points"));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                if x < z && s.dist(x, z) > &(s.dist(x, y) + s.dist(y, z)) {
                    push(
                        Axiom::Triangle,
                        &[x, y, z],
                        format!(
                            "d({x},{z}) = {} > d({x},{y}) + d({y},{z}) = {}",
                            rational::render(s.dist(x, z)),
                            rational::render(&(s.dist(x, y) + s.dist(y, z)))
                        ),
                    );
                }
                if s.leq(x, y) && s.leq(y, z) && !s.leq(x, z) {
                    push(Axiom::Transitivity, &[x, y, z], format!("{x} <= {y} <= {z} but not {x} <= {z}"));
                }
            }
        }
    }
    report
}

/// `(M1, ..., M6) = (d(Tx,Ty), d(x,y), d(x,Tx), d(y,Ty), d(x,Ty), d(Tx,y))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MVector<T> {
    pub m: [T; 6],
}

impl<T: Clone> MVector<T> {
    pub fn m1(&self) -> &T {
        &self.m[0]
    }

    /// `(M2, ..., M6)`.
    pub fn tail(&self) -> [T; 5] {
        [
            self.m[1].clone(),
            self.m[2].clone(),
            self.m[3].clone(),
            self.m[4].clone(),
            self.m[5].clone(),
        ]
    }
}

impl<T> MVector<T>
where
    T: Clone + PartialOrd + core::ops::Add<Output = T>,
{
    /// `M5 <= M2 + M4`, `M6 <= M2 + M3`, `M1 <= M3 + M2 + M4`.
    pub fn triangle_consistent(&self) -> bool {
        let [m1, m2, m3, m4, m5, m6] = &self.m;
        m5 <= &(m2.clone() + m4.clone())
            && m6 <= &(m2.clone() + m3.clone())
            && m1 <= &(m3.clone() + m2.clone() + m4.clone())
    }
}

impl MVector<f64> {
    pub fn as_array(&self) -> [f64; 6] {
        self.m
    }

    fn triangle_consistent_rounded(&self) -> bool {
        let [m1, m2, m3, m4, m5, m6] = self.m;
        let ok = |a: f64, b: f64| crate::check::leq_rounded(a, b);
        ok(m5, m2 + m4) && ok(m6, m2 + m3) && ok(m1, m3 + m2 + m4)
    }
}

impl MVector<Rational> {
    pub fn to_f64(&self) -> MVector<f64> {
        MVector {
            m: core::array::from_fn(|i| rational::to_f64(&self.m[i])),
        }
    }
}

pub fn m_vector(space: &SpaceModel, t: &Selfmap, x: &Point, y: &Point) -> Result<MVector<f64>> {
    if let Some(exact) = m_vector_exact(space, t, x, y)? {
        return Ok(exact.to_f64());
    }
    let (tx, ty) = (t.apply(x), t.apply(y));
    let d = |a: &Point, b: &Point| space.dist(a, b);
    let m = MVector {
        m: [d(&tx, &ty), d(x, y), d(x, &tx), d(y, &ty), d(x, &ty), d(&tx, y)],
    };
    debug_assert!(m.triangle_consistent_rounded(), "{m:?}");
    Ok(m)
}

/// Exact six-tuple on finite spaces (`None` on interval spaces).
pub fn m_vector_exact(space: &SpaceModel, t: &Selfmap, x: &Point, y: &Point) -> Result<Option<MVector<Rational>>> {
    space.check_point(x)?;
    space.check_point(y)?;
    let SpaceModel::Finite(_) = space else {
        return Ok(None);
    };
    let (tx, ty) = (t.apply(x), t.apply(y));
    let d = |a: &Point, b: &Point| space.dist_exact(a, b).expect("finite points");
    let m = MVector {
        m: [d(&tx, &ty), d(x, y), d(x, &tx), d(y, &ty), d(x, &ty), d(&tx, y)],
    };
    debug_assert!(m.triangle_consistent());
    Ok(Some(m))
}

/// `x <= y` implies `Tx <= Ty`: exhaustive on finite spaces, grid pairs on
/// intervals.
pub fn is_increasing(space: &SpaceModel, t: &Selfmap, grid: &GridConfig) -> CheckResult {
    const NAME: &str = "increasing";
    let pts = space.sample_points(grid);
    let mut evals = 0u64;
    for x in &pts {
        let tx = t.apply(x);
        for y in &pts {
            if !space.leq(x, y) {
                continue;
            }
            evals += 1;
            let ty = t.apply(y);
            if !space.leq(&tx, &ty) && (space.is_finite() || space.dist(&tx, &ty) > TOL) {
                return CheckResult::fail(
                    NAME,
                    Witness::new([x.coord(), y.coord()], None, "x <= y but not Tx <= Ty"),
                )
                .with_evaluations(evals);
            }
        }
    }
    let verdict = if space.is_finite() { Verdict::Pass } else { Verdict::SampledPass };
    CheckResult::new(NAME, verdict).with_evaluations(evals)
}

/// `x <= Tx`.
pub fn in_start_set(space: &SpaceModel, t: &Selfmap, x: &Point) -> bool {
    space.leq(x, &t.apply(x))
}

/// `X(T, <=)`: exact on finite spaces, the passing grid samples on intervals.
pub fn start_set(space: &SpaceModel, t: &Selfmap, grid: &GridConfig) -> Vec<Point> {
    space
        .sample_points(grid)
        .into_iter()
        .filter(|x| in_start_set(space, t, x))
        .collect()
}

/// `Fix(T)` on a finite space.
pub fn fixed_points(space: &FiniteSpace, table: &[usize]) -> Vec<usize> {
    (0..space.len()).filter(|&i| table[i] == i).collect()
}

/// Candidate test on any space: exact on finite spaces, `d(z, Tz) <= tol`
/// on intervals.
pub fn is_fixed_point(space: &SpaceModel, t: &Selfmap, z: &Point, tol: f64) -> bool {
    let tz = t.apply(z);
    match space {
        SpaceModel::Finite(_) => tz == *z,
        SpaceModel::Interval(_) => space.dist(z, &tz) <= tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSingleton {
    pub holds: bool,
    /// Distinct comparable fixed points `z <= w`.
    pub witness: Option<(Point, Point)>,
}

/// True iff no two distinct points of `fixset` are comparable. Points of an
/// interval count as distinct when farther apart than [`TOL`].
pub fn is_order_singleton(fixset: &[Point], space: &SpaceModel) -> OrderSingleton {
    for z in fixset {
        for w in fixset {
            let distinct = match space {
                SpaceModel::Finite(_) => z != w,
                SpaceModel::Interval(_) => space.dist(z, w) > TOL,
            };
            if distinct && space.leq(z, w) {
                return OrderSingleton {
                    holds: false,
                    witness: Some((*z, *w)),
                };
            }
        }
    }
    OrderSingleton {
        holds: true,
        witness: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfClosed {
    pub holds: bool,
    /// First index `n` with `x_n <= limit` failing.
    pub witness: Option<usize>,
}

/// For an ascending sequence converging to `limit`: are all terms `<= limit`?
/// Non-ascending input is rejected.
pub fn is_self_closed_on(space: &SpaceModel, seq: &[Point], limit: &Point) -> Result<SelfClosed> {
    for p in seq.iter().chain(core::iter::once(limit)) {
        space.check_point(p)?;
    }
    if let Some(n) = seq.windows(2).position(|w| !space.leq(&w[0], &w[1])) {
        return Err(Error::Precondition(format!("sequence not ascending at index {n}")));
    }
    let witness = seq.iter().position(|x| !space.leq(x, limit));
    Ok(SelfClosed {
        holds: witness.is_none(),
        witness,
    })
}
