//! H-representation polytope algebra and invariant-set computation.
//!
//! Conventions
//! - A polytope is `{x | A x ≤ b}` with finite `b` and no all-zero rows of
//!   `A`. Emptiness and boundedness are decided by LPs ([`simplex`]).
//! - Exact vertex-based operations (Minkowski sums, vertex enumeration,
//!   hulls) are provided for dim ≤ 3; everything the invariant-set pipeline
//!   needs in higher dimensions goes through support functions.
//! - Set equality is mutual containment with slack [`SET_TOL`] on support
//!   values, the LP accuracy floor.
//!
//! All values here are immutable after construction; every operation is a
//! pure function and safe to call concurrently.

mod hull;
mod invariant;
pub(crate) mod simplex;

pub use hull::zonotope_hrep;
pub use invariant::{max_rci, max_rpi, min_rpi_approx, pre_set};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack on support values used for set equality / containment decisions.
pub const SET_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("set is unbounded along the requested direction")]
    Unbounded,
    #[error("set is empty")]
    EmptySet,
    #[error("fixed-point iteration did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("closed-loop matrix is not strictly Schur stable")]
    NotStable,
    #[error("dimension {dim} exceeds the supported maximum {max} for this operation")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("invalid set data: {0}")]
    Invalid(String),
}

/// Convex polytope `{x | A x ≤ b}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PolytopeData", into = "PolytopeData")]
pub struct Polytope {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

/// JSON wire format: `{"A": [[...]], "b": [...]}`.
#[derive(Serialize, Deserialize)]
struct PolytopeData {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl TryFrom<PolytopeData> for Polytope {
    type Error = SetError;
    fn try_from(d: PolytopeData) -> Result<Self, SetError> {
        if d.a.is_empty() {
            return Err(SetError::Invalid("polytope needs at least one row".into()));
        }
        let n = d.a[0].len();
        if d.a.iter().any(|r| r.len() != n) {
            return Err(SetError::Invalid("ragged constraint matrix".into()));
        }
        let a = DMatrix::from_fn(d.a.len(), n, |i, j| d.a[i][j]);
        let b = DVector::from_vec(d.b);
        Polytope::new(a, b)
    }
}

impl From<Polytope> for PolytopeData {
    fn from(p: Polytope) -> Self {
        PolytopeData {
            a: (0..p.a.nrows())
                .map(|i| p.a.row(i).iter().copied().collect())
                .collect(),
            b: p.b.iter().copied().collect(),
        }
    }
}

impl Polytope {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, SetError> {
        if a.nrows() != b.len() {
            return Err(SetError::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(SetError::Invalid("empty constraint matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
            return Err(SetError::Invalid("non-finite entry".into()));
        }
        for i in 0..a.nrows() {
            if a.row(i).amax() == 0.0 {
                return Err(SetError::Invalid(format!("all-zero constraint row {i}")));
            }
        }
        Ok(Self { a, b })
    }

    /// Canonical empty polytope in dimension `dim` (`x₁ ≤ −1 ∧ −x₁ ≤ −1`).
    pub fn empty(dim: usize) -> Self {
        let mut a = DMatrix::zeros(2, dim);
        a[(0, 0)] = 1.0;
        a[(1, 0)] = -1.0;
        Self {
            a,
            b: DVector::from_element(2, -1.0),
        }
    }

    /// Axis-aligned box `‖x‖∞ ≤ r` as 2n rows.
    pub fn inf_ball(dim: usize, r: f64) -> Self {
        BoxSet::centered(dim, r).to_polytope()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b_vector(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim() && {
            let r = &self.a * x - &self.b;
            r.iter().all(|&v| v <= tol)
        }
    }

    pub fn is_empty(&self) -> bool {
        simplex::feasible_point(&self.a, &self.b).is_none()
    }

    /// Support function `max_{x ∈ P} a·x` via one LP.
    pub fn support(&self, dir: &DVector<f64>) -> Result<f64, SetError> {
        if dir.len() != self.dim() {
            return Err(SetError::DimensionMismatch {
                expected: self.dim(),
                found: dir.len(),
            });
        }
        let sol = simplex::maximize(dir, &self.a, &self.b);
        match sol.status {
            simplex::LpStatus::Optimal => Ok(sol.objective),
            simplex::LpStatus::Unbounded => Err(SetError::Unbounded),
            simplex::LpStatus::Infeasible => Err(SetError::EmptySet),
        }
    }

    /// True iff the set is bounded along every axis direction.
    pub fn is_bounded(&self) -> bool {
        for j in 0..self.dim() {
            let mut d = DVector::zeros(self.dim());
            d[j] = 1.0;
            if self.support(&d).is_err() {
                return false;
            }
            d[j] = -1.0;
            if matches!(self.support(&d), Err(SetError::Unbounded)) {
                return false;
            }
        }
        true
    }

    /// Row-concatenation intersection, redundancy-reduced.
    pub fn intersection(&self, other: &Polytope) -> Result<Polytope, SetError> {
        if self.dim() != other.dim() {
            return Err(SetError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut a = DMatrix::zeros(self.num_rows() + other.num_rows(), self.dim());
        a.view_mut((0, 0), (self.num_rows(), self.dim())).copy_from(&self.a);
        a.view_mut((self.num_rows(), 0), (other.num_rows(), self.dim()))
            .copy_from(&other.a);
        let mut b = DVector::zeros(self.num_rows() + other.num_rows());
        b.rows_mut(0, self.num_rows()).copy_from(&self.b);
        b.rows_mut(self.num_rows(), other.num_rows()).copy_from(&other.b);
        Ok(Polytope { a, b }.reduce())
    }

    /// `true` iff `Q ⊆ self`, checked via `support_Q(row) ≤ b_row` for every
    /// row. An empty `Q` is contained in anything.
    pub fn contains_set<S: Support>(&self, q: &S) -> Result<bool, SetError> {
        for i in 0..self.num_rows() {
            let row = self.a.row(i).transpose();
            match q.support_along(&row) {
                Ok(s) => {
                    if s > self.b[i] + SET_TOL {
                        return Ok(false);
                    }
                }
                Err(SetError::EmptySet) => return Ok(true),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }

    /// Normalize rows to unit 2-norm, drop duplicates, then remove rows whose
    /// removal does not change the set (one LP per row).
    pub fn reduce(&self) -> Polytope {
        let n = self.dim();
        let mut rows: Vec<(DVector<f64>, f64)> = Vec::with_capacity(self.num_rows());
        for i in 0..self.num_rows() {
            let r = self.a.row(i).transpose();
            let nrm = r.norm();
            if nrm < 1e-14 {
                continue;
            }
            let r = r / nrm;
            let bi = self.b[i] / nrm;
            let dup = rows
                .iter()
                .any(|(q, bq)| (&r - q).amax() < 1e-12 && (bi - bq).abs() < 1e-12);
            if !dup {
                // A parallel row with a larger offset is dominated.
                if let Some(pos) = rows.iter().position(|(q, _)| (&r - q).amax() < 1e-12) {
                    if bi < rows[pos].1 {
                        rows[pos].1 = bi;
                    }
                    continue;
                }
                rows.push((r, bi));
            }
        }
        if rows.is_empty() {
            // Everything degenerate; the set was effectively R^n or empty.
            return self.clone();
        }
        let mut keep: Vec<bool> = vec![true; rows.len()];
        for i in 0..rows.len() {
            let active: Vec<usize> = (0..rows.len())
                .filter(|&k| keep[k] && k != i)
                .collect();
            if active.is_empty() {
                continue;
            }
            let a = DMatrix::from_fn(active.len(), n, |r, c| rows[active[r]].0[c]);
            let b = DVector::from_fn(active.len(), |r, _| rows[active[r]].1);
            let sol = simplex::maximize(&rows[i].0, &a, &b);
            if sol.status == simplex::LpStatus::Optimal
                && sol.objective <= rows[i].1 + SET_TOL
            {
                keep[i] = false;
            }
        }
        let kept: Vec<usize> = (0..rows.len()).filter(|&i| keep[i]).collect();
        if kept.is_empty() {
            return self.clone();
        }
        Polytope {
            a: DMatrix::from_fn(kept.len(), n, |r, c| rows[kept[r]].0[c]),
            b: DVector::from_fn(kept.len(), |r, _| rows[kept[r]].1),
        }
    }

    /// Image `{M x + t | x ∈ P}` under an invertible affine map.
    pub fn affine_image(&self, m: &DMatrix<f64>, t: &DVector<f64>) -> Result<Polytope, SetError> {
        let minv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| SetError::Invalid("affine image needs an invertible map".into()))?;
        let a = &self.a * &minv;
        let b = &self.b + &a * t;
        Polytope::new(a, b)
    }

    /// Exact Minkowski sum for dim ≤ 3 (vertex sums + hull); outer support
    /// description on the union of both row-normal sets otherwise.
    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope, SetError> {
        if self.dim() != other.dim() {
            return Err(SetError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.dim() <= 3 {
            let vp = self.vertices()?;
            let vq = other.vertices()?;
            let mut sums = Vec::with_capacity(vp.len() * vq.len());
            for p in &vp {
                for q in &vq {
                    sums.push(p + q);
                }
            }
            hull::hull_hrep(&sums, self.dim())
        } else {
            // Documented direction set: all facet normals of both operands.
            let mut rows = Vec::new();
            for src in [&self.a, &other.a] {
                for i in 0..src.nrows() {
                    rows.push(src.row(i).transpose());
                }
            }
            let mut a = DMatrix::zeros(rows.len(), self.dim());
            let mut b = DVector::zeros(rows.len());
            for (i, d) in rows.iter().enumerate() {
                a.row_mut(i).copy_from(&d.transpose());
                b[i] = self.support(d)? + other.support(d)?;
            }
            Ok(Polytope { a, b }.reduce())
        }
    }

    /// Pontryagin difference `self ⊖ Q`: each row tightened by `support_Q`.
    pub fn pontryagin_difference<S: Support>(&self, q: &S) -> Result<Polytope, SetError> {
        let mut b = self.b.clone();
        for i in 0..self.num_rows() {
            let row = self.a.row(i).transpose();
            b[i] -= q.support_along(&row)?;
        }
        Ok(Polytope {
            a: self.a.clone(),
            b,
        }
        .reduce())
    }

    /// Enumerate vertices by solving all dim-subsets of active rows (dim ≤ 3).
    pub fn vertices(&self) -> Result<Vec<DVector<f64>>, SetError> {
        hull::enumerate_vertices(self)
    }

    /// Tight axis-aligned bounding box.
    pub fn bounding_box(&self) -> Result<BoxSet, SetError> {
        let n = self.dim();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for j in 0..n {
            let mut d = DVector::zeros(n);
            d[j] = 1.0;
            hi[j] = self.support(&d)?;
            d[j] = -1.0;
            lo[j] = -self.support(&d)?;
        }
        Ok(BoxSet::new(
            (&lo + &hi) * 0.5,
            (&hi - &lo) * 0.5,
        ))
    }

    /// Uniform sample by rejection from the bounding box.
    pub fn sample_uniform<R: rand::Rng>(&self, rng: &mut R) -> Result<DVector<f64>, SetError> {
        let bb = self.bounding_box()?;
        for _ in 0..100_000 {
            let x = bb.sample_uniform(rng);
            if self.contains_point(&x, 1e-12) {
                return Ok(x);
            }
        }
        Err(SetError::Invalid(
            "rejection sampling failed; set volume too small relative to its bounding box".into(),
        ))
    }
}

/// Support-function access, shared by polytopes and boxes.
pub trait Support {
    fn support_along(&self, dir: &DVector<f64>) -> Result<f64, SetError>;
}

impl Support for Polytope {
    fn support_along(&self, dir: &DVector<f64>) -> Result<f64, SetError> {
        self.support(dir)
    }
}

impl Support for BoxSet {
    fn support_along(&self, dir: &DVector<f64>) -> Result<f64, SetError> {
        if dir.len() != self.dim() {
            return Err(SetError::DimensionMismatch {
                expected: self.dim(),
                found: dir.len(),
            });
        }
        Ok(self.support(dir))
    }
}

/// Axis-aligned box `{center + diag(half_widths) ξ | ‖ξ‖∞ ≤ 1}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoxSet {
    center: DVector<f64>,
    half_widths: DVector<f64>,
}

impl BoxSet {
    pub fn new(center: DVector<f64>, half_widths: DVector<f64>) -> Self {
        assert_eq!(center.len(), half_widths.len());
        assert!(
            half_widths.iter().all(|&h| h >= 0.0),
            "half-widths must be non-negative"
        );
        Self {
            center,
            half_widths,
        }
    }

    /// `r·B∞` centered at the origin.
    pub fn centered(dim: usize, r: f64) -> Self {
        Self::new(DVector::zeros(dim), DVector::from_element(dim, r))
    }

    /// Degenerate box holding a single point.
    pub fn singleton(point: DVector<f64>) -> Self {
        let d = point.len();
        Self::new(point, DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn half_widths(&self) -> &DVector<f64> {
        &self.half_widths
    }

    /// Closed-form support: `c·d + Σⱼ h_j |d_j|`.
    pub fn support(&self, dir: &DVector<f64>) -> f64 {
        let mut s = self.center.dot(dir);
        for j in 0..self.dim() {
            s += self.half_widths[j] * dir[j].abs();
        }
        s
    }

    pub fn contains_point(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && (0..self.dim()).all(|j| (x[j] - self.center[j]).abs() <= self.half_widths[j] + tol)
    }

    /// Equivalent polytope with 2n rows `±e_j·x ≤ ±c_j + h_j`.
    pub fn to_polytope(&self) -> Polytope {
        let n = self.dim();
        let mut a = DMatrix::zeros(2 * n, n);
        let mut b = DVector::zeros(2 * n);
        for j in 0..n {
            a[(2 * j, j)] = 1.0;
            b[2 * j] = self.center[j] + self.half_widths[j];
            a[(2 * j + 1, j)] = -1.0;
            b[2 * j + 1] = -self.center[j] + self.half_widths[j];
        }
        Polytope { a, b }
    }

    /// All 2ⁿ sign-pattern vertices.
    pub fn vertices(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                DVector::from_fn(n, |j, _| {
                    let s = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                    self.center[j] + s * self.half_widths[j]
                })
            })
            .collect()
    }

    pub fn sample_uniform<R: rand::Rng>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| {
            if self.half_widths[j] == 0.0 {
                self.center[j]
            } else {
                rng.gen_range(
                    self.center[j] - self.half_widths[j]..=self.center[j] + self.half_widths[j],
                )
            }
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            center: &self.center * factor,
            half_widths: &self.half_widths * factor.abs(),
        }
    }
}

/// Mutual containment within the LP tolerance.
pub fn set_equal(p: &Polytope, q: &Polytope) -> Result<bool, SetError> {
    Ok(p.contains_set(q)? && q.contains_set(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::prelude::*;

    fn unit_box(dim: usize) -> Polytope {
        Polytope::inf_ball(dim, 1.0)
    }

    #[test]
    fn support_of_unit_ball_along_axis() {
        let p = unit_box(2);
        assert!((p.support(&dvector![1.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn support_of_singleton_origin() {
        // {0} as ±e_j ≤ 0.
        let p = Polytope::inf_ball(2, 0.0);
        for d in [dvector![1.0, 1.0], dvector![-0.3, 2.0], dvector![0.0, -1.0]] {
            assert!(p.support(&d).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn support_of_state_box_diagonal() {
        // ‖x‖∞ ≤ 5, a = (1,1): oracle enumerates the 4 box vertices.
        let p = Polytope::inf_ball(2, 5.0);
        let d = dvector![1.0, 1.0];
        let oracle = BoxSet::centered(2, 5.0)
            .vertices()
            .iter()
            .map(|v| d.dot(v))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((p.support(&d).unwrap() - oracle).abs() < 1e-9);
        assert!((oracle - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_polytope_is_empty() {
        assert!(Polytope::empty(3).is_empty());
        assert!(!unit_box(3).is_empty());
    }

    #[test]
    fn minkowski_with_singleton_is_identity() {
        let p = unit_box(2);
        let zero = Polytope::inf_ball(2, 0.0);
        let s = p.minkowski_sum(&zero).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = dvector![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5f64)];
            assert_eq!(
                p.contains_point(&x, 1e-9),
                s.contains_point(&x, 1e-9),
                "membership differs at {x:?}"
            );
        }
    }

    #[test]
    fn minkowski_of_two_unit_boxes() {
        let s = unit_box(2).minkowski_sum(&unit_box(2)).unwrap();
        let two = Polytope::inf_ball(2, 2.0);
        assert!(set_equal(&s, &two).unwrap());
    }

    #[test]
    fn minkowski_triangle_plus_box_matches_vertex_oracle() {
        // conv{(0,0),(1,0),(0,1)} ⊕ unit box, oracle = hull of vertex sums.
        let tri = Polytope::new(
            dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0],
            dvector![0.0, 0.0, 1.0],
        )
        .unwrap();
        let s = tri.minkowski_sum(&unit_box(2)).unwrap();
        let tri_v = [
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![0.0, 1.0],
        ];
        let mut sums = Vec::new();
        for t in &tri_v {
            for b in BoxSet::centered(2, 1.0).vertices() {
                sums.push(t + b);
            }
        }
        let oracle = hull::hull_hrep(&sums, 2).unwrap();
        assert!(set_equal(&s, &oracle).unwrap());
    }

    #[test]
    fn support_additivity_under_minkowski() {
        let tri = Polytope::new(
            dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 2.0],
            dvector![0.2, 0.4, 1.0],
        )
        .unwrap();
        let q = unit_box(2);
        let s = tri.minkowski_sum(&q).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = dvector![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
            if d.norm() < 1e-3 {
                continue;
            }
            let lhs = s.support(&d).unwrap();
            let rhs = tri.support(&d).unwrap() + q.support(&d).unwrap();
            assert!((lhs - rhs).abs() < 1e-7, "additivity broke along {d:?}");
        }
    }

    #[test]
    fn contains_set_is_reflexive_and_ordered_by_scaling() {
        let p = unit_box(2);
        assert!(p.contains_set(&p).unwrap());
        let big = Polytope::inf_ball(2, 2.0);
        assert!(big.contains_set(&p).unwrap());
        assert!(!p.contains_set(&big).unwrap());
        // Box flavor of the same checks.
        assert!(big.contains_set(&BoxSet::centered(2, 1.0)).unwrap());
        assert!(!p.contains_set(&BoxSet::centered(2, 2.0)).unwrap());
    }

    #[test]
    fn contains_set_partial_order_properties() {
        let p = Polytope::inf_ball(2, 1.0);
        let q = Polytope::new(
            dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0; 1.0, 1.0],
            dvector![1.0, 1.0, 1.0, 1.0, 1.5],
        )
        .unwrap();
        let r = Polytope::inf_ball(2, 3.0);
        // transitivity on a tested triple: q ⊆ p ⊆ r.
        assert!(p.contains_set(&q).unwrap());
        assert!(r.contains_set(&p).unwrap());
        assert!(r.contains_set(&q).unwrap());
        // antisymmetry under mutual containment = set equality.
        let q_reduced = q.reduce();
        assert!(set_equal(&q, &q_reduced).unwrap());
    }

    #[test]
    fn reduce_removes_redundant_rows() {
        // Unit box plus a slack row x1 + x2 ≤ 10.
        let p = Polytope::new(
            dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0; 1.0, 1.0],
            dvector![1.0, 1.0, 1.0, 1.0, 10.0],
        )
        .unwrap();
        let r = p.reduce();
        assert_eq!(r.num_rows(), 4);
        assert!(set_equal(&p, &r).unwrap());
    }

    #[test]
    fn pontryagin_difference_of_boxes() {
        let p = Polytope::inf_ball(2, 5.0);
        let d = p.pontryagin_difference(&BoxSet::centered(2, 1.0)).unwrap();
        assert!(set_equal(&d, &Polytope::inf_ball(2, 4.0)).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let p = Polytope::inf_ball(2, 5.0);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"A\""));
        let q: Polytope = serde_json::from_str(&s).unwrap();
        assert!(set_equal(&p, &q).unwrap());
    }

    #[test]
    fn json_rejects_zero_row() {
        let s = r#"{"A": [[0.0, 0.0]], "b": [1.0]}"#;
        assert!(serde_json::from_str::<Polytope>(s).is_err());
    }

    #[test]
    fn bounding_box_of_triangle() {
        let tri = Polytope::new(
            dmatrix![-1.0, 0.0; 0.0, -1.0; 1.0, 1.0],
            dvector![0.0, 0.0, 1.0],
        )
        .unwrap();
        let bb = tri.bounding_box().unwrap();
        assert!((bb.center() - dvector![0.5, 0.5]).amax() < 1e-9);
        assert!((bb.half_widths() - dvector![0.5, 0.5]).amax() < 1e-9);
    }
}
