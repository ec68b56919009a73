//! Vertex enumeration and convex hulls at desk scale (dim ≤ 3).
//!
//! Vertices come from brute-force intersection of all dim-subsets of rows;
//! hulls go back to H-representation via monotone chain (2D) or brute facet
//! enumeration over point triples (3D). Zonotopes get an exact H-rep
//! directly from their generators, which avoids vertex blowup entirely.

use nalgebra::{DMatrix, DVector};

use super::{Polytope, SetError};

const VERTEX_TOL: f64 = 1e-7;

/// All vertices of a bounded polytope for dim ≤ 3.
pub(crate) fn enumerate_vertices(p: &Polytope) -> Result<Vec<DVector<f64>>, SetError> {
    let n = p.dim();
    if n > 3 {
        return Err(SetError::DimensionTooLarge { dim: n, max: 3 });
    }
    if !p.is_bounded() {
        return Err(SetError::Unbounded);
    }
    let m = p.num_rows();
    let a = p.a_matrix();
    let b = p.b_vector();
    let mut verts: Vec<DVector<f64>> = Vec::new();
    let mut idx = vec![0usize; n];
    // Iterate over all n-subsets of row indices.
    fn subsets(m: usize, k: usize, start: usize, idx: &mut [usize], pos: usize, f: &mut impl FnMut(&[usize])) {
        if pos == k {
            f(idx);
            return;
        }
        for i in start..m {
            idx[pos] = i;
            subsets(m, k, i + 1, idx, pos + 1, f);
        }
    }
    let mut try_subset = |rows: &[usize]| {
        let sub = DMatrix::from_fn(n, n, |r, c| a[(rows[r], c)]);
        let rhs = DVector::from_fn(n, |r, _| b[rows[r]]);
        if let Some(inv) = sub.try_inverse() {
            if inv.amax() > 1e12 {
                return;
            }
            let v = inv * rhs;
            if p.contains_point(&v, VERTEX_TOL)
                && !verts.iter().any(|w| (w - &v).amax() < VERTEX_TOL)
            {
                verts.push(v);
            }
        }
    };
    subsets(m, n, 0, &mut idx, 0, &mut try_subset);
    if verts.is_empty() {
        return Err(SetError::EmptySet);
    }
    Ok(verts)
}

/// H-representation of the convex hull of `points` (dim ≤ 3).
pub(crate) fn hull_hrep(points: &[DVector<f64>], dim: usize) -> Result<Polytope, SetError> {
    if points.is_empty() {
        return Err(SetError::EmptySet);
    }
    match dim {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Polytope::new(
                DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
                DVector::from_vec(vec![hi, -lo]),
            )
        }
        2 => hull_2d(points),
        3 => hull_3d(points),
        d => Err(SetError::DimensionTooLarge { dim: d, max: 3 }),
    }
}

fn cross2(o: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew monotone chain; degenerate inputs (point/segment) produce a thin
/// box description instead of facet rows.
fn hull_2d(points: &[DVector<f64>]) -> Result<Polytope, SetError> {
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !pts.iter().any(|q| (q - p).amax() < 1e-12) {
            pts.push(p.clone());
        }
    }
    pts.sort_by(|a, b| (a[0], a[1]).partial_cmp(&(b[0], b[1])).unwrap());
    if pts.len() >= 3 {
        let mut lower: Vec<DVector<f64>> = Vec::new();
        for p in &pts {
            while lower.len() >= 2
                && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12
            {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<DVector<f64>> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2
                && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12
            {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() >= 3 {
            let h = lower;
            let k = h.len();
            let mut a = DMatrix::zeros(k, 2);
            let mut b = DVector::zeros(k);
            for i in 0..k {
                let p = &h[i];
                let q = &h[(i + 1) % k];
                // Outward normal of a counter-clockwise edge p→q.
                let nx = q[1] - p[1];
                let ny = p[0] - q[0];
                let nrm = (nx * nx + ny * ny).sqrt();
                a[(i, 0)] = nx / nrm;
                a[(i, 1)] = ny / nrm;
                b[i] = (nx * p[0] + ny * p[1]) / nrm;
            }
            return Polytope::new(a, b);
        }
    }
    // Degenerate hull: box the point set along the axes and, when it is a
    // proper segment, along its direction and normal as well.
    degenerate_hrep(&pts, 2)
}

/// Brute-force facet enumeration: every point triple whose plane supports
/// the whole set contributes a row.
fn hull_3d(points: &[DVector<f64>]) -> Result<Polytope, SetError> {
    let mut pts: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !pts.iter().any(|q| (q - p).amax() < 1e-12) {
            pts.push(p.clone());
        }
    }
    let k = pts.len();
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            for l in (j + 1)..k {
                let u = &pts[j] - &pts[i];
                let v = &pts[l] - &pts[i];
                let mut nrm = DVector::from_vec(vec![
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ]);
                let len = nrm.norm();
                if len < 1e-10 {
                    continue;
                }
                nrm /= len;
                let off = nrm.dot(&pts[i]);
                for cand in [(nrm.clone(), off), (-nrm, -off)] {
                    let supports_all = pts.iter().all(|p| cand.0.dot(p) <= cand.1 + 1e-9);
                    if supports_all
                        && !rows
                            .iter()
                            .any(|(q, bq)| (&cand.0 - q).amax() < 1e-9 && (cand.1 - bq).abs() < 1e-9)
                    {
                        rows.push(cand);
                    }
                }
            }
        }
    }
    if rows.len() < 4 {
        return degenerate_hrep(&pts, 3);
    }
    let a = DMatrix::from_fn(rows.len(), 3, |r, c| rows[r].0[c]);
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Ok(Polytope::new(a, b)?.reduce())
}

/// Interval rows along axes plus, for 2D segments, the segment frame.
fn degenerate_hrep(pts: &[DVector<f64>], dim: usize) -> Result<Polytope, SetError> {
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut dirs: Vec<DVector<f64>> = (0..dim)
        .map(|j| {
            let mut d = DVector::zeros(dim);
            d[j] = 1.0;
            d
        })
        .collect();
    if dim == 2 && pts.len() >= 2 {
        let d = (&pts[pts.len() - 1] - &pts[0]).normalize();
        dirs.push(d.clone());
        dirs.push(DVector::from_vec(vec![-d[1], d[0]]));
    }
    for d in dirs {
        let hi = pts.iter().map(|p| d.dot(p)).fold(f64::NEG_INFINITY, f64::max);
        let lo = pts.iter().map(|p| d.dot(p)).fold(f64::INFINITY, f64::min);
        rows.push((d.clone(), hi));
        rows.push((-d, -lo));
    }
    let a = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r].0[c]);
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Polytope::new(a, b)
}

/// Exact H-representation of the zonotope `{c + G ξ | ‖ξ‖∞ ≤ 1}` for
/// dim ≤ 3. Facet normals come from the generators themselves (2D) or from
/// generator cross products (3D); offsets are closed-form supports.
pub fn zonotope_hrep(center: &DVector<f64>, generators: &DMatrix<f64>) -> Result<Polytope, SetError> {
    let n = center.len();
    if generators.nrows() != n {
        return Err(SetError::DimensionMismatch {
            expected: n,
            found: generators.nrows(),
        });
    }
    let g: Vec<DVector<f64>> = (0..generators.ncols())
        .map(|j| generators.column(j).into_owned())
        .filter(|c| c.amax() > 1e-14)
        .collect();
    let mut normals: Vec<DVector<f64>> = Vec::new();
    match n {
        1 => normals.push(DVector::from_vec(vec![1.0])),
        2 => {
            for gi in &g {
                let d = DVector::from_vec(vec![-gi[1], gi[0]]);
                let len = d.norm();
                if len > 1e-14 {
                    normals.push(d / len);
                }
            }
            if normals.is_empty() {
                // No generators: singleton {c}; box it.
                normals.push(DVector::from_vec(vec![1.0, 0.0]));
                normals.push(DVector::from_vec(vec![0.0, 1.0]));
            } else if normals.len() == 1 {
                // Flat (segment) zonotope: close it along the generator too.
                let d = g[0].normalize();
                normals.push(d);
            }
        }
        3 => {
            for i in 0..g.len() {
                for j in (i + 1)..g.len() {
                    let u = &g[i];
                    let v = &g[j];
                    let c = DVector::from_vec(vec![
                        u[1] * v[2] - u[2] * v[1],
                        u[2] * v[0] - u[0] * v[2],
                        u[0] * v[1] - u[1] * v[0],
                    ]);
                    let len = c.norm();
                    if len > 1e-12 {
                        normals.push(c / len);
                    }
                }
            }
            if normals.len() < 3 {
                // Flat or lower-dimensional: fall back to axis directions.
                for j in 0..3 {
                    let mut d = DVector::zeros(3);
                    d[j] = 1.0;
                    normals.push(d);
                }
            }
        }
        d => return Err(SetError::DimensionTooLarge { dim: d, max: 3 }),
    }
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for nd in normals {
        for d in [nd.clone(), -nd] {
            let mut off = d.dot(center);
            for gi in &g {
                off += d.dot(gi).abs();
            }
            if !rows
                .iter()
                .any(|(q, bq)| (&d - q).amax() < 1e-10 && (off - bq).abs() < 1e-10)
            {
                rows.push((d, off));
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]);
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Polytope::new(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::set_equal;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn vertices_of_unit_square() {
        let p = Polytope::inf_ball(2, 1.0);
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(v.len(), 4);
        for vert in &v {
            assert!((vert[0].abs() - 1.0).abs() < 1e-9);
            assert!((vert[1].abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn vertices_of_cube() {
        let p = Polytope::inf_ball(3, 2.0);
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn hull_round_trips_square() {
        let p = Polytope::inf_ball(2, 1.0);
        let v = enumerate_vertices(&p).unwrap();
        let h = hull_hrep(&v, 2).unwrap();
        assert!(set_equal(&p, &h).unwrap());
    }

    #[test]
    fn hull_3d_round_trips_cube() {
        let p = Polytope::inf_ball(3, 1.0);
        let v = enumerate_vertices(&p).unwrap();
        let h = hull_hrep(&v, 3).unwrap();
        assert!(set_equal(&p, &h).unwrap());
    }

    #[test]
    fn zonotope_unit_generators_is_box() {
        let z = zonotope_hrep(&dvector![0.0, 0.0], &dmatrix![1.0, 0.0; 0.0, 1.0]).unwrap();
        assert!(set_equal(&z, &Polytope::inf_ball(2, 1.0)).unwrap());
    }

    #[test]
    fn zonotope_matches_vertex_hull() {
        let gens = dmatrix![0.5, 0.3, -0.2; 0.1, 0.4, 0.3];
        let c = dvector![0.2, -0.1];
        let z = zonotope_hrep(&c, &gens).unwrap();
        // Oracle: enumerate all sign patterns and hull them.
        let mut pts = Vec::new();
        for mask in 0..8u32 {
            let mut p = c.clone();
            for j in 0..3 {
                let s = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                p += gens.column(j) * s;
            }
            pts.push(p);
        }
        let oracle = hull_hrep(&pts, 2).unwrap();
        assert!(set_equal(&z, &oracle).unwrap());
    }

    #[test]
    fn zonotope_flat_segment() {
        let z = zonotope_hrep(&dvector![0.0, 0.0], &dmatrix![1.0; 1.0]).unwrap();
        assert!(z.contains_point(&dvector![1.0, 1.0], 1e-9));
        assert!(z.contains_point(&dvector![-0.5, -0.5], 1e-9));
        assert!(!z.contains_point(&dvector![0.5, -0.5], 1e-6));
    }
}
