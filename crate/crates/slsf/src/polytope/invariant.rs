//! Robust invariant-set computation: one-step robust preimages, maximal and
//! minimal RPI sets for a fixed feedback, and the maximal RCI set via
//! Fourier–Motzkin projection (dim ≤ 3).

use nalgebra::{DMatrix, DVector};

use super::hull::zonotope_hrep;
use super::{set_equal, BoxSet, Polytope, SetError, SET_TOL};

/// Robust one-step preimage `{x | A_cl x + B_w w ∈ P  ∀ w ∈ W}`.
///
/// Each row `a·y ≤ b` of `P` becomes `(a A_cl)·x ≤ b − sup_{w∈W} a·B_w w`.
pub fn pre_set(
    p: &Polytope,
    a_cl: &DMatrix<f64>,
    b_w: &DMatrix<f64>,
    w: &BoxSet,
) -> Result<Polytope, SetError> {
    let n = p.dim();
    if a_cl.nrows() != n || a_cl.ncols() != n {
        return Err(SetError::DimensionMismatch {
            expected: n,
            found: a_cl.nrows(),
        });
    }
    if b_w.nrows() != n || b_w.ncols() != w.dim() {
        return Err(SetError::DimensionMismatch {
            expected: n,
            found: b_w.nrows(),
        });
    }
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut infeasible = false;
    for i in 0..p.num_rows() {
        let a = p.a_matrix().row(i).transpose();
        let tightened = p.b_vector()[i] - w.support(&(b_w.transpose() * &a));
        let new_a = a_cl.transpose() * &a;
        if new_a.amax() < 1e-14 {
            // Row maps to 0·x ≤ rhs: either vacuous or globally infeasible.
            if tightened < -SET_TOL {
                infeasible = true;
            }
            continue;
        }
        rows.push((new_a, tightened));
    }
    if infeasible || rows.is_empty() && p.num_rows() > 0 && infeasible {
        return Ok(Polytope::empty(n));
    }
    if rows.is_empty() {
        // All rows vacuous: preimage is the whole space; encode a huge box.
        return Ok(Polytope::inf_ball(n, 1e12));
    }
    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]);
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Ok(Polytope::new(a, b)?.reduce())
}

/// Maximal RPI set for `x⁺ = A_cl x + B_w w`, `w ∈ W`, inside `x_joint`.
///
/// Fixed-point iteration `Ω_{i+1} = pre_set(Ω_i) ∩ x_joint` from
/// `Ω_0 = x_joint` until mutual containment within the LP tolerance.
pub fn max_rpi(
    a_cl: &DMatrix<f64>,
    x_joint: &Polytope,
    b_w: &DMatrix<f64>,
    w: &BoxSet,
    max_iter: usize,
) -> Result<Polytope, SetError> {
    let mut omega = x_joint.reduce();
    for _ in 0..max_iter {
        let pre = pre_set(&omega, a_cl, b_w, w)?;
        let next = pre.intersection(x_joint)?;
        if next.is_empty() {
            return Err(SetError::EmptySet);
        }
        if set_equal(&next, &omega)? {
            return Ok(next);
        }
        omega = next;
    }
    Err(SetError::NotConverged {
        iterations: max_iter,
    })
}

/// Outer ε-approximation of the minimal RPI set of `x⁺ = A_cl x + B_w w`.
///
/// Finds the smallest `s` with `A_cl^s B_w W ⊆ eps · F_s`, where
/// `F_s = ⊕_{i<s} A_cl^i B_w W`, and returns `(1+eps) F_s`. The disturbance
/// box must be origin-centered. The result is checked to be RPI before it is
/// returned.
pub fn min_rpi_approx(
    a_cl: &DMatrix<f64>,
    b_w: &DMatrix<f64>,
    w: &BoxSet,
    eps: f64,
) -> Result<Polytope, SetError> {
    let n = a_cl.nrows();
    if w.center().amax() > 1e-12 {
        return Err(SetError::Invalid(
            "min_rpi_approx expects an origin-centered disturbance box".into(),
        ));
    }
    let rho = spectral_radius(a_cl);
    if !(rho < 1.0 - 1e-12) {
        return Err(SetError::NotStable);
    }
    // Generator form of B_w W: columns of B_w scaled by the half-widths.
    let base = scaled_generators(b_w, w);
    const S_CAP: usize = 200;
    let mut pow = DMatrix::identity(n, n);
    let mut gens: Vec<DMatrix<f64>> = Vec::new();
    for s in 1..=S_CAP {
        gens.push(&pow * &base);
        pow = a_cl * &pow;
        // F_s as an exact zonotope H-rep, then the containment test
        // support_{A^s B_w W}(row) ≤ eps · b_row for every row.
        let all = hstack(&gens);
        let f_s = zonotope_hrep(&DVector::zeros(n), &all)?;
        let tail = &pow * &base;
        let mut contained = true;
        for i in 0..f_s.num_rows() {
            let row = f_s.a_matrix().row(i).transpose();
            let sup: f64 = (0..tail.ncols())
                .map(|j| row.dot(&tail.column(j).into_owned()).abs())
                .sum();
            if sup > eps * f_s.b_vector()[i] + 1e-14 {
                contained = false;
                break;
            }
        }
        if contained {
            let scaled = Polytope::new(
                f_s.a_matrix().clone(),
                f_s.b_vector() * (1.0 + eps),
            )?
            .reduce();
            // RPI sanity: Ω ⊆ pre_set(Ω).
            let pre = pre_set(&scaled, a_cl, b_w, w)?;
            if !pre.contains_set(&scaled)? {
                return Err(SetError::NotConverged { iterations: s });
            }
            return Ok(scaled);
        }
    }
    Err(SetError::NotConverged { iterations: S_CAP })
}

/// Maximal robust control invariant set inside `x_set` for
/// `x⁺ = A x + B u + B_w w`, `u ∈ u_set`, `w ∈ W` (dim ≤ 3).
///
/// Each step robustly tightens the rows of the current set, forms the
/// `(x,u)` polytope and projects out `u` with Fourier–Motzkin.
pub fn max_rci(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u_set: &Polytope,
    x_set: &Polytope,
    b_w: &DMatrix<f64>,
    w: &BoxSet,
    max_iter: usize,
) -> Result<Polytope, SetError> {
    let n = a.nrows();
    let m = b.ncols();
    if n > 3 {
        return Err(SetError::DimensionTooLarge { dim: n, max: 3 });
    }
    let mut omega = x_set.reduce();
    for _ in 0..max_iter {
        // Rows over (x, u): [A_Ω A, A_Ω B] ≤ b_Ω − sup_w A_Ω B_w w.
        let k = omega.num_rows();
        let mut rows_a = DMatrix::zeros(k + u_set.num_rows(), n + m);
        let mut rows_b = DVector::zeros(k + u_set.num_rows());
        for i in 0..k {
            let ai = omega.a_matrix().row(i).transpose();
            let ax = a.transpose() * &ai;
            let au = b.transpose() * &ai;
            for c in 0..n {
                rows_a[(i, c)] = ax[c];
            }
            for c in 0..m {
                rows_a[(i, n + c)] = au[c];
            }
            rows_b[i] = omega.b_vector()[i] - w.support(&(b_w.transpose() * &ai));
        }
        for i in 0..u_set.num_rows() {
            for c in 0..m {
                rows_a[(k + i, n + c)] = u_set.a_matrix()[(i, c)];
            }
            rows_b[k + i] = u_set.b_vector()[i];
        }
        let mut proj = (rows_a, rows_b);
        for _ in 0..m {
            proj = fourier_motzkin_eliminate_last(&proj.0, &proj.1)?;
        }
        let pre = finish_rows(proj.0, proj.1, n)?;
        let next = pre.intersection(&omega)?;
        if next.is_empty() {
            return Err(SetError::EmptySet);
        }
        if set_equal(&next, &omega)? {
            return Ok(next);
        }
        omega = next;
    }
    Err(SetError::NotConverged {
        iterations: max_iter,
    })
}

/// Eliminate the last coordinate of `{y | A y ≤ b}` by Fourier–Motzkin,
/// reducing the row set afterwards to keep growth in check.
fn fourier_motzkin_eliminate_last(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>), SetError> {
    let cols = a.ncols();
    let last = cols - 1;
    let mut zero_rows: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut pos: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut neg: Vec<(DVector<f64>, f64)> = Vec::new();
    for i in 0..a.nrows() {
        let coeff = a[(i, last)];
        let rest = a.row(i).columns(0, last).transpose();
        if coeff.abs() < 1e-12 {
            zero_rows.push((rest.into_owned(), b[i]));
        } else if coeff > 0.0 {
            pos.push((rest.into_owned() / coeff, b[i] / coeff));
        } else {
            neg.push((rest.into_owned() / -coeff, -b[i] / coeff));
        }
    }
    let mut rows = zero_rows;
    for (ap, bp) in &pos {
        for (an, bn) in &neg {
            // u ≤ bp − ap·x and u ≥ −(bn − an·x) combine to
            // (ap + an)·x ≤ bp + bn... with the sign conventions used here:
            // from c>0: u ≤ bp − ap·x; from c<0 scaled: −u ≤ bn − an·x.
            rows.push((ap + an, bp + bn));
        }
    }
    // Drop rows that became all-zero.
    rows.retain(|(r, rb)| {
        if r.amax() < 1e-12 {
            // 0 ≤ rb must hold or the projection is empty; keep a marker row
            // in that case so downstream emptiness checks see it.
            *rb >= -SET_TOL
        } else {
            true
        }
    });
    if rows.is_empty() {
        return Err(SetError::EmptySet);
    }
    let am = DMatrix::from_fn(rows.len(), last, |r, c| rows[r].0[c]);
    let bv = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Ok((am, bv))
}

fn finish_rows(a: DMatrix<f64>, b: DVector<f64>, dim: usize) -> Result<Polytope, SetError> {
    // Guard against degenerate all-zero rows left by the elimination.
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for i in 0..a.nrows() {
        let r = a.row(i).transpose();
        if r.amax() > 1e-12 {
            rows.push((r, b[i]));
        } else if b[i] < -SET_TOL {
            return Ok(Polytope::empty(dim));
        }
    }
    if rows.is_empty() {
        return Ok(Polytope::inf_ball(dim, 1e12));
    }
    let am = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r].0[c]);
    let bv = DVector::from_fn(rows.len(), |r, _| rows[r].1);
    Ok(Polytope::new(am, bv)?.reduce())
}

fn hstack(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = mats[0].nrows();
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for m in mats {
        out.view_mut((0, c), (rows, m.ncols())).copy_from(m);
        c += m.ncols();
    }
    out
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max)
}

fn scaled_generators(b_w: &DMatrix<f64>, w: &BoxSet) -> DMatrix<f64> {
    let mut g = b_w.clone();
    for j in 0..g.ncols() {
        let h = w.half_widths()[j];
        g.column_mut(j).scale_mut(h);
    }
    g
}
