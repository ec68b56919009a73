//! System-level parameterization: stacked error dynamics, the system-response
//! subspace, disturbance-reachable boxes and exact 1-norm constraint
//! tightening.
//!
//! The stacked error dynamics over a horizon `N` read
//! `Δx = 𝒵𝒜 Δx + 𝒵ℬ Δu + ℰ δ` with `δ = (Δx₀, w₀, …, w_{N−1})`. Closed-loop
//! responses `Δx = Φ_x δ`, `Δu = Φ_u δ` under a causal affine feedback are
//! exactly the block lower-triangular solutions of
//! `[I − 𝒵𝒜, −𝒵ℬ][Φ_x; Φ_u] = ℰ`, and any such solution induces the feedback
//! `𝒦 = Φ_u Φ_x⁻¹`. Worst-case constraint margins over the disturbance box
//! are closed-form 1-norms of the tightening rows, never LPs.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polytope::{pre_set, BoxSet, Polytope, SetError};

#[derive(Debug, Error)]
pub enum SlsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("response diagonal block {block} is singular (rcond {rcond:.3e})")]
    SingularResponse { block: usize, rcond: f64 },
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),
    #[error("terminal set violates the invariance assumption: {0}")]
    TerminalAssumption(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Block lower-triangular matrix with `n_blocks` block rows of height
/// `row_dim` and per-column widths `col_dims` (blocks strictly above the
/// diagonal are identically zero).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockLowerTriangular {
    row_dim: usize,
    col_dims: Vec<usize>,
    /// `blocks[i]` holds the `i+1` blocks of block row `i`, columns `0..=i`.
    blocks: Vec<Vec<DMatrix<f64>>>,
}

impl BlockLowerTriangular {
    /// Zero matrix with uniform `p × q` blocks.
    pub fn zeros(n_blocks: usize, p: usize, q: usize) -> Self {
        Self::zeros_with_cols(p, vec![q; n_blocks])
    }

    pub fn zeros_with_cols(row_dim: usize, col_dims: Vec<usize>) -> Self {
        let blocks = (0..col_dims.len())
            .map(|i| {
                (0..=i)
                    .map(|j| DMatrix::zeros(row_dim, col_dims[j]))
                    .collect()
            })
            .collect();
        Self {
            row_dim,
            col_dims,
            blocks,
        }
    }

    pub fn n_blocks(&self) -> usize {
        self.col_dims.len()
    }

    pub fn row_dim(&self) -> usize {
        self.row_dim
    }

    pub fn col_dims(&self) -> &[usize] {
        &self.col_dims
    }

    pub fn total_rows(&self) -> usize {
        self.row_dim * self.n_blocks()
    }

    pub fn total_cols(&self) -> usize {
        self.col_dims.iter().sum()
    }

    /// Block at block-row `i`, block-column `j ≤ i`.
    pub fn block(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.blocks[i][j]
    }

    pub fn set_block(&mut self, i: usize, j: usize, m: DMatrix<f64>) {
        assert!(j <= i, "upper-triangular blocks are structurally zero");
        assert_eq!(m.nrows(), self.row_dim);
        assert_eq!(m.ncols(), self.col_dims[j]);
        self.blocks[i][j] = m;
    }

    /// The k-th block row as a dense `row_dim × total_cols` matrix
    /// (zero-padded past the diagonal).
    pub fn block_row_dense(&self, k: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.row_dim, self.total_cols());
        let mut col = 0;
        for j in 0..self.n_blocks() {
            if j <= k {
                out.view_mut((0, col), (self.row_dim, self.col_dims[j]))
                    .copy_from(&self.blocks[k][j]);
            }
            col += self.col_dims[j];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.total_rows(), self.total_cols());
        for i in 0..self.n_blocks() {
            let mut col = 0;
            for j in 0..self.n_blocks() {
                if j <= i {
                    out.view_mut((i * self.row_dim, col), (self.row_dim, self.col_dims[j]))
                        .copy_from(&self.blocks[i][j]);
                }
                col += self.col_dims[j];
            }
        }
        out
    }

    /// `y_i = Σ_{j ≤ i} M[i,j] x_j` on a stacked vector.
    pub fn mul_stacked(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.total_cols());
        let mut y = DVector::zeros(self.total_rows());
        for i in 0..self.n_blocks() {
            let mut col = 0;
            for j in 0..=i {
                let w = self.col_dims[j];
                if w > 0 {
                    let seg = x.rows(col, w);
                    let mut out = y.rows_mut(i * self.row_dim, self.row_dim);
                    out += &self.blocks[i][j] * seg;
                }
                col += w;
            }
        }
        y
    }

    /// Dense CSV dump for inspection.
    pub fn to_csv(&self) -> String {
        dense_csv(&self.to_dense())
    }
}

pub fn dense_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Content of the `ℰ` top-left slot, which carries the initial-condition
/// set parameterization.
#[derive(Debug, Clone, Copy)]
pub enum InitSlot<'a> {
    /// `P_init = 0` (fixed initial condition, the online filter case).
    Zero,
    /// Identity slot, used when the responses absorb `P_init` themselves.
    Identity,
    /// Explicit `P_init` matrix.
    Matrix(&'a DMatrix<f64>),
}

/// Stacked horizon matrices `𝒵𝒜`, `𝒵ℬ` and `ℰ` of the error dynamics.
#[derive(Debug, Clone)]
pub struct StackedSystem {
    pub za: BlockLowerTriangular,
    pub zb: BlockLowerTriangular,
    pub e: BlockLowerTriangular,
    n: usize,
    m: usize,
    n_w: usize,
    horizon: usize,
}

impl StackedSystem {
    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn dist_dim(&self) -> usize {
        self.n_w
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Dense CSV dump of all three stacked matrices.
    pub fn to_csv(&self) -> String {
        format!(
            "# ZA\n{}# ZB\n{}# E\n{}",
            self.za.to_csv(),
            self.zb.to_csv(),
            self.e.to_csv()
        )
    }
}

/// Build the stacked matrices for `problem` over its horizon.
///
/// `𝒵𝒜` carries `A` on the first block sub-diagonal (the trailing zero block
/// of `𝒜` is annihilated by the downshift), `𝒵ℬ` likewise for `B`, and
/// `ℰ = diag(slot, B_w, …, B_w)`.
pub fn build_stacked(problem: &SafetyProblem, init: InitSlot) -> StackedSystem {
    let (n, m, n_w, big_n) = (
        problem.state_dim(),
        problem.input_dim(),
        problem.dist_dim(),
        problem.horizon(),
    );
    let nb = big_n + 1;
    let mut za = BlockLowerTriangular::zeros(nb, n, n);
    let mut zb = BlockLowerTriangular::zeros_with_cols(n, vec![m; nb]);
    let mut cols = vec![n_w; nb];
    cols[0] = n;
    let mut e = BlockLowerTriangular::zeros_with_cols(n, cols);
    for i in 1..nb {
        za.set_block(i, i - 1, problem.a().clone());
        zb.set_block(i, i - 1, problem.b().clone());
        e.set_block(i, i, problem.b_w().clone());
    }
    let slot = match init {
        InitSlot::Zero => DMatrix::zeros(n, n),
        InitSlot::Identity => DMatrix::identity(n, n),
        InitSlot::Matrix(p) => p.clone(),
    };
    e.set_block(0, 0, slot);
    StackedSystem {
        za,
        zb,
        e,
        n,
        m,
        n_w,
        horizon: big_n,
    }
}

/// Closed-loop system responses `Φ_x ∈ ℒ^{N,n×·}`, `Φ_u ∈ ℒ^{N,m×·}`. The
/// first block column is the initial-condition response, the remaining `N`
/// columns are the per-stage disturbance responses.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemResponses {
    pub phi_x: BlockLowerTriangular,
    pub phi_u: BlockLowerTriangular,
}

impl SystemResponses {
    /// Prop. 1a: responses of the closed loop under the causal feedback `K`.
    pub fn from_feedback(sys: &StackedSystem, k: &BlockLowerTriangular) -> Self {
        let nb = sys.horizon + 1;
        assert_eq!(k.n_blocks(), nb);
        assert_eq!(k.row_dim(), sys.m);
        let cols = sys.e.col_dims().to_vec();
        let mut phi_x = BlockLowerTriangular::zeros_with_cols(sys.n, cols.clone());
        let mut phi_u = BlockLowerTriangular::zeros_with_cols(sys.m, cols.clone());
        for j in 0..nb {
            if cols[j] == 0 {
                continue;
            }
            for i in j..nb {
                if i == j {
                    phi_x.set_block(i, j, sys.e.block(j, j).clone());
                } else {
                    // Φx[i,j] = A Φx[i−1,j] + B Φu[i−1,j].
                    let m = sys.za.block(i, i - 1) * phi_x.block(i - 1, j)
                        + sys.zb.block(i, i - 1) * phi_u.block(i - 1, j);
                    phi_x.set_block(i, j, m);
                }
                // Φu[i,j] = Σ_{c=j..i} K[i,c] Φx[c,j].
                let mut u = DMatrix::zeros(sys.m, cols[j]);
                for c in j..=i {
                    u += k.block(i, c) * phi_x.block(c, j);
                }
                phi_u.set_block(i, j, u);
            }
        }
        Self { phi_x, phi_u }
    }

    /// Unique `Φ_x` completing a given `Φ_u` on the subspace (exact forward
    /// recursion of the subspace equation).
    pub fn from_phi_u(sys: &StackedSystem, phi_u: BlockLowerTriangular) -> Self {
        let nb = sys.horizon + 1;
        let cols = sys.e.col_dims().to_vec();
        let mut phi_x = BlockLowerTriangular::zeros_with_cols(sys.n, cols.clone());
        for j in 0..nb {
            if cols[j] == 0 {
                continue;
            }
            for i in j..nb {
                if i == j {
                    phi_x.set_block(i, j, sys.e.block(j, j).clone());
                } else {
                    let m = sys.za.block(i, i - 1) * phi_x.block(i - 1, j)
                        + sys.zb.block(i, i - 1) * phi_u.block(i - 1, j);
                    phi_x.set_block(i, j, m);
                }
            }
        }
        Self { phi_x, phi_u }
    }

    pub fn n_blocks(&self) -> usize {
        self.phi_x.n_blocks()
    }

    /// Worst-case margin `‖a Φ_x,0^k P_init‖₁ + ‖a Φ_x,w^k‖₁` of a state
    /// constraint row at stage `k`; `p_init = None` leaves the stored
    /// initial-condition block unscaled.
    pub fn state_tightening(&self, a: &DVector<f64>, k: usize, p_init: Option<&DMatrix<f64>>) -> f64 {
        row_tightening(&self.phi_x, a, k, p_init)
    }

    /// Input-row counterpart over `Φ_u`.
    pub fn input_tightening(&self, a: &DVector<f64>, k: usize, p_init: Option<&DMatrix<f64>>) -> f64 {
        row_tightening(&self.phi_u, a, k, p_init)
    }

    /// Tight per-axis bounds of the stage-`k` reachable set around `z_k`.
    pub fn reachable_box(
        &self,
        z_k: &DVector<f64>,
        k: usize,
        p_init: Option<&DMatrix<f64>>,
    ) -> BoxSet {
        let n = self.phi_x.row_dim();
        assert_eq!(z_k.len(), n);
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for j in 0..n {
            let mut e_j = DVector::zeros(n);
            e_j[j] = 1.0;
            let up = self.state_tightening(&e_j, k, p_init);
            e_j[j] = -1.0;
            let dn = self.state_tightening(&e_j, k, p_init);
            hi[j] = z_k[j] + up;
            lo[j] = z_k[j] - dn;
        }
        BoxSet::new((&lo + &hi) * 0.5, (&hi - &lo) * 0.5)
    }
}

fn row_tightening(
    phi: &BlockLowerTriangular,
    a: &DVector<f64>,
    k: usize,
    p_init: Option<&DMatrix<f64>>,
) -> f64 {
    assert_eq!(a.len(), phi.row_dim());
    assert!(k < phi.n_blocks());
    let mut total = 0.0;
    for j in 0..=k {
        if phi.col_dims()[j] == 0 {
            continue;
        }
        let row = phi.block(k, j).transpose() * a;
        if j == 0 {
            match p_init {
                Some(p) => {
                    let scaled = p.transpose() * &row;
                    total += scaled.iter().map(|v| v.abs()).sum::<f64>();
                }
                None => total += row.iter().map(|v| v.abs()).sum::<f64>(),
            }
        } else {
            total += row.iter().map(|v| v.abs()).sum::<f64>();
        }
    }
    total
}

/// Max-abs residual of `[I − 𝒵𝒜, −𝒵ℬ][Φ_x; Φ_u] − ℰ`.
pub fn subspace_residual(resp: &SystemResponses, sys: &StackedSystem) -> f64 {
    let za = sys.za.to_dense();
    let zb = sys.zb.to_dense();
    let e = sys.e.to_dense();
    let phi_x = resp.phi_x.to_dense();
    let phi_u = resp.phi_u.to_dense();
    let eye = DMatrix::identity(za.nrows(), za.ncols());
    let resid = (&eye - &za) * phi_x - zb * phi_u - e;
    resid.amax()
}

/// Prop. 1b: recover the causal feedback `𝒦 = Φ_u Φ_x⁻¹` by block forward
/// substitution. Requires square invertible diagonal blocks of `Φ_x`.
pub fn controller_from_responses(
    resp: &SystemResponses,
) -> Result<BlockLowerTriangular, SlsError> {
    let phi_x = &resp.phi_x;
    let phi_u = &resp.phi_u;
    let n = phi_x.row_dim();
    let nb = phi_x.n_blocks();
    if phi_x.col_dims().iter().any(|&c| c != n) {
        return Err(SlsError::DimensionMismatch(
            "controller recovery needs square response blocks".into(),
        ));
    }
    // Invert (and condition-check) each diagonal block once.
    let mut diag_inv = Vec::with_capacity(nb);
    for i in 0..nb {
        let d = phi_x.block(i, i).clone();
        let svd = d.clone().svd(false, false);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        let rcond = if s_max > 0.0 { s_min / s_max } else { 0.0 };
        if rcond < 1e-10 {
            return Err(SlsError::SingularResponse { block: i, rcond });
        }
        let inv = d
            .try_inverse()
            .ok_or(SlsError::SingularResponse { block: i, rcond })?;
        diag_inv.push(inv);
    }
    let m = phi_u.row_dim();
    let mut k = BlockLowerTriangular::zeros(nb, m, n);
    for i in 0..nb {
        for j in (0..=i).rev() {
            // K[i,j] Φx[j,j] = Φu[i,j] − Σ_{c>j} K[i,c] Φx[c,j].
            let mut rhs = phi_u.block(i, j).clone();
            for c in (j + 1)..=i {
                rhs -= k.block(i, c) * phi_x.block(c, j);
            }
            k.set_block(i, j, rhs * &diag_inv[j]);
        }
    }
    Ok(k)
}

/// Problem data shared by every filter: dynamics, constraint polytopes,
/// disturbance scaling, horizon and a terminal pair satisfying the
/// invariance assumption (validated at construction).
#[derive(Debug, Clone)]
pub struct SafetyProblem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    b_w: DMatrix<f64>,
    x_set: Polytope,
    u_set: Polytope,
    horizon: usize,
    terminal: Polytope,
    k_f: DMatrix<f64>,
}

impl SafetyProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        b_w: DMatrix<f64>,
        x_set: Polytope,
        u_set: Polytope,
        horizon: usize,
        terminal: Polytope,
        k_f: DMatrix<f64>,
    ) -> Result<Self, SlsError> {
        let n = a.nrows();
        let m = b.ncols();
        if a.ncols() != n || b.nrows() != n || b_w.nrows() != n {
            return Err(SlsError::DimensionMismatch(
                "A must be n×n, B n×m, B_w n×n_w".into(),
            ));
        }
        if x_set.dim() != n || u_set.dim() != m || terminal.dim() != n {
            return Err(SlsError::DimensionMismatch(
                "constraint/terminal sets must match the state/input dimensions".into(),
            ));
        }
        if k_f.nrows() != m || k_f.ncols() != n {
            return Err(SlsError::DimensionMismatch("K_f must be m×n".into()));
        }
        if horizon == 0 {
            return Err(SlsError::InvalidProblem("horizon must be ≥ 1".into()));
        }
        if x_set.b_vector().iter().any(|&v| v <= 0.0)
            || u_set.b_vector().iter().any(|&v| v <= 0.0)
        {
            return Err(SlsError::InvalidProblem(
                "constraint offsets must be strictly positive (sets contain the origin)".into(),
            ));
        }
        if !u_set.is_bounded() {
            return Err(SlsError::InvalidProblem("input set must be compact".into()));
        }
        let problem = Self {
            a,
            b,
            b_w,
            x_set,
            u_set,
            horizon,
            terminal,
            k_f,
        };
        problem.validate_terminal()?;
        Ok(problem)
    }

    /// Assumption check: `(A+BK_f) X_f ⊕ B_w W ⊆ X_f` and `X_f × K_f X_f ⊆ X × U`.
    fn validate_terminal(&self) -> Result<(), SlsError> {
        let a_cl = self.a_closed_loop();
        let pre = pre_set(&self.terminal, &a_cl, &self.b_w, &self.w())?;
        if !pre.contains_set(&self.terminal)? {
            return Err(SlsError::TerminalAssumption(
                "terminal set is not robustly invariant under K_f".into(),
            ));
        }
        if !self.x_set.contains_set(&self.terminal)? {
            return Err(SlsError::TerminalAssumption(
                "terminal set leaves the state constraints".into(),
            ));
        }
        for i in 0..self.u_set.num_rows() {
            let a_u = self.u_set.a_matrix().row(i).transpose();
            let dir = self.k_f.transpose() * a_u;
            if self.terminal.support(&dir)? > self.u_set.b_vector()[i] + 1e-8 {
                return Err(SlsError::TerminalAssumption(
                    "terminal feedback violates the input constraints".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn b_w(&self) -> &DMatrix<f64> {
        &self.b_w
    }

    pub fn x_set(&self) -> &Polytope {
        &self.x_set
    }

    pub fn u_set(&self) -> &Polytope {
        &self.u_set
    }

    pub fn terminal(&self) -> &Polytope {
        &self.terminal
    }

    pub fn k_f(&self) -> &DMatrix<f64> {
        &self.k_f
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn dist_dim(&self) -> usize {
        self.b_w.ncols()
    }

    /// The normalized disturbance box `𝒲 = B∞^{n_w}`.
    pub fn w(&self) -> BoxSet {
        BoxSet::centered(self.dist_dim(), 1.0)
    }

    pub fn a_closed_loop(&self) -> DMatrix<f64> {
        &self.a + &self.b * &self.k_f
    }

    /// Horizon override, revalidating nothing (the terminal pair is
    /// horizon-independent).
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        assert!(horizon >= 1);
        self.horizon = horizon;
        self
    }

    /// Disturbance scaling override; the terminal pair is revalidated.
    pub fn with_b_w(self, b_w: DMatrix<f64>) -> Result<Self, SlsError> {
        Self::new(
            self.a, self.b, b_w, self.x_set, self.u_set, self.horizon, self.terminal, self.k_f,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scalar_problem(a: f64, horizon: usize) -> SafetyProblem {
        // x⁺ = a x + u + 0.1 w, |x| ≤ 5, |u| ≤ 3, terminal [−1,1] with K_f
        // chosen deadbeat enough for invariance.
        SafetyProblem::new(
            dmatrix![a],
            dmatrix![1.0],
            dmatrix![0.1],
            Polytope::inf_ball(1, 5.0),
            Polytope::inf_ball(1, 3.0),
            horizon,
            Polytope::inf_ball(1, 1.0),
            dmatrix![-a],
        )
        .unwrap()
    }

    /// §5 double integrator with a hand-picked stabilizing terminal pair.
    pub(crate) fn di_problem(horizon: usize) -> SafetyProblem {
        let a = dmatrix![1.0, 1.0; 0.0, 1.0];
        let b = dmatrix![0.5; 1.0];
        let b_w = dmatrix![0.3, 0.0; 0.0, 0.3];
        let k_f = dmatrix![-0.4, -1.1];
        let a_cl = &a + &b * &k_f;
        let x = Polytope::inf_ball(2, 5.0);
        let u = Polytope::inf_ball(1, 3.0);
        let joint = x
            .intersection(
                &Polytope::new(
                    DMatrix::from_rows(&[
                        (k_f.transpose() * dvector![1.0]).transpose(),
                        (k_f.transpose() * dvector![-1.0]).transpose(),
                    ]),
                    dvector![3.0, 3.0],
                )
                .unwrap(),
            )
            .unwrap();
        let terminal = crate::polytope::max_rpi(
            &a_cl,
            &joint,
            &b_w,
            &BoxSet::centered(2, 1.0),
            200,
        )
        .unwrap();
        SafetyProblem::new(a, b, b_w, x, u, horizon, terminal, k_f).unwrap()
    }

    fn random_feedback(sys: &StackedSystem, rng: &mut ChaCha8Rng, scale: f64) -> BlockLowerTriangular {
        let nb = sys.horizon() + 1;
        let mut k = BlockLowerTriangular::zeros(nb, sys.input_dim(), sys.state_dim());
        for i in 0..nb {
            for j in 0..=i {
                let m = DMatrix::from_fn(sys.input_dim(), sys.state_dim(), |_, _| {
                    rng.gen_range(-scale..scale)
                });
                k.set_block(i, j, m);
            }
        }
        k
    }

    /// Stage-k error from the response map for a stacked disturbance δ.
    fn stage_error(resp: &SystemResponses, delta: &DVector<f64>, k: usize) -> DVector<f64> {
        let n = resp.phi_x.row_dim();
        resp.phi_x.mul_stacked(delta).rows(k * n, n).into_owned()
    }

    #[test]
    fn stacked_single_downshift_scalar() {
        let p = scalar_problem(0.7, 1);
        let sys = build_stacked(&p, InitSlot::Identity);
        let za = sys.za.to_dense();
        assert_eq!(za.nrows(), 2);
        assert_eq!(za[(0, 0)], 0.0);
        assert_eq!(za[(1, 0)], 0.7);
        assert_eq!(za[(0, 1)], 0.0);
        assert_eq!(za[(1, 1)], 0.0);
    }

    #[test]
    fn stacked_za_is_nilpotent() {
        let p = di_problem(2);
        let sys = build_stacked(&p, InitSlot::Zero);
        let za = sys.za.to_dense();
        let cube = &za * &za * &za;
        assert!(cube.amax() < 1e-15, "ZA must be nilpotent of index N+1");
    }

    #[test]
    fn stacked_e_carries_disturbance_scaling() {
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        assert_eq!(sys.e.block(0, 0), &DMatrix::identity(2, 2));
        for i in 1..4 {
            assert_eq!(sys.e.block(i, i), p.b_w());
        }
    }

    #[test]
    fn open_loop_responses_have_zero_residual() {
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        let k = BlockLowerTriangular::zeros(4, 1, 2);
        let resp = SystemResponses::from_feedback(&sys, &k);
        assert!(resp.phi_u.to_dense().amax() == 0.0);
        assert!(subspace_residual(&resp, &sys) < 1e-12);
    }

    #[test]
    fn random_feedback_responses_lie_on_subspace() {
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let k = random_feedback(&sys, &mut rng, 1.0);
            let resp = SystemResponses::from_feedback(&sys, &k);
            assert!(subspace_residual(&resp, &sys) < 1e-9);
        }
    }

    #[test]
    fn perturbed_response_leaves_subspace() {
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_feedback(&sys, &mut rng, 0.5);
        let mut resp = SystemResponses::from_feedback(&sys, &k);
        let mut blk = resp.phi_x.block(2, 1).clone();
        blk[(0, 0)] += 1e-3;
        resp.phi_x.set_block(2, 1, blk);
        assert!(subspace_residual(&resp, &sys) >= 1e-4);
    }

    #[test]
    fn controller_round_trip() {
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let k = random_feedback(&sys, &mut rng, 0.8);
            let resp = SystemResponses::from_feedback(&sys, &k);
            let k_rec = controller_from_responses(&resp).unwrap();
            let resp2 = SystemResponses::from_feedback(&sys, &k_rec);
            assert!(
                (resp.phi_x.to_dense() - resp2.phi_x.to_dense()).amax() < 1e-6,
                "recovered feedback must regenerate Φ_x"
            );
            assert!((resp.phi_u.to_dense() - resp2.phi_u.to_dense()).amax() < 1e-6);
            assert!(
                (k.to_dense() - k_rec.to_dense()).amax() < 1e-6,
                "feedback itself must round-trip"
            );
        }
    }

    #[test]
    fn zero_input_response_gives_zero_controller() {
        let p = di_problem(2);
        let sys = build_stacked(&p, InitSlot::Identity);
        let k = BlockLowerTriangular::zeros(3, 1, 2);
        let resp = SystemResponses::from_feedback(&sys, &k);
        let k_rec = controller_from_responses(&resp).unwrap();
        assert!(k_rec.to_dense().amax() < 1e-12);
    }

    #[test]
    fn tightening_matches_vertex_bruteforce() {
        // N = 3, n = 2: enumerate all 2^{nN} = 64 disturbance-vertex
        // sequences through the response map (P_init = 0 case).
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = random_feedback(&sys, &mut rng, 0.7);
        let resp = SystemResponses::from_feedback(&sys, &k);
        let n = 2;
        let n_delta = n + 3 * n; // IC block (zero slot) + 3 disturbance stages
        for k_stage in 0..=3 {
            for dir in [
                dvector![1.0, 0.0],
                dvector![0.0, -1.0],
                dvector![0.7, -1.3],
            ] {
                let bound = resp.state_tightening(&dir, k_stage, None);
                let mut best = f64::NEG_INFINITY;
                for mask in 0..(1u32 << (3 * n)) {
                    let mut delta = DVector::zeros(n_delta);
                    for bit in 0..(3 * n) {
                        delta[n + bit] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
                    }
                    let err = stage_error(&resp, &delta, k_stage);
                    best = best.max(dir.dot(&err));
                }
                assert!(
                    (bound - best).abs() < 1e-9,
                    "stage {k_stage}: tightening {bound} vs brute force {best}"
                );
            }
        }
    }

    #[test]
    fn tightening_zero_response_is_zero() {
        let p = di_problem(2);
        let sys = build_stacked(&p, InitSlot::Zero);
        let resp = SystemResponses::from_feedback(
            &sys,
            &BlockLowerTriangular::zeros(3, 1, 2),
        );
        // Phi rows at stage 0 are entirely in the (zeroed) IC column.
        assert_eq!(resp.state_tightening(&dvector![1.0, 1.0], 0, None), 0.0);
    }

    #[test]
    fn tightening_k0_with_zero_init_has_no_margin() {
        // The online case x(t) = z₀: stage-0 state rows carry no tightening.
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let k = random_feedback(&sys, &mut rng, 0.7);
        let resp = SystemResponses::from_feedback(&sys, &k);
        let zero_p = DMatrix::zeros(2, 2);
        assert_eq!(
            resp.state_tightening(&dvector![1.0, -2.0], 0, Some(&zero_p)),
            0.0
        );
    }

    #[test]
    fn reachable_box_contains_nominal_and_matches_rollout() {
        let p = di_problem(2);
        let sys = build_stacked(&p, InitSlot::Zero);
        let resp = SystemResponses::from_feedback(
            &sys,
            &BlockLowerTriangular::zeros(3, 1, 2),
        );
        let z = dvector![0.4, -0.2];
        let bx = resp.reachable_box(&z, 2, None);
        assert!(bx.contains_point(&z, 1e-12), "δ = 0 keeps z_k reachable");
        // 16-vertex rollout oracle at stage 2 under K = 0.
        let mut worst = DVector::from_element(2, f64::NEG_INFINITY);
        for mask in 0..16u32 {
            let mut delta = DVector::zeros(2 + 2 * 2);
            for bit in 0..4 {
                delta[2 + bit] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
            }
            let err = stage_error(&resp, &delta, 2);
            for j in 0..2 {
                worst[j] = worst[j].max(err[j].abs());
            }
        }
        for j in 0..2 {
            assert!((bx.half_widths()[j] - worst[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_reachable_box_zero_phi() {
        let p = di_problem(2);
        let sys = build_stacked(&p, InitSlot::Zero);
        let mut resp = SystemResponses::from_feedback(
            &sys,
            &BlockLowerTriangular::zeros(3, 1, 2),
        );
        // Zero out everything.
        resp.phi_x = BlockLowerTriangular::zeros_with_cols(2, resp.phi_x.col_dims().to_vec());
        let z = dvector![1.0, 2.0];
        let bx = resp.reachable_box(&z, 1, None);
        assert_eq!(bx.half_widths().amax(), 0.0);
        assert_eq!(bx.center(), &z);
    }

    #[test]
    fn input_depends_only_on_past_disturbances() {
        // Causality: perturbing w_j for j ≥ k leaves u_k unchanged.
        let p = di_problem(3);
        let sys = build_stacked(&p, InitSlot::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = random_feedback(&sys, &mut rng, 0.9);
        let resp = SystemResponses::from_feedback(&sys, &k);
        let n_delta: usize = resp.phi_x.col_dims().iter().sum();
        let mut delta = DVector::from_fn(n_delta, |_, _| rng.gen_range(-1.0..1.0));
        let u_before = resp.phi_u.mul_stacked(&delta);
        // Perturb the final disturbance stage (block column N).
        let off = n_delta - 2;
        delta[off] += 0.5;
        delta[off + 1] -= 0.25;
        let u_after = resp.phi_u.mul_stacked(&delta);
        for stage in 0..3 {
            assert!(
                (u_before[stage] - u_after[stage]).abs() < 1e-12,
                "input stage {stage} reacted to a future disturbance"
            );
        }
    }

    #[test]
    fn rectangular_disturbance_matrix_keeps_properties() {
        // Remark-1 switch: n_w = 1 < n = 2, stacked ℰ right-invertible.
        let a = dmatrix![1.0, 0.5; 0.0, 1.0];
        let b = dmatrix![0.0; 1.0];
        let b_w = dmatrix![0.0; 0.25];
        let k_f = dmatrix![-0.4, -1.2];
        let x = Polytope::inf_ball(2, 5.0);
        let u = Polytope::inf_ball(1, 3.0);
        let a_cl = &a + &b * &k_f;
        let joint = x
            .intersection(
                &Polytope::new(
                    DMatrix::from_rows(&[
                        (k_f.transpose() * dvector![1.0]).transpose(),
                        (k_f.transpose() * dvector![-1.0]).transpose(),
                    ]),
                    dvector![3.0, 3.0],
                )
                .unwrap(),
            )
            .unwrap();
        let term = crate::polytope::max_rpi(&a_cl, &joint, &b_w, &BoxSet::centered(1, 1.0), 200)
            .unwrap();
        let p = SafetyProblem::new(a, b, b_w, x, u, 3, term, k_f).unwrap();
        let sys = build_stacked(&p, InitSlot::Identity);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let k = random_feedback(&sys, &mut rng, 0.8);
        let resp = SystemResponses::from_feedback(&sys, &k);
        assert!(subspace_residual(&resp, &sys) < 1e-9);
        // Tightening still matches brute force (2^{N·n_w} = 8 sequences).
        let dir = dvector![1.0, -0.5];
        let bound = resp.state_tightening(&dir, 3, Some(&DMatrix::zeros(2, 2)));
        let mut best = f64::NEG_INFINITY;
        for mask in 0..8u32 {
            let mut delta = DVector::zeros(2 + 3);
            for bit in 0..3 {
                delta[2 + bit] = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
            }
            let err = stage_error(&resp, &delta, 3);
            best = best.max(dir.dot(&err));
        }
        assert!((bound - best).abs() < 1e-9);
    }

    #[test]
    fn problem_rejects_nonpositive_offsets() {
        let r = SafetyProblem::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![0.1],
            Polytope::new(dmatrix![1.0; -1.0], dvector![5.0, 0.0]).unwrap(),
            Polytope::inf_ball(1, 3.0),
            2,
            Polytope::inf_ball(1, 1.0),
            dmatrix![-1.0],
        );
        assert!(matches!(r, Err(SlsError::InvalidProblem(_))));
    }

    #[test]
    fn problem_rejects_non_invariant_terminal() {
        // Unstable closed loop with a terminal box that cannot be invariant.
        let r = SafetyProblem::new(
            dmatrix![2.0],
            dmatrix![1.0],
            dmatrix![0.1],
            Polytope::inf_ball(1, 5.0),
            Polytope::inf_ball(1, 3.0),
            2,
            Polytope::inf_ball(1, 4.0),
            dmatrix![0.0],
        );
        assert!(matches!(r, Err(SlsError::TerminalAssumption(_))));
    }
}
