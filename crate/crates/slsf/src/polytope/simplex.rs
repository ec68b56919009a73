//! Small dense two-phase simplex for the LPs behind the set operations:
//! support functions, emptiness checks and redundancy elimination.
//!
//! The polytopes handled here are low-dimensional (the invariant-set
//! machinery is capped at dim ≤ 3) with at most a few hundred rows, so a
//! dense tableau with Bland's rule is simple, deterministic and fast.

use nalgebra::{DMatrix, DVector};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Maximizer in the original (free) variables; meaningful only when
    /// `status == Optimal`.
    pub x: DVector<f64>,
    pub objective: f64,
}

/// Maximize `c·x` subject to `A x ≤ b` with `x` free.
///
/// Internally splits `x = x⁺ − x⁻`, adds one slack per row and runs a
/// two-phase tableau simplex with Bland's rule (no cycling).
pub fn maximize(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> LpSolution {
    let n = c.len();
    let m = a.nrows();
    assert_eq!(a.ncols(), n, "objective/constraint dimension mismatch");
    assert_eq!(b.len(), m);

    // Standard form: y = [x⁺, x⁻, s] ≥ 0 with [A, −A, I] y = b.
    let n_y = 2 * n + m;
    let mut eq = DMatrix::<f64>::zeros(m, n_y);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            eq[(i, j)] = flip * a[(i, j)];
            eq[(i, n + j)] = -flip * a[(i, j)];
        }
        eq[(i, 2 * n + i)] = flip;
        rhs[i] = flip * b[i];
    }
    // Phase-2 cost (min −c·x on y).
    let mut cost = DVector::<f64>::zeros(n_y);
    for j in 0..n {
        cost[j] = -c[j];
        cost[n + j] = c[j];
    }

    let mut tab = Tableau::new(eq, rhs);
    if !tab.phase_one() {
        return LpSolution {
            status: LpStatus::Infeasible,
            x: DVector::zeros(n),
            objective: f64::NEG_INFINITY,
        };
    }
    match tab.phase_two(&cost) {
        PhaseOutcome::Optimal => {
            let y = tab.solution(n_y);
            let mut x = DVector::zeros(n);
            for j in 0..n {
                x[j] = y[j] - y[n + j];
            }
            let objective = c.dot(&x);
            LpSolution {
                status: LpStatus::Optimal,
                x,
                objective,
            }
        }
        PhaseOutcome::Unbounded => LpSolution {
            status: LpStatus::Unbounded,
            x: DVector::zeros(n),
            objective: f64::INFINITY,
        },
    }
}

/// Phase-1 feasibility for `A x ≤ b`: returns a feasible point if one exists.
pub fn feasible_point(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.ncols();
    let zero = DVector::zeros(n);
    match maximize(&zero, a, b) {
        LpSolution {
            status: LpStatus::Optimal,
            x,
            ..
        } => Some(x),
        _ => None,
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Dense tableau over equality rows `E y = r`, `y ≥ 0`, `r ≥ 0` on entry.
struct Tableau {
    /// `m × (n_y + n_art)` coefficient block, artificials appended.
    t: DMatrix<f64>,
    rhs: DVector<f64>,
    basis: Vec<usize>,
    n_struct: usize,
}

impl Tableau {
    fn new(eq: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        let m = eq.nrows();
        let n_struct = eq.ncols();
        let mut t = DMatrix::<f64>::zeros(m, n_struct + m);
        t.view_mut((0, 0), (m, n_struct)).copy_from(&eq);
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            t[(i, n_struct + i)] = 1.0;
            basis.push(n_struct + i);
        }
        Self {
            t,
            rhs,
            basis,
            n_struct,
        }
    }

    /// Minimize the sum of artificials; true iff it reaches (near) zero.
    fn phase_one(&mut self) -> bool {
        let total = self.t.ncols();
        let mut cost = DVector::<f64>::zeros(total);
        for j in self.n_struct..total {
            cost[j] = 1.0;
        }
        if matches!(self.run(&cost, total), PhaseOutcome::Unbounded) {
            // Σ artificials is bounded below by 0; unbounded cannot happen.
            return false;
        }
        let obj: f64 = self
            .basis
            .iter()
            .zip(self.rhs.iter())
            .filter(|(&bi, _)| bi >= self.n_struct)
            .map(|(_, &v)| v)
            .sum();
        if obj > FEAS_TOL {
            return false;
        }
        // Pivot remaining (degenerate) artificials out where possible.
        for i in 0..self.basis.len() {
            if self.basis[i] >= self.n_struct {
                if let Some(j) = (0..self.n_struct)
                    .find(|&j| self.t[(i, j)].abs() > PIVOT_TOL)
                {
                    self.pivot(i, j);
                }
            }
        }
        true
    }

    fn phase_two(&mut self, cost: &DVector<f64>) -> PhaseOutcome {
        // Artificials stay priced out by restricting candidate columns.
        let mut full = DVector::<f64>::zeros(self.t.ncols());
        full.rows_mut(0, self.n_struct).copy_from(cost);
        self.run(&full, self.n_struct)
    }

    /// Bland's-rule simplex over columns `0..col_limit`.
    fn run(&mut self, cost: &DVector<f64>, col_limit: usize) -> PhaseOutcome {
        let m = self.t.nrows();
        loop {
            // Reduced costs via the basis multipliers.
            let mut y = DVector::<f64>::zeros(m);
            for (i, &bi) in self.basis.iter().enumerate() {
                y[i] = cost[bi];
            }
            let mut enter = None;
            for j in 0..col_limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j] - y.dot(&self.t.column(j));
                if reduced < -PIVOT_TOL {
                    enter = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(j) = enter else {
                return PhaseOutcome::Optimal;
            };
            // Ratio test, Bland tie-break on basis index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let d = self.t[(i, j)];
                if d > PIVOT_TOL {
                    let ratio = self.rhs[i] / d;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - PIVOT_TOL
                                || (ratio < lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((i, _)) = leave else {
                return PhaseOutcome::Unbounded;
            };
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.t.nrows();
        let p = self.t[(row, col)];
        let inv = 1.0 / p;
        for j in 0..self.t.ncols() {
            self.t[(row, j)] *= inv;
        }
        self.rhs[row] *= inv;
        for i in 0..m {
            if i != row {
                let f = self.t[(i, col)];
                if f != 0.0 {
                    for j in 0..self.t.ncols() {
                        self.t[(i, j)] -= f * self.t[(row, j)];
                    }
                    self.rhs[i] -= f * self.rhs[row];
                }
            }
        }
        self.basis[row] = col;
    }

    fn solution(&self, n_y: usize) -> DVector<f64> {
        let mut y = DVector::zeros(n_y);
        for (i, &bi) in self.basis.iter().enumerate() {
            if bi < n_y {
                y[bi] = self.rhs[i];
            }
        }
        y
    }
}
