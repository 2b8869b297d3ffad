//! Dense two-phase simplex solver for small linear programs.
//!
//! The solver is deliberately self-contained: the games this crate handles
//! produce programs with at most a few thousand rows, where a dense tableau
//! is simple, predictable, and fast enough. Minimization only; rows are
//! `<=` or `==`; variables carry an optional lower bound (`None` = free).
//!
//! Pivoting uses Dantzig's rule and falls back to Bland's rule permanently
//! once the objective stalls, which guarantees termination on degenerate
//! programs.

use thiserror::Error;

/// Entering-variable threshold: reduced costs above `-EPS_OPT` count as
/// optimal.
const EPS_OPT: f64 = 1e-9;

/// Smallest tableau entry accepted as a pivot element.
const EPS_PIVOT: f64 = 1e-10;

/// Default feasibility tolerance for verifying an optimal point, scaled by
/// row magnitude.
const EPS_FEAS: f64 = 1e-8;

/// Consecutive non-improving pivots tolerated before switching to Bland's
/// rule.
const STALL_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// `minimize objective . x` subject to the rows and lower bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// One entry per variable; `None` leaves the variable free.
    pub lower_bounds: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, lower_bounds: Vec<Option<f64>>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
            lower_bounds,
        }
    }

    pub fn push_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(Row {
            coeffs,
            sense: RowSense::Le,
            rhs,
        });
    }

    pub fn push_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.rows.push(Row {
            coeffs,
            sense: RowSense::Eq,
            rhs,
        });
    }

    fn validate(&self) -> Result<(), SimplexError> {
        let nv = self.objective.len();
        if nv == 0 {
            return Err(SimplexError::Malformed("no variables".into()));
        }
        if self.lower_bounds.len() != nv {
            return Err(SimplexError::Malformed(format!(
                "{} bounds for {} variables",
                self.lower_bounds.len(),
                nv
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != nv {
                return Err(SimplexError::Malformed(format!(
                    "row {i} has {} coefficients for {} variables",
                    row.coeffs.len(),
                    nv
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(SimplexError::Malformed(format!("row {i} is not finite")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(SimplexError::Malformed("objective is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver result. `z` and `objective` are meaningful only when `status` is
/// [`LpStatus::Optimal`]; an optimal `z` satisfies every constraint within
/// the feasibility tolerance (this is verified before returning).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub z: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
}

/// How an original variable maps onto the nonnegative tableau columns.
#[derive(Clone, Copy)]
enum VarCols {
    /// `x = u + lb` with `u >= 0`.
    Shifted { col: usize, lb: f64 },
    /// Free variable split as `x = u_pos - u_neg`.
    Free { pos: usize, neg: usize },
}

enum RunExit {
    Optimal,
    Unbounded,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, SimplexError> {
    lp.validate()?;
    let nv = lp.objective.len();

    let mut cols = Vec::with_capacity(nv);
    let mut nu = 0usize;
    for lb in &lp.lower_bounds {
        match lb {
            Some(l) => {
                cols.push(VarCols::Shifted { col: nu, lb: *l });
                nu += 1;
            }
            None => {
                cols.push(VarCols::Free {
                    pos: nu,
                    neg: nu + 1,
                });
                nu += 2;
            }
        }
    }

    let m = lp.rows.len();
    let n_slack = lp.rows.iter().filter(|r| r.sense == RowSense::Le).count();
    let n_struct = nu + n_slack;
    // Column layout: [substituted vars | slacks | artificials | rhs].
    let rhs_col = n_struct + m;

    let mut a = vec![vec![0.0f64; rhs_col + 1]; m];
    let mut slack_idx = 0usize;
    for (i, row) in lp.rows.iter().enumerate() {
        let mut rhs = row.rhs;
        for (j, &cj) in row.coeffs.iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            match cols[j] {
                VarCols::Shifted { col, lb } => {
                    a[i][col] += cj;
                    rhs -= cj * lb;
                }
                VarCols::Free { pos, neg } => {
                    a[i][pos] += cj;
                    a[i][neg] -= cj;
                }
            }
        }
        if row.sense == RowSense::Le {
            a[i][nu + slack_idx] = 1.0;
            slack_idx += 1;
        }
        a[i][rhs_col] = rhs;
    }

    let b_scale = a.iter().map(|row| row[rhs_col].abs()).fold(0.0, f64::max);

    for row in a.iter_mut() {
        if row[rhs_col] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[n_struct + i] = 1.0;
    }

    let max_iters = 10_000 + 200 * (m + rhs_col);

    // Phase 1: minimize the sum of artificials from the all-artificial basis.
    let mut basis: Vec<usize> = (0..m).map(|i| n_struct + i).collect();
    let mut cost1 = vec![0.0f64; rhs_col + 1];
    for i in 0..m {
        cost1[n_struct + i] = 1.0;
    }
    for row in &a {
        for (c, v) in cost1.iter_mut().zip(row) {
            *c -= v;
        }
    }
    match run_simplex(&mut a, &mut cost1, &mut basis, max_iters)? {
        RunExit::Optimal => {}
        RunExit::Unbounded => {
            return Err(SimplexError::NumericalBreakdown(
                "phase one reported an unbounded program".into(),
            ))
        }
    }
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b >= n_struct)
        .map(|(i, _)| a[i][rhs_col])
        .sum();
    if infeasibility > EPS_FEAS * (1.0 + b_scale) {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            z: Vec::new(),
            objective: f64::NAN,
        });
    }

    // Drive leftover artificials out of the basis, dropping rows that turn
    // out to be redundant.
    let mut keep = vec![true; a.len()];
    for i in 0..a.len() {
        if basis[i] < n_struct {
            continue;
        }
        let pivot_col = (0..n_struct).find(|&j| a[i][j].abs() > 1e-8);
        match pivot_col {
            Some(j) => pivot(&mut a, &mut cost1, &mut basis, i, j),
            None => keep[i] = false,
        }
    }
    let mut kept_a = Vec::with_capacity(a.len());
    let mut kept_basis = Vec::with_capacity(a.len());
    for (i, row) in a.into_iter().enumerate() {
        if keep[i] {
            let mut r: Vec<f64> = row[..n_struct].to_vec();
            r.push(row[rhs_col]);
            kept_a.push(r);
            kept_basis.push(basis[i]);
        }
    }
    let mut a = kept_a;
    let mut basis = kept_basis;
    let rhs_col = n_struct;

    // Phase 2: the real objective over the surviving basis.
    let mut cost2 = vec![0.0f64; rhs_col + 1];
    for (j, &cj) in lp.objective.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        match cols[j] {
            VarCols::Shifted { col, .. } => cost2[col] += cj,
            VarCols::Free { pos, neg } => {
                cost2[pos] += cj;
                cost2[neg] -= cj;
            }
        }
    }
    for (i, &b) in basis.iter().enumerate() {
        let f = cost2[b];
        if f != 0.0 {
            for (c, v) in cost2.iter_mut().zip(&a[i]) {
                *c -= f * v;
            }
        }
    }
    match run_simplex(&mut a, &mut cost2, &mut basis, max_iters)? {
        RunExit::Optimal => {}
        RunExit::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                z: Vec::new(),
                objective: f64::NAN,
            })
        }
    }

    let mut u = vec![0.0f64; n_struct];
    for (i, &b) in basis.iter().enumerate() {
        u[b] = a[i][rhs_col];
    }
    let mut z = vec![0.0f64; nv];
    for (j, vc) in cols.iter().enumerate() {
        z[j] = match *vc {
            VarCols::Shifted { col, lb } => u[col] + lb,
            VarCols::Free { pos, neg } => u[pos] - u[neg],
        };
    }
    verify_feasible(lp, &z)?;
    let objective = lp.objective.iter().zip(&z).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        z,
        objective,
    })
}

fn run_simplex(
    a: &mut [Vec<f64>],
    cost: &mut [f64],
    basis: &mut [usize],
    max_iters: usize,
) -> Result<RunExit, SimplexError> {
    if a.is_empty() {
        // With no rows every nonnegative column is free to grow.
        let rhs_col = cost.len() - 1;
        if (0..rhs_col).any(|j| cost[j] < -EPS_OPT) {
            return Ok(RunExit::Unbounded);
        }
        return Ok(RunExit::Optimal);
    }
    let rhs_col = a[0].len() - 1;
    let mut bland = false;
    let mut stall = 0usize;
    let mut last_obj = -cost[rhs_col];

    for _ in 0..max_iters {
        let entering = if bland {
            (0..rhs_col).find(|&j| cost[j] < -EPS_OPT)
        } else {
            let mut best = -EPS_OPT;
            let mut pick = None;
            for (j, &c) in cost[..rhs_col].iter().enumerate() {
                if c < best {
                    best = c;
                    pick = Some(j);
                }
            }
            pick
        };
        let Some(e) = entering else {
            return Ok(RunExit::Optimal);
        };

        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (i, row) in a.iter().enumerate() {
            let aie = row[e];
            if aie > EPS_PIVOT {
                let ratio = row[rhs_col] / aie;
                let better = ratio < best_ratio - 1e-12;
                let tied = (ratio - best_ratio).abs() <= 1e-12;
                if better || (tied && leave.is_some_and(|l| basis[i] < basis[l])) {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(r) = leave else {
            return Ok(RunExit::Unbounded);
        };

        pivot(a, cost, basis, r, e);

        let obj = -cost[rhs_col];
        if (last_obj - obj).abs() <= 1e-12 {
            stall += 1;
            if stall >= STALL_LIMIT {
                bland = true;
            }
        } else {
            stall = 0;
            last_obj = obj;
        }
    }
    Err(SimplexError::NumericalBreakdown(
        "pivot iteration limit exceeded".into(),
    ))
}

fn pivot(a: &mut [Vec<f64>], cost: &mut [f64], basis: &mut [usize], r: usize, c: usize) {
    let p = a[r][c];
    debug_assert!(p.abs() > EPS_PIVOT);
    for v in a[r].iter_mut() {
        *v /= p;
    }
    a[r][c] = 1.0;
    for i in 0..a.len() {
        if i == r {
            continue;
        }
        let f = a[i][c];
        if f != 0.0 {
            // Split borrow: the pivot row is disjoint from row i.
            let (pivot_row, row_i) = if i < r {
                let (lo, hi) = a.split_at_mut(r);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = a.split_at_mut(i);
                (&lo[r], &mut hi[0])
            };
            for (vi, vp) in row_i.iter_mut().zip(pivot_row) {
                *vi -= f * vp;
            }
            row_i[c] = 0.0;
        }
    }
    let f = cost[c];
    if f != 0.0 {
        for (ci, vp) in cost.iter_mut().zip(&a[r]) {
            *ci -= f * vp;
        }
        cost[c] = 0.0;
    }
    basis[r] = c;
}

fn verify_feasible(lp: &LinearProgram, z: &[f64]) -> Result<(), SimplexError> {
    for (i, row) in lp.rows.iter().enumerate() {
        let lhs: f64 = row.coeffs.iter().zip(z).map(|(c, x)| c * x).sum();
        let tol = EPS_FEAS * (1.0 + row.rhs.abs() + lhs.abs());
        let violated = match row.sense {
            RowSense::Le => lhs > row.rhs + tol,
            RowSense::Eq => (lhs - row.rhs).abs() > tol,
        };
        if violated {
            return Err(SimplexError::NumericalBreakdown(format!(
                "optimal point violates row {i} by {:.3e}",
                (lhs - row.rhs).abs()
            )));
        }
    }
    for (j, lb) in lp.lower_bounds.iter().enumerate() {
        if let Some(l) = lb {
            if z[j] < l - EPS_FEAS * (1.0 + l.abs()) {
                return Err(SimplexError::NumericalBreakdown(format!(
                    "optimal point violates bound on variable {j}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    // Ride-share fare split written out as explicit inequalities: for each
    // rider i, -T <= x_i and x_i <= T + slack_i, with total fare 21. The
    // smallest feasible T is -5, attained only at (11, 5, 5).
    #[test]
    fn ride_share_min_max_program() {
        let mut lp = LinearProgram::new(
            vec![0.0, 0.0, 0.0, 1.0],
            vec![Some(0.0), Some(0.0), Some(0.0), None],
        );
        let caps = [16.0, 10.0, 10.0];
        for i in 0..3 {
            let mut lo = vec![0.0; 4];
            lo[i] = -1.0;
            lo[3] = -1.0;
            lp.push_le(lo, 0.0); // -x_i - T <= 0
            let mut hi = vec![0.0; 4];
            hi[i] = 1.0;
            hi[3] = -1.0;
            lp.push_le(hi, caps[i]); // x_i - T <= cap
        }
        lp.push_eq(vec![1.0, 1.0, 1.0, 0.0], 21.0);

        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, -5.0);
        assert_close(sol.z[0], 11.0);
        assert_close(sol.z[1], 5.0);
        assert_close(sol.z[2], 5.0);
        assert_close(sol.z[3], -5.0);
    }

    #[test]
    fn minimum_over_two_floors() {
        // minimize z s.t. z >= 3, z >= 5 (encoded as -z <= -3, -z <= -5).
        let mut lp = LinearProgram::new(vec![1.0], vec![None]);
        lp.push_le(vec![-1.0], -3.0);
        lp.push_le(vec![-1.0], -5.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, 5.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // z <= 1 and z >= 2.
        let mut lp = LinearProgram::new(vec![1.0], vec![None]);
        lp.push_le(vec![1.0], 1.0);
        lp.push_le(vec![-1.0], -2.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn missing_floor_is_unbounded() {
        let mut lp = LinearProgram::new(vec![-1.0], vec![Some(0.0)]);
        lp.push_le(vec![-1.0], 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn no_rows_at_all() {
        let lp = LinearProgram::new(vec![1.0], vec![Some(2.5)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, 2.5);

        let lp = LinearProgram::new(vec![-1.0], vec![Some(0.0)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_system_is_solved_exactly() {
        // x + y = 3, x - y = 1, minimize x + 2y -> unique point (2, 1).
        let mut lp = LinearProgram::new(vec![1.0, 2.0], vec![None, None]);
        lp.push_eq(vec![1.0, 1.0], 3.0);
        lp.push_eq(vec![1.0, -1.0], 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.z[0], 2.0);
        assert_close(sol.z[1], 1.0);
    }

    #[test]
    fn degenerate_vertex_still_terminates() {
        // Several rows tie at the optimum; Bland fallback must not cycle.
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![Some(0.0), Some(0.0)]);
        lp.push_le(vec![-1.0, -1.0], 0.0);
        lp.push_le(vec![-1.0, 1.0], 0.0);
        lp.push_le(vec![1.0, -1.0], 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, 0.0);
    }

    #[test]
    fn shifted_lower_bounds_are_respected() {
        // minimize x + y with x >= 1.5, y >= -2, x + y <= 10.
        let mut lp = LinearProgram::new(vec![1.0, 1.0], vec![Some(1.5), Some(-2.0)]);
        lp.push_le(vec![1.0, 1.0], 10.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.z[0], 1.5);
        assert_close(sol.z[1], -2.0);
        assert_close(sol.objective, -0.5);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // The second equality duplicates the first.
        let mut lp = LinearProgram::new(vec![1.0, 0.0], vec![Some(0.0), Some(0.0)]);
        lp.push_eq(vec![1.0, 1.0], 4.0);
        lp.push_eq(vec![2.0, 2.0], 8.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_close(sol.objective, 0.0);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let lp = LinearProgram::new(vec![], vec![]);
        assert!(matches!(solve_lp(&lp), Err(SimplexError::Malformed(_))));

        let mut lp = LinearProgram::new(vec![1.0], vec![Some(0.0)]);
        lp.push_le(vec![1.0, 2.0], 1.0);
        assert!(matches!(solve_lp(&lp), Err(SimplexError::Malformed(_))));

        let lp = LinearProgram::new(vec![1.0], vec![Some(0.0), None]);
        assert!(matches!(solve_lp(&lp), Err(SimplexError::Malformed(_))));
    }
}
