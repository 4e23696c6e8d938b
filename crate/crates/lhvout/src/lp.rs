//! Dense two-phase primal simplex.
//!
//! Solves `min c^T x  s.t.  A x = b, x >= 0` with Bland's pivoting rule
//! (anti-cycling). Infeasible problems yield a Farkas certificate `y` with
//! `y^T A <= 0` (within tolerance) and `y^T b > 0`; optimal ones yield the
//! dual vector. Problems here are small (tens of rows, up to a few thousand
//! columns), so a full tableau is the simplest robust choice. Certificates
//! are always re-verified by callers against exact oracles.


// Index loops walk several arrays in lockstep here; iterators obscure that.
#![allow(clippy::needless_range_loop)]
use crate::error::{Error, Result};

/// Outcome of a standard-form solve.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        duals: Vec<f64>,
    },
    Infeasible {
        /// `y` with `y^T A_j <= tol` for every column and `y^T b > 0`.
        farkas: Vec<f64>,
    },
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Solves `min c^T x  s.t.  A x = b, x >= 0` given `A` column-major.
pub fn solve(columns: &[Vec<f64>], rhs: &[f64], costs: &[f64], feas_tol: f64) -> Result<LpOutcome> {
    let n_rows = rhs.len();
    let n_cols = columns.len();
    if costs.len() != n_cols || columns.iter().any(|c| c.len() != n_rows) {
        return Err(Error::DimensionMismatch("LP shape mismatch".into()));
    }
    let mut t = Tableau::new(columns, rhs, n_rows, n_cols);
    match t.phase_one(feas_tol)? {
        PhaseOne::Feasible => {}
        PhaseOne::Infeasible(farkas) => return Ok(LpOutcome::Infeasible { farkas }),
    }
    t.phase_two(costs)
}

/// Feasibility of `A x = b, x >= 0`: either a solution or a Farkas vector.
pub fn feasibility(columns: &[Vec<f64>], rhs: &[f64], feas_tol: f64) -> Result<LpOutcome> {
    let n_rows = rhs.len();
    let n_cols = columns.len();
    if columns.iter().any(|c| c.len() != n_rows) {
        return Err(Error::DimensionMismatch("LP shape mismatch".into()));
    }
    let mut t = Tableau::new(columns, rhs, n_rows, n_cols);
    match t.phase_one(feas_tol)? {
        PhaseOne::Feasible => Ok(LpOutcome::Optimal {
            x: t.extract_x(),
            objective: 0.0,
            duals: vec![0.0; n_rows],
        }),
        PhaseOne::Infeasible(farkas) => Ok(LpOutcome::Infeasible { farkas }),
    }
}

enum PhaseOne {
    Feasible,
    Infeasible(Vec<f64>),
}

struct Tableau {
    n_rows: usize,
    n_cols: usize,
    /// Row-major, width `n_cols + n_rows + 1`; artificial `i` sits at
    /// `n_cols + i`, the rhs in the last column.
    rows: Vec<f64>,
    width: usize,
    basis: Vec<usize>,
    /// Reduced-cost row and (negated) objective value.
    red: Vec<f64>,
    obj: f64,
    /// Row sign flips applied to make the rhs nonnegative.
    flips: Vec<f64>,
    /// Columns barred from entering (artificials, once retired).
    sealed: Vec<bool>,
    /// During phase one, artificials are sealed the moment they leave the
    /// basis; every `(x, 0)` point stays reachable, so feasibility detection
    /// is unaffected while degenerate churn drops sharply.
    seal_departing: bool,
}

impl Tableau {
    fn new(columns: &[Vec<f64>], rhs: &[f64], n_rows: usize, n_cols: usize) -> Self {
        let width = n_cols + n_rows + 1;
        let mut rows = vec![0.0; n_rows * width];
        let mut flips = vec![1.0; n_rows];
        for i in 0..n_rows {
            if rhs[i] < 0.0 {
                flips[i] = -1.0;
            }
            let row = &mut rows[i * width..(i + 1) * width];
            for (j, col) in columns.iter().enumerate() {
                row[j] = flips[i] * col[i];
            }
            row[n_cols + i] = 1.0;
            row[width - 1] = flips[i] * rhs[i];
        }
        let basis = (n_cols..n_cols + n_rows).collect();
        Tableau {
            n_rows,
            n_cols,
            rows,
            width,
            basis,
            red: vec![0.0; n_cols + n_rows],
            obj: 0.0,
            flips,
            sealed: vec![false; n_cols + n_rows],
            seal_departing: false,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }

    fn rhs_of(&self, i: usize) -> f64 {
        self.rows[i * self.width + self.width - 1]
    }

    /// Rebuilds the reduced-cost row for cost vector `c` (artificials get
    /// `art_cost`).
    fn price(&mut self, c: &[f64], art_cost: f64) {
        let cost_of = |j: usize| if j < self.n_cols { c[j] } else { art_cost };
        for j in 0..self.n_cols + self.n_rows {
            self.red[j] = cost_of(j);
        }
        for i in 0..self.n_rows {
            let cb = cost_of(self.basis[i]);
            if cb != 0.0 {
                let row = self.row(i).to_vec();
                for j in 0..self.n_cols + self.n_rows {
                    self.red[j] -= cb * row[j];
                }
            }
        }
    }

    /// Current objective value for the given costs, read off the basis.
    fn basis_objective(&self, c: &[f64], art_cost: f64) -> f64 {
        let cost_of = |j: usize| if j < self.n_cols { c[j] } else { art_cost };
        (0..self.n_rows)
            .map(|i| cost_of(self.basis[i]) * self.rhs_of(i))
            .sum()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let piv = self.rows[row * w + col];
        let inv = 1.0 / piv;
        for j in 0..w {
            self.rows[row * w + j] *= inv;
        }
        self.rows[row * w + col] = 1.0;
        for i in 0..self.n_rows {
            if i == row {
                continue;
            }
            let f = self.rows[i * w + col];
            if f != 0.0 {
                for j in 0..w {
                    self.rows[i * w + j] -= f * self.rows[row * w + j];
                }
                self.rows[i * w + col] = 0.0;
            }
        }
        let f = self.red[col];
        if f != 0.0 {
            for j in 0..self.n_cols + self.n_rows {
                self.red[j] -= f * self.rows[row * w + j];
            }
            self.red[col] = 0.0;
        }
        let departing = self.basis[row];
        if self.seal_departing && departing >= self.n_cols {
            self.sealed[departing] = true;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: smallest improving column enters; among the rows
    /// exactly attaining the minimum ratio, the smallest basis index leaves.
    fn bland_step(&mut self) -> Result<Option<bool>> {
        let enter = (0..self.n_cols + self.n_rows)
            .find(|&j| !self.sealed[j] && self.red[j] < -PIVOT_TOL);
        let Some(enter) = enter else {
            return Ok(Some(true)); // optimal
        };
        let mut min_ratio = f64::INFINITY;
        for i in 0..self.n_rows {
            let a = self.rows[i * self.width + enter];
            if a > PIVOT_TOL {
                min_ratio = min_ratio.min(self.rhs_of(i) / a);
            }
        }
        if !min_ratio.is_finite() {
            return Ok(Some(false)); // unbounded
        }
        let mut leave: Option<usize> = None;
        for i in 0..self.n_rows {
            let a = self.rows[i * self.width + enter];
            if a > PIVOT_TOL && self.rhs_of(i) / a == min_ratio {
                let better = leave.is_none_or(|li| self.basis[i] < self.basis[li]);
                if better {
                    leave = Some(i);
                }
            }
        }
        let leave_row = leave.expect("a row attains the minimum ratio");
        self.pivot(leave_row, enter);
        Ok(None)
    }

    fn run(&mut self) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            if let Some(done) = self.bland_step()? {
                return Ok(done);
            }
        }
        Err(Error::LpFailure("pivot limit exceeded".into()))
    }

    fn phase_one(&mut self, feas_tol: f64) -> Result<PhaseOne> {
        self.price(&vec![0.0; self.n_cols], 1.0);
        self.seal_departing = true;
        if !self.run()? {
            return Err(Error::LpFailure("phase one reported unbounded".into()));
        }
        self.seal_departing = false;
        self.obj = self.basis_objective(&vec![0.0; self.n_cols], 1.0);
        if self.obj > feas_tol.max(PIVOT_TOL) {
            // Farkas vector from the phase-one duals: y_i = 1 - red[art_i],
            // unflipping the row signs applied at construction.
            let mut y = vec![0.0; self.n_rows];
            for i in 0..self.n_rows {
                y[i] = self.flips[i] * (1.0 - self.red[self.n_cols + i]);
            }
            return Ok(PhaseOne::Infeasible(y));
        }
        self.retire_artificials();
        Ok(PhaseOne::Feasible)
    }

    /// Pivots basic artificials onto real columns where possible and seals
    /// every artificial against re-entering. Rows that stay on an artificial
    /// are linearly dependent and remain inert at zero.
    fn retire_artificials(&mut self) {
        for i in 0..self.n_rows {
            if self.basis[i] >= self.n_cols {
                let col = (0..self.n_cols)
                    .find(|&j| self.rows[i * self.width + j].abs() > PIVOT_TOL);
                if let Some(col) = col {
                    self.pivot(i, col);
                }
            }
        }
        for j in self.n_cols..self.n_cols + self.n_rows {
            self.sealed[j] = true;
        }
    }

    fn phase_two(&mut self, costs: &[f64]) -> Result<LpOutcome> {
        self.price(costs, 0.0);
        // Sealing survives repricing, but price() resets nothing else.
        if !self.run()? {
            return Ok(LpOutcome::Unbounded);
        }
        let x = self.extract_x();
        let objective: f64 = x.iter().zip(costs).map(|(xi, ci)| xi * ci).sum();
        // Duals read off the artificial columns: y_i = z_{art i} = -red[art_i]
        // since artificials price at zero in phase two.
        let mut duals = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            duals[i] = self.flips[i] * -self.red[self.n_cols + i];
        }
        Ok(LpOutcome::Optimal { x, objective, duals })
    }

    fn extract_x(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            if self.basis[i] < self.n_cols {
                x[self.basis[i]] = self.rhs_of(i).max(0.0);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(data: &[&[f64]]) -> Vec<Vec<f64>> {
        data.iter().map(|c| c.to_vec()).collect()
    }

    #[test]
    fn feasible_simplex_combination() {
        // x1 + x2 = 1 plus a coordinate constraint.
        let columns = cols(&[&[1.0, 0.3], &[1.0, 0.8]]);
        let outcome = feasibility(&columns, &[1.0, 0.5], 1e-9).unwrap();
        match outcome {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
                assert!((0.3 * x[0] + 0.8 * x[1] - 0.5).abs() < 1e-9);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_yields_valid_farkas() {
        // Convex combination of {0.0, 0.2} cannot reach 0.9.
        let columns = cols(&[&[1.0, 0.0], &[1.0, 0.2]]);
        let rhs = [1.0, 0.9];
        match feasibility(&columns, &rhs, 1e-9).unwrap() {
            LpOutcome::Infeasible { farkas } => {
                for col in &columns {
                    let dot: f64 = col.iter().zip(&farkas).map(|(a, y)| a * y).sum();
                    assert!(dot <= 1e-7, "certificate violated on column: {dot}");
                }
                let yb: f64 = rhs.iter().zip(&farkas).map(|(b, y)| b * y).sum();
                assert!(yb > 1e-7);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn optimum_and_duals() {
        // min -x1  s.t.  x1 + x2 = 1.
        let columns = cols(&[&[1.0], &[1.0]]);
        match solve(&columns, &[1.0], &[-1.0, 0.0], 1e-9).unwrap() {
            LpOutcome::Optimal { x, objective, duals } => {
                assert!((x[0] - 1.0).abs() < 1e-9);
                assert!((objective + 1.0).abs() < 1e-9);
                assert!((duals[0] + 1.0).abs() < 1e-9);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        // min -x1  s.t.  x1 - x2 = 0.
        let columns = cols(&[&[1.0], &[-1.0]]);
        match solve(&columns, &[0.0], &[-1.0, 0.0], 1e-9).unwrap() {
            LpOutcome::Unbounded => {}
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_handled_by_row_flip() {
        // x1 - x2 = -0.5 with x bounded through a sum row.
        let columns = cols(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        match feasibility(&columns, &[-0.5, 1.0], 1e-9).unwrap() {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - x[1] + 0.5).abs() < 1e-9);
                assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_inert() {
        // Duplicate constraint rows.
        let columns = cols(&[&[1.0, 1.0, 2.0], &[2.0, 2.0, 1.0]]);
        match feasibility(&columns, &[1.0, 1.0, 1.0], 1e-9).unwrap() {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] + 2.0 * x[1] - 1.0).abs() < 1e-9);
                assert!((2.0 * x[0] + x[1] - 1.0).abs() < 1e-9);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }
}
