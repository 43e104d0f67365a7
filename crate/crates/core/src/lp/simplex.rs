//! Dense-tableau primal simplex (two phases) with dual extraction and
//! column addition for warm-started column generation.
//!
//! Entering columns are chosen by Dantzig's rule until `5 · (rows + cols)`
//! pivots have been made in one optimisation call, after which Bland's rule
//! takes over so degenerate cycles cannot persist. Pivots touch only the rows
//! with a nonzero entry in the pivot column and the columns with a nonzero
//! entry in the pivot row, which keeps the structured LPs here cheap.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SimplexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimplexError::Infeasible => f.write_str("problem is infeasible"),
            SimplexError::Unbounded => f.write_str("problem is unbounded"),
            SimplexError::IterationLimit => f.write_str("pivot limit reached"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tol: f64,
    /// A column may enter when its reduced cost is below `-optimality_tol`.
    pub optimality_tol: f64,
    /// Phase-one residual above which the problem is declared infeasible.
    pub feasibility_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { pivot_tol: 1e-9, optimality_tol: 1e-6, feasibility_tol: 1e-7 }
    }
}

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

/// `min c·x` subject to linear rows and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    costs: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub objective: f64,
    pub values: Vec<f64>,
    /// One multiplier per row: `≤` rows have non-positive, `≥` rows
    /// non-negative duals for this minimisation.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, cost: f64) -> usize {
        self.costs.push(cost);
        self.costs.len() - 1
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        debug_assert!(terms.iter().all(|&(j, _)| j < self.costs.len()));
        self.rows.push(Row { terms, sense, rhs });
        self.rows.len() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.costs.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn solve(&self, options: &SimplexOptions) -> Result<SimplexSolution, SimplexError> {
        let mut tableau = Tableau::new(self, *options);
        tableau.optimize()?;
        Ok(tableau.solution())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural(usize),
    Slack,
    Surplus,
    Artificial,
}

/// Simplex tableau kept alive between solves so columns can be appended.
#[derive(Debug, Clone)]
pub struct Tableau {
    options: SimplexOptions,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<ColumnKind>,
    barred: Vec<bool>,
    /// Column that formed the initial identity basis for each row.
    identity: Vec<usize>,
    sign: Vec<f64>,
    structural: Vec<usize>,
    phase_two: bool,
    pivots: usize,
}

impl Tableau {
    pub fn new(lp: &LinearProgram, options: SimplexOptions) -> Self {
        let m = lp.rows.len();
        let n = lp.costs.len();
        let mut kind: Vec<ColumnKind> = (0..n).map(ColumnKind::Structural).collect();
        let mut cost = lp.costs.clone();
        let mut sign = vec![1.0; m];
        let mut senses = Vec::with_capacity(m);
        for (r, row) in lp.rows.iter().enumerate() {
            let mut sense = row.sense;
            if row.rhs < 0.0 {
                sign[r] = -1.0;
                sense = match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
            senses.push(sense);
        }
        let mut identity = vec![0; m];
        let mut extra: Vec<(usize, usize, f64)> = Vec::new();
        for (r, sense) in senses.iter().enumerate() {
            match sense {
                Sense::Le => {
                    identity[r] = kind.len();
                    extra.push((kind.len(), r, 1.0));
                    kind.push(ColumnKind::Slack);
                    cost.push(0.0);
                }
                Sense::Ge => {
                    extra.push((kind.len(), r, -1.0));
                    kind.push(ColumnKind::Surplus);
                    cost.push(0.0);
                    identity[r] = kind.len();
                    extra.push((kind.len(), r, 1.0));
                    kind.push(ColumnKind::Artificial);
                    cost.push(0.0);
                }
                Sense::Eq => {
                    identity[r] = kind.len();
                    extra.push((kind.len(), r, 1.0));
                    kind.push(ColumnKind::Artificial);
                    cost.push(0.0);
                }
            }
        }
        let width = kind.len();
        let mut rows = vec![vec![0.0; width]; m];
        let mut rhs = vec![0.0; m];
        for (r, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                rows[r][j] += sign[r] * a;
            }
            rhs[r] = sign[r] * row.rhs;
        }
        for (col, r, a) in extra {
            rows[r][col] = a;
        }
        let barred = vec![false; width];
        Tableau {
            options,
            rows,
            rhs,
            cost,
            reduced: vec![0.0; width],
            basis: identity.clone(),
            kind,
            barred,
            identity,
            sign,
            structural: (0..n).collect(),
            phase_two: false,
            pivots: 0,
        }
    }

    #[inline]
    fn width(&self) -> usize {
        self.kind.len()
    }

    /// Runs both phases, or only re-optimises if phase two was reached before.
    pub fn optimize(&mut self) -> Result<(), SimplexError> {
        if !self.phase_two {
            self.phase_one()?;
            self.enter_phase_two();
        }
        self.iterate()
    }

    fn phase_one(&mut self) -> Result<(), SimplexError> {
        let width = self.width();
        self.reduced = (0..width)
            .map(|j| if self.kind[j] == ColumnKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        for r in 0..self.rows.len() {
            if self.kind[self.basis[r]] == ColumnKind::Artificial {
                for (d, a) in self.reduced.iter_mut().zip(&self.rows[r]) {
                    *d -= a;
                }
            }
        }
        self.iterate()?;
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
        let residual: f64 = (0..self.rows.len())
            .filter(|&r| self.kind[self.basis[r]] == ColumnKind::Artificial)
            .map(|r| self.rhs[r].max(0.0))
            .sum();
        if residual > self.options.feasibility_tol * scale {
            return Err(SimplexError::Infeasible);
        }
        // drive zero-level artificials out where the row allows it
        for r in 0..self.rows.len() {
            if self.kind[self.basis[r]] != ColumnKind::Artificial {
                continue;
            }
            let candidate = (0..width)
                .filter(|&j| self.kind[j] != ColumnKind::Artificial)
                .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
            if let Some(j) = candidate {
                if self.rows[r][j].abs() > self.options.pivot_tol {
                    self.pivot(r, j);
                }
            }
        }
        Ok(())
    }

    fn enter_phase_two(&mut self) {
        for j in 0..self.width() {
            if self.kind[j] == ColumnKind::Artificial {
                self.barred[j] = true;
            }
        }
        self.reduced = self.cost.clone();
        for r in 0..self.rows.len() {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                for (d, a) in self.reduced.iter_mut().zip(&self.rows[r]) {
                    *d -= cb * a;
                }
            }
        }
        self.phase_two = true;
    }

    fn iterate(&mut self) -> Result<(), SimplexError> {
        let m = self.rows.len();
        let bland_after = 5 * (m + self.width());
        let limit = 50 * (m + self.width()) + 10_000;
        let mut local = 0usize;
        loop {
            let bland = local >= bland_after;
            let Some(q) = self.entering(bland) else { return Ok(()) };
            let Some(r) = self.leaving(q, bland) else { return Err(SimplexError::Unbounded) };
            self.pivot(r, q);
            local += 1;
            if local > limit {
                return Err(SimplexError::IterationLimit);
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let tol = self.options.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in self.reduced.iter().enumerate() {
            if self.barred[j] || d >= -tol {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, q: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = row[q];
            if a <= self.options.pivot_tol {
                continue;
            }
            let ratio = self.rhs[r].max(0.0) / a;
            let replace = match best {
                None => true,
                Some((br, bratio, ba)) => {
                    let tie = 1e-12 * (1.0 + bratio.abs());
                    if ratio < bratio - tie {
                        true
                    } else if ratio <= bratio + tie {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            a > ba
                        }
                    } else {
                        false
                    }
                }
            };
            if replace {
                best = Some((r, ratio, a));
            }
        }
        best.map(|(r, _, _)| r)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let inv = 1.0 / self.rows[r][q];
        let mut nz = Vec::new();
        for (j, v) in self.rows[r].iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < 1e-14 {
                    *v = 0.0;
                } else {
                    nz.push(j);
                }
            }
        }
        self.rows[r][q] = 1.0;
        self.rhs[r] *= inv;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[q];
            if factor == 0.0 {
                continue;
            }
            for &j in &nz {
                let v = row[j] - factor * pivot_row[j];
                row[j] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
            row[q] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
            if self.rhs[i].abs() < 1e-14 {
                self.rhs[i] = 0.0;
            }
        }
        let factor = self.reduced[q];
        if factor != 0.0 {
            for &j in &nz {
                self.reduced[j] -= factor * pivot_row[j];
            }
            self.reduced[q] = 0.0;
        }
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Appends a structural column given its cost and original-row
    /// coefficients. Only valid once phase two has been reached.
    pub fn add_column(&mut self, cost: f64, terms: &[(usize, f64)]) -> usize {
        debug_assert!(self.phase_two);
        let m = self.rows.len();
        let mut column = vec![0.0; m];
        let mut reduced = cost;
        for &(orig_row, a) in terms {
            let a = self.sign[orig_row] * a;
            let id = self.identity[orig_row];
            // y_r = -reduced[id] because identity columns have zero phase-two cost
            reduced += self.reduced[id] * a;
            for (i, slot) in column.iter_mut().enumerate() {
                *slot += self.rows[i][id] * a;
            }
        }
        for (row, v) in self.rows.iter_mut().zip(column) {
            row.push(if v.abs() < 1e-14 { 0.0 } else { v });
        }
        self.cost.push(cost);
        self.reduced.push(reduced);
        self.barred.push(false);
        let index = self.structural.len();
        self.kind.push(ColumnKind::Structural(index));
        self.structural.push(self.kind.len() - 1);
        index
    }

    pub fn objective(&self) -> f64 {
        self.basis.iter().zip(&self.rhs).map(|(&b, &x)| self.cost[b] * x).sum()
    }

    pub fn values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.structural.len()];
        for (r, &b) in self.basis.iter().enumerate() {
            if let ColumnKind::Structural(j) = self.kind[b] {
                values[j] = self.rhs[r].max(0.0);
            }
        }
        values
    }

    pub fn duals(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| {
                let id = self.identity[r];
                self.sign[r] * (self.cost[id] - self.reduced[id])
            })
            .collect()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn solution(&self) -> SimplexSolution {
        SimplexSolution { objective: self.objective(), values: self.values(), duals: self.duals(), pivots: self.pivots }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimplexOptions {
        SimplexOptions::default()
    }

    #[test]
    fn small_min_with_mixed_rows() {
        // min x + 2y  s.t. x + y >= 2, x <= 1.5, y - x = -0.5 (→ x = 1.25, y = 0.75)
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0);
        let y = lp.add_variable(2.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 2.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Le, 1.5);
        lp.add_constraint(vec![(y, 1.0), (x, -1.0)], Sense::Eq, -0.5);
        let sol = lp.solve(&opts()).unwrap();
        assert!((sol.values[0] - 1.25).abs() < 1e-9);
        assert!((sol.values[1] - 0.75).abs() < 1e-9);
        assert!((sol.objective - 2.75).abs() < 1e-9);
        // dual objective equals primal
        let dual_obj = 2.0 * sol.duals[0] + 1.5 * sol.duals[1] - 0.5 * sol.duals[2];
        assert!((dual_obj - sol.objective).abs() < 1e-9);
        assert!(sol.duals[0] >= -1e-12 && sol.duals[1] <= 1e-12);
    }

    #[test]
    fn klee_minty_3d() {
        // max 100x1 + 10x2 + x3 as a minimisation
        let mut lp = LinearProgram::new();
        let x1 = lp.add_variable(-100.0);
        let x2 = lp.add_variable(-10.0);
        let x3 = lp.add_variable(-1.0);
        lp.add_constraint(vec![(x1, 1.0)], Sense::Le, 1.0);
        lp.add_constraint(vec![(x1, 20.0), (x2, 1.0)], Sense::Le, 100.0);
        lp.add_constraint(vec![(x1, 200.0), (x2, 20.0), (x3, 1.0)], Sense::Le, 10000.0);
        let sol = lp.solve(&opts()).unwrap();
        assert!((sol.objective + 10000.0).abs() < 1e-7);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = [-0.75, 150.0, -0.02, 6.0].iter().map(|&c| lp.add_variable(c)).collect();
        lp.add_constraint(vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], Sense::Le, 0.0);
        lp.add_constraint(vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], Sense::Le, 0.0);
        lp.add_constraint(vec![(v[2], 1.0)], Sense::Le, 1.0);
        let sol = lp.solve(&opts()).unwrap();
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 2.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Le, 1.0);
        assert_eq!(lp.solve(&opts()).unwrap_err(), SimplexError::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_variable(-1.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 1.0);
        assert_eq!(lp.solve(&opts()).unwrap_err(), SimplexError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(1.0);
        let y = lp.add_variable(1.0);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 1.0);
        lp.add_constraint(vec![(x, 2.0), (y, 2.0)], Sense::Eq, 2.0);
        let sol = lp.solve(&opts()).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn added_column_is_used_after_reoptimising() {
        // min 3x s.t. x >= 1; then add z with cost 1 covering the same row
        let mut lp = LinearProgram::new();
        let x = lp.add_variable(3.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 1.0);
        let mut t = Tableau::new(&lp, opts());
        t.optimize().unwrap();
        assert!((t.objective() - 3.0).abs() < 1e-12);
        assert!((t.duals()[0] - 3.0).abs() < 1e-12);
        let z = t.add_column(1.0, &[(0, 1.0)]);
        t.optimize().unwrap();
        assert!((t.objective() - 1.0).abs() < 1e-12);
        assert!((t.values()[z] - 1.0).abs() < 1e-12);
        assert!((t.duals()[0] - 1.0).abs() < 1e-12);
    }
}
