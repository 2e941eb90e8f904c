//! Dense two-phase simplex.
//!
//! Every program in this crate is small (tens to a few hundred rows), so the
//! solver keeps a full tableau in a flat row-major buffer. Pricing is Dantzig's
//! most-negative reduced cost, falling back to Bland's rule after a run of
//! degenerate pivots so the method cannot cycle.
//!
//! [`Simplex`] separates the constraint system from the objective: phase 1 runs
//! once in [`Simplex::new`], and [`Simplex::optimize`] can then be called with
//! many objectives, each one starting from the basis the previous call ended in.

use serde::{Deserialize, Serialize};

/// Pivot elements smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Constraint residual allowed on a reported optimum.
pub const FEASIBILITY_TOL: f64 = 1e-7;

const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap hit, non-finite arithmetic, or an optimum that failed the
    /// post-solve residual check.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vec<f64>,
    pub value: f64,
}

impl LpSolution {
    fn failed(status: LpStatus, num_vars: usize) -> Self {
        Self {
            status,
            point: vec![0.0; num_vars],
            value: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Basic column indices of a standard-form tableau, one per row.
///
/// Only meaningful for the program (or an identically shaped program) that
/// produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis(pub Vec<usize>);

/// `optimize objective · x` subject to linear constraints and per-variable bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program over `num_vars` variables, all bounded in `[0, +inf)` and with
    /// a zero objective.
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            sense,
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> &mut Self {
        assert_eq!(objective.len(), self.num_vars(), "objective length");
        self.objective = objective;
        self
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint length");
        assert!(rhs.is_finite(), "constraint right-hand side must be finite");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        assert!(lower <= upper, "empty bound interval for variable {var}");
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn solve(&self) -> LpSolution {
        match Simplex::new(self) {
            Ok(mut simplex) => simplex.optimize(&self.objective, self.sense),
            Err(status) => LpSolution::failed(status, self.num_vars()),
        }
    }

    /// Solves starting from `basis` when it is primal feasible for this
    /// program, otherwise from scratch.
    pub fn solve_warm(&self, basis: &Basis) -> (LpSolution, Basis) {
        let mut simplex = match Simplex::with_basis(self, basis) {
            Some(s) => s,
            None => match Simplex::new(self) {
                Ok(s) => s,
                Err(status) => {
                    return (
                        LpSolution::failed(status, self.num_vars()),
                        Basis(Vec::new()),
                    )
                }
            },
        };
        let sol = simplex.optimize(&self.objective, self.sense);
        (sol, simplex.basis())
    }

    /// Largest constraint or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }
}

/// Finds a point satisfying `constraints` (variables default to `x >= 0`),
/// pushed as far inside the inequality rows as possible: the minimum slack over
/// all `<=`/`>=` rows is maximized, capped at 1.
pub fn find_feasible(num_vars: usize, constraints: &[Constraint]) -> LpSolution {
    let mut lp = LinearProgram::new(num_vars + 1, Sense::Maximize);
    let mut obj = vec![0.0; num_vars + 1];
    obj[num_vars] = 1.0;
    lp.set_objective(obj);
    lp.set_bounds(num_vars, 0.0, 1.0);
    for c in constraints {
        let mut coeffs = c.coeffs.clone();
        let slack = match c.relation {
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
            Relation::Eq => 0.0,
        };
        coeffs.push(slack);
        lp.add_constraint(coeffs, c.relation, c.rhs);
    }
    let mut sol = lp.solve();
    if sol.status == LpStatus::Optimal {
        sol.point.truncate(num_vars);
    } else {
        sol.point = vec![0.0; num_vars];
    }
    sol
}

/// How a structural variable is recovered from standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = offset + sign * col`
    Shifted { col: usize, offset: f64, sign: f64 },
    /// `x = pos - neg`
    Free { pos: usize, neg: usize },
}

/// Tableau state for a fixed constraint system.
#[derive(Clone, Debug)]
pub struct Simplex {
    rows: usize,
    /// Standard-form columns excluding the right-hand side.
    cols: usize,
    /// Row-major, `rows * (cols + 1)`; the last entry of each row is the rhs.
    tab: Vec<f64>,
    basis: Vec<usize>,
    vars: Vec<VarMap>,
    num_vars: usize,
    /// Original program, kept for the post-solve residual check.
    check: LinearProgram,
}

struct StandardForm {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Column that can start in the basis for each row, if any.
    slack_basis: Vec<Option<usize>>,
    cols: usize,
    vars: Vec<VarMap>,
}

fn standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let mut vars = Vec::with_capacity(n);
    let mut cols = 0usize;
    // Extra rows `col <= width` coming from two-sided bounds.
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            vars.push(VarMap::Shifted {
                col: cols,
                offset: lo,
                sign: 1.0,
            });
            if hi.is_finite() {
                bound_rows.push((cols, hi - lo));
            }
            cols += 1;
        } else if hi.is_finite() {
            vars.push(VarMap::Shifted {
                col: cols,
                offset: hi,
                sign: -1.0,
            });
            cols += 1;
        } else {
            vars.push(VarMap::Free {
                pos: cols,
                neg: cols + 1,
            });
            cols += 2;
        }
    }
    let num_struct = cols;
    let num_rows = lp.constraints.len() + bound_rows.len();
    let num_slacks = lp
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count()
        + bound_rows.len();
    let total = num_struct + num_slacks;

    let mut rows = Vec::with_capacity(num_rows);
    let mut rhs = Vec::with_capacity(num_rows);
    let mut slack_basis = Vec::with_capacity(num_rows);
    let mut next_slack = num_struct;
    for c in &lp.constraints {
        let mut row = vec![0.0; total];
        let mut b = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match vars[j] {
                VarMap::Shifted { col, offset, sign } => {
                    row[col] += a * sign;
                    b -= a * offset;
                }
                VarMap::Free { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        let slack = match c.relation {
            Relation::Le => Some((next_slack, 1.0)),
            Relation::Ge => Some((next_slack, -1.0)),
            Relation::Eq => None,
        };
        if let Some((s, coef)) = slack {
            row[s] = coef;
            next_slack += 1;
        }
        if b < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
            b = -b;
        }
        let start = slack.and_then(|(s, _)| (row[s] > 0.0).then_some(s));
        rows.push(row);
        rhs.push(b);
        slack_basis.push(start);
    }
    for (col, width) in bound_rows {
        let mut row = vec![0.0; total];
        row[col] = 1.0;
        row[next_slack] = 1.0;
        slack_basis.push(Some(next_slack));
        next_slack += 1;
        rows.push(row);
        rhs.push(width);
    }
    StandardForm {
        rows,
        rhs,
        slack_basis,
        cols: total,
        vars,
    }
}

enum PivotOutcome {
    Optimal,
    Unbounded,
    Failed,
}

impl Simplex {
    /// Builds the tableau and runs phase 1. Returns `Err(Infeasible)` when the
    /// constraint system has no solution.
    pub fn new(lp: &LinearProgram) -> Result<Self, LpStatus> {
        let sf = standard_form(lp);
        let rows = sf.rows.len();
        let num_art = sf.slack_basis.iter().filter(|s| s.is_none()).count();
        let width = sf.cols + num_art + 1;
        let mut tab = vec![0.0; rows * width];
        let mut basis = Vec::with_capacity(rows);
        let mut next_art = sf.cols;
        for (i, row) in sf.rows.iter().enumerate() {
            tab[i * width..i * width + sf.cols].copy_from_slice(row);
            tab[i * width + width - 1] = sf.rhs[i];
            match sf.slack_basis[i] {
                Some(s) => basis.push(s),
                None => {
                    tab[i * width + next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
        }
        let mut s = Self {
            rows,
            cols: sf.cols + num_art,
            tab,
            basis,
            vars: sf.vars,
            num_vars: lp.num_vars(),
            check: lp.clone(),
        };
        if num_art > 0 {
            let mut cost = vec![0.0; s.cols];
            cost[sf.cols..].iter_mut().for_each(|c| *c = 1.0);
            let mut dj = s.reduced_costs(&cost);
            match s.run(&mut dj, s.cols) {
                PivotOutcome::Optimal => {}
                PivotOutcome::Unbounded | PivotOutcome::Failed => {
                    return Err(LpStatus::NumericalFailure)
                }
            }
            let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let infeasibility: f64 = (0..s.rows)
                .filter(|&i| s.basis[i] >= sf.cols)
                .map(|i| s.rhs(i))
                .sum();
            if infeasibility > 1e-9 * scale {
                return Err(LpStatus::Infeasible);
            }
            s.drop_artificials(sf.cols);
        }
        Ok(s)
    }

    /// Rebuilds the tableau with `basis` already installed. `None` when the
    /// basis is singular or not primal feasible.
    pub fn with_basis(lp: &LinearProgram, basis: &Basis) -> Option<Self> {
        let sf = standard_form(lp);
        let rows = sf.rows.len();
        if basis.0.len() != rows || basis.0.iter().any(|&b| b >= sf.cols) {
            return None;
        }
        let width = sf.cols + 1;
        let mut tab = vec![0.0; rows * width];
        for (i, row) in sf.rows.iter().enumerate() {
            tab[i * width..i * width + sf.cols].copy_from_slice(row);
            tab[i * width + sf.cols] = sf.rhs[i];
        }
        let mut s = Self {
            rows,
            cols: sf.cols,
            tab,
            basis: vec![usize::MAX; rows],
            vars: sf.vars,
            num_vars: lp.num_vars(),
            check: lp.clone(),
        };
        let mut assigned = vec![false; rows];
        for &col in &basis.0 {
            // Partial pivoting over rows not yet assigned.
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for (i, used) in assigned.iter().enumerate() {
                let v = s.at(i, col).abs();
                if !used && v > best_abs {
                    best_abs = v;
                    best = Some(i);
                }
            }
            let r = best?;
            s.pivot(r, col);
            assigned[r] = true;
        }
        if (0..rows).any(|i| s.rhs(i) < -FEASIBILITY_TOL) {
            return None;
        }
        for i in 0..rows {
            if s.rhs(i) < 0.0 {
                let w = s.cols + 1;
                s.tab[i * w + s.cols] = 0.0;
            }
        }
        Some(s)
    }

    pub fn basis(&self) -> Basis {
        Basis(self.basis.clone())
    }

    /// Phase 2 from the current basis for the given objective over the
    /// structural variables.
    pub fn optimize(&mut self, objective: &[f64], sense: Sense) -> LpSolution {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        let flip = if sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; self.cols];
        for (j, &c) in objective.iter().enumerate() {
            let c = c * flip;
            match self.vars[j] {
                VarMap::Shifted { col, sign, .. } => {
                    cost[col] += c * sign;
                }
                VarMap::Free { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }
        let mut dj = self.reduced_costs(&cost);
        match self.run(&mut dj, self.cols) {
            PivotOutcome::Optimal => {}
            PivotOutcome::Unbounded => {
                return LpSolution::failed(LpStatus::Unbounded, self.num_vars)
            }
            PivotOutcome::Failed => {
                return LpSolution::failed(LpStatus::NumericalFailure, self.num_vars)
            }
        }
        let point = self.point();
        let value: f64 = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        if !value.is_finite() {
            return LpSolution::failed(LpStatus::NumericalFailure, self.num_vars);
        }
        let scale = 1.0
            + self
                .check
                .constraints
                .iter()
                .fold(0.0f64, |a, c| a.max(c.rhs.abs()));
        if self.check.max_violation(&point) > FEASIBILITY_TOL * scale {
            return LpSolution::failed(LpStatus::NumericalFailure, self.num_vars);
        }
        LpSolution {
            status: LpStatus::Optimal,
            point,
            value,
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.width() + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.tab[i * self.width() + self.cols]
    }

    fn point(&self) -> Vec<f64> {
        let mut col_val = vec![0.0; self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            col_val[b] = self.rhs(i).max(0.0);
        }
        self.vars
            .iter()
            .map(|v| match *v {
                VarMap::Shifted { col, offset, sign } => offset + sign * col_val[col],
                VarMap::Free { pos, neg } => col_val[pos] - col_val[neg],
            })
            .collect()
    }

    /// `d_j = c_j - c_B^T T_j`, plus the negated objective in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let w = self.width();
        let mut dj = vec![0.0; w];
        dj[..self.cols].copy_from_slice(&cost[..self.cols]);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[i * w..(i + 1) * w];
            for (d, t) in dj.iter_mut().zip(row) {
                *d -= cb * t;
            }
        }
        dj
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let p = self.tab[r * w + col];
        let inv = 1.0 / p;
        for v in &mut self.tab[r * w..(r + 1) * w] {
            *v *= inv;
        }
        let (head, tail) = self.tab.split_at_mut(r * w);
        let (prow, rest) = tail.split_at_mut(w);
        for chunk in head.chunks_exact_mut(w).chain(rest.chunks_exact_mut(w)) {
            let f = chunk[col];
            if f != 0.0 {
                for (v, pv) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                chunk[col] = 0.0;
            }
        }
        self.basis[r] = col;
    }

    fn pivot_with_costs(&mut self, r: usize, col: usize, dj: &mut [f64]) {
        self.pivot(r, col);
        let w = self.width();
        let f = dj[col];
        if f != 0.0 {
            for (d, pv) in dj.iter_mut().zip(&self.tab[r * w..(r + 1) * w]) {
                *d -= f * pv;
            }
            dj[col] = 0.0;
        }
    }

    /// Primal simplex over columns `0..active_cols`.
    fn run(&mut self, dj: &mut [f64], active_cols: usize) -> PivotOutcome {
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        let mut degenerate_run = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let entering = if bland {
                (0..active_cols).find(|&j| dj[j] < -COST_TOL)
            } else {
                let mut best = None;
                let mut best_val = -COST_TOL;
                for (j, &d) in dj[..active_cols].iter().enumerate() {
                    if d < best_val {
                        best_val = d;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                return PivotOutcome::Optimal;
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else {
                return PivotOutcome::Unbounded;
            };
            if best_ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot_with_costs(r, col, dj);
            if !dj[self.cols].is_finite() {
                return PivotOutcome::Failed;
            }
        }
        PivotOutcome::Failed
    }

    /// Pivots basic artificials (all at level zero after a successful phase 1)
    /// out of the basis, deletes rows that turn out to be redundant, and drops
    /// the artificial columns.
    fn drop_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.rows {
            if self.basis[i] >= first_art {
                let col = (0..first_art).find(|&j| self.at(i, j).abs() > PIVOT_TOL);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        let w = self.width();
                        self.tab.drain(i * w..(i + 1) * w);
                        self.basis.remove(i);
                        self.rows -= 1;
                    }
                }
            } else {
                i += 1;
            }
        }
        let old_w = self.width();
        let new_w = first_art + 1;
        let mut tab = Vec::with_capacity(self.rows * new_w);
        for i in 0..self.rows {
            let row = &self.tab[i * old_w..(i + 1) * old_w];
            tab.extend_from_slice(&row[..first_art]);
            tab.push(row[old_w - 1]);
        }
        self.tab = tab;
        self.cols = first_art;
    }
}
