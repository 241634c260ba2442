//! Dense-tableau linear programming subsolver.
//!
//! Internal engine behind the distance-tariff LP cross-check and the
//! price-setting LPs. Two-phase primal simplex on a dense tableau with
//! Bland's anti-cycling rule; deterministic by construction. Problem
//! sizes in this crate stay small (at most |D| + K variables), so no
//! presolve and no sparse storage.

use crate::{Error, Result};

/// Pivot tolerance.
const PIVOT_EPS: f64 = 1e-9;
/// Feasibility tolerance used when reporting.
const FEAS_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bounds {
    pub fn nonnegative() -> Self {
        Bounds { lower: Some(0.0), upper: None }
    }

    pub fn free() -> Self {
        Bounds { lower: None, upper: None }
    }

    pub fn range(lower: f64, upper: f64) -> Self {
        Bounds { lower: Some(lower), upper: Some(upper) }
    }
}

/// Minimization problem over real variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub minimize: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// New program with `vars` nonnegative variables and zero objective.
    pub fn new(vars: usize) -> Self {
        LinearProgram {
            minimize: vec![0.0; vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::nonnegative(); vars],
        }
    }

    pub fn var_count(&self) -> usize {
        self.minimize.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.var_count());
        debug_assert!(rhs.is_finite());
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Sparse row helper: unspecified coefficients are zero.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.var_count()];
        for &(j, c) in terms {
            coeffs[j] += c;
        }
        self.add(coeffs, relation, rhs);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal variable values; empty unless `Optimal`.
    pub values: Vec<f64>,
    /// `minimize . values`; NaN unless `Optimal`.
    pub objective: f64,
}

impl LpSolution {
    /// The values and objective, or the status mapped to an error.
    pub fn optimal(&self) -> Result<(&[f64], f64)> {
        match self.status {
            LpStatus::Optimal => Ok((&self.values, self.objective)),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }
}

/// Restores an original variable value from the standard-form solution.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + x'`
    Shifted { col: usize, lower: f64 },
    /// `x = upper - x'`
    Mirrored { col: usize, upper: f64 },
    /// `x = x⁺ - x⁻`
    Split { pos: usize, neg: usize },
}

/// Solves the program. Equalities are split into two inequalities and
/// bounds are substituted away so a single standard-form code path
/// remains.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    assert_eq!(lp.bounds.len(), lp.var_count());

    // Map every variable onto nonnegative standard-form columns.
    let mut maps = Vec::with_capacity(lp.var_count());
    let mut cols = 0usize;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // x'_col <= limit
    for b in &lp.bounds {
        match (b.lower, b.upper) {
            (Some(l), up) => {
                if let Some(u) = up {
                    if u < l {
                        return infeasible();
                    }
                    extra_rows.push((cols, u - l));
                }
                maps.push(VarMap::Shifted { col: cols, lower: l });
                cols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Mirrored { col: cols, upper: u });
                cols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: cols, neg: cols + 1 });
                cols += 2;
            }
        }
    }

    // Standard-form rows `a . x' <= b`.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    {
        let mut push = |coeffs: &[f64], rhs: f64, flip: bool| {
            let sign = if flip { -1.0 } else { 1.0 };
            let mut row = vec![0.0; cols];
            let mut shift = rhs * sign;
            for (j, &c) in coeffs.iter().enumerate() {
                let c = c * sign;
                match maps[j] {
                    VarMap::Shifted { col, lower } => {
                        row[col] += c;
                        shift -= c * lower;
                    }
                    VarMap::Mirrored { col, upper } => {
                        row[col] -= c;
                        shift -= c * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] += c;
                        row[neg] -= c;
                    }
                }
            }
            rows.push((row, shift));
        };
        for c in &lp.constraints {
            match c.relation {
                Relation::Le => push(&c.coeffs, c.rhs, false),
                Relation::Ge => push(&c.coeffs, c.rhs, true),
                Relation::Eq => {
                    push(&c.coeffs, c.rhs, false);
                    push(&c.coeffs, c.rhs, true);
                }
            }
        }
    }
    for &(col, limit) in &extra_rows {
        let mut row = vec![0.0; cols];
        row[col] = 1.0;
        rows.push((row, limit));
    }

    // Objective over standard-form columns (constant part recovered later
    // by re-evaluating over original variables).
    let mut cost = vec![0.0; cols];
    for (j, &c) in lp.minimize.iter().enumerate() {
        match maps[j] {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Mirrored { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let standard = match Tableau::run(cols, &rows, &cost) {
        Ok(values) => values,
        Err(status) => {
            return LpSolution { status, values: Vec::new(), objective: f64::NAN };
        }
    };

    let mut values = Vec::with_capacity(lp.var_count());
    for m in &maps {
        values.push(match *m {
            VarMap::Shifted { col, lower } => lower + standard[col],
            VarMap::Mirrored { col, upper } => upper - standard[col],
            VarMap::Split { pos, neg } => standard[pos] - standard[neg],
        });
    }
    let objective = lp.minimize.iter().zip(&values).map(|(c, x)| c * x).sum();
    LpSolution { status: LpStatus::Optimal, values, objective }
}

fn infeasible() -> LpSolution {
    LpSolution { status: LpStatus::Infeasible, values: Vec::new(), objective: f64::NAN }
}

/// Dense simplex tableau for `min c.x  s.t.  A.x <= b, x >= 0`.
struct Tableau {
    /// `rows x (cols + 1)`; last column is the rhs.
    data: Vec<Vec<f64>>,
    /// Objective row, `cols + 1` wide.
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn run(structural: usize, rows: &[(Vec<f64>, f64)], cost: &[f64]) -> std::result::Result<Vec<f64>, LpStatus> {
        let m = rows.len();
        // Columns: structural, slacks, artificials (for rows with b < 0).
        let artificial_rows: Vec<usize> =
            (0..m).filter(|&i| rows[i].1 < 0.0).collect();
        let cols = structural + m + artificial_rows.len();

        let mut data = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut artificial = structural + m;
        for (i, (coeffs, rhs)) in rows.iter().enumerate() {
            let mut row = vec![0.0; cols + 1];
            let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in coeffs.iter().enumerate() {
                row[j] = flip * a;
            }
            row[structural + i] = flip; // slack
            row[cols] = flip * rhs;
            if *rhs < 0.0 {
                row[artificial] = 1.0;
                basis.push(artificial);
                artificial += 1;
            } else {
                basis.push(structural + i);
            }
            data.push(row);
        }

        let mut t = Tableau { data, obj: vec![0.0; cols + 1], basis, cols };

        if !artificial_rows.is_empty() {
            // Phase 1: minimize the sum of artificials, reduced over the
            // current (artificial) basis.
            for j in structural + m..cols {
                t.obj[j] = 1.0;
            }
            for i in 0..m {
                if t.basis[i] >= structural + m {
                    for j in 0..=cols {
                        t.obj[j] -= t.data[i][j];
                    }
                }
            }
            t.pivot_until_optimal()?;
            if -t.obj[cols] > FEAS_EPS {
                return Err(LpStatus::Infeasible);
            }
            // Drive leftover artificials out of the basis; rows where no
            // pivot exists are redundant and dropped so later pivots
            // cannot disturb them.
            let mut redundant = Vec::new();
            for i in 0..m {
                if t.basis[i] >= structural + m {
                    match (0..structural + m).find(|&j| t.data[i][j].abs() > PIVOT_EPS) {
                        Some(j) => t.pivot(i, j),
                        None => redundant.push(i),
                    }
                }
            }
            for &i in redundant.iter().rev() {
                t.data.remove(i);
                t.basis.remove(i);
            }
        }

        // Phase 2 objective: reduced costs of `cost` over the current basis.
        t.obj = vec![0.0; cols + 1];
        t.obj[..structural].copy_from_slice(cost);
        for i in 0..t.data.len() {
            let b = t.basis[i];
            let c = if b < structural { cost[b] } else { 0.0 };
            if c != 0.0 {
                for j in 0..=cols {
                    t.obj[j] -= c * t.data[i][j];
                }
            }
        }
        // Artificial columns must never re-enter.
        for j in structural + m..cols {
            t.obj[j] = f64::INFINITY;
        }
        t.pivot_until_optimal()?;

        let mut values = vec![0.0; structural];
        for i in 0..t.data.len() {
            if t.basis[i] < structural {
                values[t.basis[i]] = t.data[i][t.cols];
            }
        }
        Ok(values)
    }

    /// Bland's rule: smallest eligible entering column, leaving row by
    /// minimum ratio with smallest basic index on ties.
    fn pivot_until_optimal(&mut self) -> std::result::Result<(), LpStatus> {
        loop {
            let entering = match (0..self.cols).find(|&j| self.obj[j] < -PIVOT_EPS) {
                Some(j) => j,
                None => return Ok(()),
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.data.len() {
                let a = self.data[i][entering];
                if a > PIVOT_EPS {
                    let ratio = self.data[i][self.cols] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_EPS
                                || (ratio < br + PIVOT_EPS && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((i, _)) => self.pivot(i, entering),
                None => return Err(LpStatus::Unbounded),
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.data[row][col];
        for v in &mut self.data[row] {
            *v *= inv;
        }
        self.data[row][col] = 1.0;
        for i in 0..self.data.len() {
            if i != row {
                let factor = self.data[i][col];
                if factor != 0.0 {
                    for j in 0..=self.cols {
                        self.data[i][j] -= factor * self.data[row][j];
                    }
                    self.data[i][col] = 0.0;
                }
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 && factor.is_finite() {
            for j in 0..=self.cols {
                self.obj[j] -= factor * self.data[row][j];
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }
}
