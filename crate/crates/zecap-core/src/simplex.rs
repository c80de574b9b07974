//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Deliberately tiny: the problems solved here have a handful of variables
//! (one per input letter plus one bound) and at most `|S|·|Y| + 1` rows, so
//! determinism and guaranteed termination matter far more than speed. No
//! sparse formats, no dual simplex, no warm starts.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const FEAS_TOL: f64 = 1e-10;
const OPT_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-11;

/// `minimize objective·x  s.t.  constraints ≤, equality =, x ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    /// `(coefficients, rhs)` rows of `a·x ≤ b`.
    pub constraints: Vec<(Vec<f64>, f64)>,
    /// Optional normalization row `a·x = b`.
    pub equality: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationCapExceeded,
    BadShape,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::IterationCapExceeded => write!(f, "simplex iteration cap exceeded"),
            LpError::BadShape => write!(f, "inconsistent problem dimensions"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

struct Tableau {
    /// rows[i] has one coefficient per column plus the rhs appended.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row; last entry is the negated objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                let factor = r[col];
                if factor != 0.0 {
                    for (v, p) in r.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = lowest-index improving column, leaving = min
    /// ratio with ties broken by the lowest basic variable index.
    fn run(&mut self, cap: usize) -> Result<(), LpError> {
        for _ in 0..cap {
            let Some(col) = (0..self.cols).find(|&j| self.cost[j] < -OPT_TOL) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rows[i][self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_TOL
                                || (ratio < lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(LpError::IterationCapExceeded)
    }
}

/// Solve a small dense LP to a primal-optimal basic solution.
///
/// Deterministic: identical input always yields the same basis.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    let n = p.num_vars;
    if p.objective.len() != n
        || p.constraints.iter().any(|(a, _)| a.len() != n)
        || p.equality.as_ref().is_some_and(|(a, _)| a.len() != n)
        || p.constraints.iter().any(|(_, b)| !b.is_finite())
    {
        return Err(LpError::BadShape);
    }

    // Row layout: structural vars, then one slack/surplus per inequality,
    // then artificials, then rhs. Rows are normalized to rhs >= 0.
    let m = p.constraints.len() + p.equality.iter().count();
    let num_slack = p.constraints.len();
    let mut artificial_rows: Vec<usize> = Vec::new();
    struct RawRow {
        coeffs: Vec<f64>,
        rhs: f64,
        slack: Option<(usize, f64)>,
    }
    let mut raw: Vec<RawRow> = Vec::with_capacity(m);
    for (i, (a, b)) in p.constraints.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        raw.push(RawRow {
            coeffs: a.iter().map(|v| v * flip).collect(),
            rhs: b * flip,
            slack: Some((i, flip)),
        });
    }
    if let Some((a, b)) = &p.equality {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        raw.push(RawRow {
            coeffs: a.iter().map(|v| v * flip).collect(),
            rhs: b * flip,
            slack: None,
        });
    }
    // A row needs an artificial unless its slack enters with +1.
    for (i, r) in raw.iter().enumerate() {
        if !matches!(r.slack, Some((_, f)) if f > 0.0) {
            artificial_rows.push(i);
        }
    }
    let cols = n + num_slack + artificial_rows.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut next_art = 0;
    for (i, r) in raw.iter().enumerate() {
        let mut row = vec![0.0; cols + 1];
        row[..n].copy_from_slice(&r.coeffs);
        row[cols] = r.rhs;
        if let Some((slack_idx, f)) = r.slack {
            row[n + slack_idx] = f;
        }
        if artificial_rows.contains(&i) {
            let col = n + num_slack + next_art;
            next_art += 1;
            row[col] = 1.0;
            basis[i] = col;
        } else {
            basis[i] = n + r.slack.unwrap().0;
        }
        rows.push(row);
    }
    let cap = 10 * (m + cols) * (m + cols);

    let mut t = Tableau { rows, cost: vec![0.0; cols + 1], basis, cols };

    // Phase 1: minimize the sum of artificials.
    if !artificial_rows.is_empty() {
        for j in n + num_slack..cols {
            t.cost[j] = 1.0;
        }
        // Price out the initially basic artificials.
        for i in 0..m {
            if t.basis[i] >= n + num_slack {
                let row = t.rows[i].clone();
                for (v, r) in t.cost.iter_mut().zip(&row) {
                    *v -= *r;
                }
            }
        }
        t.run(cap)?;
        let infeas = -t.cost[cols];
        if infeas > FEAS_TOL {
            return Err(LpError::Infeasible);
        }
        // Drive any leftover basic artificial out; a row with no usable
        // pivot is redundant and harmless at rhs 0.
        for i in 0..m {
            if t.basis[i] >= n + num_slack {
                if let Some(j) = (0..n + num_slack).find(|&j| libm::fabs(t.rows[i][j]) > PIVOT_TOL) {
                    t.pivot(i, j);
                }
            }
        }
        // Forbid artificials from re-entering.
        for i in 0..m {
            for j in n + num_slack..cols {
                t.rows[i][j] = 0.0;
            }
        }
    }

    // Phase 2: minimize the real objective.
    t.cost = vec![0.0; cols + 1];
    t.cost[..n].copy_from_slice(&p.objective);
    for i in 0..m {
        let b = t.basis[i];
        if b >= n + num_slack {
            continue;
        }
        let c = t.cost[b];
        if c != 0.0 {
            let row = t.rows[i].clone();
            for (v, r) in t.cost.iter_mut().zip(&row) {
                *v -= c * *r;
            }
        }
    }
    for j in n + num_slack..cols {
        t.cost[j] = f64::INFINITY; // never entering
    }
    t.run(cap)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rows[i][t.cols];
        }
    }
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { objective, x })
}
