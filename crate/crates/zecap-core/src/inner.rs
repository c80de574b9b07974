//! Per-state inner max-min step of the value iteration.
//!
//! For a state `s` and value vector `j`, the step maximizes over input pmfs
//! `f` the worst case over next states `s'` of
//! `j(s') - log2 max_y sum_{x in G(y,s'|s)} f(x)`. Next states with no
//! support generate nothing (the 1/0 = infinity convention), so they are
//! simply omitted.
//!
//! The maximization reduces to a small linear program on the shifted values
//! `j~(s') = j(s') - min j`: minimize `u` subject to
//! `sum_{x in G(y,s'|s)} f(x) <= u * 2^{j~(s')}` per nonempty `(s', y)`,
//! `f` a pmf. The step value is then `min j - log2 u*`. A brute-force grid
//! search over the simplex serves as an independent check in tests.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{iter_mask, Channel};
use crate::simplex::{solve_lp, LpError, LpProblem};

/// Weights must sum to one within this.
pub const PMF_TOL: f64 = 1e-12;

/// A probability mass function over the input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct InputPmf {
    pub weights: Vec<f64>,
}

impl InputPmf {
    pub fn uniform(k: usize) -> Self {
        InputPmf { weights: vec![1.0 / k as f64; k] }
    }

    /// Point mass on one input.
    pub fn deterministic(k: usize, x: usize) -> Self {
        let mut weights = vec![0.0; k];
        weights[x] = 1.0;
        InputPmf { weights }
    }

    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.weights.iter().sum();
        self.weights.iter().all(|&w| w >= 0.0) && libm::fabs(sum - 1.0) <= PMF_TOL
    }

    /// Clamp negative drift and renormalize.
    fn normalized(mut self) -> Self {
        for w in &mut self.weights {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= sum;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerError {
    /// Impossible for validated channels; kept for completeness.
    Infeasible,
    /// The LP solver gave up (iteration cap or bad numbers).
    NumericalFailure,
}

impl fmt::Display for InnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerError::Infeasible => write!(f, "inner problem infeasible"),
            InnerError::NumericalFailure => write!(f, "inner LP solver failed"),
        }
    }
}

/// Build the stage-1 LP for `(s, j)`: variables `f_0..f_{k-1}, u`.
pub fn build_inner_lp(ch: &Channel, s: usize, j: &[f64]) -> LpProblem {
    let k = ch.num_inputs();
    let j_min = j.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut constraints = Vec::new();
    for &s_next in ch.support().reachable(s) {
        let scale = libm::exp2(j[s_next] - j_min);
        for y in 0..ch.num_outputs() {
            let mask = ch.support().g_set(s, s_next, y);
            if mask == 0 {
                continue;
            }
            let mut row = vec![0.0; k + 1];
            for x in iter_mask(mask) {
                row[x] = 1.0;
            }
            row[k] = -scale;
            constraints.push((row, 0.0));
        }
    }
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut eq = vec![1.0; k + 1];
    eq[k] = 0.0;
    LpProblem { num_vars: k + 1, objective, constraints, equality: Some((eq, 1.0)) }
}

fn map_lp_err(e: LpError) -> InnerError {
    match e {
        LpError::Infeasible => InnerError::Infeasible,
        _ => InnerError::NumericalFailure,
    }
}

/// Solve the inner max-min problem exactly via the LP reduction.
///
/// Among the (possibly many) maximizing pmfs, the one returned is canonical:
/// a second LP at the optimal bound pushes probability mass towards
/// higher-index inputs, which resolves degenerate optima deterministically.
pub fn solve_inner(ch: &Channel, s: usize, j: &[f64]) -> Result<(f64, InputPmf), InnerError> {
    let k = ch.num_inputs();
    let j_min = j.iter().cloned().fold(f64::INFINITY, f64::min);
    let stage1 = build_inner_lp(ch, s, j);
    let sol = solve_lp(&stage1).map_err(map_lp_err)?;
    let u_star = sol.x[k];
    if !(u_star > 0.0) {
        return Err(InnerError::NumericalFailure);
    }
    let value = j_min - libm::log2(u_star);

    // Stage 2: fix the bound and select the canonical maximizer. The caps
    // are relaxed by a hair so stage-1 roundoff cannot make this infeasible.
    let mut constraints = Vec::new();
    for &s_next in ch.support().reachable(s) {
        let cap = u_star * libm::exp2(j[s_next] - j_min) * (1.0 + 1e-9) + 1e-12;
        for y in 0..ch.num_outputs() {
            let mask = ch.support().g_set(s, s_next, y);
            if mask == 0 {
                continue;
            }
            let mut row = vec![0.0; k];
            for x in iter_mask(mask) {
                row[x] = 1.0;
            }
            constraints.push((row, cap));
        }
    }
    let objective: Vec<f64> = (0..k).map(|x| (k - 1 - x) as f64).collect();
    let stage2 = LpProblem {
        num_vars: k,
        objective,
        constraints,
        equality: Some((vec![1.0; k], 1.0)),
    };
    let sol2 = solve_lp(&stage2).map_err(map_lp_err)?;
    let pmf = InputPmf { weights: sol2.x }.normalized();
    Ok((value, pmf))
}

/// Step value of a fixed pmf; `INFINITY` only when no constraint receives
/// mass, which validated channels rule out.
pub fn eval_pmf(ch: &Channel, s: usize, j: &[f64], f: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for &s_next in ch.support().reachable(s) {
        let mut g_max = 0.0f64;
        for y in 0..ch.num_outputs() {
            let mask = ch.support().g_set(s, s_next, y);
            if mask == 0 {
                continue;
            }
            let sum: f64 = iter_mask(mask).map(|x| f[x]).sum();
            if sum > g_max {
                g_max = sum;
            }
        }
        if g_max > 0.0 {
            let v = j[s_next] - libm::log2(g_max);
            if v < best {
                best = v;
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridOracleError {
    AlphabetTooLarge(usize),
}

impl fmt::Display for GridOracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridOracleError::AlphabetTooLarge(k) => {
                write!(f, "grid search supports at most 5 inputs, got {k}")
            }
        }
    }
}

/// Full grids beyond this many points switch to coarse-to-fine refinement.
const GRID_BUDGET: u64 = 20_000_000;

fn grid_points(resolution: u64, k: u64) -> u64 {
    // C(resolution + k - 1, k - 1), saturating
    let mut num: u64 = 1;
    for i in 1..k {
        num = num.saturating_mul(resolution + i).saturating_div(i);
    }
    num
}

/// Enumerate pmfs with weights in multiples of `1/resolution` near a center
/// (or everywhere, when `window` is `None`), keeping the best.
fn enumerate_grid(
    ch: &Channel,
    s: usize,
    j: &[f64],
    resolution: u64,
    window: Option<(&[u64], u64)>,
    best: &mut (f64, Vec<u64>),
) {
    let k = ch.num_inputs();
    let mut counts = vec![0u64; k];
    let mut f = vec![0.0f64; k];
    fn rec(
        ch: &Channel,
        s: usize,
        j: &[f64],
        resolution: u64,
        window: Option<(&[u64], u64)>,
        counts: &mut [u64],
        f: &mut [f64],
        idx: usize,
        remaining: u64,
        best: &mut (f64, Vec<u64>),
    ) {
        let k = counts.len();
        if idx == k - 1 {
            if let Some((center, radius)) = window {
                if remaining.abs_diff(center[idx]) > radius {
                    return;
                }
            }
            counts[idx] = remaining;
            f[idx] = remaining as f64 / resolution as f64;
            let v = eval_pmf(ch, s, j, f);
            if v > best.0 {
                *best = (v, counts.to_vec());
            }
            return;
        }
        let (lo, hi) = match window {
            Some((center, radius)) => (
                center[idx].saturating_sub(radius),
                (center[idx] + radius).min(remaining),
            ),
            None => (0, remaining),
        };
        for c in lo..=hi {
            counts[idx] = c;
            f[idx] = c as f64 / resolution as f64;
            rec(ch, s, j, resolution, window, counts, f, idx + 1, remaining - c, best);
        }
    }
    rec(ch, s, j, resolution, window, &mut counts, &mut f, 0, resolution, best);
}

/// Exhaustive grid search over the input simplex, used in tests as an
/// independent check of [`solve_inner`].
///
/// When the full grid at the requested resolution would be too large (five
/// inputs at fine resolutions), an exhaustive coarse grid is refined around
/// the incumbent until the requested resolution is reached.
pub fn grid_oracle(
    ch: &Channel,
    s: usize,
    j: &[f64],
    resolution: usize,
) -> Result<(f64, InputPmf), GridOracleError> {
    let k = ch.num_inputs();
    if k > 5 {
        return Err(GridOracleError::AlphabetTooLarge(k));
    }
    let resolution = resolution.max(1) as u64;
    let mut best = (f64::NEG_INFINITY, vec![0u64; k]);
    if grid_points(resolution, k as u64) <= GRID_BUDGET {
        enumerate_grid(ch, s, j, resolution, None, &mut best);
        let weights = best.1.iter().map(|&c| c as f64 / resolution as f64).collect();
        return Ok((best.0, InputPmf { weights }));
    }

    // Coarsest exhaustive pass on a divisor of the target resolution.
    let mut base = resolution;
    for d in (1..=resolution).rev() {
        if resolution % d == 0 && grid_points(d, k as u64) <= GRID_BUDGET {
            base = d;
            break;
        }
    }
    enumerate_grid(ch, s, j, base, None, &mut best);
    let mut r = base;
    let mut center = best.1.clone();
    while r < resolution {
        let rest = resolution / r;
        let factor = (2..=rest).find(|f| rest % f == 0).unwrap_or(rest);
        let r2 = r * factor;
        center.iter_mut().for_each(|c| *c *= factor);
        let mut refined = (f64::NEG_INFINITY, center.clone());
        enumerate_grid(ch, s, j, r2, Some((&center, 2 * factor)), &mut refined);
        best = refined;
        center = best.1.clone();
        r = r2;
    }
    let weights = best.1.iter().map(|&c| c as f64 / resolution as f64).collect();
    Ok((best.0, InputPmf { weights }))
}
