//! Average-reward value iteration producing converging capacity bounds.
//!
//! Iterating the per-state inner step from `J_0 = 0` gives `J_n(s)`, the
//! largest exponent such that `2^{J_n(s)}` messages survive `n` uses from
//! state `s`. The sandwich `min_s J_n(s)/n <= C <= max_s J_n(s)/n` holds at
//! every `n`, and the per-iteration gains `J_n - J_{n-1}` converge to the
//! capacity.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::{Channel, NotSingleState};
use crate::inner::{solve_inner, InnerError, InputPmf};
use crate::positivity::{decide_positivity, PositivityDecision, PositivityResult};

/// A value vector `J_n` together with its iteration index.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub iteration: usize,
}

impl ValueFunction {
    pub fn zero(num_states: usize) -> Self {
        ValueFunction { values: vec![0.0; num_states], iteration: 0 }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maximizing input pmf per state, from the iteration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub rows: Vec<InputPmf>,
    pub iteration: usize,
}

/// Raw bounds after iteration `n`: `lower = min_s J_n(s)/n`,
/// `upper = max_s J_n(s)/n`, and the range of per-state gains
/// `J_n(s) - J_{n-1}(s)`.
///
/// The raw sequences need not be monotone; the estimate keeps the running
/// envelope instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub gain_lo: f64,
    pub gain_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundsTrace {
    pub rows: Vec<TraceRow>,
}

/// Final capacity bracket. `point_estimate` is the mean over states of the
/// last per-state gain, which sits inside `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub lower: f64,
    pub upper: f64,
    pub point_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIterationRun {
    pub positivity: PositivityResult,
    /// `history[n]` is `J_n`; `history[0]` is all zeros.
    pub history: Vec<ValueFunction>,
    /// `policies[n - 1]` produced `J_n` from `J_{n-1}`.
    pub policies: Vec<PolicyTable>,
    pub trace: BoundsTrace,
    pub estimate: CapacityEstimate,
}

/// One parallel-over-states step: `step(ch, j)` returns `(value, pmf)` per
/// state. The default is a sequential loop; the CLI substitutes a threaded
/// one with identical results.
pub type StepFn<'a> =
    &'a mut dyn FnMut(&Channel, &[f64]) -> Result<Vec<(f64, InputPmf)>, InnerError>;

fn sequential_step(ch: &Channel, j: &[f64]) -> Result<Vec<(f64, InputPmf)>, InnerError> {
    (0..ch.num_states()).map(|s| solve_inner(ch, s, j)).collect()
}

/// Apply the dynamic-programming operator once.
pub fn apply_t(ch: &Channel, j: &ValueFunction) -> Result<(ValueFunction, PolicyTable), InnerError> {
    apply_t_with(ch, j, &mut sequential_step)
}

pub fn apply_t_with(
    ch: &Channel,
    j: &ValueFunction,
    step: StepFn<'_>,
) -> Result<(ValueFunction, PolicyTable), InnerError> {
    let solved = step(ch, &j.values)?;
    let iteration = j.iteration + 1;
    let (values, rows) = solved.into_iter().unzip();
    Ok((ValueFunction { values, iteration }, PolicyTable { rows, iteration }))
}

/// Run value iteration until the envelope gap drops strictly below
/// `gap_tol` or `max_iters` is reached.
///
/// Channels with zero capacity skip the iteration entirely: the estimate is
/// pinned to zero and the trace stays empty.
pub fn run_value_iteration(
    ch: &Channel,
    max_iters: usize,
    gap_tol: f64,
) -> Result<ValueIterationRun, InnerError> {
    run_value_iteration_with(ch, max_iters, gap_tol, &mut sequential_step)
}

pub fn run_value_iteration_with(
    ch: &Channel,
    max_iters: usize,
    gap_tol: f64,
    step: StepFn<'_>,
) -> Result<ValueIterationRun, InnerError> {
    let positivity = decide_positivity(ch);
    let mut history = vec![ValueFunction::zero(ch.num_states())];
    let mut policies = Vec::new();
    let mut trace = BoundsTrace::default();
    if positivity.decision == PositivityDecision::CapacityZero {
        return Ok(ValueIterationRun {
            positivity,
            history,
            policies,
            trace,
            estimate: CapacityEstimate {
                lower: 0.0,
                upper: 0.0,
                point_estimate: 0.0,
                iterations: 0,
                converged: true,
            },
        });
    }

    let mut lower_env = f64::NEG_INFINITY;
    let mut upper_env = f64::INFINITY;
    let mut converged = false;
    for n in 1..=max_iters {
        let prev = history.last().unwrap();
        let (next, policy) = apply_t_with(ch, prev, step)?;
        let gains: Vec<f64> = next
            .values
            .iter()
            .zip(&prev.values)
            .map(|(a, b)| a - b)
            .collect();
        let row = TraceRow {
            n,
            lower: next.min() / n as f64,
            upper: next.max() / n as f64,
            gain_lo: gains.iter().cloned().fold(f64::INFINITY, f64::min),
            gain_hi: gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        };
        // the extreme per-state gains bracket the capacity as well, and
        // tighten geometrically where the J_n/n bounds only close as 1/n
        lower_env = lower_env.max(row.lower).max(row.gain_lo);
        upper_env = upper_env.min(row.upper).min(row.gain_hi);
        trace.rows.push(row);
        history.push(next);
        policies.push(policy);
        // roundoff can push the envelopes past each other; a crossed
        // envelope is a zero gap, not a negative one, so tol = 0 never stops
        if (upper_env - lower_env).max(0.0) < gap_tol {
            converged = true;
            break;
        }
    }

    let last = history.last().unwrap();
    let prev = &history[history.len() - 2];
    let mean_gain = last
        .values
        .iter()
        .zip(&prev.values)
        .map(|(a, b)| a - b)
        .sum::<f64>()
        / ch.num_states() as f64;
    let estimate = CapacityEstimate {
        lower: lower_env,
        upper: upper_env,
        point_estimate: mean_gain,
        iterations: history.len() - 1,
        converged,
    };
    Ok(ValueIterationRun { positivity, history, policies, trace, estimate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WTableError {
    /// `2^{J_n}` left the f64 range.
    Overflow,
    Inner(InnerError),
}

impl fmt::Display for WTableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WTableError::Overflow => write!(f, "message count exceeds f64 range"),
            WTableError::Inner(e) => write!(f, "{e}"),
        }
    }
}

/// Message-count table `W(n, s) = 2^{J_n(s)}` for `n = 0..=horizon`.
pub fn w_table(ch: &Channel, horizon: usize) -> Result<Vec<Vec<f64>>, WTableError> {
    let mut j = ValueFunction::zero(ch.num_states());
    let mut rows = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        let row: Vec<f64> = j.values.iter().map(|&v| libm::exp2(v)).collect();
        if row.iter().any(|w| !w.is_finite()) {
            return Err(WTableError::Overflow);
        }
        rows.push(row);
        (j, _) = apply_t(ch, &j).map_err(WTableError::Inner)?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DmcCapacityError {
    NotSingleState(NotSingleState),
    Inner(InnerError),
}

impl fmt::Display for DmcCapacityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DmcCapacityError::NotSingleState(e) => {
                write!(f, "channel has {} states, expected 1", e.0)
            }
            DmcCapacityError::Inner(e) => write!(f, "{e}"),
        }
    }
}

/// Zero-error feedback capacity of a single-state channel: one inner step,
/// or 0 when no non-adjacent input pair exists.
pub fn dmc_capacity(ch: &Channel) -> Result<f64, DmcCapacityError> {
    ch.as_dmc().map_err(DmcCapacityError::NotSingleState)?;
    if decide_positivity(ch).decision == PositivityDecision::CapacityZero {
        return Ok(0.0);
    }
    let (value, _) = solve_inner(ch, 0, &[0.0]).map_err(DmcCapacityError::Inner)?;
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn iterate(ch: &Channel, n: usize) -> Vec<ValueFunction> {
        let run = run_value_iteration(ch, n, 0.0).unwrap();
        run.history
    }

    #[test]
    fn example1_j_sequence() {
        // J_n(0) = floor(n/2), J_n(1) = ceil(n/2)
        let ch = corpus::example1(0.5);
        let hist = iterate(&ch, 8);
        for (n, j) in hist.iter().enumerate() {
            assert!((j.values[0] - (n / 2) as f64).abs() < 1e-9, "n={n}");
            assert!((j.values[1] - ((n + 1) / 2) as f64).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn example2_fibonacci_w_rows() {
        // W(n, 0) = (1, 2, 3, 5, 8) and W(n, 1) = (2, 3, 5, 8, 13) for
        // n = 1..5; both rows start at W(0, s) = 1
        let ch = corpus::example2(0.5);
        let table = w_table(&ch, 5).unwrap();
        let fib0 = [1.0, 1.0, 2.0, 3.0, 5.0, 8.0];
        let fib1 = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0];
        for n in 0..=5 {
            assert!((table[n][0] - fib0[n]).abs() < 1e-6, "n={n}: {}", table[n][0]);
            assert!((table[n][1] - fib1[n]).abs() < 1e-6, "n={n}: {}", table[n][1]);
        }
    }

    #[test]
    fn example1_w_rows() {
        let ch = corpus::example1(0.5);
        let table = w_table(&ch, 6).unwrap();
        for n in 0..=6 {
            assert!((table[n][0] - libm::exp2((n / 2) as f64)).abs() < 1e-6);
            assert!((table[n][1] - libm::exp2(((n + 1) / 2) as f64)).abs() < 1e-6);
        }
    }

    #[test]
    fn estimates_bracket_known_capacities() {
        for entry in corpus::load_corpus() {
            let expected = entry.expected_capacity.unwrap();
            let run = run_value_iteration(&entry.channel, 60, 1e-6).unwrap();
            let e = run.estimate;
            assert!(
                e.lower - 1e-9 <= expected && expected <= e.upper + 1e-9,
                "{}: [{}, {}] vs {expected}",
                entry.name,
                e.lower,
                e.upper
            );
            assert!(
                e.lower - 1e-9 <= e.point_estimate && e.point_estimate <= e.upper + 1e-9,
                "{}",
                entry.name
            );
            assert!((e.point_estimate - expected).abs() < 1e-3, "{}", entry.name);
        }
    }

    #[test]
    fn zero_capacity_short_circuits() {
        let ch = corpus::all_adjacent_dmc();
        let run = run_value_iteration(&ch, 50, 1e-9).unwrap();
        assert_eq!(run.estimate.iterations, 0);
        assert_eq!(run.estimate.point_estimate, 0.0);
        assert!(run.estimate.converged);
        assert!(run.trace.rows.is_empty());
    }

    #[test]
    fn strict_gap_runs_to_max_iters() {
        let ch = corpus::example1(0.5);
        let run = run_value_iteration(&ch, 50, 0.0).unwrap();
        assert_eq!(run.estimate.iterations, 50);
        assert!(!run.estimate.converged);
        assert_eq!(run.history.len(), 51);
        assert_eq!(run.policies.len(), 50);
    }

    #[test]
    fn operator_is_monotone_and_shift_covariant() {
        for entry in corpus::load_corpus() {
            let ch = &entry.channel;
            let ns = ch.num_states();
            let a = ValueFunction {
                values: (0..ns).map(|s| 0.3 * s as f64).collect(),
                iteration: 0,
            };
            let b = ValueFunction {
                values: a.values.iter().map(|v| v + 0.5 + v * 0.1).collect(),
                iteration: 0,
            };
            let (ta, _) = apply_t(ch, &a).unwrap();
            let (tb, _) = apply_t(ch, &b).unwrap();
            for s in 0..ns {
                assert!(tb.values[s] >= ta.values[s] - 1e-9, "{} s={s}", entry.name);
            }
            let shifted = ValueFunction {
                values: a.values.iter().map(|v| v + 2.0).collect(),
                iteration: 0,
            };
            let (ts, _) = apply_t(ch, &shifted).unwrap();
            for s in 0..ns {
                assert!((ts.values[s] - ta.values[s] - 2.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn min_superadditive_max_subadditive() {
        for entry in corpus::load_corpus() {
            if entry.expected_capacity == Some(0.0) {
                continue;
            }
            let hist = iterate(&entry.channel, 12);
            for n in 1..hist.len() {
                for m in 1..hist.len() - n {
                    assert!(
                        hist[n + m].min() >= hist[n].min() + hist[m].min() - 1e-9,
                        "{} n={n} m={m}",
                        entry.name
                    );
                    assert!(
                        hist[n + m].max() <= hist[n].max() + hist[m].max() + 1e-9,
                        "{} n={n} m={m}",
                        entry.name
                    );
                }
            }
        }
    }

    #[test]
    fn sandwich_bounds_hold_rowwise() {
        for entry in corpus::load_corpus() {
            let Some(expected) = entry.expected_capacity else { continue };
            if expected == 0.0 {
                continue;
            }
            let run = run_value_iteration(&entry.channel, 20, 0.0).unwrap();
            for row in &run.trace.rows {
                assert!(row.lower <= expected + 1e-9, "{} n={}", entry.name, row.n);
                assert!(row.upper >= expected - 1e-9, "{} n={}", entry.name, row.n);
            }
        }
    }

    #[test]
    fn dmc_capacities() {
        assert!((dmc_capacity(&corpus::identity_dmc(2)).unwrap() - 1.0).abs() < 1e-9);
        assert!(
            (dmc_capacity(&corpus::identity_dmc(3)).unwrap() - (3.0f64).log2()).abs() < 1e-9
        );
        assert!((dmc_capacity(&corpus::pentagon()).unwrap() - 2.5f64.log2()).abs() < 1e-9);
        assert_eq!(dmc_capacity(&corpus::all_adjacent_dmc()).unwrap(), 0.0);
        assert!(matches!(
            dmc_capacity(&corpus::example1(0.5)),
            Err(DmcCapacityError::NotSingleState(NotSingleState(2)))
        ));
    }

    #[test]
    fn dmc_matches_value_iteration() {
        for ch in [corpus::identity_dmc(3), corpus::pentagon()] {
            let direct = dmc_capacity(&ch).unwrap();
            let run = run_value_iteration(&ch, 10, 1e-9).unwrap();
            assert!((run.estimate.point_estimate - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn overflow_reported() {
        let ch = corpus::identity_dmc(2);
        assert_eq!(w_table(&ch, 1100).unwrap_err(), WTableError::Overflow);
        assert!(w_table(&ch, 60).is_ok());
    }
}
