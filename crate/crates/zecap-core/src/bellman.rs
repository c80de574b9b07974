//! Verification of candidate fixed points of the dynamic-programming
//! operator.
//!
//! A relative value vector `g` and gain `rho` solve the average-reward
//! fixed-point equation when `(T g)(s) = g(s) + rho` at every state; any
//! solution pins the capacity to `rho` exactly. Candidates are verified with
//! a single operator application, so an analytical guess can be checked
//! without running the iteration.

use alloc::vec::Vec;
use core::fmt;

use crate::channel::Channel;
use crate::inner::InnerError;
use crate::value_iter::{apply_t, ValueFunction, ValueIterationRun};

#[derive(Debug, Clone, PartialEq)]
pub struct BellmanCandidate {
    pub g: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellmanReport {
    /// `(T g)(s) - g(s) - rho` per state, after shift-normalizing `g`.
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check a candidate with one operator application.
///
/// `g` is shifted so its minimum is zero first; the equation is shift
/// invariant, so this only removes a spurious degree of freedom.
pub fn verify(
    ch: &Channel,
    candidate: &BellmanCandidate,
    tolerance: f64,
) -> Result<BellmanReport, InnerError> {
    let g_min = candidate.g.iter().cloned().fold(f64::INFINITY, f64::min);
    let g = ValueFunction {
        values: candidate.g.iter().map(|v| v - g_min).collect(),
        iteration: 0,
    };
    let (tg, _) = apply_t(ch, &g)?;
    let residuals: Vec<f64> = (0..ch.num_states())
        .map(|s| tg.values[s] - g.values[s] - candidate.rho)
        .collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(libm::fabs(*r)));
    Ok(BellmanReport {
        residuals,
        max_abs_residual,
        tolerance,
        pass: max_abs_residual <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationOutOfRange {
    pub requested: usize,
    pub available: usize,
}

impl fmt::Display for IterationOutOfRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iteration {} not in run history (have 1..={})",
            self.requested, self.available
        )
    }
}

/// Read a candidate off a finished run: `rho` is the mean per-state gain at
/// iteration `n`, and `g` averages `J_n` with `J_{n-1}` before shifting.
///
/// The averaging cancels period-two oscillation of the iterates, which some
/// channels (alternating noisy/noiseless states) never outgrow.
pub fn extract_candidate(
    run: &ValueIterationRun,
    n: usize,
) -> Result<BellmanCandidate, IterationOutOfRange> {
    let available = run.history.len() - 1;
    if n == 0 || n > available {
        return Err(IterationOutOfRange { requested: n, available });
    }
    let (prev, last) = (&run.history[n - 1], &run.history[n]);
    let ns = last.values.len();
    let rho = last
        .values
        .iter()
        .zip(&prev.values)
        .map(|(a, b)| a - b)
        .sum::<f64>()
        / ns as f64;
    let mid: Vec<f64> = last
        .values
        .iter()
        .zip(&prev.values)
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let min = mid.iter().cloned().fold(f64::INFINITY, f64::min);
    let g = mid.iter().map(|v| v - min).collect();
    Ok(BellmanCandidate { g, rho })
}

/// Closed-form gain of the reconstructed three-state corpus channel.
///
/// Returns `(a, rho)` where `a` is the root of `a = (1 - a)^3` in (0, 1)
/// and `rho = log2((1 - a) / a)`.
pub fn solve_example3_gain() -> (f64, f64) {
    // f(a) = a - (1-a)^3 is strictly increasing on [0, 1]
    let f = |a: f64| a - (1.0 - a) * (1.0 - a) * (1.0 - a);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let rho = libm::log2((1.0 - a) / a);
    assert!(libm::fabs(a - 0.317672) <= 1e-5);
    assert!(libm::fabs(rho - 1.102926) <= 1e-5);
    (a, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::value_iter::run_value_iteration;
    use alloc::vec;

    #[test]
    fn example1_fixed_point() {
        let ch = corpus::example1(0.5);
        let cand = BellmanCandidate { g: vec![0.0, 0.5], rho: 0.5 };
        let report = verify(&ch, &cand, 1e-9).unwrap();
        assert!(report.pass, "residuals {:?}", report.residuals);
    }

    #[test]
    fn example2_fixed_point() {
        let ch = corpus::example2(0.5);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let rho = phi.log2();
        let cand = BellmanCandidate { g: vec![0.0, rho], rho };
        let report = verify(&ch, &cand, 1e-9).unwrap();
        assert!(report.pass, "residuals {:?}", report.residuals);
    }

    #[test]
    fn example3_fixed_point() {
        let ch = corpus::example3_reconstructed();
        let (_, rho) = solve_example3_gain();
        let cand = BellmanCandidate { g: vec![rho, rho / 2.0, 0.0], rho };
        let report = verify(&ch, &cand, 1e-10).unwrap();
        assert!(report.pass, "residuals {:?}", report.residuals);
    }

    #[test]
    fn perturbed_gain_fails() {
        let ch = corpus::example1(0.5);
        let cand = BellmanCandidate { g: vec![0.0, 0.5], rho: 0.6 };
        let report = verify(&ch, &cand, 1e-9).unwrap();
        assert!(!report.pass);
        assert!((report.max_abs_residual - 0.1).abs() < 1e-9);
    }

    #[test]
    fn shift_invariance() {
        let ch = corpus::example2(0.5);
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let rho = phi.log2();
        let a = BellmanCandidate { g: vec![0.0, rho], rho };
        let b = BellmanCandidate { g: vec![7.25, 7.25 + rho], rho };
        let ra = verify(&ch, &a, 1e-9).unwrap();
        let rb = verify(&ch, &b, 1e-9).unwrap();
        for (x, y) in ra.residuals.iter().zip(&rb.residuals) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(ra.pass && rb.pass);
    }

    #[test]
    fn extracted_candidate_passes() {
        let ch = corpus::example1(0.5);
        let run = run_value_iteration(&ch, 10, 0.0).unwrap();
        let cand = extract_candidate(&run, 10).unwrap();
        assert!((cand.rho - 0.5).abs() < 1e-9);
        let report = verify(&ch, &cand, 1e-6).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn extraction_range_checked() {
        let ch = corpus::example1(0.5);
        let run = run_value_iteration(&ch, 5, 0.0).unwrap();
        assert!(extract_candidate(&run, 0).is_err());
        assert!(extract_candidate(&run, 6).is_err());
        assert!(extract_candidate(&run, 5).is_ok());
    }

    #[test]
    fn example3_root_solves_cubic() {
        let (a, rho) = solve_example3_gain();
        let err = a - (1.0 - a) * (1.0 - a) * (1.0 - a);
        assert!(err.abs() < 1e-14, "{err}");
        assert!((rho + 2.0 * (1.0 - a).log2()).abs() < 1e-12);
    }
}
