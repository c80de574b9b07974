//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::{Duration, Instant};

use zecap_core::bellman::{self, BellmanCandidate};
use zecap_core::corpus;
use zecap_core::inner::{grid_oracle, solve_inner};
use zecap_core::oracle::{
    build_code_tree, exact_message_count, partition_messages, verify_code_tree,
};
use zecap_core::positivity::{decide_positivity, iterate_v, PositivityDecision};
use zecap_core::value_iter::{apply_t, dmc_capacity, run_value_iteration, w_table, ValueFunction};

fn criterion(n: usize, name: &str, limit: Duration, body: impl FnOnce() + UnwindSafe) {
    let start = Instant::now();
    let result = catch_unwind(body);
    let elapsed = start.elapsed();
    let ok = result.is_ok() && elapsed <= limit;
    println!(
        "criterion {n} ({name}): {} [{elapsed:.2?}]",
        if ok { "pass" } else { "fail" }
    );
    if let Err(e) = result {
        resume_unwind(e);
    }
    assert!(elapsed <= limit, "criterion {n} took {elapsed:?}, limit {limit:?}");
}

#[test]
fn criterion_1_example1() {
    criterion(1, "example1 gains and bounds", Duration::from_secs(1), || {
        let ch = corpus::example1(0.5);
        let run = run_value_iteration(&ch, 50, 0.0).unwrap();
        assert_eq!(run.estimate.iterations, 50);
        // per-iteration gain, averaged over states, is exactly 1/2
        for n in 2..=50 {
            let (prev, next) = (&run.history[n - 1], &run.history[n]);
            let mean: f64 = next
                .values
                .iter()
                .zip(&prev.values)
                .map(|(a, b)| a - b)
                .sum::<f64>()
                / 2.0;
            assert!((mean - 0.5).abs() <= 1e-9, "n={n}: {mean}");
        }
        let last = run.trace.rows.last().unwrap();
        assert_eq!(last.n, 50);
        assert!(last.lower >= 0.49 && last.lower <= 0.51, "{}", last.lower);
        assert!(last.upper >= 0.49 && last.upper <= 0.51, "{}", last.upper);
        let table = w_table(&ch, 20).unwrap();
        for n in 0..=20 {
            let e0 = ((n / 2) as f64).exp2();
            let e1 = (((n + 1) / 2) as f64).exp2();
            assert!((table[n][0] - e0).abs() / e0 <= 1e-9, "n={n}");
            assert!((table[n][1] - e1).abs() / e1 <= 1e-9, "n={n}");
        }
    });
}

#[test]
fn criterion_2_example2() {
    criterion(2, "example2 golden ratio", Duration::from_secs(2), || {
        let ch = corpus::example2(0.5);
        let table = w_table(&ch, 5).unwrap();
        let row0 = [1.0, 2.0, 3.0, 5.0, 8.0];
        let row1 = [2.0, 3.0, 5.0, 8.0, 13.0];
        for n in 1..=5 {
            assert!((table[n][0] - row0[n - 1]).abs() / row0[n - 1] <= 1e-6, "n={n}");
            assert!((table[n][1] - row1[n - 1]).abs() / row1[n - 1] <= 1e-6, "n={n}");
        }
        let run = run_value_iteration(&ch, 100, 0.0).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((run.estimate.point_estimate - phi.log2()).abs() <= 1e-4);
        let policy = run.policies.last().unwrap();
        let p1 = policy.rows[1].weights[0];
        assert!((p1 - (3.0 - 5.0f64.sqrt()) / 2.0).abs() <= 1e-5, "{p1}");
    });
}

#[test]
fn criterion_3_example3() {
    criterion(3, "example3 gains, policy, fixed point", Duration::from_secs(5), || {
        let ch = corpus::example3_reconstructed();
        let run = run_value_iteration(&ch, 50, 0.0).unwrap();
        let (j49, j50) = (&run.history[49], &run.history[50]);
        for s in 0..3 {
            let gain = j50.values[s] - j49.values[s];
            assert!((gain - 1.1028).abs() <= 1e-3, "s={s}: {gain}");
        }
        let expected_policy = [
            [0.4656, 0.3177, 0.2167],
            [0.0, 0.3177, 0.6823],
            [0.0, 0.0, 1.0],
        ];
        let policy = run.policies.last().unwrap();
        for s in 0..3 {
            for x in 0..3 {
                let got = policy.rows[s].weights[x];
                assert!(
                    (got - expected_policy[s][x]).abs() <= 2e-4,
                    "s={s} x={x}: {got}"
                );
            }
        }
        let (a, rho) = bellman::solve_example3_gain();
        assert!((a - 0.317672).abs() <= 1e-5);
        assert!((rho - 1.102926).abs() <= 1e-5);
        let cand = BellmanCandidate { g: vec![rho, rho / 2.0, 0.0], rho };
        let report = bellman::verify(&ch, &cand, 1e-8).unwrap();
        assert!(report.pass, "residuals {:?}", report.residuals);
    });
}

#[test]
fn criterion_4_positivity() {
    criterion(4, "positivity decisions", Duration::from_secs(60), || {
        for ch in [
            corpus::example1(0.5),
            corpus::example2(0.5),
            corpus::example3_reconstructed(),
        ] {
            assert_eq!(
                decide_positivity(&ch).decision,
                PositivityDecision::CapacityPositive
            );
        }
        let dmc = corpus::all_adjacent_dmc();
        let r = decide_positivity(&dmc);
        assert_eq!(r.decision, PositivityDecision::CapacityZero);
        assert_eq!(r.v_table.len(), 2, "decided at horizon |S| = 1");
        for seed in 0..50u64 {
            let ch = corpus::random_support_channel(seed, 3, 2, 2);
            let short = decide_positivity(&ch).decision;
            let long = iterate_v(&ch, 3 * ch.num_states()).decision;
            assert_eq!(short, long, "seed {seed}");
        }
    });
}

#[test]
fn criterion_5_dmc_reduction() {
    criterion(5, "dmc reduction and grid oracle", Duration::from_secs(60), || {
        assert!((dmc_capacity(&corpus::identity_dmc(2)).unwrap() - 1.0).abs() <= 1e-9);
        assert!(
            (dmc_capacity(&corpus::identity_dmc(3)).unwrap() - 3.0f64.log2()).abs() <= 1e-9
        );
        let pentagon = corpus::pentagon();
        let cap = dmc_capacity(&pentagon).unwrap();
        assert!((cap - 2.5f64.log2()).abs() <= 1e-9, "{cap}");
        let (lp, _) = solve_inner(&pentagon, 0, &[0.0]).unwrap();
        let (grid, _) = grid_oracle(&pentagon, 0, &[0.0], 2000).unwrap();
        assert!((lp - grid).abs() <= 2e-3, "{lp} vs {grid}");
    });
}

#[test]
fn criterion_6_oracle_suite() {
    criterion(6, "oracle suite", Duration::from_secs(60), || {
        let ex2 = corpus::example2(0.5);
        let m = exact_message_count(&ex2, 6).unwrap();
        assert_eq!(m.counts.iter().map(|r| r[0]).collect::<Vec<_>>(), [1, 1, 2, 3, 5, 8, 13]);
        assert_eq!(m.counts.iter().map(|r| r[1]).collect::<Vec<_>>(), [1, 2, 3, 5, 8, 13, 21]);

        let mut channels: Vec<(String, zecap_core::Channel)> = corpus::load_corpus()
            .into_iter()
            .map(|e| (e.name.to_string(), e.channel))
            .collect();
        for seed in 0..50u64 {
            channels.push((
                format!("random-{seed}"),
                corpus::random_support_channel(seed, 1 + (seed as usize % 3), 2 + (seed as usize % 2), 2 + (seed as usize / 2 % 2)),
            ));
        }
        for (name, ch) in &channels {
            let m = exact_message_count(ch, 4).unwrap();
            let w = w_table(ch, 4).unwrap();
            for n in 0..=4 {
                for s in 0..ch.num_states() {
                    assert!(
                        (m.counts[n][s] as f64) <= w[n][s] * (1.0 + 1e-9),
                        "{name} n={n} s={s}: M={} W={}",
                        m.counts[n][s],
                        w[n][s]
                    );
                }
            }
        }

        for entry in corpus::load_corpus() {
            let ch = &entry.channel;
            let n = 8;
            let run = run_value_iteration(ch, n, 0.0).unwrap();
            let w = w_table(ch, n).unwrap();
            for s in 0..ch.num_states() {
                let messages = w[n][s].floor() as u64;
                let tree = build_code_tree(ch, &run, s, n, messages).unwrap();
                let report = verify_code_tree(ch, &tree);
                assert!(report.zero_error, "{} s={s}: {report:?}", entry.name);
            }
        }
    });
}

#[test]
fn criterion_7_property_suite() {
    criterion(7, "operator and partition properties", Duration::from_secs(60), || {
        // splitmix-style generator keeps this self-contained and deterministic
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next_f64 = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };

        let channels = [
            corpus::example1(0.5),
            corpus::example2(0.5),
            corpus::example3_reconstructed(),
        ];
        for i in 0..100 {
            let ch = &channels[i % channels.len()];
            let ns = ch.num_states();
            let a = ValueFunction {
                values: (0..ns).map(|_| 3.0 * next_f64()).collect(),
                iteration: 0,
            };
            let bump: Vec<f64> = (0..ns).map(|_| next_f64()).collect();
            let b = ValueFunction {
                values: a.values.iter().zip(&bump).map(|(v, d)| v + d).collect(),
                iteration: 0,
            };
            let (ta, _) = apply_t(ch, &a).unwrap();
            let (tb, _) = apply_t(ch, &b).unwrap();
            for s in 0..ns {
                assert!(tb.values[s] >= ta.values[s] - 1e-9, "monotone, case {i} s={s}");
            }
            let c = 1.0 + next_f64();
            let shifted = ValueFunction {
                values: a.values.iter().map(|v| v + c).collect(),
                iteration: 0,
            };
            let (ts, _) = apply_t(ch, &shifted).unwrap();
            for s in 0..ns {
                assert!(
                    (ts.values[s] - ta.values[s] - c).abs() <= 1e-9,
                    "shift, case {i} s={s}"
                );
            }
        }

        for ch in &channels {
            let run = run_value_iteration(ch, 20, 0.0).unwrap();
            let hist = &run.history;
            for n in 1..=20 {
                for m in 1..=20 - n {
                    assert!(hist[n + m].min() >= hist[n].min() + hist[m].min() - 1e-9);
                    assert!(hist[n + m].max() <= hist[n].max() + hist[m].max() + 1e-9);
                }
            }
        }

        for ch in &channels {
            let run = run_value_iteration(ch, 50, 0.0).unwrap();
            for a in &run.trace.rows {
                for b in &run.trace.rows {
                    assert!(
                        a.lower <= b.upper + 1e-9,
                        "lower({})={} > upper({})={}",
                        a.n,
                        a.lower,
                        b.n,
                        b.upper
                    );
                }
            }
        }

        for i in 0..1000u64 {
            let m = (next_f64() * 100.0) as u64;
            let k = 2 + (i % 4) as usize;
            let mut w: Vec<f64> = (0..k).map(|_| next_f64() + 1e-9).collect();
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= sum);
            let shares = partition_messages(m, &w);
            assert_eq!(shares.iter().sum::<u64>(), m, "case {i}");
            for (x, &share) in shares.iter().enumerate() {
                let base = (m as f64 * w[x]).floor() as u64;
                assert!(share >= base, "case {i} x={x}");
                assert!(share <= base + 1, "case {i} x={x}");
            }
        }
    });
}
