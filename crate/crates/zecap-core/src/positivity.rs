//! Finite-horizon max-min game deciding whether the zero-error capacity is
//! positive.
//!
//! The leader (encoder) picks an input, the follower (Nature) picks the next
//! state among those the input can reach; each visit to a positive state is
//! worth one. The capacity is positive iff the leader can guarantee at least
//! one such visit within `|S|` rounds from every start state.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::Channel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityDecision {
    CapacityZero,
    CapacityPositive,
}

/// Strategy certifying the decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositivityWitness {
    /// Per-state maximizing input realizing the final game value.
    Leader { input_map: Vec<usize> },
    /// Follower reply `A2(s, x)` keeping play inside the stable zero set;
    /// `None` outside that set, where the reply is irrelevant.
    Follower {
        next_state: Vec<Vec<Option<usize>>>,
        stable_set: Vec<usize>,
        n_star: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositivityResult {
    /// `v_table[n][s]` is the game value after `n` rounds; exact integers.
    pub v_table: Vec<Vec<u64>>,
    pub decision: PositivityDecision,
    /// The shrinking zero sets `S_n = {s : V_n(s) = 0}`, one per table row.
    pub zero_set_trace: Vec<Vec<usize>>,
    pub witness: PositivityWitness,
}

/// Reward of the game: 1 iff `s` is a positive state.
pub fn reward(ch: &Channel, s: usize) -> u64 {
    ch.is_positive_state(s) as u64
}

fn v_rows(ch: &Channel, horizon: usize) -> Vec<Vec<u64>> {
    let ns = ch.num_states();
    let r: Vec<u64> = (0..ns).map(|s| reward(ch, s)).collect();
    let mut rows = vec![vec![0u64; ns]];
    for _ in 1..=horizon {
        let prev = rows.last().unwrap();
        let mut next = vec![0u64; ns];
        for s in 0..ns {
            let best = (0..ch.num_inputs())
                .map(|x| {
                    ch.support()
                        .next_states(s, x)
                        .iter()
                        .map(|&sn| prev[sn])
                        .min()
                        .expect("S(s,x) is nonempty on a validated channel")
                })
                .max()
                .expect("input alphabet is nonempty");
            next[s] = r[s] + best;
        }
        rows.push(next);
    }
    rows
}

fn zero_sets(rows: &[Vec<u64>]) -> Vec<Vec<usize>> {
    rows.iter()
        .map(|row| (0..row.len()).filter(|&s| row[s] == 0).collect())
        .collect()
}

/// Leader input at `s` maximizing the worst-case continuation value `prev`.
/// Ties go to the lowest input index.
fn leader_input(ch: &Channel, s: usize, prev: &[u64]) -> usize {
    let mut best_x = 0;
    let mut best_v = None;
    for x in 0..ch.num_inputs() {
        let v = ch
            .support()
            .next_states(s, x)
            .iter()
            .map(|&sn| prev[sn])
            .min()
            .unwrap();
        if best_v.map_or(true, |b| v > b) {
            best_v = Some(v);
            best_x = x;
        }
    }
    best_x
}

fn make_result(ch: &Channel, rows: Vec<Vec<u64>>) -> PositivityResult {
    let ns = ch.num_states();
    let decide_row = rows.len().saturating_sub(1).min(ns);
    let positive = rows[decide_row].iter().all(|&v| v > 0);
    let witness = if positive {
        let prev = &rows[decide_row - 1];
        PositivityWitness::Leader {
            input_map: (0..ns).map(|s| leader_input(ch, s, prev)).collect(),
        }
    } else {
        // First n* with S_{n*} = S_{n*+1}; exists below |S| whenever the
        // decision row still contains a zero.
        let sets = zero_sets(&rows);
        let n_star = (0..decide_row)
            .find(|&n| sets[n] == sets[n + 1])
            .unwrap_or(decide_row);
        let stable = &sets[n_star];
        let mut next_state = vec![vec![None; ch.num_inputs()]; ns];
        for &s in stable {
            for x in 0..ch.num_inputs() {
                next_state[s][x] = ch
                    .support()
                    .next_states(s, x)
                    .iter()
                    .copied()
                    .find(|&sn| rows[n_star][sn] == 0);
            }
        }
        PositivityWitness::Follower {
            next_state,
            stable_set: stable.clone(),
            n_star,
        }
    };
    PositivityResult {
        zero_set_trace: zero_sets(&rows),
        decision: if positive {
            PositivityDecision::CapacityPositive
        } else {
            PositivityDecision::CapacityZero
        },
        v_table: rows,
        witness,
    }
}

/// Run the game recursion to the given horizon.
///
/// The decision is taken at row `min(horizon, |S|)`; the `|S|`-row criterion
/// is exact, longer horizons only confirm it.
pub fn iterate_v(ch: &Channel, horizon: usize) -> PositivityResult {
    make_result(ch, v_rows(ch, horizon))
}

/// Decide capacity positivity at the sufficient horizon `|S|`.
pub fn decide_positivity(ch: &Channel) -> PositivityResult {
    iterate_v(ch, ch.num_states())
}

/// Inputs that drive play from any state to a positive state with certainty,
/// together with the worst-case number of steps needed.
///
/// `None` if some state cannot be driven, i.e. the capacity is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrivePlan {
    /// Worst-case steps to a positive state; 0 at positive states.
    pub dist: Vec<usize>,
    /// Input to send while driving; `None` at positive states.
    pub input: Vec<Option<usize>>,
}

pub fn drive_plan(ch: &Channel) -> Option<DrivePlan> {
    let ns = ch.num_states();
    const INF: usize = usize::MAX;
    let mut dist: Vec<usize> = (0..ns)
        .map(|s| if ch.is_positive_state(s) { 0 } else { INF })
        .collect();
    let mut input = vec![None; ns];
    for _ in 0..ns {
        for s in 0..ns {
            if dist[s] == 0 {
                continue;
            }
            for x in 0..ch.num_inputs() {
                let worst = ch
                    .support()
                    .next_states(s, x)
                    .iter()
                    .map(|&sn| dist[sn])
                    .max()
                    .unwrap();
                if worst != INF && worst + 1 < dist[s] {
                    dist[s] = worst + 1;
                    input[s] = Some(x);
                }
            }
        }
    }
    if dist.iter().any(|&d| d == INF) {
        return None;
    }
    Some(DrivePlan { dist, input })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn rewards_match_positive_states() {
        let ex1 = corpus::example1(0.5);
        assert_eq!((reward(&ex1, 0), reward(&ex1, 1)), (0, 1));
        let ex2 = corpus::example2(0.5);
        assert_eq!((reward(&ex2, 0), reward(&ex2, 1)), (0, 1));
        assert_eq!(reward(&corpus::identity_dmc(2), 0), 1);
    }

    #[test]
    fn v_tables_of_worked_examples() {
        let ex1 = corpus::example1(0.5);
        let r = iterate_v(&ex1, 2);
        assert_eq!(r.v_table, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        // state 1 of example2 can hold the chain at state 1, collecting a
        // reward every round
        let ex2 = corpus::example2(0.5);
        let r = iterate_v(&ex2, 2);
        assert_eq!(r.v_table, vec![vec![0, 0], vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn single_noisy_state_stays_zero() {
        let ch = corpus::all_adjacent_dmc();
        let r = iterate_v(&ch, 5);
        for row in &r.v_table {
            assert_eq!(row, &vec![0]);
        }
        assert_eq!(r.decision, PositivityDecision::CapacityZero);
    }

    #[test]
    fn decisions_on_corpus() {
        for entry in corpus::load_corpus() {
            let r = decide_positivity(&entry.channel);
            let expect = if entry.expected_capacity == Some(0.0) {
                PositivityDecision::CapacityZero
            } else {
                PositivityDecision::CapacityPositive
            };
            assert_eq!(r.decision, expect, "{}", entry.name);
        }
    }

    #[test]
    fn monotone_and_shrinking() {
        for entry in corpus::load_corpus() {
            let ch = &entry.channel;
            let r = iterate_v(ch, 2 * ch.num_states());
            for n in 0..r.v_table.len() - 1 {
                for s in 0..ch.num_states() {
                    assert!(r.v_table[n + 1][s] >= r.v_table[n][s]);
                }
                let (a, b) = (&r.zero_set_trace[n], &r.zero_set_trace[n + 1]);
                assert!(b.iter().all(|s| a.contains(s)), "S_n must shrink");
            }
        }
    }

    #[test]
    fn stabilization_past_horizon() {
        // a zero surviving to horizon |S| stays zero forever
        for seed in 0..50u64 {
            let ch = corpus::random_support_channel(seed, 3, 2, 2);
            let short = decide_positivity(&ch);
            let long = iterate_v(&ch, 3 * ch.num_states());
            assert_eq!(short.decision, long.decision, "seed {seed}");
            if short.decision == PositivityDecision::CapacityZero {
                assert!(long.v_table.last().unwrap().iter().any(|&v| v == 0));
            }
        }
    }

    #[test]
    fn follower_witness_stays_in_stable_set() {
        let ch = corpus::all_adjacent_dmc();
        let r = decide_positivity(&ch);
        let PositivityWitness::Follower { next_state, stable_set, .. } = &r.witness else {
            panic!("expected follower witness");
        };
        for &s in stable_set {
            for x in 0..ch.num_inputs() {
                let sn = next_state[s][x].expect("reply defined on stable set");
                assert!(stable_set.contains(&sn));
            }
        }
    }

    #[test]
    fn leader_witness_on_example1() {
        let r = decide_positivity(&corpus::example1(0.5));
        assert_eq!(r.decision, PositivityDecision::CapacityPositive);
        assert!(matches!(r.witness, PositivityWitness::Leader { .. }));
    }

    #[test]
    fn drive_plan_reaches_positive_states() {
        for entry in corpus::load_corpus() {
            let ch = &entry.channel;
            match drive_plan(ch) {
                Some(plan) => {
                    assert!(entry.expected_capacity != Some(0.0), "{}", entry.name);
                    for s in 0..ch.num_states() {
                        assert!(plan.dist[s] < ch.num_states());
                        if plan.dist[s] > 0 {
                            let x = plan.input[s].unwrap();
                            for &sn in ch.support().next_states(s, x) {
                                assert!(plan.dist[sn] < plan.dist[s]);
                            }
                        }
                    }
                }
                None => assert_eq!(entry.expected_capacity, Some(0.0), "{}", entry.name),
            }
        }
    }

    #[test]
    fn deterministic_witnesses() {
        let ch = corpus::example3_reconstructed();
        assert_eq!(decide_positivity(&ch), decide_positivity(&ch));
    }
}
