//! Reference channels with known zero-error behaviour.
//!
//! The three worked channels (`example1`..`example3_reconstructed`) come with
//! analytical capacities; the DMC entries cover the single-state reduction.
//! `example3_reconstructed` is a reverse-engineered topology: its figure is
//! not available, so the transition structure was recovered from the known
//! fixed-point system and optimal policy, and the consistency tests tie it
//! back to those numbers.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bellman;
use crate::channel::{Channel, ChannelSpec, TransitionSpec};

/// A named channel with its expected capacity, if known in closed form.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub channel: Channel,
    /// Zero-error feedback capacity in bits per channel use.
    pub expected_capacity: Option<f64>,
    pub notes: &'static str,
}

fn tr(s: &str, x: &str, y: &str, sn: &str, p: Option<f64>) -> TransitionSpec {
    TransitionSpec {
        state: s.to_string(),
        input: x.to_string(),
        output: y.to_string(),
        next_state: sn.to_string(),
        prob: p,
    }
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// Two states: a noisy BSC state 0 that always moves to state 1, and a
/// noiseless state 1 that returns to state 0 with probability `p`.
///
/// The state evolution is input-independent, so the support (and hence the
/// zero-error capacity, 1/2) is the same for every `p` in (0, 1).
pub fn example1(p: f64) -> Channel {
    let cross = 0.25;
    let mut transitions = Vec::new();
    for x in 0..2usize {
        for y in 0..2usize {
            let q = if x == y { 1.0 - cross } else { cross };
            transitions.push(tr(
                "s0",
                &x.to_string(),
                &y.to_string(),
                "s1",
                Some(q),
            ));
        }
        let xs = x.to_string();
        transitions.push(tr("s1", &xs, &xs, "s0", Some(p)));
        transitions.push(tr("s1", &xs, &xs, "s1", Some(1.0 - p)));
    }
    ChannelSpec {
        states: vec!["s0".into(), "s1".into()],
        inputs: names("", 2),
        outputs: names("", 2),
        transitions,
    }
    .validate()
    .expect("example1 is valid")
}

/// Two states driven by the output: a Z-channel in state 0 (input 0 flips to
/// output 1 with probability `1 - q`) and a noiseless state 1.
///
/// The message counts form a Fibonacci sequence and the capacity is the log
/// of the golden ratio.
pub fn example2(q: f64) -> Channel {
    ChannelSpec {
        states: vec!["s0".into(), "s1".into()],
        inputs: names("", 2),
        outputs: names("", 2),
        transitions: vec![
            tr("s0", "0", "0", "s0", Some(q)),
            tr("s0", "0", "1", "s1", Some(1.0 - q)),
            tr("s0", "1", "1", "s1", Some(1.0)),
            tr("s1", "0", "0", "s0", Some(1.0)),
            tr("s1", "1", "1", "s1", Some(1.0)),
        ],
    }
    .validate()
    .expect("example2 is valid")
}

/// Reconstructed three-state channel with trinary alphabets.
///
/// State 0 is perfect (each input yields a distinct output and drives the
/// state to the input's index), state 1 carries one bit (inputs 0 and 1
/// share an output and lead to state 2, input 2 is distinguishable and leads
/// to state 0), state 2 carries nothing (one output, always to state 0).
pub fn example3_reconstructed() -> Channel {
    let mut transitions = Vec::new();
    for x in 0..3usize {
        let xs = x.to_string();
        transitions.push(tr("s0", &xs, &xs, &format!("s{x}"), None));
    }
    transitions.push(tr("s1", "0", "0", "s2", None));
    transitions.push(tr("s1", "1", "0", "s2", None));
    transitions.push(tr("s1", "2", "1", "s0", None));
    for x in 0..3usize {
        transitions.push(tr("s2", &x.to_string(), "0", "s0", None));
    }
    ChannelSpec {
        states: names("s", 3),
        inputs: names("", 3),
        outputs: names("", 3),
        transitions,
    }
    .validate()
    .expect("example3 is valid")
}

/// The pentagon channel: five inputs, each output `y` producible by the two
/// cyclically neighbouring inputs `{y, y+1}`.
pub fn pentagon() -> Channel {
    let mut transitions = Vec::new();
    for x in 0..5usize {
        for y in [x, (x + 4) % 5] {
            transitions.push(tr("s0", &x.to_string(), &y.to_string(), "s0", None));
        }
    }
    ChannelSpec {
        states: vec!["s0".into()],
        inputs: names("", 5),
        outputs: names("", 5),
        transitions,
    }
    .validate()
    .expect("pentagon is valid")
}

/// Noiseless DMC with `k` inputs: output equals input.
pub fn identity_dmc(k: usize) -> Channel {
    let transitions = (0..k)
        .map(|x| tr("s0", &x.to_string(), &x.to_string(), "s0", None))
        .collect();
    ChannelSpec {
        states: vec!["s0".into()],
        inputs: names("", k),
        outputs: names("", k),
        transitions,
    }
    .validate()
    .expect("identity DMC is valid")
}

/// A single-state channel where every input can produce every output, so all
/// input pairs are adjacent and the zero-error capacity is zero.
pub fn all_adjacent_dmc() -> Channel {
    let mut transitions = Vec::new();
    for x in 0..2usize {
        for y in 0..2usize {
            transitions.push(tr("s0", &x.to_string(), &y.to_string(), "s0", None));
        }
    }
    ChannelSpec {
        states: vec!["s0".into()],
        inputs: names("", 2),
        outputs: names("", 2),
        transitions,
    }
    .validate()
    .expect("all-adjacent DMC is valid")
}

/// All corpus entries.
pub fn load_corpus() -> Vec<CorpusEntry> {
    let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
    let (_, rho3) = bellman::solve_example3_gain();
    vec![
        CorpusEntry {
            name: "example1",
            channel: example1(0.5),
            expected_capacity: Some(0.5),
            notes: "noisy/noiseless alternation; capacity 1/2, independent of p",
        },
        CorpusEntry {
            name: "example2",
            channel: example2(0.5),
            expected_capacity: Some(libm::log2(phi)),
            notes: "output-driven Z/noiseless pair; Fibonacci message counts, log2 of the golden ratio",
        },
        CorpusEntry {
            name: "example3_reconstructed",
            channel: example3_reconstructed(),
            expected_capacity: Some(rho3),
            notes: "reconstructed topology; gain is log2((1-a)/a) at the root of a=(1-a)^3",
        },
        CorpusEntry {
            name: "pentagon",
            channel: pentagon(),
            expected_capacity: Some(libm::log2(2.5)),
            notes: "cyclic confusability; feedback capacity log2(5/2)",
        },
        CorpusEntry {
            name: "identity_dmc_2",
            channel: identity_dmc(2),
            expected_capacity: Some(1.0),
            notes: "noiseless binary channel",
        },
        CorpusEntry {
            name: "identity_dmc_3",
            channel: identity_dmc(3),
            expected_capacity: Some(libm::log2(3.0)),
            notes: "noiseless trinary channel",
        },
        CorpusEntry {
            name: "all_adjacent_dmc",
            channel: all_adjacent_dmc(),
            expected_capacity: Some(0.0),
            notes: "every input pair shares an output; capacity zero",
        },
    ]
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic random support-only channel for tests: every `(s, x)` row
/// gets at least one transition, extra `(y, s')` pairs are included with
/// probability ~1/3.
pub fn random_support_channel(seed: u64, num_states: usize, num_inputs: usize, num_outputs: usize) -> Channel {
    let mut rng = seed.wrapping_mul(0x2545f4914f6cdd1d) ^ 0x853c49e6748fea9b;
    let mut transitions = Vec::new();
    for s in 0..num_states {
        for x in 0..num_inputs {
            let mut any = false;
            for y in 0..num_outputs {
                for sn in 0..num_states {
                    if splitmix64(&mut rng) % 3 == 0 {
                        transitions.push(tr(
                            &format!("s{s}"),
                            &x.to_string(),
                            &y.to_string(),
                            &format!("s{sn}"),
                            None,
                        ));
                        any = true;
                    }
                }
            }
            if !any {
                let y = (splitmix64(&mut rng) % num_outputs as u64) as usize;
                let sn = (splitmix64(&mut rng) % num_states as u64) as usize;
                transitions.push(tr(
                    &format!("s{s}"),
                    &x.to_string(),
                    &y.to_string(),
                    &format!("s{sn}"),
                    None,
                ));
            }
        }
    }
    ChannelSpec {
        states: names("s", num_states),
        inputs: names("", num_inputs),
        outputs: names("", num_outputs),
        transitions,
    }
    .validate()
    .expect("random support channel is valid")
}
