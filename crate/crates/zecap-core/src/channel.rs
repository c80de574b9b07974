//! Finite state channel model and its support structure.
//!
//! A channel is described by its alphabets and the support (optionally the
//! probabilities) of `p(y, s' | x, s)`. The zero-error problem depends only
//! on which transitions have positive probability, so probabilities are
//! optional: a "support-only" channel omits them entirely.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Probabilities of a `(state, input)` row must sum to one within this.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// One transition entry of an unvalidated channel description.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec {
    pub state: String,
    pub input: String,
    pub output: String,
    pub next_state: String,
    /// `None` marks a support-only entry.
    pub prob: Option<f64>,
}

/// An unvalidated channel description with string identifiers.
#[derive(Debug, Clone, Default)]
pub struct ChannelSpec {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
}

/// A violation found during validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelError {
    EmptyAlphabet(&'static str),
    /// More inputs than the bitmask representation supports.
    AlphabetTooLarge(&'static str, usize),
    DuplicateIdentifier(&'static str, String),
    UnknownIdentifier(&'static str, String),
    /// A `(state, input)` pair with no transition at all.
    MissingInputRow(String, String),
    BadProbabilitySum(String, String, f64),
    DuplicateEntry(String, String, String, String),
    /// An explicit zero (or negative) probability; ambiguous, so rejected.
    NonPositiveProbability(String, String, String, String),
    /// Some entries carry probabilities and some do not.
    MixedWeights,
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::EmptyAlphabet(kind) => write!(f, "empty {kind} alphabet"),
            ChannelError::AlphabetTooLarge(kind, n) => {
                write!(f, "{kind} alphabet has {n} symbols, at most 64 supported")
            }
            ChannelError::DuplicateIdentifier(kind, name) => {
                write!(f, "duplicate {kind} identifier {name:?}")
            }
            ChannelError::UnknownIdentifier(kind, name) => {
                write!(f, "transition references unknown {kind} {name:?}")
            }
            ChannelError::MissingInputRow(s, x) => {
                write!(f, "no transition for state {s:?} with input {x:?}")
            }
            ChannelError::BadProbabilitySum(s, x, sum) => write!(
                f,
                "probabilities for state {s:?}, input {x:?} sum to {sum} instead of 1"
            ),
            ChannelError::DuplicateEntry(s, x, y, sn) => write!(
                f,
                "duplicate transition ({s:?}, {x:?}, {y:?}, {sn:?})"
            ),
            ChannelError::NonPositiveProbability(s, x, y, sn) => write!(
                f,
                "transition ({s:?}, {x:?}, {y:?}, {sn:?}) has a non-positive probability"
            ),
            ChannelError::MixedWeights => {
                write!(f, "either all transitions carry probabilities or none may")
            }
        }
    }
}

/// A validated transition with dense indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub input: usize,
    pub output: usize,
    pub next_state: usize,
    pub prob: Option<f64>,
}

/// Support sets of a validated channel.
///
/// `g_set(s, s', y)` is the set `G(y, s' | s)` of inputs that can move the
/// channel from state `s` to `s'` while producing output `y`, stored as a
/// bitmask over input indices.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    num_states: usize,
    num_inputs: usize,
    num_outputs: usize,
    g: Vec<u64>,
    /// `S(s, x)`: next states reachable from `s` under input `x`.
    next_states: Vec<Vec<Vec<usize>>>,
    /// States `s'` with `G(y, s' | s)` nonempty for some `y`.
    reachable: Vec<Vec<usize>>,
}

impl SupportIndex {
    fn build(num_states: usize, num_inputs: usize, num_outputs: usize, tr: &[Transition]) -> Self {
        let mut g = Vec::new();
        g.resize(num_states * num_states * num_outputs, 0u64);
        for t in tr {
            g[(t.state * num_states + t.next_state) * num_outputs + t.output] |= 1 << t.input;
        }
        let mut next_states = Vec::with_capacity(num_states);
        let mut reachable = Vec::with_capacity(num_states);
        for s in 0..num_states {
            let mut per_input: Vec<Vec<usize>> = Vec::new();
            per_input.resize(num_inputs, Vec::new());
            let mut reach = Vec::new();
            for s_next in 0..num_states {
                let mut any = false;
                for y in 0..num_outputs {
                    let mask = g[(s * num_states + s_next) * num_outputs + y];
                    any |= mask != 0;
                    for x in iter_mask(mask) {
                        if per_input[x].last() != Some(&s_next) {
                            per_input[x].push(s_next);
                        }
                    }
                }
                if any {
                    reach.push(s_next);
                }
            }
            next_states.push(per_input);
            reachable.push(reach);
        }
        SupportIndex { num_states, num_inputs, num_outputs, g, next_states, reachable }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// `G(y, s' | s)` as a bitmask over inputs.
    pub fn g_set(&self, s: usize, s_next: usize, y: usize) -> u64 {
        self.g[(s * self.num_states + s_next) * self.num_outputs + y]
    }

    /// `G(y, s' | s)` as a sorted list of input indices.
    pub fn g_inputs(&self, s: usize, s_next: usize, y: usize) -> Vec<usize> {
        iter_mask(self.g_set(s, s_next, y)).collect()
    }

    /// `S(s, x)`: the states reachable from `s` when sending `x`.
    pub fn next_states(&self, s: usize, x: usize) -> &[usize] {
        &self.next_states[s][x]
    }

    /// States `s'` reachable from `s` under some input.
    pub fn reachable(&self, s: usize) -> &[usize] {
        &self.reachable[s]
    }
}

/// Iterate the set bits of an input mask as input indices.
pub fn iter_mask(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |x| mask >> x & 1 == 1)
}

/// A validated finite state channel.
///
/// Identifiers are mapped to dense indices at validation; the support index
/// is precomputed. Immutable afterwards, so shared reads are safe.
#[derive(Debug, Clone)]
pub struct Channel {
    state_names: Vec<String>,
    input_names: Vec<String>,
    output_names: Vec<String>,
    transitions: Vec<Transition>,
    support_only: bool,
    support: SupportIndex,
}

impl ChannelSpec {
    /// Check all invariants and build the indexed [`Channel`].
    ///
    /// All violations are collected rather than stopping at the first.
    pub fn validate(&self) -> Result<Channel, Vec<ChannelError>> {
        let mut errors = Vec::new();
        for (kind, names) in [
            ("state", &self.states),
            ("input", &self.inputs),
            ("output", &self.outputs),
        ] {
            if names.is_empty() {
                errors.push(ChannelError::EmptyAlphabet(kind));
            }
            let mut seen = BTreeSet::new();
            for n in names {
                if !seen.insert(n) {
                    errors.push(ChannelError::DuplicateIdentifier(kind, n.clone()));
                }
            }
        }
        if self.inputs.len() > 64 {
            errors.push(ChannelError::AlphabetTooLarge("input", self.inputs.len()));
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let index_of = |names: &[String], kind: &'static str, name: &String, errs: &mut Vec<ChannelError>| {
            match names.iter().position(|n| n == name) {
                Some(i) => Some(i),
                None => {
                    errs.push(ChannelError::UnknownIdentifier(kind, name.clone()));
                    None
                }
            }
        };

        let mut transitions = Vec::with_capacity(self.transitions.len());
        let mut seen = BTreeSet::new();
        let mut any_prob = false;
        let mut any_support_only = false;
        for t in &self.transitions {
            let s = index_of(&self.states, "state", &t.state, &mut errors);
            let x = index_of(&self.inputs, "input", &t.input, &mut errors);
            let y = index_of(&self.outputs, "output", &t.output, &mut errors);
            let sn = index_of(&self.states, "state", &t.next_state, &mut errors);
            let (Some(s), Some(x), Some(y), Some(sn)) = (s, x, y, sn) else {
                continue;
            };
            if !seen.insert((s, x, y, sn)) {
                errors.push(ChannelError::DuplicateEntry(
                    t.state.clone(),
                    t.input.clone(),
                    t.output.clone(),
                    t.next_state.clone(),
                ));
                continue;
            }
            match t.prob {
                Some(p) if p <= 0.0 => {
                    errors.push(ChannelError::NonPositiveProbability(
                        t.state.clone(),
                        t.input.clone(),
                        t.output.clone(),
                        t.next_state.clone(),
                    ));
                    continue;
                }
                Some(_) => any_prob = true,
                None => any_support_only = true,
            }
            transitions.push(Transition { state: s, input: x, output: y, next_state: sn, prob: t.prob });
        }
        if any_prob && any_support_only {
            errors.push(ChannelError::MixedWeights);
        }
        let support_only = !any_prob;

        for s in 0..self.states.len() {
            for x in 0..self.inputs.len() {
                let row: Vec<&Transition> = transitions
                    .iter()
                    .filter(|t| t.state == s && t.input == x)
                    .collect();
                if row.is_empty() {
                    errors.push(ChannelError::MissingInputRow(
                        self.states[s].clone(),
                        self.inputs[x].clone(),
                    ));
                } else if !support_only {
                    let sum: f64 = row.iter().map(|t| t.prob.unwrap_or(0.0)).sum();
                    if libm::fabs(sum - 1.0) > PROB_SUM_TOL {
                        errors.push(ChannelError::BadProbabilitySum(
                            self.states[s].clone(),
                            self.inputs[x].clone(),
                            sum,
                        ));
                    }
                }
            }
        }

        if !errors.is_empty() {
            return Err(errors);
        }
        let support = SupportIndex::build(
            self.states.len(),
            self.inputs.len(),
            self.outputs.len(),
            &transitions,
        );
        Ok(Channel {
            state_names: self.states.clone(),
            input_names: self.inputs.clone(),
            output_names: self.outputs.clone(),
            transitions,
            support_only,
            support,
        })
    }
}

/// Error of [`Channel::as_dmc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotSingleState(pub usize);

impl fmt::Display for NotSingleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "channel has {} states, a DMC view needs exactly one", self.0)
    }
}

/// Single-state view of a channel, exposing `G(y)`.
#[derive(Debug, Clone, Copy)]
pub struct DmcView<'a> {
    channel: &'a Channel,
}

impl<'a> DmcView<'a> {
    /// `G(y)`: inputs that can produce output `y`, as a bitmask.
    pub fn g(&self, y: usize) -> u64 {
        self.channel.support().g_set(0, 0, y)
    }

    pub fn g_inputs(&self, y: usize) -> Vec<usize> {
        iter_mask(self.g(y)).collect()
    }

    pub fn channel(&self) -> &'a Channel {
        self.channel
    }
}

impl Channel {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Whether the channel was given without probabilities.
    pub fn support_only(&self) -> bool {
        self.support_only
    }

    /// The precomputed support sets `G(y, s' | s)`.
    pub fn support(&self) -> &SupportIndex {
        &self.support
    }

    /// Two inputs are adjacent at `s` if some `(y, s')` is reachable by both;
    /// one channel use then cannot distinguish them.
    pub fn adjacent(&self, s: usize, x1: usize, x2: usize) -> bool {
        debug_assert_ne!(x1, x2);
        let pair = 1 << x1 | 1 << x2;
        for s_next in 0..self.num_states() {
            for y in 0..self.num_outputs() {
                if self.support.g_set(s, s_next, y) & pair == pair {
                    return true;
                }
            }
        }
        false
    }

    /// A state is positive if it has a non-adjacent input pair, i.e. it can
    /// carry one error-free bit.
    pub fn is_positive_state(&self, s: usize) -> bool {
        for x1 in 0..self.num_inputs() {
            for x2 in x1 + 1..self.num_inputs() {
                if !self.adjacent(s, x1, x2) {
                    return true;
                }
            }
        }
        false
    }

    /// View a single-state channel as a DMC.
    pub fn as_dmc(&self) -> Result<DmcView<'_>, NotSingleState> {
        if self.num_states() == 1 {
            Ok(DmcView { channel: self })
        } else {
            Err(NotSingleState(self.num_states()))
        }
    }

    /// Convert back to a spec with string identifiers.
    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec {
            states: self.state_names.clone(),
            inputs: self.input_names.clone(),
            outputs: self.output_names.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionSpec {
                    state: self.state_names[t.state].clone(),
                    input: self.input_names[t.input].clone(),
                    output: self.output_names[t.output].clone(),
                    next_state: self.state_names[t.next_state].clone(),
                    prob: t.prob,
                })
                .collect(),
        }
    }
}
