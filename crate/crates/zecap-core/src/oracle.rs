//! Independent ground truth: exact zero-error message counts and explicit
//! feedback code trees.
//!
//! `exact_message_count` computes the integer recursion
//! `M(n, s) = max sum_x u(x)` subject to `sum_{x in G(y,s'|s)} u(x) <=
//! M(n-1, s')` per nonempty `(y, s')`, by exhaustive search with pruning.
//! This shares no code with the LP path, so agreement between the two is a
//! meaningful check.
//!
//! `build_code_tree` turns a value-iteration run into an explicit feedback
//! code: each stage splits the surviving messages across inputs following
//! the iteration's policy, and a cleanup phase afterwards drives the state
//! to a positive one and peels off bits until a single message remains.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::Channel;
use crate::positivity::{drive_plan, DrivePlan};
use crate::value_iter::ValueIterationRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// The allocation search exceeded its node budget.
    SearchBudgetExceeded,
    /// Cleanup could not isolate messages within its depth budget.
    CleanupBudgetExceeded,
    /// No positive state is reachable with certainty, so no zero-error code
    /// carries more than one message.
    CapacityZero,
    /// The run does not contain the requested number of stage policies.
    MissingPolicies { requested: usize, available: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::SearchBudgetExceeded => write!(f, "allocation search budget exceeded"),
            OracleError::CleanupBudgetExceeded => write!(f, "cleanup depth budget exceeded"),
            OracleError::CapacityZero => write!(f, "channel cannot carry a zero-error bit"),
            OracleError::MissingPolicies { requested, available } => {
                write!(f, "need {requested} stage policies, run has {available}")
            }
        }
    }
}

/// `counts[n][s]` is the exact number of zero-error messages over `n` uses
/// from state `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageCountTable {
    pub counts: Vec<Vec<u64>>,
}

const SEARCH_BUDGET: u64 = 10_000_000;

struct AllocSearch<'a> {
    masks: &'a [u64],
    slack: Vec<u64>,
    best: u64,
    nodes: u64,
}

impl AllocSearch<'_> {
    fn cap(&self, x: usize) -> u64 {
        // every input sits in at least one constraint on a validated channel
        self.masks
            .iter()
            .zip(&self.slack)
            .filter(|(m, _)| *m & (1 << x) != 0)
            .map(|(_, s)| *s)
            .min()
            .unwrap_or(0)
    }

    fn dfs(&mut self, x: usize, sum: u64, k: usize) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > SEARCH_BUDGET {
            return Err(OracleError::SearchBudgetExceeded);
        }
        if x == k {
            if sum > self.best {
                self.best = sum;
            }
            return Ok(());
        }
        let optimistic: u64 = sum + (x..k).map(|xi| self.cap(xi)).sum::<u64>();
        if optimistic <= self.best {
            return Ok(());
        }
        let cap = self.cap(x);
        for u in (0..=cap).rev() {
            for (m, s) in self.masks.iter().zip(self.slack.iter_mut()) {
                if *m & (1 << x) != 0 {
                    *s -= u;
                }
            }
            self.dfs(x + 1, sum + u, k)?;
            for (m, s) in self.masks.iter().zip(self.slack.iter_mut()) {
                if *m & (1 << x) != 0 {
                    *s += u;
                }
            }
        }
        Ok(())
    }
}

/// Best integer allocation for one state given the previous row.
fn best_allocation(ch: &Channel, s: usize, prev: &[u64]) -> Result<u64, OracleError> {
    let mut masks = Vec::new();
    let mut rhs = Vec::new();
    for &s_next in ch.support().reachable(s) {
        for y in 0..ch.num_outputs() {
            let mask = ch.support().g_set(s, s_next, y);
            if mask != 0 {
                masks.push(mask);
                rhs.push(prev[s_next]);
            }
        }
    }
    let mut search = AllocSearch { masks: &masks, slack: rhs, best: 0, nodes: 0 };
    search.dfs(0, 0, ch.num_inputs())?;
    Ok(search.best)
}

/// Compute `M(n, s)` for `n = 0..=horizon`.
pub fn exact_message_count(ch: &Channel, horizon: usize) -> Result<MessageCountTable, OracleError> {
    let ns = ch.num_states();
    let mut counts = vec![vec![1u64; ns]];
    for _ in 1..=horizon {
        let prev = counts.last().unwrap();
        let mut row = Vec::with_capacity(ns);
        for s in 0..ns {
            row.push(best_allocation(ch, s, prev)?);
        }
        counts.push(row);
    }
    Ok(MessageCountTable { counts })
}

/// Split `m` items across weights by largest remainder; remainder ties go to
/// the lowest index.
pub fn partition_messages(m: u64, weights: &[f64]) -> Vec<u64> {
    let mut shares: Vec<u64> = weights
        .iter()
        .map(|&w| libm::floor(m as f64 * w) as u64)
        .collect();
    let mut leftover = m - shares.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = m as f64 * weights[a] - shares[a] as f64;
        let fb = m as f64 * weights[b] - shares[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if leftover == 0 {
            break;
        }
        shares[i] += 1;
        leftover -= 1;
    }
    shares
}

/// A node of a feedback code tree. `messages[i]` sends `inputs[i]`; the
/// child for the channel response `(y, s')` holds the messages whose input
/// could have produced it. Leaves have no children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeNode {
    pub state: usize,
    pub messages: Vec<u64>,
    pub inputs: Vec<usize>,
    pub children: BTreeMap<(usize, usize), CodeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTree {
    pub root: CodeNode,
    pub start_state: usize,
    /// Stages driven by the value-iteration policies; cleanup may go deeper.
    pub block_length: usize,
    pub num_messages: u64,
}

struct TreeBuilder<'a> {
    ch: &'a Channel,
    run: &'a ValueIterationRun,
    plan: DrivePlan,
    stages: usize,
    cleanup_budget: usize,
}

impl TreeBuilder<'_> {
    fn first_nonadjacent_pair(&self, s: usize) -> Option<(usize, usize)> {
        let k = self.ch.num_inputs();
        for x1 in 0..k {
            for x2 in x1 + 1..k {
                if !self.ch.adjacent(s, x1, x2) {
                    return Some((x1, x2));
                }
            }
        }
        None
    }

    /// Inputs for one round. Stage rounds follow the policy with
    /// `remaining` iterations to go; cleanup rounds drive to a positive
    /// state and then split on a non-adjacent pair.
    fn choose_inputs(&self, s: usize, messages: &[u64], depth: usize) -> Result<Vec<usize>, OracleError> {
        let m = messages.len() as u64;
        if depth < self.stages {
            let remaining = self.stages - depth;
            let pmf = &self.run.policies[remaining - 1].rows[s];
            let shares = partition_messages(m, &pmf.weights);
            let mut inputs = Vec::with_capacity(messages.len());
            for (x, &n) in shares.iter().enumerate() {
                inputs.extend(core::iter::repeat(x).take(n as usize));
            }
            return Ok(inputs);
        }
        if depth - self.stages >= self.cleanup_budget {
            return Err(OracleError::CleanupBudgetExceeded);
        }
        if self.ch.is_positive_state(s) {
            let (x1, x2) = self
                .first_nonadjacent_pair(s)
                .expect("positive state has a non-adjacent pair");
            let half = (messages.len() + 1) / 2;
            return Ok((0..messages.len())
                .map(|i| if i < half { x1 } else { x2 })
                .collect());
        }
        let x = self.plan.input[s].expect("non-positive state has a drive input");
        Ok(vec![x; messages.len()])
    }

    fn build(&self, s: usize, messages: Vec<u64>, depth: usize) -> Result<CodeNode, OracleError> {
        if messages.len() <= 1 && depth >= self.stages {
            return Ok(CodeNode { state: s, messages, inputs: Vec::new(), children: BTreeMap::new() });
        }
        if messages.len() <= 1 {
            // bits already resolved; idle through the remaining stages on
            // input 0 so every path has the full block length
            let inputs = vec![0; messages.len()];
            return self.expand(s, messages, inputs, depth);
        }
        let inputs = self.choose_inputs(s, &messages, depth)?;
        self.expand(s, messages, inputs, depth)
    }

    fn expand(
        &self,
        s: usize,
        messages: Vec<u64>,
        inputs: Vec<usize>,
        depth: usize,
    ) -> Result<CodeNode, OracleError> {
        let mut children = BTreeMap::new();
        let used: u64 = inputs.iter().fold(0u64, |m, &x| m | 1 << x);
        for &s_next in self.ch.support().reachable(s) {
            for y in 0..self.ch.num_outputs() {
                let g = self.ch.support().g_set(s, s_next, y);
                if g & used == 0 {
                    continue;
                }
                let surviving: Vec<u64> = messages
                    .iter()
                    .zip(&inputs)
                    .filter(|(_, &x)| g & (1 << x) != 0)
                    .map(|(&msg, _)| msg)
                    .collect();
                children.insert((y, s_next), self.build(s_next, surviving, depth + 1)?);
            }
        }
        Ok(CodeNode { state: s, messages, inputs, children })
    }
}

/// Build an explicit zero-error feedback code for `num_messages` messages
/// over `stages` policy-driven rounds plus cleanup.
pub fn build_code_tree(
    ch: &Channel,
    run: &ValueIterationRun,
    start_state: usize,
    stages: usize,
    num_messages: u64,
) -> Result<CodeTree, OracleError> {
    if num_messages <= 1 {
        // nothing to transmit; a bare leaf is already a zero-error code
        let root = CodeNode {
            state: start_state,
            messages: (0..num_messages).collect(),
            inputs: Vec::new(),
            children: BTreeMap::new(),
        };
        return Ok(CodeTree { root, start_state, block_length: stages, num_messages });
    }
    if run.policies.len() < stages {
        return Err(OracleError::MissingPolicies {
            requested: stages,
            available: run.policies.len(),
        });
    }
    let plan = match drive_plan(ch) {
        Some(p) => p,
        None => return Err(OracleError::CapacityZero),
    };
    let bits = 64 - u64::leading_zeros(num_messages.max(1) - 1) as usize;
    let builder = TreeBuilder {
        ch,
        run,
        plan,
        stages,
        // each resolved bit needs at most |S| - 1 drive steps plus a split
        cleanup_budget: ch.num_states() * bits + ch.num_states(),
    };
    let root = builder.build(start_state, (0..num_messages).collect(), 0)?;
    Ok(CodeTree { root, start_state, block_length: stages, num_messages })
}

/// Result of walking a code tree against the channel topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeReport {
    /// Structure is consistent and every leaf holds at most one message.
    pub zero_error: bool,
    /// Internal nodes are well formed and children match the support sets.
    pub consistent: bool,
    pub worst_depth: usize,
    pub max_leaf_ambiguity: usize,
    pub leaves: usize,
}

fn walk(ch: &Channel, node: &CodeNode, depth: usize, report: &mut CodeReport) {
    if node.children.is_empty() {
        report.worst_depth = report.worst_depth.max(depth);
        report.max_leaf_ambiguity = report.max_leaf_ambiguity.max(node.messages.len());
        report.leaves += 1;
        if node.messages.len() > 1 {
            report.zero_error = false;
        }
        return;
    }
    if node.inputs.len() != node.messages.len() {
        report.consistent = false;
        return;
    }
    let used: u64 = node.inputs.iter().fold(0u64, |m, &x| m | 1 << x);
    for &s_next in ch.support().reachable(node.state) {
        for y in 0..ch.num_outputs() {
            let g = ch.support().g_set(node.state, s_next, y);
            if g & used == 0 {
                if node.children.contains_key(&(y, s_next)) {
                    report.consistent = false;
                }
                continue;
            }
            let expect: Vec<u64> = node
                .messages
                .iter()
                .zip(&node.inputs)
                .filter(|(_, &x)| g & (1 << x) != 0)
                .map(|(&m, _)| m)
                .collect();
            match node.children.get(&(y, s_next)) {
                Some(child) if child.state == s_next && child.messages == expect => {
                    walk(ch, child, depth + 1, report);
                }
                _ => report.consistent = false,
            }
        }
    }
}

/// Exhaustively check that a tree is a zero-error feedback code: every
/// channel response has the right child, and no leaf is ambiguous.
pub fn verify_code_tree(ch: &Channel, tree: &CodeTree) -> CodeReport {
    let mut report = CodeReport {
        zero_error: true,
        consistent: true,
        worst_depth: 0,
        max_leaf_ambiguity: 0,
        leaves: 0,
    };
    walk(ch, &tree.root, 0, &mut report);
    if !report.consistent {
        report.zero_error = false;
    }
    report
}
