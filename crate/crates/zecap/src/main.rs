//! Command line front end for the zero-error feedback capacity solver.
//!
//! Exit codes: 0 success/pass, 1 usage or file error, 2 capacity decided
//! zero (`positivity`), 3 candidate rejected (`bellman`), 4 iteration did
//! not converge (`capacity`).

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zecap::format::{fmt12, read_candidate, read_channel, write_channel, write_trace_csv};
use zecap_core::channel::Channel;
use zecap_core::inner::{build_inner_lp, solve_inner, InnerError, InputPmf};
use zecap_core::oracle::{build_code_tree, exact_message_count, verify_code_tree, CodeNode};
use zecap_core::positivity::{decide_positivity, PositivityDecision, PositivityWitness};
use zecap_core::value_iter::{
    dmc_capacity, run_value_iteration_with, w_table, ValueIterationRun,
};
use zecap_core::{bellman, corpus};

#[derive(Parser)]
#[command(name = "zecap", about = "Zero-error feedback capacity of finite state channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a channel file and print a summary.
    Validate { channel: PathBuf },
    /// Decide whether the capacity is positive; exit 2 when it is zero.
    Positivity { channel: PathBuf },
    /// Run value iteration and print capacity bounds; exit 4 if the
    /// bounds do not close within the tolerance.
    Capacity(CapacityArgs),
    /// Verify a candidate fixed point; exit 3 on failure.
    Bellman {
        channel: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Exact message counts and, optionally, an explicit code tree.
    Oracle {
        channel: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// Start state for the code tree; the tree carries the exact
        /// message count for that state and horizon.
        #[arg(long)]
        tree: Option<String>,
    },
    /// Capacity of a single-state channel via the one-shot reduction.
    Dmc { channel: PathBuf },
    /// Reference channel corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Args)]
struct CapacityArgs {
    channel: PathBuf,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    tol: f64,
    /// Write the per-iteration bounds to a CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Also print the W table up to this horizon.
    #[arg(long)]
    w_table: Option<usize>,
    /// Worker threads for the per-state inner solves; results do not
    /// depend on this. Defaults to ZECAP_THREADS, then 1.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the final inner linear programs as plain tableaus.
    #[arg(long)]
    dump_lp: bool,
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Print the corpus entries and their expected capacities.
    List,
    /// Write every corpus channel as a JSON file into a directory.
    Export { dir: PathBuf },
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    let _ = writeln!(std::io::stderr(), "error: {msg}");
    ExitCode::from(1)
}

fn load(path: &PathBuf) -> Result<Channel, ExitCode> {
    read_channel(path).map_err(|e| fail(format_args!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    // clap's default usage-error exit code is 2, which is reserved here for
    // the zero-capacity decision
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Validate { channel } => cmd_validate(&channel),
        Command::Positivity { channel } => cmd_positivity(&channel),
        Command::Capacity(args) => cmd_capacity(&args),
        Command::Bellman { channel, candidate, tol } => cmd_bellman(&channel, &candidate, tol),
        Command::Oracle { channel, horizon, tree } => cmd_oracle(&channel, horizon, tree.as_deref()),
        Command::Dmc { channel } => cmd_dmc(&channel),
        Command::Corpus { action } => cmd_corpus(action),
    }
}

fn cmd_validate(path: &PathBuf) -> ExitCode {
    let ch = match load(path) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    println!("ok");
    println!("states: {}", ch.num_states());
    println!("inputs: {}", ch.num_inputs());
    println!("outputs: {}", ch.num_outputs());
    println!("transitions: {}", ch.transitions().len());
    println!("support_only: {}", ch.support_only());
    ExitCode::SUCCESS
}

fn cmd_positivity(path: &PathBuf) -> ExitCode {
    let ch = match load(path) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    let result = decide_positivity(&ch);
    println!("decision: {:?}", result.decision);
    for (n, row) in result.v_table.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        println!("v[{n}]: {}", cells.join(" "));
    }
    match &result.witness {
        PositivityWitness::Leader { input_map } => {
            for (s, &x) in input_map.iter().enumerate() {
                println!(
                    "witness_input {}: {}",
                    ch.state_names()[s],
                    ch.input_names()[x]
                );
            }
        }
        PositivityWitness::Follower { stable_set, n_star, .. } => {
            let names: Vec<&str> =
                stable_set.iter().map(|&s| ch.state_names()[s].as_str()).collect();
            println!("stable_zero_set: {}", names.join(" "));
            println!("stabilized_at: {n_star}");
        }
    }
    if result.decision == PositivityDecision::CapacityZero {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("ZECAP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

/// Per-state solves split across a thread scope; state order, and hence the
/// result, is preserved regardless of the thread count.
fn run_threaded(
    ch: &Channel,
    iters: usize,
    tol: f64,
    threads: usize,
) -> Result<ValueIterationRun, InnerError> {
    let mut step = |ch: &Channel, j: &[f64]| -> Result<Vec<(f64, InputPmf)>, InnerError> {
        if threads <= 1 || ch.num_states() <= 1 {
            return (0..ch.num_states()).map(|s| solve_inner(ch, s, j)).collect();
        }
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..ch.num_states())
                .map(|s| scope.spawn(move || solve_inner(ch, s, j)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("inner solve does not panic"))
                .collect()
        })
    };
    run_value_iteration_with(ch, iters, tol, &mut step)
}

fn cmd_capacity(args: &CapacityArgs) -> ExitCode {
    let ch = match load(&args.channel) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    if args.iters < 1 {
        return fail("--iters must be at least 1");
    }
    if !(args.tol > 0.0) {
        return fail("--tol must be positive");
    }
    let threads = thread_count(args.threads);
    let run = match run_threaded(&ch, args.iters, args.tol, threads) {
        Ok(run) => run,
        Err(e) => return fail(e),
    };
    println!("decision: {:?}", run.positivity.decision);
    println!("iterations: {}", run.estimate.iterations);
    println!("converged: {}", run.estimate.converged);
    println!("lower: {}", fmt12(run.estimate.lower));
    println!("upper: {}", fmt12(run.estimate.upper));
    println!("point: {}", fmt12(run.estimate.point_estimate));
    if let Some(n) = args.w_table {
        match w_table(&ch, n) {
            Ok(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|&w| fmt12(w)).collect();
                    println!("w[{i}]: {}", cells.join(" "));
                }
            }
            Err(e) => return fail(e),
        }
    }
    if args.dump_lp {
        let j = &run.history.last().unwrap().values;
        for s in 0..ch.num_states() {
            let lp = build_inner_lp(&ch, s, j);
            println!("lp state {}:", ch.state_names()[s]);
            let obj: Vec<String> = lp.objective.iter().map(|&c| fmt12(c)).collect();
            println!("  objective: {}", obj.join(" "));
            for (row, rhs) in &lp.constraints {
                let cells: Vec<String> = row.iter().map(|&c| fmt12(c)).collect();
                println!("  le: {} | {}", cells.join(" "), fmt12(*rhs));
            }
            if let Some((row, rhs)) = &lp.equality {
                let cells: Vec<String> = row.iter().map(|&c| fmt12(c)).collect();
                println!("  eq: {} | {}", cells.join(" "), fmt12(*rhs));
            }
        }
    }
    if let Some(path) = &args.trace {
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(format_args!("{}: {e}", path.display())),
        };
        if let Err(e) = write_trace_csv(file, &run.trace) {
            return fail(e);
        }
    }
    if run.estimate.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn cmd_bellman(channel: &PathBuf, candidate: &PathBuf, tol: f64) -> ExitCode {
    let ch = match load(channel) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    let cand = match read_candidate(candidate, &ch) {
        Ok(c) => c,
        Err(e) => return fail(format_args!("{}: {e}", candidate.display())),
    };
    let report = match bellman::verify(&ch, &cand, tol) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for (s, r) in report.residuals.iter().enumerate() {
        println!("residual {}: {}", ch.state_names()[s], fmt12(*r));
    }
    println!("max_abs_residual: {}", fmt12(report.max_abs_residual));
    println!("tolerance: {}", fmt12(report.tolerance));
    println!("verdict: {}", if report.pass { "pass" } else { "fail" });
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn print_tree(ch: &Channel, node: &CodeNode, indent: usize) {
    let pad = "  ".repeat(indent);
    let msgs: Vec<String> = node.messages.iter().map(|m| m.to_string()).collect();
    let inputs: Vec<&str> = node.inputs.iter().map(|&x| ch.input_names()[x].as_str()).collect();
    println!(
        "{pad}node state={} messages=[{}] inputs=[{}]",
        ch.state_names()[node.state],
        msgs.join(","),
        inputs.join(",")
    );
    for ((y, s_next), child) in &node.children {
        println!(
            "{pad}  on output={} next={}:",
            ch.output_names()[*y],
            ch.state_names()[*s_next]
        );
        print_tree(ch, child, indent + 2);
    }
}

fn cmd_oracle(path: &PathBuf, horizon: usize, tree: Option<&str>) -> ExitCode {
    let ch = match load(path) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    let table = match exact_message_count(&ch, horizon) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    for (n, row) in table.counts.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|m| m.to_string()).collect();
        println!("m[{n}]: {}", cells.join(" "));
    }
    let Some(state_name) = tree else {
        return ExitCode::SUCCESS;
    };
    let Some(s) = ch.state_index(state_name) else {
        return fail(format_args!("unknown state {state_name:?}"));
    };
    let run = match run_threaded(&ch, horizon, 0.0, 1) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let messages = table.counts[horizon][s];
    let code = match build_code_tree(&ch, &run, s, horizon, messages) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let report = verify_code_tree(&ch, &code);
    println!("tree_messages: {messages}");
    println!("tree_zero_error: {}", report.zero_error);
    println!("tree_worst_depth: {}", report.worst_depth);
    print_tree(&ch, &code.root, 0);
    ExitCode::SUCCESS
}

fn cmd_dmc(path: &PathBuf) -> ExitCode {
    let ch = match load(path) {
        Ok(ch) => ch,
        Err(code) => return code,
    };
    match dmc_capacity(&ch) {
        Ok(c) => {
            println!("capacity: {}", fmt12(c));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn cmd_corpus(action: CorpusAction) -> ExitCode {
    match action {
        CorpusAction::List => {
            for entry in corpus::load_corpus() {
                let cap = entry
                    .expected_capacity
                    .map(fmt12)
                    .unwrap_or_else(|| "unknown".into());
                println!("{}: capacity={} ({})", entry.name, cap, entry.notes);
            }
            ExitCode::SUCCESS
        }
        CorpusAction::Export { dir } => {
            if let Err(e) = std::fs::create_dir_all(&dir) {
                return fail(format_args!("{}: {e}", dir.display()));
            }
            for entry in corpus::load_corpus() {
                let path = dir.join(format!("{}.json", entry.name));
                if let Err(e) = write_channel(&path, &entry.channel) {
                    return fail(format_args!("{}: {e}", path.display()));
                }
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
    }
}
