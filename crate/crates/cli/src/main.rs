use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use chemski_cli::commands::{self, cost_table, decoded_roots, verify_text};
use chemski_cli::input::{parse_costs, RunSpec, Source};
use chemski_core::cost::{account, CostVector};
use chemski_core::schema::SchemaForms;
use chemski_core::token::plain_names;
use chemski_core::{serialize_mol, StepRecord, TokenMode};
use clap::{Args, Parser, Subcommand};

const DEFAULT_PORT: u16 = 8080;

#[derive(Parser)]
#[command(name = "chemski", version, about = "Token-conservative graph rewriting for SKI terms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// SKI term, e.g. "S K K I"
    #[arg(long)]
    term: Option<String>,
    /// Mol file
    #[arg(long)]
    mol: Option<PathBuf>,
}

impl InputArgs {
    fn source(&self) -> Result<Source> {
        let mol = match &self.mol {
            Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
            None => None,
        };
        Ok(Source::pick(self.term.clone(), mol)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the mol of a term, or the capped, normalized form of a mol file.
    Parse {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Reduce until normal form or until the pass budget runs out.
    /// Exit status 0 on normal form, 2 when the budget is exhausted.
    Reduce(Box<ReduceArgs>),
    /// Check that every rewrite schema conserves nodes and edge names.
    VerifySchemas {
        /// JSON array of schema forms to check instead of the built-in table
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Recompute the costs of a JSON trace.
    Account {
        trace: PathBuf,
        #[arg(long)]
        costs: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP session service. The port comes from CHEMSKI_PORT unless given.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Pass budget
    #[arg(long, default_value_t = 1000)]
    steps: u64,
    /// A number, or `random`
    #[arg(long)]
    seed: Option<String>,
    /// 0 favours BETA and TERMINATION, 1 favours DIST
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long, value_parser = ["open", "strict"])]
    token_mode: Option<String>,
    /// Start a strict ledger with this many tokens of each type
    #[arg(long)]
    fund: Option<u64>,
    /// JSON object of per-token cost overrides
    #[arg(long)]
    costs: Option<PathBuf>,
    #[arg(long)]
    max_steps_per_pass: Option<usize>,
    /// Attach the mol to every Nth trace step
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Write the JSON trace here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final mol here
    #[arg(long)]
    out_mol: Option<PathBuf>,
    /// Write the JSON cost report here
    #[arg(long)]
    report: Option<PathBuf>,
}

fn read_costs(path: &Option<PathBuf>) -> Result<CostVector> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_costs(&text).with_context(|| format!("parsing costs in {}", p.display()))
        }
        None => Ok(CostVector::default()),
    }
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn reduce(a: ReduceArgs) -> Result<u8> {
    let seed = match a.seed.as_deref() {
        None => None,
        Some("random") => {
            let s = rand::random::<u64>();
            eprintln!("seed {s}");
            Some(s)
        }
        Some(s) => Some(s.parse().with_context(|| format!("bad seed `{s}`"))?),
    };
    let overrides = match &a.costs {
        Some(_) => Some(read_costs(&a.costs)?),
        None => None,
    };
    let spec = RunSpec {
        seed,
        weight: a.weight,
        token_mode: a.token_mode.as_deref().map(|m| if m == "strict" { TokenMode::Strict } else { TokenMode::Open }),
        fund: a.fund,
        costs: None,
        max_steps_per_pass: a.max_steps_per_pass,
        snapshot_every: a.snapshot_every,
    };
    let (g, warnings) = a.input.source()?.load()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut reducer = spec.reducer(g)?;
    if let Some(c) = overrides {
        reducer = reducer.with_costs(c);
    }
    let outcome = reducer.run(a.steps);
    let done = commands::Reduced { reducer, outcome, warnings };
    let r = &done.reducer;
    for root in decoded_roots(&r.graph) {
        match root {
            Ok(t) => println!("{t}"),
            Err(e) => println!("<{e}>"),
        }
    }
    let report = done.report();
    eprintln!(
        "{:?} after {} passes, {} steps, {} nodes, net cost {}",
        done.outcome,
        r.passes(),
        r.steps(),
        r.graph.len(),
        report.cumulative_net
    );
    if let Some(p) = &a.trace {
        write(p, &(serde_json::to_string_pretty(&r.trace)? + "\n"))?;
    }
    if let Some(p) = &a.out_mol {
        write(p, &(serialize_mol(&plain_names(&r.graph), chemski_core::mol::LineSep::Newline) + "\n"))?;
    }
    if let Some(p) = &a.report {
        write(p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(done.exit_code())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Parse { input } => {
            let p = commands::parse(&input.source()?)?;
            for n in &p.notes {
                eprintln!("note: {n}");
            }
            println!("{}", p.mol);
            Ok(0)
        }
        Cmd::Reduce(a) => reduce(*a),
        Cmd::VerifySchemas { table, json } => {
            let forms: Option<Vec<SchemaForms>> = match &table {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
                }
                None => None,
            };
            let r = commands::verify(forms.as_deref());
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{}", verify_text(&r));
            }
            Ok(if r.all_conserved() { 0 } else { 1 })
        }
        Cmd::Account { trace, costs, json } => {
            let text = fs::read_to_string(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let steps: Vec<StepRecord> =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", trace.display()))?;
            let c = read_costs(&costs)?;
            let report = account(&steps, &c);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", cost_table(&steps, &c, &report));
            }
            Ok(0)
        }
        Cmd::Serve { port, host } => {
            let port = match (port, std::env::var("CHEMSKI_PORT")) {
                (Some(p), _) => p,
                (None, Ok(v)) => v.parse().with_context(|| format!("bad CHEMSKI_PORT `{v}`"))?,
                (None, Err(_)) => DEFAULT_PORT,
            };
            tokio::runtime::Runtime::new()?.block_on(chemski_cli::service::serve(SocketAddr::new(host, port)))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1 so that 2 keeps meaning "budget exhausted".
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
