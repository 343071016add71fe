mod report;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pisym::checkers::label_strings;
use pisym::confluence::check_local_confluence_unchecked;
use pisym::execution::{explore, Exploration};
use pisym::semantics::{transitions_with, StepOptions};
use pisym::symexec::{replay, validate, StepRecord, DEFAULT_MAX_ROUNDS};
use pisym::syntax::free_names;
use pisym::*;

use report::{canonical_text, CriterionReport, ExecutionReport, Input, NetDescriptor, Report, StepReport};

#[derive(Parser)]
#[command(name = "pisym", version, about = "Symmetric networks of π-calculus processes")]
struct Cli {
    /// Print the JSON report instead of the text rendering.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print its canonical form.
    Parse { file: PathBuf },
    /// One-step transitions of a term.
    Steps {
        file: PathBuf,
        /// Input objects range over these names (default: the free names).
        #[arg(long, value_delimiter = ',')]
        universe: Option<Vec<String>>,
    },
    /// Enumerate executions up to a depth, modulo congruence.
    Explore {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        /// Closed world: follow only τ-steps and outputs on these channels.
        #[arg(long, value_delimiter = ',')]
        observables: Option<Vec<String>>,
    },
    /// Build a symmetric network and print its denoted term.
    Symnet(NetArgs),
    /// Compute one symmetric execution.
    Symexec {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
    },
    /// Search for a symmetric execution.
    FindSymexec {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
    },
    /// Subdivide a recorded symmetric execution to a divisor degree.
    Subdivide {
        /// A JSON report written by `symexec` or `find-symexec`.
        #[arg(long, value_name = "REPORT")]
        exec: PathBuf,
        #[arg(long)]
        degree_prime: usize,
    },
    /// Property checkers.
    Check {
        #[command(subcommand)]
        property: Property,
    },
    /// Local confluence of output/input step pairs.
    Confluence {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        universe: Option<Vec<String>>,
        /// Run on terms outside the separate-choice fragment.
        #[arg(long)]
        unchecked: bool,
    },
    /// Run the acceptance corpus and print a pass/fail table.
    VerifyPaper,
}

#[derive(Subcommand)]
enum Property {
    /// Each component outputs once on `leader` or `slave`, with one leader.
    LeaderElection {
        file: PathBuf,
        #[arg(long, default_value = "leader")]
        leader: String,
        #[arg(long, default_value = "slave")]
        slave: String,
        /// Expected number of components (default: as found in the term).
        #[arg(long)]
        components: Option<usize>,
        #[arg(long, default_value_t = 32)]
        max_depth: usize,
    },
    /// Each component outputs once on `out`, all with the same datum.
    LeaderIndexed {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: String,
        #[arg(long)]
        components: Option<usize>,
        #[arg(long, default_value_t = 32)]
        max_depth: usize,
    },
    /// Every maximal τ-execution reaches a top-level `check`.
    MustSucceed {
        file: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_depth: usize,
    },
    /// Whether any step (or any τ-step) is possible.
    CanStep {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Any)]
        mode: Mode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Any,
    Tau,
}

#[derive(Args)]
struct NetArgs {
    /// A TOML descriptor with keys base (term text), perm, degree, restrict.
    #[arg(long, conflicts_with_all = ["base", "perm", "degree", "restrict"])]
    net: Option<PathBuf>,
    /// File holding the base term.
    #[arg(long, required_unless_present = "net")]
    base: Option<PathBuf>,
    /// Permutation literal such as `x>y,y>x`.
    #[arg(long, default_value = "")]
    perm: String,
    #[arg(long, required_unless_present = "net")]
    degree: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    restrict: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok = 0,
    Invalid = 1,
    Fails = 2,
    Unknown = 3,
    Defect = 4,
}

struct Failure {
    status: Status,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { status: Status::Invalid, error: e.into() }
    }
}

fn exec_failure(e: ExecutionError) -> Failure {
    let status = match e {
        ExecutionError::Defect(_) => Status::Defect,
        _ => Status::Invalid,
    };
    Failure { status, error: e.into() }
}

type Outcome = Result<(Report, Status), Failure>;

fn read_source(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load_term(path: &Path) -> anyhow::Result<Process> {
    let src = read_source(path)?;
    parse(&src).with_context(|| format!("parsing {}", path.display()))
}

fn names(list: &[String]) -> BTreeSet<Name> {
    list.iter().map(|s| Name::new(s.trim())).collect()
}

fn term_input(p: &Process) -> Input {
    Input { term: Some(p.to_string()), network: None }
}

impl NetArgs {
    fn descriptor(&self) -> anyhow::Result<NetDescriptor> {
        if let Some(path) = &self.net {
            let text = read_source(path)?;
            return toml::from_str(&text).with_context(|| format!("reading descriptor {}", path.display()));
        }
        let base = self.base.as_ref().ok_or_else(|| anyhow!("--base is required"))?;
        Ok(NetDescriptor {
            base: read_source(base)?,
            perm: self.perm.clone(),
            degree: self.degree.ok_or_else(|| anyhow!("--degree is required"))?,
            restrict: self.restrict.clone(),
        })
    }
}

fn build_network(d: &NetDescriptor) -> anyhow::Result<SymmetricNetwork> {
    let base = parse(&d.base).context("parsing base term")?;
    let perm: Substitution = d.perm.parse()?;
    let sigma = SymmetryRelation::new(perm, d.degree)?;
    let restriction = d.restrict.iter().map(|s| Name::new(s.trim())).collect();
    Ok(SymmetricNetwork::new(base, sigma, restriction)?)
}

fn load_network(args: &NetArgs) -> anyhow::Result<SymmetricNetwork> {
    build_network(&args.descriptor()?)
}

fn net_input(net: &SymmetricNetwork) -> Input {
    Input { term: Some(net.denote().to_string()), network: Some(NetDescriptor::of(net)) }
}

fn verdict_status(v: &Verdict) -> Status {
    match v {
        Verdict::Holds => Status::Ok,
        Verdict::Fails(_) => Status::Fails,
        Verdict::Unknown(_) => Status::Unknown,
    }
}

fn checked(mut report: Report, v: Verdict) -> Outcome {
    let status = verdict_status(&v);
    report.verdict = v.name().to_string();
    match v {
        Verdict::Fails(e) => {
            report.detail = Some(format!("counterexample: {}", label_strings(&e).join(" ")));
            report.executions.push(ExecutionReport::of(&e));
        }
        Verdict::Unknown(why) => {
            report.truncated = true;
            report.detail = Some(why);
        }
        Verdict::Holds => {}
    }
    Ok((report, status))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Parse { file } => {
            let p = load_term(&file)?;
            let mut r = Report::new("parse", term_input(&p));
            r.detail = Some(format!("canonical: {}", canonical_text(&p)));
            Ok((r, Status::Ok))
        }
        Command::Steps { file, universe } => {
            let p = load_term(&file)?;
            let u = universe.map(|u| names(&u)).unwrap_or_else(|| free_names(&p));
            let ts = transitions_with(&p, &StepOptions::universe(u))?;
            let mut r = Report::new("steps", term_input(&p));
            r.steps = ts.iter().map(StepReport::of).collect();
            Ok((r, Status::Ok))
        }
        Command::Explore { file, max_depth, observables } => {
            let p = load_term(&file)?;
            let mode = Exploration::from_observables(observables.map(|o| names(&o)).as_ref());
            let execs = explore(&p, max_depth, &mode)?;
            let mut r = Report::new("explore", term_input(&p)).bound("maxDepth", max_depth);
            r.truncated = execs.iter().any(|e| e.truncated);
            r.executions = execs.iter().map(ExecutionReport::of).collect();
            Ok((r, Status::Ok))
        }
        Command::Symnet(args) => {
            let net = load_network(&args)?;
            let mut r = Report::new("symnet", net_input(&net));
            r.detail = Some(format!("components: {}", net.degree()));
            Ok((r, Status::Ok))
        }
        Command::Symexec { net, max_rounds } => {
            let net = load_network(&net)?;
            let ex = symmetric_execution(&net, max_rounds).map_err(exec_failure)?;
            if let Err(why) = validate(&ex) {
                return Err(Failure { status: Status::Defect, error: anyhow!("execution does not validate: {why}") });
            }
            let mut r = Report::new("symexec", net_input(&net)).bound("maxRounds", max_rounds);
            r.with_execution(&ex);
            r.verdict = if ex.complete { "complete" } else { "bounded" }.to_string();
            Ok((r, Status::Ok))
        }
        Command::FindSymexec { net, max_rounds } => {
            let net = load_network(&net)?;
            if !syntax::classify(net.base()).is_separate() {
                eprintln!("note: base term is not separate-choice; searching anyway");
            }
            let mut r = Report::new("find-symexec", net_input(&net)).bound("maxRounds", max_rounds);
            let status = match has_symmetric_execution(&net, max_rounds) {
                SearchVerdict::Yes(ex) => {
                    r.with_execution(&ex);
                    r.truncated = false;
                    r.verdict = "yes".into();
                    Status::Ok
                }
                SearchVerdict::No => {
                    r.verdict = "no".into();
                    Status::Fails
                }
                SearchVerdict::Unknown(why) => {
                    r.verdict = "unknown".into();
                    r.truncated = true;
                    r.detail = Some(why);
                    Status::Unknown
                }
            };
            Ok((r, status))
        }
        Command::Subdivide { exec, degree_prime } => {
            let text = read_source(&exec)?;
            let recorded: Report = serde_json::from_str(&text).context("reading execution report")?;
            let desc = recorded
                .input
                .network
                .as_ref()
                .ok_or_else(|| anyhow!("report carries no network"))?;
            let net = build_network(desc)?;
            let rounds = recorded
                .rounds
                .iter()
                .map(|round| {
                    round
                        .steps
                        .iter()
                        .map(|s| Ok((s.label.parse::<Label>().map_err(|e| anyhow!(e))?, s.target.clone())))
                        .collect::<anyhow::Result<Vec<StepRecord>>>()
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let ex = replay(&net, &rounds).map_err(exec_failure)?;
            let sub = subdivide(&ex, degree_prime).map_err(exec_failure)?;
            if let Err(why) = validate(&sub) {
                return Err(Failure { status: Status::Defect, error: anyhow!("subdivision does not validate: {why}") });
            }
            let mut r = Report::new("subdivide", net_input(&sub.initial))
                .bound("degreePrime", degree_prime);
            r.with_execution(&sub);
            r.truncated = recorded.truncated;
            Ok((r, Status::Ok))
        }
        Command::Check { property } => check(property),
        Command::Confluence { file, universe, unchecked } => {
            let p = load_term(&file)?;
            let u = universe.map(|u| names(&u)).unwrap_or_else(|| free_names(&p));
            let v = if unchecked {
                check_local_confluence_unchecked(&p, &u)?
            } else {
                check_local_confluence(&p, &u)?
            };
            let mut r = Report::new("confluence", term_input(&p));
            Ok(match v {
                ConfluenceVerdict::Holds => {
                    r.verdict = "holds".into();
                    (r, Status::Ok)
                }
                ConfluenceVerdict::Counterexample { output, input, after_output, after_input } => {
                    r.verdict = "counterexample".into();
                    r.detail = Some(format!(
                        "{output} then {input} does not close\n  after {output}: {after_output}\n  after {input}: {after_input}"
                    ));
                    (r, Status::Fails)
                }
            })
        }
        Command::VerifyPaper => {
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = corpus::titles()
                    .iter()
                    .map(|(id, _)| {
                        let id = *id;
                        s.spawn(move || corpus::run(id).expect("known criterion"))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
            });
            let mut r = Report::new("verify-paper", Input::default());
            r.criteria = results
                .into_iter()
                .map(|c| CriterionReport { id: c.id, title: c.title.to_string(), passed: c.passed, detail: c.detail })
                .collect();
            let ok = r.criteria.iter().all(|c| c.passed);
            r.verdict = if ok { "pass" } else { "fail" }.into();
            Ok((r, if ok { Status::Ok } else { Status::Fails }))
        }
    }
}

fn component_count(p: &Process) -> usize {
    p.strip_restrictions().1.components().len()
}

fn check(property: Property) -> Outcome {
    match property {
        Property::LeaderElection { file, leader, slave, components, max_depth } => {
            let p = load_term(&file)?;
            let n = components.unwrap_or_else(|| component_count(&p));
            let v = solves_leader_election_bouge(&p, &Name::new(leader), &Name::new(slave), n, max_depth)?;
            let r = Report::new("check leader-election", term_input(&p))
                .bound("maxDepth", max_depth)
                .bound("components", n);
            checked(r, v)
        }
        Property::LeaderIndexed { file, out, components, max_depth } => {
            let p = load_term(&file)?;
            let n = components.unwrap_or_else(|| component_count(&p));
            let v = solves_leader_election_indexed(&p, &Name::new(out), n, max_depth)?;
            let r = Report::new("check leader-indexed", term_input(&p))
                .bound("maxDepth", max_depth)
                .bound("components", n);
            checked(r, v)
        }
        Property::MustSucceed { file, max_depth } => {
            let p = load_term(&file)?;
            let v = must_succeed(&p, max_depth)?;
            checked(Report::new("check must-succeed", term_input(&p)).bound("maxDepth", max_depth), v)
        }
        Property::CanStep { file, mode } => {
            let p = load_term(&file)?;
            let m = match mode {
                Mode::Any => StepMode::AnyLabel,
                Mode::Tau => StepMode::TauOnly,
            };
            let yes = can_step(&p, m)?;
            let mut r = Report::new("check can-step", term_input(&p));
            r.verdict = yes.to_string();
            Ok((r, if yes { Status::Ok } else { Status::Fails }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((report, status)) => {
            if let Some(path) = &cli.report {
                let json = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(e) = fs::write(path, json + "\n") {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(Status::Invalid as u8);
                }
            }
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.render());
            }
            ExitCode::from(status as u8)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}
