use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use epiplex::{
    check_obstruction, export_dual_dot, iterate_rounds, make_task, muddy,
    parse_formula, partial_round, search_decision_map, tas_loser_qualifies, validate_decision_map,
    ChromaticComplex, CommModel, Error, Formula, ModelChecker, ModelKind,
    SearchOutcome, TaskKind,
};

#[derive(Parser)]
#[command(
    name = "epiplex",
    version,
    about = "Build chromatic simplicial models, run communication rounds, check epistemic formulas, and decide task solvability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Ub,
    Is,
    Tas,
}

impl From<ModelArg> for ModelKind {
    fn from(arg: ModelArg) -> Self {
        match arg {
            ModelArg::Ub => ModelKind::UnreliableBroadcast,
            ModelArg::Is => ModelKind::ImmediateSnapshot,
            ModelArg::Tas => ModelKind::TestAndSet,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Consensus,
    Majority0,
}

impl From<TaskArg> for TaskKind {
    fn from(arg: TaskArg) -> Self {
        match arg {
            TaskArg::Consensus => TaskKind::Consensus,
            TaskArg::Majority0 => TaskKind::Majority0,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PartialQualify {
    /// Refine via the extra write/read among qualifying test-and-set losers.
    TasLoser,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    True,
    False,
}

#[derive(Args)]
struct FormulaSource {
    /// File holding one formula in the s-expression grammar.
    #[arg(long, value_name = "FILE", conflicts_with = "formula_str")]
    formula: Option<PathBuf>,
    /// Formula given inline.
    #[arg(long = "formula-str", value_name = "S")]
    formula_str: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a protocol complex from the binary input complex of a task.
    Build {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Comma-separated agent names.
        #[arg(long, default_value = "a,b,c")]
        agents: String,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Apply a refinement round after the communication rounds.
        #[arg(long = "partial-qualify", value_enum)]
        partial_qualify: Option<PartialQualify>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Evaluate a formula on a complex, printing per-world truth values.
    Eval {
        #[arg(long, value_name = "FILE")]
        complex: PathBuf,
        #[command(flatten)]
        formula: FormulaSource,
        /// Evaluate at one world instead of all of them.
        #[arg(long, value_name = "INDEX", conflicts_with = "all")]
        world: Option<usize>,
        /// Evaluate at every world (the default).
        #[arg(long)]
        all: bool,
        /// Exit with status 1 unless every printed value matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Search for a decision map solving a task on a protocol complex.
    Solve {
        #[arg(long, value_enum)]
        task: TaskArg,
        #[arg(long, value_name = "FILE")]
        protocol: PathBuf,
        /// Where to write the witness map or unsolvability certificate.
        #[arg(long, value_name = "FILE")]
        witness: Option<PathBuf>,
    },
    /// Check the logical-obstruction recipe at a witness world.
    Obstruct {
        #[arg(long, value_enum)]
        task: TaskArg,
        #[arg(long, value_name = "FILE")]
        protocol: PathBuf,
        #[arg(long, value_name = "FILE")]
        formula: PathBuf,
        #[arg(long, value_name = "INDEX")]
        world: usize,
    },
    /// Run a bundled demonstration.
    Demo {
        /// Demo name; only `muddy-children` is bundled.
        which: String,
        #[arg(long, default_value_t = 3)]
        children: usize,
    },
    /// Re-export a complex as canonical JSON or as a DOT dual graph.
    Export {
        #[arg(long, value_name = "FILE")]
        complex: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

/// Exit codes: 0 success; 1 unsolvable task or failed --expect; 2 usage
/// errors (from clap); 3 unreadable or invalid input data.
fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Io(PathBuf, std::io::Error),
    Data(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Data(err) => err.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Data(err)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_complex(path: &Path) -> Result<ChromaticComplex, CliError> {
    Ok(ChromaticComplex::from_json(&read(path)?)?)
}

fn load_formula(
    source: &FormulaSource,
    agents: &[epiplex::AgentId],
) -> Result<Formula, CliError> {
    let text = match (&source.formula, &source.formula_str) {
        (Some(path), None) => read(path)?,
        (None, Some(text)) => text.clone(),
        _ => {
            return Err(CliError::Data(Error::ShapeMismatch(
                "exactly one of --formula and --formula-str is required".into(),
            )))
        }
    };
    Ok(parse_formula(text.trim(), agents)?)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Build {
            model,
            task,
            agents,
            rounds,
            partial_qualify,
            out,
        } => {
            let agents: Vec<epiplex::AgentId> = agents
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| epiplex::AgentId::new(s.trim()))
                .collect();
            let task = make_task(task.into(), &agents)?;
            let model = CommModel::make(model.into(), &agents)?;
            let mut protocol = iterate_rounds(task.input(), &model, rounds)?;
            if let Some(PartialQualify::TasLoser) = partial_qualify {
                protocol = partial_round(&protocol, &|_, state| tas_loser_qualifies(state));
            }
            write(&out, &protocol.to_json())?;
            println!(
                "wrote {} facets over {} vertices to {}",
                protocol.facet_count(),
                protocol.vertex_count(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            complex,
            formula,
            world,
            all: _,
            expect,
        } => {
            let complex = load_complex(&complex)?;
            let formula = load_formula(&formula, complex.agents())?;
            let checker = ModelChecker::new(&complex);
            let worlds: Vec<usize> = match world {
                Some(w) => vec![w],
                None => (0..complex.facet_count()).collect(),
            };
            let mut all_match = true;
            for w in worlds {
                let value = checker.check(w, &formula)?;
                println!("w{w}: {value}");
                let matches = match expect {
                    Some(Expect::True) => value,
                    Some(Expect::False) => !value,
                    None => true,
                };
                all_match = all_match && matches;
            }
            Ok(if all_match {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Solve {
            task,
            protocol,
            witness,
        } => {
            let protocol = load_complex(&protocol)?;
            let task = make_task(task.into(), protocol.agents())?;
            let outcome = search_decision_map(&task, &protocol)?;
            let artifact = outcome.to_json(&protocol);
            match &outcome {
                SearchOutcome::Solvable(map) => {
                    let report = validate_decision_map(&task, &protocol, map)?;
                    println!(
                        "SOLVABLE: decision map over {} vertices (validated: {})",
                        map.len(),
                        report.valid
                    );
                }
                SearchOutcome::Unsolvable { nodes_explored } => {
                    println!("UNSOLVABLE: explored {nodes_explored} assignments");
                }
            }
            if let Some(path) = witness {
                write(&path, &artifact)?;
            }
            Ok(if outcome.is_solvable() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Obstruct {
            task,
            protocol,
            formula,
            world,
        } => {
            let protocol = load_complex(&protocol)?;
            let task = make_task(task.into(), protocol.agents())?;
            let formula = parse_formula(read(&formula)?.trim(), protocol.agents())?;
            let report = check_obstruction(&task, &protocol, &formula, world)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo { which, children } => {
            if which != "muddy-children" {
                return Err(CliError::Data(Error::UnknownKind(which)));
            }
            let stages = muddy::muddy_sequence(children)?;
            for stage in &stages {
                println!(
                    "{}: {} worlds",
                    stage.label,
                    stage.complex.facet_count()
                );
            }
            let counts: Vec<String> = stages
                .iter()
                .map(|s| s.complex.facet_count().to_string())
                .collect();
            println!("facet counts: {}", counts.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Command::Export {
            complex,
            format,
            out,
        } => {
            let complex = load_complex(&complex)?;
            let artifact = match format {
                ExportFormat::Dot => export_dual_dot(&complex),
                ExportFormat::Json => complex.to_json(),
            };
            write(&out, &artifact)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
