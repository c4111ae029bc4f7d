//! `dcloss`: JSON reports on DC circuit losses and topology edits.
//!
//! Exit codes: 0 success, 1 invalid circuit or failed verification,
//! 2 usage error. Usage errors go to standard error only.

mod report;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dcloss::decomposition::{decompose, superposition_check, SuperpositionReport};
use dcloss::netlist::{import_grid, parse_grid, Fault};
use dcloss::potentials::{compute_all, max_pairwise_difference, LossResult};
use dcloss::reconfig::{predict_delta, rank_switchings, TopologyEdit};
use dcloss::sensitivity::{equivalent, reciprocity_residual, source_factors, EquivalentKind};
use dcloss::{parse_netlist, serialize_netlist, solve, validate, Circuit, Error};

use report::{digest, to_json, Report, SCHEMA};

#[derive(Parser)]
#[command(
    name = "dcloss",
    version,
    about = "Loss analysis of DC circuits with mixed sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Netlist file (`<K> <id> <n+> <n-> <value>` per line)
    file: PathBuf,
    /// Read the file as a DC power-flow grid (`BUS` and `BRANCH` lines)
    #[arg(long)]
    grid: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Nodal solution: potentials, element currents, voltages and powers
    Solve(Input),
    /// Loss of the voltage- and current-controlled sub-circuits
    Decompose(Input),
    /// Total loss by all four methods
    Potentials(Input),
    /// Source factor matrix and its reciprocity residual
    Sensitivities(Input),
    /// Two-terminal equivalent circuit
    Equivalent {
        #[command(flatten)]
        input: Input,
        #[arg(long, num_args = 2, value_names = ["M", "N"], required = true)]
        terminals: Vec<String>,
        /// thevenin, norton or mixed
        #[arg(long, default_value = "thevenin")]
        kind: EquivalentKind,
    },
    /// Predicted and actual loss change of one topology edit
    Whatif {
        #[command(flatten)]
        input: Input,
        /// e.g. "remove r2", "add R r9 1 2 0.5", "subdivide r1 with V v9 1.0"
        #[arg(long)]
        edit: TopologyEdit,
    },
    /// Candidate edits ranked by predicted loss change
    Rank {
        #[command(flatten)]
        input: Input,
        /// File with one edit per line; `#` starts a comment
        #[arg(long)]
        candidates: PathBuf,
    },
    /// Full invariant suite with a pass/fail summary
    Verify(Input),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Decompose(_) => "decompose",
            Command::Potentials(_) => "potentials",
            Command::Sensitivities(_) => "sensitivities",
            Command::Equivalent { .. } => "equivalent",
            Command::Whatif { .. } => "whatif",
            Command::Rank { .. } => "rank",
            Command::Verify(_) => "verify",
        }
    }

    fn input(&self) -> &Input {
        match self {
            Command::Solve(i)
            | Command::Decompose(i)
            | Command::Potentials(i)
            | Command::Sensitivities(i)
            | Command::Verify(i) => i,
            Command::Equivalent { input, .. }
            | Command::Whatif { input, .. }
            | Command::Rank { input, .. } => input,
        }
    }
}

#[derive(Serialize)]
struct DecomposePayload {
    superposition: SuperpositionReport,
    voltage_subcircuit: String,
    current_subcircuit: String,
}

#[derive(Serialize)]
struct PotentialsPayload {
    results: Vec<LossResult>,
    max_pairwise_difference: f64,
}

/// Source factor blocks as row-major nested arrays, `[cause][effect]`.
#[derive(Serialize)]
struct SensitivitiesPayload {
    voltage_sources: Vec<String>,
    current_sources: Vec<String>,
    svv: Vec<Vec<f64>>,
    siv: Vec<Vec<f64>>,
    svi: Vec<Vec<f64>>,
    sii: Vec<Vec<f64>>,
    reciprocity_residual: f64,
}

#[derive(Serialize)]
struct ErrorPayload {
    error: &'static str,
    message: String,
    faults: Vec<Fault>,
}

enum Failure {
    Usage(String),
    Invalid(ErrorPayload),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(ErrorPayload {
            error: error_code(&e),
            message: e.to_string(),
            faults: Vec::new(),
        })
    }
}

fn error_code(e: &Error) -> &'static str {
    match e {
        Error::EmptyNetlist => "EmptyNetlist",
        Error::Syntax { .. } => "Syntax",
        Error::DuplicateId(_) => "DuplicateId",
        Error::NonPositiveResistance { .. } => "NonPositiveResistance",
        Error::NonFiniteValue { .. } => "NonFiniteValue",
        Error::SelfLoop(_) => "SelfLoop",
        Error::UnknownElement(_) => "UnknownElement",
        Error::UnknownNode(_) => "UnknownNode",
        Error::UnbalancedInjections { .. } => "UnbalancedInjections",
        Error::SingularSystem { .. } => "SingularSystem",
        Error::DegenerateSubcircuit { .. } => "DegenerateSubcircuit",
        Error::ConstraintInconsistent { .. } => "ConstraintInconsistent",
        Error::NoEquivalent { .. } => "NoEquivalent",
        Error::EditIllPosed(_) => "EditIllPosed",
        Error::InvalidEdit(_) => "InvalidEdit",
        Error::UnsupportedEdit(_) => "UnsupportedEdit",
    }
}

fn load(input: &Input, bytes: Vec<u8>) -> Result<(Circuit, Vec<String>), Error> {
    let text = String::from_utf8(bytes).map_err(|_| Error::Syntax {
        line: 0,
        message: "input is not UTF-8".into(),
    })?;
    if input.grid {
        let g = parse_grid(&text)?;
        let warning = format!("bus {} is the angle reference", g.buses[0].id);
        Ok((import_grid(&g)?, vec![warning]))
    } else {
        Ok((parse_netlist(&text)?, Vec::new()))
    }
}

fn read_candidates(path: &Path) -> Result<Vec<TopologyEdit>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter_map(|(n, line)| {
            let content = line.split('#').next().unwrap_or("").trim();
            (!content.is_empty()).then(|| {
                content.parse().map_err(|e: Error| {
                    Failure::Usage(format!("{}:{}: {e}", path.display(), n + 1))
                })
            })
        })
        .collect()
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

struct Emitter<'a> {
    command: &'static str,
    input_digest: &'a str,
}

impl Emitter<'_> {
    fn emit<T: Serialize>(
        &self,
        payload: &T,
        warnings: Vec<String>,
        code: u8,
    ) -> Result<(String, u8), Failure> {
        let report = Report {
            schema: SCHEMA,
            command: self.command,
            input_digest: self.input_digest.to_string(),
            payload,
            warnings,
        };
        match to_json(&report) {
            Ok(json) => Ok((json, code)),
            Err(message) => Err(Failure::Invalid(ErrorPayload {
                error: "NonFiniteResult",
                message,
                faults: Vec::new(),
            })),
        }
    }
}

/// Serialized report and exit code, or a usage message.
fn execute(cmd: &Command) -> Result<(String, u8), String> {
    let input = cmd.input();
    let bytes =
        fs::read(&input.file).map_err(|e| format!("cannot read {}: {e}", input.file.display()))?;
    let input_digest = digest(&bytes);
    let out = Emitter {
        command: cmd.name(),
        input_digest: &input_digest,
    };
    match analyse(cmd, input, bytes, &out) {
        Ok(done) => Ok(done),
        Err(Failure::Usage(message)) => Err(message),
        Err(Failure::Invalid(payload)) => {
            eprintln!("dcloss: {}", payload.message);
            Ok(out
                .emit(&payload, Vec::new(), 1)
                .unwrap_or_else(|_| unreachable!("error payloads hold no floats")))
        }
    }
}

fn analyse(
    cmd: &Command,
    input: &Input,
    bytes: Vec<u8>,
    out: &Emitter<'_>,
) -> Result<(String, u8), Failure> {
    let (c, mut warnings) = load(input, bytes)?;
    if let Command::Verify(_) = cmd {
        let summary = verify::run(&c);
        let code = if summary.passed { 0 } else { 1 };
        return out.emit(&summary, warnings, code);
    }
    let v = validate(&c);
    if !v.well_posed {
        let message = v
            .faults
            .iter()
            .map(|f| f.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Failure::Invalid(ErrorPayload {
            error: "ValidationFault",
            message,
            faults: v.faults,
        }));
    }

    match cmd {
        Command::Solve(_) => out.emit(&solve(&c)?, warnings, 0),
        Command::Decompose(_) => {
            let d = decompose(&c)?;
            warnings.extend(d.warnings.iter().cloned());
            let payload = DecomposePayload {
                superposition: superposition_check(&c)?,
                voltage_subcircuit: serialize_netlist(&d.cv),
                current_subcircuit: serialize_netlist(&d.ci),
            };
            out.emit(&payload, warnings, 0)
        }
        Command::Potentials(_) => {
            let results = compute_all(&c)?;
            let payload = PotentialsPayload {
                max_pairwise_difference: max_pairwise_difference(&results),
                results,
            };
            out.emit(&payload, warnings, 0)
        }
        Command::Sensitivities(_) => {
            let m = source_factors(&c)?;
            let payload = SensitivitiesPayload {
                reciprocity_residual: reciprocity_residual(&m),
                svv: rows(&m.svv),
                siv: rows(&m.siv),
                svi: rows(&m.svi),
                sii: rows(&m.sii),
                voltage_sources: m.voltage_sources,
                current_sources: m.current_sources,
            };
            out.emit(&payload, warnings, 0)
        }
        Command::Equivalent {
            terminals, kind, ..
        } => out.emit(
            &equivalent(&c, &terminals[0], &terminals[1], *kind)?,
            warnings,
            0,
        ),
        Command::Whatif { edit, .. } => out.emit(&predict_delta(&c, edit)?, warnings, 0),
        Command::Rank { candidates, .. } => {
            let edits = read_candidates(candidates)?;
            out.emit(&rank_switchings(&c, &edits), warnings, 0)
        }
        Command::Verify(_) => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok((json, code)) => {
            print!("{json}");
            ExitCode::from(code)
        }
        Err(message) => {
            eprintln!("dcloss: {message}");
            ExitCode::from(2)
        }
    }
}
