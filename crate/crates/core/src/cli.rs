//! The `pqg` command line: validate, check, search and audit.
//!
//! Exit codes: 0 success or true, 1 false or countermodel found, 2 usage,
//! parse or I/O error, 3 validation failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::format::{read, save, FormatError};
use crate::formula::{parse, Schema};
use crate::kripke::{closure_contrast_report, contrast_json};
use crate::model::{Index, ValidModel};
use crate::search::{
    audit_suite, find_countermodel, find_countermodel_random, report_json, Bounds, SearchOutcome, Suite,
    DEFAULT_AUDIT_BOUNDS,
};
use crate::semantics::Evaluator;
use crate::validate::validate_model;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

/// Reports the default search shipped for each suite.
pub fn expected_report(suite: Suite) -> &'static str {
    match suite {
        Suite::Axioms => include_str!("../expected/axioms.json"),
        Suite::Principles => include_str!("../expected/principles.json"),
        Suite::Closure => include_str!("../expected/closure.json"),
        Suite::Contrast => include_str!("../expected/contrast.json"),
    }
}

#[derive(Debug, Parser)]
#[command(name = "pqg", version, about = "Model checker for PQG belief and knowledge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file against the structural invariants.
    Validate {
        model: PathBuf,
        /// Print findings as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a formula at one index of a model.
    Check {
        model: PathBuf,
        /// Index as world/sim/lin.
        #[arg(long)]
        index: String,
        formula: String,
        #[arg(long)]
        json: bool,
    },
    /// Look for a countermodel to a schema over phi, psi.
    Search {
        #[arg(long)]
        schema: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Seed for random sampling; only used with --samples.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample this many random models instead of enumerating.
        #[arg(long)]
        samples: Option<u64>,
        /// Where to write the countermodel.
        #[arg(long, default_value = "countermodel.json")]
        witness_out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a fixed suite of schemas and compare with the shipped report.
    Audit {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the comparison with the shipped report.
        #[arg(long)]
        no_expect: bool,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_worlds)]
    max_worlds: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_sim_moments)]
    max_sim_moments: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_belief_states_per_sim)]
    max_belief_states_per_sim: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_rules)]
    max_rules: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_atoms)]
    max_atoms: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_quanta_per_string)]
    max_quanta_per_string: u32,
    #[arg(long, default_value_t = DEFAULT_AUDIT_BOUNDS.max_tower_depth)]
    max_tower_depth: u32,
}

impl From<&BoundsArgs> for Bounds {
    fn from(b: &BoundsArgs) -> Self {
        Bounds {
            max_worlds: b.max_worlds,
            max_sim_moments: b.max_sim_moments,
            max_belief_states_per_sim: b.max_belief_states_per_sim,
            max_rules: b.max_rules,
            max_atoms: b.max_atoms,
            max_quanta_per_string: b.max_quanta_per_string,
            max_tower_depth: b.max_tower_depth,
        }
    }
}

type Outcome = Result<i32, (i32, String)>;

fn usage(msg: impl ToString) -> (i32, String) {
    (EXIT_USAGE, msg.to_string())
}

/// Parses `args` (program name first) and runs the command. Output goes to
/// `out`, diagnostics to `err`; the return value is the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { model, json } => cmd_validate(&model, json, out),
        Command::Check { model, index, formula, json } => cmd_check(&model, &index, &formula, json, out),
        Command::Search { schema, bounds, seed, samples, witness_out, json } => {
            cmd_search(&schema, &Bounds::from(&bounds), seed, samples, &witness_out, json, out)
        }
        Command::Audit { suite, out: path, no_expect, bounds } => {
            cmd_audit(&suite, path.as_deref(), !no_expect, &Bounds::from(&bounds), out)
        }
    };
    match result {
        Ok(code) => code,
        Err((code, msg)) => {
            let _ = writeln!(err, "pqg: {msg}");
            code
        }
    }
}

fn io(e: std::io::Error) -> (i32, String) {
    usage(format!("write failed: {e}"))
}

fn read_file(path: &std::path::Path) -> Result<String, (i32, String)> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_valid(path: &std::path::Path) -> Result<ValidModel, (i32, String)> {
    let model = read(&read_file(path)?).map_err(usage)?;
    ValidModel::new(model).map_err(|r| (EXIT_INVALID, FormatError::Validation(r).to_string()))
}

fn cmd_validate(path: &std::path::Path, json: bool, out: &mut dyn Write) -> Outcome {
    let model = read(&read_file(path)?).map_err(usage)?;
    let report = validate_model(&model);
    if json {
        let text = serde_json::to_string_pretty(&report.findings).expect("findings serialize");
        writeln!(out, "{text}").map_err(io)?;
    } else {
        write!(out, "{report}").map_err(io)?;
    }
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_check(path: &std::path::Path, index: &str, formula: &str, json: bool, out: &mut dyn Write) -> Outcome {
    let model = load_valid(path)?;
    let idx = Index::parse(index).ok_or_else(|| usage(format!("index `{index}` is not world/sim/lin")))?;
    let f = parse(formula).map_err(usage)?;
    let value = Evaluator::new(&model).evaluate(&idx, &f).map_err(usage)?;
    if json {
        writeln!(out, "{}", serde_json::json!({ "index": index, "formula": f.to_string(), "value": value }))
            .map_err(io)?;
    } else {
        writeln!(out, "{value}").map_err(io)?;
    }
    Ok(if value { EXIT_OK } else { EXIT_FALSE })
}

fn cmd_search(
    schema: &str,
    bounds: &Bounds,
    seed: u64,
    samples: Option<u64>,
    witness_out: &std::path::Path,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let schema = Schema::parse(schema).map_err(usage)?;
    let SearchOutcome { witness, models_checked } = match samples {
        Some(n) => find_countermodel_random(&schema, bounds, seed, n),
        None => find_countermodel(&schema, bounds),
    }
    .map_err(usage)?;
    let Some(w) = witness else {
        if json {
            writeln!(out, "{}", serde_json::json!({ "witness": null, "modelsChecked": models_checked })).map_err(io)?;
        } else {
            writeln!(out, "no countermodel within bounds ({models_checked} models checked)").map_err(io)?;
        }
        return Ok(EXIT_OK);
    };
    fs::write(witness_out, save(&w.model)).map_err(|e| usage(format!("cannot write {}: {e}", witness_out.display())))?;
    let inst: Vec<String> = w.instantiation.iter().map(|(k, v)| format!("{k} := {v}")).collect();
    if json {
        let v = serde_json::json!({
            "modelNumber": w.model_number,
            "modelsChecked": models_checked,
            "index": w.index.to_string(),
            "instantiation": w.instantiation,
            "formula": w.formula.to_string(),
            "witnessFile": witness_out.display().to_string(),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json serializes")).map_err(io)?;
    } else {
        writeln!(out, "countermodel: model {} of the search", w.model_number).map_err(io)?;
        writeln!(out, "index: {}", w.index).map_err(io)?;
        writeln!(out, "instantiation: {}", inst.join(", ")).map_err(io)?;
        writeln!(out, "false formula: {}", w.formula).map_err(io)?;
        writeln!(out, "written to {}", witness_out.display()).map_err(io)?;
    }
    Ok(EXIT_FALSE)
}

fn cmd_audit(
    suite: &str,
    path: Option<&std::path::Path>,
    expect: bool,
    bounds: &Bounds,
    out: &mut dyn Write,
) -> Outcome {
    let suite: Suite = suite.parse().map_err(usage)?;
    let (text, table) = if suite == Suite::Contrast {
        let report = closure_contrast_report(bounds).map_err(usage)?;
        let table: Vec<String> = report
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{:<34} {:<18} {}",
                    r.pqg.name,
                    r.pqg.classification.name(),
                    r.kripke.classification.name()
                )
            })
            .collect();
        let header = format!("{:<34} {:<18} {}", "schema", "pqg", "kripke");
        (contrast_json(&report), std::iter::once(header).chain(table).collect::<Vec<_>>())
    } else {
        let report = audit_suite(suite, bounds).map_err(usage)?;
        let table = report
            .entries
            .iter()
            .map(|e| format!("{:<46} {}", e.name, e.classification.name()))
            .collect();
        (report_json(&report), table)
    };
    match path {
        Some(p) => {
            fs::write(p, &text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
            for line in table {
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        None => write!(out, "{text}").map_err(io)?,
    }
    if expect && text != expected_report(suite) {
        return Err((EXIT_FALSE, format!("{suite} report differs from the shipped expectations")));
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("pqg").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["audit", "--suite", "bogus", "--no-expect"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["search", "--schema", "phi ->"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }
}
