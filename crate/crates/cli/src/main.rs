//! File-based conversion, verification, and experiment commands.
//!
//! Exit status contract: 0 = pass, 2 = check failed (report carries the
//! witness), 3 = input or schema error.  Reports are canonically serialized
//! JSON documents with `verdict`, `config`, `metrics`, and `witness`
//! sections, so runs are reproducible and diffable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bifree::functionals::{bifreeness_test, TableDoc, TableKind};
use bifree::infdiv::{analyze, levy_realize, AnalyzeConfig, PairCumulants};
use bifree::limits::clt_check;

const MAX_ORDER_LIMIT: usize = 8;

#[derive(Parser)]
#[command(
    name = "bifree",
    version,
    about = "Bi-free probability toolbox: moment/cumulant conversion, Fock \
             model evaluation, and verification checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a table file between moments and cumulants (direction is
    /// inferred from the input's `kind`).
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate the two-faced family of a model file into a dense moment
    /// table.
    Fock {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_order: usize,
    },
    /// Run a verification and write a report; exits 0 on pass, 2 on fail.
    Check {
        #[arg(long)]
        kind: CheckKind,
        #[arg(long)]
        input: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        max_order: Option<usize>,
        /// Tolerance for vanishing-cumulant and eigenvalue checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Tolerance for reconstruction matching.
        #[arg(long)]
        match_tol: Option<f64>,
        /// Time grid for the levy check, e.g. `--grid 0,0.5,1`.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Row sizes for the clt check, e.g. `--rows 4,16,64`.
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckKind {
    Bifree,
    Infdiv,
    Levy,
    Clt,
}

enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<bifree::Error> for CliError {
    fn from(e: bifree::Error) -> Self {
        CliError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn check_positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError(format!("{name} must be positive, got {value}")))
    }
}

fn check_max_order(value: usize) -> Result<usize, CliError> {
    if (1..=MAX_ORDER_LIMIT).contains(&value) {
        Ok(value)
    } else {
        Err(CliError(format!(
            "max order must be in 1..={MAX_ORDER_LIMIT}, got {value}"
        )))
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Convert { input, output } => {
            let doc = TableDoc::from_json(&read_file(&input)?)
                .map_err(|e| CliError(format!("{}: {e}", input.display())))?;
            let converted = match doc.kind {
                TableKind::Moments => TableDoc::from_cumulants(&doc.to_moments()?.to_cumulants()?),
                TableKind::Cumulants => TableDoc::from_moments(&doc.to_cumulants()?.to_moments()?),
            };
            write_file(&output, &converted.to_json())?;
            Ok(Outcome::Pass)
        }
        Command::Fock {
            input,
            output,
            max_order,
        } => {
            let max_order = check_max_order(max_order)?;
            let model = bifree::fock::model::ModelDoc::from_json(&read_file(&input)?)
                .map_err(|e| CliError(format!("{}: {e}", input.display())))?
                .parse()?;
            let mf = model.moments(max_order)?;
            write_file(&output, &TableDoc::from_moments(&mf).to_json())?;
            Ok(Outcome::Pass)
        }
        Command::Check {
            kind,
            input,
            output,
            max_order,
            tol,
            match_tol,
            grid,
            rows,
        } => {
            let tol = check_positive("tol", tol.unwrap_or(1e-9))?;
            let match_tol = check_positive("match tol", match_tol.unwrap_or(1e-8))?;
            if let Some(mo) = max_order {
                check_max_order(mo)?;
            }
            let text = read_file(&input)?;
            let (verdict, config, metrics, witness) = match kind {
                CheckKind::Bifree => check_bifree(&text, &input, max_order.unwrap_or(5), tol)?,
                CheckKind::Infdiv => check_infdiv(&text, &input, max_order, tol, match_tol)?,
                CheckKind::Levy => {
                    let grid = grid.unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
                    check_levy(&text, &input, max_order, tol, match_tol, &grid)?
                }
                CheckKind::Clt => {
                    let rows = rows.unwrap_or_else(|| vec![4, 16, 64]);
                    check_clt(&text, &input, max_order, &rows)?
                }
            };
            let report = json!({
                "command": format!("check {:?}", kind).to_lowercase(),
                "verdict": if verdict { "pass" } else { "fail" },
                "config": config,
                "metrics": metrics,
                "witness": witness,
            });
            let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
            text.push('\n');
            match output {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(if verdict {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
    }
}

type CheckResult = (bool, BTreeMap<String, Value>, Value, Value);

fn check_bifree(
    text: &str,
    input: &Path,
    max_order: usize,
    tol: f64,
) -> Result<CheckResult, CliError> {
    let max_order = check_max_order(max_order)?;
    let model = bifree::fock::model::ModelDoc::from_json(text)
        .map_err(|e| CliError(format!("{}: {e}", input.display())))?
        .parse()?;
    let grouping = model.grouping()?;
    let mf = model.moments(max_order)?;
    let report = bifreeness_test(&mf, &grouping, max_order, tol)?;
    let witness = match (&report.worst_word, report.pass) {
        (Some(word), false) => json!({
            "word": word.to_string(),
            "abs_cumulant": report.max_abs,
        }),
        _ => Value::Null,
    };
    let mut config = BTreeMap::new();
    config.insert("input".into(), json!(input.display().to_string()));
    config.insert("max_order".into(), json!(max_order));
    config.insert("tol".into(), json!(tol));
    config.insert(
        "grouping".into(),
        serde_json::to_value(&grouping).expect("serializable"),
    );
    let pass = report.pass;
    Ok((
        pass,
        config,
        serde_json::to_value(&report).expect("serializable"),
        witness,
    ))
}

fn load_pair(text: &str, input: &Path) -> Result<PairCumulants, CliError> {
    let doc =
        TableDoc::from_json(text).map_err(|e| CliError(format!("{}: {e}", input.display())))?;
    Ok(PairCumulants::new(doc.to_cumulants()?)?)
}

fn check_infdiv(
    text: &str,
    input: &Path,
    max_order: Option<usize>,
    tol: f64,
    match_tol: f64,
) -> Result<CheckResult, CliError> {
    let pc = load_pair(text, input)?;
    let effective_order = max_order
        .unwrap_or(pc.max_order())
        .min(pc.max_order())
        .min(MAX_ORDER_LIMIT);
    let mut config_struct = AnalyzeConfig::for_order(effective_order)?;
    config_struct.cnd_tol = tol;
    config_struct.match_tol = match_tol;
    let report = analyze(&pc, &config_struct)?;
    let witness = report
        .witness
        .clone()
        .map(|w| json!(w))
        .unwrap_or(Value::Null);
    let mut config = BTreeMap::new();
    config.insert("input".into(), json!(input.display().to_string()));
    config.insert("max_order".into(), json!(effective_order));
    config.insert("cnd_cap".into(), json!(config_struct.cnd_cap));
    config.insert("cbound_cap".into(), json!(config_struct.cbound_cap));
    config.insert("verify_order".into(), json!(config_struct.verify_order));
    config.insert("cnd_tol".into(), json!(tol));
    config.insert("match_tol".into(), json!(match_tol));
    let pass = report.pass;
    Ok((
        pass,
        config,
        serde_json::to_value(&report).expect("serializable"),
        witness,
    ))
}

fn check_levy(
    text: &str,
    input: &Path,
    max_order: Option<usize>,
    tol: f64,
    match_tol: f64,
    grid: &[f64],
) -> Result<CheckResult, CliError> {
    let pc = load_pair(text, input)?;
    let effective_order = max_order
        .unwrap_or(pc.max_order())
        .min(pc.max_order())
        .min(MAX_ORDER_LIMIT);
    let mut config_struct = AnalyzeConfig::for_order(effective_order)?;
    config_struct.cnd_tol = tol;
    config_struct.match_tol = match_tol;
    let mut report = analyze(&pc, &config_struct)?;
    let mut pass = report.pass;
    if pass {
        let levy = levy_realize(&pc, grid, config_struct.verify_order)?;
        pass = pass && levy.pass;
        report.levy = Some(levy);
        report.pass = pass;
    }
    let witness = match (&report.witness, &report.levy) {
        (Some(w), _) => json!(w),
        (None, Some(levy)) if !levy.pass => match &levy.bifree.worst_word {
            Some(word) if !levy.bifree.pass => json!({
                "word": word.to_string(),
                "abs_cumulant": levy.bifree.max_abs,
            }),
            _ => json!("increment scaling or decay check failed"),
        },
        _ => Value::Null,
    };
    let mut config = BTreeMap::new();
    config.insert("input".into(), json!(input.display().to_string()));
    config.insert("max_order".into(), json!(effective_order));
    config.insert("grid".into(), json!(grid));
    config.insert("verify_order".into(), json!(config_struct.verify_order));
    config.insert("cnd_tol".into(), json!(tol));
    config.insert("match_tol".into(), json!(match_tol));
    Ok((
        pass,
        config,
        serde_json::to_value(&report).expect("serializable"),
        witness,
    ))
}

fn check_clt(
    text: &str,
    input: &Path,
    max_order: Option<usize>,
    rows: &[usize],
) -> Result<CheckResult, CliError> {
    let doc =
        TableDoc::from_json(text).map_err(|e| CliError(format!("{}: {e}", input.display())))?;
    let base = doc.to_cumulants()?;
    let effective_order = max_order
        .unwrap_or(base.max_order())
        .min(base.max_order())
        .min(MAX_ORDER_LIMIT);
    let report = clt_check(&base, rows, effective_order)?;
    let witness = if report.pass {
        Value::Null
    } else if !report.order3_rate_ok {
        json!(format!(
            "order-3 rate off target: ratios {:?}",
            report.order3_ratios
        ))
    } else {
        json!("cumulant scaling, oracle agreement, or convergence failed")
    };
    let mut config = BTreeMap::new();
    config.insert("input".into(), json!(input.display().to_string()));
    config.insert("max_order".into(), json!(effective_order));
    config.insert("rows".into(), json!(rows));
    let pass = report.pass;
    Ok((
        pass,
        config,
        serde_json::to_value(&report).expect("serializable"),
        witness,
    ))
}
