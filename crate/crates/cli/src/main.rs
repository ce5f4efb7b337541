use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vprisk_core::eval::compare_models;
use vprisk_core::pipeline::{
    model_output, risk_labels, train, ttc_output, BetaSetting, TrainOptions,
};
use vprisk_core::quantize::{is_raw_header, quantize_event, read_raw_csv, write_quantized_csv};
use vprisk_core::reduct::SearchMethod;
use vprisk_core::synth::{generate, SimConfig};
use vprisk_core::{DecisionTable, Error, Level, QuantizedRecord, RawEvent, VprsModel};

/// Variable-precision rough set risk grading for near-crash events.
#[derive(Parser)]
#[command(name = "vprisk", version)]
struct Cli {
    /// Seed for the simulator; overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log pipeline details to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic raw events.
    Simulate {
        /// TOML simulation config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert raw events to attribute levels and risk labels.
    Quantize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model from raw events or a decision table CSV.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Precision in (0.5, 1] as a decimal or a/b, or `auto`.
        #[arg(long, default_value = "auto", value_parser = parse_beta)]
        beta: BetaSetting,
        /// Reduct search; exhaustive up to 16 attributes, greedy beyond.
        #[arg(long, value_parser = parse_method)]
        method: Option<SearchMethod>,
        /// Decision column of a generic table (default `risk`, else the last column).
        #[arg(long)]
        decision: Option<String>,
    },
    /// Write one prediction per input row.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the model, and the TTC baseline for raw input, against true labels.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_beta(s: &str) -> Result<BetaSetting, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<SearchMethod, String> {
    match s {
        "exhaustive" => Ok(SearchMethod::Exhaustive),
        "greedy" => Ok(SearchMethod::Greedy),
        _ => Err(format!("`{s}` is not exhaustive or greedy")),
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::SchemaMismatch(_) => 4,
            Error::CorruptModel(_) => 5,
            Error::Degenerate(_)
            | Error::Config(_)
            | Error::InfeasibleRule { .. }
            | Error::Capacity { .. }
            | Error::UndefinedRate(_)
            | Error::UndefinedAuc => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

enum Input {
    Raw(Vec<RawEvent>),
    Table(DecisionTable),
}

fn has_raw_header(text: &str) -> bool {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    rdr.headers().is_ok_and(is_raw_header)
}

fn load_input(path: &Path, decision: Option<&str>) -> CliResult<Input> {
    let text = read(path)?;
    if has_raw_header(&text) {
        Ok(Input::Raw(read_raw_csv(text.as_bytes())?))
    } else {
        Ok(Input::Table(DecisionTable::read_csv(
            text.as_bytes(),
            decision,
        )?))
    }
}

fn quantize_all(events: &[RawEvent]) -> CliResult<Vec<QuantizedRecord>> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            quantize_event(e).map_err(|err| Failure {
                code: 2,
                message: format!("event {}: {err}", i + 1),
            })
        })
        .collect()
}

fn load_model(path: &Path) -> CliResult<VprsModel> {
    Ok(VprsModel::from_json(&read(path)?)?)
}

/// Reduct columns of every input row, in model order.
fn model_rows(model: &VprsModel, path: &Path) -> CliResult<Vec<Vec<Level>>> {
    let text = read(path)?;
    if has_raw_header(&text) {
        let records = quantize_all(&read_raw_csv(text.as_bytes())?)?;
        return Ok(model.project(&DecisionTable::from_records(&records))?);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(Error::from)?.clone();
    let mut cols = Vec::new();
    let mut missing = Vec::new();
    for name in &model.reduct {
        match header.iter().position(|h| h == name) {
            Some(i) => cols.push(i),
            None => missing.push(name.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::SchemaMismatch(missing).into());
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(Error::from)?;
        let row = cols
            .iter()
            .map(|&i| {
                rec[i].parse::<Level>().map_err(|_| Failure {
                    code: 2,
                    message: format!(
                        "row {}: `{}` in `{}` is not a level code",
                        rows.len() + 1,
                        &rec[i],
                        &header[i]
                    ),
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn simulate(seed: Option<u64>, config: Option<&Path>, out: &Path, verbose: bool) -> CliResult {
    let mut cfg = match config {
        Some(path) => {
            if !path.is_file() {
                return Err(Failure {
                    code: 2,
                    message: format!("{}: config file not found", path.display()),
                });
            }
            SimConfig::from_toml_str(&read(path)?)?
        }
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let events = generate(&cfg)?;
    if verbose {
        eprintln!(
            "simulate: {} events, seed {}, label noise {}",
            events.len(),
            cfg.seed,
            cfg.label_noise
        );
    }
    let mut buf = Vec::new();
    vprisk_core::quantize::write_raw_csv(&events, &mut buf)?;
    write_atomic(out, &buf)
}

fn quantize(input: &Path, out: &Path) -> CliResult {
    let events = read_raw_csv(read(input)?.as_bytes())?;
    let records = quantize_all(&events)?;
    let mut buf = Vec::new();
    write_quantized_csv(&records, &mut buf)?;
    write_atomic(out, &buf)
}

fn train_cmd(
    input: &Path,
    out: &Path,
    opts: TrainOptions,
    decision: Option<&str>,
    verbose: bool,
) -> CliResult {
    let dt = match load_input(input, decision)? {
        Input::Raw(events) => DecisionTable::from_records(&quantize_all(&events)?),
        Input::Table(dt) => dt,
    };
    let report = train(&dt, &opts)?;
    if let Some(raw) = report.raw_bound {
        eprintln!("beta: auto bound {raw}, clamped to {}", report.beta);
    }
    if verbose {
        eprintln!(
            "train: {} objects, {:?} reduct {{{}}}, quality {}, {} rules",
            dt.len(),
            report.reduct.method,
            report.model.reduct.join(", "),
            report.reduct.quality,
            report.model.rules.len()
        );
    }
    write_atomic(out, report.model.to_json().as_bytes())
}

fn classify(model: &Path, input: &Path, out: &Path) -> CliResult {
    let model = load_model(model)?;
    let rows = model_rows(&model, input)?;
    let mut text = String::from("id,decision,belief,matched,similarity,score\n");
    for (i, row) in rows.iter().enumerate() {
        let p = model.classify(row)?;
        let _ = writeln!(
            text,
            "{},{},{:.6},{},{:.6},{:.6}",
            i + 1,
            model.decision_label(p.decision),
            p.belief,
            p.matched.name(),
            p.similarity,
            p.risk_score
        );
    }
    write_atomic(out, text.as_bytes())
}

fn evaluate(model: &Path, input: &Path, out_dir: &Path, verbose: bool) -> CliResult {
    let model = load_model(model)?;
    let (dt, events) =
        match load_input(input, Some(&model.decision)).or_else(|_| load_input(input, None))? {
            Input::Raw(events) => (
                DecisionTable::from_records(&quantize_all(&events)?),
                Some(events),
            ),
            Input::Table(dt) => (dt, None),
        };
    let labels = risk_labels(&dt)?;
    let mut methods = vec![model_output(&model, &dt)?];
    if let Some(events) = &events {
        methods.push(ttc_output(events));
    }
    let report = compare_models(&methods, &labels)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_atomic(&out_dir.join("report.txt"), report.to_text().as_bytes())?;
    write_atomic(&out_dir.join("report.csv"), report.to_csv().as_bytes())?;
    for row in &report.rows {
        write_atomic(
            &out_dir.join(format!("roc_{}.csv", row.name)),
            row.roc.to_csv().as_bytes(),
        )?;
    }
    if verbose {
        eprint!("{}", report.to_text());
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let verbose = cli.verbose;
    match cli.command {
        Command::Simulate { config, out } => simulate(cli.seed, config.as_deref(), &out, verbose),
        Command::Quantize { input, out } => quantize(&input, &out),
        Command::Train {
            input,
            out,
            beta,
            method,
            decision,
        } => train_cmd(
            &input,
            &out,
            TrainOptions { beta, method },
            decision.as_deref(),
            verbose,
        ),
        Command::Classify { model, input, out } => classify(&model, &input, &out),
        Command::Evaluate {
            model,
            input,
            out_dir,
        } => evaluate(&model, &input, &out_dir, verbose),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
