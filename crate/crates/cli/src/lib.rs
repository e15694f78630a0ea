//! The `geomorph` command line: argument parsing and one function per subcommand.
//!
//! Every subcommand produces a [`RunReport`]; `main` renders it as TSV or JSON
//! and exits with the report's status code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use geomorph_core::{
    base_configuration, class_of_base, competition, deponent_transform, evaluate, fixtures, learn_angles,
    learn_class_rotation, max_rows, parse_str, run_class_batch, smart_init, train, AngleLearnConfig, AngleModel,
    CompetitionMatrix, CompositionError, ContentError, Evaluation, ExponenceError, ExponentMatrix, LabeledTable,
    ParadigmFile, ParseError, RotationError, RotationLearnConfig, RunReport, RunStatus, TrainConfig,
    UpdateSchedule,
};

#[derive(Debug, Parser)]
#[command(name = "geomorph", version, about = "Geometric model of inflectional morphology")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed for the learners.
    #[arg(long, global = true, env = "GEOMORPH_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smart initialization: B from counts, or the base configuration of a class file.
    Init {
        /// Paradigm file path or bundled fixture name.
        input: String,
        /// Smallest class size that enters the base configuration.
        #[arg(long, default_value_t = 3)]
        min_lexemes: u32,
    },
    /// Competition matrix and winners under the smart-initialized B.
    Select { input: String },
    /// Delta-rule training from the smart-initialized B.
    Train {
        input: String,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Update only on rows that are currently wrong.
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        error_driven: bool,
        /// Sum a whole pass of updates before renormalizing.
        #[arg(long)]
        batch: bool,
        /// Minimum margin reported as satisfactory.
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
        /// Write one JSON object per iteration to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Stem+affix selection with a fixed angle model, or angle learning.
    Compose {
        input: String,
        #[arg(long, default_value_t = 0.01)]
        stepsize: f64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Number of seeded learning runs; the first one is reported.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Learn even if the file gives angles.
        #[arg(long)]
        learn: bool,
    },
    /// Rotation learning of inflection classes, or the deponent rotation.
    Rotate {
        input: String,
        #[arg(long, default_value_t = 0.1)]
        increment: f64,
        /// Margin every cell must reach.
        #[arg(long, default_value_t = 0.02)]
        margin: f64,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long, default_value_t = 3)]
        min_lexemes: u32,
        /// Learn one class and report its rotation plan.
        #[arg(long)]
        class: Option<String>,
        /// Rotate a single paradigm by 3π/2 in the plane of two values.
        #[arg(long, num_args = 2, value_names = ["ACTIVE", "PASSIVE"])]
        deponent: Option<Vec<String>>,
    },
    /// Re-render a saved JSON report.
    Report { path: PathBuf },
    /// List the bundled fixtures.
    Fixtures,
}


#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{input} is neither a readable file nor a bundled fixture (try `geomorph fixtures`)")]
    UnknownInput { input: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{input}: {source}")]
    Parse { input: String, source: ParseError },
    #[error("{input}: {source}")]
    Content { input: String, source: ContentError },
    #[error("{path}: not a report: {source}")]
    Report { path: PathBuf, source: serde_json::Error },
    #[error("unknown feature value `{0}`")]
    UnknownValue(String),
    #[error("no class labeled `{0}`")]
    UnknownClass(String),
    #[error(transparent)]
    Exponence(#[from] ExponenceError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Composition(#[from] CompositionError),
}

/// What a subcommand hands back to `main`.
#[derive(Debug)]
pub enum Output {
    Report { report: Box<RunReport>, exit_code: i32 },
    Text(String),
}

/// Reads a file path, falling back to a bundled fixture name or unique prefix.
pub fn load_input(input: &str) -> Result<ParadigmFile, CliError> {
    let path = Path::new(input);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?
    } else if let Some((_, text)) = fixtures::source(input) {
        text.to_string()
    } else {
        return Err(CliError::UnknownInput { input: input.into() });
    };
    parse_str(&text).map_err(|source| CliError::Parse { input: input.into(), source })
}

fn content<T>(input: &str, r: Result<T, ContentError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Content { input: input.into(), source })
}

fn b_table(name: &str, b: &ExponentMatrix, value_labels: &[String]) -> LabeledTable {
    LabeledTable::from_matrix(name, value_labels, b.morphemes(), b.columns())
}

fn competition_table(c: &CompetitionMatrix) -> LabeledTable {
    LabeledTable::from_matrix("competition", c.row_labels(), c.morphemes(), c.entries())
}

/// Competition as the main table, with winners, margins and mismatches.
fn selection_report(command: &str, input: &str, c: &CompetitionMatrix, ev: &Evaluation) -> RunReport {
    let mut r = RunReport::new(command, input, competition_table(c));
    let sel = max_rows(c);
    r.winners = (0..c.row_labels().len()).map(|i| sel.tpm.winner_label(i).map(str::to_string)).collect();
    r.margins = ev.cells.iter().map(|o| o.predicted.as_ref().map(|_| o.margin)).collect();
    r.mismatches = ev.mismatches.clone();
    r.set_summary("correct", ev.correct());
    r.set_summary("cells", ev.cells.len());
    r.set_summary("min_margin", ev.min_margin);
    r.set_summary("min_gold_margin", ev.min_gold_margin);
    r.set_summary("ties", ev.ties.len());
    if !ev.ties.is_empty() {
        r.status = RunStatus::GoldTie;
    }
    r
}

fn cmd_init(input: &str, min_lexemes: u32) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    let labels = file.features.value_names();
    if let Ok(inv) = file.class_inventory() {
        let base = base_configuration(&inv, min_lexemes)?;
        let mut r = RunReport::new("init", input, b_table("B", &base.b, &labels));
        r.set_config("min_lexemes", min_lexemes);
        let counts = base.counts.entries();
        r.tables.push(LabeledTable::from_matrix("counts", &labels, base.counts.morphemes(), counts));
        r.set_summary("included", base.included.join(","));
        r.set_summary("base_class", class_of_base(&base.b, &inv)?.unwrap_or_else(|| "-".into()));
        return Ok(r);
    }
    let (phi, gold) = content(input, file.paradigm())?;
    let b = smart_init(&phi, &gold, None)?;
    Ok(RunReport::new("init", input, b_table("B", &b, &labels)))
}

fn cmd_select(input: &str) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    let (phi, gold) = content(input, file.paradigm())?;
    let b = smart_init(&phi, &gold, None)?;
    let c = competition(&phi, &b)?;
    let ev = evaluate(&c, &gold)?;
    let mut r = selection_report("select", input, &c, &ev);
    r.tables.push(b_table("B", &b, &file.features.value_names()));
    Ok(r)
}

fn cmd_train(input: &str, cfg: &TrainConfig, trace: Option<&Path>) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    let (phi, gold) = content(input, file.paradigm())?;
    let b0 = smart_init(&phi, &gold, None)?;
    let out = train(&b0, &phi, &gold, cfg)?;
    if let Some(path) = trace {
        fs::write(path, out.trace.to_json_lines()).map_err(|source| CliError::Write { path: path.into(), source })?;
    }
    let c = competition(&phi, &out.b)?;
    let ev = evaluate(&c, &gold)?;
    let mut r = selection_report("train", input, &c, &ev);
    r.set_config("eta", cfg.eta);
    r.set_config("max_iters", cfg.max_iters);
    r.set_config("error_driven", cfg.error_driven);
    r.set_config("schedule", if cfg.schedule == UpdateSchedule::Batch { "batch" } else { "online" });
    r.set_config("tolerance", cfg.tolerance);
    r.tables.push(b_table("B", &out.b, &file.features.value_names()));
    r.set_summary("converged", out.converged);
    r.set_summary("iterations", out.iterations);
    r.set_summary("initial_mismatches", out.trace.records[0].mismatches);
    r.set_summary("margin_ok", ev.min_margin >= cfg.tolerance);
    if !out.converged {
        r.status = RunStatus::NotConverged;
    }
    Ok(r)
}

fn model_table(m: &AngleModel) -> LabeledTable {
    let all: Vec<&(String, f64)> = m.stems.iter().chain(&m.affixes).collect();
    LabeledTable {
        name: "angle".into(),
        row_labels: all.iter().map(|e| e.0.clone()).collect(),
        col_labels: ["radians", "degrees", "x", "y"].map(String::from).to_vec(),
        entries: all.iter().map(|e| vec![e.1, e.1.to_degrees(), e.1.cos(), e.1.sin()]).collect(),
    }
}

/// One row per gold form: the angle of the chosen and the gold sum to the
/// target axis, and the gold sum's length.
fn forms_report(input: &str, file: &ParadigmFile, m: &AngleModel) -> Result<RunReport, CliError> {
    let data = content(input, file.angle_data())?;
    let mut rows = Vec::new();
    let mut winners = Vec::new();
    let mut margins = Vec::new();
    let mut mismatches = Vec::new();
    for (label, f) in file.form_labels().into_iter().zip(&data.forms) {
        let choice = m.select_affix(&f.stem, f.target)?;
        let gold_offset = m.sum_offset(&f.stem, &f.affix, f.target)?;
        let magnitude = geomorph_core::angle_of_sum(
            m.stem_angle(&f.stem).expect("declared stem"),
            m.affix_angle(&f.affix).expect("declared affix"),
        )?
        .magnitude;
        let mut rival = f64::INFINITY;
        for (a, _) in m.affixes.iter().filter(|a| a.0 != f.affix) {
            rival = rival.min(m.sum_offset(&f.stem, a, f.target)?);
        }
        let chosen = choice.best.as_ref().map(|a| m.sum_offset(&f.stem, a, f.target)).transpose()?;
        if choice.best.as_deref() != Some(f.affix.as_str()) {
            mismatches.push(label.clone());
        }
        rows.push(vec![chosen.unwrap_or(f64::NAN), gold_offset, magnitude]);
        margins.push(Some(rival - gold_offset));
        winners.push(choice.best);
    }
    let table = LabeledTable {
        name: "form".into(),
        row_labels: file.form_labels(),
        col_labels: ["chosen_offset", "gold_offset", "gold_magnitude"].map(String::from).to_vec(),
        entries: rows,
    };
    let mut r = RunReport::new("compose", input, table);
    r.winners = winners;
    r.margins = margins;
    r.set_summary("mismatches", mismatches.len());
    r.mismatches = mismatches;
    r.tables.push(model_table(m));
    Ok(r)
}

fn cmd_compose(input: &str, cfg: &AngleLearnConfig, runs: usize, learn: bool) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    if file.has_angles() && !learn {
        let m = content(input, file.angle_model())?;
        return forms_report(input, &file, &m);
    }
    let data = content(input, file.angle_data())?;
    let mut first = None;
    let mut converged = 0;
    for k in 0..runs.max(1) as u64 {
        let run = AngleLearnConfig { seed: cfg.seed.wrapping_add(k), ..cfg.clone() };
        let out = learn_angles(&data, &run)?;
        converged += usize::from(out.converged);
        first.get_or_insert(out);
    }
    let first = first.expect("at least one run");
    let mut r = forms_report(input, &file, &first.model)?;
    r.set_config("stepsize", cfg.stepsize);
    r.set_config("margin", cfg.margin);
    r.set_config("max_iters", cfg.max_iters);
    r.set_config("seed", cfg.seed);
    r.set_config("runs", runs.max(1));
    r.set_summary("converged", first.converged);
    r.set_summary("iterations", first.iterations);
    r.set_summary("runs_converged", converged);
    if converged < runs.max(1) {
        r.status = RunStatus::NotConverged;
    }
    Ok(r)
}

fn cmd_deponent(input: &str, active: &str, passive: &str) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    let (phi, gold) = content(input, file.paradigm())?;
    let fs = &file.features;
    let axis = |v: &str| fs.value_index(v).ok_or_else(|| CliError::UnknownValue(v.into()));
    let b = smart_init(&phi, &gold, None)?;
    let rotated = deponent_transform(&b, axis(active)?, axis(passive)?)?;
    let c = competition(&phi, &rotated)?;
    let ev = evaluate(&c, &gold)?;
    let mut r = selection_report("rotate", input, &c, &ev);
    r.set_config("deponent", json!([active, passive]));
    r.tables.push(b_table("B", &b, &fs.value_names()));
    r.tables.push(b_table("rotated", &rotated, &fs.value_names()));
    // the rotation is meant to move winners, so mismatches are expected here
    r.status = if ev.ties.is_empty() { RunStatus::Success } else { RunStatus::GoldTie };
    Ok(r)
}

fn cmd_rotate(
    input: &str,
    cfg: &RotationLearnConfig,
    min_lexemes: u32,
    class: Option<&str>,
) -> Result<RunReport, CliError> {
    let file = load_input(input)?;
    let inv = content(input, file.class_inventory())?;
    let base = base_configuration(&inv, min_lexemes)?;
    let base_gold = max_rows(&competition(&inv.phi, &base.b)?).tpm;
    let base_class = class_of_base(&base.b, &inv)?.unwrap_or_else(|| "-".into());
    let mut r = if let Some(label) = class {
        let target = inv.class(label).ok_or_else(|| CliError::UnknownClass(label.into()))?;
        let out = learn_class_rotation(&base.b, &inv.phi, &target.gold, label, cfg, cfg.seed)?;
        let table = LabeledTable {
            name: "rotation".into(),
            row_labels: (1..=out.plan.rotations.len()).map(|k| k.to_string()).collect(),
            col_labels: ["i", "j", "theta"].map(String::from).to_vec(),
            entries: out.plan.rotations.iter().map(|p| vec![p.i as f64, p.j as f64, p.theta]).collect(),
        };
        let mut r = RunReport::new("rotate", input, table);
        r.set_summary("class", label);
        r.set_summary("distance", base_gold.hamming(&target.gold));
        r.set_summary("converged", out.converged);
        r.set_summary("iterations", out.iterations);
        r.set_summary("min_margin", out.min_margin);
        r.set_summary("rotations", out.plan.rotations.len());
        if !out.converged {
            r.status = RunStatus::NotConverged;
        }
        r
    } else {
        let mut rows = Vec::new();
        let mut failed = 0;
        for c in &inv.classes {
            let (s, _) = run_class_batch(&base.b, &base_gold, &inv.phi, c, cfg)?;
            failed += s.runs - s.converged;
            rows.push(s);
        }
        let table = LabeledTable {
            name: "class".into(),
            row_labels: rows.iter().map(|s| s.class.clone()).collect(),
            col_labels: ["distance", "min_margin", "mean_iterations", "converged", "runs", "max_iterations", "lexemes"]
                .map(String::from)
                .to_vec(),
            entries: rows
                .iter()
                .map(|s| {
                    vec![
                        s.distance as f64,
                        s.mean_min_margin,
                        s.mean_iterations,
                        s.converged as f64,
                        s.runs as f64,
                        s.max_iterations as f64,
                        f64::from(s.lexemes),
                    ]
                })
                .collect(),
        };
        let mut r = RunReport::new("rotate", input, table);
        r.set_summary("runs_not_converged", failed);
        if failed > 0 {
            r.status = RunStatus::NotConverged;
        }
        r
    };
    r.set_config("increment", cfg.base_increment);
    r.set_config("margin", cfg.margin_floor);
    r.set_config("max_iters", cfg.max_iters);
    r.set_config("runs", cfg.runs);
    r.set_config("seed", cfg.seed);
    r.set_config("min_lexemes", min_lexemes);
    r.set_summary("base_class", base_class);
    r.set_summary("included", base.included.join(","));
    Ok(r)
}

/// Runs one parsed command line.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let seed = cli.seed.unwrap_or(0);
    let report = match &cli.command {
        Command::Init { input, min_lexemes } => cmd_init(input, *min_lexemes)?,
        Command::Select { input } => cmd_select(input)?,
        Command::Train { input, eta, max_iters, error_driven, batch, tolerance, trace } => {
            let cfg = TrainConfig {
                eta: *eta,
                error_driven: *error_driven,
                max_iters: *max_iters,
                tolerance: *tolerance,
                schedule: if *batch { UpdateSchedule::Batch } else { UpdateSchedule::Online },
            };
            cmd_train(input, &cfg, trace.as_deref())?
        }
        Command::Compose { input, stepsize, margin, max_iters, runs, learn } => {
            let cfg = AngleLearnConfig { stepsize: *stepsize, margin: *margin, max_iters: *max_iters, seed };
            cmd_compose(input, &cfg, *runs, *learn)?
        }
        Command::Rotate { input, deponent: Some(axes), .. } => cmd_deponent(input, &axes[0], &axes[1])?,
        Command::Rotate { input, increment, margin, runs, max_iters, min_lexemes, class, deponent: None } => {
            let cfg = RotationLearnConfig {
                base_increment: *increment,
                max_iters: *max_iters,
                runs: *runs,
                seed,
                margin_floor: *margin,
            };
            cmd_rotate(input, &cfg, *min_lexemes, class.as_deref())?
        }
        Command::Report { path } => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            let report =
                RunReport::from_json(&text).map_err(|source| CliError::Report { path: path.clone(), source })?;
            return Ok(Output::Report { report: Box::new(report), exit_code: 0 });
        }
        Command::Fixtures => {
            return Ok(Output::Text(fixtures::names().map(|n| format!("{n}\n")).collect()));
        }
    };
    let exit_code = report.status.exit_code();
    Ok(Output::Report { report: Box::new(report), exit_code })
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Tsv => report.to_tsv(),
        Format::Json => report.to_json(),
    }
}
