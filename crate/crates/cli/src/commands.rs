//! One function per subcommand. Results go to a file or stdout, warnings
//! to stderr.

use std::path::{Path, PathBuf};

use serde::Serialize;
use vulnscore::corpus::{load_dataset, save_dataset, validate_dataset, Dataset, Label, Violation};
use vulnscore::eval::{fit_cell, render_table, run_rfe_rows, run_table1_grid};
use vulnscore::extract::{assemble_dataset, extract_fragment, Fragment};
use vulnscore::findings::{parse_report, FindingsReport};
use vulnscore::fsutil::write_atomic;
use vulnscore::learn::{
    self, build_design_matrix, layer3_instance_weights, load_model, FeatureMask, LearnError, TrainedModel,
};
use vulnscore::manifest::load_manifest;
use vulnscore::synth::{generate_corpus, SynthConfig};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{
    ClassifyArgs, Cli, Command, DatasetCommand, Emit, EvaluateArgs, ExtractArgs, RfeArgs, SynthArgs, TrainArgs,
};

struct Ctx {
    cfg: RunConfig,
    quiet: bool,
}

impl Ctx {
    fn warn(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn dataset(&self, flag: Option<PathBuf>) -> Result<Dataset, CliError> {
        let path = self.cfg.path(flag, &self.cfg.dataset, "--dataset")?;
        Ok(load_dataset(&path)?)
    }

    fn out(&self, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.cfg.out.clone())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx { cfg, quiet: cli.quiet };
    match cli.command {
        Command::Extract(a) => extract(&ctx, a),
        Command::Dataset(DatasetCommand::Build { vulnerable, benign, out }) => {
            dataset_build(&ctx, &vulnerable, &benign, out)
        }
        Command::Dataset(DatasetCommand::Validate { dataset }) => dataset_validate(&ctx, dataset),
        Command::Train(a) => train(&ctx, a),
        Command::Rfe(a) => rfe(&ctx, a),
        Command::Classify(a) => classify(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Synth(a) => synth(&ctx, a),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Whole-file atomic write, or stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn require_seed(flag: Option<u64>, cfg: &RunConfig, command: &str) -> Result<u64, CliError> {
    flag.or(cfg.seed)
        .ok_or_else(|| CliError::Invalid(format!("{command} requires --seed")))
}

/// Both classes present, otherwise a model error before any work starts.
fn require_two_classes(d: &Dataset) -> Result<(), CliError> {
    if d.count(Label::Vulnerable) == 0 || d.count(Label::BenignFlaw) == 0 {
        return Err(LearnError::SingleClass.into());
    }
    Ok(())
}

fn report_warnings(ctx: &Ctx, path: &Path, r: &FindingsReport) {
    for e in &r.element_errors {
        ctx.warn(format_args!("{}: element {} (line {}): {}", path.display(), e.element, e.text_line, e.reason));
    }
    if r.unmatched_lines > 0 {
        ctx.warn(format_args!("{}: {} lines matched no diagnostic pattern", path.display(), r.unmatched_lines));
    }
}

fn extract(ctx: &Ctx, a: ExtractArgs) -> Result<(), CliError> {
    let out = ctx.out(a.out);
    if a.emit == Some(Emit::PerFile) && out.is_none() {
        return Err(CliError::Invalid("--emit per-file writes to stdout, so --out is required".into()));
    }
    let manifest = load_manifest(&a.manifest)?;
    let mut reports = Vec::with_capacity(a.findings.len());
    for p in &a.findings {
        let r = parse_report(&read(p)?).map_err(|e| CliError::from(e).in_file(p))?;
        report_warnings(ctx, p, &r);
        reports.push(r);
    }
    let binarize = a.binarize_l1 || ctx.cfg.binarize_l1.unwrap_or(false);
    let (fragment, files) = extract_fragment(&a.source, &reports, &manifest, binarize)?;
    for f in &files {
        for w in &f.warnings {
            ctx.warn(format_args!("{}:{}: {}", f.path, w.line, w.message));
        }
    }
    emit(out.as_deref(), &fragment.to_json())?;
    if a.emit == Some(Emit::PerFile) {
        emit(None, &pretty(&files))?;
    }
    Ok(())
}

fn read_fragments(paths: &[PathBuf]) -> Result<Vec<Fragment>, CliError> {
    paths
        .iter()
        .map(|p| Fragment::from_json(&read(p)?).map_err(|e| CliError::from(e).in_file(p)))
        .collect()
}

fn dataset_build(ctx: &Ctx, vulnerable: &[PathBuf], benign: &[PathBuf], out: Option<PathBuf>) -> Result<(), CliError> {
    let d = assemble_dataset(read_fragments(vulnerable)?, read_fragments(benign)?)?;
    let violations = validate_dataset(&d);
    if let Some(v) = violations.first() {
        return Err(CliError::Invalid(format!(
            "{} violation(s), first: {}",
            violations.len(),
            describe(v)
        )));
    }
    match ctx.out(out) {
        Some(p) => Ok(save_dataset(&d, &p)?),
        None => emit(None, &d.to_json()),
    }
}

fn describe(v: &Violation) -> String {
    let mut s = String::new();
    if let Some(i) = &v.instance {
        s += &format!("instance {i}: ");
    }
    if let Some(f) = &v.feature {
        s += &format!("{f}: ");
    }
    s + &v.rule
}

fn dataset_validate(ctx: &Ctx, dataset: Option<PathBuf>) -> Result<(), CliError> {
    let d = ctx.dataset(dataset)?;
    let violations = validate_dataset(&d);
    #[derive(Serialize)]
    struct Out<'a> {
        violations: &'a [Violation],
    }
    emit(None, &pretty(&Out { violations: &violations }))?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{} violation(s)", violations.len())))
    }
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<(), CliError> {
    let d = ctx.dataset(a.dataset)?;
    let kind = ctx.cfg.model(a.model)?;
    let cfg = a.tuning.resolve(&ctx.cfg)?;
    require_two_classes(&d)?;
    let model: TrainedModel = match a.features {
        Some(names) => {
            let mask = FeatureMask::from_names(&d.dictionary, &names)?;
            let weights = layer3_instance_weights(&d, cfg.beta)?;
            let m = build_design_matrix(&d, &mask)?.with_weights(weights)?;
            learn::train(&m, &cfg.train_params(kind))?
        }
        None => {
            let subset = ctx.cfg.subset(a.subset)?;
            let rows: Vec<usize> = (0..d.len()).collect();
            let seed = a.seed.or(ctx.cfg.seed).unwrap_or(0);
            let fit = fit_cell(&d, kind, subset, &rows, seed, &cfg)?;
            fit.warnings.iter().for_each(|w| ctx.warn(w));
            fit.model
        }
    };
    if kind == learn::ModelKind::Svm && !model.training.converged {
        ctx.warn(format_args!("SVM stopped after {} epochs without converging", model.training.epochs));
    }
    emit(ctx.out(a.out).as_deref(), &model.to_json())
}

fn rfe(ctx: &Ctx, a: RfeArgs) -> Result<(), CliError> {
    let d = ctx.dataset(a.dataset)?;
    let kind = ctx.cfg.model(a.model)?;
    let cfg = a.tuning.resolve(&ctx.cfg)?;
    require_two_classes(&d)?;
    let rows: Vec<usize> = (0..d.len()).collect();
    let weights = layer3_instance_weights(&d, cfg.beta)?;
    let seed = a.seed.or(ctx.cfg.seed).unwrap_or(0);
    let trace = run_rfe_rows(&d, kind, &rows, &weights, seed, &cfg)?;
    trace.warnings.iter().for_each(|w| ctx.warn(w));
    emit(ctx.out(a.out).as_deref(), &pretty(&trace))
}

#[derive(Serialize)]
struct Verdict<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    label: Label,
    decision: f64,
}

fn classify(ctx: &Ctx, a: ClassifyArgs) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let text = read(&a.input)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", a.input.display())))?;
    let items: Vec<(Option<String>, _)> = if value.get("instances").is_some() {
        let d = Dataset::from_json(&text).map_err(|e| CliError::from(e).in_file(&a.input))?;
        d.instances.into_iter().map(|i| (Some(i.id), i.features)).collect()
    } else {
        let f = Fragment::from_json(&text).map_err(|e| CliError::from(e).in_file(&a.input))?;
        vec![(None, f.features)]
    };
    let mut out = String::new();
    for (id, x) in &items {
        let missing = model.features.iter().filter(|n| x.get(n).is_none()).count();
        if missing > 0 {
            ctx.warn(format_args!(
                "{}: {missing} feature(s) absent, imputed from training data",
                id.as_deref().unwrap_or("input")
            ));
        }
        let decision = model.decision_value(x);
        if !decision.is_finite() {
            return Err(CliError::Model(format!("non-finite decision value for {}", id.as_deref().unwrap_or("input"))));
        }
        let v = Verdict { id: id.as_deref(), label: learn::label_of_sign(decision), decision };
        out += &serde_json::to_string(&v).expect("verdict serializes");
        out.push('\n');
    }
    emit(None, &out)
}

fn evaluate(ctx: &Ctx, a: EvaluateArgs) -> Result<(), CliError> {
    let seed = require_seed(a.seed, &ctx.cfg, "evaluate")?;
    let out = ctx.out(a.out).ok_or_else(|| CliError::Invalid("evaluate requires --out".into()))?;
    let cfg = a.tuning.resolve(&ctx.cfg)?;
    let d = ctx.dataset(a.dataset)?;
    let report = run_table1_grid(&d, seed, &cfg)?;
    report.warnings.iter().for_each(|w| ctx.warn(w));
    write_atomic(&out, report.to_json().as_bytes()).map_err(|e| CliError::io(&out, e))?;
    let table = render_table(&report);
    if let Some(p) = &a.table {
        emit(Some(p), &table)?;
    }
    emit(None, &table)
}

fn synth(ctx: &Ctx, a: SynthArgs) -> Result<(), CliError> {
    let seed = require_seed(a.seed, &ctx.cfg, "synth")?;
    let out = ctx.out(a.out).ok_or_else(|| CliError::Invalid("synth requires --out".into()))?;
    if a.instances == 0 {
        return Err(CliError::Invalid("--instances must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a.vulnerable_fraction) {
        return Err(CliError::Invalid("--vulnerable-fraction must lie in [0, 1]".into()));
    }
    let cfg = SynthConfig {
        instances: a.instances,
        vulnerable_fraction: a.vulnerable_fraction,
        informative_l3: a.informative_l3,
        ..SynthConfig::new(seed)
    };
    let d = generate_corpus(&cfg);
    save_dataset(&d, &out)?;
    if !ctx.quiet {
        eprintln!(
            "{} instances ({} vulnerable) written to {}",
            d.len(),
            d.count(Label::Vulnerable),
            out.display()
        );
    }
    Ok(())
}
