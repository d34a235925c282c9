use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use stylodiv::ablation::{self, Subset, SubsetAnalysis, PRESETS};
use stylodiv::corpus::{self, BaselineOptions, FeaturesHeader, InputFormat, ValidationReport};
use stylodiv::divergence::{self, AnalysisOptions, BaselineView, FeatureRow, PairChange, Provenance, REPORT_SCHEMA};
use stylodiv::diversity::{self, DiversityReport, DIVERSITY_SCHEMA};
use stylodiv::mechsim::{self, Axis, MechanismParams, SweepRow};
use stylodiv::render::{self, Delimiter, Table};
use stylodiv::stats::{self, PermutationConfig};
use stylodiv::{parallel, BaselineStats, DivergenceReport, FeatureId};

use crate::input::{self, label_of};
use crate::{AnalysisArgs, AxisArg, Cli, Command, Format, Global, InputArgs, InputKind, View};

pub const COMPARE_SCHEMA: &str = "stylodiv-compare/1";
pub const ABLATION_SCHEMA: &str = "stylodiv-ablation/1";
pub const SIMULATE_SCHEMA: &str = "stylodiv-simulate/1";
pub const PANEL_SCHEMA: &str = "stylodiv-panel/1";

/// Marks failures that are the tool's fault rather than the input's.
#[derive(Debug)]
pub struct Internal(pub String);

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal error: {}", self.0)
    }
}

impl std::error::Error for Internal {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Internal>().is_some() {
        1
    } else {
        2
    }
}

struct Ctx {
    workers: usize,
    seed: u64,
    format: Option<Format>,
    output: Option<PathBuf>,
}

impl Ctx {
    fn new(g: &Global) -> Self {
        Ctx {
            workers: g.workers.map(|w| w as usize).unwrap_or_else(parallel::default_workers),
            seed: g.seed,
            format: g.format,
            output: g.output.clone(),
        }
    }

    fn provenance(&self, inputs: &[&Path]) -> Result<Provenance> {
        let mut p = Provenance::new(self.seed);
        p.inputs = input::digests(inputs)?;
        Ok(p)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => write_file(path, text),
            None => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Internal(format!("writing stdout: {e}")).into())
            }
        }
    }

    /// Writes either the JSON document or the table, by format.
    fn emit_either(&self, default: Format, json: impl FnOnce() -> Result<String>, table: impl FnOnce() -> Table) -> Result<()> {
        match self.format.unwrap_or(default) {
            Format::Json => self.emit(&json()?),
            Format::Csv => self.emit(&table().render(Delimiter::Comma)),
            Format::Tsv => self.emit(&table().render(Delimiter::Tab)),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn input_format(args: &InputArgs) -> InputFormat {
    match args.input_format {
        InputKind::Jsonl => InputFormat::Jsonl,
        InputKind::TxtDir => InputFormat::TxtDir,
        InputKind::TxtDelim => InputFormat::TxtDelim {
            delimiter: args.delimiter.clone(),
        },
    }
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the current time.
fn build_timestamp() -> Result<u64> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v.trim().parse().context("SOURCE_DATE_EPOCH must be an integer"),
        Err(_) => Ok(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(&cli.global);
    match cli.command {
        Command::Baseline {
            inputs,
            input,
            sample_limit,
            label,
        } => baseline(&ctx, &inputs, &input, sample_limit, label),
        Command::Extract { path, input, label } => extract(&ctx, &path, &input, label),
        Command::Analyze {
            samples,
            analysis,
            input,
            model,
            table,
        } => analyze(&ctx, &samples, &analysis, &input, model, table.as_deref()),
        Command::Compare {
            pairs,
            baseline,
            resamples,
            input,
        } => compare(&ctx, &pairs, baseline.as_deref(), resamples, &input),
        Command::Diversity { samples, input } => diversity_cmd(&ctx, &samples, &input),
        Command::Ablate { reports, subset } => ablate(&ctx, &reports, &subset),
        Command::Simulate {
            axis,
            grid,
            context_shift,
            trigger_rate_formal,
            trigger_rate_mixture,
            absorption,
            steps,
            episodes,
        } => {
            let params = MechanismParams {
                context_shift,
                trigger_rate_formal,
                trigger_rate_mixture,
                absorption,
                steps,
                episodes,
                seed: ctx.seed,
            };
            simulate(&ctx, axis, grid, params)
        }
        Command::Report {
            reports,
            features,
            heatmap,
        } => report(&ctx, &reports, features.as_deref(), heatmap.as_deref()),
        Command::Validate { files, input } => validate(&ctx, &files, &input),
        Command::Retest { first, second } => retest(&ctx, &first, &second),
    }
}

fn baseline(ctx: &Ctx, inputs: &[PathBuf], args: &InputArgs, sample_limit: Option<u64>, label: Option<String>) -> Result<()> {
    let format = input_format(args);
    let options = BaselineOptions {
        label: label.unwrap_or_else(|| label_of(&inputs[0])),
        sample_limit,
        seed: ctx.seed,
        workers: ctx.workers,
        timestamp: build_timestamp()?,
    };
    let mut streams = inputs
        .iter()
        .map(|p| corpus::ingest(p, &input::effective_format(p, &format)))
        .collect::<Result<Vec<_>, _>>()?;
    let build = corpus::build_baseline(streams.iter_mut().flatten(), &options)?;
    let skipped: u64 = streams.iter().map(|s| s.skipped()).sum();

    let mut stats = build.stats;
    let paths: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    stats.provenance = Some(ctx.provenance(&paths)?);

    eprintln!(
        "baseline `{}`: {} documents, {} tokens, {}/24 features with CV > 0.5, {} malformed records skipped",
        stats.corpus_label,
        stats.doc_count,
        stats.token_count,
        stats.cv_over(0.5),
        skipped
    );
    if let Some(limit) = sample_limit {
        if build.sampled {
            eprintln!("sampled {limit} of {} documents (seed {})", build.seen, ctx.seed);
        } else {
            eprintln!("note: sample limit {limit} covers all {} documents; no sampling", build.seen);
        }
    }
    for w in &build.warnings {
        eprintln!("warning: {w}");
    }
    ctx.emit_either(Format::Json, || Ok(corpus::baseline_to_string(&stats)), || render::baseline_table(&stats))
}

fn extract(ctx: &Ctx, path: &Path, args: &InputArgs, label: Option<String>) -> Result<()> {
    let (docs, skipped) = input::read_documents(path, &input_format(args))?;
    let records = corpus::extract_stream(docs.into_iter().map(Ok), ctx.workers)?;
    let mut header = FeaturesHeader::new(label.unwrap_or_else(|| label_of(path)), &records, skipped);
    header.inputs = input::digests(&[path])?;
    eprintln!("extracted {} documents ({} skipped)", records.len(), skipped);
    ctx.emit_either(
        Format::Json,
        || Ok(corpus::features_to_string(&header, &records)),
        || {
            let rows: Vec<_> = records.iter().map(|r| (r.id.clone(), r.to_vector())).collect();
            render::features_table(&rows)
        },
    )
}

fn parse_features(names: &[String]) -> Result<Vec<FeatureId>> {
    names
        .iter()
        .map(|n| n.trim())
        .filter(|n| !n.is_empty())
        .map(|n| FeatureId::from_name(n).with_context(|| format!("unknown feature `{n}`")))
        .collect()
}

fn analysis_options(args: &AnalysisArgs, model: String) -> Result<AnalysisOptions> {
    Ok(AnalysisOptions {
        model,
        delta: args.delta,
        view: match args.view {
            View::Pooled => BaselineView::Pooled,
            View::Mean => BaselineView::Mean,
        },
        excluded: parse_features(&args.exclude)?,
        alpha: args.alpha,
    })
}

fn analyze_path(ctx: &Ctx, samples: &Path, baseline: &BaselineStats, baseline_path: &Path, options: &AnalysisOptions, format: &InputFormat) -> Result<DivergenceReport> {
    let set = input::read_samples(samples, format, ctx.workers)?;
    let vectors: Vec<_> = set.records.iter().map(|r| r.to_vector()).collect();
    let mut options = options.clone();
    if options.model.is_empty() {
        options.model = set.label;
    }
    let mut report = divergence::analyze_sample(&vectors, baseline, &options)?;
    report.provenance = Some(ctx.provenance(&[samples, baseline_path])?);
    Ok(report)
}

fn analyze(ctx: &Ctx, samples: &Path, args: &AnalysisArgs, input_args: &InputArgs, model: Option<String>, table: Option<&Path>) -> Result<()> {
    let baseline = corpus::load_baseline(&args.baseline)?;
    let options = analysis_options(args, model.unwrap_or_default())?;
    let report = analyze_path(ctx, samples, &baseline, &args.baseline, &options, &input_format(input_args))?;
    eprintln!(
        "{}: mean AR {:.4}, {}/{} features divergent at delta {}, distance from 1.0 {:.4}, hypothesis {}",
        report.model,
        report.mean_ar,
        report.divergent_count(),
        report.defined_count,
        report.delta,
        report.distance_from_one,
        report.hypothesis
    );
    if let Some(path) = table {
        write_file(path, &render::report_feature_table(&report).render(Delimiter::Comma))?;
    }
    ctx.emit_either(Format::Json, || to_json(&report), || render::report_feature_table(&report))
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    schema: &'a str,
    pairs: &'a [PairChange],
    provenance: Provenance,
}

fn compare(ctx: &Ctx, paths: &[PathBuf], baseline_path: Option<&Path>, resamples: usize, args: &InputArgs) -> Result<()> {
    if paths.len() % 2 != 0 {
        bail!("inputs must come in BASE TUNED pairs, got {} paths", paths.len());
    }
    let baseline = baseline_path.map(corpus::load_baseline).transpose()?;
    let format = input_format(args);
    let load = |p: &Path| -> Result<DivergenceReport> {
        if p.is_file() && input::is_report(p) {
            return input::load_report(p);
        }
        match (&baseline, baseline_path) {
            (Some(b), Some(bp)) => analyze_path(ctx, p, b, bp, &AnalysisOptions { model: String::new(), ..Default::default() }, &format),
            _ => bail!("{} is not a report; pass --baseline to analyze raw samples", p.display()),
        }
    };
    let config = PermutationConfig {
        resamples,
        seed: ctx.seed,
        workers: ctx.workers,
    };
    let mut pairs = Vec::new();
    for pair in paths.chunks(2) {
        let (base, tuned) = (load(&pair[0])?, load(&pair[1])?);
        let mut change = divergence::pairwise_change(&base, &tuned);
        if let (Some(a), Some(b)) = (&base.sample, &tuned.sample) {
            if a.per_output_scores.len() >= 2 && b.per_output_scores.len() >= 2 {
                change.test = Some(stats::permutation_test(&a.per_output_scores, &b.per_output_scores, &config)?);
            }
        }
        pairs.push(change);
    }
    let mut inputs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    inputs.extend(baseline_path);
    let provenance = ctx.provenance(&inputs)?;
    ctx.emit_either(
        Format::Csv,
        || {
            to_json(&CompareOutput {
                schema: COMPARE_SCHEMA,
                pairs: &pairs,
                provenance: provenance.clone(),
            })
        },
        || render::pairwise_table(&pairs),
    )
}

fn diversity_cmd(ctx: &Ctx, paths: &[PathBuf], args: &InputArgs) -> Result<()> {
    let format = input_format(args);
    let mut reports: Vec<DiversityReport> = Vec::new();
    for p in paths {
        if input::is_features_file(p)? {
            bail!("{} is a features file; diversity needs the raw texts", p.display());
        }
        let (docs, _) = input::read_documents(p, &format)?;
        let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
        let mut r = diversity::diversity_report(&label_of(p), &texts, ctx.workers).with_context(|| format!("in {}", p.display()))?;
        r.provenance = Some(ctx.provenance(&[p])?);
        eprintln!(
            "{}: self-BLEU-4 {:.4}, distinct-4 {}, repetition {:.4}",
            r.label,
            r.self_bleu4,
            render::num(r.distinct_4),
            r.repetition
        );
        reports.push(r);
    }
    ctx.emit_either(
        Format::Json,
        || match reports.as_slice() {
            [one] => to_json(one),
            many => to_json(&many),
        },
        || render::diversity_table(&reports),
    )
}

fn load_reports(paths: &[PathBuf]) -> Result<(Vec<DivergenceReport>, Vec<PathBuf>)> {
    let files = input::expand_reports(paths)?;
    if files.is_empty() {
        bail!("no report files found");
    }
    let reports = files.iter().map(|f| input::load_report(f)).collect::<Result<Vec<_>>>()?;
    Ok((reports, files))
}

#[derive(Serialize)]
struct AblationOutput<'a> {
    schema: &'a str,
    models: Vec<String>,
    subsets: &'a [SubsetAnalysis],
    provenance: Provenance,
}

fn ablate(ctx: &Ctx, paths: &[PathBuf], subsets: &[String]) -> Result<()> {
    let (reports, files) = load_reports(paths)?;
    let subsets: Vec<Subset> = if subsets.is_empty() {
        PRESETS.iter().map(|p| Subset::preset(p)).collect::<Result<_, _>>()?
    } else {
        subsets.iter().map(|s| Subset::parse(s)).collect::<Result<_, _>>()?
    };
    let rows = ablation::run_ablation(&reports, &subsets)?;
    let inputs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let provenance = ctx.provenance(&inputs)?;
    ctx.emit_either(
        Format::Csv,
        || {
            to_json(&AblationOutput {
                schema: ABLATION_SCHEMA,
                models: reports.iter().map(|r| r.model.clone()).collect(),
                subsets: &rows,
                provenance: provenance.clone(),
            })
        },
        || render::ablation_table(&rows),
    )
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    schema: &'a str,
    axis: Axis,
    params: MechanismParams,
    rows: &'a [SweepRow],
    provenance: Provenance,
}

fn default_grid(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::Steps => vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0],
        Axis::Absorption | Axis::ContextShift => (0..=10).map(|i| i as f64 / 10.0).collect(),
    }
}

fn simulate(ctx: &Ctx, axis: AxisArg, grid: Vec<f64>, params: MechanismParams) -> Result<()> {
    let axis = match axis {
        AxisArg::Steps => Axis::Steps,
        AxisArg::Absorption => Axis::Absorption,
        AxisArg::ContextShift => Axis::ContextShift,
    };
    let grid = if grid.is_empty() { default_grid(axis) } else { grid };
    params.validate()?;
    let rows = mechsim::sweep(&params, axis, &grid, ctx.workers)?;
    ctx.emit_either(
        Format::Csv,
        || {
            to_json(&SimulateOutput {
                schema: SIMULATE_SCHEMA,
                axis,
                params,
                rows: &rows,
                provenance: Provenance::new(ctx.seed),
            })
        },
        || render::simulate_table(axis, &rows),
    )
}

#[derive(Serialize)]
struct ModelSummary {
    model: String,
    mean_ar: f64,
    sig_features: Option<usize>,
    divergent_features: usize,
    defined_features: usize,
    divergent_fraction: f64,
    max_ar: f64,
    max_feature: FeatureId,
    distance_from_one: f64,
    hypothesis: bool,
}

#[derive(Serialize)]
struct PanelOutput<'a> {
    schema: &'a str,
    models: Vec<ModelSummary>,
    features: &'a [FeatureRow],
    provenance: Provenance,
}

fn report(ctx: &Ctx, paths: &[PathBuf], features: Option<&Path>, heatmap: Option<&Path>) -> Result<()> {
    let (reports, files) = load_reports(paths)?;
    let rows = divergence::feature_table(&reports);
    if let Some(path) = features {
        write_file(path, &render::feature_summary_table(&rows).render(Delimiter::Comma))?;
    }
    if let Some(path) = heatmap {
        write_file(path, &render::heatmap_long(&reports).render(Delimiter::Comma))?;
    }
    let inputs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let provenance = ctx.provenance(&inputs)?;
    ctx.emit_either(
        Format::Csv,
        || {
            let models = reports
                .iter()
                .map(|r| ModelSummary {
                    model: r.model.clone(),
                    mean_ar: r.mean_ar,
                    sig_features: r.sig_feature_count,
                    divergent_features: r.divergent_count(),
                    defined_features: r.defined_count,
                    divergent_fraction: r.divergent_fraction,
                    max_ar: r.max_ar,
                    max_feature: r.argmax,
                    distance_from_one: r.distance_from_one,
                    hypothesis: r.hypothesis,
                })
                .collect();
            to_json(&PanelOutput {
                schema: PANEL_SCHEMA,
                models,
                features: &rows,
                provenance: provenance.clone(),
            })
        },
        || render::model_table(&reports),
    )
}

/// What a file turned out to be, with a short description.
fn check_file(path: &Path, format: &InputFormat) -> Result<(String, String)> {
    if input::is_features_file(path)? {
        let text = fs::read_to_string(path)?;
        let (h, records) = corpus::features_from_str(&text)?;
        return Ok((h.schema, format!("{} documents, {} tokens", records.len(), h.token_count)));
    }
    let value = if path.is_file() {
        fs::read_to_string(path)
            .ok()
            .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok().map(|v| (t, v)))
    } else {
        None
    };
    if let Some((text, v)) = value {
        if let Some(schema) = v.get("schema").and_then(|s| s.as_str()).map(String::from) {
            let detail = match schema.as_str() {
                corpus::BASELINE_SCHEMA => {
                    let b = corpus::baseline_from_str(&text)?;
                    format!("{} documents, {} tokens", b.doc_count, b.token_count)
                }
                REPORT_SCHEMA => {
                    let r = input::report_from_str(&text)?;
                    format!("model `{}`, {} defined ratios", r.model, r.defined_count)
                }
                DIVERSITY_SCHEMA => {
                    let r: DiversityReport = serde_json::from_value(v).context("malformed diversity report")?;
                    format!("sample `{}`, {} documents", r.label, r.doc_count)
                }
                COMPARE_SCHEMA | ABLATION_SCHEMA | SIMULATE_SCHEMA | PANEL_SCHEMA => "table artifact".into(),
                other => bail!("unknown schema `{other}`"),
            };
            return Ok((schema, detail));
        }
    }
    let (docs, skipped) = input::read_documents(path, format)?;
    let tokens: usize = docs.iter().map(|d| stylodiv::textmodel::token_count(&d.text)).sum();
    Ok(("samples".into(), format!("{} documents, {} tokens, {} skipped", docs.len(), tokens, skipped)))
}

fn validate(ctx: &Ctx, files: &[PathBuf], args: &InputArgs) -> Result<()> {
    let format = input_format(args);
    let mut out = String::new();
    let mut bad = 0;
    for f in files {
        match check_file(f, &format) {
            Ok((kind, detail)) => out.push_str(&format!("ok\t{}\t{kind}\t{detail}\n", f.display())),
            Err(e) => {
                bad += 1;
                out.push_str(&format!("invalid\t{}\t{e:#}\n", f.display()));
            }
        }
    }
    ctx.emit(&out)?;
    if bad > 0 {
        bail!("{bad} of {} files failed validation", files.len());
    }
    Ok(())
}

fn retest(ctx: &Ctx, first: &Path, second: &Path) -> Result<()> {
    let a = corpus::load_baseline(first)?;
    let b = corpus::load_baseline(second)?;
    let v: ValidationReport = corpus::validate_baseline(&a, &b)?;
    eprintln!("test-retest r = {} ({:?})", render::num(v.pearson_r), v.verdict);
    ctx.emit_either(
        Format::Json,
        || to_json(&v),
        || {
            let mut t = Table::new(&["pearson_r", "verdict", "threshold", "cv_over_half_first", "cv_over_half_second"]);
            let verdict = serde_json::to_value(v.verdict)
                .ok()
                .and_then(|x| x.as_str().map(String::from))
                .unwrap_or_default();
            t.push(vec![
                render::num(v.pearson_r),
                verdict,
                render::num(Some(v.threshold)),
                v.cv_over_half_a.to_string(),
                v.cv_over_half_b.to_string(),
            ]);
            t
        },
    )
}
