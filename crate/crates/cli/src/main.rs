use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phdscore::clinical::{compare_sources, curve_csv, curve_svg, pr_curve};
use phdscore::manifest_io::{
    load_clinical_report, load_ensembles, load_manifest, load_score_table, load_weight_manifest,
    write_atomic, write_ensembles, write_epoch_plan, write_manifest, write_score_table,
    write_weight_manifest, AdaptationState, EnsembleRecord,
};
use phdscore::metrics::{
    delta_report, evaluate, load_rates, load_transcripts, write_delta_report, write_rates,
    write_source_table, SourceRow,
};
use phdscore::phdscore::{PhDScoreTable, ScoreWeights};
use phdscore::pipeline::{score_corpus, weigh_utterances};
use phdscore::rechain::{concat_audio, load_templates, plan_sentences, DEFAULT_GAP_MS};
use phdscore::sampler::{expand_deterministic, sample_epoch};
use phdscore::simspeaker::{load_profile, simulate_corpus};
use phdscore::{Error, Inventory, NeighborMap, Phoneme, Result};

#[derive(Parser, Debug)]
#[command(name = "phdscore", version, about = "Phoneme difficulty scoring and uncertainty-guided oversampling")]
struct Cli {
    /// Worker threads for utterance-level stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Print progress details to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate MCD-style ensembles from a synthetic speaker profile.
    Simulate(SimulateArgs),
    /// Score phoneme difficulty from ensemble files.
    Score(ScoreArgs),
    /// Map a score table onto per-utterance sampling weights.
    Weights(WeightsArgs),
    /// Draw an epoch plan from a weight manifest.
    Sample(SampleArgs),
    /// Compare scores against clinical difficulty labels.
    EvalClinical(EvalClinicalArgs),
    /// Compute per-split CER and WER for a hypothesis file.
    Metrics(MetricsArgs),
    /// Concatenate word recordings into sentence-level audio.
    Rechain(RechainArgs),
    /// Assemble delta or per-source summary tables from rate files.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Utterance manifest (JSONL); train-split utterances are simulated.
    #[arg(long)]
    manifest: PathBuf,
    /// Speaker profile (key=value lines).
    #[arg(long)]
    profile: PathBuf,
    /// Substitution neighbours, `symbol<TAB>neighbour` per line.
    #[arg(long)]
    neighbors: Option<PathBuf>,
    /// Stochastic passes per utterance.
    #[arg(long, default_value_t = 20)]
    passes: usize,
    /// Overrides the profile's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Scale all error masses by this factor, overriding the profile.
    #[arg(long)]
    residual: Option<f64>,
    /// Output ensemble file (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Utterance manifest (JSONL).
    #[arg(long)]
    manifest: PathBuf,
    /// One or more ensemble files from the same backend.
    #[arg(long, num_args = 1.., required = true)]
    ensembles: Vec<PathBuf>,
    /// Component weights w_e,w_h,w_a; must sum to 1.
    #[arg(long, default_value = "0.4,0.2,0.4")]
    weights: ScoreWeights,
    /// Output score table (TSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendState {
    Pretrained,
    Finetuned,
    Simulated,
}

impl BackendState {
    fn state(self) -> AdaptationState {
        match self {
            BackendState::Pretrained => AdaptationState::Pretrained,
            BackendState::Finetuned => AdaptationState::Finetuned,
            BackendState::Simulated => AdaptationState::Simulated,
        }
    }
}

#[derive(Args, Debug)]
struct WeightsArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Utterance manifest (JSONL).
    #[arg(long)]
    manifest: PathBuf,
    /// Score table produced by `score`.
    #[arg(long)]
    table: PathBuf,
    /// Expected adaptation state of the scoring backend; a mismatch, or a
    /// fine-tuned backend, produces a warning.
    #[arg(long, value_enum)]
    backend_state: Option<BackendState>,
    /// Output weight manifest (TSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Replacement,
    Expansion,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Weight manifest produced by `weights`.
    #[arg(long)]
    input: PathBuf,
    /// Weighted draws with replacement, or deterministic copies per weight.
    #[arg(long, value_enum, default_value = "replacement")]
    mode: Mode,
    /// Draws per epoch (replacement mode).
    #[arg(long, required_if_eq("mode", "replacement"))]
    epoch_size: Option<usize>,
    /// Copies per unit weight (expansion mode).
    #[arg(long, required_if_eq("mode", "expansion"))]
    factor: Option<f64>,
    /// Random seed (replacement mode).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output epoch plan.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalClinicalArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Score table from the pre-trained backend.
    #[arg(long)]
    table: PathBuf,
    /// Score table from the fine-tuned backend, for a paired comparison.
    #[arg(long)]
    finetuned_table: Option<PathBuf>,
    /// Clinical report.
    #[arg(long)]
    report: PathBuf,
    /// Severity at or above which a phoneme counts as difficult.
    #[arg(long, default_value_t = 1)]
    severity_threshold: u8,
    /// Also render the curves as SVG.
    #[arg(long)]
    svg: bool,
    /// Output directory for curve files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Manifest holding reference texts and splits.
    #[arg(long)]
    manifest: PathBuf,
    /// Hypotheses, `id<TAB>text` per line.
    #[arg(long)]
    hyp: PathBuf,
    /// Output rates (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RechainArgs {
    /// Phoneme inventory, one symbol per line.
    #[arg(long)]
    inventory: PathBuf,
    /// Manifest of word-level recordings.
    #[arg(long)]
    manifest: PathBuf,
    /// Sentence templates, one per line.
    #[arg(long)]
    templates: PathBuf,
    /// Silence between words, in milliseconds.
    #[arg(long, default_value_t = DEFAULT_GAP_MS)]
    gap_ms: u32,
    /// Base directory for relative audio paths (default: the manifest's directory).
    #[arg(long)]
    audio_root: Option<PathBuf>,
    /// Output directory for WAVs and `rechained.jsonl`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Rates before personalization.
    #[arg(long, requires = "treated")]
    baseline: Option<PathBuf>,
    /// Rates after personalization.
    #[arg(long, requires = "baseline")]
    treated: Option<PathBuf>,
    /// Per-source row `DATASET:SOURCE:rates.csv`; repeatable.
    #[arg(long = "row", value_name = "DATASET:SOURCE:PATH", conflicts_with_all = ["baseline", "treated"])]
    rows: Vec<String>,
    /// Split whose rates fill the per-source rows.
    #[arg(long, default_value = "test_nonnormative")]
    split: phdscore::manifest_io::Split,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command, cli.verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command, verbose: bool) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, verbose),
        Command::Score(a) => score(a, verbose),
        Command::Weights(a) => weights(a, verbose),
        Command::Sample(a) => sample(a, verbose),
        Command::EvalClinical(a) => eval_clinical(a),
        Command::Metrics(a) => metrics(a),
        Command::Rechain(a) => rechain(a, verbose),
        Command::Report(a) => report(a),
    }
}

fn simulate(a: SimulateArgs, verbose: bool) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let manifest = load_manifest(&a.manifest, &inventory)?;
    let neighbors = match &a.neighbors {
        Some(p) => NeighborMap::load(p, &inventory)?,
        None => NeighborMap::default(),
    };
    let mut spec = load_profile(&a.profile)?;
    if a.residual.is_some() {
        spec.residual = a.residual;
    }
    let model = spec.build(&inventory, &neighbors)?;
    let seed = a.seed.unwrap_or(spec.seed);
    let mut records = simulate_corpus(&manifest, &model, a.passes, seed)?;
    records.sort_by(|x, y| x.utterance_id.cmp(&y.utterance_id));
    write_atomic(&a.out, write_ensembles(&records).as_bytes())?;
    if verbose {
        eprintln!("simulated {} utterances x {} passes (seed {seed})", records.len(), a.passes);
    }
    Ok(())
}

fn score(a: ScoreArgs, verbose: bool) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let manifest = load_manifest(&a.manifest, &inventory)?;
    let mut ensembles: Vec<EnsembleRecord> = Vec::new();
    for path in &a.ensembles {
        ensembles.extend(load_ensembles(path, &inventory, &manifest)?);
    }
    ensembles.sort_by(|x, y| x.utterance_id.cmp(&y.utterance_id));
    if let Some(w) = ensembles.windows(2).find(|w| w[0].utterance_id == w[1].utterance_id) {
        return Err(Error::DuplicateId(w[0].utterance_id.clone()));
    }
    let outcome = score_corpus(&manifest, &ensembles, a.weights)?;
    write_atomic(&a.out, write_score_table(&outcome.table).as_bytes())?;
    if verbose {
        eprintln!(
            "scored {} phonemes from {} instances in {} utterances ({} insertions ignored)",
            outcome.table.rows().len(),
            outcome.instances,
            outcome.utterances,
            outcome.insertions
        );
    }
    Ok(())
}

fn weights(a: WeightsArgs, verbose: bool) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let manifest = load_manifest(&a.manifest, &inventory)?;
    let table = load_score_table(&a.table)?;
    check_backend_state(&table, a.backend_state);
    let outcome = weigh_utterances(&manifest, &table)?;
    for id in &outcome.empty_references {
        eprintln!("warning: {id} has an empty reference; scored as 0");
    }
    write_atomic(&a.out, write_weight_manifest(&outcome.weights).as_bytes())?;
    if verbose {
        eprintln!("weighted {} training utterances", outcome.weights.len());
    }
    Ok(())
}

fn check_backend_state(table: &PhDScoreTable, expected: Option<BackendState>) {
    let actual = table.backend.as_ref().map(|b| b.adaptation_state);
    if actual == Some(AdaptationState::Finetuned) {
        eprintln!("warning: scores come from a fine-tuned backend; its uncertainty no longer tracks speaker difficulty");
    }
    if let Some(expected) = expected {
        match actual {
            None => eprintln!("warning: score table records no backend state; expected {}", expected.state().as_str()),
            Some(s) if s != expected.state() => {
                eprintln!("warning: score table backend is {}, expected {}", s.as_str(), expected.state().as_str())
            }
            Some(_) => {}
        }
    }
}

fn sample(a: SampleArgs, verbose: bool) -> Result<()> {
    // clap does not apply required_if_eq to the default mode
    let missing = |flag: &str| Error::InvalidArgument(format!("{flag} is required in this mode"));
    let size = match a.mode {
        Mode::Replacement => a.epoch_size.ok_or_else(|| missing("--epoch-size"))?,
        Mode::Expansion => 0,
    };
    let factor = match a.mode {
        Mode::Expansion => a.factor.ok_or_else(|| missing("--factor"))?,
        Mode::Replacement => 0.0,
    };
    let weights = load_weight_manifest(&a.input)?;
    let plan = match a.mode {
        Mode::Replacement => sample_epoch(&weights, size, a.seed)?,
        Mode::Expansion => expand_deterministic(&weights, factor)?,
    };
    write_atomic(&a.out, write_epoch_plan(&plan).as_bytes())?;
    if verbose {
        eprintln!("planned {} draws over {} utterances", plan.draws.len(), weights.len());
    }
    Ok(())
}

fn eval_clinical(a: EvalClinicalArgs) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let report = load_clinical_report(&a.report, &inventory, a.severity_threshold)?;
    let pretrained = score_map(&load_score_table(&a.table)?);
    create_dir(&a.out)?;
    match &a.finetuned_table {
        None => {
            let eval = pr_curve(&pretrained, &report)?;
            warn_skipped(eval.skipped);
            write_atomic(&a.out.join("pr_curve.csv"), curve_csv(&eval.curve).as_bytes())?;
            if a.svg {
                write_atomic(&a.out.join("pr_curve.svg"), curve_svg(&[("scores", &eval.curve)]).as_bytes())?;
            }
            println!(
                "AP={:.4} positives={} negatives={} skipped={}",
                eval.curve.average_precision, eval.positives, eval.negatives, eval.skipped
            );
        }
        Some(path) => {
            let finetuned = score_map(&load_score_table(path)?);
            let cmp = compare_sources(&pretrained, &finetuned, &report)?;
            warn_skipped(cmp.pretrained.skipped.max(cmp.finetuned.skipped));
            write_atomic(&a.out.join("pr_curve_pretrained.csv"), curve_csv(&cmp.pretrained.curve).as_bytes())?;
            write_atomic(&a.out.join("pr_curve_finetuned.csv"), curve_csv(&cmp.finetuned.curve).as_bytes())?;
            if a.svg {
                let svg = curve_svg(&[("pre-trained", &cmp.pretrained.curve), ("fine-tuned", &cmp.finetuned.curve)]);
                write_atomic(&a.out.join("pr_curve.svg"), svg.as_bytes())?;
            }
            println!(
                "AP_pretrained={:.4} AP_finetuned={:.4} AP_difference={:.4}",
                cmp.pretrained.curve.average_precision, cmp.finetuned.curve.average_precision, cmp.ap_difference
            );
        }
    }
    Ok(())
}

fn score_map(table: &PhDScoreTable) -> BTreeMap<Phoneme, f64> {
    table.scores().map(|(p, s)| (p.clone(), s)).collect()
}

fn warn_skipped(skipped: usize) {
    if skipped > 0 {
        eprintln!("warning: {skipped} labelled phonemes have no score and were skipped");
    }
}

fn metrics(a: MetricsArgs) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let manifest = load_manifest(&a.manifest, &inventory)?;
    let hyps = load_transcripts(&a.hyp)?;
    let rates = evaluate(&manifest, &hyps)?;
    write_atomic(&a.out, write_rates(&rates).as_bytes())
}

fn rechain(a: RechainArgs, verbose: bool) -> Result<()> {
    let inventory = Inventory::load(&a.inventory)?;
    let manifest = load_manifest(&a.manifest, &inventory)?;
    let templates = load_templates(&a.templates)?;
    let audio_root = a
        .audio_root
        .clone()
        .unwrap_or_else(|| a.manifest.parent().map(Path::to_path_buf).unwrap_or_default());
    let outcome = plan_sentences(&templates, &manifest, a.gap_ms);
    for skip in &outcome.skipped {
        eprintln!("skipped template line {}: no recording for {}", skip.line, skip.missing.join(", "));
    }
    create_dir(&a.out)?;
    let records = outcome
        .plans
        .iter()
        .map(|plan| concat_audio(plan, &audio_root, &a.out))
        .collect::<Result<Vec<_>>>()?;
    write_atomic(&a.out.join("rechained.jsonl"), write_manifest(&records).as_bytes())?;
    if verbose {
        eprintln!("wrote {} sentences, skipped {}", records.len(), outcome.skipped.len());
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let csv = if let (Some(b), Some(t)) = (&a.baseline, &a.treated) {
        write_delta_report(&delta_report(&load_rates(b)?, &load_rates(t)?)?)
    } else if !a.rows.is_empty() {
        let mut rows = Vec::with_capacity(a.rows.len());
        for spec in &a.rows {
            let mut parts = spec.splitn(3, ':');
            let (Some(dataset), Some(source), Some(path)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::InvalidArgument(format!("row {spec:?} is not DATASET:SOURCE:PATH")));
            };
            let rates = load_rates(path)?;
            let split_rates = rates
                .get(&a.split)
                .ok_or_else(|| Error::InvalidArgument(format!("{path} has no {} rows", a.split)))?;
            rows.push(SourceRow {
                dataset: dataset.to_string(),
                uncertainty_source: source.to_string(),
                rates: *split_rates,
            });
        }
        write_source_table(&rows)
    } else {
        return Err(Error::InvalidArgument("give --baseline and --treated, or at least one --row".into()));
    };
    match &a.out {
        Some(path) => write_atomic(path, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })
}
