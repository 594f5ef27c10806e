use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use molsynth_align::{
    build_vocabularies, checkpoint::save_checkpoint, load_checkpoint, synthesize_triplets, train, AdamWConfig, AlignModel,
    CaptionSource, ModelConfig, TrainConfig,
};
use molsynth_core::eval::{
    caption_metrics, eval_multiconstraint, molgen_metrics, proppred_metrics, read_constraints, read_truth, render_report,
    reports_from_csv, ReportFormat,
};
use molsynth_core::instruct::{load_triplets, save_triplets, split_dataset, synthesize_dataset, write_jsonl, SynthConfig, Task};
use molsynth_core::{descriptor_vector, parse_smiles, write_smiles, DescriptorId, Registry};
use rayon::prelude::*;

use crate::{Cli, Command, EvalArgs, GenArgs, ParseArgs, PropsArgs, ReportArgs, SplitArgs, SynthArgs, TrainArgs};

/// Runs one subcommand and returns its primary output path, if it wrote
/// one.
pub fn run(cli: &Cli, command: &Command) -> Result<Option<PathBuf>> {
    match command {
        Command::Parse(a) => parse(a),
        Command::Props(a) => props(a),
        Command::TrainAlign(a) => train_align(cli, a),
        Command::GenTriplets(a) => gen_triplets(a),
        Command::Synth(a) => synth(cli, a),
        Command::Split(a) => split(cli, a),
        Command::Eval(a) => eval(a),
        Command::Report(a) => report(a),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// First whitespace-separated field of each non-blank line, with its
/// 1-based line number. Anything after the SMILES (a name, an id) is
/// ignored.
fn read_smiles(path: &Path) -> Result<Vec<(usize, String)>> {
    Ok(read_lines(path)?
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.split_whitespace().next().map(|s| (i + 1, s.to_string())))
        .collect())
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn registry(manifest: Option<&PathBuf>) -> Result<Registry> {
    match manifest {
        Some(p) => Registry::load(p).with_context(|| format!("loading manifest {}", p.display())),
        None => Ok(Registry::default()),
    }
}

fn parse(a: &ParseArgs) -> Result<Option<PathBuf>> {
    let input = read_smiles(&a.input)?;
    let results: Vec<_> = input.par_iter().map(|(line, s)| (line, s, parse_smiles(s).map(|m| write_smiles(&m)))).collect();
    let mut w = output(a.out.as_ref())?;
    let mut bad = 0;
    for (line, s, r) in results {
        match r {
            Ok(canon) => writeln!(w, "{canon}")?,
            Err(e) if a.strict => bail!("{} line {line}: '{s}': {e}", a.input.display()),
            Err(e) => {
                warn!("line {line}: skipping '{s}': {e}");
                bad += 1;
            }
        }
    }
    w.flush()?;
    info!("{} molecules canonicalized, {bad} invalid lines skipped", input.len() - bad);
    Ok(a.out.clone())
}

fn props(a: &PropsArgs) -> Result<Option<PathBuf>> {
    let reg = registry(a.manifest.as_ref())?;
    let input = read_smiles(&a.input)?;
    let rows: Vec<_> = input
        .par_iter()
        .map(|(line, s)| {
            let r = parse_smiles(s).map_err(|e| e.to_string()).and_then(|m| descriptor_vector(&m, &reg).map_err(|e| e.to_string()));
            (line, s, r)
        })
        .collect();
    let mut w = csv::Writer::from_writer(output(a.out.as_ref())?);
    let mut header = vec!["smiles"];
    header.extend(reg.names());
    w.write_record(&header)?;
    let mut bad = 0;
    for (line, s, r) in rows {
        match r {
            Ok(v) => {
                let mut rec = vec![s.clone()];
                rec.extend(v.values.iter().map(|x| format!("{x:.4}")));
                w.write_record(&rec)?;
            }
            Err(e) => {
                warn!("line {line}: skipping '{s}': {e}");
                bad += 1;
            }
        }
    }
    w.flush()?;
    info!("{} rows written, {bad} invalid lines skipped", input.len() - bad);
    Ok(a.out.clone())
}

fn train_align(cli: &Cli, a: &TrainArgs) -> Result<Option<PathBuf>> {
    if a.alpha < 0.0 || a.beta < 0.0 {
        bail!("config error: alpha and beta must be non-negative (alpha {}, beta {})", a.alpha, a.beta);
    }
    if !(a.tau > 0.0) {
        bail!("config error: tau must be positive, got {}", a.tau);
    }
    if a.heads == 0 || a.dim % a.heads != 0 {
        bail!("config error: dim {} must be a positive multiple of heads {}", a.dim, a.heads);
    }
    let expected = a.manifest.as_ref().map(|p| registry(Some(p))).transpose()?;
    let loaded = load_triplets(&a.triplets, expected.as_ref()).with_context(|| format!("loading {}", a.triplets.display()))?;
    let corpus = loaded.triplets;
    info!("{} triplets loaded ({} invalid lines skipped)", corpus.len(), loaded.invalid_lines.len());
    let vocabs = build_vocabularies(&corpus, a.text_vocab, a.bins)?;
    let config = ModelConfig { dim: a.dim, layers: a.layers, heads: a.heads, ff: a.ff, joint: a.joint, max_len: a.max_len, tau: a.tau };
    let mut model = AlignModel::new(config, vocabs, cli.seed);
    info!("model has {} parameters", model.params.count());
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        optimizer: AdamWConfig { lr: a.lr, weight_decay: a.weight_decay, ..Default::default() },
        seed: cli.seed,
        alpha: a.alpha,
        beta: a.beta,
        clip: (a.clip > 0.0).then_some(a.clip),
        ema: a.ema,
    };
    let out = train(&mut model, &corpus, &cfg)?;
    save_checkpoint(&model, &a.out)?;
    if let Some(ema) = out.ema {
        let p = a.out.with_extension("ema.json");
        save_checkpoint(&AlignModel { params: ema, ..model.clone() }, &p)?;
        info!("EMA weights written to {}", p.display());
    }
    if let Some(h) = &a.history {
        let mut w = csv::Writer::from_path(h).with_context(|| format!("creating {}", h.display()))?;
        w.write_record(["epoch", "match_st", "match_sp", "contrastive_st", "contrastive_sp", "clm_st", "clm_sp", "total"])?;
        for (i, b) in out.history.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(b.components().iter().chain([&b.total]).map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(Some(a.out.clone()))
}

fn gen_triplets(a: &GenArgs) -> Result<Option<PathBuf>> {
    let reg = registry(a.manifest.as_ref())?;
    let smiles: Vec<String> = read_lines(&a.smiles)?.into_iter().map(|l| l.trim().to_string()).collect();
    let model;
    let source = match (&a.captions, &a.checkpoint) {
        (Some(c), _) => CaptionSource::File(c),
        (None, Some(ck)) => {
            model = load_checkpoint(ck).with_context(|| format!("loading {}", ck.display()))?;
            CaptionSource::Model { model: &model, max_len: a.max_len }
        }
        (None, None) => bail!("config error: gen-triplets needs --captions or --checkpoint"),
    };
    let out = synthesize_triplets(&smiles, source, &reg)?;
    save_triplets(&a.out, &out.triplets)?;
    info!("{} triplets written, {} invalid SMILES skipped", out.triplets.len(), out.skipped.len());
    Ok(Some(a.out.clone()))
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<Option<PathBuf>> {
    let tasks = a.tasks.split(',').map(|t| t.trim().parse::<Task>()).collect::<Result<Vec<_>, _>>()?;
    let mpp = a
        .mpp_props
        .split(',')
        .map(|t| t.trim().parse::<DescriptorId>())
        .collect::<Result<Vec<_>, _>>()
        .context("config error: mpp-props")?;
    let loaded = load_triplets(&a.triplets, None).with_context(|| format!("loading {}", a.triplets.display()))?;
    let cfg = SynthConfig { tasks, per_task: a.count, seed: cli.seed, mpp_properties: mpp, allow_replacement: a.allow_replacement };
    let records = synthesize_dataset(&loaded.triplets, &cfg)?;
    let mut w = output(a.out.as_ref())?;
    write_jsonl(&mut w, &records)?;
    w.flush()?;
    info!("{} records from {} triplets", records.len(), loaded.triplets.len());
    Ok(a.out.clone())
}

fn split(cli: &Cli, a: &SplitArgs) -> Result<Option<PathBuf>> {
    let lines: Vec<String> = read_lines(&a.input)?.into_iter().filter(|l| !l.trim().is_empty()).collect();
    let s = split_dataset(&lines, cli.seed)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("txt");
    for (name, part) in [("train", &s.train), ("validation", &s.validation), ("test", &s.test)] {
        let p = a.out_dir.join(format!("{name}.{ext}"));
        let mut w = output(Some(&p))?;
        for l in part.iter() {
            writeln!(w, "{l}")?;
        }
        w.flush()?;
    }
    info!("split {} lines into {}/{}/{}", lines.len(), s.train.len(), s.validation.len(), s.test.len());
    Ok(Some(a.out_dir.join("split")))
}

fn eval(a: &EvalArgs) -> Result<Option<PathBuf>> {
    let format: ReportFormat = a.report.parse().map_err(|e: String| anyhow::anyhow!("config error: report: {e}"))?;
    let pred = read_lines(&a.pred)?;
    let need_ref = || a.reference.as_ref().with_context(|| format!("config error: --ref is required for task {}", a.task));
    let mut report = match a.task.as_str() {
        "caption" => caption_metrics(&pred, &read_lines(need_ref()?)?)?,
        "molgen" => molgen_metrics(&pred, &read_lines(need_ref()?)?)?,
        "proppred" => {
            let p = need_ref()?;
            let truth = read_truth(File::open(p).with_context(|| format!("reading {}", p.display()))?)?;
            let values: Vec<f64> = truth.iter().map(|t| t.1).collect();
            proppred_metrics(&pred, &values)?
        }
        "multiconstraint" => {
            let p = a.constraints.as_ref().context("config error: --constraints is required for task multiconstraint")?;
            let c = read_constraints(File::open(p).with_context(|| format!("reading {}", p.display()))?)?;
            eval_multiconstraint(&c, &pred)?
        }
        other => bail!("config error: unknown task '{other}' (caption, molgen, proppred, multiconstraint)"),
    };
    report.label = a.label.clone();
    let mut w = output(a.out.as_ref())?;
    w.write_all(render_report(&[report], format).as_bytes())?;
    w.flush()?;
    Ok(a.out.clone())
}

fn report(a: &ReportArgs) -> Result<Option<PathBuf>> {
    let format: ReportFormat = a.format.parse().map_err(|e: String| anyhow::anyhow!("config error: format: {e}"))?;
    let mut all = Vec::new();
    for p in &a.inputs {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        all.extend(reports_from_csv(&text).with_context(|| format!("parsing {}", p.display()))?);
    }
    let mut w = output(a.out.as_ref())?;
    w.write_all(render_report(&all, format).as_bytes())?;
    w.flush()?;
    Ok(a.out.clone())
}
