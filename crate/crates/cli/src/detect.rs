use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use catnet::ensemble::{build_ensemble, EnsembleModel, EnsembleReport, StreamSummary};
use catnet::kdd::{AttackCategory, FeatureSchema};
use catnet::selection::Assignment;
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::util;
use crate::Context;

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Assignment written by `select`.
    #[arg(long)]
    assignment: Option<PathBuf>,

    /// Training set used to fit the members.
    #[arg(long)]
    train: Option<PathBuf>,

    /// Load a previously saved ensemble instead of training one.
    #[arg(long, conflicts_with_all = ["assignment", "train"])]
    ensemble: Option<PathBuf>,

    /// Save the trained ensemble to this file.
    #[arg(long)]
    save_ensemble: Option<PathBuf>,

    /// Connections to classify, one KDD99 line each; `-` reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Process one record at a time instead of in parallel batches.
    #[arg(long)]
    stream: bool,

    /// Conflict resolution order, highest first [default: U2R,R2L,Probe,DoS].
    #[arg(long, value_delimiter = ',')]
    priority: Option<Vec<AttackCategory>>,

    /// Output directory for detections.txt and summary.json; without it
    /// detections go to stdout and the summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Zero the wall-clock fields of the summary.
    #[arg(long)]
    redact_timings: bool,

    /// Treat the input as labeled and also report flag-based TP/FP.
    #[arg(long)]
    evaluate: bool,
}

#[derive(Serialize)]
struct Summary {
    mode: &'static str,
    seed: u64,
    members: BTreeMap<AttackCategory, String>,
    distinct_models: usize,
    priority: Vec<AttackCategory>,
    table_fingerprint: String,
    inputs: BTreeMap<String, String>,
    stream: StreamSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<EnsembleReport>,
}

fn note_file(inputs: &mut BTreeMap<String, String>, key: &str, path: &Path) -> CliResult<()> {
    inputs.insert(key.to_string(), util::file_name(path));
    inputs.insert(format!("{key}_sha256"), util::sha256_file(path)?);
    Ok(())
}

pub fn run(ctx: &Context, args: DetectArgs) -> CliResult<()> {
    let cfg = &ctx.config.detect;
    let mut inputs = BTreeMap::new();

    let mut ensemble = match &args.ensemble {
        Some(path) => {
            note_file(&mut inputs, "ensemble", path)?;
            EnsembleModel::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        }
        None => {
            let a_path = util::required(args.assignment.clone().or_else(|| cfg.assignment.clone()), "assignment")?;
            let t_path = util::required(args.train.clone().or_else(|| cfg.train.clone()), "train")?;
            let assignment = Assignment::from_json(&util::read_text(&a_path)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", a_path.display())))?;
            note_file(&mut inputs, "assignment", &a_path)?;
            note_file(&mut inputs, "train", &t_path)?;
            let train = util::load_dataset(&t_path)?;
            build_ensemble(&assignment, &train)?
        }
    };
    let priority = match args.priority {
        Some(p) => Some(p),
        None => cfg
            .priority
            .as_ref()
            .map(|v| v.iter().map(|s| s.parse()).collect::<Result<Vec<AttackCategory>, _>>())
            .transpose()
            .map_err(|e| CliError::Usage(format!("detect.priority: {e}")))?,
    };
    if let Some(p) = priority {
        ensemble = ensemble.with_priority(&p)?;
    }
    if let Some(path) = &args.save_ensemble {
        ensemble.save(path)?;
    }

    let input = util::required(args.input.or_else(|| cfg.input.clone()), "input")?;
    let stream = args.stream || cfg.stream.unwrap_or(false);
    let redact = args.redact_timings || cfg.redact_timings.unwrap_or(false);
    let from_stdin = input.as_os_str() == "-";
    if args.evaluate && from_stdin {
        return Err(CliError::Usage("--evaluate needs a file for --input".into()));
    }
    if !from_stdin {
        note_file(&mut inputs, "input", &input)?;
    }
    let source: Box<dyn BufRead> = if from_stdin {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        let f = File::open(&input).map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
        Box::new(BufReader::new(f))
    };

    let out_dir = args.out.or_else(|| cfg.out.clone());
    let sink: Box<dyn Write> = match &out_dir {
        Some(dir) => {
            let dir = util::out_dir(Some(dir.clone()), "")?;
            Box::new(BufWriter::new(File::create(dir.join("detections.txt"))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let schema = FeatureSchema::kdd99();
    let mut summary = if stream {
        ensemble.stream_detect(&schema, source, sink, true)?
    } else {
        ensemble.batch_detect(&schema, source, sink)?
    };
    if redact {
        summary.redact_timings();
    }

    let evaluation = if args.evaluate {
        Some(ensemble.evaluate(&util::load_dataset(&input)?)?)
    } else {
        None
    };
    let report = Summary {
        mode: if stream { "stream" } else { "batch" },
        seed: ctx.seed,
        members: AttackCategory::ATTACKS.iter().map(|&c| (c, ensemble.member_id(c).to_string())).collect(),
        distinct_models: ensemble.distinct_models(),
        priority: ensemble.priority().to_vec(),
        table_fingerprint: ensemble.assignment().table_fingerprint.clone(),
        inputs,
        stream: summary,
        evaluation,
    };
    let json = util::to_json(&report);
    match &out_dir {
        Some(dir) => {
            util::write(&dir.join("summary.json"), &json)?;
            if let Some(ev) = &report.evaluation {
                util::write(&dir.join("evaluation.txt"), ev.render())?;
            }
            eprintln!(
                "{} records, {} malformed -> {}",
                report.stream.records,
                report.stream.malformed,
                dir.display()
            );
        }
        None => eprint!("{json}"),
    }
    Ok(())
}
