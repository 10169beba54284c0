use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uncq::bernoulli::{construct_matched_degenerates, reference_table, BernoulliReport};
use uncq::estimator::{clamp, score_batch, EnsembleBatch};
use uncq::eval::{run_detection, run_misclassification, run_selective, SplitSpec};
use uncq::io::{
    generate_synthetic, read_batch, read_truth, write_batch, write_detection_report,
    write_lab_table, write_measure_table, OutputFormat, SyntheticConfig, Unit, ViewSelection,
};
use uncq::{Error, ErrorKind};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

/// Uncertainty decompositions for posterior ensembles.
#[derive(Parser)]
#[command(name = "uncq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Unit for entropies and divergences.
    #[arg(long, default_value = "nats")]
    unit: Unit,
}

#[derive(Args)]
struct Randomness {
    /// Seed for every random draw.
    #[arg(long, env = "UNCQ_SEED")]
    seed: u64,
}

#[derive(Args)]
struct Scoring {
    /// Probability floor applied before scoring (0 disables it).
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Args)]
struct Splitting {
    /// Number of evaluation splits.
    #[arg(long, default_value_t = SplitSpec::DEFAULT_COUNT)]
    splits: usize,
    /// Inputs per split; an equal share of all inputs by default.
    #[arg(long)]
    per_split: Option<usize>,
    /// Label stored in the report.
    #[arg(long, default_value = "ensemble")]
    method: String,
}

#[derive(Subcommand)]
enum Command {
    /// Score every input of a UEP or CSV batch.
    Measures {
        input: PathBuf,
        /// all, mi, epkl or rmi.
        #[arg(long, default_value = "all")]
        view: ViewSelection,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form Bernoulli posteriors.
    Bernoulli {
        #[command(subcommand)]
        command: BernoulliCommand,
    },
    /// AUROC for separating anomalous from in-distribution inputs.
    Detect {
        #[arg(long = "in")]
        in_dist: PathBuf,
        #[arg(long)]
        anom: PathBuf,
        #[command(flatten)]
        seed: Randomness,
        #[command(flatten)]
        splits: Splitting,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        output: Output,
    },
    /// AUROC for flagging misclassified inputs.
    Misclass {
        #[command(flatten)]
        labelled: Labelled,
    },
    /// Accuracy-coverage AUC.
    Selective {
        #[command(flatten)]
        labelled: Labelled,
    },
    /// Synthetic ensemble predictions with ground truth.
    Gen {
        #[command(flatten)]
        seed: Randomness,
        /// Seed for the ensemble members, shared across batches by default.
        #[arg(long, default_value_t = 0)]
        model_seed: u64,
        #[arg(long, short = 'n', default_value_t = 1000)]
        inputs: usize,
        #[arg(long, short = 's', default_value_t = 16)]
        members: usize,
        #[arg(long, short = 'k', default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 0.5)]
        disagreement: f64,
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        #[arg(long, default_value = "")]
        id_prefix: String,
        /// Batch file; `.csv` writes CSV, anything else UEP.
        #[arg(long)]
        out: PathBuf,
        /// Optional `id,label` file.
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Labelled {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[command(flatten)]
    seed: Randomness,
    #[command(flatten)]
    splits: Splitting,
    #[command(flatten)]
    scoring: Scoring,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum BernoulliCommand {
    /// Measures for the six reference posteriors.
    Fig2 {
        #[command(flatten)]
        output: Output,
    },
    /// Uniform, beta and two-point posteriors sharing one aleatoric value.
    Degenerate {
        /// Target aleatoric uncertainty in nats.
        #[arg(long)]
        au: f64,
        #[command(flatten)]
        output: Output,
    },
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            uncq::io::IoError::File {
                path: p.clone(),
                source: e,
            }
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn load(path: &Path, scoring: &Scoring) -> Result<EnsembleBatch, Error> {
    Ok(clamp(&read_batch(path)?, scoring.epsilon)?)
}

fn split_spec(s: &Splitting, seed: u64) -> SplitSpec {
    SplitSpec {
        count: s.splits,
        per_split: s.per_split,
        seed,
    }
}

fn lab_reports(reports: &[BernoulliReport], output: &Output) -> Result<(), Error> {
    let mut out = open_output(&output.out)?;
    write_lab_table(reports, output.format, output.unit, &mut out)?;
    out.flush().map_err(uncq::io::IoError::from)?;
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Measures {
            input,
            view,
            scoring,
            output,
        } => {
            let table = score_batch(&load(&input, &scoring)?);
            for row in &table.rows {
                if let Some(r) = row.identity_residual() {
                    if r.is_nan() || r > 1e-9 {
                        return Err(Error::Audit(format!(
                            "input {:?}: EPKL differs from MI + RMI by {r:e}",
                            row.id
                        )));
                    }
                }
            }
            let mut out = open_output(&output.out)?;
            write_measure_table(&table, view, output.format, output.unit, &mut out)?;
            out.flush().map_err(uncq::io::IoError::from)?;
        }
        Command::Bernoulli { command } => match command {
            BernoulliCommand::Fig2 { output } => lab_reports(&reference_table()?, &output)?,
            BernoulliCommand::Degenerate { au, output } => {
                let m = construct_matched_degenerates(au)?;
                let reports = m
                    .posteriors()
                    .iter()
                    .map(|p| BernoulliReport::compute(p))
                    .collect::<Result<Vec<_>, _>>()?;
                lab_reports(&reports, &output)?;
            }
        },
        Command::Detect {
            in_dist,
            anom,
            seed,
            splits,
            scoring,
            output,
        } => {
            let a = load(&in_dist, &scoring)?;
            let b = load(&anom, &scoring)?;
            let report = run_detection(&a, &b, &split_spec(&splits, seed.seed), &splits.method)?;
            let mut out = open_output(&output.out)?;
            write_detection_report(&report, output.format, &mut out)?;
            out.flush().map_err(uncq::io::IoError::from)?;
        }
        Command::Misclass { labelled } => labelled_task(labelled, false)?,
        Command::Selective { labelled } => labelled_task(labelled, true)?,
        Command::Gen {
            seed,
            model_seed,
            inputs,
            members,
            classes,
            disagreement,
            shift,
            id_prefix,
            out,
            truth_out,
        } => {
            let cfg = SyntheticConfig {
                seed: seed.seed,
                model_seed,
                inputs,
                members,
                classes,
                disagreement,
                shift,
                id_prefix,
            };
            let (batch, labels) = generate_synthetic(&cfg).map_err(|e| match e {
                uncq::estimator::EstimatorError::Shape(m) => Error::Usage(m),
                e => e.into(),
            })?;
            write_batch(&batch, &out)?;
            if let Some(path) = truth_out {
                let mut w = open_output(&Some(path))?;
                let mut text = String::from("id,label\n");
                for (id, l) in batch.ids().iter().zip(labels) {
                    text.push_str(&format!("{id},{l}\n"));
                }
                w.write_all(text.as_bytes())
                    .and_then(|_| w.flush())
                    .map_err(uncq::io::IoError::from)?;
            }
        }
    }
    Ok(())
}

fn labelled_task(l: Labelled, selective: bool) -> Result<(), Error> {
    let batch = load(&l.pred, &l.scoring)?;
    let truth = read_truth(&l.truth)?;
    let table = score_batch(&batch);
    let spec = split_spec(&l.splits, l.seed.seed);
    let report = if selective {
        run_selective(&table, &truth, batch.classes(), &spec, &l.splits.method)?
    } else {
        run_misclassification(&table, &truth, batch.classes(), &spec, &l.splits.method)?
    };
    let mut out = open_output(&l.output.out)?;
    write_detection_report(&report, l.output.format, &mut out)?;
    out.flush().map_err(uncq::io::IoError::from)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed stdout (e.g. piping into `head`) is not a failure.
        Err(Error::Io(uncq::io::IoError::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}
