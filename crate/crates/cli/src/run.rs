use std::fmt::Write as _;
use std::path::Path;

use seqgan_core::numerics::Rng;
use seqgan_core::oracle_eval::{generate_training_set, make_oracle, welch_t_test, BleuScorer};
use seqgan_core::training::{records_to_csv, Algorithm, Evaluator, RunArtifacts, Runner, Task};

use crate::config::{ExperimentConfig, Mode};
use crate::corpus::ingest_corpus;
use crate::error::{CliError, Result};

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Runs every requested algorithm and writes `config.resolved`,
/// `metrics.csv`, `summary.txt` and `checkpoints/` under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<RunArtifacts>> {
    let mut cfg = cfg.clone().resolve()?;
    let out = cfg.out.clone();
    let out = &out;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("out: cannot create {}: {e}", out.display())))?;

    let algorithms = cfg.algorithm_list()?;
    let training = cfg.training_config()?;
    let mut models = cfg.model_config()?;

    let runs = match cfg.mode {
        Mode::Synthetic => {
            let oracle = make_oracle(cfg.oracle_seed(), models.gen_dims())?;
            let mut rng = Rng::new(cfg.oracle_seed()).child("training-data");
            let data = generate_training_set(&oracle, cfg.synthetic.train_size, &mut rng);
            let task = Task {
                train: &data,
                evaluator: Evaluator::Oracle(&oracle),
            };
            write(&out.join("config.resolved"), &cfg.to_toml())?;
            execute(training, models, task, out, &algorithms)?
        }
        Mode::Corpus => {
            let (train_path, test_path, vocab_path) = match (&cfg.corpus.train, &cfg.corpus.test, &cfg.corpus.vocab) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => unreachable!("validated by resolve"),
            };
            let (vocab, train, test) = ingest_corpus(train_path, test_path, models.horizon, cfg.corpus.drop_long)?;
            log::info!("training split: {}", train.report);
            log::info!("test split: {}", test.report);
            write(vocab_path, &vocab.to_text())?;
            models.vocab = vocab.len();
            cfg.model.vocab = vocab.len();
            write(&out.join("config.resolved"), &cfg.to_toml())?;
            let scorer = BleuScorer::new(&test.sequences, training.bleu_n)?;
            let task = Task {
                train: &train.sequences,
                evaluator: Evaluator::Bleu(&scorer),
            };
            execute(training, models, task, out, &algorithms)?
        }
    };

    write(&out.join("metrics.csv"), &records_to_csv(runs.iter().flat_map(|r| &r.records)))?;
    write(&out.join("summary.txt"), &summary(&cfg, &runs))?;
    Ok(runs)
}

fn execute(
    training: seqgan_core::training::TrainingConfig,
    models: seqgan_core::training::ModelConfig,
    task: Task<'_>,
    out: &Path,
    algorithms: &[Algorithm],
) -> Result<Vec<RunArtifacts>> {
    let runner = Runner::new(training, models, task)?.with_checkpoints(out.join("checkpoints"));
    Ok(runner.run_many(algorithms)?)
}

/// Final score per algorithm, Welch p-values against SeqGAN, and the full
/// pairwise p-value matrix.
pub fn summary(cfg: &ExperimentConfig, runs: &[RunArtifacts]) -> String {
    let metric = match cfg.mode {
        Mode::Synthetic => "nll_oracle (lower is better)",
        Mode::Corpus => "bleu (higher is better)",
    };
    let mut s = String::new();
    let _ = writeln!(s, "mode: {:?}", cfg.mode);
    let _ = writeln!(s, "seed: {}", cfg.seed);
    let _ = writeln!(s, "metric: {metric}");
    let _ = writeln!(s);
    let seqgan = runs.iter().find(|r| r.algorithm == Algorithm::SeqGan);
    let p = |a: &RunArtifacts, b: &RunArtifacts| -> String {
        welch_t_test(&a.final_eval.scores, &b.final_eval.scores)
            .map(|p| format!("{p:.3e}"))
            .unwrap_or_else(|_| "n/a".into())
    };
    let _ = writeln!(s, "{:<10} {:>12} {:>12} {:>8} {:>14}", "algorithm", "mean", "std", "samples", "p_vs_seqgan");
    for r in runs {
        let pv = match seqgan {
            Some(g) if g.algorithm != r.algorithm => p(r, g),
            _ => "-".into(),
        };
        let e = &r.final_eval;
        let _ = writeln!(
            s,
            "{:<10} {:>12.4} {:>12.4} {:>8} {:>14}",
            r.algorithm.name(),
            e.mean,
            e.std,
            e.count,
            pv
        );
    }
    if runs.len() > 1 {
        let _ = writeln!(s);
        let _ = writeln!(s, "pairwise welch p-values");
        let _ = write!(s, "{:<10}", "");
        for r in runs {
            let _ = write!(s, " {:>10}", r.algorithm.name());
        }
        let _ = writeln!(s);
        for a in runs {
            let _ = write!(s, "{:<10}", a.algorithm.name());
            for b in runs {
                let cell = if a.algorithm == b.algorithm { "-".into() } else { p(a, b) };
                let _ = write!(s, " {cell:>10}");
            }
            let _ = writeln!(s);
        }
    }
    s
}
