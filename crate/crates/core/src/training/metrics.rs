use std::fmt;
use std::fmt::Write as _;

/// Trainer that produced a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Random,
    Mle,
    ScheduledSampling,
    PgBleu,
    SeqGan,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Random,
        Algorithm::Mle,
        Algorithm::ScheduledSampling,
        Algorithm::PgBleu,
        Algorithm::SeqGan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Mle => "mle",
            Algorithm::ScheduledSampling => "ss",
            Algorithm::PgBleu => "pg_bleu",
            Algorithm::SeqGan => "seqgan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluation row of the metric log.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub algorithm: Algorithm,
    /// Adversarial round (0 = end of pre-training).
    pub round: usize,
    /// Cumulative generator epochs; strictly increasing within a run.
    pub epoch: usize,
    pub nll_oracle_mean: Option<f64>,
    pub nll_oracle_std: Option<f64>,
    pub bleu: Option<f64>,
    pub disc_loss: Option<f64>,
    pub disc_acc: Option<f64>,
    pub wallclock_s: Option<f64>,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "algorithm,round,epoch,nll_oracle_mean,nll_oracle_std,bleu,disc_loss,disc_acc,wallclock_s,seed";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.round,
            self.epoch,
            opt(self.nll_oracle_mean),
            opt(self.nll_oracle_std),
            opt(self.bleu),
            opt(self.disc_loss),
            opt(self.disc_acc),
            opt(self.wallclock_s),
            self.seed
        )
    }
}

pub fn records_to_csv<'a>(records: impl IntoIterator<Item = &'a MetricRecord>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.to_csv_row());
    }
    out
}
