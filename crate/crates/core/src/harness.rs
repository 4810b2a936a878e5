//! Simulated-user experiments: synthetic data, repeated trials, metrics and
//! CSV reports.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{load_table, skyline, DataError, Dataset, RawTable};
use crate::exec::Exec;
use crate::preference::{gen_sparse_utility, regret_ratio, Answer, PrefError, SimulatedUser};
use crate::session::{ResultKind, Session, SessionConfig, SessionError, SessionStats};

pub const BASELINE_LABEL: &str = "uniform-random K-set";

/// Normalization shift used when a trial loads a CSV.
pub const CSV_DELTA_FRACTION: f64 = 0.01;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid trial configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Pref(#[from] PrefError),
    #[error("report i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("report csv: {0}")]
    Csv(#[from] csv::Error),
}

/// `n × d` values uniform on (0, 1], each column rescaled so its max is 1.
pub fn gen_uniform<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Dataset, DataError> {
    if n == 0 {
        return Err(DataError::EmptyTable);
    }
    if d == 0 {
        return Err(DataError::NoColumns);
    }
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| 1.0 - rng.gen::<f64>()).collect())
        .collect();
    for j in 0..d {
        let max = rows.iter().map(|r| r[j]).fold(0.0, f64::max);
        for r in &mut rows {
            r[j] /= max;
        }
        // division can land a hair below 1 for the maximizer itself
        if let Some(r) = rows.iter_mut().find(|r| r[j] >= 1.0 - 1e-15) {
            r[j] = 1.0;
        }
    }
    let names = (1..=d).map(|i| format!("D{i}")).collect();
    Dataset::from_rows(rows, names)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Answer until the favorite is returned.
    P1,
    /// Quit after `q` answers and score the returned set.
    P2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Synthetic { n: usize, d: usize },
    Csv { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub mode: Mode,
    pub source: Source,
    pub d_int: usize,
    /// Question budget; ignored in P1 mode.
    pub q: usize,
    #[serde(rename = "K")]
    pub k_output: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_m")]
    pub m: usize,
}

fn default_m() -> usize {
    7
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            mode: Mode::P1,
            source: Source::Synthetic { n: 10_000, d: 100 },
            d_int: 3,
            q: 15,
            k_output: 30,
            reps: 100,
            seed: 0,
            m: default_m(),
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.reps == 0 {
            return Err(HarnessError::Config("reps must be at least 1".into()));
        }
        if self.mode == Mode::P2 && self.q == 0 {
            return Err(HarnessError::Config(
                "q must be at least 1 in p2 mode".into(),
            ));
        }
        if self.d_int == 0 {
            return Err(HarnessError::Config("d_int must be at least 1".into()));
        }
        Ok(())
    }

    pub fn session_config(&self, seed: u64) -> SessionConfig {
        let mut cfg = SessionConfig {
            m: self.m,
            seed,
            ..Default::default()
        };
        cfg.subset.output_size = self.k_output;
        cfg
    }
}

/// Loads the configured source and reduces it to its skyline.
pub fn prepare_dataset(cfg: &TrialConfig) -> Result<Dataset, HarnessError> {
    let raw = match &cfg.source {
        Source::Synthetic { n, d } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(u64::MAX);
            gen_uniform(*n, *d, &mut rng)?
        }
        Source::Csv { path } => load_table(&RawTable::from_csv_path(path)?, CSV_DELTA_FRACTION)?,
    };
    Ok(skyline(&raw))
}

/// One simulated repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub rep: usize,
    pub seed: u64,
    pub truth: Vec<f64>,
    pub seconds: f64,
    pub regret: f64,
    pub baseline_regret: f64,
    pub questions: usize,
    /// The returned favorite is a global maximizer (P1 only).
    pub exact: bool,
    pub keys_correct: bool,
    pub outperformed: bool,
    pub returned: Vec<usize>,
    pub stats: SessionStats,
}

pub fn run_one(
    x: &Arc<Dataset>,
    cfg: &TrialConfig,
    rep: usize,
    exec: Exec,
) -> Result<TrialOutcome, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let truth = gen_sparse_utility(x.d(), cfg.d_int, &mut rng)?;
    let session_seed: u64 = rng.gen();
    let user = SimulatedUser::new(truth.clone());

    let start = Instant::now();
    let mut session = Session::with_exec(x.clone(), cfg.session_config(session_seed), exec)?;
    while !session.is_terminal() {
        if cfg.mode == Mode::P2 && session.questions_asked() >= cfg.q {
            session.submit_answer(Answer::Quit)?;
            break;
        }
        let q = session.current_question()?;
        let tuples: Vec<&[f64]> = q.tuples.iter().map(|&r| x.row(r)).collect();
        let a = user.answer(&q.shown_dims, &tuples);
        session.submit_answer(a)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    let result = session.result()?.clone();

    let returned = match &result.kind {
        ResultKind::Favorite { row } => vec![*row],
        ResultKind::RegretSet { rows, .. } => rows.clone(),
    };
    let regret = regret_ratio(x, &returned, &truth)?;

    let base_start = Instant::now();
    let k = cfg.k_output.min(x.n());
    let baseline: Vec<usize> = index::sample(&mut rng, x.n(), k).into_vec();
    let baseline_regret = regret_ratio(x, &baseline, &truth)?;
    let base_seconds = base_start.elapsed().as_secs_f64();

    let outperformed = if (regret - baseline_regret).abs() <= 1e-12 {
        seconds < base_seconds
    } else {
        regret < baseline_regret
    };
    let mut keys = result.identified_keys.clone();
    keys.sort_unstable();

    Ok(TrialOutcome {
        rep,
        seed: session_seed,
        truth: truth.weights().to_vec(),
        seconds,
        regret,
        baseline_regret,
        questions: result.questions_asked,
        exact: matches!(result.kind, ResultKind::Favorite { .. }) && regret <= 1e-12,
        keys_correct: keys == truth.support(),
        outperformed,
        returned,
        stats: result.stats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mode: Mode,
    pub n: usize,
    pub d: usize,
    pub d_int: usize,
    pub q: usize,
    #[serde(rename = "K")]
    pub k_output: usize,
    pub reps: usize,
    pub mean_seconds: f64,
    pub p50_seconds: f64,
    pub p95_seconds: f64,
    pub mean_regret: f64,
    pub mean_questions: f64,
    pub outperformance: f64,
    pub success_rate: f64,
    pub baseline: String,
}

impl Metrics {
    /// Copy with the wall-clock columns zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> Metrics {
        Metrics {
            mean_seconds: 0.0,
            p50_seconds: 0.0,
            p95_seconds: 0.0,
            ..self.clone()
        }
    }
}

fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn summarize(cfg: &TrialConfig, x: &Dataset, outcomes: &[TrialOutcome]) -> Metrics {
    let mut times: Vec<f64> = outcomes.iter().map(|o| o.seconds).collect();
    times.sort_by(f64::total_cmp);
    let count = outcomes.len() as f64;
    let success = match cfg.mode {
        Mode::P1 => outcomes.iter().filter(|o| o.exact).count(),
        Mode::P2 => outcomes
            .iter()
            .filter(|o| o.returned.len() == cfg.k_output.min(x.n()))
            .count(),
    };
    Metrics {
        mode: cfg.mode,
        n: x.n(),
        d: x.d(),
        d_int: cfg.d_int,
        q: cfg.q,
        k_output: cfg.k_output,
        reps: outcomes.len(),
        mean_seconds: mean(times.iter().copied()),
        p50_seconds: percentile(&times, 50.0),
        p95_seconds: percentile(&times, 95.0),
        mean_regret: mean(outcomes.iter().map(|o| o.regret)),
        mean_questions: mean(outcomes.iter().map(|o| o.questions as f64)),
        outperformance: outcomes.iter().filter(|o| o.outperformed).count() as f64 / count,
        success_rate: success as f64 / count,
        baseline: BASELINE_LABEL.to_string(),
    }
}

pub struct TrialRun {
    pub metrics: Metrics,
    pub outcomes: Vec<TrialOutcome>,
}

/// Runs every repetition, spread over `exec`. Sessions inside a parallel
/// batch run sequentially.
pub fn run_trials(cfg: &TrialConfig, exec: Exec) -> Result<TrialRun, HarnessError> {
    cfg.validate()?;
    let x = Arc::new(prepare_dataset(cfg)?);
    run_trials_on(&x, cfg, exec)
}

pub fn run_trials_on(
    x: &Arc<Dataset>,
    cfg: &TrialConfig,
    exec: Exec,
) -> Result<TrialRun, HarnessError> {
    cfg.validate()?;
    let outcomes = exec
        .map_range(cfg.reps, |rep| run_one(x, cfg, rep, Exec::Sequential))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrialRun {
        metrics: summarize(cfg, x, &outcomes),
        outcomes,
    })
}

pub fn report_csv(rows: &[Metrics]) -> Result<String, HarnessError> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| {
        (a.mode as u8, a.n, a.d, a.d_int, a.q, a.k_output).cmp(&(
            b.mode as u8,
            b.n,
            b.d,
            b.d_int,
            b.q,
            b.k_output,
        ))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_report(text: &str) -> Result<Vec<Metrics>, HarnessError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<Metrics>, _>>()?)
}

pub fn report_summary(rows: &[Metrics]) -> String {
    let mut out = String::new();
    for m in rows {
        out.push_str(&format!(
            "{:?} n={} d={} d_int={} q={} K={} reps={}: regret {:.4}, questions {:.1}, \
             time mean {:.3}s p95 {:.3}s, success {:.2}, outperformance vs {} {:.2}\n",
            m.mode,
            m.n,
            m.d,
            m.d_int,
            m.q,
            m.k_output,
            m.reps,
            m.mean_regret,
            m.mean_questions,
            m.mean_seconds,
            m.p95_seconds,
            m.success_rate,
            m.baseline,
            m.outperformance,
        ));
    }
    out
}

/// Writes `<path>` as CSV and `<path>.txt` as the plain-text summary.
pub fn emit_report(rows: &[Metrics], path: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::File::create(path)?.write_all(report_csv(rows)?.as_bytes())?;
    let mut summary = path.as_os_str().to_owned();
    summary.push(".txt");
    let summary = PathBuf::from(summary);
    std::fs::write(&summary, report_summary(rows))?;
    Ok(summary)
}
