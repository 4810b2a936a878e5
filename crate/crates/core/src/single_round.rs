//! Single-round fallback for an early stop: union small regret-minimizing
//! sets computed on random `w`-attribute projections of the candidate
//! attributes until `K` tuples are collected.

use std::collections::HashSet;

use num_integer::Integer;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{skyline_indices, DataError, Dataset, DimensionSet};
use crate::exec::Exec;
use crate::preference::{max_regret, PrefError, D_MAX};

#[derive(Debug, Error)]
pub enum SubsetError {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("need d_int <= w <= candidate count (d_int = {d_int}, w = {w}, candidates = {cand})")]
    Coverage { cand: usize, d_int: usize, w: usize },
    #[error("coverage probability {0} leaves no finite round count")]
    Probability(f64),
    #[error("confidence {0} outside (0, 1)")]
    Confidence(f64),
    #[error("empty candidate set")]
    NoCandidates,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Pref(#[from] PrefError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetRunConfig {
    /// Attributes sampled per iteration.
    pub w: usize,
    /// Tuples kept per iteration.
    pub k: usize,
    /// Output size.
    #[serde(rename = "K")]
    pub output_size: usize,
    pub max_iter: usize,
    /// Key-count assumption used only for the coverage report.
    pub assumed_keys: usize,
}

impl Default for SubsetRunConfig {
    fn default() -> Self {
        SubsetRunConfig {
            w: 6,
            k: 7,
            output_size: 30,
            max_iter: 50,
            assumed_keys: D_MAX,
        }
    }
}

impl SubsetRunConfig {
    pub fn validate(&self) -> Result<(), SubsetError> {
        if self.w == 0 {
            return Err(SubsetError::Config("w must be at least 1"));
        }
        if self.k <= self.w {
            return Err(SubsetError::Config("k must exceed w"));
        }
        if self.output_size == 0 {
            return Err(SubsetError::Config("K must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(SubsetError::Config("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Probability that a uniform `w`-subset of `cand` attributes holds all
/// `d_int` keys, as a reduced fraction and a float, with the closed-form
/// lower bound `((w − d_int + 1)/(cand − d_int + 1))^d_int`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub numerator: u128,
    pub denominator: u128,
    pub p: f64,
    pub bound: f64,
}

pub fn coverage_probability(cand: usize, d_int: usize, w: usize) -> Result<Coverage, SubsetError> {
    if d_int > w || w > cand {
        return Err(SubsetError::Coverage { cand, d_int, w });
    }
    // C(cand − d, w − d) / C(cand, w) = Π_{i<d} (w − i)/(cand − i)
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..d_int {
        num *= (w - i) as u128;
        den *= (cand - i) as u128;
        let g = num.gcd(&den);
        num /= g;
        den /= g;
    }
    let bound = if d_int == 0 {
        1.0
    } else {
        ((w - d_int + 1) as f64 / (cand - d_int + 1) as f64).powi(d_int as i32)
    };
    Ok(Coverage {
        numerator: num,
        denominator: den,
        p: num as f64 / den as f64,
        bound,
    })
}

/// Smallest `N` with `1 − (1 − p)^N ≥ conf`. Certain coverage needs one round.
pub fn rounds_for_confidence(p: f64, conf: f64) -> Result<usize, SubsetError> {
    if !(conf > 0.0 && conf < 1.0) {
        return Err(SubsetError::Confidence(conf));
    }
    if p == 1.0 {
        return Ok(1);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SubsetError::Probability(p));
    }
    let n = ((1.0 - conf).ln() / (-p).ln_1p()).ceil().max(1.0) as usize;
    Ok(n)
}

pub fn confidence(p: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - p).powi(rounds as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub p_cover: f64,
    pub lower_bound: f64,
    pub rounds_executed: usize,
    pub confidence: f64,
}

/// Pluggable single-round regret-minimizing subroutine.
///
/// Implementations return at most `k` row indices of `xw`; when `k` is at
/// least the number of attributes they must include a maximizer of every
/// attribute, and they must be deterministic.
pub trait SingleRoundSolver: Sync {
    fn select(&self, xw: &Dataset, k: usize) -> Result<Vec<usize>, SubsetError>;
}

/// Seeds with the max-sum row, then repeatedly adds the row that realizes the
/// current maximum regret ratio. With `boundary` set and `k` at least the
/// attribute count, the seed is every attribute maximizer instead.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyMaxRegret {
    pub exec: Exec,
    pub boundary: bool,
}

impl SingleRoundSolver for GreedyMaxRegret {
    fn select(&self, xw: &Dataset, k: usize) -> Result<Vec<usize>, SubsetError> {
        if k == 0 {
            return Err(SubsetError::Config("k must be at least 1"));
        }
        if xw.n() <= k {
            return Ok((0..xw.n()).collect());
        }
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        if self.boundary && k >= xw.d() {
            for j in 0..xw.d() {
                let best = (0..xw.n())
                    .max_by(|&a, &b| xw.row(a)[j].total_cmp(&xw.row(b)[j]).then(b.cmp(&a)))
                    .expect("nonempty");
                if !chosen.contains(&best) {
                    chosen.push(best);
                }
            }
        } else {
            let sum = |i: usize| xw.row(i).iter().sum::<f64>();
            let best = (0..xw.n())
                .max_by(|&a, &b| sum(a).total_cmp(&sum(b)).then(b.cmp(&a)))
                .expect("nonempty");
            chosen.push(best);
        }
        while chosen.len() < k {
            match max_regret(xw, &chosen, self.exec)?.worst_row {
                Some(r) => chosen.push(r),
                None => break,
            }
        }
        Ok(chosen)
    }
}

/// One sampled projection and the rows it contributed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub dims: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetOutcome {
    /// Row indices into the input dataset, exactly `min(K, n)` of them.
    pub rows: Vec<usize>,
    pub report: CoverageReport,
    pub iterations: Vec<Iteration>,
}

fn regret_set_on(
    x: &Dataset,
    dims: Vec<usize>,
    size: usize,
    solver: &dyn SingleRoundSolver,
    exec: Exec,
) -> Result<Iteration, SubsetError> {
    let xp = x.project(&DimensionSet::new(dims.clone(), x.d())?)?;
    let sky = skyline_indices(&xp, exec);
    let reduced = xp.select_rows(&sky);
    let rows = solver
        .select(&reduced, size)?
        .into_iter()
        .map(|i| sky[i])
        .collect();
    Ok(Iteration { dims, rows })
}

pub fn attribute_subset<R: Rng + ?Sized>(
    x: &Dataset,
    cand: &DimensionSet,
    cfg: &SubsetRunConfig,
    rng: &mut R,
) -> Result<SubsetOutcome, SubsetError> {
    let exec = Exec::default();
    attribute_subset_with(
        x,
        cand,
        cfg,
        &GreedyMaxRegret {
            exec,
            boundary: false,
        },
        exec,
        rng,
    )
}

pub fn attribute_subset_with<R: Rng + ?Sized>(
    x: &Dataset,
    cand: &DimensionSet,
    cfg: &SubsetRunConfig,
    solver: &dyn SingleRoundSolver,
    exec: Exec,
    rng: &mut R,
) -> Result<SubsetOutcome, SubsetError> {
    cfg.validate()?;
    if cand.is_empty() {
        return Err(SubsetError::NoCandidates);
    }
    let target = if cfg.output_size > x.n() {
        log::warn!(
            "requested {} tuples from a dataset of {}; returning all",
            cfg.output_size,
            x.n()
        );
        x.n()
    } else {
        cfg.output_size
    };
    let c = cand.len();
    let mut selected: Vec<usize> = Vec::new();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut iterations: Vec<Iteration> = Vec::new();

    if cfg.w >= c {
        let it = regret_set_on(x, cand.indices().to_vec(), target, solver, exec)?;
        for &r in &it.rows {
            if seen.insert(r) {
                selected.push(r);
            }
        }
        iterations.push(it);
    } else {
        let master: u64 = rng.gen();
        let batch = match exec {
            #[cfg(feature = "parallel")]
            Exec::Parallel => rayon::current_num_threads().max(1),
            _ => 1,
        };
        let mut next = 0usize;
        'outer: while next < cfg.max_iter {
            let count = batch.min(cfg.max_iter - next);
            let results = exec.map_range(count, |b| {
                let mut it_rng = ChaCha8Rng::seed_from_u64(master);
                it_rng.set_stream((next + b) as u64);
                let dims: Vec<usize> = index::sample(&mut it_rng, c, cfg.w)
                    .into_iter()
                    .map(|i| cand.indices()[i])
                    .collect();
                regret_set_on(x, dims, cfg.k, solver, exec)
            });
            for it in results {
                let it = it?;
                for &r in &it.rows {
                    if seen.insert(r) {
                        selected.push(r);
                    }
                }
                iterations.push(it);
                next += 1;
                if selected.len() >= target {
                    break 'outer;
                }
            }
        }
    }

    if selected.len() < target {
        let rest: Vec<usize> = (0..x.n()).filter(|r| !seen.contains(r)).collect();
        let extra = index::sample(rng, rest.len(), target - selected.len());
        selected.extend(extra.into_iter().map(|i| rest[i]));
    } else if selected.len() > target {
        let keep = index::sample(rng, selected.len(), target);
        selected = keep.into_iter().map(|i| selected[i]).collect();
    }

    let w_eff = cfg.w.min(c);
    let d_eff = cfg.assumed_keys.min(w_eff);
    let cov = coverage_probability(c, d_eff, w_eff)?;
    let rounds = iterations.len();
    Ok(SubsetOutcome {
        rows: selected,
        report: CoverageReport {
            p_cover: cov.p,
            lower_bound: cov.bound,
            rounds_executed: rounds,
            confidence: confidence(cov.p, rounds),
        },
        iterations,
    })
}
