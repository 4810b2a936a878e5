//! Utility vectors, regret ratios, the simulated user, and the LP-based
//! maximum-regret oracle.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DimensionSet};
use crate::exec::Exec;
use crate::lp::{LinearProgram, LpError, LpOutcome, Relation};

/// Default upper bound on the number of attributes a user cares about.
pub const D_MAX: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum PrefError {
    #[error("utility has {expected} weights but point has {got} values")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weights must be nonnegative and sum to 1")]
    NotNormalized,
    #[error("sparse utility needs 1 <= d_int <= d (d_int = {d_int}, d = {d})")]
    BadSupport { d_int: usize, d: usize },
    #[error("empty subset")]
    EmptySubset,
    #[error("row {0} is not in the dataset")]
    RowOutOfRange(usize),
    #[error("best utility over the dataset is zero")]
    ZeroUtility,
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nonnegative, L1-normalized linear utility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityVector(Vec<f64>);

impl UtilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, PrefError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(PrefError::NotNormalized);
        }
        Ok(UtilityVector(weights))
    }

    /// Scales nonnegative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, PrefError> {
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || sum.is_nan() || sum <= 0.0 {
            return Err(PrefError::NotNormalized);
        }
        Ok(UtilityVector(
            weights.into_iter().map(|w| w / sum).collect(),
        ))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn utility(&self, p: &[f64]) -> Result<f64, PrefError> {
        if p.len() != self.0.len() {
            return Err(PrefError::DimensionMismatch {
                expected: self.0.len(),
                got: p.len(),
            });
        }
        Ok(dot(&self.0, p))
    }

    /// Utility restricted to the displayed attributes.
    pub fn partial_utility(&self, dims: &DimensionSet, p: &[f64]) -> f64 {
        dims.indices().iter().map(|&i| self.0[i] * p[i]).sum()
    }
}

/// `u` with exactly `d_int` positive weights on uniformly chosen dimensions;
/// the weights are uniform on `(0, 1]` before normalization.
pub fn gen_sparse_utility<R: Rng + ?Sized>(
    d: usize,
    d_int: usize,
    rng: &mut R,
) -> Result<UtilityVector, PrefError> {
    if d_int == 0 || d_int > d {
        return Err(PrefError::BadSupport { d_int, d });
    }
    let mut w = vec![0.0; d];
    for i in index::sample(rng, d, d_int) {
        w[i] = 1.0 - rng.gen::<f64>();
    }
    UtilityVector::normalized(w)
}

fn best_utility(x: &Dataset, rows: impl Iterator<Item = usize>, u: &[f64]) -> f64 {
    rows.map(|i| dot(u, x.row(i)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `1 - max_{p∈S} u·p / max_{p∈X} u·p` for the rows `subset` of `x`.
pub fn regret_ratio(x: &Dataset, subset: &[usize], u: &UtilityVector) -> Result<f64, PrefError> {
    regret_ratio_raw(x, subset, u.weights())
}

/// [`regret_ratio`] for an arbitrary nonnegative weight vector.
pub fn regret_ratio_raw(x: &Dataset, subset: &[usize], u: &[f64]) -> Result<f64, PrefError> {
    if subset.is_empty() {
        return Err(PrefError::EmptySubset);
    }
    if u.len() != x.d() {
        return Err(PrefError::DimensionMismatch {
            expected: u.len(),
            got: x.d(),
        });
    }
    if let Some(&r) = subset.iter().find(|&&r| r >= x.n()) {
        return Err(PrefError::RowOutOfRange(r));
    }
    let best = best_utility(x, 0..x.n(), u);
    if best.is_nan() || best <= 0.0 {
        return Err(PrefError::ZeroUtility);
    }
    let got = best_utility(x, subset.iter().copied(), u);
    Ok((1.0 - got / best).clamp(0.0, 1.0))
}

/// Largest regret ratio any nonnegative utility can force on `subset`, with a
/// row of `x` that realizes it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxRegret {
    pub value: f64,
    pub worst_row: Option<usize>,
}

/// For row `p`: `max x  s.t.  u·q + x ≤ 1 ∀q∈S,  u·p = 1,  u, x ≥ 0`.
/// Infeasible means no utility favors `p` over `S`, i.e. regret 0.
fn point_regret(x: &Dataset, subset_rows: &[&[f64]], p: &[f64]) -> Result<f64, LpError> {
    let d = x.d();
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    for q in subset_rows {
        let mut c = q.to_vec();
        c.push(1.0);
        lp.constrain(c, Relation::Le, 1.0)?;
    }
    let mut c = p.to_vec();
    c.push(0.0);
    lp.constrain(c, Relation::Eq, 1.0)?;
    Ok(match lp.solve()? {
        LpOutcome::Optimal(s) => s.value.clamp(0.0, 1.0),
        _ => 0.0,
    })
}

/// Exact maximum regret ratio of `subset` over all nonnegative utilities.
pub fn max_regret_ratio(x: &Dataset, subset: &[usize]) -> Result<f64, PrefError> {
    Ok(max_regret(x, subset, Exec::default())?.value)
}

pub fn max_regret(x: &Dataset, subset: &[usize], exec: Exec) -> Result<MaxRegret, PrefError> {
    if subset.is_empty() {
        return Err(PrefError::EmptySubset);
    }
    if let Some(&r) = subset.iter().find(|&&r| r >= x.n()) {
        return Err(PrefError::RowOutOfRange(r));
    }
    let rows: Vec<&[f64]> = subset.iter().map(|&i| x.row(i)).collect();
    let in_subset = {
        let mut v = vec![false; x.n()];
        subset.iter().for_each(|&i| v[i] = true);
        v
    };
    // A row covered componentwise by a subset member can never be preferred.
    let probes: Vec<usize> = (0..x.n())
        .filter(|&i| {
            !in_subset[i]
                && !rows
                    .iter()
                    .any(|q| q.iter().zip(x.row(i)).all(|(a, b)| a >= b))
        })
        .collect();
    let regrets = exec.map(&probes, |&i| point_regret(x, &rows, x.row(i)));
    let mut best = MaxRegret {
        value: 0.0,
        worst_row: None,
    };
    for (&i, r) in probes.iter().zip(regrets) {
        let r = r?;
        if r > best.value {
            best = MaxRegret {
                value: r,
                worst_row: Some(i),
            };
        }
    }
    Ok(best)
}

/// A user's reply to one question.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "choice", rename_all = "snake_case")]
pub enum Answer {
    /// Index into the displayed tuples.
    Choose(usize),
    /// None of the displayed attributes matter.
    OptOut,
    /// Stop answering.
    Quit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

/// Truthful user who compares tuples by partial utility on the displayed
/// attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedUser {
    pub truth: UtilityVector,
    pub tie_break: TieBreak,
}

impl SimulatedUser {
    pub fn new(truth: UtilityVector) -> Self {
        SimulatedUser {
            truth,
            tie_break: TieBreak::LowestIndex,
        }
    }

    /// Opts out iff every displayed tuple has partial utility 0, otherwise
    /// picks the argmax. Never quits.
    pub fn answer(&self, dims: &DimensionSet, tuples: &[&[f64]]) -> Answer {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in tuples.iter().enumerate() {
            let f = self.truth.partial_utility(dims, p);
            match (self.tie_break, best) {
                (_, None) => best = Some((i, f)),
                (TieBreak::LowestIndex, Some((_, b))) if f > b => best = Some((i, f)),
                _ => {}
            }
        }
        match best {
            Some((i, f)) if f > 0.0 => Answer::Choose(i),
            _ => Answer::OptOut,
        }
    }
}
