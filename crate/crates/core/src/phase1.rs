//! Coarse elimination: one question per block of `m` attributes. A block the
//! user ignores is discarded wholesale; any other block survives intact.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DimensionSet};
use crate::preference::Answer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Phase1Error {
    #[error("block size must be positive")]
    ZeroBlockSize,
    #[error("all blocks have been asked")]
    Exhausted,
    #[error("answer {0:?} cannot be applied to a block")]
    UnsupportedAnswer(Answer),
}

const RESAMPLE_ATTEMPTS: usize = 20;

/// Splits `0..d` into consecutive blocks of `m`; the last one may be short.
pub fn make_blocks(d: usize, m: usize) -> Result<Vec<DimensionSet>, Phase1Error> {
    if m == 0 {
        return Err(Phase1Error::ZeroBlockSize);
    }
    Ok((0..d)
        .step_by(m)
        .map(|start| DimensionSet::from_vec_unchecked((start..(start + m).min(d)).collect()))
        .collect())
}

/// Draws `s` distinct rows, retrying a bounded number of times to avoid two
/// rows that look identical on `dims`.
pub(crate) fn sample_tuples<R: Rng + ?Sized>(
    x: &Dataset,
    dims: &[usize],
    s: usize,
    rng: &mut R,
) -> Vec<usize> {
    let s = s.min(x.n());
    let mut rows = index::sample(rng, x.n(), s).into_vec();
    for _ in 0..RESAMPLE_ATTEMPTS {
        let distinct = rows.iter().enumerate().all(|(a, &ra)| {
            rows[..a]
                .iter()
                .all(|&rb| dims.iter().any(|&j| x.row(ra)[j] != x.row(rb)[j]))
        });
        if distinct {
            break;
        }
        rows = index::sample(rng, x.n(), s).into_vec();
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase1State {
    pub blocks: Vec<DimensionSet>,
    pub cursor: usize,
    pub kept: Vec<usize>,
    pub eliminated: Vec<usize>,
}

impl Phase1State {
    pub fn new(d: usize, m: usize) -> Result<Self, Phase1Error> {
        Ok(Phase1State {
            blocks: make_blocks(d, m)?,
            cursor: 0,
            kept: Vec::new(),
            eliminated: Vec::new(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.blocks.len()
    }

    /// Surviving plus not-yet-asked dimensions.
    pub fn candidates(&self) -> Vec<usize> {
        let mut c = self.kept.clone();
        for b in &self.blocks[self.cursor.min(self.blocks.len())..] {
            c.extend_from_slice(b.indices());
        }
        c
    }

    /// Attributes and tuples for the current block. A short block is padded
    /// with the lowest-indexed eliminated attributes up to `m`.
    pub fn next_question<R: Rng + ?Sized>(
        &self,
        x: &Dataset,
        m: usize,
        s: usize,
        rng: &mut R,
    ) -> Result<(DimensionSet, Vec<usize>), Phase1Error> {
        let block = self.blocks.get(self.cursor).ok_or(Phase1Error::Exhausted)?;
        let mut shown = block.indices().to_vec();
        if shown.len() < m {
            let mut pad = self.eliminated.clone();
            pad.sort_unstable();
            shown.extend(pad.into_iter().take(m - shown.len()));
        }
        let tuples = sample_tuples(x, &shown, s, rng);
        Ok((DimensionSet::from_vec_unchecked(shown), tuples))
    }

    pub fn apply(&mut self, answer: Answer) -> Result<(), Phase1Error> {
        let block = self.blocks.get(self.cursor).ok_or(Phase1Error::Exhausted)?;
        match answer {
            Answer::Choose(_) => self.kept.extend_from_slice(block.indices()),
            Answer::OptOut => self.eliminated.extend_from_slice(block.indices()),
            Answer::Quit => return Err(Phase1Error::UnsupportedAnswer(answer)),
        }
        self.cursor += 1;
        Ok(())
    }
}
