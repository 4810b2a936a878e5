//! Fine selection by generalized binary splitting.
//!
//! Each surviving candidate attribute is classified as key or non-key. A
//! probe shows a handful of undecided attributes padded with known non-keys;
//! an opt-out clears the whole probe, a choice means the probe holds a key.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DimensionSet};
use crate::phase1::sample_tuples;
use crate::preference::Answer;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupTestError {
    #[error("group testing already finished")]
    Finished,
    #[error("no question is pending")]
    NoPendingQuestion,
    #[error("answer {0:?} cannot be applied to a probe")]
    UnsupportedAnswer(Answer),
}

/// A displayed question: `probe_dims` are under test, the rest of
/// `shown_dims` are known non-key padding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub shown_dims: DimensionSet,
    pub probe_dims: DimensionSet,
    pub tuples: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Idle,
    /// Testing the listed attributes one at a time.
    BaseCaseScan {
        queue: Vec<usize>,
    },
    /// `group` is known to hold at least one key.
    BinarySearch {
        group: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Probe {
    Single { dim: usize },
    Group { group: Vec<usize> },
    Half { half: Vec<usize>, rest: Vec<usize> },
}

impl Probe {
    fn dims(&self) -> &[usize] {
        match self {
            Probe::Single { dim } => std::slice::from_ref(dim),
            Probe::Group { group } => group,
            Probe::Half { half, .. } => half,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupTestState {
    pub cand: Vec<usize>,
    pub keys: Vec<usize>,
    pub nonkeys: Vec<usize>,
    pub d_left: usize,
    pub mode: Mode,
    pending: Option<Probe>,
    /// Sizes of the groups drawn on each idle-to-group transition.
    pub group_sizes: Vec<usize>,
    /// Groups whose natural size `2^α` was cut down to `m`.
    pub capped_groups: usize,
}

/// `⌊log₂(l / d_left)⌋` with `l = |cand| − d_left + 1`, in integers.
fn split_exponent(c: usize, d_left: usize) -> u32 {
    let l = c + 1 - d_left;
    let mut alpha = 0;
    while (d_left << (alpha + 1)) <= l {
        alpha += 1;
    }
    alpha
}

impl GroupTestState {
    pub fn new(cand: Vec<usize>, nonkeys: Vec<usize>, d_max: usize) -> Self {
        let mut st = GroupTestState {
            cand,
            keys: Vec::new(),
            nonkeys,
            d_left: d_max,
            mode: Mode::Idle,
            pending: None,
            group_sizes: Vec::new(),
            capped_groups: 0,
        };
        st.settle();
        st
    }

    pub fn is_done(&self) -> bool {
        self.d_left == 0 || self.cand.is_empty()
    }

    /// Undecided plus identified keys: what an early stop hands on.
    pub fn candidates(&self) -> Vec<usize> {
        let mut c = self.keys.clone();
        c.extend_from_slice(&self.cand);
        c
    }

    pub fn next_question<R: Rng + ?Sized>(
        &mut self,
        x: &Dataset,
        s: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<Question, GroupTestError> {
        if self.is_done() {
            return Err(GroupTestError::Finished);
        }
        if self.pending.is_none() {
            let probe = self.choose_probe(m, rng);
            self.pending = Some(probe);
        }
        let probe = self.pending.as_ref().expect("probe set above");
        let probe_dims = probe.dims().to_vec();
        let mut shown = probe_dims.clone();
        let room = m.saturating_sub(shown.len()).min(self.nonkeys.len());
        shown.extend(
            index::sample(rng, self.nonkeys.len(), room)
                .into_iter()
                .map(|i| self.nonkeys[i]),
        );
        let tuples = sample_tuples(x, &shown, s, rng);
        Ok(Question {
            shown_dims: DimensionSet::from_vec_unchecked(shown),
            probe_dims: DimensionSet::from_vec_unchecked(probe_dims),
            tuples,
        })
    }

    fn choose_probe<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R) -> Probe {
        if self.mode == Mode::Idle {
            if self.cand.len() + 2 <= 2 * self.d_left {
                self.mode = Mode::BaseCaseScan {
                    queue: self.cand.clone(),
                };
            } else {
                let natural = 1usize << split_exponent(self.cand.len(), self.d_left);
                if self.cand.len() <= self.d_left * m {
                    debug_assert!(natural <= m, "group of {natural} exceeds m = {m}");
                }
                // later groups can outgrow the display once keys are found
                let size = natural.min(m.max(1));
                if size < natural {
                    self.capped_groups += 1;
                }
                let group: Vec<usize> = index::sample(rng, self.cand.len(), size)
                    .into_iter()
                    .map(|i| self.cand[i])
                    .collect();
                self.group_sizes.push(group.len());
                return Probe::Group { group };
            }
        }
        match &self.mode {
            Mode::BaseCaseScan { queue } => Probe::Single { dim: queue[0] },
            Mode::BinarySearch { group } => {
                let (half, rest) = group.split_at(group.len() / 2);
                Probe::Half {
                    half: half.to_vec(),
                    rest: rest.to_vec(),
                }
            }
            Mode::Idle => unreachable!("idle handled above"),
        }
    }

    pub fn apply(&mut self, answer: Answer) -> Result<(), GroupTestError> {
        let positive = match answer {
            Answer::Choose(_) => true,
            Answer::OptOut => false,
            Answer::Quit => return Err(GroupTestError::UnsupportedAnswer(answer)),
        };
        let probe = self
            .pending
            .take()
            .ok_or(GroupTestError::NoPendingQuestion)?;
        match probe {
            Probe::Single { dim } => {
                if let Mode::BaseCaseScan { queue } = &mut self.mode {
                    queue.retain(|&d| d != dim);
                    if queue.is_empty() {
                        self.mode = Mode::Idle;
                    }
                }
                if positive {
                    self.mark_key(dim);
                } else {
                    self.mark_nonkeys(&[dim]);
                }
            }
            Probe::Group { group } => {
                if !positive {
                    self.mark_nonkeys(&group);
                } else if group.len() == 1 {
                    self.mark_key(group[0]);
                } else {
                    self.mode = Mode::BinarySearch { group };
                }
            }
            Probe::Half { half, rest } => {
                // a negative half clears it and pins the key in the rest;
                // a positive half sends the untested rest back to the pool
                let positive_part = if positive {
                    half
                } else {
                    self.mark_nonkeys(&half);
                    rest
                };
                if positive_part.len() == 1 {
                    self.mode = Mode::Idle;
                    self.mark_key(positive_part[0]);
                } else {
                    self.mode = Mode::BinarySearch {
                        group: positive_part,
                    };
                }
            }
        }
        self.settle();
        Ok(())
    }

    fn mark_key(&mut self, dim: usize) {
        self.cand.retain(|&d| d != dim);
        self.keys.push(dim);
        self.d_left -= 1;
    }

    fn mark_nonkeys(&mut self, dims: &[usize]) {
        self.cand.retain(|d| !dims.contains(d));
        self.nonkeys.extend_from_slice(dims);
    }

    // Once every possible key is found, the leftovers cannot be keys.
    fn settle(&mut self) {
        if self.d_left == 0 && !self.cand.is_empty() {
            let rest = std::mem::take(&mut self.cand);
            self.nonkeys.extend(rest);
        }
        if self.is_done() {
            self.mode = Mode::Idle;
            self.pending = None;
        }
    }
}

/// Worst-case number of group-testing questions for `c` candidates and at
/// most `d_left` keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBound {
    pub questions: usize,
    /// False when the `c = 2^α·d_left + 2^α·p + θ` decomposition has no
    /// solution with `p < d_left` and the loose bound `α·d_left + c` is used.
    pub exact: bool,
}

pub fn question_bound(c: usize, d_left: usize) -> QuestionBound {
    if d_left == 0 || c + 2 <= 2 * d_left {
        return QuestionBound {
            questions: c,
            exact: true,
        };
    }
    let alpha = split_exponent(c, d_left) as usize;
    let block = 1usize << alpha;
    let p = (c - block * d_left) / block;
    if p < d_left {
        QuestionBound {
            questions: (alpha + 2) * d_left + p - 1,
            exact: true,
        }
    } else {
        QuestionBound {
            questions: alpha * d_left + c,
            exact: false,
        }
    }
}
