//! The full interactive protocol: coarse elimination, group testing, then
//! the pairwise polytope search, with an early stop routed to
//! [`attribute_subset`] at any point.

use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DimensionSet};
use crate::exec::Exec;
use crate::phase1::{Phase1Error, Phase1State};
use crate::phase2::{GroupTestError, GroupTestState};
use crate::phase3::{harvest_constraints, LoggedQuestion, SearchError, SearchState};
use crate::preference::{Answer, D_MAX};
use crate::single_round::{attribute_subset_with, GreedyMaxRegret, SubsetError, SubsetRunConfig};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("session already finished")]
    Terminal,
    #[error("session has not finished")]
    NotFinished,
    #[error("choice {choice} out of range for {shown} displayed tuples")]
    BadChoice { choice: usize, shown: usize },
    #[error("answer {0:?} is not allowed in the current phase")]
    NotAllowed(Answer),
    #[error("snapshot does not replay against this dataset")]
    SnapshotMismatch,
    #[error(transparent)]
    Phase1(#[from] Phase1Error),
    #[error(transparent)]
    GroupTest(#[from] GroupTestError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Subset(#[from] SubsetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Attributes per question.
    pub m: usize,
    /// Tuples per question.
    pub s: usize,
    /// Upper bound on the number of key attributes.
    pub d_max: usize,
    pub subset: SubsetRunConfig,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            m: 7,
            s: 2,
            d_max: D_MAX,
            subset: SubsetRunConfig::default(),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.s < 2 {
            return Err(SessionError::Config("s must be at least 2".into()));
        }
        if self.m == 0 {
            return Err(SessionError::Config("m must be at least 1".into()));
        }
        if self.d_max == 0 {
            return Err(SessionError::Config("d_max must be at least 1".into()));
        }
        self.subset
            .validate()
            .map_err(|e| SessionError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Elimination,
    GroupTesting,
    PolytopeSearch,
    Done,
}

/// Question currently awaiting an answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendingQuestion {
    pub index: usize,
    pub phase: Phase,
    pub shown_dims: DimensionSet,
    /// Row indices into the session dataset.
    pub tuples: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultKind {
    Favorite {
        row: usize,
    },
    RegretSet {
        rows: Vec<usize>,
        report: crate::single_round::CoverageReport,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    /// Answered questions per phase.
    pub per_phase: [usize; 3],
    /// Candidate count handed from elimination to group testing.
    pub group_testing_input: Option<usize>,
    /// Size of each group drawn during group testing.
    pub group_sizes: Vec<usize>,
    /// Groups cut down to `m` to respect the display bound.
    pub capped_groups: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub kind: ResultKind,
    pub questions_asked: usize,
    pub phase_reached: Phase,
    pub identified_keys: Vec<usize>,
    pub stats: SessionStats,
}

#[derive(Clone, Debug)]
enum State {
    Elimination(Phase1State),
    GroupTesting(GroupTestState),
    PolytopeSearch(SearchState),
    Done(Box<SessionResult>),
}

/// Serializable session record. Restoring replays `question_log` on a
/// fresh session with the same dataset and config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub config: SessionConfig,
    pub dataset_fingerprint: u64,
    pub phase: Phase,
    pub candidate_dims: Vec<usize>,
    pub key_dims: Vec<usize>,
    pub nonkey_dims: Vec<usize>,
    pub constraints: Vec<Vec<f64>>,
    pub question_log: Vec<LoggedQuestion>,
}

#[derive(Clone, Debug)]
pub struct Session {
    x: Arc<Dataset>,
    cfg: SessionConfig,
    rng: ChaCha8Rng,
    state: State,
    pending: Option<PendingQuestion>,
    log: Vec<LoggedQuestion>,
    answered: usize,
    stats: SessionStats,
    exec: Exec,
}

impl Session {
    pub fn new(x: Arc<Dataset>, cfg: SessionConfig) -> Result<Self, SessionError> {
        Session::with_exec(x, cfg, Exec::default())
    }

    pub fn with_exec(
        x: Arc<Dataset>,
        cfg: SessionConfig,
        exec: Exec,
    ) -> Result<Self, SessionError> {
        cfg.validate()?;
        if x.n() < cfg.s {
            return Err(SessionError::Config(format!(
                "dataset has {} rows but each question shows {}",
                x.n(),
                cfg.s
            )));
        }
        let state = State::Elimination(Phase1State::new(x.d(), cfg.m)?);
        let mut session = Session {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            x,
            cfg,
            state,
            pending: None,
            log: Vec::new(),
            answered: 0,
            stats: SessionStats::default(),
            exec,
        };
        session.advance()?;
        Ok(session)
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.x
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn phase(&self) -> Phase {
        match self.state {
            State::Elimination(_) => Phase::Elimination,
            State::GroupTesting(_) => Phase::GroupTesting,
            State::PolytopeSearch(_) => Phase::PolytopeSearch,
            State::Done(_) => Phase::Done,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.state, State::Done(_))
    }

    pub fn questions_asked(&self) -> usize {
        self.answered
    }

    pub fn log(&self) -> &[LoggedQuestion] {
        &self.log
    }

    pub fn current_question(&self) -> Result<&PendingQuestion, SessionError> {
        self.pending.as_ref().ok_or(SessionError::Terminal)
    }

    pub fn result(&self) -> Result<&SessionResult, SessionError> {
        match &self.state {
            State::Done(r) => Ok(r),
            _ => Err(SessionError::NotFinished),
        }
    }

    /// Dimensions an early stop would hand to the fallback.
    /// Per-phase counters so far; equal to the result's stats once terminal.
    pub fn stats(&self) -> &SessionStats {
        &self.stats
    }

    pub fn candidate_dims(&self) -> Vec<usize> {
        match &self.state {
            State::Elimination(st) => st.candidates(),
            State::GroupTesting(st) => st.candidates(),
            State::PolytopeSearch(st) => st.keys.clone(),
            State::Done(r) => r.identified_keys.clone(),
        }
    }

    pub fn submit_answer(&mut self, answer: Answer) -> Result<(), SessionError> {
        let question = self.pending.clone().ok_or(SessionError::Terminal)?;
        if let Answer::Choose(c) = answer {
            if c >= question.tuples.len() {
                return Err(SessionError::BadChoice {
                    choice: c,
                    shown: question.tuples.len(),
                });
            }
        }
        if answer == Answer::Quit {
            self.finish_early()?;
        } else {
            match &mut self.state {
                State::Elimination(st) => st.apply(answer)?,
                State::GroupTesting(st) => {
                    st.apply(answer)?;
                    self.stats.group_sizes = st.group_sizes.clone();
                    self.stats.capped_groups = st.capped_groups;
                }
                State::PolytopeSearch(st) => {
                    let Answer::Choose(c) = answer else {
                        return Err(SessionError::NotAllowed(answer));
                    };
                    let chosen = question.tuples[c];
                    let others: Vec<usize> = question
                        .tuples
                        .iter()
                        .copied()
                        .filter(|&r| r != chosen)
                        .collect();
                    st.apply(&self.x, chosen, &others, &mut self.rng)?;
                }
                State::Done(_) => return Err(SessionError::Terminal),
            }
            let slot = match question.phase {
                Phase::Elimination => 0,
                Phase::GroupTesting => 1,
                _ => 2,
            };
            self.stats.per_phase[slot] += 1;
            self.answered += 1;
            self.pending = None;
        }
        self.log.push(LoggedQuestion {
            shown_dims: question.shown_dims,
            tuples: question.tuples,
            answer,
        });
        self.advance()
    }

    fn finish_early(&mut self) -> Result<(), SessionError> {
        let phase = self.phase();
        let result = match &self.state {
            State::PolytopeSearch(st) => {
                let row = st.result(&self.x, &mut self.rng)?;
                self.package(ResultKind::Favorite { row }, phase, st.keys.clone())
            }
            State::Done(_) => return Err(SessionError::Terminal),
            _ => {
                let cand = self.candidate_dims();
                let keys = match &self.state {
                    State::GroupTesting(st) => st.keys.clone(),
                    _ => Vec::new(),
                };
                self.regret_set(cand, phase, keys)?
            }
        };
        self.state = State::Done(Box::new(result));
        self.pending = None;
        Ok(())
    }

    fn package(&self, kind: ResultKind, phase: Phase, keys: Vec<usize>) -> SessionResult {
        SessionResult {
            kind,
            questions_asked: self.answered,
            phase_reached: phase,
            identified_keys: keys,
            stats: self.stats.clone(),
        }
    }

    fn regret_set(
        &mut self,
        cand: Vec<usize>,
        phase: Phase,
        keys: Vec<usize>,
    ) -> Result<SessionResult, SessionError> {
        let cand = DimensionSet::new(cand, self.x.d()).map_err(SubsetError::from)?;
        let solver = GreedyMaxRegret {
            exec: self.exec,
            boundary: false,
        };
        let out = attribute_subset_with(
            &self.x,
            &cand,
            &self.cfg.subset,
            &solver,
            self.exec,
            &mut self.rng,
        )?;
        Ok(self.package(
            ResultKind::RegretSet {
                rows: out.rows,
                report: out.report,
            },
            phase,
            keys,
        ))
    }

    /// Moves through finished phases and prepares the next question.
    fn advance(&mut self) -> Result<(), SessionError> {
        loop {
            match &mut self.state {
                State::Elimination(st) => {
                    if st.is_done() {
                        let cand = st.kept.clone();
                        let non = st.eliminated.clone();
                        self.stats.group_testing_input = Some(cand.len());
                        self.state =
                            State::GroupTesting(GroupTestState::new(cand, non, self.cfg.d_max));
                        continue;
                    }
                    let (dims, tuples) =
                        st.next_question(&self.x, self.cfg.m, self.cfg.s, &mut self.rng)?;
                    self.set_pending(Phase::Elimination, dims, tuples);
                    return Ok(());
                }
                State::GroupTesting(st) => {
                    if st.is_done() {
                        let keys = st.keys.clone();
                        self.stats.group_sizes = st.group_sizes.clone();
                        self.stats.capped_groups = st.capped_groups;
                        self.after_group_testing(keys)?;
                        continue;
                    }
                    let q = st.next_question(&self.x, self.cfg.s, self.cfg.m, &mut self.rng)?;
                    self.stats.group_sizes = st.group_sizes.clone();
                    self.stats.capped_groups = st.capped_groups;
                    self.set_pending(Phase::GroupTesting, q.shown_dims, q.tuples);
                    return Ok(());
                }
                State::PolytopeSearch(st) => {
                    if st.is_terminal() {
                        let row = st.result(&self.x, &mut self.rng)?;
                        let keys = st.keys.clone();
                        let r = self.package(ResultKind::Favorite { row }, Phase::Done, keys);
                        self.state = State::Done(Box::new(r));
                        continue;
                    }
                    let shown = st.next_display(&self.x, self.cfg.s, &mut self.rng)?;
                    let dims = DimensionSet::from_vec_unchecked(st.keys.clone());
                    self.set_pending(Phase::PolytopeSearch, dims, shown);
                    return Ok(());
                }
                State::Done(_) => {
                    self.pending = None;
                    return Ok(());
                }
            }
        }
    }

    fn after_group_testing(&mut self, keys: Vec<usize>) -> Result<(), SessionError> {
        match keys.len() {
            0 => {
                // nothing was ever chosen: fall back on a random attribute sample
                let d = self.x.d();
                let w = self.cfg.subset.w.min(d);
                let cand = index::sample(&mut self.rng, d, w).into_vec();
                let r = self.regret_set(cand, Phase::Done, Vec::new())?;
                self.state = State::Done(Box::new(r));
            }
            1 => {
                let k = keys[0];
                let row = (0..self.x.n())
                    .max_by(|&a, &b| {
                        self.x.row(a)[k]
                            .total_cmp(&self.x.row(b)[k])
                            .then(b.cmp(&a))
                    })
                    .expect("dataset nonempty");
                let r = self.package(ResultKind::Favorite { row }, Phase::Done, keys);
                self.state = State::Done(Box::new(r));
            }
            _ => {
                let harvested = harvest_constraints(&self.x, &self.log, &keys);
                let st = SearchState::new(&self.x, &keys, harvested, self.exec, &mut self.rng)?;
                self.state = State::PolytopeSearch(st);
            }
        }
        Ok(())
    }

    fn set_pending(&mut self, phase: Phase, shown_dims: DimensionSet, tuples: Vec<usize>) {
        self.pending = Some(PendingQuestion {
            index: self.answered,
            phase,
            shown_dims,
            tuples,
        });
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        let (cand, keys, non, constraints) = match &self.state {
            State::Elimination(st) => (st.candidates(), vec![], st.eliminated.clone(), vec![]),
            State::GroupTesting(st) => {
                (st.cand.clone(), st.keys.clone(), st.nonkeys.clone(), vec![])
            }
            State::PolytopeSearch(st) => (
                vec![],
                st.keys.clone(),
                (0..self.x.d()).filter(|d| !st.keys.contains(d)).collect(),
                st.polytope.constraints().to_vec(),
            ),
            State::Done(r) => (vec![], r.identified_keys.clone(), vec![], vec![]),
        };
        SessionSnapshot {
            config: self.cfg,
            dataset_fingerprint: self.x.fingerprint(),
            phase: self.phase(),
            candidate_dims: cand,
            key_dims: keys,
            nonkey_dims: non,
            constraints,
            question_log: self.log.clone(),
        }
    }

    pub fn restore(x: Arc<Dataset>, snapshot: &SessionSnapshot) -> Result<Self, SessionError> {
        if x.fingerprint() != snapshot.dataset_fingerprint {
            return Err(SessionError::SnapshotMismatch);
        }
        let mut s = Session::new(x, snapshot.config)?;
        for entry in &snapshot.question_log {
            let q = s
                .current_question()
                .map_err(|_| SessionError::SnapshotMismatch)?;
            if q.shown_dims != entry.shown_dims || q.tuples != entry.tuples {
                return Err(SessionError::SnapshotMismatch);
            }
            s.submit_answer(entry.answer)?;
        }
        Ok(s)
    }
}
