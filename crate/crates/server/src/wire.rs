//! JSON bodies exchanged with clients.

use fhdr_core::session::{PendingQuestion, Phase, ResultKind, SessionConfig};
use fhdr_core::single_round::CoverageReport;
use fhdr_core::{Answer, SessionResult};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::registry::DatasetEntry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireTuple {
    /// Row index into the served dataset.
    pub row: usize,
    /// Row index into the source table.
    pub origin_id: usize,
    /// Normalized values of the listed attributes.
    pub values: Vec<f64>,
    /// Source-table values of the same attributes, when retained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<Vec<Option<f64>>>,
}

fn render(entry: &DatasetEntry, row: usize, dims: &[usize]) -> WireTuple {
    let x = &entry.data;
    WireTuple {
        row,
        origin_id: x.origin_id(row),
        values: dims.iter().map(|&j| x.row(row)[j]).collect(),
        raw: entry.raw_values(row, dims),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Choose,
    OptOut,
    Quit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireQuestion {
    pub session_id: Uuid,
    pub question_index: usize,
    pub phase: Phase,
    pub attributes: Vec<String>,
    pub attribute_indices: Vec<usize>,
    pub tuples: Vec<WireTuple>,
    pub actions: Vec<Action>,
}

impl WireQuestion {
    pub fn new(id: Uuid, q: &PendingQuestion, entry: &DatasetEntry) -> Self {
        let dims = q.shown_dims.indices();
        let names = entry.data.attribute_names();
        let actions = if q.phase == Phase::PolytopeSearch {
            vec![Action::Choose, Action::Quit]
        } else {
            vec![Action::Choose, Action::OptOut, Action::Quit]
        };
        WireQuestion {
            session_id: id,
            question_index: q.index,
            phase: q.phase,
            attributes: dims.iter().map(|&j| names[j].clone()).collect(),
            attribute_indices: dims.to_vec(),
            tuples: q.tuples.iter().map(|&r| render(entry, r, dims)).collect(),
            actions,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireKind {
    Favorite,
    RegretSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireResult {
    pub session_id: Uuid,
    pub kind: WireKind,
    /// All attributes, in dataset order.
    pub attributes: Vec<String>,
    pub tuples: Vec<WireTuple>,
    pub questions_asked: usize,
    pub phase_reached: Phase,
    pub identified_keys: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageReport>,
    /// The session idled past its TTL and was closed as if the user quit.
    pub expired: bool,
}

impl WireResult {
    pub fn new(id: Uuid, r: &SessionResult, entry: &DatasetEntry, expired: bool) -> Self {
        let x = &entry.data;
        let all: Vec<usize> = (0..x.d()).collect();
        let (kind, rows, coverage) = match &r.kind {
            ResultKind::Favorite { row } => (WireKind::Favorite, vec![*row], None),
            ResultKind::RegretSet { rows, report } => {
                (WireKind::RegretSet, rows.clone(), Some(*report))
            }
        };
        WireResult {
            session_id: id,
            kind,
            attributes: x.attribute_names().to_vec(),
            tuples: rows.iter().map(|&row| render(entry, row, &all)).collect(),
            questions_asked: r.questions_asked,
            phase_reached: r.phase_reached,
            identified_keys: r
                .identified_keys
                .iter()
                .map(|&j| x.attribute_names()[j].clone())
                .collect(),
            coverage,
            expired,
        }
    }
}

/// What the client should do next.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Next {
    Question(WireQuestion),
    Result(WireResult),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub m: Option<usize>,
    pub s: Option<usize>,
    pub d_max: Option<usize>,
    pub seed: Option<u64>,
    #[serde(rename = "K")]
    pub k_output: Option<usize>,
    pub w: Option<usize>,
    pub k: Option<usize>,
    pub max_iter: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, mut cfg: SessionConfig) -> SessionConfig {
        cfg.m = self.m.unwrap_or(cfg.m);
        cfg.s = self.s.unwrap_or(cfg.s);
        cfg.d_max = self.d_max.unwrap_or(cfg.d_max);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.subset.output_size = self.k_output.unwrap_or(cfg.subset.output_size);
        cfg.subset.w = self.w.unwrap_or(cfg.subset.w);
        cfg.subset.k = self.k.unwrap_or(cfg.subset.k);
        cfg.subset.max_iter = self.max_iter.unwrap_or(cfg.subset.max_iter);
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub dataset: String,
    #[serde(default)]
    pub config: ConfigOverrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: Uuid,
    /// Seed actually used, so the run can be replayed.
    pub seed: u64,
    pub next: Next,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub question_index: usize,
    pub action: Action,
    #[serde(default)]
    pub choice: Option<usize>,
}

impl AnswerRequest {
    pub fn to_answer(&self) -> Result<Answer, String> {
        match (self.action, self.choice) {
            (Action::Choose, Some(i)) => Ok(Answer::Choose(i)),
            (Action::Choose, None) => Err("action \"choose\" needs a choice".into()),
            (Action::OptOut, None) => Ok(Answer::OptOut),
            (Action::Quit, None) => Ok(Answer::Quit),
            (_, Some(_)) => Err("only \"choose\" takes a choice".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
