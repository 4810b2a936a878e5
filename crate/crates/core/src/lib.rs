//! Interactive search for a user's favorite tuple in a high-dimensional table
//! whose hidden linear utility depends on only a few attributes.
//!
//! The engine screens attributes in fixed-size blocks, isolates the key
//! attributes by adaptive group testing, and finishes with a pairwise search
//! over a utility polytope on the key attributes. When the user stops early it
//! falls back to [`single_round::attribute_subset`], which unions low-dimensional
//! regret-minimizing sets into a `K`-tuple answer.

pub mod dataset;
pub mod exec;
pub mod harness;
pub mod lp;
pub mod phase1;
pub mod phase2;
pub mod phase3;
pub mod preference;
pub mod session;
pub mod single_round;

pub use dataset::{Dataset, DimensionSet, Direction, RawTable};
pub use exec::Exec;
pub use preference::{Answer, SimulatedUser, UtilityVector};
pub use session::{Session, SessionConfig, SessionResult};
pub use single_round::{CoverageReport, SubsetRunConfig};
