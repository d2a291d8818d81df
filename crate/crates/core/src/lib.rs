//! Finite permutation models of groups, symbolic processes over them, and the
//! entropy quantities that connect the two.
//!
//! The crate is organised bottom-up:
//!
//! - [`group`]: the acting groups (ℤ, ℤᵈ, finite groups given by a Cayley
//!   table), windows and Følner boxes.
//! - [`sofic`]: maps `σ: G → Sym(m)`, their standard constructions, block
//!   sums, defect statistics, closeness witnesses and r-approximation checks.
//! - [`process`]: shift-invariant processes with a finite alphabet, their
//!   exact window statistics and seeded samplers.
//! - [`stats`]: Shannon entropy, total variation, and the empirical window
//!   law of a microstate `ψ: [m] → A` along a sofic map.
//! - [`entropy`]: classical Følner entropy rates, exact and Monte Carlo
//!   microstate counts, upper-sofic block entropy, the good-function count and
//!   relative entropy.
//!
//! All logarithms are natural logarithms.

pub mod entropy;
pub mod error;
pub mod group;
pub mod par;
pub mod process;
pub mod rational;
pub mod schema;
pub mod sofic;
pub mod stats;

pub use error::{Error, Result};
pub use group::{FolnerSet, GroupElement, GroupKind, GroupSpec, Window};
pub use process::{PatternDist, Process, ProcessKind};
pub use sofic::{ClosenessWitness, EvalMode, Perm, RandomSoficApprox, SoficMap};
pub use stats::Microstate;
