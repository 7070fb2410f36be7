//! Monitoring, revision analysis and runtime supervision of conditional
//! norms over finite transition systems.
//!
//! * [`formula`]: propositional formulas and strictness comparison
//! * [`model`]: labelled transition systems, paths and lassos
//! * [`norms`]: conditional norms, monitors and the sanction ledger
//! * [`revision`]: exact and syntactic classification of norm revisions
//! * [`supervision`]: simulated runs and the norm-update loop
//! * [`dsl`]: every file format
//! * [`cli`]: the `normrev` command line

pub mod cli;
pub mod dsl;
pub mod formula;
pub mod model;
pub mod norms;
pub mod revision;
pub mod supervision;

pub use rust_decimal::Decimal;

pub use formula::{Formula, Labels, Strictness};
pub use model::{Path, TransitionSystem};
pub use norms::{Deadline, Norm, NormKind, NormSet, Semantics};
pub use revision::{classify_revision, Classifier, Relation, RevisionVerdict};
