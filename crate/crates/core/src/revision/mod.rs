//! Classification of norm revisions.
//!
//! A revision replaces a norm set `N` by `N'`. It is a relaxation when the
//! set of violating runs of `N'` is a strict subset of that of `N`, a
//! strengthening in the mirrored case, and otherwise equivalent or
//! incomparable (both are "regular alterations"). The exact check builds the
//! product of the system with path-mode monitors for both sets and searches
//! for a lasso that violates one set while avoiding the other.

mod oracle;
mod product;
mod syntactic;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{LassoDoc, Path, TransitionSystem};
use crate::norms::{Norm, NormSet, Semantics};

pub use oracle::{oracle_compare, Oracle, DEFAULT_ORACLE_BUDGET, ORACLE_NODE_LIMIT};
pub use product::{Product, ProductNode};
pub use syntactic::{
    generate_candidates, syntactic_classify, Candidate, CandidatePool, Case, Component, EditKind, RevisionDirection,
    SyntacticDirection, SyntacticVerdict,
};

/// Default cap on product nodes.
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RevisionError {
    #[error("transition relation is not total: state `{0}` has no successor")]
    NotTotal(String),
    #[error("norm {norm} uses atom `{atom}` which the model does not declare")]
    VocabularyMismatch { norm: String, atom: String },
    #[error("product exceeds {budget} nodes")]
    ProductTooLarge { budget: usize },
    #[error("oracle search exceeded its budget of {budget} expansions")]
    BudgetExceeded { budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Relaxation,
    Strengthening,
    Equivalent,
    Incomparable,
}

impl Relation {
    /// Relation from the two containments `Viol(N') ⊆ Viol(N)` and `Viol(N) ⊆ Viol(N')`.
    pub fn from_containments(revised_in_original: bool, original_in_revised: bool) -> Self {
        match (revised_in_original, original_in_revised) {
            (true, true) => Relation::Equivalent,
            (true, false) => Relation::Relaxation,
            (false, true) => Relation::Strengthening,
            (false, false) => Relation::Incomparable,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Relation::Relaxation => Relation::Strengthening,
            Relation::Strengthening => Relation::Relaxation,
            other => other,
        }
    }

    /// Equivalent and incomparable revisions are both regular alterations.
    pub fn is_alteration(self) -> bool {
        matches!(self, Relation::Equivalent | Relation::Incomparable)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SanctionChange {
    Increased,
    Decreased,
    Mixed,
    Unchanged,
    NotComparable,
}

/// Compares sanctions of norms matched by id; any id present on only one
/// side makes the sets not comparable.
pub fn compare_sanctions(original: &NormSet, revised: &NormSet) -> SanctionChange {
    if original.len() != revised.len() {
        return SanctionChange::NotComparable;
    }
    let (mut up, mut down) = (false, false);
    for n in original.norms() {
        let Some(r) = revised.get(&n.id) else {
            return SanctionChange::NotComparable;
        };
        up |= r.sanction > n.sanction;
        down |= r.sanction < n.sanction;
    }
    match (up, down) {
        (true, true) => SanctionChange::Mixed,
        (true, false) => SanctionChange::Increased,
        (false, true) => SanctionChange::Decreased,
        (false, false) => SanctionChange::Unchanged,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevisionVerdict {
    pub relation: Relation,
    /// A run violating the revised set but not the original.
    pub witness_in_revised_not_original: Option<Path>,
    /// A run violating the original set but not the revised one.
    pub witness_in_original_not_revised: Option<Path>,
    pub sanction_change: SanctionChange,
}

#[derive(Serialize, Deserialize)]
struct VerdictDoc {
    relation: Relation,
    witness_in_revised_not_original: Option<LassoDoc>,
    witness_in_original_not_revised: Option<LassoDoc>,
    sanction_change: SanctionChange,
}

impl Serialize for RevisionVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VerdictDoc {
            relation: self.relation,
            witness_in_revised_not_original: self.witness_in_revised_not_original.as_ref().and_then(Path::to_lasso_doc),
            witness_in_original_not_revised: self.witness_in_original_not_revised.as_ref().and_then(Path::to_lasso_doc),
            sanction_change: self.sanction_change,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RevisionVerdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = VerdictDoc::deserialize(d)?;
        let path = |l: Option<LassoDoc>| -> Result<Option<Path>, D::Error> {
            l.map(|l| Path::from_lasso_doc(&l).ok_or_else(|| serde::de::Error::custom("lasso cycle is empty")))
                .transpose()
        };
        Ok(RevisionVerdict {
            relation: doc.relation,
            witness_in_revised_not_original: path(doc.witness_in_revised_not_original)?,
            witness_in_original_not_revised: path(doc.witness_in_original_not_revised)?,
            sanction_change: doc.sanction_change,
        })
    }
}

impl RevisionVerdict {
    /// Checks the relation/witness invariant.
    pub fn is_consistent(&self) -> bool {
        let r = self.witness_in_revised_not_original.is_some();
        let o = self.witness_in_original_not_revised.is_some();
        match self.relation {
            Relation::Relaxation => o && !r,
            Relation::Strengthening => r && !o,
            Relation::Equivalent => !r && !o,
            Relation::Incomparable => r && o,
        }
    }
}

pub(crate) fn check_inputs(model: &TransitionSystem, sets: &[&NormSet]) -> Result<(), RevisionError> {
    if let Some(s) = model.deadlock() {
        return Err(RevisionError::NotTotal(model.state_id(s).to_string()));
    }
    for set in sets {
        if let Some((norm, atom)) = set.unknown_atoms(model.atoms()).into_iter().next() {
            return Err(RevisionError::VocabularyMismatch { norm, atom });
        }
    }
    Ok(())
}

/// Exact Viol-set comparisons over one transition system.
#[derive(Debug, Clone, Copy)]
pub struct Classifier<'m> {
    pub model: &'m TransitionSystem,
    pub semantics: Semantics,
    pub node_budget: usize,
}

impl<'m> Classifier<'m> {
    pub fn new(model: &'m TransitionSystem) -> Self {
        Classifier { model, semantics: Semantics::default(), node_budget: DEFAULT_NODE_BUDGET }
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }

    fn product(&self, first: &NormSet, second: &NormSet) -> Result<Product<'m>, RevisionError> {
        check_inputs(self.model, &[first, second])?;
        let norms: Vec<&Norm> = first.norms().iter().chain(second.norms()).collect();
        Product::build(self.model, &norms, self.semantics, self.node_budget)
    }

    /// Whether `Viol(small) ⊆ Viol(big)`; on failure the lasso violates
    /// `small` without violating `big`.
    pub fn viol_contains(&self, big: &NormSet, small: &NormSet) -> Result<(bool, Option<Path>), RevisionError> {
        let product = self.product(big, small)?;
        let k = big.len();
        let witness = product.find_lasso(k..k + small.len(), 0..k);
        Ok((witness.is_none(), witness))
    }

    pub fn classify(&self, original: &NormSet, revised: &NormSet) -> Result<RevisionVerdict, RevisionError> {
        let product = self.product(original, revised)?;
        let k = original.len();
        let both = k + revised.len();
        let in_revised = product.find_lasso(k..both, 0..k);
        let in_original = product.find_lasso(0..k, k..both);
        Ok(RevisionVerdict {
            relation: Relation::from_containments(in_revised.is_none(), in_original.is_none()),
            witness_in_revised_not_original: in_revised,
            witness_in_original_not_revised: in_original,
            sanction_change: compare_sanctions(original, revised),
        })
    }
}

pub fn viol_contains(
    model: &TransitionSystem,
    big: &NormSet,
    small: &NormSet,
) -> Result<(bool, Option<Path>), RevisionError> {
    Classifier::new(model).viol_contains(big, small)
}

pub fn classify_revision(
    model: &TransitionSystem,
    original: &NormSet,
    revised: &NormSet,
) -> Result<RevisionVerdict, RevisionError> {
    Classifier::new(model).classify(original, revised)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_norms;
    use crate::norms::violates_set;

    fn road() -> TransitionSystem {
        // out -> in -> {mid (15-20 band), fast} and back out
        TransitionSystem::build(
            ["inRoad", "speedAbove15", "speedAbove20"],
            [
                ("a_out", &[][..]),
                ("b_in", &["inRoad"][..]),
                ("c_mid", &["inRoad", "speedAbove15"][..]),
                ("d_fast", &["inRoad", "speedAbove15", "speedAbove20"][..]),
            ],
            "a_out",
            [
                ("a_out", "a_out"),
                ("a_out", "b_in"),
                ("b_in", "b_in"),
                ("b_in", "c_mid"),
                ("b_in", "d_fast"),
                ("c_mid", "c_mid"),
                ("d_fast", "d_fast"),
            ],
        )
        .unwrap()
    }

    fn set(text: &str) -> NormSet {
        parse_norms(text).unwrap()
    }

    #[test]
    fn reflexive_containment() {
        let n = set("norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }");
        assert_eq!(viol_contains(&road(), &n, &n).unwrap(), (true, None));
        let v = classify_revision(&road(), &n, &n).unwrap();
        assert_eq!(v.relation, Relation::Equivalent);
        assert_eq!(v.sanction_change, SanctionChange::Unchanged);
        assert!(v.is_consistent());
    }

    #[test]
    fn target_relaxation_with_witness_in_band() {
        let m = road();
        let n1 = set("norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }");
        let r2 = set("norm r2 { when: inRoad; forbid: speedAbove20; until: never; sanction: 10000; }");
        assert_eq!(viol_contains(&m, &n1, &r2).unwrap(), (true, None));
        let (ok, witness) = viol_contains(&m, &r2, &n1).unwrap();
        assert!(!ok);
        let w = witness.unwrap();
        assert_eq!(w.stem(), ["a_out", "b_in"]);
        assert_eq!(w.cycle(), ["c_mid"]);
        let sem = Semantics::default();
        assert!(violates_set(&m, &n1, &w, sem).unwrap());
        assert!(!violates_set(&m, &r2, &w, sem).unwrap());
        let v = classify_revision(&m, &n1, &r2).unwrap();
        assert_eq!(v.relation, Relation::Relaxation);
        assert!(v.is_consistent());
        assert_eq!(classify_revision(&m, &r2, &n1).unwrap().relation, Relation::Strengthening);
    }

    #[test]
    fn unsatisfiable_condition_is_contained_everywhere() {
        let never = set("norm z { when: false; forbid: true; until: never; sanction: 1; }");
        let n1 = set("norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }");
        assert!(viol_contains(&road(), &n1, &never).unwrap().0);
        assert!(viol_contains(&road(), &NormSet::new("e", vec![]).unwrap(), &never).unwrap().0);
    }

    #[test]
    fn input_errors() {
        let chain =
            TransitionSystem::build(["inRoad"], [("s0", &[][..]), ("s1", &[][..])], "s0", [("s0", "s1")]).unwrap();
        let n = set("norm n { when: inRoad; forbid: inRoad; until: never; sanction: 1; }");
        assert_eq!(classify_revision(&chain, &n, &n), Err(RevisionError::NotTotal("s1".into())));
        let ghost = set("norm g { when: ghost; forbid: inRoad; until: never; sanction: 1; }");
        assert!(matches!(classify_revision(&road(), &n, &ghost), Err(RevisionError::VocabularyMismatch { .. })));
    }

    #[test]
    fn sanction_comparison() {
        let n1 = set("norm n1 { when: a; forbid: b; until: never; sanction: 10000; }");
        let s1 = set("norm n1 { when: a; forbid: b; until: never; sanction: 5; }");
        assert_eq!(compare_sanctions(&n1, &s1), SanctionChange::Decreased);
        assert_eq!(compare_sanctions(&s1, &n1), SanctionChange::Increased);
        assert_eq!(compare_sanctions(&n1, &n1), SanctionChange::Unchanged);
        let two = set("norm n1 { when: a; forbid: b; until: never; sanction: 1; }\nnorm n2 { when: a; forbid: b; until: never; sanction: 1; }");
        let mixed = set("norm n1 { when: a; forbid: b; until: never; sanction: 2; }\nnorm n2 { when: a; forbid: b; until: never; sanction: 0; }");
        assert_eq!(compare_sanctions(&two, &mixed), SanctionChange::Mixed);
        let other = set("norm x { when: a; forbid: b; until: never; sanction: 1; }");
        assert_eq!(compare_sanctions(&n1, &other), SanctionChange::NotComparable);
    }

    #[test]
    fn verdict_serializes_lassos() {
        let m = road();
        let n1 = set("norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }");
        let r2 = set("norm r2 { when: inRoad; forbid: speedAbove20; until: never; sanction: 10000; }");
        let v = classify_revision(&m, &n1, &r2).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["witness_in_original_not_revised"]["stem"], serde_json::json!(["a_out", "b_in"]));
        assert_eq!(json["witness_in_original_not_revised"]["cycle"], serde_json::json!(["c_mid"]));
        let back: RevisionVerdict = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }
}
