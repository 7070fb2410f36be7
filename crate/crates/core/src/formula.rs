//! Propositional formulas over named atoms.
//!
//! Formulas are used for norm conditions, targets and deadlines as well as
//! for state labels. Besides evaluation this module provides two ways of
//! comparing formulas: logical implication over all valuations, and the
//! model-relative "strictness" order that compares the sets of reachable
//! states in which each formula holds.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::TransitionSystem;

/// Placeholder substituted by an agent id when a norm or world template is
/// grounded.
pub const AGENT_PLACEHOLDER: &str = "{a}";

/// A set of atom names holding in a state.
pub type Labels = BTreeSet<String>;

/// Largest vocabulary for which [`implies_valid`] sweeps all valuations.
pub const MAX_VALIDITY_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("vocabulary of {0} atoms exceeds the validity-check bound of {MAX_VALIDITY_ATOMS}")]
    VocabularyTooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

/// Outcome of comparing two formulas by the sets of situations satisfying them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Strictness {
    /// The first formula holds in strictly fewer situations.
    StrictlyStricter,
    Equivalent,
    /// The first formula holds in strictly more situations.
    StrictlyLessStrict,
    Incomparable,
}

impl Strictness {
    pub fn reverse(self) -> Self {
        match self {
            Strictness::StrictlyStricter => Strictness::StrictlyLessStrict,
            Strictness::StrictlyLessStrict => Strictness::StrictlyStricter,
            other => other,
        }
    }

    fn from_sets<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Self {
        match (a.is_subset(b), b.is_subset(a)) {
            (true, true) => Strictness::Equivalent,
            (true, false) => Strictness::StrictlyStricter,
            (false, true) => Strictness::StrictlyLessStrict,
            (false, false) => Strictness::Incomparable,
        }
    }
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Truth value under `labels`, treating every atom not in `labels` as false.
    pub fn eval(&self, labels: &Labels) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => labels.contains(a),
            Formula::Not(f) => !f.eval(labels),
            Formula::And(a, b) => a.eval(labels) && b.eval(labels),
            Formula::Or(a, b) => a.eval(labels) || b.eval(labels),
        }
    }

    /// Like [`Formula::eval`], but rejects atoms outside `vocabulary`.
    pub fn eval_in(&self, vocabulary: &BTreeSet<String>, labels: &Labels) -> Result<bool, FormulaError> {
        self.check_vocabulary(vocabulary)?;
        Ok(self.eval(labels))
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn check_vocabulary(&self, vocabulary: &BTreeSet<String>) -> Result<(), FormulaError> {
        match self.atoms().into_iter().find(|a| !vocabulary.contains(a)) {
            Some(a) => Err(FormulaError::UnknownAtom(a)),
            None => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Replaces the agent placeholder in every atom name.
    pub fn ground(&self, agent: &str) -> Formula {
        self.map_atoms(&|a| a.replace(AGENT_PLACEHOLDER, agent))
    }

    pub fn is_template(&self) -> bool {
        self.atoms().iter().any(|a| a.contains(AGENT_PLACEHOLDER))
    }

    pub fn map_atoms(&self, f: &dyn Fn(&str) -> String) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => Formula::Atom(f(a)),
            Formula::Not(x) => Formula::not(x.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::render_formula(self))
    }
}

/// True iff `f -> g` holds under every valuation of the atoms of `f` and `g`.
pub fn implies_valid(f: &Formula, g: &Formula) -> Result<bool, FormulaError> {
    let atoms: Vec<String> = f.atoms().union(&g.atoms()).cloned().collect();
    if atoms.len() > MAX_VALIDITY_ATOMS {
        return Err(FormulaError::VocabularyTooLarge(atoms.len()));
    }
    let mut labels = Labels::new();
    for mask in 0u32..(1u32 << atoms.len()) {
        labels.clear();
        for (i, a) in atoms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                labels.insert(a.clone());
            }
        }
        if f.eval(&labels) && !g.eval(&labels) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compares `f` and `g` by the reachable states of `model` satisfying them.
pub fn strictness(f: &Formula, g: &Formula, model: &TransitionSystem) -> Result<Strictness, FormulaError> {
    f.check_vocabulary(model.atoms())?;
    g.check_vocabulary(model.atoms())?;
    let reach = model.reachable();
    let sat =
        |h: &Formula| -> BTreeSet<usize> { reach.iter().copied().filter(|&s| h.eval(model.labels_at(s))).collect() };
    Ok(Strictness::from_sets(&sat(f), &sat(g)))
}

/// Model-independent comparison via [`implies_valid`] in both directions.
pub fn logical_strictness(f: &Formula, g: &Formula) -> Result<Strictness, FormulaError> {
    Ok(match (implies_valid(f, g)?, implies_valid(g, f)?) {
        (true, true) => Strictness::Equivalent,
        (true, false) => Strictness::StrictlyStricter,
        (false, true) => Strictness::StrictlyLessStrict,
        (false, false) => Strictness::Incomparable,
    })
}

/// Which strictness order to use when comparing norm components.
#[derive(Debug, Clone, Copy)]
pub enum StrictnessMode<'a> {
    ModelRelative(&'a TransitionSystem),
    Logical,
}

impl<'a> StrictnessMode<'a> {
    pub fn from_model(model: Option<&'a TransitionSystem>) -> Self {
        model.map_or(StrictnessMode::Logical, StrictnessMode::ModelRelative)
    }

    pub fn compare(&self, f: &Formula, g: &Formula) -> Result<Strictness, FormulaError> {
        match self {
            StrictnessMode::ModelRelative(m) => strictness(f, g, m),
            StrictnessMode::Logical => logical_strictness(f, g),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_formula;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn labels(xs: &[&str]) -> Labels {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn eval_examples() {
        assert!(Formula::True.eval(&labels(&[])));
        assert!(!p("inRoad & trafficHigh").eval(&labels(&["inRoad"])));
        assert!(!p("!speedAbove15 | inRoad").eval(&labels(&["speedAbove15"])));
    }

    #[test]
    fn eval_in_rejects_unknown_atom() {
        let vocab = labels(&["a"]);
        assert_eq!(p("a & b").eval_in(&vocab, &labels(&["a"])), Err(FormulaError::UnknownAtom("b".into())));
        assert_eq!(p("a | !a").eval_in(&vocab, &labels(&[])), Ok(true));
    }

    #[test]
    fn implication_examples() {
        assert!(implies_valid(&p("a & b"), &p("a")).unwrap());
        assert!(!implies_valid(&p("a"), &p("a & b")).unwrap());
        assert!(implies_valid(&p("!(a | b)"), &p("!a & !b")).unwrap());
    }

    #[test]
    fn implication_vocabulary_bound() {
        let big = (0..21).map(|i| Formula::atom(format!("x{i}"))).reduce(Formula::and).unwrap();
        assert_eq!(implies_valid(&big, &Formula::True), Err(FormulaError::VocabularyTooLarge(21)));
    }

    #[test]
    fn grounding_replaces_placeholder() {
        let f = p("inRoad_{a} & !speedAbove15_{a} | shared");
        assert!(f.is_template());
        assert_eq!(f.ground("c1"), p("inRoad_c1 & !speedAbove15_c1 | shared"));
        assert!(!f.ground("c1").is_template());
    }
}
