//! Sufficient syntactic conditions for relaxing or strengthening a single
//! norm, and enumeration of single-component edits.
//!
//! Each component change is read off a strictness comparison:
//!
//! | component | relaxing change |
//! |-----------|-----------------|
//! | cond      | stricter condition |
//! | target, O | less strict target |
//! | target, F | stricter target |
//! | deadline, F | less strict deadline (`never` is strictest) |
//! | deadline, O | stricter deadline (reversed, flagged) |
//!
//! The mirrored change strengthens. An obligation is violated when its
//! deadline arrives first, so an earlier deadline produces more violations;
//! the obligation row is therefore the reverse of the prohibition row and
//! verdicts that rely on it carry `deviation = true`.

use std::fmt;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::dsl::render_formula;
use crate::formula::{Formula, Strictness, StrictnessMode};
use crate::model::TransitionSystem;
use crate::norms::{Deadline, Norm, NormKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    CondCase,
    TargetCase,
    DeadlineCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntacticDirection {
    RelaxationOrEquivalent,
    StrengtheningOrEquivalent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntacticVerdict {
    pub direction: SyntacticDirection,
    pub fired_cases: Vec<Case>,
    /// Set when an obligation's deadline changed and the reversed rule was used.
    pub deviation: bool,
}

impl SyntacticVerdict {
    fn unknown(deviation: bool) -> Self {
        SyntacticVerdict { direction: SyntacticDirection::Unknown, fired_cases: Vec::new(), deviation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Effect {
    Same,
    Relax,
    Strengthen,
    Unclear,
}

/// Effect of replacing `old` by `new` when a stricter formula relaxes the norm.
fn effect(s: Result<Strictness, crate::formula::FormulaError>, stricter_relaxes: bool) -> Effect {
    match s {
        Ok(Strictness::Equivalent) => Effect::Same,
        Ok(Strictness::StrictlyStricter) if stricter_relaxes => Effect::Relax,
        Ok(Strictness::StrictlyStricter) => Effect::Strengthen,
        Ok(Strictness::StrictlyLessStrict) if stricter_relaxes => Effect::Strengthen,
        Ok(Strictness::StrictlyLessStrict) => Effect::Relax,
        Ok(Strictness::Incomparable) | Err(_) => Effect::Unclear,
    }
}

/// Classifies the replacement of `n1` by `n2` from their syntax alone.
/// Strictness is model-relative when `model` is given, logical otherwise.
pub fn syntactic_classify(n1: &Norm, n2: &Norm, model: Option<&TransitionSystem>) -> SyntacticVerdict {
    if n1.kind != n2.kind {
        return SyntacticVerdict::unknown(false);
    }
    let mode = StrictnessMode::from_model(model);
    let obligation = n1.kind == NormKind::Obligation;
    let cond = effect(mode.compare(&n2.cond, &n1.cond), true);
    let target = effect(mode.compare(&n2.target, &n1.target), !obligation);
    let deadline = effect(mode.compare(&n2.deadline.as_formula(), &n1.deadline.as_formula()), obligation);
    let deviation = obligation && deadline != Effect::Same;

    let effects = [(Case::CondCase, cond), (Case::TargetCase, target), (Case::DeadlineCase, deadline)];
    if effects.iter().any(|(_, e)| *e == Effect::Unclear) {
        return SyntacticVerdict::unknown(deviation);
    }
    let relaxes = effects.iter().any(|(_, e)| *e == Effect::Relax);
    let strengthens = effects.iter().any(|(_, e)| *e == Effect::Strengthen);
    let fired = |want: Effect| effects.iter().filter(|(_, e)| *e == want).map(|(c, _)| *c).collect();
    match (relaxes, strengthens) {
        (true, true) => SyntacticVerdict::unknown(deviation),
        (false, true) => SyntacticVerdict {
            direction: SyntacticDirection::StrengtheningOrEquivalent,
            fired_cases: fired(Effect::Strengthen),
            deviation,
        },
        // all components equivalent counts as the trivial relaxation-or-equivalent
        _ => SyntacticVerdict {
            direction: SyntacticDirection::RelaxationOrEquivalent,
            fired_cases: fired(Effect::Relax),
            deviation,
        },
    }
}

/// Formulas and sanction amounts the candidate generator may splice in.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePool {
    pub formulas: Vec<Formula>,
    pub sanctions: Vec<Decimal>,
}

impl CandidatePool {
    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty() && self.sanctions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RevisionDirection {
    Relax,
    Strengthen,
    Alter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Cond,
    Target,
    Deadline,
    Sanction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EditKind {
    /// `c & p`
    Conjoin,
    /// `c | p`
    Disjoin,
    /// `p`
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// The edited norm; it keeps the original id.
    pub norm: Norm,
    pub component: Component,
    pub edit: EditKind,
    pub deviation: bool,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.norm;
        match self.component {
            Component::Cond => write!(f, "cond := {}", render_formula(&n.cond)),
            Component::Target => write!(f, "target := {}", render_formula(&n.target)),
            Component::Deadline => match &n.deadline {
                Deadline::Never => write!(f, "deadline := never"),
                Deadline::At(d) => write!(f, "deadline := {}", render_formula(d)),
            },
            Component::Sanction => write!(f, "sanction := {}", n.sanction),
        }
    }
}

fn edits(current: &Formula, p: &Formula) -> [(EditKind, Formula); 3] {
    [
        (EditKind::Conjoin, Formula::and(current.clone(), p.clone())),
        (EditKind::Disjoin, Formula::or(current.clone(), p.clone())),
        (EditKind::Replace, p.clone()),
    ]
}

fn deadline_edits(current: &Deadline, p: &Formula) -> Vec<(EditKind, Deadline)> {
    match current {
        // never & p is never again, never | p is just p
        Deadline::Never => vec![(EditKind::Replace, Deadline::At(p.clone()))],
        Deadline::At(d) => edits(d, p).into_iter().map(|(k, f)| (k, Deadline::At(f))).collect(),
    }
}

/// Single-component edits of `n` whose syntactic direction matches
/// `direction` (`Alter` takes the edits classified `Unknown`).
///
/// Formula edits try every pool formula against cond, target and deadline
/// in that order, as conjunct, disjunct and replacement. Sanction edits
/// count as relaxations when they lower the amount and strengthenings when
/// they raise it. Duplicates and no-op edits are dropped.
pub fn generate_candidates(
    n: &Norm,
    pool: &CandidatePool,
    direction: RevisionDirection,
    model: Option<&TransitionSystem>,
) -> Vec<Candidate> {
    let mut raw: Vec<(Component, EditKind, Norm)> = Vec::new();
    for p in &pool.formulas {
        for (kind, f) in edits(&n.cond, p) {
            raw.push((Component::Cond, kind, Norm { cond: f, ..n.clone() }));
        }
    }
    for p in &pool.formulas {
        for (kind, f) in edits(&n.target, p) {
            raw.push((Component::Target, kind, Norm { target: f, ..n.clone() }));
        }
    }
    for p in &pool.formulas {
        for (kind, d) in deadline_edits(&n.deadline, p) {
            raw.push((Component::Deadline, kind, Norm { deadline: d, ..n.clone() }));
        }
    }

    let mut out: Vec<Candidate> = Vec::new();
    for (component, edit, norm) in raw {
        if norm == *n || out.iter().any(|c| c.norm == norm) {
            continue;
        }
        let verdict = syntactic_classify(n, &norm, model);
        let matches = match (direction, verdict.direction) {
            (RevisionDirection::Relax, SyntacticDirection::RelaxationOrEquivalent)
            | (RevisionDirection::Strengthen, SyntacticDirection::StrengtheningOrEquivalent) => {
                !verdict.fired_cases.is_empty()
            }
            (RevisionDirection::Alter, SyntacticDirection::Unknown) => true,
            _ => false,
        };
        if matches {
            out.push(Candidate { norm, component, edit, deviation: verdict.deviation });
        }
    }
    for &s in &pool.sanctions {
        let keep = match direction {
            RevisionDirection::Relax => s < n.sanction,
            RevisionDirection::Strengthen => s > n.sanction,
            RevisionDirection::Alter => false,
        };
        let norm = Norm { sanction: s, ..n.clone() };
        if keep && !out.iter().any(|c| c.norm == norm) {
            out.push(Candidate { norm, component: Component::Sanction, edit: EditKind::Replace, deviation: false });
        }
    }
    out
}
