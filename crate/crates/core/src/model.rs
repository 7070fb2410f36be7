//! Finite transition systems: states labelled with atoms, a transition
//! relation and a distinguished initial state.
//!
//! A [`TransitionSystem`] is always well formed; raw input goes through
//! [`ModelDescription`] and [`validate`] first. States are indexed in
//! lexicographic id order, so every successor list is already in the
//! deterministic order used by path enumeration and witness search.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Labels, AGENT_PLACEHOLDER};

/// Default cap on the number of paths [`TransitionSystem::enumerate_paths`] may produce.
pub const DEFAULT_PATH_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("state `{0}` has no outgoing transition")]
    NotTotal(String),
    #[error("path enumeration would produce {count} paths, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("path must start at the initial state `{expected}`, found `{found}`")]
    WrongStart { expected: String, found: String },
    #[error("no transition from `{from}` to `{to}`")]
    MissingTransition { from: String, to: String },
    #[error("path is empty")]
    EmptyPath,
    #[error("path length must be positive")]
    ZeroLength,
    #[error("model has defects: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ModelDefect>),
}

/// A problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum ModelDefect {
    NoStates,
    MissingInit { init: String },
    DuplicateState { id: String },
    InvalidStateId { id: String },
    InvalidAtomName { atom: String },
    UnknownState { id: String, context: String },
    UnknownAtom { atom: String, state: String },
}

impl fmt::Display for ModelDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelDefect::NoStates => write!(f, "model declares no states"),
            ModelDefect::MissingInit { init } => write!(f, "unknown state `{init}` used as init"),
            ModelDefect::DuplicateState { id } => write!(f, "duplicate state `{id}`"),
            ModelDefect::InvalidStateId { id } => write!(f, "invalid state id `{id}`"),
            ModelDefect::InvalidAtomName { atom } => write!(f, "invalid atom name `{atom}`"),
            ModelDefect::UnknownState { id, context } => write!(f, "unknown state `{id}` in {context}"),
            ModelDefect::UnknownAtom { atom, state } => write!(f, "unknown atom `{atom}` labelling state `{state}`"),
        }
    }
}

/// Unchecked model as read from a file.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelDescription {
    pub atoms: Vec<String>,
    pub states: Vec<StateDescription>,
    pub init: String,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDescription {
    pub id: String,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// Identifier syntax shared by atoms, state ids and norm ids. Atom names may
/// additionally carry the `{a}` agent placeholder.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn is_atom_name(s: &str) -> bool {
    if !s.contains(AGENT_PLACEHOLDER) {
        return is_identifier(s);
    }
    let stripped = s.replace(AGENT_PLACEHOLDER, "_");
    is_identifier(&stripped)
}

/// Reports every defect of `desc`; an empty list means the description is well formed.
pub fn validate(desc: &ModelDescription) -> Vec<ModelDefect> {
    let mut defects = Vec::new();
    let atoms: BTreeSet<&str> = desc.atoms.iter().map(String::as_str).collect();
    for a in &desc.atoms {
        if !is_atom_name(a) {
            defects.push(ModelDefect::InvalidAtomName { atom: a.clone() });
        }
    }
    if desc.states.is_empty() {
        defects.push(ModelDefect::NoStates);
    }
    let mut ids = BTreeSet::new();
    for s in &desc.states {
        if !is_identifier(&s.id) {
            defects.push(ModelDefect::InvalidStateId { id: s.id.clone() });
        }
        if !ids.insert(s.id.as_str()) {
            defects.push(ModelDefect::DuplicateState { id: s.id.clone() });
        }
        for l in &s.labels {
            if !atoms.contains(l.as_str()) {
                defects.push(ModelDefect::UnknownAtom { atom: l.clone(), state: s.id.clone() });
            }
        }
    }
    if !desc.states.is_empty() && !ids.contains(desc.init.as_str()) {
        defects.push(ModelDefect::MissingInit { init: desc.init.clone() });
    }
    for (from, to) in &desc.edges {
        for end in [from, to] {
            if !ids.contains(end.as_str()) {
                defects.push(ModelDefect::UnknownState { id: end.clone(), context: format!("edge {from} -> {to}") });
            }
        }
    }
    defects
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    atoms: BTreeSet<String>,
    ids: Vec<String>,
    labels: Vec<Labels>,
    init: usize,
    succ: Vec<Vec<usize>>,
}

impl TransitionSystem {
    pub fn from_description(desc: &ModelDescription) -> Result<Self, ModelError> {
        let defects = validate(desc);
        if !defects.is_empty() {
            return Err(ModelError::Invalid(defects));
        }
        let states: BTreeMap<&str, Labels> =
            desc.states.iter().map(|s| (s.id.as_str(), s.labels.iter().cloned().collect())).collect();
        let ids: Vec<String> = states.keys().map(|s| s.to_string()).collect();
        let index = |id: &str| ids.binary_search_by(|x| x.as_str().cmp(id)).expect("validated");
        let mut succ = vec![BTreeSet::new(); ids.len()];
        for (from, to) in &desc.edges {
            succ[index(from)].insert(index(to));
        }
        Ok(TransitionSystem {
            atoms: desc.atoms.iter().cloned().collect(),
            labels: states.into_values().collect(),
            init: index(&desc.init),
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
            ids,
        })
    }

    /// Convenience constructor used heavily by tests and examples.
    pub fn build<'a>(
        atoms: impl IntoIterator<Item = &'a str>,
        states: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
        init: &str,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, ModelError> {
        let desc = ModelDescription {
            atoms: atoms.into_iter().map(String::from).collect(),
            states: states
                .into_iter()
                .map(|(id, labels)| StateDescription {
                    id: id.to_string(),
                    labels: labels.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
            init: init.to_string(),
            edges: edges.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        };
        Self::from_description(&desc)
    }

    /// Canonical description: states sorted by id, edges sorted, atoms sorted.
    pub fn to_description(&self) -> ModelDescription {
        ModelDescription {
            atoms: self.atoms.iter().cloned().collect(),
            states: self
                .ids
                .iter()
                .zip(&self.labels)
                .map(|(id, l)| StateDescription { id: id.clone(), labels: l.iter().cloned().collect() })
                .collect(),
            init: self.ids[self.init].clone(),
            edges: self.edges().map(|(a, b)| (self.ids[a].clone(), self.ids[b].clone())).collect(),
        }
    }

    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.ids.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn init_id(&self) -> &str {
        &self.ids[self.init]
    }

    pub fn state_id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    pub fn state_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).ok()
    }

    pub fn labels_at(&self, idx: usize) -> &Labels {
        &self.labels[idx]
    }

    pub fn labels_of(&self, id: &str) -> Option<&Labels> {
        self.index_of(id).map(|i| &self.labels[i])
    }

    /// Successors of `idx` in lexicographic id order.
    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.succ[idx]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.init]);
        let mut queue = VecDeque::from([self.init]);
        while let Some(s) = queue.pop_front() {
            for &t in &self.succ[s] {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn reachable_ids(&self) -> BTreeSet<String> {
        self.reachable().into_iter().map(|i| self.ids[i].clone()).collect()
    }

    /// First reachable state without successors, if any.
    pub fn deadlock(&self) -> Option<usize> {
        self.reachable().into_iter().find(|&s| self.succ[s].is_empty())
    }

    pub fn is_total(&self) -> bool {
        self.deadlock().is_none()
    }

    pub fn ensure_total(&self) -> Result<(), ModelError> {
        match self.deadlock() {
            Some(s) => Err(ModelError::NotTotal(self.ids[s].clone())),
            None => Ok(()),
        }
    }

    /// Adds a self-loop to every reachable deadlock state.
    pub fn complete_total(&self) -> TransitionSystem {
        let mut out = self.clone();
        for s in self.reachable() {
            if out.succ[s].is_empty() {
                out.succ[s].push(s);
            }
        }
        out
    }

    /// Number of paths with exactly `length` states starting at the initial state.
    pub fn count_paths(&self, length: usize) -> u128 {
        if length == 0 {
            return 0;
        }
        // ways[s] = number of paths of the remaining length starting in s
        let mut ways = vec![1u128; self.ids.len()];
        for _ in 1..length {
            ways = self.succ.iter().map(|s| s.iter().fold(0u128, |acc, &t| acc.saturating_add(ways[t]))).collect();
        }
        ways[self.init]
    }

    /// Every path of exactly `length` states from the initial state, in
    /// lexicographic order of state ids.
    pub fn enumerate_paths(&self, length: usize, budget: u64) -> Result<PathEnumerator<'_>, ModelError> {
        if length == 0 {
            return Err(ModelError::ZeroLength);
        }
        self.ensure_total()?;
        let count = self.count_paths(length);
        if count > budget as u128 {
            return Err(ModelError::BudgetExceeded { count, budget });
        }
        Ok(PathEnumerator { model: self, length, stack: vec![(self.init, 0)], current: Vec::new() })
    }

    /// Random walk of `length` states; each successor is drawn uniformly with
    /// a ChaCha8 generator seeded by `seed`.
    pub fn sample_path(&self, length: usize, seed: u64) -> Result<Path, ModelError> {
        if length == 0 {
            return Err(ModelError::ZeroLength);
        }
        self.ensure_total()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![self.init];
        while states.len() < length {
            let succ = &self.succ[*states.last().unwrap()];
            states.push(succ[rng.random_range(0..succ.len())]);
        }
        Ok(Path::finite(states.into_iter().map(|s| self.ids[s].clone()).collect()))
    }

    /// Random lasso: a walk of `stem_hint` free steps, then a walk that stops
    /// as soon as it revisits a state seen after the free steps.
    pub fn sample_lasso(&self, stem_hint: usize, seed: u64) -> Result<Path, ModelError> {
        self.ensure_total()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![self.init];
        for _ in 0..stem_hint {
            let succ = &self.succ[*states.last().unwrap()];
            states.push(succ[rng.random_range(0..succ.len())]);
        }
        let start = states.len() - 1;
        let mut seen: BTreeMap<usize, usize> = BTreeMap::from([(states[start], start)]);
        loop {
            let succ = &self.succ[*states.last().unwrap()];
            let next = succ[rng.random_range(0..succ.len())];
            if let Some(&pos) = seen.get(&next) {
                let ids: Vec<String> = states.iter().map(|&s| self.ids[s].clone()).collect();
                return Ok(Path::lasso(ids[..pos].to_vec(), ids[pos..].to_vec()));
            }
            seen.insert(next, states.len());
            states.push(next);
        }
    }

    /// Label sequence of a path; errors if the path does not follow the
    /// transition relation or does not start at the initial state.
    pub fn check_path(&self, path: &Path) -> Result<Vec<usize>, ModelError> {
        let states = path.states();
        let first = states.first().ok_or(ModelError::EmptyPath)?;
        if first != self.init_id() {
            return Err(ModelError::WrongStart { expected: self.init_id().to_string(), found: first.clone() });
        }
        let idx: Vec<usize> = states
            .iter()
            .map(|s| self.index_of(s).ok_or_else(|| ModelError::UnknownState(s.clone())))
            .collect::<Result<_, _>>()?;
        let mut pairs: Vec<(usize, usize)> = idx.windows(2).map(|w| (w[0], w[1])).collect();
        if let PathKind::Lasso { stem_len, .. } = path.kind() {
            pairs.push((*idx.last().unwrap(), idx[*stem_len]));
        }
        for (a, b) in pairs {
            if !self.has_edge(a, b) {
                return Err(ModelError::MissingTransition { from: self.ids[a].clone(), to: self.ids[b].clone() });
            }
        }
        Ok(idx)
    }

    /// Labels along `path`, with lassos unrolled by `cycles` repetitions.
    pub fn path_labels(&self, path: &Path, cycles: usize) -> Result<Vec<Labels>, ModelError> {
        self.check_path(path)?;
        Ok(path.unrolled(cycles).iter().map(|s| self.labels_of(s).unwrap().clone()).collect())
    }

    /// Copy of the system with every `{a}` in atom names replaced by `agent`.
    pub fn ground(&self, agent: &str) -> TransitionSystem {
        let g = |a: &String| a.replace(AGENT_PLACEHOLDER, agent);
        TransitionSystem {
            atoms: self.atoms.iter().map(g).collect(),
            labels: self.labels.iter().map(|l| l.iter().map(g).collect()).collect(),
            ..self.clone()
        }
    }

    /// Synchronous product of the grounded copies of this template, one per
    /// agent: every agent moves on every step and labels are unioned. State
    /// ids join the component ids with `__`.
    pub fn synchronous_product(&self, agents: &[String], starts: &[usize]) -> TransitionSystem {
        let grounded: Vec<TransitionSystem> = agents.iter().map(|a| self.ground(a)).collect();
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut tuples = vec![starts.to_vec()];
        index.insert(starts.to_vec(), 0);
        let mut edges = Vec::new();
        let mut i = 0;
        while i < tuples.len() {
            let tuple = tuples[i].clone();
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for &s in &tuple {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        self.succ[s].iter().map(move |&t| {
                            let mut c = c.clone();
                            c.push(t);
                            c
                        })
                    })
                    .collect();
            }
            for next in combos {
                let j = *index.entry(next.clone()).or_insert_with(|| {
                    tuples.push(next);
                    tuples.len() - 1
                });
                edges.push((i, j));
            }
            i += 1;
        }
        let name = |t: &[usize]| t.iter().map(|&s| self.ids[s].as_str()).collect::<Vec<_>>().join("__");
        let desc = ModelDescription {
            atoms: grounded.iter().flat_map(|g| g.atoms.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect(),
            states: tuples
                .iter()
                .map(|t| StateDescription {
                    id: name(t),
                    labels: t
                        .iter()
                        .zip(&grounded)
                        .flat_map(|(&s, g)| g.labels[s].iter().cloned())
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                })
                .collect(),
            init: name(&tuples[0]),
            edges: edges.into_iter().map(|(a, b)| (name(&tuples[a]), name(&tuples[b]))).collect(),
        };
        TransitionSystem::from_description(&desc).expect("product of a valid system is valid")
    }
}

/// Lazy depth-first enumeration behind [`TransitionSystem::enumerate_paths`].
pub struct PathEnumerator<'a> {
    model: &'a TransitionSystem,
    length: usize,
    // (state, depth) frames still to visit
    stack: Vec<(usize, usize)>,
    current: Vec<usize>,
}

impl Iterator for PathEnumerator<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        while let Some((s, depth)) = self.stack.pop() {
            self.current.truncate(depth);
            self.current.push(s);
            if depth + 1 == self.length {
                return Some(Path::finite(self.current.iter().map(|&i| self.model.ids[i].clone()).collect()));
            }
            for &t in self.model.succ[s].iter().rev() {
                self.stack.push((t, depth + 1));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    FinitePrefix,
    Lasso { stem_len: usize, cycle_len: usize },
}

/// A run of a system: either a finite prefix or a lasso `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    states: Vec<String>,
    kind: PathKind,
}

/// Wire form of a lasso: `{"stem": [...], "cycle": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoDoc {
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

impl Path {
    pub fn finite(states: Vec<String>) -> Self {
        Path { states, kind: PathKind::FinitePrefix }
    }

    /// Panics if `cycle` is empty.
    pub fn lasso(stem: Vec<String>, cycle: Vec<String>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let kind = PathKind::Lasso { stem_len: stem.len(), cycle_len: cycle.len() };
        let mut states = stem;
        states.extend(cycle);
        Path { states, kind }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn is_lasso(&self) -> bool {
        matches!(self.kind, PathKind::Lasso { .. })
    }

    pub fn stem(&self) -> &[String] {
        match self.kind {
            PathKind::FinitePrefix => &self.states,
            PathKind::Lasso { stem_len, .. } => &self.states[..stem_len],
        }
    }

    pub fn cycle(&self) -> &[String] {
        match self.kind {
            PathKind::FinitePrefix => &[],
            PathKind::Lasso { stem_len, .. } => &self.states[stem_len..],
        }
    }

    /// State sequence with the cycle repeated `cycles` times (finite prefixes
    /// are returned as is).
    pub fn unrolled(&self, cycles: usize) -> Vec<String> {
        let mut out = self.stem().to_vec();
        for _ in 0..cycles {
            out.extend_from_slice(self.cycle());
        }
        out
    }

    pub fn to_lasso_doc(&self) -> Option<LassoDoc> {
        self.is_lasso().then(|| LassoDoc { stem: self.stem().to_vec(), cycle: self.cycle().to_vec() })
    }

    pub fn from_lasso_doc(doc: &LassoDoc) -> Option<Self> {
        (!doc.cycle.is_empty()).then(|| Path::lasso(doc.stem.clone(), doc.cycle.clone()))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PathKind::FinitePrefix => write!(f, "{}", self.states.join(" -> ")),
            PathKind::Lasso { .. } => {
                if !self.stem().is_empty() {
                    write!(f, "{} -> ", self.stem().join(" -> "))?;
                }
                write!(f, "({})^ω", self.cycle().join(" -> "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_formula;
    use crate::formula::{strictness, Strictness};

    fn chain() -> TransitionSystem {
        TransitionSystem::build(
            [],
            [("s0", &[][..]), ("s1", &[][..]), ("s2", &[][..])],
            "s0",
            [("s0", "s1"), ("s1", "s2")],
        )
        .unwrap()
    }

    fn ids(m: &TransitionSystem, set: BTreeSet<usize>) -> Vec<&str> {
        set.into_iter().map(|i| m.state_id(i)).collect()
    }

    #[test]
    fn validate_reports_defects() {
        let mut desc = chain().to_description();
        assert!(validate(&desc).is_empty());
        desc.edges.push(("s2".into(), "s9".into()));
        desc.states[0].labels.push("ghost".into());
        let defects = validate(&desc);
        assert_eq!(defects.len(), 2);
        assert!(defects.iter().any(|d| d.to_string().contains("unknown state `s9`")));
        assert!(defects.iter().any(|d| d.to_string().contains("unknown atom `ghost`")));
        desc.init = "nowhere".into();
        assert!(validate(&desc).contains(&ModelDefect::MissingInit { init: "nowhere".into() }));
    }

    #[test]
    fn reachability() {
        let single = TransitionSystem::build([], [("s0", &[][..])], "s0", []).unwrap();
        assert_eq!(ids(&single, single.reachable()), ["s0"]);
        let m = chain();
        assert_eq!(ids(&m, m.reachable()), ["s0", "s1", "s2"]);
        let m = TransitionSystem::build([], [("s0", &[][..]), ("s1", &[][..]), ("s2", &[][..])], "s0", [("s0", "s1")])
            .unwrap();
        assert_eq!(ids(&m, m.reachable()), ["s0", "s1"]);
    }

    #[test]
    fn totality_and_completion() {
        let looped = TransitionSystem::build([], [("s0", &[][..])], "s0", [("s0", "s0")]).unwrap();
        assert!(looped.is_total());
        let m = TransitionSystem::build([], [("s0", &[][..]), ("s1", &[][..])], "s0", [("s0", "s1")]).unwrap();
        assert!(!m.is_total());
        assert_eq!(m.ensure_total(), Err(ModelError::NotTotal("s1".into())));
        let done = m.complete_total();
        assert!(done.is_total());
        assert!(done.has_edge(1, 1));
        assert_eq!(done.complete_total(), done);
        assert_eq!(looped.complete_total(), looped);
    }

    #[test]
    fn enumeration_examples() {
        let looped = TransitionSystem::build([], [("s0", &[][..])], "s0", [("s0", "s0")]).unwrap();
        let paths: Vec<Path> = looped.enumerate_paths(3, DEFAULT_PATH_BUDGET).unwrap().collect();
        assert_eq!(paths, vec![Path::finite(vec!["s0".into(); 3])]);

        let fork = TransitionSystem::build(
            [],
            [("s0", &[][..]), ("s1", &[][..]), ("s2", &[][..])],
            "s0",
            [("s0", "s1"), ("s0", "s2"), ("s1", "s1"), ("s2", "s2")],
        )
        .unwrap();
        let paths: Vec<Vec<String>> =
            fork.enumerate_paths(2, DEFAULT_PATH_BUDGET).unwrap().map(|p| p.states().to_vec()).collect();
        assert_eq!(paths, vec![vec!["s0", "s1"], vec!["s0", "s2"]]);

        let names = ["s0", "s1", "s2"];
        let complete = TransitionSystem::build(
            [],
            names.iter().map(|n| (*n, &[][..])),
            "s0",
            names.iter().flat_map(|a| names.iter().map(move |b| (*a, *b))),
        )
        .unwrap();
        assert_eq!(complete.enumerate_paths(3, DEFAULT_PATH_BUDGET).unwrap().count(), 9);
        assert!(matches!(complete.enumerate_paths(20, 1000), Err(ModelError::BudgetExceeded { .. })));
    }

    #[test]
    fn enumeration_requires_totality() {
        assert_eq!(chain().enumerate_paths(2, 10).err(), Some(ModelError::NotTotal("s2".into())));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = chain().complete_total();
        for seed in 0..5 {
            assert_eq!(m.sample_path(4, seed).unwrap().states(), ["s0", "s1", "s2", "s2"]);
        }
        let fork = TransitionSystem::build(
            [],
            [("s0", &[][..]), ("s1", &[][..]), ("s2", &[][..])],
            "s0",
            [("s0", "s1"), ("s0", "s2"), ("s1", "s0"), ("s2", "s0")],
        )
        .unwrap();
        assert_eq!(fork.sample_path(10, 42).unwrap(), fork.sample_path(10, 42).unwrap());
        let distinct: BTreeSet<Vec<String>> =
            (0..100).map(|seed| fork.sample_path(6, seed).unwrap().states().to_vec()).collect();
        assert!(distinct.len() >= 2);
    }

    #[test]
    fn sampled_lassos_are_valid() {
        let fork = TransitionSystem::build(
            [],
            [("s0", &[][..]), ("s1", &[][..]), ("s2", &[][..])],
            "s0",
            [("s0", "s1"), ("s0", "s2"), ("s1", "s0"), ("s2", "s2")],
        )
        .unwrap();
        for seed in 0..50 {
            let lasso = fork.sample_lasso((seed % 4) as usize, seed).unwrap();
            assert!(lasso.is_lasso());
            fork.check_path(&lasso).unwrap();
        }
    }

    #[test]
    fn check_path_rejects_bad_paths() {
        let m = chain();
        assert!(m.check_path(&Path::finite(vec!["s0".into(), "s1".into()])).is_ok());
        assert!(matches!(
            m.check_path(&Path::finite(vec!["s0".into(), "s2".into()])),
            Err(ModelError::MissingTransition { .. })
        ));
        assert!(matches!(m.check_path(&Path::finite(vec!["s1".into()])), Err(ModelError::WrongStart { .. })));
        assert_eq!(m.check_path(&Path::finite(vec![])), Err(ModelError::EmptyPath));
    }

    #[test]
    fn strictness_examples() {
        let road = TransitionSystem::build(
            ["inRoad", "trafficHigh"],
            [("s0", &["inRoad"][..]), ("s1", &["inRoad", "trafficHigh"][..])],
            "s0",
            [("s0", "s1"), ("s1", "s0")],
        )
        .unwrap();
        let f = parse_formula("inRoad & trafficHigh").unwrap();
        let g = parse_formula("inRoad").unwrap();
        assert_eq!(strictness(&f, &g, &road).unwrap(), Strictness::StrictlyStricter);
        assert_eq!(strictness(&g, &f, &road).unwrap(), Strictness::StrictlyLessStrict);
        assert_eq!(strictness(&f, &f, &road).unwrap(), Strictness::Equivalent);

        let ab = TransitionSystem::build(
            ["a", "b"],
            [("s0", &["a"][..]), ("s1", &["b"][..])],
            "s0",
            [("s0", "s1"), ("s1", "s1")],
        )
        .unwrap();
        let (a, b) = (parse_formula("a").unwrap(), parse_formula("b").unwrap());
        assert_eq!(strictness(&a, &b, &ab).unwrap(), Strictness::Incomparable);
    }

    #[test]
    fn product_of_two_agents() {
        let template = TransitionSystem::build(
            ["at_{a}"],
            [("home", &[][..]), ("there", &["at_{a}"][..])],
            "home",
            [("home", "there"), ("there", "home")],
        )
        .unwrap();
        let agents = vec!["c1".to_string(), "c2".to_string()];
        let joint = template.synchronous_product(&agents, &[0, 1]);
        assert_eq!(joint.num_states(), 2);
        assert_eq!(joint.init_id(), "home__there");
        assert_eq!(joint.labels_of("home__there").unwrap(), &Labels::from(["at_c2".to_string()]));
        assert!(joint.is_total());
    }
}
