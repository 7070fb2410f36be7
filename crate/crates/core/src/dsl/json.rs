//! JSON formats: models (`.ts.json`), paths, scenarios (`.scenario.json`)
//! and run logs (`.runlog.jsonl`).
//!
//! Readers walk the parsed value by hand so that every defect is reported
//! with its JSON path, not just the first one serde trips over.

use std::collections::BTreeMap;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde_json::{json, Map, Value};

use super::{parse_formula, parse_norms, render_formula, render_norm, DslError, DslResult};
use crate::formula::{Formula, Labels};
use crate::model::{validate, ModelDefect, ModelDescription, Path, StateDescription, TransitionSystem};
use crate::norms::NormSet;
use crate::revision::CandidatePool;
use crate::supervision::{
    steps_within, AgentSpec, Enforcement, LogLine, Objective, ObjectiveKind, RunLog, Scenario, Thresholds,
};

pub const FORMAT_VERSION: u32 = 1;

struct Reader {
    errors: Vec<DslError>,
}

fn at(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.to_string()
    }
}

impl Reader {
    fn new() -> Self {
        Reader { errors: Vec::new() }
    }

    fn err(&mut self, path: &str, msg: impl Into<String>) {
        self.errors.push(DslError::schema(at(path), msg));
    }

    fn finish<T>(self, value: Option<T>) -> DslResult<T> {
        match value {
            Some(v) if self.errors.is_empty() => Ok(v),
            _ if self.errors.is_empty() => Err(vec![DslError::schema("/", "invalid document")]),
            _ => Err(self.errors),
        }
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v {
            Value::Object(m) => Some(m),
            _ => {
                self.err(path, "expected an object");
                None
            }
        }
    }

    fn array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Vec<Value>> {
        match v {
            Value::Array(a) => Some(a),
            _ => {
                self.err(path, "expected an array");
                None
            }
        }
    }

    fn field<'v>(&mut self, m: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let v = m.get(key).filter(|v| !v.is_null());
        if v.is_none() {
            self.err(path, format!("missing field `{key}`"));
        }
        v
    }

    fn known_keys(&mut self, m: &Map<String, Value>, allowed: &[&str], path: &str) {
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&format!("{path}/{k}"), format!("unknown field `{k}`"));
            }
        }
    }

    fn format(&mut self, m: &Map<String, Value>, path: &str) {
        if let Some(v) = m.get("format") {
            if v.as_u64() != Some(u64::from(FORMAT_VERSION)) {
                self.err(&format!("{path}/format"), format!("unsupported format version {v}"));
            }
        }
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.err(path, "expected a string");
                None
            }
        }
    }

    fn strings(&mut self, v: &Value, path: &str) -> Option<Vec<String>> {
        let items = self.array(v, path)?;
        let out: Vec<Option<String>> =
            items.iter().enumerate().map(|(i, x)| self.string(x, &format!("{path}/{i}"))).collect();
        out.into_iter().collect()
    }

    fn uint(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = v.as_u64();
        if n.is_none() {
            self.err(path, "expected a non-negative integer");
        }
        n
    }

    fn usize(&mut self, v: &Value, path: &str) -> Option<usize> {
        self.uint(v, path).and_then(|n| usize::try_from(n).ok())
    }

    fn float(&mut self, v: &Value, path: &str) -> Option<f64> {
        let n = v.as_f64();
        if n.is_none() {
            self.err(path, "expected a number");
        }
        n
    }

    /// Decimals are accepted as JSON numbers or strings.
    fn decimal(&mut self, v: &Value, path: &str) -> Option<Decimal> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => {
                self.err(path, "expected a decimal number");
                return None;
            }
        };
        let d = Decimal::from_str(&text).or_else(|_| Decimal::from_scientific(&text)).ok();
        if d.is_none() {
            self.err(path, format!("invalid decimal `{text}`"));
        }
        d
    }

    fn formula(&mut self, v: &Value, path: &str) -> Option<Formula> {
        let text = self.string(v, path)?;
        match parse_formula(&text) {
            Ok(f) => Some(f),
            Err(e) => {
                self.err(path, format!("column {}: expected {}, found {}", e.span.column, e.expected, e.found));
                None
            }
        }
    }
}

fn parse_json(text: &str) -> DslResult<Value> {
    serde_json::from_str(text).map_err(|e| {
        vec![DslError::Parse(super::ParseError::new(
            super::SourceSpan::new(e.line(), e.column(), 1),
            "valid JSON",
            e.to_string(),
        ))]
    })
}

fn defect_location(d: &ModelDefect, path: &str) -> String {
    let field = match d {
        ModelDefect::NoStates | ModelDefect::DuplicateState { .. } | ModelDefect::InvalidStateId { .. } => "states",
        ModelDefect::MissingInit { .. } => "init",
        ModelDefect::InvalidAtomName { .. } => "atoms",
        ModelDefect::UnknownState { .. } => "edges",
        ModelDefect::UnknownAtom { .. } => "states",
    };
    format!("{path}/{field}")
}

fn read_model(r: &mut Reader, v: &Value, path: &str) -> Option<TransitionSystem> {
    let m = r.object(v, path)?;
    r.known_keys(m, &["format", "atoms", "states", "init", "edges"], path);
    r.format(m, path);
    let atoms = r.field(m, "atoms", path).and_then(|v| r.strings(v, &format!("{path}/atoms")));
    let init = r.field(m, "init", path).and_then(|v| r.string(v, &format!("{path}/init")));
    let states = r.field(m, "states", path).and_then(|v| {
        let p = format!("{path}/states");
        let items = r.array(v, &p)?;
        let parsed: Vec<Option<StateDescription>> = items
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let sp = format!("{p}/{i}");
                let o = r.object(s, &sp)?;
                r.known_keys(o, &["id", "labels"], &sp);
                let id = r.field(o, "id", &sp).and_then(|v| r.string(v, &format!("{sp}/id")));
                let labels = match o.get("labels") {
                    Some(l) => r.strings(l, &format!("{sp}/labels")),
                    None => Some(Vec::new()),
                };
                Some(StateDescription { id: id?, labels: labels? })
            })
            .collect();
        parsed.into_iter().collect::<Option<Vec<_>>>()
    });
    let edges = r.field(m, "edges", path).and_then(|v| {
        let p = format!("{path}/edges");
        let items = r.array(v, &p)?;
        let parsed: Vec<Option<(String, String)>> = items
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let ep = format!("{p}/{i}");
                match r.strings(e, &ep)?.as_slice() {
                    [a, b] => Some((a.clone(), b.clone())),
                    _ => {
                        r.err(&ep, "an edge is a pair [from, to]");
                        None
                    }
                }
            })
            .collect();
        parsed.into_iter().collect::<Option<Vec<_>>>()
    });
    let desc = ModelDescription { atoms: atoms?, states: states?, init: init?, edges: edges? };
    let defects = validate(&desc);
    for d in &defects {
        r.err(&defect_location(d, path), d.to_string());
    }
    if !defects.is_empty() {
        return None;
    }
    TransitionSystem::from_description(&desc).ok()
}

pub fn parse_model(text: &str) -> DslResult<TransitionSystem> {
    let v = parse_json(text)?;
    let mut r = Reader::new();
    let m = read_model(&mut r, &v, "");
    r.finish(m)
}

fn model_value(m: &TransitionSystem) -> Value {
    let d = m.to_description();
    json!({
        "atoms": d.atoms,
        "states": d.states.iter().map(|s| json!({"id": s.id, "labels": s.labels})).collect::<Vec<_>>(),
        "init": d.init,
        "edges": d.edges.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
    })
}

fn with_format(v: Value) -> Value {
    let mut out = Map::new();
    out.insert("format".into(), json!(FORMAT_VERSION));
    if let Value::Object(m) = v {
        out.extend(m);
    }
    Value::Object(out)
}

/// Layout used for every JSON file: containers are broken over lines down to
/// two levels, anything deeper stays on one line.
fn layout(v: &Value) -> String {
    fn go(v: &Value, depth: usize, indent: &str, out: &mut String) {
        let inner = format!("{indent}  ");
        let expand = depth < 3
            && match v {
                Value::Object(m) => !m.is_empty(),
                Value::Array(a) => a.iter().any(|x| x.is_object() || x.is_array()),
                _ => false,
            };
        if !expand {
            out.push_str(&serde_json::to_string(v).expect("values serialize"));
            return;
        }
        match v {
            Value::Object(m) => {
                out.push_str("{\n");
                for (i, (k, x)) in m.iter().enumerate() {
                    out.push_str(&inner);
                    out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                    out.push_str(": ");
                    go(x, depth + 1, &inner, out);
                    out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
                }
                out.push_str(indent);
                out.push('}');
            }
            Value::Array(a) => {
                out.push_str("[\n");
                for (i, x) in a.iter().enumerate() {
                    out.push_str(&inner);
                    go(x, depth + 1, &inner, out);
                    out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
                }
                out.push_str(indent);
                out.push(']');
            }
            _ => unreachable!(),
        }
    }
    let mut out = String::new();
    go(v, 0, "", &mut out);
    out.push('\n');
    out
}

/// Canonical model text: states, atoms and edges sorted.
pub fn render_model(m: &TransitionSystem) -> String {
    layout(&with_format(model_value(m)))
}

/// Contents of a path file: a run of a model or a bare labelling trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathFile {
    /// `{"states": [...]}` or `{"stem": [...], "cycle": [...]}`
    Run(Path),
    /// `{"labels": [[...], ...]}`
    Trace(Vec<Labels>),
}

pub fn parse_path_file(text: &str) -> DslResult<PathFile> {
    let v = parse_json(text)?;
    let mut r = Reader::new();
    let out = (|| {
        let m = r.object(&v, "")?;
        r.known_keys(m, &["format", "states", "stem", "cycle", "labels"], "");
        r.format(m, "");
        if let Some(s) = m.get("states") {
            let states = r.strings(s, "/states")?;
            if states.is_empty() {
                r.err("/states", "path is empty");
                return None;
            }
            return Some(PathFile::Run(Path::finite(states)));
        }
        if let Some(l) = m.get("labels") {
            let items = r.array(l, "/labels")?;
            let trace: Vec<Option<Labels>> = items
                .iter()
                .enumerate()
                .map(|(i, x)| r.strings(x, &format!("/labels/{i}")).map(|v| v.into_iter().collect()))
                .collect();
            let trace: Vec<Labels> = trace.into_iter().collect::<Option<_>>()?;
            if trace.is_empty() {
                r.err("/labels", "trace is empty");
                return None;
            }
            return Some(PathFile::Trace(trace));
        }
        if m.contains_key("cycle") {
            let stem = match m.get("stem") {
                Some(s) => r.strings(s, "/stem")?,
                None => Vec::new(),
            };
            let cycle = r.strings(&m["cycle"], "/cycle")?;
            if cycle.is_empty() {
                r.err("/cycle", "lasso cycle is empty");
                return None;
            }
            return Some(PathFile::Run(Path::lasso(stem, cycle)));
        }
        r.err("", "expected one of `states`, `stem`/`cycle` or `labels`");
        None
    })();
    r.finish(out)
}

pub fn render_path_file(p: &PathFile) -> String {
    let v = match p {
        PathFile::Run(path) if path.is_lasso() => json!({"stem": path.stem(), "cycle": path.cycle()}),
        PathFile::Run(path) => json!({"states": path.states()}),
        PathFile::Trace(t) => json!({"labels": t}),
    };
    layout(&with_format(v))
}

fn read_objective(r: &mut Reader, v: &Value, path: &str, minutes_per_step: Option<Decimal>) -> Option<Objective> {
    let m = r.object(v, path)?;
    r.known_keys(m, &["id", "kind", "atom", "k", "max_minutes", "t"], path);
    let id = r.field(m, "id", path).and_then(|v| r.string(v, &format!("{path}/id")));
    let atom = r.field(m, "atom", path).and_then(|v| r.string(v, &format!("{path}/atom")));
    let kind = r.field(m, "kind", path).and_then(|v| r.string(v, &format!("{path}/kind")))?;
    let kind = match kind.as_str() {
        "max_consecutive" => match (m.get("k"), m.get("max_minutes")) {
            (Some(k), None) => {
                ObjectiveKind::MaxConsecutive { atom: atom?, k: r.usize(k, &format!("{path}/k"))?, max_minutes: None }
            }
            (None, Some(mm)) => {
                let minutes = r.decimal(mm, &format!("{path}/max_minutes"))?;
                let Some(k) = minutes_per_step.and_then(|mps| steps_within(minutes, mps)) else {
                    r.err(&format!("{path}/max_minutes"), "needs a positive `minutes_per_step` in the scenario");
                    return None;
                };
                ObjectiveKind::MaxConsecutive { atom: atom?, k, max_minutes: Some(minutes) }
            }
            _ => {
                r.err(path, "max_consecutive needs exactly one of `k`, `max_minutes`");
                return None;
            }
        },
        "always_below_count" => {
            let t = r.field(m, "t", path).and_then(|t| r.usize(t, &format!("{path}/t")));
            ObjectiveKind::AlwaysBelowCount { atom: atom?, t: t? }
        }
        "never_atom" => ObjectiveKind::NeverAtom { atom: atom? },
        other => {
            r.err(&format!("{path}/kind"), format!("unknown objective kind `{other}`"));
            return None;
        }
    };
    Some(Objective { id: id?, kind })
}

fn objective_value(o: &Objective) -> Value {
    match &o.kind {
        ObjectiveKind::MaxConsecutive { atom, k, max_minutes } => match max_minutes {
            Some(mm) => json!({"id": o.id, "kind": "max_consecutive", "atom": atom, "max_minutes": mm.to_string()}),
            None => json!({"id": o.id, "kind": "max_consecutive", "atom": atom, "k": k}),
        },
        ObjectiveKind::AlwaysBelowCount { atom, t } => {
            json!({"id": o.id, "kind": "always_below_count", "atom": atom, "t": t})
        }
        ObjectiveKind::NeverAtom { atom } => json!({"id": o.id, "kind": "never_atom", "atom": atom}),
    }
}

fn read_agent(r: &mut Reader, v: &Value, path: &str) -> Option<AgentSpec> {
    let m = r.object(v, path)?;
    r.known_keys(m, &["id", "start", "utilities", "sanction_sensitivity", "exploration"], path);
    let id = r.field(m, "id", path).and_then(|v| r.string(v, &format!("{path}/id")));
    let start = match m.get("start").filter(|v| !v.is_null()) {
        Some(s) => Some(r.string(s, &format!("{path}/start"))?),
        None => None,
    };
    let utilities = match m.get("utilities") {
        Some(u) => {
            let up = format!("{path}/utilities");
            let o = r.object(u, &up)?;
            let mut out = BTreeMap::new();
            let mut ok = true;
            for (k, x) in o {
                match r.float(x, &format!("{up}/{k}")) {
                    Some(f) => {
                        out.insert(k.clone(), f);
                    }
                    None => ok = false,
                }
            }
            ok.then_some(out)
        }
        None => Some(BTreeMap::new()),
    };
    let lambda =
        r.field(m, "sanction_sensitivity", path).and_then(|v| r.float(v, &format!("{path}/sanction_sensitivity")));
    let eps = match m.get("exploration") {
        Some(e) => r.float(e, &format!("{path}/exploration")),
        None => Some(0.0),
    };
    let agent = AgentSpec { id: id?, start, utilities: utilities?, sanction_sensitivity: lambda?, exploration: eps? };
    for (field, msg) in agent.range_defects() {
        r.err(&format!("{path}/{field}"), msg);
    }
    Some(agent)
}

fn read_norm_section(r: &mut Reader, v: &Value, path: &str) -> Option<NormSet> {
    let m = r.object(v, path)?;
    r.known_keys(m, &["id", "norms"], path);
    let id = r.field(m, "id", path).and_then(|v| r.string(v, &format!("{path}/id")));
    let texts = r.field(m, "norms", path).and_then(|v| r.strings(v, &format!("{path}/norms")))?;
    let mut norms = Vec::new();
    let mut ok = true;
    for (i, t) in texts.iter().enumerate() {
        match parse_norms(t) {
            Ok(set) => norms.extend(set.norms().iter().cloned()),
            Err(errs) => {
                ok = false;
                for e in errs {
                    r.err(&format!("{path}/norms/{i}"), e.to_string());
                }
            }
        }
    }
    if !ok {
        return None;
    }
    match NormSet::new(id?, norms) {
        Ok(s) => Some(s),
        Err(e) => {
            r.err(&format!("{path}/norms"), e.to_string());
            None
        }
    }
}

fn read_pool(r: &mut Reader, v: Option<&Value>, path: &str) -> Option<CandidatePool> {
    let Some(v) = v else {
        return Some(CandidatePool::default());
    };
    let m = r.object(v, path)?;
    r.known_keys(m, &["formulas", "sanctions"], path);
    let formulas = match m.get("formulas") {
        Some(f) => {
            let items = r.array(f, &format!("{path}/formulas"))?;
            let parsed: Vec<Option<Formula>> =
                items.iter().enumerate().map(|(i, x)| r.formula(x, &format!("{path}/formulas/{i}"))).collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        }
        None => Some(Vec::new()),
    };
    let sanctions = match m.get("sanctions") {
        Some(s) => {
            let items = r.array(s, &format!("{path}/sanctions"))?;
            let parsed: Vec<Option<Decimal>> =
                items.iter().enumerate().map(|(i, x)| r.decimal(x, &format!("{path}/sanctions/{i}"))).collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        }
        None => Some(Vec::new()),
    };
    Some(CandidatePool { formulas: formulas?, sanctions: sanctions? })
}

const SCENARIO_KEYS: &[&str] = &[
    "format",
    "name",
    "world",
    "agents",
    "norms",
    "objectives",
    "pool",
    "enforcement",
    "seed",
    "horizon",
    "window",
    "thresholds",
    "minutes_per_step",
];

fn read_scenario(r: &mut Reader, v: &Value) -> Option<Scenario> {
    let m = r.object(v, "")?;
    r.known_keys(m, SCENARIO_KEYS, "");
    r.format(m, "");
    let name = r.field(m, "name", "").and_then(|v| r.string(v, "/name"));
    let world = r.field(m, "world", "").and_then(|v| read_model(r, v, "/world"));
    let minutes_per_step =
        m.get("minutes_per_step").filter(|v| !v.is_null()).map(|x| r.decimal(x, "/minutes_per_step"));
    let agents = r.field(m, "agents", "").and_then(|v| {
        let items = r.array(v, "/agents")?;
        let parsed: Vec<Option<AgentSpec>> =
            items.iter().enumerate().map(|(i, a)| read_agent(r, a, &format!("/agents/{i}"))).collect();
        parsed.into_iter().collect::<Option<Vec<_>>>()
    });
    let norms = r.field(m, "norms", "").and_then(|v| read_norm_section(r, v, "/norms"));
    let mps = minutes_per_step.flatten();
    let objectives = match m.get("objectives") {
        Some(v) => r.array(v, "/objectives").and_then(|items| {
            let parsed: Vec<Option<Objective>> =
                items.iter().enumerate().map(|(i, o)| read_objective(r, o, &format!("/objectives/{i}"), mps)).collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        }),
        None => Some(Vec::new()),
    };
    let pool = read_pool(r, m.get("pool"), "/pool");
    let enforcement = match m.get("enforcement") {
        Some(e) => match r.string(e, "/enforcement").as_deref() {
            Some("sanctioning") => Some(Enforcement::Sanctioning),
            Some("regimentation") => Some(Enforcement::Regimentation),
            Some(other) => {
                r.err("/enforcement", format!("expected `sanctioning` or `regimentation`, found `{other}`"));
                None
            }
            None => None,
        },
        None => Some(Enforcement::Sanctioning),
    };
    let seed = r.field(m, "seed", "").and_then(|v| r.uint(v, "/seed"));
    let horizon = r.field(m, "horizon", "").and_then(|v| r.usize(v, "/horizon"));
    let window = r.field(m, "window", "").and_then(|v| r.usize(v, "/window"));
    let thresholds = r.field(m, "thresholds", "").and_then(|v| {
        let o = r.object(v, "/thresholds")?;
        r.known_keys(o, &["low", "high"], "/thresholds");
        let low = r.field(o, "low", "/thresholds").and_then(|x| r.float(x, "/thresholds/low"));
        let high = r.field(o, "high", "/thresholds").and_then(|x| r.float(x, "/thresholds/high"));
        Some(Thresholds { low: low?, high: high? })
    });
    let scenario = Scenario {
        name: name?,
        world: world?,
        agents: agents?,
        norms: norms?,
        objectives: objectives?,
        pool: pool?,
        enforcement: enforcement?,
        seed: seed?,
        horizon: horizon?,
        window: window?,
        thresholds: thresholds?,
        minutes_per_step: match minutes_per_step {
            Some(x) => Some(x?),
            None => None,
        },
    };
    for (loc, msg) in scenario.validate() {
        let e = DslError::schema(at(&loc), msg);
        if !r.errors.contains(&e) {
            r.errors.push(e);
        }
    }
    Some(scenario)
}

pub fn parse_scenario(text: &str) -> DslResult<Scenario> {
    let v = parse_json(text)?;
    let mut r = Reader::new();
    let s = read_scenario(&mut r, &v);
    r.finish(s)
}

pub fn render_scenario(s: &Scenario) -> String {
    let mut m = Map::new();
    m.insert("format".into(), json!(FORMAT_VERSION));
    m.insert("name".into(), json!(s.name));
    m.insert("world".into(), model_value(&s.world));
    let agents: Vec<Value> = s
        .agents
        .iter()
        .map(|a| {
            let mut o = Map::new();
            o.insert("id".into(), json!(a.id));
            if let Some(st) = &a.start {
                o.insert("start".into(), json!(st));
            }
            o.insert("utilities".into(), json!(a.utilities));
            o.insert("sanction_sensitivity".into(), json!(a.sanction_sensitivity));
            o.insert("exploration".into(), json!(a.exploration));
            Value::Object(o)
        })
        .collect();
    m.insert("agents".into(), Value::Array(agents));
    m.insert(
        "norms".into(),
        json!({"id": s.norms.id, "norms": s.norms.norms().iter().map(render_norm).collect::<Vec<_>>()}),
    );
    m.insert("objectives".into(), Value::Array(s.objectives.iter().map(objective_value).collect()));
    m.insert(
        "pool".into(),
        json!({
            "formulas": s.pool.formulas.iter().map(render_formula).collect::<Vec<_>>(),
            "sanctions": s.pool.sanctions.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        }),
    );
    m.insert(
        "enforcement".into(),
        json!(match s.enforcement {
            Enforcement::Sanctioning => "sanctioning",
            Enforcement::Regimentation => "regimentation",
        }),
    );
    m.insert("seed".into(), json!(s.seed));
    m.insert("horizon".into(), json!(s.horizon));
    m.insert("window".into(), json!(s.window));
    m.insert("thresholds".into(), json!({"low": s.thresholds.low, "high": s.thresholds.high}));
    if let Some(mps) = s.minutes_per_step {
        m.insert("minutes_per_step".into(), json!(mps.to_string()));
    }
    layout(&Value::Object(m))
}

/// One JSON object per line: a header, the step records, then the summary.
pub fn render_runlog(log: &RunLog) -> String {
    let mut out = String::new();
    let mut line = |l: &LogLine| {
        out.push_str(&serde_json::to_string(l).expect("log records serialize"));
        out.push('\n');
    };
    line(&LogLine::Header { format: FORMAT_VERSION });
    for r in &log.records {
        line(&LogLine::Step(r.clone()));
    }
    if let Some(s) = &log.summary {
        line(&LogLine::Summary(Box::new(s.clone())));
    }
    out
}

pub fn parse_runlog(text: &str) -> DslResult<RunLog> {
    let mut log = RunLog::default();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let loc = format!("line {}", i + 1);
        match serde_json::from_str::<LogLine>(raw) {
            Ok(LogLine::Header { format }) if format != FORMAT_VERSION => {
                errors.push(DslError::schema(loc, format!("unsupported format version {format}")));
            }
            Ok(LogLine::Header { .. }) => {}
            Ok(LogLine::Step(r)) => {
                if log.summary.is_some() {
                    errors.push(DslError::schema(loc.clone(), "step record after the summary"));
                }
                if r.step != log.records.len() {
                    errors
                        .push(DslError::schema(loc, format!("expected step {}, found {}", log.records.len(), r.step)));
                }
                log.records.push(r);
            }
            Ok(LogLine::Summary(s)) => {
                if log.summary.is_some() {
                    errors.push(DslError::schema(loc, "duplicate summary record"));
                }
                log.summary = Some(*s);
            }
            Err(e) => errors.push(DslError::schema(loc, e.to_string())),
        }
    }
    if errors.is_empty() {
        Ok(log)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"{"atoms":["inRoad"],"states":[{"id":"s0","labels":[]},{"id":"s1","labels":["inRoad"]}],"init":"s0","edges":[["s0","s1"],["s1","s1"]]}"#;

    #[test]
    fn model_round_trip() {
        let m = parse_model(MODEL).unwrap();
        let text = render_model(&m);
        assert!(text.starts_with("{\n  \"format\": 1,"));
        assert_eq!(parse_model(&text).unwrap(), m);
        assert_eq!(render_model(&parse_model(&text).unwrap()), text);
    }

    #[test]
    fn model_defects_are_all_reported() {
        let text = r#"{"atoms":["a"],"states":[{"id":"s0","labels":["b"]}],"init":"s9","edges":[["s0","s2"]]}"#;
        let errs = parse_model(text).unwrap_err();
        let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert_eq!(errs.len(), 3, "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("unknown atom `b`")));
        assert!(msgs.iter().any(|m| m.contains("unknown state `s2`")));
        assert!(msgs.iter().any(|m| m.contains("/init")));
    }

    #[test]
    fn schema_errors_have_paths() {
        let errs = parse_model(r#"{"atoms":"x","states":[{"labels":[]}],"edges":[["a"]],"extra":1}"#).unwrap_err();
        let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(msgs.contains(&"/atoms: expected an array".to_string()), "{msgs:?}");
        assert!(msgs.contains(&"/states/0: missing field `id`".to_string()), "{msgs:?}");
        assert!(msgs.contains(&"/: missing field `init`".to_string()), "{msgs:?}");
        assert!(msgs.contains(&"/edges/0: an edge is a pair [from, to]".to_string()), "{msgs:?}");
        assert!(msgs.contains(&"/extra: unknown field `extra`".to_string()), "{msgs:?}");
    }

    #[test]
    fn path_files() {
        for text in [r#"{"states":["s0","s1"]}"#, r#"{"stem":["s0"],"cycle":["s1"]}"#, r#"{"labels":[["a"],[]]}"#] {
            let p = parse_path_file(text).unwrap();
            assert_eq!(parse_path_file(&render_path_file(&p)).unwrap(), p);
        }
        assert!(parse_path_file(r#"{"states":[]}"#).is_err());
        assert!(parse_path_file("").is_err());
    }
}
