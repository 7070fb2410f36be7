//! Surface syntax: the formula grammar, the `.norm` text format, and the JSON
//! formats for models, scenarios and run logs.
//!
//! Formula grammar (`&` binds tighter than `|`, `!` tightest, both binary
//! operators left-associative):
//!
//! ```text
//! formula := disj
//! disj    := conj { "|" conj }
//! conj    := unary { "&" unary }
//! unary   := "!" unary | "(" formula ")" | "true" | "false" | IDENT
//! ```
//!
//! Norm files hold one block per norm:
//!
//! ```text
//! # format 1
//! set N;
//! norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }
//! ```

mod json;
mod lexer;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::model::is_identifier;
use crate::norms::{Deadline, Norm, NormKind, NormSet};
use lexer::{lex, Tok, Token};

pub use json::{
    parse_model, parse_path_file, parse_runlog, parse_scenario, render_model, render_path_file, render_runlog,
    render_scenario, PathFile, FORMAT_VERSION,
};

/// Location of a lexeme; line and column are 1-based and count characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan { file: "<input>".into(), line, column, length: length.max(1) }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, expected: impl Into<String>, found: impl Into<String>) -> Self {
        ParseError { span, expected: expected.into(), found: found.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, found {}", self.span, self.expected, self.found)
    }
}

impl std::error::Error for ParseError {}

/// Any defect reported while reading an input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum DslError {
    Parse(ParseError),
    Schema {
        /// Source location for text formats, JSON pointer-ish path for JSON.
        location: String,
        message: String,
    },
}

impl DslError {
    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        DslError::Schema { location: location.into(), message: message.into() }
    }

    pub fn message(&self) -> String {
        match self {
            DslError::Parse(p) => format!("expected {}, found {}", p.expected, p.found),
            DslError::Schema { message, .. } => message.clone(),
        }
    }

    /// Rewrites the file name of text spans.
    pub fn in_file(self, file: &str) -> Self {
        match self {
            DslError::Parse(mut p) => {
                p.span.file = file.to_string();
                DslError::Parse(p)
            }
            DslError::Schema { location, message } => {
                DslError::Schema { location: format!("{file}:{location}"), message }
            }
        }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslError::Parse(p) => p.fmt(f),
            DslError::Schema { location, message } => write!(f, "{location}: {message}"),
        }
    }
}

impl From<ParseError> for DslError {
    fn from(p: ParseError) -> Self {
        DslError::Parse(p)
    }
}

pub type DslResult<T> = Result<T, Vec<DslError>>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(self.span(), expected, self.peek().describe())
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<&'t Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, expected: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.span();
                self.bump();
                Ok((s, span))
            }
            _ => Err(self.error(expected)),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "true" => Formula::True,
                    "false" => Formula::False,
                    _ => Formula::Atom(s),
                })
            }
            _ => Err(self.error("operand")),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let (tokens, errors) = lex(text);
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    let mut p = Parser { tokens: &tokens, pos: 0 };
    let f = p.formula()?;
    match p.peek() {
        Tok::Eof => Ok(f),
        _ => Err(p.error("`&`, `|` or end of input")),
    }
}

/// Canonical text with the minimum parentheses needed to parse back to the
/// same tree.
pub fn render_formula(f: &Formula) -> String {
    fn prec(f: &Formula) -> u8 {
        match f {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            _ => 2,
        }
    }
    fn go(f: &Formula, min: u8, out: &mut String) {
        let wrap = prec(f) < min;
        if wrap {
            out.push('(');
        }
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Atom(a) => out.push_str(a),
            Formula::Not(x) => {
                out.push('!');
                go(x, 2, out);
            }
            Formula::And(a, b) => {
                go(a, 1, out);
                out.push_str(" & ");
                go(b, 2, out);
            }
            Formula::Or(a, b) => {
                go(a, 0, out);
                out.push_str(" | ");
                go(b, 1, out);
            }
        }
        if wrap {
            out.push(')');
        }
    }
    let mut out = String::new();
    go(f, 0, &mut out);
    out
}

fn render_deadline(d: &Deadline) -> String {
    match d {
        Deadline::Never => "never".into(),
        Deadline::At(Formula::Atom(a)) if a == "never" => "(never)".into(),
        Deadline::At(f) => render_formula(f),
    }
}

pub fn render_norm(n: &Norm) -> String {
    let verb = match n.kind {
        NormKind::Obligation => "oblige",
        NormKind::Prohibition => "forbid",
    };
    format!(
        "norm {} {{ when: {}; {}: {}; until: {}; sanction: {}; }}",
        n.id,
        render_formula(&n.cond),
        verb,
        render_formula(&n.target),
        render_deadline(&n.deadline),
        n.sanction
    )
}

pub fn render_norms(set: &NormSet) -> String {
    let mut out = format!("# format {FORMAT_VERSION}\nset {};\n", set.id);
    for n in set.norms() {
        out.push('\n');
        out.push_str(&render_norm(n));
        out.push('\n');
    }
    out
}

pub const DEFAULT_SET_ID: &str = "N";

#[derive(Default)]
struct NormDraft {
    id: String,
    span: Option<SourceSpan>,
    cond: Option<Formula>,
    target: Option<(NormKind, Formula)>,
    deadline: Option<Deadline>,
    sanction: Option<Decimal>,
}

fn check_format_header(text: &str) -> Option<DslError> {
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("format") {
                let v = words.next().unwrap_or("");
                if v != FORMAT_VERSION.to_string() {
                    return Some(DslError::schema(format!("{}:1", i + 1), format!("unsupported format version `{v}`")));
                }
                return None;
            }
            continue;
        }
        return None;
    }
    None
}

/// Parses a norm file, reporting every independent defect.
pub fn parse_norms(text: &str) -> DslResult<NormSet> {
    let (tokens, lex_errors) = lex(text);
    let mut errors: Vec<DslError> = lex_errors.into_iter().map(DslError::Parse).collect();
    errors.extend(check_format_header(text));
    let mut p = Parser { tokens: &tokens, pos: 0 };
    let mut set_id: Option<String> = None;
    let mut drafts: Vec<NormDraft> = Vec::new();

    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "set" => {
                p.bump();
                match p.ident("set id").and_then(|(id, span)| {
                    p.expect(Tok::Semi, "`;`")?;
                    Ok((id, span))
                }) {
                    Ok((id, span)) => {
                        if set_id.is_some() {
                            errors.push(DslError::schema(span.to_string(), "duplicate `set` declaration"));
                        }
                        set_id = Some(id);
                    }
                    Err(e) => {
                        errors.push(e.into());
                        recover_top(&mut p);
                    }
                }
            }
            Tok::Ident(kw) if kw == "norm" => {
                p.bump();
                match parse_norm_block(&mut p, &mut errors) {
                    Some(d) => drafts.push(d),
                    None => recover_top(&mut p),
                }
            }
            _ => {
                errors.push(p.error("`norm` or `set`").into());
                p.bump();
                recover_top(&mut p);
            }
        }
    }

    let mut norms = Vec::new();
    let mut seen = BTreeSet::new();
    for d in drafts {
        let at = d.span.as_ref().map(|s| s.to_string()).unwrap_or_default();
        if !seen.insert(d.id.clone()) {
            errors.push(DslError::schema(at.clone(), format!("duplicate id {}", d.id)));
        }
        let mut missing =
            |what: &str| errors.push(DslError::schema(at.clone(), format!("norm {}: missing `{what}`", d.id)));
        if d.cond.is_none() {
            missing("when");
        }
        if d.target.is_none() {
            missing("forbid` or `oblige");
        }
        if d.deadline.is_none() {
            missing("until");
        }
        if d.sanction.is_none() {
            missing("sanction");
        }
        if let (Some(cond), Some((kind, target)), Some(deadline), Some(sanction)) =
            (d.cond, d.target, d.deadline, d.sanction)
        {
            norms.push(Norm { id: d.id, cond, kind, target, deadline, sanction });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    NormSet::new(set_id.unwrap_or_else(|| DEFAULT_SET_ID.to_string()), norms)
        .map_err(|e| vec![DslError::schema("<input>", e.to_string())])
}

/// Skips to the next top-level `norm`/`set` keyword.
fn recover_top(p: &mut Parser<'_>) {
    loop {
        match p.peek() {
            Tok::Eof => return,
            Tok::Ident(k) if k == "norm" || k == "set" => return,
            _ => {
                p.bump();
            }
        }
    }
}

fn parse_norm_block(p: &mut Parser<'_>, errors: &mut Vec<DslError>) -> Option<NormDraft> {
    let (id, span) = match p.ident("norm id") {
        Ok(x) => x,
        Err(e) => {
            errors.push(e.into());
            return None;
        }
    };
    if !is_identifier(&id) {
        errors.push(DslError::schema(span.to_string(), format!("invalid norm id `{id}`")));
    }
    if let Err(e) = p.expect(Tok::LBrace, "`{`") {
        errors.push(e.into());
        return None;
    }
    let mut draft = NormDraft { id, span: Some(span), ..Default::default() };
    loop {
        match p.peek().clone() {
            Tok::RBrace => {
                p.bump();
                return Some(draft);
            }
            Tok::Eof => {
                errors.push(p.error("`}`").into());
                return Some(draft);
            }
            Tok::Ident(field) => {
                let field_span = p.span();
                p.bump();
                if let Err(e) = parse_field(p, &field, &field_span, &mut draft, errors) {
                    errors.push(e.into());
                    // skip the rest of this field
                    while !matches!(p.peek(), Tok::Semi | Tok::RBrace | Tok::Eof) {
                        p.bump();
                    }
                    if *p.peek() == Tok::Semi {
                        p.bump();
                    }
                }
            }
            _ => {
                errors.push(p.error("field name or `}`").into());
                while !matches!(p.peek(), Tok::Semi | Tok::RBrace | Tok::Eof) {
                    p.bump();
                }
                if *p.peek() == Tok::Semi {
                    p.bump();
                }
            }
        }
    }
}

fn parse_field(
    p: &mut Parser<'_>,
    field: &str,
    span: &SourceSpan,
    draft: &mut NormDraft,
    errors: &mut Vec<DslError>,
) -> Result<(), ParseError> {
    p.expect(Tok::Colon, "`:`")?;
    let dup = |errors: &mut Vec<DslError>, what: &str| {
        errors.push(DslError::schema(span.to_string(), format!("norm {}: duplicate `{what}`", draft.id)));
    };
    match field {
        "when" => {
            let f = p.formula()?;
            if draft.cond.is_some() {
                dup(errors, field);
            }
            draft.cond = Some(f);
        }
        "forbid" | "oblige" => {
            let f = p.formula()?;
            if draft.target.is_some() {
                errors.push(DslError::schema(
                    span.to_string(),
                    format!("norm {}: exactly one of `forbid`/`oblige` is allowed", draft.id),
                ));
            }
            let kind = if field == "forbid" { NormKind::Prohibition } else { NormKind::Obligation };
            draft.target = Some((kind, f));
        }
        "until" => {
            let is_never = matches!(p.peek(), Tok::Ident(s) if s == "never")
                && matches!(p.tokens.get(p.pos + 1).map(|t| &t.tok), Some(Tok::Semi));
            let d = if is_never {
                p.bump();
                Deadline::Never
            } else {
                Deadline::At(p.formula()?)
            };
            if draft.deadline.is_some() {
                dup(errors, field);
            }
            draft.deadline = Some(d);
        }
        "sanction" => {
            let span = p.span();
            let value = match p.peek().clone() {
                Tok::Number(n) => {
                    p.bump();
                    Decimal::from_str(&n).map_err(|_| ParseError::new(span, "decimal amount", format!("`{n}`")))?
                }
                _ => return Err(p.error("non-negative decimal amount")),
            };
            if draft.sanction.is_some() {
                dup(errors, field);
            }
            draft.sanction = Some(value);
        }
        other => {
            return Err(ParseError::new(
                span.clone(),
                "one of `when`, `forbid`, `oblige`, `until`, `sanction`",
                format!("`{other}`"),
            ))
        }
    }
    p.expect(Tok::Semi, "`;`")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(
            parse_formula("inRoad & trafficHigh").unwrap(),
            Formula::and(Formula::atom("inRoad"), Formula::atom("trafficHigh"))
        );
        assert_eq!(
            parse_formula("a | b & c").unwrap(),
            Formula::or(Formula::atom("a"), Formula::and(Formula::atom("b"), Formula::atom("c")))
        );
        assert_eq!(
            parse_formula("!a & b").unwrap(),
            Formula::and(Formula::not(Formula::atom("a")), Formula::atom("b"))
        );
        assert_eq!(
            parse_formula("(a | b) & c").unwrap(),
            Formula::and(Formula::or(Formula::atom("a"), Formula::atom("b")), Formula::atom("c"))
        );
        assert_eq!(parse_formula("  true|false ").unwrap(), Formula::or(Formula::True, Formula::False));
    }

    #[test]
    fn missing_operand_error() {
        let e = parse_formula("a &").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (1, 4));
        assert_eq!(e.expected, "operand");
        assert_eq!(e.found, "end of input");
    }

    #[test]
    fn trailing_garbage_error() {
        let e = parse_formula("a b").unwrap_err();
        assert_eq!(e.span.column, 3);
        assert!(parse_formula("a $ b").is_err());
        assert!(parse_formula("(a").is_err());
    }

    #[test]
    fn render_is_minimal_and_reparses() {
        for s in ["a | b & c", "(a | b) & c", "a | (b | c)", "a & (b & c)", "!(a & b)", "!!a", "a | b | c"] {
            let f = parse_formula(s).unwrap();
            assert_eq!(render_formula(&f), s);
            assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f);
        }
    }

    #[test]
    fn parse_n1_block() {
        let set =
            parse_norms("norm n1 { when: inRoad; forbid: speedAbove15; until: never; sanction: 10000; }").unwrap();
        let n = &set.norms()[0];
        assert_eq!(n.id, "n1");
        assert_eq!(n.kind, NormKind::Prohibition);
        assert_eq!(n.cond, Formula::atom("inRoad"));
        assert_eq!(n.target, Formula::atom("speedAbove15"));
        assert_eq!(n.deadline, Deadline::Never);
        assert_eq!(n.sanction, Decimal::from(10000));
        assert_eq!(set.id, DEFAULT_SET_ID);
    }

    #[test]
    fn parse_n2_block_with_header() {
        let text = "# format 1\nset road;\n# comment\nnorm n2 { when: inRoad; oblige: speedbelow50; until: outOfRoad; sanction: 5; }\n";
        let set = parse_norms(text).unwrap();
        assert_eq!(set.id, "road");
        let n = &set.norms()[0];
        assert_eq!(n.kind, NormKind::Obligation);
        assert_eq!(n.deadline, Deadline::At(Formula::atom("outOfRoad")));
        assert_eq!(parse_norms(&render_norms(&set)).unwrap(), set);
    }

    #[test]
    fn duplicate_id_reported() {
        let text = "norm n1 { when: a; forbid: b; until: never; sanction: 1; }\nnorm n1 { when: a; forbid: b; until: never; sanction: 1; }";
        let errs = parse_norms(text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message().contains("duplicate id n1"));
    }

    #[test]
    fn reports_all_defects() {
        let text = "norm a { when: x &; forbid: y; until: never; sanction: 1; }\n\
                    norm b { when: x; forbid: y; oblige: z; until: never; sanction: 1; }\n\
                    norm c { when: x; forbid: y; sanction: 1; }\n\
                    norm d { when: x; forbid: y; until: never; sanction: -3; }";
        let errs = parse_norms(text).unwrap_err();
        let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(msgs.iter().any(|m| m.contains("expected operand")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("exactly one of")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("norm c: missing `until`")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("`-`")), "{msgs:?}");
        // norm a also lacks its `when` after the failed field
        assert!(msgs.iter().any(|m| m.contains("norm a: missing `when`")), "{msgs:?}");
    }

    #[test]
    fn unsupported_version() {
        let errs = parse_norms("# format 2\nnorm n { when: a; forbid: b; until: never; sanction: 1; }").unwrap_err();
        assert!(errs[0].message().contains("unsupported format version"));
    }

    #[test]
    fn template_atoms_lex() {
        let f = parse_formula("inRoad_{a} & speed_{a}_fast").unwrap();
        assert_eq!(f.atoms().into_iter().collect::<Vec<_>>(), ["inRoad_{a}", "speed_{a}_fast"]);
    }
}
