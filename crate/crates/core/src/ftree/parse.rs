//! Line-oriented parser for the `.ft` model DSL.
//!
//! Grammar, one statement per line:
//!
//! ```text
//! event <id> "<name>" p=<float>
//! gate  <id> <AND|OR> <input> <input> [...]
//! top   <id>
//! ```
//!
//! `#` starts a comment (outside quoted names); blank lines are ignored.
//! Ids are whitespace-free tokens without `"` or `#`. The parser is total:
//! any byte string yields either a tree or positioned diagnostics, never a
//! panic. A successful parse has also passed full structural validation.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{has_errors, validate, BasicEvent, Diagnostic, FaultTree, Gate, GateKind};

/// One lexed token with its 1-based column.
#[derive(Debug, PartialEq)]
enum Token<'a> {
    Word(&'a str),
    Quoted(String),
}

/// Split a line into tokens, respecting one level of double quotes.
/// Returns positioned diagnostics for unterminated quotes.
fn lex_line(line: &str, line_no: u32) -> Result<Vec<(Token<'_>, u32)>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    let mut column = 0u32;
    while let Some((start, c)) = chars.next() {
        column += 1;
        if c.is_whitespace() {
            continue;
        }
        let start_col = column;
        if c == '"' {
            let mut name = String::new();
            let mut closed = false;
            for (_, qc) in chars.by_ref() {
                column += 1;
                if qc == '"' {
                    closed = true;
                    break;
                }
                name.push(qc);
            }
            if !closed {
                return Err(Diagnostic::error("unterminated quoted name".to_owned())
                    .at(line_no, start_col));
            }
            tokens.push((Token::Quoted(name), start_col));
        } else {
            let mut end = start + c.len_utf8();
            while let Some(&(next_start, next)) = chars.peek() {
                if next.is_whitespace() || next == '"' {
                    break;
                }
                chars.next();
                column += 1;
                end = next_start + next.len_utf8();
            }
            tokens.push((Token::Word(&line[start..end]), start_col));
        }
    }
    Ok(tokens)
}

/// Strip a `#` comment, ignoring `#` inside a quoted name.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

struct LineParser<'a> {
    tokens: Vec<(Token<'a>, u32)>,
    next: usize,
    line_no: u32,
}

impl<'a> LineParser<'a> {
    fn word(&mut self, what: &str) -> Result<(&'a str, u32), Diagnostic> {
        match self.tokens.get(self.next) {
            Some((Token::Word(w), col)) => {
                self.next += 1;
                Ok((w, *col))
            }
            Some((Token::Quoted(_), col)) => Err(Diagnostic::error(format!(
                "expected {what}, found quoted text"
            ))
            .at(self.line_no, *col)),
            None => Err(Diagnostic::error(format!("expected {what} at end of line"))
                .at(self.line_no, self.end_column())),
        }
    }

    fn quoted(&mut self, what: &str) -> Result<(String, u32), Diagnostic> {
        match self.tokens.get(self.next) {
            Some((Token::Quoted(q), col)) => {
                let col = *col;
                let q = q.clone();
                self.next += 1;
                Ok((q, col))
            }
            Some((Token::Word(w), col)) => Err(Diagnostic::error(format!(
                "expected {what} in double quotes, found `{w}`"
            ))
            .at(self.line_no, *col)),
            None => Err(Diagnostic::error(format!("expected {what} at end of line"))
                .at(self.line_no, self.end_column())),
        }
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        match self.tokens.get(self.next) {
            None => Ok(()),
            Some((token, col)) => {
                let shown = match token {
                    Token::Word(w) => (*w).to_owned(),
                    Token::Quoted(q) => format!("\"{q}\""),
                };
                Err(Diagnostic::error(format!("unexpected trailing token `{shown}`"))
                    .at(self.line_no, *col))
            }
        }
    }

    fn end_column(&self) -> u32 {
        self.tokens
            .last()
            .map(|(_, col)| col + 1)
            .unwrap_or(1)
    }
}

/// Parse DSL source into a validated [`FaultTree`].
///
/// Returns the tree only when no error-severity diagnostic exists; callers
/// wanting warnings (e.g. unreachable definitions) run [`validate`] on the
/// result. Diagnostics carry 1-based line/column positions where known.
pub fn parse_model(text: &str) -> Result<FaultTree, Vec<Diagnostic>> {
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let mut events: Vec<BasicEvent> = Vec::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut top: Option<(String, u32)> = None;
    let mut seen_ids: BTreeSet<String> = BTreeSet::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let line = strip_comment(raw_line);
        let tokens = match lex_line(line, line_no) {
            Ok(tokens) => tokens,
            Err(diag) => {
                diagnostics.push(diag);
                continue;
            }
        };
        if tokens.is_empty() {
            continue;
        }
        let mut parser = LineParser {
            tokens,
            next: 0,
            line_no,
        };
        let statement = match parser.word("a statement keyword") {
            Ok((word, col)) => (word, col),
            Err(diag) => {
                diagnostics.push(diag);
                continue;
            }
        };
        let result = match statement.0 {
            "event" => parse_event(&mut parser, &mut events, &mut seen_ids),
            "gate" => parse_gate(&mut parser, &mut gates, &mut seen_ids),
            "top" => parse_top(&mut parser, &mut top),
            other => Err(Diagnostic::error(format!(
                "unknown statement `{other}` (expected `event`, `gate`, or `top`)"
            ))
            .at(line_no, statement.1)),
        };
        if let Err(diag) = result {
            diagnostics.push(diag);
        }
    }

    let top_id = match top {
        Some((id, _)) => id,
        None => {
            diagnostics.push(Diagnostic::error("missing `top` declaration".to_owned()));
            String::new()
        }
    };

    let tree = FaultTree {
        events,
        gates,
        top: top_id,
    };

    if has_errors(&diagnostics) {
        return Err(diagnostics);
    }

    // Semantic pass: unresolved references, arity, cycles, prior ranges.
    let semantic: Vec<Diagnostic> = validate(&tree)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if semantic.is_empty() {
        Ok(tree)
    } else {
        diagnostics.extend(semantic);
        Err(diagnostics)
    }
}

fn check_new_id(
    id: &str,
    col: u32,
    line_no: u32,
    seen: &mut BTreeSet<String>,
) -> Result<(), Diagnostic> {
    if id.contains('"') || id.contains('#') {
        return Err(Diagnostic::error(format!(
            "invalid id `{id}`: ids cannot contain '\"' or '#'"
        ))
        .at(line_no, col));
    }
    if !seen.insert(id.to_owned()) {
        return Err(Diagnostic::error(format!(
            "duplicate id `{id}` (events and gates share one namespace)"
        ))
        .at(line_no, col)
        .about(id));
    }
    Ok(())
}

fn parse_event(
    parser: &mut LineParser<'_>,
    events: &mut Vec<BasicEvent>,
    seen: &mut BTreeSet<String>,
) -> Result<(), Diagnostic> {
    let line_no = parser.line_no;
    let (id, id_col) = parser.word("an event id")?;
    let (name, _) = parser.quoted("the event name")?;
    let (ptok, pcol) = parser.word("`p=<probability>`")?;
    parser.finish()?;
    check_new_id(id, id_col, line_no, seen)?;
    let Some(value) = ptok.strip_prefix("p=") else {
        return Err(Diagnostic::error(format!(
            "expected `p=<probability>`, found `{ptok}`"
        ))
        .at(line_no, pcol));
    };
    let prior: f64 = value.parse().map_err(|_| {
        Diagnostic::error(format!("`{value}` is not a number")).at(line_no, pcol)
    })?;
    if !prior.is_finite() || !(0.0..=1.0).contains(&prior) {
        return Err(Diagnostic::error(format!(
            "prior {value} is outside [0, 1]"
        ))
        .at(line_no, pcol)
        .about(id));
    }
    events.push(BasicEvent {
        id: id.to_owned(),
        name,
        prior,
    });
    Ok(())
}

fn parse_gate(
    parser: &mut LineParser<'_>,
    gates: &mut Vec<Gate>,
    seen: &mut BTreeSet<String>,
) -> Result<(), Diagnostic> {
    let line_no = parser.line_no;
    let (id, id_col) = parser.word("a gate id")?;
    let (kind_word, kind_col) = parser.word("`AND` or `OR`")?;
    let kind = match kind_word {
        "AND" => GateKind::And,
        "OR" => GateKind::Or,
        other => {
            return Err(Diagnostic::error(format!(
                "unknown gate kind `{other}` (expected `AND` or `OR`)"
            ))
            .at(line_no, kind_col))
        }
    };
    let mut inputs = Vec::new();
    let (first, _) = parser.word("at least one gate input")?;
    inputs.push(first.to_owned());
    while parser.tokens.len() > parser.next {
        let (input, _) = parser.word("a gate input")?;
        inputs.push(input.to_owned());
    }
    check_new_id(id, id_col, line_no, seen)?;
    gates.push(Gate {
        id: id.to_owned(),
        kind,
        inputs,
    });
    Ok(())
}

fn parse_top(
    parser: &mut LineParser<'_>,
    top: &mut Option<(String, u32)>,
) -> Result<(), Diagnostic> {
    let line_no = parser.line_no;
    let (id, col) = parser.word("the top id")?;
    parser.finish()?;
    if let Some((_, first_line)) = top {
        return Err(Diagnostic::error(format!(
            "duplicate `top` declaration (first on line {first_line})"
        ))
        .at(line_no, col));
    }
    *top = Some((id.to_owned(), line_no));
    Ok(())
}
