//! The Pythonic statement subset used in prompts and completions.
//!
//! ```text
//! line    := ws* (call | list | summary) ws*
//! call    := ident ws* "(" ws* [string (ws* "," ws* string)*] ws* ")"
//! list    := ident ws* "=" ws* "[" ws* [string (ws* "," ws* string)*] ws* "]"
//! summary := "#" ws* "Summary:" text
//! string  := '"' [^"\n]* '"'
//! ```
//!
//! Strings carry no escape sequences; names are validated to exclude quotes.

use std::fmt;

use tidyup_core::{NameError, ObjectName, Placement, Primitive, PrimitiveChoice, ReceptacleName};

pub const OBJECTS: &str = "objects";
pub const RECEPTACLES: &str = "receptacles";
pub const SUMMARY_MARKER: &str = "# Summary:";

/// One recognized DSL line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DslStatement {
    PickAndPlace2(ObjectName, ReceptacleName),
    PickAndPlace1(ObjectName),
    PickAndToss1(ObjectName),
    ObjectsList(Vec<ObjectName>),
    ReceptaclesList(Vec<ReceptacleName>),
    SummaryComment(String),
}

impl DslStatement {
    pub fn placement(p: &Placement) -> Self {
        DslStatement::PickAndPlace2(p.object.clone(), p.receptacle.clone())
    }

    pub fn primitive(c: &PrimitiveChoice) -> Self {
        match c.primitive {
            Primitive::Place => DslStatement::PickAndPlace1(c.object.clone()),
            Primitive::Toss => DslStatement::PickAndToss1(c.object.clone()),
        }
    }
}

fn write_list<T: AsRef<str>>(f: &mut fmt::Formatter<'_>, ident: &str, names: &[T]) -> fmt::Result {
    write!(f, "{ident} = [")?;
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "\"{}\"", n.as_ref())?;
    }
    f.write_str("]")
}

impl fmt::Display for DslStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslStatement::PickAndPlace2(o, r) => write!(f, "pick_and_place(\"{o}\", \"{r}\")"),
            DslStatement::PickAndPlace1(o) => write!(f, "pick_and_place(\"{o}\")"),
            DslStatement::PickAndToss1(o) => write!(f, "pick_and_toss(\"{o}\")"),
            DslStatement::ObjectsList(names) => write_list(f, OBJECTS, names),
            DslStatement::ReceptaclesList(names) => write_list(f, RECEPTACLES, names),
            DslStatement::SummaryComment(text) => write!(f, "{SUMMARY_MARKER} {text}"),
        }
    }
}

/// Classification of a single line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    Statement(DslStatement),
    /// Well-formed call or list the subset does not define (unknown name or
    /// wrong arity).
    Unrecognized(String),
    Blank,
    /// Anything that is not shaped like a statement.
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            self.bump();
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            column: self.src[..self.pos].chars().count() + 1,
            message: message.into(),
        })
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        Some(&self.src[start..self.pos])
    }

    fn string(&mut self) -> Result<&'a str, SyntaxError> {
        if !self.eat('"') {
            return self.err("expected string literal");
        }
        let start = self.pos;
        loop {
            match self.bump() {
                Some('"') => return Ok(&self.src[start..self.pos - 1]),
                Some('\n') | None => return self.err("unterminated string literal"),
                Some(_) => {}
            }
        }
    }

    /// Comma-separated strings up to and including `close`.
    fn strings_until(&mut self, close: char) -> Result<Vec<&'a str>, SyntaxError> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            self.skip_ws();
            out.push(self.string()?);
            self.skip_ws();
            if self.eat(close) {
                return Ok(out);
            }
            if !self.eat(',') {
                return self.err(format!("expected ',' or '{close}'"));
            }
        }
    }
}

fn name_err(e: NameError) -> String {
    format!("invalid name: {e}")
}

fn object(text: &str) -> Result<ObjectName, String> {
    ObjectName::new(text.trim()).map_err(name_err)
}

fn receptacle(text: &str) -> Result<ReceptacleName, String> {
    ReceptacleName::new(text.trim()).map_err(name_err)
}

fn names<T>(items: &[&str], f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    items.iter().map(|s| f(s)).collect()
}

/// Parse the bracketed list that follows `ident =`, starting at the cursor.
fn list_body<'a>(cur: &mut Cursor<'a>) -> Result<Vec<&'a str>, SyntaxError> {
    cur.skip_ws();
    if !cur.eat('[') {
        return cur.err("expected '['");
    }
    cur.strings_until(']')
}

/// Classify one line of text.
pub fn parse_line(line: &str) -> Result<Line, SyntaxError> {
    let trimmed = line.trim();
    if trimmed.is_empty() {
        return Ok(Line::Blank);
    }
    if let Some(rest) = trimmed.strip_prefix('#') {
        if let Some(text) = rest.trim_start().strip_prefix("Summary:") {
            return Ok(Line::Statement(DslStatement::SummaryComment(
                text.trim().to_string(),
            )));
        }
        return Ok(Line::Other);
    }

    let mut cur = Cursor::new(trimmed);
    let Some(ident) = cur.ident() else {
        return Ok(Line::Other);
    };
    cur.skip_ws();
    let (is_call, args) = if cur.eat('(') {
        (true, cur.strings_until(')')?)
    } else if cur.eat('=') {
        (false, list_body(&mut cur)?)
    } else {
        return Ok(Line::Other);
    };
    cur.skip_ws();
    if !cur.rest().is_empty() {
        return cur.err("unexpected trailing text");
    }

    let fail = |message: String| SyntaxError { column: 1, message };
    let stmt = match (is_call, ident, args.len()) {
        (true, "pick_and_place", 2) => DslStatement::PickAndPlace2(
            object(args[0]).map_err(fail)?,
            receptacle(args[1]).map_err(fail)?,
        ),
        (true, "pick_and_place", 1) => DslStatement::PickAndPlace1(object(args[0]).map_err(fail)?),
        (true, "pick_and_toss", 1) => DslStatement::PickAndToss1(object(args[0]).map_err(fail)?),
        (false, OBJECTS, _) => DslStatement::ObjectsList(names(&args, object).map_err(fail)?),
        (false, RECEPTACLES, _) => {
            DslStatement::ReceptaclesList(names(&args, receptacle).map_err(fail)?)
        }
        _ => {
            let shape = if is_call { "()" } else { " = [...]" };
            return Ok(Line::Unrecognized(format!(
                "{ident}{shape} with {} argument(s)",
                args.len()
            )));
        }
    };
    Ok(Line::Statement(stmt))
}

/// Parse `[ident =] [ "a", "b", ... ]` from the start of `text`, which may
/// span lines. Text after the closing bracket is ignored.
pub fn parse_string_list(text: &str) -> Result<Vec<String>, SyntaxError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    let save = cur.pos;
    if cur.ident().is_some() {
        cur.skip_ws();
        if !cur.eat('=') {
            cur.pos = save;
        }
    }
    Ok(list_body(&mut cur)?.into_iter().map(|s| s.trim().to_string()).collect())
}
