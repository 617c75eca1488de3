//! Parser for the WebIDL subset used to describe script-visible interfaces.
//!
//! Accepted at top level: `interface Name [: Parent] { ... };` and
//! `partial interface Name { ... };`, each optionally preceded by an
//! extended-attribute list `[...]`, which is skipped. Inside a block:
//!
//! ```text
//! [readonly] attribute Type name;
//! ReturnType name(arguments);
//! constructor(arguments);
//! ```
//!
//! Types and argument lists are kept as opaque strings. Partial interfaces are
//! returned unmerged; merging happens when the catalog is built.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Method,
    AttributeGet,
    AttributeSet,
    Constructor,
}

impl MemberKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MemberKind::Method => "method",
            MemberKind::AttributeGet => "attribute_get",
            MemberKind::AttributeSet => "attribute_set",
            MemberKind::Constructor => "constructor",
        }
    }
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One script-visible entry point of an interface.
///
/// A writable attribute contributes two members (getter and setter) sharing
/// a name; a `readonly` attribute contributes only the getter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub kind: MemberKind,
    pub name: String,
    pub readonly: bool,
    /// Attribute type or operation return type; empty for constructors.
    pub ty: String,
    /// Argument list text for operations and constructors.
    pub args: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceDefinition {
    pub name: String,
    pub parent: Option<String>,
    pub members: Vec<Member>,
    pub is_partial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdlError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: duplicate member {kind} {name:?} in interface {interface}")]
    DuplicateMember {
        line: usize,
        column: usize,
        interface: String,
        name: String,
        kind: MemberKind,
    },
    #[error("{line}:{column}: unsupported keyword {keyword:?}")]
    UnknownKeyword {
        line: usize,
        column: usize,
        keyword: String,
    },
}

/// Keywords from full WebIDL that the subset deliberately rejects.
const UNSUPPORTED: &[&str] = &[
    "callback",
    "const",
    "deleter",
    "dictionary",
    "enum",
    "getter",
    "includes",
    "inherit",
    "iterable",
    "maplike",
    "mixin",
    "namespace",
    "setlike",
    "setter",
    "static",
    "stringifier",
    "typedef",
    "async",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// Numbers and string literals (only seen in argument defaults).
    Literal(String),
    Punct(char),
    Ellipsis,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

impl Token {
    fn text(&self) -> String {
        match &self.tok {
            Tok::Ident(s) | Tok::Literal(s) => s.clone(),
            Tok::Punct(c) => c.to_string(),
            Tok::Ellipsis => "...".to_string(),
        }
    }

    fn is_word(&self) -> bool {
        matches!(self.tok, Tok::Ident(_) | Tok::Literal(_))
    }
}

fn lex(text: &str) -> Result<Vec<Token>, IdlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i >= chars.len() {
                    return Err(IdlError::Syntax {
                        line: start_line,
                        column: start_col,
                        message: "unterminated comment".into(),
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let mut s = String::new();
            s.push(c);
            advance(&mut i, &mut line, &mut col, c);
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                s.push(chars[i]);
                {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            Tok::Literal(s)
        } else if c == '"' {
            let mut s = String::from('"');
            advance(&mut i, &mut line, &mut col, c);
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(IdlError::Syntax {
                            line: start_line,
                            column: start_col,
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        s.push('"');
                        advance(&mut i, &mut line, &mut col, '"');
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col, ch);
                    }
                }
            }
            Tok::Literal(s)
        } else if c == '.' && chars.get(i + 1) == Some(&'.') && chars.get(i + 2) == Some(&'.') {
            for _ in 0..3 {
                advance(&mut i, &mut line, &mut col, '.');
            }
            Tok::Ellipsis
        } else if "{}()[]<>;:,?=-".contains(c) {
            advance(&mut i, &mut line, &mut col, c);
            Tok::Punct(c)
        } else {
            return Err(IdlError::Syntax {
                line: start_line,
                column: start_col,
                message: format!("unexpected character {c:?}"),
            });
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    Ok(out)
}

/// Joins tokens back into compact, canonically spaced text.
fn render(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut prev: Option<&Token> = None;
    for t in tokens {
        if let Some(p) = prev {
            let space = match (&p.tok, &t.tok) {
                (_, Tok::Punct('=')) | (Tok::Punct('='), _) => true,
                (Tok::Punct(','), _) => true,
                (_, _) if t.is_word() => {
                    p.is_word()
                        || matches!(p.tok, Tok::Ellipsis | Tok::Punct(')' | '>' | '?' | ']'))
                }
                _ => false,
            };
            if space {
                out.push(' ');
            }
        }
        out.push_str(&t.text());
        prev = Some(t);
    }
    out
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map_or((self.eof_line, 1), |t| (t.line, t.column))
    }

    fn error(&self, message: impl Into<String>) -> IdlError {
        let (line, column) = self.here();
        IdlError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), IdlError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |t| format!("{:?}", t.text()));
            Err(self.error(format!("expected '{c}', found {found}")))
        }
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => Some(s),
            _ => None,
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, IdlError> {
        match self.peek_ident() {
            Some(s) => {
                let s = s.to_string();
                self.pos += 1;
                Ok(s)
            }
            None => Err(self.error(format!("expected {what}"))),
        }
    }

    fn unsupported_here(&self) -> Option<IdlError> {
        let t = self.peek()?;
        match &t.tok {
            Tok::Ident(s) if UNSUPPORTED.contains(&s.as_str()) => Some(IdlError::UnknownKeyword {
                line: t.line,
                column: t.column,
                keyword: s.clone(),
            }),
            _ => None,
        }
    }

    /// Skips a balanced `[...]` extended attribute list if one is next.
    fn skip_extended_attributes(&mut self) -> Result<(), IdlError> {
        while self.eat_punct('[') {
            let mut depth = 1;
            while depth > 0 {
                match self.next() {
                    Some(Token {
                        tok: Tok::Punct('['),
                        ..
                    }) => depth += 1,
                    Some(Token {
                        tok: Tok::Punct(']'),
                        ..
                    }) => depth -= 1,
                    Some(_) => {}
                    None => return Err(self.error("unterminated extended attribute list")),
                }
            }
        }
        Ok(())
    }

    fn definition(&mut self) -> Result<InterfaceDefinition, IdlError> {
        self.skip_extended_attributes()?;
        if let Some(e) = self.unsupported_here() {
            return Err(e);
        }
        let is_partial = self.peek_ident() == Some("partial");
        if is_partial {
            self.pos += 1;
        }
        match self.peek_ident() {
            Some("interface") => self.pos += 1,
            Some(_) => {
                if let Some(e) = self.unsupported_here() {
                    return Err(e);
                }
                let t = self.peek().expect("peeked");
                return Err(IdlError::UnknownKeyword {
                    line: t.line,
                    column: t.column,
                    keyword: t.text(),
                });
            }
            None => return Err(self.error("expected 'interface'")),
        }
        if self.peek_ident() == Some("mixin") {
            return Err(self.unsupported_here().expect("mixin is unsupported"));
        }
        let name = self.expect_ident("interface name")?;
        let parent = if self.eat_punct(':') {
            if is_partial {
                return Err(self.error("partial interface cannot declare a parent"));
            }
            Some(self.expect_ident("parent interface name")?)
        } else {
            None
        };
        self.expect_punct('{')?;
        let mut members: Vec<Member> = Vec::new();
        let mut seen: BTreeSet<(MemberKind, String)> = BTreeSet::new();
        while !self.eat_punct('}') {
            if self.peek().is_none() {
                return Err(self.error(format!("unterminated interface {name}")));
            }
            let (line, column) = self.here();
            for m in self.member()? {
                if !seen.insert((m.kind, m.name.clone())) {
                    return Err(IdlError::DuplicateMember {
                        line,
                        column,
                        interface: name.clone(),
                        name: m.name,
                        kind: m.kind,
                    });
                }
                members.push(m);
            }
        }
        self.expect_punct(';')?;
        Ok(InterfaceDefinition {
            name,
            parent,
            members,
            is_partial,
        })
    }

    /// Collects tokens up to the member-terminating `;`, tracking nesting.
    fn member_tokens(&mut self) -> Result<Vec<Token>, IdlError> {
        let mut depth = 0i32;
        let mut out = Vec::new();
        loop {
            let Some(t) = self.next() else {
                return Err(self.error("expected ';' after member"));
            };
            match t.tok {
                Tok::Punct('(' | '[' | '<') => depth += 1,
                Tok::Punct(')' | ']' | '>') => depth -= 1,
                Tok::Punct(';') if depth == 0 => return Ok(out),
                Tok::Punct('}') if depth == 0 => {
                    return Err(IdlError::Syntax {
                        line: t.line,
                        column: t.column,
                        message: "expected ';' after member".into(),
                    })
                }
                _ => {}
            }
            if depth < 0 {
                return Err(IdlError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: format!("unbalanced '{}'", t.text()),
                });
            }
            out.push(t);
        }
    }

    fn member(&mut self) -> Result<Vec<Member>, IdlError> {
        self.skip_extended_attributes()?;
        if let Some(e) = self.unsupported_here() {
            return Err(e);
        }
        let start = self.here();
        let toks = self.member_tokens()?;
        let syntax = |message: &str| IdlError::Syntax {
            line: start.0,
            column: start.1,
            message: message.to_string(),
        };
        let first = toks.first().ok_or_else(|| syntax("empty member"))?;
        let word = |t: &Token, w: &str| matches!(&t.tok, Tok::Ident(s) if s == w);

        let (readonly, rest) = if word(first, "readonly") {
            (true, &toks[1..])
        } else {
            (false, &toks[..])
        };
        if rest.first().is_some_and(|t| word(t, "attribute")) {
            let body = &rest[1..];
            let (name_tok, ty) = body
                .split_last()
                .ok_or_else(|| syntax("attribute needs a type and a name"))?;
            let name = match &name_tok.tok {
                Tok::Ident(s) => s.clone(),
                _ => return Err(syntax("attribute name must be an identifier")),
            };
            if ty.is_empty() {
                return Err(syntax("attribute is missing a type"));
            }
            let ty = render(ty);
            let mut out = vec![Member {
                kind: MemberKind::AttributeGet,
                name: name.clone(),
                readonly,
                ty: ty.clone(),
                args: String::new(),
            }];
            if !readonly {
                out.push(Member {
                    kind: MemberKind::AttributeSet,
                    name,
                    readonly,
                    ty,
                    args: String::new(),
                });
            }
            return Ok(out);
        }
        if readonly {
            return Err(syntax("'readonly' must be followed by 'attribute'"));
        }

        // Operations and constructors: `[Type] name ( args )`.
        let open = toks
            .iter()
            .position(|t| t.tok == Tok::Punct('('))
            .ok_or_else(|| syntax("expected an attribute or an operation"))?;
        let close = toks.len() - 1;
        if toks[close].tok != Tok::Punct(')') {
            return Err(syntax("unexpected tokens after argument list"));
        }
        let args = render(&toks[open + 1..close]);
        let head = &toks[..open];
        if head.len() == 1 && word(&head[0], "constructor") {
            return Ok(vec![Member {
                kind: MemberKind::Constructor,
                name: "constructor".into(),
                readonly: false,
                ty: String::new(),
                args,
            }]);
        }
        let (name_tok, ty) = head
            .split_last()
            .ok_or_else(|| syntax("operation needs a name"))?;
        let name = match &name_tok.tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(syntax("operation name must be an identifier")),
        };
        if ty.is_empty() {
            return Err(syntax("operation is missing a return type"));
        }
        Ok(vec![Member {
            kind: MemberKind::Method,
            name,
            readonly: false,
            ty: render(ty),
            args,
        }])
    }
}

/// Parses a document in the subset grammar.
pub fn parse_webidl(text: &str) -> Result<Vec<InterfaceDefinition>, IdlError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof_line: text.lines().count().max(1),
    };
    let mut defs = Vec::new();
    while p.peek().is_some() {
        defs.push(p.definition()?);
    }
    Ok(defs)
}

/// Writes definitions back out in the subset grammar.
pub fn serialize_webidl(defs: &[InterfaceDefinition]) -> String {
    let mut out = String::new();
    for (i, d) in defs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if d.is_partial {
            out.push_str("partial ");
        }
        let _ = write!(out, "interface {}", d.name);
        if let Some(p) = &d.parent {
            let _ = write!(out, " : {p}");
        }
        out.push_str(" {\n");
        for m in &d.members {
            match m.kind {
                MemberKind::AttributeGet => {
                    let ro = if m.readonly { "readonly " } else { "" };
                    let _ = writeln!(out, "  {ro}attribute {} {};", m.ty, m.name);
                }
                // implied by the non-readonly getter line
                MemberKind::AttributeSet => {}
                MemberKind::Method => {
                    let _ = writeln!(out, "  {} {}({});", m.ty, m.name, m.args);
                }
                MemberKind::Constructor => {
                    let _ = writeln!(out, "  constructor({});", m.args);
                }
            }
        }
        out.push_str("};\n");
    }
    out
}
