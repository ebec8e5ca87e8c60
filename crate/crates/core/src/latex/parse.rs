use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::token::{Token, TokenKind};

/// Structural representation of a LaTeX math formula.
///
/// Braces around command and script arguments are syntax, not structure:
/// `\frac{a}{b}` and `\frac ab` both parse to `Frac(Atom a, Atom b)`. Only a
/// free-standing `{...}` becomes a [`FormulaNode::Group`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaNode {
    Atom(Token),
    Row(Vec<FormulaNode>),
    Group(Box<FormulaNode>),
    Frac(Box<FormulaNode>, Box<FormulaNode>),
    Sqrt {
        radicand: Box<FormulaNode>,
        index: Option<Box<FormulaNode>>,
    },
    Script {
        base: Box<FormulaNode>,
        sub: Option<Box<FormulaNode>>,
        sup: Option<Box<FormulaNode>>,
        /// The superscript came first in the source (`x^a_b`).
        sup_first: bool,
    },
    /// A command taking arguments. `\over` is kept here as a two-argument
    /// infix command until canonicalization rewrites it.
    Cmd { name: String, args: Vec<FormulaNode> },
}

impl FormulaNode {
    pub fn empty_atom() -> Self {
        FormulaNode::Atom(Token::new(TokenKind::Other, ""))
    }

    pub fn empty_row() -> Self {
        FormulaNode::Row(Vec::new())
    }

    pub fn atom(kind: TokenKind, text: &str) -> Self {
        FormulaNode::Atom(Token::new(kind, text))
    }

    pub fn is_empty_atom(&self) -> bool {
        matches!(self, FormulaNode::Atom(t) if t.text.is_empty())
    }

    /// Collapse a list of row items: one item stands alone, anything else
    /// becomes a `Row`. Nested rows are flattened.
    pub fn from_items(items: Vec<FormulaNode>) -> Self {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                FormulaNode::Row(children) => flat.extend(children),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            FormulaNode::Row(flat)
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            FormulaNode::Atom(_) => 0,
            FormulaNode::Row(c) => c.iter().map(FormulaNode::size).sum(),
            FormulaNode::Group(c) => c.size(),
            FormulaNode::Frac(a, b) => a.size() + b.size(),
            FormulaNode::Sqrt { radicand, index } => {
                radicand.size() + index.as_ref().map_or(0, |i| i.size())
            }
            FormulaNode::Script { base, sub, sup, .. } => {
                base.size()
                    + sub.as_ref().map_or(0, |s| s.size())
                    + sup.as_ref().map_or(0, |s| s.size())
            }
            FormulaNode::Cmd { args, .. } => args.iter().map(FormulaNode::size).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at token {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// A repaired defect in the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub node: FormulaNode,
    pub diagnostics: Vec<Diagnostic>,
}

/// Argument count of commands that take braced arguments. `\sqrt` and
/// `\over` are handled separately.
pub fn command_arity(name: &str) -> Option<usize> {
    match name {
        "frac" | "dfrac" | "tfrac" | "cfrac" | "binom" | "dbinom" | "tbinom" | "overset"
        | "underset" | "stackrel" => Some(2),
        "label" | "begin" | "end" | "text" | "textbf" | "textit" | "textrm" | "mbox"
        | "mathrm" | "mathbf" | "mathit" | "mathsf" | "mathtt" | "mathbb" | "mathcal"
        | "mathfrak" | "mathscr" | "boldsymbol" | "operatorname" | "hat" | "widehat" | "bar"
        | "overline" | "underline" | "vec" | "tilde" | "widetilde" | "dot" | "ddot"
        | "overrightarrow" | "overbrace" | "underbrace" | "pmod" | "phantom" => Some(1),
        _ => None,
    }
}

/// Parse a token sequence into a formula tree.
///
/// Recovery rules: an unclosed `{` closes at the end of input, a stray `}`
/// is dropped, a script with no base attaches to an empty atom, a missing
/// script argument becomes an empty row and a second `^`/`_` on the same
/// base starts a new script with an empty base. Each repair is reported as
/// a [`Diagnostic`]. A command that finds none of its arguments is an
/// error.
pub fn parse(tokens: &[Token]) -> Result<Parsed, ParseError> {
    let mut diagnostics = Vec::new();
    let mut filtered = Vec::with_capacity(tokens.len());
    for (i, t) in tokens.iter().enumerate() {
        if t.is_whitespace() {
            continue;
        }
        if t.kind == TokenKind::Other && t.text == "\\" {
            diagnostics.push(Diagnostic { position: i, message: "stray backslash".into() });
            continue;
        }
        filtered.push(t.clone());
    }
    let mut parser = Parser { tokens: &filtered, pos: 0, end: filtered.len(), diagnostics };
    let node = parser.parse_row(false)?;
    Ok(Parsed { node, diagnostics: parser.diagnostics })
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        if self.pos < self.end {
            self.tokens.get(self.pos)
        } else {
            None
        }
    }

    fn diag(&mut self, message: &str) {
        self.diagnostics.push(Diagnostic { position: self.pos, message: message.into() });
    }

    fn is_over(tok: &Token) -> bool {
        tok.command_name() == Some("over")
    }

    fn parse_row(&mut self, in_group: bool) -> Result<FormulaNode, ParseError> {
        let mut items = Vec::new();
        let mut numerator: Option<FormulaNode> = None;
        loop {
            let Some(tok) = self.peek() else {
                if in_group {
                    self.diag("unclosed brace");
                }
                break;
            };
            match tok.kind {
                TokenKind::CloseBrace => {
                    self.pos += 1;
                    if in_group {
                        break;
                    }
                    self.diag("stray closing brace");
                }
                TokenKind::Command if Self::is_over(tok) => {
                    self.pos += 1;
                    let current = FormulaNode::from_items(std::mem::take(&mut items));
                    numerator = Some(match numerator.take() {
                        Some(prev) => {
                            self.diag("ambiguous \\over");
                            FormulaNode::Cmd { name: "over".into(), args: vec![prev, current] }
                        }
                        None => current,
                    });
                }
                _ => items.push(self.parse_item()?),
            }
        }
        let rest = FormulaNode::from_items(items);
        Ok(match numerator {
            Some(num) => FormulaNode::Cmd { name: "over".into(), args: vec![num, rest] },
            None => rest,
        })
    }

    fn parse_item(&mut self) -> Result<FormulaNode, ParseError> {
        let starts_with_script = matches!(
            self.peek().map(|t| t.kind),
            Some(TokenKind::Subscript | TokenKind::Superscript)
        );
        let base = if starts_with_script {
            self.diag("script without base");
            FormulaNode::empty_atom()
        } else {
            self.parse_primary()?
        };

        let mut sub = None;
        let mut sup = None;
        let mut sup_first = false;
        while let Some(kind) = self.peek().map(|t| t.kind) {
            let slot_taken = match kind {
                TokenKind::Subscript => sub.is_some(),
                TokenKind::Superscript => sup.is_some(),
                _ => break,
            };
            if slot_taken {
                self.diag("double script");
                break;
            }
            self.pos += 1;
            let arg = match self.parse_arg()? {
                Some(arg) => arg,
                None => {
                    self.diag("missing script argument");
                    FormulaNode::empty_row()
                }
            };
            if kind == TokenKind::Subscript {
                sub = Some(Box::new(arg));
            } else {
                if sub.is_none() {
                    sup_first = true;
                }
                sup = Some(Box::new(arg));
            }
        }
        if sub.is_none() && sup.is_none() {
            return Ok(base);
        }
        Ok(FormulaNode::Script { base: Box::new(base), sub, sup, sup_first })
    }

    /// One argument: a braced group (unwrapped) or a single primary.
    /// `None` when nothing usable follows.
    fn parse_arg(&mut self) -> Result<Option<FormulaNode>, ParseError> {
        let Some(tok) = self.peek() else { return Ok(None) };
        match tok.kind {
            TokenKind::CloseBrace | TokenKind::Subscript | TokenKind::Superscript => Ok(None),
            TokenKind::Command if Self::is_over(tok) => Ok(None),
            TokenKind::OpenBrace => {
                self.pos += 1;
                Ok(Some(self.parse_row(true)?))
            }
            _ => Ok(Some(self.parse_primary()?)),
        }
    }

    fn parse_primary(&mut self) -> Result<FormulaNode, ParseError> {
        let tok = self.tokens[self.pos].clone();
        let start = self.pos;
        self.pos += 1;
        match tok.kind {
            TokenKind::OpenBrace => Ok(FormulaNode::Group(Box::new(self.parse_row(true)?))),
            TokenKind::Command => {
                let name = tok.command_name().unwrap_or_default().to_string();
                if name == "sqrt" {
                    return self.parse_sqrt(start);
                }
                let Some(arity) = command_arity(&name) else {
                    return Ok(FormulaNode::Atom(tok));
                };
                let mut args = Vec::with_capacity(arity);
                for i in 0..arity {
                    match self.parse_arg()? {
                        Some(arg) => args.push(arg),
                        None if i == 0 => {
                            return Err(ParseError {
                                position: start,
                                message: format!("\\{name} has no arguments"),
                            })
                        }
                        None => {
                            self.diag("missing command argument");
                            args.push(FormulaNode::empty_row());
                        }
                    }
                }
                if name == "frac" {
                    let den = args.pop().unwrap();
                    let num = args.pop().unwrap();
                    return Ok(FormulaNode::Frac(Box::new(num), Box::new(den)));
                }
                Ok(FormulaNode::Cmd { name, args })
            }
            _ => Ok(FormulaNode::Atom(tok)),
        }
    }

    fn parse_sqrt(&mut self, start: usize) -> Result<FormulaNode, ParseError> {
        let mut index = None;
        if self.peek().is_some_and(|t| t.kind == TokenKind::Operator && t.text == "[") {
            if let Some(close) = self.find_index_close() {
                self.pos += 1;
                let saved_end = self.end;
                self.end = close;
                let idx = self.parse_row(false)?;
                self.end = saved_end;
                self.pos = close + 1;
                index = Some(Box::new(idx));
            }
        }
        let radicand = match self.parse_arg()? {
            Some(r) => r,
            None if index.is_some() => {
                self.diag("missing radicand");
                FormulaNode::empty_row()
            }
            None => {
                return Err(ParseError { position: start, message: "\\sqrt has no arguments".into() })
            }
        };
        Ok(FormulaNode::Sqrt { radicand: Box::new(radicand), index })
    }

    /// Position of the `]` closing an optional argument that starts at the
    /// current `[`, skipping balanced braces.
    fn find_index_close(&self) -> Option<usize> {
        let mut depth = 0usize;
        for i in self.pos + 1..self.end {
            let t = &self.tokens[i];
            match t.kind {
                TokenKind::OpenBrace => depth += 1,
                TokenKind::CloseBrace => {
                    if depth == 0 {
                        return None;
                    }
                    depth -= 1;
                }
                TokenKind::Operator if t.text == "]" && depth == 0 => return Some(i),
                _ => {}
            }
        }
        None
    }
}
