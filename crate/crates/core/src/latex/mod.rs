//! Tokenizing, parsing and canonicalizing LaTeX math.
//!
//! The canonical form gives structurally identical formulas one textual
//! spelling: subscripts before superscripts, `\over` rewritten to `\frac`,
//! `\label{..}` removed, script arguments braced and insignificant
//! whitespace dropped.

mod parse;
mod serialize;
mod token;

use serde::{Deserialize, Serialize};

pub use parse::{command_arity, parse, Diagnostic, FormulaNode, ParseError, Parsed};
pub use serialize::{serialize, serialize_with, SerializeStyle};
pub use token::{token_texts, tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CanonConfig {
    pub reorder_scripts: bool,
    pub over_to_frac: bool,
    pub strip_labels: bool,
    pub brace_single_scripts: bool,
}

impl Default for CanonConfig {
    fn default() -> Self {
        CanonConfig {
            reorder_scripts: true,
            over_to_frac: true,
            strip_labels: true,
            brace_single_scripts: true,
        }
    }
}

/// Parse `input`, apply the canonical rewrites and serialize the result.
pub fn canonicalize(input: &str, config: CanonConfig) -> Result<String, ParseError> {
    let parsed = parse(&tokenize(input))?;
    let node = canonical_tree(parsed.node, config);
    Ok(serialize_with(&node, SerializeStyle { brace_scripts: config.brace_single_scripts }))
}

/// Non-whitespace tokens of the canonical form; falls back to the raw
/// tokens when the input cannot be parsed.
pub fn canonical_tokens(input: &str) -> Vec<String> {
    match canonicalize(input, CanonConfig::default()) {
        Ok(c) => token_texts(&c),
        Err(_) => token_texts(input),
    }
}

/// Apply the tree rewrites selected by `config`.
pub fn canonical_tree(node: FormulaNode, config: CanonConfig) -> FormulaNode {
    rewrite(node, &config).unwrap_or_else(FormulaNode::empty_row)
}

fn is_label(node: &FormulaNode) -> bool {
    matches!(node, FormulaNode::Cmd { name, .. } if name == "label")
}

/// `None` means the node was removed.
fn rewrite(node: FormulaNode, config: &CanonConfig) -> Option<FormulaNode> {
    let arg = |n: FormulaNode| rewrite(n, config).unwrap_or_else(FormulaNode::empty_row);
    let boxed = |n: Box<FormulaNode>| Box::new(arg(*n));
    Some(match node {
        FormulaNode::Atom(_) => node,
        FormulaNode::Row(children) => {
            let kept: Vec<_> = children.into_iter().filter_map(|c| rewrite(c, config)).collect();
            FormulaNode::from_items(kept)
        }
        FormulaNode::Group(child) => FormulaNode::Group(boxed(child)),
        FormulaNode::Frac(num, den) => FormulaNode::Frac(boxed(num), boxed(den)),
        FormulaNode::Sqrt { radicand, index } => {
            FormulaNode::Sqrt { radicand: boxed(radicand), index: index.map(boxed) }
        }
        FormulaNode::Script { base, sub, sup, sup_first } => {
            let base = if config.strip_labels && is_label(&base) {
                FormulaNode::empty_atom()
            } else {
                arg(*base)
            };
            FormulaNode::Script {
                base: Box::new(base),
                sub: sub.map(boxed),
                sup: sup.map(boxed),
                sup_first: sup_first && !config.reorder_scripts,
            }
        }
        FormulaNode::Cmd { ref name, .. } if config.strip_labels && name == "label" => return None,
        FormulaNode::Cmd { name, args } => {
            let mut args: Vec<_> = args.into_iter().map(arg).collect();
            if name == "over" && config.over_to_frac && args.len() == 2 {
                let den = args.pop().unwrap();
                let num = args.pop().unwrap();
                FormulaNode::Frac(Box::new(num), Box::new(den))
            } else {
                FormulaNode::Cmd { name, args }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(s: &str) -> String {
        canonicalize(s, CanonConfig::default()).unwrap()
    }

    #[test]
    fn reorders_scripts() {
        assert_eq!(canon("A^{c}_{2}"), "A_{2}^{c}");
        assert_eq!(canon("A^{c}_{2}"), canon("A_{2}^{c}"));
    }

    #[test]
    fn rewrites_over() {
        assert_eq!(canon(r"a \over b"), r"\frac{a}{b}");
        assert_eq!(canon(r"x+{a+1 \over b}"), r"x+{\frac{a+1}{b}}");
    }

    #[test]
    fn strips_labels() {
        assert_eq!(canon(r"x=y\label{eq1}"), "x=y");
    }

    #[test]
    fn braces_single_scripts_and_drops_whitespace() {
        assert_eq!(canon("x ^ 2 + y_i"), "x^{2}+y_{i}");
    }

    #[test]
    fn flags_can_be_switched_off() {
        let off = CanonConfig {
            reorder_scripts: false,
            over_to_frac: false,
            strip_labels: false,
            brace_single_scripts: false,
        };
        assert_eq!(canonicalize("A^c_2", off).unwrap(), "A^c_2");
        assert_eq!(canonicalize(r"a \over b", off).unwrap(), r"a\over b");
        assert_eq!(canonicalize(r"x\label{q}", off).unwrap(), r"x\label{q}");
        let only_reorder = CanonConfig { reorder_scripts: true, ..off };
        assert_eq!(canonicalize("A^c_2", only_reorder).unwrap(), "A_2^c");
    }

    #[test]
    fn idempotent_on_recovered_input() {
        for s in ["{a", "a}}b", "^2", "x^a^b", r"\sqrt[3", r"\frac{a}", r"\alpha\label{x}^2", "x_"] {
            let once = canon(s);
            assert_eq!(canon(&once), once, "input {s:?}");
        }
    }

    #[test]
    fn canonical_tokens_ignore_spacing() {
        assert_eq!(canonical_tokens(r"\frac{a}{b}"), canonical_tokens(r"\frac {a} {b}"));
    }
}
