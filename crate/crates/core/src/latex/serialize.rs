use super::parse::FormulaNode;
use super::token::TokenKind;

/// Output style knobs that change the text but not the tree.
#[derive(Debug, Clone, Copy)]
pub struct SerializeStyle {
    /// Always brace script arguments (`x^{2}`); otherwise single-token
    /// arguments are written bare (`x^2`).
    pub brace_scripts: bool,
}

impl Default for SerializeStyle {
    fn default() -> Self {
        SerializeStyle { brace_scripts: true }
    }
}

/// Canonical text of a formula tree.
pub fn serialize(node: &FormulaNode) -> String {
    serialize_with(node, SerializeStyle::default())
}

pub fn serialize_with(node: &FormulaNode, style: SerializeStyle) -> String {
    let mut w = Writer { out: String::new(), after_control_word: false, script_end: None, style };
    w.node(node);
    w.out
}

struct Writer {
    out: String,
    after_control_word: bool,
    /// Output length right after the last script, if nothing followed it.
    script_end: Option<usize>,
    style: SerializeStyle,
}

impl Writer {
    fn push(&mut self, text: &str, control_word: bool) {
        if text.is_empty() {
            return;
        }
        // `\alpha x` must not collapse into `\alphax`.
        if self.after_control_word && text.starts_with(|c: char| c.is_ascii_alphabetic()) {
            self.out.push(' ');
        }
        self.out.push_str(text);
        self.after_control_word = control_word;
    }

    fn command(&mut self, name: &str) {
        self.push(&format!("\\{name}"), true);
    }

    fn braced(&mut self, node: &FormulaNode) {
        self.push("{", false);
        self.node(node);
        self.push("}", false);
    }

    fn script_arg(&mut self, node: &FormulaNode) {
        let single = matches!(node, FormulaNode::Atom(t) if !t.text.is_empty());
        if !self.style.brace_scripts && single {
            self.node(node);
        } else {
            self.braced(node);
        }
    }

    fn node(&mut self, node: &FormulaNode) {
        match node {
            FormulaNode::Atom(tok) => self.push(&tok.text, tok.kind == TokenKind::Command),
            FormulaNode::Row(children) => {
                for child in children {
                    self.node(child);
                }
            }
            FormulaNode::Group(child) => self.braced(child),
            FormulaNode::Frac(num, den) => {
                self.command("frac");
                self.braced(num);
                self.braced(den);
            }
            FormulaNode::Sqrt { radicand, index } => {
                self.command("sqrt");
                if let Some(index) = index {
                    self.push("[", false);
                    self.node(index);
                    self.push("]", false);
                }
                self.braced(radicand);
            }
            FormulaNode::Script { base, sub, sup, sup_first } => {
                // `x^{a}` then `^{b}` with no base would read back as one script
                if base.is_empty_atom() && self.script_end == Some(self.out.len()) {
                    self.push("{}", false);
                }
                self.node(base);
                let sub = sub.as_deref().map(|s| ("_", s));
                let sup = sup.as_deref().map(|s| ("^", s));
                let order = if *sup_first { [sup, sub] } else { [sub, sup] };
                for (marker, arg) in order.into_iter().flatten() {
                    self.push(marker, false);
                    self.script_arg(arg);
                }
                self.script_end = Some(self.out.len());
            }
            FormulaNode::Cmd { name, args } if name == "over" && args.len() == 2 => {
                self.node(&args[0]);
                self.command("over");
                self.node(&args[1]);
            }
            FormulaNode::Cmd { name, args } => {
                self.command(name);
                for arg in args {
                    self.braced(arg);
                }
            }
        }
    }
}
