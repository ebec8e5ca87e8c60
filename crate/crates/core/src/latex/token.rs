use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Command,
    Letter,
    Digit,
    Operator,
    OpenBrace,
    CloseBrace,
    Subscript,
    Superscript,
    Dollar,
    Whitespace,
    Other,
}

/// A single lexeme of LaTeX math source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
}

impl Token {
    pub fn new(kind: TokenKind, text: impl Into<String>) -> Self {
        Token { kind, text: text.into() }
    }

    pub fn is_whitespace(&self) -> bool {
        self.kind == TokenKind::Whitespace
    }

    /// Command name without the leading backslash, if this is a command.
    pub fn command_name(&self) -> Option<&str> {
        match self.kind {
            TokenKind::Command => Some(&self.text[1..]),
            _ => None,
        }
    }
}

const OPERATORS: &str = "+-=*/<>()[]|,.!?:;'";

/// Split `input` into tokens.
///
/// Lexing is lossless: concatenating the `text` of every returned token
/// yields `input` again. Control words (`\frac`) are single tokens, every
/// digit is its own token, whitespace runs collapse into one token and
/// anything unrecognised becomes [`TokenKind::Other`].
pub fn tokenize(input: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = input.char_indices().peekable();

    while let Some((start, c)) = chars.next() {
        let kind = match c {
            '\\' => {
                let mut end = start + 1;
                let mut letters = 0;
                while let Some(&(i, n)) = chars.peek() {
                    if n.is_ascii_alphabetic() {
                        end = i + 1;
                        letters += 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                if letters > 0 {
                    tokens.push(Token::new(TokenKind::Command, &input[start..end]));
                    continue;
                }
                // control symbol such as `\{`, `\,` or `\\`
                match chars.next() {
                    Some((i, n)) => {
                        let end = i + n.len_utf8();
                        tokens.push(Token::new(TokenKind::Other, &input[start..end]));
                    }
                    None => tokens.push(Token::new(TokenKind::Other, "\\")),
                }
                continue;
            }
            c if c.is_whitespace() => {
                let mut end = start + c.len_utf8();
                while let Some(&(i, n)) = chars.peek() {
                    if n.is_whitespace() {
                        end = i + n.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::new(TokenKind::Whitespace, &input[start..end]));
                continue;
            }
            '{' => TokenKind::OpenBrace,
            '}' => TokenKind::CloseBrace,
            '_' => TokenKind::Subscript,
            '^' => TokenKind::Superscript,
            '$' => TokenKind::Dollar,
            c if c.is_ascii_digit() => TokenKind::Digit,
            c if c.is_alphabetic() => TokenKind::Letter,
            c if OPERATORS.contains(c) => TokenKind::Operator,
            _ => TokenKind::Other,
        };
        tokens.push(Token::new(kind, &input[start..start + c.len_utf8()]));
    }
    tokens
}

/// Non-whitespace token texts, the unit used for token-level comparisons.
pub fn token_texts(input: &str) -> Vec<String> {
    tokenize(input)
        .into_iter()
        .filter(|t| !t.is_whitespace())
        .map(|t| t.text)
        .collect()
}
