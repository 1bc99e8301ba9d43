//! Propositional formulas over `->`, `&`, `|`, `~` and falsum.
//!
//! Concrete syntax, tightest binding first:
//!
//! | construct   | ASCII | Unicode | associativity |
//! |-------------|-------|---------|---------------|
//! | falsum      | `F`   | `⊥`     |               |
//! | negation    | `~`   | `¬`     | prefix        |
//! | conjunction | `&`   | `∧`     | left          |
//! | disjunction | `\|`  | `∨`     | left          |
//! | implication | `->`  | `→`     | right         |
//!
//! Variables are lowercase identifiers: a letter `a-z` followed by any of
//! `a-z`, `0-9` or `_`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A primitive connective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connective {
    Imp,
    And,
    Or,
    Not,
    False,
}

impl Connective {
    /// All connectives, in the order their tables are laid out.
    pub const ALL: [Connective; 5] = [
        Connective::Imp,
        Connective::And,
        Connective::Or,
        Connective::Not,
        Connective::False,
    ];

    pub fn arity(self) -> usize {
        match self {
            Connective::Imp | Connective::And | Connective::Or => 2,
            Connective::Not => 1,
            Connective::False => 0,
        }
    }

    /// Position in [`Connective::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Keyword used in matrix and problem files.
    pub fn keyword(self) -> &'static str {
        match self {
            Connective::Imp => "imp",
            Connective::And => "and",
            Connective::Or => "or",
            Connective::Not => "not",
            Connective::False => "false",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Connective::ALL.into_iter().find(|c| c.keyword() == word)
    }

    /// ASCII operator symbol of the formula syntax.
    pub fn symbol(self) -> &'static str {
        match self {
            Connective::Imp => "->",
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Not => "~",
            Connective::False => "F",
        }
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A set of connectives. Implication is always a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature(u8);

impl Signature {
    /// `{->}` only.
    pub fn implicational() -> Self {
        Signature(1 << Connective::Imp.index())
    }

    pub fn full() -> Self {
        Signature(0b1_1111)
    }

    pub fn from_connectives<I: IntoIterator<Item = Connective>>(connectives: I) -> Self {
        connectives
            .into_iter()
            .fold(Signature::implicational(), |s, c| s.with(c))
    }

    pub fn with(self, c: Connective) -> Self {
        Signature(self.0 | (1 << c.index()))
    }

    pub fn contains(self, c: Connective) -> bool {
        self.0 & (1 << c.index()) != 0
    }

    pub fn is_superset_of(self, other: Signature) -> bool {
        self.0 & other.0 == other.0
    }

    /// Members in layout order.
    pub fn iter(self) -> impl Iterator<Item = Connective> {
        Connective::ALL
            .into_iter()
            .filter(move |&c| self.contains(c))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<_> = self.iter().map(Connective::keyword).collect();
        f.write_str(&words.join(" "))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    False,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    /// Builds `connective(children...)`, or `None` when the child count
    /// does not match the arity.
    pub fn apply(connective: Connective, children: Vec<Formula>) -> Option<Self> {
        let mut it = children.into_iter();
        let f = match connective.arity() {
            0 => Formula::False,
            1 => Formula::not(it.next()?),
            _ => {
                let a = it.next()?;
                let b = it.next()?;
                match connective {
                    Connective::And => Formula::and(a, b),
                    Connective::Or => Formula::or(a, b),
                    _ => Formula::imp(a, b),
                }
            }
        };
        match it.next() {
            Some(_) => None,
            None => Some(f),
        }
    }

    /// The head connective, `None` for variables.
    pub fn connective(&self) -> Option<Connective> {
        match self {
            Formula::Var(_) => None,
            Formula::False => Some(Connective::False),
            Formula::Not(_) => Some(Connective::Not),
            Formula::And(..) => Some(Connective::And),
            Formula::Or(..) => Some(Connective::Or),
            Formula::Imp(..) => Some(Connective::Imp),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::False => vec![],
            Formula::Not(a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => vec![a, b],
        }
    }

    /// Distinct variables in order of first occurrence, left to right.
    pub fn variables(&self) -> Vec<String> {
        fn walk(f: &Formula, out: &mut Vec<String>) {
            match f {
                Formula::Var(name) => {
                    if !out.iter().any(|v| v == name) {
                        out.push(name.clone());
                    }
                }
                _ => f.children().into_iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Connectives occurring in the formula, plus implication.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::implicational();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let Some(c) = f.connective() {
                sig = sig.with(c);
            }
            stack.extend(f.children());
        }
        sig
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::node_count)
            .sum::<usize>()
    }
}

/// Free-function form of [`Formula::variables`].
pub fn variables_of(f: &Formula) -> Vec<String> {
    f.variables()
}

// Binding strength of binary operators; unary and atoms bind tighter.
fn precedence(c: Connective) -> u8 {
    match c {
        Connective::Imp => 1,
        Connective::Or => 2,
        Connective::And => 3,
        Connective::Not | Connective::False => 4,
    }
}

/// Renders with the fewest parentheses that still parse back to `f`.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::Var(name) => out.push_str(name),
        Formula::False => out.push('F'),
        Formula::Not(a) => {
            out.push('~');
            write_operand(a, a.connective().is_some_and(|c| c.arity() == 2), out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            let op = f.connective().unwrap();
            let level = precedence(op);
            let right_assoc = op == Connective::Imp;
            let child_level = |g: &Formula| g.connective().map_or(u8::MAX, precedence);
            let left_parens = child_level(a) < level || (right_assoc && child_level(a) == level);
            let right_parens = child_level(b) < level || (!right_assoc && child_level(b) == level);
            write_operand(a, left_parens, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(b, right_parens, out);
        }
    }
}

fn write_operand(f: &Formula, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: &'static str,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Falsum,
    Not,
    And,
    Or,
    Imp,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("variable `{name}`"),
            Token::Falsum => "`F`".into(),
            Token::Not => "`~`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Imp => "`->`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(at, ch)) = chars.peek() {
        let single = match ch {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '~' | '¬' => Some(Token::Not),
            '&' | '∧' => Some(Token::And),
            '|' | '∨' => Some(Token::Or),
            '→' => Some(Token::Imp),
            '⊥' => Some(Token::Falsum),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            tokens.push((at, tok));
            continue;
        }
        if ch == '-' {
            chars.next();
            match chars.next() {
                Some((_, '>')) => tokens.push((at, Token::Imp)),
                other => {
                    return Err(ParseError {
                        offset: other.map_or(text.len(), |(i, _)| i),
                        expected: "`>` completing `->`",
                        found: other.map_or("end of input".into(), |(_, c)| format!("`{c}`")),
                    })
                }
            }
            continue;
        }
        if ch == 'F' {
            chars.next();
            if let Some(&(i, c)) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    return Err(ParseError {
                        offset: i,
                        expected: "operator or `)` after `F`",
                        found: format!("`{c}`"),
                    });
                }
            }
            tokens.push((at, Token::Falsum));
            continue;
        }
        if ch.is_ascii_lowercase() {
            let mut end = at;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                    end = i + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            tokens.push((at, Token::Ident(text[at..end].to_string())));
            continue;
        }
        return Err(ParseError {
            offset: at,
            expected: "variable, `F`, `~`, `(` or an operator",
            found: format!("`{ch}`"),
        });
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Imp {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Token::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Token::Falsum => {
                self.bump();
                Ok(Formula::False)
            }
            Token::Ident(_) => match self.bump() {
                Token::Ident(name) => Ok(Formula::Var(name)),
                _ => unreachable!(),
            },
            Token::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error("variable, `F`, `~` or `(`")),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let f = parser.implication()?;
    if *parser.peek() != Token::End {
        return Err(parser.error("operator or end of input"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
