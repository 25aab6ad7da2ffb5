//! Formula AST, lexer, parser and printer.
//!
//! Surface syntax, tightest binding first:
//!
//! ```text
//! ~ B K P Bm[n] Km[n] [] <> [s] <s> G F H O   (prefix)
//! &                                           (left)
//! |                                           (left)
//! ->                                          (right)
//! <->                                         (right)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Prefix operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Not,
    Bel,
    Know,
    /// Meta-belief of degree n (n ≥ 1).
    BelMeta(u32),
    KnowMeta(u32),
    PreBel,
    Necessity,
    Possibility,
    PsyNecessity,
    PsyPossibility,
    Always,
    Eventually,
    HistAlways,
    HistOnce,
}

impl Op {
    pub fn symbol(self) -> String {
        match self {
            Op::Not => "~".into(),
            Op::Bel => "B".into(),
            Op::Know => "K".into(),
            Op::BelMeta(n) => format!("Bm[{n}]"),
            Op::KnowMeta(n) => format!("Km[{n}]"),
            Op::PreBel => "P".into(),
            Op::Necessity => "[]".into(),
            Op::Possibility => "<>".into(),
            Op::PsyNecessity => "[s]".into(),
            Op::PsyPossibility => "<s>".into(),
            Op::Always => "G".into(),
            Op::Eventually => "F".into(),
            Op::HistAlways => "H".into(),
            Op::HistOnce => "O".into(),
        }
    }

    /// Every operator except negation talks about belief, time or worlds.
    pub fn is_modal(self) -> bool {
        self != Op::Not
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conn {
    And,
    Or,
    Implies,
    Iff,
}

impl Conn {
    pub fn symbol(self) -> &'static str {
        match self {
            Conn::And => "&",
            Conn::Or => "|",
            Conn::Implies => "->",
            Conn::Iff => "<->",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Conn::Iff => 1,
            Conn::Implies => 2,
            Conn::Or => 3,
            Conn::And => 4,
        }
    }

    fn right_assoc(self) -> bool {
        matches!(self, Conn::Implies | Conn::Iff)
    }

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Conn::And => a && b,
            Conn::Or => a || b,
            Conn::Implies => !a || b,
            Conn::Iff => a == b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Unary(Op, Box<Formula>),
    Binary(Conn, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn unary(op: Op, f: Formula) -> Self {
        Formula::Unary(op, Box::new(f))
    }

    pub fn binary(c: Conn, a: Formula, b: Formula) -> Self {
        Formula::Binary(c, Box::new(a), Box::new(b))
    }

    pub fn not(f: Formula) -> Self {
        Formula::unary(Op::Not, f)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::binary(Conn::And, a, b)
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::binary(Conn::Or, a, b)
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::binary(Conn::Implies, a, b)
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::binary(Conn::Iff, a, b)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse(text)
    }

    /// Atom names in first-occurrence order, without repeats.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_atoms(&mut |a| {
            if !out.contains(&a) {
                out.push(a);
            }
        });
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Unary(_, x) => x.visit_atoms(f),
            Formula::Binary(_, a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// True when only atoms and boolean connectives occur.
    pub fn is_modal_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Unary(op, x) => !op.is_modal() && x.is_modal_free(),
            Formula::Binary(_, a, b) => a.is_modal_free() && b.is_modal_free(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Unary(_, x) => 1 + x.depth(),
            Formula::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Replaces atoms by formulas; atoms missing from `map` stay.
    pub fn substitute(&self, map: &BTreeMap<String, Formula>) -> Formula {
        match self {
            Formula::Atom(a) => map.get(a).cloned().unwrap_or_else(|| self.clone()),
            Formula::Unary(op, x) => Formula::unary(*op, x.substitute(map)),
            Formula::Binary(c, a, b) => Formula::binary(*c, a.substitute(map), b.substitute(map)),
        }
    }

    /// Checks the evaluable fragment: the bodies of B, K and P are boolean
    /// combinations of atoms, and meta, ⊡ and ⊙ apply to atoms only.
    pub fn check_fragment(&self) -> Result<(), FragmentError> {
        match self {
            Formula::Atom(_) => Ok(()),
            Formula::Binary(_, a, b) => {
                a.check_fragment()?;
                b.check_fragment()
            }
            Formula::Unary(op, body) => match op {
                Op::Bel | Op::Know | Op::PreBel if !body.is_modal_free() => {
                    Err(FragmentError { op: *op, body: body.to_string() })
                }
                Op::BelMeta(_) | Op::KnowMeta(_) | Op::PsyNecessity | Op::PsyPossibility
                    if !matches!(**body, Formula::Atom(_)) =>
                {
                    Err(FragmentError { op: *op, body: body.to_string() })
                }
                Op::BelMeta(0) | Op::KnowMeta(0) => {
                    Err(FragmentError { op: *op, body: body.to_string() })
                }
                _ => body.check_fragment(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{}` cannot apply to `{body}`", op.symbol())]
pub struct FragmentError {
    pub op: Op,
    pub body: String,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Prefix(Op),
    Bin(Conn),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Prefix(op) => format!("`{}`", op.symbol()),
            Tok::Bin(c) => format!("`{}`", c.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: expected {}, found {found}", expected.join(", "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let rest_starts = |i: usize, s: &str| -> bool {
        let pat: Vec<char> = s.chars().collect();
        chars.len() >= i + pat.len() && chars[i..i + pat.len()] == pat[..]
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let err = |expected: &[&str], found: String| ParseError {
            line,
            column: col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        };
        let fixed: &[(&str, Tok)] = &[
            ("<->", Tok::Bin(Conn::Iff)),
            ("<>", Tok::Prefix(Op::Possibility)),
            ("<s>", Tok::Prefix(Op::PsyPossibility)),
            ("[]", Tok::Prefix(Op::Necessity)),
            ("[s]", Tok::Prefix(Op::PsyNecessity)),
            ("->", Tok::Bin(Conn::Implies)),
            ("~", Tok::Prefix(Op::Not)),
            ("&", Tok::Bin(Conn::And)),
            ("|", Tok::Bin(Conn::Or)),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        if let Some((s, tok)) = fixed.iter().find(|(s, _)| rest_starts(i, s)) {
            out.push(Spanned { tok: tok.clone(), line, column: col });
            let n = s.chars().count();
            i += n;
            col += n;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let column = col;
            col += i - start;
            let tok = if c.is_ascii_lowercase() {
                Tok::Ident(word)
            } else {
                match word.as_str() {
                    "B" => Tok::Prefix(Op::Bel),
                    "K" => Tok::Prefix(Op::Know),
                    "P" => Tok::Prefix(Op::PreBel),
                    "G" => Tok::Prefix(Op::Always),
                    "F" => Tok::Prefix(Op::Eventually),
                    "H" => Tok::Prefix(Op::HistAlways),
                    "O" => Tok::Prefix(Op::HistOnce),
                    "Bm" | "Km" => {
                        // degree in brackets: Bm[2]
                        let digits_start = i + 1;
                        let mut j = digits_start;
                        if i < chars.len() && chars[i] == '[' {
                            while j < chars.len() && chars[j].is_ascii_digit() {
                                j += 1;
                            }
                        }
                        let closed = j > digits_start && j < chars.len() && chars[j] == ']';
                        let degree: Option<u32> = if closed {
                            chars[digits_start..j].iter().collect::<String>().parse().ok()
                        } else {
                            None
                        };
                        match degree {
                            Some(n) if n >= 1 => {
                                col += j + 1 - i;
                                i = j + 1;
                                if word == "Bm" {
                                    Tok::Prefix(Op::BelMeta(n))
                                } else {
                                    Tok::Prefix(Op::KnowMeta(n))
                                }
                            }
                            _ => {
                                return Err(ParseError {
                                    line,
                                    column,
                                    expected: vec![format!("`{word}[n]` with n ≥ 1")],
                                    found: format!("`{word}`"),
                                })
                            }
                        }
                    }
                    _ => {
                        return Err(ParseError {
                            line,
                            column,
                            expected: vec!["operator or lowercase identifier".into()],
                            found: format!("`{word}`"),
                        })
                    }
                }
            };
            out.push(Spanned { tok, line, column });
            continue;
        }
        return Err(err(&["formula"], format!("`{c}`")));
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

const OPERAND: &[&str] = &[
    "identifier", "`(`", "`~`", "`B`", "`K`", "`P`", "`Bm[n]`", "`Km[n]`", "`[]`", "`<>`",
    "`[s]`", "`<s>`", "`G`", "`F`", "`H`", "`O`",
];

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn eat_bin(&mut self, c: Conn) -> bool {
        if self.peek().tok == Tok::Bin(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.eat_bin(Conn::Iff) {
            Ok(Formula::iff(lhs, self.iff()?))
        } else {
            Ok(lhs)
        }
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat_bin(Conn::Implies) {
            Ok(Formula::implies(lhs, self.imp()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat_bin(Conn::Or) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat_bin(Conn::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok.clone() {
            Tok::Prefix(op) => {
                self.pos += 1;
                Ok(Formula::unary(op, self.unary()?))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.iff()?;
                if self.peek().tok != Tok::RParen {
                    return Err(self.error(&["`&`", "`|`", "`->`", "`<->`", "`)`"]));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.iff()?;
    if p.peek().tok != Tok::End {
        return Err(p.error(&["`&`", "`|`", "`->`", "`<->`", "end of input"]));
    }
    Ok(f)
}

// ---------------------------------------------------------------- printer

const UNARY_PREC: u8 = 5;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) => 6,
        Formula::Unary(..) => UNARY_PREC,
        Formula::Binary(c, ..) => c.precedence(),
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, x: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({x})")
    } else {
        write!(f, "{x}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Unary(op, x) => {
                let parens = precedence(x) < UNARY_PREC;
                f.write_str(&op.symbol())?;
                if *op != Op::Not && !parens {
                    f.write_str(" ")?;
                }
                write_operand(f, x, parens)
            }
            Formula::Binary(c, a, b) => {
                let p = c.precedence();
                let (left, right) = if c.right_assoc() {
                    (precedence(a) <= p, precedence(b) < p)
                } else {
                    (precedence(a) < p, precedence(b) <= p)
                };
                write_operand(f, a, left)?;
                write!(f, " {} ", c.symbol())?;
                write_operand(f, b, right)
            }
        }
    }
}

// ---------------------------------------------------------------- schemas

/// A formula whose atoms are metavariables to be replaced by model atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub template: Formula,
    /// Metavariable names, sorted.
    pub metavariables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("schema not in the evaluable fragment: {0}")]
    NotInFragment(#[from] FragmentError),
}

pub type Instantiation = BTreeMap<String, String>;

impl Schema {
    pub fn new(template: Formula) -> Result<Self, SchemaError> {
        template.check_fragment()?;
        let metavariables: BTreeSet<String> =
            template.atoms().into_iter().map(String::from).collect();
        Ok(Schema {
            template,
            metavariables: metavariables.into_iter().collect(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        Schema::new(parse(text)?)
    }

    /// Every assignment of `atoms` to the metavariables, in lexicographic
    /// order of the sorted atom list. Metavariables may share an atom.
    pub fn instantiations(&self, atoms: &[&str]) -> Vec<Instantiation> {
        let mut sorted: Vec<&str> = atoms.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut out = vec![Instantiation::new()];
        for mv in &self.metavariables {
            let mut next = Vec::with_capacity(out.len() * sorted.len());
            for partial in &out {
                for a in &sorted {
                    let mut m = partial.clone();
                    m.insert(mv.clone(), a.to_string());
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    pub fn instantiate(&self, inst: &Instantiation) -> Formula {
        let map: BTreeMap<String, Formula> = inst
            .iter()
            .map(|(k, v)| (k.clone(), Formula::atom(v.clone())))
            .collect();
        self.template.substitute(&map)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.template)
    }
}
