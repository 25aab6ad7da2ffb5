//! Quanta, quanta strings and the patterns used by valuations and rule
//! predicates.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantaError {
    #[error("invalid quantum code `{0}` (expected [pqg][1-9][0-9]*)")]
    BadCode(String),
    #[error("quanta string must contain at least one quantum")]
    EmptyString,
    #[error("pattern must contain at least one element")]
    EmptyPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuantumKind {
    Percept,
    Qualia,
    Cognition,
}

impl QuantumKind {
    pub fn letter(self) -> char {
        match self {
            QuantumKind::Percept => 'p',
            QuantumKind::Qualia => 'q',
            QuantumKind::Cognition => 'g',
        }
    }
}

/// A single percept, quale or cognition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quantum {
    pub kind: QuantumKind,
    pub label: u32,
}

impl Quantum {
    pub const fn new(kind: QuantumKind, label: u32) -> Self {
        Quantum { kind, label }
    }

    pub const fn percept(label: u32) -> Self {
        Quantum::new(QuantumKind::Percept, label)
    }

    pub const fn qualia(label: u32) -> Self {
        Quantum::new(QuantumKind::Qualia, label)
    }

    pub const fn cognition(label: u32) -> Self {
        Quantum::new(QuantumKind::Cognition, label)
    }
}

impl fmt::Display for Quantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.label)
    }
}

impl FromStr for Quantum {
    type Err = QuantaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QuantaError::BadCode(s.to_string());
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('p') => QuantumKind::Percept,
            Some('q') => QuantumKind::Qualia,
            Some('g') => QuantumKind::Cognition,
            _ => return Err(bad()),
        };
        let digits = chars.as_str();
        if digits.is_empty()
            || digits.starts_with('0')
            || !digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let label = digits.parse::<u32>().map_err(|_| bad())?;
        Ok(Quantum { kind, label })
    }
}

/// An ordered sequence of quanta, either chained by arrow functions or bare.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantaString {
    pub items: Vec<Quantum>,
    pub chained: bool,
}

impl QuantaString {
    pub fn new(items: Vec<Quantum>, chained: bool) -> Result<Self, QuantaError> {
        if items.is_empty() {
            return Err(QuantaError::EmptyString);
        }
        Ok(QuantaString { items, chained })
    }

    pub fn single(q: Quantum) -> Self {
        QuantaString {
            items: vec![q],
            chained: false,
        }
    }

    pub fn chain(items: Vec<Quantum>) -> Result<Self, QuantaError> {
        QuantaString::new(items, true)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Parses `"p1->g1"` (chained) or `"p1 g1"` / `"q1"` (bare).
    pub fn parse(text: &str) -> Result<Self, QuantaError> {
        let text = text.trim();
        let chained = text.contains("->");
        let items = if chained {
            text.split("->")
                .map(|c| c.trim().parse())
                .collect::<Result<Vec<_>, _>>()?
        } else {
            text.split_whitespace()
                .map(str::parse)
                .collect::<Result<Vec<_>, _>>()?
        };
        QuantaString::new(items, chained)
    }
}

impl fmt::Display for QuantaString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.chained { "->" } else { " " };
        for (i, q) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternElement {
    Literal(Quantum),
    /// `*`: exactly one quantum.
    One,
    /// `**`: any run of quanta, including the empty run.
    Many,
}

impl fmt::Display for PatternElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternElement::Literal(q) => write!(f, "{q}"),
            PatternElement::One => f.write_str("*"),
            PatternElement::Many => f.write_str("**"),
        }
    }
}

impl FromStr for PatternElement {
    type Err = QuantaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "*" => Ok(PatternElement::One),
            "**" => Ok(PatternElement::Many),
            code => code.parse().map(PatternElement::Literal),
        }
    }
}

/// Matches quanta strings element-wise. The chained flag of the matched
/// string is ignored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantaPattern {
    pub elements: Vec<PatternElement>,
}

impl QuantaPattern {
    pub fn new(elements: Vec<PatternElement>) -> Result<Self, QuantaError> {
        if elements.is_empty() {
            return Err(QuantaError::EmptyPattern);
        }
        Ok(QuantaPattern { elements })
    }

    /// The pattern matching exactly the items of `s`.
    pub fn exact(s: &QuantaString) -> Self {
        QuantaPattern {
            elements: s.items.iter().copied().map(PatternElement::Literal).collect(),
        }
    }

    /// Parses whitespace-separated elements, e.g. `"p1 * **"`.
    pub fn parse(text: &str) -> Result<Self, QuantaError> {
        let elements = text
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        QuantaPattern::new(elements)
    }

    pub fn matches(&self, s: &QuantaString) -> bool {
        self.matches_items(&s.items)
    }

    pub fn matches_items(&self, items: &[Quantum]) -> bool {
        // reachable[j]: the consumed pattern prefix can match items[..j]
        let n = items.len();
        let mut reachable = vec![false; n + 1];
        reachable[0] = true;
        for elem in &self.elements {
            let mut next = vec![false; n + 1];
            match elem {
                PatternElement::Many => {
                    let mut seen = false;
                    for j in 0..=n {
                        seen |= reachable[j];
                        next[j] = seen;
                    }
                }
                PatternElement::One => {
                    for j in 0..n {
                        next[j + 1] = reachable[j];
                    }
                }
                PatternElement::Literal(q) => {
                    for j in 0..n {
                        next[j + 1] = reachable[j] && items[j] == *q;
                    }
                }
            }
            reachable = next;
        }
        reachable[n]
    }
}

impl fmt::Display for QuantaPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
