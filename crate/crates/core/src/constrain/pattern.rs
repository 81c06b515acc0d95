//! Regular-expression syntax accepted by the pattern compiler: literals,
//! backslash escapes, positive character classes with ranges, grouping,
//! alternation, and the `?`/`*`/`+` quantifiers. Everything that would
//! take the language beyond a finite automaton over an explicit alphabet
//! (wildcards, negated classes, backreferences, anchors) is rejected.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("pattern ended unexpectedly")]
    UnexpectedEnd,
    #[error("unbalanced parenthesis at byte {0}")]
    UnbalancedParen(usize),
    #[error("quantifier at byte {0} has nothing to repeat")]
    DanglingQuantifier(usize),
    #[error("unescaped `.` at byte {0} is not supported; write `\\.` for a literal dot")]
    UnescapedDot(usize),
    #[error("unsupported construct `{what}` at byte {pos}")]
    Unsupported { pos: usize, what: String },
    #[error("unknown escape `\\{0}`")]
    BadEscape(char),
    #[error("malformed character class at byte {0}")]
    BadClass(usize),
    #[error("character class at byte {pos} expands to {size} characters (limit {limit})")]
    ClassTooLarge { pos: usize, size: usize, limit: usize },
}

const CLASS_EXPANSION_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Ast {
    Empty,
    Literal(char),
    /// Inclusive character ranges.
    Class(Vec<(char, char)>),
    Concat(Vec<Ast>),
    Alternate(Vec<Ast>),
    Repeat { inner: Box<Ast>, kind: RepeatKind },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RepeatKind {
    ZeroOrOne,
    ZeroOrMore,
    OneOrMore,
}

pub(crate) fn parse(pattern: &str) -> Result<Ast, PatternError> {
    let chars: Vec<(usize, char)> = pattern.char_indices().collect();
    let mut parser = Parser { chars: &chars, pos: 0 };
    let ast = parser.alternation()?;
    match parser.peek() {
        None => Ok(ast),
        Some((byte, ')')) => Err(PatternError::UnbalancedParen(byte)),
        Some((byte, c)) => Err(PatternError::Unsupported { pos: byte, what: c.to_string() }),
    }
}

struct Parser<'a> {
    chars: &'a [(usize, char)],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<(usize, char)> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn alternation(&mut self) -> Result<Ast, PatternError> {
        let mut branches = vec![self.concat()?];
        while matches!(self.peek(), Some((_, '|'))) {
            self.bump();
            branches.push(self.concat()?);
        }
        if branches.len() == 1 {
            Ok(branches.pop().unwrap())
        } else {
            Ok(Ast::Alternate(branches))
        }
    }

    fn concat(&mut self) -> Result<Ast, PatternError> {
        let mut parts = Vec::new();
        while let Some((byte, c)) = self.peek() {
            match c {
                '|' | ')' => break,
                '*' | '+' | '?' => return Err(PatternError::DanglingQuantifier(byte)),
                _ => parts.push(self.repeat()?),
            }
        }
        match parts.len() {
            0 => Ok(Ast::Empty),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(Ast::Concat(parts)),
        }
    }

    fn repeat(&mut self) -> Result<Ast, PatternError> {
        let mut node = self.atom()?;
        while let Some((_, c)) = self.peek() {
            let kind = match c {
                '?' => RepeatKind::ZeroOrOne,
                '*' => RepeatKind::ZeroOrMore,
                '+' => RepeatKind::OneOrMore,
                _ => break,
            };
            self.bump();
            node = Ast::Repeat { inner: Box::new(node), kind };
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<Ast, PatternError> {
        let (byte, c) = self.bump().ok_or(PatternError::UnexpectedEnd)?;
        match c {
            '(' => {
                let inner = self.alternation()?;
                match self.bump() {
                    Some((_, ')')) => Ok(inner),
                    _ => Err(PatternError::UnbalancedParen(byte)),
                }
            }
            '[' => self.class(byte),
            '\\' => Ok(Ast::Literal(self.escape()?)),
            '.' => Err(PatternError::UnescapedDot(byte)),
            '^' | '$' | '{' | '}' | ']' => {
                Err(PatternError::Unsupported { pos: byte, what: c.to_string() })
            }
            _ => Ok(Ast::Literal(c)),
        }
    }

    fn escape(&mut self) -> Result<char, PatternError> {
        let (_, c) = self.bump().ok_or(PatternError::UnexpectedEnd)?;
        match c {
            '.' | '\\' | '(' | ')' | '[' | ']' | '|' | '*' | '+' | '?' | '-' | '^' | '$'
            | '{' | '}' | '/' => Ok(c),
            'n' => Ok('\n'),
            't' => Ok('\t'),
            'r' => Ok('\r'),
            other => Err(PatternError::BadEscape(other)),
        }
    }

    fn class(&mut self, open_byte: usize) -> Result<Ast, PatternError> {
        if matches!(self.peek(), Some((_, '^'))) {
            return Err(PatternError::Unsupported {
                pos: open_byte,
                what: "negated class".to_string(),
            });
        }
        let mut ranges: Vec<(char, char)> = Vec::new();
        loop {
            let (byte, c) = self.bump().ok_or(PatternError::BadClass(open_byte))?;
            if c == ']' {
                if ranges.is_empty() {
                    return Err(PatternError::BadClass(open_byte));
                }
                break;
            }
            let lo = if c == '\\' { self.escape()? } else { c };
            // a '-' forms a range unless it sits right before ']'
            let is_range = matches!(self.peek(), Some((_, '-')))
                && !matches!(self.chars.get(self.pos + 1), Some((_, ']')) | None);
            if is_range {
                self.bump();
                let (_, h) = self.bump().ok_or(PatternError::BadClass(open_byte))?;
                let hi = if h == '\\' { self.escape()? } else { h };
                if hi < lo {
                    return Err(PatternError::BadClass(byte));
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        let size: usize = ranges.iter().map(|&(lo, hi)| hi as usize - lo as usize + 1).sum();
        if size > CLASS_EXPANSION_LIMIT {
            return Err(PatternError::ClassTooLarge {
                pos: open_byte,
                size,
                limit: CLASS_EXPANSION_LIMIT,
            });
        }
        Ok(Ast::Class(ranges))
    }
}
