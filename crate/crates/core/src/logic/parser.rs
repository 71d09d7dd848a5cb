//! Line-oriented KB text format.
//!
//! ```text
//! # comment
//! o: ar -> w            possibly faulty axiom
//! b: ar                 background axiom
//! p: x; y               positive test case (conjunction of its parts)
//! n: e                  negative test case
//! ```
//!
//! Operators by decreasing precedence: `!`, `&`, `|`, `->` (right-assoc),
//! `<->` (left-assoc). Atom names match `[A-Za-z_][A-Za-z0-9_]*`; names
//! starting with `_` are reserved for clausification.

use std::fmt;

use super::formula::Formula;
use super::{Axiom, AxiomId, RESERVED_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

/// Raw content of a KB file. Test cases are kept as formula lists; the FPI
/// layer turns them into typed test cases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedKb {
    pub o: Vec<Axiom>,
    pub b: Vec<Axiom>,
    pub p: Vec<Vec<Formula>>,
    pub n: Vec<Vec<Formula>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::True => f.write_str("`true`"),
            Tok::False => f.write_str("`false`"),
            Tok::Not => f.write_str("`!`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Iff => f.write_str("`<->`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

type Spanned = Vec<(Tok, usize)>;

/// Tokens with their 0-based char offsets.
fn lex(src: &str) -> Result<(Spanned, usize), (usize, String)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Implies
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_') {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ if word.starts_with(RESERVED_PREFIX) => {
                        return Err((start, format!("atom `{word}` uses the reserved `_` prefix")));
                    }
                    _ => Tok::Ident(word),
                }
            }
            other => return Err((start, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok((out, chars.len()))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, (usize, String)> {
        Err((self.offset(), msg.into()))
    }

    fn iff(&mut self) -> Result<Formula, (usize, String)> {
        let mut lhs = self.implication()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, (usize, String)> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, (usize, String)> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, (usize, String)> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::And) {
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, (usize, String)> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, (usize, String)> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of formula");
        };
        self.pos += 1;
        match tok {
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::True => Ok(Formula::Const(true)),
            Tok::False => Ok(Formula::Const(false)),
            Tok::LParen => {
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected {other}"))
            }
        }
    }
}

fn parse_at(src: &str) -> Result<Formula, (usize, String)> {
    let (toks, end) = lex(src)?;
    let mut p = Parser { toks, pos: 0, end };
    let f = p.iff()?;
    if let Some(tok) = p.peek() {
        return p.err(format!("unexpected {tok} after formula"));
    }
    Ok(f)
}

/// Parses a single formula. Errors are reported on line 1.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    parse_at(src).map_err(|(off, msg)| ParseError::new(1, off + 1, msg))
}

/// Parses a KB file. Axioms from `o:` and `b:` lines are numbered from 1 in
/// file order.
pub fn parse_kb(text: &str) -> Result<ParsedKb, ParseError> {
    let mut kb = ParsedKb::default();
    let mut next_id = 1u32;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(ParseError::new(line_no, col, "expected `<section>: <formula>`"));
        };
        let section = content[..colon].trim();
        let body = &content[colon + 1..];
        // char column of the body start, 1-based
        let body_col = content[..colon + 1].chars().count() + 1;
        let parse_part = |part: &str, part_col: usize| -> Result<Formula, ParseError> {
            if part.trim().is_empty() {
                return Err(ParseError::new(line_no, part_col, "empty formula"));
            }
            parse_at(part).map_err(|(off, msg)| ParseError::new(line_no, part_col + off, msg))
        };
        match section {
            "o" | "b" => {
                if body.contains(';') {
                    let col = body_col + body[..body.find(';').unwrap()].chars().count();
                    return Err(ParseError::new(line_no, col, "`;` is only allowed in test cases"));
                }
                let formula = parse_part(body, body_col)?;
                let clash = kb.o.iter().chain(kb.b.iter()).find(|ax| ax.formula == formula);
                if let Some(prev) = clash {
                    return Err(ParseError::new(
                        line_no,
                        body_col,
                        format!("axiom `{formula}` duplicates axiom {}", prev.id),
                    ));
                }
                let ax = Axiom { id: AxiomId(next_id), formula };
                next_id += 1;
                if section == "o" {
                    kb.o.push(ax);
                } else {
                    kb.b.push(ax);
                }
            }
            "p" | "n" => {
                let mut parts = Vec::new();
                let mut col = body_col;
                for part in body.split(';') {
                    parts.push(parse_part(part, col)?);
                    col += part.chars().count() + 1;
                }
                if section == "p" {
                    kb.p.push(parts);
                } else {
                    kb.n.push(parts);
                }
            }
            other => {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(ParseError::new(line_no, col, format!("unknown section `{other}`")));
            }
        }
    }
    if kb.o.is_empty() {
        return Err(ParseError::new(text.lines().count().max(1), 1, "no possibly faulty (`o:`) axioms"));
    }
    Ok(kb)
}

/// Renders a KB back into the text format. Axiom ids are not written; they
/// are re-derived from line order, so the output re-parses to equal axioms
/// when `o` and `b` ids were assigned in file order.
pub fn render_kb(kb: &ParsedKb) -> String {
    let mut axioms: Vec<(&str, &Axiom)> =
        kb.o.iter().map(|a| ("o", a)).chain(kb.b.iter().map(|a| ("b", a))).collect();
    axioms.sort_by_key(|(_, a)| a.id);
    let mut out = String::new();
    for (sec, ax) in axioms {
        out.push_str(&format!("{sec}: {}\n", ax.formula));
    }
    for (sec, cases) in [("p", &kb.p), ("n", &kb.n)] {
        for case in cases {
            let parts: Vec<String> = case.iter().map(|f| f.to_string()).collect();
            out.push_str(&format!("{sec}: {}\n", parts.join("; ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn smallest_kb() {
        let kb = parse_kb("o: a -> b\nb: a\nn: b").unwrap();
        assert_eq!(kb.o.len(), 1);
        assert_eq!(kb.o[0].formula, Formula::implies(a("a"), a("b")));
        assert_eq!(kb.o[0].id, AxiomId(1));
        assert_eq!(kb.b[0].formula, a("a"));
        assert_eq!(kb.b[0].id, AxiomId(2));
        assert_eq!(kb.n, vec![vec![a("b")]]);
        assert!(kb.p.is_empty());
    }

    #[test]
    fn dangling_operator_is_a_syntax_error() {
        let err = parse_kb("o: a -> ").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 9);
        assert!(err.message.contains("end of formula"), "{err}");
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("!a & b | c -> d -> e <-> f <-> g").unwrap();
        let lhs = Formula::implies(
            Formula::Or(vec![Formula::And(vec![Formula::not(a("a")), a("b")]), a("c")]),
            Formula::implies(a("d"), a("e")),
        );
        let expected = Formula::iff(Formula::iff(lhs, a("f")), a("g"));
        assert_eq!(f, expected);
    }

    #[test]
    fn parenthesized_groups_stay_nested() {
        let f = parse_formula("(a & b) & c").unwrap();
        assert_eq!(f, Formula::And(vec![Formula::And(vec![a("a"), a("b")]), a("c")]));
        let f = parse_formula("a & b & c").unwrap();
        assert_eq!(f, Formula::And(vec![a("a"), a("b"), a("c")]));
    }

    #[test]
    fn test_case_parts_and_comments() {
        let kb = parse_kb("# header\no: x # trailing\np: x; y & z\n\nn: w").unwrap();
        assert_eq!(kb.p, vec![vec![a("x"), Formula::And(vec![a("y"), a("z")])]]);
        assert_eq!(kb.n, vec![vec![a("w")]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_kb("b: a\nn: a").unwrap_err().message.contains("no possibly faulty"));
        assert!(parse_kb("o: _t1").unwrap_err().message.contains("reserved"));
        assert!(parse_kb("q: a").unwrap_err().message.contains("unknown section"));
        assert!(parse_kb("o: a\nb: a").unwrap_err().message.contains("duplicates"));
        assert!(parse_kb("o: a; b").is_err());
        assert!(parse_kb("o: a\nn: b;").is_err());
        assert!(parse_kb("o: (a").is_err());
        assert!(parse_kb("o: a b").is_err());
        assert!(parse_kb("o: a $ b").is_err());
        assert!(parse_kb("just text").is_err());
        let err = parse_kb("o: a\no: b & )").unwrap_err();
        assert_eq!((err.line, err.column), (2, 8));
    }

    #[test]
    fn render_round_trips() {
        let text = "o: ar -> w\no: w -> au\no: au -> e & p\nb: ar\np: w; !(x | y)\nn: e\n";
        let kb = parse_kb(text).unwrap();
        assert_eq!(render_kb(&kb), text);
        assert_eq!(parse_kb(&render_kb(&kb)).unwrap(), kb);
    }
}
