use std::collections::BTreeSet;
use std::fmt;

/// A propositional formula.
///
/// Conjunctions and disjunctions are n-ary. The parser flattens chains of the
/// same operator (`a & b & c`) into one node but keeps parenthesized groups
/// nested, so rendering and re-parsing yields a structurally equal tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Const(bool),
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn iff(lhs: Formula, rhs: Formula) -> Self {
        Formula::Iff(Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction of `parts`; a single part is returned unchanged and an empty
    /// list yields `true`.
    pub fn and(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::Const(true),
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Self {
        match parts.len() {
            0 => Formula::Const(false),
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// All atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(a) => {
                out.insert(a.as_str());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluates the formula under `value`, which maps atom names to truth values.
    pub fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => value(a),
            Formula::Not(f) => !f.eval(value),
            Formula::And(fs) => fs.iter().all(|f| f.eval(value)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(value)),
            Formula::Implies(a, b) => !a.eval(value) || b.eval(value),
            Formula::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(_) => 3,
            Formula::And(_) => 4,
            Formula::Not(_) => 5,
            Formula::Const(_) | Formula::Atom(_) => 6,
        }
    }
}

fn write_child(child: &Formula, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Canonical rendering with the minimal parentheses needed to re-parse the
/// same tree. Precedence: `!` > `&` > `|` > `->` (right-assoc) > `<->` (left-assoc).
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(inner) => {
                f.write_str("!")?;
                write_child(inner, inner.precedence() < prec, f)
            }
            Formula::And(parts) | Formula::Or(parts) => {
                let op = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    // same-operator children must stay grouped, otherwise the
                    // parser would flatten them into this node
                    write_child(part, part.precedence() <= prec, f)?;
                }
                Ok(())
            }
            Formula::Implies(lhs, rhs) => {
                write_child(lhs, lhs.precedence() <= prec, f)?;
                f.write_str(" -> ")?;
                write_child(rhs, rhs.precedence() < prec, f)
            }
            Formula::Iff(lhs, rhs) => {
                write_child(lhs, lhs.precedence() < prec, f)?;
                f.write_str(" <-> ")?;
                write_child(rhs, rhs.precedence() <= prec, f)
            }
        }
    }
}
