//! Equisatisfiable clause form.
//!
//! Top-level conjunctions are split and clause-shaped formulas map directly to
//! clauses; any other subformula gets a fresh auxiliary atom with a full
//! (two-way) Tseitin definition. Auxiliary atoms are named `_t<n>`, which
//! the parser refuses for user atoms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::formula::Formula;
use super::sat::Lit;
use super::RESERVED_PREFIX;

/// A literal over a named atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: String,
    pub positive: bool,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            f.write_str(&self.atom)
        } else {
            write!(f, "!{}", self.atom)
        }
    }
}

/// A set of clauses, each a set of literals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseSet {
    pub clauses: BTreeSet<BTreeSet<Literal>>,
}

impl ClauseSet {
    /// All atoms, including auxiliary ones.
    pub fn atoms(&self) -> BTreeSet<&str> {
        self.clauses.iter().flatten().map(|l| l.atom.as_str()).collect()
    }

    pub fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| value(&l.atom) == l.positive))
    }
}

/// Clausifies a set of formulas.
pub fn to_clauses<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> ClauseSet {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let formulas: Vec<&Formula> = formulas.into_iter().collect();
    for f in &formulas {
        for a in f.atoms() {
            if !index.contains_key(a) {
                index.insert(a.to_string(), names.len() as u32);
                names.push(a.to_string());
            }
        }
    }
    let user_atoms = names.len() as u32;
    let mut enc = Encoder::new(user_atoms);
    for f in formulas {
        enc.assert(f, &|name| index[name]);
    }
    let mut aux_names = BTreeMap::new();
    let name_of = |var: u32, aux_names: &mut BTreeMap<u32, String>| -> String {
        if var < user_atoms {
            names[var as usize].clone()
        } else {
            aux_names.entry(var).or_insert_with(|| format!("{RESERVED_PREFIX}t{}", var - user_atoms)).clone()
        }
    };
    let clauses = enc
        .clauses
        .iter()
        .map(|c| {
            c.iter()
                .map(|l| Literal { atom: name_of(l.var(), &mut aux_names), positive: l.is_positive() })
                .collect()
        })
        .collect();
    ClauseSet { clauses }
}

/// Result of simplifying constants away: either a constant or a formula
/// without any `Const` node.
fn simplify(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Const(_) | Atom(_) => f.clone(),
        Not(inner) => match simplify(inner) {
            Const(b) => Const(!b),
            g => Formula::not(g),
        },
        And(parts) => {
            let mut kept = Vec::new();
            for p in parts {
                match simplify(p) {
                    Const(true) => {}
                    Const(false) => return Const(false),
                    g => kept.push(g),
                }
            }
            Formula::and(kept)
        }
        Or(parts) => {
            let mut kept = Vec::new();
            for p in parts {
                match simplify(p) {
                    Const(false) => {}
                    Const(true) => return Const(true),
                    g => kept.push(g),
                }
            }
            Formula::or(kept)
        }
        Implies(a, b) => match (simplify(a), simplify(b)) {
            (Const(false), _) | (_, Const(true)) => Const(true),
            (Const(true), g) => g,
            (g, Const(false)) => Formula::not(g),
            (g, h) => Formula::implies(g, h),
        },
        Iff(a, b) => match (simplify(a), simplify(b)) {
            (Const(x), Const(y)) => Const(x == y),
            (Const(true), g) | (g, Const(true)) => g,
            (Const(false), g) | (g, Const(false)) => Formula::not(g),
            (g, h) => Formula::iff(g, h),
        },
    }
}

/// Integer-level Tseitin encoder. User atoms are mapped by the caller; fresh
/// auxiliary variables are allocated from `next_var` upward.
pub(crate) struct Encoder {
    pub next_var: u32,
    pub clauses: Vec<Vec<Lit>>,
}

/// Top-level truth of an encoded formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Root {
    Const(bool),
    Lit(Lit),
}

impl Encoder {
    pub fn new(first_aux: u32) -> Self {
        Encoder { next_var: first_aux, clauses: Vec::new() }
    }

    fn fresh(&mut self) -> Lit {
        let v = self.next_var;
        self.next_var += 1;
        Lit::new(v, true)
    }

    /// Adds clauses equisatisfiable with `f` being true.
    pub fn assert(&mut self, f: &Formula, var: &dyn Fn(&str) -> u32) {
        match simplify(f) {
            Formula::Const(true) => {}
            Formula::Const(false) => self.clauses.push(Vec::new()),
            g => self.assert_simplified(&g, var),
        }
    }

    /// Adds a full definition `r <-> f` and returns `r`.
    pub fn define_root(&mut self, f: &Formula, var: &dyn Fn(&str) -> u32) -> Root {
        match simplify(f) {
            Formula::Const(b) => Root::Const(b),
            g => Root::Lit(self.define(&g, var)),
        }
    }

    fn assert_simplified(&mut self, f: &Formula, var: &dyn Fn(&str) -> u32) {
        match f {
            Formula::And(parts) => parts.iter().for_each(|p| self.assert_simplified(p, var)),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Not(g) => self.assert_simplified(g, var),
                Formula::Or(parts) => {
                    for p in parts {
                        self.assert_simplified(&Formula::not(p.clone()), var);
                    }
                }
                Formula::Implies(a, b) => {
                    self.assert_simplified(a, var);
                    self.assert_simplified(&Formula::not(b.as_ref().clone()), var);
                }
                _ => self.assert_clause(f, var),
            },
            _ => self.assert_clause(f, var),
        }
    }

    fn assert_clause(&mut self, f: &Formula, var: &dyn Fn(&str) -> u32) {
        let mut lits = Vec::new();
        self.disjuncts(f, true, var, &mut lits);
        self.clauses.push(lits);
    }

    /// Collects literals whose disjunction is equivalent to `f` (or `!f` when
    /// `positive` is false), defining non-literal parts.
    fn disjuncts(&mut self, f: &Formula, positive: bool, var: &dyn Fn(&str) -> u32, out: &mut Vec<Lit>) {
        match (f, positive) {
            (Formula::Atom(a), _) => out.push(Lit::new(var(a), positive)),
            (Formula::Not(inner), _) => self.disjuncts(inner, !positive, var, out),
            (Formula::Or(parts), true) | (Formula::And(parts), false) => {
                parts.iter().for_each(|p| self.disjuncts(p, positive, var, out))
            }
            (Formula::Implies(a, b), true) => {
                self.disjuncts(a, false, var, out);
                self.disjuncts(b, true, var, out);
            }
            _ => {
                let r = self.define(f, var);
                out.push(if positive { r } else { !r });
            }
        }
    }

    fn define(&mut self, f: &Formula, var: &dyn Fn(&str) -> u32) -> Lit {
        match f {
            Formula::Atom(a) => Lit::new(var(a), true),
            Formula::Not(inner) => !self.define(inner, var),
            Formula::And(parts) | Formula::Or(parts) => {
                let is_and = matches!(f, Formula::And(_));
                let ls: Vec<Lit> = parts.iter().map(|p| self.define(p, var)).collect();
                let t = self.fresh();
                // And: t -> li, (l1 & .. & lk) -> t; Or is the dual.
                let (t_side, l_side) = if is_and { (!t, t) } else { (t, !t) };
                for &l in &ls {
                    self.clauses.push(vec![t_side, if is_and { l } else { !l }]);
                }
                let mut big = vec![l_side];
                big.extend(ls.iter().map(|&l| if is_and { !l } else { l }));
                self.clauses.push(big);
                t
            }
            Formula::Implies(a, b) => {
                let (la, lb) = (self.define(a, var), self.define(b, var));
                let t = self.fresh();
                self.clauses.push(vec![t, la]);
                self.clauses.push(vec![t, !lb]);
                self.clauses.push(vec![!t, !la, lb]);
                t
            }
            Formula::Iff(a, b) => {
                let (la, lb) = (self.define(a, var), self.define(b, var));
                let t = self.fresh();
                self.clauses.push(vec![!t, !la, lb]);
                self.clauses.push(vec![!t, la, !lb]);
                self.clauses.push(vec![t, la, lb]);
                self.clauses.push(vec![t, !la, !lb]);
                t
            }
            Formula::Const(_) => unreachable!("constants are simplified away before encoding"),
        }
    }
}
