//! A small complete DPLL solver with two-watched-literal propagation and
//! chronological backtracking. Instances here are tiny (tens of variables),
//! so there is no clause learning.

use std::ops::Not;

use super::LogicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: u32, positive: bool) -> Lit {
        Lit(var << 1 | u32::from(!positive))
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unset,
}

struct Level {
    decision: Lit,
    trail_start: usize,
    flipped: bool,
}

struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<Value>,
    trail: Vec<Lit>,
    qhead: usize,
    levels: Vec<Level>,
}

impl Solver {
    fn value(&self, lit: Lit) -> Value {
        match self.assign[lit.var() as usize] {
            Value::Unset => Value::Unset,
            Value::True if lit.is_positive() => Value::True,
            Value::False if !lit.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    /// Returns false if `lit` is already false.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match self.value(lit) {
            Value::True => true,
            Value::False => false,
            Value::Unset => {
                self.assign[lit.var() as usize] = if lit.is_positive() { Value::True } else { Value::False };
                self.trail.push(lit);
                true
            }
        }
    }

    /// Unit propagation; returns true on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let false_lit = !self.trail[self.qhead];
            self.qhead += 1;
            let mut watching = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut conflict = false;
            while i < watching.len() {
                let ci = watching[i];
                if self.clauses[ci][0] == false_lit {
                    self.clauses[ci].swap(0, 1);
                }
                let first = self.clauses[ci][0];
                if self.value(first) == Value::True {
                    i += 1;
                    continue;
                }
                let replacement = (2..self.clauses[ci].len()).find(|&k| self.value(self.clauses[ci][k]) != Value::False);
                if let Some(k) = replacement {
                    self.clauses[ci].swap(1, k);
                    let new_watch = self.clauses[ci][1];
                    self.watches[new_watch.code()].push(ci);
                    watching.swap_remove(i);
                    continue;
                }
                if !self.enqueue(first) {
                    conflict = true;
                    break;
                }
                i += 1;
            }
            self.watches[false_lit.code()] = watching;
            if conflict {
                return true;
            }
        }
        false
    }

    fn undo_to(&mut self, trail_len: usize) {
        for lit in self.trail.drain(trail_len..) {
            self.assign[lit.var() as usize] = Value::Unset;
        }
        self.qhead = self.qhead.min(trail_len);
    }

    /// Flips the most recent unflipped decision. Returns false when the
    /// search space is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(level) = self.levels.pop() {
            self.undo_to(level.trail_start);
            if !level.flipped {
                let flipped = !level.decision;
                self.levels.push(Level { decision: flipped, trail_start: level.trail_start, flipped: true });
                self.enqueue(flipped);
                return true;
            }
        }
        false
    }
}

/// Decides satisfiability of `clauses` over variables `0..num_vars`.
///
/// At most `budget` decisions are made; exceeding it is reported as
/// [`LogicError::BudgetExceeded`], never as an answer.
pub fn solve<'a>(
    num_vars: u32,
    clauses: impl IntoIterator<Item = &'a [Lit]>,
    budget: u64,
) -> Result<bool, LogicError> {
    let mut solver = Solver {
        clauses: Vec::new(),
        watches: vec![Vec::new(); 2 * num_vars as usize],
        assign: vec![Value::Unset; num_vars as usize],
        trail: Vec::new(),
        qhead: 0,
        levels: Vec::new(),
    };
    let mut units = Vec::new();
    for clause in clauses {
        let mut lits = clause.to_vec();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            continue; // tautology
        }
        match lits.len() {
            0 => return Ok(false),
            1 => units.push(lits[0]),
            _ => {
                let ci = solver.clauses.len();
                solver.watches[lits[0].code()].push(ci);
                solver.watches[lits[1].code()].push(ci);
                solver.clauses.push(lits);
            }
        }
    }
    for unit in units {
        if !solver.enqueue(unit) {
            return Ok(false);
        }
    }

    let mut decisions = 0u64;
    let mut next_var = 0usize;
    loop {
        if solver.propagate() {
            if !solver.backtrack() {
                return Ok(false);
            }
            next_var = 0;
            continue;
        }
        while next_var < solver.assign.len() && solver.assign[next_var] != Value::Unset {
            next_var += 1;
        }
        if next_var == solver.assign.len() {
            return Ok(true);
        }
        decisions += 1;
        if decisions > budget {
            return Err(LogicError::BudgetExceeded { budget });
        }
        let decision = Lit::new(next_var as u32, false);
        solver.levels.push(Level { decision, trail_start: solver.trail.len(), flipped: false });
        solver.enqueue(decision);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(v: i32) -> Lit {
        Lit::new(v.unsigned_abs() - 1, v > 0)
    }

    fn cnf(cs: &[&[i32]]) -> Vec<Vec<Lit>> {
        cs.iter().map(|c| c.iter().map(|&v| l(v)).collect()).collect()
    }

    fn run(n: u32, cs: &[&[i32]]) -> bool {
        let cs = cnf(cs);
        solve(n, cs.iter().map(|c| c.as_slice()), 1_000_000).unwrap()
    }

    #[test]
    fn basics() {
        assert!(run(0, &[]));
        assert!(!run(1, &[&[]]));
        assert!(!run(1, &[&[1], &[-1]]));
        assert!(run(2, &[&[1, 2], &[-1]]));
        assert!(run(1, &[&[1, -1]]));
        assert!(!run(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]));
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h) = pigeon i in hole h -> var 2*i + h + 1
        let v = |i: i32, h: i32| 2 * i + h + 1;
        let mut cs: Vec<Vec<i32>> = (0..3).map(|i| vec![v(i, 0), v(i, 1)]).collect();
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    cs.push(vec![-v(i, h), -v(j, h)]);
                }
            }
        }
        let refs: Vec<&[i32]> = cs.iter().map(|c| c.as_slice()).collect();
        assert!(!run(6, &refs));
    }

    #[test]
    fn budget_is_reported_distinctly() {
        let v = |i: i32, h: i32| 4 * i + h + 1;
        let mut cs: Vec<Vec<i32>> = (0..5).map(|i| (0..4).map(|h| v(i, h)).collect()).collect();
        for h in 0..4 {
            for i in 0..5 {
                for j in i + 1..5 {
                    cs.push(vec![-v(i, h), -v(j, h)]);
                }
            }
        }
        let cs: Vec<Vec<Lit>> = cs.iter().map(|c| c.iter().map(|&x| l(x)).collect()).collect();
        let err = solve(20, cs.iter().map(|c| c.as_slice()), 3).unwrap_err();
        assert_eq!(err, LogicError::BudgetExceeded { budget: 3 });
        assert_eq!(solve(20, cs.iter().map(|c| c.as_slice()), 10_000_000), Ok(false));
    }
}
