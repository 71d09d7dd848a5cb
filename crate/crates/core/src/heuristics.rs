//! Measures for ranking q-partitions (stage 1) and queries (stage 2).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnosis::DiagnosisDistribution;
use crate::error::{Error, Result};
use crate::fpi::Diagnosis;
use crate::qpartition::QPartition;

/// Scores closer than this compare equal.
pub const SCORE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_CAUTIOUSNESS: f64 = 0.3;
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HeuristicId {
    #[serde(rename = "ENT")]
    Ent,
    #[serde(rename = "SPL")]
    Spl,
    #[serde(rename = "RIO")]
    Rio,
    #[serde(rename = "RND")]
    Rnd,
    #[serde(rename = "BME")]
    Bme,
    #[serde(rename = "KL")]
    Kl,
    #[serde(rename = "EMCb")]
    Emcb,
}

impl HeuristicId {
    pub const ALL: [HeuristicId; 7] = [
        HeuristicId::Ent,
        HeuristicId::Spl,
        HeuristicId::Rio,
        HeuristicId::Rnd,
        HeuristicId::Bme,
        HeuristicId::Kl,
        HeuristicId::Emcb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicId::Ent => "ENT",
            HeuristicId::Spl => "SPL",
            HeuristicId::Rio => "RIO",
            HeuristicId::Rnd => "RND",
            HeuristicId::Bme => "BME",
            HeuristicId::Kl => "KL",
            HeuristicId::Emcb => "EMCb",
        }
    }
}

impl fmt::Display for HeuristicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HeuristicId::ALL
            .into_iter()
            .find(|h| h.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown heuristic `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Value of one candidate under one heuristic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    pub value: f64,
    pub direction: Direction,
    pub optimum: f64,
    /// Lexicographic ranking key, smaller is better.
    key: [f64; 3],
    goal: bool,
}

impl Score {
    /// Whether the value is within the goal tolerance of the optimum.
    pub fn is_goal(&self) -> bool {
        self.goal
    }

    /// `Less` when `self` ranks better than `other`.
    pub fn rank(&self, other: &Score) -> Ordering {
        for (a, b) in self.key.iter().zip(&other.key) {
            if (a - b).abs() > SCORE_TOLERANCE {
                return a.partial_cmp(b).unwrap_or(Ordering::Equal);
            }
        }
        Ordering::Equal
    }

    pub fn is_better_than(&self, other: &Score) -> bool {
        self.rank(other) == Ordering::Less
    }
}

/// `pYes = p(D+) + p(D0)/2`, `pNo = 1 - pYes`.
pub fn answer_probabilities(ds: &[Diagnosis], p: &QPartition, dist: &DiagnosisDistribution) -> (f64, f64) {
    let mass = |idx: &[usize]| idx.iter().map(|&i| dist.p(&ds[i])).sum::<f64>();
    let total = mass(&p.d_plus) + mass(&p.d_minus) + mass(&p.d_zero);
    let total = if total > 0.0 { total } else { 1.0 };
    let p_yes = (mass(&p.d_plus) + mass(&p.d_zero) / 2.0) / total;
    (p_yes, 1.0 - p_yes)
}

fn plog2p(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

fn entropy_score(ds: &[Diagnosis], p: &QPartition, dist: &DiagnosisDistribution) -> f64 {
    let (y, n) = answer_probabilities(ds, p, dist);
    let zero: f64 = p.d_zero.iter().map(|&i| dist.p(&ds[i])).sum();
    plog2p(y) + plog2p(n) + zero + 1.0
}

fn kl_score(ds: &[Diagnosis], p: &QPartition, dist: &DiagnosisDistribution) -> f64 {
    let (y, n) = answer_probabilities(ds, p, dist);
    let term = |p_a: f64, full: &[usize]| -> f64 {
        if p_a <= 0.0 {
            return 0.0;
        }
        let part = |idx: &[usize], share: f64| -> f64 {
            idx.iter()
                .map(|&i| {
                    let prior = dist.p(&ds[i]);
                    let post = prior * share / p_a;
                    if post <= 0.0 {
                        0.0
                    } else {
                        post * (post / prior).log2()
                    }
                })
                .sum()
        };
        p_a * (part(full, 1.0) + part(&p.d_zero, 0.5))
    };
    term(y, &p.d_plus) + term(n, &p.d_minus)
}

/// Heuristic parameters that appear in configuration by these names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    /// RIO cautiousness `c` in `[0, 0.5]`.
    #[serde(rename = "c")]
    pub cautiousness: f64,
    /// Normalized optimality gap that counts as good enough.
    pub epsilon: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams { cautiousness: DEFAULT_CAUTIOUSNESS, epsilon: DEFAULT_EPSILON }
    }
}

impl HeuristicParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.cautiousness) {
            return Err(Error::InvalidConfig(format!("c must lie in [0, 0.5], got {}", self.cautiousness)));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Scores `p` under `h`. Only RND consumes randomness.
pub fn score(
    h: HeuristicId,
    ds: &[Diagnosis],
    p: &QPartition,
    dist: &DiagnosisDistribution,
    params: &HeuristicParams,
    rng: &mut impl Rng,
) -> Score {
    let n = p.total().max(1) as f64;
    let eps = params.epsilon;
    let (plus, minus, zero) = (p.d_plus.len() as f64, p.d_minus.len() as f64, p.d_zero.len() as f64);
    let ent = entropy_score(ds, p, dist);
    match h {
        HeuristicId::Ent => Score {
            value: ent,
            direction: Direction::Minimize,
            optimum: 0.0,
            key: [ent, 0.0, 0.0],
            goal: ent <= eps,
        },
        HeuristicId::Spl => {
            let value = (plus - minus).abs() + zero;
            let optimum = (p.total() % 2) as f64;
            Score {
                value,
                direction: Direction::Minimize,
                optimum,
                key: [value, 0.0, 0.0],
                goal: (value - optimum) / n <= eps,
            }
        }
        HeuristicId::Rio => {
            let need = (params.cautiousness * n - SCORE_TOLERANCE).ceil();
            let smaller = plus.min(minus);
            let feasible = smaller >= need;
            Score {
                value: ent,
                direction: Direction::Minimize,
                optimum: 0.0,
                key: if feasible { [0.0, ent, 0.0] } else { [1.0, -smaller, ent] },
                goal: feasible && ent <= eps,
            }
        }
        HeuristicId::Rnd => {
            let draw: f64 = rng.gen();
            Score { value: draw, direction: Direction::Minimize, optimum: 0.0, key: [draw, 0.0, 0.0], goal: true }
        }
        HeuristicId::Bme => {
            let (y, no) = answer_probabilities(ds, p, dist);
            let value = if y > 0.5 {
                minus
            } else if no > 0.5 {
                plus
            } else {
                0.0
            };
            let optimum = n - 1.0;
            Score {
                value,
                direction: Direction::Maximize,
                optimum,
                key: [-value, ent, 0.0],
                goal: (optimum - value) / n <= eps,
            }
        }
        HeuristicId::Kl => {
            let value = kl_score(ds, p, dist);
            Score {
                value,
                direction: Direction::Maximize,
                optimum: 1.0,
                key: [-value, 0.0, 0.0],
                goal: 1.0 - value <= eps,
            }
        }
        HeuristicId::Emcb => {
            let (y, no) = answer_probabilities(ds, p, dist);
            let value = y * minus + no * plus;
            let optimum = n - 1.0;
            Score {
                value,
                direction: Direction::Maximize,
                optimum,
                key: [-value, 0.0, 0.0],
                goal: (optimum - value) / n <= eps,
            }
        }
    }
}
