//! Rate-splitting schemes at the DoF level.
//!
//! A scheme superposes one common symbol, sent at power `Θ(P)` with a generic
//! precoder, on ZF-precoded private symbols sent at powers `Θ(P^{a_j})`. The
//! DoF accounting is
//!
//! ```text
//!     d^(c)   = 1 - max_{j active} a_j
//!     d_j^(p) = (a_j - (max_{i active, i != j} a_i - alpha_j)^+)^+
//!     d_j     = d_j^(p) + d_j^(c),       sum_j d_j^(c) = d^(c)
//! ```
//!
//! Maxima range over active users only; an empty maximum is 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DofError, LevelRange, Result};
use crate::region::{CsitProfile, DofTuple};
use crate::Rational;

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RsScheme {
    /// Power-level exponents `a_j`. Ignored for inactive users.
    pub levels: Vec<Rational>,
    /// Users carrying a private symbol.
    pub active: Vec<bool>,
    /// DoF of the common symbol handed to each user, `d_j^(c)`.
    pub common_split: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RsDofOutcome {
    pub private: Vec<Rational>,
    pub common_total: Rational,
    pub total: DofTuple,
}

/// One problem found by [`RsScheme::validate`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SchemeViolation {
    LengthMismatch { field: &'static str, expected: usize, actual: usize },
    LevelOutOfRange { user: usize, level: Rational },
    NegativeSplit { user: usize, value: Rational },
    SplitSumMismatch { split_sum: Rational, common_dof: Rational },
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeViolation::LengthMismatch { field, expected, actual } => {
                write!(f, "{field} has length {actual}, expected {expected}")
            }
            SchemeViolation::LevelOutOfRange { user, level } => {
                write!(f, "level out of [0,1]: user {} has a = {level:?}", user + 1)
            }
            SchemeViolation::NegativeSplit { user, value } => {
                write!(f, "negative common split: user {} has {value:?}", user + 1)
            }
            SchemeViolation::SplitSumMismatch { split_sum, common_dof } => {
                write!(f, "split sum ≠ common DoF: {split_sum:?} vs {common_dof:?}")
            }
        }
    }
}

impl RsScheme {
    /// All users active.
    pub fn all_active(levels: Vec<Rational>, common_split: Vec<Rational>) -> Self {
        let active = vec![true; levels.len()];
        RsScheme { levels, active, common_split }
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    fn active_levels(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.levels.iter().enumerate().filter(|(j, _)| self.active[*j])
    }

    /// Largest level among active users, 0 if none.
    pub fn max_active_level(&self) -> Rational {
        self.active_levels().map(|(_, a)| a.clone()).max().unwrap_or_else(Rational::zero)
    }

    /// DoF carried by the common symbol. 1 when nobody is active.
    pub fn common_dof(&self) -> Rational {
        Rational::one() - self.max_active_level()
    }

    pub fn private_dof(&self, profile: &CsitProfile) -> Vec<Rational> {
        (0..self.k())
            .map(|j| {
                if !self.active[j] {
                    return Rational::zero();
                }
                let strongest_other = self
                    .active_levels()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, a)| a.clone())
                    .max()
                    .unwrap_or_else(Rational::zero);
                let leakage = (strongest_other - profile.alpha(j)).positive_part();
                (&self.levels[j] - leakage).positive_part()
            })
            .collect()
    }

    pub fn total_dof(&self, profile: &CsitProfile) -> Result<RsDofOutcome> {
        if let Some(v) = self.length_mismatch(profile.k()) {
            return Err(DofError::InvalidScheme(v.to_string()));
        }
        let common_total = self.common_dof();
        let split_sum: Rational = self.common_split.iter().sum();
        if split_sum != common_total {
            return Err(DofError::InvalidScheme(
                SchemeViolation::SplitSumMismatch { split_sum, common_dof: common_total }.to_string(),
            ));
        }
        let private = self.private_dof(profile);
        let total = DofTuple(private.iter().zip(&self.common_split).map(|(p, c)| p + c).collect());
        Ok(RsDofOutcome { private, common_total, total })
    }

    fn length_mismatch(&self, k: usize) -> Option<SchemeViolation> {
        [
            ("levels", self.levels.len()),
            ("active", self.active.len()),
            ("common_split", self.common_split.len()),
        ]
        .into_iter()
        .find(|&(_, len)| len != k)
        .map(|(field, len)| SchemeViolation::LengthMismatch { field, expected: k, actual: len })
    }

    /// Every problem with the scheme for this profile; empty means valid.
    pub fn validate(&self, profile: &CsitProfile) -> Vec<SchemeViolation> {
        if let Some(v) = self.length_mismatch(profile.k()) {
            return vec![v];
        }
        let mut out = Vec::new();
        for (user, level) in self.active_levels() {
            if !level.in_unit_interval() {
                out.push(SchemeViolation::LevelOutOfRange { user, level: level.clone() });
            }
        }
        for (user, value) in self.common_split.iter().enumerate() {
            if value.is_negative() {
                out.push(SchemeViolation::NegativeSplit { user, value: value.clone() });
            }
        }
        let split_sum: Rational = self.common_split.iter().sum();
        let common_dof = self.common_dof();
        if split_sum != common_dof {
            out.push(SchemeViolation::SplitSumMismatch { split_sum, common_dof });
        }
        out
    }

    /// Re-embeds a scheme for a reduced profile into `k` users; users not in
    /// `index_map` become inactive with zero level and zero split.
    pub fn lift(&self, k: usize, index_map: &[usize]) -> RsScheme {
        let mut lifted = RsScheme {
            levels: vec![Rational::zero(); k],
            active: vec![false; k],
            common_split: vec![Rational::zero(); k],
        };
        for (reduced, &full) in index_map.iter().enumerate() {
            lifted.levels[full] = self.levels[reduced].clone();
            lifted.active[full] = self.active[reduced];
            lifted.common_split[full] = self.common_split[reduced].clone();
        }
        lifted
    }

    /// Reorders the per-user fields from canonical order to the profile's
    /// input order.
    pub fn to_user_order(&self, profile: &CsitProfile) -> Result<RsScheme> {
        Ok(RsScheme {
            levels: profile.to_user_order(&self.levels)?,
            active: profile.to_user_order(&self.active)?,
            common_split: profile.to_user_order(&self.common_split)?,
        })
    }

    /// Inverse of [`RsScheme::to_user_order`].
    pub fn to_canonical(&self, profile: &CsitProfile) -> Result<RsScheme> {
        Ok(RsScheme {
            levels: profile.to_canonical(&self.levels)?,
            active: profile.to_canonical(&self.active)?,
            common_split: profile.to_canonical(&self.common_split)?,
        })
    }
}

pub fn validate_scheme(scheme: &RsScheme, profile: &CsitProfile) -> Vec<SchemeViolation> {
    scheme.validate(profile)
}

/// How the common DoF of a sum-DoF scheme is split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitChoice {
    /// Everything to one (canonical) user.
    AllTo(usize),
    Equal,
    /// Explicit split; must sum to `1 - b`.
    Explicit(Vec<Rational>),
}

/// All users at level `b` with `alpha_2 <= b <= alpha_1`; attains the sum-DoF
/// `1 + alpha_2 + ... + alpha_K`. For K = 1 the lower end is 0.
pub fn sum_dof_scheme(profile: &CsitProfile, b: &Rational, split: SplitChoice) -> Result<RsScheme> {
    let k = profile.k();
    let hi = profile.alpha(0).clone();
    let lo = if k >= 2 { profile.alpha(1).clone() } else { Rational::zero() };
    if *b < lo || *b > hi {
        return Err(DofError::LevelOutOfRange(Box::new(LevelRange { b: b.clone(), lo, hi })));
    }
    let common = Rational::one() - b;
    let common_split = match split {
        SplitChoice::AllTo(user) => {
            if user >= k {
                return Err(DofError::UserOutOfRange { user, k });
            }
            let mut v = vec![Rational::zero(); k];
            v[user] = common;
            v
        }
        SplitChoice::Equal => vec![&common / Rational::from_integer(k as i64); k],
        SplitChoice::Explicit(v) => {
            if v.len() != k {
                return Err(DofError::DimensionMismatch { expected: k, actual: v.len() });
            }
            v
        }
    };
    let scheme = RsScheme::all_active(vec![b.clone(); k], common_split);
    let violations = scheme.validate(profile);
    if let Some(v) = violations.first() {
        return Err(DofError::InvalidScheme(v.to_string()));
    }
    Ok(scheme)
}
