//! Per-user characterization of the facet `F_S` lying in the hyperplane
//! `sum_{i in S} d_i = 1 + sum_{i in S \ {s_1}} alpha_i`.
//!
//! Instead of checking every other subset inequality, a point of the
//! hyperplane is on the facet iff each coordinate sits inside a simple
//! interval that depends only on the user's position relative to `s_1` and
//! `s_2`:
//!
//! | user `j`                  | bound                             |
//! |---------------------------|-----------------------------------|
//! | `s_1`                     | `d_j >= alpha_{s_2}`              |
//! | `S \ {s_1}`               | `d_j >= alpha_j`                  |
//! | not in S, `j < s_1`       | `d_j <= min(alpha_{s_1}, d_{s_1})`|
//! | not in S, `s_1 < j < s_2` | `d_j <= min(alpha_j, d_{s_1})`    |
//! | not in S, `j > s_2`       | `d_j <= alpha_j`                  |
//!
//! For a singleton `S = {s_1}` the facet is `d_{s_1} = 1`, `d_j <= alpha_{s_1}`
//! for `j < s_1` and `d_j <= alpha_j` for `j > s_1`.

use serde::{Deserialize, Serialize};

use crate::error::{DofError, Result};
use crate::region::{CsitProfile, DofTuple};
use crate::users::UserSet;
use crate::Rational;

/// Where a user sits relative to the facet subset.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserClass {
    /// `s_1`.
    Lead,
    /// `S \ {s_1}`.
    Member,
    /// Outside `S`, index below `s_1`.
    Before,
    /// Outside `S`, strictly between `s_1` and `s_2`.
    Between,
    /// Outside `S`, above `s_2` (above `s_1` when `|S| = 1`).
    After,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateBound {
    /// No bound beyond non-negativity (the lead of a singleton facet, fixed
    /// by the equality).
    Free,
    AtLeast(Rational),
    AtMost(Rational),
    /// `d_j <= min(value, d_{s_1})`.
    AtMostMinLead(Rational),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FacetUser {
    pub class: UserClass,
    pub bound: CoordinateBound,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FacetDescription {
    pub subset: UserSet,
    /// `s_1`, 0-based canonical.
    pub lead: usize,
    /// `s_2`, absent for singleton facets.
    pub second: Option<usize>,
    /// One entry per canonical user.
    pub users: Vec<FacetUser>,
    /// Right-hand side of the facet equality `sum_{i in S} d_i = rhs`.
    pub rhs: Rational,
}

impl FacetDescription {
    pub fn new(profile: &CsitProfile, subset: UserSet) -> Result<Self> {
        let k = profile.k();
        let lead = subset.first().ok_or(DofError::EmptySubset)?;
        if subset.max_user().is_some_and(|m| m >= k) {
            return Err(DofError::SubsetOutOfRange { subset, k });
        }
        let second = subset.second();
        let alpha = |j: usize| profile.alpha(j).clone();
        let users = (0..k)
            .map(|j| {
                let (class, bound) = match second {
                    None if j == lead => (UserClass::Lead, CoordinateBound::Free),
                    None if j < lead => (UserClass::Before, CoordinateBound::AtMost(alpha(lead))),
                    None => (UserClass::After, CoordinateBound::AtMost(alpha(j))),
                    Some(s2) => {
                        if j == lead {
                            (UserClass::Lead, CoordinateBound::AtLeast(alpha(s2)))
                        } else if subset.contains(j) {
                            (UserClass::Member, CoordinateBound::AtLeast(alpha(j)))
                        } else if j < lead {
                            (UserClass::Before, CoordinateBound::AtMostMinLead(alpha(lead)))
                        } else if j < s2 {
                            (UserClass::Between, CoordinateBound::AtMostMinLead(alpha(j)))
                        } else {
                            (UserClass::After, CoordinateBound::AtMost(alpha(j)))
                        }
                    }
                };
                FacetUser { class, bound }
            })
            .collect();
        let rhs = Rational::one() + subset.tail().iter().map(|i| profile.alpha(i)).sum::<Rational>();
        Ok(FacetDescription { subset, lead, second, users, rhs })
    }

    pub fn k(&self) -> usize {
        self.users.len()
    }

    /// Membership in the facet using the per-user bounds. Panics on
    /// dimension mismatch.
    pub fn contains(&self, d: &DofTuple) -> bool {
        assert_eq!(d.len(), self.k(), "dimension mismatch");
        if d.iter().any(Rational::is_negative) {
            return false;
        }
        let lead = &d[self.lead];
        let bounds_hold = self.users.iter().zip(d.iter()).all(|(u, x)| match &u.bound {
            CoordinateBound::Free => true,
            CoordinateBound::AtLeast(v) => x >= v,
            CoordinateBound::AtMost(v) => x <= v,
            CoordinateBound::AtMostMinLead(v) => x <= v && x <= lead,
        });
        bounds_hold && d.sum_over(self.subset) == self.rhs
    }

    pub fn class_members(&self, class: UserClass) -> impl Iterator<Item = usize> + '_ {
        self.users.iter().enumerate().filter(move |(_, u)| u.class == class).map(|(j, _)| j)
    }
}

pub fn facet_spec(profile: &CsitProfile, subset: UserSet) -> Result<FacetDescription> {
    FacetDescription::new(profile, subset)
}

pub fn facet_contains(spec: &FacetDescription, d: &DofTuple) -> Result<bool> {
    if d.len() != spec.k() {
        return Err(DofError::DimensionMismatch { expected: spec.k(), actual: d.len() });
    }
    Ok(spec.contains(d))
}
