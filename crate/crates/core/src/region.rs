//! The DoF region of the K-user MISO broadcast channel with partial CSIT.
//!
//! For CSIT exponents sorted as `alpha_1 >= ... >= alpha_K` the region is the
//! set of non-negative tuples with
//!
//! ```text
//!     sum_{i in S} d_i <= 1 + sum_{i in S \ {s_1}} alpha_i     for every non-empty S,
//! ```
//!
//! where `s_1` is the smallest index in `S`. Everything here is exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DofError, Result};
use crate::users::{UserSet, MAX_USERS};
use crate::Rational;

/// CSIT quality exponents, stored in canonical (non-increasing) order.
///
/// `perm[u]` is the canonical position of the user given at position `u` on
/// input. Ties keep their input order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct CsitProfile {
    alphas: Vec<Rational>,
    perm: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    alphas: Vec<Rational>,
    perm: Vec<usize>,
}

impl From<CsitProfile> for ProfileRepr {
    fn from(p: CsitProfile) -> Self {
        ProfileRepr {
            alphas: p.alphas,
            perm: p.perm.iter().map(|c| c + 1).collect(),
        }
    }
}

impl TryFrom<ProfileRepr> for CsitProfile {
    type Error = DofError;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        let canonical = CsitProfile::new(r.alphas)?;
        let k = canonical.k();
        if r.perm.len() != k {
            return Err(DofError::DimensionMismatch { expected: k, actual: r.perm.len() });
        }
        let mut seen = vec![false; k];
        let mut perm = Vec::with_capacity(k);
        for &p in &r.perm {
            if p == 0 || p > k || seen[p - 1] {
                return Err(DofError::InvalidScheme(format!("perm {:?} is not a permutation", r.perm)));
            }
            seen[p - 1] = true;
            perm.push(p - 1);
        }
        if canonical.perm.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(DofError::InvalidScheme("serialized alphas must be in canonical order".into()));
        }
        Ok(CsitProfile { alphas: canonical.alphas, perm })
    }
}

impl CsitProfile {
    /// Builds a profile from exponents given in user order, sorting them into
    /// canonical order.
    pub fn new(user_alphas: Vec<Rational>) -> Result<Self> {
        let k = user_alphas.len();
        if k == 0 {
            return Err(DofError::EmptyProfile);
        }
        if k > MAX_USERS {
            return Err(DofError::TooManyUsers(k));
        }
        if let Some((user, value)) = user_alphas.iter().enumerate().find(|(_, a)| !a.in_unit_interval()) {
            return Err(DofError::AlphaOutOfRange { user: user + 1, value: value.clone() });
        }
        let mut order: Vec<usize> = (0..k).collect();
        // stable: ties keep input order
        order.sort_by(|&a, &b| user_alphas[b].cmp(&user_alphas[a]));
        let mut perm = vec![0; k];
        for (c, &u) in order.iter().enumerate() {
            perm[u] = c;
        }
        let alphas = order.iter().map(|&u| user_alphas[u].clone()).collect();
        Ok(CsitProfile { alphas, perm })
    }

    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    /// Exponents in canonical order.
    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    pub fn alpha(&self, canonical_user: usize) -> &Rational {
        &self.alphas[canonical_user]
    }

    /// `perm()[u]` is the canonical position of input user `u`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity_order(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &c)| i == c)
    }

    /// Exponents in the order they were supplied.
    pub fn user_alphas(&self) -> Vec<Rational> {
        self.perm.iter().map(|&c| self.alphas[c].clone()).collect()
    }

    /// Reorders a per-user vector from input order to canonical order.
    pub fn to_canonical<T: Clone>(&self, per_user: &[T]) -> Result<Vec<T>> {
        self.check_len(per_user.len())?;
        let mut out: Vec<Option<T>> = vec![None; per_user.len()];
        for (u, v) in per_user.iter().enumerate() {
            out[self.perm[u]] = Some(v.clone());
        }
        Ok(out.into_iter().map(|v| v.expect("perm is a bijection")).collect())
    }

    /// Reorders a canonical per-user vector back to input order.
    pub fn to_user_order<T: Clone>(&self, canonical: &[T]) -> Result<Vec<T>> {
        self.check_len(canonical.len())?;
        Ok(self.perm.iter().map(|&c| canonical[c].clone()).collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.k() {
            return Err(DofError::DimensionMismatch { expected: self.k(), actual: len });
        }
        Ok(())
    }

    /// Drops canonical user `excluded`. Returns the profile over the remaining
    /// `K - 1` users (already canonical) and the map from reduced index to
    /// index in `self`.
    pub fn reduce(&self, excluded: usize) -> Result<(CsitProfile, Vec<usize>)> {
        if self.k() == 1 {
            return Err(DofError::SingleUser);
        }
        if excluded >= self.k() {
            return Err(DofError::UserOutOfRange { user: excluded, k: self.k() });
        }
        let index_map: Vec<usize> = (0..self.k()).filter(|&i| i != excluded).collect();
        let alphas = index_map.iter().map(|&i| self.alphas[i].clone()).collect();
        let reduced = CsitProfile { alphas, perm: (0..self.k() - 1).collect() };
        Ok((reduced, index_map))
    }
}

/// A DoF tuple `(d_1, ..., d_K)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DofTuple(pub Vec<Rational>);

impl DofTuple {
    pub fn zeros(k: usize) -> Self {
        DofTuple(vec![Rational::zero(); k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rational::is_zero)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn sum_over(&self, set: UserSet) -> Rational {
        set.iter().map(|u| &self.0[u]).sum()
    }

    pub fn scaled(&self, factor: &Rational) -> DofTuple {
        DofTuple(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn parse(s: &str) -> std::result::Result<Self, crate::rational::ParseRationalError> {
        crate::rational::parse_list(s).map(DofTuple)
    }
}

impl std::ops::Index<usize> for DofTuple {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl From<Vec<Rational>> for DofTuple {
    fn from(v: Vec<Rational>) -> Self {
        DofTuple(v)
    }
}

impl fmt::Debug for DofTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for DofTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x:?}")?;
        }
        write!(f, ")")
    }
}

/// `sum_{i in subset} d_i <= rhs`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SubsetConstraint {
    pub subset: UserSet,
    pub rhs: Rational,
}

/// Result of a membership query.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Membership {
    pub inside: bool,
    /// Subset constraints with `sum > rhs`, in listing order.
    pub violated: Vec<UserSet>,
    /// Users with a negative coordinate.
    pub negative: Vec<usize>,
}

/// H-representation of the region: every subset constraint plus `d_i >= 0`.
///
/// All tuples passed to its methods are in canonical user order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RegionRepr", into = "RegionRepr")]
pub struct RegionDescription {
    profile: CsitProfile,
    /// `rhs[mask]` for every non-empty mask; `rhs[0]` is unused.
    rhs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    profile: CsitProfile,
    constraints: Vec<SubsetConstraint>,
    nonnegative: Vec<usize>,
}

impl From<RegionDescription> for RegionRepr {
    fn from(r: RegionDescription) -> Self {
        RegionRepr {
            constraints: r.constraints(),
            nonnegative: (1..=r.k()).collect(),
            profile: r.profile,
        }
    }
}

impl TryFrom<RegionRepr> for RegionDescription {
    type Error = DofError;

    fn try_from(r: RegionRepr) -> Result<Self> {
        let region = RegionDescription::build(r.profile)?;
        if r.constraints != region.constraints() || r.nonnegative != (1..=region.k()).collect::<Vec<_>>() {
            return Err(DofError::InvalidScheme(
                "serialized constraints do not match the profile".into(),
            ));
        }
        Ok(region)
    }
}

impl RegionDescription {
    pub fn build(profile: CsitProfile) -> Result<Self> {
        let k = profile.k();
        if k == 0 {
            return Err(DofError::EmptyProfile);
        }
        let alpha_sums = subset_sums(profile.alphas());
        let rhs = (0..alpha_sums.len())
            .map(|mask| {
                if mask == 0 {
                    Rational::zero()
                } else {
                    // drop the lowest-index member s_1
                    Rational::one() + &alpha_sums[mask & (mask - 1)]
                }
            })
            .collect();
        Ok(RegionDescription { profile, rhs })
    }

    pub fn profile(&self) -> &CsitProfile {
        &self.profile
    }

    pub fn k(&self) -> usize {
        self.profile.k()
    }

    pub fn rhs(&self, subset: UserSet) -> &Rational {
        &self.rhs[subset.bits() as usize]
    }

    /// The `2^K - 1` subset constraints in listing order.
    pub fn constraints(&self) -> Vec<SubsetConstraint> {
        UserSet::all_nonempty(self.k())
            .into_iter()
            .map(|subset| SubsetConstraint { subset, rhs: self.rhs(subset).clone() })
            .collect()
    }

    fn check_dim(&self, d: &DofTuple) -> Result<()> {
        if d.len() != self.k() {
            return Err(DofError::DimensionMismatch { expected: self.k(), actual: d.len() });
        }
        Ok(())
    }

    pub fn contains(&self, d: &DofTuple) -> Result<Membership> {
        self.check_dim(d)?;
        let sums = subset_sums(&d.0);
        let violated: Vec<UserSet> = UserSet::all_nonempty(self.k())
            .into_iter()
            .filter(|s| sums[s.bits() as usize] > *self.rhs(*s))
            .collect();
        let negative: Vec<usize> = (0..self.k()).filter(|&i| d[i].is_negative()).collect();
        Ok(Membership { inside: violated.is_empty() && negative.is_empty(), violated, negative })
    }

    /// Membership without building a report. Panics on dimension mismatch.
    pub fn is_inside(&self, d: &DofTuple) -> bool {
        assert_eq!(d.len(), self.k(), "dimension mismatch");
        if d.iter().any(Rational::is_negative) {
            return false;
        }
        let sums = subset_sums(&d.0);
        sums.iter().zip(&self.rhs).skip(1).all(|(s, r)| s <= r)
    }

    /// Subsets whose constraint holds with equality, in listing order.
    pub fn active_constraints(&self, d: &DofTuple) -> Result<Vec<UserSet>> {
        let m = self.contains(d)?;
        if !m.inside {
            return Err(DofError::Outside { violated: m.violated });
        }
        let sums = subset_sums(&d.0);
        Ok(UserSet::all_nonempty(self.k())
            .into_iter()
            .filter(|s| sums[s.bits() as usize] == *self.rhs(*s))
            .collect())
    }

    /// Pushes a strictly positive interior point radially out to the
    /// boundary. Returns `(boundary, lambda)` with `d = lambda * boundary`.
    pub fn scale_to_boundary(&self, d: &DofTuple) -> Result<(DofTuple, Rational)> {
        let m = self.contains(d)?;
        if !m.inside {
            return Err(DofError::Outside { violated: m.violated });
        }
        if d.is_zero() {
            return Err(DofError::ZeroTuple);
        }
        if let Some(j) = d.iter().position(Rational::is_zero) {
            return Err(DofError::ZeroCoordinate(j));
        }
        let sums = subset_sums(&d.0);
        let lambda = (1..sums.len())
            .map(|mask| &sums[mask] / &self.rhs[mask])
            .max()
            .expect("at least one subset");
        let boundary = d.scaled(&(Rational::one() / &lambda));
        Ok((boundary, lambda))
    }
}

/// Sums of `values` over every mask, indexed by mask.
pub(crate) fn subset_sums(values: &[Rational]) -> Vec<Rational> {
    let n = 1usize << values.len();
    let mut sums = Vec::with_capacity(n);
    sums.push(Rational::zero());
    for mask in 1..n {
        let low = mask.trailing_zeros() as usize;
        let s = &sums[mask & (mask - 1)] + &values[low];
        sums.push(s);
    }
    sums
}
