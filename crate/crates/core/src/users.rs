//! Sets of users as bitmasks.
//!
//! Users are 0-based internally. The serialized form is the ascending list of
//! 1-based user indices, which is how subsets are written everywhere outside
//! this crate.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Upper bound on the number of users; the region has `2^K - 1` subset
/// constraints so anything near 64 would be hopeless anyway.
pub const MAX_USERS: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UserSet(u64);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_bits(bits: u64) -> Self {
        UserSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{0, 1, ..., k-1}`.
    pub fn all(k: usize) -> Self {
        debug_assert!(k < 64);
        UserSet((1u64 << k) - 1)
    }

    pub fn singleton(user: usize) -> Self {
        UserSet(1u64 << user)
    }

    pub fn from_users<I: IntoIterator<Item = usize>>(users: I) -> Self {
        UserSet(users.into_iter().fold(0, |acc, u| acc | (1u64 << u)))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, user: usize) -> bool {
        user < 64 && self.0 & (1u64 << user) != 0
    }

    pub fn with(self, user: usize) -> Self {
        UserSet(self.0 | (1u64 << user))
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1u64 << user))
    }

    /// Smallest member (`s_1`).
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Second smallest member (`s_2`).
    pub fn second(self) -> Option<usize> {
        UserSet(self.0 & self.0.wrapping_sub(1)).first()
    }

    /// The set with its smallest member removed.
    pub fn tail(self) -> Self {
        UserSet(self.0 & self.0.wrapping_sub(1))
    }

    pub fn max_user(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(u)
            }
        })
    }

    pub fn to_one_based(self) -> Vec<usize> {
        self.iter().map(|u| u + 1).collect()
    }

    /// Ordering used for listing subsets: by cardinality, then
    /// lexicographically on the ascending member lists.
    pub fn listing_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.iter().collect())
    }

    /// All non-empty subsets of `{0..k}` in listing order
    /// (`{1},{2},{3},{1,2},{1,3},{2,3},{1,2,3}` for k = 3).
    pub fn all_nonempty(k: usize) -> Vec<UserSet> {
        let mut sets: Vec<UserSet> = (1..(1u64 << k)).map(UserSet).collect();
        sets.sort_by_key(|s| s.listing_key());
        sets
    }
}

/// Listing order, see [`UserSet::listing_key`].
impl Ord for UserSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.listing_key().cmp(&other.listing_key())
    }
}

impl PartialOrd for UserSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UserSet {
    /// 1-based, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for UserSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UserSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let users = Vec::<usize>::deserialize(deserializer)?;
        if users.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom("subset must be strictly ascending"));
        }
        if users.iter().any(|&u| u == 0 || u > MAX_USERS) {
            return Err(serde::de::Error::custom("user index out of range"));
        }
        Ok(UserSet::from_users(users.into_iter().map(|u| u - 1)))
    }
}
