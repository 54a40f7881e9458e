//! Translation between the core's canonical user order and the order users
//! were given on the command line. Everything printed uses input order.

use miso_dof::{CsitProfile, DofTuple, UserSet};

use crate::error::CliError;

pub struct UserOrder {
    /// `perm[u]`: canonical position of input user `u`.
    perm: Vec<usize>,
    /// `input[c]`: input position of canonical user `c`.
    input: Vec<usize>,
}

impl UserOrder {
    pub fn new(profile: &CsitProfile) -> Self {
        let perm = profile.perm().to_vec();
        let mut input = vec![0; perm.len()];
        for (u, &c) in perm.iter().enumerate() {
            input[c] = u;
        }
        UserOrder { perm, input }
    }

    /// 1-based label of each canonical user.
    pub fn labels(&self) -> Vec<usize> {
        self.input.iter().map(|u| u + 1).collect()
    }

    pub fn canonical_user(&self, input_user: usize) -> usize {
        self.perm[input_user]
    }

    pub fn input_user(&self, canonical: usize) -> usize {
        self.input[canonical]
    }

    pub fn set_to_input(&self, s: UserSet) -> UserSet {
        UserSet::from_users(s.iter().map(|c| self.input[c]))
    }

    pub fn set_to_canonical(&self, s: UserSet) -> UserSet {
        UserSet::from_users(s.iter().map(|u| self.perm[u]))
    }

    pub fn tuple_to_input(&self, d: &DofTuple) -> DofTuple {
        DofTuple((0..d.len()).map(|u| d[self.perm[u]].clone()).collect())
    }

    pub fn tuple_to_canonical(&self, d: &DofTuple) -> Result<DofTuple, CliError> {
        if d.len() != self.perm.len() {
            return Err(CliError::Parse(format!("expected {} values, got {}", self.perm.len(), d.len())));
        }
        Ok(DofTuple((0..d.len()).map(|c| d[self.input[c]].clone()).collect()))
    }
}
