//! Degrees-of-freedom region of the K-user MISO broadcast channel with
//! partial CSIT, and constructive rate-splitting schemes achieving it.
//!
//! * [`region`]: the polyhedron, membership, active constraints.
//! * [`facet`]: per-user description of each subset facet.
//! * [`scheme`]: DoF accounting of a rate-splitting scheme.
//! * [`synth`]: scheme and time-sharing synthesis for any region point.
//! * [`oracle`]: vertex enumeration and randomized cross-checks.
//!
//! All arithmetic is exact. Tuples and subsets use canonical user order
//! (non-increasing CSIT exponent); [`CsitProfile`] converts to and from the
//! order in which users were supplied.

pub mod error;
pub mod facet;
pub mod linalg;
pub mod oracle;
pub mod rational;
pub mod region;
pub mod scheme;
pub mod synth;
pub mod users;

pub use error::{DofError, LevelRange, Result};
pub use facet::{facet_contains, facet_spec, CoordinateBound, FacetDescription, UserClass};
pub use rational::Rational;
pub use region::{CsitProfile, DofTuple, Membership, RegionDescription, SubsetConstraint};
pub use scheme::{sum_dof_scheme, validate_scheme, RsDofOutcome, RsScheme, SchemeViolation, SplitChoice};
pub use synth::{
    classify_point, synthesize, synthesize_facet_point, FacetCase, FacetRef, PlanComponent, PointClass,
    TimeSharingPlan, Transmission,
};
pub use users::UserSet;

/// Builds the region for `profile`.
pub fn build_region(profile: CsitProfile) -> Result<RegionDescription> {
    RegionDescription::build(profile)
}
