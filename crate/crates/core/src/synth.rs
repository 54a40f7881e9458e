//! Constructive achievability: turn any point of the region into a
//! rate-splitting scheme or a time-sharing plan of such schemes.
//!
//! * Points on a subset facet get a single scheme whose power levels and
//!   common split are read off the facet's per-user bounds.
//! * Points with a zero coordinate drop that user and recurse on `K - 1`
//!   users; the resulting schemes are lifted with the user inactive.
//! * Remaining points are scaled out to the boundary and time-shared with
//!   silence.

use serde::{Deserialize, Serialize};

use crate::error::{DofError, Result};
use crate::facet::{FacetDescription, UserClass};
use crate::region::{CsitProfile, DofTuple, RegionDescription};
use crate::scheme::RsScheme;
use crate::users::UserSet;
use crate::Rational;

/// Which part of a facet a point falls in; decides the power allocation.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetCase {
    /// `|S| >= 2`, `alpha_{s_2} <= d_{s_1} <= alpha_{s_1}`: the lead user's
    /// DoF is carried privately, top level `d_{s_1}`.
    LeadWithinCsit,
    /// `|S| >= 2`, `d_{s_1} > alpha_{s_1}`: top level `alpha_{s_1}`, the
    /// excess of every member goes through the common symbol.
    LeadAboveCsit,
    /// `S = {s_1}`: the whole common symbol goes to `s_1`.
    Singleton,
}

impl FacetCase {
    /// Maximum active power level the dispatch must produce.
    pub fn expected_max_level(self, profile: &CsitProfile, facet: &FacetDescription, d: &DofTuple) -> Rational {
        match self {
            FacetCase::LeadWithinCsit => d[facet.lead].clone(),
            FacetCase::LeadAboveCsit | FacetCase::Singleton => profile.alpha(facet.lead).clone(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FacetSynthesis {
    pub case: FacetCase,
    pub scheme: RsScheme,
}

/// One component of a time-sharing plan.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transmission {
    /// Nothing is sent; achieves the zero tuple. Kept apart from
    /// [`RsScheme`] because its all-zero split would break the split-sum
    /// rule of an empty active set.
    Silence,
    Rs(RsScheme),
}

impl Transmission {
    pub fn dof(&self, profile: &CsitProfile) -> Result<DofTuple> {
        match self {
            Transmission::Silence => Ok(DofTuple::zeros(profile.k())),
            Transmission::Rs(s) => Ok(s.total_dof(profile)?.total),
        }
    }

    fn lift(&self, k: usize, index_map: &[usize]) -> Transmission {
        match self {
            Transmission::Silence => Transmission::Silence,
            Transmission::Rs(s) => Transmission::Rs(s.lift(k, index_map)),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PlanComponent {
    pub weight: Rational,
    pub scheme: Transmission,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TimeSharingPlan {
    pub components: Vec<PlanComponent>,
    pub achieved: DofTuple,
}

impl TimeSharingPlan {
    pub fn silence(k: usize) -> Self {
        TimeSharingPlan {
            components: vec![PlanComponent { weight: Rational::one(), scheme: Transmission::Silence }],
            achieved: DofTuple::zeros(k),
        }
    }

    /// `sum_m weight_m * dof(scheme_m)`, recomputed from the components.
    pub fn evaluate(&self, profile: &CsitProfile) -> Result<DofTuple> {
        let mut acc = DofTuple::zeros(profile.k());
        for c in &self.components {
            let d = c.scheme.dof(profile)?;
            for (a, x) in acc.0.iter_mut().zip(d.iter()) {
                *a += &c.weight * x;
            }
        }
        Ok(acc)
    }

    pub fn schemes(&self) -> impl Iterator<Item = &RsScheme> {
        self.components.iter().filter_map(|c| match &c.scheme {
            Transmission::Rs(s) => Some(s),
            Transmission::Silence => None,
        })
    }

    /// Same plan with per-user vectors in the profile's input order.
    pub fn to_user_order(&self, profile: &CsitProfile) -> Result<TimeSharingPlan> {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(PlanComponent {
                    weight: c.weight.clone(),
                    scheme: match &c.scheme {
                        Transmission::Silence => Transmission::Silence,
                        Transmission::Rs(s) => Transmission::Rs(s.to_user_order(profile)?),
                    },
                })
            })
            .collect::<Result<_>>()?;
        Ok(TimeSharingPlan { components, achieved: DofTuple(profile.to_user_order(&self.achieved.0)?) })
    }
}

/// Builds the scheme for a point on facet `F_S`.
pub fn synthesize_facet_point(profile: &CsitProfile, subset: UserSet, d: &DofTuple) -> Result<FacetSynthesis> {
    let facet = FacetDescription::new(profile, subset)?;
    if d.len() != profile.k() {
        return Err(DofError::DimensionMismatch { expected: profile.k(), actual: d.len() });
    }
    if !facet.contains(d) {
        return Err(DofError::NotOnFacet(subset));
    }
    let k = profile.k();
    let alpha = |j: usize| profile.alpha(j);
    let lead = facet.lead;
    let d_lead = &d[lead];
    let mut levels = vec![Rational::zero(); k];
    let mut split = vec![Rational::zero(); k];

    let case = if facet.second.is_none() {
        FacetCase::Singleton
    } else if d_lead <= alpha(lead) {
        FacetCase::LeadWithinCsit
    } else {
        FacetCase::LeadAboveCsit
    };

    // level given to the subset; users outside it are raised relative to it
    let top = match case {
        FacetCase::LeadWithinCsit => d_lead.clone(),
        FacetCase::LeadAboveCsit | FacetCase::Singleton => alpha(lead).clone(),
    };
    for (j, user) in facet.users.iter().enumerate() {
        levels[j] = match user.class {
            UserClass::Lead | UserClass::Member => top.clone(),
            UserClass::Before => d[j].clone(),
            // S̄_21 (alpha_j >= d_{s_1}) keeps a_j = d_j
            UserClass::Between if case == FacetCase::LeadWithinCsit && alpha(j) >= d_lead => d[j].clone(),
            UserClass::Between | UserClass::After => &d[j] + &top - alpha(j),
        };
    }
    match case {
        FacetCase::LeadWithinCsit => {
            for j in facet.class_members(UserClass::Member) {
                split[j] = &d[j] - alpha(j);
            }
        }
        FacetCase::LeadAboveCsit => {
            for j in subset.iter() {
                split[j] = &d[j] - alpha(j);
            }
        }
        FacetCase::Singleton => {
            split[lead] = Rational::one() - alpha(lead);
        }
    }

    let scheme = RsScheme::all_active(levels, split);
    if let Some(j) = scheme.levels.iter().position(|a| !a.in_unit_interval()) {
        return Err(DofError::Invariant(format!("level {:?} of user {} outside [0,1] on facet {subset}", scheme.levels[j], j + 1)));
    }
    if scheme.max_active_level() != top {
        return Err(DofError::Invariant(format!(
            "maximum level {:?} differs from {top:?} on facet {subset}",
            scheme.max_active_level()
        )));
    }
    let violations = scheme.validate(profile);
    if !violations.is_empty() {
        return Err(DofError::Invariant(format!("facet scheme invalid: {violations:?}")));
    }
    let achieved = scheme.total_dof(profile)?.total;
    if achieved != *d {
        return Err(DofError::Invariant(format!("facet scheme achieves {achieved} instead of {d}")));
    }
    Ok(FacetSynthesis { case, scheme })
}

/// Facet used for a boundary point lying on several: smallest cardinality,
/// then lexicographically smallest member list.
pub fn pick_facet(active: &[UserSet]) -> Option<UserSet> {
    active.iter().copied().min_by_key(|s| s.listing_key())
}

/// Builds a plan achieving `d` exactly. `d` is in canonical order.
pub fn synthesize(profile: &CsitProfile, d: &DofTuple) -> Result<TimeSharingPlan> {
    let region = RegionDescription::build(profile.clone())?;
    let m = region.contains(d)?;
    if !m.inside {
        return Err(DofError::Outside { violated: m.violated });
    }
    let plan = synthesize_inside(&region, d)?;
    let evaluated = plan.evaluate(profile)?;
    if evaluated != *d || plan.achieved != *d {
        return Err(DofError::Invariant(format!("plan achieves {evaluated} instead of {d}")));
    }
    Ok(plan)
}

fn synthesize_inside(region: &RegionDescription, d: &DofTuple) -> Result<TimeSharingPlan> {
    let profile = region.profile();
    let k = profile.k();
    if d.is_zero() {
        return Ok(TimeSharingPlan::silence(k));
    }
    if let Some(j) = d.iter().position(Rational::is_zero) {
        let (reduced, index_map) = profile.reduce(j)?;
        let reduced_point = DofTuple(index_map.iter().map(|&i| d[i].clone()).collect());
        let reduced_region = RegionDescription::build(reduced)?;
        let inner = synthesize_inside(&reduced_region, &reduced_point)?;
        let components = inner
            .components
            .into_iter()
            .map(|c| PlanComponent { weight: c.weight, scheme: c.scheme.lift(k, &index_map) })
            .collect();
        return Ok(TimeSharingPlan { components, achieved: d.clone() });
    }
    let (boundary, lambda) = region.scale_to_boundary(d)?;
    let active = region.active_constraints(&boundary)?;
    let subset = pick_facet(&active).ok_or_else(|| DofError::Invariant("scaled point has no active constraint".into()))?;
    let facet_scheme = synthesize_facet_point(profile, subset, &boundary)?.scheme;
    let mut components = vec![PlanComponent { weight: lambda.clone(), scheme: Transmission::Rs(facet_scheme) }];
    if lambda != Rational::one() {
        components.push(PlanComponent { weight: Rational::one() - lambda, scheme: Transmission::Silence });
    }
    Ok(TimeSharingPlan { components, achieved: d.clone() })
}

/// A face of the region touched by a boundary point.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetRef {
    Subset(UserSet),
    /// `d_j = 0`, 0-based canonical user.
    Zero(usize),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "facets")]
pub enum PointClass {
    Exterior,
    Interior,
    Boundary(Vec<FacetRef>),
}

pub fn classify_point(profile: &CsitProfile, d: &DofTuple) -> Result<PointClass> {
    let region = RegionDescription::build(profile.clone())?;
    if !region.contains(d)?.inside {
        return Ok(PointClass::Exterior);
    }
    let mut facets: Vec<FacetRef> = region.active_constraints(d)?.into_iter().map(FacetRef::Subset).collect();
    facets.extend(d.iter().enumerate().filter(|(_, x)| x.is_zero()).map(|(j, _)| FacetRef::Zero(j)));
    Ok(if facets.is_empty() { PointClass::Interior } else { PointClass::Boundary(facets) })
}
