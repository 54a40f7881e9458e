//! Brute-force checks of the region and the synthesizer.
//!
//! Vertex enumeration intersects every K-subset of the `2^K + K - 1`
//! bounding hyperplanes, keeps the unique intersection points that satisfy
//! all inequalities, and deduplicates them exactly. The count of linear
//! systems is `C(2^K + K - 1, K)`, so this is only run for small K.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DofError, Result};
use crate::linalg;
use crate::region::{CsitProfile, DofTuple, RegionDescription};
use crate::scheme::RsScheme;
use crate::synth::{synthesize, TimeSharingPlan};
use crate::users::UserSet;
use crate::Rational;

pub const DEFAULT_GUARD: usize = 4;

/// Denominator of the level grid used for random schemes.
pub const LEVEL_GRID: i64 = 20;

/// A bounding hyperplane of the region.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Hyperplane {
    /// `d_j = 0`, 0-based canonical user.
    Zero(usize),
    /// `sum_{i in S} d_i = rhs(S)`.
    Subset(UserSet),
}

impl Hyperplane {
    fn row(self, k: usize) -> Vec<Rational> {
        (0..k)
            .map(|i| {
                let on = match self {
                    Hyperplane::Zero(j) => i == j,
                    Hyperplane::Subset(s) => s.contains(i),
                };
                if on {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }

    fn rhs(self, region: &RegionDescription) -> Rational {
        match self {
            Hyperplane::Zero(_) => Rational::zero(),
            Hyperplane::Subset(s) => region.rhs(s).clone(),
        }
    }

    fn is_tight(self, region: &RegionDescription, d: &DofTuple) -> bool {
        match self {
            Hyperplane::Zero(j) => d[j].is_zero(),
            Hyperplane::Subset(s) => d.sum_over(s) == *region.rhs(s),
        }
    }
}

/// All `2^K + K - 1` hyperplanes: the coordinate planes first, then subsets in
/// listing order.
pub fn hyperplanes(k: usize) -> Vec<Hyperplane> {
    (0..k)
        .map(Hyperplane::Zero)
        .chain(UserSet::all_nonempty(k).into_iter().map(Hyperplane::Subset))
        .collect()
}

/// `C(n, r)`.
pub fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

pub fn system_count(k: usize) -> u128 {
    binomial((1u128 << k) + k as u128 - 1, k as u128)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VertexEntry {
    pub point: DofTuple,
    /// Every hyperplane passing through the vertex.
    pub active: Vec<Hyperplane>,
    /// Filled in by [`verify_vertices`].
    pub synthesized: Option<bool>,
    pub plan: Option<TimeSharingPlan>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct VertexReport {
    pub k: usize,
    pub systems: u128,
    /// Sorted lexicographically.
    pub vertices: Vec<VertexEntry>,
}

impl VertexReport {
    pub fn points(&self) -> Vec<DofTuple> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }

    pub fn all_synthesized(&self) -> bool {
        self.vertices.iter().all(|v| v.synthesized == Some(true))
    }

    pub fn failures(&self) -> Vec<&DofTuple> {
        self.vertices.iter().filter(|v| v.synthesized != Some(true)).map(|v| &v.point).collect()
    }
}

pub fn enumerate_vertices(profile: &CsitProfile, guard: usize) -> Result<VertexReport> {
    let k = profile.k();
    let systems = system_count(k);
    if k > guard {
        return Err(DofError::GuardExceeded { k, guard, systems });
    }
    let region = RegionDescription::build(profile.clone())?;
    let planes = hyperplanes(k);
    let rows: Vec<Vec<Rational>> = planes.iter().map(|h| h.row(k)).collect();
    let rhs: Vec<Rational> = planes.iter().map(|h| h.rhs(&region)).collect();

    let points = intersect_all(&rows, &rhs, k, |x| region.is_inside(x));
    let vertices = points
        .into_iter()
        .map(|point| {
            let active = planes.iter().copied().filter(|h| h.is_tight(&region, &point)).collect();
            VertexEntry { point, active, synthesized: None, plan: None }
        })
        .collect();
    Ok(VertexReport { k, systems, vertices })
}

/// Unique solutions of every `dim`-subset of the rows that pass `keep`,
/// sorted and deduplicated.
fn intersect_all<F>(rows: &[Vec<Rational>], rhs: &[Rational], dim: usize, keep: F) -> Vec<DofTuple>
where
    F: Fn(&DofTuple) -> bool + Sync,
{
    let combos: Vec<Vec<usize>> = (0..rows.len()).combinations(dim).collect();
    let mut points: Vec<DofTuple> = combos
        .par_iter()
        .filter_map(|idx| {
            let a: Vec<Vec<Rational>> = idx.iter().map(|&i| rows[i].clone()).collect();
            let b: Vec<Rational> = idx.iter().map(|&i| rhs[i].clone()).collect();
            let x = DofTuple(linalg::solve(&a, &b)?);
            keep(&x).then_some(x)
        })
        .collect();
    points.sort();
    points.dedup();
    points
}

/// Enumerates the vertices and synthesizes each one; a vertex passes when the
/// plan achieves it exactly.
pub fn verify_vertices(profile: &CsitProfile, guard: usize) -> Result<VertexReport> {
    let mut report = enumerate_vertices(profile, guard)?;
    for v in &mut report.vertices {
        match synthesize(profile, &v.point) {
            Ok(plan) => {
                let exact = plan.evaluate(profile).map(|d| d == v.point).unwrap_or(false);
                v.synthesized = Some(exact);
                v.plan = Some(plan);
            }
            Err(_) => v.synthesized = Some(false),
        }
    }
    Ok(report)
}

/// Draws a valid scheme: levels on the `1/LEVEL_GRID` grid, a random active
/// mask, and a random admissible split of the common DoF (which may go to
/// inactive users too).
pub fn random_scheme<R: Rng>(k: usize, rng: &mut R) -> RsScheme {
    let active: Vec<bool> = (0..k).map(|_| rng.random_bool(0.8)).collect();
    let levels: Vec<Rational> = active
        .iter()
        .map(|&on| {
            if on {
                Rational::new(rng.random_range(0..=LEVEL_GRID), LEVEL_GRID)
            } else {
                Rational::zero()
            }
        })
        .collect();
    let mut scheme = RsScheme { levels, active, common_split: vec![Rational::zero(); k] };
    let common = scheme.common_dof();
    let weights: Vec<i64> = (0..k).map(|_| rng.random_range(0..=4)).collect();
    let total: i64 = weights.iter().sum();
    if total == 0 {
        scheme.common_split[rng.random_range(0..k)] = common;
    } else {
        let total = Rational::from_integer(total);
        scheme.common_split = weights.iter().map(|&w| &common * Rational::from_integer(w) / &total).collect();
    }
    scheme
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AuditViolation {
    pub scheme: RsScheme,
    pub total: DofTuple,
    pub violated: Vec<UserSet>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub trials: u64,
    pub seed: u64,
    pub violations: Vec<AuditViolation>,
}

/// Every random valid scheme must land inside the region.
pub fn random_membership_audit(profile: &CsitProfile, trials: u64, seed: u64) -> Result<AuditReport> {
    let region = RegionDescription::build(profile.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..trials.max(1) {
        let scheme = random_scheme(profile.k(), &mut rng);
        let total = scheme.total_dof(profile)?.total;
        if !region.is_inside(&total) {
            let violated = region.contains(&total)?.violated;
            violations.push(AuditViolation { scheme, total, violated });
        }
    }
    Ok(AuditReport { trials: trials.max(1), seed, violations })
}

/// Vertices of the cross-section obtained by fixing some coordinates.
///
/// `fixed` pairs a canonical user with its value. The remaining free users
/// span the slice; the result is in free-user order. Empty when the fixed
/// values already leave the region.
pub fn slice_vertices(region: &RegionDescription, fixed: &[(usize, Rational)]) -> Result<(Vec<usize>, Vec<DofTuple>)> {
    let k = region.k();
    let mut fixed_val: Vec<Option<Rational>> = vec![None; k];
    for (u, v) in fixed {
        if *u >= k {
            return Err(DofError::UserOutOfRange { user: *u, k });
        }
        fixed_val[*u] = Some(v.clone());
    }
    let free: Vec<usize> = (0..k).filter(|&u| fixed_val[u].is_none()).collect();
    let dim = free.len();
    if dim == 0 {
        return Err(DofError::InvalidScheme("slice fixes every coordinate".into()));
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, _) in free.iter().enumerate() {
        let mut row = vec![Rational::zero(); dim];
        row[i] = Rational::one();
        rows.push(row);
        rhs.push(Rational::zero());
    }
    for s in UserSet::all_nonempty(k) {
        let fixed_part: Rational = s.iter().filter_map(|u| fixed_val[u].as_ref()).sum();
        let row: Vec<Rational> =
            free.iter().map(|&u| if s.contains(u) { Rational::one() } else { Rational::zero() }).collect();
        if row.iter().all(Rational::is_zero) {
            continue;
        }
        rows.push(row);
        rhs.push(region.rhs(s) - fixed_part);
    }
    let embed = |x: &DofTuple| {
        let mut full: Vec<Rational> = fixed_val.iter().map(|v| v.clone().unwrap_or_else(Rational::zero)).collect();
        for (i, &u) in free.iter().enumerate() {
            full[u] = x[i].clone();
        }
        DofTuple(full)
    };
    let points = intersect_all(&rows, &rhs, dim, |x| region.is_inside(&embed(x)));
    Ok((free, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_list, q};
    use crate::scheme::{sum_dof_scheme, SplitChoice};

    fn profile(s: &str) -> CsitProfile {
        CsitProfile::new(parse_list(s).unwrap()).unwrap()
    }

    fn tuples(ts: &[&str]) -> Vec<DofTuple> {
        let mut v: Vec<DofTuple> = ts.iter().map(|t| DofTuple::parse(t).unwrap()).collect();
        v.sort();
        v
    }

    #[test]
    fn counts() {
        assert_eq!(hyperplanes(3).len(), 10);
        assert_eq!(system_count(4), 3876);
        assert_eq!(system_count(5), 376_992);
    }

    #[test]
    fn single_user_segment() {
        let r = enumerate_vertices(&profile("0.7"), DEFAULT_GUARD).unwrap();
        assert_eq!(r.points(), tuples(&["0", "1"]));
    }

    #[test]
    fn two_user_pentagon() {
        let r = enumerate_vertices(&profile("0.6,0.3"), DEFAULT_GUARD).unwrap();
        assert_eq!(r.points(), tuples(&["0,0", "1,0", "0,1", "0.3,1", "1,0.3"]));
        let corner = r.vertices.iter().find(|v| v.point == DofTuple::parse("1,0.3").unwrap()).unwrap();
        assert_eq!(
            corner.active,
            vec![Hyperplane::Subset(UserSet::singleton(0)), Hyperplane::Subset(UserSet::all(2))]
        );
    }

    #[test]
    fn perfect_csit_square() {
        let r = enumerate_vertices(&profile("1,1"), DEFAULT_GUARD).unwrap();
        assert_eq!(r.points(), tuples(&["0,0", "1,0", "0,1", "1,1"]));
    }

    #[test]
    fn guard_refuses() {
        let err = enumerate_vertices(&profile("0.5,0.4,0.3,0.2,0.1"), DEFAULT_GUARD).unwrap_err();
        assert_eq!(err, DofError::GuardExceeded { k: 5, guard: 4, systems: 376_992 });
    }

    #[test]
    fn vertices_all_verify() {
        let r = verify_vertices(&profile("0.6,0.3"), DEFAULT_GUARD).unwrap();
        assert!(r.all_synthesized(), "{:?}", r.failures());
        let r = verify_vertices(&profile("0.8,0.5,0.2"), DEFAULT_GUARD).unwrap();
        assert!(r.all_synthesized(), "{:?}", r.failures());
    }

    #[test]
    fn audit_finds_nothing() {
        let r = random_membership_audit(&profile("0.6,0.3"), 10_000, 1).unwrap();
        assert!(r.violations.is_empty());
        let r = random_membership_audit(&profile("1,1,1"), 2_000, 2).unwrap();
        assert!(r.violations.is_empty());
    }

    #[test]
    fn sum_dof_scheme_hits_full_facet() {
        let p = profile("0.8,0.5,0.2");
        let region = RegionDescription::build(p.clone()).unwrap();
        let s = sum_dof_scheme(&p, p.alpha(1), SplitChoice::Equal).unwrap();
        let d = s.total_dof(&p).unwrap().total;
        assert!(region.active_constraints(&d).unwrap().contains(&UserSet::all(3)));
    }

    #[test]
    fn two_user_slice_is_the_region() {
        let region = RegionDescription::build(profile("0.6,0.3")).unwrap();
        let (free, pts) = slice_vertices(&region, &[]).unwrap();
        assert_eq!(free, vec![0, 1]);
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn three_user_slice() {
        // d_3 = 0.2: d_1 <= 1, d_2 <= 1, d_1 + d_2 <= 1.5, d_1 <= 1.2 - 0.2,
        // d_2 <= 1.2 - 0.2, d_1 + d_2 <= 1.7 - 0.2
        let region = RegionDescription::build(profile("0.8,0.5,0.2")).unwrap();
        let (free, pts) = slice_vertices(&region, &[(2, q("0.2"))]).unwrap();
        assert_eq!(free, vec![0, 1]);
        assert_eq!(pts, tuples(&["0,0", "1,0", "0,1", "0.5,1", "1,0.5"]));
        let (_, empty) = slice_vertices(&region, &[(2, q("1.1"))]).unwrap();
        assert!(empty.is_empty());
    }
}
