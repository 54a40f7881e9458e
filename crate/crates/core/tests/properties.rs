use miso_dof::oracle::{random_scheme, LEVEL_GRID};
use miso_dof::synth::{synthesize, synthesize_facet_point, Transmission};
use miso_dof::users::UserSet;
use miso_dof::{
    facet_spec, CsitProfile, DofTuple, Rational, RegionDescription, RsScheme, TimeSharingPlan,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DEN: i64 = 20;

fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// K users with exponents on the 1/DEN grid, in arbitrary order.
fn alphas(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Rational>> {
    k.prop_flat_map(|k| proptest::collection::vec(0..=DEN, k))
        .prop_map(|v| v.into_iter().map(|n| rational(n, DEN)).collect())
}

fn profile_of(alphas: Vec<Rational>) -> CsitProfile {
    CsitProfile::new(alphas).unwrap()
}

/// Direct facet test: the subset equality plus every other inequality of
/// the region, checked one subset at a time.
fn facet_by_all_inequalities(profile: &CsitProfile, subset: UserSet, d: &DofTuple) -> bool {
    let k = profile.k();
    let rhs = |g: UserSet| -> Rational {
        let s1 = g.first().unwrap();
        Rational::one() + g.iter().filter(|&i| i != s1).map(|i| profile.alpha(i).clone()).sum::<Rational>()
    };
    let sum = |g: UserSet| -> Rational { g.iter().map(|i| d[i].clone()).sum() };
    if d.iter().any(Rational::is_negative) {
        return false;
    }
    if sum(subset) != rhs(subset) {
        return false;
    }
    (1u64..(1 << k)).map(UserSet::from_bits).filter(|&g| g != subset).all(|g| sum(g) <= rhs(g))
}

/// Random point on the hyperplane of `subset`: free coordinates drawn on a
/// fine grid, `d_{s_1}` solved from the equality.
fn hyperplane_point(profile: &CsitProfile, subset: UserSet, rng: &mut impl rand::Rng) -> DofTuple {
    let k = profile.k();
    let lead = subset.first().unwrap();
    let mut d: Vec<Rational> = (0..k).map(|_| rational(rng.random_range(0..=2 * DEN), 2 * DEN)).collect();
    let rhs = Rational::one() + subset.tail().iter().map(|i| profile.alpha(i).clone()).sum::<Rational>();
    let others: Rational = subset.tail().iter().map(|i| d[i].clone()).sum();
    d[lead] = rhs - others;
    DofTuple(d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn downward_closed(a in alphas(1..=4), seed in any::<u64>()) {
        let region = RegionDescription::build(profile_of(a)).unwrap();
        let k = region.k();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let d = DofTuple((0..k).map(|_| rational(rand::Rng::random_range(&mut rng, 0..=DEN), DEN)).collect());
            if !region.is_inside(&d) {
                continue;
            }
            let shrunk = DofTuple(d.iter().map(|x| x * rational(rand::Rng::random_range(&mut rng, 0..=4), 4)).collect());
            prop_assert!(region.is_inside(&shrunk));
        }
    }

    #[test]
    fn permutation_consistent(a in alphas(1..=5), shift in 0usize..5) {
        let k = a.len();
        let mut rotated = a.clone();
        rotated.rotate_left(shift % k);
        let r1 = RegionDescription::build(profile_of(a)).unwrap();
        let r2 = RegionDescription::build(profile_of(rotated)).unwrap();
        prop_assert_eq!(r1.constraints(), r2.constraints());
    }

    #[test]
    fn monotone_in_csit(a in alphas(1..=4), bumps in proptest::collection::vec(0..=DEN, 4), seed in any::<u64>()) {
        let k = a.len();
        let better: Vec<Rational> = a.iter().zip(&bumps).map(|(x, b)| (x + rational(*b, DEN)).min(Rational::one())).collect();
        let worse = RegionDescription::build(profile_of(a.clone())).unwrap();
        // compare in input order: canonical orders may differ
        let p_worse = worse.profile().clone();
        let better_region = RegionDescription::build(profile_of(better)).unwrap();
        let p_better = better_region.profile().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let user: Vec<Rational> = (0..k).map(|_| rational(rand::Rng::random_range(&mut rng, 0..=DEN), DEN)).collect();
            let dw = DofTuple(p_worse.to_canonical(&user).unwrap());
            if worse.is_inside(&dw) {
                let db = DofTuple(p_better.to_canonical(&user).unwrap());
                prop_assert!(better_region.is_inside(&db));
            }
        }
    }

    #[test]
    fn facet_forms_agree(a in alphas(2..=4), seed in any::<u64>()) {
        let profile = profile_of(a);
        let k = profile.k();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for subset in UserSet::all_nonempty(k) {
            let facet = facet_spec(&profile, subset).unwrap();
            for i in 0..200 {
                let d = if i % 10 == 0 {
                    DofTuple((0..k).map(|_| rational(rand::Rng::random_range(&mut rng, 0..=DEN), DEN)).collect())
                } else {
                    hyperplane_point(&profile, subset, &mut rng)
                };
                prop_assert_eq!(facet.contains(&d), facet_by_all_inequalities(&profile, subset, &d), "S = {} d = {}", subset, d);
            }
        }
    }

    #[test]
    fn scaled_point_is_active_and_inside(a in alphas(1..=5), raw in proptest::collection::vec(1..=DEN, 5)) {
        let region = RegionDescription::build(profile_of(a)).unwrap();
        let k = region.k();
        // any positive tuple scaled far down is inside
        let d = DofTuple(raw[..k].iter().map(|&n| rational(n, DEN * k as i64)).collect());
        prop_assume!(region.is_inside(&d));
        let (boundary, lambda) = region.scale_to_boundary(&d).unwrap();
        prop_assert!(region.is_inside(&boundary));
        prop_assert!(!region.active_constraints(&boundary).unwrap().is_empty());
        prop_assert!(lambda.is_positive() && lambda <= Rational::one());
        prop_assert_eq!(boundary.scaled(&lambda), d);
    }

    #[test]
    fn random_schemes_stay_inside(a in alphas(1..=5), seed in any::<u64>()) {
        let profile = profile_of(a);
        let region = RegionDescription::build(profile.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let s = random_scheme(profile.k(), &mut rng);
            prop_assert!(s.validate(&profile).is_empty());
            let out = s.total_dof(&profile).unwrap();
            let sum: Vec<Rational> = out.private.iter().zip(&s.common_split).map(|(p, c)| p + c).collect();
            prop_assert_eq!(&out.total.0, &sum);
            prop_assert!(region.is_inside(&out.total), "{:?} -> {}", s, out.total);
        }
    }

    #[test]
    fn private_dof_monotone(a in alphas(2..=4), seed in any::<u64>()) {
        let profile = profile_of(a);
        let k = profile.k();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = RsScheme::all_active(
            (0..k).map(|_| rational(rand::Rng::random_range(&mut rng, 0..LEVEL_GRID), LEVEL_GRID)).collect(),
            vec![Rational::zero(); k],
        );
        let base = s.private_dof(&profile);
        let step = rational(1, LEVEL_GRID);
        for j in 0..k {
            let mut raised = s.clone();
            raised.levels[j] = &raised.levels[j] + &step;
            let after = raised.private_dof(&profile);
            prop_assert!(after[j] >= base[j]);
            for i in (0..k).filter(|&i| i != j) {
                prop_assert!(after[i] <= base[i]);
            }
        }
    }

    #[test]
    fn synthesis_is_exact(a in alphas(1..=4), raw in proptest::collection::vec(0..=2 * DEN, 4), zero_mask in any::<u8>()) {
        let profile = profile_of(a);
        let region = RegionDescription::build(profile.clone()).unwrap();
        let k = profile.k();
        let mut d = DofTuple(raw[..k].iter().enumerate().map(|(i, &n)| {
            if zero_mask & (1 << i) != 0 { Rational::zero() } else { rational(n, 2 * DEN) }
        }).collect());
        if !region.is_inside(&d) {
            let (b, _) = match region.scale_to_boundary(&DofTuple(d.iter().map(|x| x / Rational::from_integer(4 * k as i64)).collect())) {
                Ok(v) => v,
                Err(_) => (DofTuple::zeros(k), Rational::one()),
            };
            d = b;
        }
        let plan = synthesize(&profile, &d).unwrap();
        prop_assert_eq!(&plan.achieved, &d);
        prop_assert_eq!(plan.evaluate(&profile).unwrap(), d.clone());
        let weights: Rational = plan.components.iter().map(|c| c.weight.clone()).sum();
        prop_assert_eq!(weights, Rational::one());
        check_plan_schemes(&profile, &plan, &d);
    }

    #[test]
    fn plan_json_round_trip(a in alphas(1..=4), raw in proptest::collection::vec(0..=DEN, 4)) {
        let profile = profile_of(a);
        let k = profile.k();
        let d = DofTuple(raw[..k].iter().map(|&n| rational(n, DEN * k as i64)).collect());
        let plan = synthesize(&profile, &d).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        let back: TimeSharingPlan = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, plan);
        let region = RegionDescription::build(profile).unwrap();
        let back: RegionDescription = serde_json::from_str(&serde_json::to_string(&region).unwrap()).unwrap();
        prop_assert_eq!(back, region);
    }
}

fn check_plan_schemes(profile: &CsitProfile, plan: &TimeSharingPlan, d: &DofTuple) {
    for c in &plan.components {
        if let Transmission::Rs(s) = &c.scheme {
            assert!(s.validate(profile).is_empty(), "{s:?}");
            for j in 0..profile.k() {
                if d[j].is_zero() {
                    assert!(!s.active[j], "zero-DoF user {j} active in {s:?}");
                    assert!(s.common_split[j].is_zero(), "zero-DoF user {j} gets common DoF in {s:?}");
                    assert!(s.levels[j].is_zero());
                }
            }
        }
    }
}

#[test]
fn facet_grid_small_k() {
    let profiles = ["0.6,0.3", "0.8,0.5,0.2", "0.5,0.5,0.5", "1,0.25,0.25,0", "0.75,0.5,0.375,0.125"];
    for alphas in profiles {
        let profile = CsitProfile::new(miso_dof::rational::parse_list(alphas).unwrap()).unwrap();
        let k = profile.k();
        for subset in UserSet::all_nonempty(k) {
            let facet = facet_spec(&profile, subset).unwrap();
            let lead = facet.lead;
            let free: Vec<usize> = (0..k).filter(|&j| j != lead).collect();
            let mut hits = 0;
            for code in 0..9usize.pow(free.len() as u32) {
                let mut d = vec![Rational::zero(); k];
                let mut c = code;
                for &j in &free {
                    d[j] = rational((c % 9) as i64, 8);
                    c /= 9;
                }
                let others: Rational = subset.tail().iter().map(|i| d[i].clone()).sum();
                d[lead] = &facet.rhs - others;
                let d = DofTuple(d);
                if !facet.contains(&d) {
                    continue;
                }
                hits += 1;
                let out = synthesize_facet_point(&profile, subset, &d).unwrap();
                assert!(out.scheme.validate(&profile).is_empty());
                assert_eq!(out.scheme.total_dof(&profile).unwrap().total, d);
                assert_eq!(out.scheme.max_active_level(), out.case.expected_max_level(&profile, &facet, &d));
            }
            assert!(hits > 0, "no grid point on facet {subset} for {alphas}");
        }
    }
}
