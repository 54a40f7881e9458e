use miso_dof::rational::parse_list;
use miso_dof::{synthesize, CsitProfile, DofTuple, Transmission};
use miso_dof_sim::{leakage_sweep, run_sweep, SimConfig};
use miso_dof_sim::sweep::DEFAULT_GRID;

fn profile(s: &str) -> CsitProfile {
    CsitProfile::new(parse_list(s).unwrap()).unwrap()
}

fn synthesized_config(alphas: &str, target: &str, antennas: usize, seed: u64) -> SimConfig {
    let p = profile(alphas);
    let plan = synthesize(&p, &DofTuple(parse_list(target).unwrap())).unwrap();
    assert_eq!(plan.components.len(), 1);
    let Transmission::Rs(scheme) = plan.components[0].scheme.clone() else { panic!("silence") };
    SimConfig::new(p, antennas, scheme, seed)
}

fn assert_slopes(config: &SimConfig, expected: &[f64], tol: f64) {
    let r = run_sweep(config).unwrap();
    for (s, e) in r.slopes.iter().zip(expected) {
        assert!((s.fit.slope - e).abs() <= tol, "slope {} vs {e}", s.fit.slope);
        assert!((s.predicted - e).abs() < 1e-12);
    }
    let sum: f64 = expected.iter().sum();
    assert!((r.sum_slope.fit.slope - sum).abs() <= 2.0 * tol, "sum {}", r.sum_slope.fit.slope);
}

#[test]
fn symmetric_profile_splits_evenly() {
    assert_slopes(&synthesized_config("0.5,0.5", "0.75,0.75", 2, 7), &[0.75, 0.75], 0.05);
}

#[test]
fn asymmetric_profile_hits_facet_point() {
    assert_slopes(&synthesized_config("0.6,0.3", "0.9,0.4", 3, 11), &[0.9, 0.4], 0.05);
}

#[test]
fn single_user_without_csit() {
    assert_slopes(&synthesized_config("0", "1", 1, 3), &[1.0], 0.05);
}

#[test]
fn zf_leakage_decays_with_csit_quality() {
    let r = leakage_sweep(&profile("0.8,0.5,0.2"), 3, &DEFAULT_GRID, 1000, 5).unwrap();
    for (fit, alpha) in r.slopes.iter().zip([0.8, 0.5, 0.2]) {
        assert!((fit.slope + alpha).abs() <= 0.05, "leakage slope {} for alpha {alpha}", fit.slope);
    }
}

#[test]
fn interference_scales_with_level_minus_csit() {
    use miso_dof_sim::rates::private_power_at;
    use miso_dof_sim::{fit_line, sample_channel, zf_precoders, PowerAllocation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // user 1 transmits at a_1 = 0.9; user j sees it at P^{a_1 - alpha_j}
    let alphas = [0.6, 0.3];
    let scheme = miso_dof::RsScheme::all_active(parse_list("0.9,0.6").unwrap(), parse_list("0.1,0").unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut logs = Vec::new();
    for p in DEFAULT_GRID {
        let powers = PowerAllocation::new(&scheme, p);
        let mut acc = 0.0;
        for _ in 0..1000 {
            let r = sample_channel(&alphas, 2, p, &mut rng);
            let pre = zf_precoders(&r.estimates, &scheme.active, &mut rng).unwrap();
            acc += private_power_at(&r, &pre, &powers, 1, 0);
        }
        logs.push((acc / 1000.0).log2());
    }
    let x: Vec<f64> = DEFAULT_GRID.iter().map(|p| p.log2()).collect();
    let fit = fit_line(&x, &logs);
    assert!((fit.slope - 0.6).abs() <= 0.05, "slope {}", fit.slope);
}
