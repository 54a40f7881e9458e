//! SNR sweeps: Monte Carlo ergodic rates and their slopes against `log2 P`.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(seed, SNR index, trial index)` and per-point means are accumulated in
//! trial order, so results do not depend on thread scheduling.

use std::io::Write;

use miso_dof::{CsitProfile, Rational, RsScheme, TimeSharingPlan, Transmission};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::sample_channel;
use crate::precoder::zf_precoders;
use crate::rates::{instantaneous_rates, PowerAllocation, UserRates};
use crate::regression::{fit_line, SlopeFit};
use crate::SimError;

pub const DEFAULT_GRID: [f64; 5] = [1e6, 1e8, 1e10, 1e12, 1e14];
pub const DEFAULT_TRIALS: usize = 1000;
/// Redraws allowed for an ill-conditioned estimate matrix.
pub const MAX_RESAMPLES: usize = 100;

/// Stream-id bit separating leakage sweeps from rate sweeps.
const LEAKAGE_STREAM: u64 = 1 << 63;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub profile: CsitProfile,
    pub antennas: usize,
    /// Canonical user order, like the profile's exponents.
    pub scheme: RsScheme,
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(profile: CsitProfile, antennas: usize, scheme: RsScheme, seed: u64) -> Self {
        SimConfig { profile, antennas, scheme, snr_grid: DEFAULT_GRID.to_vec(), trials: DEFAULT_TRIALS, seed }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let k = self.profile.k();
        if self.antennas < k {
            return Err(SimError::InvalidConfig(format!("{k} users need at least {k} antennas, got {}", self.antennas)));
        }
        check_grid(&self.snr_grid)?;
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be positive".into()));
        }
        let violations = self.scheme.validate(&self.profile);
        if let Some(v) = violations.first() {
            return Err(SimError::InvalidConfig(format!("scheme: {v}")));
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<(), SimError> {
    if grid.len() < 3 {
        return Err(SimError::InvalidConfig("SNR grid needs at least 3 points".into()));
    }
    if grid.iter().any(|p| !(p.is_finite() && *p > 1.0)) {
        return Err(SimError::InvalidConfig("every SNR must be finite and above 1".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::InvalidConfig("SNR grid must be strictly increasing".into()));
    }
    Ok(())
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn stream_id(snr_index: usize, trial: usize) -> u64 {
    ((snr_index as u64) << 32) | trial as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserPoint {
    pub private_rate: f64,
    /// This user's part of the common rate, `common_rate * d_j^(c) / d^(c)`.
    pub common_share: f64,
    pub total_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    /// Minimum over users of the mean common-decoding rate.
    pub common_rate: f64,
    pub users: Vec<UserPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSlope {
    /// DoF the scheme should reach.
    pub predicted: f64,
    pub fit: SlopeFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Per-user total-rate slopes, canonical order.
    pub slopes: Vec<UserSlope>,
    pub sum_slope: UserSlope,
    pub common_slope: SlopeFit,
}

fn run_trial(config: &SimConfig, alphas: &[f64], p: f64, powers: &PowerAllocation, stream: u64) -> Result<Vec<UserRates>, SimError> {
    let mut rng = trial_rng(config.seed, stream);
    for _ in 0..MAX_RESAMPLES {
        let realization = sample_channel(alphas, config.antennas, p, &mut rng);
        match zf_precoders(&realization.estimates, &config.scheme.active, &mut rng) {
            Ok(pre) => return Ok(instantaneous_rates(&realization, &pre, powers)),
            Err(SimError::IllConditioned(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(SimError::RankDeficient { p, attempts: MAX_RESAMPLES })
}

pub fn run_sweep(config: &SimConfig) -> Result<SweepResult, SimError> {
    config.validate()?;
    let outcome = config.scheme.total_dof(&config.profile)?;
    let points = sweep_points(config, &outcome.common_total)?;
    let predicted: Vec<f64> = outcome.total.iter().map(Rational::to_f64).collect();
    Ok(fit_sweep(&config.snr_grid, points, &predicted))
}

fn sweep_points(config: &SimConfig, common_dof: &Rational) -> Result<Vec<SweepPoint>, SimError> {
    let k = config.profile.k();
    let alphas: Vec<f64> = config.profile.alphas().iter().map(Rational::to_f64).collect();
    let shares: Vec<f64> = config
        .scheme
        .common_split
        .iter()
        .map(|c| if common_dof.is_zero() { 0.0 } else { (c / common_dof).to_f64() })
        .collect();

    let mut points = Vec::with_capacity(config.snr_grid.len());
    for (si, &p) in config.snr_grid.iter().enumerate() {
        let powers = PowerAllocation::new(&config.scheme, p);
        let trials: Vec<Vec<UserRates>> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &alphas, p, &powers, stream_id(si, t)))
            .collect::<Result<_, _>>()?;

        let mut common_sum = vec![0.0; k];
        let mut private_sum = vec![0.0; k];
        for (t, rates) in trials.iter().enumerate() {
            for (j, r) in rates.iter().enumerate() {
                if !(r.common.is_finite() && r.private.is_finite()) {
                    return Err(SimError::NonFinite { p, trial: t, user: j + 1 });
                }
                common_sum[j] += r.common;
                private_sum[j] += r.private;
            }
        }
        let n = config.trials as f64;
        let common_rate = common_sum.iter().map(|s| s / n).fold(f64::INFINITY, f64::min);
        let users = (0..k)
            .map(|j| {
                let private_rate = private_sum[j] / n;
                let common_share = common_rate * shares[j];
                UserPoint { private_rate, common_share, total_rate: private_rate + common_share }
            })
            .collect();
        points.push(SweepPoint { p, common_rate, users });
    }
    Ok(points)
}

fn fit_sweep(grid: &[f64], points: Vec<SweepPoint>, predicted: &[f64]) -> SweepResult {
    let x: Vec<f64> = grid.iter().map(|p| p.log2()).collect();
    let slopes = predicted
        .iter()
        .enumerate()
        .map(|(j, &pred)| {
            let y: Vec<f64> = points.iter().map(|pt| pt.users[j].total_rate).collect();
            UserSlope { predicted: pred, fit: fit_line(&x, &y) }
        })
        .collect();
    let sum_y: Vec<f64> = points.iter().map(|pt| pt.users.iter().map(|u| u.total_rate).sum()).collect();
    let sum_slope = UserSlope { predicted: predicted.iter().sum(), fit: fit_line(&x, &sum_y) };
    let common_y: Vec<f64> = points.iter().map(|pt| pt.common_rate).collect();
    SweepResult { points, slopes, sum_slope, common_slope: fit_line(&x, &common_y) }
}

/// Sweeps a time-sharing plan: every component is simulated on its own and
/// the rates are mixed with the plan weights. Silent components contribute
/// zero rate. Component `m` uses seed `seed + m`.
pub fn run_plan_sweep(
    profile: &CsitProfile,
    plan: &TimeSharingPlan,
    antennas: usize,
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SweepResult, SimError> {
    let k = profile.k();
    let mut points: Vec<SweepPoint> = grid
        .iter()
        .map(|&p| SweepPoint {
            p,
            common_rate: 0.0,
            users: vec![UserPoint { private_rate: 0.0, common_share: 0.0, total_rate: 0.0 }; k],
        })
        .collect();
    let mut any_rs = false;
    for (m, component) in plan.components.iter().enumerate() {
        let Transmission::Rs(scheme) = &component.scheme else { continue };
        any_rs = true;
        let config = SimConfig {
            profile: profile.clone(),
            antennas,
            scheme: scheme.clone(),
            snr_grid: grid.to_vec(),
            trials,
            seed: seed.wrapping_add(m as u64),
        };
        config.validate()?;
        let part = sweep_points(&config, &scheme.common_dof())?;
        let w = component.weight.to_f64();
        for (acc, pt) in points.iter_mut().zip(part) {
            acc.common_rate += w * pt.common_rate;
            for (a, u) in acc.users.iter_mut().zip(pt.users) {
                a.private_rate += w * u.private_rate;
                a.common_share += w * u.common_share;
                a.total_rate += w * u.total_rate;
            }
        }
    }
    if !any_rs {
        // nothing to simulate, but the inputs still have to make sense
        if antennas < k {
            return Err(SimError::InvalidConfig(format!("{k} users need at least {k} antennas, got {antennas}")));
        }
        check_grid(grid)?;
    }
    let predicted: Vec<f64> = plan.evaluate(profile)?.iter().map(Rational::to_f64).collect();
    Ok(fit_sweep(grid, points, &predicted))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakagePoint {
    pub p: f64,
    /// `mean |h_i^H v_j|²` over trials and over other users `j`, per user `i`.
    pub mean_leakage: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageResult {
    pub points: Vec<LeakagePoint>,
    /// Slope of `log2(mean leakage)` against `log2 P`, per user.
    pub slopes: Vec<SlopeFit>,
}

/// Residual power that other users' ZF precoders leave at each user. Every
/// user is active.
pub fn leakage_sweep(profile: &CsitProfile, antennas: usize, grid: &[f64], trials: usize, seed: u64) -> Result<LeakageResult, SimError> {
    let k = profile.k();
    if k < 2 {
        return Err(SimError::InvalidConfig("leakage needs at least two users".into()));
    }
    if antennas < k {
        return Err(SimError::InvalidConfig(format!("{k} users need at least {k} antennas, got {antennas}")));
    }
    check_grid(grid)?;
    let alphas: Vec<f64> = profile.alphas().iter().map(Rational::to_f64).collect();
    let active = vec![true; k];
    let mut points = Vec::with_capacity(grid.len());
    for (si, &p) in grid.iter().enumerate() {
        let per_trial: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, LEAKAGE_STREAM | stream_id(si, t));
                for _ in 0..MAX_RESAMPLES {
                    let r = sample_channel(&alphas, antennas, p, &mut rng);
                    let pre = match zf_precoders(&r.estimates, &active, &mut rng) {
                        Ok(pre) => pre,
                        Err(SimError::IllConditioned(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    return Ok((0..k)
                        .map(|i| {
                            let others = (0..k).filter(|&j| j != i);
                            let total: f64 = others
                                .map(|j| r.channels[i].dotc(pre.private[j].as_ref().expect("all active")).norm_sqr())
                                .sum();
                            total / (k - 1) as f64
                        })
                        .collect());
                }
                Err(SimError::RankDeficient { p, attempts: MAX_RESAMPLES })
            })
            .collect::<Result<_, _>>()?;
        let mut mean = vec![0.0; k];
        for row in &per_trial {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= trials as f64);
        points.push(LeakagePoint { p, mean_leakage: mean });
    }
    let x: Vec<f64> = grid.iter().map(|p| p.log2()).collect();
    let slopes = (0..k)
        .map(|i| {
            let y: Vec<f64> = points.iter().map(|pt| pt.mean_leakage[i].log2()).collect();
            fit_line(&x, &y)
        })
        .collect();
    Ok(LeakageResult { points, slopes })
}

/// Header of the per-point CSV export.
pub const CSV_COLUMNS: [&str; 5] = ["P", "user", "private_rate", "common_share", "total_rate"];

/// Writes one row per (SNR, user). `user_labels[j]` is the label printed for
/// canonical user `j`.
pub fn write_csv<W: Write>(result: &SweepResult, user_labels: &[usize], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let mut rows: Vec<(f64, usize, &UserPoint)> = Vec::new();
    for pt in &result.points {
        for (j, u) in pt.users.iter().enumerate() {
            rows.push((pt.p, user_labels[j], u));
        }
    }
    // group users by label within each SNR point
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (p, label, u) in rows {
        w.write_record([
            format!("{p:e}"),
            label.to_string(),
            u.private_rate.to_string(),
            u.common_share.to_string(),
            u.total_rate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeStats {
    pub predicted: f64,
    pub slope: f64,
    pub half_width: f64,
    pub rms_residual: f64,
}

impl From<&UserSlope> for SlopeStats {
    fn from(s: &UserSlope) -> Self {
        SlopeStats { predicted: s.predicted, slope: s.fit.slope, half_width: s.fit.half_width, rms_residual: s.fit.rms_residual }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSlopeEntry {
    pub user: usize,
    #[serde(flatten)]
    pub stats: SlopeStats,
}

/// Slopes next to their predictions, users listed by label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub users: Vec<UserSlopeEntry>,
    pub sum: SlopeStats,
}

impl SweepSummary {
    pub fn new(grid: &[f64], trials: usize, seed: u64, result: &SweepResult, user_labels: &[usize]) -> Self {
        let mut users: Vec<UserSlopeEntry> = result
            .slopes
            .iter()
            .enumerate()
            .map(|(j, s)| UserSlopeEntry { user: user_labels[j], stats: s.into() })
            .collect();
        users.sort_by_key(|e| e.user);
        SweepSummary { snr_grid: grid.to_vec(), trials, seed, users, sum: (&result.sum_slope).into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use miso_dof::rational::parse_list;

    fn profile(s: &str) -> CsitProfile {
        CsitProfile::new(parse_list(s).unwrap()).unwrap()
    }

    fn config(alphas: &str, levels: &str, split: &str) -> SimConfig {
        let p = profile(alphas);
        let k = p.k();
        let scheme = RsScheme::all_active(parse_list(levels).unwrap(), parse_list(split).unwrap());
        let mut c = SimConfig::new(p, k, scheme, 42);
        c.trials = 200;
        c
    }

    #[test]
    fn config_checks() {
        let mut c = config("0.6,0.3", "0.6,0.6", "0.3,0.1");
        assert!(c.validate().is_ok());
        c.antennas = 1;
        assert!(matches!(c.validate(), Err(SimError::InvalidConfig(_))));
        c.antennas = 2;
        c.snr_grid = vec![1e6, 1e8];
        assert!(c.validate().is_err());
        c.snr_grid = vec![1e6, 1e10, 1e8];
        assert!(c.validate().is_err());
        c.snr_grid = vec![0.5, 1e8, 1e10];
        assert!(c.validate().is_err());
        c.snr_grid = DEFAULT_GRID.to_vec();
        c.scheme.common_split = parse_list("0.3,0.3").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn same_seed_same_result() {
        let c = config("0.6,0.3", "0.6,0.6", "0.3,0.1");
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a, b);
        let mut other = c.clone();
        other.seed = 43;
        assert_ne!(run_sweep(&other).unwrap(), a);
    }

    #[test]
    fn all_zero_levels_give_flat_private_rates() {
        // private symbols at constant power carry no DoF; the common symbol
        // carries everything and it is split evenly
        let c = config("0.5,0.5", "0,0", "0.5,0.5");
        let r = run_sweep(&c).unwrap();
        for u in &r.points[0].users {
            assert!(u.private_rate >= 0.0 && u.common_share >= 0.0);
        }
        let private: Vec<f64> = r.points.iter().map(|pt| pt.users[0].private_rate).collect();
        let fit = fit_line(&r.points.iter().map(|pt| pt.p.log2()).collect::<Vec<_>>(), &private);
        assert!(fit.slope.abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn silent_private_layer_gives_zero_slopes() {
        // nobody active and the whole common DoF assigned to user 1: user 2 gets nothing
        let p = profile("0.6,0.3");
        let scheme = RsScheme { levels: parse_list("0,0").unwrap(), active: vec![false, false], common_split: parse_list("1,0").unwrap() };
        let mut c = SimConfig::new(p, 2, scheme, 1);
        c.trials = 200;
        let r = run_sweep(&c).unwrap();
        assert!(r.slopes[1].fit.slope.abs() < 1e-12);
        assert!((r.slopes[0].fit.slope - 1.0).abs() < 0.05);
    }

    #[test]
    fn single_component_plan_matches_plain_sweep() {
        let c = config("0.6,0.3", "0.6,0.6", "0.3,0.1");
        let plan = TimeSharingPlan {
            components: vec![miso_dof::PlanComponent { weight: Rational::one(), scheme: Transmission::Rs(c.scheme.clone()) }],
            achieved: miso_dof::DofTuple(miso_dof::rational::parse_list("0.9,0.4").unwrap()),
        };
        let a = run_plan_sweep(&c.profile, &plan, 2, &c.snr_grid, c.trials, c.seed).unwrap();
        assert_eq!(a, run_sweep(&c).unwrap());
    }

    #[test]
    fn half_silent_plan_halves_the_rates() {
        let c = config("0.6,0.3", "0.6,0.6", "0.3,0.1");
        let half = Rational::new(1, 2);
        let plan = TimeSharingPlan {
            components: vec![
                miso_dof::PlanComponent { weight: half.clone(), scheme: Transmission::Rs(c.scheme.clone()) },
                miso_dof::PlanComponent { weight: half, scheme: Transmission::Silence },
            ],
            achieved: miso_dof::DofTuple(miso_dof::rational::parse_list("0.45,0.2").unwrap()),
        };
        let full = run_sweep(&c).unwrap();
        let mixed = run_plan_sweep(&c.profile, &plan, 2, &c.snr_grid, c.trials, c.seed).unwrap();
        for (f, m) in full.points.iter().zip(&mixed.points) {
            for (fu, mu) in f.users.iter().zip(&m.users) {
                assert!((fu.total_rate / 2.0 - mu.total_rate).abs() < 1e-12);
            }
        }
        assert!((mixed.slopes[0].predicted - 0.45).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let c = config("0.6,0.3", "0.6,0.6", "0.3,0.1");
        let r = run_sweep(&c).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &[1, 2], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P,user,private_rate,common_share,total_rate"));
        assert_eq!(text.lines().count(), 1 + 2 * DEFAULT_GRID.len());
        assert!(text.lines().nth(1).unwrap().starts_with("1e6,1,"));
    }
}
