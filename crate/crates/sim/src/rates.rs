//! Powers and per-realization achievable rates of a rate-splitting scheme.

use miso_dof::RsScheme;

use crate::channel::ChannelRealization;
use crate::precoder::Precoders;

/// `P_i^(p) = P^{a_i} / (K + 1)` for active users, the rest to the common
/// symbol. The common power never drops below `P / (K + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerAllocation {
    pub common: f64,
    pub private: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(scheme: &RsScheme, p: f64) -> Self {
        let k = scheme.k();
        let private: Vec<f64> = scheme
            .levels
            .iter()
            .zip(&scheme.active)
            .map(|(a, &on)| if on { p.powf(a.to_f64()) / (k as f64 + 1.0) } else { 0.0 })
            .collect();
        let common = p - private.iter().sum::<f64>();
        PowerAllocation { common, private }
    }

    pub fn total(&self) -> f64 {
        self.common + self.private.iter().sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserRates {
    /// Rate at which this user can decode the common symbol, bits/use.
    pub common: f64,
    /// Private rate after removing the common symbol, bits/use.
    pub private: f64,
}

/// Received power `P_i |h_j^H v_i|²` of private stream `i` at user `j`.
pub fn private_power_at(realization: &ChannelRealization, precoders: &Precoders, powers: &PowerAllocation, j: usize, i: usize) -> f64 {
    match &precoders.private[i] {
        Some(v) => powers.private[i] * realization.channels[j].dotc(v).norm_sqr(),
        None => 0.0,
    }
}

pub fn instantaneous_rates(realization: &ChannelRealization, precoders: &Precoders, powers: &PowerAllocation) -> Vec<UserRates> {
    let k = realization.channels.len();
    (0..k)
        .map(|j| {
            let received: Vec<f64> = (0..k).map(|i| private_power_at(realization, precoders, powers, j, i)).collect();
            let all_private: f64 = received.iter().sum();
            let common_gain = powers.common * realization.channels[j].dotc(&precoders.common).norm_sqr();
            let common = (1.0 + common_gain / (1.0 + all_private)).log2();
            let private = if precoders.private[j].is_some() {
                let interference = all_private - received[j];
                (1.0 + received[j] / (1.0 + interference)).log2()
            } else {
                0.0
            };
            UserRates { common, private }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::precoder::zf_precoders;
    use miso_dof::rational::parse_list;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(levels: &str, split: &str) -> RsScheme {
        RsScheme::all_active(parse_list(levels).unwrap(), parse_list(split).unwrap())
    }

    #[test]
    fn power_budget_is_met() {
        for p in [1e2, 1e6, 1e14] {
            let powers = PowerAllocation::new(&scheme("1,1,1", "0,0,0"), p);
            assert!(powers.total() <= p * (1.0 + 1e-12));
            assert!(powers.common >= p / 4.0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn zero_private_power_means_zero_private_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = scheme("0,0", "0.5,0.5");
        let r = sample_channel(&[0.5, 0.5], 2, 1e6, &mut rng);
        let pre = zf_precoders(&r.estimates, &s.active, &mut rng).unwrap();
        let mut powers = PowerAllocation::new(&s, 1e6);
        powers.private = vec![0.0, 0.0];
        for u in instantaneous_rates(&r, &pre, &powers) {
            assert_eq!(u.private, 0.0);
            assert!(u.common > 0.0);
        }
    }

    #[test]
    fn single_user_full_power_tracks_log_p() {
        let s = RsScheme { levels: parse_list("1").unwrap(), active: vec![true], common_split: parse_list("0").unwrap() };
        let mut means = Vec::new();
        for p in [1e6, 1e10] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut acc = 0.0;
            for _ in 0..2000 {
                let r = sample_channel(&[1.0], 1, p, &mut rng);
                let pre = zf_precoders(&r.estimates, &s.active, &mut rng).unwrap();
                acc += instantaneous_rates(&r, &pre, &PowerAllocation::new(&s, p))[0].private;
            }
            means.push(acc / 2000.0);
        }
        let slope = (means[1] - means[0]) / (1e10f64.log2() - 1e6f64.log2());
        assert!((slope - 1.0).abs() < 0.02, "slope {slope}");
    }
}
