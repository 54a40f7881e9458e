use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub half_width: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Needs at least three points.
pub fn fit_line(x: &[f64], y: &[f64]) -> SlopeFit {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 3, "need at least three points for a slope with error bars");
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - slope * xi - intercept).powi(2)).sum();
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive dof").inverse_cdf(0.975);
    SlopeFit { slope, intercept, half_width: t * se, rms_residual: (ssr / nf).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.75 * v - 2.0).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope - 0.75).abs() < 1e-12);
        assert!((f.intercept + 2.0).abs() < 1e-12);
        assert!(f.half_width < 1e-12 && f.rms_residual < 1e-12);
    }

    #[test]
    fn noisy_line_half_width() {
        // residuals +-0.1 alternating; hand-computed: slope 1, se = sqrt(0.04/2/5)
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.1, 0.9, 2.1, 2.9];
        let f = fit_line(&x, &y);
        assert!((f.slope - 0.96).abs() < 1e-12, "{}", f.slope);
        let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - 0.96 * a - f.intercept).powi(2)).sum();
        let se = (ssr / 2.0 / 5.0).sqrt();
        assert!((f.half_width - 4.302652729911275 * se).abs() < 1e-9);
    }
}
