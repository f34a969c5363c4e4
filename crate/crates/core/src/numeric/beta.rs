//! Beta variates.
//!
//! Jöhnk's rejection method covers `alpha, beta <= 1`, which includes the
//! U-shaped `Beta(0.4, 0.4)` used for mixing coefficients. Everything else
//! goes through a ratio of Marsaglia–Tsang gamma draws. Both paths work in
//! log space so tiny shapes cannot underflow to `0/0`.

use crate::error::{invalid, Result};
use crate::numeric::rng::RngStream;

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// One draw from `Beta(alpha, beta)`.
pub fn sample_beta(alpha: f64, beta: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!(
            "beta shapes must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    let x = if alpha <= 1.0 && beta <= 1.0 {
        johnk(alpha, beta, rng)
    } else {
        let la = log_gamma_variate(alpha, rng);
        let lb = log_gamma_variate(beta, rng);
        (la - log_add_exp(la, lb)).exp()
    };
    Ok(x.clamp(0.0, 1.0))
}

fn johnk(alpha: f64, beta: f64, rng: &mut RngStream) -> f64 {
    loop {
        let lx = rng.uniform_open().ln() / alpha;
        let ly = rng.uniform_open().ln() / beta;
        let lsum = log_add_exp(lx, ly);
        if lsum <= 0.0 {
            return (lx - lsum).exp();
        }
    }
}

/// `ln` of a `Gamma(shape, 1)` draw.
fn log_gamma_variate(shape: f64, rng: &mut RngStream) -> f64 {
    if shape < 1.0 {
        // Gamma(a) = Gamma(a + 1) * U^(1/a)
        let boosted = log_gamma_variate(shape + 1.0, rng);
        return boosted + rng.uniform_open().ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng::Purpose;
    use statrs::distribution::{Beta, ContinuousCDF};

    fn mean_of(alpha: f64, beta: f64, n: usize) -> f64 {
        let mut rng = RngStream::new(7, Purpose::Beta);
        (0..n).map(|_| sample_beta(alpha, beta, &mut rng).unwrap()).sum::<f64>() / n as f64
    }

    #[test]
    fn support_is_unit_interval() {
        let mut rng = RngStream::new(3, Purpose::Beta);
        for _ in 0..10_000 {
            let x = sample_beta(0.4, 0.4, &mut rng).unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn monte_carlo_means() {
        assert!((mean_of(0.4, 0.4, 100_000) - 0.5).abs() < 0.01);
        assert!((mean_of(2.0, 1.0, 100_000) - 2.0 / 3.0).abs() < 0.01);
        assert!((mean_of(0.5, 3.0, 100_000) - 0.5 / 3.5).abs() < 0.01);
    }

    #[test]
    fn reproducible_per_stream() {
        let mut a = RngStream::new(11, Purpose::Beta);
        let mut b = RngStream::new(11, Purpose::Beta);
        for _ in 0..100 {
            assert_eq!(
                sample_beta(0.4, 0.4, &mut a).unwrap(),
                sample_beta(0.4, 0.4, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let mut rng = RngStream::new(0, Purpose::Beta);
        assert!(sample_beta(0.0, 1.0, &mut rng).is_err());
        assert!(sample_beta(1.0, -2.0, &mut rng).is_err());
        assert!(sample_beta(f64::NAN, 1.0, &mut rng).is_err());
    }

    fn ks_statistic(alpha: f64, beta: f64, n: usize, seed: u64) -> f64 {
        let mut rng = RngStream::new(seed, Purpose::Beta);
        let mut xs: Vec<f64> = (0..n).map(|_| sample_beta(alpha, beta, &mut rng).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let dist = Beta::new(alpha, beta).unwrap();
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = dist.cdf(x);
                let lo = (f - i as f64 / n as f64).abs();
                let hi = ((i + 1) as f64 / n as f64 - f).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn kolmogorov_smirnov_at_one_percent() {
        let n = 10_000;
        // asymptotic critical value for significance 0.01
        let critical = 1.628 / (n as f64).sqrt();
        for (a, b) in [(0.4, 0.4), (1.0, 1.0), (2.0, 5.0), (0.3, 2.5)] {
            let d = ks_statistic(a, b, n, 2024);
            assert!(d < critical, "Beta({a},{b}): D = {d} >= {critical}");
        }
    }
}
