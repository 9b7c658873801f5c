use crate::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::input(format!("length mismatch: {} x values, {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::input("need at least 3 points for a log-log fit"));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::input(format!("log-log fit needs positive finite values, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::input("x values are all equal"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_power_law() {
        let xs = [10.0, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(-0.5)).collect();
        assert!((fit_loglog_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let s = fit_loglog_slope(&[1.0, 2.0, 4.0, 8.0], &[3.0; 4]).unwrap();
        assert!(s.abs() < 1e-14);
    }

    #[test]
    fn noisy_quadratic() {
        // Closed-form regression of ln(3 x^2 (1 + 0.01 e)) on ln x: the noise
        // enters as ln(1 + 0.01 e) with |.| < 0.0101, so the slope stays within
        // a few hundredths of 2 over two decades.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..30).map(|i| 10f64.powf(i as f64 / 15.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x * (1.0 + 0.01 * rng.random_range(-1.0..1.0))).collect();
        let s = fit_loglog_slope(&xs, &ys).unwrap();
        assert!((s - 2.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(fit_loglog_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
        assert!(fit_loglog_slope(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }
}
