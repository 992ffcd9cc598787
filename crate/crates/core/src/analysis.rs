//! Least-squares fits used to read off convergence rates.

/// Result of a linear least-squares fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    pub n: usize,
}

/// Ordinary least squares; `None` for fewer than two points or constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let (mx, my) = (x.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some(LinearFit { slope, intercept, r2, n })
}

/// Fit of `log y` against `log x` over the pairs with positive entries.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).unzip();
    linear_fit(&lx, &ly)
}

/// Log-log fit restricted to the final decade of `x`, i.e. `x >= max(x) / 10`.
pub fn final_decade_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let xmax = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (fx, fy): (Vec<f64>, Vec<f64>) = x.iter().zip(y).filter(|(a, _)| **a >= xmax / 10.0).map(|(a, b)| (*a, *b)).unzip();
    loglog_fit(&fx, &fy)
}

/// Geometric fit `v_n ~ C q^n` of a positive sequence; returns `(q, fit)`.
pub fn geometric_fit(values: &[f64]) -> Option<(f64, LinearFit)> {
    let (n, lv): (Vec<f64>, Vec<f64>) =
        values.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, v)| (i as f64, v.ln())).unzip();
    linear_fit(&n, &lv).map(|fit| (fit.slope.exp(), fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let x: Vec<f64> = (1..20).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let fit = loglog_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12 && (fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        let last = final_decade_fit(&x, &y).unwrap();
        assert_eq!(last.n, 5);
    }

    #[test]
    fn geometric_sequence() {
        let v: Vec<f64> = (0..30).map(|n| 2.0 * 0.7f64.powi(n)).collect();
        let (q, fit) = geometric_fit(&v).unwrap();
        assert!((q - 0.7).abs() < 1e-12 && fit.r2 > 0.999_999);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0], &[2.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
