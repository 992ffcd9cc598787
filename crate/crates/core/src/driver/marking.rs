use crate::estimator::Indicators;
use crate::mesh::MarkedSet;

use super::DriverError;

/// Dörfler marking with minimal cardinality: the largest indicators are taken
/// first (ties broken by ascending element index) until they carry a
/// `theta`-fraction of the squared estimator. Returns the empty set when all
/// indicators vanish.
pub fn dorfler_mark(indicators: &Indicators, theta: f64) -> Result<MarkedSet, DriverError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(DriverError::Config(format!("marking parameter theta must lie in (0, 1], got {theta}")));
    }
    let eta = indicators.squared();
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    // Summing in the same order as the accumulation below makes theta = 1
    // stop exactly after the last nonzero indicator.
    let total: f64 = order.iter().map(|&e| eta[e]).sum();
    if total <= 0.0 {
        return Ok(MarkedSet::empty());
    }
    let target = theta * total;
    let mut sum = 0.0;
    let mut marked = Vec::new();
    for e in order {
        if sum >= target {
            break;
        }
        sum += eta[e];
        marked.push(e);
    }
    Ok(MarkedSet::new(marked))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(v: &[f64]) -> Indicators {
        Indicators::from_squared(v.to_vec())
    }

    #[test]
    fn dominant_element() {
        let m = dorfler_mark(&ind(&[9.0, 1.0, 1.0, 1.0]), 0.5).unwrap();
        assert_eq!(m.indices(), &[0]);
    }

    #[test]
    fn equal_indicators_take_half() {
        let m = dorfler_mark(&ind(&[1.0; 8]), 0.5).unwrap();
        assert_eq!(m.indices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn full_marking_skips_zero_indicators() {
        let m = dorfler_mark(&ind(&[0.3, 0.0, 0.1, 0.2, 0.0]), 1.0).unwrap();
        assert_eq!(m.indices(), &[0, 2, 3]);
    }

    #[test]
    fn zero_indicators_and_bad_theta() {
        assert!(dorfler_mark(&ind(&[0.0; 4]), 0.5).unwrap().is_empty());
        assert!(dorfler_mark(&ind(&[1.0]), 0.0).is_err());
        assert!(dorfler_mark(&ind(&[1.0]), 1.5).is_err());
    }
}
