//! Noise model: y_delta = y + delta_rel * ||y|| * xi where xi is a standard
//! Gaussian draw normalized to unit length, so the absolute level is exactly
//! delta = delta_rel * ||y||.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::block::DataVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NoisyData {
    pub y_delta: DataVector,
    /// Absolute noise level ||y_delta - y||.
    pub delta: f64,
    /// Relative level delta / ||y||.
    pub delta_rel: f64,
}

pub fn add_noise(y: &DataVector, delta_rel: f64, seed: u64) -> Result<NoisyData> {
    if delta_rel < 0.0 {
        return Err(Error::Config(format!("delta_rel must be >= 0, got {delta_rel}")));
    }
    if delta_rel == 0.0 {
        return Ok(NoisyData { y_delta: y.clone(), delta: 0.0, delta_rel: 0.0 });
    }
    let norm_y = y.norm();
    if norm_y == 0.0 {
        return Err(Error::ZeroNormData);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xi: Vec<f64> = (0..y.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let norm_xi = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut xi {
        *v /= norm_xi;
    }

    let delta = delta_rel * norm_y;
    let values = y
        .values()
        .iter()
        .zip(&xi)
        .map(|(yv, xv)| yv + delta * xv)
        .collect();
    Ok(NoisyData { y_delta: DataVector::new(values), delta, delta_rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_level_returns_data_unchanged() {
        let y = DataVector::new(vec![1.0, -2.0, 3.0]);
        let nd = add_noise(&y, 0.0, 5).unwrap();
        assert_eq!(nd.y_delta, y);
        assert_eq!(nd.delta, 0.0);
    }

    #[test]
    fn noise_norm_matches_level() {
        let y = DataVector::new((0..200).map(|i| (i as f64 * 0.37).sin()).collect());
        let nd = add_noise(&y, 0.01, 11).unwrap();
        let achieved = nd.y_delta.sub(&y).norm() / y.norm();
        assert!((achieved - 0.01).abs() <= 1e-14 * (1.0 + achieved));
        assert!((nd.delta - 0.01 * y.norm()).abs() < 1e-300 + 1e-14 * nd.delta);
    }

    #[test]
    fn identical_seeds_identical_noise() {
        let y = DataVector::new(vec![0.5; 64]);
        let a = add_noise(&y, 0.05, 77).unwrap();
        let b = add_noise(&y, 0.05, 77).unwrap();
        assert_eq!(a.y_delta, b.y_delta);
        let c = add_noise(&y, 0.05, 78).unwrap();
        assert_ne!(a.y_delta, c.y_delta);
    }

    #[test]
    fn positive_level_on_zero_data_is_an_error() {
        let y = DataVector::zeros(4);
        assert!(matches!(add_noise(&y, 0.1, 0).unwrap_err(), Error::ZeroNormData));
    }
}
