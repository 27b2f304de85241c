//! Small numeric helpers shared across modules.

use nalgebra::DMatrix;

/// Pairwise (cascade) summation. All statistics reported by the crate reduce
/// through this so results do not depend on accumulation order or thread
/// count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Population standard deviation (divides by `N`).
pub fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&sq) / xs.len() as f64).sqrt()
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of a matrix.
pub fn amax(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `max(1, s)^p`, the normalization used for relative residuals of
/// polynomial degree `p` in a matrix of norm `s`.
pub fn degree_scale(s: f64, p: usize) -> f64 {
    s.max(1.0).powi(p as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn stddev_of_constant_is_zero() {
        let xs = [3.5; 17];
        assert_eq!(stddev(&xs), 0.0);
    }

    #[test]
    fn stddev_simple() {
        // population stddev of {1, 3} is 1
        assert!((stddev(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
