use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::scalar::{ln_gamma_half, Real};

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `dim H_j(S^{n-1}) = (2j+n−2)(n+j−3)! / (j!(n−2)!)`, with `d_0 = 1`
/// handled explicitly for `n = 2` where `(n+j−3)!` is undefined.
pub fn dim_h(n: usize, j: usize) -> u64 {
    assert!(n >= 2, "dimension must be at least 2");
    if n == 2 && j == 0 {
        return 1;
    }
    let (n, j) = (n as u64, j as u64);
    let num = BigUint::from(2 * j + n - 2) * factorial(n + j - 3);
    let den = factorial(j) * factorial(n - 2);
    (num / den).to_u64().expect("dimension fits in u64")
}

/// Laplace–Beltrami eigenvalue `−j(j+n−2)` of degree-`j` harmonics.
pub fn eigenvalue(n: usize, j: usize) -> i64 {
    -((j * (j + n - 2)) as i64)
}

/// `|S^{n-1}| = 2π^{n/2} / Γ(n/2)`.
pub fn surface_area<S: Real>(n: usize) -> S {
    assert!(n >= 2);
    let ln = std::f64::consts::LN_2 + 0.5 * n as f64 * std::f64::consts::PI.ln() - ln_gamma_half(n as u32);
    S::lit(ln.exp())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeInfo {
    pub n: usize,
    pub j: usize,
    pub d_j: u64,
    pub eigenvalue: i64,
}

impl DegreeInfo {
    pub fn new(n: usize, j: usize) -> Self {
        Self { n, j, d_j: dim_h(n, j), eigenvalue: eigenvalue(n, j) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        assert_eq!(dim_h(3, 2), 5);
        assert_eq!(dim_h(2, 7), 2);
        assert_eq!(dim_h(4, 1), 4);
        for n in 2..9 {
            assert_eq!(dim_h(n, 0), 1);
        }
    }

    #[test]
    fn areas() {
        assert!((surface_area::<f64>(2) - 2.0 * PI).abs() < 1e-14);
        assert!((surface_area::<f64>(3) - 4.0 * PI).abs() < 1e-13);
        assert!((surface_area::<f64>(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((surface_area::<f32>(3) - 4.0 * std::f32::consts::PI).abs() < 1e-5);
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(eigenvalue(3, 1), -2);
        assert_eq!(eigenvalue(5, 1), -4);
        assert_eq!(eigenvalue(3, 4), -20);
    }
}
