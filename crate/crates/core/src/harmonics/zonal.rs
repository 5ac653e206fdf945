use num_rational::BigRational;
use num_traits::{One, Zero};

use super::basis::HarmonicBasis;
use super::dims::dim_h;
use crate::scalar::Real;
use crate::symalg::{rat_to_f64, Polynomial};
use crate::{Error, Result};

/// Zonal harmonic `Z_j(ω, ξ)` written as a polynomial in `u = ω·ξ`,
/// normalised so that `Z_j(ω, ω) = d_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZonalKernel {
    pub n: usize,
    pub j: usize,
    /// Coefficients of `1, u, u², …`.
    pub coeffs: Vec<BigRational>,
    coeffs_f64: Vec<f64>,
}

impl ZonalKernel {
    pub fn from_coeffs(n: usize, j: usize, coeffs: Vec<BigRational>) -> Self {
        let coeffs_f64 = coeffs.iter().map(rat_to_f64).collect();
        Self { n, j, coeffs, coeffs_f64 }
    }

    /// Collapses `Σ_k Q_k(e_1) Q_k(ξ) / g_k` onto the great circle
    /// `ξ = (u, v, 0, …)` and eliminates `v² = 1 − u²`.
    pub fn from_basis(b: &HarmonicBasis) -> Result<Self> {
        let (n, j) = (b.n, b.j);
        let mut pole = vec![0u32; n];
        pole[0] = j as u32;
        // accumulate Σ_k c_k Q_k restricted to the (x_1, x_2) plane
        let mut plane: Vec<BigRational> = vec![BigRational::zero(); j + 1]; // index = power of v
        for (q, g) in b.elements.iter().zip(&b.gram_diag) {
            let at_pole = q.coefficient(&pole);
            if at_pole.is_zero() {
                continue;
            }
            let f = at_pole / g;
            for (e, c) in q.terms() {
                if e[2..].iter().all(|&x| x == 0) {
                    plane[e[1] as usize] += &f * c;
                }
            }
        }
        // u^{j−b} v^b with v^{2m} = (1 − u²)^m
        let mut coeffs = vec![BigRational::zero(); j + 1];
        for (bpow, c) in plane.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if bpow % 2 == 1 {
                return Err(Error::Invalid(format!("zonal collapse left odd power v^{bpow}")));
            }
            let m = bpow / 2;
            let mut binom = BigRational::one();
            for i in 0..=m {
                // (1 − u²)^m = Σ_i C(m,i) (−1)^i u^{2i}
                let term = if i % 2 == 0 { binom.clone() } else { -binom.clone() };
                coeffs[j - bpow + 2 * i] += c * term;
                binom = binom * BigRational::from_integer((m - i).into()) / BigRational::from_integer((i + 1).into());
            }
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Ok(Self::from_coeffs(n, j, coeffs))
    }

    pub fn eval<S: Real>(&self, u: S) -> S {
        self.coeffs_f64.iter().rev().fold(S::zero(), |acc, &c| acc * u + S::lit(c))
    }

    pub fn eval_exact(&self, u: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * u + c)
    }

    /// The harmonic homogeneous extension `|x|^j |p|^j Z_j(x·p / (|x||p|))`
    /// of `Z_j(·, p)` as an exact polynomial in `x`; harmonic for every
    /// rational `p`, and equal to `Z_j(x·p)` on the sphere when `|p| = 1`.
    pub fn with_pole(&self, pole: &[BigRational]) -> Polynomial {
        let n = self.n;
        let mut u = Polynomial::zero(n);
        let mut p2 = BigRational::zero();
        for (i, p) in pole.iter().enumerate() {
            if !p.is_zero() {
                u = &u + &Polynomial::var(n, i).scale(p);
                p2 += p * p;
            }
        }
        let mut r2 = Polynomial::zero(n);
        for i in 0..n {
            r2 = &r2 + &(&Polynomial::var(n, i) * &Polynomial::var(n, i));
        }
        let r2 = r2.scale(&p2);
        let j = self.j;
        let mut acc = Polynomial::zero(n);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() || (j - k) % 2 == 1 {
                continue;
            }
            let mut term = Polynomial::one(n).scale(c);
            for _ in 0..k {
                term = &term * &u;
            }
            for _ in 0..(j - k) / 2 {
                term = &term * &r2;
            }
            acc = &acc + &term;
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "j": self.j,
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// `Z_j(u)` by three-term recurrence: `2 T_j(u)` on the circle, otherwise
/// `(2j+n−2)/(n−2) · C_j^{(n−2)/2}(u)`.
pub fn zonal_value<S: Real>(n: usize, j: usize, u: S) -> S {
    *zonal_values_upto(n, j, u).last().expect("non-empty")
}

/// `[Z_0(u), …, Z_J(u)]`.
pub fn zonal_values_upto<S: Real>(n: usize, jmax: usize, u: S) -> Vec<S> {
    assert!(n >= 2);
    let two = S::lit(2.0);
    let mut out = Vec::with_capacity(jmax + 1);
    if n == 2 {
        let (mut t0, mut t1) = (S::one(), u);
        out.push(S::one());
        for _ in 1..=jmax {
            out.push(two * t1);
            let t2 = two * u * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        return out;
    }
    let lambda = S::lit((n as f64 - 2.0) / 2.0);
    let mut c_prev = S::one();
    let mut c_cur = two * lambda * u;
    let scale = |k: usize, c: S| S::lit((2 * k + n - 2) as f64 / (n as f64 - 2.0)) * c;
    out.push(S::one());
    for k in 1..=jmax {
        out.push(scale(k, c_cur));
        let kk = S::from_usize_lossy(k + 1);
        let next = (two * (kk + lambda - S::one()) * u * c_cur - (kk + two * lambda - two) * c_prev) / kk;
        c_prev = c_cur;
        c_cur = next;
    }
    out
}

/// `Z_j(1) = d_j` as a float, used when normalising poles.
pub fn zonal_at_one(n: usize, j: usize) -> f64 {
    dim_h(n, j) as f64
}
