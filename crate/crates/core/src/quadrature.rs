//! Product quadrature on `S^{n-1}` exact for polynomials up to a chosen degree.
//!
//! The first coordinate `t = x_1` is integrated with Gauss–Jacobi nodes for the
//! weight `(1 − t²)^{(n−3)/2}` and the remaining factor recursively on
//! `S^{n-2}`; the circle uses equally spaced angles.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::harmonics::HarmonicBasis;
use crate::scalar::{compensated_sum, ln_gamma_half, Real};
use crate::symalg::sup_norm_on_sphere;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadratureRule<S> {
    pub n: usize,
    pub nodes: Vec<Vec<S>>,
    pub weights: Vec<S>,
    pub exact_degree: usize,
}

/// Gauss nodes and weights for `∫_{-1}^{1} g(t) (1 − t²)^a dt`, by Golub–Welsch.
pub fn gauss_jacobi_symmetric(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1 && a > -1.0);
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0));
        let b = beta.sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    // μ0 = 2^{2a+1} Γ(a+1)² / Γ(2a+2); a is a half-integer here
    let two_a = (2.0 * a).round() as u32;
    let ln_mu0 = (2.0 * a + 1.0) * std::f64::consts::LN_2 + 2.0 * ln_gamma_half(two_a + 2) - ln_gamma_half(2 * two_a + 4);
    let mu0 = ln_mu0.exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // symmetrise: the exact rule is symmetric under t → −t
    let sym: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let (t, w) = pairs[i];
            let (t2, w2) = pairs[m - 1 - i];
            (0.5 * (t - t2), 0.5 * (w + w2))
        })
        .collect();
    sym.into_iter().unzip()
}

fn build_f64(n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 2 {
        let k = d + 1;
        let w = 2.0 * std::f64::consts::PI / k as f64;
        let nodes = (0..k)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
        return (nodes, vec![w; k]);
    }
    // ⌈(d+1)/2⌉ Gauss nodes integrate degree 2m − 1 ≥ d exactly
    let m = d / 2 + 1;
    let (ts, ws) = gauss_jacobi_symmetric(m, (n as f64 - 3.0) / 2.0);
    let (inner_nodes, inner_w) = build_f64(n - 1, d);
    let mut nodes = Vec::with_capacity(m * inner_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (t, wt) in ts.iter().zip(&ws) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (y, wy) in inner_nodes.iter().zip(&inner_w) {
            let mut x = Vec::with_capacity(n);
            x.push(*t);
            x.extend(y.iter().map(|v| s * v));
            nodes.push(x);
            weights.push(wt * wy);
        }
    }
    (nodes, weights)
}

/// Rule on `S^{n-1}` integrating every polynomial of degree `≤ d` exactly
/// (up to roundoff). Every dimension `n ≥ 2` is supported.
pub fn make_rule<S: Real>(n: usize, d: usize) -> Result<QuadratureRule<S>> {
    if n < 2 {
        return Err(Error::Invalid(format!("sphere dimension n = {n} < 2")));
    }
    let (nodes, weights) = build_f64(n, d);
    Ok(QuadratureRule {
        n,
        nodes: nodes.into_iter().map(|x| x.into_iter().map(S::lit).collect()).collect(),
        weights: weights.into_iter().map(S::lit).collect(),
        exact_degree: d,
    })
}

impl<S: Real> QuadratureRule<S> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> S {
        compensated_sum(self.weights.iter().copied())
    }

    /// `∫_{S^{n-1}} f dσ`.
    pub fn integrate<F: Fn(&[S]) -> S + Sync>(&self, f: F) -> S {
        let vals: Vec<S> = self.nodes.par_iter().zip(&self.weights).map(|(x, w)| *w * f(x)).collect();
        compensated_sum(vals)
    }

    /// `|S^{n-1}|^{-1} ∫ f dσ`.
    pub fn average<F: Fn(&[S]) -> S + Sync>(&self, f: F) -> S {
        self.integrate(f) / self.total_weight()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = |v: S| v.to_f64().unwrap_or(f64::NAN);
        serde_json::json!({
            "n": self.n,
            "exact_degree": self.exact_degree,
            "nodes": self.nodes.iter().map(|x| x.iter().map(|v| f(*v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "weights": self.weights.iter().map(|w| f(*w)).collect::<Vec<_>>(),
        })
    }
}

/// `L^q` exponent, `1 ≤ q ≤ ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QNorm {
    Finite(f64),
    Infinity,
}

impl fmt::Display for QNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QNorm::Finite(q) => write!(f, "{q}"),
            QNorm::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for QNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(QNorm::Infinity),
            t => {
                let q: f64 = t.parse().map_err(|_| Error::Invalid(format!("bad exponent q = {t:?}")))?;
                if q >= 1.0 && q.is_finite() {
                    Ok(QNorm::Finite(q))
                } else {
                    Err(Error::Invalid(format!("exponent q = {q} outside [1, ∞]")))
                }
            }
        }
    }
}

impl serde::Serialize for QNorm {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        match self {
            QNorm::Finite(q) => s.serialize_f64(*q),
            QNorm::Infinity => s.serialize_str("inf"),
        }
    }
}

/// Samples used for `q = ∞`.
pub const SUP_SAMPLES: usize = 4000;

/// `‖f‖_{L^q(S^{n-1})}`; `q = ∞` is a sampled (lower-bound) supremum.
pub fn lq_norm<F: Fn(&[f64]) -> f64 + Sync>(f: F, q: QNorm, rule: &QuadratureRule<f64>) -> f64 {
    match q {
        QNorm::Infinity => sup_norm_on_sphere(&f, rule.n, SUP_SAMPLES, true).value,
        QNorm::Finite(2.0) => rule.integrate(|x| f(x) * f(x)).max(0.0).sqrt(),
        QNorm::Finite(q) => rule.integrate(|x| f(x).abs().powf(q)).powf(1.0 / q),
    }
}

/// Coefficients `⟨f, Y_k⟩` of the degree-`j` projection in the orthonormal basis.
pub fn project<F: Fn(&[f64]) -> f64 + Sync>(f: F, basis: &HarmonicBasis, rule: &QuadratureRule<f64>) -> Vec<f64> {
    let vals: Vec<f64> = rule.nodes.par_iter().map(|x| f(x)).collect();
    (0..basis.len())
        .map(|k| {
            compensated_sum(
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&vals)
                    .map(|((x, w), v)| w * v * basis.eval(k, x)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_rule() {
        let r = make_rule::<f64>(2, 8).unwrap();
        assert_eq!(r.len(), 9);
        assert!(r.weights.iter().all(|w| (w - 2.0 * PI / 9.0).abs() < 1e-15));
    }

    #[test]
    fn sphere_constants_and_moments() {
        let r = make_rule::<f64>(3, 6).unwrap();
        assert!((r.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
        let m = r.integrate(|x| x[0] * x[0] * x[1] * x[1]);
        assert!((m - 4.0 * PI / 15.0).abs() < 1e-12);
        for x in &r.nodes {
            let nn: f64 = x.iter().map(|v| v * v).sum();
            assert!((nn - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_three_points() {
        let (t, w) = gauss_jacobi_symmetric(3, 0.0);
        assert!((t[2] - 0.6f64.sqrt()).abs() < 1e-14);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn higher_dimensional_total_weight() {
        for n in 2..8 {
            let r = make_rule::<f64>(n, 4).unwrap();
            let area = crate::harmonics::surface_area::<f64>(n);
            assert!((r.total_weight() - area).abs() < 1e-12 * area, "n = {n}");
        }
    }

    #[test]
    fn single_precision_rule() {
        let r = make_rule::<f32>(3, 4).unwrap();
        assert!((r.integrate(|_| 1.0) - 4.0 * std::f32::consts::PI).abs() < 1e-4);
    }

    #[test]
    fn q_parsing() {
        assert_eq!("inf".parse::<QNorm>().unwrap(), QNorm::Infinity);
        assert_eq!("2".parse::<QNorm>().unwrap(), QNorm::Finite(2.0));
        assert!("0.5".parse::<QNorm>().is_err());
    }
}
