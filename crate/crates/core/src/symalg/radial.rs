use std::collections::BTreeMap;

use super::poly::{rat_int, CompiledPoly, Polynomial};
use crate::scalar::Real;

/// `Σ_k P_k(x) · (x·x)^{-k/2}`, closed under Cartesian differentiation.
///
/// Summands are grouped by the radial exponent `k`, which makes the
/// representation produced by differentiation canonical enough for
/// mixed partials to agree coefficient by coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadialForm {
    n: usize,
    summands: BTreeMap<u32, Polynomial>,
}

impl RadialForm {
    pub fn zero(n: usize) -> Self {
        Self { n, summands: BTreeMap::new() }
    }

    pub fn new(n: usize, p: Polynomial, k: u32) -> Self {
        let mut f = Self::zero(n);
        f.add_summand(p, k);
        f
    }

    /// Homogeneous extension of order 0 of a homogeneous polynomial `q` of
    /// degree `j`: `q(x) |x|^{-j}`, which agrees with `q` on the sphere.
    pub fn homogeneous_extension(q: &Polynomial) -> Self {
        let j = q.homogeneous_degree().unwrap_or(0);
        Self::new(q.dim(), q.clone(), j)
    }

    pub fn add_summand(&mut self, p: Polynomial, k: u32) {
        assert_eq!(p.dim(), self.n, "dimension mismatch");
        if p.is_zero() {
            return;
        }
        let merged = match self.summands.remove(&k) {
            Some(old) => &old + &p,
            None => p,
        };
        if !merged.is_zero() {
            self.summands.insert(k, merged);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn summands(&self) -> impl Iterator<Item = (u32, &Polynomial)> {
        self.summands.iter().map(|(k, p)| (*k, p))
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    /// `∂/∂x_i`, using `∂_i[P r^{-k}] = (∂_i P) r^{-k} − k P x_i r^{-(k+2)}`.
    pub fn diff(&self, i: usize) -> Self {
        let xi = Polynomial::var(self.n, i);
        let mut out = Self::zero(self.n);
        for (&k, p) in &self.summands {
            out.add_summand(p.diff(i), k);
            if k > 0 {
                let t = (&xi * p).scale(&-rat_int(i64::from(k)));
                out.add_summand(t, k + 2);
            }
        }
        out
    }

    pub fn diff_multi(&self, alpha: &[u32]) -> Self {
        assert_eq!(alpha.len(), self.n, "multi-index arity");
        let mut f = self.clone();
        for (i, &m) in alpha.iter().enumerate() {
            for _ in 0..m {
                if f.is_zero() {
                    return f;
                }
                f = f.diff(i);
            }
        }
        f
    }

    /// Value at a point of the sphere, where `x·x = 1`.
    pub fn eval_on_sphere<S: Real>(&self, omega: &[S]) -> S {
        self.compile::<S>().eval_on_sphere(omega)
    }

    /// Value at an arbitrary non-zero point.
    pub fn eval<S: Real>(&self, x: &[S]) -> S {
        self.compile::<S>().eval(x)
    }

    /// Collapses to a single polynomial valid on the sphere (`Σ_k P_k`).
    pub fn restrict_to_sphere(&self) -> Polynomial {
        let mut acc = Polynomial::zero(self.n);
        for p in self.summands.values() {
            acc = &acc + p;
        }
        acc
    }

    pub fn compile<S: Real>(&self) -> CompiledRadial<S> {
        CompiledRadial {
            summands: self.summands.iter().map(|(k, p)| (*k, p.compile())).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .summands
            .iter()
            .map(|(k, p)| serde_json::json!({ "k": k, "p": p.to_json() }))
            .collect();
        serde_json::json!({ "n": self.n, "summands": items })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledRadial<S> {
    summands: Vec<(u32, CompiledPoly<S>)>,
}

impl<S: Real> CompiledRadial<S> {
    pub fn eval_on_sphere(&self, omega: &[S]) -> S {
        self.summands.iter().map(|(_, p)| p.eval(omega)).sum()
    }

    pub fn eval(&self, x: &[S]) -> S {
        let r2: S = x.iter().map(|v| *v * *v).sum();
        let mut acc = S::zero();
        for (k, p) in &self.summands {
            let v = p.eval(x);
            if !v.is_zero() {
                acc += v * r2.powf(-S::lit(f64::from(*k)) / S::lit(2.0));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::poly::rat;

    #[test]
    fn derivative_of_normalized_coordinate() {
        // x_1 |x|^{-1}: ∂_1 gives |x|^{-1} - x_1² |x|^{-3}
        let f = RadialForm::new(3, Polynomial::var(3, 0), 1);
        let d = f.diff_multi(&[1, 0, 0]);
        let mut expect = RadialForm::new(3, Polynomial::one(3), 1);
        let x1 = Polynomial::var(3, 0);
        expect.add_summand((&x1 * &x1).scale(&rat(-1, 1)), 3);
        assert_eq!(d, expect);
        let w = [0.6_f64, 0.0, 0.8];
        assert!((d.eval_on_sphere(&w) - (1.0 - 0.36)).abs() < 1e-15);
    }

    #[test]
    fn constant_derivative_vanishes() {
        let f = RadialForm::new(3, Polynomial::one(3), 0);
        assert!(f.diff_multi(&[0, 2, 1]).is_zero());
    }

    #[test]
    fn off_sphere_evaluation_matches_homogeneity() {
        // x_1 |x|^{-1} is homogeneous of degree 0
        let f = RadialForm::new(2, Polynomial::var(2, 0), 1);
        let a = f.eval(&[3.0_f64, 4.0]);
        assert!((a - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mixed_partials_commute_exactly() {
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let q = &(&x * &y) + &(&x * &x);
        let f = RadialForm::new(3, q, 2);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.diff(i).diff(j), f.diff(j).diff(i));
            }
        }
        assert!(!f.diff(0).is_zero());
    }
}
