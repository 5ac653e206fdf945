use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{rat_int, rat_to_f64, Polynomial};
use crate::scalar::Real;
use crate::{Error, Result};

/// Trigonometric polynomial in the angles `θ_1..θ_m`, written as a
/// polynomial in `s_i = sin θ_i`, `c_i = cos θ_i`, kept reduced modulo
/// `s_i² + c_i² = 1` (every `s_i` exponent is 0 or 1).
///
/// Exponent layout: `[s_1, c_1, s_2, c_2, …]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigForm {
    m: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl TrigForm {
    pub fn zero(m: usize) -> Self {
        Self { m, terms: BTreeMap::new() }
    }

    pub fn one(m: usize) -> Self {
        Self::monomial(vec![0; 2 * m], BigRational::one())
    }

    /// `sin θ_i` (0-based angle index).
    pub fn sin(m: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * m];
        e[2 * i] = 1;
        Self::monomial(e, BigRational::one())
    }

    /// `cos θ_i` (0-based angle index).
    pub fn cos(m: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * m];
        e[2 * i + 1] = 1;
        Self::monomial(e, BigRational::one())
    }

    /// Builds a form from an arbitrary (possibly unreduced) monomial.
    pub fn monomial(exponent: Vec<u32>, c: BigRational) -> Self {
        assert!(exponent.len().is_multiple_of(2), "exponent layout is [s1,c1,...]");
        let mut f = Self::zero(exponent.len() / 2);
        f.add_reduced(exponent, c);
        f
    }

    pub fn angles(&self) -> usize {
        self.m
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    fn add_raw(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Adds `c · monomial(e)` after reducing `s_i² → 1 − c_i²`.
    fn add_reduced(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match (0..self.m).find(|&i| e[2 * i] >= 2) {
            None => self.add_raw(e, c),
            Some(i) => {
                let mut a = e.clone();
                a[2 * i] -= 2;
                let mut b = a.clone();
                b[2 * i + 1] += 2;
                self.add_reduced(a, c.clone());
                self.add_reduced(b, -c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_raw(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.m);
        for (e, v) in &self.terms {
            out.add_raw(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m);
        let mut out = Self::zero(self.m);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_reduced(e, c1 * c2);
            }
        }
        out
    }

    /// Re-reduces an arbitrary form; identity on already canonical input.
    pub fn reduce(&self) -> Self {
        let mut out = Self::zero(self.m);
        for (e, c) in &self.terms {
            out.add_reduced(e.clone(), c.clone());
        }
        out
    }

    /// `∂/∂θ_i` of `s^a c^b` is `a s^{a-1} c^{b+1} − b s^{a+1} c^{b-1}`.
    pub fn diff(&self, i: usize) -> Self {
        let mut out = Self::zero(self.m);
        for (e, c) in &self.terms {
            let (a, b) = (e[2 * i], e[2 * i + 1]);
            if a > 0 {
                let mut e2 = e.clone();
                e2[2 * i] -= 1;
                e2[2 * i + 1] += 1;
                out.add_reduced(e2, c * rat_int(i64::from(a)));
            }
            if b > 0 {
                let mut e2 = e.clone();
                e2[2 * i] += 1;
                e2[2 * i + 1] -= 1;
                out.add_reduced(e2, -(c * rat_int(i64::from(b))));
            }
        }
        out
    }

    /// `∂^α_θ`; fails when `α` does not have one entry per angle.
    pub fn diff_multi(&self, alpha: &[u32]) -> Result<Self> {
        if alpha.len() != self.m {
            return Err(Error::BadMultiIndex(format!(
                "expected {} angle indices, got {}",
                self.m,
                alpha.len()
            )));
        }
        let mut g = self.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                g = g.diff(i);
            }
        }
        Ok(g)
    }

    pub fn eval<S: Real>(&self, theta: &[S]) -> S {
        self.compile::<S>().eval(theta)
    }

    pub fn compile<S: Real>(&self) -> CompiledTrig<S> {
        CompiledTrig {
            m: self.m,
            terms: self.terms.iter().map(|(e, c)| (S::lit(rat_to_f64(c)), e.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| serde_json::json!({ "e": e, "c": c.to_string() }))
            .collect();
        serde_json::json!({ "angles": self.m, "terms": items })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledTrig<S> {
    m: usize,
    terms: Vec<(S, Vec<u32>)>,
}

impl<S: Real> CompiledTrig<S> {
    pub fn eval(&self, theta: &[S]) -> S {
        debug_assert_eq!(theta.len(), self.m);
        let sc: Vec<(S, S)> = theta.iter().map(|t| (t.sin(), t.cos())).collect();
        let mut acc = S::zero();
        for (c, e) in &self.terms {
            let mut t = *c;
            for (i, (s, co)) in sc.iter().enumerate() {
                let (a, b) = (e[2 * i], e[2 * i + 1]);
                if a > 0 {
                    t *= s.powi(a as i32);
                }
                if b > 0 {
                    t *= co.powi(b as i32);
                }
            }
            acc += t;
        }
        acc
    }
}

/// The spherical parametrization `𝔭(θ)` as `n` trigonometric forms:
/// `(c_1, s_1 c_2, …, s_1⋯s_{n-2} c_{n-1}, s_1⋯s_{n-1})`.
pub fn parametrization(n: usize) -> Vec<TrigForm> {
    assert!(n >= 2);
    let m = n - 1;
    let mut out = Vec::with_capacity(n);
    let mut prefix = TrigForm::one(m);
    for i in 0..m {
        out.push(prefix.mul(&TrigForm::cos(m, i)));
        prefix = prefix.mul(&TrigForm::sin(m, i));
    }
    out.push(prefix);
    out
}

/// Point `𝔭(θ)` on the sphere.
pub fn param_point<S: Real>(theta: &[S]) -> Vec<S> {
    let n = theta.len() + 1;
    let mut x = Vec::with_capacity(n);
    let mut prefix = S::one();
    for t in theta {
        x.push(prefix * t.cos());
        prefix *= t.sin();
    }
    x.push(prefix);
    x
}

/// Rational `n×n` frame; column `m` is the image of the `m`-th
/// parametrization coordinate. Must satisfy `FᵀF = I` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    cols: Vec<Vec<BigRational>>,
}

impl Frame {
    pub fn identity(n: usize) -> Self {
        let cols = (0..n)
            .map(|m| (0..n).map(|k| if k == m { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        Self { cols }
    }

    /// Frame whose column `m` is `sign[m] · e_{perm[m]}`.
    pub fn signed_permutation(perm: &[usize], sign: &[i64]) -> Result<Self> {
        let n = perm.len();
        let mut cols = vec![vec![BigRational::zero(); n]; n];
        for m in 0..n {
            if perm[m] >= n {
                return Err(Error::NonOrthogonalFrame);
            }
            cols[m][perm[m]] = rat_int(sign[m]);
        }
        Self::from_columns(cols)
    }

    pub fn from_columns(cols: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = cols.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::NonOrthogonalFrame);
        }
        for a in 0..n {
            for b in 0..n {
                let dot: BigRational = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { BigRational::one() } else { BigRational::zero() };
                if dot != want {
                    return Err(Error::NonOrthogonalFrame);
                }
            }
        }
        Ok(Self { cols })
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// `F·y` in floating point.
    pub fn apply<S: Real>(&self, y: &[S]) -> Vec<S> {
        let n = self.dim();
        (0..n)
            .map(|k| (0..n).map(|m| S::lit(rat_to_f64(&self.cols[m][k])) * y[m]).sum())
            .collect()
    }
}

/// Substitutes `x = F·𝔭(θ)` into `q` and reduces.
pub fn to_spherical(q: &Polynomial, frame: &Frame) -> Result<TrigForm> {
    let n = q.dim();
    if frame.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: frame.dim() });
    }
    let m = n - 1;
    let p = parametrization(n);
    let coords: Vec<TrigForm> = (0..n)
        .map(|k| {
            let mut acc = TrigForm::zero(m);
            for (mi, pm) in p.iter().enumerate() {
                let c = &frame.cols[mi][k];
                if !c.is_zero() {
                    acc = acc.add(&pm.scale(c));
                }
            }
            acc
        })
        .collect();
    let mut powers: Vec<Vec<TrigForm>> = coords.iter().map(|c| vec![TrigForm::one(m), c.clone()]).collect();
    let mut out = TrigForm::zero(m);
    for (e, c) in q.terms() {
        let mut t = TrigForm::one(m).scale(c);
        for (k, &pow) in e.iter().enumerate() {
            while powers[k].len() <= pow as usize {
                let next = powers[k].last().unwrap().mul(&coords[k]);
                powers[k].push(next);
            }
            if pow > 0 {
                t = t.mul(&powers[k][pow as usize]);
            }
        }
        out = out.add(&t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::poly::rat;

    #[test]
    fn first_coordinate_is_cos() {
        let t = to_spherical(&Polynomial::var(3, 0), &Frame::identity(3)).unwrap();
        assert_eq!(t, TrigForm::cos(2, 0));
    }

    #[test]
    fn last_coordinate_is_product_of_sines() {
        let t = to_spherical(&Polynomial::var(3, 2), &Frame::identity(3)).unwrap();
        assert_eq!(t, TrigForm::sin(2, 0).mul(&TrigForm::sin(2, 1)));
    }

    #[test]
    fn sphere_norm_is_one() {
        let t = to_spherical(&Polynomial::norm_squared(3), &Frame::identity(3)).unwrap();
        assert_eq!(t, TrigForm::one(2));
    }

    #[test]
    fn derivative_examples() {
        let c1 = TrigForm::cos(2, 0);
        assert_eq!(c1.diff_multi(&[1, 0]).unwrap(), TrigForm::sin(2, 0).scale(&rat(-1, 1)));
        let s1s2 = TrigForm::sin(2, 0).mul(&TrigForm::sin(2, 1));
        assert_eq!(
            s1s2.diff_multi(&[0, 1]).unwrap(),
            TrigForm::sin(2, 0).mul(&TrigForm::cos(2, 1))
        );
        // (c1²)'' = 2 s1² − 2 c1², canonically 2 − 4 c1²
        let g = c1.mul(&c1).diff_multi(&[2, 0]).unwrap();
        let s1 = TrigForm::sin(2, 0);
        let expect = s1.mul(&s1).scale(&rat(2, 1)).add(&c1.mul(&c1).scale(&rat(-2, 1)));
        assert_eq!(g, expect);
        let th = [std::f64::consts::PI / 6.0, 0.3];
        let direct = 2.0 * th[0].sin().powi(2) - 2.0 * th[0].cos().powi(2);
        assert!((g.eval(&th) - direct).abs() < 1e-14);
    }

    #[test]
    fn arity_is_checked() {
        assert!(TrigForm::cos(2, 0).diff_multi(&[1, 0, 0]).is_err());
    }

    #[test]
    fn rejects_non_orthogonal_frame() {
        let cols = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1)]];
        assert!(matches!(Frame::from_columns(cols), Err(Error::NonOrthogonalFrame)));
        // a rational rotation is fine
        let cols = vec![vec![rat(3, 5), rat(4, 5)], vec![rat(-4, 5), rat(3, 5)]];
        assert!(Frame::from_columns(cols).is_ok());
    }
}
