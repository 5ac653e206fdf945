use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use super::dims::{dim_h, surface_area};
use crate::symalg::{monomials_of_degree, rat_int, rat_to_f64, CompiledPoly, Exponent, Polynomial};
use crate::{Error, Result};

/// Monomial-space size above which exact construction is refused.
pub const BASIS_SIZE_GUARD: usize = 5000;

/// Average of `x^α` over `S^{n-1}`, exactly:
/// `Π(α_i − 1)!! / Π_{k<|α|/2} (n + 2k)` when every `α_i` is even, else 0.
pub fn sphere_moment_avg(alpha: &[u32]) -> BigRational {
    if alpha.iter().any(|a| a % 2 == 1) {
        return BigRational::zero();
    }
    let n = alpha.len() as i64;
    let mut num = BigInt::one();
    for &a in alpha {
        let mut k = i64::from(a) - 1;
        while k > 1 {
            num *= k;
            k -= 2;
        }
    }
    let half: i64 = alpha.iter().map(|&a| i64::from(a)).sum::<i64>() / 2;
    let mut den = BigInt::one();
    for k in 0..half {
        den *= n + 2 * k;
    }
    BigRational::new(num, den)
}

/// `∫_{S^{n-1}} x^α dσ` in floating point.
pub fn sphere_moment(alpha: &[u32]) -> f64 {
    rat_to_f64(&sphere_moment_avg(alpha)) * surface_area::<f64>(alpha.len())
}

/// Memoised averaged inner product `⟨p, q⟩ = |S|^{-1} ∫ p q dσ`.
#[derive(Default)]
pub struct MomentTable {
    cache: HashMap<Exponent, BigRational>,
}

impl MomentTable {
    pub fn avg(&mut self, alpha: &[u32]) -> BigRational {
        if alpha.iter().any(|a| a % 2 == 1) {
            return BigRational::zero();
        }
        if let Some(v) = self.cache.get(alpha) {
            return v.clone();
        }
        let v = sphere_moment_avg(alpha);
        self.cache.insert(alpha.to_vec(), v.clone());
        v
    }

    pub fn inner(&mut self, p: &Polynomial, q: &Polynomial) -> BigRational {
        let mut acc = BigRational::zero();
        for (a, ca) in p.terms() {
            for (b, cb) in q.terms() {
                let s: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if s.iter().any(|v| v % 2 == 1) {
                    continue;
                }
                acc += ca * cb * self.avg(&s);
            }
        }
        acc
    }
}

/// Orthogonal basis of `H_j(R^n)` with exact rational coefficients.
///
/// `elements[k]` is a solid harmonic `Q_k`; the averaged Gram matrix of the
/// elements is exactly `diag(gram_diag)`. The orthonormal spherical harmonic
/// is `Y_k = Q_k / sqrt(gram_diag[k] · |S^{n-1}|)`.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub n: usize,
    pub j: usize,
    pub elements: Vec<Polynomial>,
    pub gram_diag: Vec<BigRational>,
    normalizers: Vec<f64>,
    compiled: Vec<CompiledPoly<f64>>,
}

impl HarmonicBasis {
    fn from_parts(n: usize, j: usize, elements: Vec<Polynomial>, gram_diag: Vec<BigRational>) -> Self {
        let area = surface_area::<f64>(n);
        let normalizers = gram_diag.iter().map(|g| 1.0 / (rat_to_f64(g) * area).sqrt()).collect();
        let compiled = elements.iter().map(|p| p.compile()).collect();
        Self { n, j, elements, gram_diag, normalizers, compiled }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `1 / sqrt(g_k |S|)`, the factor turning `Q_k` into `Y_k`.
    pub fn normalizer(&self, k: usize) -> f64 {
        self.normalizers[k]
    }

    /// Orthonormal `Y_k(ω)`.
    pub fn eval(&self, k: usize, omega: &[f64]) -> f64 {
        self.compiled[k].eval(omega) * self.normalizers[k]
    }

    /// All `Y_k(ω)` at once.
    pub fn eval_all(&self, omega: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|k| self.eval(k, omega)).collect()
    }

    /// `Σ_k c_k Y_k(x)` for an arbitrary point (homogeneous of degree `j`).
    pub fn eval_combination(&self, coeffs: &[f64], x: &[f64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| c * self.eval(k, x))
            .sum()
    }

    /// Exact rational combination `Σ c_k Q_k`.
    pub fn combine(&self, coeffs: &[BigRational]) -> Polynomial {
        let mut acc = Polynomial::zero(self.n);
        for (c, q) in coeffs.iter().zip(&self.elements) {
            if !c.is_zero() {
                acc = &acc + &q.scale(c);
            }
        }
        acc
    }

    /// Seeded random non-zero combination with coefficients in
    /// `{−16, …, 16} / denominator`.
    pub fn random_combination<R: Rng>(&self, rng: &mut R, denominator: i64) -> Polynomial {
        loop {
            let coeffs: Vec<BigRational> = (0..self.len())
                .map(|_| BigRational::new(BigInt::from(rng.gen_range(-16i64..=16)), BigInt::from(denominator)))
                .collect();
            if coeffs.iter().any(|c| !c.is_zero()) {
                return self.combine(&coeffs);
            }
        }
    }

    /// Coefficients of the orthonormal expansion of a polynomial lying in
    /// `H_j`, computed exactly from the averaged Gram structure.
    pub fn coordinates(&self, q: &Polynomial) -> Vec<f64> {
        let mut table = MomentTable::default();
        let area = surface_area::<f64>(self.n);
        (0..self.len())
            .map(|k| {
                // ∫ q Y_k dσ = |S| ⟨q, Q_k⟩_avg / sqrt(g_k |S|)
                let ip = rat_to_f64(&table.inner(q, &self.elements[k]));
                ip * area * self.normalizers[k]
            })
            .collect()
    }

    /// Canonical JSON (rational coefficients as strings).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "j": self.j,
            "elements": self.elements.iter().map(Polynomial::to_json).collect::<Vec<_>>(),
            "gram_diag": self.gram_diag.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("basis json: {m}"));
        let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
        let j = v["j"].as_u64().ok_or_else(|| bad("j"))? as usize;
        let elements = v["elements"]
            .as_array()
            .ok_or_else(|| bad("elements"))?
            .iter()
            .map(Polynomial::from_json)
            .collect::<Result<Vec<_>>>()?;
        let gram_diag = v["gram_diag"]
            .as_array()
            .ok_or_else(|| bad("gram_diag"))?
            .iter()
            .map(|g| g.as_str().and_then(|s| s.parse::<BigRational>().ok()).ok_or_else(|| bad("gram entry")))
            .collect::<Result<Vec<_>>>()?;
        if elements.len() != gram_diag.len() {
            return Err(bad("length mismatch"));
        }
        Ok(Self::from_parts(n, j, elements, gram_diag))
    }
}

/// Exact nullspace of a rational matrix (rows × cols) via reduced row echelon form.
fn nullspace(mut a: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = BigRational::one() / a[r][c].clone();
        for v in a[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[ri][f].clone();
            }
            v
        })
        .collect()
}

/// Builds an orthogonal basis of the degree-`j` solid harmonics in `n`
/// variables: exact nullspace of the Laplacian followed by exact
/// Gram–Schmidt in the averaged `L²(S^{n-1})` inner product.
pub fn build_basis(n: usize, j: usize) -> Result<HarmonicBasis> {
    assert!(n >= 2);
    let monos = monomials_of_degree(n, j as u32);
    if monos.len() > BASIS_SIZE_GUARD {
        return Err(Error::SizeGuardExceeded { monomials: monos.len(), limit: BASIS_SIZE_GUARD });
    }
    let cols = monos.len();
    let vectors = if j < 2 {
        (0..cols)
            .map(|c| {
                let mut v = vec![BigRational::zero(); cols];
                v[c] = BigRational::one();
                v
            })
            .collect()
    } else {
        let targets = monomials_of_degree(n, j as u32 - 2);
        let index: HashMap<&Exponent, usize> = targets.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut mat = vec![vec![BigRational::zero(); cols]; targets.len()];
        for (c, e) in monos.iter().enumerate() {
            for i in 0..n {
                if e[i] >= 2 {
                    let mut t = e.clone();
                    t[i] -= 2;
                    let row = index[&t];
                    mat[row][c] += rat_int(i64::from(e[i]) * i64::from(e[i] - 1));
                }
            }
        }
        nullspace(mat, cols)
    };
    let raw: Vec<Polynomial> = vectors
        .iter()
        .map(|v| Polynomial::from_terms(n, monos.iter().cloned().zip(v.iter().cloned())))
        .collect();
    debug_assert_eq!(raw.len() as u64, dim_h(n, j));

    let k = raw.len();
    let mut table = MomentTable::default();
    let mut gram = vec![vec![BigRational::zero(); k]; k];
    for a in 0..k {
        for b in 0..=a {
            let g = table.inner(&raw[a], &raw[b]);
            gram[a][b] = g.clone();
            gram[b][a] = g;
        }
    }
    // q_a = Σ_c t[a][c] v_c, orthogonalised against earlier q's through the Gram matrix.
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(k);
    let mut diag: Vec<BigRational> = Vec::with_capacity(k);
    for a in 0..k {
        let mut row = vec![BigRational::zero(); k];
        row[a] = BigRational::one();
        for b in 0..a {
            // ⟨v_a, q_b⟩ / ⟨q_b, q_b⟩
            let mut ip = BigRational::zero();
            for c in 0..=b {
                if !t[b][c].is_zero() && !gram[a][c].is_zero() {
                    ip += &t[b][c] * &gram[a][c];
                }
            }
            if ip.is_zero() {
                continue;
            }
            let f = ip / &diag[b];
            for c in 0..=b {
                if !t[b][c].is_zero() {
                    row[c] -= &f * &t[b][c];
                }
            }
        }
        let mut d = BigRational::zero();
        for c in 0..=a {
            if !row[c].is_zero() && !gram[a][c].is_zero() {
                d += &row[c] * &gram[a][c];
            }
        }
        t.push(row);
        diag.push(d);
    }
    let elements: Vec<Polynomial> = t
        .iter()
        .map(|row| {
            let mut acc = Polynomial::zero(n);
            for (c, coef) in row.iter().enumerate() {
                if !coef.is_zero() {
                    acc = &acc + &raw[c].scale(coef);
                }
            }
            acc
        })
        .collect();
    Ok(HarmonicBasis::from_parts(n, j, elements, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symalg::rat;

    #[test]
    fn moments_match_known_values() {
        // ∫_{S²} x1² x2² = 4π/15
        let v = sphere_moment(&[2, 2, 0]);
        assert!((v - 4.0 * std::f64::consts::PI / 15.0).abs() < 1e-14);
        assert_eq!(sphere_moment_avg(&[2, 0, 0]), rat(1, 3));
        assert_eq!(sphere_moment_avg(&[1, 1, 0]), rat(0, 1));
    }

    #[test]
    fn degree_one_is_coordinates() {
        let b = build_basis(3, 1).unwrap();
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            assert_eq!(b.elements[i], Polynomial::var(3, i));
            assert_eq!(b.gram_diag[i], rat(1, 3));
        }
    }

    #[test]
    fn degree_two_in_three_dims() {
        let b = build_basis(3, 2).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.elements.iter().all(Polynomial::is_harmonic));
        let mut t = MomentTable::default();
        for a in 0..5 {
            for c in 0..5 {
                let g = t.inner(&b.elements[a], &b.elements[c]);
                if a == c {
                    assert_eq!(g, b.gram_diag[a]);
                } else {
                    assert!(g.is_zero());
                }
            }
        }
    }

    #[test]
    fn circle_degree_three_spans_real_and_imaginary_parts() {
        let b = build_basis(2, 3).unwrap();
        assert_eq!(b.len(), 2);
        // Re (x+iy)^3 = x^3 − 3xy², Im = 3x²y − y^3
        let re = Polynomial::from_terms(2, [(vec![3, 0], rat(1, 1)), (vec![1, 2], rat(-3, 1))]);
        let im = Polynomial::from_terms(2, [(vec![2, 1], rat(3, 1)), (vec![0, 3], rat(-1, 1))]);
        // exact projection onto span(b) reproduces each
        let mut t = MomentTable::default();
        for target in [&re, &im] {
            let mut proj = Polynomial::zero(2);
            for (q, g) in b.elements.iter().zip(&b.gram_diag) {
                proj = &proj + &q.scale(&(t.inner(target, q) / g));
            }
            assert_eq!(&proj, target);
        }
    }

    #[test]
    fn json_roundtrip_preserves_basis() {
        let b = build_basis(3, 3).unwrap();
        let back = HarmonicBasis::from_json(&b.to_json()).unwrap();
        assert_eq!(back.elements, b.elements);
        assert_eq!(back.gram_diag, b.gram_diag);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(build_basis(8, 20), Err(Error::SizeGuardExceeded { .. })));
    }
}
