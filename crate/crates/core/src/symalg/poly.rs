use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Exponent multi-index.
pub type Exponent = Vec<u32>;

/// Multivariate polynomial in `n` variables with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Exponent, BigRational>,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n - d - 60).max(0) as usize;
        let scaled = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN);
        scaled * 2f64.powi(shift as i32)
    })
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, BigRational::one())
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exponent: Exponent, c: BigRational) -> Self {
        let mut p = Self::zero(exponent.len());
        p.add_term(exponent, c);
        p
    }

    /// `x·x = x_1² + … + x_n²`.
    pub fn norm_squared(n: usize) -> Self {
        let mut p = Self::zero(n);
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            p.add_term(e, BigRational::one());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, BigRational)>>(n: usize, terms: I) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent arity");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exponent: Exponent, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exponent) {
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

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exponent: &[u32]) -> BigRational {
        self.terms.get(exponent).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree if every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative with respect to `x_i`.
    pub fn diff(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * rat_int(i64::from(e[i])));
        }
        out
    }

    /// `∂^α`.
    pub fn diff_multi(&self, alpha: &[u32]) -> Self {
        assert_eq!(alpha.len(), self.n, "multi-index arity");
        let mut p = self.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                if p.is_zero() {
                    return p;
                }
                p = p.diff(i);
            }
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            for i in 0..self.n {
                if e[i] >= 2 {
                    let mut e2 = e.clone();
                    e2[i] -= 2;
                    out.add_term(e2, c * rat_int(i64::from(e[i]) * i64::from(e[i] - 1)));
                }
            }
        }
        out
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating-point evaluation (coefficients rounded once).
    pub fn eval<S: Real>(&self, x: &[S]) -> S {
        self.compile::<S>().eval(x)
    }

    /// Rounds the coefficients into a form that is cheap to evaluate repeatedly.
    pub fn compile<S: Real>(&self) -> CompiledPoly<S> {
        CompiledPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (S::lit(rat_to_f64(c)), e.clone()))
                .collect(),
        }
    }

    /// Canonical JSON term list: `[{"e":[..],"c":"p/q"}, ...]` in exponent order.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(e, c)| TermJson { e: e.clone(), c: c.to_string() })
            .collect();
        serde_json::json!({ "n": self.n, "terms": terms })
    }

    pub fn from_json(v: &serde_json::Value) -> crate::Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            terms: Vec<TermJson>,
        }
        let raw: Raw = serde_json::from_value(v.clone())
            .map_err(|e| crate::Error::Invalid(format!("polynomial json: {e}")))?;
        let mut p = Self::zero(raw.n);
        for t in raw.terms {
            if t.e.len() != raw.n {
                return Err(crate::Error::DimensionMismatch { expected: raw.n, got: t.e.len() });
            }
            let c: BigRational = t
                .c
                .parse()
                .map_err(|_| crate::Error::Invalid(format!("bad rational {}", t.c)))?;
            p.add_term(t.e, c);
        }
        Ok(p)
    }

    /// Largest absolute coefficient, as a float.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| rat_to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: Exponent,
    c: String,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "x{}", i + 1)?,
                    _ => write!(f, "x{}^{k}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = Polynomial::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-BigRational::one())
    }
}

/// Polynomial with floating coefficients, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly<S> {
    n: usize,
    terms: Vec<(S, Exponent)>,
}

impl<S: Real> CompiledPoly<S> {
    pub fn eval(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.n);
        let mut acc = S::zero();
        for (c, e) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// All exponents of total degree `d` in `n` variables, in lexicographically
/// decreasing order of the leading entries.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Exponent> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if prefix.len() == n - 1 {
            let mut e = prefix.clone();
            e.push(d);
            out.push(e);
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k);
            rec(n, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}
