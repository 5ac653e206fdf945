//! Objects on `S^{n-1}` given by their spherical-harmonic projections `f_j`.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::harmonics::{basis, dim_h, surface_area, zonal_value, HarmonicBasis, BASIS_SIZE_GUARD};
use crate::scalar::{symmetric_dot, symmetric_norm};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "function")]
    Function,
    #[serde(rename = "dual", alias = "ultradistribution")]
    Ultradistribution,
}

/// Weighted pole: contributes `w · Z_j(ω · p)` to every degree it is attached to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub w: f64,
    pub p: Vec<f64>,
}

impl Pole {
    pub fn new(w: f64, p: &[f64]) -> Result<Self> {
        let norm = symmetric_norm(p);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Invalid("pole direction must be a non-zero finite vector".into()));
        }
        Ok(Self { w, p: p.iter().map(|v| v / norm).collect() })
    }
}

/// One degree `f_j`.
#[derive(Clone, Debug, PartialEq)]
pub enum Degree {
    /// Coefficients over the orthonormal basis `Y_{k,j}`.
    Coeffs(Vec<f64>),
    /// `Σ_i w_i Z_j(·, p_i)`.
    Zonal(Vec<Pole>),
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub n: usize,
    pub kind: Kind,
    entries: Vec<Degree>,
    bases: Vec<OnceLock<Arc<HarmonicBasis>>>,
    /// Poles applied to every degree beyond the stored ones.
    tail: Option<Vec<Pole>>,
}

impl PartialEq for Expansion {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.kind == other.kind && self.entries == other.entries && self.tail == other.tail
    }
}

impl Expansion {
    pub fn zero(n: usize, kind: Kind) -> Self {
        Self { n, kind, entries: Vec::new(), bases: Vec::new(), tail: None }
    }

    /// Builds an expansion from per-degree entries `0..=J`.
    pub fn from_degrees(n: usize, kind: Kind, entries: Vec<Degree>) -> Result<Self> {
        let mut e = Self::zero(n, kind);
        for (j, d) in entries.into_iter().enumerate() {
            e.set_degree(j, d)?;
        }
        Ok(e)
    }

    pub fn from_coeffs(n: usize, kind: Kind, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_degrees(n, kind, coeffs.into_iter().map(Degree::Coeffs).collect())
    }

    /// The delta-like distribution at `pole`, `f_j = Z_j(·, pole)/|S^{n-1}|`,
    /// stored explicitly up to `jmax` and continued by the tail.
    pub fn delta(n: usize, pole: &[f64], jmax: usize) -> Result<Self> {
        Self::point_masses(n, &[(1.0, pole.to_vec())], jmax)
    }

    /// `Σ_i a_i δ_{p_i}` with explicit degrees up to `jmax` and the tail attached.
    pub fn point_masses(n: usize, masses: &[(f64, Vec<f64>)], jmax: usize) -> Result<Self> {
        let area = surface_area::<f64>(n);
        let poles = masses
            .iter()
            .map(|(a, p)| {
                if p.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: p.len() });
                }
                Pole::new(a / area, p)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut e = Self::from_degrees(n, Kind::Ultradistribution, vec![Degree::Zonal(poles.clone()); jmax + 1])?;
        e.tail = Some(poles);
        Ok(e)
    }

    /// A single orthonormal harmonic `Y_{k,j}`.
    pub fn single(n: usize, j: usize, k: usize) -> Result<Self> {
        let d = dim_h(n, j) as usize;
        if k >= d {
            return Err(Error::Invalid(format!("basis index {k} out of range for d_j = {d}")));
        }
        let mut e = Self::zero(n, Kind::Function);
        let mut c = vec![0.0; d];
        c[k] = 1.0;
        e.set_degree(j, Degree::Coeffs(c))?;
        Ok(e)
    }

    /// Seeded random coefficient expansion, entries uniform in `[−1, 1]`.
    pub fn random<R: Rng>(n: usize, jmax: usize, rng: &mut R) -> Result<Self> {
        let coeffs = (0..=jmax)
            .map(|j| (0..dim_h(n, j)).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        Self::from_coeffs(n, Kind::Function, coeffs)
    }

    pub fn with_tail(mut self, tail: Option<Vec<Pole>>) -> Self {
        self.tail = tail;
        self
    }

    pub fn tail(&self) -> Option<&[Pole]> {
        self.tail.as_deref()
    }

    /// Number of stored degrees (`J + 1`).
    pub fn num_degrees(&self) -> usize {
        self.entries.len()
    }

    /// `J`; zero for an empty expansion.
    pub fn max_degree(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn degree(&self, j: usize) -> Option<&Degree> {
        self.entries.get(j)
    }

    /// Orthonormal basis behind a coefficient entry, built on first use.
    pub fn basis(&self, j: usize) -> Option<Arc<HarmonicBasis>> {
        match self.entries.get(j)? {
            Degree::Coeffs(_) => Some(self.bases[j].get_or_init(|| basis(self.n, j).expect("size checked on insert")).clone()),
            Degree::Zonal(_) => None,
        }
    }

    /// Sets `f_j`, filling any gap below with zeros.
    pub fn set_degree(&mut self, j: usize, d: Degree) -> Result<()> {
        while self.entries.len() <= j {
            self.entries.push(Degree::Zonal(Vec::new()));
            self.bases.push(OnceLock::new());
        }
        match &d {
            Degree::Coeffs(c) => {
                let dj = dim_h(self.n, j) as usize;
                if c.len() != dj {
                    return Err(Error::DimensionMismatch { expected: dj, got: c.len() });
                }
                let monomials = monomial_count(self.n, j);
                if monomials > BASIS_SIZE_GUARD {
                    return Err(Error::SizeGuardExceeded { monomials, limit: BASIS_SIZE_GUARD });
                }
            }
            Degree::Zonal(poles) => {
                if let Some(p) = poles.iter().find(|p| p.p.len() != self.n) {
                    return Err(Error::DimensionMismatch { expected: self.n, got: p.p.len() });
                }
            }
        }
        self.entries[j] = d;
        self.bases[j] = OnceLock::new();
        Ok(())
    }

    /// `f_j(x)`; for coefficient entries `x` may be any point and the
    /// homogeneous extension is evaluated.
    pub fn eval_degree(&self, j: usize, x: &[f64]) -> f64 {
        match &self.entries[j] {
            Degree::Coeffs(c) => self.basis(j).expect("coefficient entry").eval_combination(c, x),
            Degree::Zonal(poles) => {
                if poles.is_empty() {
                    return 0.0;
                }
                let r = symmetric_norm(x);
                if r == 0.0 {
                    return if j == 0 { poles.iter().map(|p| p.w).sum() } else { 0.0 };
                }
                let rj = if (r - 1.0).abs() < 1e-15 { 1.0 } else { r.powi(j as i32) };
                rj * poles.iter().map(|p| p.w * zonal_value(self.n, j, (symmetric_dot(x, &p.p) / r).clamp(-1.0, 1.0))).sum::<f64>()
            }
        }
    }

    /// `Σ_{j ≤ J} f_j(ω)`.
    pub fn eval(&self, omega: &[f64]) -> f64 {
        (0..self.entries.len()).map(|j| self.eval_degree(j, omega)).sum()
    }

    /// `‖f_j‖_{L²(S^{n-1})}`, exact from coefficients or from the
    /// reproducing identity `∫ Z_j(ξ·a) Z_j(ξ·b) dξ = |S| Z_j(a·b)`.
    pub fn l2_norm_degree(&self, j: usize) -> f64 {
        match &self.entries[j] {
            Degree::Coeffs(c) => symmetric_norm(c),
            Degree::Zonal(poles) => {
                let area = surface_area::<f64>(self.n);
                let mut s = 0.0;
                for a in poles {
                    for b in poles {
                        s += a.w * b.w * zonal_value(self.n, j, symmetric_dot(&a.p, &b.p).clamp(-1.0, 1.0));
                    }
                }
                (area * s).max(0.0).sqrt()
            }
        }
    }

    /// Coefficients of `f_j` in the orthonormal basis (`w Z_j(·,p)` has
    /// coefficients `w |S| Y_k(p)`).
    pub fn coeffs_of(&self, j: usize) -> Result<Vec<f64>> {
        match &self.entries[j] {
            Degree::Coeffs(c) => Ok(c.clone()),
            Degree::Zonal(poles) => {
                let b = basis(self.n, j)?;
                let area = surface_area::<f64>(self.n);
                let mut c = vec![0.0; b.len()];
                for p in poles {
                    for (k, ck) in c.iter_mut().enumerate() {
                        *ck += p.w * area * b.eval(k, &p.p);
                    }
                }
                Ok(c)
            }
        }
    }

    /// Multiplies `f_j` by `factor(j)`. A tail cannot carry a degree-dependent
    /// factor and is dropped.
    pub fn map_degrees<F: Fn(usize) -> f64>(&self, factor: F) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(j, d)| scale_degree(d, factor(j)))
            .collect();
        Self { n: self.n, kind: self.kind, entries, bases: self.bases.clone(), tail: None }
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let mut out = self.map_degrees(|_| lambda);
        out.tail = self
            .tail
            .as_ref()
            .map(|t| t.iter().map(|p| Pole { w: p.w * lambda, p: p.p.clone() }).collect());
        out
    }

    /// Keeps degrees `0..=jmax` and drops the tail.
    pub fn truncate(&self, jmax: usize) -> Self {
        let k = (jmax + 1).min(self.entries.len());
        Self {
            n: self.n,
            kind: self.kind,
            entries: self.entries[..k].to_vec(),
            bases: self.bases[..k].to_vec(),
            tail: None,
        }
    }

    /// `self + other`, degree by degree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let kind = if self.kind == Kind::Function && other.kind == Kind::Function {
            Kind::Function
        } else {
            Kind::Ultradistribution
        };
        let len = self.entries.len().max(other.entries.len());
        let mut out = Self::zero(self.n, kind);
        let empty = Degree::Zonal(Vec::new());
        for j in 0..len {
            let a = self.entries.get(j).unwrap_or(&empty);
            let b = other.entries.get(j).unwrap_or(&empty);
            let d = match (a, b) {
                (Degree::Zonal(x), Degree::Zonal(y)) => Degree::Zonal(x.iter().chain(y).cloned().collect()),
                _ => {
                    let ca = if j < self.entries.len() { self.coeffs_of(j)? } else { vec![0.0; dim_h(self.n, j) as usize] };
                    let cb = if j < other.entries.len() { other.coeffs_of(j)? } else { vec![0.0; dim_h(self.n, j) as usize] };
                    Degree::Coeffs(ca.iter().zip(&cb).map(|(u, v)| u + v).collect())
                }
            };
            out.set_degree(j, d)?;
        }
        out.tail = match (&self.tail, &other.tail) {
            (None, None) => None,
            (a, b) => Some(a.iter().chain(b).flatten().cloned().collect()),
        };
        if out.tail.is_some() && (self.entries.len() != other.entries.len()) {
            return Err(Error::Invalid("adding expansions with tails requires equal stored degrees".into()));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let all_coeffs = self.entries.iter().all(|d| matches!(d, Degree::Coeffs(_)));
        let all_zonal = self.entries.iter().all(|d| matches!(d, Degree::Zonal(_)));
        let format = match (all_coeffs, all_zonal) {
            (true, false) => "coeffs",
            (false, true) => "zonal",
            (true, true) => "coeffs",
            _ => "mixed",
        };
        let entries: Vec<EntryFile> = self
            .entries
            .iter()
            .enumerate()
            .map(|(j, d)| match d {
                Degree::Coeffs(c) => EntryFile { j, c: Some(c.clone()), poles: None },
                Degree::Zonal(p) => EntryFile { j, c: None, poles: Some(p.clone()) },
            })
            .collect();
        serde_json::to_value(ExpansionFile {
            n: self.n,
            kind: self.kind,
            format: Some(format.to_string()),
            entries,
            tail: self.tail.clone().map(|poles| TailFile { poles }),
        })
        .expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let f: ExpansionFile = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(format!("expansion: {e}")))?;
        f.into_expansion()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: ExpansionFile = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("expansion: {e}")))?;
        f.into_expansion()
    }
}

/// Number of monomials of degree `j` in `n` variables, saturating.
fn monomial_count(n: usize, j: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..n {
        c = c * (j + i) as u128 / i as u128;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

fn scale_degree(d: &Degree, f: f64) -> Degree {
    match d {
        Degree::Coeffs(c) => Degree::Coeffs(c.iter().map(|v| v * f).collect()),
        Degree::Zonal(p) => Degree::Zonal(p.iter().map(|q| Pole { w: q.w * f, p: q.p.clone() }).collect()),
    }
}

#[derive(Serialize, Deserialize)]
struct TailFile {
    poles: Vec<Pole>,
}

#[derive(Serialize, Deserialize)]
struct EntryFile {
    j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poles: Option<Vec<Pole>>,
}

#[derive(Serialize, Deserialize)]
struct ExpansionFile {
    n: usize,
    kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    entries: Vec<EntryFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailFile>,
}

impl ExpansionFile {
    fn into_expansion(self) -> Result<Expansion> {
        if self.n < 2 {
            return Err(Error::Invalid(format!("dimension n = {} < 2", self.n)));
        }
        let mut e = Expansion::zero(self.n, self.kind);
        let mut entries = self.entries;
        entries.sort_by_key(|x| x.j);
        for w in entries.windows(2) {
            if w[0].j == w[1].j {
                return Err(Error::Invalid(format!("degree {} listed twice", w[0].j)));
            }
        }
        for ent in entries {
            let d = match (ent.c, ent.poles) {
                (Some(c), None) => Degree::Coeffs(c),
                (None, Some(p)) => Degree::Zonal(p.iter().map(|q| Pole::new(q.w, &q.p)).collect::<Result<_>>()?),
                _ => return Err(Error::Invalid(format!("entry j = {} needs exactly one of \"c\" or \"poles\"", ent.j))),
            };
            e.set_degree(ent.j, d)?;
        }
        if let Some(t) = self.tail {
            let poles = t.poles.iter().map(|q| Pole::new(q.w, &q.p)).collect::<Result<Vec<_>>>()?;
            if let Some(p) = poles.iter().find(|p| p.p.len() != self.n) {
                return Err(Error::DimensionMismatch { expected: self.n, got: p.p.len() });
            }
            e.tail = Some(poles);
        }
        Ok(e)
    }
}
