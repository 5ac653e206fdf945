//! Poisson kernel and transform on the unit ball, boundary values, and the
//! growth characterization through `M*`.

use rayon::prelude::*;
use serde::Serialize;

use crate::expansion::{Degree, Expansion};
use crate::harmonics::{dim_h, surface_area, zonal_values_upto};
use crate::quadrature::{make_rule, project};
use crate::scalar::{compensated_sum, symmetric_dot, symmetric_norm};
use crate::symalg::{f64_to_rat, sphere_samples, Polynomial};
use crate::weights::{check_conditions, WeightSequence};
use crate::{Error, Result};

/// `P(x, ξ) = (1 − |x|²) / (|S^{n-1}| |x − ξ|^n)`.
pub fn poisson_kernel(x: &[f64], xi: &[f64]) -> Result<f64> {
    let n = x.len();
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    let r2 = symmetric_dot(x, x);
    if r2 >= 1.0 || (symmetric_norm(xi) - 1.0).abs() > 1e-12 {
        return Err(Error::DomainViolation);
    }
    let d2: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((1.0 - r2) / (surface_area::<f64>(n) * d2.powf(n as f64 / 2.0)))
}

/// `P` from `r` and `u = ω·ξ` (|ω| = |ξ| = 1): `(1 − r²) / (|S| (1 − 2ru + r²)^{n/2})`.
pub fn poisson_kernel_ru(n: usize, r: f64, u: f64) -> f64 {
    let d2 = ((1.0 - r) * (1.0 - r) + 2.0 * r * (1.0 - u)).max(0.0);
    (1.0 - r) * (1.0 + r) / (surface_area::<f64>(n) * d2.powf(n as f64 / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
}

/// `(1/|S|) Σ_j r^j Z_j(u)`, summed until the geometric majorant
/// `Σ_{j>J} r^j d_j` drops below `tol`.
pub fn poisson_kernel_series(n: usize, r: f64, u: f64, tol: f64) -> Result<SeriesValue> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::DomainViolation);
    }
    let area = surface_area::<f64>(n);
    let mut jmax = 64;
    loop {
        let z = zonal_values_upto::<f64>(n, jmax, u.clamp(-1.0, 1.0));
        let mut rj = 1.0;
        let mut terms = Vec::with_capacity(jmax + 1);
        for (j, zj) in z.iter().enumerate() {
            terms.push(rj * zj);
            let next = rj * r;
            // ratio of consecutive majorant terms r d_{j+1}/d_j, eventually decreasing to r
            let q = r * dim_h(n, j + 2) as f64 / dim_h(n, j + 1) as f64;
            let tail = if q < 1.0 { next * dim_h(n, j + 1) as f64 / (1.0 - q) } else { f64::INFINITY };
            if tail / area < tol {
                return Ok(SeriesValue { value: compensated_sum(terms.iter().copied()) / area, terms: j + 1, tail_bound: tail / area });
            }
            rj = next;
        }
        if jmax > 1 << 16 {
            return Err(Error::SearchFailed);
        }
        jmax *= 4;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailStatus {
    /// Finite expansion, the sum is exact.
    Exact,
    /// The infinite point-mass continuation was summed in closed form.
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoissonValue {
    pub value: f64,
    /// `Σ_{j ≤ J} r^j f_j(ω)` over the stored degrees.
    pub partial: f64,
    pub tail: TailStatus,
}

/// Evaluates `P[f](rω) = Σ_j r^j f_j(ω)`.
#[derive(Clone, Debug)]
pub struct PoissonEvaluator {
    pub source: Expansion,
}

impl PoissonEvaluator {
    pub fn new(source: Expansion) -> Self {
        Self { source }
    }

    pub fn n(&self) -> usize {
        self.source.n
    }

    /// `P[f](x)` for `|x| < 1`.
    pub fn eval_at(&self, x: &[f64]) -> Result<PoissonValue> {
        let r = symmetric_norm(x);
        if r == 0.0 {
            let mut omega = vec![0.0; x.len()];
            omega[0] = 1.0;
            return self.eval(0.0, &omega);
        }
        let omega: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.eval(r, &omega)
    }

    pub fn eval(&self, r: f64, omega: &[f64]) -> Result<PoissonValue> {
        poisson_transform(&self.source, r, omega)
    }
}

/// `P[f](rω)` for `0 ≤ r < 1`; the stored degrees are summed directly and a
/// point-mass continuation as `w (|S| P(rω, p) − Σ_{j≤J} r^j Z_j(ω·p))`.
pub fn poisson_transform(e: &Expansion, r: f64, omega: &[f64]) -> Result<PoissonValue> {
    let n = e.n;
    if omega.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: omega.len() });
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::DomainViolation);
    }
    let jn = e.num_degrees();
    let mut parts = Vec::with_capacity(jn);
    let mut rj = 1.0;
    for j in 0..jn {
        if rj == 0.0 {
            break;
        }
        let fj = match e.degree(j).expect("in range") {
            Degree::Zonal(p) if p.is_empty() => 0.0,
            _ => e.eval_degree(j, omega),
        };
        parts.push(rj * fj);
        rj *= r;
    }
    let partial = compensated_sum(parts.iter().copied());
    let Some(tail) = e.tail() else {
        return Ok(PoissonValue { value: partial, partial, tail: TailStatus::Exact });
    };
    let area = surface_area::<f64>(n);
    let mut extra = Vec::new();
    for p in tail {
        let u = symmetric_dot(omega, &p.p).clamp(-1.0, 1.0);
        let z = zonal_values_upto::<f64>(n, jn.saturating_sub(1), u);
        let mut rj = 1.0;
        let mut head = Vec::with_capacity(z.len());
        for zj in &z {
            head.push(rj * zj);
            rj *= r;
        }
        let s = if jn == 0 { 0.0 } else { compensated_sum(head.iter().copied()) };
        extra.push(p.w * area * poisson_kernel_ru(n, r, u));
        extra.push(-p.w * s);
    }
    extra.push(partial);
    Ok(PoissonValue { value: compensated_sum(extra.iter().copied()), partial, tail: TailStatus::ClosedForm })
}

/// `P[e]` for a finite expansion as an exact polynomial in `x`
/// (real coefficients and poles are converted to nearby rationals).
pub fn poisson_polynomial(e: &Expansion) -> Result<Polynomial> {
    let n = e.n;
    let mut total = Polynomial::zero(n);
    for j in 0..e.num_degrees() {
        let part = match e.degree(j).expect("in range") {
            Degree::Coeffs(c) => {
                let b = e.basis(j).expect("coefficient entry");
                let scaled: Vec<_> = c.iter().enumerate().map(|(k, ck)| f64_to_rat(ck * b.normalizer(k))).collect();
                b.combine(&scaled)
            }
            Degree::Zonal(poles) => {
                let z = crate::harmonics::zonal(n, j)?;
                let mut acc = Polynomial::zero(n);
                for p in poles {
                    let pole: Vec<_> = p.p.iter().map(|v| f64_to_rat(*v)).collect();
                    acc = &acc + &z.with_pole(&pole).scale(&f64_to_rat(p.w));
                }
                acc
            }
        };
        total = &total + &part;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryRecord {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
    /// `Σ_j r^j ⟨f_j, φ_j⟩` from the coefficients, for each `r`.
    pub series: Vec<f64>,
    pub limit: f64,
    /// `|value − limit|` at the last `r`; of order `J (1 − r)`.
    pub final_deviation: f64,
    /// `max_r |value − series|`: quadrature error of the pairing.
    pub series_deviation: f64,
}

/// `⟨P[e](r·), φ⟩` by exact quadrature along `r_sequence`, against the
/// limit `Σ_j ⟨f_j, φ_j⟩`. Only stored degrees take part.
pub fn boundary_recover(e: &Expansion, phi: &Expansion, r_sequence: &[f64]) -> Result<BoundaryRecord> {
    if e.n != phi.n {
        return Err(Error::DimensionMismatch { expected: e.n, got: phi.n });
    }
    let n = e.n;
    let fin = e.clone().with_tail(None);
    let rule = make_rule::<f64>(n, fin.max_degree() + phi.max_degree())?;
    let common = fin.num_degrees().min(phi.num_degrees());
    let mut pairings = Vec::new();
    for j in 0..common {
        let a = fin.coeffs_of(j)?;
        let b = phi.coeffs_of(j)?;
        pairings.push(compensated_sum(a.iter().zip(&b).map(|(x, y)| x * y)));
    }
    let limit = compensated_sum(pairings.iter().copied());
    let series: Vec<f64> = r_sequence
        .iter()
        .map(|&r| compensated_sum(pairings.iter().enumerate().map(|(j, v)| r.powi(j as i32) * v)))
        .collect();
    let values = r_sequence
        .iter()
        .map(|&r| {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::DomainViolation);
            }
            Ok(rule.integrate(|w| {
                let u = poisson_transform(&fin, r, w).map(|v| v.value).unwrap_or(f64::NAN);
                u * phi.eval(w)
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let final_deviation = values.last().map_or(0.0, |v| (v - limit).abs());
    let series_deviation = values.iter().zip(&series).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(BoundaryRecord { r: r_sequence.to_vec(), values, series, limit, final_deviation, series_deviation })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrip {
    pub r: f64,
    pub max_deviation: f64,
    pub per_degree: Vec<f64>,
}

/// Recovers `f_j` from `U = P[e]` on the sphere of radius `1/2`,
/// `f_j = r^{-j} proj_j U(r·)`, and compares coefficients with `e`.
pub fn bv_roundtrip(e: &Expansion) -> Result<RoundTrip> {
    let n = e.n;
    let r = 0.5;
    let fin = e.clone().with_tail(None);
    let rule = make_rule::<f64>(n, 2 * fin.max_degree())?;
    let samples: Vec<f64> = rule.nodes.iter().map(|w| poisson_transform(&fin, r, w).map(|v| v.value)).collect::<Result<_>>()?;
    let lookup = |w: &[f64]| -> f64 {
        // quadrature nodes are evaluated in order; find by identity
        let idx = rule.nodes.iter().position(|x| x.as_slice() == w).expect("quadrature node");
        samples[idx]
    };
    let per_degree = (0..fin.num_degrees())
        .into_par_iter()
        .map(|j| {
            let b = crate::harmonics::basis(n, j)?;
            let got = project(lookup, &b, &rule);
            let want = fin.coeffs_of(j)?;
            let scale = r.powi(-(j as i32));
            Ok(got.iter().zip(&want).map(|(g, w)| (g * scale - w).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RoundTrip { r, max_deviation: per_degree.iter().copied().fold(0.0, f64::max), per_degree })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthVerdict {
    RoumieuBV,
    BeurlingBV,
    NoBVAtGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthLevel {
    pub m: u32,
    pub r: f64,
    pub sup_u: f64,
    /// `log(sup |U| e^{−M*(h/(1−r))})`; an upper bound where `M*` was only
    /// bounded from below.
    pub log_weighted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthH {
    pub h: f64,
    pub bounded: bool,
    pub levels: Vec<GrowthLevel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub weight: serde_json::Value,
    pub h_grid: Vec<GrowthH>,
    pub verdict: GrowthVerdict,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPolicy {
    /// Radii `1 − 2^{-m}` for `m` in this range.
    pub m_levels: std::ops::RangeInclusive<u32>,
    pub omega_samples: usize,
    /// Extra directions always sampled (for instance known poles).
    pub hints: Vec<Vec<f64>>,
    pub h_grid: Vec<f64>,
}

/// Levels tracked in the boundedness trend.
pub const TREND_LEVELS: usize = 6;
/// Allowed relative growth over the last [`TREND_LEVELS`] levels.
pub const TREND_GROWTH: f64 = 0.01;

impl GrowthPolicy {
    pub fn new(n: usize) -> Self {
        Self { m_levels: 1..=26, omega_samples: if n == 2 { 720 } else { 2000 }, hints: Vec::new(), h_grid: crate::classify::h_grid() }
    }

    /// Samples every pole of `e` in addition to the quasi-uniform set.
    pub fn for_expansion(e: &Expansion) -> Self {
        let mut p = Self::new(e.n);
        let mut hints: Vec<Vec<f64>> = e.tail().unwrap_or(&[]).iter().map(|q| q.p.clone()).collect();
        for j in 0..e.num_degrees() {
            if let Some(Degree::Zonal(poles)) = e.degree(j) {
                hints.extend(poles.iter().map(|q| q.p.clone()));
            }
        }
        hints.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        hints.dedup();
        p.hints = hints;
        p
    }
}

/// Sampled growth of a harmonic `U` against `e^{M*(h/(1−r))}` on the `h` grid.
/// Requires (M.1)* and (M.2). Roumieu if bounded for every grid `h`,
/// Beurling if for some.
pub fn growth_classify<U>(u: U, n: usize, w: &WeightSequence, policy: &GrowthPolicy) -> Result<GrowthReport>
where
    U: Fn(&[f64]) -> Result<f64> + Sync,
{
    let flags = check_conditions(w)?;
    if !flags.m1star {
        return Err(Error::ConditionMissing("(M.1)*"));
    }
    if !flags.m2 {
        return Err(Error::ConditionMissing("(M.2)"));
    }
    let mut omegas = sphere_samples(n, policy.omega_samples);
    omegas.extend(policy.hints.iter().cloned());
    let ms: Vec<u32> = policy.m_levels.clone().collect();
    let sups: Vec<(u32, f64, f64)> = ms
        .par_iter()
        .map(|&m| {
            let r = 1.0 - 2f64.powi(-(m as i32));
            let mut s: f64 = 0.0;
            for o in &omegas {
                let x: Vec<f64> = o.iter().map(|v| v * r).collect();
                s = s.max(u(&x)?.abs());
            }
            Ok((m, r, s))
        })
        .collect::<Result<_>>()?;
    let mut lower_bound_used = false;
    let mut grid = Vec::new();
    for &h in &policy.h_grid {
        let mut levels = Vec::new();
        for &(m, r, s) in &sups {
            let t = h / (1.0 - r);
            let mstar = match w.associated_mstar(t) {
                Ok(v) => v,
                Err(Error::CutoffExceeded { lower_bound }) => {
                    lower_bound_used = true;
                    lower_bound
                }
                Err(e) => return Err(e),
            };
            let lw = if s == 0.0 || mstar == f64::INFINITY { f64::NEG_INFINITY } else { s.ln() - mstar };
            levels.push(GrowthLevel { m, r, sup_u: s, log_weighted: lw });
        }
        let logs: Vec<f64> = levels.iter().map(|l| l.log_weighted).collect();
        grid.push(GrowthH { h, bounded: trend_bounded(&logs), levels });
    }
    let all = grid.iter().all(|g| g.bounded);
    let some = grid.iter().any(|g| g.bounded);
    let verdict = if all {
        GrowthVerdict::RoumieuBV
    } else if some {
        GrowthVerdict::BeurlingBV
    } else {
        GrowthVerdict::NoBVAtGrid
    };
    let mut note = format!(
        "r_m = 1-2^-m, m in {:?}; {} directions; bounded = max over last {} levels <= (1+{}) * earlier max",
        policy.m_levels,
        omegas.len(),
        TREND_LEVELS,
        TREND_GROWTH
    );
    if lower_bound_used {
        note.push_str("; M* beyond the weight cutoff replaced by a certified lower bound (weighted values are upper bounds)");
    }
    Ok(GrowthReport { weight: w.to_json(), h_grid: grid, verdict, note })
}

fn trend_bounded(logs: &[f64]) -> bool {
    if logs.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return false;
    }
    let k = TREND_LEVELS.min(logs.len().saturating_sub(1)).max(1);
    let split = logs.len().saturating_sub(k);
    let early = logs[..split].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let late = logs[split..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    late == f64::NEG_INFINITY || late <= early + (1.0 + TREND_GROWTH).ln()
}

/// [`growth_classify`] applied to `P[e]`.
pub fn growth_classify_expansion(e: &Expansion, w: &WeightSequence) -> Result<GrowthReport> {
    let ev = PoissonEvaluator::new(e.clone());
    growth_classify(|x| ev.eval_at(x).map(|v| v.value), e.n, w, &GrowthPolicy::for_expansion(e))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::expansion::Kind;

    #[test]
    fn kernel_closed_forms() {
        let x0 = [0.0, 0.0, 0.0];
        let xi = [0.0, 0.0, 1.0];
        assert!((poisson_kernel(&x0, &xi).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let x = [0.0, 0.0, 0.5];
        assert!((poisson_kernel(&x, &xi).unwrap() - 1.5 / PI).abs() < 1e-14);
        assert!(matches!(poisson_kernel(&[0.0, 0.0, 1.0], &xi), Err(Error::DomainViolation)));
    }

    #[test]
    fn kernel_integrates_to_one() {
        let rule = make_rule::<f64>(3, 60).unwrap();
        let x = [0.0, 0.0, 0.5];
        let total = rule.integrate(|xi| poisson_kernel(&x, xi).unwrap());
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn series_matches_closed_form() {
        for n in 2..=4 {
            for &(r, u) in &[(0.3, 0.2), (0.9, 1.0), (0.9, -1.0), (0.75, 0.5)] {
                let s = poisson_kernel_series(n, r, u, 1e-13).unwrap();
                let c = poisson_kernel_ru(n, r, u);
                assert!((s.value - c).abs() < 1e-9 * c.max(1.0), "n={n} r={r} u={u}: {} vs {c}", s.value);
            }
        }
    }

    #[test]
    fn delta_transform() {
        let e = Expansion::delta(3, &[0.0, 0.0, 1.0], 10).unwrap();
        let v = poisson_transform(&e, 0.5, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(v.tail, TailStatus::ClosedForm);
        assert!((v.value * 4.0 * PI - 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_harmonic_scales() {
        let e = Expansion::single(3, 3, 1).unwrap();
        let w = [0.6, 0.0, 0.8];
        let v = poisson_transform(&e, 0.7, &w).unwrap();
        assert!((v.value - 0.7f64.powi(3) * e.eval(&w)).abs() < 1e-13);
        assert_eq!(poisson_transform(&e, 0.0, &w).unwrap().value, 0.0);
    }

    #[test]
    fn truncated_transform_is_harmonic() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let e = Expansion::random(3, 4, &mut rng).unwrap();
        assert!(poisson_polynomial(&e).unwrap().laplacian().is_zero());
        let d = Expansion::delta(3, &[0.0, 0.6, 0.8], 5).unwrap();
        assert!(poisson_polynomial(&d.with_tail(None)).unwrap().laplacian().is_zero());
    }

    #[test]
    fn roundtrip_small() {
        let e = Expansion::single(3, 3, 2).unwrap();
        assert!(bv_roundtrip(&e).unwrap().max_deviation < 1e-10);
        let z = Expansion::zero(3, Kind::Function);
        assert_eq!(bv_roundtrip(&z).unwrap().max_deviation, 0.0);
    }

    #[test]
    fn abel_limit_single_degree() {
        let e = Expansion::single(3, 2, 0).unwrap();
        let rec = boundary_recover(&e, &e, &[0.5, 0.9, 1.0 - 1e-6]).unwrap();
        assert!((rec.limit - 1.0).abs() < 1e-14);
        assert!((rec.values[0] - 0.25).abs() < 1e-12);
        assert!(rec.series_deviation < 1e-12);
        // r^2 − 1 at r = 1 − 1e-6
        assert!((rec.final_deviation - (1.0 - (1.0f64 - 1e-6).powi(2))).abs() < 1e-12);
    }

    #[test]
    fn delta_growth_with_factorial_weight() {
        let e = Expansion::delta(3, &[0.0, 0.0, 1.0], 8).unwrap();
        let w = WeightSequence::factorial(200).unwrap();
        let r = growth_classify_expansion(&e, &w).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::RoumieuBV);
        let scaled = growth_classify_expansion(&e.scale(5.0), &w).unwrap();
        assert_eq!(scaled.verdict, r.verdict);
    }
}
