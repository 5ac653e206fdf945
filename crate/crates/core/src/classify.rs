//! Classification of expansions by the decay or growth of `‖f_j‖_{L^q}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::expansion::{Degree, Expansion, Kind};
use crate::harmonics::{dim_h, eigenvalue, surface_area};
use crate::quadrature::{lq_norm, make_rule, QNorm, SUP_SAMPLES};
use crate::symalg::{sup_norm_on_sphere, RadialForm};
use crate::verdict::{BoundVerdict, InequalityId};
use crate::weights::{check_conditions, ConditionFlags, WeightSequence};
use crate::{Error, Result};

/// Exponents `k` of the `h` grid `{2^k : −10 ≤ k ≤ 10}`.
pub const H_GRID: std::ops::RangeInclusive<i32> = -10..=10;
/// Minimum number of stored degrees minus one.
pub const MIN_DEGREES: usize = 8;
/// A log-track counts as bounded when its maximum over the last quarter of
/// degrees exceeds the earlier maximum by at most `log(1.01)`.
pub const BOUNDED_GROWTH: f64 = 0.01;
/// Margin around 1 for the root-test decisions.
pub const ROOT_TEST_MARGIN: f64 = 1e-3;

pub fn h_grid() -> Vec<f64> {
    H_GRID.map(|k| 2f64.powi(k)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    AnalyticFunction,
    RoumieuFunction,
    BeurlingFunction,
    RoumieuDual,
    BeurlingDual,
    AnalyticFunctional,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HFit {
    pub h: f64,
    pub bounded: bool,
    /// `log sup_j` of the weighted track over the stored degrees.
    pub log_sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub weight: serde_json::Value,
    pub kind: Kind,
    /// Satisfied classes, smallest first.
    pub sides: Vec<Side>,
    pub side: Side,
    pub fitted_h: Option<f64>,
    pub fitted_c: f64,
    pub norm_track: Vec<f64>,
    pub q: QNorm,
    pub root_test_limsup: f64,
    pub h_grid: Vec<HFit>,
    pub note: String,
}

/// `‖f_j‖_{L^q(S^{n-1})}` for `j = 0..=J`.
pub fn norm_track(e: &Expansion, q: QNorm) -> Result<Vec<f64>> {
    let n = e.n;
    (0..e.num_degrees())
        .map(|j| {
            let deg = e.degree(j).expect("in range");
            if let Degree::Zonal(poles) = deg {
                if poles.is_empty() {
                    return Ok(0.0);
                }
            }
            match q {
                QNorm::Finite(2.0) => Ok(e.l2_norm_degree(j)),
                QNorm::Infinity => match deg {
                    // |Z_j(u)| ≤ Z_j(1) = d_j
                    Degree::Zonal(poles) if poles.len() == 1 => Ok(poles[0].w.abs() * dim_h(n, j) as f64),
                    _ => Ok(sup_norm_on_sphere(|x| e.eval_degree(j, x), n, SUP_SAMPLES, true).value),
                },
                QNorm::Finite(x) => {
                    let rule = make_rule::<f64>(n, (x.ceil() as usize) * j.max(1) + 8)?;
                    Ok(lq_norm(|w| e.eval_degree(j, w), q, &rule))
                }
            }
        })
        .collect()
}

/// Root-test limsup estimate: `exp(b)` from the least-squares fit
/// `log ‖f_j‖ ≈ a + b j + c √j + d log j` over the second half of the
/// non-zero degrees. Scale-invariant, exact on `λ ρ^j j^k e^{±c√j}` tracks.
pub fn root_test_limsup(track: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = track
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(j, v)| (j as f64, v.ln()))
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    let tail: Vec<(f64, f64)> = pts[pts.len() / 2..].to_vec();
    let use_pts = if tail.len() >= 6 { tail } else { pts.clone() };
    if use_pts.len() < 5 {
        // too few degrees for the fit: plain roots over the last quarter
        let k = pts.len().div_ceil(4);
        return pts[pts.len() - k..].iter().map(|(j, l)| (l / j).exp()).fold(0.0, f64::max);
    }
    let m = use_pts.len();
    let jmax = use_pts[m - 1].0;
    // columns scaled to comparable magnitude
    let a = DMatrix::from_fn(m, 4, |r, c| {
        let j = use_pts[r].0;
        match c {
            0 => 1.0,
            1 => j / jmax,
            2 => (j / jmax).sqrt(),
            _ => (j / jmax).ln(),
        }
    });
    let y = DVector::from_iterator(m, use_pts.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    match svd.solve(&y, 1e-12) {
        Ok(x) => (x[1] / jmax).exp(),
        Err(_) => f64::NAN,
    }
}

/// Whether a log-track stays bounded: last-quarter max ≤ earlier max + log(1.01).
pub fn is_bounded(log_track: &[f64]) -> bool {
    let finite: Vec<f64> = log_track.to_vec();
    if finite.iter().all(|v| *v == f64::NEG_INFINITY) {
        return true;
    }
    if finite.iter().any(|v| *v == f64::INFINITY || v.is_nan()) {
        return false;
    }
    let len = finite.len();
    let q = len.div_ceil(4).max(1);
    let early = finite[..len - q].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let late = finite[len - q..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    late <= early + (1.0 + BOUNDED_GROWTH).ln()
}

fn weighted_logs(seq: &WeightSequence, track: &[f64], h: f64, sign: f64) -> Result<Vec<f64>> {
    track
        .iter()
        .enumerate()
        .map(|(j, v)| Ok(if *v > 0.0 { v.ln() + sign * seq.associated_m(h * j as f64)? } else { f64::NEG_INFINITY }))
        .collect()
}

fn require(flags: &ConditionFlags) -> Result<()> {
    if !flags.m1 {
        return Err(Error::ConditionMissing("(M.1)"));
    }
    if !flags.m2prime {
        return Err(Error::ConditionMissing("(M.2)'"));
    }
    if !flags.m0 {
        return Err(Error::ConditionMissing("(M.0)"));
    }
    Ok(())
}

fn fit(seq: &WeightSequence, track: &[f64], sign: f64) -> Result<Vec<HFit>> {
    let hs = h_grid();
    let t_max = hs.last().copied().unwrap_or(1.0) * track.len() as f64;
    let seq = seq.covering(t_max)?;
    hs.into_iter()
        .map(|h| {
            let logs = weighted_logs(&seq, track, h, sign)?;
            let log_sup = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(HFit { h, bounded: is_bounded(&logs), log_sup })
        })
        .collect()
}

fn grid_note(flags: &ConditionFlags) -> String {
    format!(
        "h grid {{2^k: -10<=k<=10}}; bounded = last-quarter max <= earlier max + log(1.01); \
         'all h' means every grid h (extrapolation beyond the grid not certified); weights {}",
        flags.note
    )
}

/// Function side: `‖f_j‖ ≤ C e^{−M(hj)}` for some grid `h` (Roumieu) or every grid `h` (Beurling).
pub fn classify_function(e: &Expansion, w: &WeightSequence, q: QNorm) -> Result<ClassificationReport> {
    let flags = check_conditions(w)?;
    require(&flags)?;
    if e.max_degree() < MIN_DEGREES {
        return Err(Error::InsufficientDegrees { have: e.max_degree(), need: MIN_DEGREES });
    }
    let track = norm_track(e, q)?;
    let fits = fit(w, &track, 1.0)?;
    let limsup = root_test_limsup(&track);
    let zero = track.iter().all(|v| *v == 0.0);
    let mut sides = Vec::new();
    if zero || limsup < 1.0 - ROOT_TEST_MARGIN {
        sides.push(Side::AnalyticFunction);
    }
    let all = fits.iter().all(|f| f.bounded);
    let some = fits.iter().any(|f| f.bounded);
    if all && flags.na {
        sides.push(Side::BeurlingFunction);
    }
    if some {
        sides.push(Side::RoumieuFunction);
    }
    let best = fits.iter().rev().find(|f| f.bounded);
    Ok(ClassificationReport {
        weight: w.to_json(),
        kind: Kind::Function,
        side: sides.first().copied().unwrap_or(Side::None),
        sides,
        fitted_h: best.map(|f| f.h),
        fitted_c: if zero { 0.0 } else { best.map_or(f64::INFINITY, |f| f.log_sup.exp()) },
        norm_track: track,
        q,
        root_test_limsup: limsup,
        h_grid: fits,
        note: format!(
            "{}; Beurling verdicts require (NA) (holds: {}); fitted_h = largest bounded grid h",
            grid_note(&flags),
            flags.na
        ),
    })
}

/// Dual side: `sup_j e^{−M(hj)} ‖f_j‖ < ∞` for every grid `h` (Roumieu) or some grid `h` (Beurling).
pub fn classify_dual(e: &Expansion, w: &WeightSequence, q: QNorm) -> Result<ClassificationReport> {
    let flags = check_conditions(w)?;
    require(&flags)?;
    if e.max_degree() < MIN_DEGREES {
        return Err(Error::InsufficientDegrees { have: e.max_degree(), need: MIN_DEGREES });
    }
    let track = norm_track(e, q)?;
    let fits = fit(w, &track, -1.0)?;
    let limsup = root_test_limsup(&track);
    let zero = track.iter().all(|v| *v == 0.0);
    let all = fits.iter().all(|f| f.bounded);
    let some = fits.iter().any(|f| f.bounded);
    let mut sides = Vec::new();
    if all {
        sides.push(Side::RoumieuDual);
    }
    if some && (flags.na || all) {
        sides.push(Side::BeurlingDual);
    }
    if zero || limsup <= 1.0 + ROOT_TEST_MARGIN {
        sides.push(Side::AnalyticFunctional);
    }
    let best = fits.iter().find(|f| f.bounded);
    Ok(ClassificationReport {
        weight: w.to_json(),
        kind: Kind::Ultradistribution,
        side: sides.first().copied().unwrap_or(Side::None),
        sides,
        fitted_h: best.map(|f| f.h),
        fitted_c: if zero { 0.0 } else { best.map_or(f64::INFINITY, |f| f.log_sup.exp()) },
        norm_track: track,
        q,
        root_test_limsup: limsup,
        h_grid: fits,
        note: format!("{}; fitted_h = smallest bounded grid h", grid_note(&flags)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaplacePowerReport {
    pub verdict: BoundVerdict,
    /// Largest grid `h` for which the bound holds with the same `C`.
    pub largest_working_h: Option<f64>,
    pub norms: Vec<f64>,
}

/// `‖Δ^p e‖_{L²} ≤ C h^{−2p} M_{2p}` for `p` in the range, with `C = ‖e‖_{L²}`
/// (the `p = 0` case).
pub fn laplace_power_check(
    e: &Expansion,
    w: &WeightSequence,
    h: f64,
    p_range: std::ops::RangeInclusive<u32>,
) -> Result<LaplacePowerReport> {
    let n = e.n;
    let l2 = |j: usize| e.l2_norm_degree(j);
    // log ‖Δ^p e‖ = log sqrt(Σ_j |λ_j|^{2p} ‖f_j‖²), accumulated in log-space
    let log_norm = |p: u32| {
        let terms: Vec<f64> = (0..e.num_degrees())
            .filter(|&j| l2(j) > 0.0)
            .map(|j| {
                let lam = (eigenvalue(n, j) as f64).abs();
                if p == 0 {
                    2.0 * l2(j).ln()
                } else if lam == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    2.0 * (p as f64 * lam.ln() + l2(j).ln())
                }
            })
            .collect();
        let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        0.5 * (mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln())
    };
    let ps: Vec<u32> = p_range.collect();
    let max_p = ps.iter().copied().max().unwrap_or(0) as usize;
    let w = if 2 * max_p > w.p_max { w.with_p_max(2 * max_p)? } else { w.clone() };
    let log_c = log_norm(0);
    let logs: Vec<f64> = ps.iter().map(|&p| log_norm(p)).collect();
    let worst = |hh: f64| {
        ps.iter()
            .zip(&logs)
            .map(|(&p, l)| l - (log_c - 2.0 * p as f64 * hh.ln() + w.log_m(2 * p as usize)))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let tol = 1e-12;
    let gap = worst(h);
    let largest = h_grid().into_iter().rev().find(|&hh| worst(hh) <= tol);
    let mut verdict = BoundVerdict::new(
        InequalityId::LaplacePower,
        format!("n={n}, h={h}, p in {:?}..={:?}, C=||e||_L2={:e}", ps.first(), ps.last(), log_c.exp()),
        gap.exp(),
        1.0,
        tol,
        "ratio lhs/rhs at the worst p (log-space); eigenvalue multipliers -j(j+n-2)",
    );
    verdict.holds = gap <= tol || log_c == f64::NEG_INFINITY;
    Ok(LaplacePowerReport { verdict, largest_working_h: largest, norms: logs.iter().map(|l| l.exp()).collect() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSumCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    pub holds: bool,
    pub a: f64,
    pub big_h: f64,
}

/// `‖e − Σ_{j≤k} f_j‖'_h ≤ (A/(kh)) ‖e‖'_{Hh}` over the stored degrees,
/// `‖φ‖'_h = sup_j e^{M(hj)} ‖φ_j‖_{L²}`, `(A, H)` the (M.2)' witnesses.
pub fn partial_sum_remainder(e: &Expansion, w: &WeightSequence, h: f64, k: usize) -> Result<PartialSumCheck> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let flags = check_conditions(w)?;
    if !flags.m1 {
        return Err(Error::ConditionMissing("(M.1)"));
    }
    let wit = flags.m2prime_witness.filter(|_| flags.m2prime).ok_or(Error::ConditionMissing("(M.2)'"))?;
    let track: Vec<f64> = (0..e.num_degrees()).map(|j| e.l2_norm_degree(j)).collect();
    let seq = w.covering(wit.h * h * track.len() as f64)?;
    let sup = |hh: f64, from: usize| -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for (j, v) in track.iter().enumerate().skip(from) {
            if *v > 0.0 {
                best = best.max(v.ln() + seq.associated_m(hh * j as f64)?);
            }
        }
        Ok(best)
    };
    let log_lhs = sup(h, k + 1)?;
    let log_rhs = (wit.a / (k as f64 * h)).ln() + sup(wit.h * h, 0)?;
    Ok(PartialSumCheck {
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        log_lhs,
        log_rhs,
        holds: log_lhs <= log_rhs + 1e-12 * log_rhs.abs().max(1.0),
        a: wit.a,
        big_h: wit.h,
    })
}

/// `‖φ‖_h = sup_{|α| ≤ order} h^{|α|} ‖∂^α_{S^{n-1}} φ‖_∞ / M_{|α|}` for a
/// coefficient expansion, with exact symbolic derivatives of the order-0
/// homogeneous extension and sampled sups.
pub fn derivative_sup_norm(e: &Expansion, w: &WeightSequence, h: f64, order: u32) -> Result<f64> {
    let n = e.n;
    let mut ext = RadialForm::zero(n);
    for j in 0..e.num_degrees() {
        let c = e.coeffs_of(j)?;
        let b = crate::harmonics::basis(n, j)?;
        let area = surface_area::<f64>(n);
        for (k, ck) in c.iter().enumerate() {
            if *ck == 0.0 {
                continue;
            }
            // Y_k = Q_k / sqrt(g_k |S|); rational approximation of the real coefficient
            let scale = ck * b.normalizer(k);
            let _ = area;
            let q = b.elements[k].scale(&crate::symalg::f64_to_rat(scale));
            let part = RadialForm::homogeneous_extension(&q);
            for (kk, p) in part.summands() {
                ext.add_summand(p.clone(), kk);
            }
        }
    }
    let mut best: f64 = 0.0;
    let mut stack: Vec<Vec<u32>> = vec![vec![0; n]];
    let mut seen = std::collections::BTreeSet::new();
    while let Some(alpha) = stack.pop() {
        if !seen.insert(alpha.clone()) {
            continue;
        }
        let order_a: u32 = alpha.iter().sum();
        let d = ext.diff_multi(&alpha);
        if !d.is_zero() {
            let c = d.compile::<f64>();
            let s = sup_norm_on_sphere(|x| c.eval_on_sphere(x), n, 600, false).value;
            best = best.max((order_a as f64 * h.ln() + s.ln() - w.log_m(order_a as usize)).exp());
        }
        if order_a < order {
            for i in 0..n {
                let mut next = alpha.clone();
                next[i] += 1;
                stack.push(next);
            }
        }
    }
    Ok(best)
}

/// `‖φ‖'_h = sup_j e^{M(hj)} ‖φ_j‖_{L²}` over the stored degrees.
pub fn coefficient_norm(e: &Expansion, w: &WeightSequence, h: f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for j in 0..e.num_degrees() {
        let v = e.l2_norm_degree(j);
        if v > 0.0 {
            best = best.max(v.ln() + w.associated_m(h * j as f64)?);
        }
    }
    Ok(best.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::Degree;

    /// Coefficient expansion whose degree-`j` projection is `a_j Y_{0,j}`.
    pub(crate) fn synthetic(n: usize, values: &[f64]) -> Expansion {
        let entries = values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let mut c = vec![0.0; dim_h(n, j) as usize];
                c[0] = *v;
                Degree::Coeffs(c)
            })
            .collect();
        Expansion::from_degrees(n, Kind::Function, entries).unwrap()
    }

    #[test]
    fn root_test_on_exact_families() {
        let geo: Vec<f64> = (0..60).map(|j| 0.5f64.powi(j)).collect();
        assert!((root_test_limsup(&geo) - 0.5).abs() < 1e-9);
        let scaled: Vec<f64> = geo.iter().map(|v| 37.0 * v).collect();
        assert!((root_test_limsup(&scaled) - 0.5).abs() < 1e-9);
        let sub: Vec<f64> = (0..60).map(|j| (-(j as f64).sqrt()).exp()).collect();
        assert!((root_test_limsup(&sub) - 1.0).abs() < 1e-9);
        let poly: Vec<f64> = (0..60).map(|j| (2 * j + 1) as f64).collect();
        assert!((root_test_limsup(&poly) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn geometric_decay_is_analytic() {
        let w = WeightSequence::gevrey(2.0, 200).unwrap();
        let vals: Vec<f64> = (0..40).map(|j| 0.5f64.powi(j)).collect();
        let r = classify_function(&synthetic(3, &vals), &w, QNorm::Finite(2.0)).unwrap();
        assert_eq!(r.side, Side::AnalyticFunction);
        assert!(r.sides.contains(&Side::RoumieuFunction));
    }

    #[test]
    fn zero_expansion_is_in_every_class() {
        let w = WeightSequence::gevrey(2.0, 200).unwrap();
        let e = synthetic(3, &[0.0; 12]);
        let r = classify_function(&e, &w, QNorm::Finite(2.0)).unwrap();
        assert_eq!(r.fitted_c, 0.0);
        assert_eq!(r.sides, vec![Side::AnalyticFunction, Side::BeurlingFunction, Side::RoumieuFunction]);
    }

    #[test]
    fn too_few_degrees() {
        let w = WeightSequence::gevrey(2.0, 200).unwrap();
        let e = synthetic(3, &[1.0; 5]);
        assert!(matches!(classify_dual(&e, &w, QNorm::Finite(2.0)), Err(Error::InsufficientDegrees { .. })));
    }

    #[test]
    fn bounded_trend() {
        assert!(is_bounded(&[0.0, -1.0, -2.0, -3.0]));
        assert!(!is_bounded(&[0.0, 1.0, 2.0, 3.0]));
        assert!(is_bounded(&[f64::NEG_INFINITY; 4]));
    }

    #[test]
    fn single_term_remainder() {
        let w = WeightSequence::gevrey(2.0, 200).unwrap();
        let mut v = vec![0.0; 10];
        v[6] = 1.0;
        let e = synthetic(3, &v);
        let r = partial_sum_remainder(&e, &w, 0.5, 3).unwrap();
        assert!((r.log_lhs - w.associated_m(3.0).unwrap()).abs() < 1e-12);
        assert!(r.holds);
        let full = partial_sum_remainder(&e, &w, 0.5, 9).unwrap();
        assert_eq!(full.lhs, 0.0);
        assert!(full.holds);
    }
}
