use serde::Serialize;

use super::{check_conditions, WeightSequence};
use crate::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const CROSS_CHECK_POINTS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvResult {
    pub ell: f64,
    pub log_l: f64,
    pub holds: bool,
    /// Largest `inf_y (M*(1/y) + t y) − M(ℓ t)` over the samples.
    pub worst_gap: f64,
    /// Largest amount by which the log-grid in `y` undercut the golden-section infimum.
    pub grid_cross_check: f64,
    pub p_max_used: usize,
}

/// `inf_{y>0} M*(1/y) + t y`, minimised in `s = log y` where the objective is convex.
fn infimum(seq: &WeightSequence, t: f64) -> (f64, f64) {
    let g = |s: f64| match seq.associated_mstar((-s).exp()) {
        Ok(m) => m + t * s.exp(),
        Err(_) => f64::INFINITY,
    };
    let lo = -seq.log_quotient_star(seq.p_max);
    let hi = -seq.log_quotient_star(1);
    if !(hi > lo) {
        let v = g(hi);
        return (v, 0.0);
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > 1e-10 * a.abs().max(b.abs()).max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = g(d);
        }
    }
    let golden = g(0.5 * (a + b)).min(g(lo)).min(g(hi));
    let grid_min = (0..=CROSS_CHECK_POINTS)
        .map(|i| g(lo + (hi - lo) * i as f64 / CROSS_CHECK_POINTS as f64))
        .fold(f64::INFINITY, f64::min);
    let undercut = (golden - grid_min).max(0.0);
    (golden.min(grid_min), undercut)
}

/// Smallest `ℓ ∈ {2^k : 0 ≤ k ≤ 16}`, then smallest `L ∈ {2^k : −4 ≤ k ≤ 16}`,
/// with `inf_y (M*(1/y) + t y) ≤ M(ℓ t) + log L` at every sample.
pub fn petzsche_vogt_search(seq: &WeightSequence, t_samples: &[f64]) -> Result<PvResult> {
    let flags = check_conditions(seq)?;
    if !flags.m1star {
        return Err(Error::ConditionMissing("(M.1)*"));
    }
    if !flags.m2 {
        return Err(Error::ConditionMissing("(M.2)"));
    }
    let infs: Vec<(f64, f64)> = t_samples.iter().map(|&t| infimum(seq, t)).collect();
    let cross = infs.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut seq = seq.clone();
    for k in 0..=16 {
        let ell = 2f64.powi(k);
        let mut gap = f64::NEG_INFINITY;
        for (&t, &(inf, _)) in t_samples.iter().zip(&infs) {
            let m = loop {
                match seq.associated_m(ell * t) {
                    Ok(v) => break v,
                    Err(Error::CutoffExceeded { .. }) if seq.p_max < super::assoc::MAX_AUTO_P => seq = seq.with_p_max(seq.p_max * 4)?,
                    Err(e) => return Err(e),
                }
            };
            gap = gap.max(inf - m);
        }
        if let Some(l) = (-4..=16).map(|j| 2f64.powi(j)).find(|l| gap <= l.ln() + 1e-12 * gap.abs().max(1.0)) {
            return Ok(PvResult {
                ell,
                log_l: l.ln(),
                holds: true,
                worst_gap: gap,
                grid_cross_check: cross,
                p_max_used: seq.p_max,
            });
        }
    }
    Err(Error::SearchFailed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::assoc_estimate_grid;

    #[test]
    fn gevrey_two_succeeds() {
        let w = WeightSequence::gevrey(2.0, 200).unwrap();
        let r = petzsche_vogt_search(&w, &assoc_estimate_grid(1.0, 1e3, 40)).unwrap();
        assert!(r.holds);
        assert!(r.grid_cross_check < 1e-8);
    }

    #[test]
    fn factorial_infimum_is_t() {
        let w = WeightSequence::factorial(200).unwrap();
        for t in [0.5, 1.0, 7.0] {
            assert_eq!(infimum(&w, t).0, t);
        }
    }
}
