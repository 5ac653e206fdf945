use super::WeightSequence;
use crate::scalar::compensated_sum;
use crate::verdict::{BoundVerdict, InequalityId};
use crate::{Error, Result};

/// Increase of the log-quotients over the second half of the table below
/// which they are treated as having stalled (so the sup beyond the cutoff
/// is `+∞` rather than unknown).
const STALL_TOL: f64 = 1e-9;
/// Largest cutoff reached by automatic extension.
pub(crate) const MAX_AUTO_P: usize = 1 << 22;

/// `sup_{q ≥ 0} (q lt − L_q)` for `L_0 = 0` with log-quotients `lam[q] = L_q − L_{q−1}`.
fn sup_assoc(logs: &[f64], lam: &[f64], lt: f64, monotone: bool) -> Result<f64> {
    let p = logs.len() - 1;
    let (value, beyond) = if monotone {
        let k = lam[1..].partition_point(|&l| l <= lt);
        let v = compensated_sum(lam[1..=k].iter().map(|&l| lt - l));
        (v, k == p && lam[p] < lt)
    } else {
        let (arg, v) = direct(logs, lt);
        (v, arg == p && lam[p] < lt)
    };
    if !beyond {
        return Ok(value);
    }
    if lam[p] - lam[p / 2] <= STALL_TOL {
        Ok(f64::INFINITY)
    } else {
        Err(Error::CutoffExceeded { lower_bound: value })
    }
}

fn direct(logs: &[f64], lt: f64) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (q, l) in logs.iter().enumerate().skip(1) {
        let v = q as f64 * lt - l;
        if v > best.1 {
            best = (q, v);
        }
    }
    best
}

/// Lower convex hull of `(q, v_q)`, evaluated at every `q`, plus its slopes.
fn lower_hull(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hull: Vec<usize> = Vec::new();
    for q in 0..v.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above the segment a–q
            let lhs = (v[b] - v[a]) * (q - a) as f64;
            let rhs = (v[q] - v[a]) * (b - a) as f64;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let mut values = vec![0.0; v.len()];
    let mut slopes = Vec::with_capacity(hull.len());
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let s = (v[b] - v[a]) / (b - a) as f64;
        slopes.push(s);
        for (q, val) in values.iter_mut().enumerate().take(b + 1).skip(a) {
            *val = v[a] + s * (q - a) as f64;
        }
    }
    (values, slopes)
}

impl WeightSequence {
    /// `M(t) = sup_p log(t^p / M_p)`. Under (M.1) this is the breakpoint sum
    /// `Σ_{m_p ≤ t} log(t / m_p)`; otherwise the direct sup over `p ≤ P_max`.
    pub fn associated_m(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        sup_assoc(self.log_values(), &self.log_mu, t.ln(), self.is_log_convex())
    }

    /// `M(t)` by the direct sup over `p ≤ P_max`, ignoring (M.1).
    pub fn associated_m_direct(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        sup_assoc(self.log_values(), &self.log_mu, t.ln(), false)
    }

    /// `M*(t) = sup_p log(p! t^p / M_p)`; `+∞` is a legal value.
    pub fn associated_mstar(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        sup_assoc(&self.log_star(), &self.log_nu, t.ln(), self.is_log_convex_star())
    }

    pub fn associated_mstar_direct(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        sup_assoc(&self.log_star(), &self.log_nu, t.ln(), false)
    }

    /// `log (M_p / p!)` for all `p ≤ P_max`.
    pub fn log_star(&self) -> Vec<f64> {
        (0..=self.p_max).map(|p| self.log_m_over_fact(p)).collect()
    }


    /// `log` of the lower log-convex minorant of `M_p / p!` at each `p`.
    pub fn log_star_hull(&self) -> Vec<f64> {
        lower_hull(&self.log_star()).0
    }

    /// `log M*_p` with `M*_p = sup_{t>0} t^p e^{−M*(t)}`, maximised over the
    /// breakpoints of `M*` (the slopes of the lower hull of `log(M_q/q!)`).
    pub fn log_convex_regularization_mstar_p(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Ok(0.0);
        }
        if p >= self.p_max {
            return Err(Error::CutoffExceeded { lower_bound: f64::NEG_INFINITY });
        }
        let star = self.log_star();
        let (_, slopes) = lower_hull(&star);
        let mut best = f64::NEG_INFINITY;
        for s in slopes {
            // the last slope may round past the cutoff; it never maximises for p < P_max
            if let Ok(ms) = sup_assoc(&star, &self.log_nu, s, self.is_log_convex_star()) {
                best = best.max(p as f64 * s - ms);
            }
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::CutoffExceeded { lower_bound: f64::NEG_INFINITY });
        }
        Ok(best)
    }

    /// A copy whose cutoff is large enough to evaluate `M(t)` for every
    /// `t ≤ t_max` (the cutoff is multiplied by 4 until it suffices).
    pub fn covering(&self, t_max: f64) -> Result<WeightSequence> {
        let mut seq = self.clone();
        loop {
            match seq.associated_m(t_max) {
                Ok(_) => return Ok(seq),
                Err(Error::CutoffExceeded { .. }) if seq.p_max < MAX_AUTO_P => seq = seq.with_p_max(seq.p_max * 4)?,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn convex_regularization_mstar_p(&self, p: usize) -> Result<f64> {
        self.log_convex_regularization_mstar_p(p).map(f64::exp)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("associated functions need finite t ≥ 0 (got {t})")))
    }
}

/// Log-spaced grid `lo … hi` with `count` points.
pub fn assoc_estimate_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp()).collect()
}

/// Checks `t^η e^{−M(H^η t)} ≤ A^η e^{−M(t)}` at every sample, with `(A, H)`
/// the (M.2)' witnesses. Both sides are compared in log-space; the verdict
/// reports the worst ratio `lhs / rhs` (so `rhs = 1`). The cutoff is
/// extended automatically when a sample needs indices beyond it.
pub fn verify_assoc_inequality(seq: &WeightSequence, eta: f64, t_samples: &[f64]) -> Result<BoundVerdict> {
    if !(eta > 0.0) {
        return Err(Error::Invalid(format!("eta must be positive (got {eta})")));
    }
    let flags = super::check_conditions(seq)?;
    if !flags.m1 {
        return Err(Error::ConditionMissing("(M.1)"));
    }
    let w = flags.m2prime_witness.filter(|_| flags.m2prime).ok_or(Error::ConditionMissing("(M.2)'"))?;
    let mut seq = seq.clone();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = 0.0;
    for &t in t_samples {
        let (m_t, m_ht) = loop {
            let both = seq.associated_m(t).and_then(|a| seq.associated_m(w.h.powf(eta) * t).map(|b| (a, b)));
            match both {
                Ok(v) => break v,
                Err(Error::CutoffExceeded { .. }) if seq.p_max < MAX_AUTO_P => seq = seq.with_p_max(seq.p_max * 4)?,
                Err(e) => return Err(e),
            }
        };
        let log_ratio = eta * t.ln() - m_ht - (eta * w.a.ln() - m_t);
        if log_ratio > worst {
            worst = log_ratio;
            worst_t = t;
        }
    }
    let tol = 1e-12;
    let ratio = worst.exp();
    let mut v = BoundVerdict::new(
        InequalityId::AssocEst,
        format!("eta={eta}, A={}, H={}, samples={}, worst t={worst_t:e}", w.a, w.h, t_samples.len()),
        ratio,
        1.0,
        tol,
        format!("log-space comparison; cutoff P_max={} (verified to cutoff)", seq.p_max),
    );
    v.holds = worst <= tol;
    Ok(v)
}
