//! Support detection from the Abel limit `lim_{r→1} P[f](rω)` on a
//! quasi-uniform grid, and the linear decay rate away from the support.

use rayon::prelude::*;
use serde::Serialize;

use crate::expansion::Expansion;
use crate::harmonics::surface_area;
use crate::poisson::poisson_transform;
use crate::scalar::{symmetric_dot, symmetric_norm};
use crate::verdict::{BoundVerdict, InequalityId};
use crate::weights::{check_conditions, WeightSequence};
use crate::{Error, Result};

/// Relative threshold before scaling by `‖f_0‖ + max_j ‖f_j‖`.
pub const DEFAULT_TAU: f64 = 1e-6;
pub const DEFAULT_DELTA: f64 = 0.05;
/// Levels used for the vanishing maximum and the monotone profile.
pub const MAX_LEVELS: usize = 3;
pub const MONOTONE_LEVELS: usize = 5;

/// `r_m = 1 − 2^{-m}`.
pub fn r_levels(m: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    m.map(|m| 1.0 - 2f64.powi(-(m as i32))).collect()
}

/// Resolution-matched levels `r_m = 1 − 2^{-m}`, `4 ≤ m ≤ m_δ`. At a finite
/// radius the Abel profile only resolves the support to width about `1 − r`;
/// `m_δ` is the first level at which a point mass of the input's total mass
/// `μ` falls below `τ_eff` at angular distance `δ`:
/// `(1 − r) ≈ τ_eff |S| (2(1 − cos δ))^{n/2} / (2μ)`.
pub fn resolution_levels(e: &Expansion, delta: f64, tau_eff: f64) -> Vec<f64> {
    let n = e.n as f64;
    let mu = e.tail().map_or(1.0, |t| t.iter().map(|p| p.w.abs()).sum::<f64>() * surface_area::<f64>(e.n));
    let mu = if mu > 0.0 { mu } else { 1.0 };
    let gap = tau_eff * surface_area::<f64>(e.n) * (2.0 * (1.0 - delta.cos())).powf(n / 2.0) / (2.0 * mu);
    let m_end = (-gap.log2()).ceil().clamp(8.0, 50.0) as u32;
    r_levels(4..=m_end)
}

/// Angle between unit vectors.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    symmetric_dot(a, b).clamp(-1.0, 1.0).acos()
}

/// Cubed-sphere grid on `S^{n-1}` with `k` points per edge of each face,
/// `k = ⌈π / (2δ)⌉`. Invariant under signed coordinate permutations, exactly.
pub fn cubed_sphere_grid(n: usize, delta: f64) -> Vec<Vec<f64>> {
    let k = ((std::f64::consts::FRAC_PI_2 / delta).ceil() as usize).max(1);
    let ticks: Vec<f64> = (0..k).map(|i| -1.0 + (2 * i + 1) as f64 / k as f64).collect();
    let mut out = Vec::new();
    for axis in 0..n {
        for sign in [1.0, -1.0] {
            let mut idx = vec![0usize; n - 1];
            loop {
                let mut p = Vec::with_capacity(n);
                let mut t = idx.iter();
                for d in 0..n {
                    p.push(if d == axis { sign } else { ticks[*t.next().expect("n-1 ticks")] });
                }
                let r = symmetric_norm(&p);
                out.push(p.iter().map(|v| v / r).collect());
                let mut d = 0;
                while d < n - 1 {
                    idx[d] += 1;
                    if idx[d] < k {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == n - 1 {
                    break;
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeClass {
    Vanishes,
    Persists,
}

/// Spherical cap `{ω : angle(ω, center) ≤ radius}`.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct Cap {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Cap {
    pub fn contains(&self, w: &[f64]) -> bool {
        angle(w, &self.center) <= self.radius
    }
}

/// A connected union of caps of radius `2δ` around persisting nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportComponent {
    pub nodes: Vec<usize>,
    /// Smallest cap around the normalized mean that covers the component.
    pub enclosing: Cap,
}

impl SupportComponent {
    pub fn contains(&self, grid: &[Vec<f64>], w: &[f64], cap_radius: f64) -> bool {
        self.nodes.iter().any(|&i| angle(&grid[i], w) <= cap_radius)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    pub n: usize,
    pub delta: f64,
    pub cap_radius: f64,
    pub tau: f64,
    pub tau_effective: f64,
    pub r_levels: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    /// `|P[f](r_m ω)|` per node and level.
    pub profiles: Vec<Vec<f64>>,
    pub classes: Vec<NodeClass>,
    pub support_estimate: Vec<SupportComponent>,
    pub note: String,
}

impl SupportReport {
    pub fn persisting(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.grid.iter().zip(&self.classes).filter(|(_, c)| **c == NodeClass::Persists).map(|(g, _)| g)
    }

    /// Whether `w` lies in the support estimate.
    pub fn covers(&self, w: &[f64]) -> bool {
        self.support_estimate.iter().any(|c| c.contains(&self.grid, w, self.cap_radius))
    }

    /// CSV of decay profiles: node index, coordinates, then one column per level.
    pub fn profiles_csv(&self) -> String {
        let mut s = String::from("node");
        for d in 0..self.n {
            s.push_str(&format!(",x{d}"));
        }
        for r in &self.r_levels {
            s.push_str(&format!(",r={r:.17e}"));
        }
        s.push_str(",class\n");
        for (i, (g, p)) in self.grid.iter().zip(&self.profiles).enumerate() {
            s.push_str(&i.to_string());
            for v in g {
                s.push_str(&format!(",{v:.17e}"));
            }
            for v in p {
                s.push_str(&format!(",{v:.17e}"));
            }
            s.push_str(&format!(",{:?}\n", self.classes[i]));
        }
        s
    }
}

fn require_nonquasianalytic(w: &WeightSequence) -> Result<()> {
    let flags = check_conditions(w)?;
    if !flags.m1 {
        return Err(Error::ConditionMissing("(M.1)"));
    }
    if !flags.m2prime {
        return Err(Error::ConditionMissing("(M.2)'"));
    }
    if !flags.m3prime {
        return Err(Error::QuasianalyticWeight);
    }
    Ok(())
}

/// `τ (‖f_0‖ + max_j ‖f_j‖)`, or `τ` for the zero expansion.
pub fn effective_tau(e: &Expansion, tau: f64) -> f64 {
    let f0 = if e.num_degrees() > 0 { e.l2_norm_degree(0) } else { 0.0 };
    let mx = (0..e.num_degrees()).map(|j| e.l2_norm_degree(j)).fold(0.0, f64::max);
    let scale = f0 + mx;
    if scale > 0.0 {
        tau * scale
    } else {
        tau
    }
}

fn profile(e: &Expansion, w: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    levels.iter().map(|&r| poisson_transform(e, r, w).map(|v| v.value.abs())).collect()
}

fn classify_profile(p: &[f64], tau: f64) -> NodeClass {
    let len = p.len();
    let last = &p[len.saturating_sub(MAX_LEVELS)..];
    let small = last.iter().all(|v| *v < tau);
    let tail = &p[len.saturating_sub(MONOTONE_LEVELS)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    if small && monotone {
        NodeClass::Vanishes
    } else {
        NodeClass::Persists
    }
}

/// Classifies every grid node by its Abel profile and merges the caps of
/// radius `2δ` around persisting nodes into connected components.
/// `levels = None` selects [`resolution_levels`].
pub fn detect_support(
    e: &Expansion,
    w: &WeightSequence,
    levels: Option<&[f64]>,
    delta: f64,
    tau: f64,
) -> Result<SupportReport> {
    require_nonquasianalytic(w)?;
    let tau_eff = effective_tau(e, tau);
    let levels = match levels {
        Some(l) => l.to_vec(),
        None => resolution_levels(e, delta, tau_eff),
    };
    let levels = &levels[..];
    if levels.is_empty() || levels.iter().any(|r| !(0.0..1.0).contains(r)) {
        return Err(Error::DomainViolation);
    }
    let n = e.n;
    let grid = cubed_sphere_grid(n, delta);
    let profiles: Vec<Vec<f64>> = grid.par_iter().map(|g| profile(e, g, levels)).collect::<Result<_>>()?;
    let classes: Vec<NodeClass> = profiles.iter().map(|p| classify_profile(p, tau_eff)).collect();
    let cap_radius = 2.0 * delta;
    let persist: Vec<usize> = (0..grid.len()).filter(|&i| classes[i] == NodeClass::Persists).collect();
    let support_estimate = components(&grid, &persist, cap_radius);
    let note = format!(
        "vanishes iff max over the last {MAX_LEVELS} levels < tau_effective and the profile is non-increasing over the last {MONOTONE_LEVELS}; \
         tau_effective = tau * (||f_0|| + max_j ||f_j||); caps of radius 2*delta merged when they overlap; {} stored degrees{}",
        e.num_degrees(),
        if e.tail().is_some() { ", point-mass continuation summed in closed form" } else { "" }
    );
    Ok(SupportReport {
        n,
        delta,
        cap_radius,
        tau,
        tau_effective: tau_eff,
        r_levels: levels.to_vec(),
        grid,
        profiles,
        classes,
        support_estimate,
        note,
    })
}

fn components(grid: &[Vec<f64>], nodes: &[usize], cap_radius: f64) -> Vec<SupportComponent> {
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if angle(&grid[nodes[a]], &grid[nodes[b]]) <= 2.0 * cap_radius {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &node) in nodes.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(node);
    }
    groups
        .into_values()
        .map(|members| {
            let n = grid[members[0]].len();
            let mut c = vec![0.0; n];
            for &m in &members {
                for (ci, g) in c.iter_mut().zip(&grid[m]) {
                    *ci += g;
                }
            }
            let norm = symmetric_norm(&c);
            let center = if norm > 0.0 { c.iter().map(|v| v / norm).collect() } else { grid[members[0]].clone() };
            let radius = members.iter().map(|&m| angle(&grid[m], &center)).fold(0.0, f64::max) + cap_radius;
            SupportComponent { nodes: members, enclosing: Cap { center, radius } }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub verdict: BoundVerdict,
    pub c_fit: f64,
    pub slope: f64,
    pub r_levels: Vec<f64>,
    /// `sup_region |P[f](rω)|` per level (minus the boundary value for finite expansions).
    pub sups: Vec<f64>,
    pub residual: bool,
}

/// Levels `r ∈ [1/2, 1)` used by [`rate_check`]: `m = 1..=20`.
pub fn rate_levels() -> Vec<f64> {
    r_levels(1..=20)
}

/// Linear decay `sup_region |P[f](rω)| ≤ C (1 − r)` away from the support.
/// `C_fit` is calibrated on the first half of the levels and checked on all;
/// for finite expansions the boundary value is subtracted first.
pub fn rate_check(
    e: &Expansion,
    region: &[Vec<f64>],
    support: &[Cap],
    rho: f64,
    levels: &[f64],
) -> Result<RateReport> {
    if levels.len() < 2 || levels.iter().any(|r| !(0.5..1.0).contains(r)) {
        return Err(Error::DomainViolation);
    }
    for w in region {
        if support.iter().any(|c| angle(w, &c.center) < c.radius + rho) {
            return Err(Error::RegionOverlapsSupport);
        }
    }
    let residual = e.tail().is_none();
    let sups: Vec<f64> = levels
        .par_iter()
        .map(|&r| {
            let mut s: f64 = 0.0;
            for w in region {
                let v = poisson_transform(e, r, w)?.value;
                let b = if residual { e.eval(w) } else { 0.0 };
                s = s.max((v - b).abs());
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = sups.iter().zip(levels).map(|(s, r)| s / (1.0 - r)).collect();
    let half = levels.len().div_ceil(2);
    let c_fit = ratios[..half].iter().copied().fold(0.0, f64::max);
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> =
        sups.iter().zip(levels).filter(|(s, _)| **s > 0.0).map(|(s, r)| ((1.0 - r).ln(), s.ln())).collect();
    let slope = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        num / den
    } else {
        f64::NAN
    };
    let verdict = BoundVerdict::new(
        InequalityId::KernelRate,
        format!("{} region points, rho={rho}, {} levels", region.len(), levels.len()),
        worst,
        c_fit,
        1e-9,
        "sup over sampled region points; C_fit = max of sup/(1-r) over the first half of the levels",
    );
    Ok(RateReport { verdict, c_fit, slope, r_levels: levels.to_vec(), sups, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForwardCheck {
    pub holds: bool,
    pub samples: usize,
    pub worst: f64,
    pub tau_effective: f64,
}

/// Whether the Abel limit vanishes (same rule as [`detect_support`]) on a
/// dense sample of the compact sub-caps of radius `0.95·radius` of `omega`.
pub fn forward_check(e: &Expansion, omega: &[Cap], levels: Option<&[f64]>, tau: f64, resolution: f64) -> Result<ForwardCheck> {
    let n = e.n;
    let tau_eff = effective_tau(e, tau);
    let levels = match levels {
        Some(l) => l.to_vec(),
        None => resolution_levels(e, resolution, tau_eff),
    };
    let levels = &levels[..];
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let grid = cubed_sphere_grid(n, resolution);
    for c in omega {
        let inner = Cap { center: c.center.clone(), radius: 0.95 * c.radius };
        pts.push(c.center.clone());
        pts.extend(grid.iter().filter(|g| inner.contains(g)).cloned());
    }
    let results: Vec<(NodeClass, f64)> = pts
        .par_iter()
        .map(|w| {
            let p = profile(e, w, levels)?;
            let last = p[p.len().saturating_sub(MAX_LEVELS)..].iter().copied().fold(0.0, f64::max);
            Ok((classify_profile(&p, tau_eff), last))
        })
        .collect::<Result<_>>()?;
    Ok(ForwardCheck {
        holds: results.iter().all(|r| r.0 == NodeClass::Vanishes),
        samples: pts.len(),
        worst: results.iter().map(|r| r.1).fold(0.0, f64::max),
        tau_effective: tau_eff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::Kind;

    fn gevrey() -> WeightSequence {
        WeightSequence::gevrey(2.0, 200).unwrap()
    }

    #[test]
    fn grid_is_permutation_invariant() {
        let g = cubed_sphere_grid(3, 0.2);
        assert_eq!(g.len(), 6 * 8 * 8);
        for p in &g {
            let q = vec![-p[2], p[0], -p[1]];
            assert!(g.contains(&q));
        }
    }

    #[test]
    fn zero_has_empty_support() {
        let e = Expansion::zero(3, Kind::Ultradistribution);
        let r = detect_support(&e, &gevrey(), None, 0.2, DEFAULT_TAU).unwrap();
        assert!(r.support_estimate.is_empty());
    }

    #[test]
    fn delta_support_is_one_cap() {
        let north = [0.0, 0.0, 1.0];
        let e = Expansion::delta(3, &north, 12).unwrap();
        let r = detect_support(&e, &gevrey(), None, 0.1, DEFAULT_TAU).unwrap();
        assert_eq!(r.support_estimate.len(), 1);
        assert!(r.covers(&north));
        for (g, c) in r.grid.iter().zip(&r.classes) {
            if 1.0 - symmetric_dot(g, &north) >= 0.05 {
                assert_eq!(*c, NodeClass::Vanishes);
            }
        }
    }

    #[test]
    fn factorial_weight_is_refused() {
        let e = Expansion::delta(3, &[0.0, 0.0, 1.0], 4).unwrap();
        let w = WeightSequence::factorial(200).unwrap();
        assert!(matches!(detect_support(&e, &w, None, 0.2, DEFAULT_TAU), Err(Error::QuasianalyticWeight)));
    }

    #[test]
    fn far_hemisphere_rate() {
        let north = [0.0, 0.0, 1.0];
        let e = Expansion::delta(3, &north, 12).unwrap();
        let region: Vec<Vec<f64>> = cubed_sphere_grid(3, 0.1).into_iter().filter(|g| g[2] <= 0.0).collect();
        let support = [Cap { center: north.to_vec(), radius: 0.2 }];
        let r = rate_check(&e, &region, &support, 0.5, &rate_levels()).unwrap();
        assert!(r.verdict.holds, "{:?}", r.verdict);
        assert!((0.95..=1.3).contains(&r.slope), "{}", r.slope);
        let near = [Cap { center: north.to_vec(), radius: 1.5 }];
        assert!(matches!(rate_check(&e, &region, &near, 0.5, &rate_levels()), Err(Error::RegionOverlapsSupport)));
    }

    #[test]
    fn forward_checks() {
        let north = [0.0, 0.0, 1.0];
        let e = Expansion::delta(3, &north, 12).unwrap();
        let south = Cap { center: vec![0.0, 0.0, -1.0], radius: 1.0 };
        assert!(forward_check(&e, &[south], None, DEFAULT_TAU, 0.1).unwrap().holds);
        let around = Cap { center: north.to_vec(), radius: 0.5 };
        assert!(!forward_check(&e, &[around], None, DEFAULT_TAU, 0.1).unwrap().holds);
    }

    #[test]
    fn two_poles_two_caps() {
        let e = Expansion::point_masses(3, &[(1.0, vec![0.0, 0.0, 1.0]), (-1.0, vec![0.0, 0.0, -1.0])], 12).unwrap();
        let r = detect_support(&e, &gevrey(), None, 0.05, DEFAULT_TAU).unwrap();
        assert_eq!(r.support_estimate.len(), 2);
        assert!(r.support_estimate.iter().all(|c| c.enclosing.radius < 0.5), "{:?}", r.support_estimate.iter().map(|c| c.enclosing.radius).collect::<Vec<_>>());
    }

    #[test]
    fn rotation_equivariance() {
        let pole = [0.6, 0.0, 0.8];
        let frame = crate::symalg::Frame::signed_permutation(&[2, 0, 1], &[-1, 1, -1]).unwrap();
        let moved = frame.apply(&pole);
        let a = detect_support(&Expansion::delta(3, &pole, 10).unwrap(), &gevrey(), None, 0.1, DEFAULT_TAU).unwrap();
        let b = detect_support(&Expansion::delta(3, &moved, 10).unwrap(), &gevrey(), None, 0.1, DEFAULT_TAU).unwrap();
        let mut pa: Vec<Vec<f64>> = a.persisting().map(|p| frame.apply(p)).collect();
        let mut pb: Vec<Vec<f64>> = b.persisting().cloned().collect();
        pa.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!(!pa.is_empty());
        assert_eq!(pa, pb);
    }
}
