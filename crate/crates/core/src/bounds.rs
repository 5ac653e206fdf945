//! Checks of the explicit derivative bounds for spherical harmonics and of
//! the `L²` step inequality, one instance at a time or as seeded campaigns.


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::harmonics::basis;
use crate::quadrature::make_rule;
use crate::symalg::{sup_norm_on_angle_box, sup_norm_on_sphere, to_spherical, Frame, Polynomial, RadialForm};
use crate::verdict::{BoundVerdict, InequalityId};
use crate::{Error, Result};

/// Sample counts for sampled suprema (before coordinate-ascent refinement).
pub fn sup_samples(n: usize) -> usize {
    match n {
        2 => 720,
        3 => 2500,
        _ => 6000,
    }
}

/// Relative tolerance for the quadrature-based step inequality.
pub const STEP_TOL: f64 = 1e-9;

fn abs_alpha(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// `e^{n/4−1/2} √n 2^{|α|/2} j^{|α|+n/2−1}`.
pub fn thm31a_constant(n: usize, j: usize, order: u32) -> f64 {
    let nf = n as f64;
    (nf / 4.0 - 0.5).exp() * nf.sqrt() * 2f64.powf(order as f64 / 2.0) * (j as f64).powf(order as f64 + nf / 2.0 - 1.0)
}

/// `e^{n/4−1/2} √n ((n+1)^{|α|} − 1) 2^{|α|/2} j^{|α|+n/2−1}`.
pub fn thm31b_constant(n: usize, j: usize, order: u32) -> f64 {
    let nf = n as f64;
    thm31a_constant(n, j, order) * ((nf + 1.0).powi(order as i32) - 1.0)
}

/// `e^{n(1/4+√2+3√(2+4/ε))−1/2} n^{(|α|+1)/2} (2+ε)^{|α|} j^{|α|+n/2−1} |α|!`.
pub fn thm31c_constant(n: usize, j: usize, order: u32, eps: f64) -> f64 {
    let nf = n as f64;
    let expo = nf * (0.25 + 2f64.sqrt() + 3.0 * (2.0 + 4.0 / eps).sqrt()) - 0.5;
    let fact: f64 = (1..=order).map(f64::from).product();
    expo.exp()
        * nf.powf((order as f64 + 1.0) / 2.0)
        * (2.0 + eps).powi(order as i32)
        * (j as f64).powf(order as f64 + nf / 2.0 - 1.0)
        * fact
}

/// `(j − |α| + 1)(n + 2j − 2|α|)`.
pub fn step_factor(n: usize, j: usize, order: u32) -> f64 {
    let (j, a) = (j as f64, order as f64);
    (j - a + 1.0) * (n as f64 + 2.0 * j - 2.0 * a)
}

fn check_harmonic(q: &Polynomial) -> Result<usize> {
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    match q.homogeneous_degree() {
        Some(j) if q.is_harmonic() => Ok(j as usize),
        _ => Err(Error::NotHarmonic),
    }
}

fn check_alpha(alpha: &[u32], arity: usize) -> Result<()> {
    if alpha.len() != arity {
        return Err(Error::BadMultiIndex(format!("expected {arity} entries, got {}", alpha.len())));
    }
    if alpha.iter().all(|&a| a == 0) {
        return Err(Error::BadMultiIndex("alpha must be non-zero".into()));
    }
    Ok(())
}

fn sup_on_sphere(p: &Polynomial) -> crate::symalg::SupEstimate {
    let c = p.compile::<f64>();
    sup_norm_on_sphere(|x| c.eval(x), p.dim(), sup_samples(p.dim()), true)
}

fn describe(alpha: &[u32]) -> String {
    format!("{alpha:?}")
}

fn note(n: usize) -> String {
    format!(
        "sampled sup (lower bounds) on both sides, {} quasi-uniform points + coordinate ascent; tol 0",
        sup_samples(n)
    )
}

/// `‖∂^α Q‖_∞ ≤ C_a ‖Q‖_∞` on `S^{n-1}` for a solid harmonic `Q`.
pub fn verify_thm31a(q: &Polynomial, alpha: &[u32]) -> Result<BoundVerdict> {
    let n = q.dim();
    check_alpha(alpha, n)?;
    let j = check_harmonic(q)?;
    let order = abs_alpha(alpha);
    let d = q.diff_multi(alpha);
    let lhs = if d.is_zero() { 0.0 } else { sup_on_sphere(&d).value };
    let rhs = thm31a_constant(n, j, order) * sup_on_sphere(q).value;
    Ok(BoundVerdict::new(InequalityId::Thm31a, format!("n={n}, j={j}, alpha={}", describe(alpha)), lhs, rhs, 0.0, note(n)))
}

/// `‖∂^α_θ (Y ∘ F𝔭)‖_∞ ≤ C_b ‖Y‖_∞` for the parametrization with frame `F`.
pub fn verify_thm31b(y: &Polynomial, alpha: &[u32], frame: &Frame) -> Result<BoundVerdict> {
    verify_thm31b_frames(y, alpha, std::slice::from_ref(frame))
}

/// As [`verify_thm31b`], taking the largest left side over several frames.
pub fn verify_thm31b_frames(y: &Polynomial, alpha: &[u32], frames: &[Frame]) -> Result<BoundVerdict> {
    let n = y.dim();
    check_alpha(alpha, n - 1)?;
    let j = check_harmonic(y)?;
    let order = abs_alpha(alpha);
    let mut lhs: f64 = 0.0;
    for f in frames {
        let g = to_spherical(y, f)?.diff_multi(alpha)?;
        if !g.is_zero() {
            let c = g.compile::<f64>();
            lhs = lhs.max(sup_norm_on_angle_box(|t| c.eval(t), n - 1, sup_samples(n), true).value);
        }
    }
    let rhs = thm31b_constant(n, j, order) * sup_on_sphere(y).value;
    Ok(BoundVerdict::new(
        InequalityId::Thm31b,
        format!("n={n}, j={j}, alpha={}, frames={}", describe(alpha), frames.len()),
        lhs,
        rhs,
        0.0,
        note(n),
    ))
}

/// `‖∂^α_{S^{n-1}} Y‖_∞ ≤ C_c(ε) ‖Y‖_∞`, derivative of the order-0 homogeneous extension.
pub fn verify_thm31c(y: &Polynomial, alpha: &[u32], eps: f64) -> Result<BoundVerdict> {
    let n = y.dim();
    check_alpha(alpha, n)?;
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive (got {eps})")));
    }
    let j = check_harmonic(y)?;
    let order = abs_alpha(alpha);
    let d = RadialForm::homogeneous_extension(y).diff_multi(alpha);
    let lhs = if d.is_zero() {
        0.0
    } else {
        let c = d.compile::<f64>();
        sup_norm_on_sphere(|x| c.eval_on_sphere(x), n, sup_samples(n), true).value
    };
    let rhs = thm31c_constant(n, j, order, eps) * sup_on_sphere(y).value;
    Ok(BoundVerdict::new(
        InequalityId::Thm31c,
        format!("n={n}, j={j}, alpha={}, eps={eps}", describe(alpha)),
        lhs,
        rhs,
        0.0,
        note(n),
    ))
}

/// `∫|∂^α Q|² ≤ (j−|α|+1)(n+2j−2|α|) ∫|∂^β Q|²` with exact-degree quadrature.
pub fn verify_step_l2(q: &Polynomial, alpha: &[u32], beta: &[u32]) -> Result<BoundVerdict> {
    let n = q.dim();
    check_alpha(alpha, n)?;
    if beta.len() != n || beta.iter().zip(alpha).any(|(b, a)| b > a) || abs_alpha(beta) + 1 != abs_alpha(alpha) {
        return Err(Error::BadBeta);
    }
    let j = check_harmonic(q)?;
    let order = abs_alpha(alpha);
    let rule = make_rule::<f64>(n, 2 * j)?;
    let l2 = |p: &Polynomial| {
        let c = p.compile::<f64>();
        rule.integrate(|x| {
            let v = c.eval(x);
            v * v
        })
    };
    let da = q.diff_multi(alpha);
    let lhs = if da.is_zero() { 0.0 } else { l2(&da) };
    let db = q.diff_multi(beta);
    let factor = step_factor(n, j, order);
    let rhs = if db.is_zero() { 0.0 } else { factor * l2(&db) };
    Ok(BoundVerdict::new(
        InequalityId::StepL2,
        format!("n={n}, j={j}, alpha={}, beta={}", describe(alpha), describe(beta)),
        lhs,
        rhs,
        STEP_TOL,
        format!("exact-degree quadrature (degree {}), tol {STEP_TOL:e} relative", 2 * j),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CampaignKind {
    A,
    B,
    C,
    Step,
}

impl std::str::FromStr for CampaignKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            "step" => Ok(Self::Step),
            other => Err(Error::Invalid(format!("unknown inequality {other:?} (expected a, b, c or step)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub kind: CampaignKind,
    pub dims: Vec<usize>,
    pub jmax: usize,
    pub alphamax: u32,
    pub trials: usize,
    pub seed: u64,
    pub eps_values: Vec<f64>,
    /// Denominator of the random rational coefficients `{−16..16}/denominator`.
    pub denominator: i64,
}

impl CampaignConfig {
    /// Defaults: n ∈ {2,3}; j ≤ 10; |α| ≤ 4 (a, step), ≤ 3 (b, c); ε ∈ {0.5, 1, 2}.
    pub fn new(kind: CampaignKind, trials: usize, seed: u64) -> Self {
        let (jmax, alphamax) = match kind {
            CampaignKind::A | CampaignKind::Step => (10, 4),
            CampaignKind::B => (10, 3),
            CampaignKind::C => (10, 3),
        };
        Self { kind, dims: vec![2, 3], jmax, alphamax, trials, seed, eps_values: vec![0.5, 1.0, 2.0], denominator: 8 }
    }
}

fn random_alpha<R: Rng>(rng: &mut R, arity: usize, max_order: u32) -> Vec<u32> {
    let order = rng.gen_range(1..=max_order.max(1));
    let mut a = vec![0u32; arity];
    for _ in 0..order {
        a[rng.gen_range(0..arity)] += 1;
    }
    a
}

/// A few signed-permutation frames used for the pole-independence of (b).
pub fn test_frames(n: usize) -> Vec<Frame> {
    let cyclic: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let reversed: Vec<usize> = (0..n).rev().collect();
    let mut signs = vec![1i64; n];
    signs[0] = -1;
    vec![
        Frame::identity(n),
        Frame::signed_permutation(&cyclic, &vec![1; n]).expect("permutation"),
        Frame::signed_permutation(&reversed, &signs).expect("permutation"),
    ]
}

fn run_instance(cfg: &CampaignConfig, index: usize) -> Result<BoundVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let n = cfg.dims[rng.gen_range(0..cfg.dims.len())];
    let j = rng.gen_range(1..=cfg.jmax.max(1));
    let b = basis(n, j)?;
    let q = b.random_combination(&mut rng, cfg.denominator);
    let tag = |mut v: BoundVerdict| {
        v.instance = format!("#{index} seed={} {}", cfg.seed, v.instance);
        v
    };
    match cfg.kind {
        CampaignKind::A => verify_thm31a(&q, &random_alpha(&mut rng, n, cfg.alphamax)).map(tag),
        CampaignKind::B => verify_thm31b_frames(&q, &random_alpha(&mut rng, n - 1, cfg.alphamax), &test_frames(n)).map(tag),
        CampaignKind::C => {
            let eps = cfg.eps_values[rng.gen_range(0..cfg.eps_values.len())];
            verify_thm31c(&q, &random_alpha(&mut rng, n, cfg.alphamax), eps).map(tag)
        }
        CampaignKind::Step => {
            let alpha = random_alpha(&mut rng, n, cfg.alphamax);
            let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0).collect();
            let mut beta = alpha.clone();
            beta[support[rng.gen_range(0..support.len())]] -= 1;
            verify_step_l2(&q, &alpha, &beta).map(tag)
        }
    }
}

/// Runs `trials` seeded instances in parallel; the output order is the
/// instance order and does not depend on scheduling.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<BoundVerdict>> {
    if cfg.dims.is_empty() || cfg.dims.iter().any(|&n| n < 2) {
        return Err(Error::Invalid("campaign dimensions must be ≥ 2".into()));
    }
    (0..cfg.trials).into_par_iter().map(|i| run_instance(cfg, i)).collect()
}
