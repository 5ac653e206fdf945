use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar used by the numeric (non-exact) parts of the crate.
///
/// Exact work is done over `BigRational`; everything that touches the
/// sphere numerically (evaluation, quadrature, kernels) is generic over this.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Send + Sync + 'static
{
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Kahan–Babuška (Neumaier) compensated sum.
pub fn compensated_sum<S: Real, I: IntoIterator<Item = S>>(values: I) -> S {
    let mut sum = S::zero();
    let mut c = S::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Dot product whose result does not depend on the order of the coordinates:
/// the products are sorted before being summed. Signed coordinate
/// permutations of both arguments therefore give bit-identical results.
pub fn symmetric_dot<S: Real>(a: &[S], b: &[S]) -> S {
    let mut terms: Vec<S> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
    terms.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    terms.into_iter().fold(S::zero(), |acc, t| acc + t)
}

/// Euclidean norm computed in the same order-independent way as [`symmetric_dot`].
pub fn symmetric_norm<S: Real>(a: &[S]) -> S {
    symmetric_dot(a, a).sqrt()
}

/// `ln Γ(k/2)` for a positive integer `k`, via the half-integer recursion.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k > 0, "Gamma has a pole at zero");
    // Γ(1) = 1, Γ(1/2) = sqrt(pi)
    let mut acc = if k.is_multiple_of(2) {
        0.0
    } else {
        0.5 * std::f64::consts::PI.ln()
    };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = f64::from(k) / 2.0;
    while x < target - 1e-9 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// `ln p!` for `p = 0..=max`, accumulated.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for p in 1..=max {
        acc += (p as f64).ln();
        out.push(acc);
    }
    out
}
