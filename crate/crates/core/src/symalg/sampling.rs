use std::f64::consts::PI;

use super::trig::param_point;

/// A sampled supremum of `|f|`. It is a lower bound on the true supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    /// Maximizing point (on the sphere, or in angle space for box sampling).
    pub argmax: Vec<f64>,
    /// Angles of the maximizer in the spherical parametrization.
    pub argmax_angles: Vec<f64>,
    pub samples: usize,
}

/// Deterministic quasi-uniform angle tuples covering `S^{n-1}` through the
/// spherical parametrization: uniform on the circle for `n = 2`, a
/// Fibonacci lattice for `n = 3`, and a product grid for `n ≥ 4`.
pub fn sphere_angle_samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(n >= 2);
    let count = count.max(1);
    match n {
        2 => (0..count).map(|i| vec![2.0 * PI * i as f64 / count as f64]).collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let phi = (golden * i as f64).rem_euclid(2.0 * PI);
                    vec![z.clamp(-1.0, 1.0).acos(), phi]
                })
                .collect()
        }
        _ => {
            let m = n - 1;
            let per = ((count as f64).powf(1.0 / m as f64).ceil() as usize).max(2);
            let mut out = Vec::new();
            let mut idx = vec![0usize; m];
            loop {
                let theta: Vec<f64> = idx
                    .iter()
                    .enumerate()
                    .map(|(d, &k)| {
                        if d + 1 == m {
                            2.0 * PI * k as f64 / per as f64
                        } else {
                            PI * (k as f64 + 0.5) / per as f64
                        }
                    })
                    .collect();
                out.push(theta);
                let mut d = 0;
                loop {
                    if d == m {
                        return out;
                    }
                    idx[d] += 1;
                    if idx[d] < per {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
            }
        }
    }
}

/// Points on `S^{n-1}` matching [`sphere_angle_samples`].
pub fn sphere_samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    sphere_angle_samples(n, count).iter().map(|t| param_point(t)).collect()
}

/// Uniform grid on the angle box `[0, 2π)^m`.
pub fn angle_box_samples(m: usize, count: usize) -> Vec<Vec<f64>> {
    let per = ((count.max(1) as f64).powf(1.0 / m as f64).ceil() as usize).max(2);
    let mut out = Vec::new();
    let mut idx = vec![0usize; m];
    loop {
        out.push(idx.iter().map(|&k| 2.0 * PI * k as f64 / per as f64).collect());
        let mut d = 0;
        loop {
            if d == m {
                return out;
            }
            idx[d] += 1;
            if idx[d] < per {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn ascend<F: Fn(&[f64]) -> f64>(g: &F, start: &[f64], step0: f64) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut best = g(&x);
    let mut step = step0;
    let mut iters = 0;
    while step > 1e-10 && iters < 400 {
        iters += 1;
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] += dir * step;
                let v = g(&y);
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, best)
}

fn sup_over<F: Fn(&[f64]) -> f64>(g: &F, starts: &[Vec<f64>], refine: bool, spacing: f64) -> (Vec<f64>, f64) {
    let mut scored: Vec<(f64, usize)> = starts.iter().enumerate().map(|(i, t)| (g(t), i)).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let (mut best_v, best_i) = scored.first().copied().unwrap_or((0.0, 0));
    let mut best_t = starts.get(best_i).cloned().unwrap_or_default();
    if refine {
        for &(_, i) in scored.iter().take(8) {
            let (t, v) = ascend(g, &starts[i], spacing);
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
    }
    (best_t, best_v)
}

/// Sampled `sup_{ω ∈ S^{n-1}} |f(ω)|`, optionally refined by coordinate
/// ascent in the angle parametrization.
pub fn sup_norm_on_sphere<F: Fn(&[f64]) -> f64>(f: F, n: usize, samples: usize, refine: bool) -> SupEstimate {
    let starts = sphere_angle_samples(n, samples);
    let g = |t: &[f64]| f(&param_point(t)).abs();
    let spacing = (4.0 * PI / samples.max(1) as f64).powf(1.0 / (n - 1) as f64);
    let (t, v) = sup_over(&g, &starts, refine, spacing);
    SupEstimate { value: v, argmax: param_point(&t), argmax_angles: t, samples: starts.len() }
}

/// Sampled `sup |g(θ)|` over the angle box `[0, 2π)^m`.
pub fn sup_norm_on_angle_box<F: Fn(&[f64]) -> f64>(f: F, m: usize, samples: usize, refine: bool) -> SupEstimate {
    let starts = angle_box_samples(m, samples);
    let g = |t: &[f64]| f(t).abs();
    let per = (starts.len() as f64).powf(1.0 / m as f64);
    let (t, v) = sup_over(&g, &starts, refine, 2.0 * PI / per);
    SupEstimate { value: v, argmax: t.clone(), argmax_angles: t, samples: starts.len() }
}
