use serde::Serialize;

use super::WeightSequence;
use crate::Result;

/// Exponents `k` of the witness grid `{2^k : −4 ≤ k ≤ 16}`.
pub const WITNESS_GRID: std::ops::RangeInclusive<i32> = -4..=16;
/// (M.2) and (M.2)' witnesses are searched with `A, H ≥ 1`.
const GROWTH_GRID: std::ops::RangeInclusive<i32> = 0..=16;
/// Growth of `(log p! − log M_p)/p` over the second half of the table above
/// which (M.0) is rejected, and below whose negative (NA) is accepted.
const TREND_TOL: f64 = 0.02;
/// Least-squares slope of `log m_p` against `log p` above which (M.3)' is accepted.
const M3_SLOPE_MIN: f64 = 1.02;
const CMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub a: f64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NaWitness {
    pub l: f64,
    /// Smallest `log A_L` with `p! ≤ A_L L^p M_p` for `p ≤ P_max`.
    pub log_a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionFlags {
    pub p_max: usize,
    pub m0: bool,
    pub m0_witness: Option<Witness>,
    pub m1: bool,
    pub m2prime: bool,
    pub m2prime_witness: Option<Witness>,
    pub m2: bool,
    pub m2_witness: Option<Witness>,
    pub na: bool,
    pub na_witnesses: Vec<NaWitness>,
    pub m1star: bool,
    pub m3prime: bool,
    pub m3prime_partial_sum: f64,
    pub m3prime_tail_estimate: Option<f64>,
    pub m3prime_quotient_slope: f64,
    pub m4: bool,
    pub m4_witness: Option<f64>,
    pub rudin_m4pp: bool,
    pub rudin_witness: Option<f64>,
    pub note: String,
}

fn grid(range: std::ops::RangeInclusive<i32>) -> impl Iterator<Item = f64> + Clone {
    range.map(|k| 2f64.powi(k))
}

fn le(a: f64, b: f64) -> bool {
    a <= b + CMP_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Smallest `(A, H)` (A ascending, then H ascending) on the grid with
/// `excess[s] ≤ log A + s log H` for every `s`.
fn search_pair(excess: &[f64], range: std::ops::RangeInclusive<i32>) -> Option<Witness> {
    for a in grid(range.clone()) {
        let la = a.ln();
        if !le(excess[0], la) {
            continue;
        }
        let need = excess
            .iter()
            .enumerate()
            .skip(1)
            .map(|(s, e)| (e - la) / s as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        if let Some(h) = grid(range.clone()).find(|h| excess.iter().enumerate().all(|(s, e)| le(*e, la + s as f64 * h.ln())))
        {
            debug_assert!(h.ln() >= need - 1e-9);
            return Some(Witness { a, h });
        }
    }
    None
}

/// Smallest `L` on the grid with `excess[p] ≤ (p + 1) log L`.
fn search_single(excess: &[f64], weight: impl Fn(usize) -> f64) -> Option<f64> {
    grid(WITNESS_GRID).find(|l| excess.iter().enumerate().all(|(p, e)| le(*e, weight(p) * l.ln())))
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Evaluates every structural condition up to the cutoff.
pub fn check_conditions(seq: &WeightSequence) -> Result<ConditionFlags> {
    let p_max = seq.p_max;
    let half = p_max / 2;
    let l = seq.log_values();

    // (M.0): log p! − log M_p ≤ log A_0 + p log H_0, plus a trend test on g_p
    let e0: Vec<f64> = (0..=p_max).map(|p| seq.ln_factorial(p) - l[p]).collect();
    let g = |p: usize| e0[p] / p as f64;
    let g_trend = g(p_max) - g(half);
    let m0_witness = search_pair(&e0, WITNESS_GRID);
    let m0 = m0_witness.is_some() && g_trend <= TREND_TOL;

    let m1 = seq.is_log_convex();
    let m1star = seq.is_log_convex_star();

    // (M.2)': log m_{s+1} ≤ log A + s log H
    let e2p: Vec<f64> = (0..p_max).map(|s| seq.log_quotient(s + 1)).collect();
    let m2prime_witness = search_pair(&e2p, GROWTH_GRID);

    // (M.2): max_{p+q=s} log M_s − log M_p − log M_q ≤ log A + s log H
    let e2: Vec<f64> = (0..=p_max)
        .map(|s| (0..=s / 2).map(|p| l[s] - l[p] - l[s - p]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let m2_witness = search_pair(&e2, GROWTH_GRID);

    // (NA): p! ≤ A_L L^p M_p for every L
    let na = g_trend < -TREND_TOL;
    let na_witnesses = (-4..=4)
        .map(|k| {
            let lv = 2f64.powi(k);
            let log_a = e0.iter().enumerate().map(|(p, e)| e - p as f64 * lv.ln()).fold(f64::NEG_INFINITY, f64::max);
            NaWitness { l: lv, log_a }
        })
        .collect();

    // (M.3)': Σ M_{p−1}/M_p
    let partial: f64 = crate::scalar::compensated_sum((1..=p_max).map(|p| (-seq.log_quotient(p)).exp()));
    let (xs, ys): (Vec<f64>, Vec<f64>) = (half.max(1)..=p_max).map(|p| ((p as f64).ln(), seq.log_quotient(p))).unzip();
    let slope = ls_slope(&xs, &ys);
    let m3prime = slope > M3_SLOPE_MIN;
    let m3prime_tail_estimate =
        m3prime.then(|| p_max as f64 * (-seq.log_quotient(p_max)).exp() / (slope - 1.0));

    // (M.4): M_p ≤ L^{p+1} p! M*_p, with M*_p the log-convex minorant of M_p/p!
    let star = seq.log_star();
    let hull = seq.log_star_hull();
    let e4: Vec<f64> = star.iter().zip(&hull).map(|(s, h)| s - h).collect();
    let e4_trend = e4[p_max] / (p_max + 1) as f64 - e4[half] / (half + 1) as f64;
    let m4_witness = search_single(&e4, |p| (p + 1) as f64);
    let m4 = m4_witness.is_some() && e4_trend <= TREND_TOL;

    // Rudin: max_{q ≤ p} (M_q/q!)^{1/q} ≤ A (M_p/p!)^{1/p}
    let mut running = f64::NEG_INFINITY;
    let mut er = vec![0.0; p_max + 1];
    for p in 1..=p_max {
        let r = star[p] / p as f64;
        running = running.max(r);
        er[p] = running - r;
    }
    let rudin_witness = search_single(&er, |_| 1.0);
    let rudin = rudin_witness.is_some() && er[p_max] - er[half] <= TREND_TOL;

    Ok(ConditionFlags {
        p_max,
        m0,
        m0_witness,
        m1,
        m2prime: m2prime_witness.is_some(),
        m2prime_witness,
        m2: m2_witness.is_some(),
        m2_witness,
        na,
        na_witnesses,
        m1star,
        m3prime,
        m3prime_partial_sum: partial,
        m3prime_tail_estimate,
        m3prime_quotient_slope: slope,
        m4,
        m4_witness,
        rudin_m4pp: rudin,
        rudin_witness,
        note: format!(
            "verified to cutoff P_max={p_max}; witnesses from {{2^k: -4<=k<=16}} ((M.2), (M.2)' with k>=0); \
             asymptotic conditions use trends over p in [{half}, {p_max}]"
        ),
    })
}
