//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rydberg::SparseOperator;

/// Normalized free-fermion level probabilities of the modes `eps`, by
/// enumerating all occupation patterns, sorted descending.
pub fn free_levels(eps: &[f64]) -> Vec<f64> {
    let z: f64 = eps.iter().map(|e| 1.0 + (-e).exp()).product();
    let mut levels: Vec<f64> = (0..1usize << eps.len())
        .map(|occ| {
            let energy: f64 = eps
                .iter()
                .enumerate()
                .filter(|(l, _)| occ >> l & 1 == 1)
                .map(|(_, e)| e)
                .sum();
            (-energy).exp() / z
        })
        .collect();
    levels.sort_by(|a, b| b.total_cmp(a));
    levels
}

/// `1/2 sum_k |p_k - q_k|` with both lists sorted descending and zero padded.
pub fn trace_distance(target: &[f64], free: &[f64]) -> f64 {
    let len = target.len().max(free.len());
    0.5 * (0..len)
        .map(|k| (target.get(k).copied().unwrap_or(0.0) - free.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

fn objective(target: &[f64], eps: &[f64]) -> f64 {
    if eps.len() > 3 {
        return trace_distance(target, &free_levels(eps));
    }
    let weights: Vec<f64> = eps.iter().map(|e| (-e).exp()).collect();
    objective_weights(target, &weights)
}

/// Same as above from the factors `exp(-eps_l)` of at most three modes, with
/// a stack buffer; the grid search calls this ~10^7 times.
fn objective_weights(target: &[f64], x: &[f64]) -> f64 {
    let mut levels = [0.0f64; 8];
    let count = 1usize << x.len();
    let z: f64 = x.iter().map(|w| 1.0 + w).product();
    for (occ, level) in levels.iter_mut().enumerate().take(count) {
        let w: f64 = (0..x.len()).filter(|l| occ >> l & 1 == 1).map(|l| x[l]).product();
        *level = w / z;
    }
    levels[..count].sort_unstable_by(|a, b| b.total_cmp(a));
    trace_distance(target, &levels[..count])
}

/// Exhaustive search over `[-12, 12]^modes` at step 0.05, then zooming
/// grids around the best grid points. The free spectrum does not depend on
/// the order of the modes, so only non-decreasing tuples are visited.
pub fn grid_distance(target: &[f64], modes: usize) -> f64 {
    const KEEP: usize = 16;
    let mut target = target.to_vec();
    target.sort_by(|a, b| b.total_cmp(a));
    let axis: Vec<f64> = (0..=480).map(|k| -12.0 + 0.05 * k as f64).collect();
    let factors: Vec<f64> = axis.iter().map(|e| (-e).exp()).collect();
    let mut weights = vec![0.0; modes];
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; modes];
    'grid: loop {
        for (w, &i) in weights.iter_mut().zip(&idx) {
            *w = factors[i];
        }
        let d = if modes <= 3 {
            objective_weights(&target, &weights)
        } else {
            objective(&target, &idx.iter().map(|&i| axis[i]).collect::<Vec<_>>())
        };
        if best.len() < KEEP || d < best[KEEP - 1].0 {
            let at = best.partition_point(|(b, _)| *b <= d);
            best.insert(at, (d, idx.iter().map(|&i| axis[i]).collect()));
            best.truncate(KEEP);
        }
        // Next non-decreasing index tuple.
        let mut k = modes;
        loop {
            if k == 0 {
                break 'grid;
            }
            k -= 1;
            if idx[k] + 1 < axis.len() {
                idx[k] += 1;
                for j in k + 1..modes {
                    idx[j] = idx[k];
                }
                break;
            }
        }
    }
    best.into_iter()
        .map(|(d, x)| zoom(&target, x, d))
        .fold(f64::INFINITY, f64::min)
}

/// Repeated local grids of 9 points per axis, shrinking fourfold each round.
fn zoom(target: &[f64], mut x: Vec<f64>, mut fx: f64) -> f64 {
    let modes = x.len();
    let mut h = 0.025;
    while h > 1e-9 {
        let centre = x.clone();
        for flat in 0..9usize.pow(modes as u32) {
            let y: Vec<f64> = (0..modes)
                .map(|i| centre[i] + h * ((flat / 9usize.pow(i as u32)) % 9) as f64 - 4.0 * h)
                .collect();
            let fy = objective(target, &y);
            if fy < fx {
                (x, fx) = (y, fy);
            }
        }
        if x == centre {
            h /= 4.0;
        }
    }
    fx
}

/// `exp(-i H t) psi` from a Taylor series on dense substeps with
/// `|H| |dt| <= 1/2`.
pub fn taylor_evolve(h: &SparseOperator, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let d = h.dim();
    let dense = h.to_dense();
    let bound = (0..d)
        .map(|r| dense[r * d..(r + 1) * d].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = ((bound * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut out = psi.to_vec();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..200 {
            let mut next = vec![Complex64::new(0.0, 0.0); d];
            for r in 0..d {
                let row = &dense[r * d..(r + 1) * d];
                let s: Complex64 = row
                    .iter()
                    .zip(&term)
                    .filter(|(x, _)| **x != 0.0)
                    .map(|(x, z)| x * z)
                    .sum();
                next[r] = s * Complex64::new(0.0, -tau / k as f64);
            }
            term = next;
            for (a, b) in acc.iter_mut().zip(&term) {
                *a += b;
            }
            if term.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-36 {
                break;
            }
        }
        out = acc;
    }
    out
}

pub fn vector_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
