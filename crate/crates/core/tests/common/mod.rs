//! Reference implementations used as test oracles. Nothing here calls the
//! library's cost, projection or solver code; episodes are only read.

#![allow(dead_code)]

use fairobd::{Episode, FeasibleSet};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn norm(y: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        y.iter().fold(0.0, |a, v| a.max(v.abs()))
    } else if p == 1.0 {
        y.iter().map(|v| v.abs()).sum()
    } else {
        y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// `(m/2)‖x − c‖² + b·x + r`.
pub fn hitting(ep: &Episode, t: usize, x: &[f64]) -> f64 {
    let h = &ep.step(t).hitting;
    let mut value = h.offset;
    for i in 0..x.len() {
        let d = x[i] - h.center[i];
        value += 0.5 * h.curvature * d * d + h.linear[i] * x[i];
    }
    value
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Average-normalized episode cost.
pub fn episode_cost(ep: &Episode, traj: &[Vec<f64>]) -> f64 {
    let t_len = traj.len() as f64;
    let beta = ep.switching_weight();
    let mut prev: Vec<f64> = ep.x0().iter().copied().collect();
    let mut sum = 0.0;
    let mut avg = vec![0.0; ep.fairness_dim()];
    for (t, x) in traj.iter().enumerate() {
        sum += hitting(ep, t, x) + 0.5 * beta * sq_dist(x, &prev);
        for (a, v) in avg.iter_mut().zip(mat_vec(&ep.step(t).fairness_matrix, x)) {
            *a += v / t_len;
        }
        prev = x.clone();
    }
    sum / t_len + ep.fairness().weight * norm(&avg, ep.fairness().p)
}

pub fn to_vecs(traj: &[DVector<f64>]) -> Vec<Vec<f64>> {
    traj.iter().map(|x| x.iter().copied().collect()).collect()
}

/// Maps `θ ∈ [0, 1]^k` onto the set, where `k` is [`set_params`].
pub fn set_point(set: &FeasibleSet, theta: &[f64]) -> Vec<f64> {
    match set {
        FeasibleSet::Box { lower, upper } => (0..lower.len())
            .map(|i| lower[i] + theta[i] * (upper[i] - lower[i]))
            .collect(),
        FeasibleSet::CappedSimplex { total, caps } => {
            assert_eq!(caps.len(), 2, "grid oracle handles two-coordinate simplices only");
            let lo = (total - caps[1]).max(0.0);
            let hi = caps[0].min(*total);
            let x0 = lo + theta[0] * (hi - lo);
            vec![x0, total - x0]
        }
    }
}

pub fn set_params(set: &FeasibleSet) -> usize {
    match set {
        FeasibleSet::Box { lower, .. } => lower.len(),
        FeasibleSet::CappedSimplex { .. } => 1,
    }
}

/// Dense grid over `[0, 1]^dim` followed by repeated local zooms.
pub fn grid_minimize(dim: usize, f: impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    if dim == 0 {
        return (f(&[]), Vec::new());
    }
    let coarse = match dim {
        1 => 2001,
        2 => 201,
        3 => 41,
        _ => 17,
    };
    let mut best = (f64::INFINITY, vec![0.0; dim]);
    let mut theta = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    let h = 1.0 / (coarse - 1) as f64;
    loop {
        for k in 0..dim {
            theta[k] = idx[k] as f64 * h;
        }
        let v = f(&theta);
        if v < best.0 {
            best = (v, theta.clone());
        }
        let mut k = 0;
        while k < dim {
            idx[k] += 1;
            if idx[k] < coarse {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    let points = 9usize;
    let mut half = 2.0 * h;
    for _ in 0..30 {
        let center = best.1.clone();
        let mut idx = vec![0usize; dim];
        loop {
            for k in 0..dim {
                let offset = -half + 2.0 * half * idx[k] as f64 / (points - 1) as f64;
                theta[k] = (center[k] + offset).clamp(0.0, 1.0);
            }
            let v = f(&theta);
            if v < best.0 {
                best = (v, theta.clone());
            }
            let mut k = 0;
            while k < dim {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        half *= 0.5;
    }
    best
}

/// Offline optimum of a small episode by brute force over all rounds jointly.
pub fn brute_force_offline(ep: &Episode) -> f64 {
    let sizes: Vec<usize> = ep.action_sets().iter().map(set_params).collect();
    let dim: usize = sizes.iter().sum();
    grid_minimize(dim, |theta| {
        let mut offset = 0;
        let traj: Vec<Vec<f64>> = ep
            .action_sets()
            .iter()
            .zip(&sizes)
            .map(|(set, &k)| {
                let x = set_point(set, &theta[offset..offset + k]);
                offset += k;
                x
            })
            .collect();
        episode_cost(ep, &traj)
    })
    .0
}

/// Minimum over the set of `objective`, by grid.
pub fn brute_force_over(set: &FeasibleSet, objective: impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let (value, theta) = grid_minimize(set_params(set), |th| objective(&set_point(set, th)));
    (value, set_point(set, &theta))
}

/// Minimum of `w‖z‖_p − κ·z` over a box, by grid.
pub fn brute_force_budget(weight: f64, p: f64, kappa: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let set = FeasibleSet::Box {
        lower: DVector::from_row_slice(lower),
        upper: DVector::from_row_slice(upper),
    };
    brute_force_over(&set, |z| weight * norm(z, p) - kappa.iter().zip(z).map(|(k, v)| k * v).sum::<f64>()).0
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// `Σ_k ‖Σ_{t ∈ frame k} A_t x_t − (R/T) Σ_t A_t x_t‖₂`.
pub fn frame_deviation(ep: &Episode, traj: &[Vec<f64>], frame: usize) -> f64 {
    let vectors: Vec<Vec<f64>> = traj
        .iter()
        .enumerate()
        .map(|(t, x)| mat_vec(&ep.step(t).fairness_matrix, x))
        .collect();
    let m = ep.fairness_dim();
    let scale = frame as f64 / traj.len() as f64;
    let mut total = vec![0.0; m];
    for v in &vectors {
        for i in 0..m {
            total[i] += v[i];
        }
    }
    vectors
        .chunks(frame)
        .map(|chunk| {
            let diff: Vec<f64> = (0..m)
                .map(|i| chunk.iter().map(|v| v[i]).sum::<f64>() - scale * total[i])
                .collect();
            norm(&diff, 2.0)
        })
        .sum()
}

/// Bregman divergence of `½‖·‖²` or of `Σ κ ln κ`.
pub fn bregman_l2(x: &[f64], y: &[f64]) -> f64 {
    0.5 * sq_dist(x, y)
}

pub fn bregman_entropy(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * (a / b).ln() - a + b).sum()
}
