//! Proximal maps of the two nonsmooth terms: soft-thresholding for the ℓ1
//! penalty and Euclidean projection onto the ℓ1 ball for the budget.

use crate::config::ValidatedConfig;

/// Componentwise shrinkage `sign(w) · max(|w| - h, 0)`.
pub fn soft_threshold(w: &[f64], h: f64) -> Vec<f64> {
    let mut out = w.to_vec();
    soft_threshold_in_place(&mut out, h);
    out
}

pub fn soft_threshold_in_place(w: &mut [f64], h: f64) {
    debug_assert!(h >= 0.0);
    if h == 0.0 {
        return;
    }
    for c in w {
        let mag = c.abs() - h;
        *c = if mag > 0.0 { mag.copysign(*c) } else { 0.0 };
    }
}

/// Prox of `step · dt/N_s · β ‖·‖₁`: soft-thresholding at `β · step · dt / N_s`.
pub fn prox_l1_penalty(w: &[f64], step: f64, cfg: &ValidatedConfig) -> Vec<f64> {
    soft_threshold(w, cfg.shrinkage(step))
}

/// Threshold `λ*` with `‖S_λ*(w)‖₁ = radius`, or `None` when `w` already lies
/// in the ball.
///
/// `λ ↦ ‖S_λ(w)‖₁` is piecewise linear and decreasing with breakpoints at the
/// magnitudes `|w_i|`. Sorting the magnitudes in decreasing order `a_1 ≥ a_2
/// ≥ …`, on the piece where exactly `k` components survive the function is
/// `S_k - kλ` with `S_k = a_1 + … + a_k`, so the root is `(S_k - radius)/k`
/// for the largest `k` with `a_k > (S_k - radius)/k`.
pub fn l1_ball_threshold(w: &[f64], radius: f64) -> Option<f64> {
    let norm: f64 = w.iter().map(|c| c.abs()).sum();
    if norm <= radius {
        return None;
    }
    let mut mags: Vec<f64> = w.iter().map(|c| c.abs()).filter(|&a| a > 0.0).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut threshold = 0.0;
    for (k, &a) in mags.iter().enumerate() {
        prefix += a;
        let candidate = (prefix - radius) / (k + 1) as f64;
        if a > candidate {
            threshold = candidate;
        } else {
            break;
        }
    }
    Some(threshold.max(0.0))
}

/// Euclidean projection onto `{z : ‖z‖₁ ≤ radius}`.
pub fn project_l1_ball(w: &[f64], radius: f64) -> Vec<f64> {
    match l1_ball_threshold(w, radius) {
        None => w.to_vec(),
        Some(t) => soft_threshold(w, t),
    }
}

pub fn project_l1_ball_in_place(w: &mut [f64], radius: f64) {
    if let Some(t) = l1_ball_threshold(w, radius) {
        soft_threshold_in_place(w, t);
    }
}
