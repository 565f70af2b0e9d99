//! Reward-saturation throttle for beam planning.
//!
//! With `W = saturation_window` and `h` the evaluation history:
//!
//! * fewer than `W` evaluations: beam on;
//! * window = last `W` evaluations, `m` = its mean, `M` = the largest such
//!   rolling-window mean seen so far;
//! * improvement = `(window.last - window.first) / |window.first|`;
//! * saturated when improvement `< eps` and `m` has not dropped more than
//!   `eps * |M|` below `M`;
//! * when saturated the beam runs only on steps divisible by
//!   `min_beam_interval`.

use super::McbsConfig;

fn relative(delta: f64, reference: f64) -> f64 {
    delta / reference.abs().max(f64::MIN_POSITIVE)
}

/// True when beam planning should run at `real_step`.
pub fn saturation_schedule(eval_history: &[f64], cfg: &McbsConfig, real_step: u64) -> bool {
    let w = cfg.saturation_window;
    if !cfg.adaptive || eval_history.len() < w {
        return true;
    }
    let window_mean = |end: usize| eval_history[end - w..end].iter().sum::<f64>() / w as f64;
    let current = window_mean(eval_history.len());
    let running_max = (w..=eval_history.len())
        .map(window_mean)
        .fold(f64::NEG_INFINITY, f64::max);

    let window = &eval_history[eval_history.len() - w..];
    let improvement = relative(window[w - 1] - window[0], window[0]);
    let dropped = relative(running_max - current, running_max) > cfg.saturation_epsilon;
    let saturated = improvement < cfg.saturation_epsilon && !dropped;

    !saturated || real_step.is_multiple_of(cfg.min_beam_interval as u64)
}
