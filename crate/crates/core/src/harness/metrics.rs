use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "real_step,episodes_done,train_return_last,eval_return_mean,eval_return_std,rollout_env_steps_cum,beam_on_fraction,wall_seconds";

/// One evaluation point of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub real_step: u64,
    pub episodes_done: u64,
    pub train_return_last: f64,
    pub eval_return_mean: f64,
    pub eval_return_std: f64,
    pub rollout_env_steps_cum: u64,
    pub beam_on_fraction: f64,
    pub wall_seconds: f64,
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{}",
            self.real_step,
            self.episodes_done,
            self.train_return_last,
            self.eval_return_mean,
            self.eval_return_std,
            self.rollout_env_steps_cum,
            self.beam_on_fraction,
            self.wall_seconds
        );
        s
    }

    pub fn parse_csv_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 8 {
            return Err(Error::shape("metrics row fields", 8, fields.len()));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad metrics field `{}`", fields[i])))
        };
        let u = |i: usize| -> Result<u64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad metrics field `{}`", fields[i])))
        };
        Ok(MetricsRow {
            real_step: u(0)?,
            episodes_done: u(1)?,
            train_return_last: f(2)?,
            eval_return_mean: f(3)?,
            eval_return_std: f(4)?,
            rollout_env_steps_cum: u(5)?,
            beam_on_fraction: f(6)?,
            wall_seconds: f(7)?,
        })
    }
}

/// Reads a metrics CSV written by [`crate::harness::train`].
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == METRICS_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "{}: unexpected header {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(MetricsRow::parse_csv_line)
        .collect()
}

/// First step at which the evaluation mean recovers `fraction` of the
/// run's best improvement over `baseline`.
///
/// Returns `None` when the run never improves on the baseline.
pub fn steps_to_fraction(rows: &[MetricsRow], fraction: f64, baseline: f64) -> Option<u64> {
    let best = rows
        .iter()
        .map(|r| r.eval_return_mean)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let gain = best - baseline;
    if gain.is_nan() || gain <= 0.0 || !(fraction > 0.0 && fraction <= 1.0) {
        return None;
    }
    let target = baseline + fraction * gain;
    rows.iter()
        .find(|r| r.eval_return_mean >= target)
        .map(|r| r.real_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(means: &[f64]) -> Vec<MetricsRow> {
        means
            .iter()
            .enumerate()
            .map(|(i, &m)| MetricsRow {
                real_step: (i as u64 + 1) * 100,
                episodes_done: 0,
                train_return_last: 0.0,
                eval_return_mean: m,
                eval_return_std: 0.0,
                rollout_env_steps_cum: 0,
                beam_on_fraction: 0.0,
                wall_seconds: 0.0,
            })
            .collect()
    }

    #[test]
    fn monotone_curve_full_fraction_is_last_step() {
        assert_eq!(steps_to_fraction(&curve(&[-9.0, -5.0, -2.0]), 1.0, -10.0), Some(300));
    }

    #[test]
    fn flat_curve_never_reaches() {
        assert_eq!(steps_to_fraction(&curve(&[-10.0; 4]), 0.5, -10.0), None);
    }

    #[test]
    fn shifted_fraction_hand_case() {
        let rows = curve(&[-100.0, -55.0, -19.0, -10.0]);
        assert_eq!(steps_to_fraction(&rows, 0.9, -100.0), Some(300));
    }

    #[test]
    fn csv_line_round_trip() {
        let row = MetricsRow {
            real_step: 5,
            episodes_done: 2,
            train_return_last: -1.25,
            eval_return_mean: -0.1,
            eval_return_std: 0.3333333333333333,
            rollout_env_steps_cum: 90,
            beam_on_fraction: 0.5,
            wall_seconds: 0.0,
        };
        assert_eq!(MetricsRow::parse_csv_line(&row.to_csv_line()).unwrap(), row);
        assert_eq!(METRICS_HEADER.split(',').count(), 8);
    }
}
