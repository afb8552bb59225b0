use serde::{Deserialize, Serialize};

use super::runner::{distance, Failure, SimTrace};

/// Scalar summary of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// RMS distance to the reference over all samples.
    pub rms_tracking_error: f64,
    pub max_tracking_error: f64,
    /// Distance to the reference at the last sample.
    pub terminal_error: f64,
    /// Earliest time after which the error stays below `tolerance`.
    #[serde(rename = "convergence_time_s")]
    pub convergence_time: Option<f64>,
    pub tolerance: f64,
    #[serde(rename = "max_l_c_j")]
    pub max_l_c: Option<f64>,
    #[serde(rename = "max_ee_speed_m_per_s")]
    pub max_ee_speed: f64,
    pub min_conditioning: f64,
    #[serde(rename = "min_obstacle_distance_m")]
    pub min_obstacle_distance: Option<f64>,
    /// Joint speed norm at the last sample.
    pub final_joint_speed: f64,
    /// Samples at which the repulsive force hit its cap.
    pub capped_samples: usize,
    pub failure: Option<Failure>,
}

fn fold_max(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

fn fold_min(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
}

/// Reduces a trace. A failed run never counts as converged.
pub fn metrics(trace: &SimTrace, tolerance: f64) -> Metrics {
    let errors: Vec<f64> = trace
        .rows
        .iter()
        .map(|r| r.tracking_error(trace.space))
        .collect();
    let n = errors.len().max(1) as f64;
    let rms = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let terminal = errors.last().copied().unwrap_or(f64::NAN);
    let convergence_time = if trace.failed() || !(terminal < tolerance) {
        None
    } else {
        let first_settled = errors
            .iter()
            .rposition(|e| !(*e < tolerance))
            .map_or(0, |i| i + 1);
        Some(trace.rows[first_settled].t)
    };
    Metrics {
        rms_tracking_error: rms,
        max_tracking_error: fold_max(errors.iter().copied()).unwrap_or(f64::NAN),
        terminal_error: terminal,
        convergence_time,
        tolerance,
        max_l_c: fold_max(trace.rows.iter().filter_map(|r| r.l_c)),
        max_ee_speed: fold_max(trace.rows.iter().map(|r| distance(&r.pdot, &[0.0, 0.0])))
            .unwrap_or(0.0),
        min_conditioning: fold_min(trace.rows.iter().map(|r| r.conditioning)).unwrap_or(f64::NAN),
        min_obstacle_distance: fold_min(trace.rows.iter().filter_map(|r| r.obstacle_distance)),
        final_joint_speed: trace.last().map_or(f64::NAN, |r| {
            r.qdot.iter().map(|v| v * v).sum::<f64>().sqrt()
        }),
        capped_samples: trace.rows.iter().filter(|r| r.repulsion_capped).count(),
        failure: trace.failure.clone(),
    }
}
