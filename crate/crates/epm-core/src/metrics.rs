//! Trajectory-level raw metrics, bounded index mappings, and the composite
//! score that the leaderboard aggregates.
//!
//! Raw metrics read a finished trajectory plus per-window penalty
//! intensities; penalties travel separately because regression depth is not
//! recoverable from net action vectors. Index construction normalizes against
//! the scenario's initial resistance so cases of different severity become
//! comparable.

use crate::kernel::{TerminationType, TrajectoryState, EPS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalization constant for net displacement: a fully inward path of net
/// length r0 has component sum up to sqrt(3) * r0; 1.2 splits the difference
/// between the collinear and diagonal extremes.
pub const ALPHA_NET: f64 = 1.2;

/// Largest per-window work reachable under the scoring key: an action of
/// (2, 2, 2) perfectly aligned, |(2,2,2)| = sqrt(12). Used to normalize the
/// per-window rate metrics.
pub fn rho_max() -> f64 {
    12f64.sqrt()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trajectory has no windows; metrics are undefined")]
    EmptyTrajectory,
    #[error("got {got} penalty values for {windows} windows")]
    PenaltyCountMismatch { got: usize, windows: usize },
    #[error("penalty value {0} is outside [0, 3]")]
    PenaltyOutOfRange(f64),
    #[error("mapping spec is degenerate: x0 == x100 == {0}")]
    DegenerateSpec(f64),
    #[error("mapping spec has a non-finite anchor")]
    NonFiniteSpec,
}

/// Raw scalar observations of one finished trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub status: TerminationType,
    /// Relative deficit improvement: (r0 - rT) / r0, clamped to [-1, 1].
    pub rdi_raw: f64,
    /// Cumulative effective work.
    pub e_total: f64,
    /// Work beyond what closing the initial deficit alone would take.
    pub e_surplus: f64,
    /// Sum of all action components over all windows, sign included.
    pub s_net: f64,
    /// Work per window over all windows.
    pub rho: f64,
    /// Mean work over windows that applied a nonzero action; 0 if none did.
    pub s_proj: f64,
    /// Path length over net displacement, clamped to [1, 3].
    pub tortuosity_raw: f64,
    /// Mean alignment over windows where alignment is defined; 0 if none.
    pub mean_cos: f64,
    /// Fraction of windows with strictly positive work.
    pub r_pos: f64,
    /// Mean per-window penalty intensity, in [0, 3].
    pub r_pen: f64,
}

fn floor_denom(d: f64) -> f64 {
    d.max(EPS)
}

/// Computes the raw metric bundle for a finished trajectory.
///
/// `penalties` carries one penalty intensity per window, in window order,
/// taken from the window ratings at adjudication time.
pub fn raw_metrics(
    traj: &TrajectoryState,
    status: TerminationType,
    penalties: &[f64],
) -> Result<MetricBundle, MetricsError> {
    let windows = traj.windows();
    if windows.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    if penalties.len() != windows.len() {
        return Err(MetricsError::PenaltyCountMismatch {
            got: penalties.len(),
            windows: windows.len(),
        });
    }
    for &p in penalties {
        if !(0.0..=3.0).contains(&p) {
            return Err(MetricsError::PenaltyOutOfRange(p));
        }
    }

    let w = windows.len() as f64;
    let r0 = traj.r0();
    let rdi_raw = ((r0 - traj.resistance()) / floor_denom(r0)).clamp(-1.0, 1.0);
    let e_total = traj.e_total();
    let s_net: f64 = windows.iter().map(|o| o.action.net_sum()).sum();

    let active: Vec<f64> = windows
        .iter()
        .filter(|o| o.work.magnitude > 0.0)
        .map(|o| o.work.delta_e)
        .collect();
    let s_proj = if active.is_empty() {
        0.0
    } else {
        active.iter().sum::<f64>() / active.len() as f64
    };

    let tortuosity_raw =
        (traj.path_length() / floor_denom(traj.displacement())).clamp(1.0, 3.0);
    let positive = windows.iter().filter(|o| o.work.delta_e > 0.0).count() as f64;

    Ok(MetricBundle {
        status,
        rdi_raw,
        e_total,
        e_surplus: e_total - r0,
        s_net,
        rho: e_total / w,
        s_proj,
        tortuosity_raw,
        mean_cos: traj.mean_cos().unwrap_or(0.0),
        r_pos: positive / w,
        r_pen: penalties.iter().sum::<f64>() / w,
    })
}

/// Linear anchor mapping onto a 0..100 index. `x0` maps to 0 and `x100` to
/// 100; anchors may run in either direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingSpec {
    pub x0: f64,
    pub x100: f64,
}

impl MappingSpec {
    pub const RDI: MappingSpec = MappingSpec { x0: -1.0, x100: 1.0 };
    pub const ALIGN: MappingSpec = MappingSpec { x0: -1.0, x100: 1.0 };
    pub const TORTUOSITY: MappingSpec = MappingSpec { x0: 3.0, x100: 1.0 };
    pub const PENALTY: MappingSpec = MappingSpec { x0: 3.0, x100: 0.0 };
    pub const POSITIVE_RATE: MappingSpec = MappingSpec { x0: 0.0, x100: 1.0 };
}

/// Maps a raw value onto 0..100 through `spec`, clamping at both ends.
pub fn phi_map(x: f64, spec: &MappingSpec) -> Result<f64, MetricsError> {
    if !spec.x0.is_finite() || !spec.x100.is_finite() {
        return Err(MetricsError::NonFiniteSpec);
    }
    if spec.x0 == spec.x100 {
        return Err(MetricsError::DegenerateSpec(spec.x0));
    }
    Ok((100.0 * (x - spec.x0) / (spec.x100 - spec.x0)).clamp(0.0, 100.0))
}

/// The nine per-case indices, their three dimension means, and the composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexBundle {
    pub idx_rdi: f64,
    pub idx_etot: f64,
    pub idx_snet: f64,
    pub idx_rho: f64,
    pub idx_sproj: f64,
    pub idx_tau: f64,
    pub idx_rpos: f64,
    pub idx_align: f64,
    pub idx_pen: f64,
    pub outcome: f64,
    pub efficiency: f64,
    pub stability: f64,
    pub epm_index: f64,
}

/// Dimension weights of the composite: outcome and stability carry double the
/// weight of efficiency.
pub const WEIGHT_OUTCOME: f64 = 0.4;
pub const WEIGHT_EFFICIENCY: f64 = 0.2;
pub const WEIGHT_STABILITY: f64 = 0.4;

impl IndexBundle {
    /// Assembles dimensions and the composite from the nine indices. Also the
    /// aggregation path: feed it per-case index means to get dataset scores.
    #[allow(clippy::too_many_arguments)]
    pub fn from_indices(
        idx_rdi: f64,
        idx_etot: f64,
        idx_snet: f64,
        idx_rho: f64,
        idx_sproj: f64,
        idx_tau: f64,
        idx_rpos: f64,
        idx_align: f64,
        idx_pen: f64,
    ) -> Self {
        let outcome = (idx_rdi + idx_etot + idx_snet) / 3.0;
        let efficiency = (idx_rho + idx_sproj + idx_tau) / 3.0;
        let stability = (idx_rpos + idx_align + idx_pen) / 3.0;
        Self {
            idx_rdi,
            idx_etot,
            idx_snet,
            idx_rho,
            idx_sproj,
            idx_tau,
            idx_rpos,
            idx_align,
            idx_pen,
            outcome,
            efficiency,
            stability,
            epm_index: WEIGHT_OUTCOME * outcome
                + WEIGHT_EFFICIENCY * efficiency
                + WEIGHT_STABILITY * stability,
        }
    }

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.idx_rdi,
            self.idx_etot,
            self.idx_snet,
            self.idx_rho,
            self.idx_sproj,
            self.idx_tau,
            self.idx_rpos,
            self.idx_align,
            self.idx_pen,
        ]
    }
}

/// Builds the per-case index bundle from raw metrics and the scenario's
/// initial resistance.
///
/// Bounded metrics go through their anchor mappings; open-ended metrics are
/// normalized against r0 or the per-window work ceiling and floored at 0,
/// which lets strong recoveries exceed 100.
pub fn index_bundle(m: &MetricBundle, r0: f64) -> Result<IndexBundle, MetricsError> {
    let idx_rdi = phi_map(m.rdi_raw, &MappingSpec::RDI)?;
    let idx_align = phi_map(m.mean_cos, &MappingSpec::ALIGN)?;
    let idx_tau = phi_map(m.tortuosity_raw, &MappingSpec::TORTUOSITY)?;
    let idx_pen = phi_map(m.r_pen, &MappingSpec::PENALTY)?;
    let idx_rpos = phi_map(m.r_pos, &MappingSpec::POSITIVE_RATE)?;
    let idx_etot = 100.0 * m.e_total.max(0.0) / floor_denom(r0);
    let idx_snet = 100.0 * m.s_net.max(0.0) / floor_denom(ALPHA_NET * r0);
    let idx_rho = 100.0 * m.rho.max(0.0) / rho_max();
    let idx_sproj = 100.0 * m.s_proj.max(0.0) / rho_max();
    Ok(IndexBundle::from_indices(
        idx_rdi, idx_etot, idx_snet, idx_rho, idx_sproj, idx_tau, idx_rpos, idx_align, idx_pen,
    ))
}

/// Ablation score that drops the state geometry entirely: the summed rubric
/// points of every window.
pub fn linear_score(traj: &TrajectoryState) -> f64 {
    traj.windows().iter().map(|o| o.action.net_sum()).sum()
}

/// Ablation score that keeps effort but drops direction: total path length.
pub fn magnitude_score(traj: &TrajectoryState) -> f64 {
    traj.windows().iter().map(|o| o.work.magnitude).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ActionVector, PsychState};

    fn traj_from(p0: [f64; 3], actions: &[[f64; 3]]) -> TrajectoryState {
        let mut t =
            TrajectoryState::new(PsychState::new(p0[0], p0[1], p0[2]).unwrap()).unwrap();
        for a in actions {
            t.apply_window(ActionVector::new(a[0], a[1], a[2]).unwrap());
        }
        t
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let t = traj_from([-10.0, 0.0, 0.0], &[]);
        assert_eq!(
            raw_metrics(&t, TerminationType::MaxTurns, &[]).unwrap_err(),
            MetricsError::EmptyTrajectory
        );
    }

    #[test]
    fn penalty_slice_must_match_window_count() {
        let t = traj_from([-10.0, 0.0, 0.0], &[[1.0, 0.0, 0.0]]);
        assert_eq!(
            raw_metrics(&t, TerminationType::MaxTurns, &[0.0, 0.5]).unwrap_err(),
            MetricsError::PenaltyCountMismatch { got: 2, windows: 1 }
        );
        assert_eq!(
            raw_metrics(&t, TerminationType::MaxTurns, &[3.5]).unwrap_err(),
            MetricsError::PenaltyOutOfRange(3.5)
        );
    }

    #[test]
    fn rdi_measures_relative_improvement() {
        // From resistance 40 to 50: deterioration of a quarter of r0.
        let t = traj_from([-40.0, 0.0, 0.0], &[[-5.0, 0.0, 0.0], [-5.0, 0.0, 0.0]]);
        let m = raw_metrics(&t, TerminationType::MaxTurns, &[1.0, 1.0]).unwrap();
        assert_eq!(m.rdi_raw, -0.25);
        assert_eq!(m.r_pos, 0.0);
        assert_eq!(m.r_pen, 1.0);
    }

    #[test]
    fn rdi_clamps_at_full_improvement() {
        let t = traj_from([-1.0, 0.0, 0.0], &[[1.0, 0.0, 0.0]]);
        let m = raw_metrics(&t, TerminationType::Success, &[0.0]).unwrap();
        assert_eq!(m.rdi_raw, 1.0);
    }

    #[test]
    fn s_proj_skips_inert_windows_and_rho_does_not() {
        let t = traj_from(
            [-10.0, 0.0, 0.0],
            &[[2.0, 0.0, 0.0], [0.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
        );
        let m = raw_metrics(&t, TerminationType::MaxTurns, &[0.0; 3]).unwrap();
        assert!((m.rho - m.e_total / 3.0).abs() < 1e-15);
        assert!((m.s_proj - m.e_total / 2.0).abs() < 1e-15);
        assert!(m.rho < m.s_proj);
    }

    #[test]
    fn rho_equals_s_proj_without_inert_windows() {
        let t = traj_from([-10.0, -4.0, 0.0], &[[2.0, 1.0, 0.0], [1.0, 1.0, 0.0]]);
        let m = raw_metrics(&t, TerminationType::MaxTurns, &[0.0; 2]).unwrap();
        assert_eq!(m.rho, m.s_proj);
    }

    #[test]
    fn tortuosity_clamps_into_band() {
        // Straight path: ratio 1.
        let straight = traj_from([-10.0, 0.0, 0.0], &[[2.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let m = raw_metrics(&straight, TerminationType::MaxTurns, &[0.0; 2]).unwrap();
        assert_eq!(m.tortuosity_raw, 1.0);
        // Out and back: displacement ~0, ratio explodes, clamps to 3.
        let loop_back = traj_from([-10.0, -5.0, 0.0], &[[0.0, 2.0, 0.0], [0.0, -2.0, 0.0]]);
        let m = raw_metrics(&loop_back, TerminationType::MaxTurns, &[0.0, 1.0]).unwrap();
        assert_eq!(m.tortuosity_raw, 3.0);
    }

    #[test]
    fn all_inert_trajectory_degrades_gracefully() {
        let t = traj_from([-10.0, 0.0, 0.0], &[[0.0, 0.0, 0.0]]);
        let m = raw_metrics(&t, TerminationType::MaxTurns, &[0.0]).unwrap();
        assert_eq!(m.s_proj, 0.0);
        assert_eq!(m.mean_cos, 0.0);
        assert_eq!(m.e_total, 0.0);
        assert_eq!(m.tortuosity_raw, 1.0);
        let idx = index_bundle(&m, 10.0).unwrap();
        assert_eq!(idx.idx_etot, 0.0);
        assert_eq!(idx.idx_align, 50.0);
    }

    #[test]
    fn phi_midpoints_and_reversals() {
        assert_eq!(phi_map(0.0, &MappingSpec::RDI).unwrap(), 50.0);
        assert_eq!(phi_map(0.0, &MappingSpec::ALIGN).unwrap(), 50.0);
        assert_eq!(phi_map(2.0, &MappingSpec::TORTUOSITY).unwrap(), 50.0);
        assert_eq!(phi_map(1.5, &MappingSpec::PENALTY).unwrap(), 50.0);
        assert_eq!(phi_map(0.5, &MappingSpec::POSITIVE_RATE).unwrap(), 50.0);
        // Reversed anchors: worse raw values map to 0.
        assert_eq!(phi_map(3.0, &MappingSpec::TORTUOSITY).unwrap(), 0.0);
        assert_eq!(phi_map(1.0, &MappingSpec::TORTUOSITY).unwrap(), 100.0);
        assert_eq!(phi_map(3.0, &MappingSpec::PENALTY).unwrap(), 0.0);
        assert_eq!(phi_map(0.0, &MappingSpec::PENALTY).unwrap(), 100.0);
    }

    #[test]
    fn phi_clamps_outside_anchors() {
        assert_eq!(phi_map(-2.0, &MappingSpec::RDI).unwrap(), 0.0);
        assert_eq!(phi_map(2.0, &MappingSpec::RDI).unwrap(), 100.0);
    }

    #[test]
    fn phi_rejects_degenerate_spec() {
        let spec = MappingSpec { x0: 1.0, x100: 1.0 };
        assert_eq!(phi_map(0.5, &spec).unwrap_err(), MetricsError::DegenerateSpec(1.0));
    }

    #[test]
    fn composite_weights_and_dimensions() {
        let idx = IndexBundle::from_indices(
            99.5, 117.6, 122.0, 139.0, 128.4, 96.9, 91.5, 92.4, 98.9,
        );
        assert!((idx.outcome - 339.1 / 3.0).abs() < 1e-9);
        assert!((idx.efficiency - 364.3 / 3.0).abs() < 1e-9);
        assert!((idx.stability - 282.8 / 3.0).abs() < 1e-9);
        assert!((idx.epm_index - 107.2).abs() < 0.05);
    }

    #[test]
    fn open_ended_indices_floor_at_zero_and_exceed_hundred() {
        let t = traj_from([-3.0, 0.0, 0.0], &[[3.0, 0.0, 0.0], [-2.0, -2.0, -2.0]]);
        let m = raw_metrics(&t, TerminationType::MaxTurns, &[0.0, 1.5]).unwrap();
        // s_net = 3 - 6 = -3: floors to 0.
        let idx = index_bundle(&m, t.r0()).unwrap();
        assert_eq!(idx.idx_snet, 0.0);
        // e_total = 3 against r0 = 3: index 100 (floor leaves it untouched).
        assert!((idx.idx_etot - 100.0).abs() < 1e-9);
        // A single perfectly aligned (2,2,2) window reaches exactly 100 on rho.
        let strong = traj_from([-20.0, -20.0, -20.0], &[[2.0, 2.0, 2.0]]);
        let ms = raw_metrics(&strong, TerminationType::MaxTurns, &[0.0]).unwrap();
        let idxs = index_bundle(&ms, strong.r0()).unwrap();
        assert!((idxs.idx_rho - 100.0).abs() < 1e-9);
        assert!((idxs.idx_sproj - 100.0).abs() < 1e-9);
    }

    #[test]
    fn scale_covariance_of_normalized_indices() {
        let base = traj_from([-8.0, -6.0, 0.0], &[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0]]);
        let doubled = traj_from([-16.0, -12.0, 0.0], &[[4.0, 2.0, 0.0], [2.0, 4.0, 0.0]]);
        let mb = raw_metrics(&base, TerminationType::MaxTurns, &[0.0; 2]).unwrap();
        let md = raw_metrics(&doubled, TerminationType::MaxTurns, &[0.0; 2]).unwrap();
        let ib = index_bundle(&mb, base.r0()).unwrap();
        let id = index_bundle(&md, doubled.r0()).unwrap();
        assert!((ib.idx_etot - id.idx_etot).abs() < 1e-9);
        assert!((ib.idx_snet - id.idx_snet).abs() < 1e-9);
        assert!((ib.idx_rdi - id.idx_rdi).abs() < 1e-9);
    }

    #[test]
    fn ablation_scores_read_the_same_trajectory() {
        let t = traj_from([-10.0, -10.0, 0.0], &[[2.0, -2.0, 0.0], [1.0, 1.0, 0.0]]);
        assert_eq!(linear_score(&t), 2.0);
        let expected: f64 = 8f64.sqrt() + 2f64.sqrt();
        assert!((magnitude_score(&t) - expected).abs() < 1e-12);
    }
}
