//! State-space kernel: latent deficit vectors, per-window effective work,
//! trajectory accumulation, and the episode success/failure gate.
//!
//! Conventions that everything downstream relies on:
//! - deficits are stored as non-positive components; the origin is equilibrium
//! - the ideal direction always points from the current state toward the origin
//! - work is computed against the pre-update state from the unclamped action
//! - the state update clamps each component at zero (no overshoot past recovery)

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Numerical floor applied to denominators derived from resistance or
/// displacement. Applied as `max(denom, EPS)` so it is inert whenever the
/// denominator is healthy, which keeps ratio metrics exactly scale-covariant.
pub const EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("component for {axis:?} is not finite")]
    NonFinite { axis: AxisId },
    #[error("component for {axis:?} is {value}; deficits are stored as values <= 0")]
    PositiveDeficit { axis: AxisId, value: f64 },
    #[error("state is at equilibrium; the ideal direction is undefined")]
    ZeroResistance,
    #[error("initial state is at equilibrium; a trajectory needs r0 > 0")]
    DegenerateInitialState,
    #[error("invalid gate config: {0}")]
    InvalidGate(String),
}

/// The three latent axes. The proactive axis carries what persona material
/// labels "motivational" support needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisId {
    Cognitive,
    Affective,
    Proactive,
}

impl AxisId {
    pub const ALL: [AxisId; 3] = [AxisId::Cognitive, AxisId::Affective, AxisId::Proactive];

    pub fn short(self) -> &'static str {
        match self {
            AxisId::Cognitive => "C",
            AxisId::Affective => "A",
            AxisId::Proactive => "P",
        }
    }
}

impl std::fmt::Display for AxisId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short())
    }
}

/// Latent deficit state. Serialized as `[c, a, p]`; deserialization re-checks
/// the non-positivity invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct PsychState {
    c: f64,
    a: f64,
    p: f64,
}

impl PsychState {
    pub fn new(c: f64, a: f64, p: f64) -> Result<Self, KernelError> {
        for (axis, value) in AxisId::ALL.into_iter().zip([c, a, p]) {
            if !value.is_finite() {
                return Err(KernelError::NonFinite { axis });
            }
            if value > 0.0 {
                return Err(KernelError::PositiveDeficit { axis, value });
            }
        }
        Ok(Self { c, a, p })
    }

    pub fn equilibrium() -> Self {
        Self { c: 0.0, a: 0.0, p: 0.0 }
    }

    pub fn component(&self, axis: AxisId) -> f64 {
        match axis {
            AxisId::Cognitive => self.c,
            AxisId::Affective => self.a,
            AxisId::Proactive => self.p,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c, self.a, self.p]
    }

    /// Distance from equilibrium.
    pub fn resistance(&self) -> f64 {
        (self.c * self.c + self.a * self.a + self.p * self.p).sqrt()
    }

    pub fn is_equilibrium(&self) -> bool {
        self.resistance() == 0.0
    }

    /// Unit vector from the current state toward equilibrium. Undefined at
    /// the origin itself.
    pub fn ideal_direction(&self) -> Result<[f64; 3], KernelError> {
        let r = self.resistance();
        if r == 0.0 {
            return Err(KernelError::ZeroResistance);
        }
        Ok([-self.c / r, -self.a / r, -self.p / r])
    }

    /// Applies a displacement, clamping each component at zero so recovery
    /// never overshoots into positive territory.
    pub fn displaced(&self, v: &ActionVector) -> Self {
        Self {
            c: (self.c + v.dc).min(0.0),
            a: (self.a + v.da).min(0.0),
            p: (self.p + v.dp).min(0.0),
        }
    }

    pub fn distance_to(&self, other: &PsychState) -> f64 {
        let dc = self.c - other.c;
        let da = self.a - other.a;
        let dp = self.p - other.p;
        (dc * dc + da * da + dp * dp).sqrt()
    }
}

impl TryFrom<[f64; 3]> for PsychState {
    type Error = KernelError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<PsychState> for [f64; 3] {
    fn from(s: PsychState) -> Self {
        s.as_array()
    }
}

/// Adjudicated per-window state change, one component per axis.
///
/// Components assembled from the progression/regression key always land in
/// [`ActionVector::RUBRIC_MIN`], [`ActionVector::RUBRIC_MAX`]; the type itself
/// only requires finite values so that scaled and synthetic vectors remain
/// expressible in analysis code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ActionVector {
    dc: f64,
    da: f64,
    dp: f64,
}

impl ActionVector {
    /// Most negative per-axis value reachable from the scoring key.
    pub const RUBRIC_MIN: f64 = -5.0;
    /// Most positive per-axis value reachable from the scoring key.
    pub const RUBRIC_MAX: f64 = 3.0;

    pub fn new(dc: f64, da: f64, dp: f64) -> Result<Self, KernelError> {
        for (axis, value) in AxisId::ALL.into_iter().zip([dc, da, dp]) {
            if !value.is_finite() {
                return Err(KernelError::NonFinite { axis });
            }
        }
        Ok(Self { dc, da, dp })
    }

    pub fn zero() -> Self {
        Self { dc: 0.0, da: 0.0, dp: 0.0 }
    }

    pub fn component(&self, axis: AxisId) -> f64 {
        match axis {
            AxisId::Cognitive => self.dc,
            AxisId::Affective => self.da,
            AxisId::Proactive => self.dp,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.dc, self.da, self.dp]
    }

    pub fn magnitude(&self) -> f64 {
        (self.dc * self.dc + self.da * self.da + self.dp * self.dp).sqrt()
    }

    /// Sum of the raw components, sign included.
    pub fn net_sum(&self) -> f64 {
        self.dc + self.da + self.dp
    }

    pub fn is_within_rubric_range(&self) -> bool {
        [self.dc, self.da, self.dp]
            .into_iter()
            .all(|x| (Self::RUBRIC_MIN..=Self::RUBRIC_MAX).contains(&x))
    }
}

impl TryFrom<[f64; 3]> for ActionVector {
    type Error = KernelError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<ActionVector> for [f64; 3] {
    fn from(v: ActionVector) -> Self {
        v.as_array()
    }
}

/// Outcome of projecting one window's action onto the healing direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveWork {
    /// Signed projection of the action onto the unit ideal direction.
    pub delta_e: f64,
    /// Alignment with the ideal direction. `None` when the action has zero
    /// magnitude or the pre-window state sat at equilibrium.
    pub cos_theta: Option<f64>,
    /// Euclidean length of the action.
    pub magnitude: f64,
}

impl EffectiveWork {
    fn inert(magnitude: f64) -> Self {
        Self { delta_e: 0.0, cos_theta: None, magnitude }
    }
}

/// Projection of an arbitrary displacement onto the unit healing direction of
/// `state`. The general form behind [`effective_work`]; kept public so
/// analysis and fuzzing code can scale displacements freely.
///
/// The dot product is taken against the raw inward vector and divided by the
/// resistance once at the end: a single rounding step, and displacements that
/// are orthogonal in exact arithmetic project to exactly zero.
pub fn projected_work(v: [f64; 3], state: &PsychState) -> Result<EffectiveWork, KernelError> {
    let r = state.resistance();
    if r == 0.0 {
        return Err(KernelError::ZeroResistance);
    }
    let magnitude = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if magnitude == 0.0 {
        return Ok(EffectiveWork::inert(0.0));
    }
    let s = state.as_array();
    let delta_e = (-s[0] * v[0] - s[1] * v[1] - s[2] * v[2]) / r;
    let cos_theta = (delta_e / magnitude).clamp(-1.0, 1.0);
    Ok(EffectiveWork { delta_e, cos_theta: Some(cos_theta), magnitude })
}

/// Effective work of an adjudicated action against the current state.
pub fn effective_work(v: &ActionVector, state: &PsychState) -> Result<EffectiveWork, KernelError> {
    projected_work(v.as_array(), state)
}

/// One applied window: the action and the work it performed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowOutcome {
    pub action: ActionVector,
    pub work: EffectiveWork,
}

/// Episode-long accumulator over adjudication windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    initial: PsychState,
    current: PsychState,
    r0: f64,
    e_total: f64,
    path_length: f64,
    windows: Vec<WindowOutcome>,
}

impl TrajectoryState {
    pub fn new(initial: PsychState) -> Result<Self, KernelError> {
        let r0 = initial.resistance();
        if r0 == 0.0 {
            return Err(KernelError::DegenerateInitialState);
        }
        Ok(Self {
            initial,
            current: initial,
            r0,
            e_total: 0.0,
            path_length: 0.0,
            windows: Vec::new(),
        })
    }

    /// Applies one adjudicated window. Work is taken against the pre-update
    /// state; a window that starts at equilibrium performs no directed work
    /// because no healing direction exists there.
    pub fn apply_window(&mut self, action: ActionVector) -> WindowOutcome {
        let work = if self.current.is_equilibrium() {
            EffectiveWork::inert(action.magnitude())
        } else {
            effective_work(&action, &self.current).expect("state off equilibrium")
        };
        self.e_total += work.delta_e;
        self.path_length += work.magnitude;
        self.current = self.current.displaced(&action);
        let outcome = WindowOutcome { action, work };
        self.windows.push(outcome);
        outcome
    }

    pub fn initial(&self) -> &PsychState {
        &self.initial
    }

    pub fn current(&self) -> &PsychState {
        &self.current
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn e_total(&self) -> f64 {
        self.e_total
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn windows(&self) -> &[WindowOutcome] {
        &self.windows
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// Distance of the current state from equilibrium.
    pub fn resistance(&self) -> f64 {
        self.current.resistance()
    }

    /// Net displacement from the initial state.
    pub fn displacement(&self) -> f64 {
        self.current.distance_to(&self.initial)
    }

    /// Mean alignment over windows where alignment is defined (nonzero action
    /// applied off equilibrium). `None` when no such window exists.
    pub fn mean_cos(&self) -> Option<f64> {
        let defined: Vec<f64> = self
            .windows
            .iter()
            .filter_map(|w| w.work.cos_theta)
            .collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    }

    /// Length of the trailing run of windows that produced no positive work.
    pub fn trailing_nonpositive_windows(&self) -> u32 {
        self.windows
            .iter()
            .rev()
            .take_while(|w| w.work.delta_e <= 0.0)
            .count() as u32
    }
}

/// Minimum cumulative work before the success gate can open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyGate {
    /// Fixed threshold in work units.
    Absolute(f64),
    /// Threshold expressed as a multiple of the scenario's initial resistance.
    RelativeToR0(f64),
}

impl EnergyGate {
    pub fn threshold(&self, r0: f64) -> f64 {
        match *self {
            EnergyGate::Absolute(x) => x,
            EnergyGate::RelativeToR0(k) => k * r0,
        }
    }
}

/// Episode termination thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateConfig {
    pub energy_gate: EnergyGate,
    /// Resolution radius as a fraction of r0; in (0, 1).
    pub eps_dist: f64,
    /// Companionship alignment threshold; in (0, 1].
    pub tau_align: f64,
    /// Fractional resistance growth that counts as deterioration; > 0.
    pub fail_deterioration: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            energy_gate: EnergyGate::RelativeToR0(1.0),
            eps_dist: 0.15,
            tau_align: 0.5,
            fail_deterioration: 0.25,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<(), KernelError> {
        let energy = match self.energy_gate {
            EnergyGate::Absolute(x) | EnergyGate::RelativeToR0(x) => x,
        };
        if !energy.is_finite() || energy < 0.0 {
            return Err(KernelError::InvalidGate(format!(
                "energy gate must be finite and >= 0, got {energy}"
            )));
        }
        if !self.eps_dist.is_finite() || self.eps_dist <= 0.0 || self.eps_dist >= 1.0 {
            return Err(KernelError::InvalidGate(format!(
                "eps_dist must lie in (0, 1), got {}",
                self.eps_dist
            )));
        }
        if !self.tau_align.is_finite() || self.tau_align <= 0.0 || self.tau_align > 1.0 {
            return Err(KernelError::InvalidGate(format!(
                "tau_align must lie in (0, 1], got {}",
                self.tau_align
            )));
        }
        if !self.fail_deterioration.is_finite() || self.fail_deterioration <= 0.0 {
            return Err(KernelError::InvalidGate(format!(
                "fail_deterioration must be > 0, got {}",
                self.fail_deterioration
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Success,
    Failure,
    Continue,
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TerminationType {
    Success,
    EpmFailure,
    DirectorStop,
    MaxTurns,
}

/// Evaluates the episode gate after a window.
///
/// Success requires the energy gate plus either disjunct: resolution (the
/// state has come within `eps_dist * r0` of equilibrium) or companionship
/// (mean alignment above `tau_align`). Failure fires when resistance has
/// grown past `(1 + fail_deterioration) * r0`. Success takes precedence when
/// both predicates hold on the same check.
pub fn check_gate(traj: &TrajectoryState, cfg: &GateConfig, mean_cos: f64) -> GateOutcome {
    let r0 = traj.r0();
    let resistance = traj.resistance();
    let energy_open = traj.e_total() > cfg.energy_gate.threshold(r0);
    let resolution = resistance < cfg.eps_dist * r0;
    let companionship = mean_cos > cfg.tau_align;
    if energy_open && (resolution || companionship) {
        return GateOutcome::Success;
    }
    if resistance >= (1.0 + cfg.fail_deterioration) * r0 {
        return GateOutcome::Failure;
    }
    GateOutcome::Continue
}
