//! Scoring keys: the nine-indicator initial-state assessment (IEDR) and the
//! six-channel per-window progression/regression rating (MDEP-PR).
//!
//! Point values live in small lookup tables here and nowhere else. Everything
//! that moves a latent state must be expressible through these two keys.

use crate::kernel::{ActionVector, AxisId, PsychState};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RubricError {
    #[error("indicator {id} level {level} is out of range 0..=3")]
    IedrLevelOutOfRange { id: IndicatorId, level: u8 },
    #[error("indicator {id} has level {level} but empty evidence")]
    MissingEvidence { id: IndicatorId, level: u8 },
    #[error("assessment is missing indicator {0}")]
    MissingIndicator(IndicatorId),
    #[error("assessment lists indicator {0} more than once")]
    DuplicateIndicator(IndicatorId),
    #[error("assessment must contain exactly 9 indicators, got {0}")]
    WrongIndicatorCount(usize),
    #[error("{axis} {channel:?} level {level} is out of range")]
    MdepLevelOutOfRange { axis: AxisId, channel: MdepChannel, level: i8 },
    #[error("{axis} {channel:?} has level {level} but empty evidence")]
    MissingChannelEvidence { axis: AxisId, channel: MdepChannel, level: i8 },
    #[error("{axis} {channel:?} has level {level} but empty reasoning")]
    MissingChannelReasoning { axis: AxisId, channel: MdepChannel, level: i8 },
    #[error("window is missing the {axis} {channel:?} channel")]
    MissingChannel { axis: AxisId, channel: MdepChannel },
    #[error("window lists the {axis} {channel:?} channel more than once")]
    DuplicateChannel { axis: AxisId, channel: MdepChannel },
    #[error("window must contain exactly 6 channels, got {0}")]
    WrongChannelCount(usize),
    #[error("window index must be >= 1")]
    ZeroWindowIndex,
}

/// The nine initial-state indicators, three per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IndicatorId {
    #[serde(rename = "C.1")]
    C1,
    #[serde(rename = "C.2")]
    C2,
    #[serde(rename = "C.3")]
    C3,
    #[serde(rename = "A.1")]
    A1,
    #[serde(rename = "A.2")]
    A2,
    #[serde(rename = "A.3")]
    A3,
    #[serde(rename = "P.1")]
    P1,
    #[serde(rename = "P.2")]
    P2,
    #[serde(rename = "P.3")]
    P3,
}

impl IndicatorId {
    pub const ALL: [IndicatorId; 9] = [
        IndicatorId::C1,
        IndicatorId::C2,
        IndicatorId::C3,
        IndicatorId::A1,
        IndicatorId::A2,
        IndicatorId::A3,
        IndicatorId::P1,
        IndicatorId::P2,
        IndicatorId::P3,
    ];

    pub fn axis(self) -> AxisId {
        match self {
            IndicatorId::C1 | IndicatorId::C2 | IndicatorId::C3 => AxisId::Cognitive,
            IndicatorId::A1 | IndicatorId::A2 | IndicatorId::A3 => AxisId::Affective,
            IndicatorId::P1 | IndicatorId::P2 | IndicatorId::P3 => AxisId::Proactive,
        }
    }

    pub fn weight_class(self) -> WeightClass {
        match self {
            IndicatorId::C1 | IndicatorId::C2 | IndicatorId::A1 | IndicatorId::P1 => {
                WeightClass::Standard
            }
            IndicatorId::C3 | IndicatorId::A3 | IndicatorId::P3 => WeightClass::Priority,
            IndicatorId::A2 | IndicatorId::P2 => WeightClass::Core,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            IndicatorId::C1 => "C.1",
            IndicatorId::C2 => "C.2",
            IndicatorId::C3 => "C.3",
            IndicatorId::A1 => "A.1",
            IndicatorId::A2 => "A.2",
            IndicatorId::A3 => "A.3",
            IndicatorId::P1 => "P.1",
            IndicatorId::P2 => "P.2",
            IndicatorId::P3 => "P.3",
        }
    }
}

impl std::fmt::Display for IndicatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Severity weighting tier of an indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightClass {
    Standard,
    Priority,
    Core,
}

impl WeightClass {
    pub fn multiplier(self) -> f64 {
        match self {
            WeightClass::Standard => 1.0,
            WeightClass::Priority => 1.5,
            WeightClass::Core => 2.0,
        }
    }

    /// Deficit points per level 0..=3. Base unit -2, scaled by the tier.
    pub fn deficit_cells(self) -> [i32; 4] {
        match self {
            WeightClass::Standard => [0, -2, -4, -6],
            WeightClass::Priority => [0, -3, -6, -9],
            WeightClass::Core => [0, -4, -8, -12],
        }
    }
}

/// One rated initial-state indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IedrIndicator {
    pub id: IndicatorId,
    pub level: u8,
    pub evidence: String,
    pub reasoning: String,
}

impl IedrIndicator {
    pub fn validate(&self) -> Result<(), RubricError> {
        if self.level > 3 {
            return Err(RubricError::IedrLevelOutOfRange { id: self.id, level: self.level });
        }
        if self.level > 0 && self.evidence.trim().is_empty() {
            return Err(RubricError::MissingEvidence { id: self.id, level: self.level });
        }
        Ok(())
    }

    /// Deficit contribution in points; 0 or negative.
    pub fn deficit(&self) -> i32 {
        self.id.weight_class().deficit_cells()[self.level as usize]
    }
}

/// Validated nine-indicator initial assessment. Indicators are stored in
/// canonical id order regardless of input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IedrAssessmentRepr", into = "IedrAssessmentRepr")]
pub struct IedrAssessment {
    indicators: Vec<IedrIndicator>,
}

#[derive(Serialize, Deserialize)]
struct IedrAssessmentRepr {
    indicators: Vec<IedrIndicator>,
}

impl TryFrom<IedrAssessmentRepr> for IedrAssessment {
    type Error = RubricError;

    fn try_from(repr: IedrAssessmentRepr) -> Result<Self, Self::Error> {
        IedrAssessment::new(repr.indicators)
    }
}

impl From<IedrAssessment> for IedrAssessmentRepr {
    fn from(a: IedrAssessment) -> Self {
        IedrAssessmentRepr { indicators: a.indicators }
    }
}

impl IedrAssessment {
    pub fn new(mut indicators: Vec<IedrIndicator>) -> Result<Self, RubricError> {
        if indicators.len() != 9 {
            return Err(RubricError::WrongIndicatorCount(indicators.len()));
        }
        indicators.sort_by_key(|i| i.id);
        for pair in indicators.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(RubricError::DuplicateIndicator(pair[0].id));
            }
        }
        for id in IndicatorId::ALL {
            if !indicators.iter().any(|i| i.id == id) {
                return Err(RubricError::MissingIndicator(id));
            }
        }
        for i in &indicators {
            i.validate()?;
        }
        Ok(Self { indicators })
    }

    /// Builds an assessment from bare levels in canonical id order, with
    /// synthesized evidence text for nonzero levels. Test and fixture helper.
    pub fn from_levels(levels: [u8; 9]) -> Result<Self, RubricError> {
        let indicators = IndicatorId::ALL
            .into_iter()
            .zip(levels)
            .map(|(id, level)| IedrIndicator {
                id,
                level,
                evidence: if level > 0 { format!("{id} rated {level}") } else { String::new() },
                reasoning: String::new(),
            })
            .collect();
        Self::new(indicators)
    }

    pub fn indicators(&self) -> &[IedrIndicator] {
        &self.indicators
    }

    pub fn indicator(&self, id: IndicatorId) -> &IedrIndicator {
        self.indicators
            .iter()
            .find(|i| i.id == id)
            .expect("all nine indicators present")
    }

    /// Sum of the three indicator deficits on one axis.
    pub fn axis_deficit(&self, axis: AxisId) -> i32 {
        self.indicators
            .iter()
            .filter(|i| i.id.axis() == axis)
            .map(|i| i.deficit())
            .sum()
    }

    /// The latent starting state implied by the assessment.
    pub fn initial_state(&self) -> PsychState {
        PsychState::new(
            self.axis_deficit(AxisId::Cognitive) as f64,
            self.axis_deficit(AxisId::Affective) as f64,
            self.axis_deficit(AxisId::Proactive) as f64,
        )
        .expect("deficit sums are non-positive")
    }

    pub fn r0(&self) -> f64 {
        self.initial_state().resistance()
    }

    /// An all-zero assessment yields r0 = 0; such scenarios carry no
    /// measurable deficit and cannot seed a trajectory.
    pub fn is_degenerate(&self) -> bool {
        self.indicators.iter().all(|i| i.level == 0)
    }
}

/// Progression or regression side of one axis within a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdepChannel {
    Prog,
    Neg,
}

/// Points per progression level 0..=2; identical on every axis.
const PROG_CELLS: [i32; 3] = [0, 1, 3];
/// Points per regression depth 0..=2 on the cognitive axis.
const NEG_CELLS_COGNITIVE: [i32; 3] = [0, -2, -4];
/// Points per regression depth 0..=2 on the affective and proactive axes.
const NEG_CELLS_AFFECT_PROACT: [i32; 3] = [0, -2, -5];

/// One rated channel of a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdepChannelRating {
    pub axis: AxisId,
    pub channel: MdepChannel,
    /// Prog levels are 0, 1, 2; neg levels are 0, -1, -2.
    pub level: i8,
    pub evidence: String,
    pub reasoning: String,
}

impl MdepChannelRating {
    pub fn validate(&self) -> Result<(), RubricError> {
        let in_range = match self.channel {
            MdepChannel::Prog => (0..=2).contains(&self.level),
            MdepChannel::Neg => (-2..=0).contains(&self.level),
        };
        if !in_range {
            return Err(RubricError::MdepLevelOutOfRange {
                axis: self.axis,
                channel: self.channel,
                level: self.level,
            });
        }
        if self.level != 0 {
            if self.evidence.trim().is_empty() {
                return Err(RubricError::MissingChannelEvidence {
                    axis: self.axis,
                    channel: self.channel,
                    level: self.level,
                });
            }
            if self.reasoning.trim().is_empty() {
                return Err(RubricError::MissingChannelReasoning {
                    axis: self.axis,
                    channel: self.channel,
                    level: self.level,
                });
            }
        }
        Ok(())
    }

    /// Signed points for this channel.
    pub fn score(&self) -> i32 {
        match self.channel {
            MdepChannel::Prog => PROG_CELLS[self.level as usize],
            MdepChannel::Neg => {
                let depth = self.level.unsigned_abs() as usize;
                match self.axis {
                    AxisId::Cognitive => NEG_CELLS_COGNITIVE[depth],
                    AxisId::Affective | AxisId::Proactive => NEG_CELLS_AFFECT_PROACT[depth],
                }
            }
        }
    }
}

/// Validated six-channel rating of one adjudication window. Channels are
/// stored in canonical (axis, channel) order regardless of input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MdepWindowRepr", into = "MdepWindowRepr")]
pub struct MdepWindowRating {
    window_index: u32,
    channels: Vec<MdepChannelRating>,
}

#[derive(Serialize, Deserialize)]
struct MdepWindowRepr {
    window_index: u32,
    channels: Vec<MdepChannelRating>,
}

impl TryFrom<MdepWindowRepr> for MdepWindowRating {
    type Error = RubricError;

    fn try_from(repr: MdepWindowRepr) -> Result<Self, Self::Error> {
        MdepWindowRating::new(repr.window_index, repr.channels)
    }
}

impl From<MdepWindowRating> for MdepWindowRepr {
    fn from(w: MdepWindowRating) -> Self {
        MdepWindowRepr { window_index: w.window_index, channels: w.channels }
    }
}

impl MdepWindowRating {
    pub fn new(
        window_index: u32,
        mut channels: Vec<MdepChannelRating>,
    ) -> Result<Self, RubricError> {
        if window_index == 0 {
            return Err(RubricError::ZeroWindowIndex);
        }
        if channels.len() != 6 {
            return Err(RubricError::WrongChannelCount(channels.len()));
        }
        channels.sort_by_key(|c| (c.axis, c.channel));
        for pair in channels.windows(2) {
            if pair[0].axis == pair[1].axis && pair[0].channel == pair[1].channel {
                return Err(RubricError::DuplicateChannel {
                    axis: pair[0].axis,
                    channel: pair[0].channel,
                });
            }
        }
        for axis in AxisId::ALL {
            for channel in [MdepChannel::Prog, MdepChannel::Neg] {
                if !channels.iter().any(|c| c.axis == axis && c.channel == channel) {
                    return Err(RubricError::MissingChannel { axis, channel });
                }
            }
        }
        for c in &channels {
            c.validate()?;
        }
        Ok(Self { window_index, channels })
    }

    /// Builds a rating from bare levels `[(prog, neg); C, A, P]`, with
    /// synthesized evidence text for nonzero levels. Test and fixture helper.
    pub fn from_levels(window_index: u32, levels: [(i8, i8); 3]) -> Result<Self, RubricError> {
        let mut channels = Vec::with_capacity(6);
        for (axis, (prog, neg)) in AxisId::ALL.into_iter().zip(levels) {
            for (channel, level) in [(MdepChannel::Prog, prog), (MdepChannel::Neg, neg)] {
                let filled = if level != 0 {
                    format!("{axis} {channel:?} level {level} in window {window_index}")
                } else {
                    String::new()
                };
                channels.push(MdepChannelRating {
                    axis,
                    channel,
                    level,
                    evidence: filled.clone(),
                    reasoning: filled,
                });
            }
        }
        Self::new(window_index, channels)
    }

    pub fn window_index(&self) -> u32 {
        self.window_index
    }

    pub fn channels(&self) -> &[MdepChannelRating] {
        &self.channels
    }

    pub fn channel(&self, axis: AxisId, channel: MdepChannel) -> &MdepChannelRating {
        self.channels
            .iter()
            .find(|c| c.axis == axis && c.channel == channel)
            .expect("all six channels present")
    }

    /// Net signed points on one axis: progression plus regression.
    pub fn axis_delta(&self, axis: AxisId) -> i32 {
        self.channel(axis, MdepChannel::Prog).score()
            + self.channel(axis, MdepChannel::Neg).score()
    }

    /// The per-window action vector implied by the rating. Components always
    /// land in the rubric range.
    pub fn action_vector(&self) -> ActionVector {
        ActionVector::new(
            self.axis_delta(AxisId::Cognitive) as f64,
            self.axis_delta(AxisId::Affective) as f64,
            self.axis_delta(AxisId::Proactive) as f64,
        )
        .expect("integer deltas are finite")
    }

    /// Severity of regression in this window: half the summed regression
    /// depths, ranging 0 (clean) to 3 (maximal on all axes).
    pub fn penalty_intensity(&self) -> f64 {
        let total_depth: i32 = AxisId::ALL
            .into_iter()
            .map(|axis| i32::from(self.channel(axis, MdepChannel::Neg).level.unsigned_abs()))
            .sum();
        0.5 * f64::from(total_depth)
    }
}
