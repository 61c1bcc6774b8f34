//! Seeded stratified sampling over a scenario corpus.

use crate::scenario::{Mechanism, MechanismKind, PersonaType, Scenario};
use crate::{ScenarioError, DEFAULT_DOMAINS};
use epm_core::AxisId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// What the sample must contain. Serializable so a spec can live in a file
/// next to the corpus it applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub total: usize,
    /// Exact count per mechanism axis.
    pub per_axis: usize,
    /// Exact count per listed domain.
    pub per_domain: usize,
    pub domains: Vec<String>,
    /// Lower bound on defensive personas in the sample.
    pub min_defensive: usize,
    /// Mechanism combinations that must appear at least once.
    pub required_mechanisms: Vec<Mechanism>,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        let required_mechanisms = AxisId::ALL
            .into_iter()
            .flat_map(|axis| {
                [MechanismKind::Routine, MechanismKind::Challenging]
                    .into_iter()
                    .map(move |kind| Mechanism { axis, kind })
            })
            .collect();
        SamplingSpec {
            total: 30,
            per_axis: 10,
            per_domain: 5,
            domains: DEFAULT_DOMAINS.iter().map(|d| d.to_string()).collect(),
            min_defensive: 15,
            required_mechanisms,
            seed: 0,
        }
    }
}

impl SamplingSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.per_axis * AxisId::ALL.len() != self.total {
            return Err(ScenarioError::InvalidSamplingSpec(format!(
                "per_axis {} x 3 axes != total {}",
                self.per_axis, self.total
            )));
        }
        if self.per_domain * self.domains.len() != self.total {
            return Err(ScenarioError::InvalidSamplingSpec(format!(
                "per_domain {} x {} domains != total {}",
                self.per_domain,
                self.domains.len(),
                self.total
            )));
        }
        if self.min_defensive > self.total {
            return Err(ScenarioError::InvalidSamplingSpec(format!(
                "min_defensive {} exceeds total {}",
                self.min_defensive, self.total
            )));
        }
        Ok(())
    }
}

/// One unmet stratum constraint: what the spec demands versus what the
/// corpus (or the best attempted sample) can supply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumDeficit {
    pub stratum: String,
    pub required: usize,
    pub available: usize,
}

fn corpus_deficits(corpus: &[Scenario], spec: &SamplingSpec) -> Vec<StratumDeficit> {
    let mut deficits = Vec::new();

    for axis in AxisId::ALL {
        let available = corpus.iter().filter(|s| s.mechanism_label.axis == axis).count();
        if available < spec.per_axis {
            deficits.push(StratumDeficit {
                stratum: format!("axis {}", axis.short()),
                required: spec.per_axis,
                available,
            });
        }
    }

    for domain in &spec.domains {
        let available = corpus.iter().filter(|s| &s.domain_label == domain).count();
        if available < spec.per_domain {
            deficits.push(StratumDeficit {
                stratum: format!("domain {domain}"),
                required: spec.per_domain,
                available,
            });
        }
    }

    let defensive = corpus.iter().filter(|s| s.persona_type == PersonaType::Defensive).count();
    if defensive < spec.min_defensive {
        deficits.push(StratumDeficit {
            stratum: "defensive personas".to_string(),
            required: spec.min_defensive,
            available: defensive,
        });
    }

    for mech in &spec.required_mechanisms {
        let available = corpus.iter().filter(|s| s.mechanism_label == *mech).count();
        if available == 0 {
            deficits.push(StratumDeficit {
                stratum: format!("mechanism {}", mech.label()),
                required: 1,
                available: 0,
            });
        }
    }

    deficits
}

fn sample_deficits(sample: &[&Scenario], spec: &SamplingSpec) -> Vec<StratumDeficit> {
    let mut deficits = Vec::new();
    for axis in AxisId::ALL {
        let have = sample.iter().filter(|s| s.mechanism_label.axis == axis).count();
        if have != spec.per_axis {
            deficits.push(StratumDeficit {
                stratum: format!("axis {}", axis.short()),
                required: spec.per_axis,
                available: have,
            });
        }
    }
    for domain in &spec.domains {
        let have = sample.iter().filter(|s| &s.domain_label == domain).count();
        if have != spec.per_domain {
            deficits.push(StratumDeficit {
                stratum: format!("domain {domain}"),
                required: spec.per_domain,
                available: have,
            });
        }
    }
    let defensive = sample.iter().filter(|s| s.persona_type == PersonaType::Defensive).count();
    if defensive < spec.min_defensive {
        deficits.push(StratumDeficit {
            stratum: "defensive personas".to_string(),
            required: spec.min_defensive,
            available: defensive,
        });
    }
    for mech in &spec.required_mechanisms {
        if !sample.iter().any(|s| s.mechanism_label == *mech) {
            deficits.push(StratumDeficit {
                stratum: format!("mechanism {}", mech.label()),
                required: 1,
                available: 0,
            });
        }
    }
    deficits
}

const RESTART_ATTEMPTS: u64 = 64;

/// Draw a deterministic sample meeting every stratum constraint.
///
/// The corpus is screened for outright deficits first, then a greedy pass
/// over a seeded shuffle fills axis and domain quotas while favoring
/// defensive personas and still-missing mechanism combinations. Quota
/// interactions the greedy order cannot satisfy trigger a reshuffle with a
/// derived seed; the attempt budget is fixed so the function stays
/// deterministic for a given spec.
pub fn stratified_sample(
    corpus: &[Scenario],
    spec: &SamplingSpec,
) -> Result<Vec<Scenario>, ScenarioError> {
    spec.validate()?;

    let deficits = corpus_deficits(corpus, spec);
    if !deficits.is_empty() {
        return Err(ScenarioError::InfeasibleStrata(deficits));
    }

    let mut ordered: Vec<&Scenario> = corpus.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let mut best_attempt: Option<(Vec<&Scenario>, Vec<StratumDeficit>)> = None;
    for attempt in 0..RESTART_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt));
        let mut pool = ordered.clone();
        pool.shuffle(&mut rng);

        // Defensive cards and rare mechanisms first so quota tailenders
        // don't crowd them out.
        let mech_counts: BTreeMap<String, usize> = pool.iter().fold(BTreeMap::new(), |mut m, s| {
            *m.entry(s.mechanism_label.label()).or_default() += 1;
            m
        });
        pool.sort_by_key(|s| {
            let rarity = mech_counts.get(&s.mechanism_label.label()).copied().unwrap_or(0);
            let defensive = s.persona_type == PersonaType::Defensive;
            (rarity, !defensive)
        });

        let mut axis_count: BTreeMap<&str, usize> = BTreeMap::new();
        let mut domain_count: BTreeMap<&str, usize> = BTreeMap::new();
        let mut picked: Vec<&Scenario> = Vec::with_capacity(spec.total);
        for s in &pool {
            if picked.len() == spec.total {
                break;
            }
            if !spec.domains.contains(&s.domain_label) {
                continue;
            }
            let axis = s.mechanism_label.axis.short();
            if axis_count.get(axis).copied().unwrap_or(0) == spec.per_axis {
                continue;
            }
            if domain_count.get(s.domain_label.as_str()).copied().unwrap_or(0) == spec.per_domain {
                continue;
            }
            *axis_count.entry(axis).or_default() += 1;
            *domain_count.entry(s.domain_label.as_str()).or_default() += 1;
            picked.push(s);
        }

        let remaining = sample_deficits(&picked, spec);
        if remaining.is_empty() {
            picked.sort_by(|a, b| a.id.cmp(&b.id));
            return Ok(picked.into_iter().cloned().collect());
        }
        let better = match &best_attempt {
            None => true,
            Some((_, prev)) => remaining.len() < prev.len(),
        };
        if better {
            best_attempt = Some((picked, remaining));
        }
    }

    let (_, deficits) = best_attempt.expect("attempt budget is nonzero");
    Err(ScenarioError::InfeasibleStrata(deficits))
}
