//! Finite scenario trees.
//!
//! A scenario is a sequence of stage labels `(ξ[1], …, ξ[N])`. Two scenarios
//! are indistinguishable when the kth-stage decision is made if their labels
//! agree on the first `k - 1` stages. Stages are indexed from 0 here, so the
//! partition at stage `k` groups scenarios by their first `k` labels; stage 0
//! always has a single class.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Allowed deviation of the total probability mass from 1.
pub const PROBABILITY_MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: usize,
    /// One opaque label per stage. Only equality between labels matters.
    pub labels: Vec<String>,
    pub probability: f64,
}

/// An immutable, validated scenario tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    scenarios: Vec<Scenario>,
    stage_dims: Vec<usize>,
    stage_offsets: Vec<usize>,
    dim: usize,
    /// `classes[k]` partitions scenario indices for stage `k`, ordered by
    /// smallest member.
    classes: Vec<Vec<Vec<usize>>>,
    /// `class_of[k][s]` is the index into `classes[k]` holding scenario `s`.
    class_of: Vec<Vec<usize>>,
    /// Total probability of each class, `class_mass[k][c]`.
    class_mass: Vec<Vec<f64>>,
}

impl ScenarioTree {
    /// Validates the raw scenarios and computes the information partitions.
    ///
    /// Probabilities are never renormalized: a total mass off by more than
    /// [`PROBABILITY_MASS_TOL`] is an error.
    pub fn new<L, S>(raw: L, stage_dims: &[usize]) -> Result<Self>
    where
        L: IntoIterator<Item = (Vec<S>, f64)>,
        S: Into<String>,
    {
        if stage_dims.is_empty() {
            return Err(Error::NoStages);
        }
        if let Some(stage) = stage_dims.iter().position(|&d| d == 0) {
            return Err(Error::ZeroStageDimension { stage });
        }
        let stages = stage_dims.len();

        let mut scenarios = Vec::new();
        for (id, (labels, probability)) in raw.into_iter().enumerate() {
            let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
            if labels.len() != stages {
                return Err(Error::LabelCount {
                    scenario: id,
                    expected: stages,
                    found: labels.len(),
                });
            }
            if !(probability > 0.0 && probability <= 1.0) {
                return Err(Error::NonPositiveProbability {
                    scenario: id,
                    probability,
                });
            }
            scenarios.push(Scenario {
                id,
                labels,
                probability,
            });
        }
        if scenarios.is_empty() {
            return Err(Error::EmptyTree);
        }

        let mut seen: BTreeMap<&[String], usize> = BTreeMap::new();
        for s in &scenarios {
            if let Some(&first) = seen.get(s.labels.as_slice()) {
                return Err(Error::DuplicateScenario { first, second: s.id });
            }
            seen.insert(&s.labels, s.id);
        }

        let total: f64 = scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_MASS_TOL {
            return Err(Error::BadProbabilityMass { total });
        }

        let mut classes = Vec::with_capacity(stages);
        let mut class_of = Vec::with_capacity(stages);
        let mut class_mass = Vec::with_capacity(stages);
        for k in 0..stages {
            let mut index: BTreeMap<&[String], usize> = BTreeMap::new();
            let mut parts: Vec<Vec<usize>> = Vec::new();
            let mut owner = Vec::with_capacity(scenarios.len());
            for s in &scenarios {
                let prefix = &s.labels[..k];
                let c = *index.entry(prefix).or_insert_with(|| {
                    parts.push(Vec::new());
                    parts.len() - 1
                });
                parts[c].push(s.id);
                owner.push(c);
            }
            let mass = parts
                .iter()
                .map(|p| p.iter().map(|&i| scenarios[i].probability).sum())
                .collect();
            classes.push(parts);
            class_of.push(owner);
            class_mass.push(mass);
        }

        let mut stage_offsets = Vec::with_capacity(stages);
        let mut dim = 0;
        for &d in stage_dims {
            stage_offsets.push(dim);
            dim += d;
        }

        Ok(Self {
            scenarios,
            stage_dims: stage_dims.to_vec(),
            stage_offsets,
            dim,
            classes,
            class_of,
            class_mass,
        })
    }

    /// Same scenarios and labels with different stage dimensions.
    pub fn with_stage_dims(&self, stage_dims: &[usize]) -> Result<Self> {
        Self::new(
            self.scenarios.iter().map(|s| (s.labels.clone(), s.probability)),
            stage_dims,
        )
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn probability(&self, scenario: usize) -> f64 {
        self.scenarios[scenario].probability
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.scenarios.iter().map(|s| s.probability)
    }

    pub fn stages(&self) -> usize {
        self.stage_dims.len()
    }

    pub fn stage_dims(&self) -> &[usize] {
        &self.stage_dims
    }

    /// Total decision dimension, the sum of the stage dimensions.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinate range of stage `k` inside a decision vector.
    pub fn stage_range(&self, k: usize) -> core::ops::Range<usize> {
        let start = self.stage_offsets[k];
        start..start + self.stage_dims[k]
    }

    /// The partition of scenario indices into stage-`k` information classes.
    pub fn equivalence_classes(&self, k: usize) -> Result<&[Vec<usize>]> {
        self.classes.get(k).map(Vec::as_slice).ok_or(Error::StageOutOfRange {
            stage: k,
            stages: self.stages(),
        })
    }

    /// Index of the stage-`k` class that contains `scenario`.
    pub fn class_of(&self, k: usize, scenario: usize) -> usize {
        self.class_of[k][scenario]
    }

    pub fn class_masses(&self, k: usize) -> &[f64] {
        &self.class_mass[k]
    }
}
