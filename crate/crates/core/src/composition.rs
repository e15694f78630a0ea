//! Stem and affix selection by vector sum, and the 2D angle learner.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompositionError {
    #[error("inventory has no stems or no affixes")]
    EmptyInventory,
    #[error("unknown stem `{0}`")]
    UnknownStem(String),
    #[error("unknown affix `{0}`")]
    UnknownAffix(String),
    #[error("vector `{label}` has dimension {got}, expected {want}")]
    Dimension { label: String, got: usize, want: usize },
    #[error("vector sum is degenerate (antipodal inputs)")]
    DegenerateSum,
    #[error("stem `{0}` lacks a gold form for one of the two axes")]
    IncompleteForms(String),
    #[error("entry `{0}` has no angle")]
    MissingAngle(String),
    #[error("invalid learner settings: {0}")]
    BadConfig(String),
}

/// A labeled vector in feature-value space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labeled {
    pub label: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldForm {
    pub stem: String,
    pub cell: String,
    pub target: Vec<f64>,
    pub affix: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CompositionInventory {
    pub stems: Vec<Labeled>,
    pub affixes: Vec<Labeled>,
    pub gold_forms: Vec<GoldForm>,
}

/// Result of an argmin search. `best` is `None` when several candidates tie.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Choice<T> {
    pub best: Option<T>,
    pub distance: f64,
    pub tied: Vec<T>,
}

fn distance(a: &[f64], b: &[f64], corner: &[f64]) -> f64 {
    corner.iter().zip(a).zip(b).map(|((m, x), y)| (m - x - y).powi(2)).sum::<f64>().sqrt()
}

fn argmin<T: Clone>(candidates: impl Iterator<Item = (T, f64)>) -> Choice<T> {
    let all: Vec<(T, f64)> = candidates.collect();
    let best = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let tied: Vec<T> = all.into_iter().filter(|c| c.1 == best).map(|c| c.0).collect();
    if tied.len() == 1 {
        Choice { best: Some(tied[0].clone()), distance: best, tied: Vec::new() }
    } else {
        Choice { best: None, distance: best, tied }
    }
}

impl CompositionInventory {
    fn check(&self, corner: &[f64]) -> Result<(), CompositionError> {
        if self.stems.is_empty() || self.affixes.is_empty() {
            return Err(CompositionError::EmptyInventory);
        }
        for v in self.stems.iter().chain(&self.affixes) {
            if v.vector.len() != corner.len() {
                return Err(CompositionError::Dimension {
                    label: v.label.clone(),
                    got: v.vector.len(),
                    want: corner.len(),
                });
            }
        }
        Ok(())
    }
}

/// The (stem, affix) pair whose sum lies nearest the corner.
pub fn select_pair(inv: &CompositionInventory, corner: &[f64]) -> Result<Choice<(String, String)>, CompositionError> {
    inv.check(corner)?;
    Ok(argmin(inv.stems.iter().flat_map(|s| {
        inv.affixes
            .iter()
            .map(move |a| ((s.label.clone(), a.label.clone()), distance(&s.vector, &a.vector, corner)))
    })))
}

/// The affix whose sum with a fixed stem lies nearest the corner.
pub fn select_affix_for_stem(
    inv: &CompositionInventory,
    stem: &str,
    corner: &[f64],
) -> Result<Choice<String>, CompositionError> {
    inv.check(corner)?;
    let s = inv.stems.iter().find(|s| s.label == stem).ok_or_else(|| CompositionError::UnknownStem(stem.into()))?;
    Ok(argmin(inv.affixes.iter().map(|a| (a.label.clone(), distance(&s.vector, &a.vector, corner)))))
}

/// Maps an angle to (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI { r - TAU } else { r }
}

/// Polar form of the sum of two unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarSum {
    pub angle: f64,
    pub magnitude: f64,
}

/// Sum of the unit vectors at angles `a` and `b`: the bisector and its length
/// 2·cos of half the separation.
pub fn angle_of_sum(a: f64, b: f64) -> Result<PolarSum, CompositionError> {
    let half = wrap_angle(b - a) / 2.0;
    let magnitude = 2.0 * half.cos();
    if magnitude.abs() < 1e-12 {
        return Err(CompositionError::DegenerateSum);
    }
    Ok(PolarSum { angle: wrap_angle(a + half), magnitude })
}

/// Which plane axis a form targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn angle(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => FRAC_PI_2,
        }
    }

    pub fn corner(self) -> [f64; 2] {
        match self {
            Axis::X => [1.0, 0.0],
            Axis::Y => [0.0, 1.0],
        }
    }
}

/// Names of the feature values spanning a 2D plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Plane {
    pub x: String,
    pub y: String,
}

/// Stems and affixes as angles from the plane's x axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleModel {
    pub plane: Plane,
    pub stems: Vec<(String, f64)>,
    pub affixes: Vec<(String, f64)>,
}

impl AngleModel {
    pub fn new(plane: Plane, stems: Vec<(String, f64)>, affixes: Vec<(String, f64)>) -> Self {
        let wrap = |v: Vec<(String, f64)>| v.into_iter().map(|(l, a)| (l, wrap_angle(a))).collect();
        Self { plane, stems: wrap(stems), affixes: wrap(affixes) }
    }

    pub fn stem_angle(&self, label: &str) -> Option<f64> {
        self.stems.iter().find(|e| e.0 == label).map(|e| e.1)
    }

    pub fn affix_angle(&self, label: &str) -> Option<f64> {
        self.affixes.iter().find(|e| e.0 == label).map(|e| e.1)
    }

    /// Angle between the stem+affix sum and the target axis.
    pub fn sum_offset(&self, stem: &str, affix: &str, target: Axis) -> Result<f64, CompositionError> {
        let s = self.stem_angle(stem).ok_or_else(|| CompositionError::UnknownStem(stem.into()))?;
        let a = self.affix_angle(affix).ok_or_else(|| CompositionError::UnknownAffix(affix.into()))?;
        Ok(wrap_angle(angle_of_sum(s, a)?.angle - target.angle()).abs())
    }

    /// The affix whose sum with `stem` makes the smallest angle with the axis.
    pub fn select_affix(&self, stem: &str, target: Axis) -> Result<Choice<String>, CompositionError> {
        if self.affixes.is_empty() {
            return Err(CompositionError::EmptyInventory);
        }
        let scored = self
            .affixes
            .iter()
            .map(|(a, _)| Ok((a.clone(), self.sum_offset(stem, a, target)?)))
            .collect::<Result<Vec<_>, CompositionError>>()?;
        Ok(argmin(scored.into_iter()))
    }

    /// The affix whose direction is nearest to the axis.
    pub fn nearest_affix_to_axis(&self, target: Axis) -> Choice<String> {
        argmin(self.affixes.iter().map(|(l, a)| (l.clone(), wrap_angle(a - target.angle()).abs())))
    }

    /// Unit vectors (cos θ, sin θ) as a general inventory.
    pub fn to_inventory(&self) -> CompositionInventory {
        let unit = |v: &Vec<(String, f64)>| {
            v.iter().map(|(l, a)| Labeled { label: l.clone(), vector: vec![a.cos(), a.sin()] }).collect()
        };
        CompositionInventory { stems: unit(&self.stems), affixes: unit(&self.affixes), gold_forms: Vec::new() }
    }

    /// Checks every gold form by angle selection. Returns the forms that fail.
    pub fn mismatches(&self, forms: &[AngleForm]) -> Result<Vec<AngleForm>, CompositionError> {
        let mut out = Vec::new();
        for f in forms {
            if self.select_affix(&f.stem, f.target)?.best.as_deref() != Some(f.affix.as_str()) {
                out.push(f.clone());
            }
        }
        Ok(out)
    }
}

/// A gold (stem, axis) → affix pairing for the angle learner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AngleForm {
    pub stem: String,
    pub target: Axis,
    pub affix: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleData {
    pub plane: Plane,
    pub stems: Vec<String>,
    pub affixes: Vec<String>,
    pub forms: Vec<AngleForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleLearnConfig {
    pub stepsize: f64,
    pub margin: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for AngleLearnConfig {
    fn default() -> Self {
        Self { stepsize: 0.01, margin: 0.05, max_iters: 500, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleLearnOutcome {
    pub model: AngleModel,
    pub converged: bool,
    /// Passes that made at least one adjustment.
    pub iterations: usize,
}

fn sum_angle(a: f64, b: f64) -> f64 {
    (a.sin() + b.sin()).atan2(a.cos() + b.cos())
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Learns stem and affix angles so that each stem's gold affix gives the sum
/// nearest each target axis, separated from every rival by the margin.
///
/// For every stem and gold form, each rival affix whose sum with the stem is
/// within `margin` of beating the gold sum triggers one adjustment: the stem and
/// gold affix rotate together so that their sum turns toward the axis, and the
/// rival rotates so that its sum with the stem turns away.
pub fn learn_angles(data: &AngleData, cfg: &AngleLearnConfig) -> Result<AngleLearnOutcome, CompositionError> {
    if cfg.stepsize.is_nan() || cfg.stepsize <= 0.0 || cfg.margin.is_nan() || cfg.margin < 0.0 {
        return Err(CompositionError::BadConfig(format!("stepsize {} margin {}", cfg.stepsize, cfg.margin)));
    }
    if data.stems.is_empty() || data.affixes.is_empty() {
        return Err(CompositionError::EmptyInventory);
    }
    for f in &data.forms {
        if !data.stems.contains(&f.stem) {
            return Err(CompositionError::UnknownStem(f.stem.clone()));
        }
        if !data.affixes.contains(&f.affix) {
            return Err(CompositionError::UnknownAffix(f.affix.clone()));
        }
    }
    for s in &data.stems {
        let has = |axis| data.forms.iter().any(|f| &f.stem == s && f.target == axis);
        if !has(Axis::X) || !has(Axis::Y) {
            return Err(CompositionError::IncompleteForms(s.clone()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = || rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let mut stems: Vec<f64> = data.stems.iter().map(|_| draw()).collect();
    let mut affixes: Vec<f64> = data.affixes.iter().map(|_| draw()).collect();
    let forms: Vec<(usize, usize, f64)> = data
        .stems
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            data.forms.iter().filter(move |f| &f.stem == s).map(move |f| {
                let gi = data.affixes.iter().position(|a| a == &f.affix).expect("checked above");
                (si, gi, f.target.angle())
            })
        })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..=cfg.max_iters {
        let mut adjusted = false;
        for &(si, gi, target) in &forms {
            let off = |s: f64, a: f64| wrap_angle(sum_angle(s, a) - target).abs();
            let gold_off = off(stems[si], affixes[gi]);
            let rivals: Vec<usize> = (0..affixes.len())
                .filter(|&r| r != gi && off(stems[si], affixes[r]) < gold_off + cfg.margin)
                .collect();
            for r in rivals {
                adjusted = true;
                let d = sign(wrap_angle(target - sum_angle(stems[si], affixes[gi])));
                stems[si] = wrap_angle(stems[si] + d * cfg.stepsize);
                affixes[gi] = wrap_angle(affixes[gi] + d * cfg.stepsize);
                let d = sign(wrap_angle(target - sum_angle(stems[si], affixes[r])));
                affixes[r] = wrap_angle(affixes[r] - d * cfg.stepsize);
            }
        }
        if !adjusted {
            converged = true;
            break;
        }
        iterations += 1;
    }
    let label = |names: &[String], angles: Vec<f64>| names.iter().cloned().zip(angles).collect();
    Ok(AngleLearnOutcome {
        model: AngleModel::new(data.plane.clone(), label(&data.stems, stems), label(&data.affixes, affixes)),
        converged,
        iterations,
    })
}
