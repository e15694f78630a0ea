//! Inflection classes as rotations of one rigid base configuration.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exponence::{
    competition, count_features, max_rows, normalize_columns, runner_up_gap, CountArray, ExponenceError,
    ExponentMatrix, TotalParadigmMatrix,
};
use crate::features::PhiMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RotationError {
    #[error("axis pair ({i}, {j}) is invalid for dimension {dim}")]
    BadAxis { i: usize, j: usize, dim: usize },
    #[error("no class has at least {0} lexemes")]
    EmptyFilter(u32),
    #[error("invalid rotation settings: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Exponence(#[from] ExponenceError),
}

/// Rotation by `theta` in the plane of coordinates `i` and `j`:
/// (x_i, x_j) ↦ (cos θ x_i − sin θ x_j, sin θ x_i + cos θ x_j).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl PlaneRotation {
    fn check(&self, dim: usize) -> Result<(), RotationError> {
        if self.i == self.j || self.i >= dim || self.j >= dim {
            return Err(RotationError::BadAxis { i: self.i, j: self.j, dim });
        }
        Ok(())
    }

    /// The full `dim × dim` matrix.
    pub fn matrix(&self, dim: usize) -> Result<nalgebra::DMatrix<f64>, RotationError> {
        self.check(dim)?;
        let mut m = nalgebra::DMatrix::identity(dim, dim);
        let (s, c) = self.theta.sin_cos();
        m[(self.i, self.i)] = c;
        m[(self.i, self.j)] = -s;
        m[(self.j, self.i)] = s;
        m[(self.j, self.j)] = c;
        Ok(m)
    }

    fn apply_in_place(&self, b: &mut ExponentMatrix) {
        let (s, c) = self.theta.sin_cos();
        let cols = b.columns_mut();
        for k in 0..cols.ncols() {
            let x = cols[(self.i, k)];
            let y = cols[(self.j, k)];
            cols[(self.i, k)] = c * x - s * y;
            cols[(self.j, k)] = s * x + c * y;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationPlan {
    pub class: String,
    pub rotations: Vec<PlaneRotation>,
}

/// Applies every rotation of the plan, in order, to every column.
pub fn apply_rotation(b: &ExponentMatrix, plan: &RotationPlan) -> Result<ExponentMatrix, RotationError> {
    let mut out = b.clone();
    for r in &plan.rotations {
        r.check(b.dim())?;
        r.apply_in_place(&mut out);
    }
    Ok(out)
}

/// Three-quarter turn in the (active, passive) plane: active becomes the old
/// passive coordinate, passive becomes the negated old active one.
pub fn deponent_transform(
    b: &ExponentMatrix,
    active_axis: usize,
    passive_axis: usize,
) -> Result<ExponentMatrix, RotationError> {
    let plan = RotationPlan {
        class: "deponent".into(),
        rotations: vec![PlaneRotation { i: active_axis, j: passive_axis, theta: 3.0 * PI / 2.0 }],
    };
    apply_rotation(b, &plan)
}

/// (1 + e^(−2(a_winner − a_intended)))^(−2).
pub fn sigmoid_gain(a_winner: f64, a_intended: f64) -> f64 {
    let s = 1.0 / (1.0 + (-2.0 * (a_winner - a_intended)).exp());
    s * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflectionClass {
    pub label: String,
    pub lexemes: u32,
    pub gold: TotalParadigmMatrix,
}

/// Parallel paradigms over one Φ and one morpheme inventory.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassInventory {
    pub phi: PhiMatrix,
    pub morphemes: Vec<String>,
    pub classes: Vec<InflectionClass>,
}

impl ClassInventory {
    pub fn class(&self, label: &str) -> Option<&InflectionClass> {
        self.classes.iter().find(|c| c.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseConfiguration {
    pub counts: CountArray,
    pub b: ExponentMatrix,
    pub included: Vec<String>,
}

/// Lexeme-weighted smart initialization over the classes with at least
/// `min_lexemes` members.
pub fn base_configuration(inv: &ClassInventory, min_lexemes: u32) -> Result<BaseConfiguration, RotationError> {
    let mut counts: Option<CountArray> = None;
    let mut included = Vec::new();
    for class in inv.classes.iter().filter(|c| c.lexemes >= min_lexemes) {
        let w = vec![f64::from(class.lexemes); inv.phi.rows()];
        let c = count_features(&inv.phi, &class.gold, Some(&w))?;
        match counts.as_mut() {
            Some(acc) => acc.accumulate(&c)?,
            None => counts = Some(c),
        }
        included.push(class.label.clone());
    }
    let counts = counts.ok_or(RotationError::EmptyFilter(min_lexemes))?;
    let b = normalize_columns(&counts)?;
    Ok(BaseConfiguration { counts, b, included })
}

/// The first class whose paradigm equals Max_rows(Φ × B).
pub fn class_of_base(b: &ExponentMatrix, inv: &ClassInventory) -> Result<Option<String>, RotationError> {
    let sel = max_rows(&competition(&inv.phi, b)?);
    Ok(inv.classes.iter().find(|c| c.gold.winners() == sel.tpm.winners()).map(|c| c.label.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationLearnConfig {
    pub base_increment: f64,
    pub max_iters: usize,
    pub runs: usize,
    pub seed: u64,
    pub margin_floor: f64,
}

impl Default for RotationLearnConfig {
    fn default() -> Self {
        Self { base_increment: 0.1, max_iters: 1000, runs: 100, seed: 0, margin_floor: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationOutcome {
    pub plan: RotationPlan,
    pub converged: bool,
    /// Full passes over the cells before the stopping check succeeded.
    pub iterations: usize,
    /// Smallest (intended − best rival) activation gap at the end.
    pub min_margin: f64,
}

fn intended_margins(b: &ExponentMatrix, phi: &PhiMatrix, target: &TotalParadigmMatrix) -> Result<f64, RotationError> {
    let c = competition(phi, b)?;
    Ok((0..phi.rows())
        .map(|i| runner_up_gap(&c.row(i), target.winners()[i].expect("gold is complete")))
        .fold(f64::INFINITY, f64::min))
}

/// Learns a sequence of plane rotations that turns `b_base` into a
/// configuration realizing `target`.
///
/// Each iteration visits every cell. The rotation plane joins an axis the
/// intended winner can spare (largest lead over its closest rival) with one of
/// the cell's own feature axes, chosen at random. The angle is the base
/// increment scaled by [`sigmoid_gain`], and the sign is the one that raises the
/// intended winner on the cell axis.
pub fn learn_class_rotation(
    b_base: &ExponentMatrix,
    phi: &PhiMatrix,
    target: &TotalParadigmMatrix,
    class: &str,
    cfg: &RotationLearnConfig,
    seed: u64,
) -> Result<RotationOutcome, RotationError> {
    if cfg.base_increment.is_nan() || cfg.base_increment <= 0.0 {
        return Err(RotationError::BadConfig(format!("base_increment {}", cfg.base_increment)));
    }
    if phi.rows() != target.rows() || phi.cols() != b_base.dim() || target.morphemes() != b_base.morphemes() {
        return Err(ExponenceError::ShapeMismatch("base, Φ and target must agree".into()).into());
    }
    if let Some(i) = target.winners().iter().position(Option::is_none) {
        return Err(ExponenceError::IncompleteGold(target.row_labels()[i].clone()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = b_base.clone();
    let mut plan = RotationPlan { class: class.to_string(), rotations: Vec::new() };
    let dim = b.dim();
    for iteration in 0..=cfg.max_iters {
        let margin = intended_margins(&b, phi, target)?;
        if margin >= cfg.margin_floor {
            return Ok(RotationOutcome { plan, converged: true, iterations: iteration, min_margin: margin });
        }
        if iteration == cfg.max_iters {
            return Ok(RotationOutcome { plan, converged: false, iterations: iteration, min_margin: margin });
        }
        for i in 0..phi.rows() {
            let corner = phi.matrix().row(i).transpose();
            let act: Vec<f64> = (b.columns().transpose() * &corner).iter().copied().collect();
            let w = target.winners()[i].expect("checked complete");
            let rival = (0..act.len())
                .filter(|&k| k != w)
                .fold(None, |best: Option<usize>, k| match best {
                    Some(r) if act[r] >= act[k] => Some(r),
                    _ => Some(k),
                });
            let Some(rival) = rival else { continue };
            let axes: Vec<usize> = (0..dim).filter(|&f| corner[f] != 0.0).collect();
            let toward = axes[rng.random_range(0..axes.len())];
            let away = (0..dim)
                .filter(|&f| f != toward)
                .fold(None, |best: Option<(usize, f64)>, f| {
                    let lead = b.get(f, w) - b.get(f, rival);
                    match best {
                        Some((_, l)) if l >= lead => best,
                        _ => Some((f, lead)),
                    }
                })
                .expect("dimension is at least two")
                .0;
            let theta = cfg.base_increment * sigmoid_gain(act[rival], act[w]);
            let plus = PlaneRotation { i: away, j: toward, theta };
            let minus = PlaneRotation { theta: -theta, ..plus };
            // toward-coordinate of the intended winner after each choice
            let (x, y) = (b.get(away, w), b.get(toward, w));
            let lift = |r: &PlaneRotation| r.theta.sin() * x + r.theta.cos() * y;
            let chosen = if lift(&plus) >= lift(&minus) { plus } else { minus };
            chosen.apply_in_place(&mut b);
            plan.rotations.push(chosen);
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Aggregate of many seeded runs for one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBatchSummary {
    pub class: String,
    pub lexemes: u32,
    pub distance: usize,
    pub runs: usize,
    pub converged: usize,
    /// Mean over converged runs.
    pub mean_iterations: f64,
    pub max_iterations: usize,
    /// Mean final smallest margin over converged runs.
    pub mean_min_margin: f64,
}

/// Runs the learner `cfg.runs` times for one class with seeds `cfg.seed + k`.
pub fn run_class_batch(
    b_base: &ExponentMatrix,
    base_gold: &TotalParadigmMatrix,
    phi: &PhiMatrix,
    class: &InflectionClass,
    cfg: &RotationLearnConfig,
) -> Result<(ClassBatchSummary, Vec<RotationOutcome>), RotationError> {
    if cfg.runs == 0 {
        return Err(RotationError::BadConfig("runs must be at least 1".into()));
    }
    let outcomes = (0..cfg.runs as u64)
        .map(|k| learn_class_rotation(b_base, phi, &class.gold, &class.label, cfg, cfg.seed.wrapping_add(k)))
        .collect::<Result<Vec<_>, _>>()?;
    let ok: Vec<&RotationOutcome> = outcomes.iter().filter(|o| o.converged).collect();
    let n = ok.len().max(1) as f64;
    let summary = ClassBatchSummary {
        class: class.label.clone(),
        lexemes: class.lexemes,
        distance: base_gold.hamming(&class.gold),
        runs: cfg.runs,
        converged: ok.len(),
        mean_iterations: ok.iter().map(|o| o.iterations as f64).sum::<f64>() / n,
        max_iterations: ok.iter().map(|o| o.iterations).max().unwrap_or(0),
        mean_min_margin: ok.iter().map(|o| o.min_margin).sum::<f64>() / n,
    };
    Ok((summary, outcomes))
}
