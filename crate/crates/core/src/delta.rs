//! Delta-rule training of the exponent matrix.

use serde::Serialize;

use crate::exponence::{competition, evaluate, strict_argmax, ExponenceError, ExponentMatrix, TotalParadigmMatrix};
use crate::features::PhiMatrix;

/// When column updates land.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum UpdateSchedule {
    /// Rows in Φ order; each row sees the current B and every touched column
    /// is renormalized immediately.
    #[default]
    Online,
    /// All rows see the B from the start of the step; updates are summed and
    /// renormalized once at the end.
    Batch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub eta: f64,
    pub error_driven: bool,
    pub max_iters: usize,
    /// Reported against the minimum margin; not needed for convergence.
    pub tolerance: f64,
    pub schedule: UpdateSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { eta: 0.1, error_driven: true, max_iters: 100, tolerance: 0.0, schedule: UpdateSchedule::Online }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mismatches: usize,
    pub min_margin: f64,
    pub margin_ok: bool,
    pub updated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrainTrace {
    pub records: Vec<IterationRecord>,
}

impl TrainTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub b: ExponentMatrix,
    pub trace: TrainTrace,
    pub converged: bool,
    pub iterations: usize,
}

fn check_shapes(b: &ExponentMatrix, phi: &PhiMatrix, gold: &TotalParadigmMatrix) -> Result<(), ExponenceError> {
    if phi.cols() != b.dim() || phi.rows() != gold.rows() || gold.morphemes() != b.morphemes() {
        return Err(ExponenceError::ShapeMismatch("B, Φ and gold must agree".into()));
    }
    if let Some(i) = gold.winners().iter().position(Option::is_none) {
        return Err(ExponenceError::IncompleteGold(gold.row_labels()[i].clone()));
    }
    Ok(())
}

fn renormalize(b: &mut ExponentMatrix, j: usize) -> Result<(), ExponenceError> {
    let norm = b.columns().column(j).norm();
    if norm < 1e-12 {
        return Err(ExponenceError::ZeroColumn(b.morphemes()[j].clone()));
    }
    b.columns_mut().column_mut(j).unscale_mut(norm);
    Ok(())
}

fn wrong_at(activations: &[f64], gold: usize) -> bool {
    strict_argmax(activations) != Ok(gold)
}

/// One pass of μ_j += η (t_ij − a_ij) Φ_i over the visited rows.
///
/// Returns the updated matrix and the indices of the columns it touched.
pub fn delta_step(
    b: &ExponentMatrix,
    phi: &PhiMatrix,
    gold: &TotalParadigmMatrix,
    cfg: &TrainConfig,
) -> Result<(ExponentMatrix, Vec<usize>), ExponenceError> {
    check_shapes(b, phi, gold)?;
    let mut next = b.clone();
    let mut touched = vec![false; b.len()];
    let frozen = phi.matrix() * b.columns();
    let mut pending = nalgebra::DMatrix::zeros(b.dim(), b.len());
    for i in 0..phi.rows() {
        let corner = phi.matrix().row(i).transpose();
        let activations: Vec<f64> = match cfg.schedule {
            UpdateSchedule::Online => (next.columns().transpose() * &corner).iter().copied().collect(),
            UpdateSchedule::Batch => frozen.row(i).iter().copied().collect(),
        };
        let g = gold.winners()[i].expect("checked complete");
        if cfg.error_driven && !wrong_at(&activations, g) {
            continue;
        }
        for j in 0..b.len() {
            let step = cfg.eta * (gold.target(i, j) - activations[j]);
            touched[j] = true;
            match cfg.schedule {
                UpdateSchedule::Online => {
                    next.columns_mut().column_mut(j).axpy(step, &corner, 1.0);
                    renormalize(&mut next, j)?;
                }
                UpdateSchedule::Batch => pending.column_mut(j).axpy(step, &corner, 1.0),
            }
        }
    }
    if cfg.schedule == UpdateSchedule::Batch {
        *next.columns_mut() += pending;
        for j in (0..b.len()).filter(|&j| touched[j]) {
            renormalize(&mut next, j)?;
        }
    }
    let updated = (0..b.len()).filter(|&j| touched[j]).collect();
    Ok((next, updated))
}

fn record(
    b: &ExponentMatrix,
    phi: &PhiMatrix,
    gold: &TotalParadigmMatrix,
    iteration: usize,
    updated: &[usize],
    tolerance: f64,
) -> Result<IterationRecord, ExponenceError> {
    let ev = evaluate(&competition(phi, b)?, gold)?;
    Ok(IterationRecord {
        iteration,
        mismatches: ev.mismatches.len(),
        min_margin: ev.min_margin,
        margin_ok: ev.min_margin >= tolerance,
        updated: updated.iter().map(|&j| b.morphemes()[j].clone()).collect(),
    })
}

/// Repeats [`delta_step`] until Max_rows reproduces the gold matrix.
///
/// The trace starts with the untrained state as iteration 0.
pub fn train(
    b0: &ExponentMatrix,
    phi: &PhiMatrix,
    gold: &TotalParadigmMatrix,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ExponenceError> {
    check_shapes(b0, phi, gold)?;
    let mut b = b0.clone();
    let mut trace = TrainTrace::default();
    let first = record(&b, phi, gold, 0, &[], cfg.tolerance)?;
    let mut converged = first.mismatches == 0;
    trace.records.push(first);
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iters {
        let (next, updated) = delta_step(&b, phi, gold, cfg)?;
        b = next;
        iterations += 1;
        let r = record(&b, phi, gold, iterations, &updated, cfg.tolerance)?;
        converged = r.mismatches == 0;
        trace.records.push(r);
    }
    Ok(TrainOutcome { b, trace, converged, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponence::smart_init;
    use crate::features::{build_phi, FeatureSystem};

    fn toy() -> (PhiMatrix, TotalParadigmMatrix) {
        let fs = FeatureSystem::new([("number", vec!["sg", "pl"]), ("case", vec!["nom", "acc"])]).unwrap();
        let phi = build_phi(&fs, &fs.full_product()).unwrap();
        let gold = TotalParadigmMatrix::from_labels(
            phi.labels().to_vec(),
            vec!["a".into(), "b".into()],
            &["a", "b", "b", "b"],
        )
        .unwrap();
        (phi, gold)
    }

    #[test]
    fn zero_eta_leaves_b_alone() {
        let (phi, gold) = toy();
        let b = smart_init(&phi, &gold, None).unwrap();
        let cfg = TrainConfig { eta: 0.0, error_driven: false, ..TrainConfig::default() };
        let (next, _) = delta_step(&b, &phi, &gold, &cfg).unwrap();
        assert!((next.columns() - b.columns()).abs().max() < 1e-15);
    }

    #[test]
    fn error_driven_step_is_identity_when_correct() {
        let (phi, gold) = toy();
        let b = smart_init(&phi, &gold, None).unwrap();
        let ev = evaluate(&competition(&phi, &b).unwrap(), &gold).unwrap();
        if ev.is_perfect() {
            let (next, updated) = delta_step(&b, &phi, &gold, &TrainConfig::default()).unwrap();
            assert_eq!(next, b);
            assert!(updated.is_empty());
            let out = train(&b, &phi, &gold, &TrainConfig::default()).unwrap();
            assert!(out.converged);
            assert_eq!(out.iterations, 0);
        }
    }

    #[test]
    fn both_schedules_keep_unit_columns() {
        let (phi, gold) = toy();
        let b = smart_init(&phi, &gold, None).unwrap();
        for schedule in [UpdateSchedule::Online, UpdateSchedule::Batch] {
            let cfg = TrainConfig { eta: 0.3, error_driven: false, schedule, ..TrainConfig::default() };
            let (next, updated) = delta_step(&b, &phi, &gold, &cfg).unwrap();
            assert_eq!(updated, vec![0, 1]);
            assert!(next.max_norm_drift() < 1e-12);
        }
    }

    #[test]
    fn trace_is_json_lines() {
        let (phi, gold) = toy();
        let b = smart_init(&phi, &gold, None).unwrap();
        let out = train(&b, &phi, &gold, &TrainConfig::default()).unwrap();
        let text = out.trace.to_json_lines();
        assert_eq!(text.lines().count(), out.trace.records.len());
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("mismatches").is_some());
        }
    }
}
