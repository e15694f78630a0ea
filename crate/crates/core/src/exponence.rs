//! Morpheme vectors, smart initialization and winner selection.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::features::PhiMatrix;

/// Column norms must be within this distance of 1.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponenceError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("morpheme `{0}` has an all-zero column")]
    ZeroColumn(String),
    #[error("column `{morpheme}` has norm {norm}, expected 1")]
    NotUnit { morpheme: String, norm: f64 },
    #[error("gold row `{0}` has no winner")]
    IncompleteGold(String),
    #[error("unknown morpheme `{0}`")]
    UnknownMorpheme(String),
    #[error("weight {0} is not positive")]
    BadWeight(f64),
}

/// B: one unit-norm column per morpheme, one row per feature value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentMatrix {
    morphemes: Vec<String>,
    columns: DMatrix<f64>,
}

impl ExponentMatrix {
    pub fn new(morphemes: Vec<String>, columns: DMatrix<f64>) -> Result<Self, ExponenceError> {
        if morphemes.len() != columns.ncols() {
            return Err(ExponenceError::ShapeMismatch(format!(
                "{} labels for {} columns",
                morphemes.len(),
                columns.ncols()
            )));
        }
        for (j, m) in morphemes.iter().enumerate() {
            let norm = columns.column(j).norm();
            if norm == 0.0 {
                return Err(ExponenceError::ZeroColumn(m.clone()));
            }
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(ExponenceError::NotUnit { morpheme: m.clone(), norm });
            }
        }
        Ok(Self { morphemes, columns })
    }

    /// Skips the unit-norm check. Callers own the invariant.
    pub(crate) fn from_parts(morphemes: Vec<String>, columns: DMatrix<f64>) -> Self {
        Self { morphemes, columns }
    }

    pub fn morphemes(&self) -> &[String] {
        &self.morphemes
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub(crate) fn columns_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.morphemes.is_empty()
    }

    pub fn index_of(&self, morpheme: &str) -> Option<usize> {
        self.morphemes.iter().position(|m| m == morpheme)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.columns.column(j).iter().copied().collect()
    }

    pub fn get(&self, value: usize, morpheme: usize) -> f64 {
        self.columns[(value, morpheme)]
    }

    /// Gram matrix of the morpheme columns.
    pub fn gram(&self) -> DMatrix<f64> {
        self.columns.transpose() * &self.columns
    }

    pub fn max_norm_drift(&self) -> f64 {
        (0..self.len()).map(|j| (self.columns.column(j).norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// One row per paradigm cell naming its exponent. `None` marks a tied row in
/// a computed matrix; gold matrices have a winner in every row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalParadigmMatrix {
    row_labels: Vec<String>,
    morphemes: Vec<String>,
    winners: Vec<Option<usize>>,
}

impl TotalParadigmMatrix {
    pub fn new(row_labels: Vec<String>, morphemes: Vec<String>, winners: Vec<Option<usize>>) -> Self {
        assert_eq!(row_labels.len(), winners.len(), "one winner slot per row");
        assert!(winners.iter().flatten().all(|&w| w < morphemes.len()), "winner index out of range");
        Self { row_labels, morphemes, winners }
    }

    /// Gold matrix from one morpheme label per row.
    pub fn from_labels<S: AsRef<str>>(
        row_labels: Vec<String>,
        morphemes: Vec<String>,
        gold: &[S],
    ) -> Result<Self, ExponenceError> {
        if gold.len() != row_labels.len() {
            return Err(ExponenceError::ShapeMismatch(format!("{} gold labels for {} rows", gold.len(), row_labels.len())));
        }
        let winners = gold
            .iter()
            .map(|g| {
                let g = g.as_ref();
                morphemes.iter().position(|m| m == g).map(Some).ok_or_else(|| ExponenceError::UnknownMorpheme(g.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { row_labels, morphemes, winners })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn morphemes(&self) -> &[String] {
        &self.morphemes
    }

    pub fn winners(&self) -> &[Option<usize>] {
        &self.winners
    }

    pub fn rows(&self) -> usize {
        self.winners.len()
    }

    pub fn winner_label(&self, row: usize) -> Option<&str> {
        self.winners[row].map(|w| self.morphemes[w].as_str())
    }

    /// The 0/1 matrix form.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.winners.len(), self.morphemes.len());
        for (i, w) in self.winners.iter().enumerate() {
            if let Some(j) = w {
                m[(i, *j)] = 1.0;
            }
        }
        m
    }

    pub fn target(&self, row: usize, morpheme: usize) -> f64 {
        if self.winners[row] == Some(morpheme) { 1.0 } else { 0.0 }
    }

    /// Number of rows whose winners differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.winners.iter().zip(&other.winners).filter(|(a, b)| a != b).count()
    }

    fn require_complete(&self) -> Result<(), ExponenceError> {
        match self.winners.iter().position(Option::is_none) {
            Some(i) => Err(ExponenceError::IncompleteGold(self.row_labels[i].clone())),
            None => Ok(()),
        }
    }
}

/// Φ × B.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetitionMatrix {
    row_labels: Vec<String>,
    morphemes: Vec<String>,
    entries: DMatrix<f64>,
}

impl CompetitionMatrix {
    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn morphemes(&self) -> &[String] {
        &self.morphemes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, morpheme: usize) -> f64 {
        self.entries[(row, morpheme)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.entries.row(i).iter().copied().collect()
    }
}

/// Co-occurrence counts of feature values and exponents (Φᵗ·diag(w)·TPM).
#[derive(Debug, Clone, PartialEq)]
pub struct CountArray {
    value_labels: Vec<String>,
    morphemes: Vec<String>,
    entries: DMatrix<f64>,
}

impl CountArray {
    pub fn value_labels(&self) -> &[String] {
        &self.value_labels
    }

    pub fn morphemes(&self) -> &[String] {
        &self.morphemes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.entries.column(j).iter().copied().collect()
    }

    /// Adds another array with the same labels.
    pub fn accumulate(&mut self, other: &CountArray) -> Result<(), ExponenceError> {
        if self.value_labels != other.value_labels || self.morphemes != other.morphemes {
            return Err(ExponenceError::ShapeMismatch("count arrays have different labels".into()));
        }
        self.entries += &other.entries;
        Ok(())
    }
}

pub fn count_features(
    phi: &PhiMatrix,
    gold: &TotalParadigmMatrix,
    weights: Option<&[f64]>,
) -> Result<CountArray, ExponenceError> {
    if gold.rows() != phi.rows() {
        return Err(ExponenceError::ShapeMismatch(format!("Φ has {} rows, gold has {}", phi.rows(), gold.rows())));
    }
    gold.require_complete()?;
    let weights = match weights {
        Some(w) if w.len() != phi.rows() => {
            return Err(ExponenceError::ShapeMismatch(format!("{} weights for {} rows", w.len(), phi.rows())));
        }
        Some(w) => {
            if let Some(&bad) = w.iter().find(|&&x| x.is_nan() || x <= 0.0) {
                return Err(ExponenceError::BadWeight(bad));
            }
            w.to_vec()
        }
        None => vec![1.0; phi.rows()],
    };
    let weighted = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(weights)) * gold.to_matrix();
    Ok(CountArray {
        value_labels: phi.feature_system().value_names(),
        morphemes: gold.morphemes().to_vec(),
        entries: phi.matrix().transpose() * weighted,
    })
}

pub fn normalize_columns(counts: &CountArray) -> Result<ExponentMatrix, ExponenceError> {
    let mut columns = counts.entries.clone();
    for (j, m) in counts.morphemes.iter().enumerate() {
        let norm = columns.column(j).norm();
        if norm == 0.0 {
            return Err(ExponenceError::ZeroColumn(m.clone()));
        }
        columns.column_mut(j).unscale_mut(norm);
    }
    Ok(ExponentMatrix::from_parts(counts.morphemes.clone(), columns))
}

pub fn smart_init(
    phi: &PhiMatrix,
    gold: &TotalParadigmMatrix,
    weights: Option<&[f64]>,
) -> Result<ExponentMatrix, ExponenceError> {
    normalize_columns(&count_features(phi, gold, weights)?)
}

pub fn competition(phi: &PhiMatrix, b: &ExponentMatrix) -> Result<CompetitionMatrix, ExponenceError> {
    if phi.cols() != b.dim() {
        return Err(ExponenceError::ShapeMismatch(format!("Φ has {} columns, B has {} rows", phi.cols(), b.dim())));
    }
    Ok(CompetitionMatrix {
        row_labels: phi.labels().to_vec(),
        morphemes: b.morphemes().to_vec(),
        entries: phi.matrix() * b.columns(),
    })
}

/// A row whose maximum is shared by several morphemes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tie {
    pub row: usize,
    pub label: String,
    pub morphemes: Vec<String>,
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub tpm: TotalParadigmMatrix,
    pub ties: Vec<Tie>,
}

/// Strict argmax of a slice; `Err` carries the tied indices.
pub(crate) fn strict_argmax(row: &[f64]) -> Result<usize, Vec<usize>> {
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let at: Vec<usize> = (0..row.len()).filter(|&j| row[j] == best).collect();
    if at.len() == 1 { Ok(at[0]) } else { Err(at) }
}

/// Max_rows: one-hot rows for strict maxima, empty rows for ties.
pub fn max_rows(c: &CompetitionMatrix) -> Selection {
    let mut winners = Vec::with_capacity(c.entries.nrows());
    let mut ties = Vec::new();
    for i in 0..c.entries.nrows() {
        let row = c.row(i);
        match strict_argmax(&row) {
            Ok(j) => winners.push(Some(j)),
            Err(at) => {
                winners.push(None);
                ties.push(Tie {
                    row: i,
                    label: c.row_labels[i].clone(),
                    morphemes: at.iter().map(|&j| c.morphemes[j].clone()).collect(),
                    activation: row[at[0]],
                });
            }
        }
    }
    Selection {
        tpm: TotalParadigmMatrix::new(c.row_labels.clone(), c.morphemes.clone(), winners),
        ties,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellOutcome {
    pub label: String,
    pub gold: String,
    pub predicted: Option<String>,
    /// Winner activation minus runner-up.
    pub margin: f64,
    /// Gold activation minus the best other activation; negative when gold loses.
    pub gold_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub cells: Vec<CellOutcome>,
    pub mismatches: Vec<String>,
    pub ties: Vec<Tie>,
    pub min_margin: f64,
    pub min_gold_margin: f64,
}

impl Evaluation {
    pub fn correct(&self) -> usize {
        self.cells.len() - self.mismatches.len()
    }

    pub fn is_perfect(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub(crate) fn runner_up_gap(row: &[f64], keep: usize) -> f64 {
    let other = row.iter().enumerate().filter(|&(k, _)| k != keep).map(|(_, &x)| x).fold(f64::NEG_INFINITY, f64::max);
    row[keep] - other
}

/// Compares Max_rows of `c` with a gold matrix, reporting margins per cell.
pub fn evaluate(c: &CompetitionMatrix, gold: &TotalParadigmMatrix) -> Result<Evaluation, ExponenceError> {
    if gold.rows() != c.entries.nrows() || gold.morphemes() != c.morphemes() {
        return Err(ExponenceError::ShapeMismatch("gold and competition disagree in shape or morphemes".into()));
    }
    gold.require_complete()?;
    let Selection { tpm, ties } = max_rows(c);
    let mut cells = Vec::with_capacity(gold.rows());
    let mut mismatches = Vec::new();
    for i in 0..gold.rows() {
        let row = c.row(i);
        let g = gold.winners()[i].expect("checked complete");
        let predicted = tpm.winners()[i];
        let margin = match predicted {
            Some(w) if row.len() > 1 => runner_up_gap(&row, w),
            Some(_) => f64::INFINITY,
            None => 0.0,
        };
        let gold_margin = if row.len() > 1 { runner_up_gap(&row, g) } else { f64::INFINITY };
        if predicted != Some(g) {
            mismatches.push(c.row_labels[i].clone());
        }
        cells.push(CellOutcome {
            label: c.row_labels[i].clone(),
            gold: gold.morphemes()[g].clone(),
            predicted: predicted.map(|w| c.morphemes[w].clone()),
            margin,
            gold_margin,
        });
    }
    let min_margin = cells.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let min_gold_margin = cells.iter().map(|c| c.gold_margin).fold(f64::INFINITY, f64::min);
    Ok(Evaluation { cells, mismatches, ties, min_margin, min_gold_margin })
}
