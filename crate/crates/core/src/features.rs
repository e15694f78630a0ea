//! Feature systems, paradigm cells and the Φ matrix.
//!
//! Every feature value owns one coordinate of feature-value space. Coordinates
//! are laid out feature by feature in declaration order, so a feature's values
//! occupy a contiguous block.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("a feature system needs at least one feature")]
    NoFeatures,
    #[error("feature `{0}` needs at least two values")]
    EmptyFeature(String),
    #[error("feature `{0}` is declared twice")]
    DuplicateFeature(String),
    #[error("value `{0}` is declared more than once")]
    DuplicateValue(String),
    #[error("unknown feature value `{0}`")]
    UnknownValue(String),
    #[error("cell assigns two values to feature `{0}`")]
    RepeatedFeature(String),
    #[error("cell leaves feature `{0}` unassigned")]
    MissingFeature(String),
    #[error("cell `{0}` appears twice")]
    DuplicateCell(String),
    #[error("a paradigm needs at least one cell")]
    NoCells,
    #[error("cell does not belong to this feature system")]
    ForeignCell,
}

/// One inflectional feature and its ordered values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feature {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSystem {
    features: Vec<Feature>,
    offsets: Vec<usize>,
    value_index: HashMap<String, usize>,
    owner: Vec<usize>,
}

impl FeatureSystem {
    pub fn new<N, V, I, J>(declarations: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = (N, J)>,
        J: IntoIterator<Item = V>,
        N: Into<String>,
        V: Into<String>,
    {
        let mut features = Vec::new();
        let mut offsets = Vec::new();
        let mut value_index = HashMap::new();
        let mut owner = Vec::new();
        let mut names = HashSet::new();
        for (name, values) in declarations {
            let name = name.into();
            if !names.insert(name.clone()) {
                return Err(FeatureError::DuplicateFeature(name));
            }
            let values: Vec<String> = values.into_iter().map(Into::into).collect();
            if values.len() < 2 {
                return Err(FeatureError::EmptyFeature(name));
            }
            offsets.push(owner.len());
            for value in &values {
                if value_index.insert(value.clone(), owner.len()).is_some() {
                    return Err(FeatureError::DuplicateValue(value.clone()));
                }
                owner.push(features.len());
            }
            features.push(Feature { name, values });
        }
        if features.is_empty() {
            return Err(FeatureError::NoFeatures);
        }
        Ok(Self { features, offsets, value_index, owner })
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    /// NumFeaVal: the dimension of feature-value space.
    pub fn dim(&self) -> usize {
        self.owner.len()
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.value_index.get(value).copied()
    }

    pub fn value_name(&self, index: usize) -> &str {
        let f = self.owner[index];
        &self.features[f].values[index - self.offsets[f]]
    }

    /// Value names in coordinate order.
    pub fn value_names(&self) -> Vec<String> {
        self.features.iter().flat_map(|f| f.values.iter().cloned()).collect()
    }

    pub fn feature_of(&self, index: usize) -> usize {
        self.owner[index]
    }

    /// Coordinate range of feature `f`.
    pub fn block(&self, f: usize) -> Range<usize> {
        self.offsets[f]..self.offsets[f] + self.features[f].values.len()
    }

    /// Builds a cell from value names given in any order, one per feature.
    pub fn cell<S: AsRef<str>>(&self, values: &[S]) -> Result<ParadigmCell, FeatureError> {
        let mut slots: Vec<Option<usize>> = vec![None; self.features.len()];
        for v in values {
            let v = v.as_ref();
            let idx = self.value_index(v).ok_or_else(|| FeatureError::UnknownValue(v.to_string()))?;
            let f = self.owner[idx];
            if slots[f].replace(idx).is_some() {
                return Err(FeatureError::RepeatedFeature(self.features[f].name.clone()));
            }
        }
        let coords = slots
            .into_iter()
            .enumerate()
            .map(|(f, s)| s.ok_or_else(|| FeatureError::MissingFeature(self.features[f].name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ParadigmCell { coords })
    }

    /// Every cell of the full cross-product, last feature varying fastest.
    pub fn full_product(&self) -> Vec<ParadigmCell> {
        let mut cells = vec![Vec::new()];
        for f in 0..self.features.len() {
            let mut next = Vec::with_capacity(cells.len() * self.features[f].values.len());
            for prefix in &cells {
                for idx in self.block(f) {
                    let mut c = prefix.clone();
                    c.push(idx);
                    next.push(c);
                }
            }
            cells = next;
        }
        cells.into_iter().map(|coords| ParadigmCell { coords }).collect()
    }

    /// Human-readable cell label: value names joined by `-` in feature order.
    pub fn cell_label(&self, cell: &ParadigmCell) -> String {
        cell.coords.iter().map(|&i| self.value_name(i)).collect::<Vec<_>>().join("-")
    }

    fn owns(&self, cell: &ParadigmCell) -> bool {
        cell.coords.len() == self.features.len()
            && cell.coords.iter().enumerate().all(|(f, &i)| self.block(f).contains(&i))
    }
}

/// A total assignment of one value per feature, stored as global coordinates
/// in feature order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParadigmCell {
    coords: Vec<usize>,
}

impl ParadigmCell {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn contains(&self, index: usize) -> bool {
        self.coords.contains(&index)
    }
}

pub fn corner_vector(cell: &ParadigmCell, fs: &FeatureSystem) -> Result<Vec<f64>, FeatureError> {
    if !fs.owns(cell) {
        return Err(FeatureError::ForeignCell);
    }
    let mut v = vec![0.0; fs.dim()];
    for &i in &cell.coords {
        v[i] = 1.0;
    }
    Ok(v)
}

/// Paradigm cells as rows, feature values as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    fs: FeatureSystem,
    cells: Vec<ParadigmCell>,
    labels: Vec<String>,
    matrix: DMatrix<f64>,
}

impl PhiMatrix {
    /// Wraps an arbitrary 0/1 matrix without checking the block structure.
    /// Rows carry the given labels; use [`validate_feature_blocks`] to audit it.
    pub fn from_raw(fs: FeatureSystem, labels: Vec<String>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.ncols(), fs.dim(), "column count must equal NumFeaVal");
        assert_eq!(matrix.nrows(), labels.len(), "one label per row");
        Self { fs, cells: Vec::new(), labels, matrix }
    }

    pub fn feature_system(&self) -> &FeatureSystem {
        &self.fs
    }

    /// Empty for matrices built with [`PhiMatrix::from_raw`].
    pub fn cells(&self) -> &[ParadigmCell] {
        &self.cells
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.matrix.row(i).iter().copied().collect()
    }

    /// Multiplies row `i` by `factor`; used to probe scale invariance.
    pub fn scale_row(&mut self, i: usize, factor: f64) {
        let mut row = self.matrix.row_mut(i);
        row *= factor;
    }

    pub fn row_of(&self, cell: &ParadigmCell) -> Option<usize> {
        self.cells.iter().position(|c| c == cell)
    }
}

pub fn build_phi(fs: &FeatureSystem, cells: &[ParadigmCell]) -> Result<PhiMatrix, FeatureError> {
    if cells.is_empty() {
        return Err(FeatureError::NoCells);
    }
    let mut seen = HashSet::new();
    let mut matrix = DMatrix::zeros(cells.len(), fs.dim());
    for (r, cell) in cells.iter().enumerate() {
        if !seen.insert(cell) {
            return Err(FeatureError::DuplicateCell(fs.cell_label(cell)));
        }
        for (c, x) in corner_vector(cell, fs)?.into_iter().enumerate() {
            matrix[(r, c)] = x;
        }
    }
    Ok(PhiMatrix {
        fs: fs.clone(),
        labels: cells.iter().map(|c| fs.cell_label(c)).collect(),
        cells: cells.to_vec(),
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BlockViolation {
    /// Two columns of one feature block share a nonzero row.
    NotOrthogonal { feature: String, left: String, right: String },
    /// The block's columns do not sum to 1 in this row.
    BlockSum { feature: String, row: String, sum: f64 },
}

impl fmt::Display for BlockViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotOrthogonal { feature, left, right } => {
                write!(f, "{feature}: columns {left} and {right} are not orthogonal")
            }
            Self::BlockSum { feature, row, sum } => {
                write!(f, "{feature}: block sums to {sum} in row {row}")
            }
        }
    }
}

/// Checks column orthogonality and the sum-to-ones property inside each
/// feature block. An empty result means Φ is well formed.
pub fn validate_feature_blocks(phi: &PhiMatrix, fs: &FeatureSystem) -> Vec<BlockViolation> {
    let m = phi.matrix();
    let mut out = Vec::new();
    for (f, feature) in fs.features().iter().enumerate() {
        let block = fs.block(f);
        for a in block.clone() {
            for b in a + 1..block.end {
                if m.column(a).dot(&m.column(b)).abs() > 1e-12 {
                    out.push(BlockViolation::NotOrthogonal {
                        feature: feature.name.clone(),
                        left: fs.value_name(a).to_string(),
                        right: fs.value_name(b).to_string(),
                    });
                }
            }
        }
        for r in 0..m.nrows() {
            let sum: f64 = block.clone().map(|c| m[(r, c)]).sum();
            if (sum - 1.0).abs() > 1e-12 {
                out.push(BlockViolation::BlockSum {
                    feature: feature.name.clone(),
                    row: phi.labels()[r].clone(),
                    sum,
                });
            }
        }
    }
    out
}
