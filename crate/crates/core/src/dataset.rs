//! Fixed-point datasets: CSV ingestion, label handling for regression and
//! multi-label classification, and commitment serialization.
//!
//! CSV layout: a header row where feature columns are named `x1..xJ` and
//! label columns `y1..yK` (a single `y` column is regression). Owner row
//! ranges are supplied separately; see [`crate::masking::DatasetLayout`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::fixed::{self, FixedConfig};
use crate::masking::DatasetLayout;

/// Task kind, decided by the label columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// One real-valued label per sample (linear regression).
    Regression,
    /// K binary labels per sample (multi-hot classification).
    Classification,
}

/// A dataset encoded into the field. Features carry the fixed-point scale;
/// classification labels are raw 0/1 field elements, regression labels are
/// fixed-point reals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedDataset {
    pub task: TaskKind,
    pub config: FixedConfig,
    /// N x J, scale-f encodings.
    pub features: Vec<Vec<FieldElem>>,
    /// N x K; raw bits for classification, scale-f values (K = 1) for
    /// regression.
    pub labels: Vec<Vec<FieldElem>>,
    /// f64 originals, kept for the reference training paths.
    pub features_real: Vec<Vec<f64>>,
    pub labels_real: Vec<Vec<f64>>,
}

impl FixedDataset {
    pub fn samples(&self) -> usize {
        self.features.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    pub fn num_labels(&self) -> usize {
        self.labels.first().map_or(0, |r| r.len())
    }

    /// Builds a dataset from real-valued rows. Classification labels must be
    /// exactly 0.0 or 1.0.
    pub fn from_rows(
        features: Vec<Vec<f64>>,
        labels: Vec<Vec<f64>>,
        task: TaskKind,
        config: FixedConfig,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimMismatch(format!(
                "{} feature rows vs {} label rows",
                features.len(),
                labels.len()
            )));
        }
        let j = features.first().map_or(0, |r| r.len());
        if features.iter().any(|r| r.len() != j) {
            return Err(Error::DimMismatch("ragged feature rows".into()));
        }
        let k = labels.first().map_or(0, |r| r.len());
        if labels.iter().any(|r| r.len() != k) {
            return Err(Error::DimMismatch("ragged label rows".into()));
        }
        let enc_features = features
            .iter()
            .map(|row| row.iter().map(|x| fixed::encode(*x, &config)).collect())
            .collect::<Result<Vec<Vec<FieldElem>>>>()?;
        let enc_labels = match task {
            TaskKind::Regression => labels
                .iter()
                .map(|row| row.iter().map(|y| fixed::encode(*y, &config)).collect())
                .collect::<Result<Vec<Vec<FieldElem>>>>()?,
            TaskKind::Classification => labels
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|y| {
                            if *y == 0.0 {
                                Ok(FieldElem::ZERO)
                            } else if *y == 1.0 {
                                Ok(FieldElem::ONE)
                            } else {
                                Err(Error::NonBinaryLabel)
                            }
                        })
                        .collect()
                })
                .collect::<Result<Vec<Vec<FieldElem>>>>()?,
        };
        Ok(FixedDataset {
            task,
            config,
            features: enc_features,
            labels: enc_labels,
            features_real: features,
            labels_real: labels,
        })
    }

    /// Classification labels as 0/1 bytes (for XOR masking).
    pub fn label_bits(&self) -> Result<Vec<Vec<u8>>> {
        if self.task != TaskKind::Classification {
            return Err(Error::BadParams(
                "label bits need a classification task".into(),
            ));
        }
        self.labels_real
            .iter()
            .map(|row| {
                row.iter()
                    .map(|y| match *y {
                        0.0 => Ok(0u8),
                        1.0 => Ok(1u8),
                        _ => Err(Error::NonBinaryLabel),
                    })
                    .collect()
            })
            .collect()
    }

    /// Flattened commitment input: features row-major, then labels row-major.
    pub fn commitment_values(&self) -> Vec<FieldElem> {
        self.features
            .iter()
            .flatten()
            .chain(self.labels.iter().flatten())
            .copied()
            .collect()
    }

    /// Single-owner layout covering all rows.
    pub fn single_owner_layout(&self, owner_id: &str) -> DatasetLayout {
        DatasetLayout {
            samples: self.samples(),
            features: self.num_features(),
            classes: self.num_labels(),
            owners: vec![(owner_id.to_string(), 0..self.samples())],
        }
    }
}

/// Parses the `x1..xJ, y1..yK` CSV layout described in the module docs.
pub fn read_csv(path: &std::path::Path, config: FixedConfig) -> Result<FixedDataset> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut x_cols = Vec::new();
    let mut y_cols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim();
        if h.starts_with('x') {
            x_cols.push(i);
        } else if h.starts_with('y') {
            y_cols.push(i);
        } else {
            return Err(Error::MalformedRecord(format!(
                "column '{h}' is neither a feature (x*) nor a label (y*)"
            )));
        }
    }
    if x_cols.is_empty() || y_cols.is_empty() {
        return Err(Error::MalformedRecord(
            "need at least one x column and one y column".into(),
        ));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |i: &usize| -> Result<f64> {
            record
                .get(*i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedRecord(format!("row {:?}: {e}", record.position())))
        };
        features.push(x_cols.iter().map(parse).collect::<Result<Vec<f64>>>()?);
        labels.push(y_cols.iter().map(parse).collect::<Result<Vec<f64>>>()?);
    }
    let task = if y_cols.len() == 1 {
        TaskKind::Regression
    } else {
        TaskKind::Classification
    };
    FixedDataset::from_rows(features, labels, task, config)
}

/// Writes the dataset back out in the canonical CSV layout.
pub fn write_csv(dataset: &FixedDataset, path: &std::path::Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = Vec::new();
    for j in 1..=dataset.num_features() {
        header.push(format!("x{j}"));
    }
    if dataset.num_labels() == 1 {
        header.push("y".to_string());
    } else {
        for k in 1..=dataset.num_labels() {
            header.push(format!("y{k}"));
        }
    }
    writer.write_record(&header)?;
    for (xs, ys) in dataset.features_real.iter().zip(&dataset.labels_real) {
        let row: Vec<String> = xs.iter().chain(ys.iter()).map(|v| v.to_string()).collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_regression() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        std::fs::write(&path, "x1,x2,y\n1.0,2.0,3.5\n-0.5,0.25,1.0\n").unwrap();
        let ds = read_csv(&path, FixedConfig::default()).unwrap();
        assert_eq!(ds.task, TaskKind::Regression);
        assert_eq!(ds.samples(), 2);
        assert_eq!(ds.num_features(), 2);
        assert_eq!(ds.features_real[1][0], -0.5);
        let out = dir.path().join("out.csv");
        write_csv(&ds, &out).unwrap();
        let ds2 = read_csv(&out, FixedConfig::default()).unwrap();
        assert_eq!(ds.features_real, ds2.features_real);
    }

    #[test]
    fn classification_labels_must_be_binary() {
        let err = FixedDataset::from_rows(
            vec![vec![1.0]],
            vec![vec![0.5, 1.0]],
            TaskKind::Classification,
            FixedConfig::default(),
        );
        assert!(matches!(err, Err(Error::NonBinaryLabel)));
        let ok = FixedDataset::from_rows(
            vec![vec![1.0]],
            vec![vec![0.0, 1.0]],
            TaskKind::Classification,
            FixedConfig::default(),
        )
        .unwrap();
        assert_eq!(ok.label_bits().unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn commitment_values_order() {
        let ds = FixedDataset::from_rows(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![5.0], vec![6.0]],
            TaskKind::Regression,
            FixedConfig::default(),
        )
        .unwrap();
        let vals = ds.commitment_values();
        assert_eq!(vals.len(), 6);
        assert_eq!(vals[0], ds.features[0][0]);
        assert_eq!(vals[3], ds.features[1][1]);
        assert_eq!(vals[4], ds.labels[0][0]);
    }
}
