//! Reference (f64) and fixed-point implementations of masked losses,
//! gradients, and optimizer steps.
//!
//! The fixed-point path follows one canonical operation order — products
//! accumulate at double scale, sums rescale once — and the step circuits
//! mirror it gadget for gadget, so circuit outputs equal this module's
//! outputs bit for bit.
//!
//! Masking semantics: features are gated entrywise (`x ∘ b`), class labels
//! are corrected by XOR (`y ^ b`), and each sample's residual is gated by its
//! effective bit (the OR of its feature-mask row, ANDed with its sample bit),
//! which is what makes a masked gradient equal the gradient of the explicitly
//! reduced dataset.

use serde::{Deserialize, Serialize};

use crate::dataset::{FixedDataset, TaskKind};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::fixed::{self, FixedConfig};
use crate::masking::{flatten_sample_bits, BitMatrix, MaskKind};

// ----- parameters ------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnParams {
    /// J x H input-to-hidden weights.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// H x K hidden-to-output weights.
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl NnParams {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.w1.len(), self.b1.len(), self.b2.len())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Lr(LrParams),
    Nn(NnParams),
}

/// Fixed-point twin of [`LrParams`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedLrParams {
    pub weights: Vec<FieldElem>,
    pub bias: FieldElem,
}

impl FixedLrParams {
    pub fn encode(p: &LrParams, cfg: &FixedConfig) -> Result<Self> {
        Ok(FixedLrParams {
            weights: p
                .weights
                .iter()
                .map(|w| fixed::encode(*w, cfg))
                .collect::<Result<_>>()?,
            bias: fixed::encode(p.bias, cfg)?,
        })
    }

    pub fn decode(&self, cfg: &FixedConfig) -> Result<LrParams> {
        Ok(LrParams {
            weights: self
                .weights
                .iter()
                .map(|w| fixed::decode(*w, cfg))
                .collect::<Result<_>>()?,
            bias: fixed::decode(self.bias, cfg)?,
        })
    }

    pub fn flatten(&self) -> Vec<FieldElem> {
        let mut out = self.weights.clone();
        out.push(self.bias);
        out
    }
}

/// Fixed-point twin of [`NnParams`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedNnParams {
    pub w1: Vec<Vec<FieldElem>>,
    pub b1: Vec<FieldElem>,
    pub w2: Vec<Vec<FieldElem>>,
    pub b2: Vec<FieldElem>,
}

impl FixedNnParams {
    pub fn encode(p: &NnParams, cfg: &FixedConfig) -> Result<Self> {
        let enc_mat = |m: &Vec<Vec<f64>>| -> Result<Vec<Vec<FieldElem>>> {
            m.iter()
                .map(|r| r.iter().map(|v| fixed::encode(*v, cfg)).collect())
                .collect()
        };
        let enc_vec = |v: &Vec<f64>| -> Result<Vec<FieldElem>> {
            v.iter().map(|x| fixed::encode(*x, cfg)).collect()
        };
        Ok(FixedNnParams {
            w1: enc_mat(&p.w1)?,
            b1: enc_vec(&p.b1)?,
            w2: enc_mat(&p.w2)?,
            b2: enc_vec(&p.b2)?,
        })
    }

    pub fn decode(&self, cfg: &FixedConfig) -> Result<NnParams> {
        let dec_mat = |m: &Vec<Vec<FieldElem>>| -> Result<Vec<Vec<f64>>> {
            m.iter()
                .map(|r| r.iter().map(|v| fixed::decode(*v, cfg)).collect())
                .collect()
        };
        let dec_vec = |v: &Vec<FieldElem>| -> Result<Vec<f64>> {
            v.iter().map(|x| fixed::decode(*x, cfg)).collect()
        };
        Ok(NnParams {
            w1: dec_mat(&self.w1)?,
            b1: dec_vec(&self.b1)?,
            w2: dec_mat(&self.w2)?,
            b2: dec_vec(&self.b2)?,
        })
    }

    /// Row-major flattening: W1, b1, W2, b2 (commitment order).
    pub fn flatten(&self) -> Vec<FieldElem> {
        self.w1
            .iter()
            .flatten()
            .chain(self.b1.iter())
            .chain(self.w2.iter().flatten())
            .chain(self.b2.iter())
            .copied()
            .collect()
    }
}

/// Ordered sample indices forming one optimizer step's batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Minibatch(pub Vec<usize>);

impl Minibatch {
    pub fn full(n: usize) -> Self {
        Minibatch((0..n).collect())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in &self.0 {
            if i >= n {
                return Err(Error::DimMismatch(format!("batch index {i} >= {n}")));
            }
            if seen[i] {
                return Err(Error::DimMismatch(format!("duplicate batch index {i}")));
            }
            seen[i] = true;
        }
        if self.0.is_empty() {
            return Err(Error::BadBatchSize);
        }
        Ok(())
    }
}

// ----- mask selection ---------------------------------------------------------

/// The masks in force for one round, any subset of the three granularities.
/// Absent kinds behave as identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaskSelection<'a> {
    pub feature: Option<&'a BitMatrix>,
    pub sample: Option<&'a BitMatrix>,
    pub class: Option<&'a BitMatrix>,
}

impl<'a> MaskSelection<'a> {
    pub fn none() -> Self {
        MaskSelection::default()
    }

    pub fn feature_only(b: &'a BitMatrix) -> Self {
        MaskSelection {
            feature: Some(b),
            ..Default::default()
        }
    }

    pub fn sample_only(b: &'a BitMatrix) -> Self {
        MaskSelection {
            sample: Some(b),
            ..Default::default()
        }
    }

    pub fn class_only(b: &'a BitMatrix) -> Self {
        MaskSelection {
            class: Some(b),
            ..Default::default()
        }
    }

    pub fn validate(&self, dataset: &FixedDataset) -> Result<()> {
        let n = dataset.samples();
        if let Some(b) = self.feature {
            if b.kind != MaskKind::Feature {
                return Err(Error::KindMismatch {
                    expected: "feature".into(),
                    got: b.kind.to_string(),
                });
            }
            if b.rows != n || b.cols != dataset.num_features() {
                return Err(Error::DimMismatch("feature mask shape".into()));
            }
        }
        if let Some(b) = self.sample {
            if b.kind != MaskKind::Sample {
                return Err(Error::KindMismatch {
                    expected: "sample".into(),
                    got: b.kind.to_string(),
                });
            }
            if b.rows != n || b.cols != 1 {
                return Err(Error::DimMismatch("sample mask shape".into()));
            }
        }
        if let Some(b) = self.class {
            if dataset.task != TaskKind::Classification {
                return Err(Error::BadParams(
                    "class masks apply to classification tasks only".into(),
                ));
            }
            if b.kind != MaskKind::Class {
                return Err(Error::KindMismatch {
                    expected: "class".into(),
                    got: b.kind.to_string(),
                });
            }
            if b.rows != n || b.cols != dataset.num_labels() {
                return Err(Error::DimMismatch("class mask shape".into()));
            }
        }
        Ok(())
    }

    pub fn feature_bit(&self, i: usize, j: usize) -> u8 {
        self.feature.map_or(1, |b| b.get(i, j))
    }

    pub fn class_bit(&self, i: usize, k: usize) -> u8 {
        self.class.map_or(0, |b| b.get(i, k))
    }

    /// Effective per-sample gate: OR over the feature-mask row, ANDed with
    /// the sample bit. A gate of 0 removes the sample from every gradient
    /// term and from the effective count.
    pub fn gate_bits(&self, n: usize) -> Vec<u8> {
        let feature_or: Vec<u8> = match self.feature {
            Some(b) => flatten_sample_bits(b).expect("validated feature mask"),
            None => vec![1; n],
        };
        (0..n)
            .map(|i| feature_or[i] & self.sample.map_or(1, |b| b.get(i, 0)))
            .collect()
    }
}

// ----- real-valued path -------------------------------------------------------

/// Affine prediction `sum_j x_j w_j + bias`.
pub fn predict_lr(params: &LrParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.weights.len() {
        return Err(Error::DimMismatch(format!(
            "{} features vs {} weights",
            x.len(),
            params.weights.len()
        )));
    }
    Ok(x.iter()
        .zip(&params.weights)
        .map(|(xj, wj)| xj * wj)
        .sum::<f64>()
        + params.bias)
}

/// Gradient of one sample's loss term (residual convention:
/// `prediction - observation`), unnormalized.
pub fn per_sample_grad_lr(params: &LrParams, x: &[f64], y: f64) -> Result<LrParams> {
    let res = predict_lr(params, x)? - y;
    Ok(LrParams {
        weights: x.iter().map(|xj| xj * res).collect(),
        bias: res,
    })
}

/// Masked LR gradient summed over the batch plus the effective count.
/// Features are gated entrywise and each sample's residual is gated by its
/// effective bit.
pub fn lr_masked_grad_sum(
    params: &LrParams,
    dataset: &FixedDataset,
    masks: &MaskSelection,
    batch: &Minibatch,
) -> Result<(LrParams, u64)> {
    if dataset.task != TaskKind::Regression {
        return Err(Error::BadParams("LR gradients need a regression task".into()));
    }
    masks.validate(dataset)?;
    batch.validate(dataset.samples())?;
    let j = dataset.num_features();
    if params.weights.len() != j {
        return Err(Error::DimMismatch("weight count vs features".into()));
    }
    let gates = masks.gate_bits(dataset.samples());
    let mut sum_w = vec![0.0; j];
    let mut sum_b = 0.0;
    let mut n_eff = 0u64;
    for &i in &batch.0 {
        let xb: Vec<f64> = (0..j)
            .map(|c| dataset.features_real[i][c] * masks.feature_bit(i, c) as f64)
            .collect();
        let res = predict_lr(params, &xb)? - dataset.labels_real[i][0];
        let gated = gates[i] as f64 * res;
        for c in 0..j {
            sum_w[c] += xb[c] * gated;
        }
        sum_b += gated;
        n_eff += gates[i] as u64;
    }
    Ok((
        LrParams {
            weights: sum_w,
            bias: sum_b,
        },
        n_eff,
    ))
}

fn normalize_lr(sum: LrParams, n_eff: u64) -> Result<LrParams> {
    if n_eff == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let n = n_eff as f64;
    Ok(LrParams {
        weights: sum.weights.iter().map(|w| w / n).collect(),
        bias: sum.bias / n,
    })
}

/// Feature-masked LR gradient, normalized by the effective count.
pub fn grad_lr_feature_masked(
    params: &LrParams,
    dataset: &FixedDataset,
    mask: &BitMatrix,
) -> Result<LrParams> {
    let sel = MaskSelection::feature_only(mask);
    let batch = Minibatch::full(dataset.samples());
    let (sum, n_eff) = lr_masked_grad_sum(params, dataset, &sel, &batch)?;
    normalize_lr(sum, n_eff)
}

/// Sample-masked LR gradient, normalized by the effective count.
pub fn grad_lr_sample_masked(
    params: &LrParams,
    dataset: &FixedDataset,
    mask: &BitMatrix,
) -> Result<LrParams> {
    let sel = MaskSelection::sample_only(mask);
    let batch = Minibatch::full(dataset.samples());
    let (sum, n_eff) = lr_masked_grad_sum(params, dataset, &sel, &batch)?;
    normalize_lr(sum, n_eff)
}

/// One sample's forward pass: hidden pre-activations, activations, outputs.
fn nn_forward(params: &NnParams, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = params.b1.len();
    let k = params.b2.len();
    let z1: Vec<f64> = (0..h)
        .map(|hh| {
            x.iter()
                .enumerate()
                .map(|(j, xj)| xj * params.w1[j][hh])
                .sum::<f64>()
                + params.b1[hh]
        })
        .collect();
    let a1: Vec<f64> = z1.iter().map(|z| if *z >= 0.0 { *z } else { 0.0 }).collect();
    let out: Vec<f64> = (0..k)
        .map(|kk| {
            a1.iter()
                .enumerate()
                .map(|(hh, a)| a * params.w2[hh][kk])
                .sum::<f64>()
                + params.b2[kk]
        })
        .collect();
    (z1, a1, out)
}

/// Masked NN gradient summed over the batch plus the effective count. MSE
/// loss over a linear output layer with a ReLU hidden layer; inputs are
/// feature-masked, labels class-corrected, residuals sample-gated.
pub fn nn_masked_grad_sum(
    params: &NnParams,
    dataset: &FixedDataset,
    masks: &MaskSelection,
    batch: &Minibatch,
) -> Result<(NnParams, u64)> {
    if dataset.task != TaskKind::Classification {
        return Err(Error::NonBinaryLabel);
    }
    masks.validate(dataset)?;
    batch.validate(dataset.samples())?;
    let (j, h, k) = params.shape();
    if j != dataset.num_features() || k != dataset.num_labels() {
        return Err(Error::DimMismatch("model shape vs dataset".into()));
    }
    let gates = masks.gate_bits(dataset.samples());
    let mut g = NnParams {
        w1: vec![vec![0.0; h]; j],
        b1: vec![0.0; h],
        w2: vec![vec![0.0; k]; h],
        b2: vec![0.0; k],
    };
    let mut n_eff = 0u64;
    let label_bits = dataset.label_bits()?;
    for &i in &batch.0 {
        let xb: Vec<f64> = (0..j)
            .map(|c| dataset.features_real[i][c] * masks.feature_bit(i, c) as f64)
            .collect();
        let (z1, a1, out) = nn_forward(params, &xb);
        let gate = gates[i] as f64;
        let e: Vec<f64> = (0..k)
            .map(|kk| {
                let y = (label_bits[i][kk] ^ masks.class_bit(i, kk)) as f64;
                gate * (out[kk] - y)
            })
            .collect();
        for hh in 0..h {
            for kk in 0..k {
                g.w2[hh][kk] += a1[hh] * e[kk];
            }
        }
        for kk in 0..k {
            g.b2[kk] += e[kk];
        }
        for hh in 0..h {
            let da: f64 = (0..k).map(|kk| params.w2[hh][kk] * e[kk]).sum();
            let dz = if z1[hh] >= 0.0 { da } else { 0.0 };
            for c in 0..j {
                g.w1[c][hh] += xb[c] * dz;
            }
            g.b1[hh] += dz;
        }
        n_eff += gates[i] as u64;
    }
    Ok((g, n_eff))
}

/// Masked NN gradient with feature and class masks, normalized.
pub fn grad_nn_masked(
    params: &NnParams,
    dataset: &FixedDataset,
    feature_mask: Option<&BitMatrix>,
    class_mask: Option<&BitMatrix>,
) -> Result<NnParams> {
    let sel = MaskSelection {
        feature: feature_mask,
        sample: None,
        class: class_mask,
    };
    let batch = Minibatch::full(dataset.samples());
    let (sum, n_eff) = nn_masked_grad_sum(params, dataset, &sel, &batch)?;
    if n_eff == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let n = n_eff as f64;
    Ok(NnParams {
        w1: sum.w1.iter().map(|r| r.iter().map(|v| v / n).collect()).collect(),
        b1: sum.b1.iter().map(|v| v / n).collect(),
        w2: sum.w2.iter().map(|r| r.iter().map(|v| v / n).collect()).collect(),
        b2: sum.b2.iter().map(|v| v / n).collect(),
    })
}

/// Descent step on the summed gradient: `params - (eta / divisor) * sum`.
/// Divisor conventions: effective count for BGD/MSGD, 1 for SGD.
pub fn step_lr(params: &LrParams, grad_sum: &LrParams, eta: f64, divisor: u64) -> Result<LrParams> {
    if divisor == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    if grad_sum.weights.len() != params.weights.len() {
        return Err(Error::DimMismatch("gradient vs params".into()));
    }
    let s = eta / divisor as f64;
    Ok(LrParams {
        weights: params
            .weights
            .iter()
            .zip(&grad_sum.weights)
            .map(|(w, g)| w - s * g)
            .collect(),
        bias: params.bias - s * grad_sum.bias,
    })
}

pub fn step_nn(params: &NnParams, grad_sum: &NnParams, eta: f64, divisor: u64) -> Result<NnParams> {
    if divisor == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let s = eta / divisor as f64;
    let step_mat = |p: &Vec<Vec<f64>>, g: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        p.iter()
            .zip(g)
            .map(|(pr, gr)| pr.iter().zip(gr).map(|(pv, gv)| pv - s * gv).collect())
            .collect()
    };
    let step_vec = |p: &Vec<f64>, g: &Vec<f64>| -> Vec<f64> {
        p.iter().zip(g).map(|(pv, gv)| pv - s * gv).collect()
    };
    Ok(NnParams {
        w1: step_mat(&params.w1, &grad_sum.w1),
        b1: step_vec(&params.b1, &grad_sum.b1),
        w2: step_mat(&params.w2, &grad_sum.w2),
        b2: step_vec(&params.b2, &grad_sum.b2),
    })
}

/// Euclidean norm of the difference of two flattened gradients.
pub fn grad_distance(g1: &[f64], g2: &[f64]) -> Result<f64> {
    if g1.len() != g2.len() {
        return Err(Error::DimMismatch(format!(
            "gradient lengths {} vs {}",
            g1.len(),
            g2.len()
        )));
    }
    Ok(g1
        .iter()
        .zip(g2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn flatten_lr(g: &LrParams) -> Vec<f64> {
    let mut out = g.weights.clone();
    out.push(g.bias);
    out
}

pub fn flatten_nn(g: &NnParams) -> Vec<f64> {
    g.w1.iter()
        .flatten()
        .chain(g.b1.iter())
        .chain(g.w2.iter().flatten())
        .chain(g.b2.iter())
        .copied()
        .collect()
}

// ----- deletion / correction oracle construction ------------------------------

/// Materializes the paper-sense "updated dataset": masked features zeroed,
/// class labels corrected, and fully-gated-out samples dropped. Returns the
/// reduced dataset plus the kept row indices.
pub fn reduced_dataset(
    dataset: &FixedDataset,
    masks: &MaskSelection,
) -> Result<(FixedDataset, Vec<usize>)> {
    masks.validate(dataset)?;
    let n = dataset.samples();
    let gates = masks.gate_bits(n);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut kept = Vec::new();
    for i in 0..n {
        if gates[i] == 0 {
            continue;
        }
        kept.push(i);
        features.push(
            (0..dataset.num_features())
                .map(|c| dataset.features_real[i][c] * masks.feature_bit(i, c) as f64)
                .collect(),
        );
        match dataset.task {
            TaskKind::Regression => labels.push(dataset.labels_real[i].clone()),
            TaskKind::Classification => {
                let bits = dataset.label_bits()?;
                labels.push(
                    (0..dataset.num_labels())
                        .map(|kk| (bits[i][kk] ^ masks.class_bit(i, kk)) as f64)
                        .collect(),
                );
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyEffectiveSet);
    }
    let reduced = FixedDataset::from_rows(features, labels, dataset.task, dataset.config)?;
    Ok((reduced, kept))
}

// ----- fixed-point path -------------------------------------------------------

/// Scale-f encoding of a classification label bit after class correction.
fn corrected_label_scaled(
    dataset: &FixedDataset,
    masks: &MaskSelection,
    i: usize,
    k: usize,
    cfg: &FixedConfig,
) -> FieldElem {
    // labels are raw bits for classification; XOR then scale by 2^f
    let y = if dataset.labels[i][k] == FieldElem::ONE { 1u8 } else { 0 };
    let corrected = y ^ masks.class_bit(i, k);
    if corrected == 1 {
        cfg.one()
    } else {
        FieldElem::ZERO
    }
}

fn gate_fe(bit: u8) -> FieldElem {
    if bit == 1 {
        FieldElem::ONE
    } else {
        FieldElem::ZERO
    }
}

/// Canonical fixed-point LR step over a batch. Returns the updated
/// parameters and the effective count. Operation order matches the LR step
/// circuit exactly.
pub fn fixed_lr_step(
    params: &FixedLrParams,
    dataset: &FixedDataset,
    masks: &MaskSelection,
    batch: &Minibatch,
    eta: FieldElem,
    cfg: &FixedConfig,
) -> Result<(FixedLrParams, u64)> {
    if dataset.task != TaskKind::Regression {
        return Err(Error::BadParams("LR step needs a regression task".into()));
    }
    masks.validate(dataset)?;
    batch.validate(dataset.samples())?;
    let j = dataset.num_features();
    let gates = masks.gate_bits(dataset.samples());

    let mut sum_w_2f = vec![FieldElem::ZERO; j];
    let mut sum_b_f = FieldElem::ZERO;
    let mut n_eff = 0u64;
    for &i in &batch.0 {
        let xb: Vec<FieldElem> = (0..j)
            .map(|c| dataset.features[i][c] * gate_fe(masks.feature_bit(i, c)))
            .collect();
        // dot product at scale 2f, one rescale
        let mut dot = FieldElem::ZERO;
        for c in 0..j {
            dot += xb[c] * params.weights[c];
        }
        let pred = fixed::rescale_sum(dot, cfg)? + params.bias;
        let res = pred - dataset.labels[i][0];
        let gres = gate_fe(gates[i]) * res;
        for c in 0..j {
            sum_w_2f[c] += xb[c] * gres;
        }
        sum_b_f += gres;
        n_eff += gates[i] as u64;
    }
    if n_eff == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let (inv, _rem) = fixed::divisor_inverse(n_eff, cfg)?;
    let scale = fixed::mul_rescale(eta, inv, cfg)?;
    let mut weights = Vec::with_capacity(j);
    for c in 0..j {
        let g = fixed::rescale_sum(sum_w_2f[c], cfg)?;
        let upd = fixed::mul_rescale(scale, g, cfg)?;
        weights.push(params.weights[c] - upd);
    }
    let upd_b = fixed::mul_rescale(scale, sum_b_f, cfg)?;
    Ok((
        FixedLrParams {
            weights,
            bias: params.bias - upd_b,
        },
        n_eff,
    ))
}

/// Canonical fixed-point NN step over a batch; mirrors the NN step circuit.
pub fn fixed_nn_step(
    params: &FixedNnParams,
    dataset: &FixedDataset,
    masks: &MaskSelection,
    batch: &Minibatch,
    eta: FieldElem,
    cfg: &FixedConfig,
) -> Result<(FixedNnParams, u64)> {
    if dataset.task != TaskKind::Classification {
        return Err(Error::NonBinaryLabel);
    }
    masks.validate(dataset)?;
    batch.validate(dataset.samples())?;
    let j = dataset.num_features();
    let h = params.b1.len();
    let k = params.b2.len();
    let gates = masks.gate_bits(dataset.samples());

    let mut g_w1_2f = vec![vec![FieldElem::ZERO; h]; j];
    let mut g_b1_f = vec![FieldElem::ZERO; h];
    let mut g_w2_2f = vec![vec![FieldElem::ZERO; k]; h];
    let mut g_b2_f = vec![FieldElem::ZERO; k];
    let mut n_eff = 0u64;

    for &i in &batch.0 {
        let xb: Vec<FieldElem> = (0..j)
            .map(|c| dataset.features[i][c] * gate_fe(masks.feature_bit(i, c)))
            .collect();
        // forward: hidden layer
        let mut z1 = Vec::with_capacity(h);
        let mut relu_sign = Vec::with_capacity(h);
        let mut a1 = Vec::with_capacity(h);
        for hh in 0..h {
            let mut acc = FieldElem::ZERO;
            for c in 0..j {
                acc += xb[c] * params.w1[c][hh];
            }
            let z = fixed::rescale_sum(acc, cfg)? + params.b1[hh];
            let sign = fixed::signed_lift(z) >= num_bigint::BigInt::from(0);
            relu_sign.push(sign);
            a1.push(if sign { z } else { FieldElem::ZERO });
            z1.push(z);
        }
        // forward: output layer
        let mut e = Vec::with_capacity(k);
        let gate = gate_fe(gates[i]);
        for kk in 0..k {
            let mut acc = FieldElem::ZERO;
            for hh in 0..h {
                acc += a1[hh] * params.w2[hh][kk];
            }
            let out = fixed::rescale_sum(acc, cfg)? + params.b2[kk];
            let y = corrected_label_scaled(dataset, masks, i, kk, cfg);
            e.push(gate * (out - y));
        }
        // backward
        for hh in 0..h {
            for kk in 0..k {
                g_w2_2f[hh][kk] += a1[hh] * e[kk];
            }
        }
        for kk in 0..k {
            g_b2_f[kk] += e[kk];
        }
        for hh in 0..h {
            let mut acc = FieldElem::ZERO;
            for kk in 0..k {
                acc += params.w2[hh][kk] * e[kk];
            }
            let da = fixed::rescale_sum(acc, cfg)?;
            let dz = if relu_sign[hh] { da } else { FieldElem::ZERO };
            for c in 0..j {
                g_w1_2f[c][hh] += xb[c] * dz;
            }
            g_b1_f[hh] += dz;
        }
        n_eff += gates[i] as u64;
    }
    if n_eff == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let (inv, _rem) = fixed::divisor_inverse(n_eff, cfg)?;
    let scale = fixed::mul_rescale(eta, inv, cfg)?;

    let mut out = params.clone();
    for c in 0..j {
        for hh in 0..h {
            let g = fixed::rescale_sum(g_w1_2f[c][hh], cfg)?;
            out.w1[c][hh] = params.w1[c][hh] - fixed::mul_rescale(scale, g, cfg)?;
        }
    }
    for hh in 0..h {
        out.b1[hh] = params.b1[hh] - fixed::mul_rescale(scale, g_b1_f[hh], cfg)?;
        for kk in 0..k {
            let g = fixed::rescale_sum(g_w2_2f[hh][kk], cfg)?;
            out.w2[hh][kk] = params.w2[hh][kk] - fixed::mul_rescale(scale, g, cfg)?;
        }
    }
    for kk in 0..k {
        out.b2[kk] = params.b2[kk] - fixed::mul_rescale(scale, g_b2_f[kk], cfg)?;
    }
    Ok((out, n_eff))
}

/// One sample's fixed-point LR gradient (divisor 1), flattened `[w..., bias]`.
/// Mirrors the per-sample gradient lane of the detection circuit.
pub fn fixed_lr_per_sample_grad(
    params: &FixedLrParams,
    x: &[FieldElem],
    y: FieldElem,
    cfg: &FixedConfig,
) -> Result<Vec<FieldElem>> {
    let j = params.weights.len();
    if x.len() != j {
        return Err(Error::DimMismatch("feature row vs weights".into()));
    }
    let mut dot = FieldElem::ZERO;
    for c in 0..j {
        dot += x[c] * params.weights[c];
    }
    let pred = fixed::rescale_sum(dot, cfg)? + params.bias;
    let res = pred - y;
    let mut out = Vec::with_capacity(j + 1);
    for c in 0..j {
        out.push(fixed::mul_rescale(x[c], res, cfg)?);
    }
    out.push(res);
    Ok(out)
}

/// One sample's fixed-point NN gradient (divisor 1), flattened in
/// W1, b1, W2, b2 order. `y_scaled` are the scale-f label encodings.
pub fn fixed_nn_per_sample_grad(
    params: &FixedNnParams,
    x: &[FieldElem],
    y_scaled: &[FieldElem],
    cfg: &FixedConfig,
) -> Result<Vec<FieldElem>> {
    let j = params.w1.len();
    let h = params.b1.len();
    let k = params.b2.len();
    if x.len() != j || y_scaled.len() != k {
        return Err(Error::DimMismatch("sample shape vs model".into()));
    }
    let mut z1 = Vec::with_capacity(h);
    let mut sign = Vec::with_capacity(h);
    let mut a1 = Vec::with_capacity(h);
    for hh in 0..h {
        let mut acc = FieldElem::ZERO;
        for c in 0..j {
            acc += x[c] * params.w1[c][hh];
        }
        let z = fixed::rescale_sum(acc, cfg)? + params.b1[hh];
        let s = fixed::signed_lift(z) >= num_bigint::BigInt::from(0);
        sign.push(s);
        a1.push(if s { z } else { FieldElem::ZERO });
        z1.push(z);
    }
    let mut e = Vec::with_capacity(k);
    for kk in 0..k {
        let mut acc = FieldElem::ZERO;
        for hh in 0..h {
            acc += a1[hh] * params.w2[hh][kk];
        }
        let out = fixed::rescale_sum(acc, cfg)? + params.b2[kk];
        e.push(out - y_scaled[kk]);
    }
    let mut dz = Vec::with_capacity(h);
    for hh in 0..h {
        let mut acc = FieldElem::ZERO;
        for kk in 0..k {
            acc += params.w2[hh][kk] * e[kk];
        }
        let da = fixed::rescale_sum(acc, cfg)?;
        dz.push(if sign[hh] { da } else { FieldElem::ZERO });
    }
    let mut out = Vec::new();
    for c in 0..j {
        for hh in 0..h {
            out.push(fixed::mul_rescale(x[c], dz[hh], cfg)?);
        }
    }
    out.extend(dz.iter().copied());
    for hh in 0..h {
        for kk in 0..k {
            out.push(fixed::mul_rescale(a1[hh], e[kk], cfg)?);
        }
    }
    out.extend(e.iter().copied());
    Ok(out)
}

/// Fixed-point squared gradient distance: differences squared at scale 2f,
/// summed, rescaled once. Mirrors the detection circuit's distance lane.
pub fn fixed_grad_dist_squared(
    g1: &[FieldElem],
    g2: &[FieldElem],
    cfg: &FixedConfig,
) -> Result<FieldElem> {
    if g1.len() != g2.len() {
        return Err(Error::DimMismatch("gradient lengths".into()));
    }
    let mut acc = FieldElem::ZERO;
    for (a, b) in g1.iter().zip(g2) {
        let d = *a - *b;
        acc += d * d;
    }
    fixed::rescale_sum(acc, cfg)
}
