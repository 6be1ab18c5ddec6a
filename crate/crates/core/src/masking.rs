//! Unlearning bit matrices: construction, the masking algebra at feature,
//! sample, and class granularity, and the absorbing state rule that makes
//! removal irrecoverable across rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskKind {
    /// N x J, gates individual input features (AND/product semantics).
    Feature,
    /// N x 1, gates whole samples via the residual.
    Sample,
    /// N x K, corrects class labels (XOR semantics).
    Class,
}

impl std::fmt::Display for MaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MaskKind::Feature => "feature",
            MaskKind::Sample => "sample",
            MaskKind::Class => "class",
        };
        write!(f, "{s}")
    }
}

/// A committed unlearning mask: row-major 0/1 entries plus the unlearning
/// round it belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    pub kind: MaskKind,
    pub rows: usize,
    pub cols: usize,
    pub round: u32,
    bits: Vec<u8>,
}

impl BitMatrix {
    pub fn new(kind: MaskKind, rows: usize, cols: usize, round: u32, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "expected {} bits, got {}",
                rows * cols,
                bits.len()
            )));
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::NonBinaryLabel);
        }
        if kind == MaskKind::Sample && cols != 1 {
            return Err(Error::DimMismatch("sample masks are N x 1".into()));
        }
        Ok(BitMatrix {
            kind,
            rows,
            cols,
            round,
            bits,
        })
    }

    /// The identity mask for removal-based kinds (all ones).
    pub fn all_ones(kind: MaskKind, rows: usize, cols: usize, round: u32) -> Self {
        BitMatrix {
            kind,
            rows,
            cols,
            round,
            bits: vec![1; rows * cols],
        }
    }

    /// The identity mask for correction (all zeros = XOR identity).
    pub fn all_zeros(kind: MaskKind, rows: usize, cols: usize, round: u32) -> Self {
        BitMatrix {
            kind,
            rows,
            cols,
            round,
            bits: vec![0; rows * cols],
        }
    }

    /// Kind-appropriate identity: ones for Feature/Sample, zeros for Class.
    pub fn identity(kind: MaskKind, rows: usize, cols: usize, round: u32) -> Self {
        match kind {
            MaskKind::Feature | MaskKind::Sample => Self::all_ones(kind, rows, cols, round),
            MaskKind::Class => Self::all_zeros(kind, rows, cols, round),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, bit: u8) {
        assert!(bit <= 1);
        self.bits[row * self.cols + col] = bit;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_identity(&self) -> bool {
        match self.kind {
            MaskKind::Feature | MaskKind::Sample => self.bits.iter().all(|b| *b == 1),
            MaskKind::Class => self.bits.iter().all(|b| *b == 0),
        }
    }

    /// Field-element view of the bits, row-major (commitment input).
    pub fn to_field_elems(&self) -> Vec<FieldElem> {
        self.bits
            .iter()
            .map(|b| {
                if *b == 1 {
                    FieldElem::ONE
                } else {
                    FieldElem::ZERO
                }
            })
            .collect()
    }

    /// Packs the row-major bits into field elements, 250 bits per element.
    /// Small masks fit a single element, keeping in-circuit commitments cheap.
    pub fn packed_field_elems(&self) -> Vec<FieldElem> {
        pack_bits_to_field(&self.bits)
    }

    /// Packed serialization with a (kind, rows, cols, round) header.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + self.bits.len() / 8 + 1);
        out.push(match self.kind {
            MaskKind::Feature => 0u8,
            MaskKind::Sample => 1,
            MaskKind::Class => 2,
        });
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        out.extend_from_slice(&self.round.to_le_bytes());
        let mut packed = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, b) in self.bits.iter().enumerate() {
            packed[i / 8] |= b << (i % 8);
        }
        out.extend_from_slice(&packed);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 13 {
            return Err(Error::MalformedRecord("bit matrix header truncated".into()));
        }
        let kind = match bytes[0] {
            0 => MaskKind::Feature,
            1 => MaskKind::Sample,
            2 => MaskKind::Class,
            k => {
                return Err(Error::MalformedRecord(format!("unknown mask kind {k}")));
            }
        };
        let rows = u32::from_le_bytes(bytes[1..5].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let round = u32::from_le_bytes(bytes[9..13].try_into().unwrap());
        let nbits = rows * cols;
        let packed = &bytes[13..];
        if packed.len() != nbits.div_ceil(8) {
            return Err(Error::MalformedRecord("bit matrix payload truncated".into()));
        }
        let bits: Vec<u8> = (0..nbits).map(|i| (packed[i / 8] >> (i % 8)) & 1).collect();
        BitMatrix::new(kind, rows, cols, round, bits)
    }
}

/// Packs a 0/1 slice into field elements, 250 bits per element, LSB first.
pub fn pack_bits_to_field(bits: &[u8]) -> Vec<FieldElem> {
    bits.chunks(250)
        .map(|chunk| {
            let mut acc = FieldElem::ZERO;
            for (i, b) in chunk.iter().enumerate() {
                if *b == 1 {
                    acc += FieldElem::two_pow(i as u32);
                }
            }
            acc
        })
        .collect()
}

fn check_same_shape(a: &BitMatrix, b: &BitMatrix) -> Result<()> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch {
            expected: a.kind.to_string(),
            got: b.kind.to_string(),
        });
    }
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::DimMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// Hadamard product of the feature matrix with a Feature mask: masked
/// entries become zero, retained entries are unchanged.
pub fn apply_feature_mask(
    features: &[Vec<FieldElem>],
    mask: &BitMatrix,
) -> Result<Vec<Vec<FieldElem>>> {
    if mask.kind != MaskKind::Feature {
        return Err(Error::KindMismatch {
            expected: "feature".into(),
            got: mask.kind.to_string(),
        });
    }
    if features.len() != mask.rows || features.iter().any(|r| r.len() != mask.cols) {
        return Err(Error::DimMismatch(format!(
            "features {}x? vs mask {}x{}",
            features.len(),
            mask.rows,
            mask.cols
        )));
    }
    Ok(features
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    if mask.get(i, j) == 1 {
                        *x
                    } else {
                        FieldElem::ZERO
                    }
                })
                .collect()
        })
        .collect())
}

/// Column-wise OR flatten of a Feature mask: `b_i = b_{i,1} | ... | b_{i,J}`.
/// `b_i = 0` iff the whole sample is unlearned.
pub fn flatten_sample_bits(mask: &BitMatrix) -> Result<Vec<u8>> {
    if mask.kind != MaskKind::Feature {
        return Err(Error::KindMismatch {
            expected: "feature".into(),
            got: mask.kind.to_string(),
        });
    }
    Ok((0..mask.rows)
        .map(|i| (0..mask.cols).map(|j| mask.get(i, j)).fold(0, |a, b| a | b))
        .collect())
}

/// Effective sample count after masking.
pub fn effective_count(bits: &[u8]) -> u64 {
    bits.iter().map(|b| *b as u64).sum()
}

/// The state-preserving update for removal-based masks: elementwise AND, so
/// zero bits are absorbing. Class masks are excluded (correction carries no
/// irrecoverability state).
pub fn update_state(prev: &BitMatrix, cur: &BitMatrix) -> Result<BitMatrix> {
    if prev.kind == MaskKind::Class {
        return Err(Error::KindMismatch {
            expected: "feature or sample".into(),
            got: "class".into(),
        });
    }
    check_same_shape(prev, cur)?;
    if prev.round + 1 != cur.round {
        return Err(Error::RoundSkew {
            prev: prev.round,
            cur: cur.round,
        });
    }
    let bits = prev
        .bits
        .iter()
        .zip(&cur.bits)
        .map(|(a, b)| a & b)
        .collect();
    BitMatrix::new(cur.kind, cur.rows, cur.cols, cur.round, bits)
}

/// Round-to-round accumulation for Class masks: elementwise XOR, giving the
/// net correction applied to the original labels.
pub fn accumulate_class(prev: &BitMatrix, cur: &BitMatrix) -> Result<BitMatrix> {
    if prev.kind != MaskKind::Class {
        return Err(Error::KindMismatch {
            expected: "class".into(),
            got: prev.kind.to_string(),
        });
    }
    check_same_shape(prev, cur)?;
    if prev.round + 1 != cur.round {
        return Err(Error::RoundSkew {
            prev: prev.round,
            cur: cur.round,
        });
    }
    let bits = prev
        .bits
        .iter()
        .zip(&cur.bits)
        .map(|(a, b)| a ^ b)
        .collect();
    BitMatrix::new(cur.kind, cur.rows, cur.cols, cur.round, bits)
}

/// Class-label correction: `y' = y XOR b`, elementwise on binary labels.
pub fn apply_class_mask(labels: &[Vec<u8>], mask: &BitMatrix) -> Result<Vec<Vec<u8>>> {
    if mask.kind != MaskKind::Class {
        return Err(Error::KindMismatch {
            expected: "class".into(),
            got: mask.kind.to_string(),
        });
    }
    if labels.len() != mask.rows || labels.iter().any(|r| r.len() != mask.cols) {
        return Err(Error::DimMismatch(format!(
            "labels {}x? vs mask {}x{}",
            labels.len(),
            mask.rows,
            mask.cols
        )));
    }
    if labels.iter().flatten().any(|y| *y > 1) {
        return Err(Error::NonBinaryLabel);
    }
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(k, y)| y ^ mask.get(i, k))
                .collect()
        })
        .collect())
}

/// An owner's unlearning request: up to one mask per granularity, covering
/// exactly that owner's rows. Kinds left out default to identity masks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnlearningRequest {
    pub owner_id: String,
    pub feature: Option<BitMatrix>,
    pub sample: Option<BitMatrix>,
    pub class: Option<BitMatrix>,
}

impl UnlearningRequest {
    pub fn masks(&self) -> impl Iterator<Item = &BitMatrix> {
        self.feature
            .iter()
            .chain(self.sample.iter())
            .chain(self.class.iter())
    }
}

/// Row-range layout of a multi-owner dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetLayout {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    /// (owner id, row range), ranges disjoint and covering `0..samples`.
    pub owners: Vec<(String, std::ops::Range<usize>)>,
}

impl DatasetLayout {
    /// Checks the disjoint-and-covering invariant.
    pub fn validate(&self) -> Result<()> {
        let mut sorted: Vec<_> = self.owners.iter().map(|(_, r)| r.clone()).collect();
        sorted.sort_by_key(|r| r.start);
        let mut next = 0usize;
        for r in &sorted {
            if r.start != next || r.end <= r.start {
                return Err(Error::OverlappingRows(format!(
                    "range {}..{} leaves a gap or overlap at row {next}",
                    r.start, r.end
                )));
            }
            next = r.end;
        }
        if next != self.samples {
            return Err(Error::OverlappingRows(format!(
                "rows covered up to {next}, dataset has {}",
                self.samples
            )));
        }
        Ok(())
    }

    pub fn owner_range(&self, owner_id: &str) -> Result<std::ops::Range<usize>> {
        self.owners
            .iter()
            .find(|(id, _)| id == owner_id)
            .map(|(_, r)| r.clone())
            .ok_or_else(|| Error::UnknownOwner(owner_id.to_string()))
    }
}

/// Merged per-round global masks, one per granularity.
#[derive(Clone, Debug)]
pub struct GlobalMasks {
    pub feature: BitMatrix,
    pub sample: BitMatrix,
    pub class: BitMatrix,
}

impl GlobalMasks {
    pub fn identity(layout: &DatasetLayout, round: u32) -> Self {
        GlobalMasks {
            feature: BitMatrix::all_ones(MaskKind::Feature, layout.samples, layout.features, round),
            sample: BitMatrix::all_ones(MaskKind::Sample, layout.samples, 1, round),
            class: BitMatrix::all_zeros(MaskKind::Class, layout.samples, layout.classes, round),
        }
    }
}

/// Block-stacks the owners' masks into global per-kind matrices. Owners who
/// did not submit contribute identity blocks.
pub fn merge_requests(
    requests: &[UnlearningRequest],
    layout: &DatasetLayout,
    round: u32,
) -> Result<GlobalMasks> {
    layout.validate()?;
    let mut global = GlobalMasks::identity(layout, round);
    for req in requests {
        let range = layout.owner_range(&req.owner_id)?;
        let owner_rows = range.end - range.start;
        for mask in req.masks() {
            let (target, cols): (&mut BitMatrix, usize) = match mask.kind {
                MaskKind::Feature => (&mut global.feature, layout.features),
                MaskKind::Sample => (&mut global.sample, 1),
                MaskKind::Class => (&mut global.class, layout.classes),
            };
            if mask.rows != owner_rows || mask.cols != cols {
                return Err(Error::DimMismatch(format!(
                    "owner {} submitted {}x{} {} mask, expected {}x{}",
                    req.owner_id, mask.rows, mask.cols, mask.kind, owner_rows, cols
                )));
            }
            for i in 0..mask.rows {
                for j in 0..mask.cols {
                    target.set(range.start + i, j, mask.get(i, j));
                }
            }
        }
    }
    Ok(global)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn feature_mask(rows: usize, cols: usize, bits: &[u8], round: u32) -> BitMatrix {
        BitMatrix::new(MaskKind::Feature, rows, cols, round, bits.to_vec()).unwrap()
    }

    #[test]
    fn state_update_bit_row() {
        // worked example: the 8-bit state update for irrecoverable unlearning
        let prev = feature_mask(1, 8, &[1, 1, 0, 1, 0, 1, 0, 0], 1);
        let cur = feature_mask(1, 8, &[1, 1, 1, 1, 1, 0, 1, 1], 2);
        let merged = update_state(&prev, &cur).unwrap();
        assert_eq!(merged.bits(), &[1, 1, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn state_update_identity_cases() {
        let ones = BitMatrix::all_ones(MaskKind::Sample, 4, 1, 1);
        let cur = BitMatrix::new(MaskKind::Sample, 4, 1, 2, vec![1, 0, 1, 1]).unwrap();
        assert_eq!(update_state(&ones, &cur).unwrap().bits(), cur.bits());
        let mut ones2 = BitMatrix::all_ones(MaskKind::Sample, 4, 1, 2);
        ones2.round = 2;
        let prev = BitMatrix::new(MaskKind::Sample, 4, 1, 1, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(update_state(&prev, &ones2).unwrap().bits(), prev.bits());
    }

    #[test]
    fn state_update_guards() {
        let prev = feature_mask(1, 4, &[1, 1, 1, 1], 1);
        let skewed = feature_mask(1, 4, &[1, 1, 1, 1], 3);
        assert!(matches!(
            update_state(&prev, &skewed),
            Err(Error::RoundSkew { .. })
        ));
        let class_prev = BitMatrix::all_zeros(MaskKind::Class, 1, 4, 1);
        let class_cur = BitMatrix::all_zeros(MaskKind::Class, 1, 4, 2);
        assert!(matches!(
            update_state(&class_prev, &class_cur),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn feature_mask_hadamard() {
        let fe = |v: i64| FieldElem::from_i64(v);
        let x = vec![vec![fe(3), fe(5)]];
        let b = feature_mask(1, 2, &[1, 0], 1);
        let masked = apply_feature_mask(&x, &b).unwrap();
        assert_eq!(masked, vec![vec![fe(3), FieldElem::ZERO]]);
        let ones = BitMatrix::all_ones(MaskKind::Feature, 1, 2, 1);
        assert_eq!(apply_feature_mask(&x, &ones).unwrap(), x);
        let zeros = BitMatrix::all_zeros(MaskKind::Feature, 1, 2, 1);
        assert!(apply_feature_mask(&x, &zeros)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| v.is_zero()));
    }

    #[test]
    fn flatten_or_examples() {
        let b = feature_mask(3, 2, &[1, 0, 0, 0, 1, 1], 1);
        assert_eq!(flatten_sample_bits(&b).unwrap(), vec![1, 0, 1]);
        let ones = BitMatrix::all_ones(MaskKind::Feature, 4, 3, 1);
        assert_eq!(flatten_sample_bits(&ones).unwrap(), vec![1; 4]);
        let zeros = BitMatrix::all_zeros(MaskKind::Feature, 4, 3, 1);
        assert_eq!(flatten_sample_bits(&zeros).unwrap(), vec![0; 4]);
        assert_eq!(effective_count(&[1, 0, 1]), 2);
        assert_eq!(effective_count(&vec![1; 50]), 50);
        assert_eq!(effective_count(&[0, 0, 0]), 0);
    }

    #[test]
    fn class_mask_worked_matrices() {
        let y = vec![vec![0, 0, 1], vec![1, 1, 0], vec![0, 1, 1]];
        let b = BitMatrix::new(
            MaskKind::Class,
            3,
            3,
            1,
            vec![1, 0, 0, 0, 0, 0, 1, 0, 0],
        )
        .unwrap();
        let got = apply_class_mask(&y, &b).unwrap();
        assert_eq!(got, vec![vec![1, 0, 1], vec![1, 1, 0], vec![1, 1, 1]]);
        // XOR identity and involution
        let zeros = BitMatrix::all_zeros(MaskKind::Class, 3, 3, 1);
        assert_eq!(apply_class_mask(&y, &zeros).unwrap(), y);
        assert_eq!(apply_class_mask(&got, &b).unwrap(), y);
    }

    #[test]
    fn class_mask_rejects_non_binary() {
        let y = vec![vec![2u8]];
        let b = BitMatrix::all_zeros(MaskKind::Class, 1, 1, 1);
        assert!(matches!(
            apply_class_mask(&y, &b),
            Err(Error::NonBinaryLabel)
        ));
    }

    fn two_owner_layout() -> DatasetLayout {
        DatasetLayout {
            samples: 5,
            features: 2,
            classes: 3,
            owners: vec![("alice".into(), 0..2), ("bob".into(), 2..5)],
        }
    }

    #[test]
    fn merge_no_requests_is_identity() {
        let layout = two_owner_layout();
        let global = merge_requests(&[], &layout, 1).unwrap();
        assert!(global.feature.is_identity());
        assert!(global.sample.is_identity());
        assert!(global.class.is_identity());
    }

    #[test]
    fn merge_single_owner_leaves_rest_identity() {
        let layout = two_owner_layout();
        let req = UnlearningRequest {
            owner_id: "alice".into(),
            feature: Some(feature_mask(2, 2, &[0, 1, 1, 0], 1)),
            sample: None,
            class: None,
        };
        let global = merge_requests(&[req], &layout, 1).unwrap();
        assert_eq!(global.feature.bits()[..4], [0, 1, 1, 0]);
        assert_eq!(global.feature.bits()[4..], [1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn merge_rejects_unknown_owner_and_bad_dims() {
        let layout = two_owner_layout();
        let req = UnlearningRequest {
            owner_id: "mallory".into(),
            feature: None,
            sample: None,
            class: None,
        };
        // Unknown owner with no masks is still a layout violation
        assert!(matches!(
            merge_requests(&[req], &layout, 1),
            Err(Error::UnknownOwner(_))
        ));
        let req = UnlearningRequest {
            owner_id: "alice".into(),
            feature: Some(feature_mask(3, 2, &[1; 6], 1)),
            sample: None,
            class: None,
        };
        assert!(matches!(
            merge_requests(&[req], &layout, 1),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn layout_guards_overlap_and_gaps() {
        let mut layout = two_owner_layout();
        layout.owners[1].1 = 1..5;
        assert!(layout.validate().is_err());
        let mut layout = two_owner_layout();
        layout.owners[1].1 = 3..5;
        assert!(layout.validate().is_err());
    }

    #[test]
    fn serialization_roundtrip() {
        let m = feature_mask(3, 4, &[1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0], 7);
        let back = BitMatrix::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn packed_field_elems_small_mask_is_one_elem() {
        let m = BitMatrix::all_ones(MaskKind::Feature, 50, 4, 1);
        assert_eq!(m.packed_field_elems().len(), 1);
        let m = BitMatrix::all_ones(MaskKind::Feature, 50, 8, 1);
        assert_eq!(m.packed_field_elems().len(), 2);
    }

    proptest! {
        // Absorption: a bit being 0 at round s keeps it 0 for all later rounds.
        #[test]
        fn absorption_across_rounds(
            seq in prop::collection::vec(prop::collection::vec(0u8..=1, 8), 2..6)
        ) {
            let mut state = feature_mask(1, 8, &seq[0], 1);
            let mut zeroed: Vec<usize> = (0..8).filter(|i| state.bits()[*i] == 0).collect();
            for (t, bits) in seq[1..].iter().enumerate() {
                let cur = feature_mask(1, 8, bits, (t + 2) as u32);
                state = update_state(&state, &cur).unwrap();
                for z in &zeroed {
                    prop_assert_eq!(state.bits()[*z], 0, "bit {} resurrected", z);
                }
                zeroed = (0..8).filter(|i| state.bits()[*i] == 0).collect();
            }
        }

        // Effective count is monotone non-increasing under state updates.
        #[test]
        fn effective_count_monotone(
            a in prop::collection::vec(0u8..=1, 12),
            b in prop::collection::vec(0u8..=1, 12)
        ) {
            let prev = feature_mask(4, 3, &a, 1);
            let cur = feature_mask(4, 3, &b, 2);
            let merged = update_state(&prev, &cur).unwrap();
            let n_prev = effective_count(&flatten_sample_bits(&prev).unwrap());
            let n_merged = effective_count(&flatten_sample_bits(&merged).unwrap());
            prop_assert!(n_merged <= n_prev);
        }

        // Brute-force recombination: merged global masks equal each owner's
        // submitted block row-by-row, identity elsewhere.
        #[test]
        fn merge_matches_bruteforce(
            alice_bits in prop::collection::vec(0u8..=1, 4),
            bob_bits in prop::collection::vec(0u8..=1, 3)
        ) {
            let layout = two_owner_layout();
            let reqs = vec![
                UnlearningRequest {
                    owner_id: "alice".into(),
                    feature: Some(feature_mask(2, 2, &alice_bits, 1)),
                    sample: None,
                    class: None,
                },
                UnlearningRequest {
                    owner_id: "bob".into(),
                    feature: None,
                    sample: Some(BitMatrix::new(MaskKind::Sample, 3, 1, 1, bob_bits.clone()).unwrap()),
                    class: None,
                },
            ];
            let global = merge_requests(&reqs, &layout, 1).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert_eq!(global.feature.get(i, j), alice_bits[i * 2 + j]);
                }
            }
            for i in 2..5 {
                for j in 0..2 {
                    prop_assert_eq!(global.feature.get(i, j), 1);
                }
            }
            for i in 0..2 {
                prop_assert_eq!(global.sample.get(i, 0), 1);
            }
            for i in 2..5 {
                prop_assert_eq!(global.sample.get(i, 0), bob_bits[i - 2]);
            }
        }
    }
}
