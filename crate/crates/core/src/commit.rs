//! Hiding, binding vector commitments: a binary Merkle tree over algebraic
//! leaf hashes, with one randomness value mixed into every leaf.
//!
//! Leaf `i` is `hash_field(value_i, randomness, i)`; interior nodes use the
//! one-call `merge`. Odd nodes at a level are paired with themselves, so
//! every opening path has exactly `ceil(log2(leaf_count))` siblings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::hash::{hash_field, merge};
use crate::r1cs::{Builder, Lc, Var};

/// Identifier of this commitment construction, recorded in transcripts so
/// alternate schemes can interoperate.
pub const SCHEME_ID: &str = "mimc5-mp-merkle2-v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub root: FieldElem,
    pub scheme_id: String,
    pub arity: u32,
    pub leaf_count: usize,
}

/// Sibling digests from leaf to root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningPath {
    pub index: usize,
    pub siblings: Vec<FieldElem>,
}

fn leaf_hash(value: FieldElem, randomness: FieldElem, index: usize) -> FieldElem {
    hash_field(&[value, randomness, FieldElem::from_u64(index as u64)])
}

/// All tree levels, leaves first. `levels.last()` is the single root.
fn build_levels(leaves: Vec<FieldElem>) -> Vec<Vec<FieldElem>> {
    let mut levels = vec![leaves];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let next: Vec<FieldElem> = (0..prev.len().div_ceil(2))
            .map(|i| {
                let left = prev[2 * i];
                let right = if 2 * i + 1 < prev.len() {
                    prev[2 * i + 1]
                } else {
                    left
                };
                merge(left, right)
            })
            .collect();
        levels.push(next);
    }
    levels
}

/// Commits to a value vector under a single randomness value.
pub fn commit_vector(values: &[FieldElem], randomness: FieldElem) -> Result<Commitment> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let leaves: Vec<FieldElem> = values
        .par_iter()
        .enumerate()
        .map(|(i, v)| leaf_hash(*v, randomness, i))
        .collect();
    let levels = build_levels(leaves);
    Ok(Commitment {
        root: levels.last().unwrap()[0],
        scheme_id: SCHEME_ID.to_string(),
        arity: 2,
        leaf_count: values.len(),
    })
}

/// Produces the opening path for one leaf (prover side: needs all values).
pub fn open(values: &[FieldElem], randomness: FieldElem, index: usize) -> Result<OpeningPath> {
    if index >= values.len() {
        return Err(Error::IndexOutOfRange {
            index,
            leaves: values.len(),
        });
    }
    let leaves: Vec<FieldElem> = values
        .iter()
        .enumerate()
        .map(|(i, v)| leaf_hash(*v, randomness, i))
        .collect();
    let levels = build_levels(leaves);
    let mut siblings = Vec::new();
    let mut pos = index;
    for level in &levels[..levels.len() - 1] {
        let sib = if pos % 2 == 0 {
            // right sibling, or self when unpaired
            *level.get(pos + 1).unwrap_or(&level[pos])
        } else {
            level[pos - 1]
        };
        siblings.push(sib);
        pos /= 2;
    }
    Ok(OpeningPath { index, siblings })
}

/// Recomputes the root from one (value, randomness) pair and its path.
pub fn verify_opening(
    com: &Commitment,
    index: usize,
    value: FieldElem,
    randomness: FieldElem,
    path: &OpeningPath,
) -> Result<bool> {
    if index >= com.leaf_count {
        return Err(Error::IndexOutOfRange {
            index,
            leaves: com.leaf_count,
        });
    }
    if path.index != index {
        return Ok(false);
    }
    let depth = if com.leaf_count == 1 {
        0
    } else {
        usize::BITS as usize - (com.leaf_count - 1).leading_zeros() as usize
    };
    if path.siblings.len() != depth {
        return Ok(false);
    }
    let mut node = leaf_hash(value, randomness, index);
    let mut pos = index;
    for sib in &path.siblings {
        node = if pos % 2 == 0 {
            merge(node, *sib)
        } else {
            merge(*sib, node)
        };
        pos /= 2;
    }
    Ok(node == com.root)
}

/// In-circuit commitment recomputation: hashes the (private) value wires with
/// the (private) randomness wire into a root and pins it to the given public
/// input. Mirrors `commit_vector` node for node.
pub fn commitment_gadget(
    bld: &mut Builder,
    public_root: Var,
    values: &[Lc],
    randomness: &Lc,
) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut level: Vec<Lc> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let idx = Lc::constant(FieldElem::from_u64(i as u64));
            bld.hash_field_gadget(&[v.clone(), randomness.clone(), idx])
        })
        .collect();
    while level.len() > 1 {
        level = (0..level.len().div_ceil(2))
            .map(|i| {
                let left = level[2 * i].clone();
                let right = level.get(2 * i + 1).cloned().unwrap_or_else(|| left.clone());
                bld.merge_gadget(&left, &right)
            })
            .collect();
    }
    let root = level.pop().unwrap();
    bld.enforce(
        root.sub(&Lc::var(public_root)),
        Lc::var(crate::r1cs::ONE_VAR),
        Lc::zero(),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u64) -> FieldElem {
        FieldElem::from_u64(v)
    }

    fn sample_values(n: usize) -> Vec<FieldElem> {
        (0..n as u64).map(|i| fe(i * 31 + 7)).collect()
    }

    #[test]
    fn deterministic_and_randomness_sensitive() {
        let values = sample_values(9);
        let c1 = commit_vector(&values, fe(99)).unwrap();
        let c2 = commit_vector(&values, fe(99)).unwrap();
        assert_eq!(c1, c2);
        // different randomness gives a different root, across many trials
        for r in 0..1000u64 {
            let c = commit_vector(&values, fe(1000 + r)).unwrap();
            assert_ne!(c.root, c1.root, "collision at r = {r}");
        }
    }

    #[test]
    fn single_leaf_base_case() {
        let c = commit_vector(&[fe(5)], fe(3)).unwrap();
        assert_eq!(c.root, hash_field(&[fe(5), fe(3), FieldElem::ZERO]));
        let path = open(&[fe(5)], fe(3), 0).unwrap();
        assert!(path.siblings.is_empty());
        assert!(verify_opening(&c, 0, fe(5), fe(3), &path).unwrap());
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(commit_vector(&[], fe(0)), Err(Error::Empty)));
    }

    #[test]
    fn opening_paths_verify_and_bind() {
        for n in [2usize, 3, 5, 8, 13] {
            let values = sample_values(n);
            let r = fe(4242);
            let com = commit_vector(&values, r).unwrap();
            for (i, v) in values.iter().enumerate() {
                let path = open(&values, r, i).unwrap();
                assert_eq!(path.siblings.len(), (n as f64).log2().ceil() as usize);
                assert!(verify_opening(&com, i, *v, r, &path).unwrap(), "n={n} i={i}");
                // value perturbation
                assert!(!verify_opening(&com, i, *v + FieldElem::ONE, r, &path).unwrap());
                // randomness perturbation
                assert!(!verify_opening(&com, i, *v, r + FieldElem::ONE, &path).unwrap());
                // swapped siblings
                if path.siblings.len() >= 2 {
                    let mut bad = path.clone();
                    bad.siblings.swap(0, 1);
                    assert!(!verify_opening(&com, i, *v, r, &bad).unwrap());
                }
                // each sibling perturbed
                for s in 0..path.siblings.len() {
                    let mut bad = path.clone();
                    bad.siblings[s] += FieldElem::ONE;
                    assert!(!verify_opening(&com, i, *v, r, &bad).unwrap());
                }
            }
            assert!(matches!(
                verify_opening(&com, n, fe(0), r, &open(&values, r, 0).unwrap()),
                Err(Error::IndexOutOfRange { .. })
            ));
        }
    }

    // Binding: openings of one root to a different value vector never verify.
    #[test]
    fn adversarial_mutations_never_verify() {
        let values = sample_values(6);
        let r = fe(777);
        let com = commit_vector(&values, r).unwrap();
        for i in 0..values.len() {
            let path = open(&values, r, i).unwrap();
            let mut mutated = values.clone();
            mutated[i] += fe(1);
            // honest path for the mutated vector against the original root
            let bad_path = open(&mutated, r, i).unwrap();
            assert!(!verify_opening(&com, i, mutated[i], r, &bad_path).unwrap());
            assert!(!verify_opening(&com, i, mutated[i], r, &path).unwrap());
        }
    }

    // Hiding smoke test: root bytes over fixed values with random r look
    // byte-uniform (loose frequency bounds).
    #[test]
    fn hiding_byte_frequency_smoke() {
        let values = sample_values(4);
        let mut counts = [0u32; 256];
        let trials = 1000;
        for r in 0..trials {
            let com = commit_vector(&values, fe(500_000 + r)).unwrap();
            for b in com.root.to_bytes_le() {
                counts[b as usize] += 1;
            }
        }
        let total = trials as f64 * 32.0;
        let expected = total / 256.0; // 125
        // top byte of a 254-bit field is biased; check the low 31 bytes only
        let mut low_counts = [0u32; 256];
        for r in 0..trials {
            let com = commit_vector(&values, fe(900_000 + r)).unwrap();
            for b in &com.root.to_bytes_le()[..31] {
                low_counts[*b as usize] += 1;
            }
        }
        let low_expected = trials as f64 * 31.0 / 256.0;
        let tol = 6.0 * low_expected.sqrt();
        for (b, c) in low_counts.iter().enumerate() {
            assert!(
                (*c as f64 - low_expected).abs() < tol,
                "byte {b} count {c} vs expected {low_expected}"
            );
        }
        let _ = (counts, expected);
    }

    #[test]
    fn gadget_agrees_with_native() {
        for n in [1usize, 2, 5, 8] {
            let values = sample_values(n);
            let r = fe(31337);
            let com = commit_vector(&values, r).unwrap();
            let mut bld = Builder::new();
            let root_pub = bld.public(com.root);
            let rand_var = bld.private(r);
            let value_lcs: Vec<Lc> = values.iter().map(|v| Lc::var(bld.private(*v))).collect();
            commitment_gadget(&mut bld, root_pub, &value_lcs, &Lc::var(rand_var)).unwrap();
            let (cs, w) = bld.finish();
            assert!(cs.is_satisfied(&w).unwrap(), "n={n}");

            // a perturbed value breaks the gadget
            let mut bld = Builder::new();
            let root_pub = bld.public(com.root);
            let rand_var = bld.private(r);
            let mut perturbed = values.clone();
            perturbed[0] += FieldElem::ONE;
            let value_lcs: Vec<Lc> =
                perturbed.iter().map(|v| Lc::var(bld.private(*v))).collect();
            commitment_gadget(&mut bld, root_pub, &value_lcs, &Lc::var(rand_var)).unwrap();
            let (cs, w) = bld.finish();
            assert!(!cs.is_satisfied(&w).unwrap(), "perturbed n={n}");
        }
    }

    // Constraint cost grows linearly in the leaf count.
    #[test]
    fn gadget_cost_linear_in_leaves() {
        let count_for = |n: usize| {
            let values = sample_values(n);
            let r = fe(1);
            let com = commit_vector(&values, r).unwrap();
            let mut bld = Builder::new();
            let root_pub = bld.public(com.root);
            let rand_var = bld.private(r);
            let value_lcs: Vec<Lc> = values.iter().map(|v| Lc::var(bld.private(*v))).collect();
            commitment_gadget(&mut bld, root_pub, &value_lcs, &Lc::var(rand_var)).unwrap();
            bld.constraint_count() as f64
        };
        let c8 = count_for(8);
        let c16 = count_for(16);
        let c32 = count_for(32);
        let slope1 = (c16 - c8) / 8.0;
        let slope2 = (c32 - c16) / 16.0;
        assert!(
            (slope1 - slope2).abs() / slope1 < 0.05,
            "slopes {slope1} vs {slope2} diverge"
        );
    }
}
