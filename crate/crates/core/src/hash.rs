//! Algebraic hash over the field: a MiMC-style keyed permutation with the
//! quintic S-box (gcd(5, p-1) = 1 for our modulus), folded in
//! Miyaguchi-Preneel mode for variable-length input.
//!
//! Every call costs `3 * ROUNDS` multiplications, so the in-circuit gadget
//! stays at a few hundred constraints per absorbed element.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::field::FieldElem;

/// Number of keyed-permutation rounds, `ceil(254 / log2(5))`.
pub const ROUNDS: usize = 110;

/// Seed for the deterministic round-constant table. The table is data, not a
/// secret; fixing the seed pins every digest produced by this crate.
const CONSTANTS_SEED: [u8; 32] = *b"unlearn-mimc5-round-constants-v1";

static CONSTANTS: OnceLock<Vec<FieldElem>> = OnceLock::new();

/// The fixed round-constant table (length [`ROUNDS`], first entry zero).
pub fn round_constants() -> &'static [FieldElem] {
    CONSTANTS.get_or_init(|| {
        let mut rng = ChaCha20Rng::from_seed(CONSTANTS_SEED);
        let mut out = Vec::with_capacity(ROUNDS);
        out.push(FieldElem::ZERO);
        for _ in 1..ROUNDS {
            // 256 uniform bits reduced mod p; the reduction bias is ~2^-2,
            // irrelevant for fixed public constants
            let limbs: [u64; 4] = rng.gen();
            let mut bytes = Vec::with_capacity(32);
            for l in limbs {
                bytes.extend_from_slice(&l.to_le_bytes());
            }
            out.push(FieldElem::from_biguint(&num_bigint::BigUint::from_bytes_le(
                &bytes,
            )));
        }
        out
    })
}

#[inline]
fn quintic(x: FieldElem) -> FieldElem {
    let x2 = x.square();
    x2.square() * x
}

/// The keyed permutation `E_k(x)`: 110 rounds of `x <- (x + k + c_i)^5`,
/// followed by a final key addition.
pub fn mimc_encrypt(x: FieldElem, k: FieldElem) -> FieldElem {
    let constants = round_constants();
    let mut state = x;
    for c in constants {
        state = quintic(state + k + *c);
    }
    state + k
}

/// One-call 2-to-1 compression in Miyaguchi-Preneel mode:
/// `merge(a, b) = E_b(a) + a + b`. Used for Merkle interior nodes.
pub fn merge(a: FieldElem, b: FieldElem) -> FieldElem {
    mimc_encrypt(a, b) + a + b
}

/// Variable-length hash: the chain value starts at the input length and each
/// element is absorbed with one permutation call,
/// `h_{j+1} = E_{h_j}(m_j) + m_j + h_j`.
pub fn hash_field(inputs: &[FieldElem]) -> FieldElem {
    let mut h = FieldElem::from_u64(inputs.len() as u64);
    for m in inputs {
        h = mimc_encrypt(*m, h) + *m + h;
    }
    h
}

/// Hashes an arbitrary byte string by packing 31-byte chunks into field
/// elements (each chunk is below the modulus) and absorbing them.
pub fn hash_bytes(bytes: &[u8]) -> FieldElem {
    let mut elems = Vec::with_capacity(bytes.len() / 31 + 2);
    elems.push(FieldElem::from_u64(bytes.len() as u64));
    for chunk in bytes.chunks(31) {
        let mut buf = [0u8; 32];
        buf[..chunk.len()].copy_from_slice(chunk);
        elems.push(FieldElem::from_bytes_le(&buf).expect("31-byte chunk is canonical"));
    }
    hash_field(&elems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic() {
        let x = FieldElem::from_u64(42);
        assert_eq!(hash_field(&[x]), hash_field(&[x]));
        assert_eq!(hash_bytes(b"abc"), hash_bytes(b"abc"));
    }

    #[test]
    fn distinct_on_nearby_inputs() {
        // empirical collision scan over consecutive inputs
        let mut seen = HashSet::new();
        for i in 0..10_000u64 {
            let h = hash_field(&[FieldElem::from_u64(i)]);
            assert!(seen.insert(h.to_bytes_le()), "collision at {i}");
        }
    }

    #[test]
    fn length_matters() {
        let x = FieldElem::from_u64(7);
        assert_ne!(hash_field(&[x]), hash_field(&[x, FieldElem::ZERO]));
        assert_ne!(hash_field(&[]), hash_field(&[FieldElem::ZERO]));
    }

    // Pinned vectors: generated once from this implementation and frozen so
    // any change to the permutation, the constant table, or the fold is loud.
    #[test]
    fn pinned_vectors() {
        let cases: [(&[u64], &str); 3] = [
            (&[0], "9f8358ac2083537e29173d6109f951aa4014bd61330397013cc3429af9763b2c"),
            (&[1, 2], "8426c384b0927de98bfd88625faca58edc90075c8eac72c1dd5fcfbb82516c13"),
            (&[123456789, 987654321, 5], "216178f98df77225c31d21c3b8d6a7be6c539bbc9db6167fadee43537e89e621"),
        ];
        for (input, want) in cases {
            let elems: Vec<FieldElem> = input.iter().map(|v| FieldElem::from_u64(*v)).collect();
            assert_eq!(hex::encode(hash_field(&elems).to_bytes_le()), want);
        }
    }
}
