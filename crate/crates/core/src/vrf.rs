//! Verifiable random functions over the field's multiplicative group, plus
//! publicly replayable minibatch sampling built on them.
//!
//! The construction is a discrete-log VRF: the output point is
//! `gamma = h^sk` for `h` derived from the input string, accompanied by a
//! Chaum-Pedersen equality proof that `log_g(pk) = log_h(gamma)`. Exponents
//! live mod `p - 1`; the generator has full order (checked in the field
//! module's tests). Owner signatures reuse the same group via Schnorr.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{modulus_biguint, FieldElem, GROUP_GENERATOR};
use crate::hash::{hash_bytes, hash_field};

fn group_order() -> BigUint {
    modulus_biguint() - BigUint::one()
}

fn generator() -> FieldElem {
    FieldElem::from_u64(GROUP_GENERATOR)
}

/// Hashes bytes to a nonzero group element.
fn hash_to_group(input: &[u8]) -> FieldElem {
    let mut h = hash_bytes(input);
    while h.is_zero() {
        h = hash_field(&[h, FieldElem::ONE]);
    }
    h
}

/// Interprets a field element as an exponent mod `p - 1`.
fn as_exponent(v: FieldElem) -> BigUint {
    v.to_biguint() % group_order()
}

/// VRF secret key: an exponent in `[1, p - 1)`.
#[derive(Clone, Serialize, Deserialize)]
pub struct VrfSecretKey {
    pub(crate) scalar: FieldElem,
}

/// VRF public key `g^sk`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VrfPublicKey(pub FieldElem);

#[derive(Clone, Serialize, Deserialize)]
pub struct VrfKeypair {
    pub sk: VrfSecretKey,
    pub pk: VrfPublicKey,
}

impl VrfKeypair {
    /// Deterministic key generation from a 32-byte seed.
    pub fn from_seed(seed: [u8; 32]) -> Self {
        let mut rng = ChaCha20Rng::from_seed(seed);
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        let order = group_order();
        let scalar = (BigUint::from_bytes_le(&wide) % (&order - BigUint::one())) + BigUint::one();
        let sk_fe = FieldElem::from_biguint(&scalar);
        let pk = generator().pow_biguint(&scalar);
        VrfKeypair {
            sk: VrfSecretKey { scalar: sk_fe },
            pk: VrfPublicKey(pk),
        }
    }

    fn exponent(&self) -> BigUint {
        self.sk.scalar.to_biguint()
    }
}

/// Chaum-Pedersen discrete-log equality token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VrfProof {
    pub gamma: FieldElem,
    pub challenge: FieldElem,
    pub response: FieldElem,
}

/// A VRF evaluation: the pseudorandom value, its proof, and the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VrfOutput {
    pub value: FieldElem,
    pub proof: VrfProof,
    pub input: Vec<u8>,
}

fn check_keys(sk: Option<&VrfSecretKey>, pk: Option<&VrfPublicKey>) -> Result<()> {
    if let Some(sk) = sk {
        let e = sk.scalar.to_biguint();
        if e.is_zero() || e >= group_order() {
            return Err(Error::MalformedKey);
        }
    }
    if let Some(pk) = pk {
        if pk.0.is_zero() || pk.0 == FieldElem::ONE {
            return Err(Error::MalformedKey);
        }
    }
    Ok(())
}

/// Evaluates the VRF on an input string: deterministic per `(sk, input)`.
pub fn vrf_eval(keypair: &VrfKeypair, input: &[u8]) -> Result<VrfOutput> {
    check_keys(Some(&keypair.sk), Some(&keypair.pk))?;
    let order = group_order();
    let g = generator();
    let h = hash_to_group(input);
    let sk = keypair.exponent();
    let gamma = h.pow_biguint(&sk);

    // deterministic nonce bound to (sk, h)
    let mut nonce_input = b"unlearn-vrf-nonce-v1".to_vec();
    nonce_input.extend_from_slice(&keypair.sk.scalar.to_bytes_le());
    nonce_input.extend_from_slice(&h.to_bytes_le());
    let mut k = hash_bytes(&nonce_input).to_biguint() % &order;
    if k.is_zero() {
        k = BigUint::one();
    }

    let big_a = g.pow_biguint(&k);
    let big_b = h.pow_biguint(&k);
    let challenge = hash_field(&[g, h, keypair.pk.0, gamma, big_a, big_b]);
    let c = as_exponent(challenge);
    // s = k - c * sk  (mod p - 1)
    let s = (&k + (&order - (c * &sk) % &order)) % &order;
    let value = hash_field(&[h, gamma]);
    Ok(VrfOutput {
        value,
        proof: VrfProof {
            gamma,
            challenge,
            response: FieldElem::from_biguint(&s),
        },
        input: input.to_vec(),
    })
}

/// Verifies a VRF output against the public key; rejects any altered value,
/// proof component, or input.
pub fn vrf_verify(pk: &VrfPublicKey, input: &[u8], value: FieldElem, proof: &VrfProof) -> bool {
    if check_keys(None, Some(pk)).is_err() {
        return false;
    }
    let g = generator();
    let h = hash_to_group(input);
    let c = as_exponent(proof.challenge);
    let s = proof.response.to_biguint();
    if s >= group_order() {
        return false;
    }
    let big_a = g.pow_biguint(&s) * pk.0.pow_biguint(&c);
    let big_b = h.pow_biguint(&s) * proof.gamma.pow_biguint(&c);
    let expected = hash_field(&[g, h, pk.0, proof.gamma, big_a, big_b]);
    expected == proof.challenge && value == hash_field(&[h, proof.gamma])
}

/// Maps a VRF value onto `[0, n)`.
pub fn derive_index(value: FieldElem, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    Ok(crate::r1cs::fe_mod_u64(value, n))
}

// ----- epoch schedules --------------------------------------------------------

/// Outcome of one VRF draw during rejection sampling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DrawOutcome {
    Accepted(u32),
    /// The derived index was already selected.
    Rejected(u32),
}

/// One row of the schedule file: `(counter, mu, value, proof, outcome)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub counter: u64,
    pub mu: Vec<u8>,
    pub value: FieldElem,
    pub proof: VrfProof,
    pub outcome: DrawOutcome,
}

/// A full epoch of verifiable minibatch sampling: a permutation of
/// `0..n` chunked into `ceil(n / batch)` minibatches in draw order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSchedule {
    pub epoch: u64,
    pub dataset_size: u32,
    pub batch_size: u32,
    pub draws: Vec<DrawRecord>,
    pub minibatches: Vec<Vec<u32>>,
}

/// Domain-separated VRF input for one draw.
pub fn draw_input(session_id: &[u8; 32], epoch: u64, counter: u64) -> Vec<u8> {
    let mut mu = b"unlearn-vrf-draw-v1".to_vec();
    mu.extend_from_slice(session_id);
    mu.extend_from_slice(&epoch.to_le_bytes());
    mu.extend_from_slice(&counter.to_le_bytes());
    mu
}

/// Rejection-samples a without-replacement permutation of `0..n` and chunks
/// it into minibatches. Deterministic given the key and inputs.
pub fn sample_epoch(
    keypair: &VrfKeypair,
    session_id: &[u8; 32],
    epoch: u64,
    n: usize,
    batch: usize,
) -> Result<EpochSchedule> {
    if batch == 0 || batch > n || n == 0 || n > u32::MAX as usize {
        return Err(Error::BadBatchSize);
    }
    let mut taken = vec![false; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut draws = Vec::new();
    let mut counter = 0u64;
    while order.len() < n {
        let mu = draw_input(session_id, epoch, counter);
        let out = vrf_eval(keypair, &mu)?;
        let idx = derive_index(out.value, n as u64)? as u32;
        let outcome = if taken[idx as usize] {
            DrawOutcome::Rejected(idx)
        } else {
            taken[idx as usize] = true;
            order.push(idx);
            DrawOutcome::Accepted(idx)
        };
        draws.push(DrawRecord {
            counter,
            mu,
            value: out.value,
            proof: out.proof,
            outcome,
        });
        counter += 1;
    }
    let minibatches: Vec<Vec<u32>> = order.chunks(batch).map(|c| c.to_vec()).collect();
    Ok(EpochSchedule {
        epoch,
        dataset_size: n as u32,
        batch_size: batch as u32,
        draws,
        minibatches,
    })
}

/// Replays the rejection sampling and partition from the draw records and
/// verifies every VRF proof; true iff the schedule matches bit for bit.
pub fn verify_epoch(
    pk: &VrfPublicKey,
    session_id: &[u8; 32],
    epoch: u64,
    schedule: &EpochSchedule,
) -> bool {
    let n = schedule.dataset_size as usize;
    let batch = schedule.batch_size as usize;
    if schedule.epoch != epoch || n == 0 || batch == 0 || batch > n {
        return false;
    }
    let mut taken = vec![false; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for (i, draw) in schedule.draws.iter().enumerate() {
        if draw.counter != i as u64 {
            return false;
        }
        let mu = draw_input(session_id, epoch, draw.counter);
        if mu != draw.mu {
            return false;
        }
        if !vrf_verify(pk, &mu, draw.value, &draw.proof) {
            return false;
        }
        let idx = match derive_index(draw.value, n as u64) {
            Ok(v) => v as u32,
            Err(_) => return false,
        };
        let expected = if taken[idx as usize] {
            DrawOutcome::Rejected(idx)
        } else {
            taken[idx as usize] = true;
            order.push(idx);
            DrawOutcome::Accepted(idx)
        };
        if expected != draw.outcome {
            return false;
        }
    }
    if order.len() != n {
        return false;
    }
    let expected_batches: Vec<Vec<u32>> = order.chunks(batch).map(|c| c.to_vec()).collect();
    expected_batches == schedule.minibatches
}

// ----- Schnorr signatures (owner endorsements) ---------------------------------

#[derive(Clone, Serialize, Deserialize)]
pub struct SigningKeypair {
    pub sk: VrfSecretKey,
    pub pk: VrfPublicKey,
}

impl SigningKeypair {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        let kp = VrfKeypair::from_seed(seed);
        SigningKeypair { sk: kp.sk, pk: kp.pk }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub commitment: FieldElem,
    pub response: FieldElem,
}

/// Schnorr signature over the field group.
pub fn sign(keypair: &SigningKeypair, message: &[u8]) -> Result<Signature> {
    check_keys(Some(&keypair.sk), Some(&keypair.pk))?;
    let order = group_order();
    let g = generator();
    let sk = keypair.sk.scalar.to_biguint();
    let mut nonce_input = b"unlearn-sig-nonce-v1".to_vec();
    nonce_input.extend_from_slice(&keypair.sk.scalar.to_bytes_le());
    nonce_input.extend_from_slice(&hash_bytes(message).to_bytes_le());
    let mut k = hash_bytes(&nonce_input).to_biguint() % &order;
    if k.is_zero() {
        k = BigUint::one();
    }
    let big_r = g.pow_biguint(&k);
    let c = as_exponent(hash_field(&[big_r, keypair.pk.0, hash_bytes(message)]));
    let s = (&k + (&order - (c * &sk) % &order)) % &order;
    Ok(Signature {
        commitment: big_r,
        response: FieldElem::from_biguint(&s),
    })
}

pub fn verify_signature(pk: &VrfPublicKey, message: &[u8], sig: &Signature) -> bool {
    if check_keys(None, Some(pk)).is_err() {
        return false;
    }
    let g = generator();
    let c = as_exponent(hash_field(&[sig.commitment, pk.0, hash_bytes(message)]));
    let s = sig.response.to_biguint();
    if s >= group_order() {
        return false;
    }
    g.pow_biguint(&s) * pk.0.pow_biguint(&c) == sig.commitment
}
