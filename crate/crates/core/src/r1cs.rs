//! Rank-1 constraint systems: builder, gadget library, witness container,
//! satisfiability checking, and the pluggable proof backend.
//!
//! Circuits are synthesized in a single pass that produces the constraint
//! structure and the witness together. Structure depends only on shape
//! parameters, never on input values — the invariable-circuit property is
//! checked by digest equality across different inputs.

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::fixed::{self, FixedConfig};
use crate::hash::round_constants;

/// Handle to a circuit variable. Variable 0 is the constant ONE.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(pub u32);

pub const ONE_VAR: Var = Var(0);

/// Sparse linear combination over circuit variables. Constants ride on
/// variable 0.
#[derive(Clone, Debug, Default)]
pub struct Lc(pub Vec<(u32, FieldElem)>);

impl Lc {
    pub fn zero() -> Lc {
        Lc(Vec::new())
    }

    pub fn constant(c: FieldElem) -> Lc {
        Lc(vec![(0, c)])
    }

    pub fn var(v: Var) -> Lc {
        Lc(vec![(v.0, FieldElem::ONE)])
    }

    pub fn term(v: Var, coeff: FieldElem) -> Lc {
        Lc(vec![(v.0, coeff)])
    }

    pub fn add(mut self, other: &Lc) -> Lc {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn sub(mut self, other: &Lc) -> Lc {
        for (v, c) in &other.0 {
            self.0.push((*v, -*c));
        }
        self
    }

    pub fn add_const(mut self, c: FieldElem) -> Lc {
        self.0.push((0, c));
        self
    }

    pub fn scale(&self, s: FieldElem) -> Lc {
        Lc(self.0.iter().map(|(v, c)| (*v, *c * s)).collect())
    }

    /// Sorts by variable, merges duplicates, and drops zero coefficients.
    fn normalized(mut self) -> Lc {
        self.0.sort_unstable_by_key(|(v, _)| *v);
        let mut out: Vec<(u32, FieldElem)> = Vec::with_capacity(self.0.len());
        for (v, c) in self.0 {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Lc(out)
    }
}

/// One rank-1 constraint `<a,z> * <b,z> = <c,z>`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub a: Lc,
    pub b: Lc,
    pub c: Lc,
}

/// An R1CS instance. Public inputs (including the constant ONE) occupy the
/// prefix `[0, num_public)` of the variable index space.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSystem {
    num_vars: usize,
    num_public: usize,
    constraints: Vec<Constraint>,
    finalized: bool,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        ConstraintSystem {
            num_vars: 1,
            num_public: 1,
            constraints: Vec::new(),
            finalized: false,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Count of public variables, constant ONE included.
    pub fn num_public(&self) -> usize {
        self.num_public
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn finalize(&mut self) {
        self.finalized = true;
    }

    fn alloc_var(&mut self) -> Var {
        let v = Var(self.num_vars as u32);
        self.num_vars += 1;
        v
    }

    /// Appends one constraint `<a,z> * <b,z> = <c,z>`.
    pub fn enforce(&mut self, a: Lc, b: Lc, c: Lc) -> Result<()> {
        if self.finalized {
            return Err(Error::Finalized);
        }
        self.constraints.push(Constraint {
            a: a.normalized(),
            b: b.normalized(),
            c: c.normalized(),
        });
        Ok(())
    }

    fn eval_lc(lc: &Lc, z: &[FieldElem]) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        for (v, c) in &lc.0 {
            acc += *c * z[*v as usize];
        }
        acc
    }

    /// True iff every constraint holds for the assignment.
    pub fn is_satisfied(&self, witness: &Witness) -> Result<bool> {
        if witness.assignments.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                got: witness.assignments.len(),
                want: self.num_vars,
            });
        }
        let z = &witness.assignments;
        Ok(self.constraints.par_iter().all(|c| {
            Self::eval_lc(&c.a, z) * Self::eval_lc(&c.b, z) == Self::eval_lc(&c.c, z)
        }))
    }

    /// Index of the first violated constraint, if any. Serial; test helper.
    pub fn first_violation(&self, witness: &Witness) -> Option<usize> {
        let z = &witness.assignments;
        self.constraints.iter().position(|c| {
            Self::eval_lc(&c.a, z) * Self::eval_lc(&c.b, z) != Self::eval_lc(&c.c, z)
        })
    }

    /// Digest of the serialized (A, B, C) matrices; pins circuit identity in
    /// transcripts.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"unlearn-r1cs-v1");
        h.update((self.num_vars as u64).to_le_bytes());
        h.update((self.num_public as u64).to_le_bytes());
        h.update((self.constraints.len() as u64).to_le_bytes());
        for c in &self.constraints {
            for lc in [&c.a, &c.b, &c.c] {
                h.update((lc.0.len() as u64).to_le_bytes());
                for (v, coeff) in &lc.0 {
                    h.update(v.to_le_bytes());
                    h.update(coeff.to_bytes_le());
                }
            }
        }
        h.finalize().into()
    }
}

/// Dense assignment vector; `assignments[0]` is always 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub assignments: Vec<FieldElem>,
}

impl Witness {
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"unlearn-witness-v1");
        h.update((self.assignments.len() as u64).to_le_bytes());
        for a in &self.assignments {
            h.update(a.to_bytes_le());
        }
        h.finalize().into()
    }

    pub fn public_inputs(&self, cs: &ConstraintSystem) -> Vec<FieldElem> {
        self.assignments[..cs.num_public()].to_vec()
    }
}

/// Single-pass circuit builder: allocates variables, records constraints, and
/// assigns witness values at the same time. Public allocations must all
/// happen before the first private one.
pub struct Builder {
    cs: ConstraintSystem,
    values: Vec<FieldElem>,
    public_phase: bool,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    pub fn new() -> Self {
        Builder {
            cs: ConstraintSystem::new(),
            values: vec![FieldElem::ONE],
            public_phase: true,
        }
    }

    pub fn public(&mut self, value: FieldElem) -> Var {
        assert!(
            self.public_phase,
            "public inputs must precede private allocations"
        );
        let v = self.cs.alloc_var();
        self.cs.num_public += 1;
        self.values.push(value);
        v
    }

    pub fn private(&mut self, value: FieldElem) -> Var {
        self.public_phase = false;
        let v = self.cs.alloc_var();
        self.values.push(value);
        v
    }

    pub fn value(&self, var: Var) -> FieldElem {
        self.values[var.0 as usize]
    }

    pub fn eval(&self, lc: &Lc) -> FieldElem {
        ConstraintSystem::eval_lc(lc, &self.values)
    }

    pub fn enforce(&mut self, a: Lc, b: Lc, c: Lc) {
        self.cs
            .enforce(a, b, c)
            .expect("builder never finalizes early");
    }

    pub fn constraint_count(&self) -> usize {
        self.cs.constraint_count()
    }

    /// Finalizes the structure and hands back (circuit, witness).
    pub fn finish(mut self) -> (ConstraintSystem, Witness) {
        self.cs.finalize();
        (
            self.cs,
            Witness {
                assignments: self.values,
            },
        )
    }

    // ----- gadget library -------------------------------------------------

    /// Allocates `a * b` as a new private variable with one constraint.
    pub fn mul(&mut self, a: &Lc, b: &Lc) -> Var {
        let prod = self.eval(a) * self.eval(b);
        let out = self.private(prod);
        self.enforce(a.clone(), b.clone(), Lc::var(out));
        out
    }

    /// Constrains `v` to 0 or 1 via `v * v = v`.
    pub fn gadget_bool(&mut self, v: &Lc) {
        self.enforce(v.clone(), v.clone(), v.clone());
    }

    /// Allocates a private boolean-constrained variable.
    pub fn alloc_bit(&mut self, bit: bool) -> Var {
        let v = self.private(if bit { FieldElem::ONE } else { FieldElem::ZERO });
        self.gadget_bool(&Lc::var(v));
        v
    }

    /// `o = a & b = a*b`; operands must already be boolean-constrained.
    pub fn gadget_and(&mut self, a: &Lc, b: &Lc) -> Var {
        self.mul(a, b)
    }

    /// `o = a | b = a + b - a*b` in one constraint: `a*b = a + b - o`.
    pub fn gadget_or(&mut self, a: &Lc, b: &Lc) -> Var {
        let av = self.eval(a);
        let bv = self.eval(b);
        let out = self.private(av + bv - av * bv);
        self.enforce(a.clone(), b.clone(), a.clone().add(b).sub(&Lc::var(out)));
        out
    }

    /// `o = a ^ b = a + b - 2ab` in one constraint: `(2a)*b = a + b - o`.
    pub fn gadget_xor(&mut self, a: &Lc, b: &Lc) -> Var {
        let av = self.eval(a);
        let bv = self.eval(b);
        let two = FieldElem::from_u64(2);
        let out = self.private(av + bv - two * av * bv);
        self.enforce(a.scale(two), b.clone(), a.clone().add(b).sub(&Lc::var(out)));
        out
    }

    /// Little-endian bit decomposition of an unsigned value:
    /// `sum bits_i * 2^i = v`, each bit boolean. Fails with `Unsatisfiable`
    /// when the assigned value does not fit `nbits`.
    pub fn gadget_bit_decompose(&mut self, v: &Lc, nbits: u32) -> Result<Vec<Var>> {
        let value = self.eval(v).to_biguint();
        if value.bits() > nbits as u64 {
            return Err(Error::Unsatisfiable(format!(
                "value {value} does not fit {nbits} bits"
            )));
        }
        let mut bits = Vec::with_capacity(nbits as usize);
        let mut recompose = Lc::zero();
        for i in 0..nbits {
            let bit = self.alloc_bit(value.bit(i as u64));
            recompose = recompose.add(&Lc::term(bit, FieldElem::two_pow(i)));
            bits.push(bit);
        }
        self.enforce(recompose.sub(v), Lc::var(ONE_VAR), Lc::zero());
        Ok(bits)
    }

    /// `flag = 1` iff `a <= b`, for `a, b` in `[0, 2^nbits)`, via the shifted
    /// difference `b - a + 2^nbits` whose top bit is the comparison outcome.
    pub fn gadget_leq(&mut self, a: &Lc, b: &Lc, nbits: u32) -> Result<Var> {
        for (side, lc) in [("left", a), ("right", b)] {
            let v = self.eval(lc).to_biguint();
            if v.bits() > nbits as u64 {
                return Err(Error::RangeOverflow(format!(
                    "{side} comparand {v} outside [0, 2^{nbits})"
                )));
            }
        }
        let shifted = b.clone().sub(a).add_const(FieldElem::two_pow(nbits));
        let bits = self.gadget_bit_decompose(&shifted, nbits + 1)?;
        Ok(bits[nbits as usize])
    }

    /// Range-checks the signed interpretation of `v` to
    /// `(-2^(nbits-1), 2^(nbits-1))` by decomposing `v + 2^(nbits-1)`.
    /// Returns the decomposition bits; the top bit is 1 iff `v >= 0`.
    pub fn signed_range_check(&mut self, v: &Lc, nbits: u32) -> Result<Vec<Var>> {
        let shifted = v.clone().add_const(FieldElem::two_pow(nbits - 1));
        self.gadget_bit_decompose(&shifted, nbits)
    }

    /// Fixed-point rescale of a (possibly accumulated) scale-`2f` linear
    /// combination down to scale `f`: allocates the quotient `q` and
    /// remainder bits with `v = q * 2^f + rem`, `0 <= rem < 2^f`, and
    /// range-checks `q` to `quot_bits` signed bits. Returns `(q, sign_bit)`.
    pub fn rescale(&mut self, v: &Lc, cfg: &FixedConfig, quot_bits: u32) -> Result<(Var, Var)> {
        let f = cfg.scale_bits;
        let signed = fixed::signed_lift(self.eval(v));
        let (q, rem) = fixed::floor_div_rem_pow2(&signed, f);
        if q.abs() >= (num_bigint::BigInt::from(1) << (quot_bits - 1)) {
            return Err(Error::RangeOverflow(format!(
                "rescale quotient {q} outside {quot_bits}-bit signed range"
            )));
        }
        let q_var = self.private(FieldElem::from_bigint(&q));
        let mut rem_lc = Lc::zero();
        let rem_u = rem.to_biguint().expect("floor remainder is non-negative");
        for i in 0..f {
            let bit = self.alloc_bit(rem_u.bit(i as u64));
            rem_lc = rem_lc.add(&Lc::term(bit, FieldElem::two_pow(i)));
        }
        // v = q * 2^f + rem
        self.enforce(
            v.clone()
                .sub(&Lc::term(q_var, FieldElem::two_pow(f)))
                .sub(&rem_lc),
            Lc::var(ONE_VAR),
            Lc::zero(),
        );
        let bits = self.signed_range_check(&Lc::var(q_var), quot_bits)?;
        Ok((q_var, bits[(quot_bits - 1) as usize]))
    }

    /// Fixed-point product with truncation: one multiplication constraint
    /// plus the rescale machinery. Quotient range-checked to `R` bits.
    pub fn mul_rescale(&mut self, a: &Lc, b: &Lc, cfg: &FixedConfig) -> Result<Var> {
        let prod = self.mul(a, b);
        let (q, _) = self.rescale(&Lc::var(prod), cfg, cfg.range_bits)?;
        Ok(q)
    }

    /// `max(0, v)` for a scale-`f` signed value: reuses the sign bit of the
    /// range check and gates the input with it.
    pub fn relu(&mut self, v: &Lc, cfg: &FixedConfig) -> Result<Var> {
        let bits = self.signed_range_check(v, cfg.range_bits)?;
        let sign = bits[(cfg.range_bits - 1) as usize]; // 1 iff v >= 0
        Ok(self.mul(&Lc::var(sign), v))
    }

    /// In-circuit MiMC keyed permutation, mirroring `hash::mimc_encrypt`.
    pub fn mimc_encrypt_gadget(&mut self, x: &Lc, k: &Lc) -> Lc {
        let mut state = x.clone();
        for c in round_constants() {
            let t = state.clone().add(k).add_const(*c);
            let t2 = self.mul(&t, &t);
            let t4 = self.mul(&Lc::var(t2), &Lc::var(t2));
            let t5 = self.mul(&Lc::var(t4), &t);
            state = Lc::var(t5);
        }
        state.add(k)
    }

    /// In-circuit 2-to-1 merge, mirroring `hash::merge`.
    pub fn merge_gadget(&mut self, a: &Lc, b: &Lc) -> Lc {
        let e = self.mimc_encrypt_gadget(a, b);
        e.add(a).add(b)
    }

    /// In-circuit variable-length hash, mirroring `hash::hash_field`.
    pub fn hash_field_gadget(&mut self, inputs: &[Lc]) -> Lc {
        let mut h = Lc::constant(FieldElem::from_u64(inputs.len() as u64));
        for m in inputs {
            let e = self.mimc_encrypt_gadget(m, &h);
            h = e.add(m).add(&h);
        }
        h
    }
}

// ----- proof backend --------------------------------------------------------

/// Proving-side key material. The reference backend only needs circuit
/// identity; a SNARK backend would carry structured reference strings here.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProvingKey {
    pub circuit_digest: [u8; 32],
    pub num_public: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct VerifyingKey {
    pub circuit_digest: [u8; 32],
    pub num_public: usize,
}

/// A proof emitted by a backend. The reference backend publishes only the
/// witness digest plus a tag binding it to the circuit and public inputs, so
/// no witness material leaks into transcripts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub witness_digest: [u8; 32],
    pub binding_tag: [u8; 32],
}

impl Proof {
    pub const SERIALIZED_LEN: usize = 64;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::SERIALIZED_LEN);
        out.extend_from_slice(&self.witness_digest);
        out.extend_from_slice(&self.binding_tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::SERIALIZED_LEN {
            return Err(Error::MalformedRecord(format!(
                "proof must be {} bytes, got {}",
                Self::SERIALIZED_LEN,
                bytes.len()
            )));
        }
        Ok(Proof {
            witness_digest: bytes[..32].try_into().unwrap(),
            binding_tag: bytes[32..].try_into().unwrap(),
        })
    }
}

fn binding_tag(
    circuit_digest: &[u8; 32],
    public_inputs: &[FieldElem],
    witness_digest: &[u8; 32],
) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"unlearn-proof-binding-v1");
    h.update(circuit_digest);
    h.update((public_inputs.len() as u64).to_le_bytes());
    for p in public_inputs {
        h.update(p.to_bytes_le());
    }
    h.update(witness_digest);
    h.finalize().into()
}

/// Pluggable proving interface. `setup` derives key material from the
/// circuit, `prove` produces a proof for a witness, `verify` checks a proof
/// against the public inputs.
pub trait ProofBackend {
    fn setup(&self, cs: &ConstraintSystem) -> Result<(ProvingKey, VerifyingKey)>;
    fn prove(&self, pk: &ProvingKey, cs: &ConstraintSystem, witness: &Witness) -> Result<Proof>;
    fn verify(&self, vk: &VerifyingKey, public_inputs: &[FieldElem], proof: &Proof) -> bool;
}

/// Reference backend: a satisfiability checker, not a SNARK. `prove` refuses
/// unsatisfied witnesses and emits a digest-plus-tag proof; `verify`
/// recomputes the tag. Full satisfiability re-checking against a witness is
/// available to auditors via [`ReferenceBackend::audit`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceBackend;

impl ProofBackend for ReferenceBackend {
    fn setup(&self, cs: &ConstraintSystem) -> Result<(ProvingKey, VerifyingKey)> {
        if !cs.is_finalized() {
            return Err(Error::NotFinalized);
        }
        let digest = cs.digest();
        Ok((
            ProvingKey {
                circuit_digest: digest,
                num_public: cs.num_public(),
            },
            VerifyingKey {
                circuit_digest: digest,
                num_public: cs.num_public(),
            },
        ))
    }

    fn prove(&self, pk: &ProvingKey, cs: &ConstraintSystem, witness: &Witness) -> Result<Proof> {
        if pk.circuit_digest != cs.digest() {
            return Err(Error::BadParams("proving key does not match circuit".into()));
        }
        if !cs.is_satisfied(witness)? {
            return Err(Error::Unsatisfiable(format!(
                "constraint {} violated",
                cs.first_violation(witness).unwrap_or(usize::MAX)
            )));
        }
        let witness_digest = witness.digest();
        let tag = binding_tag(
            &pk.circuit_digest,
            &witness.assignments[..pk.num_public],
            &witness_digest,
        );
        Ok(Proof {
            witness_digest,
            binding_tag: tag,
        })
    }

    fn verify(&self, vk: &VerifyingKey, public_inputs: &[FieldElem], proof: &Proof) -> bool {
        if public_inputs.len() != vk.num_public {
            return false;
        }
        binding_tag(&vk.circuit_digest, public_inputs, &proof.witness_digest) == proof.binding_tag
    }
}

impl ReferenceBackend {
    /// Emits a proof without the satisfiability gate. Adversarial-simulation
    /// hook for the soundness experiments; honest callers use `prove`.
    pub fn prove_unchecked(&self, pk: &ProvingKey, witness: &Witness) -> Proof {
        let witness_digest = witness.digest();
        let tag = binding_tag(
            &pk.circuit_digest,
            &witness.assignments[..pk.num_public],
            &witness_digest,
        );
        Proof {
            witness_digest,
            binding_tag: tag,
        }
    }

    /// Auditor-side re-check with witness access: satisfiability, witness
    /// digest, and the public-input prefix must all match the proof.
    pub fn audit(
        &self,
        vk: &VerifyingKey,
        cs: &ConstraintSystem,
        public_inputs: &[FieldElem],
        proof: &Proof,
        witness: &Witness,
    ) -> bool {
        vk.circuit_digest == cs.digest()
            && witness.digest() == proof.witness_digest
            && witness.assignments.len() >= vk.num_public
            && witness.assignments[..vk.num_public] == *public_inputs
            && self.verify(vk, public_inputs, proof)
            && cs.is_satisfied(witness).unwrap_or(false)
    }
}

/// Converts a small unsigned assignment to `u64`; schedule and test helper.
pub fn fe_to_u64(v: FieldElem) -> Option<u64> {
    v.to_biguint().to_u64()
}

/// Reduces a field element mod `n` (for index derivation).
pub fn fe_mod_u64(v: FieldElem, n: u64) -> u64 {
    (v.to_biguint() % BigUint::from(n)).to_u64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(v: u64) -> FieldElem {
        FieldElem::from_u64(v)
    }

    /// The `e = (a + b) * c` circuit: one constraint.
    fn sum_times_circuit(a: u64, b: u64, c: u64, e: u64) -> (ConstraintSystem, Witness) {
        let mut bld = Builder::new();
        let va = bld.private(fe(a));
        let vb = bld.private(fe(b));
        let vc = bld.private(fe(c));
        let ve = bld.private(fe(e));
        bld.enforce(Lc::var(va).add(&Lc::var(vb)), Lc::var(vc), Lc::var(ve));
        bld.finish()
    }

    #[test]
    fn sum_times_one_constraint() {
        let (cs, w) = sum_times_circuit(1, 2, 3, 9);
        assert_eq!(cs.constraint_count(), 1);
        assert!(cs.is_satisfied(&w).unwrap());
        let (cs2, w2) = sum_times_circuit(1, 2, 3, 10);
        assert!(!cs2.is_satisfied(&w2).unwrap());
    }

    #[test]
    fn boolean_gadget() {
        for (v, ok) in [(0u64, true), (1, true), (2, false)] {
            let mut bld = Builder::new();
            let var = bld.private(fe(v));
            bld.gadget_bool(&Lc::var(var));
            let (cs, w) = bld.finish();
            assert_eq!(cs.is_satisfied(&w).unwrap(), ok, "v = {v}");
        }
    }

    #[test]
    fn logic_gadgets_truth_tables() {
        for a in [0u64, 1] {
            for b in [0u64, 1] {
                let mut bld = Builder::new();
                let va = bld.alloc_bit(a == 1);
                let vb = bld.alloc_bit(b == 1);
                let and = bld.gadget_and(&Lc::var(va), &Lc::var(vb));
                let or = bld.gadget_or(&Lc::var(va), &Lc::var(vb));
                let xor = bld.gadget_xor(&Lc::var(va), &Lc::var(vb));
                assert_eq!(bld.value(and), fe(a & b));
                assert_eq!(bld.value(or), fe(a | b));
                assert_eq!(bld.value(xor), fe(a ^ b));
                let (cs, w) = bld.finish();
                assert!(cs.is_satisfied(&w).unwrap());
            }
        }
    }

    #[test]
    fn bit_decompose_examples() {
        let mut bld = Builder::new();
        let v = bld.private(fe(5));
        let bits = bld.gadget_bit_decompose(&Lc::var(v), 4).unwrap();
        let got: Vec<u64> = bits
            .iter()
            .map(|b| if bld.value(*b) == FieldElem::ONE { 1 } else { 0 })
            .collect();
        assert_eq!(got, vec![1, 0, 1, 0]);
        let (cs, w) = bld.finish();
        assert!(cs.is_satisfied(&w).unwrap());

        let mut bld = Builder::new();
        let v = bld.private(fe(0));
        let bits = bld.gadget_bit_decompose(&Lc::var(v), 4).unwrap();
        assert!(bits.iter().all(|b| bld.value(*b).is_zero()));

        let mut bld = Builder::new();
        let v = bld.private(fe(16));
        assert!(matches!(
            bld.gadget_bit_decompose(&Lc::var(v), 4),
            Err(Error::Unsatisfiable(_))
        ));
    }

    #[test]
    fn leq_examples() {
        let cases = [
            (0u64, 0u64, true),
            (7, 3, false),
            (41, 42, true),
            (42, 42, true),
        ];
        for (a, b, want) in cases {
            let mut bld = Builder::new();
            let va = bld.private(fe(a));
            let vb = bld.private(fe(b));
            let flag = bld.gadget_leq(&Lc::var(va), &Lc::var(vb), 16).unwrap();
            assert_eq!(bld.value(flag) == FieldElem::ONE, want, "leq({a},{b})");
            let (cs, w) = bld.finish();
            assert!(cs.is_satisfied(&w).unwrap());
        }
    }

    #[test]
    fn leq_range_enforced() {
        let mut bld = Builder::new();
        let va = bld.private(fe(1 << 20));
        let vb = bld.private(fe(3));
        assert!(matches!(
            bld.gadget_leq(&Lc::var(va), &Lc::var(vb), 16),
            Err(Error::RangeOverflow(_))
        ));
    }

    #[test]
    fn mul_rescale_gadget_matches_native() {
        let cfg = FixedConfig::default();
        for (x, y) in [
            (1.0, 1.0),
            (2.0, 0.5),
            (0.1, 0.1),
            (-1.5, 2.25),
            (-3.0, -0.125),
        ] {
            let a = fixed::encode(x, &cfg).unwrap();
            let b = fixed::encode(y, &cfg).unwrap();
            let mut bld = Builder::new();
            let va = bld.private(a);
            let vb = bld.private(b);
            let q = bld.mul_rescale(&Lc::var(va), &Lc::var(vb), &cfg).unwrap();
            assert_eq!(bld.value(q), fixed::mul_rescale(a, b, &cfg).unwrap());
            let (cs, w) = bld.finish();
            assert!(cs.is_satisfied(&w).unwrap());
        }
    }

    #[test]
    fn relu_gadget() {
        let cfg = FixedConfig::default();
        for x in [-2.5f64, -0.0001, 0.0, 0.0001, 3.75] {
            let v = fixed::encode(x, &cfg).unwrap();
            let mut bld = Builder::new();
            let var = bld.private(v);
            let out = bld.relu(&Lc::var(var), &cfg).unwrap();
            let want = fixed::encode(x.max(0.0), &cfg).unwrap();
            assert_eq!(bld.value(out), want, "relu({x})");
            let (cs, w) = bld.finish();
            assert!(cs.is_satisfied(&w).unwrap());
        }
    }

    #[test]
    fn mimc_gadget_matches_native() {
        let mut bld = Builder::new();
        let x = bld.private(fe(41));
        let k = bld.private(fe(271828));
        let out = bld.mimc_encrypt_gadget(&Lc::var(x), &Lc::var(k));
        assert_eq!(bld.eval(&out), crate::hash::mimc_encrypt(fe(41), fe(271828)));
        let inputs = [Lc::var(x), Lc::var(k)];
        let h = bld.hash_field_gadget(&inputs);
        assert_eq!(bld.eval(&h), crate::hash::hash_field(&[fe(41), fe(271828)]));
        let (cs, w) = bld.finish();
        assert!(cs.is_satisfied(&w).unwrap());
    }

    // Flipping any constrained witness variable falsifies the instance.
    #[test]
    fn single_flip_breaks_satisfiability() {
        let cfg = FixedConfig::default();
        let mut bld = Builder::new();
        let a = bld.private(fixed::encode(1.5, &cfg).unwrap());
        let b = bld.private(fixed::encode(-2.25, &cfg).unwrap());
        bld.mul_rescale(&Lc::var(a), &Lc::var(b), &cfg).unwrap();
        let (cs, w) = bld.finish();
        assert!(cs.is_satisfied(&w).unwrap());

        let mut constrained = vec![false; cs.num_vars()];
        for c in cs.constraints() {
            for lc in [&c.a, &c.b, &c.c] {
                for (v, _) in &lc.0 {
                    constrained[*v as usize] = true;
                }
            }
        }
        for i in 1..cs.num_vars() {
            if !constrained[i] {
                continue;
            }
            let mut flipped = w.clone();
            flipped.assignments[i] += FieldElem::ONE;
            assert!(
                !cs.is_satisfied(&flipped).unwrap(),
                "flip of var {i} went undetected"
            );
        }
    }

    #[test]
    fn finalized_rejects_new_constraints() {
        let (mut cs, _) = sum_times_circuit(1, 2, 3, 9);
        assert!(matches!(
            cs.enforce(Lc::zero(), Lc::zero(), Lc::zero()),
            Err(Error::Finalized)
        ));
    }

    #[test]
    fn empty_system_is_satisfied() {
        let mut cs = ConstraintSystem::new();
        cs.finalize();
        let w = Witness {
            assignments: vec![FieldElem::ONE],
        };
        assert!(cs.is_satisfied(&w).unwrap());
        assert!(matches!(
            cs.is_satisfied(&Witness { assignments: vec![] }),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn backend_roundtrip_and_tamper() {
        let (cs, w) = sum_times_circuit(1, 2, 3, 9);
        let backend = ReferenceBackend;
        let (pk, vk) = backend.setup(&cs).unwrap();
        let proof = backend.prove(&pk, &cs, &w).unwrap();
        let publics = w.public_inputs(&cs);
        assert!(backend.verify(&vk, &publics, &proof));
        assert!(backend.audit(&vk, &cs, &publics, &proof, &w));

        // tampered proof bytes
        let mut bad = proof.clone();
        bad.witness_digest[0] ^= 1;
        assert!(!backend.verify(&vk, &publics, &bad));

        // unsatisfied witness refuses to prove
        let (cs2, w2) = sum_times_circuit(1, 2, 3, 10);
        let (pk2, vk2) = backend.setup(&cs2).unwrap();
        assert!(matches!(
            backend.prove(&pk2, &cs2, &w2),
            Err(Error::Unsatisfiable(_))
        ));
        // ...but a cheating prover's unchecked proof is caught by audit
        let cheat = backend.prove_unchecked(&pk2, &w2);
        assert!(backend.verify(&vk2, &w2.public_inputs(&cs2), &cheat));
        assert!(!backend.audit(&vk2, &cs2, &w2.public_inputs(&cs2), &cheat, &w2));
    }

    #[test]
    fn digest_is_structure_sensitive() {
        let (cs1, _) = sum_times_circuit(1, 2, 3, 9);
        let (cs2, _) = sum_times_circuit(7, 7, 7, 98); // same shape, different witness
        assert_eq!(cs1.digest(), cs2.digest());
        let mut bld = Builder::new();
        let a = bld.private(fe(1));
        bld.enforce(Lc::var(a), Lc::var(a), Lc::var(a));
        let (cs3, _) = bld.finish();
        assert_ne!(cs1.digest(), cs3.digest());
    }
}
