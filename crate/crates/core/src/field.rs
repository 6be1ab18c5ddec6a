//! Prime-field arithmetic for the 254-bit scalar field used throughout the
//! toolkit (the BN254 pairing curve's scalar field, so a SNARK backend can
//! slot in behind the same circuits).
//!
//! Elements are stored in Montgomery form as four little-endian `u64` limbs.
//! Serialization is canonical 32-byte little-endian.

use num_bigint::{BigInt, BigUint, Sign};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::Error;

/// Field modulus `p`, little-endian limbs.
///
/// p = 21888242871839275222246405745257275088548364400416034343698204186575808495617
pub const MODULUS: [u64; 4] = [
    0x43e1f593f0000001,
    0x2833e84879b97091,
    0xb85045b68181585d,
    0x30644e72e131a029,
];

/// `-p^{-1} mod 2^64`, the Montgomery reduction constant.
const INV: u64 = 0xc2e1f593efffffff;

/// `2^256 mod p` (the Montgomery radix), i.e. the representation of 1.
const R: [u64; 4] = [
    0xac96341c4ffffffb,
    0x36fc76959f60cd29,
    0x666ea36f7879462e,
    0x0e0a77c19a07df2f,
];

/// `2^512 mod p`, used to convert into Montgomery form.
const R2: [u64; 4] = [
    0x1bb8e645ae216da7,
    0x53fe3ab1e35c59e3,
    0x8c49833d53bb8085,
    0x0216d0b17f4e44a5,
];

/// A multiplicative generator of the full group `F_p^*` (order `p - 1`).
pub const GROUP_GENERATOR: u64 = 5;

#[inline(always)]
fn mac(a: u64, b: u64, c: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) * (c as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128)
        .wrapping_sub(b as u128)
        .wrapping_sub(borrow as u128);
    (t as u64, ((t >> 64) as u64) & 1)
}

/// Raw-limb comparison `a >= b`.
#[inline]
fn geq(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

#[inline]
fn sub_limbs(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let mut r = [0u64; 4];
    let mut borrow = 0;
    for i in 0..4 {
        let (lo, br) = sbb(a[i], b[i], borrow);
        r[i] = lo;
        borrow = br;
    }
    r
}

/// Montgomery multiplication (CIOS), result `< p`.
#[inline]
fn mont_mul(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let mut t = [0u64; 6];
    for i in 0..4 {
        let mut carry = 0u64;
        for j in 0..4 {
            let (lo, hi) = mac(t[j], a[j], b[i], carry);
            t[j] = lo;
            carry = hi;
        }
        let (lo, hi) = adc(t[4], carry, 0);
        t[4] = lo;
        t[5] = hi;

        let m = t[0].wrapping_mul(INV);
        let (_, mut carry) = mac(t[0], m, MODULUS[0], 0);
        for j in 1..4 {
            let (lo, hi) = mac(t[j], m, MODULUS[j], carry);
            t[j - 1] = lo;
            carry = hi;
        }
        let (lo, hi) = adc(t[4], carry, 0);
        t[3] = lo;
        t[4] = t[5] + hi;
        t[5] = 0;
    }
    debug_assert_eq!(t[4], 0, "montgomery reduction overflow");
    let mut r = [t[0], t[1], t[2], t[3]];
    if geq(&r, &MODULUS) {
        r = sub_limbs(&r, &MODULUS);
    }
    r
}

/// An element of the scalar field, `0 <= value < p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem([u64; 4]);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem([0, 0, 0, 0]);
    pub const ONE: FieldElem = FieldElem(R);

    /// Bits needed to represent the modulus.
    pub const MODULUS_BITS: u32 = 254;

    pub fn from_u64(v: u64) -> Self {
        FieldElem(mont_mul(&[v, 0, 0, 0], &R2))
    }

    /// Signed embedding: negatives map to `p - |v|`.
    pub fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Self::from_u64(v as u64)
        } else {
            -Self::from_u64(v.unsigned_abs())
        }
    }

    pub fn from_i128(v: i128) -> Self {
        let mag = v.unsigned_abs();
        let limbs = [mag as u64, (mag >> 64) as u64, 0, 0];
        let fe = FieldElem(mont_mul(&limbs, &R2));
        if v < 0 {
            -fe
        } else {
            fe
        }
    }

    /// Canonical (non-Montgomery) limbs of the element.
    fn canonical(&self) -> [u64; 4] {
        mont_mul(&self.0, &[1, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0, 0]
    }

    /// Canonical 32-byte little-endian serialization.
    pub fn to_bytes_le(&self) -> [u8; 32] {
        let c = self.canonical();
        let mut out = [0u8; 32];
        for (i, limb) in c.iter().enumerate() {
            out[8 * i..8 * (i + 1)].copy_from_slice(&limb.to_le_bytes());
        }
        out
    }

    /// Parses canonical 32-byte little-endian; rejects values `>= p`.
    pub fn from_bytes_le(bytes: &[u8; 32]) -> Result<Self, Error> {
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            *limb = u64::from_le_bytes(bytes[8 * i..8 * (i + 1)].try_into().unwrap());
        }
        if geq(&limbs, &MODULUS) {
            return Err(Error::NonCanonicalFieldBytes);
        }
        Ok(FieldElem(mont_mul(&limbs, &R2)))
    }

    pub fn to_biguint(&self) -> BigUint {
        let c = self.canonical();
        let mut bytes = Vec::with_capacity(32);
        for limb in c {
            bytes.extend_from_slice(&limb.to_le_bytes());
        }
        BigUint::from_bytes_le(&bytes)
    }

    /// Reduces an arbitrary big integer mod `p`.
    pub fn from_biguint(v: &BigUint) -> Self {
        let reduced = v % modulus_biguint();
        let bytes = reduced.to_bytes_le();
        let mut buf = [0u8; 32];
        buf[..bytes.len()].copy_from_slice(&bytes);
        Self::from_bytes_le(&buf).expect("reduced value is canonical")
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        let p = BigInt::from_biguint(Sign::Plus, modulus_biguint());
        let reduced = ((v % &p) + &p) % &p;
        Self::from_biguint(reduced.magnitude())
    }

    /// Signed interpretation: values above `p/2` are `value - p`.
    pub fn to_signed_bigint(&self) -> BigInt {
        let v = self.to_biguint();
        let p = modulus_biguint();
        if &v > &(&p >> 1) {
            BigInt::from_biguint(Sign::Plus, v) - BigInt::from_biguint(Sign::Plus, p)
        } else {
            BigInt::from_biguint(Sign::Plus, v)
        }
    }

    pub fn square(&self) -> Self {
        FieldElem(mont_mul(&self.0, &self.0))
    }

    /// Exponentiation by a 256-bit little-endian limb exponent.
    pub fn pow_limbs(&self, exp: &[u64; 4]) -> Self {
        let mut acc = FieldElem::ONE;
        for i in (0..4).rev() {
            for bit in (0..64).rev() {
                acc = acc.square();
                if (exp[i] >> bit) & 1 == 1 {
                    acc *= *self;
                }
            }
        }
        acc
    }

    pub fn pow_biguint(&self, exp: &BigUint) -> Self {
        let mut acc = FieldElem::ONE;
        for bit in (0..exp.bits()).rev() {
            acc = acc.square();
            if exp.bit(bit) {
                acc *= *self;
            }
        }
        acc
    }

    /// Multiplicative inverse via Fermat; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut exp = MODULUS;
        exp[0] -= 2; // p - 2; p is odd and > 2 so no borrow
        Some(self.pow_limbs(&exp))
    }

    /// `2^k` as a field element, `k < 254`.
    pub fn two_pow(k: u32) -> Self {
        assert!(k < Self::MODULUS_BITS);
        let mut limbs = [0u64; 4];
        limbs[(k / 64) as usize] = 1u64 << (k % 64);
        FieldElem(mont_mul(&limbs, &R2))
    }
}

pub fn modulus_biguint() -> BigUint {
    let mut bytes = Vec::with_capacity(32);
    for limb in MODULUS {
        bytes.extend_from_slice(&limb.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

impl Add for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn add(self, rhs: FieldElem) -> FieldElem {
        // p < 2^254 so the limb sum never carries out of 4 limbs
        let mut r = [0u64; 4];
        let mut carry = 0;
        for i in 0..4 {
            let (lo, c) = adc(self.0[i], rhs.0[i], carry);
            r[i] = lo;
            carry = c;
        }
        debug_assert_eq!(carry, 0);
        if geq(&r, &MODULUS) {
            r = sub_limbs(&r, &MODULUS);
        }
        FieldElem(r)
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn sub(self, rhs: FieldElem) -> FieldElem {
        let mut r = [0u64; 4];
        let mut borrow = 0;
        for i in 0..4 {
            let (lo, br) = sbb(self.0[i], rhs.0[i], borrow);
            r[i] = lo;
            borrow = br;
        }
        if borrow != 0 {
            let mut carry = 0;
            for i in 0..4 {
                let (lo, c) = adc(r[i], MODULUS[i], carry);
                r[i] = lo;
                carry = c;
            }
        }
        FieldElem(r)
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn mul(self, rhs: FieldElem) -> FieldElem {
        FieldElem(mont_mul(&self.0, &rhs.0))
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    #[inline]
    fn neg(self) -> FieldElem {
        if self.is_zero() {
            self
        } else {
            FieldElem(sub_limbs(&MODULUS, &self.0))
        }
    }
}

impl AddAssign for FieldElem {
    fn add_assign(&mut self, rhs: FieldElem) {
        *self = *self + rhs;
    }
}
impl SubAssign for FieldElem {
    fn sub_assign(&mut self, rhs: FieldElem) {
        *self = *self - rhs;
    }
}
impl MulAssign for FieldElem {
    fn mul_assign(&mut self, rhs: FieldElem) {
        *self = *self * rhs;
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe(0x{})", hex::encode(rev32(self.to_bytes_le())))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

fn rev32(mut b: [u8; 32]) -> [u8; 32] {
    b.reverse();
    b
}

impl Serialize for FieldElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&hex::encode(self.to_bytes_le()))
    }
}

impl<'de> Deserialize<'de> for FieldElem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let bytes = hex::decode(&s).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .as_slice()
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))?;
        FieldElem::from_bytes_le(&arr).map_err(serde::de::Error::custom)
    }
}
