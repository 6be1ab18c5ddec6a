//! Deterministic fixed-point encoding of reals into the field.
//!
//! A real `x` is stored as `round(x * 2^f)` with negatives as field
//! complements `p - |v|`. Multiplication truncates (floor toward minus
//! infinity on the signed interpretation), which keeps the in-circuit
//! counterpart a plain bit decomposition.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElem;

/// Fixed-point layout: `scale_bits` fractional bits, signed magnitudes below
/// `2^(range_bits - 1)` after scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedConfig {
    pub scale_bits: u32,
    pub range_bits: u32,
}

impl Default for FixedConfig {
    fn default() -> Self {
        FixedConfig {
            scale_bits: 16,
            range_bits: 64,
        }
    }
}

impl FixedConfig {
    pub fn new(scale_bits: u32, range_bits: u32) -> Result<Self> {
        let cfg = FixedConfig {
            scale_bits,
            range_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks `2^(2R) < p` (one product never wraps) and `f < R`.
    pub fn validate(&self) -> Result<()> {
        if 2 * self.range_bits >= FieldElem::MODULUS_BITS {
            return Err(Error::BadParams(format!(
                "2^(2*{}) exceeds the field modulus",
                self.range_bits
            )));
        }
        if self.scale_bits >= self.range_bits {
            return Err(Error::BadParams(
                "scale_bits must be smaller than range_bits".into(),
            ));
        }
        Ok(())
    }

    /// The encoding of 1.0, i.e. `2^f`.
    pub fn one(&self) -> FieldElem {
        FieldElem::two_pow(self.scale_bits)
    }

    /// Largest representable signed magnitude, `2^(R-1)` (exclusive bound).
    pub fn magnitude_bound(&self) -> BigInt {
        BigInt::one() << (self.range_bits - 1)
    }
}

/// Signed interpretation of a field element (values above `p/2` are negative).
pub fn signed_lift(v: FieldElem) -> BigInt {
    v.to_signed_bigint()
}

fn check_range(v: &BigInt, cfg: &FixedConfig, what: &str) -> Result<()> {
    if v.abs() >= cfg.magnitude_bound() {
        return Err(Error::RangeOverflow(format!(
            "{what} magnitude {v} exceeds 2^{}",
            cfg.range_bits - 1
        )));
    }
    Ok(())
}

/// Encodes a real into the field: `round(x * 2^f)`, negatives as `p - |v|`.
pub fn encode(x: f64, cfg: &FixedConfig) -> Result<FieldElem> {
    if !x.is_finite() {
        return Err(Error::RangeOverflow(format!("non-finite input {x}")));
    }
    let limit = (2f64).powi((cfg.range_bits - 1 - cfg.scale_bits) as i32);
    if x.abs() >= limit {
        return Err(Error::RangeOverflow(format!(
            "input {x} outside (-{limit}, {limit})"
        )));
    }
    let scaled = (x * (2f64).powi(cfg.scale_bits as i32)).round();
    Ok(FieldElem::from_i128(scaled as i128))
}

/// Inverse of [`encode`]; errors if the decoded magnitude is out of range.
pub fn decode(v: FieldElem, cfg: &FixedConfig) -> Result<f64> {
    let signed = signed_lift(v);
    check_range(&signed, cfg, "decoded value")?;
    let num = signed.to_f64().ok_or_else(|| {
        Error::RangeOverflow("signed value not representable as f64".into())
    })?;
    Ok(num / (2f64).powi(cfg.scale_bits as i32))
}

/// Floor division by `2^f` with non-negative remainder: `v = q * 2^f + rem`,
/// `0 <= rem < 2^f`. This is the canonical truncation used everywhere,
/// in-circuit and out.
pub fn floor_div_rem_pow2(v: &BigInt, f: u32) -> (BigInt, BigInt) {
    let d = BigInt::one() << f;
    let (q, r) = v.div_mod_floor(&d);
    (q, r)
}

/// Fixed-point product: `floor((a * b) / 2^f)` on signed interpretations.
pub fn mul_rescale(a: FieldElem, b: FieldElem, cfg: &FixedConfig) -> Result<FieldElem> {
    let sa = signed_lift(a);
    let sb = signed_lift(b);
    check_range(&sa, cfg, "left operand")?;
    check_range(&sb, cfg, "right operand")?;
    let (q, _rem) = floor_div_rem_pow2(&(sa * sb), cfg.scale_bits);
    check_range(&q, cfg, "product")?;
    Ok(FieldElem::from_bigint(&q))
}

/// Rescales an already-accumulated double-scale sum (`scale 2f -> scale f`).
/// Unlike [`mul_rescale`] the input may exceed the single-value range; only
/// the quotient must fit.
pub fn rescale_sum(sum: FieldElem, cfg: &FixedConfig) -> Result<FieldElem> {
    let s = signed_lift(sum);
    let (q, _rem) = floor_div_rem_pow2(&s, cfg.scale_bits);
    check_range(&q, cfg, "rescaled sum")?;
    Ok(FieldElem::from_bigint(&q))
}

/// Fixed-point reciprocal of a positive integer divisor: `floor(2^f / n)`
/// plus the remainder `2^f - n * inv` in `[0, n)`.
pub fn divisor_inverse(n: u64, cfg: &FixedConfig) -> Result<(FieldElem, u64)> {
    if n == 0 {
        return Err(Error::EmptyEffectiveSet);
    }
    let one = BigUint::one() << cfg.scale_bits;
    let inv = &one / n;
    let rem = &one - &inv * n;
    Ok((
        FieldElem::from_biguint(&inv),
        rem.to_u64().expect("remainder below divisor"),
    ))
}

/// `true` when the signed interpretation fits the configured range.
pub fn in_range(v: FieldElem, cfg: &FixedConfig) -> bool {
    signed_lift(v).abs() < cfg.magnitude_bound()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> FixedConfig {
        FixedConfig::default()
    }

    #[test]
    fn encode_zero_and_one() {
        assert_eq!(encode(0.0, &cfg()).unwrap(), FieldElem::ZERO);
        assert_eq!(encode(1.0, &cfg()).unwrap(), FieldElem::from_u64(65536));
    }

    #[test]
    fn encode_negative_is_complement() {
        // -1.5 * 2^16 = -98304 -> p - 98304
        let v = encode(-1.5, &cfg()).unwrap();
        assert_eq!(v.to_biguint(), crate::field::modulus_biguint() - 98304u64);
    }

    #[test]
    fn decode_trivial() {
        assert_eq!(decode(FieldElem::ZERO, &cfg()).unwrap(), 0.0);
        assert_eq!(decode(FieldElem::from_u64(65536), &cfg()).unwrap(), 1.0);
    }

    #[test]
    fn roundtrip_within_half_ulp() {
        let x = 0.3;
        let back = decode(encode(x, &cfg()).unwrap(), &cfg()).unwrap();
        assert!((back - x).abs() <= (2f64).powi(-17));
    }

    #[test]
    fn mul_rescale_identities() {
        let c = cfg();
        let one = encode(1.0, &c).unwrap();
        assert_eq!(mul_rescale(one, one, &c).unwrap(), one);
        let two = encode(2.0, &c).unwrap();
        let half = encode(0.5, &c).unwrap();
        assert_eq!(mul_rescale(two, half, &c).unwrap(), one);
    }

    #[test]
    fn mul_rescale_small_product_within_one_ulp() {
        let c = cfg();
        let a = encode(0.1, &c).unwrap();
        let got = mul_rescale(a, a, &c).unwrap();
        let want = encode(0.01, &c).unwrap();
        let diff = (signed_lift(got) - signed_lift(want)).abs();
        assert!(diff <= BigInt::one(), "off by {diff}");
    }

    #[test]
    fn encode_range_enforced() {
        // |x| must stay below 2^(R-1-f) = 2^47
        assert!(encode((2f64).powi(47), &cfg()).is_err());
        assert!(encode((2f64).powi(46), &cfg()).is_ok());
    }

    #[test]
    fn divisor_inverse_floor() {
        let c = cfg();
        let (inv, rem) = divisor_inverse(3, &c).unwrap();
        assert_eq!(inv, FieldElem::from_u64(21845)); // floor(65536/3)
        assert_eq!(rem, 1);
        let (inv1, rem1) = divisor_inverse(1, &c).unwrap();
        assert_eq!(inv1, c.one());
        assert_eq!(rem1, 0);
        assert!(divisor_inverse(0, &c).is_err());
    }

    proptest! {
        // Addition of encodings is exact while both stay in range.
        #[test]
        fn addition_exact(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let c = cfg();
            let ex = encode(x, &c).unwrap();
            let ey = encode(y, &c).unwrap();
            let sum = decode(ex + ey, &c).unwrap();
            prop_assert_eq!(sum, decode(ex, &c).unwrap() + decode(ey, &c).unwrap());
        }

        // |decode(mul_rescale(enc x, enc y)) - x*y| <= 2^(-f+1) * max(1,|x|,|y|)
        #[test]
        fn product_error_bound(x in -1e4f64..1e4, y in -1e4f64..1e4) {
            let c = cfg();
            let prod = mul_rescale(encode(x, &c).unwrap(), encode(y, &c).unwrap(), &c).unwrap();
            let got = decode(prod, &c).unwrap();
            let bound = (2f64).powi(-(c.scale_bits as i32) + 1) * 1f64.max(x.abs()).max(y.abs());
            prop_assert!((got - x * y).abs() <= bound, "got {} want {} bound {}", got, x * y, bound);
        }

        // Encoding is injective over the representable grid.
        #[test]
        fn injective_on_grid(a in -(1i64 << 40)..(1i64 << 40), b in -(1i64 << 40)..(1i64 << 40)) {
            prop_assume!(a != b);
            let fa = FieldElem::from_i64(a);
            let fb = FieldElem::from_i64(b);
            prop_assert_ne!(fa, fb);
            prop_assert_eq!(signed_lift(fa), BigInt::from(a));
        }
    }
}
