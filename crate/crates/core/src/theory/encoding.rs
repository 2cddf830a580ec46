//! Bijection between the positive integers and the unions of measure exactly 1/2.
//!
//! A canonical union of `N` intervals is determined by its interval lengths
//! `l_1..l_N` (positive, summing to 1/2) and its gaps `g_0..g_N` (the outer two
//! nonnegative, the inner ones positive, summing to 1/2). Both are written as
//! stick-breaking ratios of the remaining mass:
//!
//! * `q_k = l_k / (1/2 - l_1 - ... - l_{k-1})` for `k = 1..N-1`, each in `(0, 1)`;
//! * `r_k = g_k / (1/2 - g_0 - ... - g_{k-1})` for `k = 0..N-1`, where `r_0` lies in
//!   `[0, 1]` if `N = 1` and in `[0, 1)` otherwise, `r_1..r_{N-2}` lie in `(0, 1)` and
//!   `r_{N-1}` (for `N >= 2`) lies in `(0, 1]`.
//!
//! The last length and gap are whatever remains. Each ratio is coded as a natural
//! number (continued fractions for the open range, with the endpoints taking the
//! smallest codes), the sequence `r_0, <q_1, r_1>, .., <q_{N-1}, r_{N-1}>` is formed
//! with Cantor pairing, and the sequence is coded by [`seq_to_nat`]. The index is
//! that code plus one.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{IntervalUnion, TheoryError};

const CHUNK: usize = 32;

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

fn pow3(k: usize) -> BigUint {
    num_traits::pow(BigUint::from(3u32), k)
}

/// Value of base-3 digits (most significant first).
fn ternary_value(digits: &[u8]) -> BigUint {
    if digits.len() <= CHUNK {
        let v = digits.iter().fold(0u64, |acc, &d| acc * 3 + d as u64);
        return BigUint::from(v);
    }
    let lo_len = {
        let mut l = CHUNK;
        while 2 * l < digits.len() {
            l *= 2;
        }
        l
    };
    let (hi, lo) = digits.split_at(digits.len() - lo_len);
    ternary_value(hi) * pow3(lo_len) + ternary_value(lo)
}

/// Exactly `len` base-3 digits of `v < 3^len`, most significant first.
fn ternary_digits(v: &BigUint, len: usize, out: &mut Vec<u8>) {
    if len <= CHUNK {
        let mut x = u64::try_from(v).expect("fits in a chunk");
        let start = out.len();
        out.resize(start + len, 0);
        for k in (0..len).rev() {
            out[start + k] = (x % 3) as u8;
            x /= 3;
        }
        return;
    }
    let mut lo_len = CHUNK;
    while 2 * lo_len < len {
        lo_len *= 2;
    }
    let (hi, lo) = v.div_rem(&pow3(lo_len));
    ternary_digits(&hi, len - lo_len, out);
    ternary_digits(&lo, lo_len, out);
}

/// Bijective base 3 over the digit alphabet {0, 1, 2}: the string of length `L`
/// maps to `(3^L - 1)/2 + value`, so the empty string maps to 0.
fn bijective_ternary(digits: &[u8]) -> BigUint {
    (pow3(digits.len()) - 1u32) / 2u32 + ternary_value(digits)
}

fn bijective_ternary_inverse(n: &BigUint) -> Vec<u8> {
    // largest L with (3^L - 1)/2 <= n
    let twice = n * 2u32 + 1u32;
    let mut len = (twice.bits() as f64 / 3f64.log2()) as usize;
    while pow3(len) > twice {
        len -= 1;
    }
    while pow3(len + 1) <= twice {
        len += 1;
    }
    let rest = n - (pow3(len) - 1u32) / 2u32;
    let mut digits = Vec::with_capacity(len);
    ternary_digits(&rest, len, &mut digits);
    digits
}

/// Codes a nonempty sequence of naturals as a natural.
///
/// Each element `n` becomes the binary expansion of `n + 1` without its leading 1,
/// the pieces are joined with the digit 2, and the resulting ternary string is read
/// in bijective base 3.
pub fn seq_to_nat(seq: &[BigUint]) -> Result<BigUint, TheoryError> {
    if seq.is_empty() {
        return Err(TheoryError::Domain("cannot code an empty sequence".into()));
    }
    let mut digits = Vec::new();
    for (k, n) in seq.iter().enumerate() {
        if k > 0 {
            digits.push(2);
        }
        let m = n + 1u32;
        let bits = m.bits();
        for b in (0..bits - 1).rev() {
            digits.push(m.bit(b) as u8);
        }
    }
    Ok(bijective_ternary(&digits))
}

pub fn nat_to_seq(n: &BigUint) -> Vec<BigUint> {
    let digits = bijective_ternary_inverse(n);
    digits
        .split(|&d| d == 2)
        .map(|piece| {
            let mut m = BigUint::one();
            for &b in piece {
                m = (m << 1u32) + b as u32;
            }
            m - 1u32
        })
        .collect()
}

pub fn cantor_pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    &s * (&s + 1u32) / 2u32 + b
}

pub fn cantor_unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let w = ((z * 8u32 + 1u32).sqrt() - 1u32) / 2u32;
    let t = &w * (&w + 1u32) / 2u32;
    let b = z - t;
    let a = &w - &b;
    (a, b)
}

/// Code of a rational in `(0, 1)` from its continued fraction `[0; a_1, .., a_k]`
/// with `a_k >= 2`: the terms `a_1 - 1, .., a_{k-1} - 1, a_k - 2` coded by [`seq_to_nat`].
fn open_unit_code(x: &BigRational) -> BigUint {
    debug_assert!(x.numer() > &BigInt::zero() && x.numer() < x.denom());
    let mut terms = Vec::new();
    // x = p / q with 0 < p < q; the leading term 0 is dropped
    let (mut p, mut q) = (x.denom().clone(), x.numer().clone());
    while !q.is_zero() {
        let (a, r) = p.div_rem(&q);
        terms.push(a.to_biguint().expect("positive"));
        p = q;
        q = r;
    }
    let last = terms.len() - 1;
    for (k, t) in terms.iter_mut().enumerate() {
        *t -= if k == last { 2u32 } else { 1u32 };
    }
    seq_to_nat(&terms).expect("nonempty")
}

fn open_unit_decode(n: &BigUint) -> BigRational {
    let seq = nat_to_seq(n);
    let last = seq.len() - 1;
    let terms: Vec<BigInt> =
        seq.into_iter().enumerate().map(|(k, t)| BigInt::from(t + if k == last { 2u32 } else { 1u32 })).collect();
    // evaluate 1 / (a_1 + 1 / (a_2 + ...)) from the back
    let mut num = BigInt::one();
    let mut den = terms[last].clone();
    for a in terms[..last].iter().rev() {
        let next_den = a * &den + &num;
        num = den;
        den = next_den;
    }
    BigRational::new(num, den)
}

/// Which endpoints of `[0, 1]` a ratio may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Open,
    ClosedLeft,
    ClosedRight,
    Closed,
}

fn encode_ratio(x: &BigRational, range: Range) -> BigUint {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let (low, high) = match range {
        Range::Open => (None, None),
        Range::ClosedLeft => (Some(0u32), None),
        Range::ClosedRight => (None, Some(0u32)),
        Range::Closed => (Some(0u32), Some(1u32)),
    };
    let offset = low.is_some() as u32 + high.is_some() as u32;
    if *x == zero {
        return BigUint::from(low.expect("zero allowed in this range"));
    }
    if *x == one {
        return BigUint::from(high.expect("one allowed in this range"));
    }
    open_unit_code(x) + offset
}

fn decode_ratio(n: &BigUint, range: Range) -> BigRational {
    let special = |k: u32| *n == BigUint::from(k);
    match range {
        Range::Open => open_unit_decode(n),
        Range::ClosedLeft if special(0) => BigRational::zero(),
        Range::ClosedRight if special(0) => BigRational::one(),
        Range::Closed if special(0) => BigRational::zero(),
        Range::Closed if special(1) => BigRational::one(),
        Range::Closed => open_unit_decode(&(n - 2u32)),
        _ => open_unit_decode(&(n - 1u32)),
    }
}

fn gap_range(k: usize, n: usize) -> Range {
    match (k, n) {
        (0, 1) => Range::Closed,
        (0, _) => Range::ClosedLeft,
        (k, n) if k == n - 1 => Range::ClosedRight,
        _ => Range::Open,
    }
}

/// Enumeration index (>= 1) of a union of measure exactly 1/2.
pub fn index_of_union(u: &IntervalUnion) -> Result<BigUint, TheoryError> {
    let measure = u.measure();
    if measure != half() {
        return Err(TheoryError::MeasureNotHalf(measure.to_string()));
    }
    let iv = u.intervals();
    let n = iv.len();
    let mut gaps = Vec::with_capacity(n + 1);
    gaps.push(iv[0].0.clone());
    for w in iv.windows(2) {
        gaps.push(&w[1].0 - &w[0].1);
    }

    let mut len_left = half();
    let mut gap_left = half();
    let r0 = &gaps[0] / &gap_left;
    gap_left -= &gaps[0];
    let mut seq = vec![encode_ratio(&r0, gap_range(0, n))];
    for k in 1..n {
        let l = &iv[k - 1].1 - &iv[k - 1].0;
        let qk = &l / &len_left;
        len_left -= l;
        let rk = &gaps[k] / &gap_left;
        gap_left -= &gaps[k];
        seq.push(cantor_pair(&encode_ratio(&qk, Range::Open), &encode_ratio(&rk, gap_range(k, n))));
    }
    Ok(seq_to_nat(&seq)? + 1u32)
}

/// The union with enumeration index `index` (>= 1), in canonical form.
pub fn union_from_index(index: &BigUint) -> Result<IntervalUnion, TheoryError> {
    if index.is_zero() {
        return Err(TheoryError::Domain("enumeration indices start at 1".into()));
    }
    let seq = nat_to_seq(&(index - 1u32));
    let n = seq.len();
    let mut lengths = Vec::with_capacity(n);
    let mut gaps = Vec::with_capacity(n);
    let mut len_left = half();
    let mut gap_left = half();

    let r0 = decode_ratio(&seq[0], gap_range(0, n));
    let g0 = &r0 * &gap_left;
    gap_left -= &g0;
    gaps.push(g0);
    for (k, z) in seq.iter().enumerate().skip(1) {
        let (a, b) = cantor_unpair(z);
        let l = decode_ratio(&a, Range::Open) * &len_left;
        len_left -= &l;
        lengths.push(l);
        let g = decode_ratio(&b, gap_range(k, n)) * &gap_left;
        gap_left -= &g;
        gaps.push(g);
    }
    lengths.push(len_left);

    let mut intervals = Vec::with_capacity(n);
    let mut x = BigRational::zero();
    for (g, l) in gaps.iter().zip(&lengths) {
        let a = &x + g;
        let b = &a + l;
        x = b.clone();
        intervals.push((a, b));
    }
    Ok(IntervalUnion::from_canonical(intervals))
}
