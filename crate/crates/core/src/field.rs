//! Exact finite-field arithmetic.
//!
//! Two field families are provided: prime fields `GF(p)` for any prime
//! `p < 2^63`, and binary extension fields `GF(2^m)` for `1 <= m <= 16`.
//! Fields are context objects: elements are small `Copy` words and every
//! operation goes through a `&self` method on the field. That keeps the
//! modulus out of every element and lets [`Counted`] wrap any field to
//! tally the arithmetic performed through it.

use std::cell::Cell;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, AddAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The Mersenne prime `2^61 - 1`, the default simulation modulus.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a prime below 2^63")]
    NotPrime(u64),
    #[error("extension degree {0} is outside the supported range 1..=16")]
    UnsupportedDegree(u32),
    #[error("operands belong to different fields ({0} vs {1})")]
    Mismatch(FieldSpec, FieldSpec),
    #[error("value {value} is not a canonical element of {spec}")]
    NotCanonical { value: u64, spec: FieldSpec },
    #[error("{0} has no signed representation")]
    Unsigned(FieldSpec),
    #[error("bit value must be 0 or 1, got {0}")]
    NotABit(u8),
}

/// Serializable description of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Prime {
        p: u64,
    },
    #[serde(rename = "binary-extension", alias = "binary")]
    BinaryExtension {
        m: u32,
    },
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Prime { p: MERSENNE_61 }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime { p } => write!(f, "GF({p})"),
            FieldSpec::BinaryExtension { m } => write!(f, "GF(2^{m})"),
        }
    }
}

impl FieldSpec {
    /// Number of elements in the described field.
    pub fn size(&self) -> u64 {
        match *self {
            FieldSpec::Prime { p } => p,
            FieldSpec::BinaryExtension { m } => 1u64 << m,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        match *self {
            FieldSpec::Prime { p } => PrimeField::new(p).map(|_| ()),
            FieldSpec::BinaryExtension { m } => BinaryField::new(m).map(|_| ()),
        }
    }

    /// Wraps a canonical value as a tagged [`FieldElement`].
    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        self.validate()?;
        if value >= self.size() {
            return Err(FieldError::NotCanonical { value, spec: *self });
        }
        Ok(FieldElement { value, spec: *self })
    }
}

/// Tally of field operations performed through a [`Counted`] field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounter {
    pub additions: u64,
    pub multiplications: u64,
    pub inversions: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.additions + self.multiplications + self.inversions
    }
}

impl Add for OpCounter {
    type Output = OpCounter;

    fn add(self, rhs: OpCounter) -> OpCounter {
        OpCounter {
            additions: self.additions + rhs.additions,
            multiplications: self.multiplications + rhs.multiplications,
            inversions: self.inversions + rhs.inversions,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: OpCounter) {
        *self = *self + rhs;
    }
}

/// A finite field used as an arithmetic context.
///
/// `Elem::default()` is the additive identity for every implementation.
/// [`Field::from_u64`] is the ring homomorphism from the integers, so in
/// characteristic 2 it only keeps the parity; [`Field::element`] instead
/// enumerates the field and is what evaluation grids are built from.
pub trait Field: fmt::Debug {
    type Elem: Copy + Eq + Hash + fmt::Debug + Default + Send + Sync + 'static;

    fn spec(&self) -> FieldSpec;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn inv(&self, a: Self::Elem) -> Result<Self::Elem, FieldError>;

    /// Image of the integer `v` under the canonical map `Z -> F`.
    #[allow(clippy::wrong_self_convention)]
    fn from_u64(&self, v: u64) -> Self::Elem;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, v: i64) -> Self::Elem {
        let magnitude = self.from_u64(v.unsigned_abs());
        if v < 0 {
            self.neg(magnitude)
        } else {
            magnitude
        }
    }
    /// The `index`-th element in a fixed enumeration of the field; distinct
    /// for `index < size()`.
    fn element(&self, index: u64) -> Self::Elem;
    /// Canonical integer representative (the word itself for `GF(2^m)`).
    fn to_u64(&self, a: Self::Elem) -> u64;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    /// Representative in `[-(p-1)/2, (p-1)/2]`; prime fields only.
    fn signed_repr(&self, a: Self::Elem) -> Result<i64, FieldError> {
        let _ = a;
        Err(FieldError::Unsigned(self.spec()))
    }

    fn size(&self) -> u64 {
        self.spec().size()
    }

    fn div(&self, a: Self::Elem, b: Self::Elem) -> Result<Self::Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }

    /// `acc[j] += rhs[j]`.
    fn add_assign_slice(&self, acc: &mut [Self::Elem], rhs: &[Self::Elem]) {
        debug_assert_eq!(acc.len(), rhs.len());
        for (a, &b) in acc.iter_mut().zip(rhs) {
            *a = self.add(*a, b);
        }
    }

    /// `acc[j] += scale * rhs[j]`.
    fn scaled_add_assign(&self, acc: &mut [Self::Elem], scale: Self::Elem, rhs: &[Self::Elem]) {
        debug_assert_eq!(acc.len(), rhs.len());
        for (a, &b) in acc.iter_mut().zip(rhs) {
            *a = self.add(*a, self.mul(scale, b));
        }
    }

    /// `scale * rhs[j]` as a fresh vector.
    fn scale_slice(&self, scale: Self::Elem, rhs: &[Self::Elem]) -> Vec<Self::Elem> {
        rhs.iter().map(|&b| self.mul(scale, b)).collect()
    }
}

/// Element of `GF(p)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp(u64);

impl Fp {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    mersenne: bool,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= 1 << 63 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(PrimeField {
            p,
            mersenne: p == MERSENNE_61,
        })
    }

    pub fn mersenne61() -> Self {
        PrimeField {
            p: MERSENNE_61,
            mersenne: true,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Wraps `v`, which must already be reduced.
    pub fn elem(&self, v: u64) -> Fp {
        debug_assert!(v < self.p);
        Fp(v)
    }

    #[inline]
    fn reduce_wide(&self, z: u128) -> u64 {
        if self.mersenne {
            let lo = (z as u64) & MERSENNE_61;
            let hi = (z >> 61) as u64;
            let s = lo + hi;
            if s >= MERSENNE_61 {
                s - MERSENNE_61
            } else {
                s
            }
        } else {
            (z % self.p as u128) as u64
        }
    }

    #[inline]
    fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
}

impl Field for PrimeField {
    type Elem = Fp;

    fn spec(&self) -> FieldSpec {
        FieldSpec::Prime { p: self.p }
    }

    fn zero(&self) -> Fp {
        Fp(0)
    }

    fn one(&self) -> Fp {
        Fp(1 % self.p)
    }

    #[inline]
    fn add(&self, a: Fp, b: Fp) -> Fp {
        Fp(self.add_raw(a.0, b.0))
    }

    #[inline]
    fn sub(&self, a: Fp, b: Fp) -> Fp {
        if a.0 >= b.0 {
            Fp(a.0 - b.0)
        } else {
            Fp(a.0 + self.p - b.0)
        }
    }

    #[inline]
    fn neg(&self, a: Fp) -> Fp {
        if a.0 == 0 {
            a
        } else {
            Fp(self.p - a.0)
        }
    }

    #[inline]
    fn mul(&self, a: Fp, b: Fp) -> Fp {
        Fp(self.reduce_wide(a.0 as u128 * b.0 as u128))
    }

    fn inv(&self, a: Fp) -> Result<Fp, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        // Extended Euclid on (a, p).
        let (mut r0, mut r1) = (self.p as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fp(t0.rem_euclid(self.p as i128) as u64))
    }

    fn from_u64(&self, v: u64) -> Fp {
        Fp(v % self.p)
    }

    fn element(&self, index: u64) -> Fp {
        Fp(index % self.p)
    }

    fn to_u64(&self, a: Fp) -> u64 {
        a.0
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp {
        Fp(rng.gen_range(0..self.p))
    }

    fn signed_repr(&self, a: Fp) -> Result<i64, FieldError> {
        let half = (self.p - 1) / 2;
        Ok(if a.0 <= half {
            a.0 as i64
        } else {
            a.0 as i64 - self.p as i64
        })
    }

    fn add_assign_slice(&self, acc: &mut [Fp], rhs: &[Fp]) {
        assert_eq!(acc.len(), rhs.len());
        for (a, b) in acc.iter_mut().zip(rhs) {
            a.0 = self.add_raw(a.0, b.0);
        }
    }
}

/// Element of `GF(2^m)`, stored as the coefficient word of a polynomial
/// over `GF(2)` (bit `i` is the coefficient of `x^i`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2m(u32);

impl Gf2m {
    pub fn bits(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Gf2m {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

/// Reduction polynomials for `GF(2^m)`, indexed by `m - 1`; bit `i` is the
/// coefficient of `x^i` and the leading `x^m` term is included.
pub const IRREDUCIBLE_POLYS: [u32; 16] = [
    0b11,    // x + 1
    0b111,   // x^2 + x + 1
    0b1011,  // x^3 + x + 1
    0x13,    // x^4 + x + 1
    0x25,    // x^5 + x^2 + 1
    0x43,    // x^6 + x + 1
    0x83,    // x^7 + x + 1
    0x11D,   // x^8 + x^4 + x^3 + x^2 + 1
    0x211,   // x^9 + x^4 + 1
    0x409,   // x^10 + x^3 + 1
    0x805,   // x^11 + x^2 + 1
    0x1053,  // x^12 + x^6 + x^4 + x + 1
    0x201B,  // x^13 + x^4 + x^3 + x + 1
    0x4443,  // x^14 + x^10 + x^6 + x + 1
    0x8003,  // x^15 + x + 1
    0x1100B, // x^16 + x^12 + x^3 + x + 1
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryField {
    m: u32,
    poly: u32,
}

impl BinaryField {
    pub fn new(m: u32) -> Result<Self, FieldError> {
        if !(1..=16).contains(&m) {
            return Err(FieldError::UnsupportedDegree(m));
        }
        Ok(BinaryField {
            m,
            poly: IRREDUCIBLE_POLYS[m as usize - 1],
        })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn reduction_polynomial(&self) -> u32 {
        self.poly
    }

    fn mask(&self) -> u32 {
        (1u32 << self.m) - 1
    }

    /// Wraps an `m`-bit word.
    pub fn elem(&self, word: u32) -> Gf2m {
        debug_assert!(word <= self.mask());
        Gf2m(word)
    }

    /// Bit embedding into `GF(2^m)`: 0 maps to the all-zero word and 1 to
    /// `0...01`.
    pub fn embed_bit(&self, bit: u8) -> Result<Gf2m, FieldError> {
        match bit {
            0 => Ok(Gf2m(0)),
            1 => Ok(Gf2m(1)),
            other => Err(FieldError::NotABit(other)),
        }
    }

    fn clmul_reduce(&self, a: u32, b: u32) -> u32 {
        let mut prod: u64 = 0;
        let mut b = b as u64;
        let mut shifted = a as u64;
        while b != 0 {
            if b & 1 == 1 {
                prod ^= shifted;
            }
            shifted <<= 1;
            b >>= 1;
        }
        let m = self.m;
        for bit in (m..2 * m).rev() {
            if prod >> bit & 1 == 1 {
                prod ^= (self.poly as u64) << (bit - m);
            }
        }
        prod as u32
    }
}

/// Bit embedding of `bit` into `GF(2^m)`.
pub fn embed_bit(bit: u8, m: u32) -> Result<FieldElement, FieldError> {
    let field = BinaryField::new(m)?;
    let word = field.embed_bit(bit)?;
    Ok(FieldElement {
        value: word.0 as u64,
        spec: field.spec(),
    })
}

impl Field for BinaryField {
    type Elem = Gf2m;

    fn spec(&self) -> FieldSpec {
        FieldSpec::BinaryExtension { m: self.m }
    }

    fn zero(&self) -> Gf2m {
        Gf2m(0)
    }

    fn one(&self) -> Gf2m {
        Gf2m(1)
    }

    fn add(&self, a: Gf2m, b: Gf2m) -> Gf2m {
        Gf2m(a.0 ^ b.0)
    }

    fn sub(&self, a: Gf2m, b: Gf2m) -> Gf2m {
        Gf2m(a.0 ^ b.0)
    }

    fn neg(&self, a: Gf2m) -> Gf2m {
        a
    }

    fn mul(&self, a: Gf2m, b: Gf2m) -> Gf2m {
        Gf2m(self.clmul_reduce(a.0, b.0))
    }

    fn inv(&self, a: Gf2m) -> Result<Gf2m, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        // a^(2^m - 2)
        let mut exp = (1u64 << self.m) - 2;
        let mut base = a.0;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.clmul_reduce(acc, base);
            }
            base = self.clmul_reduce(base, base);
            exp >>= 1;
        }
        Ok(Gf2m(acc))
    }

    fn from_u64(&self, v: u64) -> Gf2m {
        Gf2m((v & 1) as u32)
    }

    fn element(&self, index: u64) -> Gf2m {
        Gf2m(index as u32 & self.mask())
    }

    fn to_u64(&self, a: Gf2m) -> u64 {
        a.0 as u64
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Gf2m {
        Gf2m(rng.gen_range(0..=self.mask()))
    }
}

/// A field wrapper that tallies every operation routed through it.
///
/// Additions, subtractions and negations count as additions. Slice
/// operations tick once per element.
#[derive(Debug)]
pub struct Counted<'f, F: Field> {
    inner: &'f F,
    counter: Cell<OpCounter>,
}

impl<'f, F: Field> Counted<'f, F> {
    pub fn new(inner: &'f F) -> Self {
        Counted {
            inner,
            counter: Cell::new(OpCounter::default()),
        }
    }

    pub fn inner(&self) -> &'f F {
        self.inner
    }

    pub fn counts(&self) -> OpCounter {
        self.counter.get()
    }

    /// Returns the current tally and resets it; used at scope boundaries.
    pub fn take(&self) -> OpCounter {
        self.counter.replace(OpCounter::default())
    }

    fn tick(&self, additions: u64, multiplications: u64, inversions: u64) {
        let mut c = self.counter.get();
        c.additions += additions;
        c.multiplications += multiplications;
        c.inversions += inversions;
        self.counter.set(c);
    }
}

impl<F: Field> Field for Counted<'_, F> {
    type Elem = F::Elem;

    fn spec(&self) -> FieldSpec {
        self.inner.spec()
    }

    fn zero(&self) -> F::Elem {
        self.inner.zero()
    }

    fn one(&self) -> F::Elem {
        self.inner.one()
    }

    fn add(&self, a: F::Elem, b: F::Elem) -> F::Elem {
        self.tick(1, 0, 0);
        self.inner.add(a, b)
    }

    fn sub(&self, a: F::Elem, b: F::Elem) -> F::Elem {
        self.tick(1, 0, 0);
        self.inner.sub(a, b)
    }

    fn neg(&self, a: F::Elem) -> F::Elem {
        self.tick(1, 0, 0);
        self.inner.neg(a)
    }

    fn mul(&self, a: F::Elem, b: F::Elem) -> F::Elem {
        self.tick(0, 1, 0);
        self.inner.mul(a, b)
    }

    fn inv(&self, a: F::Elem) -> Result<F::Elem, FieldError> {
        self.tick(0, 0, 1);
        self.inner.inv(a)
    }

    fn from_u64(&self, v: u64) -> F::Elem {
        self.inner.from_u64(v)
    }

    fn from_i64(&self, v: i64) -> F::Elem {
        self.inner.from_i64(v)
    }

    fn element(&self, index: u64) -> F::Elem {
        self.inner.element(index)
    }

    fn to_u64(&self, a: F::Elem) -> u64 {
        self.inner.to_u64(a)
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> F::Elem {
        self.inner.random(rng)
    }

    fn signed_repr(&self, a: F::Elem) -> Result<i64, FieldError> {
        self.inner.signed_repr(a)
    }

    fn add_assign_slice(&self, acc: &mut [F::Elem], rhs: &[F::Elem]) {
        self.tick(acc.len() as u64, 0, 0);
        self.inner.add_assign_slice(acc, rhs)
    }

    fn scaled_add_assign(&self, acc: &mut [F::Elem], scale: F::Elem, rhs: &[F::Elem]) {
        let n = acc.len() as u64;
        self.tick(n, n, 0);
        self.inner.scaled_add_assign(acc, scale, rhs)
    }

    fn scale_slice(&self, scale: F::Elem, rhs: &[F::Elem]) -> Vec<F::Elem> {
        self.tick(0, rhs.len() as u64, 0);
        self.inner.scale_slice(scale, rhs)
    }
}

/// An element tagged with its field, for callers that only know the field
/// at runtime. Mixing elements of different fields is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    spec: FieldSpec,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    fn binary(&self, other: &FieldElement) -> Result<FieldSpec, FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::Mismatch(self.spec, other.spec));
        }
        Ok(self.spec)
    }

    fn apply(
        spec: FieldSpec,
        prime: impl FnOnce(&PrimeField) -> Result<Fp, FieldError>,
        binary: impl FnOnce(&BinaryField) -> Result<Gf2m, FieldError>,
    ) -> Result<FieldElement, FieldError> {
        let value = match spec {
            FieldSpec::Prime { p } => prime(&PrimeField::new(p)?)?.0,
            FieldSpec::BinaryExtension { m } => binary(&BinaryField::new(m)?)?.0 as u64,
        };
        Ok(FieldElement { value, spec })
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let spec = self.binary(other)?;
        let (a, b) = (self.value, other.value);
        Self::apply(
            spec,
            |f| Ok(f.add(Fp(a), Fp(b))),
            |f| Ok(f.add(Gf2m(a as u32), Gf2m(b as u32))),
        )
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let spec = self.binary(other)?;
        let (a, b) = (self.value, other.value);
        Self::apply(
            spec,
            |f| Ok(f.sub(Fp(a), Fp(b))),
            |f| Ok(f.sub(Gf2m(a as u32), Gf2m(b as u32))),
        )
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        let spec = self.binary(other)?;
        let (a, b) = (self.value, other.value);
        Self::apply(
            spec,
            |f| Ok(f.mul(Fp(a), Fp(b))),
            |f| Ok(f.mul(Gf2m(a as u32), Gf2m(b as u32))),
        )
    }

    pub fn neg(&self) -> Result<FieldElement, FieldError> {
        let a = self.value;
        Self::apply(
            self.spec,
            |f| Ok(f.neg(Fp(a))),
            |f| Ok(f.neg(Gf2m(a as u32))),
        )
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        let a = self.value;
        Self::apply(self.spec, |f| f.inv(Fp(a)), |f| f.inv(Gf2m(a as u32)))
    }

    pub fn signed_repr(&self) -> Result<i64, FieldError> {
        match self.spec {
            FieldSpec::Prime { p } => PrimeField::new(p)?.signed_repr(Fp(self.value)),
            FieldSpec::BinaryExtension { .. } => Err(FieldError::Unsigned(self.spec)),
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf17() -> PrimeField {
        PrimeField::new(17).unwrap()
    }

    fn gf16() -> BinaryField {
        BinaryField::new(4).unwrap()
    }

    #[test]
    fn prime_field_examples() {
        let f = gf17();
        let x = f.elem(11);
        assert_eq!(f.add(f.zero(), x), x);
        assert_eq!(f.add(f.elem(9), f.elem(12)), f.elem(4));
        assert_eq!(f.mul(f.one(), x), x);
        assert_eq!(f.inv(f.elem(5)).unwrap(), f.elem(7));
        assert_eq!(f.mul(f.neg(f.elem(3)), f.elem(4)), f.elem(56 % 17));
        assert_eq!(f.inv(f.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn binary_field_examples() {
        let f = gf16();
        assert_eq!(f.add(f.elem(0b1010), f.elem(0b0110)), f.elem(0b1100));
        assert_eq!(f.mul(f.one(), f.elem(0b1011)), f.elem(0b1011));
        // x * x^3 = x^4 = x + 1 under x^4 + x + 1
        assert_eq!(f.mul(f.elem(0b10), f.elem(0b1000)), f.elem(0b0011));
        assert_eq!(f.inv(f.zero()), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn signed_representation() {
        let f = gf17();
        assert_eq!(f.signed_repr(f.elem(0)).unwrap(), 0);
        assert_eq!(f.signed_repr(f.elem(16)).unwrap(), -1);
        assert_eq!(f.signed_repr(f.elem(8)).unwrap(), 8);
        assert_eq!(f.signed_repr(f.elem(9)).unwrap(), -8);
        assert!(gf16().signed_repr(Gf2m(3)).is_err());
    }

    #[test]
    fn signed_repr_is_a_bijection_on_gf17() {
        let f = gf17();
        let mut seen: Vec<i64> = (0..17).map(|v| f.signed_repr(f.elem(v)).unwrap()).collect();
        seen.sort();
        assert_eq!(seen, (-8..=8).collect::<Vec<_>>());
        for a in 0..17 {
            for b in 0..17 {
                let (sa, sb) = (
                    f.signed_repr(f.elem(a)).unwrap(),
                    f.signed_repr(f.elem(b)).unwrap(),
                );
                if (sa + sb).abs() <= 8 {
                    let sum = f.add(f.elem(a), f.elem(b));
                    assert_eq!(f.signed_repr(sum).unwrap(), sa + sb);
                }
            }
        }
    }

    #[test]
    fn bit_embedding() {
        assert_eq!(embed_bit(0, 4).unwrap().value(), 0b0000);
        assert_eq!(embed_bit(1, 4).unwrap().value(), 0b0001);
        assert_eq!(embed_bit(1, 1).unwrap().value(), 1);
        assert!(embed_bit(2, 4).is_err());
    }

    fn exhaustive_axioms<F: Field>(f: &F) {
        let elems: Vec<F::Elem> = (0..f.size()).map(|i| f.element(i)).collect();
        for &a in &elems {
            if a != f.zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            for &b in &elems {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.sub(f.add(a, b), b), a);
                for &c in &elems {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_fields() {
        exhaustive_axioms(&gf17());
        exhaustive_axioms(&gf16());
        exhaustive_axioms(&BinaryField::new(1).unwrap());
    }

    /// Brute-force irreducibility: no polynomial of degree 1..=m/2 divides.
    fn irreducible(poly: u32, m: u32) -> bool {
        let deg = |v: u64| 63 - v.leading_zeros();
        let rem = |mut a: u64, b: u64| {
            while a != 0 && deg(a) >= deg(b) {
                a ^= b << (deg(a) - deg(b));
            }
            a
        };
        for d in 1..=m / 2 {
            for divisor in (1u64 << d)..(1u64 << (d + 1)) {
                if rem(poly as u64, divisor) == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn reduction_polynomials_are_irreducible() {
        for m in 1..=16u32 {
            let poly = IRREDUCIBLE_POLYS[m as usize - 1];
            assert_eq!(31 - poly.leading_zeros(), m, "degree of poly for m={m}");
            assert!(irreducible(poly, m), "poly for m={m} is reducible");
        }
    }

    #[test]
    fn binary_inverses_for_all_degrees() {
        for m in 1..=16 {
            let f = BinaryField::new(m).unwrap();
            for w in [1u32, 2, 3, (1 << m) - 1] {
                let a = f.element(w as u64);
                if a != f.zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one(), "m={m} w={w}");
                }
            }
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime(17));
        assert!(is_prime(MERSENNE_61));
        assert!(!is_prime(1));
        assert!(!is_prime(561));
        assert!(!is_prime((1 << 61) + 1));
        assert!(PrimeField::new(15).is_err());
    }

    #[test]
    fn tagged_elements_reject_mismatch() {
        let a = FieldSpec::Prime { p: 17 }.element(3).unwrap();
        let b = FieldSpec::BinaryExtension { m: 4 }.element(3).unwrap();
        assert!(matches!(a.add(&b), Err(FieldError::Mismatch(..))));
        let c = FieldSpec::Prime { p: 17 }.element(16).unwrap();
        assert_eq!(a.add(&c).unwrap().value(), 2);
        assert_eq!(c.signed_repr().unwrap(), -1);
        assert!(FieldSpec::Prime { p: 17 }.element(17).is_err());
        assert_eq!(
            FieldSpec::Prime { p: 17 }
                .element(5)
                .unwrap()
                .inv()
                .unwrap()
                .value(),
            7
        );
    }

    #[test]
    fn counted_field_ticks_per_operation() {
        let f = gf17();
        let c = Counted::new(&f);
        let a = c.add(f.elem(1), f.elem(2));
        let b = c.mul(a, a);
        let _ = c.inv(b).unwrap();
        let mut acc = vec![f.elem(1); 4];
        c.scaled_add_assign(&mut acc, f.elem(2), &[f.elem(3); 4]);
        assert_eq!(
            c.counts(),
            OpCounter {
                additions: 5,
                multiplications: 5,
                inversions: 1
            }
        );
        assert_eq!(c.take().total(), 11);
        assert_eq!(c.counts().total(), 0);
    }

    #[test]
    fn mersenne_reduction_matches_generic() {
        let fast = PrimeField::mersenne61();
        assert!(fast.mersenne);
        let slow = PrimeField {
            p: MERSENNE_61,
            mersenne: false,
        };
        let edge = [0, 1, 2, MERSENNE_61 - 1, MERSENNE_61 - 2, 1 << 60];
        for &a in &edge {
            for &b in &edge {
                assert_eq!(fast.mul(Fp(a), Fp(b)), slow.mul(Fp(a), Fp(b)));
            }
        }
    }

    proptest! {
        #[test]
        fn large_prime_axioms(a in 0..MERSENNE_61, b in 0..MERSENNE_61, c in 0..MERSENNE_61) {
            let f = PrimeField::mersenne61();
            let (a, b, c) = (Fp(a), Fp(b), Fp(c));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), Fp((a.0 as u128 * b.0 as u128 % MERSENNE_61 as u128) as u64));
            if a.0 != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }

        #[test]
        fn from_i64_round_trips_signed_repr(v in -(1i64 << 59)..(1i64 << 59)) {
            let f = PrimeField::mersenne61();
            prop_assert_eq!(f.signed_repr(f.from_i64(v)).unwrap(), v);
        }
    }
}
