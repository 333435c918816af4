//! Finite fields GF(p) and GF(p^e).
//!
//! An element `a_0 + a_1 x + ... + a_{e-1} x^{e-1}` is encoded as the integer
//! `a_0 + a_1 p + ... + a_{e-1} p^{e-1}`, so prime-field elements are simply
//! their residues `0..p`. Extension fields reduce products modulo a monic
//! irreducible polynomial stored little-endian (constant term first).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order for which multiplication/inverse tables are cached.
const TABLE_LIMIT: u32 = 256;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("field order {0} is too large")]
    TooLarge(u64),
    #[error("GF({p}^{e}) has no built-in modulus; pass one explicitly")]
    MissingModulus { p: u32, e: u32 },
    #[error("a prime field takes no modulus")]
    UnexpectedModulus,
    #[error(
        "modulus {0:?} is not a monic polynomial of the right degree with coefficients below p"
    )]
    BadModulus(Vec<u32>),
    #[error("modulus {0:?} is reducible")]
    ReduciblePolynomial(Vec<u32>),
    #[error("element code {code} is out of range for GF({q})")]
    CodeOutOfRange { code: u32, q: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("malformed field descriptor {0:?}")]
    BadDescriptor(String),
}

/// An element of some GF(q), stored as its integer code.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(pub(crate) u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// The field GF(p^e) together with its defining polynomial.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Arc<Tables>>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Built-in moduli for GF(16), GF(25) and GF(27), little-endian and monic.
pub fn default_modulus(p: u32, e: u32) -> Option<&'static [u32]> {
    match (p, e) {
        // x^4 + x^3 + 1
        (2, 4) => Some(&[1, 0, 0, 1, 1]),
        // x^2 + x + 2
        (5, 2) => Some(&[2, 1, 1]),
        // x^3 + 2x + 1
        (3, 3) => Some(&[1, 2, 0, 1]),
        _ => None,
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, e)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

impl FieldSpec {
    /// Builds GF(p^e). For `e > 1` the modulus is required unless a built-in
    /// one exists for `(p, e)`.
    pub fn new(p: u32, e: u32, modulus: Option<Vec<u32>>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::BadDegree);
        }
        let q64 = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if q64 > MAX_ORDER as u64 {
            return Err(FieldError::TooLarge(q64));
        }
        let q = q64 as u32;
        let modulus = if e == 1 {
            match modulus {
                Some(m) if !m.is_empty() => return Err(FieldError::UnexpectedModulus),
                _ => Vec::new(),
            }
        } else {
            let m = match modulus {
                Some(m) => m,
                None => default_modulus(p, e)
                    .ok_or(FieldError::MissingModulus { p, e })?
                    .to_vec(),
            };
            if m.len() != e as usize + 1 || m[e as usize] != 1 || m.iter().any(|&c| c >= p) {
                return Err(FieldError::BadModulus(m));
            }
            if !poly::is_irreducible(&m, p) {
                return Err(FieldError::ReduciblePolynomial(m));
            }
            m
        };
        let mut spec = FieldSpec {
            p,
            e,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            spec.tables = Some(Arc::new(spec.build_tables()));
        }
        Ok(spec)
    }

    /// GF(p) for a prime `p`.
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    /// GF(q) for a prime or one of the built-in extension orders.
    pub fn of_order(q: u32) -> Result<Self, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::BadDescriptor(q.to_string()))?;
        Self::new(p, e, None)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Little-endian monic modulus; empty for prime fields.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn has_default_modulus(&self) -> bool {
        self.e == 1 || default_modulus(self.p, self.e) == Some(self.modulus.as_slice())
    }

    pub fn elem(&self, code: u32) -> Result<FieldElement, FieldError> {
        if code < self.q {
            Ok(FieldElement(code))
        } else {
            Err(FieldError::CodeOutOfRange { code, q: self.q })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.q
    }

    /// Coefficients `a_0..a_{e-1}` of an element.
    pub fn to_coeffs(&self, a: FieldElement) -> Vec<u32> {
        let mut c = a.0;
        (0..self.e)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let mut code = 0u64;
        for &c in coeffs.iter().rev() {
            code = code * self.p as u64 + (c % self.p) as u64;
        }
        if coeffs.len() > self.e as usize || code >= self.q as u64 {
            return Err(FieldError::CodeOutOfRange {
                code: code.min(u32::MAX as u64) as u32,
                q: self.q,
            });
        }
        Ok(FieldElement(code as u32))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        match &self.tables {
            Some(t) => FieldElement(t.add[(a.0 * self.q + b.0) as usize] as u32),
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.neg[a.0 as usize] as u32),
            None => self.neg_slow(a),
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.0 < self.q && b.0 < self.q);
        match &self.tables {
            Some(t) => FieldElement(t.mul[(a.0 * self.q + b.0) as usize] as u32),
            None => self.mul_slow(a, b),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(t) => FieldElement(t.inv[a.0 as usize] as u32),
            None => self.inv_slow(a),
        })
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, mut k: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn checked_add(
        &self,
        a: FieldElement,
        b: FieldElement,
    ) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn checked_mul(
        &self,
        a: FieldElement,
        b: FieldElement,
    ) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn checked_inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.inv(a)
    }

    fn check(&self, a: FieldElement) -> Result<(), FieldError> {
        self.elem(a.0).map(|_| ())
    }

    fn add_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut code = 0;
        let mut place = 1;
        for _ in 0..self.e {
            code += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElement(code)
    }

    fn neg_slow(&self, a: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement((self.p - a.0) % self.p);
        }
        let c: Vec<u32> = self
            .to_coeffs(a)
            .into_iter()
            .map(|d| (self.p - d) % self.p)
            .collect();
        self.encode(&c)
    }

    fn mul_slow(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.e == 1 {
            return FieldElement(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        let prod = poly::mul(&self.to_coeffs(a), &self.to_coeffs(b), self.p);
        let (_, rem) = poly::divmod(&prod, &self.modulus, self.p);
        self.encode(&rem)
    }

    fn inv_slow(&self, a: FieldElement) -> FieldElement {
        if self.e == 1 {
            return self.pow(a, (self.p - 2) as u64);
        }
        let inv = poly::inverse_mod(&self.to_coeffs(a), &self.modulus, self.p)
            .expect("nonzero element of a field is invertible");
        self.encode(&inv)
    }

    fn encode(&self, coeffs: &[u32]) -> FieldElement {
        let mut code = 0;
        for &c in coeffs.iter().take(self.e as usize).rev() {
            code = code * self.p + c;
        }
        FieldElement(code)
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        let mut neg = vec![0u16; q];
        let mut inv = vec![0u16; q];
        for a in 0..self.q {
            neg[a as usize] = self.neg_slow(FieldElement(a)).0 as u16;
            if a != 0 {
                inv[a as usize] = self.inv_slow(FieldElement(a)).0 as u16;
            }
            for b in 0..self.q {
                let i = a as usize * q + b as usize;
                add[i] = self.add_slow(FieldElement(a), FieldElement(b)).0 as u16;
                mul[i] = self.mul_slow(FieldElement(a), FieldElement(b)).0 as u16;
            }
        }
        Tables { add, mul, neg, inv }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}^{}", self.p, self.e)?;
            if !self.has_default_modulus() {
                let m: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
                write!(f, " mod={}", m.join(","))?;
            }
            Ok(())
        }
    }
}

impl FromStr for FieldSpec {
    type Err = FieldError;

    /// Parses `"q"`, `"p^e"`, optionally followed by `" mod=c0,c1,...,ce"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FieldError::BadDescriptor(s.to_string());
        let mut parts = s.split_whitespace();
        let order = parts.next().ok_or_else(bad)?;
        let (p, e) = match order.split_once('^') {
            Some((p, e)) => (
                p.parse::<u32>().map_err(|_| bad())?,
                e.parse::<u32>().map_err(|_| bad())?,
            ),
            None => prime_power(order.parse::<u32>().map_err(|_| bad())?).ok_or_else(bad)?,
        };
        let mut modulus = None;
        for part in parts {
            let list = part.strip_prefix("mod=").ok_or_else(bad)?;
            let coeffs = list
                .split(',')
                .map(|c| c.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            modulus = Some(coeffs);
        }
        FieldSpec::new(p, e, modulus)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense polynomials over GF(p), little-endian, with trailing zeros trimmed.
mod poly {
    fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod_p(a: u32, p: u32) -> u32 {
        let mut acc = 1u64;
        let mut base = a as u64 % p as u64;
        let mut k = p - 2;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            k >>= 1;
        }
        acc as u32
    }

    pub(super) fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    pub(super) fn divmod(a: &[u32], m: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
        let m = trim(m.to_vec());
        let mut rem = trim(a.to_vec());
        assert!(!m.is_empty(), "division by the zero polynomial");
        if rem.len() < m.len() {
            return (Vec::new(), rem);
        }
        let lead_inv = inv_mod_p(*m.last().unwrap(), p) as u64;
        let mut quot = vec![0u32; rem.len() - m.len() + 1];
        while rem.len() >= m.len() {
            let shift = rem.len() - m.len();
            let factor = (*rem.last().unwrap() as u64 * lead_inv % p as u64) as u32;
            quot[shift] = factor;
            for (i, &c) in m.iter().enumerate() {
                let t = (c as u64 * factor as u64 % p as u64) as u32;
                rem[i + shift] = (rem[i + shift] + p - t) % p;
            }
            rem = trim(rem);
        }
        (trim(quot), rem)
    }

    /// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
    pub(super) fn inverse_mod(a: &[u32], m: &[u32], p: u32) -> Option<Vec<u32>> {
        let (mut r0, mut r1) = (trim(m.to_vec()), divmod(a, m, p).1);
        let (mut s0, mut s1) = (Vec::new(), vec![1u32]);
        while !r1.is_empty() {
            let (quot, rem) = divmod(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&quot, &s1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is the gcd; it must be a nonzero constant
        if r0.len() != 1 {
            return None;
        }
        let c = inv_mod_p(r0[0], p);
        Some(mul(&s0, &[c], p))
    }

    /// Trial division by every monic polynomial of degree `1..=deg/2`.
    pub(super) fn is_irreducible(m: &[u32], p: u32) -> bool {
        let deg = m.len() - 1;
        for d in 1..=deg / 2 {
            let count = (p as u64).pow(d as u32);
            for code in 0..count {
                let mut f = Vec::with_capacity(d + 1);
                let mut c = code;
                for _ in 0..d {
                    f.push((c % p as u64) as u32);
                    c /= p as u64;
                }
                f.push(1);
                if divmod(m, &f, p).1.is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::of_order(q).unwrap()
    }

    fn el(code: u32) -> FieldElement {
        FieldElement(code)
    }

    #[test]
    fn builtin_moduli() {
        assert_eq!(gf(16).modulus(), &[1, 0, 0, 1, 1]);
        assert_eq!(gf(25).modulus(), &[2, 1, 1]);
        assert_eq!(gf(27).modulus(), &[1, 2, 0, 1]);
        let f29 = FieldSpec::new(29, 1, None).unwrap();
        assert!(f29.modulus().is_empty());
        assert_eq!(f29.q(), 29);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(9, 1, None), Err(FieldError::NotPrime(9)));
        assert_eq!(
            FieldSpec::new(7, 2, None),
            Err(FieldError::MissingModulus { p: 7, e: 2 })
        );
        // x^2 + 1 = (x+2)(x+3) over GF(5)
        assert_eq!(
            FieldSpec::new(5, 2, Some(vec![1, 0, 1])),
            Err(FieldError::ReduciblePolynomial(vec![1, 0, 1]))
        );
        // x^4 + x^2 + 1 = (x^2+x+1)^2 over GF(2): no roots, still reducible
        assert_eq!(
            FieldSpec::new(2, 4, Some(vec![1, 0, 1, 0, 1])),
            Err(FieldError::ReduciblePolynomial(vec![1, 0, 1, 0, 1]))
        );
        assert!(matches!(
            FieldSpec::new(3, 2, Some(vec![1, 0, 2])),
            Err(FieldError::BadModulus(_))
        ));
        assert!(FieldSpec::new(7, 2, Some(vec![1, 0, 1])).is_ok());
    }

    #[test]
    fn addition_examples() {
        assert_eq!(gf(29).add(el(13), el(20)), el(4));
        assert_eq!(gf(27).add(el(3), el(9)), el(12));
        assert_eq!(gf(25).add(el(23), el(4)), el(22));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(gf(27).mul(el(3), el(9)), el(5));
        assert_eq!(gf(25).mul(el(5), el(5)), el(23));
        for q in [16, 25, 27, 29] {
            let f = gf(q);
            for a in f.elements() {
                assert_eq!(f.mul(FieldElement::ONE, a), a);
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(gf(29).inv(el(2)).unwrap(), el(15));
        assert_eq!(gf(27).inv(el(1)).unwrap(), el(1));
        let f = gf(25);
        let b = f.inv(el(5)).unwrap();
        let found: Vec<_> = f
            .elements()
            .filter(|&x| f.mul(el(5), x) == FieldElement::ONE)
            .collect();
        assert_eq!(found, vec![b]);
        assert_eq!(f.inv(FieldElement::ZERO), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn checked_ops_reject_foreign_codes() {
        let f = gf(5);
        assert_eq!(
            f.checked_add(el(5), el(1)),
            Err(FieldError::CodeOutOfRange { code: 5, q: 5 })
        );
        assert!(f.checked_mul(el(4), el(4)).is_ok());
        assert!(f.elem(7).is_err());
    }

    #[test]
    fn table_free_path_agrees_with_tables() {
        for q in [16, 25, 27, 31] {
            let f = gf(q);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add_slow(a, b));
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                }
            }
        }
    }

    #[test]
    fn large_prime_is_table_free() {
        let f = FieldSpec::prime(257).unwrap();
        assert!(f.tables.is_none());
        let a = el(200);
        assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
    }

    #[test]
    fn descriptors() {
        let f: FieldSpec = "3^3".parse().unwrap();
        assert_eq!(f, gf(27));
        assert_eq!(f.to_string(), "3^3");
        let g: FieldSpec = "29".parse().unwrap();
        assert_eq!(g.to_string(), "29");
        let h: FieldSpec = "2^2 mod=1,1,1".parse().unwrap();
        assert_eq!(h.q(), 4);
        assert_eq!(h.to_string(), "2^2 mod=1,1,1");
        assert_eq!(h.to_string().parse::<FieldSpec>().unwrap(), h);
        assert!("abc".parse::<FieldSpec>().is_err());
        assert!("12".parse::<FieldSpec>().is_err());
        assert!("4".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(31), Some((31, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
