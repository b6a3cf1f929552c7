//! Arithmetic over the binary extension fields GF(2^m), m = 1..=5.
//!
//! Elements are stored as the bit-vector of their polynomial representation
//! and multiplied through log/antilog tables generated from the primitive
//! element `x`. Every supported field is a `static`, so tables are built once
//! at compile time and shared freely between threads.

use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u8 = 5;
/// Largest supported field order.
pub const MAX_ORDER: usize = 1 << MAX_DEGREE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("multiplicative inverse of zero is undefined")]
    ZeroInverse,
    #[error("unsupported field order {0} (expected 2, 4, 8, 16 or 32)")]
    UnsupportedOrder(usize),
    #[error("symbol {value} is not an element of GF({q})")]
    NotAnElement { value: u8, q: usize },
}

/// A symbol of GF(q). The field it belongs to is carried by the
/// [`GaloisField`] performing the arithmetic.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
#[repr(transparent)]
pub struct FieldElement(pub u8);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub const fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u8> for FieldElement {
    fn from(v: u8) -> Self {
        FieldElement(v)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Log/antilog tables for GF(2^m).
#[derive(Clone, PartialEq, Eq)]
pub struct GaloisField {
    degree: u8,
    order: usize,
    poly: u16,
    log: [u8; MAX_ORDER],
    // doubled so `exp[log a + log b]` never needs a reduction
    exp: [u8; 2 * MAX_ORDER],
}

/// GF(2), polynomial x + 1.
pub static GF2: GaloisField = GaloisField::build(1, 0b11);
/// GF(4), polynomial x^2 + x + 1.
pub static GF4: GaloisField = GaloisField::build(2, 0b111);
/// GF(8), polynomial x^3 + x + 1.
pub static GF8: GaloisField = GaloisField::build(3, 0b1011);
/// GF(16), polynomial x^4 + x + 1.
pub static GF16: GaloisField = GaloisField::build(4, 0b1_0011);
/// GF(32), polynomial x^5 + x^2 + 1.
pub static GF32: GaloisField = GaloisField::build(5, 0b10_0101);

impl GaloisField {
    /// Builds the tables for GF(2^degree) reduced by `poly`.
    ///
    /// Panics (at compile time for the statics) if `poly` is not primitive.
    pub const fn build(degree: u8, poly: u16) -> Self {
        assert!(degree >= 1 && degree <= MAX_DEGREE, "unsupported degree");
        assert!(poly >> degree == 1, "polynomial degree mismatch");
        let order = 1usize << degree;
        let mut log = [0u8; MAX_ORDER];
        let mut exp = [0u8; 2 * MAX_ORDER];
        // Generator: x, or 1 in GF(2) where x = 1 mod (x + 1).
        let mut acc: u16 = 1;
        let mut i = 0;
        while i < order - 1 {
            assert!(i == 0 || acc != 1, "polynomial is not primitive");
            exp[i] = acc as u8;
            log[acc as usize] = i as u8;
            acc <<= 1;
            if acc & (1 << degree) != 0 {
                acc ^= poly;
            }
            i += 1;
        }
        assert!(acc == 1, "polynomial is not primitive");
        let mut j = order - 1;
        while j < 2 * MAX_ORDER {
            exp[j] = exp[j - (order - 1)];
            j += 1;
        }
        GaloisField {
            degree,
            order,
            poly,
            log,
            exp,
        }
    }

    /// The shared field of order `q`.
    pub fn for_order(q: usize) -> Result<&'static GaloisField, FieldError> {
        match q {
            2 => Ok(&GF2),
            4 => Ok(&GF4),
            8 => Ok(&GF8),
            16 => Ok(&GF16),
            32 => Ok(&GF32),
            other => Err(FieldError::UnsupportedOrder(other)),
        }
    }

    #[inline]
    pub fn degree(&self) -> u8 {
        self.degree
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// Reduction polynomial as a bit mask (bit i = coefficient of x^i).
    #[inline]
    pub fn irreducible_poly(&self) -> u16 {
        self.poly
    }

    #[inline]
    pub fn contains(&self, a: FieldElement) -> bool {
        a.index() < self.order
    }

    pub fn element(&self, value: u8) -> Result<FieldElement, FieldError> {
        let a = FieldElement(value);
        if self.contains(a) {
            Ok(a)
        } else {
            Err(FieldError::NotAnElement {
                value,
                q: self.order,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.order as u8).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    /// Same as [`Self::add`]; characteristic two.
    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let s = self.log[a.index()] as usize + self.log[b.index()] as usize;
        FieldElement(self.exp[s])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let l = self.log[a.index()] as usize;
        Ok(FieldElement(
            self.exp[(self.order - 1 - l) % (self.order - 1)],
        ))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Discrete logarithm base `x`; `None` for zero.
    pub fn log(&self, a: FieldElement) -> Option<u8> {
        (a.0 != 0).then(|| self.log[a.index()])
    }

    /// `x^e`.
    pub fn antilog(&self, e: usize) -> FieldElement {
        FieldElement(self.exp[e % (self.order - 1)])
    }

    /// The permutation `b -> alpha * b` as a lookup table of length q.
    pub fn scale_table(&self, alpha: FieldElement) -> [u8; MAX_ORDER] {
        let mut t = [0u8; MAX_ORDER];
        for b in self.elements() {
            t[b.index()] = self.mul(alpha, b).0;
        }
        t
    }
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaloisField")
            .field("q", &self.order)
            .field("poly", &format_args!("{:#b}", self.poly))
            .finish()
    }
}
