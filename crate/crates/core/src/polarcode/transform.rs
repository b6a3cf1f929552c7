use alloc::vec::Vec;

use crate::galois::{FieldElement, GaloisField, MAX_ORDER};

use super::PolarError;

/// The q-ary polar transform `c = u · F2(alpha)^{⊗ log2 n}` with
/// `F2(alpha) = [[1, 0], [alpha, 1]]`.
#[derive(Debug, Clone)]
pub struct PolarTransform {
    n: usize,
    stages: u32,
    field: &'static GaloisField,
    alpha: FieldElement,
    /// b -> alpha * b
    scale: [u8; MAX_ORDER],
}

impl PolarTransform {
    pub fn new(
        n: usize,
        field: &'static GaloisField,
        alpha: FieldElement,
    ) -> Result<Self, PolarError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(PolarError::LengthNotPowerOfTwo(n));
        }
        if alpha.0 == 0 {
            return Err(PolarError::ZeroAlpha);
        }
        if !field.contains(alpha) {
            return Err(PolarError::SymbolOutOfField(alpha.0));
        }
        Ok(PolarTransform {
            n,
            stages: n.trailing_zeros(),
            field,
            alpha,
            scale: field.scale_table(alpha),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn stages(&self) -> u32 {
        self.stages
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.field.order()
    }

    #[inline]
    pub fn field(&self) -> &'static GaloisField {
        self.field
    }

    #[inline]
    pub fn alpha(&self) -> FieldElement {
        self.alpha
    }

    /// `alpha * b` for a raw symbol.
    #[inline]
    pub(crate) fn scale(&self, b: u8) -> u8 {
        self.scale[b as usize]
    }

    pub(crate) fn scale_table(&self) -> &[u8; MAX_ORDER] {
        &self.scale
    }

    pub fn encode(&self, u: &[FieldElement]) -> Result<Vec<FieldElement>, PolarError> {
        if u.len() != self.n {
            return Err(PolarError::LengthMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        if let Some(bad) = u.iter().find(|s| !self.field.contains(**s)) {
            return Err(PolarError::SymbolOutOfField(bad.0));
        }
        let mut x: Vec<u8> = u.iter().map(|s| s.0).collect();
        self.encode_in_place(&mut x);
        Ok(x.into_iter().map(FieldElement).collect())
    }

    /// Butterfly network: at every stage, `x[a] += alpha * x[a + half]`.
    pub fn encode_in_place(&self, x: &mut [u8]) {
        debug_assert_eq!(x.len(), self.n);
        let mut half = 1;
        while half < x.len() {
            for block in x.chunks_exact_mut(2 * half) {
                let (top, bottom) = block.split_at_mut(half);
                for (t, b) in top.iter_mut().zip(bottom.iter()) {
                    *t ^= self.scale[*b as usize];
                }
            }
            half *= 2;
        }
    }
}
