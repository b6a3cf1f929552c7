//! Successive cancellation decoding in the probability domain.

use alloc::vec;
use alloc::vec::Vec;

use crate::galois::FieldElement;

use super::kernel::{argmax, check_node, combine, normalize, variable_node};
use super::transform::PolarTransform;
use super::PolarError;

/// What the decoder saw and did at one leaf `u_index`.
#[derive(Debug)]
pub struct LeafEvent<'a> {
    pub index: usize,
    /// P(u_i = a | y, u_<i) for every a, normalized.
    pub posterior: &'a [f64],
    /// Hard decision from the posterior alone (lowest symbol wins ties).
    pub decision: FieldElement,
    /// Symbol fed back into the decoder: the known value, the genie value
    /// or the decision.
    pub chosen: FieldElement,
}

/// Reusable SC decoder with per-depth scratch buffers.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    transform: PolarTransform,
    /// probs[d] holds (n >> d) * q probabilities
    probs: Vec<Vec<f64>>,
    /// xs[d] holds the re-encoded output of the current node at depth d
    xs: Vec<Vec<u8>>,
    /// lefts[d] keeps the left child's codeword while the right child runs
    lefts: Vec<Vec<u8>>,
    u: Vec<u8>,
}

impl ScDecoder {
    pub fn new(transform: PolarTransform) -> Self {
        let n = transform.n();
        let q = transform.q();
        let m = transform.stages() as usize;
        ScDecoder {
            probs: (0..=m).map(|d| vec![0.0; (n >> d) * q]).collect(),
            xs: (0..=m).map(|d| vec![0u8; n >> d]).collect(),
            lefts: (0..=m).map(|d| vec![0u8; (n >> d) / 2]).collect(),
            u: vec![0; n],
            transform,
        }
    }

    pub fn transform(&self) -> &PolarTransform {
        &self.transform
    }

    /// Decodes `llvecs` (n vectors of q likelihoods, flattened).
    ///
    /// `known[i]` fixes u_i (frozen or otherwise known symbols). With
    /// `genie`, every leaf is fed the true symbol after its decision is
    /// reported. `on_leaf` observes each leaf in decoding order.
    pub fn decode_with<F>(
        &mut self,
        llvecs: &[f64],
        known: &[Option<FieldElement>],
        genie: Option<&[FieldElement]>,
        mut on_leaf: F,
    ) -> Result<Vec<FieldElement>, PolarError>
    where
        F: FnMut(&LeafEvent<'_>),
    {
        let n = self.transform.n();
        let q = self.transform.q();
        check_inputs(n, q, llvecs, known)?;
        if let Some(g) = genie {
            if g.len() != n {
                return Err(PolarError::LengthMismatch {
                    expected: n,
                    got: g.len(),
                });
            }
        }
        self.probs[0].copy_from_slice(llvecs);
        for v in self.probs[0].chunks_exact_mut(q) {
            normalize(v);
        }
        self.node(0, 0, known, genie, &mut on_leaf);
        Ok(self.u.iter().map(|&s| FieldElement(s)).collect())
    }

    pub fn decode(
        &mut self,
        llvecs: &[f64],
        known: &[Option<FieldElement>],
    ) -> Result<Vec<FieldElement>, PolarError> {
        self.decode_with(llvecs, known, None, |_| {})
    }

    fn node<F>(
        &mut self,
        depth: usize,
        offset: usize,
        known: &[Option<FieldElement>],
        genie: Option<&[FieldElement]>,
        on_leaf: &mut F,
    ) where
        F: FnMut(&LeafEvent<'_>),
    {
        let size = self.transform.n() >> depth;
        if size == 1 {
            let post = &self.probs[depth];
            let decision = FieldElement(argmax(post) as u8);
            let chosen = match (known[offset], genie) {
                (Some(k), _) => k,
                (None, Some(g)) => g[offset],
                (None, None) => decision,
            };
            on_leaf(&LeafEvent {
                index: offset,
                posterior: post,
                decision,
                chosen,
            });
            self.u[offset] = chosen.0;
            self.xs[depth][0] = chosen.0;
            return;
        }
        let half = size / 2;
        {
            let (upper, lower) = self.probs.split_at_mut(depth + 1);
            check_node(&self.transform, &upper[depth], &mut lower[0]);
        }
        self.node(depth + 1, offset, known, genie, on_leaf);
        self.lefts[depth].copy_from_slice(&self.xs[depth + 1]);
        {
            let (upper, lower) = self.probs.split_at_mut(depth + 1);
            variable_node(
                &self.transform,
                &upper[depth],
                &self.lefts[depth],
                &mut lower[0],
            );
        }
        self.node(depth + 1, offset + half, known, genie, on_leaf);
        let (upper, lower) = self.xs.split_at_mut(depth + 1);
        combine(
            &self.transform,
            &self.lefts[depth],
            &lower[0],
            &mut upper[depth],
        );
    }
}

pub(crate) fn check_inputs(
    n: usize,
    q: usize,
    llvecs: &[f64],
    known: &[Option<FieldElement>],
) -> Result<(), PolarError> {
    if llvecs.len() != n * q {
        return Err(PolarError::LengthMismatch {
            expected: n * q,
            got: llvecs.len(),
        });
    }
    if known.len() != n {
        return Err(PolarError::LengthMismatch {
            expected: n,
            got: known.len(),
        });
    }
    if llvecs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(PolarError::BadLikelihood);
    }
    if let Some(k) = known.iter().flatten().find(|k| k.index() >= q) {
        return Err(PolarError::SymbolOutOfField(k.0));
    }
    Ok(())
}
