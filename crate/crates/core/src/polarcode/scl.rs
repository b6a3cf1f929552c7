//! Successive cancellation list decoding over q-ary decisions.
//!
//! Every path owns its per-depth message and codeword buffers behind `Rc`;
//! splitting a path shares them and a buffer is copied only when a path
//! writes to one that is still shared. The path metric is the log of the
//! path's a-posteriori probability, accumulated from normalized leaf
//! posteriors, so paths stay comparable without tracking normalization
//! constants.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::galois::FieldElement;

use super::kernel::{check_node, combine, normalize, variable_node};
use super::sc::check_inputs;
use super::transform::PolarTransform;
use super::PolarError;

/// Accepts or rejects a decoded source vector (e.g. a digest check).
pub type Selector<'a> = &'a dyn Fn(&[FieldElement]) -> bool;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SclConfig {
    pub list_size: usize,
    /// Drop paths whose metric trails the best one by more than this
    /// (natural-log units). `None` disables pruning.
    pub prune_delta: Option<f64>,
}

impl SclConfig {
    pub fn new(list_size: usize) -> Self {
        SclConfig {
            list_size,
            prune_delta: None,
        }
    }
}

/// One surviving path after decoding, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub u: Vec<FieldElement>,
    pub metric: f64,
}

#[derive(Clone)]
struct Path {
    probs: Vec<Rc<Vec<f64>>>,
    xs: Vec<Rc<Vec<u8>>>,
    lefts: Vec<Rc<Vec<u8>>>,
    u: Vec<u8>,
    metric: f64,
}

/// Mutable access to a buffer that is about to be overwritten completely:
/// a shared buffer is replaced rather than copied.
fn overwrite<T: Clone + Default>(buf: &mut Rc<Vec<T>>) -> &mut Vec<T> {
    if Rc::get_mut(buf).is_none() {
        *buf = Rc::new(vec![T::default(); buf.len()]);
    }
    Rc::get_mut(buf).expect("unique after replacement")
}

#[derive(Debug, Clone)]
pub struct SclDecoder {
    transform: PolarTransform,
    config: SclConfig,
}

struct Run<'a> {
    t: &'a PolarTransform,
    cfg: SclConfig,
    known: &'a [Option<FieldElement>],
    paths: Vec<Path>,
    scratch: Vec<(f64, usize, u8)>,
}

impl SclDecoder {
    pub fn new(transform: PolarTransform, config: SclConfig) -> Result<Self, PolarError> {
        if config.list_size == 0 {
            return Err(PolarError::EmptyList);
        }
        if let Some(d) = config.prune_delta {
            if !(d >= 0.0) {
                return Err(PolarError::BadPruneThreshold);
            }
        }
        Ok(SclDecoder { transform, config })
    }

    pub fn transform(&self) -> &PolarTransform {
        &self.transform
    }

    pub fn config(&self) -> SclConfig {
        self.config
    }

    /// Runs the list decoder and returns the final list, best metric first
    /// (ties keep decoding order).
    pub fn decode_list(
        &self,
        llvecs: &[f64],
        known: &[Option<FieldElement>],
    ) -> Result<Vec<Candidate>, PolarError> {
        let t = &self.transform;
        let n = t.n();
        let q = t.q();
        let m = t.stages() as usize;
        check_inputs(n, q, llvecs, known)?;

        let mut channel = llvecs.to_vec();
        for v in channel.chunks_exact_mut(q) {
            normalize(v);
        }
        let mut probs: Vec<Rc<Vec<f64>>> = Vec::with_capacity(m + 1);
        probs.push(Rc::new(channel));
        for d in 1..=m {
            probs.push(Rc::new(vec![0.0; (n >> d) * q]));
        }
        let root = Path {
            probs,
            xs: (0..=m).map(|d| Rc::new(vec![0u8; n >> d])).collect(),
            lefts: (0..=m).map(|d| Rc::new(vec![0u8; (n >> d) / 2])).collect(),
            u: Vec::with_capacity(n),
            metric: 0.0,
        };
        let mut run = Run {
            t,
            cfg: self.config,
            known,
            paths: vec![root],
            scratch: Vec::new(),
        };
        run.node(0, 0)?;

        let mut out: Vec<Candidate> = run
            .paths
            .into_iter()
            .map(|p| Candidate {
                u: p.u.into_iter().map(FieldElement).collect(),
                metric: p.metric,
            })
            .collect();
        out.sort_by(|a, b| b.metric.total_cmp(&a.metric));
        Ok(out)
    }

    /// Decodes and picks the first candidate (in metric order) accepted by
    /// `select`, or the best one when nothing is accepted or no selector is
    /// given. The flag reports whether the selector accepted the result.
    pub fn decode_select(
        &self,
        llvecs: &[f64],
        known: &[Option<FieldElement>],
        select: Option<Selector<'_>>,
    ) -> Result<(Vec<FieldElement>, Option<bool>), PolarError> {
        let mut list = self.decode_list(llvecs, known)?;
        match select {
            Some(f) => match list.iter().position(|c| f(&c.u)) {
                Some(i) => Ok((list.swap_remove(i).u, Some(true))),
                None => Ok((list.swap_remove(0).u, Some(false))),
            },
            None => Ok((list.swap_remove(0).u, None)),
        }
    }

    pub fn decode(
        &self,
        llvecs: &[f64],
        known: &[Option<FieldElement>],
    ) -> Result<Vec<FieldElement>, PolarError> {
        Ok(self.decode_select(llvecs, known, None)?.0)
    }
}

impl Run<'_> {
    fn node(&mut self, depth: usize, offset: usize) -> Result<(), PolarError> {
        let size = self.t.n() >> depth;
        if size == 1 {
            return self.leaf(depth, offset);
        }
        let half = size / 2;
        for p in &mut self.paths {
            let parent = Rc::clone(&p.probs[depth]);
            check_node(self.t, &parent, overwrite(&mut p.probs[depth + 1]));
        }
        self.node(depth + 1, offset)?;
        for p in &mut self.paths {
            let left = Rc::clone(&p.xs[depth + 1]);
            overwrite(&mut p.lefts[depth]).copy_from_slice(&left);
            let parent = Rc::clone(&p.probs[depth]);
            let lefts = Rc::clone(&p.lefts[depth]);
            variable_node(self.t, &parent, &lefts, overwrite(&mut p.probs[depth + 1]));
        }
        self.node(depth + 1, offset + half)?;
        for p in &mut self.paths {
            let right = Rc::clone(&p.xs[depth + 1]);
            let left = Rc::clone(&p.lefts[depth]);
            combine(self.t, &left, &right, overwrite(&mut p.xs[depth]));
        }
        Ok(())
    }

    fn leaf(&mut self, depth: usize, index: usize) -> Result<(), PolarError> {
        let q = self.t.q();
        if let Some(v) = self.known[index] {
            for p in &mut self.paths {
                let post = p.probs[depth][v.index()];
                p.metric += libm::log(post);
                p.u.push(v.0);
                overwrite(&mut p.xs[depth])[0] = v.0;
            }
            return Ok(());
        }

        self.scratch.clear();
        for (pi, p) in self.paths.iter().enumerate() {
            let post = &p.probs[depth];
            for s in 0..q {
                self.scratch
                    .push((p.metric + libm::log(post[s]), pi, s as u8));
            }
        }
        // best metric first; earlier path then lower symbol on ties
        self.scratch.sort_by(|a, b| match b.0.total_cmp(&a.0) {
            Ordering::Equal => (a.1, a.2).cmp(&(b.1, b.2)),
            o => o,
        });
        self.scratch.truncate(self.cfg.list_size);
        if let Some(delta) = self.cfg.prune_delta {
            let best = self.scratch[0].0;
            self.scratch.retain(|c| !(c.0 < best - delta));
        }
        if self.scratch.is_empty() {
            return Err(PolarError::DecodeFailure);
        }

        let old = core::mem::take(&mut self.paths);
        let mut next = Vec::with_capacity(self.scratch.len());
        for &(metric, pi, s) in &self.scratch {
            let mut child = old[pi].clone();
            child.metric = metric;
            child.u.push(s);
            overwrite(&mut child.xs[depth])[0] = s;
            next.push(child);
        }
        self.paths = next;
        Ok(())
    }
}
