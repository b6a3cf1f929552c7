//! Check-node and variable-node updates shared by the SC and SCL decoders.
//!
//! A node of size `s` receives `s` probability vectors for the top half
//! (`x_a + alpha * x_b`) and `s` for the bottom half (`x_b`).

use super::transform::PolarTransform;

/// Normalizes `v` to sum one; an all-zero (underflowed) vector becomes
/// uniform.
#[inline]
pub(crate) fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        let inv = 1.0 / s;
        for x in v.iter_mut() {
            *x *= inv;
        }
    } else {
        let u = 1.0 / v.len() as f64;
        v.fill(u);
    }
}

/// P(x_a[j] = a) ∝ Σ_b P_top[j](a + alpha b) · P_bottom[j](b).
pub(crate) fn check_node(t: &PolarTransform, parent: &[f64], child: &mut [f64]) {
    let q = t.q();
    let half = parent.len() / 2;
    let (top, bottom) = parent.split_at(half);
    let scale = t.scale_table();
    for ((p1, p2), out) in top
        .chunks_exact(q)
        .zip(bottom.chunks_exact(q))
        .zip(child.chunks_exact_mut(q))
    {
        out.fill(0.0);
        for (b, &pb) in p2.iter().enumerate() {
            if pb == 0.0 {
                continue;
            }
            let ab = scale[b] as usize;
            for (a, o) in out.iter_mut().enumerate() {
                *o += p1[a ^ ab] * pb;
            }
        }
        normalize(out);
    }
}

/// P(x_b[j] = b) ∝ P_top[j](x_a[j] + alpha b) · P_bottom[j](b).
pub(crate) fn variable_node(t: &PolarTransform, parent: &[f64], left: &[u8], child: &mut [f64]) {
    let q = t.q();
    let half = parent.len() / 2;
    let (top, bottom) = parent.split_at(half);
    let scale = t.scale_table();
    for (((p1, p2), &xa), out) in top
        .chunks_exact(q)
        .zip(bottom.chunks_exact(q))
        .zip(left)
        .zip(child.chunks_exact_mut(q))
    {
        for (b, o) in out.iter_mut().enumerate() {
            *o = p1[(xa ^ scale[b]) as usize] * p2[b];
        }
        normalize(out);
    }
}

/// Combines child codewords: `x = (x_a + alpha x_b, x_b)`.
pub(crate) fn combine(t: &PolarTransform, left: &[u8], right: &[u8], out: &mut [u8]) {
    let half = left.len();
    for j in 0..half {
        out[j] = left[j] ^ t.scale(right[j]);
        out[half + j] = right[j];
    }
}

/// Index of the largest entry; the lowest index wins ties.
#[inline]
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
