//! Independent reference implementations used as test oracles: schoolbook
//! field arithmetic, dense Kronecker encoding and exhaustive decoding.
#![allow(dead_code)]

use qpuf_core::galois::{FieldElement, GaloisField};
use qpuf_core::polarcode::PolarTransform;

/// Carry-less multiplication followed by reduction modulo `poly`.
pub fn schoolbook_mul(a: u8, b: u8, poly: u16, degree: u8) -> u8 {
    let mut acc: u16 = 0;
    for i in 0..8 {
        if b >> i & 1 == 1 {
            acc ^= (a as u16) << i;
        }
    }
    for bit in (degree as u16..16).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= poly << (bit - degree as u16);
        }
    }
    acc as u8
}

pub fn mul(f: &GaloisField, a: u8, b: u8) -> u8 {
    schoolbook_mul(a, b, f.irreducible_poly(), f.degree())
}

/// Dense generator `F2(alpha)^{⊗m}` with `F2 = [[1, 0], [alpha, 1]]`, built
/// by explicit Kronecker products.
pub fn kronecker_generator(n: usize, f: &GaloisField, alpha: u8) -> Vec<Vec<u8>> {
    let kernel = [[1u8, 0], [alpha, 1]];
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..m {
                    for j2 in 0..m {
                        next[i1 * m + i2][j1 * m + j2] = mul(f, kernel[i1][j1], g[i2][j2]);
                    }
                }
            }
        }
        g = next;
    }
    g
}

/// `u · G` over GF(2^m).
pub fn dense_encode(g: &[Vec<u8>], f: &GaloisField, u: &[u8]) -> Vec<u8> {
    let n = g.len();
    (0..n)
        .map(|j| (0..n).fold(0u8, |acc, i| acc ^ mul(f, u[i], g[i][j])))
        .collect()
}

/// All q^n source vectors in lexicographic order.
pub fn all_vectors(n: usize, q: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..q.pow(n as u32)).map(move |mut k| {
        let mut v = vec![0u8; n];
        for s in v.iter_mut() {
            *s = (k % q) as u8;
            k /= q;
        }
        v
    })
}

/// Likelihood of a source vector: product of per-position likelihoods of
/// its codeword.
pub fn likelihood(t: &PolarTransform, llvecs: &[f64], u: &[u8]) -> f64 {
    let q = t.q();
    let mut c = u.to_vec();
    t.encode_in_place(&mut c);
    c.iter()
        .enumerate()
        .map(|(j, &s)| llvecs[j * q + s as usize])
        .product()
}

/// P(u_i = a | y, u_<i = prefix) for all a, by summing over every suffix
/// under a uniform prior.
pub fn brute_force_posterior(t: &PolarTransform, llvecs: &[f64], prefix: &[u8]) -> Vec<f64> {
    let (n, q) = (t.n(), t.q());
    let i = prefix.len();
    let mut post = vec![0.0; q];
    for suffix in all_vectors(n - i, q) {
        let u: Vec<u8> = prefix
            .iter()
            .copied()
            .chain(suffix.iter().copied())
            .collect();
        post[suffix[0] as usize] += likelihood(t, llvecs, &u);
    }
    let s: f64 = post.iter().sum();
    post.iter().map(|p| p / s).collect()
}

/// Maximum-likelihood source vector consistent with `known`.
pub fn brute_force_ml(
    t: &PolarTransform,
    llvecs: &[f64],
    known: &[Option<FieldElement>],
) -> Vec<u8> {
    all_vectors(t.n(), t.q())
        .filter(|u| {
            known
                .iter()
                .zip(u)
                .all(|(k, s)| k.is_none_or(|k| k.0 == *s))
        })
        .map(|u| (likelihood(t, llvecs, &u), u))
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cand| {
            if cand.0 > best.0 {
                cand
            } else {
                best
            }
        })
        .1
}

/// n random probability vectors with entries bounded away from zero.
pub fn random_llvecs<R: rand::Rng>(rng: &mut R, n: usize, q: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n * q).map(|_| rng.random::<f64>() + 1e-3).collect();
    for chunk in v.chunks_exact_mut(q) {
        let s: f64 = chunk.iter().sum();
        chunk.iter_mut().for_each(|p| *p /= s);
    }
    v
}
