mod common;

use qpuf_core::galois::{FieldElement, GaloisField, GF16, GF2, GF32, GF4, GF8};
use qpuf_core::polarcode::{PolarTransform, ScDecoder, SclConfig, SclDecoder};
use qpuf_core::rng::rng_from_seed;
use rand::Rng;

const FIELDS: [&GaloisField; 5] = [&GF2, &GF4, &GF8, &GF16, &GF32];

fn symbols(v: &[u8]) -> Vec<FieldElement> {
    v.iter().map(|&s| FieldElement(s)).collect()
}

fn one_hot(c: &[FieldElement], q: usize) -> Vec<f64> {
    let mut v = vec![0.0; c.len() * q];
    for (i, s) in c.iter().enumerate() {
        v[i * q + s.index()] = 1.0;
    }
    v
}

#[test]
fn butterfly_equals_dense_kronecker_product() {
    let mut rng = rng_from_seed(1);
    for f in FIELDS {
        let q = f.order();
        for &n in &[2usize, 4, 8, 16] {
            for alpha in 1..q as u8 {
                let t = PolarTransform::new(n, f, FieldElement(alpha)).unwrap();
                let g = common::kronecker_generator(n, f, alpha);
                for _ in 0..50 {
                    let u: Vec<u8> = (0..n).map(|_| rng.random_range(0..q) as u8).collect();
                    let c = t.encode(&symbols(&u)).unwrap();
                    assert_eq!(c, symbols(&common::dense_encode(&g, f, &u)));
                }
            }
        }
    }
}

#[test]
fn noiseless_decoding_inverts_encoding_exhaustively() {
    let t = PolarTransform::new(4, &GF8, FieldElement(2)).unwrap();
    let mut dec = ScDecoder::new(t.clone());
    for u in common::all_vectors(4, 8) {
        let u = symbols(&u);
        let c = t.encode(&u).unwrap();
        assert_eq!(dec.decode(&one_hot(&c, 8), &[None; 4]).unwrap(), u);
    }
}

#[test]
fn noiseless_decoding_inverts_encoding_at_full_length() {
    let mut rng = rng_from_seed(2);
    for f in [&GF8, &GF32] {
        let t = PolarTransform::new(128, f, FieldElement(2)).unwrap();
        let mut dec = ScDecoder::new(t.clone());
        for _ in 0..20 {
            let u: Vec<FieldElement> = (0..128)
                .map(|_| FieldElement(rng.random_range(0..f.order()) as u8))
                .collect();
            let c = t.encode(&u).unwrap();
            assert_eq!(
                dec.decode(&one_hot(&c, f.order()), &[None; 128]).unwrap(),
                u
            );
        }
    }
}

fn check_sc_posteriors(field: &'static GaloisField, alpha: u8, trials: usize, seed: u64) {
    let q = field.order();
    let t = PolarTransform::new(4, field, FieldElement(alpha)).unwrap();
    let mut dec = ScDecoder::new(t.clone());
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let ll = common::random_llvecs(&mut rng, 4, q);
        let mut events = Vec::new();
        let u = dec
            .decode_with(&ll, &[None; 4], None, |e| events.push(e.posterior.to_vec()))
            .unwrap();
        let prefix: Vec<u8> = u.iter().map(|s| s.0).collect();
        for (i, post) in events.iter().enumerate() {
            let oracle = common::brute_force_posterior(&t, &ll, &prefix[..i]);
            for (a, b) in post.iter().zip(&oracle) {
                assert!((a.ln() - b.ln()).abs() < 1e-9, "index {i}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn sc_posteriors_match_exact_marginals() {
    check_sc_posteriors(&GF4, 2, 300, 3);
    check_sc_posteriors(&GF4, 3, 100, 4);
    check_sc_posteriors(&GF8, 2, 30, 5);
}

#[test]
fn full_list_decoding_is_maximum_likelihood() {
    let t = PolarTransform::new(4, &GF4, FieldElement(2)).unwrap();
    let dec = SclDecoder::new(t.clone(), SclConfig::new(64)).unwrap();
    let mut rng = rng_from_seed(6);
    for _ in 0..300 {
        let ll = common::random_llvecs(&mut rng, 4, 4);
        let known = [None; 4];
        let ml = common::brute_force_ml(&t, &ll, &known);
        assert_eq!(dec.decode(&ll, &known).unwrap(), symbols(&ml));
    }
}

#[test]
fn full_list_with_frozen_index_is_constrained_ml() {
    let t = PolarTransform::new(4, &GF4, FieldElement(2)).unwrap();
    let dec = SclDecoder::new(t.clone(), SclConfig::new(16)).unwrap();
    let mut rng = rng_from_seed(7);
    for _ in 0..200 {
        let ll = common::random_llvecs(&mut rng, 4, 4);
        let known = [Some(FieldElement(rng.random_range(0..4))), None, None, None];
        let ml = common::brute_force_ml(&t, &ll, &known);
        assert_eq!(dec.decode(&ll, &known).unwrap(), symbols(&ml));
    }
}

#[test]
fn list_never_loses_the_true_path_when_it_holds_every_path() {
    let t = PolarTransform::new(4, &GF4, FieldElement(3)).unwrap();
    let dec = SclDecoder::new(t.clone(), SclConfig::new(256)).unwrap();
    let mut rng = rng_from_seed(8);
    for _ in 0..50 {
        let u: Vec<u8> = (0..4).map(|_| rng.random_range(0..4)).collect();
        let ll = common::random_llvecs(&mut rng, 4, 4);
        let list = dec.decode_list(&ll, &[None; 4]).unwrap();
        assert_eq!(list.len(), 256);
        assert!(list.iter().any(|c| c.u == symbols(&u)));
        assert!(list.windows(2).all(|w| w[0].metric >= w[1].metric));
    }
}
