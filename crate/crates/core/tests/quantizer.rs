use proptest::prelude::*;
use qpuf_core::galois::FieldElement;
use qpuf_core::pufsim::{self, EnvironmentConfig, NODES};
use qpuf_core::quantize::{self, gray_ber, gray_code, Quantizer, Scheme, SymbolVector};
use qpuf_core::rng::{derive_seed, rng_from_seed};
use qpuf_core::stats::chi_square_uniform;

fn equiprobable(q: usize) -> Quantizer {
    Quantizer::build(
        Scheme::Equiprobable,
        q,
        pufsim::normalized_sigma(pufsim::DEFAULT_SIGMA_PUF),
        None,
    )
    .unwrap()
}

#[test]
fn gray_neighbours_differ_in_one_bit() {
    for q in [2u32, 4, 8, 16, 32, 64, 128] {
        let mut seen = vec![false; q as usize];
        for i in 0..q {
            let g = gray_code(i);
            assert!(g < q);
            assert!(!std::mem::replace(&mut seen[g as usize], true));
            if i + 1 < q {
                assert_eq!((g ^ gray_code(i + 1)).count_ones(), 1);
            }
        }
    }
}

#[test]
fn neighbouring_interval_errors_cost_one_bit() {
    for q in [4usize, 8, 32] {
        let before = SymbolVector((0..q - 1).map(|i| FieldElement(i as u8)).collect());
        let after = SymbolVector((1..q).map(|i| FieldElement(i as u8)).collect());
        let bits = q.trailing_zeros() as f64;
        assert!((gray_ber(&before, &after, q).unwrap() - 1.0 / bits).abs() < 1e-12);
    }
}

#[test]
fn equiprobable_intervals_are_equally_occupied() {
    let env = EnvironmentConfig::default();
    for q in [4usize, 8, 32] {
        let qz = equiprobable(q);
        let mut counts = vec![0u64; q];
        for i in 0..800 {
            let d = pufsim::normalize(&pufsim::enroll_device(derive_seed(3, 0, i), &env)).unwrap();
            for s in quantize::quantize_plain(&d, &qz).0 {
                counts[s.index()] += 1;
            }
        }
        let (_, p) = chi_square_uniform(&counts);
        assert!(p > 0.01, "q={q}: p = {p}, counts {counts:?}");
    }
}

#[test]
fn boundaries_are_symmetric_and_increasing() {
    for q in [2usize, 8, 64, 256] {
        let b = equiprobable(q).boundaries().to_vec();
        assert_eq!(b.len(), q - 1);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        for (lo, hi) in b.iter().zip(b.iter().rev()) {
            assert!((lo + hi).abs() < 1e-6);
        }
    }
}

#[test]
fn distortion_falls_with_more_intervals() {
    let env = EnvironmentConfig::default();
    let devices: Vec<_> = (0..200)
        .map(|i| pufsim::normalize(&pufsim::enroll_device(derive_seed(4, 0, i), &env)).unwrap())
        .collect();
    let mean = |q| {
        let qz = equiprobable(q);
        devices
            .iter()
            .map(|d| quantize::distortion(d, &qz))
            .sum::<f64>()
            / devices.len() as f64
    };
    let d: Vec<f64> = [2, 4, 8, 16, 32, 64].into_iter().map(mean).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn helper_offsets_land_on_interval_midpoints() {
    let qz = equiprobable(16);
    let d = pufsim::normalize(&pufsim::enroll_device(8, &EnvironmentConfig::default())).unwrap();
    let (x, wp) = quantize::quantize(&d, &qz);
    assert_eq!(wp.offsets.len(), NODES);
    for ((&v, o), s) in d.values().iter().zip(&wp.offsets).zip(&x.0) {
        assert!((v as f64 + o - qz.midpoint(s.index())).abs() < 1e-9);
    }
    assert_eq!(quantize::requantize(&d, &qz, &wp).unwrap(), x);
}

#[test]
fn kmeans_needs_samples() {
    assert!(Quantizer::build(Scheme::Kmeans, 8, 2000.0, None).is_err());
    let mut rng = rng_from_seed(1);
    let samples: Vec<f64> = (0..5000)
        .map(|_| rand::Rng::random_range(&mut rng, -3000.0..3000.0))
        .collect();
    let qz = Quantizer::build(Scheme::Kmeans, 8, 2000.0, Some(&samples)).unwrap();
    assert_eq!(qz.intervals(), 8);
}

proptest! {
    #[test]
    fn value_lies_in_its_interval(v in -10_000.0f64..10_000.0, k in 1u32..=8) {
        let qz = equiprobable(1 << k);
        let i = qz.interval_of(v);
        prop_assert!(qz.lower(i) <= v && v <= qz.upper(i));
    }

    #[test]
    fn small_shift_stays_in_interval_with_helper_data(seed in any::<u64>(), k in 1u32..=5) {
        let qz = equiprobable(1 << k);
        let d = pufsim::normalize(&pufsim::enroll_device(seed, &EnvironmentConfig::default())).unwrap();
        let (x, wp) = quantize::quantize(&d, &qz);
        let min_half = (0..qz.intervals()).map(|i| qz.width(i)).fold(f64::INFINITY, f64::min) / 2.0;
        let shift = (min_half - 1.0).max(0.0) as i32;
        let moved: Vec<i32> = d.values().iter().map(|v| v + shift).collect();
        let m = pufsim::PufResponse::from_slice(&moved, true).unwrap();
        prop_assert_eq!(quantize::requantize(&m, &qz, &wp).unwrap(), x);
    }
}
