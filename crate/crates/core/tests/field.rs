mod common;

use qpuf_core::galois::{FieldElement, GaloisField, GF16, GF2, GF32, GF4, GF8};

const FIELDS: [&GaloisField; 5] = [&GF2, &GF4, &GF8, &GF16, &GF32];

fn fe(v: usize) -> FieldElement {
    FieldElement(v as u8)
}

#[test]
fn multiplication_table_matches_schoolbook() {
    for f in FIELDS {
        for a in 0..f.order() {
            for b in 0..f.order() {
                assert_eq!(
                    f.mul(fe(a), fe(b)).0,
                    common::mul(f, a as u8, b as u8),
                    "GF({}) {a}*{b}",
                    f.order()
                );
            }
        }
    }
}

#[test]
fn field_axioms_exhaustive() {
    for f in FIELDS {
        let q = f.order();
        for a in 0..q {
            let x = fe(a);
            assert_eq!(f.add(x, FieldElement::ZERO), x);
            assert_eq!(f.add(x, x), FieldElement::ZERO);
            assert_eq!(f.mul(x, FieldElement::ONE), x);
            assert_eq!(f.mul(x, FieldElement::ZERO), FieldElement::ZERO);
            if a != 0 {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), FieldElement::ONE);
            } else {
                assert!(f.inv(x).is_err());
            }
            for b in 0..q {
                let y = fe(b);
                assert_eq!(f.add(x, y), f.add(y, x));
                assert_eq!(f.mul(x, y), f.mul(y, x));
                if b != 0 {
                    assert_eq!(f.mul(f.div(x, y).unwrap(), y), x);
                }
                for c in 0..q {
                    let z = fe(c);
                    assert_eq!(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
                    assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
                    assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                }
            }
        }
    }
}

#[test]
fn generator_cycles_through_all_nonzero_elements() {
    for f in FIELDS {
        let mut seen = vec![false; f.order()];
        for e in 0..f.order() - 1 {
            let a = f.antilog(e);
            assert!(!seen[a.index()], "GF({}) repeats at {e}", f.order());
            seen[a.index()] = true;
            assert_eq!(f.log(a), Some(e as u8));
        }
        assert!(!seen[0] && seen[1..].iter().all(|&s| s));
    }
}
