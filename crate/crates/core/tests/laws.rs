//! Formal group laws and their coefficient rings, checked against
//! classical closed forms.

use efgl_core::equivariant::z2::{deformation_ring, localized_ring};
use efgl_core::fgl::{fgl_additive, fgl_honda, fgl_multiplicative, FormalGroupLaw};
use efgl_core::ring::{Ring, RingDoc};
use num_bigint::BigInt;

fn z() -> Ring {
    Ring::from_doc(&RingDoc::new("Z")).unwrap()
}

/// `[p](z) = z^(p^h)` modulo `p` up to the cap.
fn p_series_is_frobenius_mod_p(law: &FormalGroupLaw, p: u64, h: u32) -> bool {
    let series = law.n_series(p as i64).unwrap();
    let m = BigInt::from(p);
    (1..law.cap()).all(|k| {
        let c = series.coeff(&[k]).constant_mod(&m).expect("p-integral");
        let expected = if k as u64 == p.pow(h) { 1 } else { 0 };
        c == BigInt::from(expected)
    })
}

#[test]
fn honda_laws_have_their_height() {
    for (p, h, cap) in [(2, 1, 6), (2, 2, 9), (3, 1, 8)] {
        let law = fgl_honda(p, h, cap).unwrap();
        assert!(law.is_integral(), "p = {p}, h = {h}");
        assert!(law.axiom_check().unwrap().passes());
        assert!(p_series_is_frobenius_mod_p(&law, p, h), "p = {p}, h = {h}");
    }
    assert!(fgl_honda(2, 2, 4).is_err());
    assert!(fgl_honda(4, 1, 8).is_err());
}

#[test]
fn multiplicative_and_additive_laws() {
    let r = z();
    let mult = fgl_multiplicative(&r, 8);
    assert!(mult.axiom_check().unwrap().passes());
    assert!(p_series_is_frobenius_mod_p(&mult, 2, 1));
    assert_eq!(mult.n_series(3).unwrap().display(), "3*z + 3*z^2 + z^3");
    let add = fgl_additive(&r, 8);
    assert_eq!(add.n_series(5).unwrap().display(), "5*z");
    // The logarithm of the multiplicative law is log(1 + z).
    let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
    let log = fgl_multiplicative(&q, 7).log().unwrap();
    let expected = "z + -1/2*z^2 + 1/3*z^3 + -1/4*z^4 + 1/5*z^5 + -1/6*z^6";
    assert_eq!(log.display(), expected);
}

#[test]
fn deformation_ring_splits_after_inverting_u() {
    let a = deformation_ring().unwrap();
    assert!(a.parse("u*(u+2)*(1-u*w)").unwrap().is_zero());
    assert!(!a.parse("u*(u+2)").unwrap().is_zero());
    let b = localized_ring().unwrap();
    let parts = b.components().unwrap();
    assert_eq!(parts.len(), 2);
    // u + 2 vanishes on exactly one factor and 1 - u w on the other.
    let zeros = |e: &str| b.parse(e).unwrap().components().unwrap().iter().map(|c| c.is_zero()).collect::<Vec<_>>();
    let a_zeros = zeros("u + 2");
    let b_zeros = zeros("1 - u*w");
    assert_eq!(a_zeros.iter().filter(|z| **z).count(), 1);
    assert!(a_zeros.iter().zip(&b_zeros).all(|(x, y)| x != y));
    assert!(b.parse("u").unwrap().try_inverse().is_some());
}
