//! Elliptic formal groups checked against the Laurent expansion of the
//! Weierstrass function, which is computed here independently of the chord
//! construction used by the library.

use efgl_core::elliptic::{division_polynomials_q, torsion_rank};
use efgl_core::fgl::{elliptic_classification_check, fgl_from_weierstrass, WeierstrassCurve};
use efgl_core::poly::rational;
use efgl_core::ring::{Ring, RingDoc, RingElement};
use efgl_core::scenario::universal_curve;
use efgl_core::series::TruncatedSeries;
use num_rational::BigRational;

fn frac(a: i64, b: i64) -> BigRational {
    rational(a) / rational(b)
}

/// Coefficients `c_k` of `P(z) = z^-2 + sum_{k>=2} c_k z^(2k-2)`.
fn laurent_coefficients(g2: &RingElement, g3: &RingElement, kmax: usize) -> Vec<RingElement> {
    let r = g2.ring();
    let mut c = vec![r.zero(); kmax + 1];
    c[2] = g2.scale(&frac(1, 20));
    if kmax >= 3 {
        c[3] = g3.scale(&frac(1, 28));
    }
    for k in 4..=kmax {
        let mut acc = r.zero();
        for m in 2..=k - 2 {
            acc = &acc + &(&c[m] * &c[k - m]);
        }
        let factor = frac(3, ((2 * k + 1) * (k - 3)) as i64);
        c[k] = acc.scale(&factor);
    }
    c
}

/// `exp_F(t) = t P(2t) / Q(2t)` where `P = z^2 wp(z)` and `-2 z^-3 Q = wp'(z)`.
fn exponential_oracle(ring: &Ring, g2: &RingElement, g3: &RingElement, cap: u32) -> TruncatedSeries {
    let kmax = (cap as usize) / 2 + 1;
    let c = laurent_coefficients(g2, g3, kmax);
    let mut p = vec![ring.zero(); cap as usize];
    let mut q = vec![ring.zero(); cap as usize];
    p[0] = ring.one();
    q[0] = ring.one();
    for (k, ck) in c.iter().enumerate().skip(2) {
        let e = 2 * k;
        if e < cap as usize {
            let two_e = rational(1 << e);
            p[e] = ck.scale(&two_e);
            q[e] = ck.scale(&(two_e * rational(1 - k as i64)));
        }
    }
    let p = TruncatedSeries::univariate(ring, "t", cap, &p);
    let q = TruncatedSeries::univariate(ring, "t", cap, &q);
    let t = TruncatedSeries::univariate(ring, "t", cap, &[ring.zero(), ring.one()]);
    &(&t * &p) * &q.inverse().unwrap()
}

#[test]
fn exponential_matches_the_weierstrass_function() {
    let curve = universal_curve().unwrap();
    let cap = 10;
    let (law, _) = fgl_from_weierstrass(&curve, cap).unwrap();
    let rq = curve.ring().rationalized().unwrap();
    let exp = law.map_to(&rq).unwrap().log().unwrap().reverse().unwrap();
    let oracle = exponential_oracle(&rq, &curve.g2.map_to(&rq).unwrap(), &curve.g3.map_to(&rq).unwrap(), cap);
    for k in 0..cap {
        assert_eq!(exp.coeff(&[k]), oracle.coeff(&[k]), "coefficient of t^{k}");
    }
}

#[test]
fn classification_agrees_with_the_oracle() {
    let curve = universal_curve().unwrap();
    let report = elliptic_classification_check(&curve, 8).unwrap();
    assert_eq!(report.status, "pass", "{report:?}");
    let rq = curve.ring().rationalized().unwrap();
    let oracle = exponential_oracle(&rq, &curve.g2.map_to(&rq).unwrap(), &curve.g3.map_to(&rq).unwrap(), 8);
    // x4 and x6 read off the t^5 and t^7 coefficients, scaled by 5 and 7.
    let x4 = oracle.coeff(&[5]).scale(&rational(5));
    let x6 = oracle.coeff(&[7]).scale(&rational(7));
    assert_eq!(x4.to_string(), report.images[3].image);
    assert_eq!(x6.to_string(), report.images[5].image);
    assert_eq!(x4, rq.parse("8*g2").unwrap());
    assert_eq!(x6, rq.parse("48*g3").unwrap());
}

#[test]
fn specialized_curve_has_the_expected_torsion() {
    let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
    let curve = WeierstrassCurve::new(q.int(4), q.int(1)).unwrap();
    let rank = torsion_rank(&curve, 5).unwrap();
    assert_eq!(rank.division_degree, 12);
    assert_eq!(rank.rank, 25);
    let psi = division_polynomials_q(&rational(4), &rational(1), 7);
    assert_eq!(psi[7].degree(), Some(24));
}

#[test]
fn singular_curves_are_rejected() {
    let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
    // g2^3 = 27 g3^2 at (3, 1).
    assert!(WeierstrassCurve::new(q.int(3), q.int(1)).is_err());
}
