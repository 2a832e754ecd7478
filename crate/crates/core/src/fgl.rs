//! One-dimensional formal group laws truncated in total degree.
//!
//! `F(z1, z2)` is stored as a bivariate series with an exclusive total-degree
//! cap `N`; every law built here satisfies the unit, commutativity and
//! associativity identities exactly below `N`.

use crate::poly::rational;
use crate::ring::{Ring, RingDoc, RingElement, RingError};
use crate::series::{Precision, SeriesError, TruncatedSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FglError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("the coefficient ring does not contain Q")]
    NotQAlgebra,
    #[error("not a strict isomorphism: {0}")]
    NotStrict(String),
    #[error("6 is not invertible in the coefficient ring")]
    SixNotInvertible,
    #[error("the discriminant {0} is not invertible")]
    DiscriminantNotInvertible(String),
    #[error("cap {got} is too small (need at least {needed})")]
    CapTooSmall { needed: u32, got: u32 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("height must be at least 1")]
    ZeroHeight,
    #[error("a formal group law is a series in exactly two variables")]
    NotBivariate,
}

type Result<T> = std::result::Result<T, FglError>;

const UNI: [&str; 1] = ["z"];
const BI: [&str; 2] = ["z1", "z2"];
const TRI: [&str; 3] = ["z1", "z2", "z3"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalGroupLaw {
    series: TruncatedSeries,
    cap: u32,
    /// The law is a polynomial of total degree below the cap, so the stored
    /// series is exact and may be evaluated at non-nilpotent arguments.
    polynomial: bool,
}

/// Residuals of the defining identities; all zero for a valid law.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub left_unit: TruncatedSeries,
    pub right_unit: TruncatedSeries,
    pub commutativity: TruncatedSeries,
    pub associativity: TruncatedSeries,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.left_unit.is_zero() && self.right_unit.is_zero() && self.commutativity.is_zero() && self.associativity.is_zero()
    }
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FormalGroupLaw {
    /// Wrap a bivariate series in `z1, z2` with total-degree cap.
    pub fn from_series(series: TruncatedSeries) -> Result<Self> {
        if series.vars().len() != 2 {
            return Err(FglError::NotBivariate);
        }
        let cap = series.precision().order_bound().ok_or(FglError::CapTooSmall { needed: 2, got: 0 })?;
        let series = series.truncate(&Precision::total(2, cap));
        Ok(FormalGroupLaw { series, cap, polynomial: false })
    }

    pub fn ring(&self) -> &Ring {
        self.series.ring()
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn series(&self) -> &TruncatedSeries {
        &self.series
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    /// `F(a, b)` for ring elements; only for polynomial laws.
    pub fn evaluate(&self, a: &RingElement, b: &RingElement) -> Option<RingElement> {
        if !self.polynomial {
            return None;
        }
        let mut acc = self.ring().zero();
        for (e, c) in self.series.terms() {
            acc = &acc + &(&(c * &a.pow(e[0])) * &b.pow(e[1]));
        }
        Some(acc)
    }

    /// `[n](a)` for a ring element and `n >= 0`; only for polynomial laws.
    pub fn multiple_of(&self, n: u64, a: &RingElement) -> Option<RingElement> {
        let mut acc = self.ring().zero();
        for _ in 0..n {
            acc = self.evaluate(a, &acc)?;
        }
        Some(acc)
    }

    /// Coefficient of `z1^i z2^j`.
    pub fn coefficient(&self, i: u32, j: u32) -> RingElement {
        self.series.coeff(&[i, j])
    }

    pub fn uni_precision(&self) -> Precision {
        Precision::total(1, self.cap)
    }

    pub fn variable(&self) -> TruncatedSeries {
        TruncatedSeries::variable(self.ring(), &UNI, self.uni_precision(), 0)
    }

    /// `F(a, b)` for series `a, b` with zero constant term in common variables.
    pub fn apply(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        Ok(self.series.compose(&[a.clone(), b.clone()])?)
    }

    /// Formal inverse `i(z)` with `F(z, i(z)) = 0`.
    pub fn formal_inverse(&self) -> Result<TruncatedSeries> {
        let z = self.variable();
        let mut y = -&z;
        for _ in 0..self.cap + 1 {
            let f = self.apply(&z, &y)?;
            let next = &(&(-&z) - &f) + &(&z + &y);
            if next == y {
                break;
            }
            y = next;
        }
        Ok(y)
    }

    /// `[n](z)`; `[0] = 0`, `[-n] = i([n])`.
    pub fn n_series(&self, n: i64) -> Result<TruncatedSeries> {
        let z = self.variable();
        let mut acc = TruncatedSeries::zero(self.ring(), &UNI, self.uni_precision());
        for _ in 0..n.unsigned_abs() {
            acc = self.apply(&z, &acc)?;
        }
        if n < 0 {
            acc = self.formal_inverse()?.compose(&[acc])?;
        }
        Ok(acc)
    }

    /// Unit, commutativity and associativity residuals.
    pub fn axiom_check(&self) -> Result<AxiomReport> {
        let r = self.ring();
        let p1 = self.uni_precision();
        let z = self.variable();
        let zero = TruncatedSeries::zero(r, &UNI, p1);
        let left_unit = &self.apply(&zero, &z)? - &z;
        let right_unit = &self.apply(&z, &zero)? - &z;
        let p2 = Precision::total(2, self.cap);
        let z1 = TruncatedSeries::variable(r, &BI, p2.clone(), 0);
        let z2 = TruncatedSeries::variable(r, &BI, p2, 1);
        let commutativity = &self.series - &self.apply(&z2, &z1)?;
        let p3 = Precision::total(3, self.cap);
        let t: Vec<TruncatedSeries> = (0..3).map(|i| TruncatedSeries::variable(r, &TRI, p3.clone(), i)).collect();
        let f12 = self.apply(&t[0], &t[1])?;
        let f23 = self.apply(&t[1], &t[2])?;
        let associativity = &self.apply(&f12, &t[2])? - &self.apply(&t[0], &f23)?;
        Ok(AxiomReport { left_unit, right_unit, commutativity, associativity })
    }

    /// `theta(F(theta^-1 z1, theta^-1 z2))` for a strict `theta = z + ...`.
    pub fn strict_iso_apply(&self, theta: &TruncatedSeries) -> Result<FormalGroupLaw> {
        if theta.vars().len() != 1 {
            return Err(FglError::NotStrict("theta must be univariate".into()));
        }
        if !theta.constant_term().is_zero() || !theta.coeff(&[1]).is_one() {
            return Err(FglError::NotStrict(theta.display()));
        }
        let theta = theta.truncate(&self.uni_precision());
        let inv = theta.reverse()?;
        let p2 = Precision::total(2, self.cap);
        let r = self.ring();
        let z1 = TruncatedSeries::variable(r, &BI, p2.clone(), 0);
        let z2 = TruncatedSeries::variable(r, &BI, p2, 1);
        let a = inv.compose(&[z1])?;
        let b = inv.compose(&[z2])?;
        let inner = self.apply(&a, &b)?;
        FormalGroupLaw::from_series(theta.compose(&[inner])?)
    }

    /// Logarithm over a Q-algebra: `log' = 1 / d2F(z, 0)`.
    pub fn log(&self) -> Result<TruncatedSeries> {
        if !self.ring().is_q_algebra() {
            return Err(FglError::NotQAlgebra);
        }
        let r = self.ring();
        let derivative = TruncatedSeries::from_terms(
            r,
            &UNI,
            Precision::total(1, self.cap - 1),
            (0..self.cap).map(|i| (vec![i], self.coefficient(i, 1))),
        );
        let log = derivative.inverse()?.integrate(0)?;
        Ok(log.truncate(&self.uni_precision()))
    }

    pub fn exp(&self) -> Result<TruncatedSeries> {
        Ok(self.log()?.reverse()?)
    }

    /// `exp(log z1 + log z2)` for a strict univariate `log` over a Q-algebra.
    pub fn from_log(log: &TruncatedSeries) -> Result<FormalGroupLaw> {
        let cap = log.precision().order_bound().ok_or(FglError::CapTooSmall { needed: 2, got: 0 })?;
        let r = log.ring();
        let exp = log.reverse()?;
        let p2 = Precision::total(2, cap);
        let z1 = TruncatedSeries::variable(r, &BI, p2.clone(), 0);
        let z2 = TruncatedSeries::variable(r, &BI, p2, 1);
        let sum = &log.compose(&[z1])? + &log.compose(&[z2])?;
        FormalGroupLaw::from_series(exp.compose(&[sum])?)
    }

    /// Map every coefficient into another ring (e.g. a reduction mod p).
    pub fn map_to(&self, target: &Ring) -> Result<FormalGroupLaw> {
        let mut f = FormalGroupLaw::from_series(self.series.map_to(target)?)?;
        f.polynomial = self.polynomial;
        Ok(f)
    }

    pub fn is_integral(&self) -> bool {
        self.series.terms().all(|(_, c)| c.is_integral())
    }

    pub fn to_json(&self) -> FglJson {
        let mut terms: Vec<(&Vec<u32>, &RingElement)> = self.series.terms().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then_with(|| b.0.cmp(a.0))
        });
        FglJson {
            ring: self.ring().doc().clone(),
            cap: self.cap,
            terms: terms.into_iter().map(|(e, c)| FglTerm { e: [e[0], e[1]], c: c.to_string() }).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FglJson {
    pub ring: RingDoc,
    pub cap: u32,
    pub terms: Vec<FglTerm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FglTerm {
    pub e: [u32; 2],
    pub c: String,
}

fn bivariate(ring: &Ring, cap: u32, terms: &[((u32, u32), i64)]) -> TruncatedSeries {
    TruncatedSeries::from_terms(ring, &BI, Precision::total(2, cap), terms.iter().map(|((i, j), c)| (vec![*i, *j], ring.int(*c))))
}

/// `z1 + z2 + z1 z2`; `cap` must be at least 3.
pub fn fgl_multiplicative(ring: &Ring, cap: u32) -> FormalGroupLaw {
    assert!(cap >= 3, "the multiplicative law needs cap >= 3");
    FormalGroupLaw { series: bivariate(ring, cap, &[((1, 0), 1), ((0, 1), 1), ((1, 1), 1)]), cap, polynomial: true }
}

/// `z1 + z2`; `cap` must be at least 2.
pub fn fgl_additive(ring: &Ring, cap: u32) -> FormalGroupLaw {
    assert!(cap >= 2, "the additive law needs cap >= 2");
    FormalGroupLaw { series: bivariate(ring, cap, &[((1, 0), 1), ((0, 1), 1)]), cap, polynomial: true }
}

/// Logarithm `sum_i z^(p^(h i)) / p^i` over Q, truncated below `cap`.
pub fn honda_log(p: u64, h: u32, cap: u32) -> Result<TruncatedSeries> {
    if !is_prime(p) {
        return Err(FglError::NotPrime(p));
    }
    if h == 0 {
        return Err(FglError::ZeroHeight);
    }
    let q = Ring::from_doc(&RingDoc::new("Q"))?;
    let step = p.pow(h);
    let mut terms = Vec::new();
    let (mut deg, mut denom) = (1u64, BigInt::one());
    while deg < cap as u64 {
        terms.push((vec![deg as u32], q.constant(BigRational::new(BigInt::one(), denom.clone()))?));
        deg *= step;
        denom *= p;
    }
    Ok(TruncatedSeries::from_terms(&q, &UNI, Precision::total(1, cap), terms))
}

/// Honda law of height `h` at `p` over Q (integral; see `is_integral`).
pub fn fgl_honda(p: u64, h: u32, cap: u32) -> Result<FormalGroupLaw> {
    if !is_prime(p) {
        return Err(FglError::NotPrime(p));
    }
    if h == 0 {
        return Err(FglError::ZeroHeight);
    }
    let needed = p.pow(h) as u32 + 1;
    if cap < needed {
        return Err(FglError::CapTooSmall { needed, got: cap });
    }
    FormalGroupLaw::from_log(&honda_log(p, h, cap)?)
}

/// A Weierstrass curve `Y^2 Z = 4X^3 - g2 X Z^2 - g3 Z^3` over a ring where 6
/// and the discriminant are invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassCurve {
    pub g2: RingElement,
    pub g3: RingElement,
}

impl WeierstrassCurve {
    pub fn new(g2: RingElement, g3: RingElement) -> Result<Self> {
        if g2.ring() != g3.ring() {
            return Err(RingError::RingMismatch.into());
        }
        let r = g2.ring();
        if r.int(6).try_inverse().is_none() {
            return Err(FglError::SixNotInvertible);
        }
        let curve = WeierstrassCurve { g2, g3 };
        let d = curve.discriminant();
        if !(d.is_unit() || d.is_declared_unit()) {
            return Err(FglError::DiscriminantNotInvertible(d.to_string()));
        }
        Ok(curve)
    }

    pub fn ring(&self) -> &Ring {
        self.g2.ring()
    }

    /// `g2^3 - 27 g3^2`.
    pub fn discriminant(&self) -> RingElement {
        &self.g2.pow(3) - &self.g3.pow(2).scale(&rational(27))
    }

    /// The series `u(x)` solving `u = 4x^3 - g2 x u^2 - g3 u^3` below `cap`.
    pub fn u_series(&self, cap: u32) -> TruncatedSeries {
        let r = self.ring();
        let prec = Precision::total(1, cap);
        let x = TruncatedSeries::variable(r, &["x"], prec, 0);
        let x3 = x.pow(3).scale_int(4);
        let mut u = TruncatedSeries::zero(r, &["x"], x.precision().clone());
        loop {
            let next = &(&x3 - &(&x * &(&u * &u)).scale(&self.g2)) - &u.pow(3).scale(&self.g3);
            if next == u {
                return u;
            }
            u = next;
        }
    }

    /// Residual of the chart equation after substituting `u(x)`.
    pub fn u_series_residual(&self, u: &TruncatedSeries) -> TruncatedSeries {
        let x = TruncatedSeries::variable(self.ring(), &["x"], u.precision().clone(), 0);
        let rhs = &(&x.pow(3).scale_int(4) - &(&x * &(u * u)).scale(&self.g2)) - &u.pow(3).scale(&self.g3);
        u - &rhs
    }

    /// Sum of two points of the formal group given by their `x` series
    /// (same variables), via the chord through them in the `(x, u)` chart.
    pub fn chord_sum(&self, u: &[RingElement], a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        let r = self.ring();
        let vars: Vec<&str> = a.vars().iter().map(String::as_str).collect();
        let prec = a.precision().meet(b.precision());
        let one = TruncatedSeries::one(r, &vars, prec.clone());
        let zero = TruncatedSeries::zero(r, &vars, prec.clone());
        // h_k = sum_{i+j=k} a^i b^j, so that u(a) - u(b) = (a - b) sum_n A_n h_{n-1}.
        let mut m = zero.clone();
        let mut h = one.clone();
        let mut b_pow = one.clone();
        let mut u_a = zero.clone();
        let mut a_pow = one;
        for (n, coeff) in u.iter().enumerate().skip(1) {
            if n > 1 {
                b_pow = &b_pow * b;
                h = &(&h * a) + &b_pow;
            }
            a_pow = &a_pow * a;
            if !coeff.is_zero() {
                m = &m + &h.scale(coeff);
                u_a = &u_a + &a_pow.scale(coeff);
            }
        }
        let intercept = &u_a - &(&m * a);
        let m2 = &m * &m;
        let denom = &(&TruncatedSeries::constant(r, &vars, prec, r.int(4)) - &m2.scale(&self.g2)) - &(&m2 * &m).scale(&self.g3);
        let numer = &(&m * &intercept).scale(&self.g2.scale(&rational(2))) + &(&m2 * &intercept).scale(&self.g3.scale(&rational(3)));
        Ok(&(a + b) - &(&numer * &denom.inverse()?))
    }

    /// `[n](x)` computed by repeated chord sums on univariate series.
    pub fn formal_multiple(&self, n: u32, cap: u32) -> Result<TruncatedSeries> {
        let u = self.u_series(cap + 2);
        let coeffs: Vec<RingElement> = (0..cap + 2).map(|k| u.coeff(&[k])).collect();
        let x = TruncatedSeries::variable(self.ring(), &["x"], Precision::total(1, cap), 0);
        let mut acc = TruncatedSeries::zero(self.ring(), &["x"], Precision::total(1, cap));
        for _ in 0..n {
            acc = self.chord_sum(&coeffs, &x, &acc)?;
        }
        Ok(acc)
    }
}

/// The formal group law of a Weierstrass curve in the coordinate `x = X/Y`,
/// together with the chart series `u(x)`.
pub fn fgl_from_weierstrass(curve: &WeierstrassCurve, cap: u32) -> Result<(FormalGroupLaw, TruncatedSeries)> {
    let u = curve.u_series(cap + 2);
    let coeffs: Vec<RingElement> = (0..cap + 2).map(|k| u.coeff(&[k])).collect();
    let r = curve.ring();
    let p2 = Precision::total(2, cap);
    let z1 = TruncatedSeries::variable(r, &BI, p2.clone(), 0);
    let z2 = TruncatedSeries::variable(r, &BI, p2, 1);
    let f = curve.chord_sum(&coeffs, &z1, &z2)?;
    Ok((FormalGroupLaw::from_series(f)?, u))
}

/// Table of `[n]`-series for a range of `n`.
#[derive(Clone, Debug)]
pub struct NSeriesTable {
    pub series: BTreeMap<i64, TruncatedSeries>,
}

impl NSeriesTable {
    pub fn new(f: &FormalGroupLaw, range: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut series = BTreeMap::new();
        for n in range {
            series.insert(n, f.n_series(n)?);
        }
        Ok(NSeriesTable { series })
    }

    /// Coefficients `c_j` of `[2](z) = sum c_j z^j`.
    pub fn two_series_coefficients(f: &FormalGroupLaw) -> Result<Vec<RingElement>> {
        let two = f.n_series(2)?;
        Ok((0..f.cap()).map(|j| two.coeff(&[j])).collect())
    }
}

/// One generator slot of the classification comparison.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct GeneratorImage {
    pub generator: String,
    pub weight: u32,
    pub scale: u64,
    pub image: String,
    pub expected: String,
    pub matches: bool,
    pub well_defined: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClassificationReport {
    pub convention: String,
    pub log_coefficients: Vec<String>,
    pub exp_coefficients: Vec<String>,
    pub images: Vec<GeneratorImage>,
    pub status: String,
}

/// `p` if `n = p^k` for a prime `p` and `k >= 1`, else 1.
pub fn hurewicz_scale(n: u64) -> u64 {
    (2..=n)
        .find(|d| n.is_multiple_of(*d))
        .filter(|&p| {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            m == 1
        })
        .unwrap_or(1)
}

pub const CLASSIFICATION_CONVENTION: &str =
    "x_i = lambda_i * [z^(i+1)] exp_F modulo decomposables, lambda_i = p if i+1 is a power of the prime p, else 1";

/// Images of `x_1..x_6` for a law over a ring whose rationalization is used
/// for the logarithm. `expected[i-1]` is compared after the bridge.
pub fn classification_images(f: &FormalGroupLaw, expected: &[RingElement]) -> Result<ClassificationReport> {
    if f.cap() < 8 {
        return Err(FglError::CapTooSmall { needed: 8, got: f.cap() });
    }
    let rq = f.ring().rationalized()?;
    let fq = f.map_to(&rq)?;
    let log = fq.log()?;
    let exp = log.reverse()?;
    let mut images: Vec<RingElement> = Vec::new();
    let mut out = Vec::new();
    for i in 1..=6u32 {
        let scale = hurewicz_scale(i as u64 + 1);
        let img = exp.coeff(&[i + 1]).scale(&rational(scale as i64));
        let well_defined = decomposables_vanish(&images, i as usize);
        let exp_elem = expected.get(i as usize - 1).map(|e| e.map_to(&rq)).transpose()?.unwrap_or_else(|| rq.zero());
        let weight_ok = img.is_zero() || img.homogeneous_weight() == Some(i as i32);
        out.push(GeneratorImage {
            generator: format!("x{i}"),
            weight: i,
            scale,
            image: img.to_string(),
            expected: exp_elem.to_string(),
            matches: img == exp_elem && weight_ok,
            well_defined,
        });
        images.push(img);
    }
    let status = if out.iter().any(|g| !g.well_defined) {
        "undecided"
    } else if out.iter().all(|g| g.matches) {
        "pass"
    } else {
        "fail"
    };
    Ok(ClassificationReport {
        convention: CLASSIFICATION_CONVENTION.into(),
        log_coefficients: (2..f.cap()).map(|k| log.coeff(&[k]).to_string()).collect(),
        exp_coefficients: (2..f.cap()).map(|k| exp.coeff(&[k]).to_string()).collect(),
        images: out,
        status: status.into(),
    })
}

/// Every product of at least two lower images with index sum `i` vanishes.
fn decomposables_vanish(lower: &[RingElement], i: usize) -> bool {
    fn walk(lower: &[RingElement], remaining: usize, max_part: usize, parts: usize, acc: &RingElement) -> bool {
        if remaining == 0 {
            return parts < 2 || acc.is_zero();
        }
        (1..=max_part.min(remaining)).all(|k| {
            if k > lower.len() {
                return true;
            }
            walk(lower, remaining - k, k, parts + 1, &(acc * &lower[k - 1]))
        })
    }
    match lower.first() {
        Some(first) => walk(lower, i, i - 1, 0, &first.ring().one()),
        None => true,
    }
}

/// Classification check for a Weierstrass curve: `x4 -> 8 g2`, `x6 -> 48 g3`,
/// all other slots zero.
pub fn elliptic_classification_check(curve: &WeierstrassCurve, cap: u32) -> Result<ClassificationReport> {
    if cap < 8 {
        return Err(FglError::CapTooSmall { needed: 8, got: cap });
    }
    let (f, _) = fgl_from_weierstrass(curve, cap)?;
    let r = curve.ring();
    let expected = vec![r.zero(), r.zero(), r.zero(), curve.g2.scale(&rational(8)), r.zero(), curve.g3.scale(&rational(48))];
    classification_images(&f, &expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> Ring {
        Ring::from_doc(&RingDoc::new("Z")).unwrap()
    }

    fn q() -> Ring {
        Ring::from_doc(&RingDoc::new("Q")).unwrap()
    }

    #[test]
    fn multiplicative_two_series() {
        let f = fgl_multiplicative(&z(), 8);
        assert_eq!(f.n_series(2).unwrap().display(), "2*z + z^2");
        let r = z();
        assert_eq!(f.multiple_of(3, &r.int(2)), Some(r.int(26)));
        assert_eq!(f.n_series(-1).unwrap().display(), "-z + z^2 + -z^3 + z^4 + -z^5 + z^6 + -z^7");
        assert!(f.axiom_check().unwrap().passes());
    }

    #[test]
    fn additive_basics() {
        let f = fgl_additive(&q(), 6);
        assert_eq!(f.n_series(5).unwrap().display(), "5*z");
        assert_eq!(f.log().unwrap().display(), "z");
        assert_eq!(f.n_series(0).unwrap().len(), 0);
    }

    #[test]
    fn strict_iso_sign() {
        let f = fgl_additive(&z(), 3);
        let r = z();
        let theta = TruncatedSeries::univariate(&r, "z", 3, &[r.int(0), r.int(1), r.int(1)]);
        let g = f.strict_iso_apply(&theta).unwrap();
        assert_eq!(g.coefficient(1, 1), r.int(2));
        let bad = TruncatedSeries::univariate(&r, "z", 3, &[r.int(0), r.int(2)]);
        assert!(matches!(f.strict_iso_apply(&bad), Err(FglError::NotStrict(_))));
    }

    #[test]
    fn log_needs_rationals() {
        assert!(matches!(fgl_multiplicative(&z(), 5).log(), Err(FglError::NotQAlgebra)));
    }

    #[test]
    fn honda_errors() {
        assert!(matches!(fgl_honda(4, 1, 8), Err(FglError::NotPrime(4))));
        assert!(matches!(fgl_honda(2, 2, 4), Err(FglError::CapTooSmall { .. })));
    }

    #[test]
    fn hurewicz_scales() {
        let s: Vec<u64> = (2..=7).map(hurewicz_scale).collect();
        assert_eq!(s, vec![2, 3, 2, 5, 1, 7]);
    }

    fn universal_curve() -> WeierstrassCurve {
        let r =
            Ring::from_doc(&RingDoc::new("Z").weighted_var("g2", 4).weighted_var("g3", 6).invert("6").invert("g2^3 - 27*g3^2")).unwrap();
        WeierstrassCurve::new(r.var("g2").unwrap(), r.var("g3").unwrap()).unwrap()
    }

    #[test]
    fn weierstrass_chart_series() {
        let c = universal_curve();
        let u = c.u_series(10);
        assert_eq!(u.display(), "4*x^3 + -16*g2*x^7 + -64*g3*x^9");
        assert!(c.u_series_residual(&u).is_zero());
    }

    #[test]
    fn weierstrass_law_and_classification() {
        let c = universal_curve();
        let (f, _) = fgl_from_weierstrass(&c, 8).unwrap();
        assert!(f.axiom_check().unwrap().passes());
        let report = elliptic_classification_check(&c, 8).unwrap();
        assert_eq!(report.status, "pass");
        assert_eq!(report.images[3].image, "8*g2");
        assert_eq!(report.images[5].image, "48*g3");
    }

    #[test]
    fn weierstrass_preconditions() {
        let r = Ring::from_doc(&RingDoc::new("Q")).unwrap();
        let singular = WeierstrassCurve::new(r.int(3), r.int(1));
        assert!(matches!(singular, Err(FglError::DiscriminantNotInvertible(_))));
        let zr = z();
        assert!(matches!(WeierstrassCurve::new(zr.int(4), zr.int(1)), Err(FglError::SixNotInvertible)));
    }

    #[test]
    fn honda_is_integral() {
        let f = fgl_honda(2, 2, 9).unwrap();
        assert!(f.is_integral());
        assert!(f.axiom_check().unwrap().passes());
        let f3 = fgl_honda(3, 1, 8).unwrap();
        assert!(f3.is_integral());
    }
}
