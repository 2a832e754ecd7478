//! Truncated multivariate power series over a `Ring`.
//!
//! Invariants:
//! * every stored exponent lies strictly inside the precision (per-variable
//!   caps and the optional total-degree cap);
//! * zero coefficients are never stored;
//! * arithmetic on mixed precisions truncates to the coarser one.

use crate::poly::{grlex_cmp, monomial_text, rational};
use crate::ring::{Ring, RingElement, RingError};
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_CAP: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("series live over different rings")]
    RingMismatch,
    #[error("series use different variables: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
    #[error("cannot substitute a series with nonzero constant term for `{0}`")]
    NonzeroConstantTerm(String),
    #[error("linear coefficient {0} is not a unit")]
    NonUnitLinear(String),
    #[error("constant term {0} is not a unit")]
    NonUnitConstant(String),
    #[error("operation needs a series in exactly one variable")]
    NotUnivariate,
    #[error("scalar multiplication needs a constant series")]
    NotAScalar,
    #[error("expected {expected} substitutions, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

type Result<T> = std::result::Result<T, SeriesError>;

/// Truncation data: exclusive per-variable caps and an optional exclusive
/// total-degree cap. `None` means unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precision {
    pub per_variable: Vec<Option<u32>>,
    pub total: Option<u32>,
}

impl Precision {
    pub fn total(nvars: usize, cap: u32) -> Self {
        Precision { per_variable: vec![None; nvars], total: Some(cap) }
    }

    pub fn per_variable(caps: Vec<u32>) -> Self {
        Precision { per_variable: caps.into_iter().map(Some).collect(), total: None }
    }

    pub fn default_caps(nvars: usize) -> Self {
        Precision::per_variable(vec![DEFAULT_CAP; nvars])
    }

    pub fn contains(&self, e: &[u32]) -> bool {
        if let Some(t) = self.total {
            if e.iter().sum::<u32>() >= t {
                return false;
            }
        }
        e.iter().zip(&self.per_variable).all(|(k, c)| c.is_none_or(|c| *k < c))
    }

    pub fn meet(&self, other: &Precision) -> Precision {
        let m = |a: Option<u32>, b: Option<u32>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        Precision {
            per_variable: self.per_variable.iter().zip(&other.per_variable).map(|(a, b)| m(*a, *b)).collect(),
            total: m(self.total, other.total),
        }
    }

    /// Smallest total degree that may be missing: `min(total, min per-variable cap)`.
    pub fn order_bound(&self) -> Option<u32> {
        self.per_variable.iter().flatten().copied().chain(self.total).min()
    }

    fn with_total_at_most(&self, n: Option<u32>) -> Precision {
        self.meet(&Precision { per_variable: vec![None; self.per_variable.len()], total: n })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    ring: Ring,
    vars: Vec<String>,
    precision: Precision,
    terms: BTreeMap<Vec<u32>, RingElement>,
}

impl TruncatedSeries {
    pub fn zero(ring: &Ring, vars: &[&str], precision: Precision) -> Self {
        assert_eq!(vars.len(), precision.per_variable.len(), "precision arity");
        TruncatedSeries { ring: ring.clone(), vars: vars.iter().map(|s| s.to_string()).collect(), precision, terms: BTreeMap::new() }
    }

    fn empty_like(&self, precision: Precision) -> Self {
        TruncatedSeries { ring: self.ring.clone(), vars: self.vars.clone(), precision, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Ring, vars: &[&str], precision: Precision, c: RingElement) -> Self {
        let mut s = TruncatedSeries::zero(ring, vars, precision);
        s.add_term(vec![0; vars.len()], c);
        s
    }

    pub fn one(ring: &Ring, vars: &[&str], precision: Precision) -> Self {
        TruncatedSeries::constant(ring, vars, precision, ring.one())
    }

    pub fn variable(ring: &Ring, vars: &[&str], precision: Precision, index: usize) -> Self {
        let mut s = TruncatedSeries::zero(ring, vars, precision);
        let mut e = vec![0; vars.len()];
        e[index] = 1;
        s.add_term(e, ring.one());
        s
    }

    /// Build from explicit terms (terms outside the precision are dropped).
    pub fn from_terms(ring: &Ring, vars: &[&str], precision: Precision, terms: impl IntoIterator<Item = (Vec<u32>, RingElement)>) -> Self {
        let mut s = TruncatedSeries::zero(ring, vars, precision);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// Univariate series from coefficients `c_0, c_1, ...`.
    pub fn univariate(ring: &Ring, var: &str, cap: u32, coeffs: &[RingElement]) -> Self {
        TruncatedSeries::from_terms(
            ring,
            &[var],
            Precision::total(1, cap),
            coeffs.iter().enumerate().map(|(k, c)| (vec![k as u32], c.clone())),
        )
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    fn var_refs(&self) -> Vec<&str> {
        self.vars.iter().map(String::as_str).collect()
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &RingElement)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: RingElement) {
        if c.is_zero() || !self.precision.contains(&e) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, e: &[u32]) -> RingElement {
        self.terms.get(e).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn constant_term(&self) -> RingElement {
        self.coeff(&vec![0; self.vars.len()])
    }

    /// Lowest total degree of a stored term (`None` for zero).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn check_compatible(&self, other: &TruncatedSeries) -> Result<()> {
        if self.ring != other.ring {
            return Err(SeriesError::RingMismatch);
        }
        if self.vars != other.vars {
            return Err(SeriesError::VariableMismatch(self.vars.clone(), other.vars.clone()));
        }
        Ok(())
    }

    fn assert_compatible(&self, other: &TruncatedSeries) {
        if let Err(e) = self.check_compatible(other) {
            panic!("incompatible series: {e}");
        }
    }

    pub fn truncate(&self, precision: &Precision) -> TruncatedSeries {
        let p = self.precision.meet(precision);
        let mut out = self.empty_like(p);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &RingElement) -> TruncatedSeries {
        let mut out = self.empty_like(self.precision.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> TruncatedSeries {
        self.scale(&self.ring.int(k))
    }

    pub fn pow(&self, n: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(&self.ring, &self.var_refs(), self.precision.clone());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Apply a ring map to every coefficient.
    pub fn map_coefficients(
        &self,
        target: &Ring,
        f: impl Fn(&RingElement) -> std::result::Result<RingElement, RingError>,
    ) -> Result<TruncatedSeries> {
        let mut out = TruncatedSeries::zero(target, &self.var_refs(), self.precision.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Same series viewed in another ring via name-preserving variable maps.
    pub fn map_to(&self, target: &Ring) -> Result<TruncatedSeries> {
        self.map_coefficients(target, |c| c.map_to(target))
    }

    /// Set variable `index` to zero.
    pub fn at_zero(&self, index: usize) -> TruncatedSeries {
        let mut out = self.empty_like(self.precision.clone());
        for (e, c) in &self.terms {
            if e[index] == 0 {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Substitute series (all over the same ring and variables) for each
    /// variable. Each substituted series must have zero constant term.
    pub fn compose(&self, subs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        for (i, s) in subs.iter().enumerate() {
            if !s.constant_term().is_zero() {
                return Err(SeriesError::NonzeroConstantTerm(self.vars.get(i).cloned().unwrap_or_default()));
            }
        }
        self.substitute(subs, self.precision.order_bound())
    }

    /// Substitute while treating `self` as the exact polynomial formed by its
    /// stored terms. Valid when `self` is known to be a polynomial; the inner
    /// series may then have nonzero constant terms.
    pub fn substitute_polynomial(&self, subs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        self.substitute(subs, None)
    }

    fn substitute(&self, subs: &[TruncatedSeries], order_bound: Option<u32>) -> Result<TruncatedSeries> {
        if subs.len() != self.vars.len() {
            return Err(SeriesError::ArityMismatch { expected: self.vars.len(), got: subs.len() });
        }
        let Some(first) = subs.first() else {
            return Ok(self.clone());
        };
        for s in subs {
            first.check_compatible(s)?;
            if s.ring != self.ring {
                return Err(SeriesError::RingMismatch);
            }
        }
        let mut prec = first.precision.clone();
        for s in &subs[1..] {
            prec = prec.meet(&s.precision);
        }
        let prec = prec.with_total_at_most(order_bound);
        let subs: Vec<TruncatedSeries> = subs.iter().map(|s| s.truncate(&prec)).collect();
        let mut powers: Vec<Vec<TruncatedSeries>> =
            subs.iter().map(|s| vec![TruncatedSeries::one(&s.ring, &s.var_refs(), prec.clone())]).collect();
        let mut out = first.empty_like(prec.clone());
        for (e, c) in &self.terms {
            let mut term = TruncatedSeries::constant(&self.ring, &first.var_refs(), prec.clone(), c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &subs[i];
                    powers[i].push(next);
                }
                if k > 0 {
                    term = &term * &powers[i][k as usize];
                }
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Compositional inverse of a univariate series with zero constant term
    /// and unit linear coefficient, by the fixed-point iteration
    /// `g <- a1^-1 (z - (f(g) - a1 g))`.
    pub fn reverse(&self) -> Result<TruncatedSeries> {
        if self.vars.len() != 1 {
            return Err(SeriesError::NotUnivariate);
        }
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstantTerm(self.vars[0].clone()));
        }
        let a1 = self.coeff(&[1]);
        let a1_inv = a1.try_inverse().ok_or_else(|| SeriesError::NonUnitLinear(a1.to_string()))?;
        let z = TruncatedSeries::variable(&self.ring, &self.var_refs(), self.precision.clone(), 0);
        let mut g = z.scale(&a1_inv);
        let iterations = self.precision.order_bound().unwrap_or(DEFAULT_CAP) + 1;
        for _ in 0..iterations {
            let fg = self.compose(std::slice::from_ref(&g))?;
            let next = (&z - &(&fg - &g.scale(&a1))).scale(&a1_inv);
            if next == g {
                break;
            }
            g = next;
        }
        Ok(g)
    }

    /// Multiplicative inverse of a series with unit constant term (Newton).
    pub fn inverse(&self) -> Result<TruncatedSeries> {
        let c0 = self.constant_term();
        let c0_inv = c0.try_inverse().ok_or_else(|| SeriesError::NonUnitConstant(c0.to_string()))?;
        let one = TruncatedSeries::one(&self.ring, &self.var_refs(), self.precision.clone());
        let two = one.scale_int(2);
        let mut g = one.scale(&c0_inv);
        let iterations = 2 + 2 * (self.precision.order_bound().unwrap_or(DEFAULT_CAP) as usize);
        for _ in 0..iterations {
            let next = &g * &(&two - &(self * &g));
            if next == g {
                return Ok(g);
            }
            g = next;
        }
        Ok(g)
    }

    pub fn derivative(&self, index: usize) -> TruncatedSeries {
        let mut p = self.precision.clone();
        if let Some(c) = p.per_variable[index].as_mut() {
            *c = c.saturating_sub(1);
        }
        p.total = p.total.map(|t| t.saturating_sub(1));
        let mut out = self.empty_like(p);
        for (e, c) in &self.terms {
            if e[index] > 0 {
                let mut e2 = e.clone();
                e2[index] -= 1;
                out.add_term(e2, c.scale(&rational(e[index] as i64)));
            }
        }
        out
    }

    /// Antiderivative in variable `index` with zero constant of integration.
    /// Needs `1/(k+1)` in the ring for every occurring degree `k`.
    pub fn integrate(&self, index: usize) -> Result<TruncatedSeries> {
        let mut p = self.precision.clone();
        if let Some(c) = p.per_variable[index].as_mut() {
            *c += 1;
        }
        p.total = p.total.map(|t| t + 1);
        let mut out = self.empty_like(p);
        for (e, c) in &self.terms {
            let k = e[index] as i64 + 1;
            let inv = self.ring.constant(BigRational::new(1.into(), k.into()))?;
            let mut e2 = e.clone();
            e2[index] += 1;
            out.add_term(e2, c * &inv);
        }
        Ok(out)
    }

    /// Canonical text form: ascending graded lex order.
    pub fn display(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        let as_i32 = |e: &Vec<u32>| e.iter().map(|&x| x as i32).collect::<Vec<i32>>();
        keys.sort_by(|a, b| grlex_cmp(&as_i32(a), &as_i32(b)));
        let parts: Vec<String> = keys
            .iter()
            .map(|e| {
                let c = self.terms[*e].to_string();
                let mono = monomial_text(&as_i32(e), &self.vars);
                let simple = !c.contains([' ', '|']);
                match (mono.is_empty(), c.as_str()) {
                    (true, _) => c,
                    (false, "1") => mono,
                    (false, "-1") => format!("-{mono}"),
                    _ if simple => format!("{c}*{mono}"),
                    _ => format!("({c})*{mono}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

impl std::ops::Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.assert_compatible(rhs);
        let mut out = self.truncate(&rhs.precision);
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        let mut out = self.empty_like(self.precision.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl std::ops::Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.assert_compatible(rhs);
        let prec = self.precision.meet(&rhs.precision);
        let mut acc: BTreeMap<Vec<u32>, RingElement> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            if !prec.contains(ea) {
                continue;
            }
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if !prec.contains(&e) {
                    continue;
                }
                let p = ca * cb;
                match acc.get_mut(&e) {
                    Some(v) => *v = &*v + &p,
                    None => {
                        acc.insert(e, p);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        TruncatedSeries { ring: self.ring.clone(), vars: self.vars.clone(), precision: prec, terms: acc }
    }
}

macro_rules! owned_series_ops {
    ($tr:ident, $f:ident) => {
        impl std::ops::$tr for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $f(self, rhs: TruncatedSeries) -> TruncatedSeries {
                std::ops::$tr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&TruncatedSeries> for TruncatedSeries {
            type Output = TruncatedSeries;
            fn $f(self, rhs: &TruncatedSeries) -> TruncatedSeries {
                std::ops::$tr::$f(&self, rhs)
            }
        }
    };
}
owned_series_ops!(Add, add);
owned_series_ops!(Sub, sub);
owned_series_ops!(Mul, mul);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    /// `a(b)`: `a` univariate, `b` with zero constant term.
    Compose,
    /// `b` must be a constant series; multiplies `a` by that constant.
    ScalarMul,
}

/// Checked binary series arithmetic.
pub fn series_arith(a: &TruncatedSeries, b: &TruncatedSeries, op: SeriesOp) -> Result<TruncatedSeries> {
    match op {
        SeriesOp::Add => {
            a.check_compatible(b)?;
            Ok(a + b)
        }
        SeriesOp::Mul => {
            a.check_compatible(b)?;
            Ok(a * b)
        }
        SeriesOp::Compose => {
            if a.ring != b.ring {
                return Err(SeriesError::RingMismatch);
            }
            if a.vars.len() != 1 {
                return Err(SeriesError::NotUnivariate);
            }
            a.compose(std::slice::from_ref(b))
        }
        SeriesOp::ScalarMul => {
            if a.ring != b.ring {
                return Err(SeriesError::RingMismatch);
            }
            if b.terms.keys().any(|e| e.iter().any(|&k| k > 0)) {
                return Err(SeriesError::NotAScalar);
            }
            Ok(a.scale(&b.constant_term()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingDoc;

    fn z_ring() -> Ring {
        Ring::from_doc(&RingDoc::new("Z")).unwrap()
    }

    fn uni(r: &Ring, cap: u32, coeffs: &[i64]) -> TruncatedSeries {
        let c: Vec<RingElement> = coeffs.iter().map(|&k| r.int(k)).collect();
        TruncatedSeries::univariate(r, "z", cap, &c)
    }

    #[test]
    fn product_truncates() {
        let r = z_ring();
        let a = uni(&r, 5, &[1, 1]);
        let b = uni(&r, 5, &[1, -1]);
        assert_eq!(&a * &b, uni(&r, 5, &[1, 0, -1]));
    }

    #[test]
    fn compose_hand_expansion() {
        let r = z_ring();
        let f = uni(&r, 5, &[0, 1, 1]);
        assert_eq!(f.compose(std::slice::from_ref(&f)).unwrap(), uni(&r, 5, &[0, 1, 2, 2, 1]));
    }

    #[test]
    fn compose_rejects_constant_term() {
        let r = z_ring();
        let f = uni(&r, 5, &[0, 1, 1]);
        let g = uni(&r, 5, &[1, 1]);
        assert!(matches!(f.compose(&[g]), Err(SeriesError::NonzeroConstantTerm(_))));
    }

    #[test]
    fn reverse_catalan() {
        let r = z_ring();
        let f = uni(&r, 6, &[0, 1, 1]);
        assert_eq!(f.reverse().unwrap(), uni(&r, 6, &[0, 1, -1, 2, -5, 14]));
        let bad = uni(&r, 6, &[0, 2, 1]);
        assert!(matches!(bad.reverse(), Err(SeriesError::NonUnitLinear(_))));
    }

    #[test]
    fn mixed_caps_take_minimum() {
        let r = z_ring();
        let a = uni(&r, 3, &[1, 1, 1]);
        let b = uni(&r, 7, &[1, 1, 1, 1, 1, 1, 1]);
        let s = &a + &b;
        assert_eq!(s.precision().total, Some(3));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn inverse_of_one_minus_z() {
        let r = z_ring();
        let f = uni(&r, 6, &[1, -1]);
        assert_eq!(f.inverse().unwrap(), uni(&r, 6, &[1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn integrate_needs_rationals() {
        let r = z_ring();
        let f = uni(&r, 6, &[0, 1]);
        assert!(f.integrate(0).is_err());
        let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
        let g = uni(&q, 6, &[0, 1]).integrate(0).unwrap();
        assert_eq!(g.display(), "1/2*z^2");
    }

    #[test]
    fn checked_arith_reports_mismatch() {
        let r = z_ring();
        let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
        assert!(matches!(series_arith(&uni(&r, 3, &[1]), &uni(&q, 3, &[1]), SeriesOp::Add), Err(SeriesError::RingMismatch)));
        let s = series_arith(&uni(&r, 3, &[1, 1]), &uni(&r, 3, &[3]), SeriesOp::ScalarMul).unwrap();
        assert_eq!(s, uni(&r, 3, &[3, 3]));
    }
}
