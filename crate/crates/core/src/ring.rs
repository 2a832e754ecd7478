//! Finitely presented commutative rings with decidable equality.
//!
//! A ring is either a *quotient* (a base ring with variables, some of them
//! inverted, modulo relations that can be oriented into rewrite rules) or a
//! finite *product* of such rings sharing variable names. Each relation must
//! admit one of these strategies:
//!
//! * linear in some variable with a unit coefficient: the variable is
//!   eliminated by substitution (`1 - u*w` gives `w -> u^-1`, marking `u`
//!   invertible);
//! * of degree `d >= 2` in a non-inverted variable with unit leading
//!   coefficient: `v^d` is rewritten by the lower-degree tail;
//! * a product of coprime factors: the ring becomes the product of the
//!   quotients by factor groups (factors in a single common variable are kept
//!   together). Coprimality of the groups is the caller's responsibility.
//!
//! Later-declared variables are eliminated first. Elements are stored in
//! normal form, so structural equality is ring equality.

use crate::expr::{self, Algebra, Expr, ParseError};
use crate::poly::{rational, Exponents, Poly};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is not invertible in this ring")]
    NotInvertible(String),
    #[error("unsupported ring presentation: {0}")]
    Unsupported(String),
    #[error("invalid ring specification: {0}")]
    InvalidSpec(String),
    #[error("elements belong to different rings")]
    RingMismatch,
    #[error("ring is not a product")]
    NotAProduct,
}

type Result<T> = std::result::Result<T, RingError>;

/// Declarative ring description, as loaded from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default)]
    pub vars: Vec<VarDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invert: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub product: Vec<RingDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDoc {
    pub name: String,
    #[serde(default = "default_weight")]
    pub weight: i32,
}

fn default_weight() -> i32 {
    1
}

impl RingDoc {
    pub fn new(base: &str) -> Self {
        RingDoc { base: Some(base.to_string()), vars: vec![], invert: vec![], relations: vec![], product: vec![] }
    }

    pub fn var(mut self, name: &str) -> Self {
        self.vars.push(VarDoc { name: name.to_string(), weight: 1 });
        self
    }

    pub fn weighted_var(mut self, name: &str, weight: i32) -> Self {
        self.vars.push(VarDoc { name: name.to_string(), weight });
        self
    }

    pub fn invert(mut self, expr: &str) -> Self {
        self.invert.push(expr.to_string());
        self
    }

    pub fn relation(mut self, expr: &str) -> Self {
        self.relations.push(expr.to_string());
        self
    }

    pub fn component(mut self, doc: RingDoc) -> Self {
        self.product.push(doc);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Base {
    Integers,
    Rationals,
    IntegersMod(BigInt),
}

impl Base {
    pub fn parse(s: &str) -> Result<Base> {
        match s.trim() {
            "Z" => Ok(Base::Integers),
            "Q" => Ok(Base::Rationals),
            other => {
                let m = other
                    .strip_prefix("Zmod:")
                    .and_then(|m| m.trim().parse::<BigInt>().ok())
                    .ok_or_else(|| RingError::InvalidSpec(format!("unknown base `{other}`")))?;
                if m < BigInt::from(2) || prime_factors(&m).len() != 1 {
                    return Err(RingError::InvalidSpec(format!("modulus {m} is not a prime power")));
                }
                Ok(Base::IntegersMod(m))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Base::Integers => "Z".into(),
            Base::Rationals => "Q".into(),
            Base::IntegersMod(m) => format!("Zmod:{m}"),
        }
    }
}

pub(crate) fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        if (&n % &p).is_zero() {
            out.push(p.clone());
            while (&n % &p).is_zero() {
                n /= &p;
            }
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push(n);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rule {
    var: usize,
    degree: i32,
    tail: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Quotient {
    laurent: Vec<bool>,
    inverted_primes: Vec<BigInt>,
    substitutions: Vec<Option<Poly>>,
    substitution_inverses: Vec<Option<Poly>>,
    rules: Vec<Rule>,
    rule_inverses: Vec<Option<Poly>>,
    declared_units: Vec<Poly>,
}

#[derive(Debug, PartialEq, Eq)]
enum Kind {
    Quotient(Quotient),
    Product(Vec<Ring>),
}

#[derive(Debug, PartialEq, Eq)]
pub struct RingSpec {
    doc: RingDoc,
    base: Base,
    names: Vec<String>,
    weights: Vec<i32>,
    kind: Kind,
}

/// Shared handle to an immutable ring specification.
#[derive(Clone, Debug)]
pub struct Ring(Arc<RingSpec>);

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Ring {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Poly(Poly),
    Product(Vec<Repr>),
}

#[derive(Clone, Debug)]
pub struct RingElement {
    ring: Ring,
    repr: Repr,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.repr == other.repr && self.ring == other.ring
    }
}
impl Eq for RingElement {}

// ---------------------------------------------------------------- building

/// Raw polynomial evaluation used while a ring is being built: division only
/// by nonzero constants and by monomials in already-inverted variables.
struct RawPolys<'a> {
    names: &'a [String],
    laurent: &'a [bool],
}

impl Algebra for RawPolys<'_> {
    type Value = Poly;
    type Error = RingError;
    fn number(&self, n: &BigInt) -> Result<Poly> {
        Ok(Poly::constant(self.names.len(), BigRational::from_integer(n.clone())))
    }
    fn variable(&self, name: &str) -> Result<Poly> {
        let i = self.names.iter().position(|n| n == name).ok_or_else(|| RingError::UnknownVariable(name.into()))?;
        Ok(Poly::var(self.names.len(), i))
    }
    fn add(&self, a: &Poly, b: &Poly) -> Poly {
        a.add(b)
    }
    fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        a.sub(b)
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mul(b)
    }
    fn neg(&self, a: &Poly) -> Poly {
        a.neg()
    }
    fn div(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        let inv = self.monomial_inverse(b)?;
        Ok(a.mul(&inv))
    }
    fn pow(&self, a: &Poly, k: i64) -> Result<Poly> {
        if k >= 0 {
            Ok(a.pow(k as u32))
        } else {
            Ok(self.monomial_inverse(a)?.pow((-k) as u32))
        }
    }
}

impl RawPolys<'_> {
    fn monomial_inverse(&self, b: &Poly) -> Result<Poly> {
        let (e, c) = b.single_term().ok_or_else(|| RingError::NotInvertible(b.display(self.names)))?;
        if e.iter().enumerate().any(|(j, &k)| k != 0 && !self.laurent[j]) {
            return Err(RingError::NotInvertible(b.display(self.names)));
        }
        Ok(Poly::monomial(e.iter().map(|k| -k).collect(), c.recip()))
    }
}

impl Ring {
    pub fn from_json(json: &str) -> Result<Ring> {
        let doc: RingDoc = serde_json::from_str(json).map_err(|e| RingError::InvalidSpec(e.to_string()))?;
        Ring::from_doc(&doc)
    }

    pub fn from_doc(doc: &RingDoc) -> Result<Ring> {
        let base = Base::parse(doc.base.as_deref().unwrap_or("Z"))?;
        build(doc, &base, true)
    }

    /// Product of rings whose elements are written in the same variable names.
    pub fn product(components: Vec<Ring>) -> Result<Ring> {
        if components.is_empty() {
            return Err(RingError::InvalidSpec("empty product".into()));
        }
        let base = components[0].base().clone();
        if components.iter().any(|c| *c.base() != base) {
            return Err(RingError::InvalidSpec("product components must share a base".into()));
        }
        let mut doc = RingDoc::new(&base.label());
        doc.product = components.iter().map(|c| c.doc().clone()).collect();
        let (names, weights) = union_names(&components);
        Ok(Ring(Arc::new(RingSpec { doc, base, names, weights, kind: Kind::Product(components) })))
    }

    pub fn doc(&self) -> &RingDoc {
        &self.0.doc
    }

    pub fn base(&self) -> &Base {
        &self.0.base
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn weight(&self, name: &str) -> Option<i32> {
        self.0.names.iter().position(|n| n == name).map(|i| self.0.weights[i])
    }

    pub fn nvars(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_product(&self) -> bool {
        matches!(self.0.kind, Kind::Product(_))
    }

    pub fn components(&self) -> Result<&[Ring]> {
        match &self.0.kind {
            Kind::Product(c) => Ok(c),
            Kind::Quotient(_) => Err(RingError::NotAProduct),
        }
    }

    /// Whether the ring contains Q (every nonzero integer is a unit).
    pub fn is_q_algebra(&self) -> bool {
        self.0.base == Base::Rationals
    }

    /// Same presentation over a different base ring.
    pub fn with_base(&self, base: &Base) -> Result<Ring> {
        let mut doc = self.0.doc.clone();
        set_base(&mut doc, &base.label());
        Ring::from_doc(&doc)
    }

    pub fn rationalized(&self) -> Result<Ring> {
        self.with_base(&Base::Rationals)
    }

    /// Adjoin free variables (appended after the existing ones).
    pub fn with_extra_vars(&self, names: &[&str]) -> Result<Ring> {
        let mut doc = self.0.doc.clone();
        add_vars(&mut doc, names);
        Ring::from_doc(&doc)
    }

    /// Adjoin relations (and re-derive the normal-form strategy).
    pub fn with_relations(&self, relations: &[&str]) -> Result<Ring> {
        let mut doc = self.0.doc.clone();
        add_relations(&mut doc, relations);
        Ring::from_doc(&doc)
    }

    fn wrap(&self, repr: Repr) -> RingElement {
        RingElement { ring: self.clone(), repr }
    }

    pub fn zero(&self) -> RingElement {
        self.wrap(zero_repr(&self.0))
    }

    pub fn one(&self) -> RingElement {
        self.constant(BigRational::one()).expect("1 is always admissible")
    }

    pub fn int(&self, n: i64) -> RingElement {
        self.constant(rational(n)).expect("integers are always admissible")
    }

    pub fn constant(&self, c: BigRational) -> Result<RingElement> {
        self.from_poly(&Poly::constant(self.nvars(), c))
    }

    pub fn var(&self, name: &str) -> Result<RingElement> {
        let i = self.0.names.iter().position(|n| n == name).ok_or_else(|| RingError::UnknownVariable(name.into()))?;
        self.from_poly(&Poly::var(self.nvars(), i))
    }

    /// Normal form of a polynomial written in this ring's variables.
    pub fn from_poly(&self, p: &Poly) -> Result<RingElement> {
        if p.nvars() != self.nvars() {
            return Err(RingError::InvalidSpec("polynomial has the wrong number of variables".into()));
        }
        Ok(self.wrap(normalize_repr(&self.0, p)?))
    }

    /// Parse an ASCII expression and return its normal form.
    pub fn parse(&self, input: &str) -> Result<RingElement> {
        let e = expr::parse(input)?;
        self.eval(&e)
    }

    pub fn eval(&self, e: &Expr) -> Result<RingElement> {
        e.eval(self)
    }

    /// The element equal to `parts[i]` in component `i`.
    pub fn from_components(&self, parts: Vec<RingElement>) -> Result<RingElement> {
        let comps = self.components()?;
        if parts.len() != comps.len() || parts.iter().zip(comps).any(|(p, c)| p.ring != *c) {
            return Err(RingError::RingMismatch);
        }
        Ok(self.wrap(Repr::Product(parts.into_iter().map(|p| p.repr).collect())))
    }

    /// The complete orthogonal family of component idempotents.
    pub fn idempotents(&self) -> Result<IdempotentFamily> {
        let comps = match &self.0.kind {
            Kind::Product(c) => c,
            Kind::Quotient(_) => {
                return Ok(IdempotentFamily { ring: self.clone(), elements: vec![self.one()] });
            }
        };
        let elements = (0..comps.len())
            .map(|i| {
                let parts = comps.iter().enumerate().map(|(j, c)| if i == j { c.one() } else { c.zero() }).collect();
                self.from_components(parts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IdempotentFamily { ring: self.clone(), elements })
    }
}

impl Algebra for Ring {
    type Value = RingElement;
    type Error = RingError;
    fn number(&self, n: &BigInt) -> Result<RingElement> {
        self.constant(BigRational::from_integer(n.clone()))
    }
    fn variable(&self, name: &str) -> Result<RingElement> {
        self.var(name)
    }
    fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a + b
    }
    fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a - b
    }
    fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a * b
    }
    fn neg(&self, a: &RingElement) -> RingElement {
        -a
    }
    fn div(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        let inv = b.try_inverse().ok_or_else(|| RingError::NotInvertible(b.to_string()))?;
        Ok(a * &inv)
    }
    fn pow(&self, a: &RingElement, k: i64) -> Result<RingElement> {
        a.try_pow(k)
    }
}

fn set_base(doc: &mut RingDoc, label: &str) {
    if doc.base.is_some() || doc.product.is_empty() {
        doc.base = Some(label.to_string());
    }
    for c in &mut doc.product {
        if c.base.is_some() {
            c.base = Some(label.to_string());
        }
        for cc in &mut c.product {
            set_base(cc, label);
        }
    }
}

fn add_vars(doc: &mut RingDoc, names: &[&str]) {
    if doc.product.is_empty() {
        for n in names {
            doc.vars.push(VarDoc { name: n.to_string(), weight: 1 });
        }
    } else {
        for c in &mut doc.product {
            add_vars(c, names);
        }
    }
}

fn add_relations(doc: &mut RingDoc, relations: &[&str]) {
    if doc.product.is_empty() {
        doc.relations.extend(relations.iter().map(|s| s.to_string()));
    } else {
        for c in &mut doc.product {
            add_relations(c, relations);
        }
    }
}

fn union_names(components: &[Ring]) -> (Vec<String>, Vec<i32>) {
    let mut names: Vec<String> = Vec::new();
    let mut weights = Vec::new();
    for c in components {
        for (n, w) in c.0.names.iter().zip(&c.0.weights) {
            if !names.contains(n) {
                names.push(n.clone());
                weights.push(*w);
            }
        }
    }
    (names, weights)
}

fn build(doc: &RingDoc, base: &Base, allow_split: bool) -> Result<Ring> {
    if !doc.product.is_empty() {
        let components = doc
            .product
            .iter()
            .map(|c| {
                let mut c = c.clone();
                for v in &doc.vars {
                    if !c.vars.iter().any(|x| x.name == v.name) {
                        c.vars.push(v.clone());
                    }
                }
                c.invert.extend(doc.invert.iter().cloned());
                c.relations.extend(doc.relations.iter().cloned());
                let cb = match &c.base {
                    Some(b) => Base::parse(b)?,
                    None => base.clone(),
                };
                if cb != *base {
                    return Err(RingError::InvalidSpec("product components must share a base".into()));
                }
                build(&c, base, true)
            })
            .collect::<Result<Vec<_>>>()?;
        let (names, weights) = union_names(&components);
        return Ok(Ring(Arc::new(RingSpec { doc: doc.clone(), base: base.clone(), names, weights, kind: Kind::Product(components) })));
    }

    let names: Vec<String> = doc.vars.iter().map(|v| v.name.clone()).collect();
    let weights: Vec<i32> = doc.vars.iter().map(|v| v.weight).collect();
    for (i, n) in names.iter().enumerate() {
        let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(RingError::InvalidSpec(format!("invalid variable name `{n}`")));
        }
        if names[..i].contains(n) {
            return Err(RingError::InvalidSpec(format!("duplicate variable `{n}`")));
        }
    }
    let n = names.len();
    let mut q = Quotient {
        laurent: vec![false; n],
        inverted_primes: vec![],
        substitutions: vec![None; n],
        substitution_inverses: vec![None; n],
        rules: vec![],
        rule_inverses: vec![None; n],
        declared_units: vec![],
    };

    for s in &doc.invert {
        let e = expr::parse(s)?;
        let p = e.eval(&RawPolys { names: &names, laurent: &q.laurent })?;
        if let Some(c) = p.as_constant() {
            invert_constant(&mut q, base, &c, s)?;
        } else if let Some((exps, c)) = p.single_term() {
            if exps.iter().any(|&k| k < 0) {
                return Err(RingError::InvalidSpec(format!("cannot invert `{s}`")));
            }
            let c = c.clone();
            for (j, &k) in exps.iter().enumerate() {
                if k > 0 {
                    q.laurent[j] = true;
                }
            }
            invert_constant(&mut q, base, &c, s)?;
        } else {
            q.declared_units.push(p);
        }
    }

    let mut parsed = Vec::new();
    for s in &doc.relations {
        let e = expr::parse(s)?;
        let p = e.eval(&RawPolys { names: &names, laurent: &q.laurent })?;
        parsed.push((s.clone(), e, p));
    }

    let spec_of = |q: &Quotient| RingSpec {
        doc: doc.clone(),
        base: base.clone(),
        names: names.clone(),
        weights: weights.clone(),
        kind: Kind::Quotient(q.clone()),
    };

    for (idx, (text, e, raw)) in parsed.iter().enumerate() {
        let r = normalize_quotient(&spec_of(&q), &q, raw)?;
        if r.is_zero() {
            continue;
        }
        if r.as_constant().is_some() {
            return Err(RingError::Unsupported(format!("relation `{text}` reduces to a nonzero constant")));
        }
        if orient_linear(&mut q, base, &names, &r)? || orient_monic(&mut q, base, &r)? {
            refresh(&mut q, &spec_of)?;
            continue;
        }
        if allow_split && idx == 0 && q.rules.is_empty() && q.substitutions.iter().all(Option::is_none) {
            if let Some(ring) = split_by_factors(doc, base, &names, &q, e, &parsed[1..])? {
                return Ok(ring);
            }
        }
        return Err(RingError::Unsupported(format!("no normal-form strategy for relation `{text}`")));
    }
    Ok(Ring(Arc::new(spec_of(&q))))
}

fn invert_constant(q: &mut Quotient, base: &Base, c: &BigRational, text: &str) -> Result<()> {
    if c.is_zero() {
        return Err(RingError::InvalidSpec(format!("cannot invert zero (`{text}`)")));
    }
    match base {
        Base::Rationals => {}
        Base::Integers => {
            for n in [c.numer(), c.denom()] {
                for p in prime_factors(n) {
                    if !q.inverted_primes.contains(&p) {
                        q.inverted_primes.push(p);
                    }
                }
            }
            q.inverted_primes.sort();
        }
        Base::IntegersMod(m) => {
            if !c.numer().gcd(m).is_one() {
                return Err(RingError::NotInvertible(text.to_string()));
            }
        }
    }
    Ok(())
}

fn constant_is_unit(q: &Quotient, base: &Base, c: &BigRational) -> bool {
    if c.is_zero() {
        return false;
    }
    match base {
        Base::Rationals => true,
        Base::Integers => {
            let mut n = c.numer().abs();
            for p in &q.inverted_primes {
                while (&n % p).is_zero() {
                    n /= p;
                }
            }
            n.is_one()
        }
        Base::IntegersMod(m) => c.numer().gcd(m).is_one(),
    }
}

fn admissible_coefficient(q: &Quotient, base: &Base, c: &BigRational) -> bool {
    match base {
        Base::Rationals => true,
        Base::Integers => {
            let mut d = c.denom().clone();
            for p in &q.inverted_primes {
                while (&d % p).is_zero() {
                    d /= p;
                }
            }
            d.is_one()
        }
        Base::IntegersMod(m) => c.denom().gcd(m).is_one(),
    }
}

/// Unit monomial `c * prod x_j^k` with `c` a base unit and every `x_j` inverted.
fn is_unit_monomial(q: &Quotient, base: &Base, p: &Poly) -> bool {
    match p.single_term() {
        Some((e, c)) => {
            constant_is_unit(q, base, c) && e.iter().enumerate().all(|(j, &k)| k == 0 || q.laurent[j] || q.rule_inverses[j].is_some())
        }
        None => false,
    }
}

fn monomial_inverse(p: &Poly) -> Poly {
    let (e, c) = p.single_term().expect("monomial");
    Poly::monomial(e.iter().map(|k| -k).collect(), c.recip())
}

fn orient_linear(q: &mut Quotient, base: &Base, names: &[String], r: &Poly) -> Result<bool> {
    for j in (0..r.nvars()).rev() {
        if r.degree_in(j) != Some(1) || r.min_degree_in(j).unwrap_or(0) < 0 || q.rule_inverses[j].is_some() {
            continue;
        }
        if q.rules.iter().any(|rule| rule.var == j) {
            continue;
        }
        let coeffs = r.coefficients_in(j);
        let a = &coeffs[&1];
        let b = coeffs.get(&0).cloned().unwrap_or_else(|| Poly::zero(r.nvars()));
        let Some((ae, ac)) = a.single_term() else { continue };
        if !constant_is_unit(q, base, ac) || ae.iter().any(|&k| k < 0) {
            continue;
        }
        let needs_inverting: Vec<usize> = ae.iter().enumerate().filter(|(i, &k)| k > 0 && !q.laurent[*i]).map(|(i, _)| i).collect();
        if !needs_inverting.is_empty() && !is_unit_monomial(q, base, &b) {
            continue;
        }
        let mut trial = q.clone();
        for &i in &needs_inverting {
            trial.laurent[i] = true;
        }
        let image = b.neg().mul(&monomial_inverse(a));
        if q.laurent[j] {
            match image.single_term() {
                Some((e, c)) if e.iter().enumerate().all(|(i, &k)| k == 0 || trial.laurent[i]) => {
                    let c = c.clone();
                    invert_constant(&mut trial, base, &c, &names[j])?;
                }
                _ => continue,
            }
        }
        *q = trial;
        q.substitutions[j] = Some(image);
        return Ok(true);
    }
    Ok(false)
}

fn orient_monic(q: &mut Quotient, base: &Base, r: &Poly) -> Result<bool> {
    for j in (0..r.nvars()).rev() {
        let Some(d) = r.degree_in(j) else { continue };
        if d < 2 || r.min_degree_in(j).unwrap_or(0) < 0 || q.laurent[j] || q.substitutions[j].is_some() {
            continue;
        }
        if q.rules.iter().any(|rule| rule.var == j) {
            continue;
        }
        let coeffs = r.coefficients_in(j);
        let lc = &coeffs[&d];
        if !is_unit_monomial(q, base, lc) {
            continue;
        }
        let mut rest = r.clone();
        for (e, c) in lc.terms() {
            let mut e2 = e.clone();
            e2[j] += d;
            rest.add_term(e2, -c.clone());
        }
        let tail = rest.neg().mul(&monomial_inverse(lc));
        q.rules.push(Rule { var: j, degree: d, tail });
        return Ok(true);
    }
    Ok(false)
}

/// Re-normalize substitution images and rule tails after a new orientation,
/// and recompute which variables have known inverses.
fn refresh(q: &mut Quotient, spec_of: &dyn Fn(&Quotient) -> RingSpec) -> Result<()> {
    for _ in 0..=q.laurent.len() {
        let snapshot = q.clone();
        let spec = spec_of(&snapshot);
        for j in 0..q.substitutions.len() {
            if let Some(img) = &snapshot.substitutions[j] {
                let mut tmp = snapshot.clone();
                tmp.substitutions[j] = None;
                q.substitutions[j] = Some(normalize_quotient(&spec_of(&tmp), &tmp, img)?);
            }
        }
        for (k, rule) in snapshot.rules.iter().enumerate() {
            q.rules[k].tail = normalize_quotient(&spec, &snapshot, &rule.tail)?;
        }
        if *q == snapshot {
            break;
        }
    }
    let base = spec_of(q).base;
    for j in 0..q.laurent.len() {
        q.substitution_inverses[j] = match &q.substitutions[j] {
            Some(img) if is_unit_monomial(q, &base, img) => Some(monomial_inverse(img)),
            _ => None,
        };
    }
    for rule in q.rules.clone() {
        if is_unit_monomial(q, &base, &rule.tail) {
            q.rule_inverses[rule.var] =
                Some(Poly::var(q.laurent.len(), rule.var).pow((rule.degree - 1) as u32).mul(&monomial_inverse(&rule.tail)));
        }
    }
    Ok(())
}

fn split_by_factors(
    doc: &RingDoc,
    base: &Base,
    names: &[String],
    q: &Quotient,
    e: &Expr,
    rest: &[(String, Expr, Poly)],
) -> Result<Option<Ring>> {
    let factors = e.factors();
    if factors.len() < 2 {
        return Ok(None);
    }
    let mut groups: Vec<(Option<usize>, Vec<String>)> = Vec::new();
    let mut dropped_unit = false;
    for f in factors {
        let p = f.eval(&RawPolys { names, laurent: &q.laurent })?;
        if is_unit_monomial(q, base, &p) {
            dropped_unit = true;
            continue;
        }
        let vars: Vec<usize> = (0..names.len()).filter(|&j| p.degree_in(j).unwrap_or(0) != 0).collect();
        let key = if vars.len() == 1 { Some(vars[0]) } else { None };
        let text = format!("({})", p.display(names));
        match groups.iter_mut().find(|g| key.is_some() && g.0 == key) {
            Some(g) => g.1.push(text),
            None => groups.push((key, vec![text])),
        }
    }
    if groups.len() == 1 && dropped_unit {
        let mut c = doc.clone();
        c.relations = std::iter::once(groups[0].1.join("*")).chain(rest.iter().map(|r| r.0.clone())).collect();
        return build(&c, base, true).map(Some);
    }
    if groups.len() < 2 {
        return Ok(None);
    }
    let mut components = Vec::new();
    for (_, fs) in &groups {
        let mut c = doc.clone();
        c.relations = std::iter::once(fs.join("*")).chain(rest.iter().map(|r| r.0.clone())).collect();
        components.push(build(&c, base, false)?);
    }
    let (names, weights) = union_names(&components);
    Ok(Some(Ring(Arc::new(RingSpec { doc: doc.clone(), base: base.clone(), names, weights, kind: Kind::Product(components) }))))
}

// ---------------------------------------------------------- normalization

fn zero_repr(spec: &RingSpec) -> Repr {
    match &spec.kind {
        Kind::Quotient(_) => Repr::Poly(Poly::zero(spec.names.len())),
        Kind::Product(c) => Repr::Product(c.iter().map(|r| zero_repr(&r.0)).collect()),
    }
}

fn normalize_repr(spec: &RingSpec, p: &Poly) -> Result<Repr> {
    match &spec.kind {
        Kind::Quotient(q) => Ok(Repr::Poly(normalize_quotient(spec, q, p)?)),
        Kind::Product(comps) => {
            let mut parts = Vec::with_capacity(comps.len());
            for c in comps {
                let map = spec.names.iter().map(|n| c.0.names.iter().position(|m| m == n)).collect::<Vec<_>>();
                for (e, _) in p.terms() {
                    for (j, &k) in e.iter().enumerate() {
                        if k != 0 && map[j].is_none() {
                            return Err(RingError::UnknownVariable(spec.names[j].clone()));
                        }
                    }
                }
                let idx: Vec<usize> = map.iter().map(|m| m.unwrap_or(0)).collect();
                parts.push(normalize_repr(&c.0, &p.reindex(c.0.names.len(), &idx))?);
            }
            Ok(Repr::Product(parts))
        }
    }
}

fn reduce_coefficients(base: &Base, p: Poly) -> Poly {
    match base {
        Base::IntegersMod(m) => p.map_coefficients(|c| {
            let inv = mod_inverse(c.denom(), m).expect("admissible coefficient");
            BigRational::from_integer((c.numer() * inv).mod_floor(m))
        }),
        _ => p,
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

fn normalize_quotient(spec: &RingSpec, q: &Quotient, p: &Poly) -> Result<Poly> {
    let n = spec.names.len();
    for (_, c) in p.terms() {
        if !admissible_coefficient(q, &spec.base, c) {
            return Err(RingError::NotInvertible(c.denom().to_string()));
        }
    }
    let mut out = Poly::zero(n);
    let mut work: Vec<(Exponents, BigRational)> = p.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
    let mut steps: usize = 0;
    while let Some((e, c)) = work.pop() {
        steps += 1;
        if steps > 5_000_000 {
            return Err(RingError::Unsupported("normal-form rewriting does not terminate".into()));
        }
        if let Some(j) = (0..n).find(|&j| e[j] != 0 && q.substitutions[j].is_some()) {
            let k = e[j];
            let img = if k > 0 {
                q.substitutions[j].as_ref().unwrap().pow(k as u32)
            } else {
                q.substitution_inverses[j].as_ref().ok_or_else(|| RingError::NotInvertible(spec.names[j].clone()))?.pow((-k) as u32)
            };
            push_product(&mut work, e, j, c, &img);
            continue;
        }
        if let Some(j) = (0..n).find(|&j| e[j] < 0 && !q.laurent[j]) {
            let inv = q.rule_inverses[j].as_ref().ok_or_else(|| RingError::NotInvertible(spec.names[j].clone()))?;
            let img = inv.pow((-e[j]) as u32);
            push_product(&mut work, e, j, c, &img);
            continue;
        }
        if let Some(rule) = q.rules.iter().find(|r| e[r.var] >= r.degree) {
            let mut e2 = e;
            e2[rule.var] -= rule.degree;
            for (te, tc) in rule.tail.terms() {
                let m: Exponents = e2.iter().zip(te).map(|(a, b)| a + b).collect();
                work.push((m, &c * tc));
            }
            continue;
        }
        out.add_term(e, c);
    }
    Ok(reduce_coefficients(&spec.base, out))
}

fn push_product(work: &mut Vec<(Exponents, BigRational)>, mut e: Exponents, j: usize, c: BigRational, img: &Poly) {
    e[j] = 0;
    for (te, tc) in img.terms() {
        let m: Exponents = e.iter().zip(te).map(|(a, b)| a + b).collect();
        work.push((m, &c * tc));
    }
}

fn add_repr(spec: &RingSpec, a: &Repr, b: &Repr, negate: bool) -> Repr {
    match (&spec.kind, a, b) {
        (Kind::Quotient(_), Repr::Poly(x), Repr::Poly(y)) => {
            Repr::Poly(reduce_coefficients(&spec.base, if negate { x.sub(y) } else { x.add(y) }))
        }
        (Kind::Product(c), Repr::Product(x), Repr::Product(y)) => {
            Repr::Product(c.iter().zip(x.iter().zip(y)).map(|(r, (x, y))| add_repr(&r.0, x, y, negate)).collect())
        }
        _ => unreachable!("representation does not match ring kind"),
    }
}

fn mul_repr(spec: &RingSpec, a: &Repr, b: &Repr) -> Repr {
    match (&spec.kind, a, b) {
        (Kind::Quotient(q), Repr::Poly(x), Repr::Poly(y)) => {
            if x.is_zero() || y.is_zero() {
                return Repr::Poly(Poly::zero(spec.names.len()));
            }
            Repr::Poly(normalize_quotient(spec, q, &x.mul(y)).expect("product of normal forms normalizes"))
        }
        (Kind::Product(c), Repr::Product(x), Repr::Product(y)) => {
            Repr::Product(c.iter().zip(x.iter().zip(y)).map(|(r, (x, y))| mul_repr(&r.0, x, y)).collect())
        }
        _ => unreachable!("representation does not match ring kind"),
    }
}

fn neg_repr(spec: &RingSpec, a: &Repr) -> Repr {
    match (&spec.kind, a) {
        (Kind::Quotient(_), Repr::Poly(p)) => Repr::Poly(reduce_coefficients(&spec.base, p.neg())),
        (Kind::Product(c), Repr::Product(v)) => Repr::Product(c.iter().zip(v).map(|(r, x)| neg_repr(&r.0, x)).collect()),
        _ => unreachable!("representation does not match ring kind"),
    }
}

fn inverse_repr(spec: &RingSpec, a: &Repr) -> Option<Repr> {
    match (&spec.kind, a) {
        (Kind::Quotient(q), Repr::Poly(p)) => {
            let (e, c) = p.single_term()?;
            if !constant_is_unit(q, &spec.base, c) {
                return None;
            }
            let ok = e.iter().enumerate().all(|(j, &k)| k == 0 || q.laurent[j] || q.rule_inverses[j].is_some());
            if !ok {
                return None;
            }
            let inv = Poly::monomial(e.iter().map(|k| -k).collect(), c.recip());
            let inv = match &spec.base {
                Base::IntegersMod(m) => {
                    let ci = mod_inverse(&c.numer().mod_floor(m), m)?;
                    Poly::monomial(e.iter().map(|k| -k).collect(), BigRational::from_integer(ci))
                }
                _ => inv,
            };
            normalize_quotient(spec, q, &inv).ok().map(Repr::Poly)
        }
        (Kind::Product(c), Repr::Product(v)) => {
            let parts: Option<Vec<Repr>> = c.iter().zip(v).map(|(r, x)| inverse_repr(&r.0, x)).collect();
            parts.map(Repr::Product)
        }
        _ => None,
    }
}

fn display_repr(spec: &RingSpec, a: &Repr) -> String {
    match (&spec.kind, a) {
        (Kind::Quotient(_), Repr::Poly(p)) => p.display(&spec.names),
        (Kind::Product(c), Repr::Product(v)) => {
            let parts: Vec<String> = c.iter().zip(v).map(|(r, x)| display_repr(&r.0, x)).collect();
            format!("({})", parts.join(" | "))
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------- elements

impl RingElement {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        fn z(r: &Repr) -> bool {
            match r {
                Repr::Poly(p) => p.is_zero(),
                Repr::Product(v) => v.iter().all(z),
            }
        }
        z(&self.repr)
    }

    pub fn is_one(&self) -> bool {
        *self == self.ring.one()
    }

    /// Normal form as a polynomial in the ring's variables (quotient rings only).
    pub fn as_poly(&self) -> Option<&Poly> {
        match &self.repr {
            Repr::Poly(p) => Some(p),
            Repr::Product(_) => None,
        }
    }

    /// The value if the element is a base constant (all components equal for products).
    pub fn as_rational(&self) -> Option<BigRational> {
        match &self.repr {
            Repr::Poly(p) => p.as_constant(),
            Repr::Product(_) => {
                let parts = self.components().ok()?;
                let first = parts.first()?.as_rational()?;
                parts.iter().all(|p| p.as_rational().as_ref() == Some(&first)).then_some(first)
            }
        }
    }

    pub fn components(&self) -> Result<Vec<RingElement>> {
        let comps = self.ring.components()?;
        match &self.repr {
            Repr::Product(v) => Ok(comps.iter().zip(v).map(|(r, x)| r.wrap(x.clone())).collect()),
            Repr::Poly(_) => Err(RingError::NotAProduct),
        }
    }

    pub fn pow(&self, n: u32) -> RingElement {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn try_pow(&self, k: i64) -> Result<RingElement> {
        if k >= 0 {
            Ok(self.pow(k as u32))
        } else {
            let inv = self.try_inverse().ok_or_else(|| RingError::NotInvertible(self.to_string()))?;
            Ok(inv.pow((-k) as u32))
        }
    }

    /// Inverse of a unit whose normal form is a monomial with unit
    /// coefficient in inverted variables (componentwise for products).
    /// Returns `None` for non-units and for units not of that shape.
    pub fn try_inverse(&self) -> Option<RingElement> {
        inverse_repr(&self.ring.0, &self.repr).map(|r| self.ring.wrap(r))
    }

    pub fn is_unit(&self) -> bool {
        self.try_inverse().is_some()
    }

    /// A unit multiple of one of the ring's declared (non-monomial) units.
    pub fn is_declared_unit(&self) -> bool {
        let (Kind::Quotient(q), Some(p)) = (&self.ring.0.kind, self.as_poly()) else {
            return false;
        };
        let Some((e, c)) = p.leading_term() else {
            return false;
        };
        q.declared_units.iter().any(|d| {
            let Ok(d) = self.ring.from_poly(d) else {
                return false;
            };
            let Some(dp) = d.as_poly() else {
                return false;
            };
            match dp.leading_term() {
                Some((de, dc)) if de == e => {
                    let k = c / dc;
                    self.ring.constant(k.clone()).map(|u| u.is_unit() && &d * &u == *self).unwrap_or(false)
                }
                _ => false,
            }
        })
    }

    pub fn scale(&self, c: &BigRational) -> RingElement {
        let k = self.ring.constant(c.clone()).expect("admissible scalar");
        self * &k
    }

    /// Transport along the homomorphism that sends each variable to the
    /// variable of the same name in `target`.
    pub fn map_to(&self, target: &Ring) -> Result<RingElement> {
        if self.ring == *target {
            return Ok(self.clone());
        }
        match &self.repr {
            Repr::Poly(p) => {
                let map = self
                    .ring
                    .names()
                    .iter()
                    .map(|n| target.names().iter().position(|m| m == n).ok_or_else(|| RingError::UnknownVariable(n.clone())))
                    .collect::<Result<Vec<_>>>()?;
                target.from_poly(&p.reindex(target.nvars(), &map))
            }
            Repr::Product(_) => {
                let tc = target.components()?;
                let parts = self.components()?;
                if parts.len() != tc.len() {
                    return Err(RingError::RingMismatch);
                }
                let mapped = parts.iter().zip(tc).map(|(p, t)| p.map_to(t)).collect::<Result<Vec<_>>>()?;
                target.from_components(mapped)
            }
        }
    }

    /// Evaluate a quotient-ring element by sending variables to elements of
    /// another ring (negative powers use `try_inverse`).
    pub fn evaluate(&self, target: &Ring, images: &BTreeMap<String, RingElement>) -> Result<RingElement> {
        let p = self.as_poly().ok_or(RingError::Unsupported("evaluation of product elements".into()))?;
        let names = self.ring.names().to_vec();
        p.evaluate(
            |c| target.constant(c.clone()),
            |j, k| {
                let v = images.get(&names[j]).ok_or_else(|| RingError::UnknownVariable(names[j].clone()))?;
                v.try_pow(k as i64)
            },
            |a, b| a * b,
            |a, b| a + b,
            target.zero(),
        )
    }

    /// Weight of each term (sum of variable weights), if all terms agree.
    pub fn homogeneous_weight(&self) -> Option<i32> {
        let p = self.as_poly()?;
        let w: Vec<i32> = p.terms().map(|(e, _)| e.iter().zip(&self.ring.0.weights).map(|(k, w)| k * w).sum()).collect();
        let first = *w.first()?;
        w.iter().all(|&x| x == first).then_some(first)
    }

    pub fn is_integral(&self) -> bool {
        match &self.repr {
            Repr::Poly(p) => p.is_integral(),
            Repr::Product(_) => self.components().map(|v| v.iter().all(|c| c.is_integral())).unwrap_or(false),
        }
    }

    /// Residue of an integral constant modulo `m` (for reductions of scalars).
    pub fn constant_mod(&self, m: &BigInt) -> Option<BigInt> {
        let c = self.as_rational()?;
        let inv = mod_inverse(&c.denom().mod_floor(m), m)?;
        Some((c.numer() * inv).mod_floor(m))
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_repr(&self.ring.0, &self.repr))
    }
}

fn same_ring(a: &RingElement, b: &RingElement) {
    assert!(a.ring == b.ring, "ring mismatch in element arithmetic");
}

impl std::ops::Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        same_ring(self, rhs);
        self.ring.wrap(add_repr(&self.ring.0, &self.repr, &rhs.repr, false))
    }
}

impl std::ops::Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        same_ring(self, rhs);
        self.ring.wrap(add_repr(&self.ring.0, &self.repr, &rhs.repr, true))
    }
}

impl std::ops::Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        same_ring(self, rhs);
        self.ring.wrap(mul_repr(&self.ring.0, &self.repr, &rhs.repr))
    }
}

impl std::ops::Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        self.ring.wrap(neg_repr(&self.ring.0, &self.repr))
    }
}

macro_rules! owned_ops {
    ($tr:ident, $f:ident) => {
        impl std::ops::$tr for RingElement {
            type Output = RingElement;
            fn $f(self, rhs: RingElement) -> RingElement {
                std::ops::$tr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&RingElement> for RingElement {
            type Output = RingElement;
            fn $f(self, rhs: &RingElement) -> RingElement {
                std::ops::$tr::$f(&self, rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl std::ops::Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        -&self
    }
}

/// A complete family of orthogonal idempotents.
#[derive(Clone, Debug)]
pub struct IdempotentFamily {
    pub ring: Ring,
    pub elements: Vec<RingElement>,
}

impl IdempotentFamily {
    pub fn is_complete_orthogonal(&self) -> bool {
        let mut sum = self.ring.zero();
        for (i, a) in self.elements.iter().enumerate() {
            sum = &sum + a;
            for (j, b) in self.elements.iter().enumerate() {
                let p = a * b;
                let ok = if i == j { p == *a } else { p.is_zero() };
                if !ok {
                    return false;
                }
            }
        }
        sum.is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(doc: RingDoc) -> Ring {
        Ring::from_doc(&doc).unwrap()
    }

    #[test]
    fn monic_reduction() {
        let r = ring(RingDoc::new("Z").var("u").relation("u*(u+2)"));
        assert_eq!(r.parse("u^2").unwrap().to_string(), "-2*u");
        assert!(!r.is_product());
    }

    #[test]
    fn laurent_rule_ring() {
        let r = ring(RingDoc::new("Z").var("q").var("s").invert("q").relation("s^4 - q"));
        assert_eq!(r.parse("s^5").unwrap().to_string(), "q*s");
        let s = r.var("s").unwrap();
        let inv = s.try_inverse().unwrap();
        assert!((&s * &inv).is_one());
        assert_eq!(inv.to_string(), "q^-1*s^3");
    }

    #[test]
    fn a_ring_splits_into_two_factors() {
        let a = ring(RingDoc::new("Z").var("u").var("w").relation("u*(u+2)*(1-u*w)"));
        assert!(a.is_product());
        assert!(a.parse("u*(u+2)*(1-u*w)").unwrap().is_zero());
        assert!(!a.parse("u*(u+2)").unwrap().is_zero());
        let parts = a.parse("w").unwrap().components().unwrap();
        assert_eq!(parts[0].to_string(), "w");
        assert_eq!(parts[1].to_string(), "u^-1");
    }

    #[test]
    fn linear_relation_in_inverted_variable_inverts_constant() {
        let r = ring(RingDoc::new("Z").var("u").var("w").invert("u").relation("u+2"));
        assert_eq!(r.parse("u").unwrap().to_string(), "-2");
        assert_eq!(r.parse("1/u").unwrap().to_string(), "-1/2");
    }

    #[test]
    fn errors_are_reported() {
        let r = ring(RingDoc::new("Z").var("u"));
        assert!(matches!(r.parse("x"), Err(RingError::UnknownVariable(_))));
        assert!(matches!(r.parse("1/u"), Err(RingError::NotInvertible(_))));
        assert!(matches!(r.parse("1/2"), Err(RingError::NotInvertible(_))));
        let six = ring(RingDoc::new("Z").var("g2").invert("6"));
        assert_eq!(six.parse("g2/6").unwrap().to_string(), "1/6*g2");
        assert!(six.parse("1/5").is_err());
    }

    #[test]
    fn zmod_base_reduces() {
        let r = ring(RingDoc::new("Zmod:25").var("x"));
        assert_eq!(r.parse("27*x + 1/2").unwrap().to_string(), "2*x + 13");
        assert!(Base::parse("Zmod:6").is_err());
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let r = Ring::from_json(r#"{"base":"Z","vars":[{"name":"u","weight":2}],"relations":["u^2+2*u"]}"#).unwrap();
        assert_eq!(r.weight("u"), Some(2));
        assert!(Ring::from_json(r#"{"base":"Z","bogus":1}"#).is_err());
    }

    #[test]
    fn idempotents_of_products() {
        let doc = RingDoc::new("Z")
            .component(RingDoc::new("Z").var("q").var("s").invert("q").relation("s^2-1"))
            .component(RingDoc::new("Z").var("q").var("s").invert("q").relation("s^2-q"));
        let r = ring(doc);
        let fam = r.idempotents().unwrap();
        assert_eq!(fam.elements.len(), 2);
        assert!(fam.is_complete_orthogonal());
        let single = ring(RingDoc::new("Z").var("x"));
        assert_eq!(single.idempotents().unwrap().elements.len(), 1);
    }
}
