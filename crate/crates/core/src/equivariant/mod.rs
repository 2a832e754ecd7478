//! Equivariant formal group laws for cyclic p-groups, in split form.
//!
//! The coefficient ring is a finite product of blocks. Over one block the
//! completed ring of functions on the group is a product of power series
//! rings `R[[y]]`, one per connected component. Components are indexed by
//! `Z/n` and the group law is `(k1, y1) + (k2, y2) = (k1 + k2, F(y1, y2))`
//! for a one-dimensional law `F` over the block. A character `L` of
//! `Z/p^r` gives a point of the group: a component and a value of `y`.
//!
//! Elements of the completed ring, and of its completed tensor square and
//! cube, are [`Section`]s: one truncated series per block and per tuple of
//! components.

pub mod crt;
pub mod strickland;
pub mod tate;
pub mod z2;

use crate::expr::{self, Algebra, ParseError};
use crate::fgl::{FglError, FormalGroupLaw};
use crate::ring::{Ring, RingElement, RingError};
use crate::series::{Precision, SeriesError, TruncatedSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivariantError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Fgl(#[from] FglError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` is not invertible")]
    NotInvertible(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("level r = {r} exceeds the group-ring exponent n = {n}")]
    LevelTooLarge { r: u32, n: u32 },
    #[error("only level r = 1 is supported here, got r = {0}")]
    UnsupportedLevel(u32),
    #[error("alpha_{index} = {value} does not have a unit constant term")]
    NonUnitAlpha { index: usize, value: String },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("cap {got} is too small (need at least {needed})")]
    CapTooSmall { needed: u32, got: u32 },
    #[error("{0} reaches the cap, so evaluating it at a non-nilpotent value is not exact")]
    NotPolynomial(String),
    #[error("the values at points {0} and {1} differ by {2}, which is not a unit")]
    NotSeparated(usize, usize, String),
    #[error("translation needs a nilpotent coordinate or a polynomial law with a nonnegative multiple")]
    TranslateUnsupported,
}

pub type Result<T> = std::result::Result<T, EquivariantError>;

const SLOT_VARS: [&str; 3] = ["y1", "y2", "y3"];

/// The point of the group attached to a character: component and `y` value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub component: usize,
    pub value: RingElement,
}

/// One block of a split model.
#[derive(Clone, Debug)]
pub struct Block {
    pub label: String,
    pub law: FormalGroupLaw,
    /// The coordinate on each component, a polynomial in `y`.
    pub coordinate: Vec<TruncatedSeries>,
    /// Points indexed by the characters `0..p^r`.
    pub points: Vec<Point>,
}

impl Block {
    pub fn ring(&self) -> &Ring {
        self.law.ring()
    }

    pub fn components(&self) -> usize {
        self.coordinate.len()
    }

    fn y(&self) -> TruncatedSeries {
        TruncatedSeries::variable(self.ring(), &["y"], Precision::total(1, self.law.cap()), 0)
    }

    fn slot_var(&self, arity: usize, i: usize) -> TruncatedSeries {
        TruncatedSeries::variable(self.ring(), &SLOT_VARS[..arity], Precision::total(arity, self.law.cap()), i)
    }

    fn constant(&self, arity: usize, c: RingElement) -> TruncatedSeries {
        let vars: &[&str] = if arity == 1 { &["y"] } else { &SLOT_VARS[..arity] };
        TruncatedSeries::constant(self.ring(), vars, Precision::total(arity, self.law.cap()), c)
    }

    /// `F(a, b)` for series `a, b` in the same variables; `b` may have a
    /// non-nilpotent constant only for polynomial laws.
    fn add_points(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        if a.constant_term().is_zero() && b.constant_term().is_zero() {
            return Ok(self.law.series().compose(&[a.clone(), b.clone()])?);
        }
        if !self.law.is_polynomial() {
            return Err(EquivariantError::TranslateUnsupported);
        }
        Ok(self.law.series().substitute_polynomial(&[a.clone(), b.clone()])?)
    }
}

/// Substitute into `outer`, exactly: by composition when the inner series
/// are nilpotent, otherwise only if `outer` stops short of its cap.
fn substitute_exact(outer: &TruncatedSeries, subs: &[TruncatedSeries], what: &str) -> Result<TruncatedSeries> {
    if subs.iter().all(|s| s.constant_term().is_zero()) {
        return Ok(outer.compose(subs)?);
    }
    let cap = outer.precision().order_bound().unwrap_or(u32::MAX);
    if outer.max_degree().is_some_and(|d| d + 1 >= cap) {
        return Err(EquivariantError::NotPolynomial(what.to_string()));
    }
    Ok(outer.substitute_polynomial(subs)?)
}

/// An element of the completed ring of functions (`arity = 1`) or of its
/// completed tensor powers (`arity = 2, 3`). `parts[b][k]` is the series on
/// block `b` and component tuple `k`, flattened in base `n_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub arity: usize,
    pub parts: Vec<Vec<TruncatedSeries>>,
}

impl Section {
    fn zip_with(&self, o: &Section, f: impl Fn(&TruncatedSeries, &TruncatedSeries) -> TruncatedSeries) -> Section {
        assert_eq!(self.arity, o.arity, "sections of different arity");
        Section {
            arity: self.arity,
            parts: self.parts.iter().zip(&o.parts).map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect()).collect(),
        }
    }

    fn map(&self, f: impl Fn(&TruncatedSeries) -> TruncatedSeries) -> Section {
        Section { arity: self.arity, parts: self.parts.iter().map(|a| a.iter().map(&f).collect()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().flatten().all(TruncatedSeries::is_zero)
    }

    pub fn pow(&self, k: u32) -> Section {
        self.map(|s| s.pow(k))
    }

    /// Multiplicative inverse, if every component series is a unit.
    pub fn inverse(&self) -> Result<Section> {
        let mut parts = Vec::with_capacity(self.parts.len());
        for block in &self.parts {
            let mut out = Vec::with_capacity(block.len());
            for s in block {
                out.push(s.inverse().map_err(|_| EquivariantError::NotInvertible(s.display()))?);
            }
            parts.push(out);
        }
        Ok(Section { arity: self.arity, parts })
    }

    /// Human-readable listing of the nonzero parts.
    pub fn display(&self, labels: &[String]) -> String {
        let mut lines = Vec::new();
        for (b, block) in self.parts.iter().enumerate() {
            let n = component_count(block.len(), self.arity);
            for (idx, s) in block.iter().enumerate() {
                if s.is_zero() {
                    continue;
                }
                let tuple: Vec<String> = unflatten(idx, n, self.arity).iter().map(|k| k.to_string()).collect();
                lines.push(format!("{}[{}]: {}", labels[b], tuple.join(","), s.display()));
            }
        }
        if lines.is_empty() {
            "0".into()
        } else {
            lines.join("; ")
        }
    }
}

impl std::ops::Add for &Section {
    type Output = Section;
    fn add(self, o: &Section) -> Section {
        self.zip_with(o, |a, b| a + b)
    }
}

impl std::ops::Sub for &Section {
    type Output = Section;
    fn sub(self, o: &Section) -> Section {
        self.zip_with(o, |a, b| a - b)
    }
}

impl std::ops::Mul for &Section {
    type Output = Section;
    fn mul(self, o: &Section) -> Section {
        self.zip_with(o, |a, b| a * b)
    }
}

impl std::ops::Neg for &Section {
    type Output = Section;
    fn neg(self) -> Section {
        self.map(|a| -a)
    }
}

fn component_count(len: usize, arity: usize) -> usize {
    (1..=len).find(|n| n.pow(arity as u32) == len).expect("tuple count is a perfect power")
}

fn unflatten(mut idx: usize, n: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in (0..arity).rev() {
        out[slot] = idx % n;
        idx /= n;
    }
    out
}

fn flatten(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, k| acc * n + k)
}

/// How a translate is recovered from the coproduct by evaluating the second
/// tensor factor at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Evaluating at `-M` gives `x_{L-M}`.
    Literal,
    /// Evaluating at `M` gives `x_{L+M}`.
    Covariant,
}

/// A split equivariant formal group law for `Z/p^r`.
#[derive(Clone, Debug)]
pub struct SplitEfgl {
    pub name: String,
    pub p: u64,
    pub r: u32,
    pub cap: u32,
    pub blocks: Vec<Block>,
    /// Extra named elements understood by expressions (idempotents,
    /// component indicators, group-ring coordinates).
    pub vocabulary: BTreeMap<String, Section>,
}

impl SplitEfgl {
    pub fn new(name: &str, p: u64, r: u32, cap: u32, blocks: Vec<Block>) -> Result<Self> {
        let order = p.checked_pow(r).ok_or_else(|| EquivariantError::InvalidModel("group order overflows".into()))?;
        for b in &blocks {
            if b.points.len() as u64 != order {
                return Err(EquivariantError::InvalidModel(format!("block {} has {} points, expected {order}", b.label, b.points.len())));
            }
            if b.coordinate.is_empty() || b.points.iter().any(|pt| pt.component >= b.components()) {
                return Err(EquivariantError::InvalidModel(format!("block {} has inconsistent components", b.label)));
            }
            if b.law.cap() != cap {
                return Err(EquivariantError::InvalidModel(format!("block {} has cap {}, expected {cap}", b.label, b.law.cap())));
            }
            if b.points[0].component != 0 || !b.points[0].value.is_zero() {
                return Err(EquivariantError::InvalidModel(format!("block {}: the trivial character must sit at the origin", b.label)));
            }
            if !b.coordinate[0].constant_term().is_zero() {
                return Err(EquivariantError::InvalidModel(format!("block {}: the coordinate must vanish at the origin", b.label)));
            }
        }
        Ok(SplitEfgl { name: name.to_string(), p, r, cap, blocks, vocabulary: BTreeMap::new() })
    }

    pub fn order(&self) -> usize {
        self.p.pow(self.r) as usize
    }

    pub fn labels(&self) -> Vec<String> {
        self.blocks.iter().map(|b| b.label.clone()).collect()
    }

    fn character(&self, l: i64) -> usize {
        l.rem_euclid(self.order() as i64) as usize
    }

    /// The section with constant value `c[b]` on block `b`.
    pub fn constant(&self, arity: usize, c: &[RingElement]) -> Section {
        Section {
            arity,
            parts: self.blocks.iter().zip(c).map(|(b, c)| vec![b.constant(arity, c.clone()); b.components().pow(arity as u32)]).collect(),
        }
    }

    pub fn integer(&self, arity: usize, n: i64) -> Section {
        let c: Vec<RingElement> = self.blocks.iter().map(|b| b.ring().int(n)).collect();
        self.constant(arity, &c)
    }

    /// Section from per-block, per-component series in `y`.
    pub fn from_parts(&self, parts: Vec<Vec<TruncatedSeries>>) -> Section {
        Section { arity: 1, parts }
    }

    pub fn coordinate(&self) -> Section {
        self.from_parts(self.blocks.iter().map(|b| b.coordinate.clone()).collect())
    }

    /// The indicator of block `b`.
    pub fn block_indicator(&self, b: usize) -> Section {
        let c: Vec<RingElement> =
            self.blocks.iter().enumerate().map(|(i, blk)| if i == b { blk.ring().one() } else { blk.ring().zero() }).collect();
        self.constant(1, &c)
    }

    /// The translate `x_L(a) = x(a + L)`.
    pub fn translate(&self, l: i64) -> Result<Section> {
        let l = self.character(l);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let pt = &b.points[l];
            let y = b.y();
            let shifted = if pt.value.is_zero() {
                y.clone()
            } else {
                let v = b.constant(1, pt.value.clone());
                b.add_points(&y, &v)?
            };
            let n = b.components();
            let mut comps = Vec::with_capacity(n);
            for k in 0..n {
                let x = &b.coordinate[(k + pt.component) % n];
                comps.push(substitute_exact(x, std::slice::from_ref(&shifted), "coordinate")?);
            }
            parts.push(comps);
        }
        Ok(self.from_parts(parts))
    }

    /// Euler classes `u_L = x_L(0)`, one value per block.
    pub fn euler_class(&self, l: i64) -> Result<Vec<RingElement>> {
        let t = self.translate(l)?;
        Ok(t.parts.iter().map(|b| b[0].constant_term()).collect())
    }

    /// `g ⊗ 1` (`slot = 0`) or `1 ⊗ g` (`slot = 1`) in arity `arity`.
    pub fn embed(&self, g: &Section, slot: usize, arity: usize) -> Result<Section> {
        assert_eq!(g.arity, 1);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, gb) in self.blocks.iter().zip(&g.parts) {
            let n = b.components();
            let var = b.slot_var(arity, slot);
            let mut out = Vec::with_capacity(n.pow(arity as u32));
            for idx in 0..n.pow(arity as u32) {
                let k = unflatten(idx, n, arity)[slot];
                out.push(gb[k].compose(std::slice::from_ref(&var))?);
            }
            parts.push(out);
        }
        Ok(Section { arity, parts })
    }

    /// The coproduct `g(a + b)`.
    pub fn coproduct(&self, g: &Section) -> Result<Section> {
        assert_eq!(g.arity, 1);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, gb) in self.blocks.iter().zip(&g.parts) {
            let n = b.components();
            let sum = b.add_points(&b.slot_var(2, 0), &b.slot_var(2, 1))?;
            let mut out = Vec::with_capacity(n * n);
            for k1 in 0..n {
                for k2 in 0..n {
                    out.push(gb[(k1 + k2) % n].compose(std::slice::from_ref(&sum))?);
                }
            }
            parts.push(out);
        }
        Ok(Section { arity: 2, parts })
    }

    /// `(ψ ⊗ 1)(t)` for a tensor `t` (`left = true`) or `(1 ⊗ ψ)(t)`.
    pub fn coproduct_on_tensor(&self, t: &Section, left: bool) -> Result<Section> {
        assert_eq!(t.arity, 2);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, tb) in self.blocks.iter().zip(&t.parts) {
            let n = b.components();
            let v: Vec<TruncatedSeries> = (0..3).map(|i| b.slot_var(3, i)).collect();
            let subs = if left { [b.add_points(&v[0], &v[1])?, v[2].clone()] } else { [v[0].clone(), b.add_points(&v[1], &v[2])?] };
            let mut out = Vec::with_capacity(n * n * n);
            for idx in 0..n * n * n {
                let k = unflatten(idx, n, 3);
                let pair = if left { [(k[0] + k[1]) % n, k[2]] } else { [k[0], (k[1] + k[2]) % n] };
                out.push(tb[flatten(&pair, n)].compose(&subs)?);
            }
            parts.push(out);
        }
        Ok(Section { arity: 3, parts })
    }

    /// Exchange the two tensor factors.
    pub fn swap(&self, t: &Section) -> Result<Section> {
        assert_eq!(t.arity, 2);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, tb) in self.blocks.iter().zip(&t.parts) {
            let n = b.components();
            let subs = [b.slot_var(2, 1), b.slot_var(2, 0)];
            let mut out = Vec::with_capacity(n * n);
            for k1 in 0..n {
                for k2 in 0..n {
                    out.push(tb[k2 * n + k1].compose(&subs)?);
                }
            }
            parts.push(out);
        }
        Ok(Section { arity: 2, parts })
    }

    /// Evaluate one tensor factor of `t` at the point of character `l`.
    pub fn evaluate_slot(&self, t: &Section, slot: usize, l: i64) -> Result<Section> {
        assert_eq!(t.arity, 2);
        let l = self.character(l);
        let mut parts = Vec::with_capacity(self.blocks.len());
        for (b, tb) in self.blocks.iter().zip(&t.parts) {
            let n = b.components();
            let pt = &b.points[l];
            let y = b.y();
            let v = b.constant(1, pt.value.clone());
            let subs = if slot == 0 { [v, y] } else { [y, v] };
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let idx = if slot == 0 { pt.component * n + k } else { k * n + pt.component };
                out.push(substitute_exact(&tb[idx], &subs, "tensor")?);
            }
            parts.push(out);
        }
        Ok(Section { arity: 1, parts })
    }

    /// The counit: the value at the origin, one ring element per block.
    pub fn counit(&self, g: &Section) -> Vec<RingElement> {
        g.parts.iter().map(|b| b[0].constant_term()).collect()
    }

    /// Parse and evaluate an expression in the completed ring (`arity = 1`)
    /// or its tensor square (`arity = 2`, names suffixed `_1` or `_2`).
    pub fn eval(&self, input: &str, arity: usize) -> Result<Section> {
        let e = expr::parse(input)?;
        e.eval(&SectionAlgebra { model: self, arity })
    }

    fn named(&self, name: &str) -> Result<Section> {
        if let Some(s) = self.vocabulary.get(name) {
            return Ok(s.clone());
        }
        match name {
            "x" => return Ok(self.coordinate()),
            "x_alpha" => return self.translate(1),
            "y" => return Ok(self.from_parts(self.blocks.iter().map(|b| vec![b.y(); b.components()]).collect())),
            _ => {}
        }
        if let Some(l) = name.strip_prefix("x_a").and_then(|s| s.parse::<i64>().ok()) {
            return self.translate(l);
        }
        let c: std::result::Result<Vec<RingElement>, RingError> = self.blocks.iter().map(|b| b.ring().var(name)).collect();
        c.map(|c| self.constant(1, &c)).map_err(|_| EquivariantError::UnknownName(name.to_string()))
    }

    /// Check the axioms of an equivariant formal group law on the model.
    pub fn axiom_report(&self, orientation: Orientation) -> Result<AxiomReport> {
        let mut checks = Vec::new();
        let labels = self.labels();
        for l in 0..self.order() as i64 {
            checks.push(self.quotient_check(l)?);
        }
        checks.push(self.product_of_translates_check()?);
        let x = self.coordinate();
        let psi = self.coproduct(&x)?;
        let diff = &self.coproduct_on_tensor(&psi, true)? - &self.coproduct_on_tensor(&psi, false)?;
        checks.push(Check::from_residual("coassociativity", &diff, &labels));
        let diff = &psi - &self.swap(&psi)?;
        checks.push(Check::from_residual("cocommutativity", &diff, &labels));
        let left = &self.evaluate_slot(&psi, 0, 0)? - &x;
        let right = &self.evaluate_slot(&psi, 1, 0)? - &x;
        checks.push(Check::from_residual("counit (left)", &left, &labels));
        checks.push(Check::from_residual("counit (right)", &right, &labels));
        for l in 0..self.order() as i64 {
            let psi_l = self.coproduct(&self.translate(l)?)?;
            for m in 0..self.order() as i64 {
                let (at, expected) = match orientation {
                    Orientation::Literal => (-m, l - m),
                    Orientation::Covariant => (m, l + m),
                };
                let diff = &self.evaluate_slot(&psi_l, 1, at)? - &self.translate(expected)?;
                checks.push(Check::from_residual(&format!("translate L={l} M={m}"), &diff, &labels));
            }
        }
        Ok(AxiomReport { model: self.name.clone(), cap: self.cap, orientation, checks })
    }

    /// `x_L` generates the ideal of the point `-L`: on each block it has a
    /// simple zero on exactly one component and is a unit elsewhere.
    fn quotient_check(&self, l: i64) -> Result<Check> {
        let xl = self.translate(l)?;
        let root = self.character(-l);
        let mut problems = Vec::new();
        for (b, parts) in self.blocks.iter().zip(&xl.parts) {
            let pt = &b.points[root];
            for (k, s) in parts.iter().enumerate() {
                if k == pt.component {
                    let h = &b.y() + &b.constant(1, pt.value.clone());
                    let local = substitute_exact(s, &[h], "translate")?;
                    let c0 = local.constant_term();
                    let c1 = local.coeff(&[1]);
                    if !c0.is_zero() || !c1.is_unit() {
                        problems.push(format!(
                            "{}[{k}]: expected a simple zero at y = {}, local expansion {}",
                            b.label,
                            pt.value,
                            local.display()
                        ));
                    }
                } else if !s.constant_term().is_unit() {
                    problems.push(format!("{}[{k}]: constant term {} is not a unit", b.label, s.constant_term()));
                }
            }
        }
        Ok(Check::new(&format!("quotient by x_{l}"), problems))
    }

    /// The product of all translates vanishes to first order at the origin
    /// of each component carrying a point, with first-order coefficient a
    /// unit or the product of the nonzero Euler classes, and is a unit on
    /// the remaining components.
    fn product_of_translates_check(&self) -> Result<Check> {
        let mut prod = self.integer(1, 1);
        for l in 0..self.order() as i64 {
            prod = &prod * &self.translate(l)?;
        }
        let mut problems = Vec::new();
        for (bi, (b, parts)) in self.blocks.iter().zip(&prod.parts).enumerate() {
            let mut euler = b.ring().one();
            for l in 1..self.order() as i64 {
                euler = &euler * &self.euler_class(l)?[bi];
            }
            for (k, s) in parts.iter().enumerate() {
                let g0 = s.coeff(&[1]);
                if !b.points.iter().any(|pt| pt.component == k) {
                    if !s.constant_term().is_unit() {
                        problems.push(format!("{}[{k}]: product {} is not a unit away from the points", b.label, s.constant_term()));
                    }
                } else if !s.constant_term().is_zero() {
                    problems.push(format!("{}[{k}]: product does not vanish at y = 0", b.label));
                } else if !(g0.is_unit() || (k == 0 && g0 == euler)) {
                    problems.push(format!("{}[{k}]: first-order coefficient {g0} is neither a unit nor the Euler product", b.label));
                }
            }
        }
        Ok(Check::new("product of translates", problems))
    }

    /// Compare the coproduct of `x` with the multiplicative formula and
    /// compute `[p^r] u_L` for every character.
    pub fn multiplicativity(&self) -> Result<MultiplicativityReport> {
        let x = self.coordinate();
        let psi = self.coproduct(&x)?;
        let x1 = self.embed(&x, 0, 2)?;
        let x2 = self.embed(&x, 1, 2)?;
        let formula = &(&(&x1 * &x2) + &x1) + &x2;
        let obstruction = &psi - &formula;
        let labels = self.labels();
        let mut euler_multiples = Vec::new();
        let mut torsion_vanishes = true;
        for l in 0..self.order() as i64 {
            let u = self.euler_class(l)?;
            let mut values = Vec::new();
            for (b, u) in self.blocks.iter().zip(&u) {
                let m = b.law.multiple_of(self.order() as u64, u).ok_or(EquivariantError::TranslateUnsupported)?;
                torsion_vanishes &= m.is_zero();
                values.push(m.to_string());
            }
            euler_multiples.push(EulerMultiple { character: l, values });
        }
        Ok(MultiplicativityReport {
            model: self.name.clone(),
            multiplicative: obstruction.is_zero(),
            obstruction_text: obstruction.display(&labels),
            obstruction,
            euler_multiples,
            torsion_vanishes,
        })
    }

    /// The same model restricted to the listed blocks.
    pub fn restrict(&self, blocks: &[usize], name: &str) -> Result<SplitEfgl> {
        let chosen = blocks.iter().map(|&b| self.blocks[b].clone()).collect();
        let mut out = SplitEfgl::new(name, self.p, self.r, self.cap, chosen)?;
        for (k, v) in &self.vocabulary {
            let parts = blocks.iter().map(|&b| v.parts[b].clone()).collect();
            out.vocabulary.insert(k.clone(), Section { arity: v.arity, parts });
        }
        Ok(out)
    }
}

struct SectionAlgebra<'a> {
    model: &'a SplitEfgl,
    arity: usize,
}

impl Algebra for SectionAlgebra<'_> {
    type Value = Section;
    type Error = EquivariantError;

    fn number(&self, n: &BigInt) -> Result<Section> {
        let c: Result<Vec<RingElement>> =
            self.model.blocks.iter().map(|b| Ok(b.ring().constant(BigRational::from_integer(n.clone()))?)).collect();
        Ok(self.model.constant(self.arity, &c?))
    }

    fn variable(&self, name: &str) -> Result<Section> {
        if self.arity == 1 {
            return self.model.named(name);
        }
        let (base, slot) = match (name.strip_suffix("_1"), name.strip_suffix("_2")) {
            (Some(b), _) => (b, 0),
            (_, Some(b)) => (b, 1),
            _ => {
                // Unsuffixed names must be scalars, identical in both slots.
                let c: std::result::Result<Vec<RingElement>, RingError> = self.model.blocks.iter().map(|b| b.ring().var(name)).collect();
                return c.map(|c| self.model.constant(2, &c)).map_err(|_| EquivariantError::UnknownName(name.to_string()));
            }
        };
        self.model.embed(&self.model.named(base)?, slot, 2)
    }

    fn add(&self, a: &Section, b: &Section) -> Section {
        a + b
    }

    fn sub(&self, a: &Section, b: &Section) -> Section {
        a - b
    }

    fn mul(&self, a: &Section, b: &Section) -> Section {
        a * b
    }

    fn neg(&self, a: &Section) -> Section {
        -a
    }

    fn div(&self, a: &Section, b: &Section) -> Result<Section> {
        Ok(a * &b.inverse()?)
    }

    fn pow(&self, a: &Section, k: i64) -> Result<Section> {
        let base = if k < 0 { a.inverse()? } else { a.clone() };
        Ok(base.pow(k.unsigned_abs() as u32))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Empty on success, otherwise the failing parts.
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, problems: Vec<String>) -> Self {
        Check { name: name.to_string(), passed: problems.is_empty(), detail: problems.join("; ") }
    }

    fn from_residual(name: &str, residual: &Section, labels: &[String]) -> Self {
        if residual.is_zero() {
            Check::new(name, vec![])
        } else {
            Check::new(name, vec![format!("residual {}", residual.display(labels))])
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub model: String,
    pub cap: u32,
    pub orientation: Orientation,
    pub checks: Vec<Check>,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerMultiple {
    pub character: i64,
    /// `[p^r] u_L` on each block.
    pub values: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicativityReport {
    pub model: String,
    pub multiplicative: bool,
    pub obstruction_text: String,
    #[serde(skip)]
    pub obstruction: Section,
    pub euler_multiples: Vec<EulerMultiple>,
    pub torsion_vanishes: bool,
}

/// The series `z_a = F(z, [a] x)` for each `a` in `alphas`. The multiple
/// `[a] x` must be computable exactly: either `x` has zero constant term,
/// or `F` is a polynomial law and `a >= 0`.
pub fn euler_translates(law: &FormalGroupLaw, x: &TruncatedSeries, alphas: &[i64]) -> Result<Vec<TruncatedSeries>> {
    if x.vars().len() != 1 {
        return Err(SeriesError::NotUnivariate.into());
    }
    let ring = law.ring();
    let var = x.vars()[0].clone();
    let prec = x.precision().clone();
    let z = TruncatedSeries::variable(ring, &[&var], prec.clone(), 0);
    let nilpotent = x.constant_term().is_zero();
    let mut out = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let multiple = if nilpotent {
            law.n_series(a)?.compose(std::slice::from_ref(x))?
        } else if law.is_polynomial() && a >= 0 {
            let mut acc = TruncatedSeries::zero(ring, &[&var], prec.clone());
            for _ in 0..a {
                acc = law.series().substitute_polynomial(&[x.clone(), acc])?;
            }
            acc
        } else {
            return Err(EquivariantError::TranslateUnsupported);
        };
        let sum = if multiple.constant_term().is_zero() {
            law.series().compose(&[z.clone(), multiple])?
        } else if law.is_polynomial() {
            law.series().substitute_polynomial(&[z.clone(), multiple])?
        } else {
            return Err(EquivariantError::TranslateUnsupported);
        };
        out.push(sum);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{fgl_additive, fgl_honda, fgl_multiplicative};
    use crate::ring::RingDoc;

    fn z() -> Ring {
        Ring::from_doc(&RingDoc::new("Z")).unwrap()
    }

    /// One block `Z[[y]] x Z`, both characters at the origin, the second
    /// component carrying the constant `c`.
    fn two_component(cap: u32, c: i64) -> SplitEfgl {
        let r = z();
        let law = fgl_multiplicative(&r, cap);
        let prec = Precision::total(1, cap);
        let y = TruncatedSeries::variable(&r, &["y"], prec.clone(), 0);
        let points = vec![Point { component: 0, value: r.zero() }; 2];
        let coordinate = vec![y, TruncatedSeries::constant(&r, &["y"], prec, r.int(c))];
        let block = Block { label: "e".into(), law, coordinate, points };
        SplitEfgl::new("two-component", 2, 1, cap, vec![block]).unwrap()
    }

    #[test]
    fn flatten_roundtrip() {
        for idx in 0..27 {
            assert_eq!(flatten(&unflatten(idx, 3, 3), 3), idx);
        }
    }

    #[test]
    fn coproduct_of_coordinate_is_the_law() {
        let m = two_component(5, -1);
        let psi = m.coproduct(&m.coordinate()).unwrap();
        assert_eq!(psi.parts[0][0].display(), "y2 + y1 + y1*y2");
        // components 0 + 1 land on component 1, where x = -1.
        assert_eq!(psi.parts[0][1].display(), "-1");
        let e = m.eval("x_1*x_2 + x_1 + x_2", 2).unwrap();
        assert_eq!(e.parts[0][0], psi.parts[0][0]);
    }

    #[test]
    fn unit_constant_is_required_off_the_zero() {
        let ok = two_component(5, -1).axiom_report(Orientation::Covariant).unwrap();
        assert!(ok.passes(), "{:?}", ok.failures());
        let rep = two_component(5, 2).axiom_report(Orientation::Covariant).unwrap();
        let bad = rep.failures();
        assert!(bad.iter().any(|c| c.name == "quotient by x_0" && c.detail.contains("constant term 2")));
        assert!(rep.checks.iter().filter(|c| c.name.starts_with("co")).all(|c| c.passed));
    }

    #[test]
    fn division_by_non_unit_is_an_error() {
        let m = two_component(5, -1);
        assert!(matches!(m.eval("1/x", 1), Err(EquivariantError::NotInvertible(_))));
        assert!(m.eval("1/(1 - x - x^2)", 1).is_ok());
        assert!(matches!(m.eval("bogus", 1), Err(EquivariantError::UnknownName(_))));
    }

    #[test]
    fn euler_translates_of_nilpotent_and_polynomial() {
        let r = z();
        let cap = 6;
        let x = TruncatedSeries::variable(&r, &["z"], Precision::total(1, cap), 0);
        let f = fgl_additive(&r, cap);
        let t = euler_translates(&f, &x, &[0, 2, -1]).unwrap();
        assert_eq!(t[0].display(), "z");
        assert_eq!(t[1].display(), "3*z");
        assert_eq!(t[2].display(), "0");
        let one = TruncatedSeries::constant(&r, &["z"], Precision::total(1, cap), r.one());
        let m = fgl_multiplicative(&r, cap);
        let t = euler_translates(&m, &one, &[2]).unwrap();
        // z + 3 + 3z
        assert_eq!(t[0].display(), "3 + 4*z");
        assert!(matches!(euler_translates(&m, &one, &[-1]), Err(EquivariantError::TranslateUnsupported)));
        let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
        let h = fgl_honda(2, 1, cap).unwrap().map_to(&q).unwrap();
        let oneq = TruncatedSeries::constant(&q, &["z"], Precision::total(1, cap), q.one());
        assert!(matches!(euler_translates(&h, &oneq, &[1]), Err(EquivariantError::TranslateUnsupported)));
    }
}
