//! The Tate-curve level and group rings and the split model they induce.
//!
//! Level ring: `prod_{i < p^r} Z[q^±][s]/(s^{p^r} - q^i)` with block
//! idempotents `e_i`. Group ring of `Z/p^n` over the Tate curve:
//! `prod_{i < p^n} Z[q^±][t]/(t^{p^n} - q^i)` with idempotents `f_i`; its
//! coproduct multiplies `t` and divides by `q` once per carry.

use super::{Block, EquivariantError, Point, Result, Section, SplitEfgl};
use crate::expr::{self, Algebra};
use crate::fgl::{fgl_multiplicative, is_prime};
use crate::ring::{Ring, RingDoc, RingElement, RingError};
use crate::series::{Precision, TruncatedSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

fn root_ring(var: &str, degree: u64, i: u64) -> RingDoc {
    RingDoc::new("Z").var("q").var(var).invert("q").relation(&format!("{var}^{degree} - q^{i}"))
}

fn tuple_ring(m: u64, tuple: &[u64]) -> RingDoc {
    let mut doc = RingDoc::new("Z").var("q");
    for j in 0..tuple.len() {
        doc = doc.var(&format!("t_{}", j + 1));
    }
    doc = doc.invert("q");
    for (j, i) in tuple.iter().enumerate() {
        doc = doc.relation(&format!("t_{}^{m} - q^{i}", j + 1));
    }
    doc
}

fn tuples(m: u64, arity: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out.into_iter().flat_map(|t| (0..m).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

/// The level ring and the Tate group ring for `Z/p^r` inside `Z/p^n`.
#[derive(Clone, Debug)]
pub struct TateGroupAlgebra {
    pub p: u64,
    pub r: u32,
    pub n: u32,
    pub level: Ring,
    pub group: Ring,
    base: Ring,
    tensors: Vec<Ring>,
}

/// Build the level and group rings; requires `n >= r >= 1`.
pub fn tate_group_algebra(p: u64, r: u32, n: u32) -> Result<TateGroupAlgebra> {
    if !is_prime(p) {
        return Err(EquivariantError::NotPrime(p));
    }
    if r == 0 || n < r {
        return Err(EquivariantError::LevelTooLarge { r, n });
    }
    let lr = p.pow(r);
    let m = p.pow(n);
    let level = Ring::product((0..lr).map(|i| Ring::from_doc(&root_ring("s", lr, i))).collect::<std::result::Result<_, _>>()?)?;
    let group = Ring::product((0..m).map(|i| Ring::from_doc(&root_ring("t", m, i))).collect::<std::result::Result<_, _>>()?)?;
    let base = Ring::from_doc(&RingDoc::new("Z").var("q").invert("q"))?;
    let mut tensors = Vec::new();
    for arity in 2..=3 {
        let comps: std::result::Result<Vec<Ring>, RingError> = tuples(m, arity).iter().map(|t| Ring::from_doc(&tuple_ring(m, t))).collect();
        tensors.push(Ring::product(comps?)?);
    }
    Ok(TateGroupAlgebra { p, r, n, level, group, base, tensors })
}

impl TateGroupAlgebra {
    pub fn group_order(&self) -> u64 {
        self.p.pow(self.n)
    }

    /// The `arity`-fold tensor power of the group ring (`arity` is 1, 2 or 3).
    pub fn tensor_ring(&self, arity: usize) -> &Ring {
        match arity {
            1 => &self.group,
            a => &self.tensors[a - 2],
        }
    }

    /// Parse an element of the group ring or of its tensor powers. Names:
    /// `q`, `t` and `f<i>`, suffixed `_1`, `_2`, `_3` in tensor powers.
    pub fn parse(&self, input: &str, arity: usize) -> Result<RingElement> {
        let e = expr::parse(input)?;
        e.eval(&GroupRingAlgebra { alg: self, arity })
    }

    /// `(i_1, ..., i_k) -> h_{sum mod m}(t_1 ... t_k q^{-carry})`, where the
    /// images of `t` on each tuple are given by `image`.
    fn pull(
        &self,
        h: &RingElement,
        target_arity: usize,
        source_index: impl Fn(&[u64]) -> usize,
        image: impl Fn(&[u64], &Ring) -> Result<BTreeMap<String, RingElement>>,
    ) -> Result<RingElement> {
        let target = self.tensor_ring(target_arity);
        let parts = h.components()?;
        let mut out = Vec::new();
        for (tuple, comp) in tuples(self.group_order(), target_arity).iter().zip(target.components()?) {
            let images = image(tuple, comp)?;
            out.push(parts[source_index(tuple)].evaluate(comp, &images)?);
        }
        Ok(target.from_components(out)?)
    }

    fn carry_factor(&self, comp: &Ring, total: u64) -> Result<RingElement> {
        Ok(comp.var("q")?.try_pow(-((total / self.group_order()) as i64))?)
    }

    /// The coproduct of the group ring.
    pub fn coproduct(&self, h: &RingElement) -> Result<RingElement> {
        let m = self.group_order();
        self.pull(
            h,
            2,
            |t| ((t[0] + t[1]) % m) as usize,
            |t, comp| {
                let image = &(&comp.var("t_1")? * &comp.var("t_2")?) * &self.carry_factor(comp, t[0] + t[1])?;
                Ok(BTreeMap::from([("q".to_string(), comp.var("q")?), ("t".to_string(), image)]))
            },
        )
    }

    /// `(ψ ⊗ 1)` (`left = true`) or `(1 ⊗ ψ)` applied to a tensor.
    pub fn coproduct_on_tensor(&self, t: &RingElement, left: bool) -> Result<RingElement> {
        let m = self.group_order();
        self.pull(
            t,
            3,
            |k| if left { (((k[0] + k[1]) % m) * m + k[2]) as usize } else { (k[0] * m + (k[1] + k[2]) % m) as usize },
            |k, comp| {
                let (a, b, c) = (comp.var("t_1")?, comp.var("t_2")?, comp.var("t_3")?);
                let (first, second) = if left {
                    (&(&a * &b) * &self.carry_factor(comp, k[0] + k[1])?, c)
                } else {
                    (a, &(&b * &c) * &self.carry_factor(comp, k[1] + k[2])?)
                };
                Ok(BTreeMap::from([("q".to_string(), comp.var("q")?), ("t_1".to_string(), first), ("t_2".to_string(), second)]))
            },
        )
    }

    /// The counit: component 0 at `t = 1`.
    pub fn counit(&self, h: &RingElement) -> Result<RingElement> {
        let images = BTreeMap::from([("q".to_string(), self.base.var("q")?), ("t".to_string(), self.base.one())]);
        Ok(h.components()?[0].evaluate(&self.base, &images)?)
    }

    /// Coassociativity, cocommutativity and the counit identity on `h`.
    pub fn hopf_checks(&self, h: &RingElement) -> Result<Vec<super::Check>> {
        let psi = self.coproduct(h)?;
        let mut checks = Vec::new();
        let l = self.coproduct_on_tensor(&psi, true)?;
        let r = self.coproduct_on_tensor(&psi, false)?;
        checks.push(residual_check("coassociativity", &l, &r));
        let m = self.group_order();
        let swapped = self.pull(
            &psi,
            2,
            |t| (t[1] * m + t[0]) as usize,
            |_, comp| {
                Ok(BTreeMap::from([
                    ("q".to_string(), comp.var("q")?),
                    ("t_1".to_string(), comp.var("t_2")?),
                    ("t_2".to_string(), comp.var("t_1")?),
                ]))
            },
        )?;
        checks.push(residual_check("cocommutativity", &psi, &swapped));
        // (ε ⊗ 1)ψ(h): the components (0, i) at t_1 = 1.
        let parts = psi.components()?;
        let mut back = Vec::new();
        for (i, comp) in self.group.components()?.iter().enumerate() {
            let images =
                BTreeMap::from([("q".to_string(), comp.var("q")?), ("t_1".to_string(), comp.one()), ("t_2".to_string(), comp.var("t")?)]);
            back.push(parts[i].evaluate(comp, &images)?);
        }
        checks.push(residual_check("counit", &self.group.from_components(back)?, h));
        Ok(checks)
    }

    /// Human-readable listing of a tensor element by component tuple.
    pub fn display(&self, t: &RingElement, arity: usize) -> Vec<String> {
        let parts = match t.components() {
            Ok(p) => p,
            Err(_) => return vec![t.to_string()],
        };
        tuples(self.group_order(), arity)
            .iter()
            .zip(parts)
            .filter(|(_, c)| !c.is_zero())
            .map(|(tuple, c)| {
                let idx: Vec<String> = tuple.iter().map(|i| format!("f{i}")).collect();
                format!("{}: {c}", idx.join("⊗"))
            })
            .collect()
    }
}

fn residual_check(name: &str, a: &RingElement, b: &RingElement) -> super::Check {
    let diff = a - b;
    if diff.is_zero() {
        super::Check::new(name, vec![])
    } else {
        super::Check::new(name, vec![format!("residual {diff}")])
    }
}

struct GroupRingAlgebra<'a> {
    alg: &'a TateGroupAlgebra,
    arity: usize,
}

impl GroupRingAlgebra<'_> {
    fn ring(&self) -> &Ring {
        self.alg.tensor_ring(self.arity)
    }

    fn indicator(&self, i: u64, slot: usize) -> Result<RingElement> {
        let ring = self.ring();
        let comps = ring.components()?;
        let parts = tuples(self.alg.group_order(), self.arity)
            .iter()
            .zip(comps)
            .map(|(t, c)| if t[slot] == i { c.one() } else { c.zero() })
            .collect();
        Ok(ring.from_components(parts)?)
    }
}

impl Algebra for GroupRingAlgebra<'_> {
    type Value = RingElement;
    type Error = EquivariantError;

    fn number(&self, n: &BigInt) -> Result<RingElement> {
        Ok(self.ring().constant(BigRational::from_integer(n.clone()))?)
    }

    fn variable(&self, name: &str) -> Result<RingElement> {
        let unknown = || EquivariantError::UnknownName(name.to_string());
        let (base, slot) = if self.arity == 1 {
            (name, 0)
        } else {
            match name.rsplit_once('_') {
                Some((b, k)) => {
                    let k: usize = k.parse().map_err(|_| unknown())?;
                    if k == 0 || k > self.arity {
                        return Err(unknown());
                    }
                    (b, k - 1)
                }
                None if name == "q" => (name, 0),
                None => return Err(unknown()),
            }
        };
        if let Some(i) = base.strip_prefix('f').and_then(|s| s.parse::<u64>().ok()) {
            if i >= self.alg.group_order() {
                return Err(unknown());
            }
            return self.indicator(i, slot);
        }
        match base {
            "q" => Ok(self.ring().var("q")?),
            "t" if self.arity == 1 => Ok(self.ring().var("t")?),
            "t" => Ok(self.ring().var(&format!("t_{}", slot + 1))?),
            _ => Err(unknown()),
        }
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
        let inv = b.try_inverse().ok_or_else(|| EquivariantError::NotInvertible(b.to_string()))?;
        Ok(a * &inv)
    }

    fn pow(&self, a: &RingElement, k: i64) -> Result<RingElement> {
        a.try_pow(k).map_err(|_| EquivariantError::NotInvertible(a.to_string()))
    }
}

/// Split model of the equivariant law of the Tate curve at level `r = 1`.
///
/// `alphas[i - 1]` is the coordinate on the group-ring component `f_i`,
/// an expression in `s` and `q` in which `s` stands for the group-ring
/// coordinate `t` of that component. Each must have a unit constant term.
pub fn efgl_from_tate(p: u64, r: u32, cap: u32, alphas: &[String]) -> Result<SplitEfgl> {
    build(p, r, cap, alphas, true)
}

/// As [`efgl_from_tate`] without the unit check, to exhibit failures.
pub fn efgl_from_tate_unchecked(p: u64, r: u32, cap: u32, alphas: &[String]) -> Result<SplitEfgl> {
    build(p, r, cap, alphas, false)
}

/// The block `e_0` of the Tate model alone: `s^p = 1`, a single component,
/// coordinate `y` and the multiplicative law.
pub fn split_multiplicative(p: u64, cap: u32) -> Result<SplitEfgl> {
    let alphas = vec!["-1".to_string(); p.saturating_sub(1) as usize];
    let full = efgl_from_tate(p, 1, cap, &alphas)?;
    full.restrict(&[0], "split multiplicative")
}

fn build(p: u64, r: u32, cap: u32, alphas: &[String], check_units: bool) -> Result<SplitEfgl> {
    if r != 1 {
        return Err(EquivariantError::UnsupportedLevel(r));
    }
    if cap < 3 {
        return Err(EquivariantError::CapTooSmall { needed: 3, got: cap });
    }
    let alg = tate_group_algebra(p, 1, 1)?;
    let pu = p as usize;
    if alphas.len() != pu - 1 {
        return Err(EquivariantError::InvalidModel(format!("expected {} alpha expressions, got {}", pu - 1, alphas.len())));
    }
    let alpha_exprs = alphas.iter().map(|a| expr::parse(a)).collect::<std::result::Result<Vec<_>, _>>()?;
    let prec = Precision::total(1, cap);
    let mut blocks = Vec::with_capacity(pu);
    // Per block: t on each component, and the f-index of each component.
    let mut t_parts = Vec::with_capacity(pu);
    let mut f_index = Vec::with_capacity(pu);
    for (j, ring) in alg.level.components()?.iter().enumerate() {
        let law = fgl_multiplicative(ring, cap);
        let y = TruncatedSeries::variable(ring, &["y"], prec.clone(), 0);
        let one_plus_y = &TruncatedSeries::one(ring, &["y"], prec.clone()) + &y;
        let s = ring.var("s")?;
        let q = ring.var("q")?;
        if j == 0 {
            let points = (0..pu).map(|l| Point { component: 0, value: &s.pow(l as u32) - &ring.one() }).collect();
            blocks.push(Block { label: "e0".into(), law, coordinate: vec![y], points });
            t_parts.push(vec![one_plus_y]);
            f_index.push(vec![0]);
            continue;
        }
        let mut coordinate = Vec::with_capacity(pu);
        let mut ts = Vec::with_capacity(pu);
        let mut fs = Vec::with_capacity(pu);
        for k in 0..pu {
            let i = (k * j) % pu;
            let carry = (k * j / pu) as i64;
            let scale = &s.pow(k as u32) * &q.try_pow(-carry)?;
            let t = one_plus_y.scale(&scale);
            let x = if k == 0 {
                y.clone()
            } else {
                let value = alpha_exprs[i - 1].eval(&SeriesInS { ring, t: &t })?;
                if check_units && !value.constant_term().is_unit() {
                    return Err(EquivariantError::NonUnitAlpha { index: i, value: alphas[i - 1].clone() });
                }
                value
            };
            coordinate.push(x);
            ts.push(t);
            fs.push(i);
        }
        let points = (0..pu).map(|l| Point { component: l % pu, value: ring.zero() }).collect();
        blocks.push(Block { label: format!("e{j}"), law, coordinate, points });
        t_parts.push(ts);
        f_index.push(fs);
    }
    let mut model = SplitEfgl::new(&format!("tate p={p} r=1"), p, 1, cap, blocks)?;
    for j in 0..pu {
        model.vocabulary.insert(format!("e{j}"), model.block_indicator(j));
    }
    model.vocabulary.insert("t".into(), model.from_parts(t_parts));
    for i in 0..pu {
        let parts = model
            .blocks
            .iter()
            .zip(&f_index)
            .map(|(b, fs)| {
                fs.iter()
                    .map(|&fi| {
                        TruncatedSeries::constant(b.ring(), &["y"], prec.clone(), if fi == i { b.ring().one() } else { b.ring().zero() })
                    })
                    .collect()
            })
            .collect();
        model.vocabulary.insert(format!("f{i}"), model.from_parts(parts));
    }
    Ok(model)
}

/// Evaluates expressions in `s, q` with `s` replaced by a series `t(y)`.
struct SeriesInS<'a> {
    ring: &'a Ring,
    t: &'a TruncatedSeries,
}

impl Algebra for SeriesInS<'_> {
    type Value = TruncatedSeries;
    type Error = EquivariantError;

    fn number(&self, n: &BigInt) -> Result<TruncatedSeries> {
        let c = self.ring.constant(BigRational::from_integer(n.clone()))?;
        Ok(TruncatedSeries::constant(self.ring, &["y"], self.t.precision().clone(), c))
    }

    fn variable(&self, name: &str) -> Result<TruncatedSeries> {
        match name {
            "s" => Ok(self.t.clone()),
            "q" => Ok(TruncatedSeries::constant(self.ring, &["y"], self.t.precision().clone(), self.ring.var("q")?)),
            other => Err(EquivariantError::UnknownName(other.to_string())),
        }
    }

    fn add(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
        a + b
    }

    fn sub(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
        a - b
    }

    fn mul(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> TruncatedSeries {
        a * b
    }

    fn neg(&self, a: &TruncatedSeries) -> TruncatedSeries {
        -a
    }

    fn div(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        let inv = b.inverse().map_err(|_| EquivariantError::NotInvertible(b.display()))?;
        Ok(a * &inv)
    }

    fn pow(&self, a: &TruncatedSeries, k: i64) -> Result<TruncatedSeries> {
        let base = if k < 0 { a.inverse().map_err(|_| EquivariantError::NotInvertible(a.display()))? } else { a.clone() };
        Ok(base.pow(k.unsigned_abs() as u32))
    }
}

/// The display expression for the coproduct of `x` on the Tate model at
/// `p = 2`, in tensor-slot notation.
pub const TATE_P2_COPRODUCT: &str = "(x_1+1)*(x_2+1) - 1 + e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)";

/// `ψ(x) - formula` on the model, for a formula in tensor-slot notation.
pub fn coproduct_residual(model: &SplitEfgl, formula: &str) -> Result<Section> {
    let psi = model.coproduct(&model.coordinate())?;
    Ok(&psi - &model.eval(formula, 2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::Orientation;

    fn minus_one() -> Vec<String> {
        vec!["-1".to_string()]
    }

    #[test]
    fn group_ring_coproduct_p2() {
        let alg = tate_group_algebra(2, 1, 1).unwrap();
        let h = alg.parse("f0*t", 1).unwrap();
        let psi = alg.coproduct(&h).unwrap();
        let expected = alg.parse("f0_1*t_1*f0_2*t_2 + f1_1*t_1*f1_2*t_2/q", 2).unwrap();
        assert_eq!(psi, expected);
        assert_eq!(alg.counit(&h).unwrap().to_string(), "1");
        assert!(alg.hopf_checks(&alg.parse("f1*t + 3*f0*t^2*q", 1).unwrap()).unwrap().iter().all(|c| c.passed));
    }

    #[test]
    fn group_ring_p3() {
        let alg = tate_group_algebra(3, 1, 1).unwrap();
        let h = alg.parse("f2*t + f1*t^2", 1).unwrap();
        assert!(alg.hopf_checks(&h).unwrap().iter().all(|c| c.passed));
        assert_eq!(alg.display(&alg.coproduct(&alg.parse("f1", 1).unwrap()).unwrap(), 2).len(), 3);
    }

    #[test]
    fn level_must_not_exceed_exponent() {
        assert!(matches!(tate_group_algebra(2, 2, 1), Err(EquivariantError::LevelTooLarge { .. })));
        assert!(matches!(tate_group_algebra(4, 1, 1), Err(EquivariantError::NotPrime(4))));
    }

    #[test]
    fn tate_p2_displays() {
        let m = efgl_from_tate(2, 1, 6, &minus_one()).unwrap();
        assert_eq!(m.eval("f0*t - 1", 1).unwrap(), m.coordinate());
        assert_eq!(m.eval("e0*f0*s*t + e1*f1*s*t/q - 1", 1).unwrap(), m.translate(1).unwrap());
        assert!(coproduct_residual(&m, TATE_P2_COPRODUCT).unwrap().is_zero());
    }

    #[test]
    fn tate_models_satisfy_the_axioms() {
        for (p, alphas) in [(2, minus_one()), (3, vec!["-1".into(), "-s/q".into()])] {
            let m = efgl_from_tate(p, 1, 5, &alphas).unwrap();
            for o in [Orientation::Literal, Orientation::Covariant] {
                let rep = m.axiom_report(o).unwrap();
                assert!(rep.passes(), "p={p}: {:?}", rep.failures());
            }
        }
    }

    #[test]
    fn non_unit_alpha_is_rejected_with_witness() {
        let bad = vec!["2".to_string()];
        assert!(matches!(efgl_from_tate(2, 1, 5, &bad), Err(EquivariantError::NonUnitAlpha { index: 1, .. })));
        let m = efgl_from_tate_unchecked(2, 1, 5, &bad).unwrap();
        let rep = m.axiom_report(Orientation::Covariant).unwrap();
        assert!(rep.failures().iter().any(|c| c.detail.contains("constant term 2")));
        assert!(matches!(efgl_from_tate(2, 2, 5, &bad), Err(EquivariantError::UnsupportedLevel(2))));
    }

    #[test]
    fn multiplicativity_dichotomy() {
        let m = efgl_from_tate(2, 1, 6, &minus_one()).unwrap();
        let rep = m.multiplicativity().unwrap();
        assert!(!rep.multiplicative);
        let correction = m.eval("e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)", 2).unwrap();
        assert_eq!(rep.obstruction, correction);
        assert!(!rep.torsion_vanishes);
        let split = split_multiplicative(2, 6).unwrap().multiplicativity().unwrap();
        assert!(split.multiplicative && split.torsion_vanishes);
    }
}
