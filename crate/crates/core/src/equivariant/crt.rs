//! Decomposition of functions on one block by interpolation in the
//! coordinate.
//!
//! On a block whose components each carry one simple zero of the product
//! `P` of all translates, every function `u` splits as `v(x) + P u'` with
//! `v` a polynomial interpolating the values of `u` at the component
//! origins. Iterating gives `u = sum_{i<K} P^i v_i(x) + P^K u_K`. The
//! polynomial part is split further by the sign of the `q`-exponent in its
//! coefficients.

use super::{EquivariantError, Result, SplitEfgl};
use crate::poly::Poly;
use crate::ring::{Ring, RingElement};
use crate::series::{Precision, TruncatedSeries};
use rand::Rng;
use serde::Serialize;

/// Output of [`crt_decompose`] on one block.
#[derive(Clone, Debug)]
pub struct CrtDecomposition {
    pub block: usize,
    pub iterations: usize,
    /// Interpolating polynomials `v_i`, coefficients in ascending degree.
    pub polynomials: Vec<Vec<RingElement>>,
    /// The part of `sum P^i v_i(x)` with nonnegative `q`-exponents.
    pub w_part: Vec<TruncatedSeries>,
    /// The part with negative `q`-exponents.
    pub q_part: Vec<TruncatedSeries>,
    /// `P^K u_K`, per component.
    pub residual: Vec<TruncatedSeries>,
    /// `w_part + q_part + residual` equals the input exactly.
    pub recombines: bool,
}

impl CrtDecomposition {
    /// Smallest `y`-order of the residual over the components (`None` if zero).
    pub fn residual_order(&self) -> Option<u32> {
        self.residual.iter().filter_map(|s| s.order()).min()
    }

    pub fn summary(&self) -> CrtSummary {
        CrtSummary {
            block: self.block,
            iterations: self.iterations,
            polynomials: self.polynomials.iter().map(|v| v.iter().map(|c| c.to_string()).collect()).collect(),
            w_part: self.w_part.iter().map(|s| s.display()).collect(),
            q_part: self.q_part.iter().map(|s| s.display()).collect(),
            residual: self.residual.iter().map(|s| s.display()).collect(),
            residual_order: self.residual_order(),
            recombines: self.recombines,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CrtSummary {
    pub block: usize,
    pub iterations: usize,
    pub polynomials: Vec<Vec<String>>,
    pub w_part: Vec<String>,
    pub q_part: Vec<String>,
    pub residual: Vec<String>,
    pub residual_order: Option<u32>,
    pub recombines: bool,
}

/// Lagrange interpolation through `(nodes[k], values[k])`; consecutive
/// differences of nodes must be units.
pub fn interpolate(ring: &Ring, nodes: &[RingElement], values: &[RingElement]) -> Result<Vec<RingElement>> {
    let n = nodes.len();
    let mut out = vec![ring.zero(); n];
    for k in 0..n {
        // basis polynomial prod_{l != k} (X - c_l) / (c_k - c_l)
        let mut basis = vec![ring.one()];
        let mut denom = ring.one();
        for l in (0..n).filter(|&l| l != k) {
            let mut next = vec![ring.zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] = &next[i + 1] + b;
                next[i] = &next[i] - &(b * &nodes[l]);
            }
            basis = next;
            let d = &nodes[k] - &nodes[l];
            if !d.is_unit() {
                return Err(EquivariantError::NotSeparated(k.min(l), k.max(l), d.to_string()));
            }
            denom = &denom * &d;
        }
        let scale = &values[k] * &denom.try_inverse().expect("product of units");
        for (o, b) in out.iter_mut().zip(&basis) {
            *o = &*o + &(b * &scale);
        }
    }
    Ok(out)
}

fn eval_poly(coeffs: &[RingElement], x: &TruncatedSeries) -> Result<TruncatedSeries> {
    let ring = x.ring();
    let mut acc = TruncatedSeries::zero(ring, &["y"], x.precision().clone());
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + &TruncatedSeries::constant(ring, &["y"], x.precision().clone(), c.clone());
    }
    Ok(acc)
}

/// `s / y` for a series with zero constant term, one degree less precise.
fn divide_by_y(s: &TruncatedSeries) -> TruncatedSeries {
    let cap = s.precision().order_bound().expect("bounded precision");
    TruncatedSeries::from_terms(
        s.ring(),
        &["y"],
        Precision::total(1, cap - 1),
        s.terms().filter(|(e, _)| e[0] > 0).map(|(e, c)| (vec![e[0] - 1], c.clone())),
    )
}

/// `y^k s`, raising the precision by `k`.
fn multiply_by_y(s: &TruncatedSeries, k: u32) -> TruncatedSeries {
    let cap = s.precision().order_bound().expect("bounded precision");
    TruncatedSeries::from_terms(s.ring(), &["y"], Precision::total(1, cap + k), s.terms().map(|(e, c)| (vec![e[0] + k], c.clone())))
}

/// Split a series by the sign of the `q`-exponent of each coefficient term.
fn split_by_q(s: &TruncatedSeries) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let ring = s.ring();
    let qi = ring.names().iter().position(|n| n == "q").ok_or_else(|| EquivariantError::UnknownName("q".into()))?;
    let mut w = TruncatedSeries::zero(ring, &["y"], s.precision().clone());
    let mut q = w.clone();
    for (e, c) in s.terms() {
        let poly = c.as_poly().ok_or_else(|| EquivariantError::InvalidModel("block ring is a product".into()))?;
        let (mut pos, mut neg) = (Poly::zero(poly.nvars()), Poly::zero(poly.nvars()));
        for (m, a) in poly.terms() {
            if m[qi] >= 0 {
                pos.add_term(m.clone(), a.clone());
            } else {
                neg.add_term(m.clone(), a.clone());
            }
        }
        w.add_term(e.clone(), ring.from_poly(&pos)?);
        q.add_term(e.clone(), ring.from_poly(&neg)?);
    }
    Ok((w, q))
}

/// Decompose `u` (one series in `y` per component of block `block`) with
/// `iterations` interpolation steps.
pub fn crt_decompose(model: &SplitEfgl, block: usize, u: &[TruncatedSeries], iterations: usize) -> Result<CrtDecomposition> {
    let b = model.blocks.get(block).ok_or_else(|| EquivariantError::InvalidModel(format!("no block {block}")))?;
    let ring = b.ring();
    let n = b.components();
    if u.len() != n {
        return Err(EquivariantError::InvalidModel(format!("expected {n} component series, got {}", u.len())));
    }
    let mut product: Vec<TruncatedSeries> =
        b.coordinate.iter().map(|x| TruncatedSeries::one(ring, &["y"], x.precision().clone())).collect();
    for l in 0..model.order() as i64 {
        let t = model.translate(l)?;
        for (p, s) in product.iter_mut().zip(&t.parts[block]) {
            *p = &*p * s;
        }
    }
    // P = y g on every component with g(0) a unit.
    let mut g_inv = Vec::with_capacity(n);
    for (k, p) in product.iter().enumerate() {
        if !p.constant_term().is_zero() {
            return Err(EquivariantError::InvalidModel(format!("{}[{k}]: the product of translates does not vanish at 0", b.label)));
        }
        let g = divide_by_y(p);
        g_inv.push(g.inverse().map_err(|_| EquivariantError::NotInvertible(g.constant_term().to_string()))?);
    }
    let nodes: Vec<RingElement> = b.coordinate.iter().map(|x| x.constant_term()).collect();
    let cap = model.cap;
    let mut current: Vec<TruncatedSeries> = u.to_vec();
    let mut polynomials = Vec::with_capacity(iterations);
    let mut w_part: Vec<TruncatedSeries> = (0..n).map(|_| TruncatedSeries::zero(ring, &["y"], Precision::total(1, cap))).collect();
    let mut q_part = w_part.clone();
    let mut power: Vec<TruncatedSeries> = (0..n).map(|_| TruncatedSeries::one(ring, &["y"], Precision::total(1, cap))).collect();
    for _ in 0..iterations {
        let values: Vec<RingElement> = current.iter().map(|s| s.constant_term()).collect();
        let v = interpolate(ring, &nodes, &values)?;
        let mut next = Vec::with_capacity(n);
        for k in 0..n {
            let x = b.coordinate[k].truncate(current[k].precision());
            let vx = eval_poly(&v, &x)?;
            let term = &power[k] * &eval_poly(&v, &b.coordinate[k])?;
            let (w, q) = split_by_q(&term)?;
            w_part[k] = &w_part[k] + &w;
            q_part[k] = &q_part[k] + &q;
            let diff = &current[k] - &vx;
            next.push(&divide_by_y(&diff) * &g_inv[k].truncate(&Precision::total(1, diff.precision().order_bound().unwrap() - 1)));
            power[k] = &power[k] * &product[k];
        }
        polynomials.push(v);
        current = next;
    }
    // residual = P^K u_K = y^K g^K u_K, exact to the original cap.
    let mut residual = Vec::with_capacity(n);
    for k in 0..n {
        let g = divide_by_y(&product[k]);
        let raised = multiply_by_y(&(&current[k] * &g.pow(iterations as u32).truncate(current[k].precision())), iterations as u32);
        residual.push(raised.truncate(&Precision::total(1, cap)));
    }
    let recombines = (0..n).all(|k| &(&w_part[k] + &q_part[k]) + &residual[k] == u[k].truncate(&Precision::total(1, cap)));
    Ok(CrtDecomposition { block, iterations, polynomials, w_part, q_part, residual, recombines })
}

/// A random function on block `block`: small integer combinations of
/// `s^a q^b y^c` on each component.
pub fn random_input(model: &SplitEfgl, block: usize, rng: &mut impl Rng) -> Result<Vec<TruncatedSeries>> {
    let b = &model.blocks[block];
    let ring = b.ring();
    let s = ring.var("s")?;
    let q = ring.var("q")?;
    let mut out = Vec::with_capacity(b.components());
    for _ in 0..b.components() {
        let mut terms = Vec::new();
        for deg in 0..model.cap {
            let mut c = ring.zero();
            for _ in 0..2 {
                let k: i64 = rng.gen_range(-3..=3);
                let a: u32 = rng.gen_range(0..model.p as u32);
                let e: i64 = rng.gen_range(-2..=2);
                c = &c + &(&(&ring.int(k) * &s.pow(a)) * &q.try_pow(e)?);
            }
            terms.push((vec![deg], c));
        }
        out.push(TruncatedSeries::from_terms(ring, &["y"], Precision::total(1, model.cap), terms));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::tate::efgl_from_tate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interpolation_through_two_points() {
        let r = Ring::from_doc(&crate::ring::RingDoc::new("Z")).unwrap();
        let v = interpolate(&r, &[r.int(0), r.int(-1)], &[r.int(3), r.int(5)]).unwrap();
        // v(X) = 3 - 2X
        assert_eq!(v, vec![r.int(3), r.int(-2)]);
        assert!(matches!(interpolate(&r, &[r.int(0), r.int(2)], &[r.one(), r.one()]), Err(EquivariantError::NotSeparated(0, 1, _))));
    }

    #[test]
    fn unit_example_and_random_inputs() {
        let m = efgl_from_tate(2, 1, 6, &["-1".into()]).unwrap();
        let b = &m.blocks[1];
        let one = TruncatedSeries::one(b.ring(), &["y"], Precision::total(1, 6));
        let zero = TruncatedSeries::zero(b.ring(), &["y"], Precision::total(1, 6));
        let d = crt_decompose(&m, 1, &[one, zero], 2).unwrap();
        assert!(d.recombines);
        // u = (1, 0) interpolates to v(X) = 1 + X at nodes 0, -1.
        assert_eq!(d.polynomials[0], vec![b.ring().one(), b.ring().one()]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let u = random_input(&m, 1, &mut rng).unwrap();
            let mut last = 0;
            for k in 1..=3 {
                let d = crt_decompose(&m, 1, &u, k).unwrap();
                assert!(d.recombines);
                let order = d.residual_order().unwrap_or(u32::MAX);
                assert!(order >= k as u32 && order >= last);
                last = order;
            }
        }
    }

    #[test]
    fn block_e0_is_rejected() {
        let m = efgl_from_tate(2, 1, 6, &["-1".into()]).unwrap();
        let one = TruncatedSeries::one(m.blocks[0].ring(), &["y"], Precision::total(1, 6));
        assert!(crt_decompose(&m, 0, &[one], 1).is_err());
    }
}
