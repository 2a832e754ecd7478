//! Images of the generators `u, q_j, b_ij` of the `Z/2`-equivariant
//! cobordism ring, and the check of its defining relations
//! `q_0`, `q_i - c_i - u q_{i+1}`, `b_ij - a_ij - u b_{i,j+1}`.
//!
//! Targets are polynomial rings over Q in named variables (the first is
//! `u`), optionally modulo one principal ideal. Images are truncated at a
//! finite `J`: `q_j` is recorded for `j <= J + 1` and `b_ij` for
//! `j <= J + 1`; the relations are checked for `i, j <= J`.

use crate::fgl::{FglError, FormalGroupLaw};
use crate::poly::{rational, Poly};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

/// Images of the Strickland generators in a polynomial quotient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StricklandImages {
    pub label: String,
    /// Variable names of the target polynomial ring; `u` is variable 0.
    pub names: Vec<String>,
    /// Generator of the ideal defining the target, if any.
    pub ideal: Option<Poly>,
    /// `[2](z) = sum c_j z^j`, `j <= J`.
    pub c: Vec<BigRational>,
    /// `F(x, y) = sum a_ij x^i y^j` for `1 <= i <= I`, `j <= J`.
    pub a: BTreeMap<(usize, usize), BigRational>,
    /// `q_0 ... q_{J+1}`.
    pub q: Vec<Poly>,
    /// `b_ij` for `1 <= i <= I`, `0 <= j <= J + 1`.
    pub b: BTreeMap<(usize, usize), Poly>,
}

/// The residual of one relation and whether it vanishes in the target.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RelationResidual {
    pub relation: String,
    pub residual: String,
    pub vanishes: bool,
    /// For residuals in the ideal: the cofactor of the ideal generator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RelationReport {
    pub label: String,
    pub ideal: Option<String>,
    pub relations: Vec<RelationResidual>,
}

impl RelationReport {
    pub fn passes(&self) -> bool {
        self.relations.iter().all(|r| r.vanishes)
    }
}

impl StricklandImages {
    pub fn truncation(&self) -> usize {
        self.c.len() - 1
    }

    pub fn u(&self) -> Poly {
        Poly::var(self.names.len(), 0)
    }

    pub fn display(&self, p: &Poly) -> String {
        p.display(&self.names)
    }

    fn constant(&self, c: &BigRational) -> Poly {
        Poly::constant(self.names.len(), c.clone())
    }

    /// `q_i - c_i - u q_{i+1}` before passing to the quotient.
    pub fn q_residual(&self, i: usize) -> Poly {
        self.q[i].sub(&self.constant(&self.c[i])).sub(&self.u().mul(&self.q[i + 1]))
    }

    /// `b_ij - a_ij - u b_{i,j+1}` before passing to the quotient.
    pub fn b_residual(&self, i: usize, j: usize) -> Poly {
        let a = self.a.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero);
        let next = self.b.get(&(i, j + 1)).cloned().unwrap_or_else(|| Poly::zero(self.names.len()));
        self.b[&(i, j)].sub(&self.constant(&a)).sub(&self.u().mul(&next))
    }

    /// Whether `p` vanishes in the target, with the integral cofactor.
    pub fn reduce(&self, p: &Poly) -> (bool, Option<Poly>) {
        if p.is_zero() {
            return (true, None);
        }
        match self.ideal.as_ref().and_then(|g| p.div_exact(g)) {
            Some(w) if w.is_integral() => (true, Some(w)),
            _ => (false, None),
        }
    }

    fn residual(&self, relation: String, p: &Poly) -> RelationResidual {
        let (vanishes, witness) = self.reduce(p);
        RelationResidual { relation, residual: self.display(p), vanishes, witness: witness.map(|w| self.display(&w)) }
    }

    /// Check every relation up to the truncation.
    pub fn relation_check(&self) -> RelationReport {
        let j_max = self.truncation();
        let mut relations = vec![self.residual("q_0".into(), &self.q[0])];
        for i in 1..=j_max {
            relations.push(self.residual(format!("q_{i} - c_{i} - u*q_{}", i + 1), &self.q_residual(i)));
        }
        let rows: Vec<usize> = self.b.keys().map(|(i, _)| *i).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        for i in rows {
            for j in 0..=j_max {
                relations.push(self.residual(format!("b_{i}{j} - a_{i}{j} - u*b_{i}{}", j + 1), &self.b_residual(i, j)));
            }
        }
        RelationReport { label: self.label.clone(), ideal: self.ideal.as_ref().map(|g| self.display(g)), relations }
    }
}

fn rational_coefficient(c: &crate::ring::RingElement) -> Result<BigRational, FglError> {
    c.as_rational().ok_or_else(|| FglError::NotStrict(format!("coefficient {c} is not a constant")))
}

type Coefficients = BTreeMap<(usize, usize), BigRational>;

/// `c_0 .. c_J` of `[2](z)` and `a_ij` (`1 <= i <= rows`, `j <= J`) of a
/// law with constant coefficients; `J = cap - 1`.
fn law_data(law: &FormalGroupLaw, rows: usize) -> Result<(Vec<BigRational>, Coefficients), FglError> {
    let cap = law.cap() as usize;
    let two = law.n_series(2)?;
    let c = (0..cap).map(|k| rational_coefficient(&two.coeff(&[k as u32]))).collect::<Result<Vec<_>, _>>()?;
    let mut a = BTreeMap::new();
    for i in 1..=rows {
        for j in 0..cap {
            let v = rational_coefficient(&law.coefficient(i as u32, j as u32))?;
            if !v.is_zero() {
                a.insert((i, j), v);
            }
        }
    }
    Ok((c, a))
}

/// `sum_{k=j}^{J} coeffs_k u^{k-j}` in the given number of variables.
fn tail(nvars: usize, coeffs: &[BigRational], j: usize) -> Poly {
    let mut p = Poly::zero(nvars);
    for (k, c) in coeffs.iter().enumerate().skip(j) {
        let mut e = vec![0; nvars];
        e[0] = (k - j) as i32;
        p.add_term(e, c.clone());
    }
    p
}

fn borel_b(nvars: usize, a: &BTreeMap<(usize, usize), BigRational>, rows: usize, j_max: usize) -> BTreeMap<(usize, usize), Poly> {
    let mut b = BTreeMap::new();
    for i in 1..=rows {
        let row: Vec<BigRational> = (0..=j_max).map(|k| a.get(&(i, k)).cloned().unwrap_or_else(BigRational::zero)).collect();
        for j in 0..=j_max + 1 {
            b.insert((i, j), tail(nvars, &row, j));
        }
    }
    b
}

/// `[2](u)` truncated at `J`, as a polynomial.
fn two_series(nvars: usize, c: &[BigRational]) -> Poly {
    tail(nvars, c, 0)
}

/// Borel images of a law with constant coefficients, in `Q[u]/([2]u)`
/// (the series `[2]u` truncated at `cap - 1`).
pub fn borel_images(law: &FormalGroupLaw, rows: usize) -> Result<StricklandImages, FglError> {
    let (c, a) = law_data(law, rows)?;
    let j_max = c.len() - 1;
    let q = (0..=j_max + 1).map(|j| tail(1, &c, j)).collect();
    Ok(StricklandImages {
        label: "borel".into(),
        names: vec!["u".into()],
        ideal: Some(two_series(1, &c)),
        b: borel_b(1, &a, rows, j_max),
        c,
        a,
        q,
    })
}

/// `u (u + 2) (1 - u w)` in `Q[u, w]`.
pub fn deformation_ideal() -> Poly {
    let u = Poly::var(2, 0);
    let w = Poly::var(2, 1);
    let one = Poly::one(2);
    u.mul(&u.add(&Poly::constant(2, rational(2)))).mul(&one.sub(&u.mul(&w)))
}

/// The deformation of the multiplicative Borel images over
/// `A = Z[u, w]/(u(u+2)(1-uw))`: `q_k = -u(u+2) w^k` for `k >= 3`, the
/// lower `q_j` solved from the relations, `b_ij` unchanged.
pub fn z2_deformation_images(law: &FormalGroupLaw, rows: usize) -> Result<StricklandImages, FglError> {
    let (c, a) = law_data(law, rows)?;
    let j_max = c.len() - 1;
    if j_max < 3 {
        return Err(FglError::CapTooSmall { needed: 4, got: law.cap() });
    }
    let u = Poly::var(2, 0);
    let w = Poly::var(2, 1);
    let uu2 = u.mul(&u.add(&Poly::constant(2, rational(2))));
    let mut q = vec![Poly::zero(2); j_max + 2];
    for (k, qk) in q.iter_mut().enumerate().skip(3) {
        *qk = uu2.mul(&w.pow(k as u32)).neg();
    }
    for j in (1..=2).rev() {
        q[j] = Poly::constant(2, c[j].clone()).add(&u.mul(&q[j + 1]));
    }
    q[0] = u.mul(&q[1]);
    Ok(StricklandImages {
        label: "z2 deformation".into(),
        names: vec!["u".into(), "w".into()],
        ideal: Some(deformation_ideal()),
        b: borel_b(2, &a, rows, j_max),
        c,
        a,
        q,
    })
}

/// The Lubin-Tate deformation over `E[[u]][w]/([2]u (1 - uw))`:
/// `q_j = sum_{k>=j} c_k u^{k-j} - w^j [2]u`, `b_ij` as in Borel cohomology.
pub fn lubin_tate_z2_images(law: &FormalGroupLaw, rows: usize) -> Result<StricklandImages, FglError> {
    let (c, a) = law_data(law, rows)?;
    let j_max = c.len() - 1;
    let two = two_series(2, &c);
    let w = Poly::var(2, 1);
    let q = (0..=j_max + 1).map(|j| tail(2, &c, j).sub(&w.pow(j as u32).mul(&two))).collect();
    let ideal = two.mul(&Poly::one(2).sub(&Poly::var(2, 0).mul(&w)));
    Ok(StricklandImages {
        label: "lubin-tate z2".into(),
        names: vec!["u".into(), "w".into()],
        ideal: Some(ideal),
        b: borel_b(2, &a, rows, j_max),
        c,
        a,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::{fgl_honda, fgl_multiplicative};
    use crate::ring::{Ring, RingDoc};

    fn mult(cap: u32) -> FormalGroupLaw {
        fgl_multiplicative(&Ring::from_doc(&RingDoc::new("Z")).unwrap(), cap)
    }

    #[test]
    fn multiplicative_borel_images() {
        let s = borel_images(&mult(6), 2).unwrap();
        assert_eq!(s.display(&s.q[1]), "u + 2");
        assert_eq!(s.display(&s.q[2]), "1");
        assert!(s.q[3..].iter().all(Poly::is_zero));
        assert_eq!(s.display(&s.b[&(1, 0)]), "u + 1");
        assert_eq!(s.display(&s.b[&(1, 1)]), "1");
        assert!(s.b[&(2, 0)].is_zero());
        assert!(s.relation_check().passes());
    }

    #[test]
    fn deformation_forces_q0() {
        let s = z2_deformation_images(&mult(8), 1).unwrap();
        let u = Poly::var(2, 0);
        let w = Poly::var(2, 1);
        let one = Poly::one(2);
        let uw = u.mul(&w);
        let expected = deformation_ideal().mul(&one.add(&uw).add(&uw.pow(2)));
        assert_eq!(s.q[0], expected);
        let rep = s.relation_check();
        assert!(rep.passes(), "{rep:?}");
        assert_eq!(rep.relations[0].witness.as_deref(), Some("u^2*w^2 + u*w + 1"));
    }

    #[test]
    fn lubin_tate_residuals() {
        let s = lubin_tate_z2_images(&fgl_honda(2, 1, 8).unwrap(), 1).unwrap();
        assert!(s.q[0].is_zero());
        let w = Poly::var(2, 1);
        let g = s.ideal.clone().unwrap();
        for j in 1..=s.truncation() {
            assert_eq!(s.q_residual(j), w.pow(j as u32).mul(&g).neg());
        }
        assert!(s.relation_check().passes());
    }

    #[test]
    fn undeformed_images_fail_in_the_deformed_ring() {
        let mut s = z2_deformation_images(&mult(6), 1).unwrap();
        s.q[4] = Poly::one(2);
        let rep = s.relation_check();
        assert!(!rep.passes());
        assert!(rep.relations.iter().any(|r| !r.vanishes && r.witness.is_none()));
    }
}
