//! Sparse multivariate Laurent polynomials over Q.
//!
//! A `Poly` carries its number of variables; exponent vectors may be negative
//! (only meaningful for variables a ring declares invertible). Zero
//! coefficients are never stored, so structural equality is value equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub type Exponents = Vec<i32>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

/// Graded lexicographic comparison: total degree first, then exponents from
/// the first declared variable on.
pub fn grlex_cmp(a: &[i32], b: &[i32]) -> Ordering {
    let da: i64 = a.iter().map(|&e| e as i64).sum();
    let db: i64 = b.iter().map(|&e| e as i64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, BigRational::one())
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Poly::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Exponents, c: BigRational) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Exponents, BigRational)> {
        self.terms.into_iter()
    }

    /// The constant value, if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Exponents, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn coeff(&self, exps: &[i32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, exps: Exponents, c: BigRational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Largest exponent of variable `i`, or `None` for the zero polynomial.
    pub fn degree_in(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn min_degree_in(&self, i: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[i]).min()
    }

    pub fn total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|e| e.iter().any(|&x| x < 0))
    }

    /// Split by powers of variable `i`: returns `degree -> coefficient`, where
    /// each coefficient no longer involves variable `i`.
    pub fn coefficients_in(&self, i: usize) -> BTreeMap<i32, Poly> {
        let mut out: BTreeMap<i32, Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let d = e2[i];
            e2[i] = 0;
            out.entry(d).or_insert_with(|| Poly::zero(self.nvars)).add_term(e2, c.clone());
        }
        out
    }

    /// Multiply by `var_i^k` (k may be negative).
    pub fn shift(&self, i: usize, k: i32) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[i] += k;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Re-express in a space of `nvars` variables, sending variable `j` to
    /// variable `map[j]`.
    pub fn reindex(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (j, &x) in e.iter().enumerate() {
                if x != 0 {
                    e2[map[j]] += x;
                }
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Ring-homomorphic evaluation: each variable power `x_j^k` is replaced by
    /// `power(j, k)`, a value in some target algebra.
    pub fn evaluate<T, E>(
        &self,
        constant: impl Fn(&BigRational) -> Result<T, E>,
        mut power: impl FnMut(usize, i32) -> Result<T, E>,
        mul: impl Fn(&T, &T) -> T,
        add: impl Fn(&T, &T) -> T,
        zero: T,
    ) -> Result<T, E> {
        let mut acc = zero;
        for (e, c) in &self.terms {
            let mut t = constant(c)?;
            for (j, &k) in e.iter().enumerate() {
                if k != 0 {
                    t = mul(&t, &power(j, k)?);
                }
            }
            acc = add(&acc, &t);
        }
        Ok(acc)
    }

    pub fn map_coefficients(&self, f: impl Fn(&BigRational) -> BigRational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Leading term under graded lex order.
    pub fn leading_term(&self) -> Option<(&Exponents, &BigRational)> {
        self.terms.iter().max_by(|a, b| grlex_cmp(a.0, b.0))
    }

    /// Exact quotient `self / divisor` over Q, if `divisor` divides `self` in
    /// the polynomial ring (no negative exponents allowed).
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() || self.has_negative_exponents() || divisor.has_negative_exponents() {
            return None;
        }
        let (le, lc) = divisor.leading_term()?;
        let (le, lc) = (le.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((re, rc)) = rem.leading_term() {
            if re.iter().zip(&le).any(|(a, b)| a < b) {
                return None;
            }
            let e: Exponents = re.iter().zip(&le).map(|(a, b)| a - b).collect();
            let m = Poly::monomial(e, rc / &lc);
            rem = rem.sub(&m.mul(divisor));
            quot = quot.add(&m);
        }
        Some(quot)
    }

    /// Every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Canonical text form with the given variable names, terms in
    /// descending graded lex order.
    pub fn display(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Exponents> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex_cmp(b, a));
        let mut out = String::new();
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[*e];
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = monomial_text(e, names);
            if mono.is_empty() {
                write!(out, "{}", rational_text(&mag)).unwrap();
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                write!(out, "{}*{}", rational_text(&mag), mono).unwrap();
            }
        }
        out
    }
}

pub fn rational_text(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn monomial_text(e: &[i32], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (j, &k) in e.iter().enumerate() {
        match k {
            0 => {}
            1 => parts.push(names[j].clone()),
            _ => parts.push(format!("{}^{}", names[j], k)),
        }
    }
    parts.join("*")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["u".into(), "w".into()]
    }

    #[test]
    fn display_is_graded_lex_descending() {
        let u = Poly::var(2, 0);
        let w = Poly::var(2, 1);
        let p = u.mul(&u).add(&u.scale(&rational(2))).sub(&u.mul(&w).mul(&w));
        assert_eq!(p.display(&names()), "-u*w^2 + u^2 + 2*u");
    }

    #[test]
    fn exact_division_recovers_quotient() {
        let u = Poly::var(2, 0);
        let w = Poly::var(2, 1);
        let one = Poly::one(2);
        let g = u.mul(&u.add(&Poly::constant(2, rational(2)))).mul(&one.sub(&u.mul(&w)));
        let q = w.mul(&w).add(&u);
        assert_eq!(q.mul(&g).div_exact(&g), Some(q.clone()));
        assert_eq!(q.mul(&g).add(&one).div_exact(&g), None);
    }

    #[test]
    fn pow_matches_repeated_product() {
        let p = Poly::var(2, 0).add(&Poly::one(2));
        let mut acc = Poly::one(2);
        for _ in 0..5 {
            acc = acc.mul(&p);
        }
        assert_eq!(p.pow(5), acc);
    }
}
