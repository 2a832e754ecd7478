//! Linear algebra over Z/p^nu: Howell normal forms of row spans, canonical
//! reduction, module sizes and linear solves.

use crate::upoly::mul_mod;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus {p}^{nu} is out of range")]
    ModulusTooLarge { p: u64, nu: u32 },
    #[error("vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
}

/// The ring Z/p^nu with small modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimePower {
    pub p: u64,
    pub nu: u32,
    pub modulus: u64,
}

impl PrimePower {
    pub fn new(p: u64, nu: u32) -> Result<Self, LinalgError> {
        if !crate::fgl::is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        let modulus = p.checked_pow(nu).filter(|m| *m < 1 << 31).ok_or(LinalgError::ModulusTooLarge { p, nu })?;
        Ok(PrimePower { p, nu, modulus })
    }

    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b) % self.modulus
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.modulus - a) % self.modulus
    }

    /// p-adic valuation, `nu` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.nu;
        }
        let mut k = 0;
        let mut a = a;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            k += 1;
        }
        k
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        let g = num_integer::Integer::extended_gcd(&(a as i64), &(self.modulus as i64));
        (g.gcd == 1).then(|| g.x.rem_euclid(self.modulus as i64) as u64)
    }

    /// `(p^k, u)` with `a = p^k u` and `u` a unit (`a != 0`).
    fn split(&self, a: u64) -> (u64, u64) {
        let k = self.valuation(a);
        let pk = self.p.pow(k);
        let u = (a / pk) % self.modulus;
        (pk, self.inverse(u).expect("unit part"))
    }

    pub fn axpy(&self, y: &mut [u64], a: u64, x: &[u64]) {
        if a == 0 {
            return;
        }
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.add(*yi, self.mul(a, *xi));
        }
    }
}

/// Row span of a matrix over Z/p^nu in Howell form: pivot entries are
/// powers of p, entries above a pivot are reduced below it, and the span of
/// rows with pivot column at least c contains every span element vanishing
/// in the first c columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    ring: PrimePower,
    ncols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<(usize, u32)>,
}

impl HowellForm {
    pub fn new(ring: PrimePower, ncols: usize, generators: impl IntoIterator<Item = Vec<u64>>) -> Self {
        let mut pool: Vec<Vec<u64>> = generators
            .into_iter()
            .map(|mut g| {
                g.resize(ncols, 0);
                g.iter_mut().for_each(|a| *a %= ring.modulus);
                g
            })
            .filter(|g| g.iter().any(|&a| a != 0))
            .collect();
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            let Some(best) =
                pool.iter().enumerate().filter(|(_, r)| r[col] != 0).min_by_key(|(_, r)| ring.valuation(r[col])).map(|(i, _)| i)
            else {
                continue;
            };
            let mut row = pool.swap_remove(best);
            let (pk, uinv) = ring.split(row[col]);
            row.iter_mut().for_each(|a| *a = ring.mul(*a, uinv));
            for other in pool.iter_mut() {
                if other[col] != 0 {
                    let q = other[col] / pk;
                    ring.axpy(other, ring.neg(q), &row);
                }
            }
            let k = ring.valuation(pk);
            if k > 0 {
                let sat: Vec<u64> = row.iter().map(|&a| ring.mul(a, ring.p.pow(ring.nu - k))).collect();
                if sat.iter().any(|&a| a != 0) {
                    pool.push(sat);
                }
            }
            pool.retain(|r| r.iter().any(|&a| a != 0));
            rows.push(row);
            pivots.push((col, k));
        }
        for i in 0..rows.len() {
            let (col, k) = pivots[i];
            let pk = ring.p.pow(k);
            let pivot_row = rows[i].clone();
            for row in rows.iter_mut().take(i) {
                let q = row[col] / pk;
                ring.axpy(row, ring.neg(q), &pivot_row);
            }
        }
        HowellForm { ring, ncols, rows, pivots }
    }

    pub fn ring(&self) -> PrimePower {
        self.ring
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// `(column, valuation)` of each pivot.
    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    /// `log_p` of the number of elements of the span.
    pub fn log_size(&self) -> u32 {
        self.pivots.iter().map(|(_, k)| self.ring.nu - k).sum()
    }

    /// Canonical representative of `v` modulo the span.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = v.iter().map(|a| a % self.ring.modulus).collect();
        v.resize(self.ncols, 0);
        for (row, &(col, k)) in self.rows.iter().zip(&self.pivots) {
            let q = v[col] / self.ring.p.pow(k);
            self.ring.axpy(&mut v, self.ring.neg(q), row);
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&a| a == 0)
    }
}

/// Coefficients `c` with `sum c_i generators_i = target`, if any.
pub fn solve(ring: PrimePower, generators: &[Vec<u64>], target: &[u64]) -> Result<Option<Vec<u64>>, LinalgError> {
    let n = target.len();
    let k = generators.len();
    let mut augmented = Vec::with_capacity(k);
    for (i, g) in generators.iter().enumerate() {
        if g.len() != n {
            return Err(LinalgError::Length { expected: n, got: g.len() });
        }
        let mut row = g.clone();
        row.resize(n + k, 0);
        row[n + i] = 1;
        augmented.push(row);
    }
    let h = HowellForm::new(ring, n + k, augmented);
    let mut v = target.to_vec();
    v.resize(n + k, 0);
    let r = h.reduce(&v);
    if r[..n].iter().any(|&a| a != 0) {
        return Ok(None);
    }
    Ok(Some(r[n..].iter().map(|&a| ring.neg(a)).collect()))
}

/// `sum c_i rows_i`.
pub fn combine(ring: PrimePower, coeffs: &[u64], rows: &[Vec<u64>], ncols: usize) -> Vec<u64> {
    let mut out = vec![0; ncols];
    for (c, r) in coeffs.iter().zip(rows) {
        ring.axpy(&mut out, *c, r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z25() -> PrimePower {
        PrimePower::new(5, 2).unwrap()
    }

    #[test]
    fn saturation_row_is_added() {
        // span of (5, 1): contains 5*(5,1) = (0,5).
        let h = HowellForm::new(z25(), 2, vec![vec![5, 1]]);
        assert_eq!(h.log_size(), 2);
        assert!(h.contains(&[0, 5]));
        assert!(!h.contains(&[0, 1]));
        assert_eq!(h.pivots(), &[(0, 1), (1, 1)]);
    }

    #[test]
    fn canonical_reduction() {
        let h = HowellForm::new(z25(), 2, vec![vec![1, 3], vec![0, 5]]);
        assert_eq!(h.log_size(), 3);
        assert_eq!(h.reduce(&[2, 8]), vec![0, 2]);
        assert_eq!(h.reduce(&[2, 8]), h.reduce(&[0, 7]));
    }

    #[test]
    fn solve_with_witness() {
        let r = z25();
        let gens = vec![vec![5, 1, 0], vec![0, 2, 7]];
        let target = vec![10, 6, 14];
        let c = solve(r, &gens, &target).unwrap().unwrap();
        assert_eq!(combine(r, &c, &gens, 3), target);
        assert!(solve(r, &gens, &[1, 0, 0]).unwrap().is_none());
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(PrimePower::new(6, 2), Err(LinalgError::NotPrime(6)));
    }
}
