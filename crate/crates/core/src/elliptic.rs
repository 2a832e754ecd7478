//! Torsion of Weierstrass curves: division polynomials, the p-torsion
//! algebra, its formal completion and a finite check of the square
//!
//! ```text
//!   O        ->  x^-1 O
//!   |               |
//!   R[[x]]/[p]x -> x^-1 R[[x]]/[p]x
//! ```
//!
//! at p-adic precision `nu` and x-adic cap `M`. At finite p-adic precision
//! every corner is a finite Z/p^nu-module, so each check is an exact
//! statement about Howell forms rather than a sampled approximation.

use crate::fgl::{FglError, WeierstrassCurve};
use crate::linalg::{combine, solve, HowellForm, LinalgError, PrimePower};
use crate::poly::rational;
use crate::ring::{Base, Ring, RingElement, RingError};
use crate::series::SeriesError;
use crate::upoly::{determinant, QPoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EllipticError {
    #[error(transparent)]
    Fgl(#[from] FglError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("n must be at least 1")]
    ZeroIndex,
    #[error("p must be a prime greater than 3 (got {0})")]
    BadPrime(u64),
    #[error("the coefficient ring already has a variable named `{0}`")]
    NameClash(String),
    #[error("g2 and g3 must be rational constants for this operation")]
    NotSpecialized,
    #[error("g3 must be nonzero to use the basis 1, u, u^2 of the chart")]
    DegenerateChart,
    #[error("{0} is not integral at p")]
    NotIntegral(String),
    #[error("cap {got} is too small (need at least {needed})")]
    CapTooSmall { needed: usize, got: usize },
}

type Result<T> = std::result::Result<T, EllipticError>;

/// Operations the division-polynomial recurrence needs.
pub trait RecurrenceAlgebra: Clone {
    fn mul(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn half(&self) -> Self;
}

impl RecurrenceAlgebra for RingElement {
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn half(&self) -> Self {
        self.scale(&BigRational::new(1.into(), 2.into()))
    }
}

impl RecurrenceAlgebra for QPoly {
    fn mul(&self, o: &Self) -> Self {
        QPoly::mul(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        QPoly::sub(self, o)
    }
    fn half(&self) -> Self {
        self.scale(&BigRational::new(1.into(), 2.into()))
    }
}

/// Reduced division polynomials `f_0..f_n` of `y^2 = X^3 + aX + b`, where
/// `psi_k = f_k` for odd `k` and `psi_k = y f_k` for even `k`.
/// `base = [f_0, f_1, f_2, f_3, f_4]`, `y2 = X^3 + aX + b`.
pub fn division_recurrence<T: RecurrenceAlgebra>(base: [T; 5], y2: &T, n: usize) -> Vec<T> {
    let mut f: Vec<T> = base.to_vec();
    let cube = |t: &T| t.mul(t).mul(t);
    let sq = |t: &T| t.mul(t);
    for k in 5..=n {
        let m = k / 2;
        let next = if k % 2 == 1 {
            let a = f[m + 2].mul(&cube(&f[m]));
            let b = f[m - 1].mul(&cube(&f[m + 1]));
            let y4 = sq(y2);
            if m % 2 == 0 {
                y4.mul(&a).sub(&b)
            } else {
                a.sub(&y4.mul(&b))
            }
        } else {
            let inner = f[m + 2].mul(&sq(&f[m - 1])).sub(&f[m - 2].mul(&sq(&f[m + 1])));
            f[m].mul(&inner).half()
        };
        f.push(next);
    }
    f.truncate(n + 1);
    f
}

/// Short Weierstrass coefficients `a = -g2/4`, `b = -g3/4` of the curve
/// `y^2 = X^3 + aX + b` with `y = Y/2`.
fn short_coefficients(g2: &RingElement, g3: &RingElement) -> (RingElement, RingElement) {
    let q = BigRational::new((-1).into(), 4.into());
    (g2.scale(&q), g3.scale(&q))
}

/// Division polynomial `psi_n` of a Weierstrass curve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionPolynomial {
    pub n: u32,
    /// `f_n` in `R[X]`; `psi_n = f_n` for odd `n` and `(Y/2) f_n` for even `n`.
    pub reduced: RingElement,
    pub has_y_factor: bool,
}

impl DivisionPolynomial {
    pub fn degree(&self) -> usize {
        let r = self.reduced.ring();
        let idx = r.names().iter().position(|v| v == "X").expect("X variable");
        self.reduced.as_poly().and_then(|p| p.degree_in(idx)).map_or(0, |d| d.max(0) as usize)
    }
}

/// `R[X]` for a curve over `R`.
pub fn x_line(curve: &WeierstrassCurve) -> Result<Ring> {
    let r = curve.ring();
    if r.names().iter().any(|n| n == "X") {
        return Err(EllipticError::NameClash("X".into()));
    }
    Ok(r.with_extra_vars(&["X"])?)
}

fn symbolic_base(curve: &WeierstrassCurve) -> Result<([RingElement; 5], RingElement)> {
    let rx = x_line(curve)?;
    let (a, b) = short_coefficients(&curve.g2, &curve.g3);
    let a = a.map_to(&rx)?;
    let b = b.map_to(&rx)?;
    let x = rx.var("X")?;
    let c = |n: i64| rx.int(n);
    let x2 = x.pow(2);
    let f3 = &(&(&x.pow(4).scale(&rational(3)) + &(&a * &x2).scale(&rational(6))) + &(&b * &x).scale(&rational(12))) - &a.pow(2);
    let f4 = (&(&(&(&(&(&x.pow(6) + &(&a * &x.pow(4)).scale(&rational(5))) + &(&b * &x.pow(3)).scale(&rational(20)))
        - &(&a.pow(2) * &x2).scale(&rational(5)))
        - &(&(&a * &b) * &x).scale(&rational(4)))
        - &b.pow(2).scale(&rational(8)))
        - &a.pow(3))
        .scale(&rational(4));
    let y2 = &(&x.pow(3) + &(&a * &x)) + &b;
    Ok(([c(0), c(1), c(2), f3, f4], y2))
}

pub fn division_polynomial(curve: &WeierstrassCurve, n: u32) -> Result<DivisionPolynomial> {
    if n == 0 {
        return Err(EllipticError::ZeroIndex);
    }
    let (base, y2) = symbolic_base(curve)?;
    let f = division_recurrence(base, &y2, n as usize);
    Ok(DivisionPolynomial { n, reduced: f[n as usize].clone(), has_y_factor: n.is_multiple_of(2) })
}

/// Rational values of `(g2, g3)` for a specialized curve.
pub fn rational_coefficients(curve: &WeierstrassCurve) -> Result<(BigRational, BigRational)> {
    match (curve.g2.as_rational(), curve.g3.as_rational()) {
        (Some(a), Some(b)) if curve.ring().nvars() == 0 => Ok((a, b)),
        _ => Err(EllipticError::NotSpecialized),
    }
}

/// Reduced division polynomials `f_0..f_n` over Q for rational `(g2, g3)`.
pub fn division_polynomials_q(g2: &BigRational, g3: &BigRational, n: usize) -> Vec<QPoly> {
    let q = BigRational::new((-1).into(), 4.into());
    let a = g2 * &q;
    let b = g3 * &q;
    let k = |n: i64| BigRational::from_integer(n.into());
    let f3 = QPoly::new(vec![-(&a * &a), k(12) * &b, k(6) * &a, k(0), k(3)]);
    let f4 = QPoly::new(vec![-(k(8) * &b * &b) - &a * &a * &a, -(k(4) * &a * &b), -(k(5) * &a * &a), k(20) * &b, k(5) * &a, k(0), k(1)])
        .scale(&k(4));
    let y2 = QPoly::new(vec![b.clone(), a.clone(), k(0), k(1)]);
    division_recurrence([QPoly::zero(), QPoly::one(), QPoly::from_ints(&[2]), f3, f4], &y2, n)
}

/// The p-torsion algebra of a curve, presented in the chart `(x, u) =
/// (X/Y, Z/Y)` around the identity by the curve relation and the
/// homogenized division polynomial.
#[derive(Clone, Debug)]
pub struct TorsionAlgebra {
    pub curve: WeierstrassCurve,
    pub p: u64,
    /// `R[x, u]`.
    pub chart_ring: Ring,
    /// `u - 4x^3 + g2 x u^2 + g3 u^3`.
    pub curve_relation: RingElement,
    /// `u^d psi_p(x/u)` with `d = (p^2 - 1)/2`.
    pub division_relation: RingElement,
    pub declared_rank: u64,
}

impl TorsionAlgebra {
    /// Image of an element of `R[x, u]` under the augmentation `x, u -> 0`.
    pub fn augmentation(&self, e: &RingElement) -> Result<RingElement> {
        let r = self.curve.ring();
        let mut images = std::collections::BTreeMap::new();
        for name in r.names() {
            images.insert(name.clone(), r.var(name)?);
        }
        images.insert("x".to_string(), r.zero());
        images.insert("u".to_string(), r.zero());
        Ok(e.evaluate(r, &images)?)
    }

    /// Both relations lie in the augmentation ideal, so the augmentation
    /// descends to the quotient.
    pub fn augmentation_is_defined(&self) -> Result<bool> {
        Ok(self.augmentation(&self.curve_relation)?.is_zero() && self.augmentation(&self.division_relation)?.is_zero())
    }
}

pub fn torsion_algebra(curve: &WeierstrassCurve, p: u64) -> Result<TorsionAlgebra> {
    if p <= 3 || !crate::fgl::is_prime(p) {
        return Err(EllipticError::BadPrime(p));
    }
    let r = curve.ring();
    for v in ["x", "u", "X"] {
        if r.names().iter().any(|n| n == v) {
            return Err(EllipticError::NameClash(v.into()));
        }
    }
    let chart = r.with_extra_vars(&["x", "u"])?;
    let x = chart.var("x")?;
    let u = chart.var("u")?;
    let g2 = curve.g2.map_to(&chart)?;
    let g3 = curve.g3.map_to(&chart)?;
    let curve_relation = &(&(&u - &x.pow(3).scale(&rational(4))) + &(&(&g2 * &x) * &u.pow(2))) + &(&g3 * &u.pow(3));
    let psi = division_polynomial(curve, p as u32)?;
    let rx = psi.reduced.ring().clone();
    let xi = rx.names().iter().position(|v| v == "X").expect("X variable");
    let d = ((p * p - 1) / 2) as i32;
    let mut division_relation = chart.zero();
    for (k, coeff) in psi.reduced.as_poly().expect("polynomial ring").coefficients_in(xi) {
        let c = rx.from_poly(&coeff)?;
        let mut images = std::collections::BTreeMap::new();
        for name in r.names() {
            images.insert(name.clone(), chart.var(name)?);
        }
        images.insert("X".to_string(), chart.zero());
        let c = c.evaluate(&chart, &images)?;
        division_relation = &division_relation + &(&(&c * &x.pow(k as u32)) * &u.pow((d - k) as u32));
    }
    Ok(TorsionAlgebra { curve: curve.clone(), p, chart_ring: chart, curve_relation, division_relation, declared_rank: p * p })
}

/// The torsion algebra at a rational specialization, as `Q[x]/(m(x))` with
/// `m = x N(x)`: the norm of the division relation over `Q[x]` is
/// `x^k N(x)` with the identity contributing `x^k`.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub p: u64,
    pub g2: String,
    pub g3: String,
    pub division_degree: usize,
    pub norm_degree: usize,
    pub identity_order: usize,
    pub rank: usize,
    pub expected_rank: u64,
    pub squarefree: bool,
    pub integral_at_p: bool,
    pub x_powers_nonzero: bool,
    pub status: String,
    #[serde(skip)]
    pub modulus: QPoly,
    #[serde(skip)]
    pub division_coefficients: Vec<BigRational>,
}

/// Multiplication by `u` on `Q[x][u]/(u^3 - c0 - c1 u - c2 u^2)`.
fn times_u(v: &[QPoly; 3], c: &[QPoly; 3]) -> [QPoly; 3] {
    [v[2].mul(&c[0]), v[0].add(&v[2].mul(&c[1])), v[1].add(&v[2].mul(&c[2]))]
}

pub fn torsion_rank(curve: &WeierstrassCurve, p: u64) -> Result<RankReport> {
    if p <= 3 || !crate::fgl::is_prime(p) {
        return Err(EllipticError::BadPrime(p));
    }
    let (g2, g3) = rational_coefficients(curve)?;
    if g3.is_zero() {
        return Err(EllipticError::DegenerateChart);
    }
    let psi = division_polynomials_q(&g2, &g3, p as usize).pop().expect("nonempty");
    let d = (p * p - 1) as usize / 2;
    // u^3 = (4x^3 - u - g2 x u^2) / g3.
    let inv = BigRational::from_integer(1.into()) / &g3;
    let c = [QPoly::monomial(rational(4) * &inv, 3), QPoly::new(vec![-inv.clone()]), QPoly::monomial(-(&g2 * &inv), 1)];
    let mut u_pows: Vec<[QPoly; 3]> = vec![[QPoly::one(), QPoly::zero(), QPoly::zero()]];
    for _ in 0..d + 2 {
        let next = times_u(u_pows.last().expect("nonempty"), &c);
        u_pows.push(next);
    }
    // Phi = sum a_k x^k u^(d-k) acting on the basis 1, u, u^2.
    let columns: Vec<[QPoly; 3]> = (0..3)
        .map(|j| {
            let mut acc = [QPoly::zero(), QPoly::zero(), QPoly::zero()];
            for (k, a) in psi.coeffs().iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let xk = QPoly::monomial(a.clone(), k);
                let up = &u_pows[d - k + j];
                for i in 0..3 {
                    acc[i] = acc[i].add(&up[i].mul(&xk));
                }
            }
            acc
        })
        .collect();
    let matrix: Vec<Vec<QPoly>> = (0..3).map(|i| (0..3).map(|j| columns[j][i].clone()).collect()).collect();
    let norm = determinant(&matrix);
    let k = norm.x_valuation();
    let n = norm.div_rem(&QPoly::monomial(BigRational::from_integer(1.into()), k)).0;
    let modulus = n.mul(&QPoly::x()).monic();
    let rank = modulus.degree().unwrap_or(0);
    let squarefree = modulus.is_squarefree();
    let integral_at_p = modulus.is_p_integral(&BigInt::from(p));
    // x^n for n <= 2 rank stays nonzero modulo m.
    let x_powers_nonzero = (1..=2 * rank).all(|e| !QPoly::monomial(BigRational::from_integer(1.into()), e).div_rem(&modulus).1.is_zero());
    let ok = rank as u64 == p * p && squarefree && x_powers_nonzero;
    Ok(RankReport {
        p,
        g2: g2.to_string(),
        g3: g3.to_string(),
        division_degree: psi.degree().unwrap_or(0),
        norm_degree: norm.degree().unwrap_or(0),
        identity_order: k,
        rank,
        expected_rank: p * p,
        squarefree,
        integral_at_p,
        x_powers_nonzero,
        status: if ok { "pass" } else { "fail" }.into(),
        modulus,
        division_coefficients: psi.coeffs().to_vec(),
    })
}

// ------------------------------------------------------------ Z/p^nu models

/// Dense truncated power series over Z/p^nu.
fn series_mul(ring: PrimePower, a: &[u64], b: &[u64], cap: usize) -> Vec<u64> {
    let mut out = vec![0; cap];
    for (i, &x) in a.iter().enumerate().take(cap) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(cap - i) {
            out[i + j] = ring.add(out[i + j], ring.mul(x, y));
        }
    }
    out
}

/// `a * b mod m` for monic `m` of degree `r` (vectors of length `r`).
fn mul_mod_monic(ring: PrimePower, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    let r = m.len() - 1;
    let prod = series_mul(ring, a, b, 2 * r);
    reduce_mod_monic(ring, &prod, m)
}

fn reduce_mod_monic(ring: PrimePower, v: &[u64], m: &[u64]) -> Vec<u64> {
    let r = m.len() - 1;
    let mut v = v.to_vec();
    for k in (r..v.len()).rev() {
        let c = v[k];
        if c != 0 {
            for j in 0..=r {
                v[k - r + j] = ring.sub(v[k - r + j], ring.mul(c, m[j]));
            }
        }
    }
    v.resize(r, 0);
    v
}

fn unit_vector(n: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Completion map data: `[p](x)` and the chart series `u(x)` over Z/p^nu
/// below `x^M`, and whether the torsion relations land in `([p]x, x^M)`.
#[derive(Clone, Debug, Serialize)]
pub struct CompletionReport {
    pub cap_x: usize,
    pub cap_p: u32,
    pub p_series: Vec<u64>,
    pub modulus_in_ideal: bool,
    pub division_relation_in_ideal: bool,
    pub one_maps_to_one: bool,
    pub x_maps_to_x: bool,
}

/// One sampled agreeing pair and its unique preimage.
#[derive(Clone, Debug, Serialize)]
pub struct PairSample {
    pub localized: Vec<u64>,
    pub completed: Vec<u64>,
    pub preimage: Option<Vec<u64>>,
    pub verified: bool,
}

/// One sampled corner element and its decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct CornerSample {
    pub label: String,
    pub element: Vec<u64>,
    pub from_localized: Vec<u64>,
    pub from_completed: Vec<u64>,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TateSquareReport {
    pub p: u64,
    pub cap_x: usize,
    pub cap_p: u32,
    pub rank: usize,
    /// `log_p` of the number of elements of each corner.
    pub log_size_top_left: u32,
    pub log_size_top_right: u32,
    pub log_size_bottom_left: u32,
    pub log_size_bottom_right: u32,
    /// Least `N` with `x^N = 0` in the completed corner.
    pub nilpotency_index: Option<usize>,
    pub localization_stable: bool,
    pub idempotent_ok: bool,
    pub completion: CompletionReport,
    pub injective: bool,
    pub surjective: bool,
    pub pullback_mod_x_log_size: u32,
    pub pullback_mod_x_generated_by_one: bool,
    pub pair_samples: Vec<PairSample>,
    pub corner_samples: Vec<CornerSample>,
    pub status: String,
    pub notes: Vec<String>,
}

/// Finite check of the square at `(p, M, nu)` for a rational specialization.
pub fn tate_square_check(
    curve: &WeierstrassCurve,
    p: u64,
    cap_x: usize,
    cap_p: u32,
    samples: usize,
    seed: u64,
) -> Result<TateSquareReport> {
    let rank_report = torsion_rank(curve, p)?;
    let ring = PrimePower::new(p, cap_p)?;
    let big_m = BigInt::from(ring.modulus);
    let r = rank_report.rank;
    if cap_x < r + 1 {
        return Err(EllipticError::CapTooSmall { needed: r + 1, got: cap_x });
    }
    let m = rank_report.modulus.reduce_mod(ring.modulus).ok_or_else(|| EllipticError::NotIntegral(rank_report.modulus.to_string()))?;
    let psi = QPoly::new(rank_report.division_coefficients.clone());
    let psi_mod = psi.reduce_mod(ring.modulus).ok_or_else(|| EllipticError::NotIntegral(psi.to_string()))?;

    // Completed corner: (Z/p^nu)^M modulo x^j [p](x).
    let (g2, g3) = rational_coefficients(curve)?;
    let zmod = Ring::from_doc(&crate::ring::RingDoc::new(&Base::IntegersMod(big_m.clone()).label()))?;
    let cz = WeierstrassCurve::new(zmod.constant(g2)?, zmod.constant(g3)?)?;
    let to_vec = |s: &crate::series::TruncatedSeries, cap: usize| -> Vec<u64> {
        (0..cap).map(|k| s.coeff(&[k as u32]).constant_mod(&big_m).and_then(|c| c.try_into().ok()).expect("residue")).collect()
    };
    let p_series = to_vec(&cz.formal_multiple(p as u32, cap_x as u32)?, cap_x);
    let u_series = to_vec(&cz.u_series(cap_x as u32), cap_x);
    let shifted = |v: &[u64], j: usize| -> Vec<u64> {
        let mut out = vec![0; cap_x];
        for (i, &c) in v.iter().enumerate() {
            if i + j < cap_x {
                out[i + j] = c;
            }
        }
        out
    };
    let ideal = HowellForm::new(ring, cap_x, (0..cap_x).map(|j| shifted(&p_series, j)));
    let log_bl = ring.nu * cap_x as u32 - ideal.log_size();
    let nilpotency_index = (0..cap_x).find(|&n| ideal.contains(&unit_vector(cap_x, n)));

    // Completion map x -> x: m and Phi(x, u(x)) must vanish in the completed corner.
    let mut m_padded = m.clone();
    m_padded.resize(cap_x, 0);
    let modulus_in_ideal = ideal.contains(&m_padded);
    let d = psi_mod.len() - 1;
    let mut u_pows = vec![unit_vector(cap_x, 0)];
    for _ in 0..d {
        let next = series_mul(ring, u_pows.last().expect("nonempty"), &u_series, cap_x);
        u_pows.push(next);
    }
    let mut phi = vec![0; cap_x];
    for (k, &a) in psi_mod.iter().enumerate() {
        ring.axpy(&mut phi, a, &shifted(&u_pows[d - k], k));
    }
    let division_relation_in_ideal = ideal.contains(&phi);
    let completion = CompletionReport {
        cap_x,
        cap_p,
        p_series: p_series.clone(),
        modulus_in_ideal,
        division_relation_in_ideal,
        one_maps_to_one: true,
        x_maps_to_x: true,
    };

    // Top row: TL = (Z/p^nu)[x]/(m), localized corner modeled by x^M TL.
    let mut x_pows = vec![unit_vector(r, 0)];
    let x = reduce_mod_monic(ring, &[0, 1], &m);
    for _ in 0..(2 * cap_x + r) {
        let next = mul_mod_monic(ring, x_pows.last().expect("nonempty"), &x, &m);
        x_pows.push(next);
    }
    let tr_gens: Vec<Vec<u64>> = (0..r).map(|i| x_pows[cap_x + i].clone()).collect();
    let tr = HowellForm::new(ring, r, tr_gens.clone());
    let tr_next = HowellForm::new(ring, r, (0..r).map(|i| x_pows[cap_x + 1 + i].clone()));
    let localization_stable = tr.log_size() == tr_next.log_size();
    // Idempotent e in x^M TL with e x^M = x^M.
    let targets: Vec<Vec<u64>> = (0..r).map(|i| x_pows[2 * cap_x + i].clone()).collect();
    let idem = solve(ring, &targets, &x_pows[cap_x])?.map(|c| combine(ring, &c, &tr_gens, r));
    let idempotent_ok = idem.as_ref().is_some_and(|e| mul_mod_monic(ring, e, e, &m) == *e && tr.contains(e));
    let e = idem.unwrap_or_else(|| vec![0; r]);

    // Bottom-right corner: x is nilpotent in the completed corner, so its
    // localization is zero when the index is below the cap.
    let log_br = match nilpotency_index {
        Some(n) if n < cap_x => 0,
        _ => log_bl,
    };

    // The map TL -> TR (+) BL on the basis x^i, together with the relations of BL.
    let width = r + cap_x;
    let mut image_rows = Vec::new();
    for (i, x_pow) in x_pows.iter().enumerate().take(r) {
        let mut row = mul_mod_monic(ring, &e, x_pow, &m);
        row.extend(unit_vector(cap_x, i));
        image_rows.push(row);
    }
    let relation_rows: Vec<Vec<u64>> = ideal
        .rows()
        .iter()
        .map(|s| {
            let mut row = vec![0; r];
            row.extend(s.iter().copied());
            row
        })
        .collect();
    let all_rows: Vec<Vec<u64>> = image_rows.iter().chain(&relation_rows).cloned().collect();
    let image = HowellForm::new(ring, width, all_rows.clone());
    let log_image = image.log_size() - ideal.log_size();
    let injective = log_image == ring.nu * r as u32;
    let surjective = log_image == tr.log_size() + log_bl;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pair_samples = Vec::with_capacity(samples);
    for _ in 0..samples {
        let coeffs: Vec<u64> = (0..r).map(|_| rng.gen_range(0..ring.modulus)).collect();
        let a = combine(ring, &coeffs, &tr_gens, r);
        let b: Vec<u64> = ideal.reduce(&(0..cap_x).map(|_| rng.gen_range(0..ring.modulus)).collect::<Vec<_>>());
        let mut target = a.clone();
        target.extend(b.iter().copied());
        let sol = solve(ring, &all_rows, &target)?;
        let preimage = sol.map(|c| combine(ring, &c[..r], &x_pows[..r], r));
        let verified = preimage.as_ref().is_some_and(|c| {
            let loc = mul_mod_monic(ring, &e, c, &m);
            let mut comp = c.clone();
            comp.resize(cap_x, 0);
            loc == a && ideal.reduce(&comp) == b && injective
        });
        pair_samples.push(PairSample { localized: a, completed: b, preimage, verified });
    }

    let mut corner_samples = Vec::new();
    if log_br == 0 {
        for k in 0..samples {
            let label = if k == 0 { "x^-1".to_string() } else { format!("sample {k}") };
            corner_samples.push(CornerSample {
                label,
                element: vec![],
                from_localized: vec![0; r],
                from_completed: vec![0; cap_x],
                verified: true,
            });
        }
    }

    // Pullback modulo x: TL / x TL.
    let x_tl = HowellForm::new(ring, r, (1..=r).map(|i| x_pows[i].clone()));
    let pullback_mod_x_log_size = ring.nu * r as u32 - x_tl.log_size();
    let with_one = HowellForm::new(ring, r, (1..=r).map(|i| x_pows[i].clone()).chain([x_pows[0].clone()]));
    let pullback_mod_x_generated_by_one = with_one.log_size() == ring.nu * r as u32;

    let mut notes = Vec::new();
    let decided = matches!(nilpotency_index, Some(n) if n < cap_x) && localization_stable && idempotent_ok;
    if !decided {
        notes.push("truncation too coarse: x is not shown nilpotent below the cap or the localization is not stable".into());
    }
    let all_ok = modulus_in_ideal
        && division_relation_in_ideal
        && injective
        && surjective
        && pullback_mod_x_log_size == ring.nu
        && pullback_mod_x_generated_by_one
        && pair_samples.iter().all(|s| s.verified)
        && corner_samples.iter().all(|s| s.verified)
        && rank_report.status == "pass";
    let status = if !decided {
        "undecided"
    } else if all_ok {
        "pass"
    } else {
        "fail"
    };
    Ok(TateSquareReport {
        p,
        cap_x,
        cap_p,
        rank: r,
        log_size_top_left: ring.nu * r as u32,
        log_size_top_right: tr.log_size(),
        log_size_bottom_left: log_bl,
        log_size_bottom_right: log_br,
        nilpotency_index,
        localization_stable,
        idempotent_ok,
        completion,
        injective,
        surjective,
        pullback_mod_x_log_size,
        pullback_mod_x_generated_by_one,
        pair_samples,
        corner_samples,
        status: status.into(),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingDoc;

    fn universal() -> WeierstrassCurve {
        let r =
            Ring::from_doc(&RingDoc::new("Z").weighted_var("g2", 4).weighted_var("g3", 6).invert("6").invert("g2^3 - 27*g3^2")).unwrap();
        WeierstrassCurve::new(r.var("g2").unwrap(), r.var("g3").unwrap()).unwrap()
    }

    fn over_q() -> WeierstrassCurve {
        let q = Ring::from_doc(&RingDoc::new("Q")).unwrap();
        WeierstrassCurve::new(q.int(4), q.int(1)).unwrap()
    }

    #[test]
    fn symbolic_division_degrees() {
        let c = universal();
        assert_eq!(division_polynomial(&c, 1).unwrap().degree(), 0);
        assert_eq!(division_polynomial(&c, 3).unwrap().degree(), 4);
        let psi5 = division_polynomial(&c, 5).unwrap();
        assert_eq!(psi5.degree(), 12);
        assert!(!psi5.has_y_factor);
        assert!(division_polynomial(&c, 4).unwrap().has_y_factor);
        assert!(matches!(division_polynomial(&c, 0), Err(EllipticError::ZeroIndex)));
    }

    #[test]
    fn specialized_matches_symbolic() {
        let f = division_polynomials_q(&rational(4), &rational(1), 6);
        let c = over_q();
        for n in 1..=6u32 {
            let s = division_polynomial(&c, n).unwrap();
            let poly = s.reduced.as_poly().unwrap();
            let coeffs = poly.coefficients_in(0);
            let q = f[n as usize].clone();
            for (k, c) in coeffs {
                assert_eq!(Some(q.coeff(k as usize)), c.as_constant());
            }
        }
    }

    #[test]
    fn torsion_presentation_and_augmentation() {
        let t = torsion_algebra(&universal(), 5).unwrap();
        assert!(t.augmentation_is_defined().unwrap());
        assert!(t.augmentation(&t.chart_ring.one()).unwrap().is_one());
        assert_eq!(t.declared_rank, 25);
        assert!(matches!(torsion_algebra(&universal(), 3), Err(EllipticError::BadPrime(3))));
    }

    #[test]
    fn rank_at_five() {
        let r = torsion_rank(&over_q(), 5).unwrap();
        assert_eq!(r.division_degree, 12);
        assert_eq!(r.identity_order, 12);
        assert_eq!(r.rank, 25);
        assert!(r.squarefree && r.integral_at_p && r.x_powers_nonzero);
        assert_eq!(r.status, "pass");
    }

    #[test]
    fn odd_degrees_and_divisibility() {
        let f = division_polynomials_q(&rational(4), &rational(1), 15);
        for n in [1usize, 3, 5, 7, 9] {
            assert_eq!(f[n].degree(), Some((n * n - 1) / 2));
        }
        for n in [2usize, 4, 6, 8] {
            assert_eq!(f[n].degree(), Some((n * n - 4) / 2));
        }
        assert!(f[3].divides(&f[9]));
        assert!(f[5].divides(&f[15]));
        assert!(!f[3].divides(&f[5]));
    }

    #[test]
    fn tate_square_at_five() {
        let report = tate_square_check(&over_q(), 5, 30, 2, 5, 7).unwrap();
        assert!(report.completion.modulus_in_ideal);
        assert!(report.completion.division_relation_in_ideal);
        assert!(report.injective && report.surjective, "{report:?}");
        assert_eq!(report.log_size_bottom_right, 0);
        assert_eq!(report.pullback_mod_x_log_size, 2);
        assert_eq!(report.status, "pass", "{:?}", report.notes);
    }
}
