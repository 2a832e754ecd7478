//! The `Z/2`-equivariant deformation of the multiplicative law over
//! `A = Z[u, w]/(u(u+2)(1-uw))`.
//!
//! After inverting the Euler class `u` the completed ring is
//! `B[[z]] x B[[z]]` with idempotents `iota0`, `iota1`, coordinate
//! `x = (z, u + (1+u) z)` and translate `x_alpha = (u + (1+u) z, z)`. The
//! correction to multiplicativity is expressed through the series
//! `rho(X, Y) = w X - w phi~(w X Y)`, where `phi~` reverses
//! `z + (w+1) z^2` over `Z[w]`.

use super::strickland::{z2_deformation_images, RelationReport, StricklandImages};
use super::{Block, Point, Result, Section, SplitEfgl};
use crate::fgl::fgl_multiplicative;
use crate::poly::Poly;
use crate::ring::{Ring, RingDoc, RingElement};
use crate::series::{Precision, TruncatedSeries};
use serde::Serialize;

/// `A = Z[u, w]/(u(u+2)(1-uw))`.
pub fn deformation_ring() -> Result<Ring> {
    Ok(Ring::from_doc(&RingDoc::new("Z").var("u").var("w").relation("u*(u+2)*(1-u*w)"))?)
}

/// `A` with `u` inverted.
pub fn localized_ring() -> Result<Ring> {
    Ok(Ring::from_doc(&RingDoc::new("Z").var("u").var("w").invert("u").relation("u*(u+2)*(1-u*w)"))?)
}

/// The split model over `u^-1 A`.
pub fn z2_model(cap: u32) -> Result<SplitEfgl> {
    let ring = localized_ring()?;
    let prec = Precision::total(1, cap);
    let u = ring.var("u")?;
    let y = TruncatedSeries::variable(&ring, &["y"], prec.clone(), 0);
    let constant = |c: RingElement| TruncatedSeries::constant(&ring, &["y"], prec.clone(), c);
    let shifted = &constant(u.clone()) + &y.scale(&(&ring.one() + &u));
    let points = vec![Point { component: 0, value: ring.zero() }, Point { component: 1, value: ring.zero() }];
    let block = Block { label: "u^-1 A".into(), law: fgl_multiplicative(&ring, cap), coordinate: vec![y.clone(), shifted], points };
    let mut model = SplitEfgl::new("z2 deformation", 2, 1, cap, vec![block])?;
    let one = constant(ring.one());
    let zero = constant(ring.zero());
    model.vocabulary.insert("iota0".into(), model.from_parts(vec![vec![one.clone(), zero.clone()]]));
    model.vocabulary.insert("iota1".into(), model.from_parts(vec![vec![zero, one]]));
    model.vocabulary.insert("z".into(), model.from_parts(vec![vec![y.clone(), y]]));
    Ok(model)
}

/// The model together with the Strickland images over `A`.
pub fn z2_deformation_build(cap: u32) -> Result<(SplitEfgl, StricklandImages)> {
    let model = z2_model(cap)?;
    let z = Ring::from_doc(&RingDoc::new("Z"))?;
    let images = z2_deformation_images(&fgl_multiplicative(&z, cap), 2)?;
    Ok((model, images))
}

/// `phi~`: the reverse of `z + (w+1) z^2` over `ring` (which has `w`).
pub fn phi_tilde(ring: &Ring, cap: u32) -> Result<TruncatedSeries> {
    let w = ring.var("w")?;
    let tau = TruncatedSeries::univariate(ring, "z", cap, &[ring.zero(), ring.one(), &w + &ring.one()]);
    Ok(tau.reverse()?)
}

/// `rho(X, Y) = w X - w phi~(w X Y)` over `ring`.
pub fn rho(ring: &Ring, cap: u32) -> Result<TruncatedSeries> {
    let w = ring.var("w")?;
    let prec = Precision::total(2, cap);
    let x = TruncatedSeries::variable(ring, &["X", "Y"], prec.clone(), 0);
    let y = TruncatedSeries::variable(ring, &["X", "Y"], prec, 1);
    let inner = (&x * &y).scale(&w);
    Ok(&x.scale(&w) - &phi_tilde(ring, cap)?.compose(&[inner])?.scale(&w))
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorObstruction {
    pub factor: usize,
    pub euler_product_vanishes: bool,
    pub obstruction_vanishes: bool,
}

/// Every identity of the deformation, with residuals.
#[derive(Clone, Debug, Serialize)]
pub struct Z2Report {
    pub cap: u32,
    pub q0: String,
    pub q0_factorization_holds: bool,
    pub q0_vanishes_in_a: bool,
    pub xx_alpha: Vec<String>,
    pub xx_alpha_matches: bool,
    pub correction: String,
    pub correction_residual: String,
    pub correction_matches: bool,
    pub iota_identity_residual: String,
    pub phi_tilde: String,
    pub phi_tilde_leading_terms_match: bool,
    pub rho: String,
    pub rho_integral: bool,
    pub z2cob58_residual: String,
    pub z2cob58_holds: bool,
    pub factors: Vec<FactorObstruction>,
    pub dichotomy_holds: bool,
    pub relations: RelationReport,
}

impl Z2Report {
    pub fn passes(&self) -> bool {
        self.q0_factorization_holds
            && self.q0_vanishes_in_a
            && self.xx_alpha_matches
            && self.correction_matches
            && self.iota_identity_residual == "0"
            && self.phi_tilde_leading_terms_match
            && self.rho_integral
            && self.z2cob58_holds
            && self.dichotomy_holds
            && self.relations.passes()
    }
}

fn tensor(model: &SplitEfgl, a: &Section, b: &Section) -> Result<Section> {
    Ok(&model.embed(a, 0, 2)? * &model.embed(b, 1, 2)?)
}

/// Compute every identity of the deformation at the given cap.
pub fn z2_report(cap: u32) -> Result<Z2Report> {
    let (model, images) = z2_deformation_build(cap)?;
    let ring = model.blocks[0].ring().clone();
    let labels = model.labels();

    // q0 as a polynomial identity in Z[u, w].
    let u_p = Poly::var(2, 0);
    let w_p = Poly::var(2, 1);
    let uw = u_p.mul(&w_p);
    let expected_q0 = super::strickland::deformation_ideal().mul(&Poly::one(2).add(&uw).add(&uw.pow(2)));
    let q0_text = images.display(&images.q[0]);
    let q0_in_a = deformation_ring()?.parse(&q0_text)?.is_zero();

    let x = model.coordinate();
    let xa = model.translate(1)?;
    let xxa = &x * &xa;
    let expected_xxa = model.eval("(1+u)*z^2 + u*z", 1)?;

    let psi = model.coproduct(&x)?;
    let formula = &(&tensor(&model, &x, &x)? + &model.embed(&x, 0, 2)?) + &model.embed(&x, 1, 2)?;
    let correction = &formula - &psi;
    let expected_correction = model.eval("u*(u+2)*iota1_1*(z_1+1)*iota1_2*(z_2+1)", 2)?;
    let correction_residual = &correction - &expected_correction;

    // iota1 (z+1) = u^-1 (x - phi(x x_alpha)).
    let u = ring.var("u")?;
    let t = TruncatedSeries::univariate(&ring, "z", cap, &[ring.zero(), u.clone(), &ring.one() + &u]);
    let phi = t.reverse()?;
    let phi_xxa =
        model.from_parts(vec![xxa.parts[0].iter().map(|s| phi.compose(std::slice::from_ref(s))).collect::<std::result::Result<_, _>>()?]);
    let u_inv = model.constant(1, &[u.try_inverse().expect("u is inverted")]);
    let iota_residual = &model.eval("iota1*(z+1)", 1)? - &(&u_inv * &(&x - &phi_xxa));

    // phi~ and rho over Q[w], checked integral.
    let qw = Ring::from_doc(&RingDoc::new("Q").var("w"))?;
    let pt = phi_tilde(&qw, cap)?;
    let wq = qw.var("w")?;
    let w1 = &wq + &qw.one();
    let head = [qw.zero(), qw.one(), -&w1, (&w1 * &w1).scale(&crate::poly::rational(2))];
    let phi_head_ok = head.iter().enumerate().all(|(k, c)| pt.coeff(&[k as u32]) == *c);
    let rho_q = rho(&qw, cap)?;
    let rho_integral = pt.terms().chain(rho_q.terms()).all(|(_, c)| c.is_integral());

    // z2cob58 on the model: rho evaluated at (x, x_alpha) by its closed form.
    let w = model.constant(1, &[ring.var("w")?]);
    let pt_model = phi_tilde(&ring, cap)?;
    let wxxa = &w * &xxa;
    let composed = model.from_parts(vec![wxxa.parts[0]
        .iter()
        .map(|s| pt_model.compose(std::slice::from_ref(s)))
        .collect::<std::result::Result<_, _>>()?]);
    let rho_model = &(&w * &x) - &(&w * &composed);
    let iota1_rho = &model.eval("iota1", 1)? * &rho_model;
    let uu2 = model.constant(2, &[&u * &(&u + &ring.int(2))]);
    let rhs = &formula - &(&uu2 * &tensor(&model, &iota1_rho, &iota1_rho)?);
    let z2cob58 = &psi - &rhs;

    // The obstruction on each factor of u^-1 A.
    let obstruction = &psi - &formula;
    let mut factors = Vec::new();
    let uu2_parts = (&u * &(&u + &ring.int(2))).components()?;
    for (i, comp) in ring.components()?.iter().enumerate() {
        let vanishes = obstruction.parts[0]
            .iter()
            .all(|s| s.map_coefficients(comp, |c| Ok(c.components()?[i].clone())).map(|m| m.is_zero()).unwrap_or(false));
        factors.push(FactorObstruction { factor: i, euler_product_vanishes: uu2_parts[i].is_zero(), obstruction_vanishes: vanishes });
    }
    let dichotomy_holds =
        factors.iter().all(|f| f.euler_product_vanishes == f.obstruction_vanishes) && factors.iter().any(|f| !f.obstruction_vanishes);

    Ok(Z2Report {
        cap,
        q0_factorization_holds: images.q[0] == expected_q0,
        q0: q0_text,
        q0_vanishes_in_a: q0_in_a,
        xx_alpha: xxa.parts[0].iter().map(TruncatedSeries::display).collect(),
        xx_alpha_matches: xxa == expected_xxa,
        correction: correction.display(&labels),
        correction_matches: correction_residual.is_zero(),
        correction_residual: correction_residual.display(&labels),
        iota_identity_residual: iota_residual.display(&labels),
        phi_tilde: pt.display(),
        phi_tilde_leading_terms_match: phi_head_ok,
        rho: rho_q.display(),
        rho_integral,
        z2cob58_holds: z2cob58.is_zero(),
        z2cob58_residual: z2cob58.display(&labels),
        factors,
        dichotomy_holds,
        relations: images.relation_check(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::Orientation;

    #[test]
    fn model_satisfies_the_axioms() {
        let m = z2_model(5).unwrap();
        let rep = m.axiom_report(Orientation::Covariant).unwrap();
        assert!(rep.passes(), "{:?}", rep.failures());
        assert_eq!(m.translate(1).unwrap(), m.eval("iota0*(u + (1+u)*z) + iota1*z", 1).unwrap());
    }

    #[test]
    fn report_at_small_cap() {
        let rep = z2_report(6).unwrap();
        assert!(rep.passes(), "{rep:#?}");
        assert_eq!(rep.xx_alpha[0], rep.xx_alpha[1]);
    }

    #[test]
    fn rho_leading_terms() {
        let zw = Ring::from_doc(&RingDoc::new("Z").var("w")).unwrap();
        let r = rho(&zw, 5).unwrap();
        // w X - w (w X Y) + w (w+1) (w X Y)^2 + ...
        assert_eq!(r.coeff(&[1, 0]), zw.var("w").unwrap());
        assert_eq!(r.coeff(&[1, 1]), zw.parse("-w^2").unwrap());
        assert_eq!(r.coeff(&[2, 2]), zw.parse("w^4 + w^3").unwrap());
    }
}
