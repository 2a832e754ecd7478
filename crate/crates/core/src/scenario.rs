//! Scenario files: a versioned, strict JSON description of one operation
//! and the checks to run on it, and the runner producing a [`Report`].

use crate::elliptic::{tate_square_check, torsion_rank};
use crate::equivariant::crt::{crt_decompose, random_input};
use crate::equivariant::strickland::{borel_images, lubin_tate_z2_images};
use crate::equivariant::tate::{efgl_from_tate, split_multiplicative, tate_group_algebra};
use crate::equivariant::z2::z2_report;
use crate::equivariant::Orientation;
use crate::fgl::{elliptic_classification_check, fgl_from_weierstrass, fgl_honda, fgl_multiplicative, is_prime, WeierstrassCurve};
use crate::report::{CheckResult, Report, Status};
use crate::ring::{Ring, RingDoc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported scenario version {0} (expected {SCENARIO_VERSION})")]
    Version(u32),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown check `{check}` for operation `{operation}`")]
    UnknownCheck { operation: String, check: String },
    #[error("no bundled scenario named `{0}`")]
    UnknownBundled(String),
    #[error("computation failed: {0}")]
    Computation(String),
}

type Result<T> = std::result::Result<T, ScenarioError>;

fn computation<E: std::fmt::Display>(e: E) -> ScenarioError {
    ScenarioError::Computation(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub operation: Operation,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_level() -> u32 {
    1
}

fn default_orientation() -> Orientation {
    Orientation::Covariant
}

/// Expected displays for the Tate model, as expressions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TateExpectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coproduct: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrtParams {
    pub block: usize,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for CrtParams {
    fn default() -> Self {
        CrtParams { block: 1, samples: 20, iterations: 3, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Operation {
    /// Nothing to compute.
    None,
    /// The multiplicative law over Z and its Borel images.
    MultiplicativeLaw { cap: u32 },
    /// The split model of the Tate curve's equivariant law.
    Tate {
        p: u64,
        #[serde(default = "default_level")]
        r: u32,
        cap: u32,
        alphas: Vec<String>,
        #[serde(default = "default_orientation")]
        orientation: Orientation,
        #[serde(default)]
        expect: TateExpectations,
        #[serde(default)]
        crt: CrtParams,
    },
    /// The deformation over `Z[u,w]/(u(u+2)(1-uw))`.
    Z2Deformation { cap: u32 },
    /// Lubin-Tate deformations of Honda laws at `p = 2`.
    LubinTate { heights: Vec<u32>, cap: u32 },
    /// The formal group of the universal Weierstrass curve.
    EllipticFormalGroup { cap: u32 },
    /// The p-torsion algebra of a rational curve.
    TorsionRank { p: u64, g2: String, g3: String, cap_x: usize, cap_p: u32 },
    /// The localization/completion square of the p-torsion algebra.
    TateSquare { p: u64, g2: String, g3: String, cap_x: usize, cap_p: u32, samples: usize, seed: u64 },
    /// Images of the Lazard generators for the universal curve.
    Classification { cap: u32 },
}

impl Operation {
    pub fn kind(&self) -> &'static str {
        match self {
            Operation::None => "none",
            Operation::MultiplicativeLaw { .. } => "multiplicative-law",
            Operation::Tate { .. } => "tate",
            Operation::Z2Deformation { .. } => "z2-deformation",
            Operation::LubinTate { .. } => "lubin-tate",
            Operation::EllipticFormalGroup { .. } => "elliptic-formal-group",
            Operation::TorsionRank { .. } => "torsion-rank",
            Operation::TateSquare { .. } => "tate-square",
            Operation::Classification { .. } => "classification",
        }
    }

    /// Checks understood by this operation.
    pub fn known_checks(&self) -> &'static [&'static str] {
        match self {
            Operation::None => &[],
            Operation::MultiplicativeLaw { .. } => &["coefficients", "two-series", "borel-images"],
            Operation::Tate { .. } => {
                &["group-ring", "coordinate", "translate", "coproduct", "axioms", "multiplicativity", "split-multiplicativity", "crt"]
            }
            Operation::Z2Deformation { .. } => &["q0", "xx-alpha", "correction", "iota", "rho", "z2cob58", "dichotomy", "relations"],
            Operation::LubinTate { .. } => &["q0", "residuals", "relations"],
            Operation::EllipticFormalGroup { .. } => &["u-series", "chart", "axioms"],
            Operation::TorsionRank { .. } => &["degree", "rank", "division-vanishes"],
            Operation::TateSquare { .. } => &["corners", "pairs", "pullback-mod-x", "bijective"],
            Operation::Classification { .. } => &["vanishing", "x4", "x6"],
        }
    }

    fn validate(&self) -> Result<()> {
        let pre = |ok: bool, clause: &str| if ok { Ok(()) } else { Err(ScenarioError::Precondition(clause.to_string())) };
        match self {
            Operation::None => Ok(()),
            Operation::MultiplicativeLaw { cap } => pre(*cap >= 4, "multiplicative-law needs cap >= 4"),
            Operation::Tate { p, r, cap, alphas, crt, .. } => {
                pre(is_prime(*p), "tate: p must be prime")?;
                pre(*r == 1, "tate: only level r = 1 has a split model")?;
                pre(*cap >= 3, "tate: cap must be at least 3")?;
                pre(alphas.len() as u64 == p - 1, "tate: exactly p - 1 alpha expressions are required")?;
                pre((crt.block as u64) < *p && crt.iterations >= 1, "tate: crt block must be below p and iterations positive")
            }
            Operation::Z2Deformation { cap } => pre(*cap >= 5, "z2-deformation needs cap >= 5"),
            Operation::LubinTate { heights, cap } => {
                pre(!heights.is_empty() && heights.iter().all(|h| *h >= 1), "lubin-tate: heights must be positive")?;
                pre(heights.iter().all(|h| (*cap as u64) > 2u64.pow(*h)), "lubin-tate: cap must exceed 2^h")
            }
            Operation::EllipticFormalGroup { cap } => pre(*cap >= 4, "elliptic-formal-group needs cap >= 4"),
            Operation::TorsionRank { p, cap_x, cap_p, .. } | Operation::TateSquare { p, cap_x, cap_p, .. } => {
                pre(*p > 3 && is_prime(*p), "torsion: p must be a prime above 3")?;
                pre(*cap_x >= 2 && *cap_p >= 1, "torsion: caps must be positive")
            }
            Operation::Classification { cap } => pre(*cap >= 8, "classification needs cap >= 8"),
        }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(ScenarioError::Version(self.version));
        }
        let known = self.operation.known_checks();
        if let Some(bad) = self.checks.iter().find(|c| !known.contains(&c.as_str())) {
            return Err(ScenarioError::UnknownCheck { operation: self.operation.kind().into(), check: bad.clone() });
        }
        self.operation.validate()
    }

    fn wants(&self, check: &str) -> bool {
        self.checks.iter().any(|c| c == check)
    }
}

/// Run a validated scenario. Mathematical failures become report entries;
/// only configuration problems are errors.
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    s.validate()?;
    let start = Instant::now();
    let checks = match &s.operation {
        Operation::None => vec![],
        Operation::MultiplicativeLaw { cap } => multiplicative_law(s, *cap)?,
        Operation::Tate { p, cap, alphas, orientation, expect, crt, .. } => tate(s, *p, *cap, alphas, *orientation, expect, crt)?,
        Operation::Z2Deformation { cap } => z2(s, *cap)?,
        Operation::LubinTate { heights, cap } => lubin_tate(s, heights, *cap)?,
        Operation::EllipticFormalGroup { cap } => elliptic_formal_group(s, *cap)?,
        Operation::TorsionRank { p, g2, g3, cap_x, cap_p } => torsion(s, *p, g2, g3, *cap_x, *cap_p)?,
        Operation::TateSquare { p, g2, g3, cap_x, cap_p, samples, seed } => square(s, *p, g2, g3, *cap_x, *cap_p, *samples, *seed)?,
        Operation::Classification { cap } => classification(s, *cap)?,
    };
    let echo = serde_json::to_value(s).expect("scenarios serialize");
    Ok(Report::new(echo, checks, start.elapsed().as_millis() as u64))
}

fn integers() -> Result<Ring> {
    Ring::from_doc(&RingDoc::new("Z")).map_err(computation)
}

fn multiplicative_law(s: &Scenario, cap: u32) -> Result<Vec<CheckResult>> {
    let law = fgl_multiplicative(&integers()?, cap);
    let mut out = Vec::new();
    if s.wants("coefficients") {
        let r = law.ring();
        let mut residual = law.series().clone();
        residual.add_term(vec![1, 0], -&r.one());
        residual.add_term(vec![0, 1], -&r.one());
        residual.add_term(vec![1, 1], -&r.one());
        out.push(CheckResult::residual("coefficients", residual.display()).with_details(&law.to_json()));
    }
    if s.wants("two-series") {
        let two = law.n_series(2).map_err(computation)?;
        let expected =
            crate::series::TruncatedSeries::univariate(law.ring(), "z", cap, &[law.ring().zero(), law.ring().int(2), law.ring().one()]);
        out.push(CheckResult::residual("two-series", (&two - &expected).display()).with_details(&two.display()));
    }
    if s.wants("borel-images") {
        let images = borel_images(&law, 2).map_err(computation)?;
        let q: Vec<String> = images.q.iter().map(|p| images.display(p)).collect();
        let ok = q[1] == "u + 2" && q[2] == "1" && images.q[3..].iter().all(|p| p.is_zero());
        let report = images.relation_check();
        out.push(
            CheckResult::predicate("borel-images", ok && report.passes(), format!("q = {q:?}"))
                .with_details(&serde_json::json!({ "q": q, "relations": report })),
        );
    }
    Ok(out)
}

fn tate(
    s: &Scenario,
    p: u64,
    cap: u32,
    alphas: &[String],
    orientation: Orientation,
    expect: &TateExpectations,
    crt: &CrtParams,
) -> Result<Vec<CheckResult>> {
    let model = efgl_from_tate(p, 1, cap, alphas).map_err(|e| ScenarioError::Precondition(e.to_string()))?;
    let labels = model.labels();
    let mut out = Vec::new();
    let compare = |name: &str, actual: crate::equivariant::Section, formula: &Option<String>| -> Result<CheckResult> {
        let arity = actual.arity;
        Ok(match formula {
            Some(f) => {
                let expected = model.eval(f, arity).map_err(|e| ScenarioError::Precondition(format!("{name}: {e}")))?;
                CheckResult::residual(name, (&actual - &expected).display(&labels))
                    .with_details(&serde_json::json!({ "expected": f, "value": actual.display(&labels) }))
            }
            None => CheckResult::new(name, Status::Pass, "0").with_details(&serde_json::json!({ "value": actual.display(&labels) })),
        })
    };
    if s.wants("group-ring") {
        let alg = tate_group_algebra(p, 1, 1).map_err(computation)?;
        let mut problems = Vec::new();
        for i in 0..p {
            let h = alg.parse(&format!("f{i}*t"), 1).map_err(computation)?;
            for c in alg.hopf_checks(&h).map_err(computation)? {
                if !c.passed {
                    problems.push(format!("f{i}*t: {} {}", c.name, c.detail));
                }
            }
        }
        let psi = alg.coproduct(&alg.parse("f0*t", 1).map_err(computation)?).map_err(computation)?;
        out.push(
            CheckResult::predicate("group-ring", problems.is_empty(), problems.join("; "))
                .with_details(&serde_json::json!({ "coproduct of f0*t": alg.display(&psi, 2) })),
        );
    }
    let err = |e: crate::equivariant::EquivariantError| computation(e);
    if s.wants("coordinate") {
        out.push(compare("coordinate", model.coordinate(), &expect.coordinate)?);
    }
    if s.wants("translate") {
        out.push(compare("translate", model.translate(1).map_err(err)?, &expect.translate)?);
    }
    if s.wants("coproduct") {
        out.push(compare("coproduct", model.coproduct(&model.coordinate()).map_err(err)?, &expect.coproduct)?);
    }
    if s.wants("axioms") {
        let rep = model.axiom_report(orientation).map_err(err)?;
        let failures: Vec<String> = rep.failures().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        out.push(CheckResult::predicate("axioms", rep.passes(), failures.join("; ")).with_details(&rep));
    }
    if s.wants("multiplicativity") {
        let rep = model.multiplicativity().map_err(err)?;
        let mut problems = Vec::new();
        if rep.multiplicative {
            problems.push("obstruction vanishes".to_string());
        }
        if rep.torsion_vanishes {
            problems.push("[p^r] u_L vanishes for every L".to_string());
        }
        let mut residual = "0".to_string();
        if let Some(f) = &expect.obstruction {
            let expected = model.eval(f, 2).map_err(|e| ScenarioError::Precondition(format!("obstruction: {e}")))?;
            residual = (&rep.obstruction - &expected).display(&labels);
            if residual != "0" {
                problems.push("obstruction differs from the expected correction".into());
            }
        }
        let status = Status::from_bool(problems.is_empty());
        let mut c = CheckResult::new("multiplicativity", status, residual).with_details(&rep);
        if !problems.is_empty() {
            c = c.with_witness(Some(problems.join("; ")));
        }
        out.push(c);
    }
    if s.wants("split-multiplicativity") {
        let rep = split_multiplicative(p, cap).map_err(err)?.multiplicativity().map_err(err)?;
        let ok = rep.multiplicative && rep.torsion_vanishes;
        out.push(CheckResult::new("split-multiplicativity", Status::from_bool(ok), rep.obstruction_text.clone()).with_details(&rep));
    }
    if s.wants("crt") {
        let mut rng = ChaCha8Rng::seed_from_u64(crt.seed);
        let mut samples = Vec::new();
        let mut problems = Vec::new();
        for sample in 0..crt.samples {
            let u = random_input(&model, crt.block, &mut rng).map_err(err)?;
            let mut orders = Vec::new();
            for k in 1..=crt.iterations {
                let d = crt_decompose(&model, crt.block, &u, k).map_err(err)?;
                if !d.recombines {
                    problems.push(format!("sample {sample}: K = {k} does not recombine"));
                }
                orders.push(d.residual_order());
                if k == crt.iterations && sample == 0 {
                    samples.push(d.summary());
                }
            }
            let effective: Vec<u32> = orders.iter().map(|o| o.unwrap_or(cap)).collect();
            let increasing = effective.windows(2).all(|w| w[1] > w[0] || w[1] >= cap);
            let bounded = effective.iter().enumerate().all(|(i, o)| *o > i as u32);
            if !(increasing && bounded) {
                problems.push(format!("sample {sample}: residual orders {orders:?}"));
            }
        }
        out.push(
            CheckResult::predicate("crt", problems.is_empty(), problems.join("; "))
                .with_details(&serde_json::json!({ "samples": crt.samples, "first": samples })),
        );
    }
    Ok(out)
}

fn z2(s: &Scenario, cap: u32) -> Result<Vec<CheckResult>> {
    let rep = z2_report(cap).map_err(computation)?;
    let mut out = Vec::new();
    for check in &s.checks {
        out.push(match check.as_str() {
            "q0" => CheckResult::predicate("q0", rep.q0_factorization_holds && rep.q0_vanishes_in_a, format!("q0 = {}", rep.q0))
                .with_details(
                    &serde_json::json!({ "q0": rep.q0, "factorization": rep.q0_factorization_holds, "zero_in_A": rep.q0_vanishes_in_a }),
                ),
            "xx-alpha" => CheckResult::predicate("xx-alpha", rep.xx_alpha_matches, rep.xx_alpha.join(", ")).with_details(&rep.xx_alpha),
            "correction" => CheckResult::residual("correction", rep.correction_residual.clone()).with_details(&rep.correction),
            "iota" => CheckResult::residual("iota", rep.iota_identity_residual.clone()),
            "rho" => CheckResult::predicate("rho", rep.rho_integral && rep.phi_tilde_leading_terms_match, "rho is not integral over Z[w]")
                .with_details(&serde_json::json!({ "phi_tilde": rep.phi_tilde, "rho": rep.rho })),
            "z2cob58" => CheckResult::residual("z2cob58", rep.z2cob58_residual.clone()),
            "dichotomy" => {
                CheckResult::predicate("dichotomy", rep.dichotomy_holds, "obstruction does not track u(u+2)").with_details(&rep.factors)
            }
            "relations" => {
                let failing: Vec<String> = rep.relations.relations.iter().filter(|r| !r.vanishes).map(|r| r.relation.clone()).collect();
                CheckResult::predicate("relations", failing.is_empty(), failing.join(", ")).with_details(&rep.relations)
            }
            _ => unreachable!("validated"),
        });
    }
    Ok(out)
}

fn lubin_tate(s: &Scenario, heights: &[u32], cap: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for &h in heights {
        let law = fgl_honda(2, h, cap).map_err(computation)?;
        let images = lubin_tate_z2_images(&law, 1).map_err(computation)?;
        let g = images.ideal.clone().expect("Lubin-Tate images carry an ideal");
        for check in &s.checks {
            let name = format!("{check} (h = {h})");
            out.push(match check.as_str() {
                "q0" => CheckResult::residual(&name, images.display(&images.q[0])),
                "residuals" => {
                    let w = crate::poly::Poly::var(2, 1);
                    let bad: Vec<String> = (1..=images.truncation())
                        .filter(|&j| images.q_residual(j) != w.pow(j as u32).mul(&g).neg())
                        .map(|j| format!("j = {j}: {}", images.display(&images.q_residual(j))))
                        .collect();
                    let shown: Vec<String> = (1..=images.truncation().min(3)).map(|j| images.display(&images.q_residual(j))).collect();
                    CheckResult::predicate(&name, bad.is_empty(), bad.join("; "))
                        .with_details(&serde_json::json!({ "generator": images.display(&g), "first_residuals": shown }))
                }
                "relations" => {
                    let rep = images.relation_check();
                    let failing: Vec<String> = rep.relations.iter().filter(|r| !r.vanishes).map(|r| r.relation.clone()).collect();
                    CheckResult::predicate(&name, failing.is_empty(), failing.join(", ")).with_details(&rep)
                }
                _ => unreachable!("validated"),
            });
        }
    }
    Ok(out)
}

/// The universal curve over `Z[1/6][g2, g3][1/Delta]`.
pub fn universal_curve() -> std::result::Result<WeierstrassCurve, crate::fgl::FglError> {
    let r = Ring::from_doc(&RingDoc::new("Z").weighted_var("g2", 4).weighted_var("g3", 6).invert("6").invert("g2^3 - 27*g3^2"))?;
    WeierstrassCurve::new(r.var("g2")?, r.var("g3")?)
}

fn rational_curve(g2: &str, g3: &str) -> Result<WeierstrassCurve> {
    let q = Ring::from_doc(&RingDoc::new("Q")).map_err(computation)?;
    let parse = |t: &str| q.parse(t).map_err(|e| ScenarioError::Precondition(format!("curve coefficient `{t}`: {e}")));
    WeierstrassCurve::new(parse(g2)?, parse(g3)?).map_err(|e| ScenarioError::Precondition(e.to_string()))
}

fn elliptic_formal_group(s: &Scenario, cap: u32) -> Result<Vec<CheckResult>> {
    let curve = universal_curve().map_err(computation)?;
    let mut out = Vec::new();
    if s.wants("u-series") {
        let u = curve.u_series(cap.max(10));
        let expected = curve.ring().parse("0").map_err(computation)?;
        let r = curve.ring();
        let target = [(3u32, r.int(4)), (7, curve.g2.scale(&crate::poly::rational(-16))), (9, curve.g3.scale(&crate::poly::rational(-64)))];
        let mut diff = crate::series::TruncatedSeries::zero(r, &["x"], crate::series::Precision::total(1, 10));
        for k in 0..10u32 {
            let want = target.iter().find(|(e, _)| *e == k).map(|(_, c)| c.clone()).unwrap_or_else(|| expected.clone());
            diff.add_term(vec![k], &u.coeff(&[k]) - &want);
        }
        out.push(
            CheckResult::residual("u-series", diff.display()).with_details(&u.truncate(&crate::series::Precision::total(1, 10)).display()),
        );
    }
    if s.wants("chart") {
        let u = curve.u_series(cap);
        out.push(CheckResult::residual("chart", curve.u_series_residual(&u).display()));
    }
    if s.wants("axioms") {
        let (law, _) = fgl_from_weierstrass(&curve, cap).map_err(computation)?;
        let rep = law.axiom_check().map_err(computation)?;
        let residuals = [
            ("left unit", &rep.left_unit),
            ("right unit", &rep.right_unit),
            ("commutativity", &rep.commutativity),
            ("associativity", &rep.associativity),
        ];
        let failing: Vec<String> = residuals.iter().filter(|(_, r)| !r.is_zero()).map(|(n, r)| format!("{n}: {}", r.display())).collect();
        let shown: std::collections::BTreeMap<&str, String> = residuals.iter().map(|(n, r)| (*n, r.display())).collect();
        out.push(CheckResult::predicate("axioms", failing.is_empty(), failing.join("; ")).with_details(&shown));
    }
    Ok(out)
}

fn torsion(s: &Scenario, p: u64, g2: &str, g3: &str, cap_x: usize, cap_p: u32) -> Result<Vec<CheckResult>> {
    let curve = rational_curve(g2, g3)?;
    let rank = torsion_rank(&curve, p).map_err(computation)?;
    let mut out = Vec::new();
    if s.wants("degree") {
        let expected = ((p * p - 1) / 2) as usize;
        out.push(
            CheckResult::predicate("degree", rank.division_degree == expected, format!("degree {}", rank.division_degree))
                .with_details(&rank),
        );
    }
    if s.wants("rank") {
        out.push(
            CheckResult::predicate("rank", rank.rank as u64 == p * p && rank.status == "pass", format!("rank {}", rank.rank))
                .with_details(&rank),
        );
    }
    if s.wants("division-vanishes") {
        let sq = tate_square_check(&curve, p, cap_x, cap_p, 0, 0).map_err(computation)?;
        out.push(
            CheckResult::predicate(
                "division-vanishes",
                sq.completion.division_relation_in_ideal && sq.completion.modulus_in_ideal,
                "division relation not in ([p]x, x^M, p^nu)",
            )
            .with_details(&sq.completion),
        );
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn square(s: &Scenario, p: u64, g2: &str, g3: &str, cap_x: usize, cap_p: u32, samples: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let curve = rational_curve(g2, g3)?;
    let rep = tate_square_check(&curve, p, cap_x, cap_p, samples, seed).map_err(computation)?;
    let mut out = Vec::new();
    if s.wants("corners") {
        let ok = rep.corner_samples.len() == samples && rep.corner_samples.iter().all(|c| c.verified);
        out.push(
            CheckResult::predicate("corners", ok, format!("{} corner samples", rep.corner_samples.len()))
                .with_details(&rep.corner_samples.first()),
        );
    }
    if s.wants("pairs") {
        let ok = rep.pair_samples.len() == samples && rep.pair_samples.iter().all(|c| c.verified && c.preimage.is_some());
        out.push(
            CheckResult::predicate("pairs", ok, format!("{} pair samples", rep.pair_samples.len())).with_details(&rep.pair_samples.first()),
        );
    }
    if s.wants("pullback-mod-x") {
        let ok = rep.pullback_mod_x_generated_by_one && rep.pullback_mod_x_log_size == cap_p;
        out.push(CheckResult::predicate("pullback-mod-x", ok, format!("log size {}", rep.pullback_mod_x_log_size)));
    }
    if s.wants("bijective") {
        let status = match rep.status.as_str() {
            "pass" => Status::Pass,
            "undecided" => Status::Undecided,
            _ => Status::Fail,
        };
        let residual = if status == Status::Pass { "0".to_string() } else { rep.notes.join("; ") };
        out.push(CheckResult::new("bijective", status, residual).with_details(&serde_json::json!({
            "injective": rep.injective, "surjective": rep.surjective,
            "log_sizes": [rep.log_size_top_left, rep.log_size_top_right, rep.log_size_bottom_left, rep.log_size_bottom_right],
            "notes": rep.notes,
        })));
    }
    Ok(out)
}

fn classification(s: &Scenario, cap: u32) -> Result<Vec<CheckResult>> {
    let curve = universal_curve().map_err(computation)?;
    let rep = elliptic_classification_check(&curve, cap).map_err(computation)?;
    let mut out = Vec::new();
    let slot = |name: &str| rep.images.iter().find(|g| g.generator == name).expect("six generator slots");
    let decided = |ok: bool, well_defined: bool| if !well_defined { Status::Undecided } else { Status::from_bool(ok) };
    if s.wants("vanishing") {
        let gens = ["x1", "x2", "x3", "x5"];
        let ok = gens.iter().all(|g| slot(g).image == "0");
        let wd = gens.iter().all(|g| slot(g).well_defined);
        let shown: Vec<String> = gens.iter().map(|g| format!("{g} = {}", slot(g).image)).collect();
        out.push(CheckResult::new("vanishing", decided(ok, wd), if ok { "0".into() } else { shown.join(", ") }).with_details(&shown));
    }
    for g in ["x4", "x6"] {
        if s.wants(g) {
            let img = slot(g);
            let c = CheckResult::new(
                g,
                decided(img.matches, img.well_defined),
                if img.matches { "0".into() } else { format!("{} - ({})", img.image, img.expected) },
            );
            out.push(c.with_details(&serde_json::json!({ "image": img.image, "expected": img.expected, "convention": rep.convention })));
        }
    }
    Ok(out)
}

/// A bundled scenario: name and JSON text.
pub struct Bundled {
    pub name: &'static str,
    pub json: &'static str,
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(Bundled { name: $name, json: include_str!(concat!("../scenarios/", $name, ".json")) }),*]
    };
}

/// Scenarios shipped with the library.
pub const BUNDLED: &[Bundled] = bundled!(
    "multiplicative-law",
    "tate-displays",
    "tate-non-multiplicative",
    "z2-deformation",
    "lubin-tate",
    "elliptic-formal-group",
    "torsion-rank-5",
    "tate-square-5",
    "tate-crt",
    "elliptic-classification",
    "tate-p2",
    "empty-checks",
    "z2def-full",
);

pub fn bundled(name: &str) -> Result<Scenario> {
    let b = BUNDLED.iter().find(|b| b.name == name).ok_or_else(|| ScenarioError::UnknownBundled(name.to_string()))?;
    Scenario::from_json(b.json)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_parses() {
        for b in BUNDLED {
            let s = Scenario::from_json(b.json).unwrap_or_else(|e| panic!("{}: {e}", b.name));
            assert_eq!(s.name, b.name);
        }
    }

    #[test]
    fn strict_parsing() {
        let base = r#"{"version": 1, "name": "x", "operation": {"kind": "none"}, "checks": []}"#;
        assert!(Scenario::from_json(base).is_ok());
        let extra = r#"{"version": 1, "name": "x", "operation": {"kind": "none"}, "bogus": 1}"#;
        assert!(matches!(Scenario::from_json(extra), Err(ScenarioError::Malformed(_))));
        let extra_inner = r#"{"version": 1, "name": "x", "operation": {"kind": "z2-deformation", "cap": 6, "p": 2}}"#;
        assert!(matches!(Scenario::from_json(extra_inner), Err(ScenarioError::Malformed(_))));
        let version = r#"{"version": 2, "name": "x", "operation": {"kind": "none"}}"#;
        assert!(matches!(Scenario::from_json(version), Err(ScenarioError::Version(2))));
        let check = r#"{"version": 1, "name": "x", "operation": {"kind": "z2-deformation", "cap": 6}, "checks": ["nope"]}"#;
        assert!(matches!(Scenario::from_json(check), Err(ScenarioError::UnknownCheck { .. })));
        let pre = r#"{"version": 1, "name": "x", "operation": {"kind": "tate", "p": 4, "cap": 6, "alphas": ["-1"]}}"#;
        assert!(matches!(Scenario::from_json(pre), Err(ScenarioError::Precondition(_))));
    }

    #[test]
    fn empty_checks_pass() {
        let r = run_scenario(&bundled("empty-checks").unwrap()).unwrap();
        assert_eq!(r.status(), Status::Pass);
        assert!(r.body.checks.is_empty());
    }

    #[test]
    fn non_unit_alpha_is_a_precondition_error() {
        let text = r#"{"version": 1, "name": "x", "operation": {"kind": "tate", "p": 2, "cap": 5, "alphas": ["2"]}, "checks": ["axioms"]}"#;
        let s = Scenario::from_json(text).unwrap();
        assert!(matches!(run_scenario(&s), Err(ScenarioError::Precondition(_))));
    }

    #[test]
    fn wrong_expectation_is_a_failure_not_an_error() {
        let text = r#"{"version": 1, "name": "x", "operation": {"kind": "tate", "p": 2, "cap": 5, "alphas": ["-1"],
            "expect": {"coordinate": "f0*t"}}, "checks": ["coordinate"]}"#;
        let r = run_scenario(&Scenario::from_json(text).unwrap()).unwrap();
        assert_eq!(r.status(), Status::Fail);
        assert_ne!(r.check("coordinate").unwrap().residual, "0");
    }
}
