//! End-to-end acceptance run: one line per criterion, exit status 1 if any
//! criterion fails.

use efgl_core::elliptic::{tate_square_check, torsion_rank};
use efgl_core::equivariant::crt::{crt_decompose, random_input};
use efgl_core::equivariant::strickland::{borel_images, lubin_tate_z2_images};
use efgl_core::equivariant::tate::{efgl_from_tate, split_multiplicative};
use efgl_core::equivariant::z2::z2_report;
use efgl_core::equivariant::Orientation;
use efgl_core::fgl::{elliptic_classification_check, fgl_from_weierstrass, fgl_honda, fgl_multiplicative, WeierstrassCurve};
use efgl_core::poly::{rational, Poly};
use efgl_core::ring::{Ring, RingDoc};
use efgl_core::scenario::universal_curve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn within(start: Instant, limit: Duration) -> Outcome {
    ensure(start.elapsed() < limit, || format!("took {:?}, limit {limit:?}", start.elapsed()))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn multiplicative_law() -> Outcome {
    let z = Ring::from_doc(&RingDoc::new("Z")).map_err(err)?;
    let law = fgl_multiplicative(&z, 8);
    for i in 0..8 {
        for j in 0..8 - i {
            let expected = if (i, j) == (1, 0) || (i, j) == (0, 1) || (i, j) == (1, 1) { z.one() } else { z.zero() };
            ensure(law.coefficient(i, j) == expected, || format!("a_{i}{j} = {}", law.coefficient(i, j)))?;
        }
    }
    let two = law.n_series(2).map_err(err)?.display();
    ensure(two == "2*z + z^2", || format!("[2]z = {two}"))?;
    let images = borel_images(&law, 2).map_err(err)?;
    let q: Vec<String> = images.q.iter().map(|p| images.display(p)).collect();
    ensure(q[1] == "u + 2" && q[2] == "1" && q[3..].iter().all(|s| s == "0"), || format!("q = {q:?}"))
}

fn tate_displays() -> Outcome {
    let start = Instant::now();
    let m = efgl_from_tate(2, 1, 6, &["-1".to_string()]).map_err(err)?;
    let same = |actual: efgl_core::equivariant::Section, formula: &str, arity: usize| -> Outcome {
        let expected = m.eval(formula, arity).map_err(err)?;
        ensure(actual == expected, || format!("{formula}: residual {}", (&actual - &expected).display(&m.labels())))
    };
    same(m.coordinate(), "f0*t - 1", 1)?;
    same(m.translate(1).map_err(err)?, "e0*f0*s*t + e1*f1*s*t/q - 1", 1)?;
    same(m.coproduct(&m.coordinate()).map_err(err)?, "(x_1+1)*(x_2+1) - 1 + e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)", 2)?;
    let axioms = m.axiom_report(Orientation::Covariant).map_err(err)?;
    ensure(axioms.passes(), || format!("{:?}", axioms.failures()))?;
    within(start, Duration::from_secs(5))
}

fn non_multiplicativity() -> Outcome {
    let m = efgl_from_tate(2, 1, 6, &["-1".to_string()]).map_err(err)?;
    let rep = m.multiplicativity().map_err(err)?;
    let correction = m.eval("e1_1*e1_2*(x_alpha_1+1)*(x_alpha_2+1)", 2).map_err(err)?;
    ensure(rep.obstruction == correction, || format!("obstruction {}", rep.obstruction_text))?;
    ensure(!rep.torsion_vanishes, || "[2]u_1 vanishes".into())?;
    let split = split_multiplicative(2, 6).map_err(err)?.multiplicativity().map_err(err)?;
    ensure(split.multiplicative && split.torsion_vanishes, || format!("split obstruction {}", split.obstruction_text))
}

fn z2_deformation() -> Outcome {
    let start = Instant::now();
    let rep = z2_report(8).map_err(err)?;
    ensure(rep.q0_factorization_holds && rep.q0_vanishes_in_a, || format!("q0 = {}", rep.q0))?;
    ensure(rep.correction_matches, || format!("correction residual {}", rep.correction_residual))?;
    ensure(rep.z2cob58_holds, || format!("z2cob58 residual {}", rep.z2cob58_residual))?;
    ensure(rep.rho_integral, || format!("rho = {}", rep.rho))?;
    within(start, Duration::from_secs(30))
}

fn lubin_tate() -> Outcome {
    let w = Poly::var(2, 1);
    for h in [1, 2] {
        let law = fgl_honda(2, h, 8).map_err(err)?;
        let images = lubin_tate_z2_images(&law, 1).map_err(err)?;
        let g = images.ideal.clone().ok_or("no ideal")?;
        ensure(images.q[0].is_zero(), || format!("h = {h}: q0 = {}", images.display(&images.q[0])))?;
        for j in 1..=images.truncation() {
            let r = images.q_residual(j);
            ensure(r == w.pow(j as u32).mul(&g).neg(), || format!("h = {h}, j = {j}: {}", images.display(&r)))?;
            ensure(images.reduce(&r).0, || format!("h = {h}, j = {j}: residual not in the ideal"))?;
        }
        let rel = images.relation_check();
        ensure(rel.passes(), || format!("h = {h}: relation failures"))?;
    }
    Ok(())
}

fn elliptic_law() -> Outcome {
    let start = Instant::now();
    let curve = universal_curve().map_err(err)?;
    let u = curve.u_series(10);
    let r = curve.ring();
    let expected = [(3u32, r.int(4)), (7, curve.g2.scale(&rational(-16))), (9, curve.g3.scale(&rational(-64)))];
    for k in 0..10 {
        let want = expected.iter().find(|(e, _)| *e == k).map(|(_, c)| c.clone()).unwrap_or_else(|| r.zero());
        ensure(u.coeff(&[k]) == want, || format!("u coefficient {k}: {}", u.coeff(&[k])))?;
    }
    ensure(curve.u_series_residual(&u).is_zero(), || "chart equation".into())?;
    let (law, _) = fgl_from_weierstrass(&curve, 8).map_err(err)?;
    let axioms = law.axiom_check().map_err(err)?;
    ensure(axioms.passes(), || "axiom residual nonzero".into())?;
    within(start, Duration::from_secs(60))
}

fn specialized_curve() -> Result<WeierstrassCurve, String> {
    let q = Ring::from_doc(&RingDoc::new("Q")).map_err(err)?;
    WeierstrassCurve::new(q.int(4), q.int(1)).map_err(err)
}

fn torsion() -> Outcome {
    let start = Instant::now();
    let curve = specialized_curve()?;
    let rank = torsion_rank(&curve, 5).map_err(err)?;
    ensure(rank.division_degree == 12, || format!("deg psi_5 = {}", rank.division_degree))?;
    ensure(rank.rank == 25, || format!("rank {}", rank.rank))?;
    let sq = tate_square_check(&curve, 5, 30, 2, 0, 0).map_err(err)?;
    ensure(sq.completion.division_relation_in_ideal, || "psi_5 does not vanish modulo ([5]x, x^30, 25)".into())?;
    within(start, Duration::from_secs(120))
}

fn tate_square() -> Outcome {
    let curve = specialized_curve()?;
    let sq = tate_square_check(&curve, 5, 30, 2, 50, 7).map_err(err)?;
    ensure(sq.corner_samples.len() == 50 && sq.corner_samples.iter().all(|c| c.verified), || "corner sample failed".into())?;
    ensure(sq.pair_samples.len() == 50 && sq.pair_samples.iter().all(|c| c.verified && c.preimage.is_some()), || {
        "pair sample failed".into()
    })?;
    ensure(sq.injective && sq.surjective, || format!("{:?}", sq.notes))?;
    ensure(sq.pullback_mod_x_generated_by_one && sq.pullback_mod_x_log_size == 2, || "pullback mod x is not R".into())
}

fn crt() -> Outcome {
    let m = efgl_from_tate(2, 1, 8, &["-1".to_string()]).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for sample in 0..20 {
        let u = random_input(&m, 1, &mut rng).map_err(err)?;
        let mut previous = 0;
        for k in 1..=3 {
            let d = crt_decompose(&m, 1, &u, k).map_err(err)?;
            ensure(d.recombines, || format!("sample {sample}, K = {k}: no exact recombination"))?;
            let order = d.residual_order().unwrap_or(m.cap);
            ensure(order > previous || order >= m.cap, || format!("sample {sample}, K = {k}: order {order} after {previous}"))?;
            previous = order;
        }
    }
    Ok(())
}

fn classification() -> Outcome {
    let rep = elliptic_classification_check(&universal_curve().map_err(err)?, 8).map_err(err)?;
    for g in &rep.images {
        ensure(g.well_defined, || format!("{} undecided", g.generator))?;
        ensure(g.matches, || format!("{} = {}, expected {}", g.generator, g.image, g.expected))?;
    }
    let zero: Vec<_> = rep.images.iter().filter(|g| ["x1", "x2", "x3", "x5"].contains(&g.generator.as_str())).collect();
    ensure(zero.len() == 4 && zero.iter().all(|g| g.image == "0"), || "odd slots do not vanish".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("multiplicative law", multiplicative_law),
        ("tate p=2 displays", tate_displays),
        ("non-multiplicativity", non_multiplicativity),
        ("z2 deformation", z2_deformation),
        ("lubin-tate deformation", lubin_tate),
        ("elliptic formal group", elliptic_law),
        ("5-torsion algebra", torsion),
        ("tate square", tate_square),
        ("crt decomposition", crt),
        ("classification", classification),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({ms} ms): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
