//! One pass/fail line per acceptance criterion, with pinned tolerances and
//! runtime bounds. Run with `--nocapture` to see the lines.

mod common;

use std::time::{Duration, Instant};

use common::{brute_force_max, decimal_sign, dot, random_vector, vec_of, Vector};
use conerisk::cone::{dual_cone, intersect, lp_solve, minkowski_sum, LpOutcome, PolyCone};
use conerisk::consistency::{decompose, epsilon, is_v_time_consistent, theorem_main_report, validate_decomposition};
use conerisk::corpus::{self, build, random_scenario, NumeraireChoice};
use conerisk::field::Scalar;
use conerisk::lcg::Lcg;
use conerisk::market::{lifted_dual, sackv_check};
use conerisk::risk::{coherence_suite, QuadBall};
use conerisk::scenario::Scenario;
use conerisk::space::{Measure, RandomVec, StoppingTime};
use conerisk::stability::{
    admissible, crucial_claim_check, dual_stability, paste, stable_hull, vstability_witness_search,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;

const CAP: u64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        Outcome { pass: false, detail: format!("{summary}; {}", failures.join("; ")) }
    }
}

fn scalars(xs: &[Scalar]) -> String {
    format!("({})", xs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "))
}

fn claim(xs: Vector) -> RandomVec {
    RandomVec::scalar(xs)
}

fn avar_golden() -> Outcome {
    let s = build("avar4-unit", NumeraireChoice::Unit).unwrap();
    let x0 = claim(corpus::avar_claim());
    let mut bad = Vec::new();
    let r0 = s.rm.rho(0, &x0).unwrap();
    if r0.as_slice() != &vec_of(&["0", "0", "0", "0"])[..] {
        bad.push(format!("ρ_0(X⁰) = {}", scalars(r0.as_slice())));
    }
    let r1 = s.rm.rho(1, &x0).unwrap();
    if r1.as_slice() != &vec_of(&["1", "1", "-1", "-1"])[..] {
        bad.push(format!("ρ_1(X⁰) = {}", scalars(r1.as_slice())));
    }
    let r01 = s.rm.rho(0, &r1).unwrap();
    if r01.as_slice() != &vec_of(&["1", "1", "1", "1"])[..] {
        bad.push(format!("ρ_0(ρ_1(X⁰)) = {}", scalars(r01.as_slice())));
    }
    let a1 = s.rm.acceptance_cone(1).unwrap();
    if !a1.equals(&PolyCone::nonpositive(4).unwrap()) {
        bad.push("A_1 differs from L∞_−".into());
    }
    let a0 = s.rm.acceptance_cone(0).unwrap();
    let ray = PolyCone::from_gens(4, vec![corpus::avar_claim()]).unwrap();
    let expected = minkowski_sum(&[&ray, &PolyCone::nonpositive(4).unwrap()]).unwrap();
    if !a0.equals(&expected) {
        bad.push("A_0 differs from cone{X⁰} ⊕ L∞_−".into());
    }
    outcome(bad, "ρ_0(X⁰)=0, ρ_1(X⁰)=(1,1,−1,−1), ρ_0ρ_1(X⁰)=1, A_1=L∞_−, A_0=cone{X⁰}⊕L∞_−".into())
}

fn avar_triples() -> Outcome {
    let mut bad = Vec::new();
    let unit = build("avar4-unit", NumeraireChoice::Unit).unwrap();
    let r = theorem_main_report(&unit.rm, &unit.v, CAP).unwrap();
    if r.time_consistent || r.representable || r.dual_stable {
        bad.push(format!("V=1 triple ({}, {}, {})", r.time_consistent, r.representable, r.dual_stable));
    }
    match &r.certificates.pasting_witness {
        Some(w) if w.pasted == vec_of(&["1", "0", "0", "0"]) => {}
        other => bad.push(format!("V=1 pasting certificate {:?}", other.as_ref().map(|w| scalars(&w.pasted)))),
    }
    let paper = build("avar4-paper", NumeraireChoice::Paper).unwrap();
    let r = theorem_main_report(&paper.rm, &paper.v, CAP).unwrap();
    if !(r.time_consistent && r.representable && r.dual_stable) {
        bad.push(format!("paper V triple ({}, {}, {})", r.time_consistent, r.representable, r.dual_stable));
    }
    if r.certificates.pasting_witness.is_some() {
        bad.push("paper V has a pasting witness".into());
    }
    outcome(bad, "V=1: (false,false,false) with pasted (1,0,0,0); V=(1,3·1₁+1_{2,3,4}): (true,true,true)".into())
}

fn identities(s: &Scenario) -> Vec<String> {
    let space = s.rm.space();
    let mut bad = Vec::new();
    let a0 = s.rm.acceptance_cone(0).unwrap();
    if !sackv_check(space, &a0, &s.v).unwrap().holds {
        bad.push(format!("{}: sackV", s.name));
    }
    for t in 0..space.horizon() {
        if !crucial_claim_check(&s.rm, &s.v, t).unwrap().0 {
            bad.push(format!("{}: K_{t} ≠ (M_{t})*", s.name));
        }
    }
    let cones: Vec<PolyCone> = (0..=space.horizon()).map(|t| s.rm.acceptance_cone(t).unwrap()).collect();
    let refs: Vec<&PolyCone> = cones.iter().collect();
    let left = dual_cone(&intersect(&refs).unwrap(), space.probs()).unwrap();
    let duals: Vec<PolyCone> = cones.iter().map(|c| dual_cone(c, space.probs()).unwrap()).collect();
    let right = minkowski_sum(&duals.iter().collect::<Vec<_>>()).unwrap();
    if !left.equals(&right) {
        bad.push(format!("{}: dual of intersection ≠ sum of duals", s.name));
    }
    let back = dual_cone(&dual_cone(&a0, space.probs()).unwrap(), space.probs()).unwrap();
    if !back.equals(&a0) {
        bad.push(format!("{}: A_0** ≠ A_0", s.name));
    }
    let d = lifted_dual(&s.rm, &s.v).unwrap();
    let w = space.weights(s.v.width());
    if !dual_cone(&dual_cone(&d, &w).unwrap(), &w).unwrap().equals(&d) {
        bad.push(format!("{}: lifted dual bipolar", s.name));
    }
    match theorem_main_report(&s.rm, &s.v, CAP) {
        Ok(r) if r.agreement => {}
        Ok(_) => bad.push(format!("{}: verdicts disagree", s.name)),
        Err(e) => bad.push(format!("{}: {e}", s.name)),
    }
    bad
}

fn theorem_identities() -> Outcome {
    let mut scenarios: Vec<Scenario> = ["avar4-unit", "avar4-paper", "haezendonck4-hull-unit", "haezendonck4-hull-paper"]
        .iter()
        .map(|n| build(n, NumeraireChoice::Paper).unwrap())
        .collect();
    scenarios.extend((1..=100).map(random_scenario));
    let max_atoms = scenarios.iter().map(|s| s.rm.space().atoms()).max().unwrap();
    let bad: Vec<String> = scenarios.iter().flat_map(identities).collect();
    outcome(
        bad,
        format!("{} scenarios (≤ {max_atoms} atoms): sackV, K_t = (M_t)*, coneflip, bipolar, agreement", scenarios.len()),
    )
}

fn haezendonck() -> Outcome {
    let mut bad = Vec::new();
    let unit = build("haezendonck4-unit", NumeraireChoice::Unit).unwrap();
    let space = unit.rm.space();
    let members = corpus::haezendonck_witnesses();
    let (lambda, m) = (&members[1], &members[2]);
    let tau = StoppingTime::constant(4, 1);
    if !admissible(space, &unit.v, lambda, m, &tau) {
        bad.push("(Λ, M, τ≡1) not admissible under V=1".into());
    }
    let pasted = paste(space, &Measure::new(lambda.clone()), &Measure::new(m.clone()), &tau).unwrap();
    let density = pasted.density(space);
    if density != vec_of(&["4", "0", "0", "0"]) {
        bad.push(format!("pasted density {}", scalars(&density)));
    }
    let norm = QuadBall::square_sum(&pasted.weights);
    if !(norm == Scalar::one() && norm > Scalar::ratio(1, 2)) {
        bad.push(format!("Σ q² = {norm}"));
    }
    if unit.rm.set().contains(&pasted.weights) {
        bad.push("ball oracle accepts the pasting".into());
    }
    let found = vstability_witness_search(&unit.rm, &unit.v, CAP).unwrap();
    let found_detail = match &found {
        Some(w) => format!("search hit (Q{}, Q{}, τ={:?}) → {}", w.first, w.second, w.tau, scalars(&w.pasted)),
        None => {
            bad.push("V=1 search found nothing".into());
            String::new()
        }
    };
    let paper = build("haezendonck4-paper", NumeraireChoice::Paper).unwrap();
    if let Some(w) = vstability_witness_search(&paper.rm, &paper.v, CAP).unwrap() {
        bad.push(format!("quad2 numéraires admit witness {}", scalars(&w.pasted)));
    }
    outcome(bad, format!("(Λ,M,τ≡1) density 4·1₁, Σq² = 1 > 1/2; {found_detail}; none under √2 numéraires"))
}

fn txcost() -> Outcome {
    let mut bad = Vec::new();
    let lambda = Scalar::ratio(1, 10);
    let up = Scalar::one() + &lambda;
    let limit = &(&up * &up) / &(Scalar::one() - &lambda);
    let limit_gap = &limit - &up;
    let mut notes = Vec::new();
    for n in [4, 8, 16] {
        let s = corpus::build_txcost(n, &lambda, &Scalar::from_int(3)).unwrap();
        let v1 = claim(corpus::txcost_stock(&s));
        let r0 = s.rm.rho(0, &v1).unwrap();
        if r0.as_slice().iter().any(|x| *x != up) {
            bad.push(format!("n={n}: ρ_0(v₁) = {}", r0.get(0, 0)));
        }
        let r1 = s.rm.rho(1, &v1).unwrap();
        let r01 = s.rm.rho(0, &r1).unwrap();
        let gap = r01.get(0, 0) - &up;
        if !gap.is_positive() {
            bad.push(format!("n={n}: no gap ({gap})"));
        }
        let rel = ((&gap - &limit_gap) / &limit_gap).abs();
        if n == 16 && rel > Scalar::ratio(5, 100) {
            bad.push(format!("n=16: gap {gap} off the limit {limit_gap} by {:.4}", rel.to_f64_lossy()));
        }
        notes.push(format!("n={n} gap={gap}"));
    }
    let s4 = build("txcost4", NumeraireChoice::Paper).unwrap();
    let stable = dual_stability(&s4.rm, &s4.v).unwrap().stable;
    if !stable {
        bad.push("n=4: A_0(V)* not V-m-stable".into());
    }
    notes.push(format!("limit gap {limit_gap}; V-m-stable at n=4: {stable}; n=8,16 stability not decided"));
    outcome(bad, notes.join(", "))
}

fn random_claim(g: &mut Lcg, n: usize) -> RandomVec {
    claim(random_vector(g, n, -6, 6, 3))
}

fn property_suites() -> Outcome {
    let mut bad = Vec::new();
    let mut counts = Vec::new();

    // coherence axioms
    let mut coherent: Vec<Scenario> = ["avar4-unit", "haezendonck4-hull-unit", "txcost4"]
        .iter()
        .map(|n| build(n, NumeraireChoice::Paper).unwrap())
        .collect();
    coherent.extend((1..=20).map(random_scenario));
    for s in &coherent {
        for r in coherence_suite(&s.rm, 100, 7).unwrap() {
            if !r.passed() {
                bad.push(format!("{}: {} fails: {}", s.name, r.axiom, r.counterexamples[0]));
            }
        }
    }
    counts.push(format!("coherence on {} scenarios", coherent.len()));

    // ε against ρ, and decomposition
    let mut cross: Vec<Scenario> = ["avar4-unit", "avar4-paper", "haezendonck4-hull-unit", "haezendonck4-hull-paper"]
        .iter()
        .map(|n| build(n, NumeraireChoice::Paper).unwrap())
        .collect();
    cross.extend((1..=20).map(random_scenario));
    let mut g = Lcg::new(11);
    let mut decomposed = 0;
    for s in &cross {
        let space = s.rm.space();
        let n = space.atoms();
        let verdict = is_v_time_consistent(&s.rm, &s.v).unwrap();
        let mut claims: Vec<RandomVec> = (0..20).map(|_| random_claim(&mut g, n)).collect();
        if let Some(f) = &verdict.failure {
            claims[19] = claim(f.claim.clone());
        }
        let mut all_equal = true;
        for x in &claims {
            for t in 0..space.horizon() {
                let e = epsilon(&s.rm, &s.v, t, x).unwrap();
                let r = s.rm.rho(t, x).unwrap();
                if e.as_slice().iter().zip(r.as_slice()).any(|(a, b)| a < b) {
                    bad.push(format!("{}: ε_{t} < ρ_{t}", s.name));
                }
                all_equal &= e == r;
            }
        }
        if all_equal != verdict.holds {
            bad.push(format!("{}: ε = ρ on all claims is {all_equal}, verdict {}", s.name, verdict.holds));
        }
        if verdict.holds {
            for x in &claims {
                match decompose(&s.rm, &s.v, x) {
                    Ok(d) => {
                        if let Err(e) = validate_decomposition(&s.rm, &s.v, x, &d) {
                            bad.push(format!("{}: {e}", s.name));
                        }
                        decomposed += 1;
                    }
                    Err(e) => bad.push(format!("{}: decompose failed: {e}", s.name)),
                }
            }
        }
    }
    counts.push(format!("ε/ρ on {} scenarios, {decomposed} decompositions", cross.len()));

    let (cases, eq_bad) = eqstab_suite(200);
    bad.extend(eq_bad);
    counts.push(format!("{cases} stability-characterisation cases"));
    outcome(bad, counts.join(", "))
}

/// Samples `X = 1_F α Y + 1_{F^c} β W` with `E[X|F_t] = E[Z|F_t]` from the
/// stable hull of a random density cone and checks `X` stays inside.
fn eqstab_suite(target: usize) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut cases = 0;
    let mut seed = 0;
    let mut g = Lcg::new(2024);
    while cases < target {
        seed += 1;
        let s = random_scenario(seed);
        let space = s.rm.space();
        let n = space.atoms();
        let count = g.range(1, 4) as usize;
        let gens: Vec<Vector> = (0..count).map(|_| random_vector(&mut g, n, 0, 4, 1)).collect();
        let d = PolyCone::from_gens(n, gens).unwrap();
        let hull = stable_hull(space, &d, 1).unwrap();
        let hg = hull.gens().to_vec();
        if hg.is_empty() {
            continue;
        }
        let combo = |g: &mut Lcg| -> Vector {
            let mut out = vec![Scalar::zero(); n];
            for h in &hg {
                let c = g.rational(0, 3, 2);
                for (o, x) in out.iter_mut().zip(h) {
                    *o += &(&c * x);
                }
            }
            out
        };
        for _ in 0..20 {
            let (y, w, z) = (combo(&mut g), combo(&mut g), combo(&mut g));
            let t = g.range(0, space.horizon() as i64) as usize;
            let mut x = vec![Scalar::zero(); n];
            let mut ok = true;
            for block in space.partition(t).blocks() {
                let in_f = g.chance(1, 2);
                let src = if in_f { &y } else { &w };
                let ms: Scalar = block.iter().map(|&a| &space.probs()[a] * &src[a]).sum();
                let mz: Scalar = block.iter().map(|&a| &space.probs()[a] * &z[a]).sum();
                let factor = match (ms.is_zero(), mz.is_zero()) {
                    (false, false) => &mz / &ms,
                    (true, true) => g.rational(1, 4, 3),
                    _ => {
                        ok = false;
                        break;
                    }
                };
                for &a in block {
                    x[a] = &factor * &src[a];
                }
            }
            if !ok {
                continue;
            }
            cases += 1;
            if !hull.contains(&x) {
                bad.push(format!("seed {seed} t={t}: X = {} left the stable hull", scalars(&x)));
            }
            if cases == target {
                break;
            }
        }
    }
    (cases, bad)
}

fn random_cone(g: &mut Lcg) -> PolyCone {
    let dim = g.range(1, 8) as usize;
    let count = g.range(1, dim as i64 + 4) as usize;
    let vs: Vec<Vector> = (0..count).map(|_| random_vector(g, dim, -3, 3, 1)).collect();
    if g.chance(1, 2) {
        PolyCone::from_gens(dim, vs).unwrap()
    } else {
        PolyCone::from_ineqs(dim, vs).unwrap()
    }
}

/// Whether `v` is a nonnegative combination of `others`, by the library LP
/// over generator weights.
fn in_cone_of(v: &[Scalar], others: &[Vector]) -> bool {
    if v.iter().all(Scalar::is_zero) {
        return true;
    }
    if others.is_empty() {
        return false;
    }
    PolyCone::from_gens(v.len(), others.to_vec()).unwrap().contains(v)
}

/// Whether `h·x ≤ 0` is implied by the other rows.
fn implied(h: &[Scalar], others: &[Vector]) -> bool {
    let bound: Vec<(Vector, Scalar)> = others
        .iter()
        .map(|r| (r.clone(), Scalar::zero()))
        .chain(std::iter::once((h.to_vec(), Scalar::one())))
        .collect();
    match lp_solve(h, &bound, &[]) {
        LpOutcome::Optimal { value, .. } => !value.is_positive(),
        _ => false,
    }
}

fn engine_bar() -> Outcome {
    let mut bad = Vec::new();
    let mut g = Lcg::new(99);
    for case in 0..100 {
        let c = random_cone(&mut g);
        let input_gens = c.has_gens().then(|| c.gens().to_vec());
        let input_rows = c.has_ineqs().then(|| c.ineqs().to_vec());
        let both = c.dd_convert();
        let (gens, rows) = (both.gens(), both.ineqs());
        if gens.iter().any(|x| rows.iter().any(|h| dot(h, x).is_positive())) {
            bad.push(format!("cone {case}: a generator violates an inequality"));
        }
        if let Some(ig) = &input_gens {
            if ig.iter().any(|x| !in_cone_of(x, gens)) || gens.iter().any(|x| !in_cone_of(x, ig)) {
                bad.push(format!("cone {case}: generator round trip differs"));
            }
        }
        if let Some(ir) = &input_rows {
            if ir.iter().any(|h| !implied(h, rows)) || rows.iter().any(|h| !implied(h, ir)) {
                bad.push(format!("cone {case}: inequality round trip differs"));
            }
        }
        for i in 0..gens.len() {
            let rest: Vec<Vector> = gens.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.clone()).collect();
            if in_cone_of(&gens[i], &rest) {
                bad.push(format!("cone {case}: redundant generator"));
            }
        }
        for i in 0..rows.len() {
            let rest: Vec<Vector> = rows.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.clone()).collect();
            if implied(&rows[i], &rest) {
                bad.push(format!("cone {case}: redundant inequality"));
            }
        }
    }

    let mut lp_cases = 0;
    let mut infeasible = 0;
    for _ in 0..300 {
        let dim = g.range(1, 4) as usize;
        let mut rows: Vec<(Vector, Scalar)> = (0..g.range(1, 5))
            .map(|_| (random_vector(&mut g, dim, -4, 4, 2), g.rational(-3, 6, 2)))
            .collect();
        for i in 0..dim {
            let mut e = vec![Scalar::zero(); dim];
            e[i] = Scalar::one();
            rows.push((e.clone(), Scalar::from_int(5)));
            e[i] = Scalar::from_int(-1);
            rows.push((e, Scalar::from_int(5)));
        }
        let c = random_vector(&mut g, dim, -3, 3, 2);
        let lib = lp_solve(&c, &rows, &[]);
        let oracle = brute_force_max(&c, &rows);
        lp_cases += 1;
        match (&lib, &oracle) {
            (LpOutcome::Optimal { value, point }, Some(best)) => {
                if value != best || dot(&c, point) != *value || rows.iter().any(|(h, b)| dot(h, point) > *b) {
                    bad.push(format!("LP value {value} vs brute force {best}"));
                }
            }
            (LpOutcome::Infeasible, None) => infeasible += 1,
            _ => bad.push(format!("LP outcome {lib:?} vs brute force {oracle:?}")),
        }
    }

    let mut sign_cases = 0;
    for i in 0..1000 {
        let b = g.rational(-1_000_000, 1_000_000, 1000);
        let a = if i % 2 == 0 {
            g.rational(-1_000_000, 1_000_000, 1000)
        } else {
            // a ≈ −b√2 to within a few parts in 10^12
            let approx = -(b.to_f64_lossy() * std::f64::consts::SQRT_2);
            let scaled = (approx * 1e6).round().to_i64().unwrap_or(0);
            Scalar::ratio(scaled, 1_000_000)
        };
        let (Some(ar), Some(br)) = (a.as_rational(), b.as_rational()) else { unreachable!() };
        let x = Scalar::quad(ar.clone(), br.clone());
        let oracle = [60, 200, 1000].iter().find_map(|&d| decimal_sign(ar, br, d));
        sign_cases += 1;
        if Some(x.signum()) != oracle {
            bad.push(format!("sign of {x}: library {:?}, decimal {oracle:?}", x.signum()));
        }
        let ordered = Scalar::quad(ar.clone(), BigRational::from_integer(0.into())) < Scalar::quad(ar.clone(), br.clone());
        if ordered != (decimal_sign(&BigRational::from_integer(0.into()), br, 60) == Some(std::cmp::Ordering::Greater)) {
            bad.push(format!("ordering of {a} against {x}"));
        }
    }
    outcome(
        bad,
        format!("100 random cones, {lp_cases} LPs ({infeasible} infeasible) against vertex enumeration, {sign_cases} quad2 signs"),
    )
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("1 AVaR golden values", Duration::from_secs(1), avar_golden),
        ("2 AVaR equivalence triples", Duration::from_secs(5), avar_triples),
        ("3 theorem-backed identities", Duration::from_secs(60), theorem_identities),
        ("4 Haezendonck pasting", Duration::from_secs(1), haezendonck),
        ("5 transaction-cost gap", Duration::from_secs(30), txcost),
        ("6 property suites", Duration::from_secs(600), property_suites),
        ("7 engine unit bar", Duration::from_secs(120), engine_bar),
    ];
    let mut failed = Vec::new();
    for (name, bound, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= bound;
        let pass = out.pass && in_time;
        println!(
            "criterion {name}: {} [{:.2}s, bound {}s] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            bound.as_secs(),
            out.detail
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
