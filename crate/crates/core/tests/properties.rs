mod common;

use common::{dot, random_vector, Vector};
use conerisk::cone::{dual_cone, lp_solve, LinearProgram, LpOutcome, PolyCone, Relation};
use conerisk::corpus::{build, random_scenario, NumeraireChoice};
use conerisk::field::Scalar;
use conerisk::lcg::Lcg;
use conerisk::market::k_cone;
use conerisk::space::{FilteredSpace, Measure, RandomVec, StoppingTime};
use conerisk::stability::{admissible, paste, predictable_preimage, vstability_witness_search};
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(20240601), failure_persistence: None, ..Config::default() }
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-1000i64..1000, 1i64..50).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (rational(), rational()).prop_map(|(a, b)| Scalar::quad(a, b))
}

fn cond(space: &FilteredSpace, x: &[Scalar], t: usize) -> Vector {
    space.cond_expect(&RandomVec::scalar(x.to_vec()), t, None).unwrap().value.into_values()
}

/// Every `τ ∈ {0..T}^Ω` that is adapted, by exhaustive search.
fn brute_force_stopping_times(space: &FilteredSpace) -> usize {
    let n = space.atoms();
    let horizon = space.horizon();
    let total = (horizon + 1).pow(n as u32);
    (0..total)
        .filter(|&code| {
            let mut c = code;
            let tau: Vec<usize> = (0..n)
                .map(|_| {
                    let v = c % (horizon + 1);
                    c /= horizon + 1;
                    v
                })
                .collect();
            StoppingTime { tau }.check_adapted(space).is_ok()
        })
        .count()
}

fn measure_from(g: &mut Lcg, n: usize) -> Measure {
    loop {
        let w = random_vector(g, n, 0, 5, 1);
        let s: Scalar = w.iter().sum();
        if s.is_positive() {
            return Measure::new(w.iter().map(|x| x / &s).collect());
        }
    }
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn quad_field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if let Some(r) = a.recip() {
            prop_assert!((&a * &r).is_one());
        } else {
            prop_assert!(a.is_zero());
        }
        // order is translation invariant and agrees with subtraction
        prop_assert_eq!(a < b, (&b - &a).is_positive());
        prop_assert_eq!(a < b, &a + &c < &b + &c);
    }

    #[test]
    fn quad_order_matches_floats(a in scalar(), b in scalar()) {
        let (x, y) = (a.to_f64_lossy(), b.to_f64_lossy());
        if (x - y).abs() > 1e-6 {
            prop_assert_eq!(a < b, x < y);
        }
    }
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn tower_property(seed in 1u64..1000, salt in 0u64..1000) {
        let s = random_scenario(seed);
        let space = s.rm.space();
        let mut g = Lcg::new(salt);
        let x = random_vector(&mut g, space.atoms(), -9, 9, 4);
        for t in 0..space.horizon() {
            let inner = cond(space, &x, t + 1);
            prop_assert_eq!(cond(space, &inner, t), cond(space, &x, t));
            prop_assert!(space.is_measurable(&RandomVec::scalar(cond(space, &x, t)), t));
        }
        let mean: Scalar = x.iter().zip(space.probs()).map(|(a, p)| a * p).sum();
        prop_assert!(cond(space, &x, 0).iter().all(|v| *v == mean));
    }

    #[test]
    fn pasting_is_idempotent_and_keeps_mass(seed in 1u64..1000, salt in 0u64..1000) {
        let s = random_scenario(seed);
        let space = s.rm.space();
        let mut g = Lcg::new(salt);
        let q = measure_from(&mut g, space.atoms());
        let q2 = Measure::new(s.rm.set().members()[0].clone());
        let q2 = if q2.is_strictly_positive() { q2 } else { Measure::new(space.probs().to_vec()) };
        for tau in space.enumerate_stopping_times(10_000).unwrap().iter().take(50) {
            prop_assert_eq!(&paste(space, &q, &q, tau).unwrap(), &q);
            prop_assert!(paste(space, &q, &q2, tau).unwrap().total().is_one());
        }
    }

    #[test]
    fn stopping_time_enumeration(seed in 1u64..1000) {
        let space = random_scenario(seed).rm.space().clone();
        let all = space.enumerate_stopping_times(1_000_000).unwrap();
        prop_assert_eq!(all.len() as u64, space.stopping_time_count());
        prop_assert_eq!(all.len(), brute_force_stopping_times(&space));
        prop_assert!(all.iter().all(|t| t.check_adapted(&space).is_ok()));
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn k_cones_are_local(seed in 1u64..1000) {
        let s = random_scenario(seed);
        let space = s.rm.space();
        let w = s.v.width();
        for t in 0..space.horizon() {
            let k = k_cone(&s.rm, &s.v, t).unwrap();
            for gen in k.gens() {
                for k_ in 0..w {
                    let col: Vector = (0..space.atoms()).map(|a| gen[a * w + k_].clone()).collect();
                    prop_assert!(space.is_measurable(&RandomVec::scalar(col), t + 1));
                }
                for block in space.partition(t).blocks() {
                    let mut cut = vec![Scalar::zero(); gen.len()];
                    for &a in block {
                        for k_ in 0..w {
                            cut[a * w + k_] = gen[a * w + k_].clone();
                        }
                    }
                    prop_assert!(k.contains(&cut));
                }
            }
        }
    }

    /// Every generator of the computed preimage splits over `F_t` blocks
    /// into pieces `1_B Z` with `E[Z | F_{t+1}] = E[d | F_{t+1}]` on `B`
    /// for some `d ∈ D` (found by an LP over `D`'s generators), and every
    /// sampled element `α E[d | F_{t+1}]` lies in the computed preimage.
    #[test]
    fn preimage_matches_definition(seed in 1u64..1000, salt in 0u64..1000) {
        let space = random_scenario(seed).rm.space().clone();
        let n = space.atoms();
        let mut g = Lcg::new(salt);
        let d_gens: Vec<Vector> = (0..g.range(1, 3)).map(|_| random_vector(&mut g, n, 0, 4, 1)).collect();
        let d = PolyCone::from_gens(n, d_gens.clone()).unwrap();
        for t in 0..space.horizon() {
            let m = predictable_preimage(&space, &d, 1, t).unwrap();
            let cd: Vec<Vector> = d_gens.iter().map(|x| cond(&space, x, t + 1)).collect();
            for z in m.gens() {
                let cz = cond(&space, z, t + 1);
                for block in space.partition(t).blocks() {
                    let mut lp = LinearProgram::nonneg(cd.len());
                    for &a in block {
                        lp.constrain(cd.iter().map(|c| c[a].clone()).collect(), Relation::Eq, cz[a].clone());
                    }
                    prop_assert!(lp.solve().is_feasible(), "t={} generator {:?}", t, z);
                }
            }
            for _ in 0..5 {
                let mut point = vec![Scalar::zero(); n];
                for block in space.partition(t).blocks() {
                    let alpha = g.rational(0, 3, 2);
                    let pick = &cd[g.below(cd.len() as u32) as usize];
                    for &a in block {
                        point[a] = &alpha * &pick[a];
                    }
                }
                prop_assert!(m.contains(&point));
            }
        }
    }

    #[test]
    fn acceptance_dual_is_measure_cone(seed in 1u64..1000) {
        let s = random_scenario(seed);
        let space = s.rm.space();
        let dual = dual_cone(&s.rm.acceptance_cone(0).unwrap(), space.probs()).unwrap();
        let densities: Vec<Vector> =
            s.rm.set().members().iter().map(|q| Measure::new(q.clone()).density(space)).collect();
        prop_assert!(dual.equals(&PolyCone::from_gens(space.atoms(), densities).unwrap()));
    }

    #[test]
    fn rho_brackets_expectations(seed in 1u64..1000, salt in 0u64..1000) {
        let s = random_scenario(seed);
        let space = s.rm.space();
        let mut g = Lcg::new(salt);
        let x = RandomVec::scalar(random_vector(&mut g, space.atoms(), -9, 9, 4));
        for t in 0..=space.horizon() {
            let r = s.rm.rho(t, &x).unwrap();
            prop_assert!(space.is_measurable(&r, t));
            for block in space.partition(t).blocks() {
                let hi = block.iter().map(|&a| x.get(a, 0).clone()).reduce(Scalar::max).unwrap();
                prop_assert!(block.iter().all(|&a| *r.get(a, 0) <= hi));
                for q in s.rm.set().members() {
                    let mass: Scalar = block.iter().map(|&a| &q[a]).sum();
                    if mass.is_positive() {
                        let e: Scalar = block.iter().map(|&a| &q[a] * x.get(a, 0)).sum::<Scalar>() / &mass;
                        prop_assert!(e <= *r.get(block[0], 0));
                    }
                }
            }
        }
    }
}

/// `A_0 ∩ L∞_+ = {0}`: maximize `Σ x` over `A_0`, `x ≥ 0`, `Σ x ≤ 1`.
#[test]
fn acceptance_cones_are_arbitrage_free() {
    let mut scenarios: Vec<_> = ["avar4-unit", "haezendonck4-hull-unit", "txcost4"]
        .iter()
        .map(|n| build(n, NumeraireChoice::Paper).unwrap())
        .collect();
    scenarios.extend((1..=30).map(random_scenario));
    for s in scenarios {
        let n = s.rm.space().atoms();
        for t in 0..=s.rm.space().horizon() {
            let a = s.rm.acceptance_cone(t).unwrap();
            let mut rows: Vec<(Vector, Scalar)> = a.ineqs().iter().map(|h| (h.clone(), Scalar::zero())).collect();
            for i in 0..n {
                let mut e = vec![Scalar::zero(); n];
                e[i] = Scalar::from_int(-1);
                rows.push((e, Scalar::zero()));
            }
            let ones = vec![Scalar::one(); n];
            rows.push((ones.clone(), Scalar::one()));
            match lp_solve(&ones, &rows, &[]) {
                LpOutcome::Optimal { value, .. } => assert!(value.is_zero(), "{} t={t}", s.name),
                other => panic!("{}: {other:?}", s.name),
            }
        }
    }
}

#[test]
fn transaction_cost_dual_is_measure_cone() {
    let s = build("txcost4", NumeraireChoice::Paper).unwrap();
    let space = s.rm.space();
    let dual = dual_cone(&s.rm.acceptance_cone(0).unwrap(), space.probs()).unwrap();
    // uniform reference measure: densities and measures span the same cone
    assert!(dual.equals(s.rm.polytope().unwrap().measure_cone()));
    let v1 = RandomVec::scalar(s.v.values().column(1));
    let r0 = s.rm.rho(0, &v1).unwrap();
    // ρ_0 is attained on a vertex of 𝒬
    let best = s.rm.set().members().iter().map(|q| dot(q, v1.as_slice())).reduce(Scalar::max).unwrap();
    assert_eq!(*r0.get(0, 0), best);
}

/// Whatever the search reports is reproduced by `paste` and `admissible`,
/// and lies outside the representing set.
#[test]
fn witness_search_agrees_with_paste() {
    let mut found = 0;
    let mut scenarios = vec![build("avar4-unit", NumeraireChoice::Paper).unwrap()];
    scenarios.extend((1..=40).map(random_scenario));
    for s in scenarios {
        let space = s.rm.space();
        let Some(w) = vstability_witness_search(&s.rm, &s.v, 1_000_000).unwrap() else { continue };
        found += 1;
        let tau = StoppingTime { tau: w.tau.clone() };
        assert!(admissible(space, &s.v, &w.q, &w.q_prime, &tau), "{}", s.name);
        let pasted = paste(space, &Measure::new(w.q.clone()), &Measure::new(w.q_prime.clone()), &tau).unwrap();
        assert_eq!(pasted.weights, w.pasted, "{}", s.name);
        let inside = PolyCone::from_gens(space.atoms(), s.rm.set().members().to_vec()).unwrap();
        assert!(!inside.contains(&w.pasted), "{}", s.name);
    }
    assert!(found > 0);
}
