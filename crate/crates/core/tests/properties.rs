//! Property tests with brute-force oracles independent of the library code paths.

use std::collections::BTreeSet;

use balcone::arith::{self, rat, Rat, RatVector};
use balcone::balance::{complement_system, enumerate_min_balanced, is_min_balanced, permutations};
use balcone::catalogue::{generate, ConeKind};
use balcone::cones::{delta_contains, is_balanced, is_exact, is_totally_balanced_lp, theta_contains, Certificate};
use balcone::irreducible::{decompose, is_reducible};
use balcone::model::{Coalition, Game, Players, SetFunction, SetSystem};
use balcone::sample;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn players(n: usize) -> Players {
    Players::letters(n).unwrap()
}

/// Leibniz determinant over all permutations.
fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut total = Rat::zero();
    for perm in permutations(n) {
        let inversions =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        let term = (0..n).fold(Rat::one(), |acc, i| acc * &m[i][perm[i]]);
        if inversions % 2 == 0 {
            total += term
        } else {
            total -= term
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|b| b.count_ones() as usize == k)
        .map(|b| (0..n).filter(|i| b >> i & 1 == 1).collect())
        .collect()
}

/// Rank as the largest size of a nonvanishing minor.
fn brute_rank(columns: &[RatVector], dim: usize) -> usize {
    let k = columns.len();
    (1..=k.min(dim))
        .rev()
        .find(|&r| {
            subsets(k, r).iter().any(|cols| {
                subsets(dim, r).iter().any(|rows| {
                    let minor: Vec<Vec<Rat>> =
                        rows.iter().map(|&i| cols.iter().map(|&j| columns[j][i].clone()).collect()).collect();
                    !det(&minor).is_zero()
                })
            })
        })
        .unwrap_or(0)
}

/// Solves a square nonsingular system by Cramer's rule.
fn cramer(columns: &[RatVector], rows: &[usize], target: &RatVector) -> Vec<Rat> {
    let matrix = |replace: Option<usize>| -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|&i| {
                (0..columns.len())
                    .map(|j| if Some(j) == replace { target[i].clone() } else { columns[j][i].clone() })
                    .collect()
            })
            .collect()
    };
    let d = det(&matrix(None));
    (0..columns.len()).map(|j| det(&matrix(Some(j))) / &d).collect()
}

/// Conic feasibility through basic solutions: some independent subset of
/// generators represents the target with nonnegative coefficients.
fn brute_conic(generators: &[RatVector], target: &RatVector) -> bool {
    let dim = target.dim();
    if target.is_zero() {
        return true;
    }
    for r in 1..=generators.len().min(dim) {
        for cols in subsets(generators.len(), r) {
            let sub: Vec<RatVector> = cols.iter().map(|&j| generators[j].clone()).collect();
            for rows in subsets(dim, r) {
                let minor: Vec<Vec<Rat>> = rows.iter().map(|&i| sub.iter().map(|c| c[i].clone()).collect()).collect();
                if det(&minor).is_zero() {
                    continue;
                }
                let x = cramer(&sub, &rows, target);
                let hits = (0..dim)
                    .all(|i| sub.iter().zip(&x).fold(Rat::zero(), |acc, (c, xj)| acc + &c[i] * xj) == target[i]);
                if hits && x.iter().all(|v| !v.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

fn int_vector(dim: usize) -> impl Strategy<Value = RatVector> {
    prop::collection::vec(-3i64..=3, dim).prop_map(|v| RatVector::from_ints(&v))
}

fn column_system() -> impl Strategy<Value = (Vec<RatVector>, RatVector)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(dim, k)| (prop::collection::vec(int_vector(dim), k), int_vector(dim)))
}

fn set_function(n: usize) -> impl Strategy<Value = SetFunction> {
    prop::collection::vec((-20i64..=20, 1i64..=3), 1 << n).prop_map(move |v| {
        SetFunction::new(players(n), v.into_iter().map(|(p, q)| arith::ratio(p, q)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn solve_unique_matches_determinant_rank((columns, target) in column_system()) {
        let dim = target.dim();
        let k = columns.len();
        let rank = brute_rank(&columns, dim);
        let mut augmented = columns.clone();
        augmented.push(target.clone());
        let augmented_rank = brute_rank(&augmented, dim);
        match arith::solve_unique(&columns, &target) {
            Err(arith::ArithError::DependentColumns) => prop_assert!(rank < k),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(None) => prop_assert!(augmented_rank > rank),
            Ok(Some(x)) => {
                prop_assert_eq!(rank, k);
                for i in 0..dim {
                    let lhs = columns.iter().zip(x.as_slice()).fold(Rat::zero(), |acc, (c, xj)| acc + &c[i] * xj);
                    prop_assert_eq!(&lhs, &target[i]);
                }
            }
        }
    }

    #[test]
    fn conic_feasibility_matches_basic_solutions((columns, target) in column_system()) {
        let expected = brute_conic(&columns, &target);
        let found = arith::conic_feasible(&columns, &target).unwrap();
        prop_assert_eq!(found.is_some(), expected);
        if let Some(x) = found {
            prop_assert!(x.iter().all(|v| !v.is_negative()));
            for i in 0..target.dim() {
                let lhs = columns.iter().zip(&x).fold(Rat::zero(), |acc, (c, xj)| acc + &c[i] * xj);
                prop_assert_eq!(&lhs, &target[i]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reflection_is_an_adjoint_involution(theta in set_function(4), m in set_function(4)) {
        prop_assert_eq!(&theta.reflect().reflect(), &theta);
        prop_assert_eq!(theta.reflect().inner(&m).unwrap(), theta.inner(&m.reflect()).unwrap());
    }

    #[test]
    fn lp_certificates_always_verify(f in set_function(3)) {
        let m = f.shift();
        for v in [is_balanced(&m), is_totally_balanced_lp(&m), is_exact(&m)] {
            prop_assert!(v.verify(&m));
        }
    }
}

/// (†) on the original carrier holds for the system and fails after any deletion.
fn minimal_by_cones(system: &[Coalition], carrier: Coalition, n: usize) -> bool {
    let cone = |members: &[Coalition]| {
        let gens: Vec<RatVector> = members.iter().map(|c| c.incidence(n)).collect();
        arith::conic_feasible(&gens, &carrier.incidence(n)).unwrap().is_some()
    };
    cone(system)
        && (0..system.len()).all(|i| {
            let rest: Vec<Coalition> = system.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| *c).collect();
            !cone(&rest)
        })
}

/// All non-trivial min-balanced systems on `N`, by scanning every family of
/// proper coalitions of size at most `n` that covers `N`.
fn brute_force_systems(n: usize) -> BTreeSet<SetSystem> {
    let full = Coalition::full(n);
    let pool: Vec<Coalition> = (1..full.0).map(Coalition).collect();
    let mut out = BTreeSet::new();
    let mut chosen = Vec::new();
    fn walk(
        pool: &[Coalition],
        start: usize,
        chosen: &mut Vec<Coalition>,
        n: usize,
        full: Coalition,
        out: &mut BTreeSet<SetSystem>,
    ) {
        if chosen.len() >= 2 {
            let union = chosen.iter().fold(Coalition::EMPTY, |a, c| a.union(*c));
            if union == full && minimal_by_cones(chosen, full, n) {
                out.insert(SetSystem::new(chosen.clone()).unwrap());
            }
        }
        if chosen.len() == n {
            return;
        }
        for i in start..pool.len() {
            chosen.push(pool[i]);
            walk(pool, i + 1, chosen, n, full, out);
            chosen.pop();
        }
    }
    walk(&pool, 0, &mut chosen, n, full, &mut out);
    out
}

#[test]
fn enumeration_matches_brute_force() {
    for n in 2..=4 {
        let p = players(n);
        let fast: BTreeSet<SetSystem> =
            enumerate_min_balanced(&p, p.grand(), true).unwrap().into_iter().map(|m| m.system).collect();
        assert_eq!(fast, brute_force_systems(n), "n = {n}");
    }
}

#[test]
fn five_player_count_matches_brute_force() {
    let p = players(5);
    let fast = enumerate_min_balanced(&p, p.grand(), true).unwrap();
    let brute = brute_force_systems(5);
    assert_eq!(fast.len(), brute.len());
    assert!(fast.iter().all(|m| brute.contains(&m.system)));
    println!("non-trivial min-balanced systems on five players: {}", fast.len());
}

#[test]
fn enumerated_systems_satisfy_structural_invariants() {
    for n in 2..=5 {
        let p = players(n);
        for carrier in p.coalitions().filter(|c| c.len() >= 2) {
            for mbs in enumerate_min_balanced(&p, carrier, true).unwrap() {
                let members = mbs.system.members();
                assert!(minimal_by_cones(members, carrier, n));
                for i in carrier.members() {
                    let s = mbs
                        .weights
                        .entries()
                        .iter()
                        .filter(|(c, _)| c.contains(i))
                        .fold(Rat::zero(), |a, (_, w)| a + w);
                    assert_eq!(s, rat(1));
                }
                assert!(members.len() <= carrier.len());
                assert!(!mbs.system.contains(carrier) && !mbs.system.contains(Coalition::EMPTY));
                assert_eq!(mbs.system.common(), Some(Coalition::EMPTY));
                let k = Rat::from_integer(mbs.k.into());
                let scaled: Vec<i64> = mbs
                    .weights
                    .entries()
                    .iter()
                    .map(|(_, w)| {
                        let v = w * &k;
                        assert!(v.is_integer() && v.is_positive());
                        i64::try_from(v.to_integer()).unwrap()
                    })
                    .collect();
                assert_eq!(scaled.iter().fold(0i64, |g, &v| num_integer::gcd(g, v)), 1);
                assert!(mbs.alpha.is_o_standardized());
                assert!(mbs.alpha.get(Coalition::EMPTY) >= 1);
                assert_eq!(mbs.alpha.get(carrier), mbs.k as i64);
            }
        }
    }
}

#[test]
fn enumeration_counts_are_permutation_invariant() {
    let p = players(5);
    for size in 2..=5 {
        let counts: BTreeSet<usize> = p
            .coalitions()
            .filter(|c| c.len() == size)
            .map(|c| enumerate_min_balanced(&p, c, true).unwrap().len())
            .collect();
        assert_eq!(counts.len(), 1, "carrier size {size}");
    }
}

#[test]
fn complementation_reflects_the_inequality() {
    for n in 2..=4 {
        let p = players(n);
        for mbs in enumerate_min_balanced(&p, p.grand(), true).unwrap() {
            let comp = complement_system(&mbs.system, &p).unwrap();
            let cm = is_min_balanced(&comp, &p).unwrap().expect("complement is min-balanced");
            assert!(!cm.is_trivial());
            assert_eq!(cm.carrier, p.grand());
            assert_eq!(cm.alpha, mbs.alpha.conjugate());
        }
    }
}

#[test]
fn unanimity_games_satisfy_every_catalogue_inequality() {
    for (n, cones) in [(3, &ConeKind::ALL[..]), (4, &ConeKind::ALL[..]), (5, &[ConeKind::TotallyBalanced][..])] {
        let p = players(n);
        for &cone in cones {
            let cat = generate(&p, cone).unwrap();
            for r in p.coalitions().filter(|c| !c.is_empty()) {
                let u = SetFunction::unanimity(&p, r);
                for e in &cat.entries {
                    let v = e.alpha.inner(&u);
                    assert!(!v.is_negative());
                    if !e.conjugated && !r.is_subset(e.mbs.carrier) {
                        assert!(v.is_zero());
                    }
                }
            }
        }
    }
}

#[test]
fn reductions_decompose_and_labels_are_invariant() {
    for n in 3..=5 {
        let p = players(n);
        let perms = permutations(n);
        let cat = generate(&p, ConeKind::Balanced).unwrap();
        for e in &cat.entries {
            match is_reducible(&e.mbs, n).unwrap() {
                Some(w) => {
                    let dec = decompose(&e.mbs, &w, &p).expect("valid witness decomposes");
                    assert!(dec.combo.0.is_positive() && dec.combo.1.is_positive());
                    assert!(dec.c.system.contains(w.b_member) && dec.d.system.contains(w.a));
                }
                None => assert!(e.irreducible),
            }
            for perm in perms.iter().step_by(7) {
                let image = is_min_balanced(&e.mbs.system.permute(perm), &p).unwrap().unwrap();
                assert_eq!(is_reducible(&image, n).unwrap().is_none(), e.irreducible);
            }
        }
    }
}

#[test]
fn complement_links_form_a_matching() {
    for n in 2..=5 {
        let cat = generate(&players(n), ConeKind::Balanced).unwrap();
        for t in &cat.types {
            let link = cat.type_of(t.link.as_ref().unwrap()).expect("linked type exists");
            assert_eq!(link.link.as_ref(), Some(&t.type_id));
            assert_eq!(link.count, t.count);
        }
    }
}

#[test]
fn exact_catalogue_doubles_the_proper_irreducible_systems() {
    for n in 3..=5 {
        let p = players(n);
        let cat = generate(&p, ConeKind::ExactConjecture).unwrap();
        let proper = cat.entries.iter().filter(|e| !e.conjugated).count();
        assert_eq!(cat.entries.len(), 2 * proper);
        for e in &cat.entries {
            let at_grand = e.alpha.get(p.grand());
            if e.conjugated {
                assert!(at_grand >= 1)
            } else {
                assert_eq!(at_grand, 0)
            }
        }
    }
}

#[test]
fn theta_cone_contains_balanced_inequalities() {
    let mut rng = sample::rng(21);
    use rand::Rng;
    for n in 2..=4 {
        let p = players(n);
        let cat = generate(&p, ConeKind::Balanced).unwrap();
        for e in &cat.entries {
            assert!(theta_contains(&e.alpha.to_set_function(&p), p.grand()).unwrap());
        }
        for _ in 0..50 {
            let mut theta = SetFunction::zero(&p);
            for e in &cat.entries {
                let w = arith::ratio(rng.gen_range(0..=3), rng.gen_range(1..=3));
                theta = theta.add(&e.alpha.to_set_function(&p).scale(&w)).unwrap();
            }
            assert!(theta_contains(&theta, p.grand()).unwrap());
            if theta != SetFunction::zero(&p) {
                assert!(theta.value(p.grand()).is_positive() && theta.value(Coalition::EMPTY).is_positive());
            }
        }
    }
}

#[test]
fn delta_polytope_membership() {
    let p = players(4);
    let cat = generate(&p, ConeKind::TotallyBalanced).unwrap();
    for e in &cat.entries {
        let scale = Rat::one() / Rat::from_integer(e.alpha.get(Coalition::EMPTY).into());
        let theta = e.alpha.to_set_function(&p).scale(&scale);
        for m in p.coalitions().filter(|c| c.len() >= 2) {
            assert_eq!(delta_contains(&theta, m).unwrap(), m == e.mbs.carrier, "{} on {}", e.type_id, p.key(m));
        }
    }
}

fn supermodular(m: &Game) -> bool {
    let p = m.players();
    p.coalitions()
        .all(|s| p.coalitions().all(|t| m.value(s.union(t)) + m.value(s.intersection(t)) >= m.value(s) + m.value(t)))
}

#[test]
fn small_exact_cones_have_closed_forms() {
    let mut rng = sample::rng(22);
    for _ in 0..300 {
        let m = sample::mixed_game(&mut rng, &players(2));
        assert_eq!(is_exact(&m).member, is_balanced(&m).member);
        let m = sample::mixed_game(&mut rng, &players(3));
        assert_eq!(is_exact(&m).member, supermodular(&m), "{m}");
    }
}

#[test]
fn cone_chain_and_dual_probes() {
    let mut rng = sample::rng(23);
    for n in [3, 4] {
        let p = players(n);
        let games: Vec<Game> = (0..150).map(|_| sample::mixed_game(&mut rng, &p)).collect();
        let mut probes: Vec<(Coalition, SetFunction)> = Vec::new();
        for e in generate(&p, ConeKind::ExactConjecture).unwrap().entries {
            let theta = e.alpha.to_set_function(&p);
            if let Some(d) = p.coalitions().filter(|d| !d.is_empty()).find(|&d| theta_contains(&theta, d).unwrap()) {
                probes.push((d, theta));
            }
        }
        let mut exact_count = 0;
        for m in &games {
            let e = is_exact(m);
            let t = is_totally_balanced_lp(m);
            let b = is_balanced(m);
            assert!(!e.member || t.member, "exact but not totally balanced: {m}");
            assert!(!t.member || b.member, "totally balanced but not balanced: {m}");
            if e.member {
                exact_count += 1;
                assert!(is_totally_balanced_lp(&m.anti_dual()).member);
                for (_, theta) in &probes {
                    assert!(!theta.inner(m.as_set_function()).unwrap().is_negative());
                }
            } else if let Certificate::NoTightAllocation { theta, .. } = &e.certificate {
                probes.push((Coalition::EMPTY, theta.clone()));
            }
        }
        assert!(exact_count > 10, "too few exact games to exercise the probe");
    }
}

#[test]
fn catalogue_inequalities_hold_on_accepted_games() {
    let mut rng = sample::rng(24);
    let p = players(4);
    let b = generate(&p, ConeKind::Balanced).unwrap();
    let t = generate(&p, ConeKind::TotallyBalanced).unwrap();
    for _ in 0..300 {
        let m = sample::mixed_game(&mut rng, &p);
        if is_balanced(&m).member {
            assert!(b.entries.iter().all(|e| !e.alpha.inner(m.as_set_function()).is_negative()));
        }
        if is_totally_balanced_lp(&m).member {
            assert!(t.entries.iter().all(|e| !e.alpha.inner(m.as_set_function()).is_negative()));
        }
    }
}
