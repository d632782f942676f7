//! Reducibility of min-balanced systems and the induced two-term decomposition.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith::{self, Rat, RatVector};
use crate::balance::{is_min_balanced, InequalityVector, MinBalancedSystem};
use crate::model::{Coalition, Players, SetSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrreducibleError {
    #[error("reducibility is defined for non-trivial systems only")]
    TrivialSystem,
    #[error("invalid reduction witness: {0}")]
    InvalidWitness(String),
}

/// A pair `(A, B)` with the two conic certificates.
///
/// `mu` expresses `χ_A` over the members inside `A`; `beta` expresses the
/// carrier over `{A} ∪ (system ∖ {B})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionWitness {
    pub a: Coalition,
    pub b_member: Coalition,
    pub mu: Vec<(Coalition, Rat)>,
    pub beta: Vec<(Coalition, Rat)>,
}

/// The two min-balanced systems produced by a reduction and the positive
/// multipliers with `α = c₀·α_C + c₁·α_D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub c: MinBalancedSystem,
    pub d: MinBalancedSystem,
    pub combo: (Rat, Rat),
}

fn conic(members: &[Coalition], target: Coalition, n: usize) -> Option<Vec<(Coalition, Rat)>> {
    let generators: Vec<RatVector> = members.iter().map(|c| c.incidence(n)).collect();
    arith::conic_feasible(&generators, &target.incidence(n))
        .expect("incidence vectors share a dimension")
        .map(|coeffs| members.iter().copied().zip(coeffs).collect())
}

/// Candidate sets `A` in bitmask order, pruned by `|A| ≥ 2`, `A ∉ B` and `A = ∪B_A`.
pub fn reduction_candidates(mbs: &MinBalancedSystem) -> Vec<(Coalition, Vec<Coalition>)> {
    let carrier = mbs.carrier;
    (1..carrier.0)
        .map(Coalition)
        .filter(|a| a.is_proper_subset(carrier) && a.len() >= 2 && !mbs.system.contains(*a))
        .filter_map(|a| {
            let inside: Vec<Coalition> = mbs.system.members().iter().copied().filter(|s| s.is_subset(a)).collect();
            let union = inside.iter().fold(Coalition::EMPTY, |acc, s| acc.union(*s));
            (union == a).then_some((a, inside))
        })
        .collect()
}

/// The first reduction witness in `(A, B)` order, if any.
pub fn is_reducible(mbs: &MinBalancedSystem, n: usize) -> Result<Option<ReductionWitness>, IrreducibleError> {
    if mbs.is_trivial() {
        return Err(IrreducibleError::TrivialSystem);
    }
    for (a, inside) in reduction_candidates(mbs) {
        let Some(mu) = conic(&inside, a, n) else {
            continue;
        };
        for &b in &inside {
            let mut generators = vec![a];
            generators.extend(mbs.system.members().iter().copied().filter(|&s| s != b));
            if let Some(beta) = conic(&generators, mbs.carrier, n) {
                return Ok(Some(ReductionWitness { a, b_member: b, mu, beta }));
            }
        }
    }
    Ok(None)
}

fn combination(lhs: &Rat, x: &InequalityVector, rhs: &Rat, y: &InequalityVector, c: Coalition) -> Rat {
    lhs * Rat::from_integer(x.get(c).into()) + rhs * Rat::from_integer(y.get(c).into())
}

fn check_witness(mbs: &MinBalancedSystem, w: &ReductionWitness) -> Result<(), IrreducibleError> {
    let bad = |msg: &str| Err(IrreducibleError::InvalidWitness(msg.to_string()));
    if !w.a.is_proper_subset(mbs.carrier) || w.a.len() < 2 || mbs.system.contains(w.a) {
        return bad("A must be a proper subset of the carrier with at least two players, outside the system");
    }
    if !w.b_member.is_subset(w.a) || !mbs.system.contains(w.b_member) {
        return bad("B must be a member of the system inside A");
    }
    for (s, coeff) in &w.mu {
        if !s.is_subset(w.a) || !mbs.system.contains(*s) || coeff.is_negative() {
            return bad("mu must be nonnegative on members inside A");
        }
    }
    for (t, coeff) in &w.beta {
        let allowed = *t == w.a || (mbs.system.contains(*t) && *t != w.b_member);
        if !allowed || coeff.is_negative() {
            return bad("beta must be nonnegative on {A} together with the other members");
        }
    }
    let represents = |terms: &[(Coalition, Rat)], target: Coalition| {
        (0..32).all(|i| {
            let sum = terms.iter().filter(|(s, _)| s.contains(i)).fold(Rat::zero(), |acc, (_, c)| acc + c);
            sum == if target.contains(i) { Rat::from_integer(1.into()) } else { Rat::zero() }
        })
    };
    if !represents(&w.mu, w.a) {
        return bad("mu does not represent A");
    }
    if !represents(&w.beta, mbs.carrier) {
        return bad("beta does not represent the carrier");
    }
    Ok(())
}

/// Splits a reducible system into `C` on `A` and `D` on the carrier.
pub fn decompose(
    mbs: &MinBalancedSystem,
    w: &ReductionWitness,
    players: &Players,
) -> Result<Decomposition, IrreducibleError> {
    check_witness(mbs, w)?;
    let positive = |terms: &[(Coalition, Rat)]| {
        SetSystem::new(terms.iter().filter(|(_, c)| c.is_positive()).map(|(s, _)| *s).collect())
            .map_err(|e| IrreducibleError::InvalidWitness(e.to_string()))
    };
    let min_balanced = |system: SetSystem, what: &str| {
        is_min_balanced(&system, players)
            .ok()
            .flatten()
            .filter(|m| !m.is_trivial())
            .ok_or_else(|| IrreducibleError::InvalidWitness(format!("{what} is not min-balanced")))
    };
    let c = min_balanced(positive(&w.mu)?, "C")?;
    let d = min_balanced(positive(&w.beta)?, "D")?;
    if !c.system.contains(w.b_member) || !d.system.contains(w.a) {
        return Err(IrreducibleError::InvalidWitness("B ∉ C or A ∉ D".to_string()));
    }
    let beta_a = w.beta.iter().find(|(t, _)| *t == w.a).map(|(_, b)| b.clone()).expect("A ∈ D");
    let k = |m: &MinBalancedSystem| Rat::from_integer(m.k.into());
    let combo = (k(mbs) * beta_a / k(&c), k(mbs) / k(&d));
    let matches = players.coalitions().all(|s| {
        s.is_empty()
            || Rat::from_integer(mbs.alpha.get(s).into()) == combination(&combo.0, &c.alpha, &combo.1, &d.alpha, s)
    });
    if !matches {
        return Err(IrreducibleError::InvalidWitness("decomposition does not recover α".to_string()));
    }
    Ok(Decomposition { c, d, combo })
}
