//! Membership oracles for the balanced, totally balanced and exact cones.
//!
//! Every verdict carries a certificate that [`Verdict::verify`] re-checks by
//! exact substitution into the input game.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{self, Constraint, Feasibility, Rat, RatVector};
use crate::balance::{is_min_balanced, InequalityVector, MinBalancedSystem};
use crate::model::{Coalition, Game, Players, SetFunction, SetSystem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("coalition must be nonempty")]
    EmptyCoalition,
    #[error("coalition must have at least two players")]
    SmallCoalition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A core element of the game.
    CoreAllocation(RatVector),
    /// For every nonempty `D`, a core element tight at `D`.
    TightAllocationTable(Vec<(Coalition, RatVector)>),
    /// A min-balanced system whose inequality the game violates.
    ViolatedSystem { mbs: MinBalancedSystem, value: Rat },
    /// The restriction to `coalition` is not balanced; `inner` certifies it.
    FailingSubgame { coalition: Coalition, inner: Box<Certificate> },
    /// No core element is tight at `coalition`: `theta` lies in the dual cone
    /// for that coalition and has negative inner product with the game.
    NoTightAllocation { coalition: Coalition, theta: SetFunction },
    /// Every listed inequality holds.
    InequalitiesHold(Arc<[InequalityVector]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub member: bool,
    pub certificate: Certificate,
}

impl Verdict {
    fn yes(certificate: Certificate) -> Self {
        Self { member: true, certificate }
    }

    fn no(certificate: Certificate) -> Self {
        Self { member: false, certificate }
    }

    /// Re-checks the certificate against `m` in exact arithmetic.
    pub fn verify(&self, m: &Game) -> bool {
        self.certificate.is_member_certificate() == self.member && self.certificate.verify(m)
    }
}

impl Certificate {
    fn is_member_certificate(&self) -> bool {
        matches!(
            self,
            Certificate::CoreAllocation(_) | Certificate::TightAllocationTable(_) | Certificate::InequalitiesHold(_)
        )
    }

    pub fn verify(&self, m: &Game) -> bool {
        match self {
            Certificate::CoreAllocation(x) => in_core(m, x),
            Certificate::TightAllocationTable(table) => {
                let players = m.players();
                let expected: Vec<Coalition> = ordered_coalitions(players);
                let mut listed: Vec<Coalition> = table.iter().map(|(d, _)| *d).collect();
                listed.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
                listed == expected && table.iter().all(|(d, x)| in_core(m, x) && allocation(x, *d) == *m.value(*d))
            }
            Certificate::ViolatedSystem { mbs, value } => {
                let rechecked = is_min_balanced(&mbs.system, m.players()).ok().flatten();
                rechecked.as_ref() == Some(mbs)
                    && !mbs.is_trivial()
                    && value.is_negative()
                    && mbs.alpha.inner(m.as_set_function()) == *value
            }
            Certificate::FailingSubgame { coalition, inner } => {
                !inner.is_member_certificate()
                    && coalition.len() >= 2
                    && m.restrict(*coalition).map(|sub| inner.verify(&sub)).unwrap_or(false)
            }
            Certificate::NoTightAllocation { coalition, theta } => {
                theta.players() == m.players()
                    && theta_contains(theta, *coalition).unwrap_or(false)
                    && theta.inner(m.as_set_function()).map(|v| v.is_negative()).unwrap_or(false)
            }
            Certificate::InequalitiesHold(facets) => facets
                .iter()
                .all(|alpha| alpha.players() == m.players().len() && !alpha.inner(m.as_set_function()).is_negative()),
        }
    }
}

/// Nonempty coalitions ordered by cardinality, then bitmask.
pub fn ordered_coalitions(players: &Players) -> Vec<Coalition> {
    let mut all: Vec<Coalition> = players.coalitions().filter(|c| !c.is_empty()).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    all
}

fn allocation(x: &RatVector, s: Coalition) -> Rat {
    s.members().fold(Rat::zero(), |acc, i| acc + &x[i])
}

/// `Σ x = m(N)` and `Σ_{i∈S} x_i ≥ m(S)` for every `S`.
pub fn in_core(m: &Game, x: &RatVector) -> bool {
    let players = m.players();
    x.dim() == players.len()
        && allocation(x, players.grand()) == *m.value(players.grand())
        && players.coalitions().all(|s| allocation(x, s) >= *m.value(s))
}

/// Core constraints, optionally with `D` made tight. Returns the rows and the
/// coalition each row belongs to.
fn core_system(m: &Game, tight: Option<Coalition>) -> (Vec<Constraint>, Vec<Coalition>) {
    let players = m.players();
    let n = players.len();
    let full = players.grand();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for s in players.coalitions().filter(|s| !s.is_empty()) {
        let rhs = m.value(s).clone();
        let row = if s == full || Some(s) == tight {
            Constraint::eq(s.incidence(n), rhs)
        } else {
            let neg: Vec<Rat> = s.incidence(n).into_vec().into_iter().map(|v| -v).collect();
            Constraint::le(RatVector::new(neg), -rhs)
        };
        rows.push(row);
        labels.push(s);
    }
    (rows, labels)
}

/// Maps Farkas multipliers of [`core_system`] to an o-standardized `θ` with
/// `⟨θ, m⟩ < 0`, nonpositive outside `{∅, D, N}`.
fn farkas_to_theta(players: &Players, labels: &[Coalition], y: &[Rat], tight: Option<Coalition>) -> SetFunction {
    let full = players.grand();
    let mut theta = SetFunction::zero(players);
    let mut empty = Rat::zero();
    for (s, ys) in labels.iter().zip(y) {
        let v = if *s == full || Some(*s) == tight { ys.clone() } else { -ys };
        empty -= &v;
        theta.set(*s, v);
    }
    theta.set(Coalition::EMPTY, empty);
    theta
}

/// Carathéodory reduction of a balanced weighting to a min-balanced system
/// whose inequality is violated at least as strongly.
fn violated_min_balanced(m: &Game, mut support: Vec<(Coalition, Rat)>) -> MinBalancedSystem {
    let players = m.players();
    let n = players.len();
    loop {
        let k = support.len();
        let mut rows: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                support
                    .iter()
                    .map(|(s, _)| if s.contains(i) { Rat::from_integer(1.into()) } else { Rat::zero() })
                    .collect()
            })
            .collect();
        let pivots = arith::row_reduce(&mut rows, k);
        let Some(free) = (0..k).find(|j| !pivots.contains(j)) else {
            break;
        };
        let mut z = vec![Rat::zero(); k];
        z[free] = Rat::from_integer(1.into());
        for (r, &p) in pivots.iter().enumerate() {
            z[p] = -&rows[r][free];
        }
        // Moving along z keeps the carrier fixed; orient it so Σ λ m(S) does not drop.
        let slope = support.iter().zip(&z).fold(Rat::zero(), |acc, ((s, _), zj)| acc + zj * m.value(*s));
        if slope.is_negative() {
            z.iter_mut().for_each(|v| *v = -v.clone());
        }
        let step = support
            .iter()
            .zip(&z)
            .filter(|(_, zj)| zj.is_negative())
            .map(|((_, w), zj)| w / -zj)
            .min()
            .expect("a nonzero kernel vector of incidence columns has a negative entry");
        for ((_, w), zj) in support.iter_mut().zip(&z) {
            *w += &step * zj;
        }
        support.retain(|(_, w)| w.is_positive());
    }
    let system = SetSystem::new(support.iter().map(|(s, _)| *s).collect()).expect("distinct members");
    is_min_balanced(&system, players).expect("nonempty system").expect("independent positive weighting is min-balanced")
}

/// Core nonemptiness by linear programming.
pub fn is_balanced(m: &Game) -> Verdict {
    let players = m.players();
    let (rows, labels) = core_system(m, None);
    match arith::lp_feasible(players.len(), &rows).expect("dimensions agree") {
        Feasibility::Feasible(x) => Verdict::yes(Certificate::CoreAllocation(x)),
        Feasibility::Infeasible(cert) => {
            let full = players.grand();
            let grand_weight = labels
                .iter()
                .zip(&cert.multipliers)
                .find(|(s, _)| **s == full)
                .map(|(_, y)| y.clone())
                .expect("grand coalition row");
            let support: Vec<(Coalition, Rat)> = labels
                .iter()
                .zip(&cert.multipliers)
                .filter(|(s, y)| **s != full && y.is_positive())
                .map(|(s, y)| (*s, y / &grand_weight))
                .collect();
            let mbs = violated_min_balanced(m, support);
            let value = mbs.alpha.inner(m.as_set_function());
            debug_assert!(value.is_negative());
            Verdict::no(Certificate::ViolatedSystem { mbs, value })
        }
    }
}

/// Balancedness of every subgame, checked by one LP per coalition.
pub fn is_totally_balanced_lp(m: &Game) -> Verdict {
    let candidates: Vec<Coalition> = ordered_coalitions(m.players()).into_iter().filter(|c| c.len() >= 2).collect();
    let failure = candidates.par_iter().find_map_first(|&a| {
        let sub = m.restrict(a).expect("nonempty coalition");
        let verdict = is_balanced(&sub);
        (!verdict.member).then_some((a, verdict.certificate))
    });
    match failure {
        Some((coalition, inner)) => Verdict::no(Certificate::FailingSubgame { coalition, inner: Box::new(inner) }),
        None => is_balanced(m),
    }
}

/// Total balancedness against an explicit list of facet inequalities.
///
/// `entries` pairs each inequality with its min-balanced system; the first
/// violated one is reported.
pub fn is_totally_balanced_facets(
    m: &Game,
    entries: &[MinBalancedSystem],
    facets: &Arc<[InequalityVector]>,
) -> Verdict {
    let f = m.as_set_function();
    for mbs in entries {
        let value = mbs.alpha.inner(f);
        if value.is_negative() {
            return Verdict::no(Certificate::ViolatedSystem { mbs: mbs.clone(), value });
        }
    }
    Verdict::yes(Certificate::InequalitiesHold(facets.clone()))
}

/// Exactness: one LP per nonempty coalition.
pub fn is_exact(m: &Game) -> Verdict {
    let players = m.players();
    let n = players.len();
    let ds = ordered_coalitions(players);
    let results: Vec<Result<(Coalition, RatVector), Box<Certificate>>> = ds
        .par_iter()
        .map(|&d| {
            let (rows, labels) = core_system(m, Some(d));
            match arith::lp_feasible(n, &rows).expect("dimensions agree") {
                Feasibility::Feasible(x) => Ok((d, x)),
                Feasibility::Infeasible(cert) => Err(Box::new(Certificate::NoTightAllocation {
                    coalition: d,
                    theta: farkas_to_theta(players, &labels, &cert.multipliers, Some(d)),
                })),
            }
        })
        .collect();
    let mut table = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(entry) => table.push(entry),
            Err(cert) => return Verdict::no(*cert),
        }
    }
    Verdict::yes(Certificate::TightAllocationTable(table))
}

/// The reflected coefficient vector.
pub fn conjugate(alpha: &InequalityVector) -> InequalityVector {
    alpha.conjugate()
}

/// Membership in the dual cone attached to `D`: o-standardized and
/// nonpositive outside `{∅, D, N}`.
pub fn theta_contains(theta: &SetFunction, d: Coalition) -> Result<bool, ConeError> {
    if d.is_empty() {
        return Err(ConeError::EmptyCoalition);
    }
    let full = theta.players().grand();
    let signs = theta
        .players()
        .coalitions()
        .filter(|&s| !s.is_empty() && s != d && s != full)
        .all(|s| !theta.value(s).is_positive());
    Ok(signs && theta.is_o_standardized())
}

/// Membership in the normalized polytope attached to `M`.
pub fn delta_contains(theta: &SetFunction, m: Coalition) -> Result<bool, ConeError> {
    if m.len() < 2 {
        return Err(ConeError::SmallCoalition);
    }
    let players = theta.players();
    let inside =
        players.coalitions().filter(|&s| !s.is_empty() && s.is_proper_subset(m)).all(|s| !theta.value(s).is_positive());
    let outside = players.coalitions().filter(|&r| !r.difference(m).is_empty()).all(|r| theta.value(r).is_zero());
    let unit = *theta.value(Coalition::EMPTY) == Rat::from_integer(1.into());
    Ok(inside && outside && unit && theta.is_o_standardized())
}

fn allocation_json(players: &Players, x: &RatVector) -> Value {
    Value::Object(
        x.as_slice().iter().enumerate().map(|(i, v)| (players.name(i).to_string(), json!(v.to_string()))).collect(),
    )
}

fn allocation_text(players: &Players, x: &RatVector) -> String {
    let parts: Vec<String> =
        x.as_slice().iter().enumerate().map(|(i, v)| format!("{} = {v}", players.name(i))).collect();
    parts.join(", ")
}

impl Certificate {
    /// Structured form with coalitions written as keys of `players`.
    pub fn to_json(&self, players: &Players) -> Value {
        match self {
            Certificate::CoreAllocation(x) => {
                json!({ "kind": "core_allocation", "allocation": allocation_json(players, x) })
            }
            Certificate::TightAllocationTable(table) => json!({
                "kind": "tight_allocation_table",
                "table": table.iter().map(|(d, x)| json!({ "coalition": players.key(*d), "allocation": allocation_json(players, x) })).collect::<Vec<_>>(),
            }),
            Certificate::ViolatedSystem { mbs, value } => json!({
                "kind": "violated_system",
                "system": mbs.system.members().iter().map(|&c| players.key(c)).collect::<Vec<_>>(),
                "weights": Value::Object(mbs.weights.entries().iter().map(|(c, w)| (players.key(*c), json!(w.to_string()))).collect()),
                "k": mbs.k,
                "alpha": Value::Object(mbs.alpha.iter().map(|(c, a)| (players.key(c), json!(a))).collect()),
                "inequality": mbs.alpha.render(players),
                "value": value.to_string(),
            }),
            Certificate::FailingSubgame { coalition, inner } => {
                let sub = players.subset(*coalition).expect("subgame coalition is nonempty");
                json!({ "kind": "failing_subgame", "coalition": players.key(*coalition), "certificate": inner.to_json(&sub) })
            }
            Certificate::NoTightAllocation { coalition, theta } => json!({
                "kind": "no_tight_allocation",
                "coalition": players.key(*coalition),
                "theta": serde_json::from_str::<Value>(&theta.to_json()).expect("valid json")["values"].clone(),
            }),
            Certificate::InequalitiesHold(facets) => json!({ "kind": "inequalities_hold", "count": facets.len() }),
        }
    }

    /// Human-readable form, one fact per line.
    pub fn render(&self, players: &Players) -> String {
        match self {
            Certificate::CoreAllocation(x) => format!("core allocation: {}", allocation_text(players, x)),
            Certificate::TightAllocationTable(table) => {
                let mut out = String::from("core allocations tight at each coalition:");
                for (d, x) in table {
                    out.push_str(&format!("\n  {}: {}", players.key(*d), allocation_text(players, x)));
                }
                out
            }
            Certificate::ViolatedSystem { mbs, value } => format!(
                "violated inequality: {}\n  system: {}\n  value: {value}",
                mbs.alpha.render(players),
                players.system_label(&mbs.system)
            ),
            Certificate::FailingSubgame { coalition, inner } => {
                let sub = players.subset(*coalition).expect("subgame coalition is nonempty");
                let body = inner.render(&sub).replace('\n', "\n  ");
                format!("subgame on {{{}}} is not balanced:\n  {body}", players.name_list(*coalition).join(", "))
            }
            Certificate::NoTightAllocation { coalition, theta } => {
                format!("no core allocation is tight at {}\n  theta: {theta}", players.label(*coalition))
            }
            Certificate::InequalitiesHold(facets) => format!("all {} catalogue inequalities hold", facets.len()),
        }
    }
}

impl Verdict {
    pub fn to_json(&self, players: &Players) -> Value {
        json!({ "member": self.member, "certificate": self.certificate.to_json(players) })
    }
}
