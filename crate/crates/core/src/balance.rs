//! Min-balanced set systems: detection, normalized inequality vectors,
//! complementation, enumeration and permutational types.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{self, Rat, RatVector};
use crate::model::{Coalition, ModelError, Players, SetFunction, SetSystem, MAX_ENUMERATION_PLAYERS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("set system is empty")]
    EmptySystem,
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("enumeration supports at most {max} players, got {0}", max = MAX_ENUMERATION_PLAYERS)]
    TooManyPlayers(usize),
    #[error("normalization needs a non-trivial system")]
    TrivialSystem,
    #[error("minimal scaling {0} of the weights is not an integer")]
    NonIntegralScaling(Rat),
    #[error("complementing a system that contains the grand coalition")]
    GrandCoalitionMember,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The unique positive weights `λ_S` of a min-balanced system, in member order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BalancedWeights(Vec<(Coalition, Rat)>);

impl BalancedWeights {
    pub fn new(entries: Vec<(Coalition, Rat)>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[(Coalition, Rat)] {
        &self.0
    }

    pub fn get(&self, c: Coalition) -> Option<&Rat> {
        self.0.iter().find(|(s, _)| *s == c).map(|(_, w)| w)
    }

    pub fn carrier(&self) -> Coalition {
        self.0.iter().fold(Coalition::EMPTY, |acc, (s, _)| acc.union(*s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Integer coefficient vector over all coalitions of `n` players, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InequalityVector {
    n: usize,
    coeffs: BTreeMap<Coalition, i64>,
}

impl InequalityVector {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: BTreeMap::new() }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (Coalition, i64)>) -> Self {
        let mut v = Self::zero(n);
        for (c, a) in pairs {
            v.add(c, a);
        }
        v
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: Coalition) -> i64 {
        self.coeffs.get(&c).copied().unwrap_or(0)
    }

    pub fn add(&mut self, c: Coalition, a: i64) {
        let slot = self.coeffs.entry(c).or_insert(0);
        *slot += a;
        if *slot == 0 {
            self.coeffs.remove(&c);
        }
    }

    /// Nonzero entries in bitmask order.
    pub fn iter(&self) -> impl Iterator<Item = (Coalition, i64)> + '_ {
        self.coeffs.iter().map(|(&c, &a)| (c, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_o_standardized(&self) -> bool {
        let total: i64 = self.coeffs.values().sum();
        total == 0 && (0..self.n).all(|i| self.iter().filter(|(c, _)| c.contains(i)).map(|(_, a)| a).sum::<i64>() == 0)
    }

    /// The reflected vector `T ↦ α(N∖T)`.
    pub fn conjugate(&self) -> InequalityVector {
        let full = Coalition::full(self.n);
        Self { n: self.n, coeffs: self.iter().map(|(c, a)| (full.difference(c), a)).collect() }
    }

    /// Coalitions with negative coefficient.
    pub fn induced_system(&self) -> SetSystem {
        SetSystem::new(self.iter().filter(|&(_, a)| a < 0).map(|(c, _)| c).collect())
            .expect("negative support never contains duplicates")
    }

    pub fn permute(&self, perm: &[usize]) -> InequalityVector {
        Self { n: self.n, coeffs: self.iter().map(|(c, a)| (c.permute(perm), a)).collect() }
    }

    pub fn to_set_function(&self, players: &Players) -> SetFunction {
        assert_eq!(players.len(), self.n, "player count mismatch");
        SetFunction::from_fn(players, |c| arith::rat(self.get(c)))
    }

    /// `⟨α, f⟩` without materializing α densely.
    pub fn inner(&self, f: &SetFunction) -> Rat {
        assert_eq!(f.players().len(), self.n, "player count mismatch");
        self.iter().fold(Rat::zero(), |acc, (c, a)| acc + f.value(c) * BigInt::from(a))
    }

    /// Renders `2·m(abc) − m(ab) − m(ac) − m(bc) + m(∅) ≥ 0`.
    ///
    /// The positive term on the largest coalition leads, followed by negative
    /// terms by cardinality then lexicographically, then the remaining
    /// positive terms by decreasing cardinality.
    pub fn render(&self, players: &Players) -> String {
        assert_eq!(players.len(), self.n, "player count mismatch");
        let mut positive: Vec<(Coalition, i64)> = self.iter().filter(|&(_, a)| a > 0).collect();
        let mut negative: Vec<(Coalition, i64)> = self.iter().filter(|&(_, a)| a < 0).collect();
        positive.sort_by(|x, y| y.0.len().cmp(&x.0.len()).then_with(|| x.0.lex_cmp(y.0)));
        negative.sort_by(|x, y| x.0.size_lex_cmp(y.0));
        let mut terms = Vec::new();
        let mut rest = positive.into_iter();
        terms.extend(rest.next());
        terms.extend(negative);
        terms.extend(rest);
        if terms.is_empty() {
            return "0 ≥ 0".to_string();
        }
        let mut out = String::new();
        for (idx, (c, a)) in terms.into_iter().enumerate() {
            let sign = if a < 0 { "−" } else { "+" };
            if idx == 0 {
                if a < 0 {
                    out.push('−');
                }
            } else {
                out.push(' ');
                out.push_str(sign);
                out.push(' ');
            }
            let mag = a.unsigned_abs();
            if mag != 1 {
                out.push_str(&format!("{mag}·"));
            }
            out.push_str(&format!("m({})", players.label(c)));
        }
        out.push_str(" ≥ 0");
        out
    }

    /// Inverse of [`InequalityVector::render`]; also accepts ASCII `-`, `*` and `>=`.
    pub fn parse(players: &Players, text: &str) -> Result<InequalityVector, String> {
        let normalized = text.trim().replace('−', "-").replace('·', "*").replace('≥', ">=");
        let lhs = normalized
            .strip_suffix(">= 0")
            .ok_or_else(|| format!("inequality must end with \"≥ 0\": {text:?}"))?
            .trim();
        let mut v = InequalityVector::zero(players.len());
        if lhs == "0" {
            return Ok(v);
        }
        let mut tokens = lhs.split_whitespace().peekable();
        let mut first = true;
        while let Some(tok) = tokens.next() {
            let (negative, term) = if first {
                first = false;
                match tok.strip_prefix('-') {
                    Some(t) if !t.is_empty() => (true, t.to_string()),
                    Some(_) => (true, tokens.next().ok_or("dangling sign")?.to_string()),
                    None => (false, tok.strip_prefix('+').unwrap_or(tok).to_string()),
                }
            } else {
                let negative = match tok {
                    "-" => true,
                    "+" => false,
                    _ => return Err(format!("expected sign, found {tok:?}")),
                };
                (negative, tokens.next().ok_or("dangling sign")?.to_string())
            };
            let (mag, atom) = match term.split_once('*') {
                Some((m, rest)) => (m.parse::<i64>().map_err(|_| format!("bad coefficient {m:?}"))?, rest.to_string()),
                None => (1, term),
            };
            let key = atom
                .strip_prefix("m(")
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| format!("bad term {atom:?}"))?;
            let c = players.parse_key(key).map_err(|e| e.to_string())?;
            if v.get(c) != 0 {
                return Err(format!("coalition {key:?} appears twice"));
            }
            v.add(c, if negative { -mag } else { mag });
        }
        Ok(v)
    }
}

/// A min-balanced system together with its weights and normalized inequality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinBalancedSystem {
    pub system: SetSystem,
    pub carrier: Coalition,
    pub weights: BalancedWeights,
    pub k: u64,
    pub alpha: InequalityVector,
}

impl MinBalancedSystem {
    pub fn is_trivial(&self) -> bool {
        self.system.len() < 2
    }

    pub fn weight(&self, c: Coalition) -> Option<&Rat> {
        self.weights.get(c)
    }
}

impl fmt::Display for MinBalancedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.system.members().iter().map(|c| format!("{:#b}", c.0)).collect();
        write!(f, "{{{}}} k={}", parts.join(", "), self.k)
    }
}

/// Returns the system with its weights when it is min-balanced on its carrier.
pub fn is_min_balanced(system: &SetSystem, players: &Players) -> Result<Option<MinBalancedSystem>, BalanceError> {
    if system.is_empty() {
        return Err(BalanceError::EmptySystem);
    }
    for &c in system.members() {
        players.check(c)?;
    }
    let n = players.len();
    let carrier = system.carrier();
    let columns: Vec<RatVector> = system.members().iter().map(|c| c.incidence(n)).collect();
    let solution = match arith::solve_unique(&columns, &carrier.incidence(n)) {
        Ok(Some(s)) => s,
        Ok(None) | Err(arith::ArithError::DependentColumns) => return Ok(None),
        Err(e) => unreachable!("incidence vectors share a dimension: {e}"),
    };
    if solution.as_slice().iter().any(|w| !w.is_positive()) {
        return Ok(None);
    }
    let weights = BalancedWeights(system.members().iter().copied().zip(solution.into_vec()).collect());
    let (k, alpha) = if system.len() == 1 { (1, InequalityVector::zero(n)) } else { normalize(&weights, players)? };
    Ok(Some(MinBalancedSystem { system: system.clone(), carrier, weights, k, alpha }))
}

/// The minimal integer scaling `k` and the o-standardized coefficient vector.
pub fn normalize(weights: &BalancedWeights, players: &Players) -> Result<(u64, InequalityVector), BalanceError> {
    if weights.len() < 2 {
        return Err(BalanceError::TrivialSystem);
    }
    let lcm = weights.entries().iter().fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> =
        weights.entries().iter().map(|(_, w)| (w * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = scaled.iter().fold(BigInt::zero(), |acc, m| acc.gcd(m));
    let k = Rat::new(lcm, gcd.clone());
    if !k.is_integer() {
        return Err(BalanceError::NonIntegralScaling(k));
    }
    let k_int = k.to_integer().to_u64().expect("scaling fits in u64");
    let mut alpha = InequalityVector::zero(players.len());
    alpha.add(weights.carrier(), k_int as i64);
    let mut empty = -(k_int as i64);
    for ((c, _), m) in weights.entries().iter().zip(&scaled) {
        let coeff = (m / &gcd).to_i64().expect("coefficient fits in i64");
        alpha.add(*c, -coeff);
        empty += coeff;
    }
    alpha.add(Coalition::EMPTY, empty);
    debug_assert!(alpha.is_o_standardized());
    Ok((k_int, alpha))
}

/// `{N∖S : S ∈ system}`.
pub fn complement_system(system: &SetSystem, players: &Players) -> Result<SetSystem, BalanceError> {
    let full = players.grand();
    if system.contains(full) {
        return Err(BalanceError::GrandCoalitionMember);
    }
    Ok(SetSystem::new(system.members().iter().map(|&c| full.difference(c)).collect())?)
}

/// Fraction-free echelon basis over small integer vectors.
#[derive(Clone, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<i64>)>,
}

impl Echelon {
    fn reduce(&self, mut v: Vec<i64>) -> Vec<i64> {
        for (p, row) in &self.rows {
            if v[*p] == 0 {
                continue;
            }
            let (a, b) = (row[*p], v[*p]);
            for (x, r) in v.iter_mut().zip(row) {
                *x = a
                    .checked_mul(*x)
                    .and_then(|l| b.checked_mul(*r).and_then(|rr| l.checked_sub(rr)))
                    .expect("echelon entries overflow");
            }
            let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
            if g > 1 {
                v.iter_mut().for_each(|x| *x /= g);
            }
        }
        v
    }

    fn with(&self, v: Vec<i64>) -> Option<Echelon> {
        let r = self.reduce(v);
        let p = r.iter().position(|&x| x != 0)?;
        let mut next = self.clone();
        next.rows.push((p, r));
        Some(next)
    }

    fn spans(&self, v: Vec<i64>) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

fn int_incidence(c: Coalition, n: usize) -> Vec<i64> {
    (0..n).map(|i| i64::from(c.contains(i))).collect()
}

struct Search<'a> {
    candidates: &'a [Coalition],
    suffix_union: &'a [Coalition],
    carrier: Coalition,
    target: Vec<i64>,
    n: usize,
    max_len: usize,
}

impl Search<'_> {
    fn run(
        &self,
        start: usize,
        chosen: &mut Vec<Coalition>,
        basis: &Echelon,
        union: Coalition,
        out: &mut Vec<SetSystem>,
    ) {
        for idx in start..self.candidates.len() {
            if !self.carrier.is_subset(union.union(self.suffix_union[idx])) {
                break;
            }
            let c = self.candidates[idx];
            let Some(next) = basis.with(int_incidence(c, self.n)) else {
                continue;
            };
            chosen.push(c);
            if next.spans(self.target.clone()) {
                // Any extension would get a zero weight on the new member.
                out.push(SetSystem::new(chosen.clone()).expect("candidates are distinct"));
            } else if chosen.len() < self.max_len {
                self.run(idx + 1, chosen, &next, union.union(c), out);
            }
            chosen.pop();
        }
    }
}

/// All min-balanced systems whose carrier is exactly `carrier`, sorted by member list.
pub fn enumerate_min_balanced(
    players: &Players,
    carrier: Coalition,
    non_trivial_only: bool,
) -> Result<Vec<MinBalancedSystem>, BalanceError> {
    if players.len() > MAX_ENUMERATION_PLAYERS {
        return Err(BalanceError::TooManyPlayers(players.len()));
    }
    if carrier.is_empty() {
        return Err(BalanceError::EmptyCarrier);
    }
    players.check(carrier)?;
    let n = players.len();
    let candidates: Vec<Coalition> = (1..carrier.0).map(Coalition).filter(|c| c.is_proper_subset(carrier)).collect();
    let mut suffix_union = vec![Coalition::EMPTY; candidates.len() + 1];
    for i in (0..candidates.len()).rev() {
        suffix_union[i] = suffix_union[i + 1].union(candidates[i]);
    }
    let search = Search {
        candidates: &candidates,
        suffix_union: &suffix_union,
        carrier,
        target: int_incidence(carrier, n),
        n,
        max_len: carrier.len(),
    };
    let mut raw: Vec<SetSystem> = (0..candidates.len())
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let c = candidates[first];
            if search.carrier.is_subset(c.union(suffix_union[first + 1])) && search.max_len > 1 {
                let basis = Echelon::default().with(int_incidence(c, n)).expect("nonempty coalition");
                search.run(first + 1, &mut vec![c], &basis, c, &mut out);
            }
            out
        })
        .collect();
    if !non_trivial_only {
        raw.push(SetSystem::new(vec![carrier])?);
    }
    let mut systems = raw
        .par_iter()
        .map(|s| is_min_balanced(s, players))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    systems.sort_by(|a, b| a.system.cmp(&b.system));
    Ok(systems)
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).expect("successor exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out
}

/// Lexicographically smallest image under all player permutations, and the orbit size.
pub fn canonical_type(system: &SetSystem, players: &Players) -> (SetSystem, usize) {
    let orbit = orbit(system, &permutations(players.len()));
    let canonical = orbit.first().cloned().expect("orbit contains the system itself");
    (canonical, orbit.len())
}

/// All distinct images of `system`, sorted.
pub fn orbit(system: &SetSystem, perms: &[Vec<usize>]) -> Vec<SetSystem> {
    let images: BTreeSet<SetSystem> = perms.iter().map(|p| system.permute(p)).collect();
    images.into_iter().collect()
}
