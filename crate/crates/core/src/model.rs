//! Players, coalitions, set systems, set functions and games.
//!
//! Coalitions are bitmasks over the player list. A [`SetFunction`] is a dense
//! table indexed by bitmask; a [`Game`] is a set function vanishing at the
//! empty coalition.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{Rat, RatVector};

/// Dense tables stay at most 4096 entries.
pub const MAX_PLAYERS: usize = 12;
/// Cap for enumeration and catalogue generation.
pub const MAX_ENUMERATION_PLAYERS: usize = 6;

const RESERVED: &[char] = &['{', '}', ',', '(', ')', '[', ']', '|', '*', '"', '/'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("player count {0} outside the supported range 2..={max}", max = MAX_PLAYERS)]
    PlayerCount(usize),
    #[error("invalid player name {0:?}")]
    InvalidName(String),
    #[error("duplicate player name {0:?}")]
    DuplicateName(String),
    #[error("coalition {0:#b} has players outside the player set")]
    ForeignCoalition(u32),
    #[error("unknown coalition key {0:?}")]
    UnknownKey(String),
    #[error("ambiguous coalition key {0:?}")]
    AmbiguousKey(String),
    #[error("expected {expected} values, found {found}")]
    ValueCount { expected: usize, found: usize },
    #[error("a game must vanish at the empty coalition, found {0}")]
    NonzeroAtEmpty(Rat),
    #[error("coalition must be nonempty")]
    EmptyCoalition,
    #[error("set system must not contain the empty coalition")]
    EmptyMember,
    #[error("duplicate member {0:#b} in set system")]
    DuplicateMember(u32),
    #[error("set functions are defined over different player sets")]
    PlayerMismatch,
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("missing value for coalition {0:?}")]
    MissingValue(String),
    #[error("game json: {0}")]
    Json(String),
}

/// A set of players, identified by index; names are for display and text formats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Players {
    names: Vec<String>,
}

impl Players {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 || names.len() > MAX_PLAYERS {
            return Err(ModelError::PlayerCount(names.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c)) || name == "∅" {
                return Err(ModelError::InvalidName(name.clone()));
            }
            if names[..i].contains(name) {
                return Err(ModelError::DuplicateName(name.clone()));
            }
        }
        Ok(Self { names })
    }

    /// Players named `a`, `b`, `c`, ...
    pub fn letters(n: usize) -> Result<Self, ModelError> {
        if !(2..=MAX_PLAYERS).contains(&n) {
            return Err(ModelError::PlayerCount(n));
        }
        Self::new((0..n).map(|i| char::from(b'a' + i as u8).to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn grand(&self) -> Coalition {
        Coalition::full(self.len())
    }

    /// Number of coalitions, `2^n`.
    pub fn coalition_count(&self) -> usize {
        1 << self.len()
    }

    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> {
        (0..self.coalition_count() as u32).map(Coalition)
    }

    pub fn check(&self, c: Coalition) -> Result<(), ModelError> {
        if c.0 & !self.grand().0 != 0 {
            return Err(ModelError::ForeignCoalition(c.0));
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Concatenated member names in player order; the empty coalition is `""`.
    pub fn key(&self, c: Coalition) -> String {
        c.members().map(|i| self.names[i].as_str()).collect()
    }

    /// Like [`Players::key`], but the empty coalition renders as `∅`.
    pub fn label(&self, c: Coalition) -> String {
        if c.is_empty() {
            "∅".to_string()
        } else {
            self.key(c)
        }
    }

    pub fn name_list(&self, c: Coalition) -> Vec<String> {
        c.members().map(|i| self.names[i].clone()).collect()
    }

    /// Parses a concatenated key; member names must appear in player order.
    pub fn parse_key(&self, key: &str) -> Result<Coalition, ModelError> {
        if key == "∅" {
            return Ok(Coalition::EMPTY);
        }
        let mut found = Vec::new();
        self.split_key(key, 0, 0, &mut found);
        match found.as_slice() {
            [] => Err(ModelError::UnknownKey(key.to_string())),
            [c] => Ok(*c),
            _ => Err(ModelError::AmbiguousKey(key.to_string())),
        }
    }

    fn split_key(&self, rest: &str, from: usize, acc: u32, found: &mut Vec<Coalition>) {
        if found.len() > 1 {
            return;
        }
        if rest.is_empty() {
            found.push(Coalition(acc));
            return;
        }
        for i in from..self.len() {
            if let Some(tail) = rest.strip_prefix(self.names[i].as_str()) {
                self.split_key(tail, i + 1, acc | (1 << i), found);
            }
        }
    }

    pub fn from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Coalition, ModelError> {
        let mut bits = 0u32;
        for n in names {
            let i = self.index_of(n.as_ref()).ok_or_else(|| ModelError::UnknownKey(n.as_ref().to_string()))?;
            bits |= 1 << i;
        }
        Ok(Coalition(bits))
    }

    /// The players of a nonempty coalition, in inherited order.
    pub fn subset(&self, c: Coalition) -> Result<Players, ModelError> {
        self.check(c)?;
        let names: Vec<String> = c.members().map(|i| self.names[i].clone()).collect();
        if names.is_empty() {
            return Err(ModelError::EmptyCoalition);
        }
        // Restrictions may have a single player, below the usual minimum.
        Ok(Players { names })
    }

    /// Human-readable system, e.g. `{a, bc}`.
    pub fn system_label(&self, system: &SetSystem) -> String {
        let parts: Vec<String> = system.members().iter().map(|&c| self.label(c)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// A coalition as a bitmask over player indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn full(n: usize) -> Self {
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        Coalition(1 << i)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Coalition) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |&i| bits >> i & 1 == 1)
    }

    /// Incidence vector in `R^n`.
    pub fn incidence(self, n: usize) -> RatVector {
        RatVector::new((0..n).map(|i| if self.contains(i) { Rat::one() } else { Rat::zero() }).collect())
    }

    /// Lexicographic comparison of the sorted member index lists (`ab < ac < b`).
    pub fn lex_cmp(self, other: Coalition) -> Ordering {
        self.members().cmp(other.members())
    }

    /// Cardinality first, then lexicographic.
    pub fn size_lex_cmp(self, other: Coalition) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.lex_cmp(other))
    }

    /// Image under a permutation of player indices.
    pub fn permute(self, perm: &[usize]) -> Coalition {
        Coalition(self.members().fold(0, |acc, i| acc | 1 << perm[i]))
    }

    /// Position of this coalition inside the subsets of `outer`, packing the
    /// bits of `outer` to the low end (used for restrictions).
    pub fn compress(self, outer: Coalition) -> Coalition {
        let mut bits = 0;
        for (k, i) in outer.members().enumerate() {
            if self.contains(i) {
                bits |= 1 << k;
            }
        }
        Coalition(bits)
    }

    /// Inverse of [`Coalition::compress`].
    pub fn expand(self, outer: Coalition) -> Coalition {
        let mut bits = 0;
        for (k, i) in outer.members().enumerate() {
            if self.contains(k) {
                bits |= 1 << i;
            }
        }
        Coalition(bits)
    }
}

/// A strictly increasing (by bitmask) family of distinct nonempty coalitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SetSystem(Vec<Coalition>);

impl SetSystem {
    pub fn new(mut members: Vec<Coalition>) -> Result<Self, ModelError> {
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateMember(w[0].0));
            }
        }
        if members.first() == Some(&Coalition::EMPTY) {
            return Err(ModelError::EmptyMember);
        }
        Ok(Self(members))
    }

    /// Convenience constructor from keys such as `["ab", "cd"]`.
    pub fn parse<S: AsRef<str>>(players: &Players, keys: &[S]) -> Result<Self, ModelError> {
        let members = keys
            .iter()
            .map(|k| {
                let c = players.parse_key(k.as_ref())?;
                players.check(c)?;
                Ok(c)
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Self::new(members)
    }

    pub fn members(&self) -> &[Coalition] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: Coalition) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn carrier(&self) -> Coalition {
        self.0.iter().fold(Coalition::EMPTY, |acc, &c| acc.union(c))
    }

    /// Intersection of all members; the empty system yields `None`.
    pub fn common(&self) -> Option<Coalition> {
        let mut it = self.0.iter().copied();
        let first = it.next()?;
        Some(it.fold(first, Coalition::intersection))
    }

    pub fn permute(&self, perm: &[usize]) -> SetSystem {
        let mut members: Vec<Coalition> = self.0.iter().map(|c| c.permute(perm)).collect();
        members.sort_unstable();
        SetSystem(members)
    }

    pub fn without(&self, c: Coalition) -> SetSystem {
        SetSystem(self.0.iter().copied().filter(|&m| m != c).collect())
    }

    /// Members ordered by cardinality, then lexicographically.
    pub fn size_lex_order(&self) -> Vec<Coalition> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.size_lex_cmp(*b));
        v
    }
}

/// Real-valued function on all `2^n` coalitions, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFunction {
    players: Players,
    values: Vec<Rat>,
}

impl SetFunction {
    pub fn new(players: Players, values: Vec<Rat>) -> Result<Self, ModelError> {
        let expected = players.coalition_count();
        if values.len() != expected {
            return Err(ModelError::ValueCount { expected, found: values.len() });
        }
        Ok(Self { players, values })
    }

    pub fn from_fn(players: &Players, mut f: impl FnMut(Coalition) -> Rat) -> Self {
        let values = players.coalitions().map(&mut f).collect();
        Self { players: players.clone(), values }
    }

    pub fn zero(players: &Players) -> Self {
        Self::constant(players, Rat::zero())
    }

    pub fn constant(players: &Players, value: Rat) -> Self {
        Self { players: players.clone(), values: vec![value; players.coalition_count()] }
    }

    /// Indicator of supersets of `a`; `unanimity(∅)` is the constant 1.
    pub fn unanimity(players: &Players, a: Coalition) -> Self {
        Self::from_fn(players, |s| if a.is_subset(s) { Rat::one() } else { Rat::zero() })
    }

    /// Indicator of the single coalition `a`.
    pub fn dirac(players: &Players, a: Coalition) -> Self {
        Self::from_fn(players, |s| if s == a { Rat::one() } else { Rat::zero() })
    }

    /// `S ↦ Σ_{i∈S} x_i`.
    pub fn additive(players: &Players, x: &[Rat]) -> Self {
        assert_eq!(x.len(), players.len(), "payoff vector length must match player count");
        Self::from_fn(players, |s| s.members().fold(Rat::zero(), |acc, i| acc + &x[i]))
    }

    pub fn players(&self) -> &Players {
        &self.players
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, c: Coalition) -> &Rat {
        &self.values[c.0 as usize]
    }

    pub fn set(&mut self, c: Coalition, v: Rat) {
        self.values[c.0 as usize] = v;
    }

    /// `S ↦ f(S) − f(∅)`.
    pub fn shift(&self) -> Game {
        let base = self.values[0].clone();
        Game(SetFunction { players: self.players.clone(), values: self.values.iter().map(|v| v - &base).collect() })
    }

    /// The function on subsets of the nonempty coalition `a`.
    pub fn restrict(&self, a: Coalition) -> Result<SetFunction, ModelError> {
        let players = self.players.subset(a)?;
        let values = (0..1u32 << a.len()).map(|sub| self.value(Coalition(sub).expand(a)).clone()).collect();
        Ok(SetFunction { players, values })
    }

    /// `T ↦ f(N∖T)`.
    pub fn reflect(&self) -> SetFunction {
        let full = self.players.grand();
        SetFunction::from_fn(&self.players, |t| self.value(full.difference(t)).clone())
    }

    pub fn inner(&self, other: &SetFunction) -> Result<Rat, ModelError> {
        if self.players != other.players {
            return Err(ModelError::PlayerMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .fold(Rat::zero(), |acc, (a, b)| acc + a * b))
    }

    /// Total sum and every per-player column sum vanish.
    pub fn is_o_standardized(&self) -> bool {
        let n = self.players.len();
        let mut total = Rat::zero();
        let mut per_player = vec![Rat::zero(); n];
        for (bits, v) in self.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            total += v;
            for (i, acc) in per_player.iter_mut().enumerate() {
                if bits >> i & 1 == 1 {
                    *acc += v;
                }
            }
        }
        total.is_zero() && per_player.iter().all(Zero::is_zero)
    }

    /// Checks `f = f(∅)·u_∅ + Σ_i (f({i}) − f(∅))·u_{i}`.
    pub fn is_modular(&self) -> bool {
        let base = &self.values[0];
        let gains: Vec<Rat> = (0..self.players.len()).map(|i| self.value(Coalition::singleton(i)) - base).collect();
        self.players.coalitions().all(|s| {
            let predicted = s.members().fold(base.clone(), |acc, i| acc + &gains[i]);
            &predicted == self.value(s)
        })
    }

    pub fn is_game(&self) -> bool {
        self.values[0].is_zero()
    }

    pub fn scale(&self, factor: &Rat) -> SetFunction {
        SetFunction { players: self.players.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &SetFunction) -> Result<SetFunction, ModelError> {
        if self.players != other.players {
            return Err(ModelError::PlayerMismatch);
        }
        Ok(SetFunction {
            players: self.players.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        let file = GameFile {
            players: self.players.names.clone(),
            values: self.ordered_coalitions().map(|c| (self.players.key(c), self.value(c).to_string())).collect(),
        };
        serde_json::to_string_pretty(&file).expect("game serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<SetFunction, ModelError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        let players = Players::new(file.players)?;
        let mut values: Vec<Option<Rat>> = vec![None; players.coalition_count()];
        for (key, raw) in &file.values {
            let c = players.parse_key(key)?;
            if values[c.0 as usize].is_some() {
                return Err(ModelError::Json(format!("duplicate key {key:?}")));
            }
            values[c.0 as usize] = Some(parse_rat(raw)?);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(bits, v)| v.ok_or_else(|| ModelError::MissingValue(players.key(Coalition(bits as u32)))))
            .collect::<Result<Vec<_>, _>>()?;
        SetFunction::new(players, values)
    }

    fn ordered_coalitions(&self) -> impl Iterator<Item = Coalition> {
        let mut all: Vec<Coalition> = self.players.coalitions().collect();
        all.sort_by(|a, b| a.size_lex_cmp(*b));
        all.into_iter()
    }
}

impl fmt::Display for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.ordered_coalitions().map(|c| format!("{}: {}", self.players.label(c), self.value(c))).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    players: Vec<String>,
    values: IndexMap<String, String>,
}

/// Parses a decimal integer or a reduced `p/q` with `q > 0`.
pub fn parse_rat(raw: &str) -> Result<Rat, ModelError> {
    let bad = || ModelError::BadRational(raw.to_string());
    let int = |s: &str| -> Result<BigInt, ModelError> {
        let digits = s.strip_prefix('-').unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        BigInt::from_str(s).map_err(|_| bad())
    };
    match raw.split_once('/') {
        None => Ok(Rat::from_integer(int(raw)?)),
        Some((p, q)) => {
            let p = int(p)?;
            let q = int(q)?;
            if !q.is_positive() {
                return Err(bad());
            }
            let r = Rat::new(p.clone(), q.clone());
            if r.numer() != &p || r.denom() != &q {
                return Err(bad());
            }
            Ok(r)
        }
    }
}

/// A set function with value 0 at the empty coalition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Game(SetFunction);

impl Game {
    pub fn new(f: SetFunction) -> Result<Self, ModelError> {
        if !f.values[0].is_zero() {
            return Err(ModelError::NonzeroAtEmpty(f.values[0].clone()));
        }
        Ok(Game(f))
    }

    pub fn zero(players: &Players) -> Self {
        Game(SetFunction::zero(players))
    }

    pub fn additive(players: &Players, x: &[Rat]) -> Self {
        Game(SetFunction::additive(players, x))
    }

    pub fn unanimity(players: &Players, a: Coalition) -> Result<Self, ModelError> {
        if a.is_empty() {
            return Err(ModelError::EmptyCoalition);
        }
        Ok(Game(SetFunction::unanimity(players, a)))
    }

    pub fn players(&self) -> &Players {
        &self.0.players
    }

    pub fn value(&self, c: Coalition) -> &Rat {
        self.0.value(c)
    }

    pub fn as_set_function(&self) -> &SetFunction {
        &self.0
    }

    pub fn into_set_function(self) -> SetFunction {
        self.0
    }

    /// `S ↦ m(N∖S) − m(N)`, the negated dual game.
    pub fn anti_dual(&self) -> Game {
        self.0.reflect().shift()
    }

    pub fn restrict(&self, a: Coalition) -> Result<Game, ModelError> {
        Ok(Game(self.0.restrict(a)?))
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};

    fn p3() -> Players {
        Players::letters(3).unwrap()
    }

    fn p4() -> Players {
        Players::letters(4).unwrap()
    }

    /// m(N) = 3, pairs 2, singletons 0.
    fn example_game() -> Game {
        let p = p3();
        Game::new(SetFunction::from_fn(&p, |s| match s.len() {
            3 => rat(3),
            2 => rat(2),
            _ => rat(0),
        }))
        .unwrap()
    }

    #[test]
    fn player_validation() {
        assert_eq!(Players::letters(1), Err(ModelError::PlayerCount(1)));
        assert_eq!(Players::letters(13), Err(ModelError::PlayerCount(13)));
        assert!(matches!(Players::new(["a", "a"]), Err(ModelError::DuplicateName(_))));
        assert!(matches!(Players::new(["a", "b c"]), Err(ModelError::InvalidName(_))));
        assert!(matches!(Players::new(["a", ""]), Err(ModelError::InvalidName(_))));
    }

    #[test]
    fn keys_round_trip_with_long_names() {
        let p = Players::new(["x1", "x2", "y"]).unwrap();
        for c in p.coalitions() {
            assert_eq!(p.parse_key(&p.key(c)).unwrap(), c);
        }
        assert!(matches!(p.parse_key("x3"), Err(ModelError::UnknownKey(_))));
        let amb = Players::new(["a", "ab", "b"]).unwrap();
        assert!(matches!(amb.parse_key("ab"), Err(ModelError::AmbiguousKey(_))));
    }

    #[test]
    fn set_system_invariants() {
        let p = p4();
        let s = SetSystem::parse(&p, &["cd", "a", "b"]).unwrap();
        assert_eq!(s.members(), &[Coalition(1), Coalition(2), Coalition(12)]);
        assert_eq!(s.carrier(), p.grand());
        assert!(matches!(SetSystem::parse(&p, &["a", "a"]), Err(ModelError::DuplicateMember(_))));
        assert_eq!(SetSystem::new(vec![Coalition::EMPTY]), Err(ModelError::EmptyMember));
    }

    #[test]
    fn shift_examples() {
        let p = Players::letters(2).unwrap();
        let c = SetFunction::constant(&p, rat(5));
        assert_eq!(c.shift(), Game::zero(&p));
        let g = example_game();
        assert_eq!(g.as_set_function().shift(), g);
        let f = SetFunction::new(p.clone(), vec![rat(1), rat(1), rat(2), rat(4)]).unwrap();
        assert_eq!(f.shift().as_set_function().values(), &[rat(0), rat(0), rat(1), rat(3)]);
    }

    #[test]
    fn restrict_examples() {
        let g = example_game().anti_dual();
        let ab = Coalition(0b011);
        let sub = g.restrict(ab).unwrap();
        assert_eq!(sub.players().names(), &["a", "b"]);
        assert_eq!(sub.as_set_function().values(), &[rat(0), rat(-1), rat(-1), rat(-3)]);

        let f = example_game().into_set_function();
        let whole = f.restrict(f.players().grand()).unwrap();
        assert_eq!(whole, f);

        let p = p4();
        let u = SetFunction::unanimity(&p, Coalition(0b0110));
        let r = u.restrict(Coalition(0b0011)).unwrap();
        assert!(r.values().iter().all(Zero::is_zero));

        assert_eq!(f.restrict(Coalition::EMPTY), Err(ModelError::EmptyCoalition));
    }

    #[test]
    fn reflect_examples() {
        let m = example_game().into_set_function();
        let r = m.reflect();
        let p = p3();
        for c in p.coalitions() {
            let expected = match c.len() {
                0 => rat(3),
                1 => rat(2),
                _ => rat(0),
            };
            assert_eq!(r.value(c), &expected, "at {}", p.label(c));
        }
        // symmetric in complement: value depends only on |S| and |N∖S| jointly
        let sym = SetFunction::from_fn(&p4(), |s| rat((s.len() as i64 - 2).abs()));
        assert_eq!(sym.reflect(), sym);
    }

    #[test]
    fn anti_dual_examples() {
        let ad = example_game().anti_dual();
        let p = p3();
        for c in p.coalitions() {
            let expected = match c.len() {
                0 => rat(0),
                1 => rat(-1),
                _ => rat(-3),
            };
            assert_eq!(ad.value(c), &expected);
        }
        assert_eq!(Game::zero(&p).anti_dual(), Game::zero(&p));
        let x = [rat(1), rat(2), rat(3)];
        let neg = [rat(-1), rat(-2), rat(-3)];
        assert_eq!(Game::additive(&p, &x).anti_dual(), Game::additive(&p, &neg));
    }

    #[test]
    fn indicator_functions() {
        let p = p3();
        assert_eq!(SetFunction::unanimity(&p, Coalition::EMPTY), SetFunction::constant(&p, rat(1)));
        let d = SetFunction::dirac(&p, p.grand());
        for c in p.coalitions() {
            assert_eq!(d.value(c), &rat(i64::from(c == p.grand())));
        }
        let ua = SetFunction::unanimity(&p, Coalition(1));
        for c in p.coalitions() {
            assert_eq!(ua.value(c), &rat(i64::from(c.contains(0))));
        }
    }

    #[test]
    fn inner_examples() {
        let p = Players::letters(2).unwrap();
        let zero = SetFunction::zero(&p);
        let theta = SetFunction::new(p.clone(), vec![rat(1), rat(-1), rat(-1), rat(1)]).unwrap();
        assert_eq!(theta.inner(&zero).unwrap(), rat(0));
        let m = SetFunction::dirac(&p, p.grand());
        assert_eq!(theta.inner(&m).unwrap(), rat(1));
        let f = example_game().into_set_function();
        let d = SetFunction::dirac(f.players(), Coalition(0b110));
        assert_eq!(d.inner(&f).unwrap(), rat(2));
        assert_eq!(theta.inner(&f), Err(ModelError::PlayerMismatch));
    }

    #[test]
    fn o_standardized_examples() {
        let p5 = Players::letters(5).unwrap();
        assert!(SetFunction::zero(&p5).is_o_standardized());
        let mut alpha = SetFunction::zero(&p5);
        alpha.set(Coalition(0b01111), rat(3));
        alpha.set(Coalition(0b00011), rat(-1));
        alpha.set(Coalition(0b00101), rat(-1));
        alpha.set(Coalition(0b01001), rat(-1));
        alpha.set(Coalition(0b01110), rat(-2));
        alpha.set(Coalition::EMPTY, rat(2));
        assert!(alpha.is_o_standardized());
        assert!(!SetFunction::unanimity(&p5, Coalition(1)).is_o_standardized());
    }

    #[test]
    fn modular_examples() {
        let p = p3();
        assert!(Game::additive(&p, &[rat(4), ratio(-1, 2), rat(0)]).as_set_function().is_modular());
        assert!(!SetFunction::unanimity(&p, Coalition(0b011)).is_modular());
        assert!(SetFunction::constant(&p, rat(7)).is_modular());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rat("-3").unwrap(), rat(-3));
        assert_eq!(parse_rat("2/3").unwrap(), ratio(2, 3));
        for bad in ["2/4", "1/0", "1/-2", "", "x", "1.5", "+1", "3/"] {
            assert!(parse_rat(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn game_json_round_trip() {
        let g = example_game();
        let text = g.as_set_function().to_json();
        assert!(text.contains("\"abc\": \"3\""));
        let back = SetFunction::from_json(&text).unwrap();
        assert_eq!(back, *g.as_set_function());
    }

    #[test]
    fn game_json_errors() {
        let missing = r#"{"players":["a","b"],"values":{"":"0","a":"0","b":"0"}}"#;
        assert!(matches!(SetFunction::from_json(missing), Err(ModelError::MissingValue(k)) if k == "ab"));
        let order = r#"{"players":["a","b"],"values":{"":"0","a":"0","b":"0","ba":"1"}}"#;
        assert!(matches!(SetFunction::from_json(order), Err(ModelError::UnknownKey(_))));
        assert!(matches!(SetFunction::from_json("{"), Err(ModelError::Json(_))));
        let nonzero = r#"{"players":["a","b"],"values":{"":"1","a":"0","b":"0","ab":"1"}}"#;
        let f = SetFunction::from_json(nonzero).unwrap();
        assert!(matches!(Game::new(f), Err(ModelError::NonzeroAtEmpty(_))));
    }
}
