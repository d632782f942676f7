//! Reproducible checks against known catalogue data for small player counts.

use std::fmt;

use crate::balance::InequalityVector;
use crate::catalogue::{generate, Catalogue, CatalogueError, ConeKind};
use crate::cones::{is_exact, is_totally_balanced_lp};
use crate::model::{Players, SetSystem};
use crate::sample;

/// Facet and type counts of the exact cone, indexed by player count.
pub const EXACT_FACETS: [(usize, usize, usize); 4] = [(2, 1, 1), (3, 6, 2), (4, 44, 6), (5, 280, 16)];

/// One permutational type of non-trivial min-balanced systems on the full
/// player set. `link` is the 1-based index of the complementary type.
#[derive(Debug, Clone, Copy)]
pub struct KnownType {
    pub system: &'static [&'static str],
    pub inequality: &'static str,
    pub count: usize,
    pub irreducible: bool,
    pub link: usize,
}

const fn known(
    system: &'static [&'static str],
    inequality: &'static str,
    count: usize,
    irreducible: bool,
    link: usize,
) -> KnownType {
    KnownType { system, inequality, count, irreducible, link }
}

pub const TWO_PLAYER_TYPES: [KnownType; 1] = [known(&["a", "b"], "m(ab) − m(a) − m(b) + m(∅) ≥ 0", 1, true, 1)];

pub const THREE_PLAYER_TYPES: [KnownType; 3] = [
    known(&["a", "b", "c"], "m(abc) − m(a) − m(b) − m(c) + 2·m(∅) ≥ 0", 1, false, 3),
    known(&["a", "bc"], "m(abc) − m(a) − m(bc) + m(∅) ≥ 0", 3, true, 2),
    known(&["ab", "ac", "bc"], "2·m(abc) − m(ab) − m(ac) − m(bc) + m(∅) ≥ 0", 1, true, 1),
];

pub const FOUR_PLAYER_TYPES: [KnownType; 9] = [
    known(&["a", "b", "c", "d"], "m(abcd) − m(a) − m(b) − m(c) − m(d) + 3·m(∅) ≥ 0", 1, false, 9),
    known(&["a", "b", "cd"], "m(abcd) − m(a) − m(b) − m(cd) + 2·m(∅) ≥ 0", 6, false, 6),
    known(&["ab", "cd"], "m(abcd) − m(ab) − m(cd) + m(∅) ≥ 0", 3, true, 3),
    known(&["a", "bcd"], "m(abcd) − m(a) − m(bcd) + m(∅) ≥ 0", 4, true, 4),
    known(&["a", "bc", "bd", "cd"], "2·m(abcd) − 2·m(a) − m(bc) − m(bd) − m(cd) + 3·m(∅) ≥ 0", 4, false, 8),
    known(&["ab", "acd", "bcd"], "2·m(abcd) − m(ab) − m(acd) − m(bcd) + m(∅) ≥ 0", 6, true, 2),
    known(&["a", "bd", "cd", "abc"], "2·m(abcd) − m(a) − m(bd) − m(cd) − m(abc) + 2·m(∅) ≥ 0", 12, false, 7),
    known(&["ab", "ac", "ad", "bcd"], "3·m(abcd) − m(ab) − m(ac) − m(ad) − 2·m(bcd) + 2·m(∅) ≥ 0", 4, true, 5),
    known(&["abc", "abd", "acd", "bcd"], "3·m(abcd) − m(abc) − m(abd) − m(acd) − m(bcd) + m(∅) ≥ 0", 1, true, 1),
];

/// Facet types of the exact cone on four players: representative
/// inequality, multiplicity, induced system and 1-based conjugate index.
pub const FOUR_PLAYER_EXACT_TYPES: [(&str, usize, &[&str], usize); 6] = [
    ("m(ab) − m(a) − m(b) + m(∅) ≥ 0", 6, &["a", "b"], 4),
    ("m(abc) − m(a) − m(bc) + m(∅) ≥ 0", 12, &["a", "bc"], 5),
    ("2·m(abc) − m(ab) − m(ac) − m(bc) + m(∅) ≥ 0", 4, &["ab", "ac", "bc"], 6),
    ("m(abcd) − m(acd) − m(bcd) + m(cd) ≥ 0", 6, &["acd", "bcd"], 1),
    ("m(abcd) − m(ad) − m(bcd) + m(d) ≥ 0", 12, &["ad", "bcd"], 2),
    ("m(abcd) − m(ad) − m(bd) − m(cd) + 2·m(d) ≥ 0", 4, &["ad", "bd", "cd"], 3),
];

pub fn known_types(n: usize) -> Option<&'static [KnownType]> {
    match n {
        2 => Some(&TWO_PLAYER_TYPES),
        3 => Some(&THREE_PLAYER_TYPES),
        4 => Some(&FOUR_PLAYER_TYPES),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub expected: String,
    pub actual: String,
}

impl CheckItem {
    pub fn new(name: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        let expected = expected.to_string();
        let actual = actual.to_string();
        Self { name: name.into(), passed: expected == actual, expected, actual }
    }
}

impl fmt::Display for CheckItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(f, "PASS  {}: {}", self.name, self.actual)
        } else {
            write!(f, "FAIL  {}: expected {}, got {}", self.name, self.expected, self.actual)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub items: Vec<CheckItem>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("no reference data for {0} players")]
    NoReference(usize),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
}

/// Facet and type counts of the conjectured exact-cone catalogue.
pub fn facet_counts(n: usize) -> Result<SuiteReport, VerifyError> {
    let &(_, facets, types) = EXACT_FACETS.iter().find(|r| r.0 == n).ok_or(VerifyError::NoReference(n))?;
    let players = Players::letters(n).expect("reference player counts are valid");
    // With two players the exact cone coincides with the balanced cone.
    let cone = if n == 2 { ConeKind::Balanced } else { ConeKind::ExactConjecture };
    let cat = generate(&players, cone)?;
    Ok(SuiteReport {
        suite: format!("facet counts n={n}"),
        items: vec![
            CheckItem::new("facets", facets, cat.entries.len()),
            CheckItem::new("types", types, cat.types.len()),
        ],
    })
}

fn system(players: &Players, keys: &[&str]) -> SetSystem {
    SetSystem::parse(players, keys).expect("reference systems are well formed")
}

fn type_id_of(cat: &Catalogue, s: &SetSystem) -> Option<String> {
    cat.entries.iter().find(|e| e.mbs.system == *s).map(|e| e.type_id.clone())
}

/// Type table of the balanced catalogue against the known listing.
pub fn type_tables(n: usize) -> Result<SuiteReport, VerifyError> {
    let known = known_types(n).ok_or(VerifyError::NoReference(n))?;
    let players = Players::letters(n).expect("reference player counts are valid");
    let cat = generate(&players, ConeKind::Balanced)?;
    let mut items = vec![
        CheckItem::new("systems", known.iter().map(|t| t.count).sum::<usize>(), cat.entries.len()),
        CheckItem::new("types", known.len(), cat.types.len()),
        CheckItem::new(
            "irreducible systems",
            known.iter().filter(|t| t.irreducible).map(|t| t.count).sum::<usize>(),
            cat.entries.iter().filter(|e| e.irreducible).count(),
        ),
    ];
    for (i, t) in known.iter().enumerate() {
        let label = format!("type {} {}", i + 1, players.system_label(&system(&players, t.system)));
        let rep = system(&players, t.system);
        let Some(entry) = cat.entries.iter().find(|e| e.mbs.system == rep) else {
            items.push(CheckItem::new(label, "present", "missing"));
            continue;
        };
        let record = cat.type_of(&entry.type_id).expect("entry types are tabulated");
        items.push(CheckItem::new(format!("{label} count"), t.count, record.count));
        items.push(CheckItem::new(format!("{label} irreducible"), t.irreducible, entry.irreducible));
        items.push(CheckItem::new(format!("{label} inequality"), t.inequality, entry.alpha.render(&players)));
        let linked = type_id_of(&cat, &system(&players, known[t.link - 1].system));
        items.push(CheckItem::new(
            format!("{label} complement"),
            linked.unwrap_or_else(|| "missing".into()),
            entry.complement_type_id.clone().unwrap_or_default(),
        ));
    }
    Ok(SuiteReport { suite: format!("type tables n={n}"), items })
}

/// The four-player exact-cone types with their multiplicities and conjugate pairing.
pub fn exact_four_player_types() -> Result<SuiteReport, VerifyError> {
    let players = Players::letters(4).expect("four players");
    let cat = generate(&players, ConeKind::ExactConjecture)?;
    let mut items = vec![CheckItem::new("types", FOUR_PLAYER_EXACT_TYPES.len(), cat.types.len())];
    let alphas: Vec<InequalityVector> = FOUR_PLAYER_EXACT_TYPES
        .iter()
        .map(|(text, ..)| InequalityVector::parse(&players, text).expect("reference inequalities parse"))
        .collect();
    let type_of_alpha =
        |alpha: &InequalityVector| cat.entries.iter().find(|e| e.alpha == *alpha).map(|e| e.type_id.clone());
    for (i, ((text, count, induced, conj), alpha)) in FOUR_PLAYER_EXACT_TYPES.iter().zip(&alphas).enumerate() {
        let label = format!("type {} {text}", i + 1);
        let Some(id) = type_of_alpha(alpha) else {
            items.push(CheckItem::new(label, "present", "missing"));
            continue;
        };
        let record = cat.type_of(&id).expect("entry types are tabulated");
        items.push(CheckItem::new(format!("{label} count"), count, record.count));
        items.push(CheckItem::new(
            format!("{label} induced system"),
            players.system_label(&system(&players, induced)),
            players.system_label(&alpha.induced_system()),
        ));
        let partner = type_of_alpha(&alphas[conj - 1]).unwrap_or_else(|| "missing".into());
        items.push(CheckItem::new(format!("{label} conjugate"), partner, record.link.clone().unwrap_or_default()));
    }
    Ok(SuiteReport { suite: "exact types n=4".into(), items })
}

/// Exactness against total balancedness of the game and its anti-dual on
/// seeded random games.
pub fn conjecture(n: usize, samples: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let players = Players::letters(n).map_err(|_| VerifyError::NoReference(n))?;
    let mut rng = sample::rng(seed);
    let mut items = Vec::new();
    let mut exact_games = 0;
    let mut violations = 0;
    for i in 0..samples {
        let m = sample::mixed_game(&mut rng, &players);
        let exact = is_exact(&m);
        let tb = is_totally_balanced_lp(&m);
        let tb_dual = is_totally_balanced_lp(&m.anti_dual());
        let certified = exact.verify(&m) && tb.verify(&m) && tb_dual.verify(&m.anti_dual());
        let both = tb.member && tb_dual.member;
        exact_games += usize::from(exact.member);
        if exact.member != both || !certified {
            violations += 1;
            items.push(CheckItem::new(
                format!("sample {i}: {m}"),
                format!("exact={exact} certified=true", exact = both),
                format!("exact={} certified={certified}", exact.member),
            ));
        }
    }
    items.insert(0, CheckItem::new(format!("violations among {samples} games ({exact_games} exact)"), 0, violations));
    Ok(SuiteReport { suite: format!("conjecture n={n} seed={seed}"), items })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for n in 2..=4 {
            let r = type_tables(n).unwrap();
            assert!(r.passed(), "{:#?}", r.items.iter().filter(|i| !i.passed).collect::<Vec<_>>());
        }
        for n in 2..=4 {
            assert!(facet_counts(n).unwrap().passed());
        }
        let r = exact_four_player_types().unwrap();
        assert!(r.passed(), "{:#?}", r.items.iter().filter(|i| !i.passed).collect::<Vec<_>>());
    }

    #[test]
    fn conjecture_probe_is_clean_on_three_players() {
        let r = conjecture(3, 40, 0).unwrap();
        assert!(r.passed(), "{:#?}", r.items);
    }

    #[test]
    fn missing_reference() {
        assert_eq!(type_tables(5), Err(VerifyError::NoReference(5)));
        assert_eq!(facet_counts(6), Err(VerifyError::NoReference(6)));
    }
}
