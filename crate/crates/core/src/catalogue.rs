//! Facet catalogues of the balanced, totally balanced and conjectured exact
//! cones, with permutational types and two interchange formats.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::Rat;
use crate::balance::{
    complement_system, enumerate_min_balanced, is_min_balanced, orbit, permutations, BalanceError, InequalityVector,
    MinBalancedSystem,
};
use crate::irreducible::is_reducible;
use crate::model::{parse_rat, Coalition, Players, SetSystem, MAX_ENUMERATION_PLAYERS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogueError {
    #[error("catalogues need 2 to {max} players, got {0}", max = MAX_ENUMERATION_PLAYERS)]
    PlayerCount(usize),
    #[error("the exact-cone catalogue needs at least 3 players")]
    ExactNeedsThree,
    #[error("two entries share the coefficient vector {0}")]
    Collision(String),
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
    #[error(transparent)]
    Balance(#[from] BalanceError),
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> CatalogueError {
    CatalogueError::Parse { location: location.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeKind {
    Balanced,
    TotallyBalanced,
    ExactConjecture,
}

impl ConeKind {
    pub const ALL: [ConeKind; 3] = [ConeKind::Balanced, ConeKind::TotallyBalanced, ConeKind::ExactConjecture];

    pub fn name(self) -> &'static str {
        match self {
            ConeKind::Balanced => "balanced",
            ConeKind::TotallyBalanced => "totally_balanced",
            ConeKind::ExactConjecture => "exact_conjecture",
        }
    }

    /// Accepts both `_` and `-` as separators.
    pub fn parse(s: &str) -> Option<ConeKind> {
        match s.replace('-', "_").as_str() {
            "balanced" => Some(ConeKind::Balanced),
            "totally_balanced" => Some(ConeKind::TotallyBalanced),
            "exact_conjecture" => Some(ConeKind::ExactConjecture),
            _ => None,
        }
    }

    pub fn is_conjectural(self) -> bool {
        self == ConeKind::ExactConjecture
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogueEntry {
    pub mbs: MinBalancedSystem,
    /// The entry's inequality: `mbs.alpha`, or its reflection when `conjugated`.
    pub alpha: InequalityVector,
    pub irreducible: bool,
    pub conjugated: bool,
    pub type_id: String,
    pub orbit_size: usize,
    pub complement_type_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRecord {
    pub type_id: String,
    pub representative: SetSystem,
    pub conjugated: bool,
    pub count: usize,
    pub orbit_size: usize,
    pub k: u64,
    pub irreducible: bool,
    /// Complementary type (balanced catalogues) or conjugate type (exact).
    pub link: Option<String>,
    pub alpha: InequalityVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalogue {
    pub players: Players,
    pub cone: ConeKind,
    pub entries: Vec<CatalogueEntry>,
    pub types: Vec<TypeRecord>,
}

impl Catalogue {
    pub fn facets(&self) -> Arc<[InequalityVector]> {
        self.entries.iter().map(|e| e.alpha.clone()).collect()
    }

    pub fn systems(&self) -> Vec<MinBalancedSystem> {
        self.entries.iter().map(|e| e.mbs.clone()).collect()
    }

    pub fn type_of(&self, type_id: &str) -> Option<&TypeRecord> {
        self.types.iter().find(|t| t.type_id == type_id)
    }
}

/// Raw entry before classification.
struct Draft {
    mbs: MinBalancedSystem,
    irreducible: bool,
    conjugated: bool,
}

fn check_players(players: &Players, cone: ConeKind) -> Result<(), CatalogueError> {
    let n = players.len();
    if !(2..=MAX_ENUMERATION_PLAYERS).contains(&n) {
        return Err(CatalogueError::PlayerCount(n));
    }
    if cone == ConeKind::ExactConjecture && n < 3 {
        return Err(CatalogueError::ExactNeedsThree);
    }
    Ok(())
}

fn carriers(players: &Players, cone: ConeKind) -> Vec<Coalition> {
    let full = players.grand();
    match cone {
        ConeKind::Balanced => vec![full],
        ConeKind::TotallyBalanced => players.coalitions().filter(|c| c.len() >= 2).collect(),
        ConeKind::ExactConjecture => players.coalitions().filter(|c| c.len() >= 2 && *c != full).collect(),
    }
}

pub fn generate(players: &Players, cone: ConeKind) -> Result<Catalogue, CatalogueError> {
    check_players(players, cone)?;
    let n = players.len();
    let per_carrier: Vec<Vec<Draft>> = carriers(players, cone)
        .into_par_iter()
        .map(|m| -> Result<Vec<Draft>, CatalogueError> {
            let systems = enumerate_min_balanced(players, m, true)?;
            Ok(systems
                .into_par_iter()
                .map(|mbs| {
                    let irreducible = is_reducible(&mbs, n).expect("non-trivial").is_none();
                    Draft { mbs, irreducible, conjugated: false }
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    let mut drafts: Vec<Draft> = per_carrier.into_iter().flatten().collect();
    if cone != ConeKind::Balanced {
        drafts.retain(|d| d.irreducible);
    }
    if cone == ConeKind::ExactConjecture {
        let conjugates: Vec<Draft> =
            drafts.iter().map(|d| Draft { mbs: d.mbs.clone(), irreducible: true, conjugated: true }).collect();
        drafts.extend(conjugates);
    }
    assemble(players, cone, drafts)
}

fn entry_key(d: &Draft) -> (u32, SetSystem, bool) {
    (d.mbs.carrier.0, d.mbs.system.clone(), d.conjugated)
}

fn assemble(players: &Players, cone: ConeKind, mut drafts: Vec<Draft>) -> Result<Catalogue, CatalogueError> {
    drafts.sort_by_key(entry_key);
    let mut seen = BTreeMap::new();
    for d in &drafts {
        let alpha = if d.conjugated { d.mbs.alpha.conjugate() } else { d.mbs.alpha.clone() };
        if seen.insert(alpha.clone(), ()).is_some() {
            return Err(CatalogueError::Collision(alpha.render(players)));
        }
    }
    let (entries, types) = classify(players, cone, drafts);
    Ok(Catalogue { players: players.clone(), cone, entries, types })
}

/// Caches canonical forms and orbit sizes; filling a whole orbit at once
/// keeps classification near linear in the number of systems.
struct TypeCache {
    perms: Vec<Vec<usize>>,
    known: HashMap<SetSystem, (SetSystem, usize)>,
}

impl TypeCache {
    fn new(n: usize) -> Self {
        Self { perms: permutations(n), known: HashMap::new() }
    }

    fn canonical(&mut self, system: &SetSystem) -> (SetSystem, usize) {
        if let Some(hit) = self.known.get(system) {
            return hit.clone();
        }
        let images = orbit(system, &self.perms);
        let result = (images[0].clone(), images.len());
        for image in images {
            self.known.insert(image, result.clone());
        }
        result
    }
}

fn type_id(players: &Players, canonical: &SetSystem, conjugated: bool) -> String {
    let base = players.system_label(canonical);
    if conjugated {
        format!("{base}*")
    } else {
        base
    }
}

fn toggle_conjugate(id: &str) -> String {
    match id.strip_suffix('*') {
        Some(base) => base.to_string(),
        None => format!("{id}*"),
    }
}

fn classify(players: &Players, cone: ConeKind, drafts: Vec<Draft>) -> (Vec<CatalogueEntry>, Vec<TypeRecord>) {
    let mut cache = TypeCache::new(players.len());
    let mut entries = Vec::with_capacity(drafts.len());
    for d in drafts {
        let (canonical, orbit_size) = cache.canonical(&d.mbs.system);
        let id = type_id(players, &canonical, d.conjugated);
        let link = match cone {
            ConeKind::Balanced => {
                let comp = complement_system(&d.mbs.system, players).expect("carrier is not a member");
                let (comp_canonical, _) = cache.canonical(&comp);
                Some(type_id(players, &comp_canonical, false))
            }
            ConeKind::ExactConjecture => Some(toggle_conjugate(&id)),
            ConeKind::TotallyBalanced => None,
        };
        let alpha = if d.conjugated { d.mbs.alpha.conjugate() } else { d.mbs.alpha.clone() };
        entries.push(CatalogueEntry {
            mbs: d.mbs,
            alpha,
            irreducible: d.irreducible,
            conjugated: d.conjugated,
            type_id: id,
            orbit_size,
            complement_type_id: link,
        });
    }
    let types = type_table(players, &entries, &mut cache);
    (entries, types)
}

fn type_table(players: &Players, entries: &[CatalogueEntry], cache: &mut TypeCache) -> Vec<TypeRecord> {
    let mut by_id: IndexMap<String, TypeRecord> = IndexMap::new();
    for e in entries {
        by_id.entry(e.type_id.clone()).and_modify(|t| t.count += 1).or_insert_with(|| {
            let (canonical, _) = cache.canonical(&e.mbs.system);
            let rep = is_min_balanced(&canonical, players)
                .expect("nonempty")
                .expect("images of min-balanced systems are min-balanced");
            let alpha = if e.conjugated { rep.alpha.conjugate() } else { rep.alpha.clone() };
            TypeRecord {
                type_id: e.type_id.clone(),
                representative: canonical,
                conjugated: e.conjugated,
                count: 1,
                orbit_size: e.orbit_size,
                k: rep.k,
                irreducible: e.irreducible,
                link: e.complement_type_id.clone(),
                alpha,
            }
        });
    }
    let mut types: Vec<TypeRecord> = by_id.into_values().collect();
    types.sort_by(|a, b| {
        (a.conjugated, a.representative.carrier().len(), a.k, &a.representative).cmp(&(
            b.conjugated,
            b.representative.carrier().len(),
            b.k,
            &b.representative,
        ))
    });
    types
}

// JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogueFile {
    players: Vec<String>,
    cone: String,
    conjecture: bool,
    entries: Vec<EntryFile>,
    types: Vec<TypeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    system: Vec<Vec<String>>,
    carrier: Vec<String>,
    weights: IndexMap<String, String>,
    k: u64,
    alpha: IndexMap<String, i64>,
    irreducible: bool,
    conjugated: bool,
    type_id: String,
    orbit_size: usize,
    complement_type_id: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeFile {
    type_id: String,
    representative: Vec<Vec<String>>,
    count: usize,
    orbit_size: usize,
    k: u64,
    irreducible: bool,
    conjugated: bool,
    link: Option<String>,
    inequality: String,
}

fn alpha_map(players: &Players, alpha: &InequalityVector) -> IndexMap<String, i64> {
    let mut terms: Vec<(Coalition, i64)> = alpha.iter().collect();
    terms.sort_by(|a, b| a.0.size_lex_cmp(b.0));
    terms.into_iter().map(|(c, a)| (players.key(c), a)).collect()
}

fn system_names(players: &Players, system: &SetSystem) -> Vec<Vec<String>> {
    system.members().iter().map(|&c| players.name_list(c)).collect()
}

pub fn to_json(cat: &Catalogue) -> String {
    let p = &cat.players;
    let file = CatalogueFile {
        players: p.names().to_vec(),
        cone: cat.cone.name().to_string(),
        conjecture: cat.cone.is_conjectural(),
        entries: cat
            .entries
            .iter()
            .map(|e| EntryFile {
                system: system_names(p, &e.mbs.system),
                carrier: p.name_list(e.mbs.carrier),
                weights: e.mbs.weights.entries().iter().map(|(c, w)| (p.key(*c), w.to_string())).collect(),
                k: e.mbs.k,
                alpha: alpha_map(p, &e.alpha),
                irreducible: e.irreducible,
                conjugated: e.conjugated,
                type_id: e.type_id.clone(),
                orbit_size: e.orbit_size,
                complement_type_id: e.complement_type_id.clone(),
            })
            .collect(),
        types: cat
            .types
            .iter()
            .map(|t| TypeFile {
                type_id: t.type_id.clone(),
                representative: system_names(p, &t.representative),
                count: t.count,
                orbit_size: t.orbit_size,
                k: t.k,
                irreducible: t.irreducible,
                conjugated: t.conjugated,
                link: t.link.clone(),
                inequality: t.alpha.render(p),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("catalogue serializes");
    out.push('\n');
    out
}

/// Rebuilds one entry from its system and flags, checking that it belongs in
/// a catalogue of the given kind.
fn rebuild_entry(
    players: &Players,
    cone: ConeKind,
    system: SetSystem,
    conjugated: bool,
    location: &str,
) -> Result<Draft, CatalogueError> {
    let mbs = is_min_balanced(&system, players)
        .map_err(|e| parse_error(location, e.to_string()))?
        .filter(|m| !m.is_trivial())
        .ok_or_else(|| parse_error(location, "system is not a non-trivial min-balanced system"))?;
    let irreducible = is_reducible(&mbs, players.len()).expect("non-trivial").is_none();
    let full = players.grand();
    let admissible = match cone {
        ConeKind::Balanced => mbs.carrier == full && !conjugated,
        ConeKind::TotallyBalanced => irreducible && !conjugated,
        ConeKind::ExactConjecture => irreducible && mbs.carrier != full,
    };
    if !admissible {
        return Err(parse_error(location, format!("system does not belong to a {} catalogue", cone.name())));
    }
    Ok(Draft { mbs, irreducible, conjugated })
}

fn parse_system(players: &Players, lists: &[Vec<String>], location: &str) -> Result<SetSystem, CatalogueError> {
    let members = lists
        .iter()
        .map(|names| players.from_names(names))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_error(location, e.to_string()))?;
    SetSystem::new(members).map_err(|e| parse_error(location, e.to_string()))
}

fn parse_alpha(
    players: &Players,
    map: &IndexMap<String, i64>,
    location: &str,
) -> Result<InequalityVector, CatalogueError> {
    let mut alpha = InequalityVector::zero(players.len());
    for (key, &a) in map {
        let c = players.parse_key(key).map_err(|e| parse_error(location, e.to_string()))?;
        if alpha.get(c) != 0 || a == 0 {
            return Err(parse_error(location, format!("bad coefficient for {key:?}")));
        }
        alpha.add(c, a);
    }
    Ok(alpha)
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(
    location: &str,
    what: &str,
    found: T,
    expected: T,
) -> Result<(), CatalogueError> {
    if found == expected {
        Ok(())
    } else {
        Err(parse_error(location, format!("{what}: found {found:?}, expected {expected:?}")))
    }
}

fn check_alpha(
    location: &str,
    found: &InequalityVector,
    draft: &Draft,
    players: &Players,
) -> Result<(), CatalogueError> {
    if !found.is_o_standardized() {
        return Err(parse_error(location, "alpha is not o-standardized"));
    }
    let expected = if draft.conjugated { draft.mbs.alpha.conjugate() } else { draft.mbs.alpha.clone() };
    if *found != expected {
        return Err(parse_error(
            location,
            format!("alpha {} does not match {}", found.render(players), expected.render(players)),
        ));
    }
    Ok(())
}

/// Reassembles the catalogue and compares it with what the input claims.
fn finish(
    players: &Players,
    cone: ConeKind,
    drafts: Vec<Draft>,
    claimed_entries: Vec<(String, usize, Option<String>)>,
    claimed_types: Vec<(String, TypeRecord)>,
) -> Result<Catalogue, CatalogueError> {
    for w in drafts.windows(2) {
        if entry_key(&w[0]) >= entry_key(&w[1]) {
            return Err(parse_error("entries", "entries are not in canonical order"));
        }
    }
    let cat = assemble(players, cone, drafts)?;
    for (i, (e, (id, orbit_size, link))) in cat.entries.iter().zip(claimed_entries).enumerate() {
        let loc = format!("entry {}", i + 1);
        expect_eq(&loc, "type_id", id, e.type_id.clone())?;
        expect_eq(&loc, "orbit_size", orbit_size, e.orbit_size)?;
        expect_eq(&loc, "complement_type_id", link, e.complement_type_id.clone())?;
    }
    expect_eq("types", "number of types", claimed_types.len(), cat.types.len())?;
    for (t, (loc, claimed)) in cat.types.iter().zip(claimed_types) {
        expect_eq(&loc, "type record", &claimed, t)?;
    }
    Ok(cat)
}

pub fn from_json(text: &str) -> Result<Catalogue, CatalogueError> {
    let file: CatalogueFile = serde_json::from_str(text)
        .map_err(|e| parse_error(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    let players = Players::new(file.players.clone()).map_err(|e| parse_error("players", e.to_string()))?;
    let cone =
        ConeKind::parse(&file.cone).ok_or_else(|| parse_error("cone", format!("unknown cone {:?}", file.cone)))?;
    check_players(&players, cone)?;
    expect_eq("conjecture", "conjecture flag", file.conjecture, cone.is_conjectural())?;
    let mut drafts = Vec::new();
    let mut claimed = Vec::new();
    for (i, e) in file.entries.iter().enumerate() {
        let loc = format!("entry {}", i + 1);
        let system = parse_system(&players, &e.system, &loc)?;
        let draft = rebuild_entry(&players, cone, system, e.conjugated, &loc)?;
        expect_eq(&loc, "carrier", players.from_names(&e.carrier).ok(), Some(draft.mbs.carrier))?;
        let weights = e
            .weights
            .iter()
            .map(|(k, w)| Ok((players.parse_key(k)?, parse_rat(w)?)))
            .collect::<Result<Vec<(Coalition, Rat)>, crate::model::ModelError>>()
            .map_err(|err| parse_error(&loc, err.to_string()))?;
        expect_eq(&loc, "weights", weights.as_slice(), draft.mbs.weights.entries())?;
        expect_eq(&loc, "k", e.k, draft.mbs.k)?;
        check_alpha(&loc, &parse_alpha(&players, &e.alpha, &loc)?, &draft, &players)?;
        expect_eq(&loc, "irreducible", e.irreducible, draft.irreducible)?;
        drafts.push(draft);
        claimed.push((e.type_id.clone(), e.orbit_size, e.complement_type_id.clone()));
    }
    let mut types = Vec::new();
    for (i, t) in file.types.iter().enumerate() {
        let loc = format!("type {}", i + 1);
        let representative = parse_system(&players, &t.representative, &loc)?;
        let alpha = InequalityVector::parse(&players, &t.inequality).map_err(|e| parse_error(&loc, e))?;
        if !alpha.is_o_standardized() {
            return Err(parse_error(&loc, "alpha is not o-standardized"));
        }
        types.push((
            loc,
            TypeRecord {
                type_id: t.type_id.clone(),
                representative,
                conjugated: t.conjugated,
                count: t.count,
                orbit_size: t.orbit_size,
                k: t.k,
                irreducible: t.irreducible,
                link: t.link.clone(),
                alpha,
            },
        ));
    }
    finish(&players, cone, drafts, claimed, types)
}

// Text

fn link_annotation(cone: ConeKind, own: &str, link: &Option<String>) -> Option<String> {
    let link = link.as_ref()?;
    Some(match cone {
        ConeKind::Balanced if link == own => "self-complementary".to_string(),
        ConeKind::Balanced => format!("complementary {link}"),
        _ if link == own => "self-conjugate".to_string(),
        _ => format!("conjugate {link}"),
    })
}

pub fn to_text(cat: &Catalogue) -> String {
    let p = &cat.players;
    let names: Vec<&str> = p.names().iter().map(String::as_str).collect();
    let mut out = String::new();
    writeln!(out, "catalogue {}", cat.cone.name()).unwrap();
    writeln!(out, "players {}", names.join(" ")).unwrap();
    writeln!(out, "conjecture {}", cat.cone.is_conjectural()).unwrap();
    writeln!(out, "entries {}", cat.entries.len()).unwrap();
    writeln!(out, "types {}", cat.types.len()).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "## types").unwrap();
    for (i, t) in cat.types.iter().enumerate() {
        let mut fields = vec![format!("[{}] {}", i + 1, t.type_id), format!("{}×", t.count)];
        fields.extend(link_annotation(cat.cone, &t.type_id, &t.link));
        if t.irreducible {
            fields.push("irreducible".to_string());
        }
        writeln!(out, "{}", fields.join("  ")).unwrap();
        writeln!(out, "    {}", t.alpha.render(p)).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "## entries").unwrap();
    for (i, e) in cat.entries.iter().enumerate() {
        let mut fields = vec![format!("[{}] {}", i + 1, p.system_label(&e.mbs.system)), format!("type {}", e.type_id)];
        if e.conjugated {
            fields.push("conjugated".to_string());
        }
        if e.irreducible {
            fields.push("irreducible".to_string());
        }
        writeln!(out, "{}", fields.join("  ")).unwrap();
        writeln!(out, "    {}", e.alpha.render(p)).unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next_nonblank(&mut self) -> Option<(String, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            if !line.trim().is_empty() {
                return Some((format!("line {}", i + 1), line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(String, &'a str), CatalogueError> {
        self.next_nonblank().ok_or_else(|| parse_error("end of input", format!("expected {what}")))
    }

    fn header(&mut self, key: &str) -> Result<(String, &'a str), CatalogueError> {
        let (loc, line) = self.expect(key)?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| parse_error(&loc, format!("expected \"{key} …\"")))?;
        Ok((loc, value.trim()))
    }
}

fn parse_label(players: &Players, label: &str, loc: &str) -> Result<SetSystem, CatalogueError> {
    let inner = label
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| parse_error(loc, format!("bad system {label:?}")))?;
    let keys: Vec<&str> = inner.split(", ").collect();
    SetSystem::parse(players, &keys).map_err(|e| parse_error(loc, e.to_string()))
}

/// Splits `[i] rest` and checks the index.
fn numbered<'a>(line: &'a str, index: usize, loc: &str) -> Result<Vec<&'a str>, CatalogueError> {
    let prefix = format!("[{index}] ");
    let rest = line.strip_prefix(&prefix).ok_or_else(|| parse_error(loc, format!("expected item {prefix:?}")))?;
    Ok(rest.split("  ").collect())
}

fn parse_count<T: std::str::FromStr>(value: &str, loc: &str) -> Result<T, CatalogueError> {
    value.parse().map_err(|_| parse_error(loc, format!("bad number {value:?}")))
}

pub fn from_text(text: &str) -> Result<Catalogue, CatalogueError> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable() };
    let (loc, cone_name) = lines.header("catalogue")?;
    let cone = ConeKind::parse(cone_name).ok_or_else(|| parse_error(&loc, format!("unknown cone {cone_name:?}")))?;
    let (loc, names) = lines.header("players")?;
    let players = Players::new(names.split_whitespace()).map_err(|e| parse_error(&loc, e.to_string()))?;
    check_players(&players, cone)?;
    let (loc, flag) = lines.header("conjecture")?;
    expect_eq(&loc, "conjecture flag", flag, if cone.is_conjectural() { "true" } else { "false" })?;
    let (loc, count) = lines.header("entries")?;
    let entry_count: usize = parse_count(count, &loc)?;
    let (loc, count) = lines.header("types")?;
    let type_count: usize = parse_count(count, &loc)?;

    let (loc, line) = lines.expect("## types")?;
    expect_eq(&loc, "section", line.trim(), "## types")?;
    let mut types = Vec::new();
    for i in 1..=type_count {
        let (loc, line) = lines.expect("a type")?;
        let fields = numbered(line, i, &loc)?;
        let type_id = fields[0].to_string();
        let conjugated = type_id.ends_with('*');
        let representative = parse_label(&players, type_id.trim_end_matches('*'), &loc)?;
        let count: usize = parse_count(
            fields.get(1).and_then(|f| f.strip_suffix('×')).ok_or_else(|| parse_error(&loc, "missing count"))?,
            &loc,
        )?;
        let mut link = None;
        let mut irreducible = false;
        for f in &fields[2..] {
            match *f {
                "irreducible" => irreducible = true,
                "self-complementary" | "self-conjugate" => link = Some(type_id.clone()),
                other => {
                    let target = other
                        .strip_prefix("complementary ")
                        .or_else(|| other.strip_prefix("conjugate "))
                        .ok_or_else(|| parse_error(&loc, format!("unknown annotation {other:?}")))?;
                    link = Some(target.to_string());
                }
            }
        }
        let (loc_ineq, ineq) = lines.expect("an inequality")?;
        let alpha = InequalityVector::parse(&players, ineq).map_err(|e| parse_error(&loc_ineq, e))?;
        if !alpha.is_o_standardized() {
            return Err(parse_error(&loc_ineq, "alpha is not o-standardized"));
        }
        let rep = is_min_balanced(&representative, &players)
            .map_err(|e| parse_error(&loc, e.to_string()))?
            .ok_or_else(|| parse_error(&loc, "representative is not min-balanced"))?;
        let (_, orbit_size) = crate::balance::canonical_type(&representative, &players);
        types.push((
            loc,
            TypeRecord { type_id, representative, conjugated, count, orbit_size, k: rep.k, irreducible, link, alpha },
        ));
    }

    let (loc, line) = lines.expect("## entries")?;
    expect_eq(&loc, "section", line.trim(), "## entries")?;
    let mut drafts = Vec::new();
    let mut claimed = Vec::new();
    for i in 1..=entry_count {
        let (loc, line) = lines.expect("an entry")?;
        let fields = numbered(line, i, &loc)?;
        let system = parse_label(&players, fields[0], &loc)?;
        let type_id = fields
            .get(1)
            .and_then(|f| f.strip_prefix("type "))
            .ok_or_else(|| parse_error(&loc, "missing type"))?
            .to_string();
        let conjugated = fields[2..].contains(&"conjugated");
        let irreducible = fields[2..].contains(&"irreducible");
        if let Some(bad) = fields[2..].iter().find(|f| !matches!(**f, "conjugated" | "irreducible")) {
            return Err(parse_error(&loc, format!("unknown flag {bad:?}")));
        }
        let draft = rebuild_entry(&players, cone, system, conjugated, &loc)?;
        expect_eq(&loc, "irreducible", irreducible, draft.irreducible)?;
        let (loc_ineq, ineq) = lines.expect("an inequality")?;
        let alpha = InequalityVector::parse(&players, ineq).map_err(|e| parse_error(&loc_ineq, e))?;
        check_alpha(&loc_ineq, &alpha, &draft, &players)?;
        // Orbit sizes and links are not printed per entry; they follow from the type.
        let record = types.iter().find(|(_, t)| t.type_id == type_id).map(|(_, t)| t);
        claimed.push((type_id.clone(), record.map_or(0, |t| t.orbit_size), record.and_then(|t| t.link.clone())));
        drafts.push(draft);
    }
    if let Some((loc, _)) = lines.next_nonblank() {
        return Err(parse_error(loc, "trailing content"));
    }
    expect_eq("entries", "number of entries", drafts.len(), entry_count)?;
    finish(&players, cone, drafts, claimed, types)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn players(n: usize) -> Players {
        Players::letters(n).unwrap()
    }

    #[test]
    fn small_catalogue_sizes() {
        let cases = [
            (2, ConeKind::Balanced, 1, 1),
            (3, ConeKind::Balanced, 5, 3),
            (4, ConeKind::Balanced, 41, 9),
            (3, ConeKind::ExactConjecture, 6, 2),
            (4, ConeKind::ExactConjecture, 44, 6),
            (4, ConeKind::TotallyBalanced, 40, 8),
        ];
        for (n, cone, entries, types) in cases {
            let cat = generate(&players(n), cone).unwrap();
            assert_eq!(cat.entries.len(), entries, "{n} {cone:?}");
            assert_eq!(cat.types.len(), types, "{n} {cone:?}");
            assert_eq!(cat.types.iter().map(|t| t.count).sum::<usize>(), entries);
        }
    }

    #[test]
    fn cap_errors() {
        assert_eq!(generate(&players(7), ConeKind::Balanced), Err(CatalogueError::PlayerCount(7)));
        assert_eq!(generate(&players(2), ConeKind::ExactConjecture), Err(CatalogueError::ExactNeedsThree));
    }

    #[test]
    fn self_complementary_types() {
        let cat = generate(&players(3), ConeKind::Balanced).unwrap();
        let t = cat.type_of("{a, bc}").unwrap();
        assert_eq!(t.link.as_deref(), Some("{a, bc}"));
        assert_eq!(t.count, 3);
        let cat = generate(&players(2), ConeKind::Balanced).unwrap();
        assert_eq!(cat.types[0].link.as_deref(), Some(cat.types[0].type_id.as_str()));
    }

    #[test]
    fn json_round_trip() {
        for cone in ConeKind::ALL {
            let cat = generate(&players(4), cone).unwrap();
            let json = to_json(&cat);
            assert_eq!(from_json(&json).unwrap(), cat);
        }
    }

    #[test]
    fn text_round_trip() {
        for (n, cone) in [
            (2, ConeKind::Balanced),
            (4, ConeKind::Balanced),
            (4, ConeKind::ExactConjecture),
            (4, ConeKind::TotallyBalanced),
        ] {
            let cat = generate(&players(n), cone).unwrap();
            let text = to_text(&cat);
            assert_eq!(from_text(&text).unwrap(), cat, "{text}");
        }
    }

    #[test]
    fn text_shows_the_pair_inequality() {
        let cat = generate(&players(3), ConeKind::Balanced).unwrap();
        assert!(to_text(&cat).contains("    2·m(abc) − m(ab) − m(ac) − m(bc) + m(∅) ≥ 0\n"));
    }

    #[test]
    fn non_standardized_alpha_is_rejected() {
        let cat = generate(&players(3), ConeKind::Balanced).unwrap();
        let json = to_json(&cat).replacen("\"\": 2", "\"\": 3", 1);
        let err = from_json(&json).unwrap_err();
        assert!(err.to_string().contains("o-standardized"), "{err}");

        let text = to_text(&cat).replacen("+ 2·m(∅)", "+ 3·m(∅)", 1);
        let err = from_text(&text).unwrap_err();
        assert!(err.to_string().contains("o-standardized"), "{err}");
        assert!(err.to_string().starts_with("line "), "{err}");
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = from_json("{\"players\": [\"a\", \"b\"],\n  \"cone\": 3}").unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
    }
}
