//! `balcone`: enumerate min-balanced systems, build facet catalogues, and
//! decide cone membership of games.
//!
//! Exit codes: 0 success or affirmative verdict, 1 negative verdict or failed
//! verification, 2 usage or input error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use balcone::balance::{canonical_type, enumerate_min_balanced, is_min_balanced, MinBalancedSystem};
use balcone::catalogue::{self, ConeKind};
use balcone::cones::{is_balanced, is_exact, is_totally_balanced_lp};
use balcone::irreducible::is_reducible;
use balcone::model::{Game, Players, SetFunction, SetSystem};
use balcone::verify::{self, SuiteReport};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "balcone", version, about = "Facets of the balanced, totally balanced and exact game cones")]
struct Cli {
    /// Worker threads for parallel generation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List min-balanced systems.
    Enumerate {
        #[arg(long)]
        players: usize,
        /// Carrier size; every carrier of this size is listed (default: all players).
        #[arg(long)]
        carrier_size: Option<usize>,
        #[arg(long)]
        irreducible_only: bool,
        /// One line per permutational type instead of one per system.
        #[arg(long)]
        types_only: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate a facet catalogue.
    Catalogue {
        #[arg(long)]
        players: usize,
        #[arg(long, value_enum)]
        cone: CatalogueCone,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide membership of a game read from a JSON file.
    Check {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum)]
        cone: CheckCone,
        /// Print the certificate.
        #[arg(long)]
        certificate: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a reference suite and report each item.
    Verify {
        #[arg(long)]
        players: usize,
        #[arg(long, value_enum)]
        suite: Suite,
        /// Random games for the conjecture suite.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// ChaCha8 seed for the conjecture suite.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogueCone {
    Balanced,
    TotallyBalanced,
    ExactConjecture,
}

impl From<CatalogueCone> for ConeKind {
    fn from(c: CatalogueCone) -> Self {
        match c {
            CatalogueCone::Balanced => ConeKind::Balanced,
            CatalogueCone::TotallyBalanced => ConeKind::TotallyBalanced,
            CatalogueCone::ExactConjecture => ConeKind::ExactConjecture,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckCone {
    Balanced,
    TotallyBalanced,
    Exact,
}

impl CheckCone {
    fn name(self) -> &'static str {
        match self {
            CheckCone::Balanced => "balanced",
            CheckCone::TotallyBalanced => "totally_balanced",
            CheckCone::Exact => "exact",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Table1,
    Appendix,
    Conjecture,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Enumerate { players, carrier_size, irreducible_only, types_only, format } => {
            let p = letters(players)?;
            let size = carrier_size.unwrap_or(players);
            if !(2..=players).contains(&size) {
                return Err(format!("carrier size must be between 2 and {players}"));
            }
            let listed = enumerate(&p, size, irreducible_only)?;
            let out = match (types_only, format) {
                (false, Format::Text) => systems_text(&p, &listed),
                (false, Format::Json) => json_line(&json!({
                    "players": p.names(),
                    "carrier_size": size,
                    "systems": listed.iter().map(|(m, irr)| system_json(&p, m, *irr)).collect::<Vec<_>>(),
                })),
                (true, Format::Text) => types_text(&p, &listed),
                (true, Format::Json) => json_line(&json!({
                    "players": p.names(),
                    "carrier_size": size,
                    "types": types(&p, &listed).iter().map(|t| json!({
                        "representative": keys(&p, &t.mbs.system),
                        "count": t.count,
                        "orbit_size": t.orbit_size,
                        "k": t.mbs.k,
                        "irreducible": t.irreducible,
                        "inequality": t.mbs.alpha.render(&p),
                    })).collect::<Vec<_>>(),
                })),
            };
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalogue { players, cone, format, out } => {
            let p = letters(players)?;
            let cat = catalogue::generate(&p, cone.into()).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Json => catalogue::to_json(&cat),
                Format::Text => catalogue::to_text(&cat),
            };
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { game, cone, certificate, format } => {
            let raw = fs::read_to_string(&game).map_err(|e| format!("cannot read {}: {e}", game.display()))?;
            let f = SetFunction::from_json(&raw).map_err(|e| format!("{}: {e}", game.display()))?;
            let m = match Game::new(f.clone()) {
                Ok(m) => m,
                Err(_) => {
                    eprintln!("note: value at the empty coalition is nonzero; checking the shifted game m - m(∅)");
                    f.shift()
                }
            };
            let verdict = match cone {
                CheckCone::Balanced => is_balanced(&m),
                CheckCone::TotallyBalanced => is_totally_balanced_lp(&m),
                CheckCone::Exact => is_exact(&m),
            };
            if !verdict.verify(&m) {
                return Err("internal error: certificate failed verification".into());
            }
            let p = m.players();
            match format {
                Format::Text => {
                    println!("{}: {}", cone.name(), if verdict.member { "yes" } else { "no" });
                    if certificate {
                        println!("{}", verdict.certificate.render(p));
                    }
                }
                Format::Json => {
                    let mut v = json!({ "cone": cone.name(), "member": verdict.member });
                    if certificate {
                        v["certificate"] = verdict.certificate.to_json(p);
                    }
                    print!("{}", json_line(&v));
                }
            }
            Ok(if verdict.member { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify { players, suite, samples, seed } => {
            let reports: Vec<SuiteReport> = match suite {
                Suite::Table1 => vec![verify::facet_counts(players).map_err(|e| e.to_string())?],
                Suite::Appendix => vec![verify::type_tables(players).map_err(|e| e.to_string())?],
                Suite::Conjecture => vec![verify::conjecture(players, samples, seed).map_err(|e| e.to_string())?],
            };
            let mut all = true;
            for r in &reports {
                println!("suite {}", r.suite);
                for item in &r.items {
                    println!("{item}");
                }
                let failed = r.items.iter().filter(|i| !i.passed).count();
                println!("{} of {} items passed", r.items.len() - failed, r.items.len());
                all &= r.passed();
            }
            Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn letters(n: usize) -> Result<Players, String> {
    Players::letters(n).map_err(|e| e.to_string())
}

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn keys(p: &Players, s: &SetSystem) -> Vec<String> {
    s.members().iter().map(|&c| p.key(c)).collect()
}

/// Systems on every carrier of the given size, carriers in bitmask order.
fn enumerate(p: &Players, size: usize, irreducible_only: bool) -> Result<Vec<(MinBalancedSystem, bool)>, String> {
    let mut out = Vec::new();
    for carrier in p.coalitions().filter(|c| c.len() == size) {
        for mbs in enumerate_min_balanced(p, carrier, true).map_err(|e| e.to_string())? {
            let irreducible = is_reducible(&mbs, p.len()).map_err(|e| e.to_string())?.is_none();
            if irreducible || !irreducible_only {
                out.push((mbs, irreducible));
            }
        }
    }
    Ok(out)
}

fn system_json(p: &Players, m: &MinBalancedSystem, irreducible: bool) -> Value {
    let weights: serde_json::Map<String, Value> =
        m.weights.entries().iter().map(|(c, w)| (p.key(*c), json!(w.to_string()))).collect();
    let alpha: serde_json::Map<String, Value> = m.alpha.iter().map(|(c, a)| (p.key(c), json!(a))).collect();
    json!({
        "system": keys(p, &m.system),
        "carrier": p.key(m.carrier),
        "weights": weights,
        "k": m.k,
        "alpha": alpha,
        "irreducible": irreducible,
        "inequality": m.alpha.render(p),
    })
}

fn systems_text(p: &Players, listed: &[(MinBalancedSystem, bool)]) -> String {
    let mut out = String::new();
    writeln!(out, "systems {}", listed.len()).unwrap();
    for (i, (m, irreducible)) in listed.iter().enumerate() {
        let weights: Vec<String> = m.weights.entries().iter().map(|(c, w)| format!("{}:{w}", p.key(*c))).collect();
        let mut fields =
            vec![format!("[{}] {}", i + 1, p.system_label(&m.system)), format!("k {}", m.k), weights.join(" ")];
        if *irreducible {
            fields.push("irreducible".into());
        }
        writeln!(out, "{}", fields.join("  ")).unwrap();
        writeln!(out, "    {}", m.alpha.render(p)).unwrap();
    }
    out
}

struct TypeSummary {
    mbs: MinBalancedSystem,
    count: usize,
    orbit_size: usize,
    irreducible: bool,
}

/// Types ordered by scaling factor, then canonical representative.
fn types(p: &Players, listed: &[(MinBalancedSystem, bool)]) -> Vec<TypeSummary> {
    let mut by_type: BTreeMap<SetSystem, (usize, usize, bool)> = BTreeMap::new();
    for (m, irreducible) in listed {
        let (canonical, orbit_size) = canonical_type(&m.system, p);
        by_type.entry(canonical).or_insert((0, orbit_size, *irreducible)).0 += 1;
    }
    let mut out: Vec<TypeSummary> = by_type
        .into_iter()
        .map(|(canonical, (count, orbit_size, irreducible))| TypeSummary {
            mbs: is_min_balanced(&canonical, p)
                .ok()
                .flatten()
                .expect("images of min-balanced systems are min-balanced"),
            count,
            orbit_size,
            irreducible,
        })
        .collect();
    out.sort_by(|a, b| a.mbs.k.cmp(&b.mbs.k).then_with(|| a.mbs.system.cmp(&b.mbs.system)));
    out
}

fn types_text(p: &Players, listed: &[(MinBalancedSystem, bool)]) -> String {
    let summary = types(p, listed);
    let mut out = String::new();
    writeln!(out, "systems {}", listed.len()).unwrap();
    writeln!(out, "types {}", summary.len()).unwrap();
    for (i, t) in summary.iter().enumerate() {
        let mut fields = vec![
            format!("[{}] {}", i + 1, p.system_label(&t.mbs.system)),
            format!("{}×", t.count),
            format!("k {}", t.mbs.k),
        ];
        if t.irreducible {
            fields.push("irreducible".into());
        }
        writeln!(out, "{}", fields.join("  ")).unwrap();
        writeln!(out, "    {}", t.mbs.alpha.render(p)).unwrap();
    }
    out
}
