//! Command-line front end. Every subcommand prints exact output (dyadic
//! strings, symbolic distance bounds) and reports through its exit code:
//! 0 success, 1 verification failure, 2 usage or parse error, 3 cap exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{
    construct_witnesses_multi, girth_marking_with_caps, verify_fact, Caps, ConstructionError, GirthMode,
    WitnessTuple,
};
use crate::dyadic::Dyadic;
use crate::limits::{verify_limit_convergence, FamilyKind, MarkingFamily, RelatorRanges};
use crate::metric::{certify_girth_with, marked_distance_bound, TrivialityOracle};
use crate::normalform::{homeo_to_normalform, word_to_normalform};
use crate::plhomeo::PLMap;
use crate::words::{Marking, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NRange {
    pub lo: u64,
    pub hi: u64,
}

fn parse_range(s: &str) -> Result<NRange, String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: u64 = lo.trim().parse().map_err(|_| format!("bad lower bound in `{s}`"))?;
    let hi: u64 = hi.trim().parse().map_err(|_| format!("bad upper bound in `{s}`"))?;
    if lo == 0 || lo > hi {
        return Err(format!("empty or invalid range `{s}` (need 1 <= LO <= HI)"));
    }
    Ok(NRange { lo, hi })
}

fn parse_signed_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound in `{s}`"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound in `{s}`"))?;
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Parser)]
#[command(name = "thompson", version, about = "Exact computations in Thompson's group F")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for parallel searches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest total breakpoint count a construction may produce.
    #[arg(long = "cap-breakpoints", global = true, default_value_t = 5_000_000)]
    cap_breakpoints: usize,
    /// Largest word set a construction may use.
    #[arg(long = "cap-words", global = true, default_value_t = 200_000)]
    cap_words: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generators and markings.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Evaluate a word under a marking.
    Eval {
        /// Marking file (JSON array of maps), `-` for stdin, or `x:0,1,3`; defaults to {x_0, x_1}.
        #[arg(long)]
        marking: Option<String>,
        #[arg(long)]
        word: String,
    },
    /// Normal form of a word over a, b or of a map.
    Nf {
        #[arg(long, conflicts_with = "map", required_unless_present = "map")]
        word: Option<String>,
        /// Map file (JSON with a `breakpoints` field).
        #[arg(long)]
        map: Option<String>,
    },
    /// Support of a map, or of a word under a marking.
    Support {
        #[arg(long, conflicts_with_all = ["marking", "word"], required_unless_present = "word")]
        map: Option<String>,
        #[arg(long)]
        marking: Option<String>,
        #[arg(long)]
        word: Option<String>,
    },
    /// Shortest relator search.
    Girth {
        #[arg(long)]
        marking: Option<String>,
        #[arg(long, default_value_t = 10)]
        max: usize,
        /// Fail (exit 1) unless every relator has length at least this.
        #[arg(long = "at-least")]
        at_least: Option<usize>,
    },
    /// Witness tuples and large-girth generating sets.
    Construct {
        #[arg(long, requires = "m", conflicts_with = "words")]
        l: Option<usize>,
        #[arg(long, requires = "l")]
        m: Option<usize>,
        #[arg(long, default_value = "targeted")]
        mode: GirthMode,
        /// Words separated by `;` (witness mode).
        #[arg(long, required_unless_present = "l")]
        words: Option<String>,
        #[arg(long, default_value = "1/64")]
        eps: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Certify the girth bound by exhaustive search (girth mode).
        #[arg(long)]
        certify: bool,
    },
    /// Limit-relator and relation-ball scan along a marking family.
    Converge {
        #[arg(long)]
        family: String,
        #[arg(long = "R")]
        radius: usize,
        #[arg(long, value_parser = parse_range)]
        n: NRange,
        #[arg(long, value_parser = parse_signed_range)]
        i: Option<(i64, i64)>,
        #[arg(long, value_parser = parse_signed_range)]
        j: Option<(i64, i64)>,
        #[arg(long, value_parser = parse_signed_range)]
        k: Option<(i64, i64)>,
    },
    /// Marked-group distance bound between two markings, or along a family.
    Distance {
        #[arg(long, requires = "other", conflicts_with = "family")]
        marking: Option<String>,
        #[arg(long)]
        other: Option<String>,
        #[arg(long, requires = "n", required_unless_present = "marking")]
        family: Option<String>,
        #[arg(long, value_parser = parse_range)]
        n: Option<NRange>,
        #[arg(long = "R", default_value_t = 6)]
        radius: usize,
    },
    /// Check that d -> x^m y^m kills no reduced word of length <= m.
    Fact {
        #[arg(long)]
        m: usize,
    },
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// The generator x_n.
    X { n: u64 },
    /// The marking (x_{n_1}, x_{n_2}, ...).
    Marking { indices: Vec<u64> },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Cap(String),
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::CapExceeded(msg) => CliError::Cap(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

struct Output {
    body: String,
    ok: bool,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, ok: true }
    }

    fn verdict(body: String, ok: bool) -> Self {
        Output { body, ok }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn read_source(src: &str) -> Result<String, CliError> {
    if src == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        Ok(s)
    } else {
        fs::read_to_string(PathBuf::from(src)).map_err(|e| CliError::Usage(format!("{src}: {e}")))
    }
}

/// A marking from a JSON file (a bare array or an object with a `marking`
/// field), stdin, or an inline `x:i,j,...` generator list.
fn load_marking(src: Option<&str>) -> Result<Marking, CliError> {
    let Some(src) = src else { return Ok(Marking::standard()) };
    if let Some(list) = src.strip_prefix("x:") {
        let idx: Vec<u64> = list.split(',').map(|s| s.trim().parse::<u64>()).collect::<Result<_, _>>().map_err(usage)?;
        return Ok(Marking::from_generators(&idx));
    }
    let value: Value = serde_json::from_str(&read_source(src)?).map_err(usage)?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("marking") => obj.remove("marking").expect("present"),
        v => v,
    };
    serde_json::from_value(value).map_err(usage)
}

/// A map from JSON with a `breakpoints` field, possibly nested under `map`.
fn load_map(src: &str) -> Result<PLMap, CliError> {
    let value: Value = serde_json::from_str(&read_source(src)?).map_err(usage)?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("map") => obj.remove("map").expect("present"),
        v => v,
    };
    serde_json::from_value(value).map_err(usage)
}

fn parse_word(s: &str) -> Result<Word, CliError> {
    s.parse::<Word>().map_err(usage)
}

fn map_text(f: &PLMap) -> String {
    let pts: Vec<String> = f.points().iter().map(|p| format!("({}, {})", p.x, p.y)).collect();
    pts.join(" ")
}

fn unsupported(format: Format, cmd: &str) -> CliError {
    CliError::Usage(format!("format {format:?} is not available for `{cmd}`").to_lowercase())
}

fn family_of(name: &str) -> Result<MarkingFamily, CliError> {
    Ok(MarkingFamily::canonical(name.parse::<FamilyKind>().map_err(usage)?))
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let format = cli.format;
    let caps = Caps { max_words: cli.cap_words, max_breakpoints: cli.cap_breakpoints };
    match &cli.command {
        Command::Gen(GenCommand::X { n }) => {
            let g = PLMap::generator(*n);
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "breakpoints": g.breakpoints(),
                    "support": g.support(),
                })))),
                Format::Text => Ok(Output::ok(format!("x{n}: {}\nsupport {}\n", map_text(&g), g.support()))),
                Format::Csv => Err(unsupported(format, "gen")),
            }
        }
        Command::Gen(GenCommand::Marking { indices }) => {
            if indices.is_empty() {
                return Err(CliError::Usage("gen marking needs at least one index".into()));
            }
            let m = Marking::from_generators(indices);
            match format {
                Format::Json => Ok(Output::ok(pretty(&m))),
                Format::Text => {
                    let mut s = String::new();
                    for (n, f) in indices.iter().zip(m.maps()) {
                        let _ = writeln!(s, "x{n}: {}", map_text(f));
                    }
                    Ok(Output::ok(s))
                }
                Format::Csv => Err(unsupported(format, "gen")),
            }
        }
        Command::Eval { marking, word } => {
            let m = load_marking(marking.as_deref())?;
            let w = parse_word(word)?;
            let f = m.evaluate(&w).map_err(usage)?;
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "word": w,
                    "is_identity": f.is_identity(),
                    "map": f,
                    "support": f.support(),
                })))),
                Format::Text => Ok(Output::ok(format!(
                    "{w}\nidentity: {}\nmap: {}\nsupport: {}\n",
                    f.is_identity(),
                    map_text(&f),
                    f.support()
                ))),
                Format::Csv => Err(unsupported(format, "eval")),
            }
        }
        Command::Nf { word, map } => {
            let (nf, source) = match (word, map) {
                (Some(w), _) => {
                    let w = parse_word(w)?;
                    (word_to_normalform(&w).map_err(usage)?, Value::String(w.to_string()))
                }
                (None, Some(path)) => {
                    let f = load_map(path)?;
                    (homeo_to_normalform(&f), serde_json::to_value(&f).expect("serializable"))
                }
                (None, None) => return Err(CliError::Usage("nf needs --word or --map".into())),
            };
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "input": source,
                    "normal_form": nf.to_string(),
                    "word": nf.to_word(),
                    "map": nf.to_homeo(),
                })))),
                Format::Text => Ok(Output::ok(format!("{nf}\n"))),
                Format::Csv => Err(unsupported(format, "nf")),
            }
        }
        Command::Support { map, marking, word } => {
            let f = match (map, word) {
                (Some(path), _) => load_map(path)?,
                (None, Some(w)) => load_marking(marking.as_deref())?.evaluate(&parse_word(w)?).map_err(usage)?,
                (None, None) => return Err(CliError::Usage("support needs --map or --word".into())),
            };
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({ "support": f.support() })))),
                Format::Text => Ok(Output::ok(format!("{}\n", f.support()))),
                Format::Csv => Err(unsupported(format, "support")),
            }
        }
        Command::Girth { marking, max, at_least } => {
            let m = load_marking(marking.as_deref())?;
            let cert = certify_girth_with(&TrivialityOracle::new(&m), *max);
            let ok = match (at_least, &cert.shortest_relator) {
                (Some(k), Some(w)) => w.len() >= *k,
                _ => true,
            };
            match format {
                Format::Json => Ok(Output::verdict(pretty(&cert), ok)),
                Format::Text => Ok(Output::verdict(
                    match &cert.shortest_relator {
                        Some(w) => format!("shortest relator {w} (length {})\n", w.len()),
                        None => format!("no relator of length <= {max}\n"),
                    },
                    ok,
                )),
                Format::Csv => Err(unsupported(format, "girth")),
            }
        }
        Command::Construct { l: Some(l), m: Some(m), mode, certify, .. } => {
            let gm = girth_marking_with_caps(*l, *m, *mode, &caps)?;
            gm.witnesses.verify()?;
            let cert = certify.then(|| {
                let probes = gm.witnesses.certificates.iter().map(|c| c.point.clone());
                certify_girth_with(&TrivialityOracle::new(&gm.marking).with_probes(probes), *m)
            });
            let ok = cert.as_ref().map_or(true, |c| c.shortest_relator.is_none());
            match format {
                Format::Json => Ok(Output::verdict(
                    pretty(&json!({
                        "l": l,
                        "m": m,
                        "mode": mode,
                        "epsilon": gm.epsilon(),
                        "marking": gm.marking,
                        "certificate": certificate_json(&gm.witnesses),
                        "girth": cert,
                    })),
                    ok,
                )),
                Format::Text => {
                    let mut s = format!(
                        "S_{{{l},{m}}} ({mode}): epsilon {}, {} words witnessed, {} breakpoints\n",
                        gm.epsilon(),
                        gm.witnesses.certificates.len(),
                        gm.marking.total_breakpoints()
                    );
                    if let Some(c) = &cert {
                        let _ = match &c.shortest_relator {
                            Some(w) => writeln!(s, "FAIL: relator {w}"),
                            None => writeln!(s, "certified: no relator of length <= {m}"),
                        };
                    }
                    Ok(Output::verdict(s, ok))
                }
                Format::Csv => Err(unsupported(format, "construct")),
            }
        }
        Command::Construct { words: Some(words), eps, rank, .. } => {
            let words: Vec<Word> = words.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_word).collect::<Result<_, _>>()?;
            let eps: Dyadic = eps.parse().map_err(usage)?;
            let rank = rank.unwrap_or_else(|| words.iter().map(Word::rank).max().unwrap_or(2).max(2));
            let t = construct_witnesses_multi(&words, &eps, rank)?;
            let ok = t.verify().is_ok();
            match format {
                Format::Json => Ok(Output::verdict(
                    pretty(&json!({ "marking": t.marking(), "certificate": certificate_json(&t) })),
                    ok,
                )),
                Format::Text => {
                    let mut s = String::new();
                    for c in &t.certificates {
                        let _ = writeln!(s, "{}: {} -> {}", c.word, c.point, c.image);
                    }
                    Ok(Output::verdict(s, ok))
                }
                Format::Csv => Err(unsupported(format, "construct")),
            }
        }
        Command::Construct { .. } => Err(CliError::Usage("construct needs --l and --m, or --words".into())),
        Command::Converge { family, radius, n, i, j, k } => {
            let fam = family_of(family)?;
            let mut ranges = RelatorRanges::default_for(fam.kind);
            if let Some(i) = i {
                ranges.i = *i;
            }
            if let Some(j) = j {
                ranges.j = *j;
            }
            if let Some(k) = k {
                ranges.k = *k;
            }
            let report = verify_limit_convergence(&fam, &ranges, *radius, n.lo, n.hi).map_err(usage)?;
            let body = match format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            Ok(Output::verdict(body, report.passed))
        }
        Command::Distance { marking: Some(a), other: Some(b), radius, .. } => {
            let (m1, m2) = (load_marking(Some(a))?, load_marking(Some(b))?);
            let d = marked_distance_bound(&m1, &m2, *radius).map_err(usage)?;
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "r_star": d.r_star,
                    "r_max": d.r_max,
                    "distance_bound": d.symbol(),
                    "first_difference": d.first_difference,
                })))),
                Format::Text => Ok(Output::ok(format!("{d}\n"))),
                Format::Csv => Ok(Output::ok(format!(
                    "r_star,distance_bound,witness\n{},{},{}\n",
                    d.r_star,
                    d.symbol(),
                    d.first_difference.map(|w| w.to_string()).unwrap_or_default()
                ))),
            }
        }
        Command::Distance { family: Some(name), n: Some(n), radius, .. } => {
            let fam = family_of(name)?;
            let rows: Vec<(u64, crate::metric::DistanceBound)> = (n.lo..=n.hi)
                .map(|k| {
                    let d = marked_distance_bound(&fam.marking_unchecked(k), &fam.marking_unchecked(k + 1), *radius)
                        .expect("family markings share a rank");
                    (k, d)
                })
                .collect();
            match format {
                Format::Csv => {
                    let mut s = String::from("n,r_star,distance_bound,witness\n");
                    for (k, d) in &rows {
                        let w = d.first_difference.as_ref().map(|w| w.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{k},{},{},{w}", d.r_star, d.symbol());
                    }
                    Ok(Output::ok(s))
                }
                Format::Json => Ok(Output::ok(pretty(
                    &rows
                        .iter()
                        .map(|(k, d)| {
                            json!({
                                "n": k,
                                "r_star": d.r_star,
                                "distance_bound": d.symbol(),
                                "first_difference": d.first_difference,
                            })
                        })
                        .collect::<Vec<_>>(),
                ))),
                Format::Text => {
                    let mut s = String::new();
                    for (k, d) in &rows {
                        let _ = writeln!(s, "n = {k} vs {}: {d}", k + 1);
                    }
                    Ok(Output::ok(s))
                }
            }
        }
        Command::Distance { .. } => Err(CliError::Usage("distance needs --marking/--other or --family/--n".into())),
        Command::Fact { m } => {
            if *m == 0 {
                return Err(CliError::Usage("fact needs m >= 1".into()));
            }
            let r = verify_fact(*m);
            let body = match format {
                Format::Json => pretty(&r),
                Format::Text => match &r.counterexample {
                    None => format!("m = {}: holds ({} words, {} classes)\n", r.m, r.words_checked, r.classes_checked),
                    Some(w) => format!("m = {}: FAILS at {w}\n", r.m),
                },
                Format::Csv => return Err(unsupported(format, "fact")),
            };
            Ok(Output::verdict(body, r.holds))
        }
    }
}

fn certificate_json(t: &WitnessTuple) -> Value {
    json!({
        "epsilon": t.plan.epsilon,
        "words": t.certificates.iter().map(|c| &c.word).collect::<Vec<_>>(),
        "points": t.certificates.iter().map(|c| json!({
            "word": c.word,
            "point": c.point,
            "image": c.image,
        })).collect::<Vec<_>>(),
    })
}

/// Parses `args` (program name first), writes results to `out` and
/// diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(usage(e)),
        },
        None => execute(&cli),
    };
    match result {
        Ok(output) => {
            let _ = out.write_all(output.body.as_bytes());
            if output.ok { EXIT_OK } else { EXIT_FAIL }
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Cap(msg)) => {
            let _ = writeln!(err, "cap exceeded: {msg}");
            EXIT_CAP
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["thompson"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gen_x5() {
        let (code, out, _) = call(&["gen", "x", "5"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["support"], json!([["31/32", "1"]]));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4..10"), Ok(NRange { lo: 4, hi: 10 }));
        assert!(parse_range("5..4").is_err());
        assert!(parse_range("0..4").is_err());
        assert!(parse_range("4-10").is_err());
        assert_eq!(parse_signed_range("-3..3"), Ok((-3, 3)));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["converge", "--family", "xn", "--R", "6", "--n", "5..4"]).0, EXIT_USAGE);
        assert_eq!(call(&["eval", "--word", "a ? b"]).0, EXIT_USAGE);
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["gen", "x", "2", "--format", "csv"]).0, EXIT_USAGE);
        assert_eq!(call(&["converge", "--family", "zz", "--R", "2", "--n", "1..2"]).0, EXIT_USAGE);
    }

    #[test]
    fn cap_exit() {
        let (code, _, err) = call(&["construct", "--l", "3", "--m", "3", "--mode", "faithful"]);
        assert_eq!(code, EXIT_CAP, "{err}");
    }

    #[test]
    fn fact_text() {
        let (code, out, _) = call(&["fact", "--m", "3", "--format", "text"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("m = 3: holds"));
    }
}
