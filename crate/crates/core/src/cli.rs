//! The `mcfinite` command line.
//!
//! Every subcommand writes deterministic text. With `--format machine` each
//! output line is a run of space-separated `key=value` pairs instead.
//! Exit codes: 0 success, 1 domain error or failed check, 2 usage error.

use std::error::Error;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Pow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::{Adversary, BitSource};
use crate::du::{du_equiv_classes, du_submatrix, subst_submatrix, PointedStructure, WitnessSet};
use crate::falsify::{falsify, read_bfile};
use crate::prs::{parse_spec, DetectConfig, DiskCache, Evaluator};
use crate::specker::{
    check_dvlm, check_ultimate_vanishing, equiv_table, extract_recurrence, random_dvlm_instance,
    verify_recurrence, RecurrenceParams,
};
use crate::structures::{density_table, EnumConfig, PropertySpec, MAX_UNIVERSE};

type DomainResult<T> = Result<T, Box<dyn Error + Send + Sync>>;

/// Sizes up to which `vanish` enumerates; larger sizes use closed forms.
pub const VANISH_ENUMERATE_MAX: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "mcfinite", version, about = "Modular sequence evaluation and density analysis of labeled structures")]
struct Cli {
    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for enumeration and matrix fill.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    /// Directory for compiled periodic tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct WitnessSource {
    /// File with one structure literal per line.
    #[arg(long)]
    witnesses: Option<PathBuf>,
    /// Use one structure per isomorphism class on at most this many elements.
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..=6))]
    gen_max: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the eventually periodic table of a recurrence modulo M.
    Period {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(1..))]
        modulus: u64,
    },
    /// Print a_N mod M.
    Eval {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(1..))]
        modulus: u64,
        /// Index, decimal or `a^b`.
        #[arg(long, value_parser = parse_index)]
        n: BigUint,
    },
    /// Check claimed values from a b-file against a recurrence.
    Falsify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        bfile: PathBuf,
        /// Inclusive range `LO..HI`.
        #[arg(long, value_parser = parse_moduli, default_value = "2..64")]
        moduli: RangeInclusive<u64>,
    },
    /// Print the density d(n) for n = 1..N.
    Count {
        #[arg(long, value_parser = parse_property)]
        property: PropertySpec,
        #[arg(long)]
        n_max: usize,
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(1..))]
        modulus: Option<u64>,
    },
    /// Print a disjoint-union submatrix and its rank over GF(2).
    DuRank {
        #[arg(long, value_parser = parse_property)]
        property: PropertySpec,
        #[command(flatten)]
        source: WitnessSource,
    },
    /// Print a substitution submatrix and its rank over GF(2).
    SubstRank {
        #[arg(long, value_parser = parse_property)]
        property: PropertySpec,
        /// File with one pointed literal (`LIT@k` or `LIT@out`) per line.
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        witnesses: PathBuf,
    },
    /// Test orbit divisibility on seeded random instances.
    OrbitCheck {
        #[arg(long)]
        trials: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=16))]
        max_n: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Extract and verify the modular recurrence of block densities.
    Recur {
        #[arg(long, value_parser = parse_property)]
        property: PropertySpec,
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(1..))]
        modulus: u64,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        witnesses: Option<PathBuf>,
    },
    /// Scan d(n) mod M for eventual vanishing.
    Vanish {
        #[arg(long, value_parser = parse_property)]
        property: PropertySpec,
        #[arg(long = "mod", value_parser = clap::value_parser!(u64).range(1..))]
        modulus: u64,
        #[arg(long)]
        n_max: usize,
    },
    /// Print a term of the adversarial sequence.
    Adversary {
        /// `alternating`, `thue-morse` or `list:b1,b2,...`.
        #[arg(long, value_parser = parse_bits)]
        bits: BitSource,
        #[arg(long)]
        n: usize,
        /// Also tabulate a_k mod p_I^J for k = 1..N.
        #[arg(long, value_parser = parse_pair)]
        check: Option<(usize, usize)>,
    },
}

fn parse_index(s: &str) -> Result<BigUint, String> {
    let bad = || format!("expected a positive integer or `a^b`, found {s:?}");
    let value = match s.split_once('^') {
        Some((a, b)) => {
            let a: BigUint = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().parse().map_err(|_| bad())?;
            a.pow(b)
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value == BigUint::from(0u8) {
        return Err("indices start at 1".to_string());
    }
    Ok(value)
}

fn parse_moduli(s: &str) -> Result<RangeInclusive<u64>, String> {
    let bad = || format!("expected `LO..HI` with 1 <= LO <= HI, found {s:?}");
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_property(s: &str) -> Result<PropertySpec, String> {
    PropertySpec::parse(s).map_err(|e| e.to_string())
}

fn parse_bits(s: &str) -> Result<BitSource, String> {
    s.parse().map_err(|e: crate::adversary::AdversaryError| e.to_string())
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected `I,J` with I, J >= 1, found {s:?}");
    let (i, j) = s.split_once(',').ok_or_else(bad)?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 {
        return Err(bad());
    }
    Ok((i, j))
}

/// Text and machine renderings of one result, plus whether a check failed.
struct Report {
    text: String,
    machine: String,
    failed: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            text: String::new(),
            machine: String::new(),
            failed: false,
        }
    }

    fn text(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }

    fn machine(&mut self, pairs: &[(&str, String)]) {
        let line: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        self.machine.push_str(&line.join(" "));
        self.machine.push('\n');
    }
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

fn read(path: &Path) -> DomainResult<String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

struct Context {
    jobs: usize,
    cache_dir: Option<PathBuf>,
}

impl Context {
    fn enum_config(&self) -> EnumConfig {
        EnumConfig {
            jobs: self.jobs,
            ..EnumConfig::default()
        }
    }

    fn evaluator(&self, spec: &Path) -> DomainResult<Evaluator> {
        let prs = parse_spec(&read(spec)?)?;
        let mut ev = Evaluator::new(prs, DetectConfig::default());
        if let Some(dir) = &self.cache_dir {
            ev = ev.with_disk_cache(DiskCache::new(dir.clone()));
        }
        Ok(ev)
    }
}

/// Parses `argv` (program name first) and runs the selected subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let ctx = Context {
        jobs: cli.jobs as usize,
        cache_dir: cli.cache_dir,
    };
    match dispatch(&ctx, cli.command) {
        Ok(report) => Outcome {
            code: if report.failed { 1 } else { 0 },
            stdout: match cli.format {
                Format::Text => report.text,
                Format::Machine => report.machine,
            },
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn dispatch(ctx: &Context, command: Command) -> DomainResult<Report> {
    match command {
        Command::Period { spec, modulus } => period(ctx, &spec, modulus),
        Command::Eval { spec, modulus, n } => eval(ctx, &spec, modulus, &n),
        Command::Falsify { spec, bfile, moduli } => falsify_cmd(ctx, &spec, &bfile, moduli),
        Command::Count {
            property,
            n_max,
            modulus,
        } => count(ctx, &property, n_max, modulus),
        Command::DuRank { property, source } => du_rank(ctx, &property, &source),
        Command::SubstRank {
            property,
            rows,
            witnesses,
        } => subst_rank(ctx, &property, &rows, &witnesses),
        Command::OrbitCheck { trials, max_n, seed } => orbit_check(trials, max_n as usize, seed),
        Command::Recur {
            property,
            modulus,
            degree,
            n_max,
            witnesses,
        } => recur(ctx, &property, modulus, degree, n_max, witnesses.as_deref()),
        Command::Vanish {
            property,
            modulus,
            n_max,
        } => vanish(ctx, &property, modulus, n_max),
        Command::Adversary { bits, n, check } => adversary(bits, n, check),
    }
}

fn period(ctx: &Context, spec: &Path, modulus: u64) -> DomainResult<Report> {
    let ep = ctx.evaluator(spec)?.compiled(modulus)?;
    let mut r = Report::new();
    r.text(ep.to_string());
    let values: Vec<String> = ep.table().iter().map(u64::to_string).collect();
    r.machine(&[
        ("modulus", modulus.to_string()),
        ("preperiod", ep.preperiod().to_string()),
        ("period", ep.period().to_string()),
        ("values", values.join(",")),
    ]);
    Ok(r)
}

fn eval(ctx: &Context, spec: &Path, modulus: u64, n: &BigUint) -> DomainResult<Report> {
    let value = ctx.evaluator(spec)?.eval_mod(modulus, n)?.value();
    let mut r = Report::new();
    r.text(value.to_string());
    r.machine(&[
        ("n", n.to_string()),
        ("modulus", modulus.to_string()),
        ("residue", value.to_string()),
    ]);
    Ok(r)
}

fn falsify_cmd(ctx: &Context, spec: &Path, bfile: &Path, moduli: RangeInclusive<u64>) -> DomainResult<Report> {
    let ev = ctx.evaluator(spec)?;
    let seq = read_bfile(bfile)?;
    let moduli: Vec<u64> = moduli.collect();
    let report = falsify(&seq, &ev, &moduli)?;
    let mut r = Report::new();
    r.text = report.to_string();
    for m in &report.mismatches {
        r.machine(&[
            ("n", m.n.to_string()),
            ("m", m.modulus.to_string()),
            ("expected", m.expected.to_string()),
            ("got", m.claimed.to_string()),
        ]);
    }
    r.machine(&[
        ("entries", report.entries.to_string()),
        ("verdict", report.verdict().to_string()),
    ]);
    Ok(r)
}

fn count(ctx: &Context, p: &PropertySpec, n_max: usize, modulus: Option<u64>) -> DomainResult<Report> {
    let table = density_table(p, 1..=n_max, modulus, n_max, ctx.enum_config())?;
    let mut r = Report::new();
    r.text = table.to_string();
    for row in &table.rows {
        r.machine(&[("n", row.n.to_string()), ("value", row.value.to_string())]);
    }
    Ok(r)
}

fn matrix_report(r: &mut Report, m: &crate::du::Gf2Matrix, classes: Option<usize>) {
    let rank = m.rank();
    r.text = m.to_string();
    r.text(format!("rank: {rank} (certified lower bound)"));
    if let Some(k) = classes {
        r.text(format!("classes: {k}"));
    }
    for i in 0..m.nrows() {
        let bits: String = m.row_bits(i).iter().map(|&b| if b { '1' } else { '0' }).collect();
        r.machine(&[("row", m.row_labels()[i].clone()), ("bits", bits)]);
    }
    let mut summary = vec![
        ("rows", m.nrows().to_string()),
        ("cols", m.ncols().to_string()),
        ("rank_lower_bound", rank.to_string()),
    ];
    if let Some(k) = classes {
        summary.push(("classes", k.to_string()));
    }
    r.machine(&summary);
}

fn du_rank(ctx: &Context, p: &PropertySpec, source: &WitnessSource) -> DomainResult<Report> {
    let vocab = Arc::clone(p.vocab());
    let w = match (&source.witnesses, source.gen_max) {
        (Some(path), _) => WitnessSet::parse(vocab, &read(path)?)?,
        (None, Some(s)) => WitnessSet::generate(vocab, s as usize, ctx.enum_config())?,
        (None, None) => unreachable!("clap requires one witness source"),
    };
    let m = du_submatrix(p, &w, ctx.jobs)?;
    let classes = du_equiv_classes(p, &w, ctx.jobs)?.len();
    let mut r = Report::new();
    matrix_report(&mut r, &m, Some(classes));
    Ok(r)
}

fn subst_rank(ctx: &Context, p: &PropertySpec, rows: &Path, witnesses: &Path) -> DomainResult<Report> {
    let vocab = Arc::clone(p.vocab());
    let mut pointed = Vec::new();
    for (i, line) in read(rows)?.lines().enumerate() {
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        pointed.push(PointedStructure::parse(&vocab, body).map_err(|e| format!("{}:{}: {e}", rows.display(), i + 1))?);
    }
    let w = WitnessSet::parse(vocab, &read(witnesses)?)?;
    let m = subst_submatrix(p, &pointed, &w, ctx.jobs)?;
    let mut r = Report::new();
    matrix_report(&mut r, &m, None);
    Ok(r)
}

/// Instances come from ChaCha8 seeded with `seed`.
fn orbit_check(trials: usize, max_n: usize, seed: u64) -> DomainResult<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new();
    let mut failures = 0usize;
    for trial in 1..=trials {
        let (g, subset, v) = random_dvlm_instance(&mut rng, max_n);
        let c = check_dvlm(&g, &subset, v)?;
        failures += usize::from(!c.divides);
        let set: Vec<String> = subset.iter().map(usize::to_string).collect();
        r.text(format!(
            "trial {trial} graph={g} subset={} v={v} neighbors={} binomial={} orbit={} divides={}",
            set.join(","),
            c.neighbors,
            c.binomial,
            c.orbit,
            yes_no(c.divides)
        ));
        r.machine(&[
            ("trial", trial.to_string()),
            ("graph", g.to_string()),
            ("subset", set.join(",")),
            ("v", v.to_string()),
            ("neighbors", c.neighbors.to_string()),
            ("binomial", c.binomial.to_string()),
            ("orbit", c.orbit.to_string()),
            ("divides", yes_no(c.divides)),
        ]);
    }
    r.text(format!("checked: {trials} failures: {failures}"));
    r.machine(&[("checked", trials.to_string()), ("failures", failures.to_string())]);
    r.failed = failures > 0;
    Ok(r)
}

fn recur(
    ctx: &Context,
    p: &PropertySpec,
    m: u64,
    d: usize,
    n_max: usize,
    witnesses: Option<&Path>,
) -> DomainResult<Report> {
    let vocab = Arc::clone(p.vocab());
    let cfg = ctx.enum_config();
    let w = match witnesses {
        Some(path) => WitnessSet::parse(vocab, &read(path)?)?,
        None => {
            let size = if vocab.is_graph() { 4 } else { 2 };
            WitnessSet::generate(vocab, size, cfg)?
        }
    };
    let params = RecurrenceParams::new(m, d, 1)?;
    let t_max = (n_max as u64).div_ceil(params.stride()).max(1);
    let params = RecurrenceParams::new(m, d, t_max)?;
    let table = equiv_table(p, d, m, &w, 0..=n_max, cfg)?;
    let rec = extract_recurrence(&table, &params, cfg)?;
    let report = verify_recurrence(&rec, &table, &params, 1..=n_max)?;

    let mut r = Report::new();
    r.text(format!("stride: {}", params.stride()));
    for (b, block) in table.blocks().iter().enumerate() {
        let role = if b == 0 { " (sink)" } else { "" };
        let rep = table.representative(b);
        writeln!(r.text, "block D{b}{role}: {} members, representative {rep}", block.members.len()).unwrap();
        r.machine(&[
            ("block", b.to_string()),
            ("members", block.members.len().to_string()),
            ("representative", rep.to_string()),
        ]);
    }
    r.text.push_str(&rec.to_string());
    r.text.push_str(&report.to_string());
    r.text(format!("verified: {}", yes_no(report.verified())));
    let stride = params.stride() as usize;
    for res in 0..stride {
        for t in 1..rec.block_count() {
            for s in 1..rec.block_count() {
                r.machine(&[
                    ("r", res.to_string()),
                    ("target", t.to_string()),
                    ("source", s.to_string()),
                    ("coefficient", rec.coefficient(res, t, s).value().to_string()),
                ]);
            }
        }
    }
    for row in &report.rows {
        r.machine(&[
            ("n", row.n.to_string()),
            ("block", row.block.to_string()),
            ("lhs", row.lhs.to_string()),
            ("rhs", row.rhs.to_string()),
            ("residual", row.residual.to_string()),
        ]);
    }
    r.machine(&[("stride", params.stride().to_string()), ("verified", yes_no(report.verified()))]);
    r.failed = !report.verified();
    Ok(r)
}

fn vanish(ctx: &Context, p: &PropertySpec, m: u64, n_max: usize) -> DomainResult<Report> {
    let enumerate_max = n_max.min(VANISH_ENUMERATE_MAX).min(MAX_UNIVERSE);
    let report = check_ultimate_vanishing(p, m, 1..=n_max, enumerate_max, ctx.enum_config())?;
    let mut r = Report::new();
    r.text = report.to_string();
    for (n, residue, source) in &report.rows {
        r.machine(&[
            ("n", n.to_string()),
            ("residue", residue.to_string()),
            ("source", source.to_string()),
        ]);
    }
    r.machine(&[
        ("modulus", m.to_string()),
        ("vanishes_from", report.vanishes_from.map_or("none".to_string(), |n| n.to_string())),
    ]);
    Ok(r)
}

fn adversary(bits: BitSource, n: usize, check: Option<(usize, usize)>) -> DomainResult<Report> {
    let adv = Adversary::new(bits).with_max_n(n.max(1));
    let term = adv.term(n)?;
    let mut r = Report::new();
    r.text(format!("a_{n} = {term}"));
    r.machine(&[("n", n.to_string()), ("term", term.to_string())]);
    if let Some((i, j)) = check {
        let rows = adv.verify_stabilization(i, j, 1..=n)?;
        let violations = rows.iter().filter(|row| row.violated()).count();
        for row in &rows {
            r.text(format!(
                "n={} mod {}^{}: residue={} expected={} applies={} matches={}",
                row.n,
                row.prime,
                row.exponent,
                row.residue,
                row.expected,
                yes_no(row.applies),
                yes_no(row.matches)
            ));
            r.machine(&[
                ("n", row.n.to_string()),
                ("prime", row.prime.to_string()),
                ("exponent", row.exponent.to_string()),
                ("residue", row.residue.to_string()),
                ("expected", row.expected.to_string()),
                ("applies", yes_no(row.applies)),
                ("matches", yes_no(row.matches)),
            ]);
        }
        r.text(format!("violations: {violations}"));
        r.machine(&[("violations", violations.to_string())]);
        r.failed = violations > 0;
    }
    Ok(r)
}
