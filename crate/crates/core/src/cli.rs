//! The `gcp` command line: verify, construct, search, admissibility, seeds
//! and identity checks over the pair document formats.
//!
//! Exit codes: 0 success, 1 a checked property is false, 2 usage or
//! malformed input, 3 I/O failure.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::construct::{
    construct_pair_with, expansion_identity_mismatch, random_draw, ExpansionParams, SeedPair,
};
use crate::document::PairDocument;
use crate::par::{self, Parallelism};
use crate::search::{exhaustive_gcp_search, SearchSpec, DEFAULT_NODE_BUDGET};
use crate::seeds::{is_admissible_length, reachable_lengths, seed_database, SeedRecord};
use crate::sequence::SeqPair;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "gcp",
    version,
    about = "Construct and certify q-ary Golay complementary pairs"
)]
struct Cli {
    /// Worker threads: 0 uses every core, 1 runs sequentially.
    #[arg(
        long,
        short = 'j',
        global = true,
        default_value_t = 0,
        env = "GCP_JOBS"
    )]
    jobs: usize,
    /// Extra directory of seed documents (defaults to $GCP_SEED_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    seed_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every pair of a document (JSON or text; `-` or no path reads stdin).
    Verify { input: Option<PathBuf> },
    /// Expand a quaternary seed into a 4h-ary pair of length M·2^m.
    Construct(ConstructArgs),
    /// Enumerate all (M, q) complementary pairs.
    Search(SearchArgs),
    /// Decide whether M = 2^(a+u) 3^b 5^c 11^d 13^e is a covered seed length.
    Admissible { m: u64 },
    /// Lengths M·2^m (m >= 1, M admissible) up to a limit.
    Reachable { limit: u64 },
    /// Inspect the seed database.
    #[command(subcommand)]
    Seeds(SeedsCommand),
    /// Check the exact expansion identity on random seeds and parameters.
    IdentityCheck(IdentityArgs),
}

#[derive(Args, Debug)]
#[command(disable_help_flag = true)]
struct ConstructArgs {
    /// Builtin seed name or path to a single-pair document.
    #[arg(long)]
    seed: String,
    /// Number of Boolean variables.
    #[arg(short = 'm', long = "vars")]
    m: usize,
    /// Alphabet multiplier; the output is 4h-ary.
    #[arg(short = 'h', long = "scale")]
    h: usize,
    /// 1-based permutation of 1..=m, comma separated.
    #[arg(long, value_delimiter = ',')]
    perm: Option<Vec<usize>>,
    /// Linear coefficients c_1..c_m, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<i64>>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_prime: Option<i64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, action = ArgAction::Help)]
    help: Option<bool>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(short = 'M', long = "length")]
    m: usize,
    #[arg(short = 'q', long)]
    q: usize,
    /// Only pairs with a_0 = b_0 = 0.
    #[arg(long)]
    normalize: bool,
    /// Print the number of pairs instead of the document.
    #[arg(long)]
    count_only: bool,
    /// Keep the first N pairs in lexicographic order.
    #[arg(long, value_name = "N")]
    max_results: Option<usize>,
    /// Node budget; larger searches are refused.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum SeedsCommand {
    List,
    Show {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct IdentityArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 3)]
    max_m: usize,
    #[arg(long, default_value_t = 4)]
    max_h: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Corrupt one exponent of every constructed pair (checks the checker).
    #[arg(long)]
    mutate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

enum Failure {
    Usage(String),
    Io(String),
}

type Outcome = Result<i32, Failure>;

struct Ctx<'a> {
    par: Parallelism,
    seed_dir: Option<PathBuf>,
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn print(&mut self, s: &str) -> Result<(), Failure> {
        self.out
            .write_all(s.as_bytes())
            .map_err(|e| Failure::Io(format!("writing output: {e}")))
    }

    fn warn(&mut self, s: &str) {
        let _ = writeln!(self.err, "gcp: {s}");
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let mut ctx = Ctx {
        par: Parallelism::from_jobs(cli.jobs),
        seed_dir: cli.seed_dir,
        stdin,
        out,
        err,
    };
    let result = match cli.command {
        Command::Verify { input } => verify(&mut ctx, input.as_deref()),
        Command::Construct(args) => construct(&mut ctx, &args),
        Command::Search(args) => search(&mut ctx, &args),
        Command::Admissible { m } => admissible(&mut ctx, m),
        Command::Reachable { limit } => reachable(&mut ctx, limit),
        Command::Seeds(cmd) => seeds(&mut ctx, &cmd),
        Command::IdentityCheck(args) => identity_check(&mut ctx, &args),
    };
    let _ = ctx.out.flush();
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            ctx.warn(&msg);
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            ctx.warn(&msg);
            EXIT_IO
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

fn read_input(ctx: &mut Ctx, path: Option<&Path>) -> Result<String, Failure> {
    let mut bytes = Vec::new();
    let name = match path {
        Some(p) if p != Path::new("-") => {
            bytes = std::fs::read(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            p.display().to_string()
        }
        _ => {
            ctx.stdin
                .read_to_end(&mut bytes)
                .map_err(|e| Failure::Io(format!("reading stdin: {e}")))?;
            "<stdin>".to_string()
        }
    };
    String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{name}: input is not UTF-8")))
}

fn render(doc: &PairDocument, format: Format, header: &[String]) -> String {
    match format {
        Format::Text => doc.to_text_with_header(header),
        Format::Json => doc.to_json(),
    }
}

fn verify(ctx: &mut Ctx, input: Option<&Path>) -> Outcome {
    let text = read_input(ctx, input)?;
    let doc = PairDocument::parse(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let pairs = doc.to_pairs().map_err(|e| Failure::Usage(e.to_string()))?;
    if pairs.is_empty() {
        ctx.warn("document holds no pairs");
    }
    let mut code = EXIT_OK;
    for (name, pair) in pairs {
        let report = pair.verify(ctx.par);
        match report.failure {
            None => ctx.print(&format!(
                "{name}: GCP: yes, shifts checked: {}\n",
                report.shifts_checked
            ))?,
            Some((lam, sum)) => {
                code = EXIT_FALSE;
                // Drop float noise so exact zeros do not print as -0.000000.
                let clean = |v: f64| if v.abs() < 5e-7 { 0.0 } else { v };
                let z = sum.to_complex();
                let (re, im) = (clean(z.re), clean(z.im));
                ctx.print(&format!(
                    "{name}: GCP: no, first failing shift: {lam}\n  \
                     C_a({lam}) + C_b({lam}) = {sum} (z = exp(2πi/{q}))\n  \
                     coefficients: {:?}\n  approx: {:.6} {} {:.6}i\n",
                    sum.coeffs(),
                    re,
                    if im < 0.0 { '-' } else { '+' },
                    im.abs(),
                    q = pair.q(),
                ))?;
            }
        }
    }
    Ok(code)
}

fn database(ctx: &Ctx) -> Result<Vec<SeedRecord>, Failure> {
    seed_database(ctx.seed_dir.as_deref())
        .map_err(|e| Failure::Usage(format!("seed database: {e}")))
}

fn unknown_seed(name: &str, db: &[SeedRecord]) -> Failure {
    let names: Vec<&str> = db.iter().map(|r| r.name.as_str()).collect();
    Failure::Usage(format!(
        "unknown seed {name:?}; available: {}",
        names.join(", ")
    ))
}

/// A database name, or else a path to a document with exactly one pair.
fn resolve_seed(ctx: &mut Ctx, spec: &str) -> Result<(String, SeedPair), Failure> {
    let db = database(ctx)?;
    if let Some(rec) = db.iter().find(|r| r.name == spec) {
        return Ok((rec.name.clone(), rec.seed.clone()));
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(unknown_seed(spec, &db));
    }
    let text = read_input(ctx, Some(path))?;
    let doc = PairDocument::parse(&text).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
    let mut pairs = doc
        .to_pairs()
        .map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
    if pairs.len() != 1 {
        return Err(Failure::Usage(format!(
            "{spec}: a seed document must hold exactly one pair, found {}",
            pairs.len()
        )));
    }
    let (name, pair) = pairs.remove(0);
    let seed = SeedPair::from_pair(&pair).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
    Ok((name, seed))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn construct(ctx: &mut Ctx, args: &ConstructArgs) -> Outcome {
    let (seed_name, seed) = resolve_seed(ctx, &args.seed)?;
    let usage = |e: crate::construct::ConstructError| Failure::Usage(e.to_string());
    let defaults = ExpansionParams::defaults(args.m, args.h).map_err(usage)?;
    let params = ExpansionParams::new(
        args.m,
        args.h,
        args.perm
            .clone()
            .unwrap_or_else(|| defaults.perm().to_vec()),
        args.coeffs
            .clone()
            .unwrap_or_else(|| defaults.coeffs().iter().map(|&c| c as i64).collect()),
        args.theta.unwrap_or(defaults.theta() as i64),
        args.theta_prime.unwrap_or(defaults.theta_prime() as i64),
    )
    .map_err(usage)?;
    let pair = construct_pair_with(&seed, &params, ctx.par).map_err(usage)?;
    let desc = format!(
        "m={} h={} perm={} coeffs={} theta={} theta_prime={}",
        params.m(),
        params.h(),
        join(params.perm()),
        join(params.coeffs()),
        params.theta(),
        params.theta_prime()
    );
    let name = format!("{seed_name}-m{}-h{}", params.m(), params.h());
    let provenance = format!("expansion of seed {seed_name}: {desc}");
    let doc = PairDocument::single(name, &pair, Some(provenance));
    let header = [
        format!("constructed from seed {seed_name} (length {})", seed.len()),
        desc,
        format!("output: q={} length={}", pair.q(), pair.len()),
    ];
    ctx.print(&render(&doc, args.format, &header))?;
    Ok(EXIT_OK)
}

fn search(ctx: &mut Ctx, args: &SearchArgs) -> Outcome {
    let spec = SearchSpec::new(args.m, args.q)
        .normalized(args.normalize)
        .max_results(args.max_results)
        .node_budget(args.budget);
    let outcome =
        exhaustive_gcp_search(&spec, ctx.par).map_err(|e| Failure::Usage(e.to_string()))?;
    if args.count_only {
        ctx.print(&format!("{}\n", outcome.pairs.len()))?;
        return Ok(EXIT_OK);
    }
    let mut doc = PairDocument::new(args.q, args.m);
    for (i, p) in outcome.pairs.iter().enumerate() {
        doc.pairs.push(crate::document::PairEntry::from_pair(
            format!("pair{i}"),
            p,
            None,
        ));
    }
    let header = [format!(
        "exhaustive search M={} q={}{}: {} pairs{}",
        args.m,
        args.q,
        if args.normalize { " normalized" } else { "" },
        outcome.pairs.len(),
        if outcome.truncated {
            " (truncated)"
        } else {
            ""
        }
    )];
    ctx.print(&render(&doc, args.format, &header))?;
    Ok(EXIT_OK)
}

fn admissible(ctx: &mut Ctx, m: u64) -> Outcome {
    match is_admissible_length(m).map_err(|e| Failure::Usage(e.to_string()))? {
        Some(w) => {
            ctx.print(&format!("{w}\n"))?;
            Ok(EXIT_OK)
        }
        None => {
            ctx.print(&format!(
                "{m}: not covered by the admissible-length condition \
                 (this does not rule out a pair of length {m})\n"
            ))?;
            Ok(EXIT_FALSE)
        }
    }
}

fn reachable(ctx: &mut Ctx, limit: u64) -> Outcome {
    let lens: Vec<String> = reachable_lengths(limit)
        .iter()
        .map(|l| l.to_string())
        .collect();
    ctx.print(&format!("{}\n", lens.join(" ")))?;
    Ok(EXIT_OK)
}

fn seeds(ctx: &mut Ctx, cmd: &SeedsCommand) -> Outcome {
    let db = database(ctx)?;
    match cmd {
        SeedsCommand::List => {
            let mut s = String::new();
            for r in &db {
                s.push_str(&format!(
                    "{:<8} length {:<4} verified {:<5} {}\n",
                    r.name,
                    r.seed.len(),
                    if r.verified { "yes" } else { "no" },
                    r.provenance
                ));
            }
            ctx.print(&s)?;
        }
        SeedsCommand::Show { name, format } => {
            let rec = db
                .iter()
                .find(|r| &r.name == name)
                .ok_or_else(|| unknown_seed(name, &db))?;
            let doc =
                PairDocument::single(&rec.name, &rec.seed.to_pair(), Some(rec.provenance.clone()));
            ctx.print(&render(&doc, *format, &[]))?;
        }
    }
    Ok(EXIT_OK)
}

/// With `mutate`, bumps `a_0` so the identity must fail.
fn mutated(pair: &SeqPair) -> SeqPair {
    let q = pair.q();
    let mut a = pair.a().exps().to_vec();
    a[0] = (a[0] + 1) % q;
    SeqPair::from_exps(q, a, pair.b().exps().to_vec()).expect("exponent stays below q")
}

fn identity_check(ctx: &mut Ctx, args: &IdentityArgs) -> Outcome {
    if args.min_len == 0 || args.min_len > args.max_len || args.max_m == 0 || args.max_h == 0 {
        return Err(Failure::Usage(
            "need 1 <= min-len <= max-len, max-m >= 1 and max-h >= 1".into(),
        ));
    }
    if args.trials == 0 {
        ctx.warn("warning: 0 trials requested, nothing was checked");
        ctx.print("0 trials, 0 failures\n")?;
        return Ok(EXIT_OK);
    }
    // One independent stream per trial keeps results independent of --jobs.
    let results = par::map_range(args.trials, ctx.par, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
        rng.set_stream(i as u64);
        let draw = random_draw(
            &mut rng,
            args.min_len..=args.max_len,
            1..=args.max_m,
            1..=args.max_h,
        )?;
        let mut pair = construct_pair_with(&draw.seed, &draw.params, Parallelism::Sequential)?;
        if args.mutate {
            pair = mutated(&pair);
        }
        let bad =
            expansion_identity_mismatch(&draw.seed, &draw.params, &pair, Parallelism::Sequential)?;
        Ok::<_, crate::construct::ConstructError>(bad.map(|lam| (draw, lam)))
    });
    let mut failures = 0;
    let mut first = None;
    for (i, r) in results.into_iter().enumerate() {
        if let Some(hit) = r.map_err(|e| Failure::Usage(e.to_string()))? {
            failures += 1;
            first.get_or_insert((i, hit));
        }
    }
    ctx.print(&format!("{} trials, {failures} failures\n", args.trials))?;
    if let Some((i, (draw, lam))) = first {
        let p = &draw.params;
        ctx.print(&format!(
            "first failure: trial {i}, shift {lam}\n  phi1 {:?}\n  phi2 {:?}\n  \
             m={} h={} perm={} coeffs={} theta={} theta_prime={}\n",
            draw.seed.phi1().exps(),
            draw.seed.phi2().exps(),
            p.m(),
            p.h(),
            join(p.perm()),
            join(p.coeffs()),
            p.theta(),
            p.theta_prime()
        ))?;
        return Ok(EXIT_FALSE);
    }
    Ok(EXIT_OK)
}
