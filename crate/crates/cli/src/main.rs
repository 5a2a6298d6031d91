mod bench;
mod input;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use denumerant::arith::{fmt_rat, lcm, Int};
use denumerant::factor::{factorize, Factorization};
use denumerant::oracle::compare;
use denumerant::pipeline::{evaluate, full_quasipolynomial, top_k_with, KnapsackInstance, TopKOptions, TopKResult};
use denumerant::poset::{largest_nontrivial_sublists, mobius, SpectrumTable};
use denumerant::Error;
use num_traits::{One, ToPrimitive};

use input::Line;

#[derive(Parser)]
#[command(name = "denumerant", version, about = "Top coefficients of the denumerant quasi-polynomial")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Degrees N-k..N as step polynomials.
    Topk {
        /// Knapsack file, `-` for stdin.
        file: String,
        #[arg(short)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Seconds allowed per coefficient; degrees are added one at a time.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Appends `line,k,seconds,status` rows for each attempted degree.
        #[arg(long)]
        timing_csv: Option<PathBuf>,
    },
    /// The whole quasi-polynomial.
    Full {
        file: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Values of the full quasi-polynomial.
    Eval {
        file: String,
        #[arg(short, required = true, num_args = 1..)]
        t: Vec<Int>,
    },
    /// First non-constant degree and the fan spectrum from factorizations.
    Predict {
        file: String,
        /// Entries are given as factorizations like `2^2*7`.
        #[arg(long)]
        factored: bool,
    },
    /// Compares against the counting oracle; exit code 3 on failure.
    Check {
        file: String,
        #[arg(short)]
        k: Option<usize>,
        #[arg(long)]
        t_max: Option<usize>,
        /// JSON results (one per line, as written by `topk --format json`) to check instead of recomputing.
        #[arg(long)]
        result: Option<PathBuf>,
        /// Replace a Möbius value before summation, `m:f=v`.
        #[arg(long = "mobius-override")]
        mobius_override: Vec<String>,
    },
    /// Writes a knapsack file for a benchmark family.
    BenchGen {
        /// random-3, random-15, repeat or partition.
        family: String,
        /// Entries per instance.
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Verify(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInstance(_)
            | Error::InvalidArgument(_)
            | Error::DegenerateGcd
            | Error::InconsistentFactorization(_) => Failure::Parse(e.to_string()),
            _ => Failure::Verify(e.to_string()),
        }
    }
}

type Out<'a> = &'a mut dyn Write;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.cmd, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DENUMERANT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("DENUMERANT_THREADS='{v}' is not a number"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cmd: Cmd, out: Out) -> Result<(), Failure> {
    match cmd {
        Cmd::Topk { file, k, format, time_limit, timing_csv } => {
            let limit = time_limit.map(Duration::from_secs_f64);
            let mut csv = String::new();
            for line in instances(&file)? {
                let inst = KnapsackInstance::new(line.values.clone())?;
                let k = clamp_k(k, &inst, line.line);
                let res = match limit {
                    None => top_k_with(&inst, k, TopKOptions::default())?,
                    Some(limit) => match top_k_timed(&inst, k, limit, line.line, &mut csv)? {
                        Some(r) => r,
                        None => {
                            eprintln!("warning: line {}: no coefficient within the time limit", line.line);
                            continue;
                        }
                    },
                };
                emit(out, &res, format, &line)?;
            }
            if let Some(path) = timing_csv {
                append(&path, &csv)?;
            }
            Ok(())
        }
        Cmd::Full { file, format } => {
            for line in instances(&file)? {
                let inst = KnapsackInstance::new(line.values.clone())?;
                emit(out, &full_quasipolynomial(&inst)?, format, &line)?;
            }
            Ok(())
        }
        Cmd::Eval { file, t } => {
            for line in instances(&file)? {
                let res = full_quasipolynomial(&KnapsackInstance::new(line.values.clone())?)?;
                for t in &t {
                    if t < &Int::from(0) {
                        return Err(Failure::Usage(format!("t = {t} is negative")));
                    }
                    writeln!(out, "{}", fmt_rat(&evaluate(&res, t))).map_err(io_err)?;
                }
            }
            Ok(())
        }
        Cmd::Predict { file, factored } => predict(out, &file, factored),
        Cmd::Check { file, k, t_max, result, mobius_override } => check(out, &file, k, t_max, result, &mobius_override),
        Cmd::BenchGen { family, dim, seed, count, output } => {
            let fam: bench::Family = family.parse().map_err(Failure::Usage)?;
            if dim < 2 {
                return Err(Failure::Usage("dim must be at least 2".into()));
            }
            let text = bench::to_file(&bench::generate(fam, dim, seed, count));
            match output {
                Some(p) => fs::write(&p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
                None => out.write_all(text.as_bytes()).map_err(io_err),
            }
        }
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_source(file: &str) -> Result<String, Failure> {
    if file == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        return Ok(s);
    }
    fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{file}: {e}")))
}

fn instances(file: &str) -> Result<Vec<Line<Int>>, Failure> {
    input::parse_instances(&read_source(file)?).map_err(|e| Failure::Parse(format!("{file}: {e}")))
}

fn append(path: &PathBuf, text: &str) -> Result<(), Failure> {
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(io_err)
}

fn clamp_k(k: usize, inst: &KnapsackInstance, line: usize) -> usize {
    if k > inst.n() {
        eprintln!("warning: line {line}: k = {k} exceeds N = {}, using k = N", inst.n());
        inst.n()
    } else {
        k
    }
}

/// Computes degrees `N, N-1, ..` one more at a time, each attempt under its
/// own deadline; returns the last completed result.
fn top_k_timed(
    inst: &KnapsackInstance,
    k: usize,
    limit: Duration,
    line: usize,
    csv: &mut String,
) -> Result<Option<TopKResult>, Failure> {
    let mut best = None;
    for j in 0..=k {
        let start = Instant::now();
        let expired = move || start.elapsed() > limit;
        let opts = TopKOptions { cancel: Some(&expired), ..Default::default() };
        match top_k_with(inst, j, opts) {
            Ok(r) => {
                csv.push_str(&format!("{line},{j},{:.3},ok\n", start.elapsed().as_secs_f64()));
                best = Some(r);
            }
            Err(Error::Cancelled) => {
                csv.push_str(&format!("{line},{j},{:.3},timeout\n", start.elapsed().as_secs_f64()));
                eprintln!("warning: line {line}: degree {} not reached within {limit:?}", inst.n() - j);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(best)
}

fn emit(out: Out, res: &TopKResult, format: Format, line: &Line<Int>) -> Result<(), Failure> {
    match format {
        Format::Json => writeln!(out, "{}", res.to_json()),
        Format::Text => {
            if !res.instance.gcd().is_one() {
                eprintln!(
                    "note: line {}: entries share the factor {g}; the formula is in t/{g} and the count vanishes off {g}Z",
                    line.line,
                    g = res.instance.gcd()
                );
            }
            writeln!(out, "{}", res.display_formula())
        }
    }
    .map_err(io_err)
}

fn predict(out: Out, file: &str, factored: bool) -> Result<(), Failure> {
    let text = read_source(file)?;
    let rows: Vec<(Vec<Int>, Vec<Factorization>)> = if factored {
        input::parse_factored(&text)
            .map_err(|e| Failure::Parse(format!("{file}: {e}")))?
            .into_iter()
            .map(|l| (l.values.iter().map(Factorization::value).collect(), l.values))
            .collect()
    } else {
        input::parse_instances(&text)
            .map_err(|e| Failure::Parse(format!("{file}: {e}")))?
            .into_iter()
            .map(|l| {
                let f = l.values.iter().map(|a| factorize(a).0).collect();
                (l.values, f)
            })
            .collect()
    };
    for (alphas, facs) in rows {
        let fan = largest_nontrivial_sublists(&alphas, &facs)?;
        let spectrum: Vec<String> = fan.mobius.iter().map(|(f, mu)| format!("{f}:{mu}")).collect();
        let lists: Vec<String> = fan
            .sublists
            .iter()
            .map(|s| s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let degree = fan.first_nonconstant_degree().map_or("none".to_string(), |d| d.to_string());
        writeln!(
            out,
            "ell={} ell-1={} sublists=[{}] spectrum={} period={}",
            fan.ell,
            degree,
            lists.join("; "),
            spectrum.join(" "),
            fan.predicted_period()
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// `m:f=v`
fn parse_override(s: &str) -> Result<(usize, Int, Int), Failure> {
    let bad = || Failure::Usage(format!("bad --mobius-override '{s}', expected m:f=v"));
    let (m, rest) = s.split_once(':').ok_or_else(bad)?;
    let (f, v) = rest.split_once('=').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, f.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
}

fn load_results(path: &PathBuf) -> Result<Vec<TopKResult>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let v: serde_json::Value = serde_json::from_str(l)
                .map_err(|e| Failure::Parse(format!("{} line {}: {e}", path.display(), i + 1)))?;
            TopKResult::from_json(&v).map_err(|e| Failure::Parse(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Möbius tables the result should carry, recomputed from its instance.
fn mobius_mismatches(res: &TopKResult) -> Vec<String> {
    let n = res.n();
    let table = SpectrumTable::build(res.instance.alphas(), res.k);
    let mut bad = Vec::new();
    for m in n - res.k..=n {
        let expected = match table.above(m) {
            Ok(spec) => mobius(&spec),
            Err(e) => {
                bad.push(format!("threshold {m}: {e}"));
                continue;
            }
        };
        if res.mobius.get(&m) != Some(&expected) {
            bad.push(format!("Möbius table for degree {m} differs from the recomputed one"));
        }
    }
    bad
}

fn default_t_max(alphas: &[Int]) -> usize {
    let q = alphas.iter().fold(Int::one(), |acc, x| lcm(&acc, x));
    q.to_usize().and_then(|q| q.checked_mul(3)).filter(|t| *t <= 60_000).unwrap_or(2_000)
}

fn check(
    out: Out,
    file: &str,
    k: Option<usize>,
    t_max: Option<usize>,
    result: Option<PathBuf>,
    overrides: &[String],
) -> Result<(), Failure> {
    let lines = instances(file)?;
    let overrides: Vec<(usize, Int, Int)> = overrides.iter().map(|s| parse_override(s)).collect::<Result<_, _>>()?;
    let loaded = match &result {
        Some(p) => {
            let r = load_results(p)?;
            if r.len() != lines.len() {
                return Err(Failure::Parse(format!("{} results for {} instances", r.len(), lines.len())));
            }
            Some(r)
        }
        None => None,
    };
    let replace = |m: usize, f: &Int, v: &Int| -> Int {
        overrides.iter().find(|(om, of, _)| *om == m && of == f).map_or_else(|| v.clone(), |(_, _, ov)| ov.clone())
    };
    let mut failed = 0;
    for (i, line) in lines.iter().enumerate() {
        let inst = KnapsackInstance::new(line.values.clone())?;
        let res = match &loaded {
            Some(r) => r[i].clone(),
            None => {
                let k = clamp_k(k.unwrap_or(inst.n()), &inst, line.line);
                let opts = TopKOptions {
                    mobius_override: if overrides.is_empty() { None } else { Some(&replace) },
                    ..Default::default()
                };
                top_k_with(&inst, k, opts)?
            }
        };
        let mut failures = Vec::new();
        if res.instance != inst {
            failures.push("result belongs to a different instance".to_string());
        } else {
            if loaded.is_some() {
                failures.extend(mobius_mismatches(&res));
            }
            match res.coefficient(inst.n()).and_then(|p| p.as_constant()) {
                Some(c) if c == inst.leading_coefficient() => {}
                _ => failures.push("leading coefficient is not 1/(N! prod a)".into()),
            }
            let t = t_max.unwrap_or_else(|| default_t_max(inst.alphas()));
            let rep = compare(&res, t, 5_000_000);
            failures.extend(rep.failures);
            for note in rep.notes {
                eprintln!("note: line {}: {note}", line.line);
            }
        }
        if failures.is_empty() {
            writeln!(out, "line {}: pass", line.line).map_err(io_err)?;
        } else {
            failed += 1;
            writeln!(out, "line {}: FAIL", line.line).map_err(io_err)?;
            for f in failures.iter().take(5) {
                writeln!(out, "  {f}").map_err(io_err)?;
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Verify(format!("{failed} of {} instances failed", lines.len())));
    }
    Ok(())
}
