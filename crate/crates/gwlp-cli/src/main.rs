//! Command-line interface for exact GWLP computation and minimum-aberration
//! run removal.
//!
//! Diagnostics go to stderr, data to stdout (or `--output`). Exit codes:
//! 0 success, 1 usage or runtime error, 2 input parse error, 3 capacity
//! refusal.

use clap::{Parser, Subcommand, ValueEnum};
use gwlp::design::Fraction;
use gwlp::io::{self, format_columns, round3, OutputFormat, ReportDocument};
use gwlp::removal::{exhaustive_search, greedy_sequential, rank_single_removals, SearchOptions};
use gwlp::wstack::{build_wstack, gwlp_from_wstack, w_marginal, WStack};
use gwlp::{counting, Error};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "gwlp",
    version,
    about = "Exact generalized word-length patterns and minimum-aberration run removal"
)]
struct Cli {
    /// Output format for the data stream.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the data stream to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for matrix construction and subset sweeps
    /// (default: all cores). Results are identical for any value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Report the strength and class of a design, e.g. "OA(12, 2^5, t=2)".
    Check { file: PathBuf },

    /// Exact GWLP of the design, with a 3-decimal rendering.
    Gwlp { file: PathBuf },

    /// Print the order-j pairwise contribution matrix and its marginals.
    Wmatrix {
        file: PathBuf,
        /// Matrix order j, between 0 and the factor count.
        #[arg(long)]
        order: usize,
    },

    /// Rank all single-run removals, best first.
    Rank1 { file: PathBuf },

    /// Evaluate every p-subset of runs and group equal patterns.
    Remove {
        file: PathBuf,
        /// Number of runs to remove.
        #[arg(long)]
        p: usize,
        /// Refuse sweeps over more subsets than this.
        #[arg(long, default_value_t = 10_000_000)]
        max_subsets: u64,
        /// Representative subsets listed per group.
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },

    /// Remove p runs one at a time, each step locally GMA-best.
    Greedy {
        file: PathBuf,
        /// Number of runs to remove.
        #[arg(long)]
        p: usize,
        /// Force the first removed run (1-based index).
        #[arg(long)]
        first: Option<usize>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    let result = match cli.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k as usize)
                .build();
            match pool {
                Ok(pool) => pool.install(|| run(&cli)),
                Err(e) => Err(Error::Unsupported(format!("cannot build thread pool: {e}"))),
            }
        }
        None => run(&cli),
    };

    match result {
        Ok(data) => {
            let write_result = match &cli.output {
                Some(path) => std::fs::write(path, data.as_bytes()),
                None => std::io::stdout().write_all(data.as_bytes()),
            };
            if let Err(e) = write_result {
                eprintln!("error: cannot write output: {e}");
                std::process::exit(1);
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::Capacity {
                what: "removal subsets",
                ..
            } = err
            {
                eprintln!("hint: raise --max-subsets to force the sweep");
            }
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } => 2,
        Error::Capacity { .. } => 3,
        _ => 1,
    }
}

fn load_fraction(path: &Path) -> Result<Fraction, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    io::parse_oa_file(&text)
}

fn build(fraction: &Fraction) -> Result<WStack, Error> {
    build_wstack(fraction)
}

fn run(cli: &Cli) -> Result<String, Error> {
    let format = OutputFormat::from(cli.format);
    match &cli.command {
        Command::Check { file } => check_command(file, format),
        Command::Gwlp { file } => gwlp_command(file, format),
        Command::Wmatrix { file, order } => wmatrix_command(file, *order, format),
        Command::Rank1 { file } => rank1_command(file, format),
        Command::Remove {
            file,
            p,
            max_subsets,
            reps,
        } => remove_command(file, *p, *max_subsets, *reps, format),
        Command::Greedy { file, p, first } => greedy_command(file, *p, *first, format),
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("document serialization");
    out.push('\n');
    out
}

fn input_name(path: &Path) -> String {
    path.display().to_string()
}

// ---- check ----------------------------------------------------------------

#[derive(Serialize)]
struct CheckDoc {
    input: String,
    n: usize,
    m: usize,
    levels: Vec<u32>,
    strength: usize,
    class: String,
}

fn check_command(file: &Path, format: OutputFormat) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let strength = counting::strength(&fraction);
    let doc = CheckDoc {
        input: input_name(file),
        n: fraction.n(),
        m: fraction.space().factors(),
        levels: fraction.space().levels().to_vec(),
        strength,
        class: format!(
            "OA({}, {}, t={})",
            fraction.n(),
            fraction.space().class_label(),
            strength
        ),
    };
    Ok(match format {
        OutputFormat::Json => to_json(&doc),
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "key,value");
            let _ = writeln!(out, "input,{}", doc.input);
            let _ = writeln!(out, "n,{}", doc.n);
            let _ = writeln!(out, "m,{}", doc.m);
            let _ = writeln!(
                out,
                "levels,{}",
                doc.levels
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            let _ = writeln!(out, "strength,{}", doc.strength);
            let _ = writeln!(out, "class,{}", doc.class);
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "{}", doc.class);
            let _ = writeln!(out, "input:    {}", doc.input);
            let _ = writeln!(out, "runs:     {}", doc.n);
            let _ = writeln!(out, "factors:  {}", doc.m);
            let _ = writeln!(
                out,
                "levels:   {}",
                doc.levels
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            let _ = writeln!(out, "strength: {}", doc.strength);
            out
        }
    })
}

// ---- gwlp -----------------------------------------------------------------

#[derive(Serialize)]
struct GwlpDoc {
    input: String,
    n: usize,
    gwlp_num: Vec<u64>,
    gwlp_den: u64,
    rounded: Vec<String>,
}

fn gwlp_command(file: &Path, format: OutputFormat) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let stack = build(&fraction)?;
    let gwlp = gwlp_from_wstack(&stack)?;
    let rounded: Vec<String> = gwlp
        .numerators()
        .iter()
        .map(|&num| round3(num, gwlp.denominator()))
        .collect();
    let doc = GwlpDoc {
        input: input_name(file),
        n: fraction.n(),
        gwlp_num: gwlp.numerators().to_vec(),
        gwlp_den: gwlp.denominator(),
        rounded,
    };
    Ok(match format {
        OutputFormat::Json => to_json(&doc),
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "j,numerator,denominator,rounded");
            for (j, num) in doc.gwlp_num.iter().enumerate() {
                let _ = writeln!(out, "{j},{num},{},{}", doc.gwlp_den, doc.rounded[j]);
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "# GWLP — input: {}, n = {}", doc.input, doc.n);
            let _ = writeln!(out, "A = ({})", doc.rounded.join(", "));
            let exact: Vec<String> = doc
                .gwlp_num
                .iter()
                .map(|num| format!("{num}/{}", doc.gwlp_den))
                .collect();
            let _ = writeln!(out, "exact = ({})", exact.join(", "));
            out
        }
    })
}

// ---- wmatrix ---------------------------------------------------------------

#[derive(Serialize)]
struct WmatrixDoc {
    input: String,
    order: usize,
    n: usize,
    matrix: Vec<Vec<i64>>,
    marginals: Vec<i64>,
}

fn wmatrix_command(file: &Path, order: usize, format: OutputFormat) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let m = fraction.space().factors();
    if order > m {
        return Err(Error::Unsupported(format!(
            "order {order} exceeds the factor count {m}"
        )));
    }
    let stack = build(&fraction)?;
    let n = stack.n();
    let matrix: Vec<Vec<i64>> = (0..n)
        .map(|r| (0..n).map(|c| stack.entry(order, r, c)).collect())
        .collect();
    let marginals: Vec<i64> = (0..n)
        .map(|f| w_marginal(&stack, order, f))
        .collect::<Result<_, _>>()?;
    let doc = WmatrixDoc {
        input: input_name(file),
        order,
        n,
        matrix,
        marginals,
    };
    Ok(match format {
        OutputFormat::Json => to_json(&doc),
        OutputFormat::Csv => {
            let mut out = String::new();
            let header: Vec<String> = std::iter::once("f".to_string())
                .chain((1..=n).map(|c| format!("f_{c}")))
                .chain(std::iter::once("w".to_string()))
                .collect();
            let _ = writeln!(out, "{}", header.join(","));
            for r in 0..n {
                let mut row = vec![format!("f_{}", r + 1)];
                row.extend(doc.matrix[r].iter().map(|v| v.to_string()));
                row.push(doc.marginals[r].to_string());
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# order-{} matrix — input: {}, n = {}",
                doc.order, doc.input, doc.n
            );
            let mut rows: Vec<Vec<String>> = Vec::with_capacity(n + 1);
            let mut header = vec![String::new()];
            header.extend((1..=n).map(|c| format!("f_{c}")));
            header.push(format!("| w_{},f", doc.order));
            rows.push(header);
            for r in 0..n {
                let mut row = vec![format!("f_{}", r + 1)];
                row.extend(doc.matrix[r].iter().map(|v| v.to_string()));
                row.push(format!("| {}", doc.marginals[r]));
                rows.push(row);
            }
            out.push_str(&format_columns(&rows));
            out
        }
    })
}

// ---- rank1 ----------------------------------------------------------------

#[derive(Serialize)]
struct RankDoc {
    input: String,
    entries: Vec<RankEntry>,
}

#[derive(Serialize)]
struct RankEntry {
    run: usize,
    gwlp_num: Vec<u64>,
    gwlp_den: u64,
}

fn rank1_command(file: &Path, format: OutputFormat) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let stack = build(&fraction)?;
    let ranked = rank_single_removals(&stack)?;
    let doc = RankDoc {
        input: input_name(file),
        entries: ranked
            .iter()
            .map(|(run, g)| RankEntry {
                run: *run,
                gwlp_num: g.numerators().to_vec(),
                gwlp_den: g.denominator(),
            })
            .collect(),
    };
    let m = fraction.space().factors();
    Ok(match format {
        OutputFormat::Json => to_json(&doc),
        OutputFormat::Csv => {
            let mut out = String::new();
            let header: Vec<String> = ["rank", "run"]
                .iter()
                .map(|s| s.to_string())
                .chain((1..=m).map(|j| format!("A_{j}")))
                .collect();
            let _ = writeln!(out, "{}", header.join(","));
            for (rank, entry) in doc.entries.iter().enumerate() {
                let mut row = vec![(rank + 1).to_string(), format!("f_{}", entry.run)];
                for j in 1..entry.gwlp_num.len() {
                    row.push(round3(entry.gwlp_num[j], entry.gwlp_den));
                }
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# single-removal ranking (best first) — input: {}",
                doc.input
            );
            let mut rows: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["rank".to_string(), "run".to_string()];
            header.extend((1..=m).map(|j| format!("A_{j}")));
            rows.push(header);
            for (rank, entry) in doc.entries.iter().enumerate() {
                let mut row = vec![(rank + 1).to_string(), format!("f_{}", entry.run)];
                for j in 1..entry.gwlp_num.len() {
                    row.push(round3(entry.gwlp_num[j], entry.gwlp_den));
                }
                rows.push(row);
            }
            out.push_str(&format_columns(&rows));
            out
        }
    })
}

// ---- remove ----------------------------------------------------------------

fn remove_command(
    file: &Path,
    p: usize,
    max_subsets: u64,
    reps: usize,
    format: OutputFormat,
) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let stack = build(&fraction)?;
    let options = SearchOptions {
        max_subsets,
        representatives_per_group: reps,
    };
    let report = exhaustive_search(&stack, p, &options)?;
    let doc = ReportDocument::new(input_name(file), &report);
    Ok(io::emit_report(&doc, format))
}

// ---- greedy ----------------------------------------------------------------

#[derive(Serialize)]
struct GreedyDoc {
    input: String,
    p: usize,
    first: Option<usize>,
    steps: Vec<GreedyStepDoc>,
}

#[derive(Serialize)]
struct GreedyStepDoc {
    step: usize,
    removed: usize,
    gwlp_num: Vec<u64>,
    gwlp_den: u64,
}

fn greedy_command(
    file: &Path,
    p: usize,
    first: Option<usize>,
    format: OutputFormat,
) -> Result<String, Error> {
    let fraction = load_fraction(file)?;
    let stack = build(&fraction)?;
    let steps = greedy_sequential(&stack, p, first)?;
    let doc = GreedyDoc {
        input: input_name(file),
        p,
        first,
        steps: steps
            .iter()
            .enumerate()
            .map(|(i, s)| GreedyStepDoc {
                step: i + 1,
                removed: s.removed,
                gwlp_num: s.gwlp.numerators().to_vec(),
                gwlp_den: s.gwlp.denominator(),
            })
            .collect(),
    };
    let m = fraction.space().factors();
    Ok(match format {
        OutputFormat::Json => to_json(&doc),
        OutputFormat::Csv => {
            let mut out = String::new();
            let header: Vec<String> = ["step", "removed"]
                .iter()
                .map(|s| s.to_string())
                .chain((1..=m).map(|j| format!("A_{j}")))
                .collect();
            let _ = writeln!(out, "{}", header.join(","));
            for s in &doc.steps {
                let mut row = vec![s.step.to_string(), format!("f_{}", s.removed)];
                for j in 1..s.gwlp_num.len() {
                    row.push(round3(s.gwlp_num[j], s.gwlp_den));
                }
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# greedy removal, one run per step — input: {}, p = {}",
                doc.input, doc.p
            );
            if let Some(f) = doc.first {
                let _ = writeln!(out, "# first pick forced to f_{f}");
            }
            let mut rows: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["step".to_string(), "removed".to_string()];
            header.extend((1..=m).map(|j| format!("A_{j}")));
            rows.push(header);
            for s in &doc.steps {
                let mut row = vec![s.step.to_string(), format!("f_{}", s.removed)];
                for j in 1..s.gwlp_num.len() {
                    row.push(round3(s.gwlp_num[j], s.gwlp_den));
                }
                rows.push(row);
            }
            out.push_str(&format_columns(&rows));
            out
        }
    })
}
