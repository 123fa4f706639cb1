//! Design file parsing and report serialization.
//!
//! The design file format is plain UTF-8 text: the first significant line is
//! `n m`, the second holds the `m` level counts, and the next `n` lines hold
//! one run each as `m` space-separated level codes. Lines starting with `#`
//! are comments; blank lines are ignored. Duplicate rows are allowed (the
//! fraction is a multiset) and keep their own line-order indices.

use crate::design::Fraction;
use crate::error::{Error, Result};
use crate::removal::RemovalReport;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Header of a design file: run count, factor count, level counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OaFileHeader {
    pub n: usize,
    pub m: usize,
    pub levels: Vec<u32>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

fn parse_ints(line_no: usize, line: &str, expected: usize, what: &str) -> Result<Vec<u64>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != expected {
        return Err(parse_err(
            line_no,
            format!("expected {expected} {what}, found {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| parse_err(line_no, format!("'{tok}' is not a nonnegative integer")))
        })
        .collect()
}

/// Parse a design file into a fraction, preserving row order.
pub fn parse_oa_file(text: &str) -> Result<Fraction> {
    let (header, runs) = parse_oa_parts(text)?;
    let space =
        crate::design::DesignSpace::new(header.levels).map_err(|e| parse_err(0, e.to_string()))?;
    Fraction::new(space, runs)
}

fn parse_oa_parts(text: &str) -> Result<(OaFileHeader, Vec<crate::design::Run>)> {
    let mut lines = significant_lines(text);

    let (line_no, header_line) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty input; expected a 'n m' header"))?;
    let header = parse_ints(line_no, header_line, 2, "header fields (n m)")?;
    let n = header[0] as usize;
    let m = header[1] as usize;
    if n == 0 || m == 0 {
        return Err(parse_err(line_no, "n and m must both be positive"));
    }

    let (line_no, level_line) = lines
        .next()
        .ok_or_else(|| parse_err(line_no, "missing level line"))?;
    let levels64 = parse_ints(line_no, level_line, m, "level counts")?;
    let mut levels = Vec::with_capacity(m);
    for (j, &s) in levels64.iter().enumerate() {
        if !(2..=u64::from(u32::MAX)).contains(&s) {
            return Err(parse_err(
                line_no,
                format!("factor {} needs at least 2 levels, found {s}", j + 1),
            ));
        }
        levels.push(s as u32);
    }

    let mut runs = Vec::with_capacity(n);
    let mut last_line = line_no;
    for (line_no, row_line) in lines.by_ref() {
        if runs.len() == n {
            return Err(parse_err(
                line_no,
                format!("unexpected content after {n} runs"),
            ));
        }
        let codes64 = parse_ints(line_no, row_line, m, "level codes")?;
        let mut codes = Vec::with_capacity(m);
        for (j, &c) in codes64.iter().enumerate() {
            if c >= u64::from(levels[j]) {
                return Err(parse_err(
                    line_no,
                    format!(
                        "code {c} out of range for factor {} with {} levels",
                        j + 1,
                        levels[j]
                    ),
                ));
            }
            codes.push(c as u32);
        }
        runs.push(crate::design::Run::new(codes));
        last_line = line_no;
    }
    if runs.len() != n {
        return Err(parse_err(
            last_line,
            format!("expected {n} runs, found {}", runs.len()),
        ));
    }
    Ok((OaFileHeader { n, m, levels }, runs))
}

/// Canonical design file for a fraction: header, levels, then the expanded
/// run sequence one row per line. Parsing the output reproduces the fraction.
pub fn write_oa_file(fraction: &Fraction) -> String {
    let mut out = String::new();
    let levels: Vec<String> = fraction
        .space()
        .levels()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let _ = writeln!(out, "{} {}", fraction.n(), fraction.space().factors());
    let _ = writeln!(out, "{}", levels.join(" "));
    for run in fraction.expanded() {
        let _ = writeln!(out, "{run}");
    }
    out
}

/// Render the exact rational `num/den` with three decimals, rounding halves
/// up. Matches the rounding used in the report tables.
pub fn round3(num: u64, den: u64) -> String {
    let scaled = u128::from(num) * 1000;
    let den = u128::from(den);
    let mut q = scaled / den;
    let r = scaled % den;
    if 2 * r >= den {
        q += 1;
    }
    format!("{}.{:03}", q / 1000, q % 1000)
}

/// Output format for report emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// How numeric cells of a serialized report are rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rendering {
    /// Exact numerator/denominator pairs (JSON).
    Exact,
    /// Three decimals, halves rounded up (text and CSV tables).
    Rounded3,
}

impl OutputFormat {
    pub fn rendering(self) -> Rendering {
        match self {
            OutputFormat::Json => Rendering::Exact,
            OutputFormat::Text | OutputFormat::Csv => Rendering::Rounded3,
        }
    }
}

/// One group row of a removal report document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportGroup {
    pub count: u64,
    pub gwlp_num: Vec<u64>,
    pub gwlp_den: u64,
    pub representatives: Vec<Vec<usize>>,
}

/// Serializable removal report. The JSON field set and order are stable:
/// `input`, `p`, `total_subsets`, `groups`, each group carrying `count`,
/// `gwlp_num`, `gwlp_den`, `representatives` (1-based run indices). Exact
/// rationals are always present here; rounded values exist only in the text
/// and CSV renderings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub input: String,
    pub p: usize,
    pub total_subsets: u64,
    pub groups: Vec<ReportGroup>,
}

impl ReportDocument {
    pub fn new(input: impl Into<String>, report: &RemovalReport) -> Self {
        ReportDocument {
            input: input.into(),
            p: report.p,
            total_subsets: report.total_subsets,
            groups: report
                .groups
                .iter()
                .map(|g| ReportGroup {
                    count: g.count,
                    gwlp_num: g.gwlp.numerators().to_vec(),
                    gwlp_den: g.gwlp.denominator(),
                    representatives: g.representatives.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }

    fn orders(&self) -> usize {
        self.groups.first().map_or(0, |g| g.gwlp_num.len())
    }
}

/// Serialize a report document. Deterministic for every format; JSON carries
/// the exact rationals, text and CSV render three decimals.
pub fn emit_report(doc: &ReportDocument, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut out = serde_json::to_string_pretty(doc).expect("report serialization");
            out.push('\n');
            out
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            let m = doc.orders().saturating_sub(1);
            let header: Vec<String> = ["p", "N"]
                .iter()
                .map(|s| s.to_string())
                .chain((1..=m).map(|j| format!("A_{j}")))
                .collect();
            let _ = writeln!(out, "{}", header.join(","));
            for group in &doc.groups {
                let mut row = vec![doc.p.to_string(), group.count.to_string()];
                for j in 1..group.gwlp_num.len() {
                    row.push(round3(group.gwlp_num[j], group.gwlp_den));
                }
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# removal report — engine {}",
                env!("CARGO_PKG_VERSION")
            );
            let _ = writeln!(out, "# input: {}", doc.input);
            let _ = writeln!(
                out,
                "# p = {}, subsets evaluated = {}, distinct patterns = {}",
                doc.p,
                doc.total_subsets,
                doc.groups.len()
            );
            let _ = writeln!(
                out,
                "# values rounded to 3 decimals; exact rationals in the json format"
            );
            let m = doc.orders().saturating_sub(1);
            let mut header = vec!["p".to_string(), "N".to_string()];
            header.extend((1..=m).map(|j| format!("A_{j}")));
            header.push("representatives".to_string());
            let mut rows: Vec<Vec<String>> = vec![header];
            for group in &doc.groups {
                let mut row = vec![doc.p.to_string(), group.count.to_string()];
                for j in 1..group.gwlp_num.len() {
                    row.push(round3(group.gwlp_num[j], group.gwlp_den));
                }
                let reps: Vec<String> = group
                    .representatives
                    .iter()
                    .map(|r| {
                        let inner: Vec<String> = r.iter().map(|i| format!("f{i}")).collect();
                        format!("{{{}}}", inner.join(","))
                    })
                    .collect();
                row.push(reps.join(" "));
                rows.push(row);
            }
            out.push_str(&format_columns(&rows));
            out
        }
    }
}

/// Align rows of cells into right-padded columns (last column left as-is).
pub fn format_columns(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i + 1 < row.len() {
                widths[i] = widths[i].max(cell.len());
            }
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i + 1 < row.len() {
                let _ = write!(line, "{cell:<width$}  ", width = widths[i]);
            } else {
                line.push_str(cell);
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out
}
