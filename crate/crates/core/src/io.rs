//! File ingestion, simulation spec files, and report emission.
//!
//! CSV outputs carry full `f64` precision (shortest round-trip form); text
//! renderings round to four decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::distributions::{SMParams, B0};
use crate::error::{Error, Result};
use crate::measures::{estimate, MeasureEstimate};
use crate::montecarlo::{DensityCurve, SimSpec, SizePowerCell, TestSpec};
use crate::resampling::{asymptotic_test, bootstrap_test, permutation_test, ResamplingSpec};
use crate::rng::Stream;
use crate::robust_tests::{group_estimates, two_sample_test, TestOutcome, Validity};
use crate::sample::{MeasureKind, Sample};
use crate::tail_index::{rank_size_estimate, TailEstimate};

/// Group-count pairs of the regional comparison layout.
pub const TABLE_A1_GROUPS: [(usize, usize); 15] = [
    (4, 4),
    (8, 8),
    (12, 12),
    (16, 16),
    (4, 3),
    (8, 6),
    (12, 9),
    (16, 12),
    (4, 2),
    (8, 4),
    (12, 6),
    (16, 8),
    (8, 2),
    (12, 3),
    (16, 4),
];

/// Level at which p-values are flagged in comparison reports.
pub const MARKER_LEVEL: f64 = 0.05;

/// Column selector: a 0-based index or a header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

/// Digits select a 1-based column; anything else names a header.
impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Usage("empty column selector".into()));
        }
        match s.parse::<usize>() {
            Ok(0) => Err(Error::Usage("columns are numbered from 1".into())),
            Ok(i) => Ok(Column::Index(i - 1)),
            Err(_) => Ok(Column::Name(s.to_string())),
        }
    }
}

/// A delimited text table holding one income per row.
#[derive(Debug, Clone, PartialEq)]
pub struct IncomeFile {
    pub path: PathBuf,
    pub column: Column,
    /// Optional column dividing each income, such as household size.
    pub divisor: Option<Column>,
    pub delimiter: u8,
    /// Drop unparseable rows (reported in the summary) instead of failing.
    pub skip_invalid: bool,
}

impl IncomeFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        IncomeFile {
            path: path.into(),
            column: Column::Index(0),
            divisor: None,
            delimiter: b',',
            skip_invalid: false,
        }
    }

    /// Read the file; the sample is labelled with the file name and
    /// diagnostics carry the full path.
    pub fn read(&self) -> Result<(Sample, ParseSummary)> {
        let name = self.path.display().to_string();
        let file = std::fs::File::open(&self.path).map_err(|e| Error::Io(format!("{name}: {e}")))?;
        let (s, summary) = self.read_from(file, &name)?;
        let label = self.path.file_name().map_or(name, |f| f.to_string_lossy().into_owned());
        Ok((Sample::new(s.into_values(), label)?, summary))
    }

    /// Parse from any reader; `name` labels diagnostics and the sample.
    pub fn read_from<R: Read>(&self, reader: R, name: &str) -> Result<(Sample, ParseSummary)> {
        let data_err = |row: usize, message: String| Error::Data {
            path: name.to_string(),
            row,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(self.delimiter)
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);

        let mut records = rdr.records().peekable();
        let mut header: Option<csv::StringRecord> = None;
        let needs_header = matches!(self.column, Column::Name(_))
            || matches!(self.divisor, Some(Column::Name(_)));
        if let Some(Ok(first)) = records.peek() {
            let probe = match &self.column {
                Column::Index(i) => first.get(*i),
                Column::Name(_) => None,
            };
            if needs_header || probe.is_some_and(|f| f.parse::<f64>().is_err()) {
                header = records.next().transpose().map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        let resolve = |c: &Column| -> Result<usize> {
            match c {
                Column::Index(i) => Ok(*i),
                Column::Name(n) => header
                    .as_ref()
                    .and_then(|h| h.iter().position(|f| f == n))
                    .ok_or_else(|| data_err(1, format!("no column named '{n}'"))),
            }
        };
        let col = resolve(&self.column)?;
        let div = self.divisor.as_ref().map(resolve).transpose()?;

        let mut values = Vec::new();
        let mut summary = ParseSummary::default();
        for rec in records {
            let rec = rec.map_err(|e| {
                let row = e.position().map_or(0, |p| p.line() as usize);
                data_err(row, e.to_string())
            })?;
            let row = rec.position().map_or(0, |p| p.line() as usize);
            summary.rows += 1;
            match parse_row(&rec, col, div) {
                Ok(v) => values.push(v),
                Err(message) if self.skip_invalid => {
                    summary.skipped += 1;
                    summary.first_skipped.get_or_insert((row, message));
                }
                Err(message) => return Err(data_err(row, message)),
            }
        }
        if values.is_empty() {
            return Err(Error::InsufficientData(format!("{name}: no usable observations")));
        }
        Ok((Sample::new(values, name)?, summary))
    }
}

fn parse_row(rec: &csv::StringRecord, col: usize, div: Option<usize>) -> std::result::Result<f64, String> {
    let field = |i: usize| -> std::result::Result<f64, String> {
        let raw = rec.get(i).ok_or_else(|| format!("missing column {}", i + 1))?;
        let v: f64 = raw.parse().map_err(|_| format!("cannot parse '{raw}' as a number"))?;
        if !v.is_finite() {
            return Err(format!("non-finite value '{raw}'"));
        }
        Ok(v)
    };
    let mut v = field(col)?;
    if let Some(d) = div {
        let size = field(d)?;
        if size <= 0.0 {
            return Err(format!("divisor {size} is not positive"));
        }
        v /= size;
    }
    if v <= 0.0 {
        return Err(format!("income {v} is not positive"));
    }
    Ok(v)
}

/// Row accounting of one file read.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseSummary {
    pub rows: usize,
    pub skipped: usize,
    /// Line number and reason of the first dropped row.
    pub first_skipped: Option<(usize, String)>,
}

impl ParseSummary {
    /// One-line account of dropped rows, if any were dropped.
    pub fn summary_line(&self, name: &str) -> Option<String> {
        self.first_skipped.as_ref().map(|(row, why)| {
            format!(
                "{name}: skipped {} of {} rows (first at line {row}: {why})",
                self.skipped, self.rows
            )
        })
    }
}

/// Shortest string that parses back to the same `f64`.
pub fn fmt_full(x: f64) -> String {
    format!("{x:?}")
}

/// Four-decimal rendering used by all text output.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map_or_else(|| "NA".into(), f)
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("cannot parse {what} '{s}' as a number")))
}

const CELL_HEADER: [&str; 8] = [
    "table",
    "test",
    "name",
    "rejection_rate",
    "mc_se",
    "rejections",
    "replications",
    "size_adjusted",
];

/// Write size/power cells as CSV, one row per (table, test).
pub fn write_cells_csv<W: Write>(out: W, tables: &[(String, Vec<SizePowerCell>)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CELL_HEADER).map_err(csv_err)?;
    for (label, cells) in tables {
        for c in cells {
            w.write_record([
                label.clone(),
                c.test.code(),
                c.test.to_string(),
                fmt_full(c.rejection_rate),
                fmt_opt(c.mc_se, fmt_full),
                c.rejections.to_string(),
                c.replications.to_string(),
                c.size_adjusted.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read back a file written by [`write_cells_csv`].
pub fn read_cells_csv<R: Read>(input: R) -> Result<Vec<(String, Vec<SizePowerCell>)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut tables: Vec<(String, Vec<SizePowerCell>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |m: String| Error::Data {
            path: "cells".into(),
            row,
            message: m,
        };
        if rec.len() != CELL_HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", CELL_HEADER.len(), rec.len())));
        }
        let num = |i: usize| -> Result<f64> { parse_f64(&rec[i], CELL_HEADER[i]).map_err(|e| bad(e.to_string())) };
        let int = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| bad(format!("bad {} '{}'", CELL_HEADER[i], &rec[i])))
        };
        let cell = SizePowerCell {
            test: rec[1].parse().map_err(|e: Error| bad(e.to_string()))?,
            rejection_rate: num(3)?,
            mc_se: if &rec[4] == "NA" { None } else { Some(num(4)?) },
            rejections: int(5)?,
            replications: int(6)?,
            size_adjusted: rec[7].parse().map_err(|_| bad(format!("bad flag '{}'", &rec[7])))?,
        };
        match tables.last_mut() {
            Some((label, cells)) if label == &rec[0] => cells.push(cell),
            _ => tables.push((rec[0].to_string(), vec![cell])),
        }
    }
    Ok(tables)
}

/// Aligned text: one column per table, one row per test.
pub fn render_cells_text(tables: &[(String, Vec<SizePowerCell>)]) -> String {
    let mut rows: Vec<TestSpec> = Vec::new();
    for (_, cells) in tables {
        for c in cells {
            if !rows.contains(&c.test) {
                rows.push(c.test);
            }
        }
    }
    let names: Vec<String> = rows.iter().map(|t| t.to_string()).collect();
    let first = names.iter().map(|n| n.len()).max().unwrap_or(4).max(4);
    let widths: Vec<usize> = tables.iter().map(|(l, _)| l.len().max(9)).collect();
    let mut s = String::new();
    let _ = write!(s, "{:<first$}", "test");
    for ((label, _), w) in tables.iter().zip(&widths) {
        let _ = write!(s, "  {label:>w$}");
    }
    s.push('\n');
    for (t, name) in rows.iter().zip(&names) {
        let _ = write!(s, "{name:<first$}");
        for ((_, cells), w) in tables.iter().zip(&widths) {
            let v = cells
                .iter()
                .find(|c| c.test == *t)
                .map_or_else(|| "-".into(), |c| fmt4(c.rejection_rate));
            let _ = write!(s, "  {v:>w$}");
        }
        s.push('\n');
    }
    s
}

/// Two-column CSV (`grid,density`) of one curve.
pub fn write_density_csv<W: Write>(out: W, curve: &DensityCurve) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["grid", "density"]).map_err(csv_err)?;
    for (x, d) in curve.grid.iter().zip(&curve.density) {
        w.write_record([fmt_full(*x), fmt_full(*d)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Write each curve to `<dir>/<label>.csv`, creating `dir` if needed.
pub fn write_density_dir(dir: &Path, curves: &[DensityCurve]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(curves.len());
    for c in curves {
        let p = dir.join(format!("{}.csv", c.label()));
        write_density_csv(std::fs::File::create(&p)?, c)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::spec(format!("line {}: expected key = value, found '{line}'", i + 1))
        })?;
        let key = k.trim().to_ascii_lowercase();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::spec(format!("line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

/// Keys accepted in simulation spec files.
pub const SPEC_KEYS: [&str; 17] = [
    "label", "measure", "a_i", "b_i", "c_i", "a_y", "b_y", "c_y", "n", "n1", "n2", "tests", "alpha",
    "reps", "seed", "hypothesis", "d0",
];

/// Build a design from key-value pairs. `a_i`, `c_i` and `n` (or `n1`) are
/// required; `a_y`/`c_y` make it two-sample; scales default to `b0`;
/// `tests` is a `;`- or space-separated roster.
pub fn sim_spec_from_map(map: &BTreeMap<String, String>) -> Result<SimSpec> {
    if let Some(k) = map.keys().find(|k| !SPEC_KEYS.contains(&k.as_str())) {
        return Err(Error::spec(format!("unknown key '{k}'; known keys: {}", SPEC_KEYS.join(", "))));
    }
    let get = |k: &str| map.get(k).map(String::as_str);
    let num = |k: &str| get(k).map(|v| parse_f64(v, k).map_err(|e| Error::spec(e.to_string()))).transpose();
    let int = |k: &str| -> Result<Option<u64>> {
        get(k)
            .map(|v| v.trim().parse::<u64>().map_err(|_| Error::spec(format!("bad integer for {k}: '{v}'"))))
            .transpose()
    };
    let require = |k: &str| -> Result<f64> { num(k)?.ok_or_else(|| Error::spec(format!("missing key '{k}'"))) };

    let gen_i = SMParams::new(require("a_i")?, num("b_i")?.unwrap_or(B0), require("c_i")?)?;
    let generator_y = match (num("a_y")?, num("c_y")?) {
        (Some(a), Some(c)) => Some(SMParams::new(a, num("b_y")?.unwrap_or(B0), c)?),
        (None, None) => None,
        _ => return Err(Error::spec("a_y and c_y must be given together")),
    };
    let n = int("n")?;
    let n1 = int("n1")?.or(n).ok_or_else(|| Error::spec("missing key 'n' or 'n1'"))? as usize;
    let n2 = int("n2")?.or(n).map_or(n1, |v| v as usize);
    let measure = get("measure").map_or(Ok(MeasureKind::Gini), |m| m.parse())?;
    let tests = match get("tests") {
        Some(t) => t
            .split(|c: char| c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(TestSpec::from_str)
            .collect::<Result<Vec<_>>>()?,
        None if generator_y.is_some() => vec![TestSpec::Asymptotic, TestSpec::TwoSample { q1: 4, q2: 4 }],
        None => vec![TestSpec::Asymptotic, TestSpec::OneSample { q: 4 }],
    };
    let hypothesis = match (num("hypothesis")?, num("d0")?) {
        (Some(_), Some(_)) => return Err(Error::spec("give only one of hypothesis and d0")),
        (h, d) => h.or(d),
    };
    let spec = SimSpec {
        label: get("label").unwrap_or("spec").to_string(),
        generator_i: gen_i,
        generator_y,
        n1,
        n2,
        measure,
        tests,
        alpha: num("alpha")?.unwrap_or(0.05),
        replications: int("reps")?.map_or(crate::montecarlo::DEFAULT_REPLICATIONS, |v| v as usize),
        seed: int("seed")?.unwrap_or(1),
        hypothesis,
    };
    spec.validate()?;
    Ok(spec)
}

/// Options of a two-region comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub measure: MeasureKind,
    pub q_pairs: Vec<(usize, usize)>,
    pub alpha: f64,
    /// Hypothesized difference `L_I - L_Y`.
    pub d0: f64,
    /// Permutation resamples; `None` leaves the test out.
    pub perm_b: Option<usize>,
    /// Bootstrap resamples; `None` leaves the test out.
    pub boot_b: Option<usize>,
    pub tail_fraction: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            measure: MeasureKind::Gini,
            q_pairs: TABLE_A1_GROUPS.to_vec(),
            alpha: 0.05,
            d0: 0.0,
            perm_b: Some(crate::resampling::DEFAULT_RESAMPLES),
            boot_b: Some(crate::resampling::DEFAULT_RESAMPLES),
            tail_fraction: 0.05,
        }
    }
}

/// One test of a comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    /// Test name: `asymptotic`, `t2(...)`, `permutation`, `bootstrap`.
    pub test: String,
    pub q1: Option<usize>,
    pub q2: Option<usize>,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub validity: Validity,
}

impl ComparisonRow {
    fn new(test: TestSpec, q: Option<(usize, usize)>, o: &TestOutcome) -> Self {
        ComparisonRow {
            test: test.to_string(),
            q1: q.map(|p| p.0),
            q2: q.map(|p| p.1),
            statistic: o.statistic,
            p_value: o.p_value,
            reject: o.reject,
            validity: o.validity,
        }
    }

    /// Whether the p-value carries the significance marker.
    pub fn marked(&self) -> bool {
        self.p_value <= MARKER_LEVEL
    }
}

/// Two-region comparison: estimates, tail indices and one row per test.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionComparison {
    pub label_i: String,
    pub label_y: String,
    pub measure: MeasureKind,
    pub estimate_i: MeasureEstimate,
    pub estimate_y: MeasureEstimate,
    /// `None` when the sample is too small or too flat for the regression.
    pub tail_i: Option<TailEstimate>,
    pub tail_y: Option<TailEstimate>,
    pub n1: usize,
    pub n2: usize,
    pub rows: Vec<ComparisonRow>,
}

impl RegionComparison {
    /// Rows follow the layout asymptotic, each `(q1, q2)`, permutation,
    /// bootstrap. Resampling draws come from children 0 and 1 of `stream`.
    pub fn build(si: &Sample, sy: &Sample, cfg: &CompareConfig, stream: &Stream) -> Result<Self> {
        if cfg.perm_b.is_some() && cfg.d0 != 0.0 {
            return Err(Error::spec("the permutation test only applies to d0 = 0"));
        }
        let est_i = estimate(si, cfg.measure)?;
        let est_y = estimate(sy, cfg.measure)?;
        let mut rows = Vec::new();
        let asym = asymptotic_test(&est_i, &est_y, cfg.d0, cfg.alpha)?;
        rows.push(ComparisonRow::new(TestSpec::Asymptotic, None, &asym));
        for &(q1, q2) in &cfg.q_pairs {
            let gi = group_estimates(si, cfg.measure, q1)?;
            let gy = group_estimates(sy, cfg.measure, q2)?;
            let o = two_sample_test(&gi, &gy, cfg.d0, cfg.alpha)?;
            rows.push(ComparisonRow::new(TestSpec::TwoSample { q1, q2 }, Some((q1, q2)), &o));
        }
        if let Some(b) = cfg.perm_b {
            let o = permutation_test(si, sy, cfg.measure, cfg.alpha, &ResamplingSpec::permutation(b, stream.child(0)))?;
            rows.push(ComparisonRow::new(TestSpec::Permutation { b }, None, &o));
        }
        if let Some(b) = cfg.boot_b {
            let o = bootstrap_test(si, sy, cfg.measure, cfg.d0, cfg.alpha, &ResamplingSpec::bootstrap(b, stream.child(1)))?;
            rows.push(ComparisonRow::new(TestSpec::Bootstrap { b }, None, &o));
        }
        Ok(RegionComparison {
            label_i: si.label().to_string(),
            label_y: sy.label().to_string(),
            measure: cfg.measure,
            estimate_i: est_i,
            estimate_y: est_y,
            tail_i: rank_size_estimate(si, cfg.tail_fraction).ok(),
            tail_y: rank_size_estimate(sy, cfg.tail_fraction).ok(),
            n1: si.len(),
            n2: sy.len(),
            rows,
        })
    }

    pub fn size_ratio(&self) -> f64 {
        self.n1 as f64 / self.n2 as f64
    }

    /// Summary lines followed by the test table. In `layout_a1` mode
    /// p-values are printed to two decimals.
    pub fn render_text(&self, layout_a1: bool) -> String {
        let mut s = String::new();
        let tail = |t: &Option<TailEstimate>| {
            t.map_or_else(
                || "NA".to_string(),
                |t| format!("{} (95% CI {}, {})", fmt4(t.zeta), fmt4(t.ci95.0), fmt4(t.ci95.1)),
            )
        };
        for (label, est, n, t) in [
            (&self.label_i, &self.estimate_i, self.n1, &self.tail_i),
            (&self.label_y, &self.estimate_y, self.n2, &self.tail_y),
        ] {
            let _ = writeln!(
                s,
                "{label}: {} {} (se {}), N = {n}, tail index {}",
                self.measure,
                fmt4(est.value),
                fmt4(est.se),
                tail(t)
            );
        }
        let _ = writeln!(s, "N1/N2 = {}", fmt4(self.size_ratio()));
        let width = self.rows.iter().map(|r| r.test.len()).max().unwrap_or(4).max(4);
        let _ = writeln!(s, "{:<width$}  {:>10}  {:>8}  {:>6}  validity", "test", "statistic", "p", "p<=.05");
        for r in &self.rows {
            let p = if layout_a1 { format!("{:.2}", r.p_value) } else { fmt4(r.p_value) };
            let _ = writeln!(
                s,
                "{:<width$}  {:>10}  {:>8}  {:>6}  {}",
                r.test,
                fmt4(r.statistic),
                p,
                if r.marked() { "*" } else { "" },
                r.validity
            );
        }
        s
    }

    /// Test rows as CSV with full precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["test", "q1", "q2", "statistic", "p_value", "reject", "validity", "marked"])
            .map_err(csv_err)?;
        let opt = |q: Option<usize>| q.map_or_else(String::new, |v| v.to_string());
        for r in &self.rows {
            w.write_record([
                r.test.clone(),
                opt(r.q1),
                opt(r.q2),
                fmt_full(r.statistic),
                fmt_full(r.p_value),
                r.reject.to_string(),
                r.validity.to_string(),
                r.marked().to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
