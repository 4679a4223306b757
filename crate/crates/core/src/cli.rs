//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or specification error, 2 data error,
//! 3 numeric or degenerate error.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{
    fmt4, fmt_full, parse_key_values, render_cells_text, sim_spec_from_map, write_cells_csv,
    write_density_dir, Column, CompareConfig, IncomeFile, RegionComparison, TABLE_A1_GROUPS,
};
use crate::measures::estimate;
use crate::montecarlo::{find_preset, preset_catalog, run_size_experiment, with_threads};
use crate::montecarlo::presets::PresetResult;
use crate::rng::Stream;
use crate::robust_tests::{group_estimates, one_sample_test_with, Alternative, TestOutcome};
use crate::sample::{MeasureKind, Sample};
use crate::tail_index::{rank_size_estimate_with, TailTruncation};

/// Environment variable holding the default worker cap.
pub const THREADS_ENV: &str = "ROBUST_INEQ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "robust-ineq", version, about = "Robust inference on inequality measures")]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimate and standard error of an inequality measure.
    Measure {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "gini")]
        measure: MeasureKind,
        /// Also write the result as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-sample group t-test of `H0: L = L0`.
    TestOne {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "gini")]
        measure: MeasureKind,
        #[arg(long)]
        q: usize,
        /// Hypothesized level of the measure.
        #[arg(long = "l0", alias = "d0")]
        l0: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = AlternativeArg::TwoSided)]
        alternative: AlternativeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two samples with the asymptotic, group t, permutation and
    /// bootstrap tests.
    Compare {
        file_i: PathBuf,
        file_y: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "gini")]
        measure: MeasureKind,
        /// Equal group counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        q: Vec<usize>,
        /// Group counts for the first sample, paired with `--q2`.
        #[arg(long, value_delimiter = ',')]
        q1: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        q2: Vec<usize>,
        /// Use the fifteen regional-comparison group pairs and two-decimal p-values.
        #[arg(long = "table-a1")]
        table_a1: bool,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        d0: f64,
        /// Permutation resamples; 0 leaves the test out.
        #[arg(long = "perm-B", default_value_t = crate::resampling::DEFAULT_RESAMPLES)]
        perm_b: usize,
        /// Bootstrap resamples; 0 leaves the test out.
        #[arg(long = "boot-B", default_value_t = crate::resampling::DEFAULT_RESAMPLES)]
        boot_b: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long = "tail-fraction", default_value_t = 0.05)]
        tail_fraction: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named simulation preset or a key = value spec file.
    Simulate {
        /// Preset name or path to a spec file; omit with `--list`.
        target: Option<String>,
        /// List the preset catalog.
        #[arg(long)]
        list: bool,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Resamples for permutation tests.
        #[arg(long = "perm-B")]
        perm_b: Option<usize>,
        #[arg(long = "boot-B")]
        boot_b: Option<usize>,
        /// Spec files only.
        #[arg(long)]
        measure: Option<MeasureKind>,
        /// Spec files only: hypothesized difference or level.
        #[arg(long)]
        d0: Option<f64>,
        /// Spec files only: override any key, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// CSV file for tables; a directory when the run produces densities.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-size tail-index estimate.
    Tailindex {
        file: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "tail-fraction", default_value_t = 0.05)]
        tail_fraction: f64,
        /// Regress over the observations just below the top fraction.
        #[arg(long = "discard-top")]
        discard_top: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Income column: 1-based index or header name.
    #[arg(long, default_value = "1")]
    pub column: Column,
    /// Column dividing each income, such as household size.
    #[arg(long)]
    pub divisor: Option<Column>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Drop unparseable or non-positive rows instead of failing.
    #[arg(long = "skip-invalid")]
    pub skip_invalid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::TwoSided => Alternative::TwoSided,
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
        }
    }
}

impl InputArgs {
    fn load(&self, path: &Path, diag: &mut dyn Write) -> Result<Sample> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Usage(format!("delimiter '{}' is not ASCII", self.delimiter)));
        }
        let f = IncomeFile {
            path: path.to_path_buf(),
            column: self.column.clone(),
            divisor: self.divisor.clone(),
            delimiter: self.delimiter as u8,
            skip_invalid: self.skip_invalid,
        };
        let (s, summary) = f.read()?;
        if let Some(line) = summary.summary_line(&path.display().to_string()) {
            writeln!(diag, "{line}")?;
        }
        Ok(s)
    }
}

/// Parse `args`, run, and write human output to `out` and diagnostics to
/// `diag`. Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, diag: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(diag, "{}", e.render())
            };
            return code;
        }
    };
    match run(&cli, out, diag) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Measure { file, input, measure, out: csv } => {
            let s = input.load(file, diag)?;
            let e = estimate(&s, *measure)?;
            writeln!(out, "measure: {measure}")?;
            writeln!(out, "value: {}", fmt4(e.value))?;
            writeln!(out, "se: {}", fmt4(e.se))?;
            writeln!(out, "n: {}", e.n)?;
            if let Some(p) = csv {
                write_rows(
                    p,
                    &["measure", "value", "se", "n"],
                    &[vec![measure.short_name(), fmt_full(e.value), fmt_full(e.se), e.n.to_string()]],
                )?;
            }
        }
        Command::TestOne { file, input, measure, q, l0, alpha, alternative, out: csv } => {
            let s = input.load(file, diag)?;
            let g = group_estimates(&s, *measure, *q)?;
            let o = one_sample_test_with(&g, *l0, *alpha, (*alternative).into())?;
            writeln!(out, "measure: {measure}")?;
            writeln!(out, "q: {q}")?;
            writeln!(out, "l0: {}", fmt4(*l0))?;
            print_outcome(out, &o)?;
            if let Some(p) = csv {
                write_outcome_csv(p, &o)?;
            }
        }
        Command::Compare {
            file_i,
            file_y,
            input,
            measure,
            q,
            q1,
            q2,
            table_a1,
            alpha,
            d0,
            perm_b,
            boot_b,
            seed,
            tail_fraction,
            out: csv,
        } => {
            if q1.len() != q2.len() {
                return Err(Error::Usage("--q1 and --q2 need the same number of entries".into()));
            }
            let mut pairs: Vec<(usize, usize)> = q.iter().map(|&v| (v, v)).collect();
            pairs.extend(q1.iter().copied().zip(q2.iter().copied()));
            if *table_a1 {
                pairs.extend(TABLE_A1_GROUPS);
            }
            if pairs.is_empty() {
                pairs = vec![(4, 4), (8, 8), (12, 12), (16, 16)];
            }
            let si = input.load(file_i, diag)?;
            let sy = input.load(file_y, diag)?;
            let cfg = CompareConfig {
                measure: *measure,
                q_pairs: pairs,
                alpha: *alpha,
                d0: *d0,
                perm_b: (*perm_b > 0).then_some(*perm_b),
                boot_b: (*boot_b > 0).then_some(*boot_b),
                tail_fraction: *tail_fraction,
            };
            let report = RegionComparison::build(&si, &sy, &cfg, &Stream::from_seed(*seed))?;
            write!(out, "{}", report.render_text(*table_a1))?;
            if let Some(p) = csv {
                report.write_csv(create(p)?)?;
            }
        }
        Command::Simulate { target, list, reps, seed, alpha, perm_b, boot_b, measure, d0, set, out: dest } => {
            if *list {
                for p in preset_catalog() {
                    writeln!(out, "{:<36} {}", p.name, p.description)?;
                }
                return Ok(());
            }
            let target = target
                .as_deref()
                .ok_or_else(|| Error::Usage("simulate needs a preset name or spec file (or --list)".into()))?;
            let result = if Path::new(target).is_file() {
                let text = std::fs::read_to_string(target)?;
                let mut map = parse_key_values(&text)?;
                let mut put = |k: &str, v: Option<String>| {
                    if let Some(v) = v {
                        map.insert(k.to_string(), v);
                    }
                };
                put("reps", reps.map(|v| v.to_string()));
                put("seed", seed.map(|v| v.to_string()));
                put("alpha", alpha.map(fmt_full));
                put("measure", measure.map(|m| m.short_name()));
                if let Some(d) = d0 {
                    map.remove("hypothesis");
                    map.insert("d0".into(), fmt_full(*d));
                }
                for kv in set {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
                    map.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
                }
                let mut spec = sim_spec_from_map(&map)?;
                for t in &mut spec.tests {
                    match t {
                        crate::montecarlo::TestSpec::Permutation { b } => *b = perm_b.unwrap_or(*b),
                        crate::montecarlo::TestSpec::Bootstrap { b } => *b = boot_b.unwrap_or(*b),
                        _ => {}
                    }
                }
                let cells = with_threads(cli.threads, || run_size_experiment(&spec))??;
                PresetResult { tables: vec![(spec.label.clone(), cells)], densities: Vec::new() }
            } else {
                if !set.is_empty() || measure.is_some() || d0.is_some() {
                    return Err(Error::Usage("--set, --measure and --d0 apply to spec files only".into()));
                }
                let mut preset = find_preset(target)?;
                if let Some(r) = reps {
                    preset = preset.with_replications(*r);
                }
                if let Some(s) = seed {
                    preset = preset.with_seed(*s);
                }
                if let Some(a) = alpha {
                    preset = preset.with_alpha(*a);
                }
                if let Some(b) = perm_b {
                    preset = preset.with_permutation_resamples(*b);
                }
                if let Some(b) = boot_b {
                    preset = preset.with_bootstrap_resamples(*b);
                }
                with_threads(cli.threads, || preset.run())??
            };
            emit_simulation(&result, dest.as_deref(), out)?;
        }
        Command::Tailindex { file, input, tail_fraction, discard_top, out: csv } => {
            let s = input.load(file, diag)?;
            let truncation = if *discard_top { TailTruncation::DiscardTop } else { TailTruncation::TopAsTail };
            let t = rank_size_estimate_with(&s, *tail_fraction, truncation)?;
            writeln!(out, "zeta: {}", fmt4(t.zeta))?;
            writeln!(out, "se: {}", fmt4(t.se))?;
            writeln!(out, "k: {}", t.k)?;
            writeln!(out, "ci95: [{}, {}]", fmt4(t.ci95.0), fmt4(t.ci95.1))?;
            if let Some(p) = csv {
                write_rows(
                    p,
                    &["zeta", "se", "k", "ci_low", "ci_high"],
                    &[vec![fmt_full(t.zeta), fmt_full(t.se), t.k.to_string(), fmt_full(t.ci95.0), fmt_full(t.ci95.1)]],
                )?;
            }
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn print_outcome(out: &mut dyn Write, o: &TestOutcome) -> Result<()> {
    writeln!(out, "statistic: {}", fmt4(o.statistic))?;
    if let Some(df) = o.df {
        writeln!(out, "df: {df}")?;
    }
    if let Some(c) = o.critical_value {
        writeln!(out, "critical value: {}", fmt4(c))?;
    }
    writeln!(out, "p-value: {}", fmt4(o.p_value))?;
    if let Some((lo, hi)) = o.ci {
        writeln!(out, "ci: [{}, {}]", fmt4(lo), fmt4(hi))?;
    }
    writeln!(out, "reject: {}", if o.reject { "yes" } else { "no" })?;
    writeln!(out, "validity: {}", o.validity)?;
    if let Some(d) = o.degenerate {
        writeln!(out, "degenerate: {d:?}")?;
    }
    for w in &o.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(())
}

fn write_outcome_csv(path: &Path, o: &TestOutcome) -> Result<()> {
    let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), fmt_full);
    write_rows(
        path,
        &["statistic", "df", "alpha", "critical_value", "p_value", "reject", "ci_low", "ci_high", "validity"],
        &[vec![
            fmt_full(o.statistic),
            o.df.map_or_else(|| "NA".to_string(), |d| d.to_string()),
            fmt_full(o.alpha),
            opt(o.critical_value),
            fmt_full(o.p_value),
            o.reject.to_string(),
            opt(o.ci.map(|c| c.0)),
            opt(o.ci.map(|c| c.1)),
            o.validity.to_string(),
        ]],
    )
}

fn emit_simulation(result: &PresetResult, dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    if !result.tables.is_empty() {
        write!(out, "{}", render_cells_text(&result.tables))?;
    }
    for c in &result.densities {
        writeln!(
            out,
            "{}: bandwidth {}, skewness {}, dropped {}",
            c.label(),
            fmt4(c.bandwidth),
            fmt4(c.skewness),
            c.dropped
        )?;
    }
    let Some(dest) = dest else { return Ok(()) };
    if result.densities.is_empty() {
        write_cells_csv(create(dest)?, &result.tables)?;
        writeln!(out, "wrote {}", dest.display())?;
    } else {
        let paths = write_density_dir(dest, &result.densities)?;
        if !result.tables.is_empty() {
            write_cells_csv(create(&dest.join("cells.csv"))?, &result.tables)?;
        }
        writeln!(out, "wrote {} density files to {}", paths.len(), dest.display())?;
    }
    Ok(())
}
