//! `entmon` command line: `analyze`, `sweep-dicke`, `stress`, `partitions`.
//!
//! Exit status: 0 on success, 1 when `stress` finds a violated bound, 2 on
//! any input validation failure.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::detector::{
    classify_value, enumerate_partitions, exclusion_report, partition_bound, stress,
    DetectionReport, StressSummary, Thresholds, EPS_DET, MAX_PARTITION_N,
};
use crate::error::{Error, Result};
use crate::families::{dicke_m_pb, predicted_m_pb, FamilySpec};
use crate::frames::ZeroPolicy;
use crate::statevec::{load_state_file, make_dicke};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const SWEEP_MAX_N: usize = 15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "entmon",
    version,
    about = "Detect multipartite entanglement of pure qubit states from bipartite correlations"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute M^(pb) for one state and rule out every partition it exceeds
    Analyze(AnalyzeArgs),
    /// Compare numeric M^(pb) of odd-n Dicke states with the closed form
    SweepDicke(SweepArgs),
    /// Check the monogamy bounds on random states in random local frames
    Stress(StressArgs),
    /// Tabulate partition bounds and verdicts for a given M^(pb) value
    Partitions(PartitionsArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// JSON state file: {"n": <int>, "amplitudes": [[re, im], ...]}
    #[arg(long, conflicts_with_all = ["family", "n", "e"], required_unless_present = "family")]
    state: Option<PathBuf>,
    /// Named family: dicke, ghz, w, plus
    #[arg(long, requires = "n")]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Excitation count (dicke only)
    #[arg(long)]
    e: Option<usize>,
    /// canonical | axis=x,y,z | maximize[:samples]
    #[arg(long, default_value = "canonical")]
    zero_policy: String,
    /// Seed for the maximize policy
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    n_max: usize,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct StressArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct PartitionsArgs {
    #[arg(long)]
    n: usize,
    /// M^(pb) value to compare against every bound
    #[arg(long, allow_negative_numbers = true)]
    m_value: f64,
    #[arg(long, value_enum, default_value_t)]
    format: OutputFormat,
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return if code == 0 { EXIT_OK } else { EXIT_INVALID };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out, err),
        Command::SweepDicke(a) => cmd_sweep_dicke(&a, out),
        Command::Stress(a) => cmd_stress(&a, out),
        Command::Partitions(a) => cmd_partitions(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "entmon: {e}");
            EXIT_INVALID
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let policy = args.zero_policy.parse::<ZeroPolicy>()?.with_seed(args.seed);
    let (state, family) = match (&args.state, &args.family) {
        (Some(path), _) => {
            let loaded = load_state_file(path)?;
            if let Some(norm) = loaded.renormalized_from {
                writeln!(
                    err,
                    "entmon: warning: state norm was {norm:.12}, renormalized"
                )?;
            }
            (loaded.state, None)
        }
        (None, Some(name)) => {
            let n = args
                .n
                .ok_or_else(|| Error::InvalidArgument("--family needs --n".into()))?;
            let spec = FamilySpec::from_name(name, n, args.e)?;
            (spec.build()?, Some(spec))
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "either --state or --family is required".into(),
            ))
        }
    };
    let report = exclusion_report(&state, &policy)?;
    match args.format {
        OutputFormat::Json => write_json(out, &report)?,
        OutputFormat::Csv => write_report_csv(out, &report)?,
        OutputFormat::Text => {
            let predicted = family.and_then(|f| predicted_m_pb(&f, &policy).map(|v| (f, v)));
            write_report_text(out, &report, predicted)?
        }
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub e: usize,
    pub numeric: f64,
    pub formula: f64,
    pub abs_diff: f64,
    pub genuine_multipartite: bool,
    /// Smallest `k` from which the state is certified not k-product.
    pub not_k_product_from: Option<usize>,
    pub entangled_subset_guarantee: usize,
    pub depth_guarantee: Option<usize>,
}

/// Numeric and closed-form `M^(pb)` for every odd `3 ≤ n ≤ n_max` and every
/// excitation count.
pub fn sweep_dicke(n_max: usize) -> Result<Vec<SweepRow>> {
    if n_max > SWEEP_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "--n-max is limited to {SWEEP_MAX_N}"
        )));
    }
    let mut rows = Vec::new();
    for n in (3..=n_max).step_by(2) {
        for e in 0..=n {
            let state = make_dicke(n, e)?;
            let report = exclusion_report(&state, &ZeroPolicy::Canonical)?;
            let formula = dicke_m_pb(n, e)?.value;
            rows.push(SweepRow {
                n,
                e,
                numeric: report.m_pb,
                formula,
                abs_diff: (report.m_pb - formula).abs(),
                genuine_multipartite: report.genuine_multipartite,
                not_k_product_from: report.not_k_product.first().copied(),
                entangled_subset_guarantee: report.entangled_subset_guarantee,
                depth_guarantee: report.depth_guarantee,
            });
        }
    }
    Ok(rows)
}

fn cmd_sweep_dicke(args: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = sweep_dicke(args.n_max)?;
    match args.format {
        OutputFormat::Json => write_json(out, &rows)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "{:>3} {:>3} {:>22} {:>22} {:>10} {:>8} {:>6} {:>6}",
                "n", "e", "numeric M^(pb)", "closed form", "|diff|", "genuine", "subset", "depth"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>3} {:>3} {:>22.16} {:>22.16} {:>10.2e} {:>8} {:>6} {:>6}",
                    r.n,
                    r.e,
                    r.numeric,
                    r.formula,
                    r.abs_diff,
                    r.genuine_multipartite,
                    r.entangled_subset_guarantee,
                    r.depth_guarantee.map_or("-".into(), |d| d.to_string())
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_stress(args: &StressArgs, out: &mut dyn Write) -> Result<i32> {
    let summary = stress(args.n, args.trials, args.seed)?;
    match args.format {
        OutputFormat::Json => write_json(out, &summary)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(&summary).map_err(csv_error)?;
            w.flush()?;
        }
        OutputFormat::Text => write_stress_text(out, &summary)?,
    }
    Ok(if summary.violations() == 0 {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionRow {
    pub partition: crate::detector::Partition,
    pub k: usize,
    pub bound: f64,
    /// `excluded`, `surviving` or `trivial`.
    pub verdict: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionTable {
    pub n: usize,
    pub m_value: f64,
    pub partitions: Vec<PartitionRow>,
    pub thresholds: Thresholds,
    pub not_k_product: Vec<usize>,
    pub entangled_subset_guarantee: usize,
    pub depth_guarantee: Option<usize>,
    pub depth_guarantee_as_stated: Option<usize>,
    pub genuine_multipartite: bool,
}

/// Every partition of `n` with its bound and verdict for the value `v`.
pub fn partition_table(n: usize, v: f64) -> Result<PartitionTable> {
    if !(2..=MAX_PARTITION_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "--n must lie in 2..={MAX_PARTITION_N}"
        )));
    }
    let report = classify_value(n, v, String::new())?;
    let excluded: Vec<_> = report.excluded_partitions.iter().map(|pb| &pb.0).collect();
    let partitions = enumerate_partitions(n, None)?
        .into_iter()
        .map(|p| {
            let verdict = if p.is_trivial() {
                "trivial"
            } else if excluded.contains(&&p) {
                "excluded"
            } else {
                "surviving"
            };
            PartitionRow {
                k: p.k(),
                bound: partition_bound(&p),
                partition: p,
                verdict,
            }
        })
        .collect();
    Ok(PartitionTable {
        n,
        m_value: v,
        partitions,
        thresholds: report.thresholds,
        not_k_product: report.not_k_product,
        entangled_subset_guarantee: report.entangled_subset_guarantee,
        depth_guarantee: report.depth_guarantee,
        depth_guarantee_as_stated: report.depth_guarantee_as_stated,
        genuine_multipartite: report.genuine_multipartite,
    })
}

fn cmd_partitions(args: &PartitionsArgs, out: &mut dyn Write) -> Result<i32> {
    let table = partition_table(args.n, args.m_value)?;
    match args.format {
        OutputFormat::Json => write_json(out, &table)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "m_value", "partition", "k", "bound", "verdict"])
                .map_err(csv_error)?;
            for r in &table.partitions {
                w.write_record([
                    table.n.to_string(),
                    fmt_f64(table.m_value),
                    parts_label(r.partition.parts()),
                    r.k.to_string(),
                    fmt_f64(r.bound),
                    r.verdict.to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            writeln!(out, "n = {}, M^(pb) = {}", table.n, table.m_value)?;
            writeln!(out, "{:<24} {:>3} {:>8}  verdict", "partition", "k", "bound")?;
            for r in &table.partitions {
                writeln!(
                    out,
                    "{:<24} {:>3} {:>8}  {}",
                    r.partition.to_string(),
                    r.k,
                    r.bound,
                    r.verdict
                )?;
            }
            write_thresholds_text(out, &table.thresholds, table.m_value)?;
            write_conclusions_text(
                out,
                table.n,
                &table.not_k_product,
                table.entangled_subset_guarantee,
                table.depth_guarantee,
                table.depth_guarantee_as_stated,
                table.genuine_multipartite,
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(io::Error::other(format!("{other:?}"))),
    }
}

/// 17 significant digits, so that every double round-trips exactly.
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn parts_label(parts: &[usize]) -> String {
    parts
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// Pretty JSON with every float printed to 17 significant digits.
struct FixedDigits(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(Default::default()));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(out, "{}", to_json_string(value))?;
    Ok(())
}

fn write_report_csv(out: &mut dyn Write, r: &DetectionReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "policy", "m_pb", "partition", "k", "bound", "verdict"])
        .map_err(csv_error)?;
    let rows = r
        .excluded_partitions
        .iter()
        .map(|pb| (pb, "excluded"))
        .chain(r.surviving_partitions.iter().map(|pb| (pb, "surviving")));
    for (pb, verdict) in rows {
        w.write_record([
            r.n.to_string(),
            r.policy.clone(),
            fmt_f64(r.m_pb),
            parts_label(pb.0.parts()),
            pb.0.k().to_string(),
            fmt_f64(pb.1),
            verdict.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn write_report_text(
    out: &mut dyn Write,
    r: &DetectionReport,
    predicted: Option<(FamilySpec, f64)>,
) -> Result<()> {
    writeln!(out, "qubits:            {}", r.n)?;
    writeln!(out, "zero-Bloch policy: {}", r.policy)?;
    writeln!(out, "M^(pb):            {:.12}", r.m_pb)?;
    if let Some((spec, v)) = predicted {
        writeln!(out, "closed form ({spec}): {v:.12}")?;
    }
    writeln!(
        out,
        "[monogamy bound] M <= {} in any local frames",
        r.m_bound
    )?;
    if let Some((k, l)) = r.max_residual_pair {
        writeln!(
            out,
            "[factorization] max |T_ij - b_i b_j| = {:.3e} at pair ({k}, {l}){}",
            r.max_factorization_residual,
            if r.max_factorization_residual > EPS_DET {
                " -> these two qubits are not in separate product factors"
            } else {
                ""
            }
        )?;
    }
    write_thresholds_text(out, &r.thresholds, r.m_pb)?;
    if !r.excluded_partitions.is_empty() {
        writeln!(out, "[partition bound] excluded:")?;
        for pb in &r.excluded_partitions {
            writeln!(out, "  {:<24} bound {}", pb.0.to_string(), pb.1)?;
        }
    }
    if !r.surviving_partitions.is_empty() {
        writeln!(out, "[partition bound] surviving:")?;
        for pb in &r.surviving_partitions {
            writeln!(out, "  {:<24} bound {}", pb.0.to_string(), pb.1)?;
        }
    }
    write_conclusions_text(
        out,
        r.n,
        &r.not_k_product,
        r.entangled_subset_guarantee,
        r.depth_guarantee,
        r.depth_guarantee_as_stated,
        r.genuine_multipartite,
    )?;
    for note in &r.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

fn verdict(v: f64, bound: f64) -> &'static str {
    if v > bound + EPS_DET {
        "exceeded"
    } else {
        "not exceeded"
    }
}

fn write_thresholds_text(out: &mut dyn Write, t: &Thresholds, v: f64) -> Result<()> {
    for (k, s) in &t.s_k {
        writeln!(out, "[k-product threshold] s_{k} = {s:<6} {}", verdict(v, *s))?;
    }
    if let Some(g) = t.genuine {
        writeln!(out, "[genuine threshold]   {g:<10} {}", verdict(v, g))?;
    }
    for (m, d) in &t.depth {
        writeln!(out, "[bipartition depth threshold] m = {m}: {d:<6} {}", verdict(v, *d))?;
    }
    Ok(())
}

fn write_conclusions_text(
    out: &mut dyn Write,
    n: usize,
    not_k_product: &[usize],
    subset: usize,
    depth: Option<usize>,
    depth_as_stated: Option<usize>,
    genuine: bool,
) -> Result<()> {
    match not_k_product.first() {
        Some(k) => writeln!(out, "not k-product for every k >= {k}")?,
        None => writeln!(out, "no k-product hypothesis excluded")?,
    }
    writeln!(
        out,
        "entangled subset guarantee (all partitions): at least {subset} of {n} qubits"
    )?;
    if let (Some(d), Some(s)) = (depth, depth_as_stated) {
        writeln!(
            out,
            "bipartition ordering argument: at least {d} mutually entangled ({s} as stated)"
        )?;
    }
    writeln!(out, "genuinely {n}-partite entangled: {}", if genuine { "yes" } else { "not shown" })?;
    Ok(())
}

fn write_stress_text(out: &mut dyn Write, s: &StressSummary) -> Result<()> {
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    writeln!(out, "n = {}, trials = {}, seed = {}", s.n, s.trials, s.seed)?;
    writeln!(
        out,
        "pair bound (M_kl <= 2):                min slack {:.3e}, violations {}",
        s.min_pair_slack, s.pair_violations
    )?;
    writeln!(
        out,
        "shared-qubit bound (M_kl + M_lm <= 2): min slack {}, violations {}",
        opt(s.min_two_term_slack),
        s.two_term_violations
    )?;
    writeln!(
        out,
        "triangle bound (three-term sum <= 3):  min slack {}, violations {}",
        opt(s.min_three_term_slack),
        s.three_term_violations
    )?;
    writeln!(
        out,
        "global bound (M <= {}):                min slack {:.3e}, violations {}",
        s.total_bound, s.min_total_slack, s.total_violations
    )?;
    writeln!(out, "max M_kl = {:.12}, max M = {:.12}", s.max_pair_value, s.max_total)?;
    Ok(())
}
