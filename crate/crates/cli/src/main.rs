//! `casbox`: rule inspection, rule search, PRNG output, FIPS testing, S-box
//! construction and analysis.
//!
//! Exit status: 0 on success, 1 on a domain failure (failed battery, bad
//! input file, missing checkpoint), 2 on a usage error.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::{Map, Value};

use casbox::analysis::{self, gf, MetricsReport, TableKind};
use casbox::ca::{pack_bits, unpack_bits, CaRule, PrngConfig, RingState, DEFAULT_RING_SIZE, DEFAULT_TAP};
use casbox::calibrate::{self, CalibrationRow};
use casbox::conventions::{BitOrder, HalfPacking, Neighborhood};
use casbox::fips::{self, FipsReport};
use casbox::rulesearch::{
    self, FilterRegistry, Observer, PipelineConfig, Progress, ShardSpec, Stage, StageContext, StageOrder,
    StageReport,
};
use casbox::sbox::{build_sbox, LayerSpec, SBox, SBoxFormat};
use casbox::{write_atomic, BooleanRule, Conventions};

#[derive(Parser)]
#[command(name = "casbox", version, about = "Cellular-automaton S-box toolkit")]
struct Cli {
    /// Worker threads (default: available processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Properties of one 5-variable rule.
    Rule(RuleArgs),
    /// Staged search over the rule space.
    Search(SearchArgs),
    /// Bits from the 1024-cell ring generator, packed 8 per byte.
    Prng(PrngArgs),
    /// FIPS 140-2 battery on a bit stream.
    Fips(FipsArgs),
    /// Tabulate the eleven-layer S-box of a rule.
    Build(BuildArgs),
    /// Full metric report for an S-box file.
    Analyze(AnalyzeArgs),
    /// Score every convention combination against the reference metrics.
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone, Copy)]
struct ConventionArgs {
    #[arg(long, default_value_t = Conventions::DEFAULT.bit_order)]
    bit_order: BitOrder,
    #[arg(long, default_value_t = Conventions::DEFAULT.neighborhood)]
    neighborhood: Neighborhood,
    #[arg(long, default_value_t = Conventions::DEFAULT.packing)]
    packing: HalfPacking,
    /// Swap the Feistel halves after the last layer.
    #[arg(long)]
    final_swap: bool,
}

impl ConventionArgs {
    fn conventions(self) -> Conventions {
        Conventions {
            bit_order: self.bit_order,
            neighborhood: self.neighborhood,
            packing: self.packing,
            final_swap: self.final_swap,
        }
    }

    fn rule(self, number: u64) -> anyhow::Result<BooleanRule> {
        Ok(BooleanRule::from_number_with(number, self.bit_order)?)
    }
}

#[derive(Args)]
struct RuleArgs {
    number: u64,
    /// Print only the algebraic normal form.
    #[arg(long)]
    anf: bool,
    #[command(flatten)]
    conventions: ConventionArgs,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "balanced")]
    from: Stage,
    #[arg(long, default_value = "bijective")]
    to: Stage,
    #[arg(long)]
    checkpoint_dir: PathBuf,
    /// Number of shards the rule space is split into.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Shard to run; all shards in turn when omitted.
    #[arg(long)]
    shard: Option<usize>,
    /// Seed file for the FIPS stage (256 hex digits).
    #[arg(long)]
    seed: Option<PathBuf>,
    /// 20 000-bit blocks per FIPS test.
    #[arg(long, default_value_t = fips::DEFAULT_BLOCKS)]
    blocks: usize,
    /// Run bijectivity before FIPS.
    #[arg(long)]
    cheap_order: bool,
    /// Merge the shard checkpoints of `--to` instead of running.
    #[arg(long)]
    merge: bool,
    /// No progress on standard error.
    #[arg(long, short)]
    quiet: bool,
    #[arg(long, default_value_t = Conventions::DEFAULT.neighborhood)]
    neighborhood: Neighborhood,
}

#[derive(Args)]
struct PrngArgs {
    #[arg(long)]
    rule: u64,
    #[arg(long)]
    seed: PathBuf,
    /// Number of bits.
    #[arg(long, default_value_t = fips::DEFAULT_STREAM_BITS)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAP)]
    tap: usize,
    /// Run the FIPS battery on the output and fail if it does not pass.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    conventions: ConventionArgs,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["file", "zero_stream", "rule"])))]
struct FipsArgs {
    /// Packed bit stream, first bit = most significant bit of byte 0.
    file: Option<PathBuf>,
    /// Test an all-zero stream of this many bits.
    #[arg(long, value_name = "BITS")]
    zero_stream: Option<usize>,
    /// Test the generator output of this rule (needs --seed).
    #[arg(long, requires = "seed")]
    rule: Option<u64>,
    #[arg(long)]
    seed: Option<PathBuf>,
    #[arg(long, default_value_t = fips::DEFAULT_BLOCKS)]
    blocks: usize,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    conventions: ConventionArgs,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    rule: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "dec")]
    format: SBoxFormat,
    /// Leave out the three affine layers.
    #[arg(long)]
    no_affine: bool,
    #[command(flatten)]
    conventions: ConventionArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    sbox: PathBuf,
    #[arg(long, default_value = "dec")]
    format: SBoxFormat,
    /// Reduction polynomial for the interpolation, e.g. 0x409.
    #[arg(long, value_parser = parse_hex)]
    field_modulus: Option<u64>,
    /// Comma-separated tables to dump as CSV: ddt, lat, bct.
    #[arg(long, value_delimiter = ',')]
    tables: Vec<TableKind>,
    /// Directory for the CSV dumps (default: next to the report).
    #[arg(long)]
    tables_dir: Option<PathBuf>,
    /// Report path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = casbox::SELECTED_RULE)]
    rule: u32,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_hex(text: &str) -> Result<u64, String> {
    let digits = text.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| format!("`{text}`: {e}"))
}

fn long_version() -> String {
    format!(
        "{}\n{}\nfield-modulus 8-bit={:#x} 10-bit={:#x}",
        env!("CARGO_PKG_VERSION"),
        Conventions::DEFAULT,
        gf::AES_MODULUS,
        gf::GF1024_MODULUS
    )
}

/// A failure that is not a usage error; exit status 1.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

fn main() -> ExitCode {
    let matches = Cli::command().long_version(long_version()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            Cli::command()
                .error(clap::error::ErrorKind::ValueValidation, "--jobs must be at least 1")
                .exit();
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("global pool is built once");
    }
    let result = match cli.command {
        Command::Rule(a) => cmd_rule(a),
        Command::Search(a) => cmd_search(a),
        Command::Prng(a) => cmd_prng(a),
        Command::Fips(a) => cmd_fips(a),
        Command::Build(a) => cmd_build(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn usage_error(message: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, message)
        .exit()
}

fn cmd_rule(a: RuleArgs) -> anyhow::Result<()> {
    let rule = a.conventions.rule(a.number)?;
    if a.anf {
        println!("{}", rule.anf());
        return Ok(());
    }
    let ca = CaRule::with_neighborhood(rule, a.conventions.neighborhood);
    println!("rule            {}", a.number);
    println!("anf             {}", rule.anf());
    println!("degree          {}", rule.degree());
    println!("weight          {}", rule.hamming_weight());
    println!("balanced        {}", rule.is_balanced());
    println!("ci1             {}", rule.is_correlation_immune(1)?);
    println!("nonlinearity    {}", rule.nonlinearity());
    println!("sac             {}", rule.satisfies_sac());
    println!("bijective5      {}", ca.is_bijective5());
    println!("walsh           {:?}", rule.walsh_spectrum().values());
    Ok(())
}

struct StderrProgress {
    quiet: bool,
    last: Mutex<u64>,
}

impl Observer for StderrProgress {
    fn progress(&self, p: Progress) {
        if self.quiet {
            return;
        }
        // About 100 lines per stage at most.
        let step = (p.chunks_total / 100).max(1);
        let mut last = self.last.lock().expect("progress lock");
        if p.chunks_done == p.chunks_total || p.chunks_done >= *last + step {
            *last = p.chunks_done;
            eprintln!(
                "{}: scanned {} survivors {} ({}/{})",
                p.stage, p.scanned, p.survivors, p.chunks_done, p.chunks_total
            );
        }
    }

    fn stage_done(&self, r: &StageReport) {
        *self.last.lock().expect("progress lock") = 0;
        println!(
            "checkpoint stage={} shard={} count={} sha256={} path={}",
            r.stage,
            r.shard,
            r.count,
            r.checksum,
            r.path.display()
        );
    }
}

fn read_seed(path: &Path) -> anyhow::Result<RingState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading seed {}", path.display()))?;
    Ok(RingState::from_hex(&text, DEFAULT_RING_SIZE)?)
}

fn cmd_search(a: SearchArgs) -> anyhow::Result<()> {
    if a.shards == 0 {
        usage_error("--shards must be at least 1");
    }
    if a.shard.is_some_and(|i| i >= a.shards) {
        usage_error("--shard must be below --shards");
    }
    if a.merge {
        let merged = rulesearch::merge_shards(&a.checkpoint_dir, a.to, a.shards)?;
        println!(
            "checkpoint stage={} shard={} count={} sha256={} path={}",
            merged.stage,
            merged.shard,
            merged.count,
            merged.checksum(),
            rulesearch::checkpoint_path(&a.checkpoint_dir, a.to, ShardSpec::WHOLE).display()
        );
        return Ok(());
    }
    let seed = a.seed.as_deref().map(read_seed).transpose()?;
    let order = if a.cheap_order {
        StageOrder::Cheap
    } else {
        StageOrder::Canonical
    };
    let shards: Vec<ShardSpec> = match a.shard {
        Some(i) => vec![ShardSpec::new(i, a.shards)?],
        None => ShardSpec::all(a.shards).collect(),
    };
    let registry = FilterRegistry::standard();
    let observer = StderrProgress {
        quiet: a.quiet,
        last: Mutex::new(0),
    };
    for shard in shards {
        let cfg = PipelineConfig {
            from: a.from,
            to: a.to,
            checkpoint_dir: a.checkpoint_dir.clone(),
            shard,
            order,
            context: StageContext {
                neighborhood: a.neighborhood,
                seed: seed.clone(),
                fips_blocks: a.blocks,
            },
        };
        rulesearch::run_pipeline(&cfg, &registry, &observer)?;
    }
    Ok(())
}

fn cmd_prng(a: PrngArgs) -> anyhow::Result<()> {
    let rule = CaRule::with_neighborhood(a.conventions.rule(a.rule)?, a.conventions.neighborhood);
    let config = PrngConfig::new(rule, read_seed(&a.seed)?)?.with_tap(a.tap)?;
    let bits = config.stream(a.count);
    write_atomic(&a.out, &pack_bits(&bits))?;
    if a.strict {
        let blocks = a.count / fips::BLOCK_BITS;
        if blocks == 0 {
            usage_error(format!("--strict needs at least {} bits", fips::BLOCK_BITS));
        }
        let report = fips::battery_with(&bits, blocks, &fips::BlockTestRegistry::standard())?;
        if !report.passed {
            print_fips_table(&report);
            return Err(Failed("stream fails the FIPS 140-2 battery".into()).into());
        }
    }
    Ok(())
}

fn print_fips_table(report: &FipsReport) {
    println!("{:<10} {:>5}  {:<44} {:<48} result", "test", "block", "statistic", "bounds");
    for r in &report.results {
        let block = r.block.map_or("-".to_string(), |b| b.to_string());
        println!(
            "{:<10} {:>5}  {:<44} {:<48} {}",
            r.name,
            block,
            r.statistic,
            r.bounds,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    println!("overall: {}", if report.passed { "pass" } else { "FAIL" });
}

fn cmd_fips(a: FipsArgs) -> anyhow::Result<()> {
    if a.blocks == 0 {
        usage_error("--blocks must be at least 1");
    }
    let needed = a.blocks * fips::BLOCK_BITS;
    let stream = if let Some(path) = &a.file {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        if bytes.len() * 8 < needed {
            bail!(casbox::Error::StreamTooShort {
                min: needed,
                actual: bytes.len() * 8
            });
        }
        unpack_bits(&bytes, needed)
    } else if let Some(n) = a.zero_stream {
        if n < needed {
            bail!(casbox::Error::StreamTooShort { min: needed, actual: n });
        }
        vec![false; needed]
    } else {
        let number = a.rule.expect("clap requires one source");
        let seed = read_seed(a.seed.as_deref().expect("clap requires --seed with --rule"))?;
        let rule = CaRule::with_neighborhood(a.conventions.rule(number)?, a.conventions.neighborhood);
        PrngConfig::new(rule, seed)?.stream(needed)
    };
    let report = fips::battery_with(&stream, a.blocks, &fips::BlockTestRegistry::standard())?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(out) = &a.out {
        write_atomic(out, json.as_bytes())?;
    }
    if a.json {
        print!("{json}");
    } else {
        print_fips_table(&report);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failed(format!("{} of {} tests failed", report.failures().count(), report.results.len())).into())
    }
}

fn write_sbox(path: &Path, s: &SBox, format: SBoxFormat) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    s.write(&mut buf, format)?;
    write_atomic(path, &buf)?;
    Ok(())
}

fn cmd_build(a: BuildArgs) -> anyhow::Result<()> {
    let conventions = a.conventions.conventions();
    let mut spec = LayerSpec::eleven_layer_with(a.conventions.rule(a.rule)?, &conventions);
    if a.no_affine {
        spec = spec.without_affine();
    }
    let s = build_sbox(&spec)?;
    write_sbox(&a.out, &s, a.format)?;
    eprintln!(
        "wrote {} ({} entries, {} fixed points, {})",
        a.out.display(),
        s.len(),
        s.fixed_points(),
        conventions
    );
    Ok(())
}

/// Flat JSON object: every field of the report, with each fraction also
/// given as `<name>_decimal`.
fn report_json(report: &MetricsReport) -> anyhow::Result<Value> {
    let Value::Object(fields) = serde_json::to_value(report)? else {
        unreachable!("a struct serializes to an object");
    };
    let mut out = Map::new();
    for (name, value) in fields {
        let decimal = value.as_str().and_then(|text| {
            let (num, den) = text.split_once('/')?;
            let (num, den): (f64, f64) = (num.parse().ok()?, den.parse().ok()?);
            Some(num / den)
        });
        out.insert(name.clone(), value);
        if let Some(d) = decimal {
            out.insert(format!("{name}_decimal"), Value::from(d));
        }
    }
    Ok(Value::Object(out))
}

fn cmd_analyze(a: AnalyzeArgs) -> anyhow::Result<()> {
    let file = fs::File::open(&a.sbox).with_context(|| format!("opening {}", a.sbox.display()))?;
    let s = SBox::read(BufReader::new(file), a.format)?;
    let report = analysis::full_report(&s, a.field_modulus)?;
    let text = serde_json::to_string_pretty(&report_json(&report)?)? + "\n";
    match &a.out {
        Some(out) => write_atomic(out, text.as_bytes())?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    if !a.tables.is_empty() {
        let dir = a
            .tables_dir
            .clone()
            .or_else(|| a.out.as_ref().and_then(|o| o.parent().map(Path::to_path_buf)))
            .unwrap_or_else(|| PathBuf::from("."));
        let stem = a
            .sbox
            .file_stem()
            .map_or("sbox".into(), |s| s.to_string_lossy().into_owned());
        for kind in &a.tables {
            let table = match kind {
                TableKind::Ddt => analysis::ddt(&s),
                TableKind::Lat => analysis::lat(&s),
                TableKind::Bct => analysis::bct(&s),
            };
            let path = dir.join(format!("{stem}.{kind}.csv"));
            write_atomic(&path, table.to_csv().as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> anyhow::Result<()> {
    let rows = calibrate::calibrate(a.rule, calibrate::REFERENCE)?;
    let text = if a.json {
        serde_json::to_string_pretty(&rows)? + "\n"
    } else {
        calibration_table(&rows)
    };
    if let Some(out) = &a.out {
        write_atomic(out, text.as_bytes())?;
    }
    print!("{text}");
    match calibrate::first_match(&rows) {
        Some(c) if c == Conventions::DEFAULT => Ok(()),
        Some(c) => {
            eprintln!("note: first matching variant ({c}) is not the default");
            Ok(())
        }
        None => Err(Failed("no convention variant reproduces the reference metrics".into()).into()),
    }
}

fn calibration_table(rows: &[CalibrationRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<84} {:>4} {:>4} {:>4}  match\n", "conventions", "NL", "DU", "BU"));
    for r in rows {
        out.push_str(&format!(
            "{:<84} {:>4} {:>4} {:>4}  {}\n",
            r.conventions.to_string(),
            r.metrics.nonlinearity,
            r.metrics.differential_uniformity,
            r.metrics.boomerang_uniformity,
            if r.matches { "yes" } else { "no" }
        ));
    }
    out
}
