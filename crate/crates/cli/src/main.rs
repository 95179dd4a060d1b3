//! `maskseq`: encode, decode, evaluate and build instruction data.
//!
//! Exit codes: 0 success, 1 failed validation, 2 parse or I/O error,
//! 3 empty mask or no-target input where a target is required.

mod corpus;
mod svg;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use maskseq::codec::{
    decode_masks, encode_mask_report, parse_grounding, Expect, GroundingOutput, ParseOptions,
    QuantConfig,
};
use maskseq::geometry::{mask_from_png_bytes, mask_to_png, BinaryMask, RleRef};
use maskseq::instructgen::{
    build_attcoseg, convert_coco, find_split_leaks, read_jsonl, read_negative_pool, write_jsonl,
    AttCoSegPair, CocoInstances, ConvertOptions, RefEntry, Task,
};
use maskseq::metrics::{evaluate, load_eval_samples, upper_bound_sweep, EvalTask};
use maskseq::{SamplingConfig, SamplingMethod};

#[derive(Parser, Debug)]
#[command(name = "maskseq", version = maskseq::VERSION, about = "Mask sequences, grounding metrics and instruction data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for template choice and group construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Quantization bins per axis.
    #[arg(long, global = true, default_value_t = 1000)]
    n_bins: u32,
    /// Points per mask outline.
    #[arg(long, global = true, default_value_t = 32)]
    points: u32,
    /// Contour sampling method.
    #[arg(long, global = true, default_value = "adaptive")]
    method: SamplingMethod,
    /// Dense points laid on the contour before adaptive selection.
    #[arg(long, global = true, default_value_t = 400)]
    dense: u32,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl Global {
    fn sampling(&self) -> Result<SamplingConfig> {
        Ok(SamplingConfig::new(self.dense, self.points)?)
    }

    fn convert_options(&self, task: Task) -> Result<ConvertOptions> {
        let mut o = ConvertOptions::new(task);
        o.n_bins = self.n_bins;
        o.sampling = self.sampling()?;
        o.method = self.method;
        o.seed = self.seed;
        Ok(o)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a PNG or RLE JSON mask as a point sequence.
    Encode {
        mask: PathBuf,
        /// Write the sequence here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a sequence string (or @file, or - for stdin) to a PNG mask.
    Decode {
        sequence: String,
        /// Image width in pixels.
        #[arg(long)]
        width: u32,
        /// Image height in pixels.
        #[arg(long)]
        height: u32,
        /// PNG to write.
        #[arg(long)]
        out: PathBuf,
        /// Repair common formatting slips instead of rejecting them.
        #[arg(long)]
        lenient: bool,
    },
    /// Reconstruction mIoU per point count for a mask corpus.
    UpperBound {
        /// PNG directory, eval JSONL or COCO instances JSON.
        corpus: PathBuf,
        /// Point counts to evaluate.
        #[arg(long, value_delimiter = ',', default_value = "8,12,16,24,32")]
        n_list: Vec<u32>,
        /// Sampling methods to compare.
        #[arg(long, value_delimiter = ',', default_value = "uniform,adaptive")]
        methods: Vec<SamplingMethod>,
        /// Referring expressions selecting COCO annotations.
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Keep only these splits of the refs file.
        #[arg(long)]
        split: Vec<String>,
        /// Count each referenced object once.
        #[arg(long)]
        unique: bool,
        /// Write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write a line plot of the table.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Score predictions against ground truth.
    Eval {
        gt: PathBuf,
        /// One raw output per line; omit when the GT lines carry "pred".
        pred: Option<PathBuf>,
        /// grec, gres, rec or res.
        #[arg(long)]
        task: EvalTask,
        /// IoU thresholds for precision.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        thresholds: Vec<f64>,
    },
    /// Build instruction records.
    #[command(subcommand)]
    Convert(Convert),
    /// Check record files: image markers, target grammar, split leakage.
    Validate { records: Vec<PathBuf> },
    /// Draw a grounding output as SVG.
    Visualize {
        output: String,
        /// Image width in pixels.
        #[arg(long)]
        width: u32,
        /// Image height in pixels.
        #[arg(long)]
        height: u32,
        /// Image reference embedded under the overlay.
        #[arg(long)]
        image: Option<String>,
        /// SVG to write.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Convert {
    /// COCO instances and referring expressions.
    Coco {
        /// COCO instances JSON.
        #[arg(long)]
        instances: PathBuf,
        /// Referring expressions, one JSON object per line.
        #[arg(long)]
        refs: PathBuf,
        /// rec, res, grec, gres or reg.
        #[arg(long)]
        task: Task,
        /// Keep only these splits.
        #[arg(long)]
        split: Vec<String>,
        /// JSONL to write.
        #[arg(long)]
        out: PathBuf,
        /// Write conversion counts here instead of stdout.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Attribute-level co-segmentation groups.
    Attcoseg {
        /// Positive image pairs, one JSON object per line.
        #[arg(long)]
        pairs: PathBuf,
        /// Negative images, one per line.
        #[arg(long)]
        pool: PathBuf,
        /// Images per group.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// JSONL to write.
        #[arg(long)]
        out: PathBuf,
        /// Write conversion counts here instead of stdout.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
}

/// A command-level outcome that maps to a specific exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(Exit(code, _)) = err.downcast_ref::<Exit>() {
        return *code;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<maskseq::Error>() {
            if matches!(e, maskseq::Error::NoForeground | maskseq::Error::NoContour) {
                return 3;
            }
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MASKSEQ_LOG", "warn"))
        .format_timestamp(None)
        .init();
    if cli.global.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global() {
            warn!("could not size worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Encode { mask, out } => cmd_encode(g, mask, out.as_deref()),
        Command::Decode { sequence, width, height, out, lenient } => {
            cmd_decode(g, sequence, *width, *height, out, *lenient)
        }
        Command::UpperBound { corpus, n_list, methods, refs, split, unique, csv, svg } => {
            let sel = corpus::CocoSelection { refs: refs.as_deref(), splits: split, unique: *unique };
            cmd_upper_bound(g, corpus, &sel, n_list, methods, csv.as_deref(), svg.as_deref())
        }
        Command::Eval { gt, pred, task, thresholds } => cmd_eval(g, gt, pred.as_deref(), *task, thresholds),
        Command::Convert(c) => cmd_convert(g, c),
        Command::Validate { records } => cmd_validate(g, records),
        Command::Visualize { output, width, height, image, out } => {
            cmd_visualize(g, output, *width, *height, image.as_deref(), out)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_mask(path: &Path) -> Result<BinaryMask> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"\x89PNG") {
        return Ok(mask_from_png_bytes(&bytes)?);
    }
    let rle: RleRef = serde_json::from_slice(&bytes)
        .with_context(|| format!("{}: neither PNG nor RLE JSON", path.display()))?;
    Ok(rle.to_rle()?.to_mask()?)
}

/// Literal text, `@path` for a file, or `-` for stdin; one trailing
/// newline is dropped.
fn read_arg_text(arg: &str) -> Result<String> {
    let mut s = if arg == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf).context("reading stdin")?;
        buf
    } else if let Some(path) = arg.strip_prefix('@') {
        read_text(Path::new(path))?
    } else {
        arg.to_string()
    };
    if s.ends_with('\n') {
        s.pop();
        if s.ends_with('\r') {
            s.pop();
        }
    }
    Ok(s)
}

fn cmd_encode(g: &Global, mask_path: &Path, out: Option<&Path>) -> Result<()> {
    let mask = load_mask(mask_path)?;
    let qcfg = QuantConfig::new(g.n_bins, f64::from(mask.width()), f64::from(mask.height()))?;
    let report = encode_mask_report(&mask, &qcfg, &g.sampling()?, g.method)
        .with_context(|| format!("encoding {}", mask_path.display()))?;
    if report.components > 1 {
        warn!("{} components; encoding the largest", report.components);
    }
    if report.has_holes {
        warn!("mask has holes; the outline does not represent them");
    }
    let seq = GroundingOutput::Masks(vec![report.seq.clone()]).to_string();
    let text = match g.format {
        Format::Json => serde_json::to_string(&serde_json::json!({
            "sequence": seq,
            "points": report.seq.point_count(),
            "width": mask.width(),
            "height": mask.height(),
            "components": report.components,
            "has_holes": report.has_holes,
        }))? + "\n",
        _ => seq + "\n",
    };
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn cmd_decode(g: &Global, arg: &str, width: u32, height: u32, out: &Path, lenient: bool) -> Result<()> {
    let text = read_arg_text(arg)?;
    let opts = if lenient { ParseOptions::lenient(Expect::Masks) } else { ParseOptions::strict(Expect::Masks) }
        .with_bins(g.n_bins);
    let parsed = parse_grounding(&text, &opts)?;
    let GroundingOutput::Masks(seqs) = parsed.output else {
        return Err(Exit(3, "no-target: nothing to decode".into()).into());
    };
    let qcfg = QuantConfig::new(g.n_bins, f64::from(width), f64::from(height))?;
    let mask = decode_masks(&seqs, &qcfg)?;
    mask_to_png(&mask, out)?;
    if g.format == Format::Json {
        println!("{}", serde_json::json!({ "masks": seqs.len(), "foreground": mask.count() }));
    }
    Ok(())
}

fn cmd_upper_bound(
    g: &Global,
    corpus_path: &Path,
    sel: &corpus::CocoSelection<'_>,
    n_list: &[u32],
    methods: &[SamplingMethod],
    csv_out: Option<&Path>,
    svg_out: Option<&Path>,
) -> Result<()> {
    let items = corpus::load(corpus_path, sel)?;
    if items.is_empty() {
        bail!("{}: corpus is empty", corpus_path.display());
    }
    info!("{} corpus item(s)", items.len());
    let base = SamplingConfig { m_dense: g.dense, ..SamplingConfig::default() };
    let results = upper_bound_sweep(items.len(), |i| items[i].load(), n_list, methods, &base, g.n_bins)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "method", "mIoU"])?;
    for r in &results {
        for (n, m) in &r.miou {
            w.write_record([n.to_string(), r.method.to_string(), format!("{:.4}", m * 100.0)])?;
        }
    }
    let csv_text = String::from_utf8(w.into_inner()?)?;
    if let Some(p) = csv_out {
        write_file(p, csv_text.as_bytes())?;
    }
    if let Some(p) = svg_out {
        write_file(p, svg::plot_from_csv(&csv_text)?.as_bytes())?;
    }
    if g.format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&results)?);
    } else {
        print!("{csv_text}");
    }
    Ok(())
}

fn cmd_eval(g: &Global, gt: &Path, pred: Option<&Path>, task: EvalTask, thresholds: &[f64]) -> Result<()> {
    let gt_text = read_text(gt)?;
    let pred_text = pred.map(read_text).transpose()?;
    let expect = if task.expects_masks() { Expect::Masks } else { Expect::Boxes };
    let samples = load_eval_samples(&gt_text, pred_text.as_deref(), expect, g.n_bins)?;
    let report = evaluate(&samples, task, thresholds)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_convert(g: &Global, c: &Convert) -> Result<()> {
    let (records, stats, out, stats_path) = match c {
        Convert::Coco { instances, refs, task, split, out, stats } => {
            let inst = CocoInstances::from_json(&read_text(instances)?)
                .with_context(|| format!("parsing {}", instances.display()))?;
            let refs = RefEntry::parse_jsonl(&read_text(refs)?)
                .with_context(|| format!("parsing {}", refs.display()))?;
            let mut opts = g.convert_options(*task)?;
            if !split.is_empty() {
                opts.splits = Some(split.iter().cloned().collect::<BTreeSet<_>>());
            }
            let (r, s) = convert_coco(&inst, &refs, &opts)?;
            (r, s, out, stats)
        }
        Convert::Attcoseg { pairs, pool, k, out, stats } => {
            let pairs = AttCoSegPair::parse_jsonl(&read_text(pairs)?)
                .with_context(|| format!("parsing {}", pairs.display()))?;
            let pool = read_negative_pool(&read_text(pool)?)?;
            let (r, s) = build_attcoseg(&pairs, &pool, *k, &g.convert_options(Task::AttCoSeg)?)?;
            (r, s, out, stats)
        }
    };
    let mut buf = Vec::new();
    write_jsonl(&records, &mut buf)?;
    write_file(out, &buf)?;
    let stats_json = serde_json::to_string_pretty(&stats)? + "\n";
    match stats_path {
        Some(p) => write_file(p, stats_json.as_bytes()),
        None => Ok(io::stdout().write_all(stats_json.as_bytes())?),
    }
}

fn cmd_validate(g: &Global, paths: &[PathBuf]) -> Result<()> {
    if paths.is_empty() {
        bail!("no record files given");
    }
    let mut records = Vec::new();
    for p in paths {
        let file = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
        records.extend(read_jsonl(io::BufReader::new(file)).with_context(|| format!("{}", p.display()))?);
    }
    let invalid: Vec<String> = records
        .iter()
        .filter_map(|r| r.validate(g.n_bins).err().map(|e| format!("{}: {e}", r.id)))
        .collect();
    let leaks = find_split_leaks(&records);
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "records": records.len(),
            "invalid": invalid,
            "leaks": leaks,
        }))?
    );
    if !invalid.is_empty() || !leaks.is_empty() {
        return Err(Exit(1, format!("{} invalid record(s), {} leaked image(s)", invalid.len(), leaks.len())).into());
    }
    Ok(())
}

/// Picks the grammar from the text: explicit separators first, otherwise
/// four integers in the first group mean a box.
fn guess_expect(text: &str) -> Expect {
    if text.contains("<bsep>") {
        return Expect::Boxes;
    }
    if text.contains("<msep>") {
        return Expect::Masks;
    }
    let first = text.split(']').next().unwrap_or("");
    if first.split(',').count() == 4 {
        Expect::Boxes
    } else {
        Expect::Masks
    }
}

fn cmd_visualize(g: &Global, arg: &str, width: u32, height: u32, image: Option<&str>, out: &Path) -> Result<()> {
    let text = read_arg_text(arg)?;
    let opts = ParseOptions::strict(guess_expect(&text)).with_bins(g.n_bins);
    let parsed = parse_grounding(&text, &opts).map_err(|e| anyhow!(e))?;
    let qcfg = QuantConfig::new(g.n_bins, f64::from(width), f64::from(height))?;
    write_file(out, svg::overlay(&parsed.output, &qcfg, image)?.as_bytes())
}
