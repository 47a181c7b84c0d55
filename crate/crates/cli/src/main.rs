//! `cgimc`: command-line driver for connectivity-preserving geometry images.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input or configuration,
//! 3 I/O failure, 4 malformed container. Summaries go to stdout as JSON,
//! diagnostics to stderr.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cgim::codec::LossyCodec;
use cgim::container::{read_cgim, write_cgim};
use cgim::corpus::{generate, CorpusKind};
use cgim::io::{load_mesh, obj_string, save_mesh_with_uv};
use cgim::isomatrix::Variant;
use cgim::parametrize::{tutte_parametrize, tutte_residual};
use cgim::pipeline::{decode_array, encode_mesh, evaluate, rows_to_csv, PipelineConfig};
use cgim::{validate_topology, CodecError, IsomatrixError, MeshError, ParamError, PipelineError};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cgimc", version, about = "Connectivity-preserving geometry images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a mesh is an open genus-zero triangle mesh.
    Validate(Flags),
    /// Write the Tutte embedding of a mesh as OBJ texture coordinates.
    Parametrize(Flags),
    /// Turn a mesh into a CGIM container directory.
    Encode(Flags),
    /// Rebuild a mesh from a CGIM container.
    Decode(Flags),
    /// Rate-distortion sweep over the given codecs, written as CSV.
    Evaluate(Flags),
    /// Write a generated test mesh as OBJ.
    GenCorpus(Flags),
}

/// Every flag overrides the same field of the `--config` file.
#[derive(Args)]
struct Flags {
    /// JSON file with PipelineConfig fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Bits per channel: 8 or 16.
    #[arg(long)]
    bits: Option<u8>,
    /// baseline or modified.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    alpha: Option<usize>,
    /// identity, quantize:K or boxblur:W; repeat for a sweep.
    #[arg(long)]
    codec: Vec<LossyCodec>,
    /// Reconstruct by pixel clustering instead of the lossless path.
    #[arg(long)]
    lossy: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples_per_face: Option<usize>,
    /// fan, grid, delaunay-disk or bumpy-disk.
    #[arg(long)]
    kind: Option<CorpusKind>,
    #[arg(long)]
    size: Option<usize>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Failure {
        Failure { code, msg: msg.into() }
    }
}

fn mesh_code(e: &MeshError) -> u8 {
    match e {
        MeshError::Io { .. } => 3,
        _ => 2,
    }
}

fn codec_code(e: &CodecError) -> u8 {
    match e {
        CodecError::Io { .. } => 3,
        CodecError::Malformed(_) | CodecError::Checksum { .. } | CodecError::RunCounts { .. } => 4,
        _ => 2,
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        let code = match &e {
            PipelineError::Config(_) | PipelineError::Topology(_) | PipelineError::Param(_) => 2,
            PipelineError::Isomatrix(IsomatrixError::Param(_)) => 2,
            PipelineError::Isomatrix(_) => 1,
            PipelineError::Mesh(m) => mesh_code(m),
            PipelineError::Codec(c) => codec_code(c),
            PipelineError::Io { .. } => 3,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Failure {
        Failure::new(mesh_code(&e), e.to_string())
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Failure {
        Failure::new(codec_code(&e), e.to_string())
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Failure {
        Failure::new(2, e.to_string())
    }
}

fn config(flags: Flags) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    cfg.input = flags.input.or(cfg.input);
    cfg.output = flags.output.or(cfg.output);
    cfg.bits = flags.bits.unwrap_or(cfg.bits);
    cfg.variant = flags.variant.unwrap_or(cfg.variant);
    cfg.alpha = flags.alpha.unwrap_or(cfg.alpha);
    if !flags.codec.is_empty() {
        cfg.codec = flags.codec;
    }
    cfg.lossy |= flags.lossy;
    cfg.seed = flags.seed.unwrap_or(cfg.seed);
    cfg.samples_per_face = flags.samples_per_face.unwrap_or(cfg.samples_per_face);
    cfg.kind = flags.kind.or(cfg.kind);
    cfg.size = flags.size.or(cfg.size);
    cfg.validate()?;
    Ok(cfg)
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref()
        .ok_or_else(|| Failure::new(2, format!("--{flag} is required")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))
}

/// A closed stdout is not an error worth reporting.
fn print(v: serde_json::Value) {
    let text = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn cmd_validate(cfg: &PipelineConfig) -> Result<(), Failure> {
    let mesh = load_mesh(required(&cfg.input, "input")?)?;
    let report = validate_topology(&mesh);
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    print(json!({
        "valid": report.passes(),
        "vertices": report.vertices,
        "edges": report.edges,
        "faces": report.faces,
        "violations": violations,
    }));
    if report.passes() {
        Ok(())
    } else {
        Err(Failure::new(2, report.to_string()))
    }
}

fn cmd_parametrize(cfg: &PipelineConfig) -> Result<(), Failure> {
    let mesh = load_mesh(required(&cfg.input, "input")?)?;
    cgim::pipeline::check_topology(&mesh)?;
    let param = tutte_parametrize(&mesh)?;
    let out = required(&cfg.output, "output")?;
    save_mesh_with_uv(&mesh, &param.uv, out)?;
    print(json!({
        "vertices": mesh.num_vertices(),
        "corners": param.corners.iter().map(|v| v.0).collect::<Vec<_>>(),
        "residual": tutte_residual(&mesh, &param),
        "output": out,
    }));
    Ok(())
}

fn cmd_encode(cfg: &PipelineConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let mesh = load_mesh(required(&cfg.input, "input")?)?;
    let enc = encode_mesh(&mesh, cfg)?;
    let out = required(&cfg.output, "output")?;
    let bytes = write_cgim(out, &enc.array, &enc.header)?;
    print(json!({
        "r1": enc.header.r1,
        "r2": enc.header.r2,
        "containerBytes": bytes,
        "elapsedMs": start.elapsed().as_millis() as u64,
        "variant": cfg.variant,
        "bits": cfg.bits,
        "output": out,
    }));
    Ok(())
}

fn cmd_decode(cfg: &PipelineConfig) -> Result<(), Failure> {
    let (a, h) = read_cgim(required(&cfg.input, "input")?)?;
    let codec = cfg.single_codec()?;
    let decoded = decode_array(&a, &h, codec, cfg.lossy)?;
    let out = required(&cfg.output, "output")?;
    write_file(out, obj_string(&decoded.mesh, None).as_bytes())?;
    print(json!({
        "vertices": decoded.mesh.num_vertices(),
        "faces": decoded.mesh.num_faces(),
        "edges": decoded.edges.len(),
        "lossy": cfg.lossy,
        "codec": codec,
        "output": out,
    }));
    Ok(())
}

fn cmd_evaluate(cfg: &PipelineConfig) -> Result<(), Failure> {
    let mesh = load_mesh(required(&cfg.input, "input")?)?;
    let rows = evaluate(&mesh, cfg)?;
    if let Some(out) = &cfg.output {
        write_file(out, rows_to_csv(&rows).as_bytes())?;
    }
    print(json!({ "rows": rows, "output": cfg.output }));
    Ok(())
}

fn cmd_gen_corpus(cfg: &PipelineConfig) -> Result<(), Failure> {
    let kind = cfg.kind.ok_or_else(|| Failure::new(2, "--kind is required"))?;
    let size = cfg.size.ok_or_else(|| Failure::new(2, "--size is required"))?;
    let mesh = generate(kind, size, cfg.seed)?;
    let out = required(&cfg.output, "output")?;
    let text = format!(
        "# cgimc gen-corpus kind={kind} size={size} seed={}\n{}",
        cfg.seed,
        obj_string(&mesh, None)
    );
    write_file(out, text.as_bytes())?;
    print(json!({
        "kind": kind,
        "size": size,
        "seed": cfg.seed,
        "vertices": mesh.num_vertices(),
        "faces": mesh.num_faces(),
        "output": out,
    }));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(f) => cmd_validate(&config(f)?),
        Command::Parametrize(f) => cmd_parametrize(&config(f)?),
        Command::Encode(f) => cmd_encode(&config(f)?),
        Command::Decode(f) => cmd_decode(&config(f)?),
        Command::Evaluate(f) => cmd_evaluate(&config(f)?),
        Command::GenCorpus(f) => cmd_gen_corpus(&config(f)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cgimc: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
