// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: pack, unpack, verify, bench and gen.
//!
//! Exit status: 0 success, 1 I/O error, 2 bad arguments, 3 malformed archive
//! or chunk, 4 verification mismatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chunkdec::codecs::DeflateMode;
use chunkdec::container::{read_archive, ChunkedArchive, CodecId, ElementWidth};
use chunkdec::corpus::{self, CorpusKind};
use chunkdec::engine::{
    bench_sweep, decompress_archive, pack_bytes, pack_precompressed, EngineConfig, EngineError, EngineStats,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "chunkdec",
    version,
    about = "Chunked RLE/deflate archives with parallel decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecArg {
    Rle1,
    Rle2,
    Deflate,
}

impl From<CodecArg> for CodecId {
    fn from(c: CodecArg) -> Self {
        match c {
            CodecArg::Rle1 => CodecId::RleV1,
            CodecArg::Rle2 => CodecId::RleV2,
            CodecArg::Deflate => CodecId::Deflate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    Constant,
    Arithmetic,
    Random,
    Powerlaw,
    Genome,
    /// Genome and constant chunks mixed, for unit-size experiments.
    Skewed,
}

#[derive(clap::Args)]
struct DecodeOpts {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Fail as soon as a chunk decodes short, before its CRC is checked.
    #[arg(long)]
    strict: bool,
    /// Print engine counters to stderr.
    #[arg(long)]
    stats: bool,
    /// Chunks per scheduling unit.
    #[arg(long, default_value_t = 1)]
    unit_chunks: usize,
    /// Bytes moved per bit-reader refill.
    #[arg(long, default_value_t = chunkdec::bitstream::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
}

impl DecodeOpts {
    fn config(&self) -> EngineConfig {
        let mut cfg = EngineConfig {
            unit_chunks: self.unit_chunks,
            strict_length: self.strict,
            collect_stats: self.stats,
            block_size: self.block_size,
            ..EngineConfig::default()
        };
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a chunked archive.
    Pack {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "rle1")]
        codec: CodecArg,
        /// Element width in bytes: 1, 2, 4 or 8.
        #[arg(long, default_value_t = 1)]
        width: u64,
        #[arg(long, default_value_t = 131072)]
        chunk_size: usize,
        /// Deflate: emit stored blocks only.
        #[arg(long)]
        stored: bool,
        /// Deflate: take chunk payloads from the raw-deflate files in this
        /// directory (one per chunk, in file-name order) instead of encoding.
        #[arg(long, value_name = "DIR")]
        precompressed: Option<PathBuf>,
    },
    /// Decompress an archive.
    Unpack {
        archive: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        opts: DecodeOpts,
    },
    /// Decompress an archive and compare it with the original file.
    Verify {
        archive: PathBuf,
        original: PathBuf,
        #[command(flatten)]
        opts: DecodeOpts,
    },
    /// Measure decompression throughput.
    Bench {
        archive: PathBuf,
        /// Worker counts to sweep, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        unit_chunks: usize,
        /// Print a JSON document instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic corpus.
    Gen {
        #[arg(value_enum)]
        kind: CorpusArg,
        output: PathBuf,
        /// Size in bytes.
        #[arg(long, default_value_t = 16 << 20)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        width: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chunk size used to lay out the skewed corpus.
        #[arg(long, default_value_t = 131072)]
        chunk_size: usize,
    },
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Usage(String),
    Format(String),
    Mismatch(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(..) => 1,
            Failure::Usage(_) => 2,
            Failure::Format(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Usage(m) => write!(f, "bad arguments: {m}"),
            Failure::Format(m) => write!(f, "{m}"),
            Failure::Mismatch(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::BadArguments(m) => Failure::Usage(m),
            other => Failure::Format(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn width_arg(width: u64) -> Result<ElementWidth, Failure> {
    ElementWidth::from_bytes(width).ok_or_else(|| Failure::Usage(format!("width {width} is not 1, 2, 4 or 8")))
}

fn parse_archive(bytes: &[u8]) -> Result<ChunkedArchive<'_>, Failure> {
    read_archive(bytes).map_err(|e| Failure::Format(format!("malformed archive: {e}")))
}

fn print_stats(stats: &EngineStats) {
    let c = &stats.counters;
    eprintln!(
        "chunks={} bytes_in={} bytes_out={} seconds={:.6} throughput_bps={:.0} refill_count={} sync_points={} \
         overlap_copies={} aligned_word_iterations={} runs_written={} literals_written={}",
        c.chunks,
        c.bytes_in,
        c.bytes_out,
        stats.wall_time.as_secs_f64(),
        stats.throughput_bps(),
        c.refill_count,
        c.sync_points,
        c.overlap_copies,
        c.aligned_word_iterations,
        c.runs_written,
        c.literals_written,
    );
    if let Some(slowest) = stats.chunk_durations.iter().enumerate().max_by_key(|(_, d)| **d) {
        eprintln!(
            "slowest_chunk={} slowest_chunk_seconds={:.6}",
            slowest.0,
            slowest.1.as_secs_f64()
        );
    }
}

fn read_precompressed(dir: &Path) -> Result<Vec<Vec<u8>>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Io(dir.to_path_buf(), e))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
    paths.retain(|p| p.is_file());
    paths.sort();
    paths.iter().map(|p| read(p)).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Pack {
            input,
            output,
            codec,
            width,
            chunk_size,
            stored,
            precompressed,
        } => {
            let codec = CodecId::from(codec);
            let width = width_arg(width)?;
            if codec != CodecId::Deflate && (stored || precompressed.is_some()) {
                return Err(Failure::Usage(
                    "--stored and --precompressed apply to deflate only".into(),
                ));
            }
            let raw = read(&input)?;
            let packed = match precompressed {
                Some(dir) => pack_precompressed(&raw, codec, width, chunk_size, read_precompressed(&dir)?)?,
                None => {
                    let mode = if stored {
                        DeflateMode::Stored
                    } else {
                        DeflateMode::Fixed
                    };
                    pack_bytes(&raw, codec, width, chunk_size, mode)?
                }
            };
            write(&output, &packed)?;
            let ratio = if raw.is_empty() {
                0.0
            } else {
                packed.len() as f64 / raw.len() as f64
            };
            println!(
                "codec={codec} width={} chunk_size={chunk_size} chunks={} uncompressed={} compressed={} ratio={ratio:.4}",
                width.bytes(),
                raw.len().div_ceil(chunk_size),
                raw.len(),
                packed.len()
            );
        }
        Command::Unpack { archive, output, opts } => {
            let bytes = read(&archive)?;
            let parsed = parse_archive(&bytes)?;
            let (out, stats) = decompress_archive(&parsed, &opts.config())?;
            write(&output, &out)?;
            if opts.stats {
                print_stats(&stats);
            }
        }
        Command::Verify {
            archive,
            original,
            opts,
        } => {
            let bytes = read(&archive)?;
            let original_bytes = read(&original)?;
            let parsed = parse_archive(&bytes)?;
            let (out, stats) = decompress_archive(&parsed, &opts.config()).map_err(|e| match e {
                EngineError::CrcMismatch { .. } => Failure::Mismatch(e.to_string()),
                other => other.into(),
            })?;
            if opts.stats {
                print_stats(&stats);
            }
            if out.len() != original_bytes.len() {
                return Err(Failure::Mismatch(format!(
                    "archive expands to {} bytes, original has {}",
                    out.len(),
                    original_bytes.len()
                )));
            }
            if let Some(at) = out.iter().zip(&original_bytes).position(|(a, b)| a != b) {
                let chunk = at as u64 / parsed.header.chunk_size;
                return Err(Failure::Mismatch(format!(
                    "first difference at byte {at} (chunk {chunk})"
                )));
            }
            println!(
                "verify: OK ({} bytes, {} chunks, CRCs match)",
                out.len(),
                parsed.chunk_count()
            );
        }
        Command::Bench {
            archive,
            workers,
            reps,
            unit_chunks,
            json,
        } => {
            let bytes = read(&archive)?;
            let parsed = parse_archive(&bytes)?;
            let cfg = EngineConfig {
                unit_chunks,
                ..EngineConfig::default()
            };
            let report = bench_sweep(&parsed, &cfg, &workers, reps)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_key_value());
            }
        }
        Command::Gen {
            kind,
            output,
            size,
            width,
            seed,
            chunk_size,
        } => {
            let width = width_arg(width)?;
            let data = match kind {
                CorpusArg::Skewed => {
                    if chunk_size == 0 {
                        return Err(Failure::Usage("chunk size must be positive".into()));
                    }
                    corpus::skewed(size, chunk_size, seed)
                }
                k => {
                    let kind = match k {
                        CorpusArg::Constant => CorpusKind::ConstantRun,
                        CorpusArg::Arithmetic => CorpusKind::Arithmetic,
                        CorpusArg::Random => CorpusKind::UniformRandom,
                        CorpusArg::Powerlaw => CorpusKind::PowerLaw,
                        _ => CorpusKind::Genome,
                    };
                    corpus::generate(kind, size, width, seed)
                }
            };
            write(&output, &data)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("chunkdec: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
