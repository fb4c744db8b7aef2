// SPDX-License-Identifier: Apache-2.0

//! Chunk-parallel decompression.
//!
//! Workers pull units of `unit_chunks` consecutive chunks from a shared
//! cursor and decode each straight into its slot of one pre-allocated output
//! buffer. Slots are disjoint, so execution order cannot change the result.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::bitstream::{InputBitStream, DEFAULT_BLOCK_SIZE};
use crate::codecs::{decode_chunk, encode_chunk, CodecError, DeflateMode};
use crate::container::{
    crc32, write_archive, ArchiveHeader, ChunkedArchive, CodecId, ContainerError, ElementWidth, PackedChunk,
};
use crate::outwindow::OutputWindow;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("chunk {index}: {source}")]
    Chunk {
        index: usize,
        #[source]
        source: CodecError,
    },
    #[error("chunk {index}: crc mismatch (index has {expected:#010x}, decoded data has {actual:#010x})")]
    CrcMismatch { index: usize, expected: u32, actual: u32 },
    #[error("chunk {index}: decoded {written} of {expected} bytes")]
    UnderRun {
        index: usize,
        written: usize,
        expected: usize,
    },
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("invalid arguments: {0}")]
    BadArguments(String),
}

impl EngineError {
    pub fn chunk_index(&self) -> Option<usize> {
        match self {
            EngineError::Chunk { index, .. }
            | EngineError::CrcMismatch { index, .. }
            | EngineError::UnderRun { index, .. } => Some(*index),
            EngineError::Container(ContainerError::TruncatedPayload { index }) => Some(*index),
            _ => None,
        }
    }
}

pub fn available_workers() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers: usize,
    /// Chunks decoded back to back by one task.
    pub unit_chunks: usize,
    /// Treat a chunk that decodes short as an error even before its CRC is
    /// checked.
    pub strict_length: bool,
    /// Record per-chunk decode durations. Counters are always kept.
    pub collect_stats: bool,
    pub block_size: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            workers: available_workers(),
            unit_chunks: 1,
            strict_length: true,
            collect_stats: false,
            block_size: DEFAULT_BLOCK_SIZE,
        }
    }
}

impl EngineConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.workers == 0 {
            return Err(EngineError::BadArguments("workers must be at least 1".into()));
        }
        if self.unit_chunks == 0 {
            return Err(EngineError::BadArguments("unit_chunks must be at least 1".into()));
        }
        if self.block_size == 0 {
            return Err(EngineError::BadArguments("block_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters that depend only on the archive and the block size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub chunks: u64,
    pub refill_count: u64,
    pub sync_points: u64,
    pub bytes_refilled: u64,
    pub overlap_copies: u64,
    pub aligned_word_iterations: u64,
    pub head_pad_bytes: u64,
    pub runs_written: u64,
    pub literals_written: u64,
    pub bytes_in: u64,
    pub bytes_out: u64,
}

impl Counters {
    pub fn merge(&mut self, o: &Counters) {
        self.chunks += o.chunks;
        self.refill_count += o.refill_count;
        self.sync_points += o.sync_points;
        self.bytes_refilled += o.bytes_refilled;
        self.overlap_copies += o.overlap_copies;
        self.aligned_word_iterations += o.aligned_word_iterations;
        self.head_pad_bytes += o.head_pad_bytes;
        self.runs_written += o.runs_written;
        self.literals_written += o.literals_written;
        self.bytes_in += o.bytes_in;
        self.bytes_out += o.bytes_out;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineStats {
    pub counters: Counters,
    pub wall_time: Duration,
    /// Indexed by chunk; empty unless `collect_stats` is set.
    pub chunk_durations: Vec<Duration>,
}

impl EngineStats {
    pub fn throughput_bps(&self) -> f64 {
        throughput(self.counters.bytes_out, self.wall_time)
    }
}

fn throughput(bytes: u64, t: Duration) -> f64 {
    if bytes == 0 {
        return 0.0;
    }
    bytes as f64 / t.max(Duration::from_nanos(1)).as_secs_f64()
}

fn decode_one(
    archive: &ChunkedArchive<'_>,
    index: usize,
    dst: &mut [u8],
    cfg: &EngineConfig,
) -> Result<Counters, EngineError> {
    let header = &archive.header;
    let (data, entry) = archive.chunk_slice(index)?;
    let mut input = InputBitStream::new(data, header.codec.bit_order(), cfg.block_size);
    let mut out = OutputWindow::new(dst, header.element_width);
    decode_chunk(header.codec, &mut input, &mut out).map_err(|source| EngineError::Chunk { index, source })?;
    let (written, copy) = out.into_parts();
    if cfg.strict_length && written < dst.len() {
        return Err(EngineError::UnderRun {
            index,
            written,
            expected: dst.len(),
        });
    }
    if written < dst.len() {
        // A reused buffer may still hold an earlier decode here.
        dst[written..].fill(0);
    }
    let actual = crc32(dst);
    if actual != entry.crc32 {
        return Err(EngineError::CrcMismatch {
            index,
            expected: entry.crc32,
            actual,
        });
    }
    let read = input.stats();
    Ok(Counters {
        chunks: 1,
        refill_count: read.refills,
        sync_points: read.sync_points,
        bytes_refilled: read.bytes_refilled,
        overlap_copies: copy.overlap_copies,
        aligned_word_iterations: copy.aligned_word_iterations,
        head_pad_bytes: copy.head_pad_bytes,
        runs_written: copy.runs_written,
        literals_written: copy.literals_written,
        bytes_in: data.len() as u64,
        bytes_out: written as u64,
    })
}

#[derive(Default)]
struct Partial {
    counters: Counters,
    durations: Vec<(usize, Duration)>,
    errors: Vec<EngineError>,
}

/// Decodes every chunk and returns the concatenated output.
pub fn decompress_archive(
    archive: &ChunkedArchive<'_>,
    cfg: &EngineConfig,
) -> Result<(Vec<u8>, EngineStats), EngineError> {
    let mut output = vec![0u8; archive.header.total_uncompressed as usize];
    let stats = decompress_into(archive, cfg, &mut output)?;
    Ok((output, stats))
}

/// As [`decompress_archive`], into a caller-provided buffer of exactly the
/// archive's uncompressed size.
///
/// Every chunk is attempted even after a failure; the error reported is the
/// one with the lowest chunk index, so it does not depend on scheduling.
pub fn decompress_into(
    archive: &ChunkedArchive<'_>,
    cfg: &EngineConfig,
    output: &mut [u8],
) -> Result<EngineStats, EngineError> {
    cfg.validate()?;
    let header = &archive.header;
    if output.len() as u64 != header.total_uncompressed {
        return Err(EngineError::BadArguments(format!(
            "output buffer holds {} bytes, archive expands to {}",
            output.len(),
            header.total_uncompressed
        )));
    }
    let n = archive.chunk_count();
    let chunk_size = header.chunk_size as usize;
    let span = chunk_size.saturating_mul(cfg.unit_chunks);
    let units: Vec<Mutex<Option<&mut [u8]>>> = output.chunks_mut(span).map(|s| Mutex::new(Some(s))).collect();
    let cursor = AtomicUsize::new(0);
    let merged = Mutex::new(Partial::default());

    let work = || {
        let mut local = Partial::default();
        loop {
            let u = cursor.fetch_add(1, Ordering::Relaxed);
            if u >= units.len() {
                break;
            }
            let slot = units[u].lock().unwrap().take().expect("each unit is claimed once");
            for (k, dst) in slot.chunks_mut(chunk_size).enumerate() {
                let index = u * cfg.unit_chunks + k;
                let t0 = cfg.collect_stats.then(Instant::now);
                match decode_one(archive, index, dst, cfg) {
                    Ok(c) => local.counters.merge(&c),
                    Err(e) => local.errors.push(e),
                }
                if let Some(t0) = t0 {
                    local.durations.push((index, t0.elapsed()));
                }
            }
        }
        let mut m = merged.lock().unwrap();
        m.counters.merge(&local.counters);
        m.durations.append(&mut local.durations);
        m.errors.append(&mut local.errors);
    };

    let start = Instant::now();
    let workers = cfg.workers.min(units.len()).max(1);
    if workers == 1 {
        work();
    } else {
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    let wall_time = start.elapsed();

    let partial = merged.into_inner().unwrap();
    if let Some(e) = partial
        .errors
        .into_iter()
        .min_by_key(|e| e.chunk_index().unwrap_or(usize::MAX))
    {
        return Err(e);
    }
    let mut chunk_durations = Vec::new();
    if cfg.collect_stats {
        chunk_durations = vec![Duration::ZERO; n];
        for (i, d) in partial.durations {
            chunk_durations[i] = d;
        }
    }
    Ok(EngineStats {
        counters: partial.counters,
        wall_time,
        chunk_durations,
    })
}

fn check_pack_args(len: usize, width: ElementWidth, chunk_size: usize) -> Result<(), EngineError> {
    let w = width.bytes();
    if chunk_size == 0 || !chunk_size.is_multiple_of(w) {
        return Err(EngineError::BadArguments(format!(
            "chunk size {chunk_size} must be a positive multiple of the element width {w}"
        )));
    }
    if !len.is_multiple_of(w) {
        return Err(EngineError::BadArguments(format!(
            "input length {len} is not a multiple of the element width {w}"
        )));
    }
    Ok(())
}

/// Splits `raw` into chunks, compresses each, and serializes the archive.
pub fn pack_bytes(
    raw: &[u8],
    codec: CodecId,
    width: ElementWidth,
    chunk_size: usize,
    mode: DeflateMode,
) -> Result<Vec<u8>, EngineError> {
    check_pack_args(raw.len(), width, chunk_size)?;
    let header = ArchiveHeader::new(codec, width, chunk_size as u64, raw.len() as u64);
    header.validate()?;
    let chunks: Vec<PackedChunk> = raw
        .chunks(chunk_size)
        .map(|c| PackedChunk::new(encode_chunk(codec, width, c, mode), c))
        .collect();
    Ok(write_archive(&header, &chunks)?)
}

/// Builds an archive from chunk payloads compressed elsewhere. `raw` is the
/// original data, used for the chunk lengths and CRCs.
pub fn pack_precompressed(
    raw: &[u8],
    codec: CodecId,
    width: ElementWidth,
    chunk_size: usize,
    compressed: Vec<Vec<u8>>,
) -> Result<Vec<u8>, EngineError> {
    check_pack_args(raw.len(), width, chunk_size)?;
    let header = ArchiveHeader::new(codec, width, chunk_size as u64, raw.len() as u64);
    header.validate()?;
    if compressed.len() as u64 != header.chunk_count {
        return Err(EngineError::BadArguments(format!(
            "{} compressed chunks supplied, input splits into {}",
            compressed.len(),
            header.chunk_count
        )));
    }
    let chunks: Vec<PackedChunk> = compressed
        .into_iter()
        .zip(raw.chunks(chunk_size))
        .map(|(c, r)| PackedChunk::new(c, r))
        .collect();
    Ok(write_archive(&header, &chunks)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub codec: String,
    pub chunk_size: u64,
    pub workers: usize,
    pub unit_chunks: usize,
    pub repetitions: usize,
    pub bytes_out: u64,
    /// Median wall time.
    pub seconds: f64,
    /// `bytes_out / seconds`.
    pub throughput_bps: f64,
    pub min_bps: f64,
    pub max_bps: f64,
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// One line of `key=value` pairs per row.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let c = &r.counters;
            s.push_str(&format!(
                "codec={} chunk_size={} workers={} unit_chunks={} repetitions={} bytes_out={} seconds={:.6} \
                 throughput_bps={:.0} min_bps={:.0} max_bps={:.0} chunks={} refill_count={} sync_points={} \
                 overlap_copies={} runs_written={} literals_written={} bytes_in={}\n",
                r.codec,
                r.chunk_size,
                r.workers,
                r.unit_chunks,
                r.repetitions,
                r.bytes_out,
                r.seconds,
                r.throughput_bps,
                r.min_bps,
                r.max_bps,
                c.chunks,
                c.refill_count,
                c.sync_points,
                c.overlap_copies,
                c.runs_written,
                c.literals_written,
                c.bytes_in,
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Times `repetitions` decodes after one untimed warm-up run.
pub fn bench_decompress(
    archive: &ChunkedArchive<'_>,
    cfg: &EngineConfig,
    repetitions: usize,
) -> Result<BenchRow, EngineError> {
    if repetitions == 0 {
        return Err(EngineError::BadArguments("repetitions must be at least 1".into()));
    }
    let mut output = vec![0u8; archive.header.total_uncompressed as usize];
    let warm = decompress_into(archive, cfg, &mut output)?;
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let stats = decompress_into(archive, cfg, &mut output)?;
        debug_assert_eq!(stats.counters, warm.counters);
        times.push(stats.wall_time);
    }
    times.sort();
    // Lower middle: the reported rate is then one of the samples, and
    // seconds and throughput stay exact reciprocals for even counts too.
    let median = times[(times.len() - 1) / 2];
    let bytes_out = warm.counters.bytes_out;
    Ok(BenchRow {
        codec: archive.header.codec.name().to_string(),
        chunk_size: archive.header.chunk_size,
        workers: cfg.workers,
        unit_chunks: cfg.unit_chunks,
        repetitions,
        bytes_out,
        seconds: median.as_secs_f64(),
        throughput_bps: throughput(bytes_out, median),
        min_bps: throughput(bytes_out, times[times.len() - 1]),
        max_bps: throughput(bytes_out, times[0]),
        counters: warm.counters,
    })
}

/// One [`bench_decompress`] row per worker count.
pub fn bench_sweep(
    archive: &ChunkedArchive<'_>,
    cfg: &EngineConfig,
    workers: &[usize],
    repetitions: usize,
) -> Result<BenchReport, EngineError> {
    let rows = workers
        .iter()
        .map(|&w| {
            let cfg = EngineConfig {
                workers: w,
                ..cfg.clone()
            };
            bench_decompress(archive, &cfg, repetitions)
        })
        .collect::<Result<_, _>>()?;
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::read_archive;
    use crate::corpus::{generate, CorpusKind};

    fn sample(codec: CodecId, width: ElementWidth) -> (Vec<u8>, Vec<u8>) {
        let raw = generate(CorpusKind::Arithmetic, 300_000, width, 11);
        let packed = pack_bytes(&raw, codec, width, 16 * 1024, DeflateMode::Fixed).unwrap();
        (raw, packed)
    }

    #[test]
    fn round_trip_all_codecs() {
        for (codec, width) in [
            (CodecId::RleV1, ElementWidth::W4),
            (CodecId::RleV2, ElementWidth::W8),
            (CodecId::Deflate, ElementWidth::W1),
        ] {
            let (raw, packed) = sample(codec, width);
            let archive = read_archive(&packed).unwrap();
            let (out, stats) = decompress_archive(&archive, &EngineConfig::with_workers(3)).unwrap();
            assert_eq!(out, raw, "{codec}");
            assert_eq!(stats.counters.bytes_out, raw.len() as u64);
            assert_eq!(stats.counters.chunks, archive.chunk_count() as u64);
        }
    }

    #[test]
    fn deterministic_across_workers_and_units() {
        let (_, packed) = sample(CodecId::Deflate, ElementWidth::W1);
        let archive = read_archive(&packed).unwrap();
        let (base, base_stats) = decompress_archive(&archive, &EngineConfig::with_workers(1)).unwrap();
        for workers in [2, 8] {
            for unit_chunks in [1, 3] {
                let cfg = EngineConfig {
                    workers,
                    unit_chunks,
                    ..EngineConfig::default()
                };
                let (out, stats) = decompress_archive(&archive, &cfg).unwrap();
                assert_eq!(out, base);
                assert_eq!(stats.counters, base_stats.counters);
            }
        }
    }

    #[test]
    fn empty_archive() {
        let packed = pack_bytes(&[], CodecId::RleV1, ElementWidth::W1, 1024, DeflateMode::Fixed).unwrap();
        let archive = read_archive(&packed).unwrap();
        let (out, stats) = decompress_archive(&archive, &EngineConfig::with_workers(4)).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.counters, Counters::default());
    }

    #[test]
    fn corrupted_chunk_is_named() {
        let (_, mut packed) = sample(CodecId::Deflate, ElementWidth::W1);
        let archive = read_archive(&packed).unwrap();
        let (start, len) = {
            let e = &archive.index[5];
            (e.compressed_offset as usize, e.compressed_length as usize)
        };
        let payload_start = packed.len() - archive.payload.len();
        for b in &mut packed[payload_start + start + len / 2..payload_start + start + len / 2 + 8] {
            *b ^= 0x5A;
        }
        let archive = read_archive(&packed).unwrap();
        let err = decompress_archive(&archive, &EngineConfig::with_workers(4)).unwrap_err();
        assert_eq!(err.chunk_index(), Some(5), "{err}");
    }

    #[test]
    fn crc_mismatch_is_reported() {
        let raw = vec![7u8; 5000];
        let mut packed = pack_bytes(&raw, CodecId::RleV1, ElementWidth::W1, 1000, DeflateMode::Fixed).unwrap();
        // crc32 field of index entry 2.
        let at = crate::container::HEADER_LEN + 2 * crate::container::INDEX_ENTRY_LEN + 24;
        packed[at] ^= 1;
        let archive = read_archive(&packed).unwrap();
        match decompress_archive(&archive, &EngineConfig::with_workers(2)) {
            Err(EngineError::CrcMismatch { index: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chunk_durations_when_requested() {
        let (_, packed) = sample(CodecId::RleV2, ElementWidth::W8);
        let archive = read_archive(&packed).unwrap();
        let cfg = EngineConfig {
            collect_stats: true,
            ..EngineConfig::with_workers(2)
        };
        let (_, stats) = decompress_archive(&archive, &cfg).unwrap();
        assert_eq!(stats.chunk_durations.len(), archive.chunk_count());
    }

    #[test]
    fn bench_shapes() {
        let (_, packed) = sample(CodecId::RleV1, ElementWidth::W4);
        let archive = read_archive(&packed).unwrap();
        let cfg = EngineConfig::with_workers(1);
        let row = bench_decompress(&archive, &cfg, 1).unwrap();
        assert_eq!(row.min_bps, row.throughput_bps);
        assert_eq!(row.max_bps, row.throughput_bps);
        assert_eq!(row.throughput_bps, row.bytes_out as f64 / row.seconds);

        let report = bench_sweep(&archive, &cfg, &[1, 2, 4], 3).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.to_key_value().lines().count(), 3);
        for r in &report.rows {
            assert!(r.min_bps <= r.throughput_bps && r.throughput_bps <= r.max_bps);
        }
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["rows"][2]["workers"], 4);
        assert!(v["rows"][0]["counters"]["refill_count"].is_u64());
        assert!(bench_decompress(&archive, &cfg, 0).is_err());
    }

    #[test]
    fn pack_argument_checks() {
        assert!(matches!(
            pack_bytes(&[0; 7], CodecId::RleV2, ElementWidth::W8, 1024, DeflateMode::Fixed),
            Err(EngineError::BadArguments(_))
        ));
        assert!(matches!(
            pack_bytes(&[0; 8], CodecId::RleV2, ElementWidth::W8, 1020, DeflateMode::Fixed),
            Err(EngineError::BadArguments(_))
        ));
        assert!(pack_bytes(&[0; 8], CodecId::Deflate, ElementWidth::W2, 1024, DeflateMode::Fixed).is_err());
        assert!(EngineConfig {
            workers: 0,
            ..EngineConfig::default()
        }
        .validate()
        .is_err());
    }
}
