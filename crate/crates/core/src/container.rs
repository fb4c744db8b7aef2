// SPDX-License-Identifier: Apache-2.0

//! Self-describing chunked archive.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "CODAGAR\0"   8
//! version             u32
//! codec_id            u32
//! element_width       u32
//! chunk_size          u64
//! total_uncompressed  u64
//! chunk_count         u64
//! index entry × chunk_count:
//!     compressed_offset   u64
//!     compressed_length   u64
//!     uncompressed_length u64
//!     crc32               u32
//!     pad                 u32
//! payload
//! ```
//!
//! Every chunk except possibly the last holds exactly `chunk_size`
//! uncompressed bytes and decodes on its own.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"CODAGAR\0";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;
pub const INDEX_ENTRY_LEN: usize = 32;
pub const DEFAULT_CHUNK_SIZE: u64 = 128 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unknown codec id {0}")]
    UnknownCodec(u32),
    #[error("input shorter than the archive header")]
    TruncatedHeader,
    #[error("index truncated: need {needed} bytes, have {have}")]
    TruncatedIndex { needed: usize, have: usize },
    #[error("chunk {index} extends past end of payload")]
    TruncatedPayload { index: usize },
    #[error("inconsistent lengths: {0}")]
    InconsistentLengths(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("chunk index {index} out of range ({count} chunks)")]
    IndexOutOfRange { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CodecId {
    RleV1,
    RleV2,
    Deflate,
}

impl CodecId {
    pub fn to_u32(self) -> u32 {
        match self {
            CodecId::RleV1 => 0,
            CodecId::RleV2 => 1,
            CodecId::Deflate => 2,
        }
    }

    pub fn from_u32(v: u32) -> Option<Self> {
        match v {
            0 => Some(CodecId::RleV1),
            1 => Some(CodecId::RleV2),
            2 => Some(CodecId::Deflate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecId::RleV1 => "rle1",
            CodecId::RleV2 => "rle2",
            CodecId::Deflate => "deflate",
        }
    }
}

impl fmt::Display for CodecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Size in bytes of one integer element: 1, 2, 4 or 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementWidth {
    W1,
    W2,
    W4,
    W8,
}

impl ElementWidth {
    pub fn from_bytes(n: u64) -> Option<Self> {
        match n {
            1 => Some(Self::W1),
            2 => Some(Self::W2),
            4 => Some(Self::W4),
            8 => Some(Self::W8),
            _ => None,
        }
    }

    #[inline]
    pub fn bytes(self) -> usize {
        match self {
            Self::W1 => 1,
            Self::W2 => 2,
            Self::W4 => 4,
            Self::W8 => 8,
        }
    }

    #[inline]
    pub fn bits(self) -> u32 {
        8 * self.bytes() as u32
    }

    /// Mask selecting the low `bits()` bits of a u64.
    #[inline]
    pub fn mask(self) -> u64 {
        match self {
            Self::W8 => u64::MAX,
            w => (1u64 << w.bits()) - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchiveHeader {
    pub version: u32,
    pub codec: CodecId,
    pub element_width: ElementWidth,
    pub chunk_size: u64,
    pub total_uncompressed: u64,
    pub chunk_count: u64,
}

impl ArchiveHeader {
    pub fn new(codec: CodecId, element_width: ElementWidth, chunk_size: u64, total: u64) -> Self {
        let chunk_count = if chunk_size == 0 { 0 } else { total.div_ceil(chunk_size) };
        Self {
            version: FORMAT_VERSION,
            codec,
            element_width,
            chunk_size,
            total_uncompressed: total,
            chunk_count,
        }
    }

    pub fn validate(&self) -> Result<(), ContainerError> {
        let w = self.element_width.bytes() as u64;
        if self.chunk_size == 0 || !self.chunk_size.is_multiple_of(w) {
            return Err(ContainerError::InvariantViolation(format!(
                "chunk_size {} must be a positive multiple of element width {w}",
                self.chunk_size
            )));
        }
        if self.codec == CodecId::Deflate && w != 1 {
            return Err(ContainerError::InvariantViolation(
                "deflate archives use element width 1".into(),
            ));
        }
        if !self.total_uncompressed.is_multiple_of(w) {
            return Err(ContainerError::InvariantViolation(format!(
                "total size {} is not a multiple of element width {w}",
                self.total_uncompressed
            )));
        }
        if self.chunk_count != self.total_uncompressed.div_ceil(self.chunk_size) {
            return Err(ContainerError::InvariantViolation(format!(
                "chunk_count {} != ceil({} / {})",
                self.chunk_count, self.total_uncompressed, self.chunk_size
            )));
        }
        Ok(())
    }

    /// Uncompressed length of chunk `i` implied by the header.
    pub fn chunk_len(&self, i: u64) -> u64 {
        let start = i * self.chunk_size;
        self.chunk_size.min(self.total_uncompressed - start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkIndexEntry {
    pub compressed_offset: u64,
    pub compressed_length: u64,
    pub uncompressed_length: u64,
    pub crc32: u32,
}

/// One compressed chunk handed to [`write_archive`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedChunk {
    pub compressed: Vec<u8>,
    pub uncompressed_length: u64,
    pub crc32: u32,
}

impl PackedChunk {
    pub fn new(compressed: Vec<u8>, uncompressed: &[u8]) -> Self {
        Self {
            compressed,
            uncompressed_length: uncompressed.len() as u64,
            crc32: crc32(uncompressed),
        }
    }
}

/// Parsed archive borrowing its payload from the input bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedArchive<'a> {
    pub header: ArchiveHeader,
    pub index: Vec<ChunkIndexEntry>,
    pub payload: &'a [u8],
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

fn check_index(header: &ArchiveHeader, lengths: impl ExactSizeIterator<Item = u64>) -> Result<(), ContainerError> {
    if lengths.len() as u64 != header.chunk_count {
        return Err(ContainerError::InconsistentLengths(format!(
            "{} chunks supplied, header expects {}",
            lengths.len(),
            header.chunk_count
        )));
    }
    for (i, len) in lengths.enumerate() {
        let want = header.chunk_len(i as u64);
        if len != want {
            return Err(ContainerError::InconsistentLengths(format!(
                "chunk {i} holds {len} uncompressed bytes, expected {want}"
            )));
        }
    }
    Ok(())
}

pub fn write_archive(header: &ArchiveHeader, chunks: &[PackedChunk]) -> Result<Vec<u8>, ContainerError> {
    header
        .validate()
        .map_err(|e| ContainerError::InconsistentLengths(e.to_string()))?;
    check_index(header, chunks.iter().map(|c| c.uncompressed_length))?;

    let payload_len: usize = chunks.iter().map(|c| c.compressed.len()).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + chunks.len() * INDEX_ENTRY_LEN + payload_len);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&header.version.to_le_bytes());
    out.extend_from_slice(&header.codec.to_u32().to_le_bytes());
    out.extend_from_slice(&(header.element_width.bytes() as u32).to_le_bytes());
    out.extend_from_slice(&header.chunk_size.to_le_bytes());
    out.extend_from_slice(&header.total_uncompressed.to_le_bytes());
    out.extend_from_slice(&header.chunk_count.to_le_bytes());

    let mut offset = 0u64;
    for c in chunks {
        out.extend_from_slice(&offset.to_le_bytes());
        out.extend_from_slice(&(c.compressed.len() as u64).to_le_bytes());
        out.extend_from_slice(&c.uncompressed_length.to_le_bytes());
        out.extend_from_slice(&c.crc32.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        offset += c.compressed.len() as u64;
    }
    for c in chunks {
        out.extend_from_slice(&c.compressed);
    }
    Ok(out)
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn read_archive(bytes: &[u8]) -> Result<ChunkedArchive<'_>, ContainerError> {
    if bytes.len() < HEADER_LEN {
        return Err(ContainerError::TruncatedHeader);
    }
    if bytes[..8] != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let version = u32_at(bytes, 8);
    if version != FORMAT_VERSION {
        return Err(ContainerError::BadVersion(version));
    }
    let codec_raw = u32_at(bytes, 12);
    let codec = CodecId::from_u32(codec_raw).ok_or(ContainerError::UnknownCodec(codec_raw))?;
    let width_raw = u32_at(bytes, 16);
    let element_width = ElementWidth::from_bytes(width_raw as u64)
        .ok_or_else(|| ContainerError::InvariantViolation(format!("element width {width_raw} not in {{1,2,4,8}}")))?;
    let header = ArchiveHeader {
        version,
        codec,
        element_width,
        chunk_size: u64_at(bytes, 20),
        total_uncompressed: u64_at(bytes, 28),
        chunk_count: u64_at(bytes, 36),
    };
    header.validate()?;

    let count = header.chunk_count as usize;
    let needed = count
        .checked_mul(INDEX_ENTRY_LEN)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .filter(|&n| n <= bytes.len())
        .ok_or(ContainerError::TruncatedIndex {
            needed: HEADER_LEN.saturating_add(count.saturating_mul(INDEX_ENTRY_LEN)),
            have: bytes.len(),
        })?;

    let mut index = Vec::with_capacity(count);
    for i in 0..count {
        let at = HEADER_LEN + i * INDEX_ENTRY_LEN;
        index.push(ChunkIndexEntry {
            compressed_offset: u64_at(bytes, at),
            compressed_length: u64_at(bytes, at + 8),
            uncompressed_length: u64_at(bytes, at + 16),
            crc32: u32_at(bytes, at + 24),
        });
    }
    let payload = &bytes[needed..];

    let mut expected_offset = 0u64;
    for (i, e) in index.iter().enumerate() {
        let end = e
            .compressed_offset
            .checked_add(e.compressed_length)
            .ok_or(ContainerError::TruncatedPayload { index: i })?;
        if end > payload.len() as u64 {
            return Err(ContainerError::TruncatedPayload { index: i });
        }
        if e.compressed_offset != expected_offset {
            return Err(ContainerError::InvariantViolation(format!(
                "chunk {i} starts at {}, expected {expected_offset}",
                e.compressed_offset
            )));
        }
        expected_offset = end;
    }
    if expected_offset != payload.len() as u64 {
        return Err(ContainerError::InvariantViolation(format!(
            "index covers {expected_offset} payload bytes, payload has {}",
            payload.len()
        )));
    }
    check_index(&header, index.iter().map(|e| e.uncompressed_length))
        .map_err(|e| ContainerError::InvariantViolation(e.to_string()))?;

    Ok(ChunkedArchive { header, index, payload })
}

impl<'a> ChunkedArchive<'a> {
    pub fn chunk_count(&self) -> usize {
        self.index.len()
    }

    /// Compressed bytes of chunk `i` and its index entry.
    pub fn chunk_slice(&self, i: usize) -> Result<(&'a [u8], &ChunkIndexEntry), ContainerError> {
        let e = self.index.get(i).ok_or(ContainerError::IndexOutOfRange {
            index: i,
            count: self.index.len(),
        })?;
        let start = e.compressed_offset as usize;
        let payload: &'a [u8] = self.payload;
        Ok((&payload[start..start + e.compressed_length as usize], e))
    }

    /// Offset of chunk `i` in the uncompressed stream.
    pub fn uncompressed_offset(&self, i: usize) -> u64 {
        i as u64 * self.header.chunk_size
    }

    pub fn compressed_len(&self) -> usize {
        HEADER_LEN + self.index.len() * INDEX_ENTRY_LEN + self.payload.len()
    }
}
