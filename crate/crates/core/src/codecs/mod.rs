// SPDX-License-Identifier: Apache-2.0

//! Chunk decoders and the fixture encoders that feed them.
//!
//! A decoder sees compressed bytes only through [`InputBitStream`] and
//! produces output only through [`OutputWindow`]. It loops until the window
//! is full or the input runs dry; whether a short result is an error is up to
//! the caller (see [`OutputWindow::finish`]).

use thiserror::Error;

use crate::bitstream::{BitOrder, BitReadError, InputBitStream};
use crate::container::{CodecId, ElementWidth};
use crate::outwindow::{OutputWindow, WriteError};

pub mod deflate;
pub mod deflate_encode;
pub mod huffman;
pub mod rle_v1;
pub mod rle_v2;

pub use deflate::{decode_deflate, DeflateDecoder};
pub use deflate_encode::{encode_deflate_fixed, encode_deflate_stored};
pub use huffman::{build_huffman_table, Completeness, HuffmanTable};
pub use rle_v1::{decode_rle_v1, encode_rle_v1, RleV1Decoder};
pub use rle_v2::{decode_rle_v2, encode_rle_v2, RleV2Decoder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("compressed stream truncated")]
    Truncated,
    #[error("varint overflow")]
    VarintOverflow,
    #[error(transparent)]
    Read(BitReadError),
    #[error(transparent)]
    Write(#[from] WriteError),
    #[error("invalid deflate block type 3")]
    BadBlockType,
    #[error("stored block LEN {len:#06x} does not match NLEN {nlen:#06x}")]
    LenNlenMismatch { len: u16, nlen: u16 },
    #[error("over-subscribed huffman code lengths")]
    OverSubscribed,
    #[error("incomplete huffman code lengths")]
    IncompleteTree,
    #[error("no nonzero huffman code lengths")]
    EmptyTree,
    #[error("invalid huffman code in stream")]
    InvalidCode,
    #[error("invalid symbol {0}")]
    InvalidSymbol(u16),
    #[error("invalid code-length sequence: {0}")]
    BadCodeLengths(&'static str),
    #[error("distance {distance} reaches before start of chunk (position {position})")]
    DistanceTooFar { distance: usize, position: usize },
    #[error("invalid bit width: {0}")]
    InvalidWidthCode(u32),
    #[error("patch list inconsistent: {0}")]
    PatchOverflow(&'static str),
    #[error("codec requires {0:?} bit order")]
    WrongBitOrder(BitOrder),
    #[error("codec requires element width {0}")]
    WrongElementWidth(usize),
}

impl From<BitReadError> for CodecError {
    fn from(e: BitReadError) -> Self {
        match e {
            BitReadError::PastEnd => CodecError::Truncated,
            BitReadError::VarintOverflow => CodecError::VarintOverflow,
            other => CodecError::Read(other),
        }
    }
}

/// How integer values are mapped onto stream varints and bit-packed fields.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Signedness {
    /// Plain base-128 / plain bit-packed values, as in ORC unsigned streams.
    #[default]
    Unsigned,
    /// Zigzag-mapped values, as in ORC signed streams.
    Signed,
}

impl Signedness {
    #[inline]
    pub(crate) fn decode(self, raw: u64) -> u64 {
        match self {
            Signedness::Unsigned => raw,
            Signedness::Signed => crate::bitstream::zigzag_decode(raw) as u64,
        }
    }

    #[inline]
    pub(crate) fn encode(self, value: u64, width: ElementWidth) -> u64 {
        match self {
            Signedness::Unsigned => value,
            Signedness::Signed => crate::bitstream::zigzag_encode(sign_extend(value, width)),
        }
    }
}

/// Interprets the low `width` bits of `v` as a two's-complement integer.
#[inline]
pub fn sign_extend(v: u64, width: ElementWidth) -> i64 {
    let shift = 64 - width.bits();
    ((v << shift) as i64) >> shift
}

pub trait Decoder {
    fn decode(&self, input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError>;
}

impl CodecId {
    pub fn bit_order(self) -> BitOrder {
        match self {
            CodecId::Deflate => BitOrder::LsbFirst,
            CodecId::RleV1 | CodecId::RleV2 => BitOrder::MsbFirst,
        }
    }
}

/// Decodes one chunk with the unsigned-stream decoder for `codec`.
pub fn decode_chunk(
    codec: CodecId,
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
) -> Result<(), CodecError> {
    match codec {
        CodecId::RleV1 => decode_rle_v1(input, out, Signedness::Unsigned),
        CodecId::RleV2 => decode_rle_v2(input, out, Signedness::Unsigned),
        CodecId::Deflate => decode_deflate(input, out),
    }
}

/// Which deflate block types the built-in encoder may emit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DeflateMode {
    Stored,
    /// Fixed-Huffman LZ77, falling back to stored blocks when smaller.
    #[default]
    Fixed,
}

/// Compresses one chunk of raw bytes. For the RLE codecs `raw` is read as
/// little-endian unsigned elements of `width`.
pub fn encode_chunk(codec: CodecId, width: ElementWidth, raw: &[u8], mode: DeflateMode) -> Vec<u8> {
    match codec {
        CodecId::RleV1 => encode_rle_v1(&elements_from_bytes(raw, width), width, Signedness::Unsigned),
        CodecId::RleV2 => encode_rle_v2(&elements_from_bytes(raw, width), width, Signedness::Unsigned),
        CodecId::Deflate => match mode {
            DeflateMode::Stored => encode_deflate_stored(raw),
            DeflateMode::Fixed => {
                let fixed = encode_deflate_fixed(raw);
                let stored_len = raw.len() + 5 * raw.len().div_ceil(65535).max(1);
                if fixed.len() <= stored_len {
                    fixed
                } else {
                    encode_deflate_stored(raw)
                }
            }
        },
    }
}

/// Splits `raw` into little-endian unsigned elements. Trailing bytes that do
/// not fill an element are ignored.
pub fn elements_from_bytes(raw: &[u8], width: ElementWidth) -> Vec<u64> {
    let w = width.bytes();
    raw.chunks_exact(w)
        .map(|c| {
            let mut b = [0u8; 8];
            b[..w].copy_from_slice(c);
            u64::from_le_bytes(b)
        })
        .collect()
}

pub fn elements_to_bytes(values: &[u64], width: ElementWidth) -> Vec<u8> {
    let w = width.bytes();
    let mut out = Vec::with_capacity(values.len() * w);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes()[..w]);
    }
    out
}
