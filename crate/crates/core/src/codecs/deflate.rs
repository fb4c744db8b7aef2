// SPDX-License-Identifier: Apache-2.0

//! Raw deflate (no zlib or gzip wrapper).
//!
//! Every chunk is an independent stream: back-references may only reach
//! bytes produced earlier in the same chunk.

use std::sync::OnceLock;

use crate::bitstream::{BitOrder, InputBitStream};
use crate::container::ElementWidth;
use crate::outwindow::OutputWindow;

use super::huffman::{Completeness, HuffmanTable};
use super::{CodecError, Decoder};

pub(crate) const LEN_BASE: [u16; 29] = [
    3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15, 17, 19, 23, 27, 31, 35, 43, 51, 59, 67, 83, 99, 115, 131, 163, 195, 227, 258,
];
pub(crate) const LEN_EXTRA: [u8; 29] = [
    0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 5, 5, 0,
];
pub(crate) const DIST_BASE: [u16; 30] = [
    1, 2, 3, 4, 5, 7, 9, 13, 17, 25, 33, 49, 65, 97, 129, 193, 257, 385, 513, 769, 1025, 1537, 2049, 3073, 4097, 6145,
    8193, 12289, 16385, 24577,
];
pub(crate) const DIST_EXTRA: [u8; 30] = [
    0, 0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13,
];

/// Order in which code-length code lengths are transmitted.
const CLEN_ORDER: [usize; 19] = [16, 17, 18, 0, 8, 7, 9, 6, 10, 5, 11, 4, 12, 3, 13, 2, 14, 1, 15];

#[derive(Debug, Clone, Copy, Default)]
pub struct DeflateDecoder;

impl Decoder for DeflateDecoder {
    fn decode(&self, input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError> {
        decode_deflate(input, out)
    }
}

pub(crate) fn fixed_lit_lengths() -> [u8; 288] {
    let mut l = [0u8; 288];
    l[..144].fill(8);
    l[144..256].fill(9);
    l[256..280].fill(7);
    l[280..].fill(8);
    l
}

fn fixed_tables() -> &'static (HuffmanTable, HuffmanTable) {
    static TABLES: OnceLock<(HuffmanTable, HuffmanTable)> = OnceLock::new();
    TABLES.get_or_init(|| {
        let lit = HuffmanTable::new(&fixed_lit_lengths(), Completeness::Strict).expect("fixed literal table");
        // All 32 codes are built so the code space is complete; 30 and 31
        // are rejected when they occur.
        let dist = HuffmanTable::new(&[5u8; 32], Completeness::Strict).expect("fixed distance table");
        (lit, dist)
    })
}

/// Decodes blocks until the one marked final has been consumed.
pub fn decode_deflate(input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError> {
    if input.bit_order() != BitOrder::LsbFirst {
        return Err(CodecError::WrongBitOrder(BitOrder::LsbFirst));
    }
    if out.element_width() != ElementWidth::W1 {
        return Err(CodecError::WrongElementWidth(1));
    }
    loop {
        let header = input.fetch_bits(3)?;
        let last = header & 1 == 1;
        match header >> 1 {
            0 => stored_block(input, out)?,
            1 => {
                let (lit, dist) = fixed_tables();
                huffman_block(input, out, lit, Some(dist))?;
            }
            2 => {
                let (lit, dist) = read_dynamic_tables(input)?;
                huffman_block(input, out, &lit, dist.as_ref())?;
            }
            _ => return Err(CodecError::BadBlockType),
        }
        if last {
            return Ok(());
        }
    }
}

fn stored_block(input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError> {
    input.align_to_byte();
    let len = input.fetch_bits(16)? as u16;
    let nlen = input.fetch_bits(16)? as u16;
    if len != !nlen {
        return Err(CodecError::LenNlenMismatch { len, nlen });
    }
    let mut scratch = [0u8; 4096];
    let mut left = len as usize;
    while left > 0 {
        let n = left.min(scratch.len());
        input.read_bytes(&mut scratch[..n])?;
        out.write_literal_bytes(&scratch[..n])?;
        left -= n;
    }
    Ok(())
}

fn read_dynamic_tables(input: &mut InputBitStream<'_>) -> Result<(HuffmanTable, Option<HuffmanTable>), CodecError> {
    let hlit = input.fetch_bits(5)? as usize + 257;
    let hdist = input.fetch_bits(5)? as usize + 1;
    let hclen = input.fetch_bits(4)? as usize + 4;
    if hlit > 286 || hdist > 30 {
        return Err(CodecError::BadCodeLengths("too many length or distance codes"));
    }

    let mut clen = [0u8; 19];
    for &slot in &CLEN_ORDER[..hclen] {
        clen[slot] = input.fetch_bits(3)? as u8;
    }
    let clen_table = HuffmanTable::new(&clen, Completeness::Strict)?;

    let mut lengths = [0u8; 286 + 30];
    let total = hlit + hdist;
    let mut i = 0;
    while i < total {
        let sym = clen_table.decode_symbol(input)?;
        let (value, repeat) = match sym {
            0..=15 => (sym as u8, 1),
            16 => {
                if i == 0 {
                    return Err(CodecError::BadCodeLengths("repeat with no previous length"));
                }
                (lengths[i - 1], 3 + input.fetch_bits(2)? as usize)
            }
            17 => (0, 3 + input.fetch_bits(3)? as usize),
            18 => (0, 11 + input.fetch_bits(7)? as usize),
            _ => return Err(CodecError::InvalidSymbol(sym)),
        };
        if i + repeat > total {
            return Err(CodecError::BadCodeLengths("repeat runs past the end"));
        }
        lengths[i..i + repeat].fill(value);
        i += repeat;
    }

    let (lit_lengths, dist_lengths) = lengths[..total].split_at(hlit);
    if lit_lengths[256] == 0 {
        return Err(CodecError::BadCodeLengths("missing end-of-block code"));
    }
    let lit = HuffmanTable::new(lit_lengths, Completeness::AllowSingle)?;
    // A block made only of literals may send no distance codes at all.
    let dist = if dist_lengths.iter().all(|&l| l == 0) {
        None
    } else {
        Some(HuffmanTable::new(dist_lengths, Completeness::AllowSingle)?)
    };
    Ok((lit, dist))
}

fn huffman_block(
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
    lit: &HuffmanTable,
    dist: Option<&HuffmanTable>,
) -> Result<(), CodecError> {
    loop {
        let sym = lit.decode_symbol(input)?;
        if sym < 256 {
            out.write_byte(sym as u8)?;
            continue;
        }
        if sym == 256 {
            return Ok(());
        }
        let idx = (sym - 257) as usize;
        if idx >= LEN_BASE.len() {
            return Err(CodecError::InvalidSymbol(sym));
        }
        let len = LEN_BASE[idx] as usize + input.fetch_bits(LEN_EXTRA[idx] as u32)? as usize;

        let dist = dist.ok_or(CodecError::InvalidCode)?;
        let dsym = dist.decode_symbol(input)? as usize;
        if dsym >= DIST_BASE.len() {
            return Err(CodecError::InvalidSymbol(dsym as u16));
        }
        let distance = DIST_BASE[dsym] as usize + input.fetch_bits(DIST_EXTRA[dsym] as u32)? as usize;
        if distance > out.write_pos() {
            return Err(CodecError::DistanceTooFar {
                distance,
                position: out.write_pos(),
            });
        }
        out.copy_within(distance, len)?;
    }
}
