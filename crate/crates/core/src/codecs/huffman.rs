// SPDX-License-Identifier: Apache-2.0

//! Canonical Huffman decoding tables.
//!
//! Codes are assigned from code lengths alone: shorter codes first, and codes
//! of equal length in increasing symbol order. Decoding peeks [`FAST_BITS`]
//! bits and resolves every code of that length or shorter with a single table
//! lookup; longer codes fall back to a canonical walk one bit at a time.

use crate::bitstream::InputBitStream;

use super::CodecError;

pub const MAX_CODE_BITS: u32 = 15;
pub const FAST_BITS: u32 = 9;

/// Whether a code-length set may leave part of the code space unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    /// The Kraft sum must be exactly one.
    Strict,
    /// As `Strict`, but a lone code of length 1 is accepted.
    AllowSingle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    counts: [u16; MAX_CODE_BITS as usize + 1],
    /// Symbols ordered by code length, then by symbol.
    symbols: Vec<u16>,
    /// `symbol << 4 | length`, or 0 when the code is longer than `FAST_BITS`.
    fast: Vec<u16>,
    lengths: Vec<u8>,
}

/// Builds a table with the completeness rule used for deflate literal/length
/// and distance trees.
pub fn build_huffman_table(lengths: &[u8]) -> Result<HuffmanTable, CodecError> {
    HuffmanTable::new(lengths, Completeness::AllowSingle)
}

fn reverse_bits(code: u32, len: u32) -> u32 {
    code.reverse_bits() >> (32 - len)
}

impl HuffmanTable {
    pub fn new(lengths: &[u8], completeness: Completeness) -> Result<Self, CodecError> {
        let mut counts = [0u16; MAX_CODE_BITS as usize + 1];
        for &l in lengths {
            if l as u32 > MAX_CODE_BITS {
                return Err(CodecError::BadCodeLengths("code length above 15"));
            }
            counts[l as usize] += 1;
        }
        counts[0] = 0;
        let used: u32 = counts.iter().map(|&c| c as u32).sum();
        if used == 0 {
            return Err(CodecError::EmptyTree);
        }

        let mut left: i32 = 1;
        for &c in &counts[1..] {
            left <<= 1;
            left -= c as i32;
            if left < 0 {
                return Err(CodecError::OverSubscribed);
            }
        }
        if left > 0 {
            let lone_short_code = used == 1 && counts[1] == 1;
            if completeness == Completeness::Strict || !lone_short_code {
                return Err(CodecError::IncompleteTree);
            }
        }

        let mut offsets = [0u16; MAX_CODE_BITS as usize + 2];
        for len in 1..=MAX_CODE_BITS as usize {
            offsets[len + 1] = offsets[len] + counts[len];
        }
        let mut symbols = vec![0u16; used as usize];
        for (sym, &l) in lengths.iter().enumerate() {
            if l != 0 {
                symbols[offsets[l as usize] as usize] = sym as u16;
                offsets[l as usize] += 1;
            }
        }

        let mut table = Self {
            counts,
            symbols,
            fast: vec![0; 1 << FAST_BITS],
            lengths: lengths.to_vec(),
        };
        for (sym, code, len) in table.codes() {
            if len <= FAST_BITS {
                let entry = (sym << 4) | len as u16;
                let step = 1usize << len;
                let mut idx = reverse_bits(code, len) as usize;
                while idx < table.fast.len() {
                    table.fast[idx] = entry;
                    idx += step;
                }
            }
        }
        Ok(table)
    }

    /// `(symbol, code, length)` for every symbol with a code, in symbol order.
    /// `code` is the canonical value, most significant bit first.
    pub fn codes(&self) -> Vec<(u16, u32, u32)> {
        // counts[0] is zeroed, so the first shift starts from zero.
        let mut next = [0u32; MAX_CODE_BITS as usize + 1];
        let mut code = 0u32;
        for (len, slot) in next.iter_mut().enumerate().skip(1) {
            code = (code + self.counts[len - 1] as u32) << 1;
            *slot = code;
        }
        let mut out = Vec::with_capacity(self.symbols.len());
        for (sym, &l) in self.lengths.iter().enumerate() {
            if l != 0 {
                out.push((sym as u16, next[l as usize], l as u32));
                next[l as usize] += 1;
            }
        }
        out
    }

    pub fn max_code_len(&self) -> u32 {
        (1..=MAX_CODE_BITS)
            .rev()
            .find(|&l| self.counts[l as usize] != 0)
            .unwrap_or(0)
    }

    /// Decodes one symbol from an LSB-first stream.
    #[inline]
    pub fn decode_symbol(&self, input: &mut InputBitStream<'_>) -> Result<u16, CodecError> {
        let peeked = input.peek_bits(FAST_BITS)?;
        let entry = self.fast[peeked as usize];
        if entry != 0 {
            input.skip_bits((entry & 0xf) as u32)?;
            return Ok(entry >> 4);
        }
        self.decode_slow(input)
    }

    fn decode_slow(&self, input: &mut InputBitStream<'_>) -> Result<u16, CodecError> {
        let bits = input.peek_bits(MAX_CODE_BITS)?;
        let mut code: i32 = 0;
        let mut first: i32 = 0;
        let mut index: i32 = 0;
        for len in 1..=MAX_CODE_BITS {
            code |= ((bits >> (len - 1)) & 1) as i32;
            let count = self.counts[len as usize] as i32;
            if code - first < count {
                input.skip_bits(len)?;
                return Ok(self.symbols[(index + code - first) as usize]);
            }
            index += count;
            first += count;
            first <<= 1;
            code <<= 1;
        }
        Err(CodecError::InvalidCode)
    }
}
