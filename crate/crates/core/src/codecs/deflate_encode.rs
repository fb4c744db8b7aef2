// SPDX-License-Identifier: Apache-2.0

//! Raw deflate encoders used to build archives and test fixtures.
//!
//! Only stored and fixed-Huffman blocks are produced. The match finder is a
//! greedy hash-chain search over the chunk itself.

use super::deflate::{DIST_BASE, DIST_EXTRA, LEN_BASE, LEN_EXTRA};

const MAX_STORED: usize = 65535;
const WINDOW: usize = 32768;
const MIN_MATCH: usize = 3;
const MAX_MATCH: usize = 258;
const HASH_BITS: u32 = 15;
const MAX_CHAIN: usize = 48;

struct LsbWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl LsbWriter {
    fn with_capacity(n: usize) -> Self {
        Self {
            out: Vec::with_capacity(n),
            acc: 0,
            nbits: 0,
        }
    }

    #[inline]
    fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        self.acc |= (value as u64) << self.nbits;
        self.nbits += width;
        while self.nbits >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.nbits -= 8;
        }
    }

    #[inline]
    fn write_code(&mut self, code: u32, len: u32) {
        self.write(code.reverse_bits() >> (32 - len), len);
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.out.push(self.acc as u8);
        }
        self.out
    }
}

/// Stored blocks only; an empty input yields one empty final block.
pub fn encode_deflate_stored(raw: &[u8]) -> Vec<u8> {
    let blocks = raw.len().div_ceil(MAX_STORED).max(1);
    let mut out = Vec::with_capacity(raw.len() + 5 * blocks);
    let mut pieces = raw.chunks(MAX_STORED).peekable();
    if pieces.peek().is_none() {
        out.extend_from_slice(&[0x01, 0x00, 0x00, 0xFF, 0xFF]);
        return out;
    }
    while let Some(piece) = pieces.next() {
        let last = pieces.peek().is_none();
        let len = piece.len() as u16;
        out.push(last as u8);
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&(!len).to_le_bytes());
        out.extend_from_slice(piece);
    }
    out
}

#[inline]
fn write_literal_symbol(w: &mut LsbWriter, sym: u32) {
    match sym {
        0..=143 => w.write_code(0x30 + sym, 8),
        144..=255 => w.write_code(0x190 + sym - 144, 9),
        256..=279 => w.write_code(sym - 256, 7),
        _ => w.write_code(0xC0 + sym - 280, 8),
    }
}

fn write_match(w: &mut LsbWriter, len: usize, dist: usize) {
    let li = LEN_BASE.partition_point(|&b| b as usize <= len) - 1;
    // 258 has its own code even though 227 + 31 would also reach it.
    let li = if len == MAX_MATCH { 28 } else { li.min(27) };
    write_literal_symbol(w, 257 + li as u32);
    w.write((len - LEN_BASE[li] as usize) as u32, LEN_EXTRA[li] as u32);

    let di = DIST_BASE.partition_point(|&b| b as usize <= dist) - 1;
    w.write_code(di as u32, 5);
    w.write((dist - DIST_BASE[di] as usize) as u32, DIST_EXTRA[di] as u32);
}

#[inline]
fn hash3(b: &[u8]) -> usize {
    let v = (b[0] as u32) | ((b[1] as u32) << 8) | ((b[2] as u32) << 16);
    (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

struct HashChains {
    head: Vec<usize>,
    prev: Vec<usize>,
}

impl HashChains {
    fn new(n: usize) -> Self {
        Self {
            head: vec![usize::MAX; 1 << HASH_BITS],
            prev: vec![usize::MAX; n],
        }
    }

    #[inline]
    fn insert(&mut self, raw: &[u8], pos: usize) {
        if pos + MIN_MATCH <= raw.len() {
            let h = hash3(&raw[pos..]);
            self.prev[pos] = self.head[h];
            self.head[h] = pos;
        }
    }

    /// Longest earlier match for `pos` as `(length, distance)`.
    fn longest_match(&self, raw: &[u8], pos: usize) -> (usize, usize) {
        let max_len = (raw.len() - pos).min(MAX_MATCH);
        let (mut best_len, mut best_dist) = (0, 0);
        let mut cand = self.head[hash3(&raw[pos..])];
        let mut chain = 0;
        while cand != usize::MAX && pos - cand <= WINDOW && chain < MAX_CHAIN {
            // Cheap reject before the full comparison.
            if raw[cand + best_len.min(max_len - 1)] == raw[pos + best_len.min(max_len - 1)] {
                let l = raw[cand..cand + max_len]
                    .iter()
                    .zip(&raw[pos..pos + max_len])
                    .take_while(|(a, b)| a == b)
                    .count();
                if l > best_len {
                    best_len = l;
                    best_dist = pos - cand;
                    if l == max_len {
                        break;
                    }
                }
            }
            cand = self.prev[cand];
            chain += 1;
        }
        (best_len, best_dist)
    }
}

/// One final fixed-Huffman block with greedy LZ77 matches.
pub fn encode_deflate_fixed(raw: &[u8]) -> Vec<u8> {
    let n = raw.len();
    let mut w = LsbWriter::with_capacity(n / 2 + 16);
    w.write(1, 1);
    w.write(1, 2);

    let mut chains = HashChains::new(n);
    let mut pos = 0;
    while pos < n {
        let (len, dist) = if pos + MIN_MATCH <= n {
            chains.longest_match(raw, pos)
        } else {
            (0, 0)
        };
        if len >= MIN_MATCH {
            write_match(&mut w, len, dist);
            for p in pos..pos + len {
                chains.insert(raw, p);
            }
            pos += len;
        } else {
            write_literal_symbol(&mut w, raw[pos] as u32);
            chains.insert(raw, pos);
            pos += 1;
        }
    }
    write_literal_symbol(&mut w, 256);
    w.finish()
}
