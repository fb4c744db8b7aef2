// SPDX-License-Identifier: Apache-2.0

//! Append-only output for one chunk.
//!
//! The window is pre-sized from the chunk index, so writes never grow it.
//! Everything before `write_pos` is final and doubles as the back-reference
//! dictionary for [`OutputWindow::copy_within`].

use thiserror::Error;

use crate::container::ElementWidth;

/// Bytes moved per lane in one copy step.
pub const COPY_WORD: usize = 4;
/// Words produced per copy iteration; results of one iteration become
/// visible to the next one only.
pub const COPY_LANES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum WriteError {
    #[error("output overflow: {requested} bytes requested, {available} available")]
    Overflow { requested: usize, available: usize },
    #[error("back-reference offset {offset} invalid at write position {write_pos}")]
    BadOffset { offset: usize, write_pos: usize },
    #[error("output under-run: {written} of {expected} bytes written")]
    UnderRun { written: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CopyStats {
    pub overlap_copies: u64,
    pub aligned_word_iterations: u64,
    pub head_pad_bytes: u64,
    pub runs_written: u64,
    pub literals_written: u64,
}

impl CopyStats {
    pub fn merge(&mut self, other: &CopyStats) {
        self.overlap_copies += other.overlap_copies;
        self.aligned_word_iterations += other.aligned_word_iterations;
        self.head_pad_bytes += other.head_pad_bytes;
        self.runs_written += other.runs_written;
        self.literals_written += other.literals_written;
    }
}

#[derive(Debug)]
pub struct OutputWindow<'a> {
    buf: &'a mut [u8],
    write_pos: usize,
    width: ElementWidth,
    stats: CopyStats,
}

impl<'a> OutputWindow<'a> {
    /// The window's expected length is the length of `buf`.
    pub fn new(buf: &'a mut [u8], width: ElementWidth) -> Self {
        Self {
            buf,
            write_pos: 0,
            width,
            stats: CopyStats::default(),
        }
    }

    #[inline]
    pub fn write_pos(&self) -> usize {
        self.write_pos
    }

    #[inline]
    pub fn expected_len(&self) -> usize {
        self.buf.len()
    }

    #[inline]
    pub fn remaining(&self) -> usize {
        self.buf.len() - self.write_pos
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.write_pos == self.buf.len()
    }

    #[inline]
    pub fn element_width(&self) -> ElementWidth {
        self.width
    }

    #[inline]
    pub fn stats(&self) -> CopyStats {
        self.stats
    }

    /// Bytes already written.
    pub fn written(&self) -> &[u8] {
        &self.buf[..self.write_pos]
    }

    #[inline]
    fn reserve(&self, n: usize) -> Result<(), WriteError> {
        if n > self.remaining() {
            return Err(WriteError::Overflow {
                requested: n,
                available: self.remaining(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn write_byte(&mut self, b: u8) -> Result<(), WriteError> {
        self.reserve(1)?;
        self.buf[self.write_pos] = b;
        self.write_pos += 1;
        self.stats.literals_written += 1;
        Ok(())
    }

    /// Writes one element of the window's width, little-endian, truncated.
    #[inline]
    pub fn write_element(&mut self, value: u64) -> Result<(), WriteError> {
        let w = self.width.bytes();
        self.reserve(w)?;
        self.buf[self.write_pos..self.write_pos + w].copy_from_slice(&value.to_le_bytes()[..w]);
        self.write_pos += w;
        self.stats.literals_written += 1;
        Ok(())
    }

    pub fn write_literal_bytes(&mut self, bytes: &[u8]) -> Result<(), WriteError> {
        self.reserve(bytes.len())?;
        self.buf[self.write_pos..self.write_pos + bytes.len()].copy_from_slice(bytes);
        self.write_pos += bytes.len();
        self.stats.literals_written += bytes.len() as u64;
        Ok(())
    }

    /// Writes `len` elements `init, init + delta, init + 2*delta, ...` with
    /// two's-complement wrap-around at the element width.
    pub fn write_run(&mut self, init: u64, len: usize, delta: i64) -> Result<(), WriteError> {
        let w = self.width.bytes();
        let total = len.checked_mul(w).ok_or(WriteError::Overflow {
            requested: usize::MAX,
            available: self.remaining(),
        })?;
        self.reserve(total)?;
        if len == 0 {
            return Ok(());
        }
        let dst = &mut self.buf[self.write_pos..self.write_pos + total];
        if delta == 0 {
            let bytes = init.to_le_bytes();
            if w == 1 {
                dst.fill(bytes[0]);
            } else {
                for slot in dst.chunks_exact_mut(w) {
                    slot.copy_from_slice(&bytes[..w]);
                }
            }
        } else {
            // Each lane's value depends only on its index.
            let step = delta as u64;
            for (i, slot) in dst.chunks_exact_mut(w).enumerate() {
                let v = init.wrapping_add(step.wrapping_mul(i as u64));
                slot.copy_from_slice(&v.to_le_bytes()[..w]);
            }
        }
        self.write_pos += total;
        self.stats.runs_written += 1;
        Ok(())
    }

    /// Appends `len` bytes starting `offset` bytes back from the write position,
    /// with the byte-by-byte semantics of an LZ77 match (`len > offset` repeats
    /// the trailing `offset` bytes).
    ///
    /// Writes are word-granular: up to three bytes first bring the write
    /// position to a 4-byte boundary, then each aligned output word is built
    /// from the two aligned source words that straddle it, and a short tail
    /// finishes bytewise.
    pub fn copy_within(&mut self, offset: usize, len: usize) -> Result<(), WriteError> {
        let start = self.write_pos;
        if offset == 0 || offset > start {
            return Err(WriteError::BadOffset {
                offset,
                write_pos: start,
            });
        }
        self.reserve(len)?;
        if len == 0 {
            return Ok(());
        }

        let anchor = start - offset;
        let pad = ((COPY_WORD - start % COPY_WORD) % COPY_WORD).min(len);
        // The naive loop is exact for the pad whatever the overlap.
        for k in 0..pad {
            self.buf[start + k] = self.buf[start + k - offset];
        }
        self.stats.head_pad_bytes += pad as u64;

        let words = (len - pad) / COPY_WORD;
        let body_end = start + pad + words * COPY_WORD;
        if len > offset {
            self.stats.overlap_copies += 1;
            self.copy_words_circular(anchor, offset, start, start + pad, words);
            for p in body_end..start + len {
                self.buf[p] = self.buf[anchor + (p - start) % offset];
            }
        } else {
            self.copy_words_forward(offset, start + pad, words);
            for p in body_end..start + len {
                self.buf[p] = self.buf[p - offset];
            }
        }
        self.write_pos = start + len;
        Ok(())
    }

    #[inline]
    fn aligned_word(&self, at: usize) -> u32 {
        debug_assert_eq!(at % COPY_WORD, 0);
        u32::from_le_bytes(self.buf[at..at + 4].try_into().unwrap())
    }

    /// Source word at an arbitrary byte position, from aligned loads.
    #[inline]
    fn funnel_word(&self, src: usize) -> u32 {
        let shift = src % COPY_WORD;
        let base = src - shift;
        let lo = self.aligned_word(base);
        if shift == 0 {
            lo
        } else {
            let hi = self.aligned_word(base + COPY_WORD);
            let s = 8 * shift as u32;
            (lo >> s) | (hi << (32 - s))
        }
    }

    /// Non-overlapping body: `len <= offset`, so every source byte predates the call.
    fn copy_words_forward(&mut self, offset: usize, first: usize, words: usize) {
        let mut lane = [0u32; COPY_LANES];
        let mut done = 0;
        while done < words {
            let n = (words - done).min(COPY_LANES);
            let base = first + done * COPY_WORD;
            for (l, slot) in lane[..n].iter_mut().enumerate() {
                *slot = self.funnel_word(base + l * COPY_WORD - offset);
            }
            for (l, v) in lane[..n].iter().enumerate() {
                let at = base + l * COPY_WORD;
                self.buf[at..at + 4].copy_from_slice(&v.to_le_bytes());
            }
            done += n;
            self.stats.aligned_word_iterations += 1;
        }
    }

    /// Overlapping body: output repeats the fixed window `[anchor, start)`.
    fn copy_words_circular(&mut self, anchor: usize, period: usize, start: usize, first: usize, words: usize) {
        let mut lane = [0u32; COPY_LANES];
        let mut done = 0;
        while done < words {
            let n = (words - done).min(COPY_LANES);
            let base = first + done * COPY_WORD;
            for (l, slot) in lane[..n].iter_mut().enumerate() {
                let phase = (base + l * COPY_WORD - start) % period;
                *slot = if phase + COPY_WORD <= period {
                    self.funnel_word(anchor + phase)
                } else {
                    let mut b = [0u8; 4];
                    for (j, byte) in b.iter_mut().enumerate() {
                        *byte = self.buf[anchor + (phase + j) % period];
                    }
                    u32::from_le_bytes(b)
                };
            }
            for (l, v) in lane[..n].iter().enumerate() {
                let at = base + l * COPY_WORD;
                self.buf[at..at + 4].copy_from_slice(&v.to_le_bytes());
            }
            done += n;
            self.stats.aligned_word_iterations += 1;
        }
    }

    /// Returns the written prefix. With `strict`, anything short of the
    /// expected length is an error.
    pub fn finish(self, strict: bool) -> Result<&'a [u8], WriteError> {
        let expected = self.buf.len();
        if strict && self.write_pos < expected {
            return Err(WriteError::UnderRun {
                written: self.write_pos,
                expected,
            });
        }
        let pos = self.write_pos;
        let buf: &'a [u8] = self.buf;
        Ok(&buf[..pos])
    }

    /// Consumes the window, returning written length and counters.
    pub fn into_parts(self) -> (usize, CopyStats) {
        (self.write_pos, self.stats)
    }
}
