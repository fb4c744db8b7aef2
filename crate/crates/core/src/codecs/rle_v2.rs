// SPDX-License-Identifier: Apache-2.0

//! ORC run-length encoding, version 2.
//!
//! The top two bits of the first header byte select the sub-encoding:
//!
//! | tag | name          | header                                                     |
//! |-----|---------------|------------------------------------------------------------|
//! | 0   | SHORT_REPEAT  | 1 byte: width-1 in bytes (3 bits), count-3 (3 bits)        |
//! | 1   | DIRECT        | 2 bytes: width code (5 bits), count-1 (9 bits)             |
//! | 2   | PATCHED_BASE  | 4 bytes: width code, count-1, base bytes, patch widths, patch count |
//! | 3   | DELTA         | 2 bytes: delta width code (0 = fixed delta), count-1       |
//!
//! Multi-byte values are big-endian and bit-packed fields are MSB first. Every
//! bit-packed group starts on a byte boundary and is padded to one.

use crate::bitstream::{write_varint_s64, write_varint_u64, InputBitStream, MAX_FETCH_BITS};
use crate::container::ElementWidth;
use crate::outwindow::OutputWindow;

use super::{sign_extend, CodecError, Decoder, Signedness};

const MAX_GROUP: usize = 512;
const MIN_REPEAT: usize = 3;
const MAX_SHORT_REPEAT: usize = 10;
const MIN_FIXED_DELTA_RUN: usize = 4;
const MIN_MONOTONE_RUN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rle2SubEncoding {
    ShortRepeat,
    Direct,
    PatchedBase,
    Delta,
}

impl Rle2SubEncoding {
    pub fn from_header(first: u8) -> Self {
        match first >> 6 {
            0 => Self::ShortRepeat,
            1 => Self::Direct,
            2 => Self::PatchedBase,
            _ => Self::Delta,
        }
    }
}

/// Bit width for a 5-bit width code.
pub fn decode_bit_width(code: u8) -> u32 {
    match code & 0x1f {
        c @ 0..=23 => c as u32 + 1,
        24 => 26,
        25 => 28,
        26 => 30,
        27 => 32,
        28 => 40,
        29 => 48,
        30 => 56,
        _ => 64,
    }
}

/// Width code for a width that [`closest_fixed_bits`] can return.
pub fn encode_bit_width(bits: u32) -> u8 {
    match bits {
        1..=24 => bits as u8 - 1,
        26 => 24,
        28 => 25,
        30 => 26,
        32 => 27,
        40 => 28,
        48 => 29,
        56 => 30,
        64 => 31,
        _ => panic!("{bits} is not an encodable bit width"),
    }
}

/// Smallest encodable width holding `bits` bits.
pub fn closest_fixed_bits(bits: u32) -> u32 {
    match bits {
        0 => 1,
        1..=24 => bits,
        25..=26 => 26,
        27..=28 => 28,
        29..=30 => 30,
        31..=32 => 32,
        33..=40 => 40,
        41..=48 => 48,
        49..=56 => 56,
        _ => 64,
    }
}

fn bits_needed(v: u64) -> u32 {
    64 - v.leading_zeros()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RleV2Decoder {
    pub sign: Signedness,
}

impl Decoder for RleV2Decoder {
    fn decode(&self, input: &mut InputBitStream<'_>, out: &mut OutputWindow<'_>) -> Result<(), CodecError> {
        decode_rle_v2(input, out, self.sign)
    }
}

#[inline]
fn fetch_wide(input: &mut InputBitStream<'_>, bits: u32) -> Result<u64, CodecError> {
    if bits <= MAX_FETCH_BITS {
        Ok(input.fetch_bits(bits)?)
    } else {
        let hi = input.fetch_bits(bits - 32)?;
        let lo = input.fetch_bits(32)?;
        Ok((hi << 32) | lo)
    }
}

fn read_be(input: &mut InputBitStream<'_>, bytes: usize) -> Result<u64, CodecError> {
    let mut v = 0u64;
    for _ in 0..bytes {
        v = (v << 8) | input.read_u8()? as u64;
    }
    Ok(v)
}

fn unpack(input: &mut InputBitStream<'_>, bits: u32, count: usize, dst: &mut Vec<u64>) -> Result<(), CodecError> {
    dst.clear();
    for _ in 0..count {
        dst.push(fetch_wide(input, bits)?);
    }
    input.align_to_byte();
    Ok(())
}

pub fn decode_rle_v2(
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
    sign: Signedness,
) -> Result<(), CodecError> {
    let mut scratch = Vec::with_capacity(MAX_GROUP);
    let mut patches = Vec::new();
    while !out.is_full() && !input.is_exhausted() {
        let first = input.read_u8()?;
        match Rle2SubEncoding::from_header(first) {
            Rle2SubEncoding::ShortRepeat => {
                let width = ((first >> 3) & 0x07) as usize + 1;
                let count = (first & 0x07) as usize + MIN_REPEAT;
                let value = sign.decode(read_be(input, width)?);
                out.write_run(value, count, 0)?;
            }
            Rle2SubEncoding::Direct => {
                let bits = decode_bit_width(first >> 1);
                let count = ((((first & 1) as usize) << 8) | input.read_u8()? as usize) + 1;
                unpack(input, bits, count, &mut scratch)?;
                for &raw in &scratch {
                    out.write_element(sign.decode(raw))?;
                }
            }
            Rle2SubEncoding::PatchedBase => {
                decode_patched_base(input, out, first, &mut scratch, &mut patches)?;
            }
            Rle2SubEncoding::Delta => {
                decode_delta(input, out, first, sign, &mut scratch)?;
            }
        }
    }
    Ok(())
}

fn decode_delta(
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
    first: u8,
    sign: Signedness,
    scratch: &mut Vec<u64>,
) -> Result<(), CodecError> {
    let code = (first >> 1) & 0x1f;
    let len = (((first & 1) as usize) << 8) | input.read_u8()? as usize;
    let base = sign.decode(input.read_varint_u64()?);
    let delta_base = input.read_varint_s64()?;
    if code == 0 {
        out.write_run(base, len + 1, delta_base)?;
        return Ok(());
    }
    let bits = decode_bit_width(code);
    let packed = len.saturating_sub(1);
    unpack(input, bits, packed, scratch)?;

    let mut values = Vec::with_capacity(packed + 2);
    values.push(base);
    let mut prev = base.wrapping_add(delta_base as u64);
    values.push(prev);
    for &step in scratch.iter() {
        prev = if delta_base < 0 {
            prev.wrapping_sub(step)
        } else {
            prev.wrapping_add(step)
        };
        values.push(prev);
    }
    emit_values(out, &values)?;
    Ok(())
}

/// Writes values, using runs wherever three or more share a constant step.
fn emit_values(out: &mut OutputWindow<'_>, values: &[u64]) -> Result<(), CodecError> {
    let mut i = 0;
    while i < values.len() {
        if i + 2 < values.len() {
            let step = values[i + 1].wrapping_sub(values[i]);
            let mut j = i + 2;
            while j < values.len() && values[j].wrapping_sub(values[j - 1]) == step {
                j += 1;
            }
            if j - i >= 3 {
                out.write_run(values[i], j - i, step as i64)?;
                i = j;
                continue;
            }
        }
        out.write_element(values[i])?;
        i += 1;
    }
    Ok(())
}

fn decode_patched_base(
    input: &mut InputBitStream<'_>,
    out: &mut OutputWindow<'_>,
    first: u8,
    scratch: &mut Vec<u64>,
    patches: &mut Vec<u64>,
) -> Result<(), CodecError> {
    let bits = decode_bit_width(first >> 1);
    let count = ((((first & 1) as usize) << 8) | input.read_u8()? as usize) + 1;
    let third = input.read_u8()?;
    let base_bytes = ((third >> 5) & 0x07) as usize + 1;
    let patch_bits = decode_bit_width(third & 0x1f);
    let fourth = input.read_u8()?;
    let gap_bits = ((fourth >> 5) & 0x07) as u32 + 1;
    let patch_count = (fourth & 0x1f) as usize;

    // Base is sign-magnitude: the top bit of its most significant byte is the sign.
    let raw_base = read_be(input, base_bytes)?;
    let sign_bit = 1u64 << (base_bytes * 8 - 1);
    let base = if raw_base & sign_bit != 0 {
        ((raw_base & !sign_bit) as i64).wrapping_neg()
    } else {
        raw_base as i64
    };

    unpack(input, bits, count, scratch)?;

    if patch_bits + gap_bits > 64 {
        return Err(CodecError::InvalidWidthCode(patch_bits + gap_bits));
    }
    if patch_count > 0 && bits + patch_bits > 64 {
        return Err(CodecError::PatchOverflow("patched value wider than 64 bits"));
    }
    unpack(input, closest_fixed_bits(patch_bits + gap_bits), patch_count, patches)?;

    let patch_mask = if patch_bits >= 64 {
        u64::MAX
    } else {
        (1u64 << patch_bits) - 1
    };
    let split = |entry: u64| -> (u64, u64) {
        let gap = if patch_bits >= 64 { 0 } else { entry >> patch_bits };
        (gap, entry & patch_mask)
    };

    // Gaps of 255 with a zero patch only extend the distance to the next patch.
    let mut next_patch = 0usize;
    let take_patch = |next_patch: &mut usize| -> Result<(u64, u64), CodecError> {
        let mut distance = 0u64;
        loop {
            let entry = *patches
                .get(*next_patch)
                .ok_or(CodecError::PatchOverflow("patch list exhausted"))?;
            *next_patch += 1;
            let (gap, patch) = split(entry);
            if gap == 255 && patch == 0 {
                distance += 255;
                continue;
            }
            return Ok((distance + gap, patch));
        }
    };

    let mut pending = if patch_count > 0 {
        Some(take_patch(&mut next_patch)?)
    } else {
        None
    };
    let mut patch_at = pending.map(|(gap, _)| gap);
    for (i, &packed) in scratch.iter().enumerate() {
        let mut v = packed;
        if patch_at == Some(i as u64) {
            let (_, patch) = pending.expect("patch pending");
            v |= patch << bits;
            if next_patch < patch_count {
                let (gap, p) = take_patch(&mut next_patch)?;
                pending = Some((gap, p));
                patch_at = Some(i as u64 + gap);
            } else {
                pending = None;
                patch_at = None;
            }
        }
        out.write_element((base as u64).wrapping_add(v))?;
    }
    Ok(())
}

struct MsbBitWriter {
    out: Vec<u8>,
    acc: u64,
    pending: u32,
}

impl MsbBitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self {
            out,
            acc: 0,
            pending: 0,
        }
    }

    fn write(&mut self, value: u64, bits: u32) {
        if bits > 32 {
            self.write(value >> 32, bits - 32);
            self.write(value & 0xFFFF_FFFF, 32);
            return;
        }
        let v = if bits == 64 {
            value
        } else {
            value & ((1u64 << bits) - 1)
        };
        self.acc = (self.acc << bits) | v;
        self.pending += bits;
        while self.pending >= 8 {
            self.pending -= 8;
            self.out.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.out.push((self.acc << (8 - self.pending)) as u8);
        }
        self.out
    }
}

/// Encodes `values` with SHORT_REPEAT, DIRECT and DELTA groups. PATCHED_BASE
/// is never produced.
pub fn encode_rle_v2(values: &[u64], width: ElementWidth, sign: Signedness) -> Vec<u8> {
    let mask = width.mask();
    let vals: Vec<u64> = values.iter().map(|&v| v & mask).collect();
    // Values as the 64-bit integers the decoder reconstructs before truncation.
    let logical: Vec<u64> = match sign {
        Signedness::Unsigned => vals.clone(),
        Signedness::Signed => vals.iter().map(|&v| sign_extend(v, width) as u64).collect(),
    };
    let coded = |v: u64| sign.encode(v, width);

    let mut out = Vec::with_capacity(vals.len() + 16);
    let mut i = 0;
    while i < vals.len() {
        let eq = equal_run(&vals, i, MAX_GROUP);
        if eq >= MIN_REPEAT {
            if eq <= MAX_SHORT_REPEAT {
                let v = coded(vals[i]);
                let nbytes = bits_needed(v).div_ceil(8).max(1) as usize;
                out.push((((nbytes - 1) as u8) << 3) | (eq - MIN_REPEAT) as u8);
                out.extend_from_slice(&v.to_be_bytes()[8 - nbytes..]);
            } else {
                write_delta_header(&mut out, 0, eq);
                write_varint_u64(&mut out, coded(vals[i]));
                write_varint_s64(&mut out, 0);
            }
            i += eq;
            continue;
        }

        let fixed = fixed_delta_run(&logical, i, MAX_GROUP);
        if fixed >= MIN_FIXED_DELTA_RUN {
            write_delta_header(&mut out, 0, fixed);
            write_varint_u64(&mut out, coded(vals[i]));
            write_varint_s64(&mut out, logical[i + 1].wrapping_sub(logical[i]) as i64);
            i += fixed;
            continue;
        }

        let mono = monotone_run(&logical, i, MAX_GROUP);
        if mono >= MIN_MONOTONE_RUN || (mono >= MIN_REPEAT && i + mono == vals.len()) {
            out = encode_delta_group(out, &logical[i..i + mono], coded(vals[i]));
            i += mono;
            continue;
        }

        let mut end = i + 1;
        while end < vals.len() && end - i < MAX_GROUP && !group_starts_at(&vals, &logical, end) {
            end += 1;
        }
        let coded_vals: Vec<u64> = vals[i..end].iter().map(|&v| coded(v)).collect();
        out = encode_direct(out, &coded_vals);
        i = end;
    }
    out
}

fn group_starts_at(vals: &[u64], logical: &[u64], at: usize) -> bool {
    equal_run(vals, at, MIN_REPEAT) >= MIN_REPEAT
        || fixed_delta_run(logical, at, MIN_FIXED_DELTA_RUN) >= MIN_FIXED_DELTA_RUN
        || monotone_run(logical, at, MIN_MONOTONE_RUN) >= MIN_MONOTONE_RUN
}

fn equal_run(vals: &[u64], i: usize, cap: usize) -> usize {
    vals[i..].iter().take(cap).take_while(|&&v| v == vals[i]).count()
}

fn fixed_delta_run(logical: &[u64], i: usize, cap: usize) -> usize {
    if i + 1 >= logical.len() {
        return 1;
    }
    let step = logical[i + 1].wrapping_sub(logical[i]);
    let mut len = 2;
    while i + len < logical.len() && len < cap && logical[i + len].wrapping_sub(logical[i + len - 1]) == step {
        len += 1;
    }
    len
}

/// Longest prefix whose steps all share the sign of the first step.
fn monotone_run(logical: &[u64], i: usize, cap: usize) -> usize {
    if i + 1 >= logical.len() {
        return 1;
    }
    let descending = (logical[i + 1].wrapping_sub(logical[i]) as i64) < 0;
    let mut len = 2;
    while i + len < logical.len() && len < cap {
        let step = logical[i + len].wrapping_sub(logical[i + len - 1]) as i64;
        let ok = if descending { step <= 0 } else { step >= 0 };
        if !ok {
            break;
        }
        len += 1;
    }
    len
}

fn write_delta_header(out: &mut Vec<u8>, width_code: u8, count: usize) {
    let len = count - 1;
    out.push(0xC0 | (width_code << 1) | ((len >> 8) as u8 & 1));
    out.push(len as u8);
}

fn encode_delta_group(mut out: Vec<u8>, logical: &[u64], first_coded: u64) -> Vec<u8> {
    let delta_base = logical[1].wrapping_sub(logical[0]) as i64;
    let steps: Vec<u64> = logical
        .windows(2)
        .skip(1)
        .map(|w| (w[1].wrapping_sub(w[0]) as i64).unsigned_abs())
        .collect();
    let max = steps.iter().copied().max().unwrap_or(0);
    // Width code 0 means fixed delta here, so packed deltas use at least 2 bits.
    let bits = closest_fixed_bits(bits_needed(max)).max(2);
    write_delta_header(&mut out, encode_bit_width(bits), logical.len());
    write_varint_u64(&mut out, first_coded);
    write_varint_s64(&mut out, delta_base);
    let mut w = MsbBitWriter::new(out);
    for s in steps {
        w.write(s, bits);
    }
    w.finish()
}

fn encode_direct(mut out: Vec<u8>, coded: &[u64]) -> Vec<u8> {
    let max = coded.iter().copied().max().unwrap_or(0);
    let bits = closest_fixed_bits(bits_needed(max));
    let len = coded.len() - 1;
    out.push(0x40 | (encode_bit_width(bits) << 1) | ((len >> 8) as u8 & 1));
    out.push(len as u8);
    let mut w = MsbBitWriter::new(out);
    for &v in coded {
        w.write(v, bits);
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::BitOrder;
    use crate::codecs::elements_from_bytes;

    fn decode(bytes: &[u8], count: usize, width: ElementWidth, sign: Signedness) -> Vec<u64> {
        let mut buf = vec![0u8; count * width.bytes()];
        let mut input = InputBitStream::with_defaults(bytes, BitOrder::MsbFirst);
        let mut out = OutputWindow::new(&mut buf, width);
        decode_rle_v2(&mut input, &mut out, sign).unwrap();
        assert!(out.is_full());
        assert_eq!(input.bytes_consumed(), bytes.len());
        elements_from_bytes(&buf, width)
    }

    fn round_trip(values: &[u64], width: ElementWidth, sign: Signedness) -> Vec<u8> {
        let enc = encode_rle_v2(values, width, sign);
        let masked: Vec<u64> = values.iter().map(|&v| v & width.mask()).collect();
        assert_eq!(decode(&enc, values.len(), width, sign), masked);
        enc
    }

    #[test]
    fn width_codes() {
        for code in 0..32u8 {
            let bits = decode_bit_width(code);
            assert_eq!(encode_bit_width(bits), code);
            assert_eq!(closest_fixed_bits(bits), bits);
        }
        assert_eq!(closest_fixed_bits(0), 1);
        assert_eq!(closest_fixed_bits(25), 26);
        assert_eq!(closest_fixed_bits(33), 40);
        assert_eq!(closest_fixed_bits(57), 64);
    }

    #[test]
    fn short_repeat_example() {
        assert_eq!(
            decode(&[0x0A, 0x27, 0x10], 5, ElementWidth::W8, Signedness::Unsigned),
            [10000; 5]
        );
        assert_eq!(
            encode_rle_v2(&[10000; 5], ElementWidth::W8, Signedness::Unsigned),
            [0x0A, 0x27, 0x10]
        );
    }

    #[test]
    fn direct_example() {
        let enc = [0x5E, 0x03, 0x5C, 0xA1, 0xAB, 0x1E, 0xDE, 0xAD, 0xBE, 0xEF];
        let want = [23713, 43806, 57005, 48879];
        assert_eq!(decode(&enc, 4, ElementWidth::W8, Signedness::Unsigned), want);
        assert_eq!(decode(&enc, 4, ElementWidth::W2, Signedness::Unsigned), want);
        assert_eq!(encode_rle_v2(&want, ElementWidth::W8, Signedness::Unsigned), enc);
    }

    #[test]
    fn delta_example() {
        let enc = [0xC6, 0x09, 0x02, 0x02, 0x22, 0x42, 0x42, 0x46];
        let primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];
        assert_eq!(decode(&enc, 10, ElementWidth::W8, Signedness::Unsigned), primes);
        let ours = round_trip(&primes, ElementWidth::W8, Signedness::Unsigned);
        assert_eq!(Rle2SubEncoding::from_header(ours[0]), Rle2SubEncoding::Delta);
    }

    #[test]
    fn patched_base_example() {
        // Reference encoding of 20 values with one outlier (1000000).
        let enc = [
            0x8e, 0x13, 0x2b, 0x21, 0x07, 0xd0, 0x1e, 0x00, 0x14, 0x70, 0x28, 0x32, 0x3c, 0x46, 0x50, 0x5a, 0x64, 0x6e,
            0x78, 0x82, 0x8c, 0x96, 0xa0, 0xaa, 0xb4, 0xbe, 0xfc, 0xe8,
        ];
        let want = [
            2030, 2000, 2020, 1000000, 2040, 2050, 2060, 2070, 2080, 2090, 2100, 2110, 2120, 2130, 2140, 2150, 2160,
            2170, 2180, 2190,
        ];
        assert_eq!(Rle2SubEncoding::from_header(enc[0]), Rle2SubEncoding::PatchedBase);
        assert_eq!(decode(&enc, 20, ElementWidth::W8, Signedness::Unsigned), want);
    }

    #[test]
    fn patched_base_long_gap_and_negative_base() {
        // 300 values of width 1 bit, base -5, patches at index 0 and 280
        // (gap 280 = 255 + 25, split into a (255, 0) filler entry).
        let mut data = vec![0u8; 0];
        let count = 300usize;
        let len = count - 1;
        data.push(0x80 | (encode_bit_width(1) << 1) | (len >> 8) as u8);
        data.push(len as u8);
        // base 1 byte, patch width 2 bits.
        data.push(encode_bit_width(2));
        // gap width 8 bits, 3 patch entries.
        data.push((7 << 5) | 3);
        data.push(0x80 | 5);
        let mut w = MsbBitWriter::new(data);
        for i in 0..count {
            w.write((i % 2) as u64, 1);
        }
        let mut data = w.finish();
        // Entries are gap(8) | patch(2) packed into closest_fixed_bits(10) = 10 bits.
        let mut w = MsbBitWriter::new(std::mem::take(&mut data));
        w.write(3, 10);
        w.write(255 << 2, 10);
        w.write((25 << 2) | 1, 10);
        let enc = w.finish();

        let got = decode(&enc, count, ElementWidth::W8, Signedness::Unsigned);
        for (i, &v) in got.iter().enumerate() {
            let mut raw = (i % 2) as u64;
            if i == 0 {
                raw |= 3 << 1;
            }
            if i == 280 {
                raw |= 1 << 1;
            }
            assert_eq!(v as i64, raw as i64 - 5, "index {i}");
        }
    }

    #[test]
    fn patched_base_missing_patches() {
        // Claims 2 patch entries but the gap chain needs a third.
        let mut w = MsbBitWriter::new(vec![
            0x80 | (encode_bit_width(4) << 1),
            2,
            encode_bit_width(4),
            (7 << 5) | 2,
            0,
        ]);
        for v in [1u64, 2, 3] {
            w.write(v, 4);
        }
        let mut bytes = w.finish();
        let mut w = MsbBitWriter::new(std::mem::take(&mut bytes));
        w.write(255 << 4, 12);
        w.write(255 << 4, 12);
        let enc = w.finish();
        let mut buf = [0u8; 24];
        let mut out = OutputWindow::new(&mut buf, ElementWidth::W8);
        let mut input = InputBitStream::with_defaults(&enc, BitOrder::MsbFirst);
        assert!(matches!(
            decode_rle_v2(&mut input, &mut out, Signedness::Unsigned),
            Err(CodecError::PatchOverflow(_))
        ));
    }

    #[test]
    fn single_value_is_direct() {
        let enc = round_trip(&[1], ElementWidth::W8, Signedness::Unsigned);
        assert_eq!(enc, [0x40, 0x00, 0x80]);
    }

    #[test]
    fn long_constant_runs_use_fixed_delta() {
        let vals = vec![42u64; 1000];
        let enc = round_trip(&vals, ElementWidth::W4, Signedness::Unsigned);
        assert_eq!(Rle2SubEncoding::from_header(enc[0]), Rle2SubEncoding::Delta);
        assert!(enc.len() < 20);
    }

    #[test]
    fn arithmetic_and_descending() {
        let up: Vec<u64> = (0..700).map(|i| 1000 + 3 * i).collect();
        round_trip(&up, ElementWidth::W4, Signedness::Unsigned);
        let down: Vec<u64> = (0..300).map(|i| 100000 - i * i).collect();
        round_trip(&down, ElementWidth::W8, Signedness::Unsigned);
        round_trip(&down, ElementWidth::W8, Signedness::Signed);
    }

    #[test]
    fn extreme_values() {
        let vals = [u64::MAX, 0, u64::MAX, 1 << 63, (1 << 63) - 1, 0, 0, 0, 7, u64::MAX - 1];
        round_trip(&vals, ElementWidth::W8, Signedness::Unsigned);
        round_trip(&vals, ElementWidth::W8, Signedness::Signed);
        let mono: Vec<u64> = vec![
            0,
            1 << 62,
            u64::MAX - 5,
            u64::MAX - 4,
            u64::MAX - 1,
            u64::MAX,
            u64::MAX,
            u64::MAX,
            u64::MAX,
        ];
        round_trip(&mono, ElementWidth::W8, Signedness::Unsigned);
        round_trip(&mono, ElementWidth::W8, Signedness::Signed);
        let narrow: Vec<u64> = vec![0xFF, 0x00, 0x80, 0x7F, 0x01, 0xFE, 0xFF, 0xFF, 0xFF];
        round_trip(&narrow, ElementWidth::W1, Signedness::Signed);
        round_trip(&narrow, ElementWidth::W1, Signedness::Unsigned);
    }

    #[test]
    fn empty_input() {
        assert!(encode_rle_v2(&[], ElementWidth::W8, Signedness::Unsigned).is_empty());
    }

    #[test]
    fn truncated_and_overflow() {
        let mut buf = [0u8; 80];
        let mut out = OutputWindow::new(&mut buf, ElementWidth::W8);
        let mut input = InputBitStream::with_defaults(&[0x5E, 0x03, 0x5C], BitOrder::MsbFirst);
        assert_eq!(
            decode_rle_v2(&mut input, &mut out, Signedness::Unsigned),
            Err(CodecError::Truncated)
        );

        let mut buf = [0u8; 32];
        let mut out = OutputWindow::new(&mut buf, ElementWidth::W8);
        let mut input = InputBitStream::with_defaults(&[0x0A, 0x27, 0x10], BitOrder::MsbFirst);
        assert!(matches!(
            decode_rle_v2(&mut input, &mut out, Signedness::Unsigned),
            Err(CodecError::Write(_))
        ));
    }
}
