// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};

use chunkdec::bitstream::{BitOrder, InputBitStream};
use chunkdec::codecs::{
    decode_deflate, decode_rle_v1, decode_rle_v2, elements_from_bytes, elements_to_bytes, encode_deflate_fixed,
    encode_deflate_stored, encode_rle_v1, encode_rle_v2, CodecError, Signedness,
};
use chunkdec::container::ElementWidth;
use chunkdec::outwindow::OutputWindow;
use proptest::prelude::*;

type DecodeFn = fn(&mut InputBitStream<'_>, &mut OutputWindow<'_>, Signedness) -> Result<(), CodecError>;

fn decode_with(
    f: DecodeFn,
    enc: &[u8],
    n: usize,
    width: ElementWidth,
    sign: Signedness,
) -> Result<Vec<u8>, CodecError> {
    let mut buf = vec![0u8; n * width.bytes()];
    let mut input = InputBitStream::with_defaults(enc, BitOrder::MsbFirst);
    let mut out = OutputWindow::new(&mut buf, width);
    f(&mut input, &mut out, sign)?;
    out.finish(true)?;
    Ok(buf)
}

fn inflate(stream: &[u8], n: usize) -> Result<Vec<u8>, CodecError> {
    let mut buf = vec![0u8; n];
    let mut input = InputBitStream::with_defaults(stream, BitOrder::LsbFirst);
    let mut out = OutputWindow::new(&mut buf, ElementWidth::W1);
    decode_deflate(&mut input, &mut out)?;
    out.finish(true)?;
    Ok(buf)
}

fn width() -> impl Strategy<Value = ElementWidth> {
    prop_oneof![
        Just(ElementWidth::W1),
        Just(ElementWidth::W2),
        Just(ElementWidth::W4),
        Just(ElementWidth::W8)
    ]
}

fn sign() -> impl Strategy<Value = Signedness> {
    prop_oneof![Just(Signedness::Unsigned), Just(Signedness::Signed)]
}

/// Values built from runs, strides and noise so every sub-encoding shows up.
fn values() -> impl Strategy<Value = Vec<u64>> {
    let segment = prop_oneof![
        (any::<u64>(), 1usize..200).prop_map(|(v, n)| vec![v; n]),
        (any::<u64>(), -50i64..50, 1usize..200)
            .prop_map(|(s, d, n)| (0..n).map(|k| s.wrapping_add((d * k as i64) as u64)).collect()),
        (0u32..64, proptest::collection::vec(any::<u64>(), 1..60))
            .prop_map(|(bits, v)| v.into_iter().map(|x| x >> bits).collect()),
        proptest::collection::vec(any::<u64>(), 1..30),
    ];
    proptest::collection::vec(segment, 0..8).prop_map(|s| s.concat())
}

proptest! {
    #[test]
    fn rle_v1_round_trip(vals in values(), width in width(), sign in sign()) {
        let masked: Vec<u64> = vals.iter().map(|v| v & width.mask()).collect();
        let enc = encode_rle_v1(&masked, width, sign);
        let dec = decode_with(decode_rle_v1, &enc, masked.len(), width, sign).unwrap();
        prop_assert_eq!(dec, elements_to_bytes(&masked, width));
    }

    #[test]
    fn rle_v2_round_trip(vals in values(), width in width(), sign in sign()) {
        let masked: Vec<u64> = vals.iter().map(|v| v & width.mask()).collect();
        let enc = encode_rle_v2(&masked, width, sign);
        let dec = decode_with(decode_rle_v2, &enc, masked.len(), width, sign).unwrap();
        prop_assert_eq!(elements_from_bytes(&dec, width), masked);
    }

    #[test]
    fn deflate_encoders_round_trip(data in proptest::collection::vec(0u8..6, 0..5000), noise in proptest::collection::vec(any::<u8>(), 0..500)) {
        let mut data = data;
        data.extend_from_slice(&noise);
        for enc in [encode_deflate_fixed(&data), encode_deflate_stored(&data)] {
            prop_assert_eq!(&inflate(&enc, data.len()).unwrap(), &data);
            let mut reference = Vec::new();
            flate2::read::DeflateDecoder::new(&enc[..]).read_to_end(&mut reference).unwrap();
            prop_assert_eq!(&reference, &data);
        }
    }

    #[test]
    fn reference_deflate_decodes(data in proptest::collection::vec(0u8..20, 0..20000), level in 0u32..=9) {
        let mut e = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::new(level));
        e.write_all(&data).unwrap();
        let stream = e.finish().unwrap();
        prop_assert_eq!(inflate(&stream, data.len()).unwrap(), data);
    }

    #[test]
    fn garbage_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..300), n in 0usize..2000, width in width()) {
        let _ = decode_with(decode_rle_v1, &bytes, n, width, Signedness::Unsigned);
        let _ = decode_with(decode_rle_v2, &bytes, n, width, Signedness::Signed);
        let _ = inflate(&bytes, n);
    }

    #[test]
    fn corrupted_deflate_never_panics(data in proptest::collection::vec(0u8..8, 1..3000), flips in proptest::collection::vec((any::<usize>(), 0u8..8), 1..6)) {
        let mut e = flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::best());
        e.write_all(&data).unwrap();
        let mut stream = e.finish().unwrap();
        for (at, bit) in flips {
            let i = at % stream.len();
            stream[i] ^= 1 << bit;
        }
        let _ = inflate(&stream, data.len());
    }
}
