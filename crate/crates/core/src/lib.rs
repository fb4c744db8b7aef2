// SPDX-License-Identifier: Apache-2.0

//! Chunk-parallel decoding of ORC RLE v1, ORC RLE v2 and raw deflate.
//!
//! Data is split into fixed-size chunks that are compressed independently
//! and stored in a small indexed container ([`container`]). Decoders read
//! through a block-buffered bit reader ([`bitstream`]) and write through a
//! bounded output window with a word-granular match copy ([`outwindow`]).
//! [`engine`] decodes chunks on a pool of workers.

pub mod bitstream;
pub mod codecs;
pub mod container;
pub mod corpus;
pub mod engine;
pub mod outwindow;

pub use bitstream::{BitOrder, InputBitStream};
pub use codecs::{decode_chunk, encode_chunk, CodecError, DeflateMode, Signedness};
pub use container::{read_archive, write_archive, ArchiveHeader, ChunkedArchive, CodecId, ElementWidth};
pub use engine::{
    bench_decompress, bench_sweep, decompress_archive, decompress_into, pack_bytes, pack_precompressed, BenchReport,
    BenchRow, EngineConfig, EngineError, EngineStats,
};
pub use outwindow::OutputWindow;
