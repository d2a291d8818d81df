//! Deterministic chunked parallelism.
//!
//! Work is cut into fixed-size chunks that do not depend on the number of
//! worker threads; each chunk gets its own seed derived from `(seed, chunk)`
//! and results are reduced in chunk order. Output is therefore identical
//! under any rayon pool size.

use rayon::prelude::*;

/// Items per chunk for sampling and enumeration.
pub const CHUNK: u64 = 4096;

/// SplitMix64 finaliser over `(seed, index)`.
pub fn chunk_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `f(chunk_index, start, len)` over `0..total` in chunks of [`CHUNK`]
/// and returns the per-chunk results in order.
pub fn map_chunks<T, F>(total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64, u64) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(total - start);
            f(c, start, len)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = map_chunks(10_000, |c, start, len| (c, start, len));
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[2], (2, 8192, 10_000 - 8192));
        assert_eq!(parts.iter().map(|p| p.2).sum::<u64>(), 10_000);
    }

    #[test]
    fn seeds_differ_by_chunk() {
        assert_ne!(chunk_seed(7, 0), chunk_seed(7, 1));
        assert_eq!(chunk_seed(7, 3), chunk_seed(7, 3));
    }
}
