//! Counter-keyed standard normals.
//!
//! Each unit interval `[k, k+1]` of a path grid draws its Gaussian from a
//! ChaCha8 keystream addressed by `(seed, k)`, so any window of a realization
//! can be regenerated without replaying the ones before it.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_PAIR: u128 = 4;

fn open_unit(x: u64) -> f64 {
    // (0, 1]
    1.0 - (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn half_open_unit(x: u64) -> f64 {
    // [0, 1)
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let r = (-2.0 * open_unit(a).ln()).sqrt();
    let phi = std::f64::consts::TAU * half_open_unit(b);
    (r * phi.cos(), r * phi.sin())
}

/// Fills `out` with the normals for the non-negative counters `first..first + out.len()`
/// on the given stream.
fn fill_stream(seed: u64, stream: u64, first: u64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let pair0 = first / 2;
    rng.set_word_pos(pair0 as u128 * WORDS_PER_PAIR);
    let mut idx = pair0 * 2;
    let end = first + out.len() as u64;
    let mut pos = 0;
    while idx < end {
        let (g0, g1) = box_muller(rng.next_u64(), rng.next_u64());
        for (j, g) in [(idx, g0), (idx + 1, g1)] {
            if j >= first && j < end {
                out[pos] = g;
                pos += 1;
            }
        }
        idx += 2;
    }
}

/// Standard normals keyed by the signed interval counters `lo..hi` (exclusive).
///
/// Non-negative counters live on stream 0, negative ones on stream 1 (counter
/// `-1` maps to slot 0 there), so forward and backward halves of a two-sided
/// path never share keystream.
pub fn normals(seed: u64, lo: i64, hi: i64) -> Vec<f64> {
    assert!(lo <= hi, "empty or reversed counter range");
    let mut out = vec![0.0; (hi - lo) as usize];
    // negative part: counters lo..min(hi,0) -> slots (-k-1), descending
    let neg_hi = hi.min(0);
    if lo < neg_hi {
        let slot_lo = (-neg_hi) as u64; // slot of counter neg_hi-1
        let slot_hi = (-lo) as u64; // exclusive: slot of counter lo is -lo-1
        let mut buf = vec![0.0; (slot_hi - slot_lo) as usize];
        fill_stream(seed, 1, slot_lo, &mut buf);
        for k in lo..neg_hi {
            let slot = (-k - 1) as u64;
            out[(k - lo) as usize] = buf[(slot - slot_lo) as usize];
        }
    }
    let pos_lo = lo.max(0);
    if pos_lo < hi {
        let off = (pos_lo - lo) as usize;
        fill_stream(seed, 0, pos_lo as u64, &mut out[off..]);
    }
    out
}
