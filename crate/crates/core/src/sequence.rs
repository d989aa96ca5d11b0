//! Timestamp association between sensor streams.

use alloc::vec::Vec;

/// Default tolerance for pairing frames with depth images, in seconds.
pub const DEFAULT_MAX_DT: f64 = 0.02;

/// Pairs each entry of `reference` with the nearest not-yet-used entry of
/// `other`, scanning both sorted lists forward. Pairs further apart than
/// `max_dt` are dropped. Both index sequences of the output strictly increase.
pub fn associate_streams(reference: &[f64], other: &[f64], max_dt: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut next = 0;
    for (i, &t) in reference.iter().enumerate() {
        if next >= other.len() {
            break;
        }
        let mut best = next;
        while best + 1 < other.len() && (other[best + 1] - t).abs() <= (other[best] - t).abs() {
            best += 1;
        }
        if (other[best] - t).abs() <= max_dt {
            pairs.push((i, best));
            next = best + 1;
        }
    }
    pairs
}
