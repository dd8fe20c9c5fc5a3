//! Shared inputs for the benchmarks.

use vmw::HalfInt;

/// `(j1, m1, j2, m2)` of the large coupling sweep.
pub const LARGE_COUPLING: (i64, i64, i64, i64) = (40, 10, 30, -15);

/// Allowed `j3` values for integer `(j1, m1, j2, m2)`.
pub fn j3_range(j1: i64, m1: i64, j2: i64, m2: i64) -> impl Iterator<Item = HalfInt> {
    let lo = (j1 - j2).abs().max((m1 + m2).abs());
    (lo..=j1 + j2).map(HalfInt::int)
}
