//! Phase unwrapping on a 1-D grid.

use std::f64::consts::{PI, TAU};

/// Maps a phase difference into `(−π, π]`.
#[inline]
pub fn wrap_to_pi(d: f64) -> f64 {
    let r = d - TAU * (d / TAU).round();
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Unwraps `raw` outward from `start` over the contiguous run of points for
/// which `keep` holds; the run is returned as `lo..=hi`. Points outside the
/// run carry the unwrapped value at the nearest end of the run.
///
/// `keep(start)` is assumed true.
pub fn unwrap_from(raw: &[f64], start: usize, keep: impl Fn(usize) -> bool) -> (Vec<f64>, usize, usize) {
    let n = raw.len();
    let mut out = vec![0.0; n];
    out[start] = raw[start];

    let mut hi = start;
    while hi + 1 < n && keep(hi + 1) {
        out[hi + 1] = out[hi] + wrap_to_pi(raw[hi + 1] - raw[hi]);
        hi += 1;
    }
    let mut lo = start;
    while lo > 0 && keep(lo - 1) {
        out[lo - 1] = out[lo] + wrap_to_pi(raw[lo - 1] - raw[lo]);
        lo -= 1;
    }
    let (left, right) = (out[lo], out[hi]);
    out[..lo].iter_mut().for_each(|s| *s = left);
    out[hi + 1..].iter_mut().for_each(|s| *s = right);
    (out, lo, hi)
}
