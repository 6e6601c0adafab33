//! Spectrum-comparison utilities shared by the cross-method verification
//! suites.

use crate::error::{Error, Result};
use crate::C64;

/// Lexicographic order by (real part, imaginary part).
pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite eigenvalues")
    });
}

/// Max elementwise deviation of two real multisets after ascending sort,
/// zero-padding the shorter one (rank-deficient spectra carry structural
/// zeros the other route may or may not materialize).
pub fn padded_sorted_deviation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.resize(n, 0.0);
    y.resize(n, 0.0);
    x.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    y.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
    x.iter()
        .zip(y.iter())
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
}

/// Max matching distance between two complex multisets of equal size.
///
/// Plain lexicographic pairing is unstable when distinct eigenvalues share a
/// real part to within roundoff (conjugate pairs do so exactly), so each
/// element is matched greedily to the nearest unused partner among
/// candidates whose real parts lie within a window.
pub fn multiset_deviation(a: &[C64], b: &[C64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "multisets of size {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    sort_complex(&mut xs);
    sort_complex(&mut ys);

    let scale = xs
        .iter()
        .chain(ys.iter())
        .fold(1.0f64, |m, z| m.max(z.norm()));
    let window = 1e-6 * scale;

    let n = ys.len();
    let mut used = vec![false; n];
    let mut worst = 0.0f64;
    // ys is sorted by re; lo tracks the first candidate that can still fall
    // inside any future window (xs is sorted by re as well).
    let mut lo = 0usize;
    for x in &xs {
        while lo < n && (used[lo] || ys[lo].re < x.re - window) {
            lo += 1;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut j = lo;
        while j < n && ys[j].re <= x.re + window {
            if !used[j] {
                let d = (x - ys[j]).norm();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            j += 1;
        }
        // No candidate inside the window: fall back to the global nearest
        // unused element so the reported deviation is honest.
        if best.is_none() {
            for (j, y) in ys.iter().enumerate() {
                if !used[j] {
                    let d = (x - y).norm();
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((j, d));
                    }
                }
            }
        }
        let (j, d) = best.expect("equal sizes leave a partner");
        used[j] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}
