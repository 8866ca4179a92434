//! Adaptive quadrature used by the spectral integrals.

use crate::error::{Error, Result};

/// Adaptive Simpson integration on [a, b] with absolute tolerance `tol`.
///
/// Recursion splits a panel until the Richardson estimate of its error is
/// below its share of the tolerance; `max_depth` bounds refinement so an
/// oscillatory integrand cannot recurse forever.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Composite Simpson rule with a fixed even number of intervals.
pub fn simpson_uniform<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Integral over [cutoff, inf) of a decaying, possibly oscillating integrand,
/// estimated from a fitted power law g(x) ~ A x^{-p} over the last two dyadic
/// windows before the cutoff. Errors if the fitted decay is not integrable.
pub fn power_law_tail<F: Fn(f64) -> f64>(f: &F, cutoff: f64, what: &str) -> Result<f64> {
    let w1 = (cutoff / 4.0, cutoff / 2.0);
    let w2 = (cutoff / 2.0, cutoff);
    let avg1 = simpson_uniform(f, w1.0, w1.1, 2048) / (w1.1 - w1.0);
    let avg2 = simpson_uniform(f, w2.0, w2.1, 2048) / (w2.1 - w2.0);
    if avg1 <= 0.0 || avg2 <= 0.0 {
        // Integrand already below noise; the tail is negligible.
        return Ok(0.0);
    }
    // Dyadic windows make the average ratio scale exactly like 2^p for a
    // power law, so the exponent fit is unbiased.
    let p = (avg1 / avg2).ln() / std::f64::consts::LN_2;
    if !(p > 1.01) {
        return Err(Error::NonConvergence(format!(
            "{what}: tail decay exponent {p:.3} not integrable beyond cutoff {cutoff}"
        )));
    }
    // Amplitude from the window-integral identity avg = A (a^{1-p} - b^{1-p}) / ((p-1)(b-a)).
    let amp = avg2 * (p - 1.0) * (w2.1 - w2.0) / (w2.0.powf(1.0 - p) - w2.1.powf(1.0 - p));
    Ok(amp * cutoff.powf(1.0 - p) / (p - 1.0))
}
