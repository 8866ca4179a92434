//! Daubechies filter construction, Mallat pyramid transform, per-octave sample
//! wavelet variance matrices, wavelet coherence, and numerical evaluation of
//! the |psi-hat|^2 integrals K(d) and V(d).

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, power_law_tail, simpson_uniform};
use crate::series::MultiSeries;

/// Frequency cutoff for the spectral quadratures; beyond it a fitted power-law
/// tail is added.
const FREQ_CUTOFF: f64 = 4096.0;
/// Default cascade depth for |psi-hat|^2.
pub const DEFAULT_CASCADE_DEPTH: usize = 25;

/// Orthonormal Daubechies filter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    /// Number of vanishing moments.
    pub n_psi: usize,
    /// Low-pass filter h, length 2 * n_psi.
    pub lowpass: Vec<f64>,
    /// High-pass quadrature mirror g, g_k = (-1)^k h_{L-1-k}.
    pub highpass: Vec<f64>,
}

impl WaveletBasis {
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Verify the basis contract: sum h = sqrt(2), orthonormal even shifts,
    /// and n_psi vanishing moments. Moments are evaluated in the centered,
    /// scaled monomial basis ((k - c)/c)^m, which spans the same polynomials
    /// and keeps the cancellation well-conditioned for long filters.
    pub fn validate(&self) -> Result<()> {
        let l = self.len();
        if l != 2 * self.n_psi || self.highpass.len() != l {
            return Err(Error::Dimension("filter length must be 2 * n_psi".into()));
        }
        let sum: f64 = self.lowpass.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-12 {
            return Err(Error::numerical(format!("sum h = {sum}, expected sqrt(2)")));
        }
        for m in 0..l / 2 {
            let mut acc = 0.0;
            for k in 0..l - 2 * m {
                acc += self.lowpass[k] * self.lowpass[k + 2 * m];
            }
            let target = if m == 0 { 1.0 } else { 0.0 };
            if (acc - target).abs() > 1e-10 {
                return Err(Error::numerical(format!("orthonormality failure at shift {m}: {acc}")));
            }
        }
        let c = (l as f64 - 1.0) / 2.0;
        for m in 0..self.n_psi {
            let mut acc = 0.0;
            for (k, &g) in self.highpass.iter().enumerate() {
                acc += g * ((k as f64 - c) / c.max(1.0)).powi(m as i32);
            }
            if acc.abs() > 1e-8 {
                return Err(Error::numerical(format!("vanishing moment {m} failure: {acc}")));
            }
        }
        Ok(())
    }
}

/// Roots of a monic complex polynomial by Durand-Kerner iteration with a
/// Newton polish. Coefficients are ascending, `coeffs[deg] == 1`.
fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let deriv = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * k as f64;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..500 {
        let mut shift = 0.0_f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Daubechies filters with `n_psi` vanishing moments (1..=10) by spectral
/// factorization of |m0|^2 = cos^{2N}(w/2) P(sin^2(w/2)), keeping the z-roots
/// inside the unit circle.
pub fn daubechies_filters(n_psi: usize) -> Result<WaveletBasis> {
    if !(1..=10).contains(&n_psi) {
        return Err(Error::domain(format!("n_psi must be in 1..=10, got {n_psi}")));
    }
    let n = n_psi;
    // P(y) = sum_{k<N} C(N-1+k, k) y^k, made monic for root finding.
    let lead = binomial(2 * n - 2, n - 1);
    let pcoef: Vec<Complex64> =
        (0..n).map(|k| Complex64::new(binomial(n - 1 + k, k) / lead, 0.0)).collect();
    let yroots = polynomial_roots(&pcoef);

    // Each y-root gives a z-pair via z + 1/z = 2 - 4y; keep |z| < 1.
    let mut zroots = Vec::with_capacity(yroots.len());
    for y in yroots {
        let s = Complex64::new(2.0, 0.0) - y * 4.0;
        let disc = (s * s - Complex64::new(4.0, 0.0)).sqrt();
        let z1 = (s + disc) / 2.0;
        let z2 = (s - disc) / 2.0;
        zroots.push(if z1.norm() < z2.norm() { z1 } else { z2 });
    }

    // (1 + z)^N expanded, then multiplied by prod (z - z_r).
    let mut poly: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        poly = convolve_c(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for zr in &zroots {
        poly = convolve_c(&poly, &[-zr, Complex64::new(1.0, 0.0)]);
    }
    let mut h: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let total: f64 = h.iter().sum();
    let scale = std::f64::consts::SQRT_2 / total;
    for v in h.iter_mut() {
        *v *= scale;
    }
    // Standard indexing puts the large taps first (db2 = (1+sqrt3, 3+sqrt3, ...)/(4 sqrt2)).
    if h[0].abs() < h[h.len() - 1].abs() {
        h.reverse();
    }
    let l = h.len();
    let g: Vec<f64> = (0..l).map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] }).collect();
    let basis = WaveletBasis { n_psi, lowpass: h, highpass: g };
    basis.validate()?;
    Ok(basis)
}

fn convolve_c(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// One pyramid level: the valid detail coefficient vectors at octave `j`.
#[derive(Debug, Clone)]
pub struct PyramidLevel {
    pub octave: usize,
    /// n x K_j matrix; column k is the coefficient vector D(2^j, k).
    pub details: DMatrix<f64>,
}

impl PyramidLevel {
    pub fn count(&self) -> usize {
        self.details.ncols()
    }
}

/// Valid-coefficient Mallat pyramid of a multichannel series.
#[derive(Debug, Clone)]
pub struct Pyramid {
    pub levels: Vec<PyramidLevel>,
    pub channels: usize,
}

impl Pyramid {
    pub fn level(&self, octave: usize) -> Option<&PyramidLevel> {
        self.levels.iter().find(|l| l.octave == octave)
    }

    pub fn max_octave(&self) -> usize {
        self.levels.last().map(|l| l.octave).unwrap_or(0)
    }
}

/// Number of valid coefficients produced by one valid, downsampled filtering
/// pass over `len` samples with a length-`l` filter.
fn valid_out_len(len: usize, l: usize) -> usize {
    if len < l {
        0
    } else {
        (len - l) / 2 + 1
    }
}

/// Largest octave with at least one valid coefficient for a series of length
/// `nu` under filter length `l`.
pub fn max_feasible_octave(nu: usize, l: usize) -> usize {
    let mut len = nu;
    let mut j = 0;
    loop {
        let next = valid_out_len(len, l);
        if next == 0 {
            return j;
        }
        j += 1;
        len = next;
    }
}

fn demeaned_rows(y: &MultiSeries) -> Vec<Vec<f64>> {
    y.rows()
        .iter()
        .map(|ch| {
            let mean = ch.iter().sum::<f64>() / ch.len() as f64;
            ch.iter().map(|v| v - mean).collect()
        })
        .collect()
}

/// Mallat pyramid with valid-only coefficients: every coefficient whose filter
/// support touches a boundary is discarded, so no extension bias enters the
/// wavelet variances. Channels are demeaned first. The detail output of the
/// orthonormal filters is used directly as the normalized coefficient D(2^j, k).
pub fn pyramid(y: &MultiSeries, j_max: usize, basis: &WaveletBasis) -> Result<Pyramid> {
    if j_max == 0 {
        return Err(Error::domain("j_max must be at least 1"));
    }
    let feasible = max_feasible_octave(y.len(), basis.len());
    if j_max > feasible {
        return Err(Error::TooShortForOctave { requested: j_max, max_feasible: feasible });
    }
    let n = y.channels();
    let l = basis.len();
    let mut approx = demeaned_rows(y);
    let mut levels = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let in_len = approx[0].len();
        let out_len = valid_out_len(in_len, l);
        let mut details = DMatrix::zeros(n, out_len);
        let mut next = vec![vec![0.0; out_len]; n];
        for ch in 0..n {
            let a = &approx[ch];
            for k in 0..out_len {
                let mut acc_d = 0.0;
                let mut acc_a = 0.0;
                let base = 2 * k;
                for i in 0..l {
                    let v = a[base + i];
                    acc_d += basis.highpass[i] * v;
                    acc_a += basis.lowpass[i] * v;
                }
                details[(ch, k)] = acc_d;
                next[ch][k] = acc_a;
            }
        }
        levels.push(PyramidLevel { octave: j, details });
        approx = next;
    }
    Ok(Pyramid { levels, channels: n })
}

/// Periodic-extension pyramid retaining the final approximation; used by the
/// Parseval energy check of the filter bank. Requires the length to be a
/// multiple of 2^j_max. Channels are not demeaned here.
pub struct PeriodicPyramid {
    pub details: Vec<DMatrix<f64>>,
    pub approx: DMatrix<f64>,
}

pub fn pyramid_periodic(y: &MultiSeries, j_max: usize, basis: &WaveletBasis) -> Result<PeriodicPyramid> {
    if y.len() % (1usize << j_max) != 0 {
        return Err(Error::domain("length must be a multiple of 2^j_max for the periodic pyramid"));
    }
    let n = y.channels();
    let l = basis.len();
    let mut approx: Vec<Vec<f64>> = y.rows().to_vec();
    let mut all = Vec::with_capacity(j_max);
    for _ in 1..=j_max {
        let in_len = approx[0].len();
        let out_len = in_len / 2;
        let mut details = DMatrix::zeros(n, out_len);
        let mut next = vec![vec![0.0; out_len]; n];
        for ch in 0..n {
            let a = &approx[ch];
            for k in 0..out_len {
                let mut acc_d = 0.0;
                let mut acc_a = 0.0;
                for i in 0..l {
                    let v = a[(2 * k + i) % in_len];
                    acc_d += basis.highpass[i] * v;
                    acc_a += basis.lowpass[i] * v;
                }
                details[(ch, k)] = acc_d;
                next[ch][k] = acc_a;
            }
        }
        all.push(details);
        approx = next;
    }
    let rows = approx.len();
    let cols = approx[0].len();
    let mut am = DMatrix::zeros(rows, cols);
    for (i, row) in approx.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            am[(i, j)] = v;
        }
    }
    Ok(PeriodicPyramid { details: all, approx: am })
}

/// Per-octave sample wavelet variance matrices W(2^j) with coefficient counts.
#[derive(Debug, Clone)]
pub struct WaveletVarianceSet {
    pub octaves: Vec<usize>,
    pub matrices: Vec<DMatrix<f64>>,
    pub counts: Vec<usize>,
}

impl WaveletVarianceSet {
    pub fn matrix(&self, octave: usize) -> Option<&DMatrix<f64>> {
        self.octaves.iter().position(|&j| j == octave).map(|i| &self.matrices[i])
    }
}

/// W(2^j) = (1/K_j) sum_k D(2^j,k) D(2^j,k)^T over the requested octaves.
pub fn wavelet_variance(p: &Pyramid, octaves: &[usize]) -> Result<WaveletVarianceSet> {
    let n = p.channels;
    let mut matrices = Vec::with_capacity(octaves.len());
    let mut counts = Vec::with_capacity(octaves.len());
    for &j in octaves {
        let level = p
            .level(j)
            .ok_or_else(|| Error::domain(format!("octave {j} not present in pyramid (max {})", p.max_octave())))?;
        let k_j = level.count();
        if k_j < 2 {
            return Err(Error::domain(format!("octave {j} has K_j = {k_j} < 2 coefficients")));
        }
        let mut w = DMatrix::zeros(n, n);
        for k in 0..k_j {
            let col = level.details.column(k);
            for a in 0..n {
                for b in a..n {
                    w[(a, b)] += col[a] * col[b];
                }
            }
        }
        for a in 0..n {
            for b in a..n {
                let v = w[(a, b)] / k_j as f64;
                w[(a, b)] = v;
                w[(b, a)] = v;
            }
        }
        matrices.push(w);
        counts.push(k_j);
    }
    Ok(WaveletVarianceSet { octaves: octaves.to_vec(), matrices, counts })
}

/// Sample wavelet coherence between channels i1 and i2 per octave:
/// W_12 / sqrt(W_11 W_22), always in [-1, 1].
pub fn coherence(wset: &WaveletVarianceSet, i1: usize, i2: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(wset.octaves.len());
    for (idx, &j) in wset.octaves.iter().enumerate() {
        let w = &wset.matrices[idx];
        let d1 = w[(i1, i1)];
        let d2 = w[(i2, i2)];
        if d1 <= 0.0 || d2 <= 0.0 {
            return Err(Error::numerical(format!("zero diagonal wavelet variance at octave {j}")));
        }
        let c = (w[(i1, i2)] / (d1 * d2).sqrt()).clamp(-1.0, 1.0);
        out.push((j, c));
    }
    Ok(out)
}

/// Squared modulus of a filter transfer function (scaled by 1/sqrt(2)) at
/// angular frequency w.
fn transfer_sq(filter: &[f64], w: f64) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (k, &c) in filter.iter().enumerate() {
        let (s, cs) = (k as f64 * w).sin_cos();
        re += c * cs;
        im -= c * s;
    }
    0.5 * (re * re + im * im)
}

/// |psi-hat(x)|^2 by the cascade product |m1(x/2)|^2 prod_{k=2..depth} |m0(x/2^k)|^2.
pub fn psi_hat_sq(basis: &WaveletBasis, x: f64, depth: usize) -> f64 {
    let depth = depth.max(10);
    let mut acc = transfer_sq(&basis.highpass, x / 2.0);
    let mut arg = x / 2.0;
    for _ in 2..=depth {
        arg /= 2.0;
        acc *= transfer_sq(&basis.lowpass, arg);
    }
    acc
}

/// Memoizing |psi-hat|^2 evaluator shared by the quadratures below.
pub struct CachedPsiSq<'a> {
    basis: &'a WaveletBasis,
    depth: usize,
    cache: RefCell<HashMap<u64, f64>>,
}

impl<'a> CachedPsiSq<'a> {
    pub fn new(basis: &'a WaveletBasis) -> Self {
        CachedPsiSq { basis, depth: DEFAULT_CASCADE_DEPTH, cache: RefCell::new(HashMap::new()) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let key = x.abs().to_bits();
        if let Some(&v) = self.cache.borrow().get(&key) {
            return v;
        }
        let v = psi_hat_sq(self.basis, x.abs(), self.depth);
        self.cache.borrow_mut().insert(key, v);
        v
    }
}

fn check_d_window(basis: &WaveletBasis, d: f64) -> Result<()> {
    let np = basis.n_psi as f64;
    if !(d > -np + 0.5 && d < np) {
        return Err(Error::domain(format!(
            "memory parameter d = {d} outside integrability window ({}, {})",
            -np + 0.5,
            np
        )));
    }
    Ok(())
}

/// Integral of an even spectral integrand over the real line: adaptive
/// quadrature over dyadic panels of [0, cutoff] plus a fitted power-law tail,
/// times two. The panelization keeps narrow spectral bands from slipping
/// between the probe points of a single global adaptive pass.
fn spectral_integral<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<f64> {
    let g = |x: f64| if x == 0.0 { 0.0 } else { f(x) };
    let mut edges = vec![0.0, 2f64.powi(-8)];
    let mut hi = 2f64.powi(-8);
    while hi < FREQ_CUTOFF {
        hi = (hi * 2.0).min(FREQ_CUTOFF);
        edges.push(hi);
    }
    let mut coarse = 0.0;
    for w in edges.windows(2) {
        coarse += simpson_uniform(&g, w[0], w[1], 512).abs();
    }
    let tol = (coarse * 1e-8).max(1e-13) / edges.len() as f64;
    let mut main = 0.0;
    for w in edges.windows(2) {
        main += adaptive_simpson(&g, w[0], w[1], tol, 24);
    }
    let tail = power_law_tail(&g, FREQ_CUTOFF, what)?;
    let total = 2.0 * (main + tail);
    if !total.is_finite() {
        return Err(Error::numerical(format!("{what}: non-finite integral")));
    }
    Ok(total)
}

/// K(d) = int |psi-hat(x)|^2 |x|^{-2d} dx.
pub fn k_integral(basis: &WaveletBasis, d: f64) -> Result<f64> {
    check_d_window(basis, d)?;
    let psi = CachedPsiSq::new(basis);
    let v = spectral_integral(|x| psi.eval(x) * x.powf(-2.0 * d), "K(d)")?;
    if v <= 0.0 {
        return Err(Error::numerical("K(d) must be positive"));
    }
    Ok(v)
}

/// Correlation sum S(d) = sum_z rho_z^2 with
/// rho_z = int |psi-hat(u)|^2 cos(z u) |u|^{-2d} du / K(d).
///
/// This is the constant `b` of the repeated-eigenvalue limit; by the change of
/// variable u = 2^j x it does not depend on the octave. The z-sum stops once
/// three consecutive terms fall below 1e-10 of the running sum.
pub fn correlation_sum(basis: &WaveletBasis, d: f64) -> Result<f64> {
    check_d_window(basis, d)?;
    let psi = CachedPsiSq::new(basis);
    let k = k_integral(basis, d)?;
    let mut total = 1.0; // z = 0 term is exactly 1.
    let mut small_run = 0;
    let mut z = 1u32;
    loop {
        let zf = z as f64;
        let num = spectral_integral(
            |u| psi.eval(u) * (zf * u).cos() * u.powf(-2.0 * d),
            "correlation numerator",
        )
        .unwrap_or(0.0);
        let term = 2.0 * (num / k).powi(2);
        total += term;
        if term < 1e-10 * total {
            small_run += 1;
            if small_run >= 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        z += 1;
        if z > 10_000 {
            return Err(Error::NonConvergence("correlation sum did not converge within 10^4 terms".into()));
        }
    }
    Ok(total)
}

/// The per-octave-pair m x m variance matrix V(d) entering the memory
/// estimator's limit law: Var(d-hat) ~ w^T V(d) w / nu.
///
/// Entries follow the spectral form
///   V_{k1,k2} = (4 pi / ln^2 2) 2^{(j1+j2)(1-2d)} b^{4d-1} / K(d)^2
///               * int x^{-4d} |psi-hat(2^{j1} x / b)|^2 |psi-hat(2^{j2} x / b)|^2 dx,
/// with b = gcd(2^{j1}, 2^{j2}), scaled by the lattice correction factor
/// c = sum_z rho_z^2 * K^2 / (2 pi * I_0) that replaces the integral
/// approximation of the coefficient-lag sum by its exact value on the
/// diagonal. The scaled matrix stays a Gram matrix, hence PSD.
pub fn v_matrix(basis: &WaveletBasis, d: f64, octaves: &[usize]) -> Result<DMatrix<f64>> {
    check_d_window(basis, d)?;
    if octaves.is_empty() {
        return Err(Error::domain("octave list must be nonempty"));
    }
    if octaves.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("octaves must be strictly ascending"));
    }
    let psi = CachedPsiSq::new(basis);
    let k = k_integral(basis, d)?;
    let m = octaves.len();
    let max_delta = octaves[m - 1] - octaves[0];

    // I_delta = int y^{-4d} |psi-hat(y)|^2 |psi-hat(2^delta y)|^2 dy.
    let mut integrals = vec![0.0; max_delta + 1];
    for (delta, slot) in integrals.iter_mut().enumerate() {
        let factor = (1u64 << delta) as f64;
        *slot = spectral_integral(
            |y| y.powf(-4.0 * d) * psi.eval(y) * psi.eval(factor * y),
            "V(d) entry",
        )?;
    }

    // Lattice correction: exact coefficient-lag sum over the integral form.
    let s = correlation_sum(basis, d)?;
    let correction = s * k * k / (2.0 * PI * integrals[0]);

    let ln2sq = std::f64::consts::LN_2 * std::f64::consts::LN_2;
    let mut v = DMatrix::zeros(m, m);
    for a in 0..m {
        for b_idx in a..m {
            let (j1, j2) = (octaves[a], octaves[b_idx]);
            let bgcd = (1u64 << j1.min(j2)) as f64;
            let delta = j2 - j1;
            let pref = 4.0 * PI / ln2sq
                * 2f64.powf((j1 + j2) as f64 * (1.0 - 2.0 * d))
                * bgcd.powf(4.0 * d - 1.0)
                / (k * k);
            let val = correction * pref * integrals[delta];
            v[(a, b_idx)] = val;
            v[(b_idx, a)] = val;
        }
    }
    Ok(v)
}
