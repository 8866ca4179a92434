//! Bivariate Whittle-type maximum likelihood baseline for mixed fractional
//! Gaussian noise: periodogram, the truncated-spectral-sum negative
//! log-likelihood, and a Nelder-Mead fit with logit-constrained Hurst
//! exponents.

use std::time::Instant;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MultiSeries;

/// Default truncation of the spectral folding sum.
pub const DEFAULT_M: usize = 100;
/// Nelder-Mead evaluation cap.
pub const MAX_EVALS: usize = 50_000;

/// 2x2 periodogram matrices I_Y(x_i) = J(x_i) J(x_i)^* / (2 pi nu) at the
/// Fourier frequencies x_i = 2 pi i / nu, i = 1..T, T = floor((nu-1)/2).
#[derive(Debug, Clone)]
pub struct Periodogram {
    pub nu: usize,
    pub freqs: Vec<f64>,
    pub mats: Vec<Matrix2<Complex64>>,
}

pub fn periodogram(y: &MultiSeries) -> Result<Periodogram> {
    if y.channels() != 2 {
        return Err(Error::Dimension("Whittle baseline is bivariate".into()));
    }
    let nu = y.len();
    if nu < 4 {
        return Err(Error::domain("periodogram needs at least 4 samples"));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nu);
    let mut dfts = Vec::with_capacity(2);
    for ch in 0..2 {
        let mut buf: Vec<Complex64> =
            y.channel(ch).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.process(&mut buf);
        // J(x_k) = sum_t y_t e^{i t x_k} = conj of the forward DFT; the
        // conjugation cancels in J J^*, the common phase from 1- vs 0-based
        // time indexing likewise.
        dfts.push(buf);
    }
    let t_count = (nu - 1) / 2;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * nu as f64);
    let mut freqs = Vec::with_capacity(t_count);
    let mut mats = Vec::with_capacity(t_count);
    for i in 1..=t_count {
        let j1 = dfts[0][i].conj();
        let j2 = dfts[1][i].conj();
        let m = Matrix2::new(
            Complex64::new(j1.norm_sqr() * norm, 0.0),
            j1 * j2.conj() * norm,
            j2 * j1.conj() * norm,
            Complex64::new(j2.norm_sqr() * norm, 0.0),
        );
        freqs.push(2.0 * std::f64::consts::PI * i as f64 / nu as f64);
        mats.push(m);
    }
    Ok(Periodogram { nu, freqs, mats })
}

/// e(h) = sqrt(Gamma(2h+1) sin(pi h) / (2 pi)); A = P diag(e(h1), e(h2)).
pub fn spectral_scale(h: f64) -> f64 {
    (statrs::function::gamma::gamma(2.0 * h + 1.0) * (std::f64::consts::PI * h).sin()
        / (2.0 * std::f64::consts::PI))
        .sqrt()
}

/// Precomputed tables for repeated likelihood evaluations on one periodogram.
struct WhittleTables {
    /// ln |x_i + 2 k pi| for k = -M..=M, flattened per frequency.
    log_lags: Vec<f64>,
    /// (2 pi M - x_i, 2 pi M + x_i) pairs for the folding correction.
    edges: Vec<(f64, f64)>,
    one_minus_cos: Vec<f64>,
    m: usize,
}

impl WhittleTables {
    fn new(p: &Periodogram, m: usize) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut log_lags = Vec::with_capacity(p.freqs.len() * (2 * m + 1));
        let mut edges = Vec::with_capacity(p.freqs.len());
        let mut one_minus_cos = Vec::with_capacity(p.freqs.len());
        for &x in &p.freqs {
            for k in -(m as i64)..=(m as i64) {
                log_lags.push((x + two_pi * k as f64).abs().ln());
            }
            edges.push((two_pi * m as f64 - x, two_pi * m as f64 + x));
            one_minus_cos.push(2.0 * (1.0 - x.cos()));
        }
        WhittleTables { log_lags, edges, one_minus_cos, m }
    }

    /// R~(x_i, h) evaluated from the cached tables.
    fn folded_spectrum(&self, i: usize, h: f64) -> f64 {
        let stride = 2 * self.m + 1;
        let expo = -(2.0 * h + 1.0);
        let mut acc = 0.0;
        for &ll in &self.log_lags[i * stride..(i + 1) * stride] {
            acc += (expo * ll).exp();
        }
        let (lo, hi) = self.edges[i];
        acc + (lo.powf(-2.0 * h) + hi.powf(-2.0 * h)) / (4.0 * std::f64::consts::PI * h)
    }
}

fn nll_with_tables(
    h1: f64,
    h2: f64,
    a: &Matrix2<f64>,
    p: &Periodogram,
    tables: &WhittleTables,
) -> f64 {
    if !(0.0 < h1 && h1 < 1.0 && 0.0 < h2 && h2 < 1.0) {
        return f64::INFINITY;
    }
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if det.abs() < 1e-12 * scale * scale {
        return f64::INFINITY;
    }
    let inv = Matrix2::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]) / det;
    let t_count = p.mats.len() as f64;
    let mut nll = 2.0 * t_count * det.abs().ln();
    for (i, mat) in p.mats.iter().enumerate() {
        let r1 = tables.folded_spectrum(i, h1);
        let r2 = tables.folded_spectrum(i, h2);
        let omc = tables.one_minus_cos[i];
        nll += (omc * r1 * r2).abs().ln();
        // tr[(A^T)^{-1} D^{-1} A^{-1} I] with D = diag(omc r1, omc r2):
        // diagonal entries of A^{-1} I (A^{-1})^T weighted by 1/D.
        let i00 = mat[(0, 0)].re;
        let i11 = mat[(1, 1)].re;
        let i01 = mat[(0, 1)].re; // conjugate pair: only the real part survives
        let j00 = inv[(0, 0)] * inv[(0, 0)] * i00
            + 2.0 * inv[(0, 0)] * inv[(0, 1)] * i01
            + inv[(0, 1)] * inv[(0, 1)] * i11;
        let j11 = inv[(1, 0)] * inv[(1, 0)] * i00
            + 2.0 * inv[(1, 0)] * inv[(1, 1)] * i01
            + inv[(1, 1)] * inv[(1, 1)] * i11;
        nll += j00 / (omc * r1) + j11 / (omc * r2);
    }
    if nll.is_nan() {
        f64::INFINITY
    } else {
        nll
    }
}

/// Negative Whittle log-likelihood at (h1, h2, A) for a bivariate periodogram,
/// with the spectral folding sum truncated at M.
pub fn whittle_nll(h1: f64, h2: f64, a: &Matrix2<f64>, p: &Periodogram, m: usize) -> Result<f64> {
    if m < 10 {
        return Err(Error::domain("truncation M must be at least 10"));
    }
    let tables = WhittleTables::new(p, m);
    Ok(nll_with_tables(h1, h2, a, p, &tables))
}

/// Whittle ML fit result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhittleFit {
    pub h1: f64,
    pub h2: f64,
    pub a_hat: Vec<Vec<f64>>,
    /// Mixing estimate A diag(1/e(h)), columns normalized with nonnegative
    /// diagonal.
    pub p_hat: Vec<Vec<f64>>,
    pub nll: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub converged: bool,
    /// Best objective value after each accepted Nelder-Mead step.
    #[serde(skip)]
    pub nll_trace: Vec<f64>,
}

/// Initial parameter guess (h1, h2, A).
#[derive(Debug, Clone)]
pub struct WhittleInit {
    pub h1: f64,
    pub h2: f64,
    pub a: Matrix2<f64>,
}

impl Default for WhittleInit {
    fn default() -> Self {
        WhittleInit { h1: 0.5, h2: 0.5, a: Matrix2::identity() }
    }
}

/// Data-driven initial guess: h = 0.5 and A from the Cholesky factor of the
/// sample covariance scaled by e(0.5).
pub fn whittle_default_init(y: &MultiSeries) -> Result<WhittleInit> {
    if y.channels() != 2 {
        return Err(Error::Dimension("Whittle baseline is bivariate".into()));
    }
    let nu = y.len() as f64;
    let mut means = [0.0; 2];
    for (ch, mean) in means.iter_mut().enumerate() {
        *mean = y.channel(ch).iter().sum::<f64>() / nu;
    }
    let mut cov = [[0.0; 2]; 2];
    for k in 0..y.len() {
        let d0 = y.channel(0)[k] - means[0];
        let d1 = y.channel(1)[k] - means[1];
        cov[0][0] += d0 * d0;
        cov[0][1] += d0 * d1;
        cov[1][1] += d1 * d1;
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= nu;
        }
    }
    // Lower Cholesky of the 2x2 covariance.
    let l00 = cov[0][0].max(1e-12).sqrt();
    let l10 = cov[0][1] / l00;
    let l11 = (cov[1][1] - l10 * l10).max(1e-12).sqrt();
    let e = spectral_scale(0.5);
    Ok(WhittleInit { h1: 0.5, h2: 0.5, a: Matrix2::new(l00 * e, 0.0, l10 * e, l11 * e) })
}

const H_FLOOR: f64 = 0.01;
const H_CEIL: f64 = 0.99;

fn logit_to_h(t: f64) -> f64 {
    H_FLOOR + (H_CEIL - H_FLOOR) / (1.0 + (-t).exp())
}

fn h_to_logit(h: f64) -> f64 {
    let u = ((h.clamp(H_FLOOR + 1e-6, H_CEIL - 1e-6)) - H_FLOOR) / (H_CEIL - H_FLOOR);
    (u / (1.0 - u)).ln()
}

fn theta_to_params(theta: &[f64; 6]) -> (f64, f64, Matrix2<f64>) {
    (
        logit_to_h(theta[0]),
        logit_to_h(theta[1]),
        Matrix2::new(theta[2], theta[3], theta[4], theta[5]),
    )
}

/// Minimize the Whittle objective by Nelder-Mead with one restart from the
/// best vertex. Convergence: simplex diameter below 1e-6 in the transformed
/// coordinates; hard cap of 50000 objective evaluations in total.
pub fn whittle_fit(y: &MultiSeries, init: &WhittleInit, m: usize) -> Result<WhittleFit> {
    let start = Instant::now();
    let demeaned = {
        let rows: Vec<Vec<f64>> = y
            .rows()
            .iter()
            .map(|ch| {
                let mean = ch.iter().sum::<f64>() / ch.len() as f64;
                ch.iter().map(|v| v - mean).collect()
            })
            .collect();
        MultiSeries::from_rows(rows, y.seed)?
    };
    let p = periodogram(&demeaned)?;
    if m < 10 {
        return Err(Error::domain("truncation M must be at least 10"));
    }
    let tables = WhittleTables::new(&p, m);
    let mut evals = 0usize;
    let mut objective = |theta: &[f64; 6]| {
        evals += 1;
        let (h1, h2, a) = theta_to_params(theta);
        nll_with_tables(h1, h2, &a, &p, &tables)
    };

    let theta0: [f64; 6] = [
        h_to_logit(init.h1),
        h_to_logit(init.h2),
        init.a[(0, 0)],
        init.a[(0, 1)],
        init.a[(1, 0)],
        init.a[(1, 1)],
    ];
    let mut trace = Vec::new();
    let (mut best, mut best_val, converged1) =
        nelder_mead(&mut objective, theta0, 0.25, MAX_EVALS / 2, &mut trace);
    // Restart once from the incumbent with a tighter simplex.
    let remaining = {
        let used = trace.len().max(1);
        MAX_EVALS.saturating_sub(used)
    };
    let (best2, best_val2, converged2) = nelder_mead(&mut objective, best, 0.05, remaining, &mut trace);
    if best_val2 < best_val {
        best = best2;
        best_val = best_val2;
    }
    let converged = converged1 || converged2;
    let total_evals = evals;

    let (mut h1, mut h2, mut a) = theta_to_params(&best);
    // The likelihood is invariant under the channel swap; report h1 <= h2.
    if h1 > h2 {
        std::mem::swap(&mut h1, &mut h2);
        a = Matrix2::new(a[(0, 1)], a[(0, 0)], a[(1, 1)], a[(1, 0)]);
    }
    let p_raw = DMatrix::from_row_slice(
        2,
        2,
        &[
            a[(0, 0)] / spectral_scale(h1),
            a[(0, 1)] / spectral_scale(h2),
            a[(1, 0)] / spectral_scale(h1),
            a[(1, 1)] / spectral_scale(h2),
        ],
    );
    let p_hat = normalize_columns(&p_raw);
    Ok(WhittleFit {
        h1,
        h2,
        a_hat: crate::estimator::matrix_rows(&DMatrix::from_row_slice(
            2,
            2,
            &[a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]],
        )),
        p_hat: crate::estimator::matrix_rows(&p_hat),
        nll: best_val,
        iterations: total_evals,
        wall_time_s: start.elapsed().as_secs_f64(),
        converged,
        nll_trace: trace,
    })
}

fn normalize_columns(p: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = p.clone();
    for l in 0..out.ncols() {
        let norm = out.column(l).norm();
        if norm > 0.0 {
            let sign = if out[(l, l)] < 0.0 { -1.0 } else { 1.0 };
            for r in 0..out.nrows() {
                out[(r, l)] *= sign / norm;
            }
        }
    }
    out
}

/// Plain Nelder-Mead on R^6. Returns (best point, best value, converged).
fn nelder_mead<F: FnMut(&[f64; 6]) -> f64>(
    f: &mut F,
    x0: [f64; 6],
    step: f64,
    max_evals: usize,
    trace: &mut Vec<f64>,
) -> ([f64; 6], f64, bool) {
    const N: usize = 6;
    let mut simplex: Vec<[f64; 6]> = Vec::with_capacity(N + 1);
    simplex.push(x0);
    for i in 0..N {
        let mut v = x0;
        v[i] += if v[i].abs() > 1e-8 { step * v[i].abs().max(0.2) } else { step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut used = simplex.len();
    let mut converged = false;

    while used < max_evals {
        let mut order: Vec<usize> = (0..=N).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[N];
        let second_worst = order[N - 1];
        trace.push(values[best]);

        let diameter = (0..=N)
            .map(|i| {
                (0..N)
                    .map(|k| (simplex[i][k] - simplex[best][k]).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if diameter < 1e-6 && values[best].is_finite() {
            converged = true;
            break;
        }

        let mut centroid = [0.0; 6];
        for (i, v) in simplex.iter().enumerate() {
            if i != worst {
                for k in 0..N {
                    centroid[k] += v[k] / N as f64;
                }
            }
        }
        let reflect: [f64; 6] =
            std::array::from_fn(|k| centroid[k] + (centroid[k] - simplex[worst][k]));
        let fr = f(&reflect);
        used += 1;
        if fr < values[best] {
            let expand: [f64; 6] =
                std::array::from_fn(|k| centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]));
            let fe = f(&expand);
            used += 1;
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract_base = if fr < values[worst] { reflect } else { simplex[worst] };
            let contract: [f64; 6] =
                std::array::from_fn(|k| centroid[k] + 0.5 * (contract_base[k] - centroid[k]));
            let fc = f(&contract);
            used += 1;
            if fc < values[worst].min(fr) {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 0..=N {
                    if i != best {
                        simplex[i] = std::array::from_fn(|k| {
                            simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k])
                        });
                        values[i] = f(&simplex[i]);
                        used += 1;
                    }
                }
            }
        }
    }
    let mut best_idx = 0;
    for i in 1..=N {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    (simplex[best_idx], values[best_idx], converged)
}
