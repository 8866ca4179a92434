//! Time-domain diagnostics (ACF, CCF, AR pre-whitening) and the data-analysis
//! pipeline: wavelet scaling and coherence before/after demixing, memory
//! estimates across octave ranges, and cross-correlations of pre-whitened
//! series.

use serde::{Deserialize, Serialize};

use crate::dwt;
use crate::error::{Error, Result};
use crate::estimator::{self, DemixConfig};
use crate::series::MultiSeries;

fn demean(xs: &[f64]) -> Vec<f64> {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|v| v - mean).collect()
}

/// Sample autocorrelation with biased normalization, lags 0..=max_lag.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let nu = series.len();
    if max_lag >= nu.div_ceil(4) {
        return Err(Error::domain(format!("max_lag {max_lag} must be below nu/4 = {}", nu / 4)));
    }
    let x = demean(series);
    let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / nu as f64;
    if var <= 0.0 {
        return Err(Error::numerical("constant series has no autocorrelation"));
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let cov: f64 = (0..nu - k).map(|t| x[t] * x[t + k]).sum::<f64>() / nu as f64;
        out.push(cov / var);
    }
    Ok(out)
}

/// Sample cross-correlation for lags -max_lag..=max_lag; entry `max_lag + k`
/// correlates x_t with y_{t+k}.
pub fn ccf(x: &[f64], y: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::Dimension("cross-correlation needs equal lengths".into()));
    }
    let nu = x.len();
    if max_lag >= nu.div_ceil(4) {
        return Err(Error::domain(format!("max_lag {max_lag} must be below nu/4 = {}", nu / 4)));
    }
    let xd = demean(x);
    let yd = demean(y);
    let sx = (xd.iter().map(|v| v * v).sum::<f64>() / nu as f64).sqrt();
    let sy = (yd.iter().map(|v| v * v).sum::<f64>() / nu as f64).sqrt();
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::numerical("constant series has no cross-correlation"));
    }
    let mut out = Vec::with_capacity(2 * max_lag + 1);
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let mut acc = 0.0;
        for t in 0..nu {
            let s = t as i64 + lag;
            if s >= 0 && (s as usize) < nu {
                acc += xd[t] * yd[s as usize];
            }
        }
        out.push(acc / (nu as f64 * sx * sy));
    }
    Ok(out)
}

/// 5%-level white-noise band +-1.96/sqrt(nu).
pub fn correlation_band(nu: usize) -> f64 {
    1.96 / (nu as f64).sqrt()
}

/// AR(p) pre-whitening: orders 0..=max_order fitted by conditional least
/// squares, order chosen by AIC. Returns the residual series and the order.
pub fn prewhiten(series: &[f64], max_order: usize) -> Result<(Vec<f64>, usize)> {
    let nu = series.len();
    if max_order >= nu / 10 {
        return Err(Error::domain(format!(
            "max_order {max_order} too large for series of length {nu}"
        )));
    }
    let x = demean(series);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for p in 0..=max_order {
        let (residuals, rss) = match fit_ar(&x, p) {
            Ok(v) => v,
            Err(e) => {
                if p == 0 {
                    return Err(e);
                }
                continue;
            }
        };
        let n_eff = (nu - p) as f64;
        let sigma2 = (rss / n_eff).max(1e-300);
        let aic = n_eff * sigma2.ln() + 2.0 * p as f64;
        if best.as_ref().map(|(b, _, _)| aic < *b).unwrap_or(true) {
            best = Some((aic, p, residuals));
        }
    }
    let (_, order, residuals) = best.unwrap();
    Ok((residuals, order))
}

/// Conditional least squares AR(p) fit on a demeaned series; returns the
/// residuals (length nu - p) and their sum of squares.
fn fit_ar(x: &[f64], p: usize) -> Result<(Vec<f64>, f64)> {
    let nu = x.len();
    if p == 0 {
        let rss = x.iter().map(|v| v * v).sum();
        return Ok((x.to_vec(), rss));
    }
    // Normal equations G phi = r with G the lagged Gram matrix.
    let rows = nu - p;
    let mut g = nalgebra::DMatrix::<f64>::zeros(p, p);
    let mut r = nalgebra::DVector::<f64>::zeros(p);
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for t in 0..rows {
                acc += x[t + p - 1 - i] * x[t + p - 1 - j];
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc;
        }
        let mut acc = 0.0;
        for t in 0..rows {
            acc += x[t + p - 1 - i] * x[t + p];
        }
        r[i] = acc;
    }
    let chol = nalgebra::Cholesky::new(g)
        .ok_or_else(|| Error::numerical(format!("ill-conditioned AR({p}) normal equations")))?;
    let phi = chol.solve(&r);
    let mut residuals = Vec::with_capacity(rows);
    let mut rss = 0.0;
    for t in 0..rows {
        let mut pred = 0.0;
        for i in 0..p {
            pred += phi[i] * x[t + p - 1 - i];
        }
        let e = x[t + p] - pred;
        residuals.push(e);
        rss += e * e;
    }
    Ok((residuals, rss))
}

/// Configuration of the `analyze` pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeConfig {
    #[serde(default)]
    pub demix: DemixConfig,
    /// Octave ranges (lo, hi) for the memory-estimate sensitivity table;
    /// empty means the single default range.
    #[serde(default)]
    pub octave_ranges: Vec<(usize, usize)>,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    #[serde(default = "default_prewhiten_order")]
    pub prewhiten_max_order: usize,
    /// Skip the demixing step and treat the input as already demixed.
    #[serde(default)]
    pub identity_demix: bool,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

fn default_max_lag() -> usize {
    40
}
fn default_prewhiten_order() -> usize {
    20
}
fn default_ci_level() -> f64 {
    0.95
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            demix: DemixConfig::default(),
            octave_ranges: Vec::new(),
            max_lag: default_max_lag(),
            prewhiten_max_order: default_prewhiten_order(),
            identity_demix: false,
            ci_level: default_ci_level(),
        }
    }
}

/// Per-octave scaling table of one series: (octave, log2 W_ii per channel).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingTable {
    pub octaves: Vec<usize>,
    pub counts: Vec<usize>,
    /// log2 diagonal wavelet variances, indexed [channel][octave].
    pub log2_wii: Vec<Vec<f64>>,
    /// Coherence per channel pair, indexed [pair][octave]; pairs in (i, j)
    /// lexicographic order with i < j.
    pub coherence: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize)>,
}

fn scaling_table(y: &MultiSeries, octaves: &[usize], basis: &dwt::WaveletBasis) -> Result<ScalingTable> {
    let j_max = *octaves.iter().max().unwrap();
    let pyr = dwt::pyramid(y, j_max, basis)?;
    let wset = dwt::wavelet_variance(&pyr, octaves)?;
    let n = y.channels();
    let mut log2_wii = vec![Vec::with_capacity(octaves.len()); n];
    for w in &wset.matrices {
        for (ch, row) in log2_wii.iter_mut().enumerate() {
            let v = w[(ch, ch)];
            if v <= 0.0 {
                return Err(Error::numerical("nonpositive wavelet variance"));
            }
            row.push(v.log2());
        }
    }
    let mut pairs = Vec::new();
    let mut coh = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
            coh.push(dwt::coherence(&wset, i, j)?.into_iter().map(|(_, c)| c).collect());
        }
    }
    Ok(ScalingTable {
        octaves: octaves.to_vec(),
        counts: wset.counts,
        log2_wii,
        coherence: coh,
        pairs,
    })
}

/// Memory estimates over one octave range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RangeEstimates {
    pub octaves: Vec<usize>,
    pub d_hat: Vec<f64>,
    pub h_hat_stationary: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
}

/// Equal-memory test between a channel pair: reject when
/// h_j - h_i > 1.645 * sd(h_j - h_i), with the sd from the V-based variances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualMemoryTest {
    pub pair: (usize, usize),
    pub difference: f64,
    pub sd: f64,
    pub threshold: f64,
    pub reject_equal: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub channels: Vec<String>,
    pub nu: usize,
    pub acf: Vec<Vec<f64>>,
    pub acf_band: f64,
    pub pre_demix: ScalingTable,
    pub post_demix: ScalingTable,
    pub demixing_matrix: Vec<Vec<f64>>,
    pub p_hat: Vec<Vec<f64>>,
    pub eigengap: f64,
    pub degenerate: bool,
    /// d/h estimates per requested octave range (first entry = default range).
    pub estimates: Vec<RangeEstimates>,
    /// CCF of pre-whitened original channel pairs, lags -max_lag..=max_lag.
    pub ccf_prewhitened: Vec<Vec<f64>>,
    /// CCF of pre-whitened demixed channel pairs.
    pub ccf_demixed_prewhitened: Vec<Vec<f64>>,
    pub ccf_pairs: Vec<(usize, usize)>,
    pub ccf_band: f64,
    pub prewhiten_orders: Vec<usize>,
    pub prewhiten_orders_demixed: Vec<usize>,
    pub equal_memory_tests: Vec<EqualMemoryTest>,
}

/// Full data-analysis pipeline on a multichannel series.
pub fn analyze(y: &MultiSeries, cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    if y.channels() < 2 {
        return Err(Error::domain("analysis needs at least 2 channels"));
    }
    let demix_cfg = cfg.demix.feasible_for(y.len())?;
    let basis = demix_cfg.basis()?;
    let default_octs = estimator::default_octaves(y.len(), &basis);
    if default_octs.len() < 2 {
        return Err(Error::domain("series too short for wavelet analysis"));
    }

    let acf_all: Result<Vec<Vec<f64>>> =
        y.rows().iter().map(|ch| acf(ch, cfg.max_lag)).collect();
    let acf_all = acf_all?;

    let pre_demix = scaling_table(y, &default_octs, &basis)?;

    let (b_hat, diagnostics, p_hat, demixed) = if cfg.identity_demix {
        let n = y.channels();
        let id = nalgebra::DMatrix::<f64>::identity(n, n);
        let diag = estimator::DemixDiagnostics {
            eigengap: f64::INFINITY,
            degenerate: false,
            zero_diagonal_sign: false,
            lambda: vec![1.0; n],
        };
        (id.clone(), diag, id, y.clone())
    } else {
        let (b_hat, diag) = estimator::demix(y, &demix_cfg)?;
        let (p_hat, _) = estimator::normalize_mixing(&b_hat)?;
        let demixed = crate::synth::mix(&b_hat, y)?;
        (b_hat, diag, p_hat, demixed)
    };

    let post_demix = scaling_table(&demixed, &default_octs, &basis)?;

    let mut ranges: Vec<Vec<usize>> = Vec::new();
    ranges.push(default_octs.clone());
    for &(lo, hi) in &cfg.octave_ranges {
        if lo >= 1 && lo < hi {
            let hi = hi.min(*default_octs.last().unwrap());
            if lo < hi {
                ranges.push((lo..=hi).collect());
            }
        }
    }
    let weights_by_range: Result<Vec<Vec<f64>>> =
        ranges.iter().map(|r| estimator::regression_weights(r)).collect();
    let weights_by_range = weights_by_range?;
    let mut estimates = Vec::with_capacity(ranges.len());
    for (range, w) in ranges.iter().zip(&weights_by_range) {
        let fit = estimator::estimate_memory(&demixed, range, &basis)?;
        let ci = estimator::ci_halfwidth(
            &fit.d_hat,
            w,
            range,
            y.len() as f64,
            &basis,
            cfg.ci_level,
        )?;
        estimates.push(RangeEstimates {
            octaves: range.clone(),
            h_hat_stationary: fit.d_hat.iter().map(|d| d + 0.5).collect(),
            d_hat: fit.d_hat,
            ci_halfwidth: ci,
        });
    }

    // Equal-memory tests on the default range, using the V-based sd of the
    // difference of two independent channel estimates.
    let z_level = estimator::normal_quantile_two_sided(cfg.ci_level)?;
    let mut equal_memory_tests = Vec::new();
    let def = &estimates[0];
    let w0 = &weights_by_range[0];
    for i in 0..y.channels() {
        for j in (i + 1)..y.channels() {
            let var_i = (def.ci_halfwidth[i] / z_level).powi(2);
            let var_j = (def.ci_halfwidth[j] / z_level).powi(2);
            let sd = (var_i + var_j).sqrt();
            let difference = def.d_hat[j] - def.d_hat[i];
            let threshold = 1.645 * sd;
            equal_memory_tests.push(EqualMemoryTest {
                pair: (i, j),
                difference,
                sd,
                threshold,
                reject_equal: difference > threshold,
            });
        }
    }
    let _ = w0;

    // Pre-whitened cross-correlations, original and demixed.
    let mut pre_res = Vec::new();
    let mut pre_orders = Vec::new();
    for ch in y.rows() {
        let (r, p) = prewhiten(ch, cfg.prewhiten_max_order)?;
        pre_res.push((r, p));
        pre_orders.push(p);
    }
    let mut post_res = Vec::new();
    let mut post_orders = Vec::new();
    for ch in demixed.rows() {
        let (r, p) = prewhiten(ch, cfg.prewhiten_max_order)?;
        post_res.push((r, p));
        post_orders.push(p);
    }
    let mut ccf_pairs = Vec::new();
    let mut ccf_pre = Vec::new();
    let mut ccf_post = Vec::new();
    for i in 0..y.channels() {
        for j in (i + 1)..y.channels() {
            ccf_pairs.push((i, j));
            ccf_pre.push(aligned_ccf(&pre_res[i], &pre_res[j], cfg.max_lag)?);
            ccf_post.push(aligned_ccf(&post_res[i], &post_res[j], cfg.max_lag)?);
        }
    }
    let ccf_nu = pre_res.iter().map(|(r, _)| r.len()).min().unwrap_or(y.len());

    Ok(AnalysisReport {
        channels: y.labels().to_vec(),
        nu: y.len(),
        acf: acf_all,
        acf_band: correlation_band(y.len()),
        pre_demix,
        post_demix,
        demixing_matrix: estimator::matrix_rows(&b_hat),
        p_hat: estimator::matrix_rows(&p_hat),
        eigengap: diagnostics.eigengap,
        degenerate: diagnostics.degenerate,
        estimates,
        ccf_prewhitened: ccf_pre,
        ccf_demixed_prewhitened: ccf_post,
        ccf_pairs,
        ccf_band: correlation_band(ccf_nu),
        prewhiten_orders: pre_orders,
        prewhiten_orders_demixed: post_orders,
        equal_memory_tests,
    })
}

/// CCF of two AR residual series, aligned on their common time indices.
fn aligned_ccf(a: &(Vec<f64>, usize), b: &(Vec<f64>, usize), max_lag: usize) -> Result<Vec<f64>> {
    let (ra, pa) = a;
    let (rb, pb) = b;
    let p = (*pa).max(*pb);
    let xa = &ra[(p - pa)..];
    let xb = &rb[(p - pb)..];
    ccf(xa, xb, max_lag.min(xa.len() / 4 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSeed;
    use crate::synth;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn acf_lag_zero_is_one() {
        let xs: Vec<f64> = (0..64).map(|k| ((k * 22) % 17) as f64).collect();
        let a = acf(&xs, 0).unwrap();
        assert_abs_diff_eq!(a[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn acf_white_noise_within_band() {
        let nu = 4096;
        let s = synth::synth_fgn(0.5, nu, StreamSeed::new(41)).unwrap();
        let a = acf(s.channel(0), 20).unwrap();
        let band = correlation_band(nu);
        let inside = a[1..].iter().filter(|v| v.abs() <= band).count();
        assert!(inside >= 18, "only {inside}/20 lags inside the 5% band");
    }

    #[test]
    fn acf_rejects_constant_and_large_lag() {
        assert!(acf(&[1.0; 32], 4).is_err());
        assert!(acf(&(0..32).map(|k| k as f64).collect::<Vec<_>>(), 8).is_err());
    }

    #[test]
    fn ccf_self_at_zero_lag_is_one() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 * 0.7).sin()).collect();
        let c = ccf(&xs, &xs, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ccf_detects_shift() {
        let mut rng = StreamSeed::new(42).rng();
        let base: Vec<f64> = (0..2000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let shifted: Vec<f64> = {
            let mut v = vec![0.0; 2000];
            for t in 0..1997 {
                v[t + 3] = base[t];
            }
            v
        };
        let c = ccf(&base, &shifted, 5).unwrap();
        // Peak where y_{t+3} = x_t.
        let peak = 5 + 3;
        assert!(c[peak] > 0.9, "peak {}", c[peak]);
        assert!(c[5].abs() < 0.1);
    }

    #[test]
    fn prewhiten_recovers_ar1_order() {
        let mut hits = 0;
        let total = 50;
        for seed in 0..total {
            let mut rng = StreamSeed::with_stream(99, seed).rng();
            let mut x = vec![0.0_f64; 2048];
            for t in 1..2048 {
                let e: f64 = rng.sample(StandardNormal);
                x[t] = 0.8 * x[t - 1] + e;
            }
            let (res, order) = prewhiten(&x, 6).unwrap();
            if order == 1 {
                hits += 1;
            }
            let a = acf(&res, 1).unwrap();
            let band = correlation_band(res.len());
            if order == 1 {
                assert!(a[1].abs() < 2.0 * band, "AR(1) residual lag-1 {}", a[1]);
            }
        }
        assert!(hits * 2 > total, "AR(1) picked only {hits}/{total} times");
    }

    #[test]
    fn prewhiten_white_noise_prefers_low_order() {
        let mut low = 0;
        for seed in 0..20 {
            let s = synth::synth_fgn(0.5, 2048, StreamSeed::with_stream(7, seed)).unwrap();
            let (_, order) = prewhiten(s.channel(0), 6).unwrap();
            if order == 0 {
                low += 1;
            }
        }
        assert!(low >= 10, "white noise picked order 0 only {low}/20 times");
    }

    #[test]
    fn prewhiten_zero_order_returns_demeaned_input() {
        let xs: Vec<f64> = (0..64).map(|k| (k as f64 * 1.3).cos() + 5.0).collect();
        let (res, order) = prewhiten(&xs, 0).unwrap();
        assert_eq!(order, 0);
        let mean = xs.iter().sum::<f64>() / 64.0;
        for (r, x) in res.iter().zip(&xs) {
            assert_abs_diff_eq!(*r, x - mean, epsilon = 1e-12);
        }
    }

    #[test]
    fn analyze_requires_two_channels() {
        let y = MultiSeries::single((0..256).map(|k| (k as f64).sin()).collect(), None).unwrap();
        assert!(analyze(&y, &AnalyzeConfig::default()).is_err());
    }

    #[test]
    fn analyze_identity_demix_is_idempotent_on_demixed_output() {
        // Run the pipeline, save the demixed series through CSV, rerun with
        // the identity demix: the post-demix memory estimates must agree.
        let p = crate::paper_mixing_matrix_2();
        let x1 = synth::synth_fgn(0.4, 4096, StreamSeed::with_stream(11, 0)).unwrap();
        let x2 = synth::synth_fgn(0.8, 4096, StreamSeed::with_stream(11, 1)).unwrap();
        let x = MultiSeries::from_rows(
            vec![x1.channel(0).to_vec(), x2.channel(0).to_vec()],
            None,
        )
        .unwrap();
        let y = synth::mix(&p, &x).unwrap();
        let cfg = AnalyzeConfig::default();
        let first = analyze(&y, &cfg).unwrap();

        let (b_hat, _) = estimator::demix(&y, &cfg.demix.feasible_for(y.len()).unwrap()).unwrap();
        let demixed = synth::mix(&b_hat, &y).unwrap();
        let mut buf = Vec::new();
        demixed.write_csv(&mut buf).unwrap();
        let reread = MultiSeries::read_csv(&buf[..]).unwrap();
        let second = analyze(
            &reread,
            &AnalyzeConfig { identity_demix: true, ..AnalyzeConfig::default() },
        )
        .unwrap();
        for (d1, d2) in first.estimates[0].d_hat.iter().zip(&second.estimates[0].d_hat) {
            assert!((d1 - d2).abs() < 1e-6, "{d1} vs {d2}");
        }
    }

    #[test]
    fn analyze_decorrelates_mixed_fgn_pair() {
        // Mixed pair with distinct memory: after demixing, coherence falls
        // inside the CLT null band at all but possibly the coarsest octaves.
        let p = crate::paper_mixing_matrix_2();
        let nu = 1 << 14;
        let x1 = synth::synth_fgn(0.65, nu, StreamSeed::with_stream(12, 0)).unwrap();
        let x2 = synth::synth_fgn(0.93, nu, StreamSeed::with_stream(12, 1)).unwrap();
        let x = MultiSeries::from_rows(
            vec![x1.channel(0).to_vec(), x2.channel(0).to_vec()],
            None,
        )
        .unwrap();
        let y = synth::mix(&p, &x).unwrap();
        let rep = analyze(&y, &AnalyzeConfig::default()).unwrap();
        let coh = &rep.post_demix.coherence[0];
        let counts = &rep.post_demix.counts;
        let mut violations = 0;
        for (c, &k) in coh.iter().zip(counts).take(coh.len() - 2) {
            if c.abs() > 3.0 / (k as f64).sqrt() {
                violations += 1;
            }
        }
        assert!(violations <= 1, "coherence outside null band at {violations} fine octaves");
        // The original mixed data is strongly coherent at fine octaves.
        assert!(rep.pre_demix.coherence[0][0].abs() > 0.2);
    }

    #[test]
    fn analyze_octave_range_sensitivity_is_small() {
        let p = crate::paper_mixing_matrix_2();
        let nu = 6000;
        let x1 = synth::synth_fgn(0.65, nu, StreamSeed::with_stream(13, 0)).unwrap();
        let x2 = synth::synth_fgn(0.93, nu, StreamSeed::with_stream(13, 1)).unwrap();
        let x = MultiSeries::from_rows(
            vec![x1.channel(0).to_vec(), x2.channel(0).to_vec()],
            None,
        )
        .unwrap();
        let y = synth::mix(&p, &x).unwrap();
        let cfg = AnalyzeConfig {
            octave_ranges: vec![(3, 7), (3, 9)],
            ..AnalyzeConfig::default()
        };
        let rep = analyze(&y, &cfg).unwrap();
        assert_eq!(rep.estimates.len(), 3);
        let a = &rep.estimates[1];
        let b = &rep.estimates[2];
        for (ha, hb) in a.h_hat_stationary.iter().zip(&b.h_hat_stationary) {
            assert!((ha - hb).abs() < 0.05, "octave-range sensitivity {ha} vs {hb}");
        }
    }

    #[test]
    fn fit_ar_rejects_degenerate_design() {
        // All-zero tail: the Gram matrix is singular.
        let x = vec![0.0; 64];
        assert!(fit_ar(&x, 2).is_err());
    }
}
