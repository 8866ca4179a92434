//! Synthesis of the hidden fractional processes (fGn, fBm, FARIMA(0,d,0),
//! fractional Ornstein-Uhlenbeck), mixing through P, and the Langevin
//! aggregation demonstration.
//!
//! fGn paths are exact in distribution via circulant embedding; FARIMA uses a
//! truncated MA(inf) expansion with truncation error O(K^{d-1/2}); fOU and the
//! Langevin SDE use Euler-Maruyama driven by exact fGn increments, with the
//! aggregation integral taken by the trapezoid rule on the Euler grid.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::StreamSeed;
use crate::series::MultiSeries;

/// One hidden-channel process class with its memory parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProcessClass {
    /// Fractional Gaussian noise with Hurst exponent h in (0,1).
    Fgn { h: f64 },
    /// Fractional Brownian motion with Hurst exponent h in (0,1).
    Fbm { h: f64 },
    /// FARIMA(0,d,0) with memory parameter |d| < 1/2.
    Farima { d: f64 },
    /// Fractional Ornstein-Uhlenbeck: mean reversion lambda > 0, Hurst h.
    Fou { lambda: f64, h: f64 },
}

impl ProcessClass {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessClass::Fgn { h } | ProcessClass::Fbm { h } => check_hurst(h),
            ProcessClass::Farima { d } => {
                if d.abs() >= 0.5 {
                    Err(Error::domain(format!("FARIMA requires |d| < 1/2, got {d}")))
                } else {
                    Ok(())
                }
            }
            ProcessClass::Fou { lambda, h } => {
                check_hurst(h)?;
                if lambda <= 0.0 {
                    Err(Error::domain(format!("FOU requires lambda > 0, got {lambda}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// True Hurst exponent of the class.
    pub fn hurst(&self) -> f64 {
        match *self {
            ProcessClass::Fgn { h } | ProcessClass::Fbm { h } | ProcessClass::Fou { h, .. } => h,
            ProcessClass::Farima { d } => d + 0.5,
        }
    }

    /// True spectral memory parameter d (exponent of |x|^{-2d} near zero).
    pub fn memory(&self) -> f64 {
        match *self {
            ProcessClass::Fgn { h } | ProcessClass::Fou { h, .. } => h - 0.5,
            ProcessClass::Fbm { h } => h + 0.5,
            ProcessClass::Farima { d } => d,
        }
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if h <= 0.0 || h >= 1.0 {
        Err(Error::domain(format!("Hurst exponent must lie in (0,1), got {h}")))
    } else {
        Ok(())
    }
}

/// Mixing specification Y = P X.
#[derive(Debug, Clone)]
pub struct MixingSpec {
    pub p: DMatrix<f64>,
    pub channel_classes: Vec<ProcessClass>,
}

impl MixingSpec {
    pub fn new(p: DMatrix<f64>, channel_classes: Vec<ProcessClass>) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::Dimension("mixing matrix must be square".into()));
        }
        if p.nrows() != channel_classes.len() {
            return Err(Error::Dimension("one process class per channel required".into()));
        }
        for c in &channel_classes {
            c.validate()?;
        }
        check_nonsingular(&p)?;
        Ok(MixingSpec { p, channel_classes })
    }

    /// Whether P satisfies the normalized form: unit columns, nonnegative diagonal.
    pub fn is_normalized(&self, tol: f64) -> bool {
        let n = self.p.nrows();
        (0..n).all(|l| {
            let norm = self.p.column(l).norm();
            (norm - 1.0).abs() <= tol && self.p[(l, l)] >= -tol
        })
    }
}

fn check_nonsingular(p: &DMatrix<f64>) -> Result<()> {
    let n = p.nrows();
    let norm = p.abs().max().max(f64::MIN_POSITIVE);
    let det = p.clone().lu().determinant();
    if det.abs() < 1e-12 * norm.powi(n as i32) {
        return Err(Error::Singular(format!("mixing matrix determinant {det:e} too small")));
    }
    Ok(())
}

/// Closed-form fGn autocovariance gamma(k) = (|k+1|^{2h} - 2|k|^{2h} + |k-1|^{2h}) / 2.
pub fn fgn_autocov(h: f64, k: usize) -> Result<f64> {
    check_hurst(h)?;
    let kf = k as f64;
    let p = 2.0 * h;
    Ok(0.5 * ((kf + 1.0).powf(p) - 2.0 * kf.powf(p) + (kf - 1.0).abs().powf(p)))
}

/// Exact zero-mean stationary fGn path by circulant embedding of the
/// covariance. Deterministic given the seed; the embedding eigenvalues are
/// asserted nonnegative (they are for fGn) rather than clamped.
pub fn synth_fgn(h: f64, nu: usize, seed: StreamSeed) -> Result<MultiSeries> {
    let values = fgn_values(h, nu, &mut seed.rng())?;
    MultiSeries::single(values, Some(seed.seed))
}

fn fgn_values(h: f64, nu: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    check_hurst(h)?;
    if nu < 2 {
        return Err(Error::domain("path length must be at least 2"));
    }
    let m = 2 * nu;
    let mut first_row = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..=nu {
        let g = fgn_autocov(h, k)?;
        first_row[k] = Complex64::new(g, 0.0);
        if k > 0 && k < nu {
            first_row[m - k] = Complex64::new(g, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let mut lambda = first_row;
    fft.process(&mut lambda);

    let max_eig = lambda.iter().fold(0.0_f64, |a, c| a.max(c.re));
    let tol = 1e-10 * max_eig.max(1.0);
    let mut spectrum = Vec::with_capacity(m);
    for c in &lambda {
        if c.re < -tol {
            return Err(Error::numerical(format!(
                "circulant embedding eigenvalue {:e} negative beyond tolerance",
                c.re
            )));
        }
        spectrum.push(c.re.max(0.0));
    }

    // Hermitian-symmetric complex Gaussian weights, drawn in a fixed order.
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    let z0: f64 = rng.sample(StandardNormal);
    let zh: f64 = rng.sample(StandardNormal);
    w[0] = Complex64::new(z0, 0.0);
    w[nu] = Complex64::new(zh, 0.0);
    for k in 1..nu {
        let u: f64 = rng.sample(StandardNormal);
        let v: f64 = rng.sample(StandardNormal);
        let c = Complex64::new(u, v) / std::f64::consts::SQRT_2;
        w[k] = c;
        w[m - k] = c.conj();
    }
    let mut buf: Vec<Complex64> =
        (0..m).map(|k| w[k] * spectrum[k].sqrt()).collect();
    let ifft = planner.plan_fft_inverse(m);
    ifft.process(&mut buf);
    let scale = 1.0 / (m as f64).sqrt();
    Ok(buf[..nu].iter().map(|c| c.re * scale).collect())
}

/// fBm as the cumulative sum of an fGn path, anchored at zero: sample k holds
/// B(k+1) = G_0 + ... + G_k, so increments reproduce the fGn path exactly.
pub fn synth_fbm(h: f64, nu: usize, seed: StreamSeed) -> Result<MultiSeries> {
    let fgn = synth_fgn(h, nu, seed)?;
    let mut acc = 0.0;
    let values = fgn.channel(0).iter().map(|g| {
        acc += g;
        acc
    });
    MultiSeries::single(values.collect(), Some(seed.seed))
}

pub const FARIMA_DEFAULT_TRUNCATION: usize = 1 << 14;

/// FARIMA(0,d,0) by truncated MA(inf): psi_0 = 1, psi_k = psi_{k-1} (k-1+d)/k.
pub fn synth_farima(d: f64, nu: usize, seed: StreamSeed) -> Result<MultiSeries> {
    synth_farima_with(d, nu, FARIMA_DEFAULT_TRUNCATION, seed)
}

pub fn synth_farima_with(d: f64, nu: usize, truncation: usize, seed: StreamSeed) -> Result<MultiSeries> {
    ProcessClass::Farima { d }.validate()?;
    if nu < 2 {
        return Err(Error::domain("path length must be at least 2"));
    }
    if truncation == 0 {
        return Err(Error::domain("truncation depth must be positive"));
    }
    let psi = farima_ma_coefficients(d, truncation);
    let mut rng = seed.rng();
    let innovations: Vec<f64> =
        (0..nu + truncation - 1).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    // X_t = sum_k psi_k eps_{t-k}; innovations[truncation-1 + t] is eps_t.
    let mut values = vec![0.0; nu];
    for (t, v) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &p) in psi.iter().enumerate() {
            acc += p * innovations[truncation - 1 + t - k];
        }
        *v = acc;
    }
    MultiSeries::single(values, Some(seed.seed))
}

/// MA coefficients by the stable recursion; shared with tests as the oracle.
pub fn farima_ma_coefficients(d: f64, count: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(count);
    psi.push(1.0);
    for k in 1..count {
        let prev = psi[k - 1];
        psi.push(prev * (k as f64 - 1.0 + d) / k as f64);
    }
    psi
}

/// Fractional Ornstein-Uhlenbeck by Euler-Maruyama at step `dt`, driven by
/// exact fGn increments scaled to variance dt^{2h}; samples are returned at
/// unit spacing. The recursion X <- X - lambda X dt + dB_h requires
/// lambda dt < 1 for stability.
pub fn synth_fou(lambda: f64, h: f64, nu: usize, dt: f64, seed: StreamSeed) -> Result<MultiSeries> {
    ProcessClass::Fou { lambda, h }.validate()?;
    if !(dt > 0.0) {
        return Err(Error::domain("dt must be positive"));
    }
    if lambda * dt >= 1.0 {
        return Err(Error::domain(format!(
            "Euler step unstable: lambda * dt = {} >= 1",
            lambda * dt
        )));
    }
    if nu < 2 {
        return Err(Error::domain("path length must be at least 2"));
    }
    let stride = (1.0 / dt).round() as usize;
    if stride == 0 || ((stride as f64) * dt - 1.0).abs() > 1e-9 {
        return Err(Error::domain("dt must divide the unit sampling interval"));
    }
    let steps = nu * stride;
    let incr = fgn_values(h, steps, &mut seed.rng())?;
    let scale = dt.powf(h);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(nu);
    for (i, g) in incr.iter().enumerate() {
        x = x - lambda * x * dt + scale * g;
        if (i + 1) % stride == 0 {
            out.push(x);
        }
    }
    MultiSeries::single(out, Some(seed.seed))
}

/// Y(k) = P X(k) columnwise.
pub fn mix(p: &DMatrix<f64>, x: &MultiSeries) -> Result<MultiSeries> {
    if p.nrows() != p.ncols() {
        return Err(Error::Dimension("mixing matrix must be square".into()));
    }
    if p.ncols() != x.channels() {
        return Err(Error::Dimension(format!(
            "mixing matrix is {}x{} but series has {} channels",
            p.nrows(),
            p.ncols(),
            x.channels()
        )));
    }
    check_nonsingular(p)?;
    let n = x.channels();
    let len = x.len();
    let mut rows = vec![vec![0.0; len]; n];
    for k in 0..len {
        for (i, row) in rows.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += p[(i, j)] * x.channel(j)[k];
            }
            row[k] = acc;
        }
    }
    let labels = (1..=n).map(|i| format!("y{i}")).collect();
    MultiSeries::new(rows, labels, x.seed)
}

/// Synthesize the hidden process of a mixing spec and mix it: one independent
/// channel per class, each drawn from its own substream.
pub fn synth_mixed(spec: &MixingSpec, nu: usize, seed: StreamSeed) -> Result<(MultiSeries, MultiSeries)> {
    let mut rows = Vec::with_capacity(spec.channel_classes.len());
    for (i, class) in spec.channel_classes.iter().enumerate() {
        let sub = seed.substream(i as u64);
        let ch = match *class {
            ProcessClass::Fgn { h } => synth_fgn(h, nu, sub)?,
            ProcessClass::Fbm { h } => synth_fbm(h, nu, sub)?,
            ProcessClass::Farima { d } => synth_farima(d, nu, sub)?,
            ProcessClass::Fou { lambda, h } => synth_fou(lambda, h, nu, 0.1, sub)?,
        };
        rows.push(ch.channel(0).to_vec());
    }
    let x = MultiSeries::from_rows(rows, Some(seed.seed))?;
    let y = mix(&spec.p, &x)?;
    Ok((x, y))
}

/// Multivariate Langevin dynamics dY = Phi Y dt + Sigma dB_h.
#[derive(Debug, Clone)]
pub struct LangevinSpec {
    pub phi: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub hurst: Vec<f64>,
    /// Aggregation window in time units.
    pub delta: f64,
    /// Euler step.
    pub dt: f64,
}

impl LangevinSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.phi.nrows();
        if self.phi.ncols() != n || self.sigma.nrows() != n || self.sigma.ncols() != n {
            return Err(Error::Dimension("Phi and Sigma must be square of equal size".into()));
        }
        if self.hurst.len() != n {
            return Err(Error::Dimension("one Hurst exponent per channel required".into()));
        }
        for &h in &self.hurst {
            check_hurst(h)?;
        }
        let neg_phi_eigs = crate::matalg::jacobi_eigh(&(-&self.phi))
            .map_err(|_| Error::domain("-Phi must be symmetric"))?;
        if neg_phi_eigs.values[0] <= 0.0 {
            return Err(Error::domain("-Phi must be positive definite"));
        }
        let sig_eigs = crate::matalg::jacobi_eigh(&self.sigma)
            .map_err(|_| Error::domain("Sigma must be symmetric"))?;
        if sig_eigs.values[0] <= 0.0 {
            return Err(Error::domain("Sigma must be positive definite"));
        }
        if !(self.dt > 0.0 && self.dt <= self.delta) {
            return Err(Error::domain("need 0 < dt <= Delta"));
        }
        Ok(())
    }
}

/// Simulate the Langevin SDE, aggregate over windows Delta by the trapezoid
/// rule, and return the normalized aggregate -diag(Delta^{-h_i}) Sigma^{-1} Phi Y_z.
pub fn aggregate_langevin(spec: &LangevinSpec, count: usize, seed: StreamSeed) -> Result<MultiSeries> {
    spec.validate()?;
    if count < 2 {
        return Err(Error::domain("need at least 2 aggregation windows"));
    }
    let n = spec.phi.nrows();
    let steps_per_window = (spec.delta / spec.dt).round() as usize;
    if steps_per_window == 0 || (steps_per_window as f64 * spec.dt - spec.delta).abs() > 1e-9 * spec.delta {
        return Err(Error::domain("dt must divide Delta"));
    }
    let total_steps = steps_per_window * count;

    // Independent exact fGn increments per channel at step dt.
    let mut increments = Vec::with_capacity(n);
    for (i, &h) in spec.hurst.iter().enumerate() {
        let mut rng = seed.substream(i as u64).rng();
        let g = fgn_values(h, total_steps, &mut rng)?;
        let scale = spec.dt.powf(h);
        increments.push(g.into_iter().map(|v| v * scale).collect::<Vec<f64>>());
    }

    let mut y = vec![0.0; n];
    let mut window_integrals = vec![vec![0.0; n]; count];
    for step in 0..total_steps {
        let window = step / steps_per_window;
        let mut y_next = vec![0.0; n];
        for i in 0..n {
            let mut drift = 0.0;
            let mut noise = 0.0;
            for j in 0..n {
                drift += spec.phi[(i, j)] * y[j];
                noise += spec.sigma[(i, j)] * increments[j][step];
            }
            y_next[i] = y[i] + drift * spec.dt + noise;
        }
        // Trapezoid rule over the Euler grid.
        for i in 0..n {
            window_integrals[window][i] += 0.5 * (y[i] + y_next[i]) * spec.dt;
        }
        y = y_next;
    }

    // Normalization -diag(Delta^{-h_i}) Sigma^{-1} Phi applied to each aggregate.
    let sigma_inv = spec
        .sigma
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("Sigma not invertible".into()))?;
    let norm_mat = -&sigma_inv * &spec.phi;
    let mut rows = vec![vec![0.0; count]; n];
    for (z, integral) in window_integrals.iter().enumerate() {
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += norm_mat[(i, j)] * integral[j];
            }
            rows[i][z] = spec.delta.powf(-spec.hurst[i]) * acc;
        }
    }
    MultiSeries::from_rows(rows, Some(seed.seed))
}
