//! Monte Carlo experiment runner: replicated synthesis + estimation with
//! per-replication RNG streams, deterministic across thread counts.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{self, DemixConfig};
use crate::rng::StreamSeed;
use crate::synth::{self, MixingSpec, ProcessClass};
use crate::whittle;

/// Experiment definition, deserializable from the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub nu: usize,
    pub replications: usize,
    /// Mixing matrix rows; must be square and match `channels`.
    pub mixing: Vec<Vec<f64>>,
    pub channels: Vec<ProcessClass>,
    #[serde(default)]
    pub demix: DemixConfig,
    /// Memory-regression octaves; empty selects every octave with >= 8
    /// coefficients.
    #[serde(default)]
    pub octaves: Vec<usize>,
    #[serde(default)]
    pub whittle: bool,
    #[serde(default = "default_whittle_m")]
    pub whittle_m: usize,
    #[serde(default)]
    pub seed: u64,
    /// 0 lets rayon pick.
    #[serde(default)]
    pub threads: usize,
}

fn default_whittle_m() -> usize {
    whittle::DEFAULT_M
}

impl ExperimentConfig {
    pub fn mixing_spec(&self) -> Result<MixingSpec> {
        let n = self.channels.len();
        if self.mixing.len() != n || self.mixing.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("mixing matrix shape must match channel count".into()));
        }
        let flat: Vec<f64> = self.mixing.iter().flatten().copied().collect();
        MixingSpec::new(DMatrix::from_row_slice(n, n, &flat), self.channels.clone())
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        if self.replications == 0 {
            return Err(Error::domain("need at least 1 replication"));
        }
        if self.whittle && self.channels.len() != 2 {
            return Err(Error::domain("the Whittle baseline requires exactly 2 channels"));
        }
        self.mixing_spec()?;
        self.demix.validate()?;
        let mut warnings = Vec::new();
        if !self.nu.is_power_of_two() {
            warnings.push(format!("nu = {} is not a power of two", self.nu));
        }
        Ok(warnings)
    }
}

/// One replication's estimates (timing kept separately so reports stay
/// bit-comparable across thread counts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepEstimates {
    pub rep: usize,
    pub h_hat: Vec<f64>,
    pub d_hat: Vec<f64>,
    /// Row-major entries of P-hat^{-1} P - I.
    pub p_err: Vec<f64>,
    pub ml_h: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepTiming {
    pub rep: usize,
    pub two_step_s: f64,
    pub whittle_s: Option<f64>,
}

/// Summary statistics of one scalar parameter across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub sd: f64,
    pub sqrt_mse: f64,
}

pub fn summarize(name: &str, truth: f64, values: &[f64]) -> ParamStats {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let bias = mean - truth;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
    } else {
        0.0
    };
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / r;
    ParamStats { name: name.into(), truth, mean, bias, sd, sqrt_mse: mse.sqrt() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McTiming {
    pub two_step_mean_s: f64,
    pub whittle_mean_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub replications: usize,
    pub parameters: Vec<ParamStats>,
    pub ml_parameters: Vec<ParamStats>,
    pub estimates: Vec<RepEstimates>,
    pub timing: McTiming,
    pub timings: Vec<RepTiming>,
    pub warnings: Vec<String>,
}

impl McReport {
    /// The deterministic payload: everything except wall-clock times.
    pub fn results_equal(&self, other: &McReport) -> bool {
        self.replications == other.replications
            && self.parameters == other.parameters
            && self.ml_parameters == other.ml_parameters
            && self.estimates == other.estimates
    }

    /// Per-replication CSV: header + one row per replication.
    pub fn write_replications_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let n = self.estimates.first().map(|e| e.h_hat.len()).unwrap_or(0);
        let mut header = vec!["rep".to_string()];
        for i in 1..=n {
            header.push(format!("h_hat_{i}"));
        }
        for i in 1..=n {
            header.push(format!("d_hat_{i}"));
        }
        for i in 1..=n {
            for j in 1..=n {
                header.push(format!("p_err_{i}_{j}"));
            }
        }
        header.push("two_step_s".into());
        if self.estimates.iter().any(|e| e.ml_h.is_some()) {
            header.push("ml_h1".into());
            header.push("ml_h2".into());
            header.push("whittle_s".into());
        }
        writeln!(w, "{}", header.join(","))?;
        for (e, t) in self.estimates.iter().zip(&self.timings) {
            let mut row = vec![e.rep.to_string()];
            row.extend(e.h_hat.iter().map(|v| format!("{v}")));
            row.extend(e.d_hat.iter().map(|v| format!("{v}")));
            row.extend(e.p_err.iter().map(|v| format!("{v}")));
            row.push(format!("{}", t.two_step_s));
            if let Some((m1, m2)) = e.ml_h {
                row.push(format!("{m1}"));
                row.push(format!("{m2}"));
                row.push(format!("{}", t.whittle_s.unwrap_or(f64::NAN)));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn run_replication(cfg: &ExperimentConfig, spec: &MixingSpec, rep: usize) -> Result<(RepEstimates, RepTiming)> {
    let seed = StreamSeed::with_stream(cfg.seed, rep as u64);
    let (_x, y) = synth::synth_mixed(spec, cfg.nu, seed)?;

    let t0 = Instant::now();
    let demix_cfg = cfg.demix.feasible_for(cfg.nu)?;
    let result = estimator::two_step(&y, &demix_cfg, &cfg.octaves, Some(&cfg.channels), None)?;
    let two_step_s = t0.elapsed().as_secs_f64();

    let n = spec.p.nrows();
    let pinv_hat = result
        .p_hat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("replication {rep}: singular P-hat")))?;
    let err = &pinv_hat * &spec.p - DMatrix::<f64>::identity(n, n);
    let p_err: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| err[(i, j)]).collect();

    let (ml_h, whittle_s) = if cfg.whittle {
        let t1 = Instant::now();
        let init = whittle::whittle_default_init(&y)?;
        let fit = whittle::whittle_fit(&y, &init, cfg.whittle_m)?;
        (Some((fit.h1, fit.h2)), Some(t1.elapsed().as_secs_f64()))
    } else {
        (None, None)
    };

    Ok((
        RepEstimates { rep, h_hat: result.h_hat, d_hat: result.d_hat, p_err, ml_h },
        RepTiming { rep, two_step_s, whittle_s },
    ))
}

/// Run the experiment. Replications use independent RNG streams keyed by
/// (seed, replication index), so the report is identical for any thread
/// count; any failing replication aborts with its index.
pub fn mc_run(cfg: &ExperimentConfig) -> Result<McReport> {
    let warnings = cfg.validate()?;
    let spec = cfg.mixing_spec()?;
    let start = Instant::now();

    let run_all = || -> Vec<Result<(RepEstimates, RepTiming)>> {
        (0..cfg.replications)
            .into_par_iter()
            .map(|rep| run_replication(cfg, &spec, rep))
            .collect()
    };
    let outcomes = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::numerical(format!("thread pool: {e}")))?
            .install(run_all)
    } else {
        run_all()
    };

    let mut estimates = Vec::with_capacity(cfg.replications);
    let mut timings = Vec::with_capacity(cfg.replications);
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        let (e, t) = outcome.map_err(|err| Error::numerical(format!("replication {rep}: {err}")))?;
        estimates.push(e);
        timings.push(t);
    }

    let n = spec.channel_classes.len();
    let mut parameters = Vec::new();
    for i in 0..n {
        let truth = spec.channel_classes[i].hurst();
        let vals: Vec<f64> = estimates.iter().map(|e| e.h_hat[i]).collect();
        parameters.push(summarize(&format!("h_{}", i + 1), truth, &vals));
    }
    for i in 0..n {
        for j in 0..n {
            let vals: Vec<f64> = estimates.iter().map(|e| e.p_err[i * n + j]).collect();
            parameters.push(summarize(&format!("p_err_{}_{}", i + 1, j + 1), 0.0, &vals));
        }
    }
    let mut ml_parameters = Vec::new();
    if cfg.whittle {
        let h1: Vec<f64> = estimates.iter().filter_map(|e| e.ml_h.map(|h| h.0)).collect();
        let h2: Vec<f64> = estimates.iter().filter_map(|e| e.ml_h.map(|h| h.1)).collect();
        ml_parameters.push(summarize("ml_h_1", spec.channel_classes[0].hurst(), &h1));
        ml_parameters.push(summarize("ml_h_2", spec.channel_classes[1].hurst(), &h2));
    }

    let two_step_mean_s =
        timings.iter().map(|t| t.two_step_s).sum::<f64>() / cfg.replications as f64;
    let whittle_mean_s = if cfg.whittle {
        Some(timings.iter().filter_map(|t| t.whittle_s).sum::<f64>() / cfg.replications as f64)
    } else {
        None
    };

    Ok(McReport {
        replications: cfg.replications,
        parameters,
        ml_parameters,
        estimates,
        timing: McTiming { two_step_mean_s, whittle_mean_s, total_s: start.elapsed().as_secs_f64() },
        timings,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            nu: 1 << 10,
            replications: 4,
            mixing: vec![vec![0.78, 0.62], vec![0.62, 0.78]],
            channels: vec![ProcessClass::Fbm { h: 0.3 }, ProcessClass::Fbm { h: 0.8 }],
            demix: DemixConfig { j1: 1, j2: 3, n_psi: 2 },
            octaves: Vec::new(),
            whittle: false,
            whittle_m: 100,
            seed: 2024,
            threads: 0,
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut cfg = small_config();
        cfg.threads = 1;
        let one = mc_run(&cfg).unwrap();
        cfg.threads = 4;
        let four = mc_run(&cfg).unwrap();
        assert!(one.results_equal(&four), "report differs across thread counts");
    }

    #[test]
    fn single_replication_has_zero_sd() {
        let mut cfg = small_config();
        cfg.replications = 1;
        let rep = mc_run(&cfg).unwrap();
        for p in &rep.parameters {
            assert_eq!(p.sd, 0.0);
            assert!((p.bias - (p.mean - p.truth)).abs() < 1e-15);
        }
    }

    #[test]
    fn mse_identity_holds() {
        let rep = mc_run(&small_config()).unwrap();
        let r = rep.replications as f64;
        for p in &rep.parameters {
            let lhs = p.sqrt_mse * p.sqrt_mse;
            let rhs = p.bias * p.bias + p.sd * p.sd * (r - 1.0) / r;
            assert!(
                (lhs - rhs).abs() < 1e-10 * lhs.max(1e-10),
                "{}: {lhs} vs {rhs}",
                p.name
            );
        }
    }

    #[test]
    fn replication_csv_has_one_row_per_rep() {
        let rep = mc_run(&small_config()).unwrap();
        let mut buf = Vec::new();
        rep.write_replications_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + rep.replications);
        assert!(text.lines().next().unwrap().starts_with("rep,h_hat_1"));
    }

    #[test]
    fn config_validation_catches_shape_errors() {
        let mut cfg = small_config();
        cfg.mixing = vec![vec![1.0, 0.0]];
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.nu = 1000;
        assert_eq!(cfg.validate().unwrap().len(), 1);
    }
}
