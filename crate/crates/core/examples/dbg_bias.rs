//! Bias dissection: per-octave means and regression estimates for pure fBm.

use fracmix::estimator;
use fracmix::rng::StreamSeed;
use fracmix::synth;

fn main() {
    let basis = fracmix::dwt::daubechies_filters(2).unwrap();
    for &h in &[0.2f64, 0.4, 0.8] {
        for &nu in &[1usize << 10, 1 << 16] {
            let reps = if nu <= 1 << 10 { 200 } else { 20 };
            let octs: Vec<usize> = (1..=6).collect();
            let mut log2_means = vec![0.0; octs.len()];
            let mut h_range = 0.0;
            let mut h_two_16 = 0.0;
            let mut h_two_12 = 0.0;
            for r in 0..reps {
                let x = synth::synth_fbm(h, nu, StreamSeed::with_stream(555, r as u64)).unwrap();
                let fit = estimator::estimate_memory(&x, &octs, &basis).unwrap();
                for (i, v) in fit.log2_wii[0].iter().enumerate() {
                    log2_means[i] += v / reps as f64;
                }
                h_range += (fit.d_hat[0] - 0.5) / reps as f64;
                let fit2 = estimator::estimate_memory(&x, &[1, 6], &basis).unwrap();
                h_two_16 += (fit2.d_hat[0] - 0.5) / reps as f64;
                let fit3 = estimator::estimate_memory(&x, &[1, 2], &basis).unwrap();
                h_two_12 += (fit3.d_hat[0] - 0.5) / reps as f64;
            }
            let diffs: Vec<f64> = log2_means.windows(2).map(|w| (w[1] - w[0]) / 2.0).collect();
            println!(
                "h={h} nu=2^{}: per-octave d: {:?}  h(1..6)={:.3} h({{1,6}})={:.3} h({{1,2}})={:.3}",
                nu.trailing_zeros(),
                diffs.iter().map(|d| (d * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
                h_range,
                h_two_16,
                h_two_12
            );
        }
    }
}
