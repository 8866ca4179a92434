fn main() {
    let b = fracmix::dwt::daubechies_filters(1).unwrap();
    let got = fracmix::dwt::k_integral(&b, 0.25).unwrap();
    let f = |x: f64| {
        if x == 0.0 { 0.0 } else { 16.0 * (x / 4.0).sin().powi(4) / (x * x) * x.powf(-0.5) }
    };
    let main = fracmix::quad::adaptive_simpson(&f, 0.0, 65536.0, 1e-9, 50);
    let tail = 8.0 * 65536.0_f64.powf(-1.5);
    let oracle = 2.0 * (main + tail);
    println!("got={got:.8} oracle={oracle:.8} rel={:.2e}", (got-oracle).abs()/oracle);
    let k0 = fracmix::dwt::k_integral(&b, 0.0).unwrap();
    println!("K(0)={k0:.8} 2pi={:.8}", 2.0*std::f64::consts::PI);
}
