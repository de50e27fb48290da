use choquard::*;
use rustfft::num_complex::Complex64;
fn main() {
    // 1D check
    let n = 16usize;
    let g = make_grid(1, n, 5.0).unwrap();
    let f = gaussian(&g, &[0.0], 1.2).unwrap();
    let s = 0.8f64; let l = 0.3f64;
    let lam: f64 = (l / s).exp();
    let amp: f64 = (l / (2.0 * s)).exp();
    let d = dilate(&f, l, s).unwrap();
    // direct band-limited interpolation using naive DFT
    let vals = f.values();
    let k = g.wavenumbers();
    let half = g.half_length();
    let mut exact = vec![0.0; n];
    for i in 0..n {
        let y = lam * g.coordinate(i) + half;
        // F_m = sum_j f_j e^{-2pi i m j/n}
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let mut fm = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let ph: f64 = -2.0 * std::f64::consts::PI * (m as f64) * (j as f64) / n as f64;
                fm += vals[j] * Complex64::new(ph.cos(), ph.sin());
            }
            let ky: f64 = k[m] * y; let basis = if m == n / 2 {
                Complex64::new(ky.cos(), 0.0)
            } else {
                Complex64::new(ky.cos(), ky.sin())
            };
            acc += fm * basis;
        }
        exact[i] = amp * acc.re / n as f64;
    }
    let mut sup = 0.0f64;
    for i in 0..n { sup = sup.max((d.values()[i] - exact[i]).abs()); }
    println!("1D dilate vs naive interp sup err = {sup:.3e}");
    let analytic = Field::from_fn(&g, |x| amp * (-(lam*x[0]).powi(2)/(2.0*1.44)).exp()).unwrap();
    println!("1D dilate vs analytic sup err = {:.3e}", d.sub(&analytic).unwrap().max_abs());
}
