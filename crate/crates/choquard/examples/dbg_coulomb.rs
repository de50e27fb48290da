use choquard::*;
use std::f64::consts::PI;
fn main() {
    // Coulomb potential of a unit Gaussian: (1/|x|) * e^{-r^2/2} = (2pi)^{3/2} erf(r/sqrt2)/r
    for (n, l) in [(32usize, 8.0f64), (64, 8.0), (64, 16.0)] {
        let g = make_grid(3, n, l).unwrap();
        let rho = gaussian(&g, &[0.0, 0.0, 0.0], 1.0).unwrap();
        let raw = riesz_convolve(&rho, 2.0).unwrap();
        let cor = hartree_convolve(&rho, 2.0).unwrap();
        let exact = Field::from_fn(&g, |x| {
            let r = (x.iter().map(|a| a * a).sum::<f64>()).sqrt();
            let m = (2.0 * PI).powf(1.5);
            if r < 1e-12 { m * (2.0 / PI).sqrt() / std::f64::consts::SQRT_2 * std::f64::consts::SQRT_2 / (PI/2.0).sqrt() * 0.5 * (PI/2.0).sqrt() // placeholder, fixed below
            } else { m * erf(r / std::f64::consts::SQRT_2) / r }
        }).unwrap();
        // fix center value: lim r->0 erf(r/s2)/r = 2/(sqrt(pi) sqrt(2))
        let mut vals = exact.values().to_vec();
        let center = (n/2*n + n/2)*n + n/2;
        vals[center] = (2.0*PI).powf(1.5) * 2.0 / (PI.sqrt() * std::f64::consts::SQRT_2);
        let exact = Field::from_values(&g, vals).unwrap();
        let err_raw = raw.sub(&exact).unwrap().max_abs() / exact.max_abs();
        let err_cor = cor.sub(&exact).unwrap().max_abs() / exact.max_abs();
        println!("n={n} L={l}: raw rel err = {err_raw:.3e}   corrected rel err = {err_cor:.3e}");
    }
}
fn erf(x: f64) -> f64 { libm::erf(x) }
