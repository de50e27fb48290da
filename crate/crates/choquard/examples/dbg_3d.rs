use choquard::scalar::*;
use choquard::*;
use std::time::Instant;
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(32);
    let l: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(8.0);
    let (s, alpha) = (0.9f64, 2.0f64);
    let p = 1.0 + (alpha + 2.0 * s) / 3.0;
    let g = make_grid(3, n, l).unwrap();
    let t0 = Instant::now();
    let gs = solve_q(&g, s, alpha, p, 1e-6, 300).unwrap();
    let nf = 3.0;
    let want_kin = nf / (nf + alpha + 2.0 * s);
    let want_mass = (alpha + 2.0 * s) / (nf + alpha + 2.0 * s);
    let rk = gs.kinetic / gs.b_value;
    let rm = gs.mass / gs.b_value;
    let dp = choquard::gn_exponent(3, p, s, alpha);
    let poho = (gs.kinetic - dp * gs.b_value).abs() / gs.kinetic;
    println!("n={n} L={l}: iters={} res={:.2e} t={:?}", gs.iterations, gs.residual, t0.elapsed());
    println!("  kin/B err = {:.3e}  mass/B err = {:.3e}  poho rel = {:.3e}", (rk-want_kin).abs()/want_kin, (rm-want_mass).abs()/want_mass, poho);
    println!("  mass = {:.8}  a* = {:.8}", gs.mass, gs.mass.powf(p-1.0));
    println!("  q max = {:.4}, q boundary(mid-face) = {:.3e}", gs.field.max_abs(), gs.field.values()[ (0*n + n/2)*n + n/2 ]);
}
