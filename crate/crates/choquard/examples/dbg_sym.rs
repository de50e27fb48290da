use choquard::*;
use choquard::ops::*;
fn odd_part_norm(f: &Field) -> f64 {
    let g = f.grid(); let n = g.n();
    let mut m = 0.0f64;
    for i0 in 0..n { for i1 in 0..n {
        let j0 = (n - i0) % n; let j1 = (n - i1) % n;
        let odd = 0.5 * (f.values()[i0*n+i1] - f.values()[j0*n+j1]);
        m = m.max(odd.abs());
    }}
    m
}
fn main() {
    let g = make_grid(2, 64, 8.0).unwrap();
    let (s, alpha) = (0.75f64, 1.0f64);
    let p: f64 = 2.25;
    let gamma = (2.0 * p - 1.0) / (2.0 * p - 2.0);
    let mut q = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
    for _ in 0..160 {
        let conv = riesz_convolve(&q.map(|x| x.abs().powf(p)), alpha).unwrap();
        let nl = conv.mul(&q.signed_pow(p - 1.0)).unwrap();
        let lap = fractional_laplacian(&q, s).unwrap();
        let num = inner(&lap, &q).unwrap() + mass(&q);
        let den = inner(&nl, &q).unwrap();
        let stab = num / den;
        q = resolvent_apply(&nl, s, 0.0, 1.0).unwrap().scale(stab.powf(gamma)).abs().symmetrize_even();
    }
    let dens = q.map(|x| x.abs().powf(p));
    let conv = riesz_convolve(&dens, alpha).unwrap();
    let nl = conv.mul(&q.signed_pow(p - 1.0)).unwrap();
    let rnl = resolvent_apply(&nl, s, 0.0, 1.0).unwrap();
    println!("odd(q)    = {:.3e}", odd_part_norm(&q));
    println!("odd(dens) = {:.3e}", odd_part_norm(&dens));
    println!("odd(conv) = {:.3e}", odd_part_norm(&conv));
    println!("odd(nl)   = {:.3e}", odd_part_norm(&nl));
    println!("odd(Rnl)  = {:.3e}", odd_part_norm(&rnl));
    println!("min(Rnl)  = {:.3e}", rnl.min_value());
    println!("|q - Rnl| = {:.3e}", q.sub(&rnl).unwrap().max_abs());
    println!("|q - Sym(|Rnl|)| = {:.3e}", q.sub(&rnl.abs().symmetrize_even()).unwrap().max_abs());
}
