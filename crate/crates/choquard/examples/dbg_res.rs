use choquard::*;
use choquard::ops::*;
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
    let conv = riesz_convolve(&q.map(|x| x.abs().powf(p)), alpha).unwrap();
    let nl = conv.mul(&q.signed_pow(p - 1.0)).unwrap();
    let rq = resolvent_apply(&nl, s, 0.0, 1.0).unwrap();
    let a = q.sub(&rq).unwrap().max_abs();
    let fwd = SpectralOperator::from_symbol(&g, |k2| 1.0 + if k2 == 0.0 { 0.0 } else { k2.powf(s) });
    let b = fwd.apply(&rq).unwrap().sub(&nl).unwrap().max_abs();
    let lapq = fractional_laplacian(&q, s).unwrap();
    let c = lapq.add(&q).unwrap().sub(&nl).unwrap().max_abs();
    let d = fwd.apply(&q.sub(&rq).unwrap()).unwrap().max_abs();
    // also: difference between fwd.apply(q) and lap + q
    let e = fwd.apply(&q).unwrap().sub(&lapq.add(&q).unwrap()).unwrap().max_abs();
    println!("a = |q - R(nl)|           = {a:.3e}");
    println!("b = |(1+L)R(nl) - nl|     = {b:.3e}");
    println!("c = |Lq + q - nl|         = {c:.3e}");
    println!("d = |(1+L)(q - R(nl))|    = {d:.3e}");
    println!("e = |(1+L)q - (Lq + q)|   = {e:.3e}");
}
// appended diagnostics
