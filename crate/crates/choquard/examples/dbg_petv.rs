use choquard::*;
use choquard::ops::*;
fn main() {
    let g = make_grid(2, 64, 8.0).unwrap();
    let (s, alpha) = (0.75f64, 1.0f64);
    let p: f64 = 2.25;
    let gamma = (2.0 * p - 1.0) / (2.0 * p - 2.0);
    let mut q = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
    let n = g.n();
    let mut prev: Option<Field> = None;
    for it in 0..200 {
        let conv = riesz_convolve(&q.map(|x| x.abs().powf(p)), alpha).unwrap();
        let nl = conv.mul(&q.signed_pow(p - 1.0)).unwrap();
        let lap = fractional_laplacian(&q, s).unwrap();
        let num = inner(&lap, &q).unwrap() + mass(&q);
        let den = inner(&nl, &q).unwrap();
        let stab = num / den;
        let next = resolvent_apply(&nl, s, 0.0, 1.0).unwrap().scale(stab.powf(gamma)).abs().symmetrize_even();
        prev = Some(q.clone());
        q = next;
        if it % 25 == 0 || it == 199 {
            let d1 = q.sub(prev.as_ref().unwrap()).unwrap();
            let up = d1.max_abs();
            // reflection symmetry of the drift: d1(x) vs d1(-x)
            let mut asym = 0.0f64; let mut norm = 0.0f64;
            for i0 in 0..n { for i1 in 0..n {
                let j0 = (n - i0) % n; let j1 = (n - i1) % n;
                let a = d1.values()[i0 * n + i1];
                let b = d1.values()[j0 * n + j1];
                asym += (a - b).powi(2); norm += a * a;
            }}
            // drift along the diagonal
            let diag: Vec<String> = (24..=40).step_by(2).map(|i| format!("{:+.2e}", d1.values()[i*n+i])).collect();
            println!("it {it:4}: update={up:.4e} asym={:.2e} diag_drift=[{}]", (asym/norm).sqrt(), diag.join(" "));
        }
    }
}
