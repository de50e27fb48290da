use choquard::scalar::*;
use choquard::system::*;
use choquard::*;
use std::time::Instant;

fn main() {
    // 2D critical ground state
    let t0 = Instant::now();
    let g = make_grid(2, 64, 8.0).unwrap();
    let (s, alpha) = (0.75, 1.0);
    let p_crit = 1.0 + (alpha + 2.0 * s) / 2.0; // 2.25
    let gs = solve_q(&g, s, alpha, p_crit, 1e-6, 400).unwrap();
    println!("[2D Q] iters={} residual={:.2e} mass={:.6} kin={:.6} B={:.6}  ({:?})",
        gs.iterations, gs.residual, gs.mass, gs.kinetic, gs.b_value, t0.elapsed());
    let n = 2.0; let want_kin = n / (n + alpha + 2.0*s); let want_mass = (alpha + 2.0*s)/(n + alpha + 2.0*s);
    println!("  kinetic/B = {:.6} want {:.6} rel err {:.2e}", gs.kinetic/gs.b_value, want_kin, (gs.kinetic/gs.b_value-want_kin).abs()/want_kin);
    println!("  mass/B    = {:.6} want {:.6} rel err {:.2e}", gs.mass/gs.b_value, want_mass, (gs.mass/gs.b_value-want_mass).abs()/want_mass);
    let poho = functionals::pohozaev_scalar_residual(&gs.field, 1.0, p_crit, s, alpha).unwrap();
    println!("  pohozaev rel = {:.2e}", poho.abs()/gs.kinetic);
    println!("  a_star = {:.6}", a_star(&gs).unwrap());

    // subcritical 2D system flow
    let t0 = Instant::now();
    let params = ModelParams { s, alpha, p: 2.0, q: 2.0, r: 2.0, mu1: 1.0, mu2: 1.0, beta: 1.0,
        a: 1.0, b: 1.0, v1: PotentialSpec::zero(), v2: PotentialSpec::zero() };
    let seed = seed_pair(&g, &params, SeedKind::Gaussian, 7).unwrap();
    let mut opts = FlowOptions::default();
    opts.tau = 0.2; opts.tol = 1e-7; opts.max_iter = 10000;
    match minimize_subcritical(&params, &g, &seed, &opts) {
        Ok(rep) => {
            println!("[2D flow] iters={} E={:.8} l1={:.4} l2={:.4} res={:.2e} masses=({:.12},{:.12}) ({:?})",
                rep.iterations, rep.energy, rep.lambda1, rep.lambda2, rep.gradient_residual, rep.masses.0, rep.masses.1, t0.elapsed());
            let dev_u = diagnostics::radial_symmetry_check(&rep.u).unwrap();
            println!("  radial dev u = {:.2e}, positivity min = {:.2e}", dev_u, rep.u.min_value());
            // m-levels
            let m_a = m_level(1.0, 1.0, 2.0, s, alpha, &g, &opts).unwrap();
            println!("  m(a) = {:.8}, E < m? {}", m_a, rep.energy < m_a);
            // rescaled-Q oracle for m (needs Q at p=2 subcritical)
            let gs2 = solve_q(&g, s, alpha, 2.0, 1e-6, 400).unwrap();
            let oracle = rescaled_level(&gs2, 1.0, 1.0).unwrap();
            println!("  m oracle (rescaled Q) = {:.8} rel diff = {:.2e}", oracle, (m_a-oracle).abs()/oracle.abs());
        }
        Err(e) => println!("[2D flow] FAILED: {e}"),
    }
}
