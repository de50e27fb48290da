//! The scalar Hartree-type ground state and the reference levels derived
//! from it: the canonical profile Q of
//! (−Δ)^s Q + Q = (I_α ⋆ |Q|^p)|Q|^{p−2}Q, the critical mass built from its
//! L² norm, and the constrained levels of the single equation that bracket
//! the coupled solves.

use crate::diagnostics::{decay_fit, DecayFit};
use crate::error::{Error, Result};
use crate::functionals::b_term_with;
use crate::grid::{gaussian, Field, Grid};
use crate::ops::{dilate, fractional_laplacian, hartree_convolve, inner, mass, resolvent_apply};
use crate::params::{gn_exponent, ModelParams, PotentialSpec};
use crate::system::{minimize_scalar, FlowOptions};

/// Converged canonical ground state (normalization λ = 1, μ = 1).
#[derive(Debug, Clone)]
pub struct GroundState {
    pub field: Field,
    pub lambda: f64,
    pub p: f64,
    pub s: f64,
    pub alpha: f64,
    /// Relative sup-norm residual of the stationary equation.
    pub residual: f64,
    /// ‖Q‖₂².
    pub mass: f64,
    /// ‖(−Δ)^{s/2}Q‖₂².
    pub kinetic: f64,
    /// B(Q, Q, p).
    pub b_value: f64,
    pub iterations: usize,
    /// |S − 1| of the final stabilizer factor.
    pub stabilizer_gap: f64,
}

/// Solve the canonical scalar equation by stabilized fixed-point iteration:
/// Q ← S^γ (I + (−Δ)^s)^{-1} N(Q) with S = ⟨((−Δ)^s + 1)Q, Q⟩ / ⟨N(Q), Q⟩
/// and γ = (2p−1)/(2p−2), seeded with a centered unit-width Gaussian.
pub fn solve_q(
    grid: &Grid,
    s: f64,
    alpha: f64,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GroundState> {
    let dim = grid.dim();
    let lower = 1.0 + alpha / dim as f64;
    if !(p > lower) {
        return Err(Error::param(
            "p",
            format!("must exceed 1 + alpha/dim = {lower}, got {p}"),
        ));
    }
    if dim as f64 > 2.0 * s {
        let upper = (dim as f64 + alpha) / (dim as f64 - 2.0 * s);
        if !(p < upper) {
            return Err(Error::param(
                "p",
                format!("must be below (dim + alpha)/(dim - 2s) = {upper}, got {p}"),
            ));
        }
    }

    let seed = gaussian(grid, &vec![0.0; dim], 1.0)?;
    let boundary = (-grid.half_length() * grid.half_length() / 2.0).exp();
    if boundary > 1e-10 {
        return Err(Error::InvalidGrid(format!(
            "box too small: Gaussian seed boundary value {boundary:.2e} exceeds 1e-10"
        )));
    }

    let gamma = (2.0 * p - 1.0) / (2.0 * p - 2.0);
    let mut q = seed;
    let mut stabilizer_gap = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let conv = hartree_convolve(&q.map(|x| x.abs().powf(p)), alpha)?;
        let nl = conv.mul(&q.signed_pow(p - 1.0))?;
        let num = kinetic_via_inner(&q, s)? + mass(&q);
        let den = inner(&nl, &q)?;
        if den <= 0.0 {
            return Err(Error::Divergence("nonlinear pairing vanished".into()));
        }
        let stab = num / den;
        if !(1e-6..=1e6).contains(&stab) {
            return Err(Error::Divergence(format!(
                "stabilizer left [1e-6, 1e6]: {stab:.3e}"
            )));
        }
        stabilizer_gap = (stab - 1.0).abs();
        // the even projection removes neutral translation noise, which
        // otherwise saturates the iteration around 1e-8
        let next = resolvent_apply(&nl, s, 0.0, 1.0)?
            .scale(stab.powf(gamma))
            .abs()
            .symmetrize_even();
        let update = next.sub(&q)?.max_abs() / next.max_abs();
        q = next;

        if update <= tol {
            let residual = equation_residual(&q, s, alpha, p)?;
            if residual <= tol {
                let kin = crate::ops::kinetic(&q, s)?;
                let conv = hartree_convolve(&q.map(|x| x.abs().powf(p)), alpha)?;
                let b_value = b_term_with(&conv, &q, p);
                return Ok(GroundState {
                    lambda: 1.0,
                    p,
                    s,
                    alpha,
                    residual,
                    mass: mass(&q),
                    kinetic: kin,
                    b_value,
                    iterations,
                    stabilizer_gap,
                    field: q,
                });
            }
        }
    }
    let residual = equation_residual(&q, s, alpha, p)?;
    Err(Error::NonConvergence {
        iterations,
        residual,
    })
}

fn kinetic_via_inner(f: &Field, s: f64) -> Result<f64> {
    let lap = fractional_laplacian(f, s)?;
    inner(&lap, f)
}

/// Relative sup-norm residual ‖(−Δ)^s Q + Q − N(Q)‖_∞ / ‖Q‖_∞.
pub fn equation_residual(q: &Field, s: f64, alpha: f64, p: f64) -> Result<f64> {
    let conv = hartree_convolve(&q.map(|x| x.abs().powf(p)), alpha)?;
    let nl = conv.mul(&q.signed_pow(p - 1.0))?;
    let lhs = fractional_laplacian(q, s)?.add(q)?;
    Ok(lhs.sub(&nl)?.max_abs() / q.max_abs())
}

/// Critical mass ‖Q‖₂^{2(p−1)} from a ground state converged at the
/// mass-critical exponent.
pub fn a_star(gs: &GroundState) -> Result<f64> {
    let dim = gs.field.grid().dim();
    let dp = gn_exponent(dim, gs.p, gs.s, gs.alpha);
    if (gs.p * dp - 1.0).abs() > 1e-6 {
        return Err(Error::param(
            "p",
            format!(
                "critical mass is defined at the mass-critical exponent (p·delta_p = 1); \
                 got p·delta_p = {}",
                gs.p * dp
            ),
        ));
    }
    Ok(gs.mass.powf(gs.p - 1.0))
}

/// The normalized ground state for interaction strength μ and squared mass
/// c², obtained from the canonical profile by the exact two-parameter scaling
/// u(x) = A·Q(Bx). Returns the rescaled field and its frequency λ = B^{2s}.
///
/// Substituting u = A·Q(Bx) into the equation forces λ = B^{2s} and
/// μ A^{2p−2} B^{−α−2s} = 1; the mass constraint A²B^{−N}‖Q‖² = c² then
/// pins both factors (away from the critical exponent).
pub fn rescale_ground_state(gs: &GroundState, mu: f64, c: f64) -> Result<(Field, f64)> {
    let dim = gs.field.grid().dim();
    let n = dim as f64;
    let p = gs.p;
    let t = (gs.alpha + 2.0 * gs.s) / (p - 1.0) - n;
    if t.abs() < 1e-9 {
        return Err(Error::param(
            "p",
            "mass is scale-invariant at the critical exponent; rescaling is singular",
        ));
    }
    let rhs = mu.powf(1.0 / (p - 1.0)) * c * c / gs.mass;
    let b_factor = rhs.powf(1.0 / t);
    let a_factor = (b_factor.powf(gs.alpha + 2.0 * gs.s) / mu).powf(0.5 / (p - 1.0));
    let l = gs.s * b_factor.ln();
    let dilated = dilate(&gs.field, l, gs.s)?;
    // dilate carries the mass-preserving amplitude B^{N/2}; remove it
    let field = dilated.scale(a_factor * b_factor.powf(-n / 2.0));
    Ok((field, b_factor.powf(2.0 * gs.s)))
}

/// Global constrained level of the single subcritical equation, computed by
/// the decoupled normalized flow.
pub fn m_level(
    c: f64,
    mu: f64,
    p: f64,
    s: f64,
    alpha: f64,
    grid: &Grid,
    opts: &FlowOptions,
) -> Result<f64> {
    let dim = grid.dim() as f64;
    let crit = 1.0 + (alpha + 2.0 * s) / dim;
    if !(p < crit) {
        return Err(Error::param(
            "p",
            format!("level m is defined for subcritical exponents (< {crit}), got {p}"),
        ));
    }
    let report = minimize_scalar(grid, s, alpha, p, mu, c, &PotentialSpec::zero(), opts)?;
    Ok(report.energy)
}

/// Converged output of the constrained-manifold descent.
#[derive(Debug, Clone)]
pub struct ManifoldLevel {
    pub value: f64,
    pub field: Field,
    pub iterations: usize,
}

/// Constrained level of the single supercritical equation on the natural
/// (scaling-identity) manifold: descend over profiles, re-projecting each
/// trial onto the manifold by the closed-form fiber-maximum dilation.
pub fn n_level(
    c: f64,
    mu: f64,
    p: f64,
    s: f64,
    alpha: f64,
    grid: &Grid,
    opts: &FlowOptions,
) -> Result<ManifoldLevel> {
    let dim = grid.dim();
    let nf = dim as f64;
    let crit = 1.0 + (alpha + 2.0 * s) / nf;
    if !(p > crit.max(2.0)) {
        return Err(Error::param(
            "p",
            format!(
                "level n is defined for exponents above max(2, {crit}), got {p}"
            ),
        ));
    }
    if nf > 2.0 * s {
        let upper = (nf + alpha) / (nf - 2.0 * s);
        if !(p < upper) {
            return Err(Error::param("p", format!("must be below {upper}, got {p}")));
        }
    }
    let dp = gn_exponent(dim, p, s, alpha);
    let c2 = c * c;
    let l_cap = s * (grid.n() as f64 / 8.0).ln();

    let project = |u: &Field| -> Result<(Field, f64, f64)> {
        // root of e^{2l}K − μ δ_p e^{2pδ_p l}B in l, taken in capped steps
        let mut u = u.clone();
        for _ in 0..10 {
            let kin = crate::ops::kinetic(&u, s)?;
            let conv = hartree_convolve(&u.map(|x| x.abs().powf(p)), alpha)?;
            let b = b_term_with(&conv, &u, p);
            if b <= 0.0 {
                return Err(Error::SeedRejected);
            }
            let l = (kin / (mu * dp * b)).ln() / (2.0 * p * dp - 2.0);
            if l.abs() < 1e-12 {
                let level = 0.5 * kin - mu / (2.0 * p) * b;
                return Ok((u, level, kin));
            }
            let step = l.clamp(-l_cap, l_cap);
            let dilated = dilate(&u, step, s)?;
            u = dilated.scale((c2 / mass(&dilated)).sqrt());
        }
        Err(Error::SeedRejected)
    };

    let seed = gaussian(grid, &vec![0.0; dim], 1.0)?;
    let seed = seed.scale((c2 / mass(&seed)).sqrt());
    let (mut u, mut level, _) = project(&seed)?;
    let mut tau = opts.tau;
    let mut iterations = 0;
    let mut stall = 0usize;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let conv = hartree_convolve(&u.map(|x| x.abs().powf(p)), alpha)?;
        let force = conv.mul(&u.signed_pow(p - 1.0))?.scale(mu);
        let grad = fractional_laplacian(&u, s)?.sub(&force)?;
        let tangent = grad.sub(&u.scale(inner(&grad, &u)? / mass(&u)))?;

        let mut accepted = false;
        for _ in 0..25 {
            let trial = u.sub(&tangent.scale(tau))?.abs();
            let trial = trial.scale((c2 / mass(&trial)).sqrt());
            match project(&trial) {
                Ok((pu, plevel, _)) => {
                    if plevel < level - 1e-15 * (1.0 + level.abs()) {
                        let improved = (level - plevel).abs() > opts.tol * (1.0 + level.abs());
                        u = pu;
                        level = plevel;
                        tau = (tau * 1.2).min(1.0);
                        accepted = true;
                        stall = if improved { 0 } else { stall + 1 };
                        break;
                    }
                }
                Err(Error::SeedRejected) => {}
                Err(e) => return Err(e),
            }
            tau *= 0.5;
            if tau < 1e-12 {
                break;
            }
        }
        if !accepted || stall >= 10 {
            break;
        }
    }

    Ok(ManifoldLevel {
        value: level,
        field: u,
        iterations,
    })
}

/// Least-squares slope of the radial tail of a converged ground state.
pub fn decay_reference(gs: &GroundState, r1: f64, r2: f64) -> Result<DecayFit> {
    decay_fit(&gs.field, r1, r2)
}

/// Predicted energy level of the rescaled normalized ground state: the
/// independent cross-check for the flow- and manifold-based levels.
pub fn rescaled_level(gs: &GroundState, mu: f64, c: f64) -> Result<f64> {
    let (u, _) = rescale_ground_state(gs, mu, c)?;
    let kin = crate::ops::kinetic(&u, gs.s)?;
    let b = crate::functionals::b_term(&u, &u, gs.p, gs.alpha)?;
    Ok(0.5 * kin - mu / (2.0 * gs.p) * b)
}

/// Scalar model parameters packaged for reuse by config-driven runs.
pub fn scalar_params(s: f64, alpha: f64, p: f64, mu: f64, c: f64) -> ModelParams {
    ModelParams {
        s,
        alpha,
        p,
        q: p,
        r: p,
        mu1: mu,
        mu2: mu,
        beta: 0.0,
        a: c,
        b: c,
        v1: PotentialSpec::zero(),
        v2: PotentialSpec::zero(),
    }
}
