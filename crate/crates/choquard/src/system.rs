//! Constrained solvers for the coupled system: normalized gradient flow with
//! discrete renormalization for the minimization regimes, a Rayleigh-quotient
//! descent and scaling probe for the mass-critical threshold analysis, and a
//! dilation-projected descent for the supercritical saddle level.

use crate::error::{Error, Result};
use crate::functionals::{
    energy_with, gradient_with, nonlinear_force, pohozaev_system_with, rayleigh_quotient_with,
    PairConvolutions, ScalingBase,
};
use crate::grid::{gaussian, Field, Grid};
use crate::ops::{dilate, fractional_laplacian, inner, mass, SpectralOperator};
use crate::params::{GNExponents, ModelParams, PotentialSpec, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Options shared by the flow-based solvers.
#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub record_history: bool,
    /// Abort with an error when `max_iter` is reached without convergence.
    pub require_convergence: bool,
    /// Coercivity witness coefficients; when present the lower bound
    /// E ≥ ½A − Σ cᵢ A^{eᵢ} is checked on every iterate.
    pub witness: Option<CoercivityWitness>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tau: 0.1,
            tol: 1e-7,
            max_iter: 20_000,
            record_history: true,
            require_convergence: true,
            witness: None,
        }
    }
}

/// Coefficients of the kinetic lower bound assembled from the sharp
/// interpolation constants: E ≥ ½A − c_p A^{e_p} − c_q A^{e_q} − c_r A^{e_r}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityWitness {
    pub c_p: f64,
    pub c_q: f64,
    pub c_r: f64,
    pub e_p: f64,
    pub e_q: f64,
    pub e_r: f64,
}

impl CoercivityWitness {
    /// Assemble from the three sharp constants (one per nonlinearity
    /// exponent, each with the ground-state mass of that exponent).
    pub fn assemble(
        params: &ModelParams,
        dim: usize,
        gn_const_p: f64,
        gn_const_q: f64,
        gn_const_r: f64,
    ) -> CoercivityWitness {
        let d = GNExponents::new(params, dim);
        let (a, b) = (params.a, params.b);
        CoercivityWitness {
            c_p: gn_const_p * params.mu1 * a.powf(2.0 * params.p * (1.0 - d.delta_p))
                / (2.0 * params.p),
            c_q: gn_const_q * params.mu2 * b.powf(2.0 * params.q * (1.0 - d.delta_q))
                / (2.0 * params.q),
            c_r: gn_const_r
                * params.beta
                * (a.powf(2.0 * params.r * (1.0 - d.delta_r))
                    + b.powf(2.0 * params.r * (1.0 - d.delta_r)))
                / (2.0 * params.r),
            e_p: params.p * d.delta_p,
            e_q: params.q * d.delta_q,
            e_r: params.r * d.delta_r,
        }
    }

    pub fn lower_bound(&self, a: f64) -> f64 {
        0.5 * a - self.c_p * a.powf(self.e_p) - self.c_q * a.powf(self.e_q)
            - self.c_r * a.powf(self.e_r)
    }
}

/// Converged (or truncated) state of a coupled solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u: Field,
    pub v: Field,
    pub energy: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// System Pohozaev residual; absent when a potential is active.
    pub pohozaev_residual: Option<f64>,
    /// Sup-norm of the sphere-projected gradient.
    pub gradient_residual: f64,
    pub masses: (f64, f64),
    pub iterations: usize,
    /// Per-iteration (energy, gradient residual).
    pub history: Vec<(f64, f64)>,
    /// Per-iteration kinetic part A(u, v).
    pub a_history: Vec<f64>,
    pub regime: Regime,
    pub converged: bool,
    pub witness_violations: usize,
    pub notes: Vec<String>,
}

/// Seed profiles for the flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedKind {
    /// Centered Gaussians of slightly different widths.
    Gaussian,
    /// Gaussians offset by ±1 along the first axis.
    Offset,
    /// Sums of random bumps (seeded).
    Random,
}

fn center_offset(grid: &Grid, off: f64) -> Vec<f64> {
    let mut c = vec![0.0; grid.dim()];
    c[0] = off;
    c
}

fn renormalize(f: &Field, target_sq: f64) -> Field {
    let m = mass(f);
    f.scale((target_sq / m).sqrt())
}

/// Build a seed pair with the prescribed masses.
pub fn seed_pair(
    grid: &Grid,
    params: &ModelParams,
    kind: SeedKind,
    rng_seed: u64,
) -> Result<(Field, Field)> {
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    match kind {
        SeedKind::Gaussian => {
            let u = gaussian(grid, &vec![0.0; grid.dim()], 1.2)?;
            let v = gaussian(grid, &vec![0.0; grid.dim()], 0.9)?;
            Ok((renormalize(&u, a2), renormalize(&v, b2)))
        }
        SeedKind::Offset => {
            let u = gaussian(grid, &center_offset(grid, 1.0), 1.2)?;
            let v = gaussian(grid, &center_offset(grid, -1.0), 0.9)?;
            Ok((renormalize(&u, a2), renormalize(&v, b2)))
        }
        SeedKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let mut bumps = |_which: usize| -> Result<Field> {
                let mut f = Field::zeros(grid);
                for _ in 0..3 {
                    let center: Vec<f64> = (0..grid.dim())
                        .map(|_| rng.random_range(-grid.half_length() / 3.0..grid.half_length() / 3.0))
                        .collect();
                    let sigma = rng.random_range(0.6..1.4);
                    let amp = rng.random_range(0.3..1.0);
                    f = f.add(&gaussian(grid, &center, sigma)?.scale(amp))?;
                }
                Ok(f.abs())
            };
            let u = bumps(0)?;
            let v = bumps(1)?;
            Ok((renormalize(&u, a2), renormalize(&v, b2)))
        }
    }
}

struct FlowEngine {
    params: ModelParams,
    resolvent: SpectralOperator,
    /// pointwise 1/(1 + τV) factors (identity when the potential vanishes)
    pot1: Option<Field>,
    pot2: Option<Field>,
    inv1: Option<Vec<f64>>,
    inv2: Option<Vec<f64>>,
    tau: f64,
}

impl FlowEngine {
    fn new(grid: &Grid, params: &ModelParams, tau: f64) -> FlowEngine {
        let pot1 = params.v1.sample(grid);
        let pot2 = params.v2.sample(grid);
        let inv = |p: &Option<Field>| {
            p.as_ref()
                .map(|f| f.values().iter().map(|&v| 1.0 / (1.0 + tau * v)).collect())
        };
        FlowEngine {
            params: params.clone(),
            resolvent: SpectralOperator::resolvent(grid, params.s, 0.0, tau),
            inv1: inv(&pot1),
            inv2: inv(&pot2),
            pot1,
            pot2,
            tau,
        }
    }

    /// One semi-implicit step with exact mass renormalization: the nonlinear
    /// force is explicit, the potential and the fractional Laplacian are each
    /// treated by a backward-Euler factor, and the absolute value keeps the
    /// iterates nonnegative.
    fn step(&self, f: &Field, force: &Field, inv: &Option<Vec<f64>>, target_sq: f64) -> Field {
        let mut rhs = f.add(&force.scale(self.tau)).unwrap();
        if let Some(factors) = inv {
            let vals: Vec<f64> = rhs
                .values()
                .iter()
                .zip(factors)
                .map(|(&v, &w)| v * w)
                .collect();
            rhs = Field::from_values_unchecked(f.grid(), vals);
        }
        let stepped = self.resolvent.apply(&rhs).unwrap().abs();
        renormalize(&stepped, target_sq)
    }
}

struct IterateStats {
    energy: f64,
    residual: f64,
    a_value: f64,
    lambda1: f64,
    lambda2: f64,
    pohozaev: Option<f64>,
}

fn pair_stats(
    u: &Field,
    v: &Field,
    engine: &FlowEngine,
    conv: &PairConvolutions,
) -> Result<IterateStats> {
    let params = &engine.params;
    let (gu, gv) = gradient_with(u, v, params, conv, &engine.pot1, &engine.pot2)?;
    let mu = mass(u);
    let mv = mass(v);
    let l1 = -inner(&gu, u)? / mu;
    let l2 = -inner(&gv, v)? / mv;
    let proj_u = gu.add(&u.scale(l1))?;
    let proj_v = gv.add(&v.scale(l2))?;
    let residual = proj_u.max_abs().max(proj_v.max_abs());
    // kinetic from the gradient pieces: ⟨u, (−Δ)^s u⟩ = gu·u + forces − potential
    let a_value = crate::ops::kinetic(u, params.s)? + crate::ops::kinetic(v, params.s)?;
    let energy = energy_with(u, v, params, conv, &engine.pot1, &engine.pot2);
    let pohozaev = if params.potentials_zero() {
        Some(pohozaev_system_with(u, v, params, conv)?)
    } else {
        None
    };
    Ok(IterateStats {
        energy,
        residual,
        a_value,
        lambda1: l1,
        lambda2: l2,
        pohozaev,
    })
}

fn run_flow(
    params: &ModelParams,
    grid: &Grid,
    seed: &(Field, Field),
    opts: &FlowOptions,
    regime: Regime,
) -> Result<SolveReport> {
    params.validate(grid.dim())?;
    let engine = FlowEngine::new(grid, params, opts.tau);
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    let mut u = renormalize(&seed.0.abs(), a2);
    let mut v = renormalize(&seed.1.abs(), b2);

    let mut history = Vec::new();
    let mut a_history = Vec::new();
    let mut last_energy = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut witness_violations = 0usize;
    let mut final_stats: Option<IterateStats> = None;
    let stall_window = 20usize;
    let mut energy_trace: Vec<f64> = Vec::new();

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let conv = PairConvolutions::compute(&u, &v, params)?;
        let stats = pair_stats(&u, &v, &engine, &conv)?;

        if let Some(w) = &opts.witness {
            if stats.energy < w.lower_bound(stats.a_value) - 1e-9 * (1.0 + stats.energy.abs()) {
                witness_violations += 1;
            }
        }
        if stats.energy > last_energy + 1e-12 * (1.0 + last_energy.abs()) {
            return Err(Error::TooLargeStep {
                iteration: it,
                increase: stats.energy - last_energy,
            });
        }
        last_energy = stats.energy;
        if opts.record_history {
            history.push((stats.energy, stats.residual));
            a_history.push(stats.a_value);
        }
        energy_trace.push(stats.energy);

        let stalled = energy_trace.len() > stall_window && {
            let prev = energy_trace[energy_trace.len() - 1 - stall_window];
            (stats.energy - prev).abs() <= opts.tol * (1.0 + stats.energy.abs())
        };
        if stats.residual <= opts.tol && stalled {
            converged = true;
            final_stats = Some(stats);
            break;
        }

        let fu = nonlinear_force(&u, &v, params, &conv, true);
        let fv = nonlinear_force(&u, &v, params, &conv, false);
        let new_u = engine.step(&u, &fu, &engine.inv1, a2);
        let new_v = engine.step(&v, &fv, &engine.inv2, b2);
        u = new_u;
        v = new_v;
    }

    let stats = match final_stats {
        Some(s) if converged => s,
        _ => {
            let conv = PairConvolutions::compute(&u, &v, params)?;
            pair_stats(&u, &v, &engine, &conv)?
        }
    };
    if !converged && opts.require_convergence {
        return Err(Error::NonConvergence {
            iterations,
            residual: stats.residual,
        });
    }

    let mut notes = Vec::new();
    if regime == Regime::Subcritical && params.potentials_zero() {
        let n = grid.dim() as f64;
        if !(3.0 <= n && n <= 4.0 * params.s) {
            notes.push("outside theorem regime: requires 3 <= dim <= 4s".to_string());
        }
    }

    Ok(SolveReport {
        energy: stats.energy,
        lambda1: stats.lambda1,
        lambda2: stats.lambda2,
        pohozaev_residual: stats.pohozaev,
        gradient_residual: stats.residual,
        masses: (mass(&u), mass(&v)),
        u,
        v,
        iterations,
        history,
        a_history,
        regime,
        converged,
        witness_violations,
        notes,
    })
}

/// Constrained minimization of the energy over the product of mass spheres by
/// normalized gradient flow, for subcritical exponents.
pub fn minimize_subcritical(
    params: &ModelParams,
    grid: &Grid,
    seed: &(Field, Field),
    opts: &FlowOptions,
) -> Result<SolveReport> {
    let crit = params.critical_exponent(grid.dim());
    for (key, e) in [("p", params.p), ("q", params.q), ("r", params.r)] {
        if !(e < crit) {
            return Err(Error::param(
                key,
                format!("subcritical flow requires exponents below {crit}, got {e}"),
            ));
        }
    }
    run_flow(params, grid, seed, opts, Regime::Subcritical)
}

/// The same normalized flow at the mass-critical exponent. Convergence is not
/// required: the report carries the kinetic history so boundedness of A(u,v)
/// along the flow can be examined.
pub fn critical_flow(
    params: &ModelParams,
    grid: &Grid,
    seed: &(Field, Field),
    opts: &FlowOptions,
) -> Result<SolveReport> {
    let mut opts = opts.clone();
    opts.require_convergence = false;
    run_flow(params, grid, seed, &opts, Regime::Critical)
}

/// Report of a single-component normalized flow (the decoupled problem).
#[derive(Debug, Clone)]
pub struct ScalarReport {
    pub field: Field,
    pub energy: f64,
    pub lambda: f64,
    pub gradient_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize the scalar functional M(u) = ½‖(−Δ)^{s/2}u‖² + ½∫Vu² − μ/(2p)B(u,u,p)
/// over the sphere of squared mass c² by the same semi-implicit flow.
pub fn minimize_scalar(
    grid: &Grid,
    s: f64,
    alpha: f64,
    p: f64,
    mu: f64,
    c: f64,
    potential: &PotentialSpec,
    opts: &FlowOptions,
) -> Result<ScalarReport> {
    // a decoupled system: the second component is frozen at zero via beta = 0
    let params = ModelParams {
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
        v1: potential.clone(),
        v2: potential.clone(),
    };
    params.validate(grid.dim())?;
    let engine = FlowEngine::new(grid, &params, opts.tau);
    let c2 = c * c;
    let mut u = renormalize(&gaussian(grid, &vec![0.0; grid.dim()], 1.0)?, c2);

    let mut last_energy = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let stall_window = 20usize;
    let mut trace: Vec<f64> = Vec::new();
    let mut final_res = f64::INFINITY;
    let mut final_lambda = 0.0;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let conv_up = crate::ops::hartree_convolve(&u.map(|x| x.abs().powf(p)), alpha)?;
        let b_uu = crate::functionals::b_term_with(&conv_up, &u, p);
        let lap = fractional_laplacian(&u, s)?;
        let kin = inner(&lap, &u)?;
        let pot_term = match &engine.pot1 {
            None => 0.0,
            Some(w) => inner(&u.mul(w)?, &u)?,
        };
        let energy = 0.5 * kin + 0.5 * pot_term - mu / (2.0 * p) * b_uu;

        let force = conv_up.mul(&u.signed_pow(p - 1.0))?.scale(mu);
        let mut grad = lap.sub(&force)?;
        if let Some(w) = &engine.pot1 {
            grad = grad.add(&u.mul(w)?)?;
        }
        let lambda = -inner(&grad, &u)? / mass(&u);
        let proj = grad.add(&u.scale(lambda))?;
        let residual = proj.max_abs();
        final_res = residual;
        final_lambda = lambda;

        if energy > last_energy + 1e-12 * (1.0 + last_energy.abs()) {
            return Err(Error::TooLargeStep {
                iteration: it,
                increase: energy - last_energy,
            });
        }
        last_energy = energy;
        trace.push(energy);
        let stalled = trace.len() > stall_window && {
            let prev = trace[trace.len() - 1 - stall_window];
            (energy - prev).abs() <= opts.tol * (1.0 + energy.abs())
        };
        if residual <= opts.tol && stalled {
            converged = true;
            break;
        }
        u = engine.step(&u, &force, &engine.inv1, c2);
    }

    if !converged && opts.require_convergence {
        return Err(Error::NonConvergence {
            iterations,
            residual: final_res,
        });
    }
    Ok(ScalarReport {
        energy: last_energy,
        lambda: final_lambda,
        gradient_residual: final_res,
        iterations,
        converged,
        field: u,
    })
}

// ------------------------------------------------------------------
// Mass-critical threshold analysis
// ------------------------------------------------------------------

/// Result of the Rayleigh-quotient minimization over restarts.
#[derive(Debug, Clone, Serialize)]
pub struct OEstimate {
    pub value: f64,
    pub restart_values: Vec<f64>,
}

/// Estimate the dilation-invariant quotient infimum by projected descent
/// over several seed pairs. `q_profile` (the scalar ground state) seeds the
/// symmetric and concentrated restarts when available.
pub fn estimate_o(
    params: &ModelParams,
    grid: &Grid,
    n_restarts: usize,
    rng_seed: u64,
    q_profile: Option<&Field>,
    max_iter: usize,
) -> Result<OEstimate> {
    let crit = params.critical_exponent(grid.dim());
    for (key, e) in [("p", params.p), ("q", params.q), ("r", params.r)] {
        if (e - crit).abs() > 1e-9 * crit {
            return Err(Error::param(
                key,
                format!("quotient estimate requires the critical exponent {crit}, got {e}"),
            ));
        }
    }
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<(Field, Field)> = Vec::new();

    let base_profile = match q_profile {
        Some(q) => q.clone(),
        None => gaussian(grid, &vec![0.0; grid.dim()], 1.0)?,
    };
    // symmetric pair: both components on the shared profile
    seeds.push((
        renormalize(&base_profile, a2),
        renormalize(&base_profile, b2),
    ));
    // Gaussian pair of distinct widths
    seeds.push((
        renormalize(&gaussian(grid, &vec![0.0; grid.dim()], 1.0)?, a2),
        renormalize(&gaussian(grid, &vec![0.0; grid.dim()], 1.4)?, b2),
    ));
    // asymmetric splits: one concentrated component, one wide bump
    let wide = gaussian(grid, &vec![0.0; grid.dim()], grid.half_length() / 3.0)?;
    for l in [0.5f64, 1.0] {
        let l_adm = l.min(params.s * (grid.n() as f64 / 8.0).ln());
        let conc = dilate(&renormalize(&base_profile, a2), l_adm, params.s)?;
        seeds.push((renormalize(&conc, a2), renormalize(&wide, b2)));
        let conc_v = dilate(&renormalize(&base_profile, b2), l_adm, params.s)?;
        seeds.push((renormalize(&wide, a2), renormalize(&conc_v, b2)));
    }
    let want = n_restarts.max(1);
    while seeds.len() < want {
        let s = rng.random::<u64>();
        seeds.push(seed_pair(grid, params, SeedKind::Random, s)?);
    }
    seeds.truncate(want);

    let mut best = f64::INFINITY;
    let mut restart_values = Vec::new();
    for seed in &seeds {
        let val = descend_quotient(params, grid, seed, max_iter)?;
        restart_values.push(val);
        best = best.min(val);
    }
    if !best.is_finite() {
        return Err(Error::Divergence("all quotient restarts failed".into()));
    }
    Ok(OEstimate {
        value: best,
        restart_values,
    })
}

fn descend_quotient(
    params: &ModelParams,
    grid: &Grid,
    seed: &(Field, Field),
    max_iter: usize,
) -> Result<f64> {
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    let mut u = renormalize(&seed.0.abs(), a2);
    let mut v = renormalize(&seed.1.abs(), b2);
    let p = params.p;
    let mut tau = 0.2;
    let conv0 = PairConvolutions::compute(&u, &v, params)?;
    let mut current = rayleigh_quotient_with(&u, &v, params, &conv0)?;
    let mut best = current;

    for it in 0..max_iter {
        // renormalize the kinetic part to 1 by a mass-preserving dilation
        if it % 20 == 0 {
            let a_val = crate::ops::kinetic(&u, params.s)? + crate::ops::kinetic(&v, params.s)?;
            // A(l⋆(u,v)) = e^{2l} A, so l = −ln(A)/2 normalizes it to 1
            let l = -a_val.ln() / 2.0;
            let l_cap = params.s * (grid.n() as f64 / 8.0).ln();
            let l = l.clamp(-l_cap, l_cap);
            if l != 0.0 {
                if let (Ok(du), Ok(dv)) = (dilate(&u, l, params.s), dilate(&v, l, params.s)) {
                    u = renormalize(&du, a2);
                    v = renormalize(&dv, b2);
                }
            }
        }
        let conv = PairConvolutions::compute(&u, &v, params)?;
        current = rayleigh_quotient_with(&u, &v, params, &conv)?;
        best = best.min(current);

        let denom = params.mu1 / p * conv.b_uu(&u, p) + params.mu2 / p * conv.b_vv(&v, p)
            + 2.0 * params.beta / p * conv.b_uv(&v, p);
        let lap_u = fractional_laplacian(&u, params.s)?;
        let lap_v = fractional_laplacian(&v, params.s)?;
        // ∇(A/D) = (2/D)·[(−Δ)^s u − (A/D)·(μ₁ conv_u + β conv_v)|u|^{p−2}u]
        let nl_u = conv
            .conv_up
            .scale(params.mu1)
            .add(&conv.conv_vr.scale(params.beta))?
            .mul(&u.signed_pow(p - 1.0))?;
        let nl_v = conv
            .conv_vq
            .scale(params.mu2)
            .add(&conv.conv_ur.scale(params.beta))?
            .mul(&v.signed_pow(p - 1.0))?;
        let gu = lap_u.sub(&nl_u.scale(current))?.scale(2.0 / denom);
        let gv = lap_v.sub(&nl_v.scale(current))?.scale(2.0 / denom);
        let tu = gu.sub(&u.scale(inner(&gu, &u)? / mass(&u)))?;
        let tv = gv.sub(&v.scale(inner(&gv, &v)? / mass(&v)))?;
        let gnorm = tu.max_abs().max(tv.max_abs());
        if gnorm < 1e-10 {
            break;
        }

        let mut accepted = false;
        for _ in 0..20 {
            let cu = renormalize(&u.sub(&tu.scale(tau))?.abs(), a2);
            let cv = renormalize(&v.sub(&tv.scale(tau))?.abs(), b2);
            let cand_conv = PairConvolutions::compute(&cu, &cv, params)?;
            let cand = rayleigh_quotient_with(&cu, &cv, params, &cand_conv)?;
            if cand < current {
                u = cu;
                v = cv;
                best = best.min(cand);
                tau = (tau * 1.3).min(1.0);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(best)
}

/// Threshold classification of the mass-critical case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    ExistencePredicted,
    NonexistencePredicted,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub classification: Classification,
    pub checks: Vec<ThresholdCheck>,
    pub o_estimate: Option<f64>,
    /// Set when β lies between the two published forms of the nonexistence
    /// threshold (they differ by the sign of the μ₂b^{2p} term); the decision
    /// table follows the stated form.
    pub threshold_form_gap: bool,
}

/// Decision table for the mass-critical regime. Existence requires both mass
/// conditions and β below the geometric-mean bound; nonexistence follows from
/// either mass condition failing in reverse or β above the ratio bound.
pub fn critical_threshold_check(params: &ModelParams, a_star: f64) -> Verdict {
    let e = 2.0 * (params.p - 1.0);
    let m1 = params.mu1 * params.a.powf(e);
    let m2 = params.mu2 * params.b.powf(e);
    let geo = if m1 < a_star && m2 < a_star {
        ((a_star - m1) * (a_star - m2)).sqrt()
    } else {
        f64::NAN
    };
    let a2b2 = params.a * params.a + params.b * params.b;
    let apbp = params.a.powf(params.p) * params.b.powf(params.p);
    let mu1a2p = params.mu1 * params.a.powf(2.0 * params.p);
    let mu2b2p = params.mu2 * params.b.powf(2.0 * params.p);
    let ratio_stated = (a2b2 * a_star - mu1a2p - mu2b2p) / (2.0 * apbp);
    let ratio_alt = (a2b2 * a_star - mu1a2p + mu2b2p) / (2.0 * apbp);

    let exist = m1 < a_star && m2 < a_star && !geo.is_nan() && params.beta < geo;
    let nonexist = m1 > a_star || m2 > a_star || params.beta > ratio_stated;

    let classification = if exist {
        Classification::ExistencePredicted
    } else if nonexist {
        Classification::NonexistencePredicted
    } else {
        Classification::Indeterminate
    };

    let lo = ratio_stated.min(ratio_alt);
    let hi = ratio_stated.max(ratio_alt);
    let threshold_form_gap = params.beta > lo && params.beta < hi;

    let checks = vec![
        ThresholdCheck {
            name: "mu1-mass-below-critical".into(),
            lhs: m1,
            rhs: a_star,
            satisfied: m1 < a_star,
        },
        ThresholdCheck {
            name: "mu2-mass-below-critical".into(),
            lhs: m2,
            rhs: a_star,
            satisfied: m2 < a_star,
        },
        ThresholdCheck {
            name: "beta-below-geometric-mean".into(),
            lhs: params.beta,
            rhs: geo,
            satisfied: !geo.is_nan() && params.beta < geo,
        },
        ThresholdCheck {
            name: "beta-above-nonexistence-ratio".into(),
            lhs: params.beta,
            rhs: ratio_stated,
            satisfied: params.beta > ratio_stated,
        },
    ];

    Verdict {
        classification,
        checks,
        o_estimate: None,
        threshold_form_gap,
    }
}

/// Energy series along the mass-preserving concentration path
/// (u_t, v_t) = (t^{N/2}u(tx), t^{N/2}v(tx)).
#[derive(Debug, Clone, Serialize)]
pub struct ProbeEvidence {
    pub series: Vec<(f64, f64)>,
    pub min_energy: f64,
    pub fitted_exponent: Option<f64>,
    pub floor: f64,
    /// True when the energy fell below the floor.
    pub unbounded_evidence: bool,
}

/// Evaluate E(u_t, v_t) for each t in `t_list` (t = 1 leaves the pair
/// unchanged) and fit the growth exponent of −E on the decreasing branch.
pub fn unboundedness_probe(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    t_list: &[f64],
    floor: f64,
) -> Result<ProbeEvidence> {
    let mut series = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t > 0.0) {
            return Err(Error::param("t", "probe parameters must be positive"));
        }
        let l = params.s * t.ln();
        let ut = dilate(u, l, params.s)?;
        let vt = dilate(v, l, params.s)?;
        let e = crate::functionals::energy(&ut, &vt, params)?;
        series.push((t, e));
    }
    let min_energy = series.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    // fit log(−E) vs log t over strictly negative energies with t > 1
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, e)| t > 1.0 && e < 0.0)
        .map(|&(t, e)| (t.ln(), (-e).ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 3 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(ProbeEvidence {
        min_energy,
        fitted_exponent,
        floor,
        unbounded_evidence: min_energy < floor,
        series,
    })
}

// ------------------------------------------------------------------
// Supercritical saddle level
// ------------------------------------------------------------------

struct ManifoldPoint {
    u: Field,
    v: Field,
    conv: PairConvolutions,
    energy: f64,
    base: ScalingBase,
}

fn scaling_base(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
) -> Result<ScalingBase> {
    Ok(ScalingBase {
        a: crate::ops::kinetic(u, params.s)? + crate::ops::kinetic(v, params.s)?,
        b_uu: conv.b_uu(u, params.p),
        b_vv: conv.b_vv(v, params.q),
        b_uv: conv.b_uv(v, params.r),
        deltas: GNExponents::new(params, u.grid().dim()),
    })
}

/// Root of the fiber derivative l ↦ ∂_l E(l⋆(u,v)). In the supercritical
/// window the root is unique (e^{−2l}·∂_l E is strictly decreasing) and is
/// the fiber maximum.
fn dilation_root(base: &ScalingBase, params: &ModelParams) -> Result<f64> {
    let g = |l: f64| base.derivative(params, l);
    let mut lo = 0.0;
    let mut hi = 0.0;
    if g(0.0) > 0.0 {
        hi = 1.0;
        let mut k = 0;
        while g(hi) > 0.0 {
            hi += 1.0;
            k += 1;
            if k > 60 {
                return Err(Error::SeedRejected);
            }
        }
    } else {
        lo = -1.0;
        let mut k = 0;
        while g(lo) <= 0.0 {
            lo -= 1.0;
            k += 1;
            if k > 60 {
                return Err(Error::SeedRejected);
            }
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn project_to_manifold(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    max_rounds: usize,
) -> Result<ManifoldPoint> {
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    let mut u = u.clone();
    let mut v = v.clone();
    let l_cap = params.s * (u.grid().n() as f64 / 8.0).ln();
    for round in 0..max_rounds {
        let conv = PairConvolutions::compute(&u, &v, params)?;
        let base = scaling_base(&u, &v, params, &conv)?;
        let l = dilation_root(&base, params)?;
        if l.abs() < 1e-12 {
            let energy = base.energy(params, 0.0);
            return Ok(ManifoldPoint {
                u,
                v,
                conv,
                energy,
                base,
            });
        }
        let step = l.clamp(-l_cap, l_cap);
        u = renormalize(&dilate(&u, step, params.s)?, a2);
        v = renormalize(&dilate(&v, step, params.s)?, b2);
        if round + 1 == max_rounds {
            let conv = PairConvolutions::compute(&u, &v, params)?;
            let base = scaling_base(&u, &v, params, &conv)?;
            let energy = base.energy(params, 0.0);
            return Ok(ManifoldPoint {
                u,
                v,
                conv,
                energy,
                base,
            });
        }
    }
    unreachable!()
}

/// Saddle-level solver for the supercritical window: alternate a
/// one-dimensional dilation placing the pair on the natural constraint
/// (the fiber maximum) with projected gradient descent in profile space.
pub fn mountain_pass_supercritical(
    params: &ModelParams,
    grid: &Grid,
    seed: &(Field, Field),
    opts: &FlowOptions,
) -> Result<SolveReport> {
    params.validate(grid.dim())?;
    if !params.potentials_zero() {
        return Err(Error::param(
            "potential",
            "the saddle solver works with vanishing potentials",
        ));
    }
    let crit = params.critical_exponent(grid.dim());
    let floor = crit.max(2.0);
    for (key, e) in [("p", params.p), ("q", params.q), ("r", params.r)] {
        if !(e > floor) {
            return Err(Error::param(
                key,
                format!("saddle solver requires exponents above max(2, {crit}), got {e}"),
            ));
        }
    }
    let (a2, b2) = (params.a * params.a, params.b * params.b);
    let engine = FlowEngine::new(grid, params, opts.tau);

    let mut point = project_to_manifold(&seed.0.abs(), &seed.1.abs(), params, 12)?;
    let mut tau = opts.tau;
    let mut history = Vec::new();
    let mut a_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let stall_window = 10usize;
    let mut trace: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let stats = pair_stats(&point.u, &point.v, &engine, &point.conv)?;
        residual = stats.residual;
        if opts.record_history {
            history.push((point.energy, stats.residual));
            a_history.push(point.base.a);
        }
        trace.push(point.energy);
        let stalled = trace.len() > stall_window && {
            let prev = trace[trace.len() - 1 - stall_window];
            (point.energy - prev).abs() <= opts.tol * (1.0 + point.energy.abs())
        };
        if stats.residual <= opts.tol && stalled {
            converged = true;
            break;
        }

        let (gu, gv) = gradient_with(
            &point.u,
            &point.v,
            params,
            &point.conv,
            &engine.pot1,
            &engine.pot2,
        )?;
        let tu = gu.sub(&point.u.scale(inner(&gu, &point.u)? / mass(&point.u)))?;
        let tv = gv.sub(&point.v.scale(inner(&gv, &point.v)? / mass(&point.v)))?;

        let mut accepted = false;
        for _ in 0..25 {
            let cu = renormalize(&point.u.sub(&tu.scale(tau))?.abs(), a2);
            let cv = renormalize(&point.v.sub(&tv.scale(tau))?.abs(), b2);
            match project_to_manifold(&cu, &cv, params, 8) {
                Ok(cand) => {
                    if cand.energy < point.energy - 1e-15 * (1.0 + point.energy.abs()) {
                        point = cand;
                        tau = (tau * 1.2).min(1.0);
                        accepted = true;
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
        if !accepted {
            if residual <= opts.tol.max(1e-6) * 100.0 {
                converged = true;
                break;
            }
            if opts.require_convergence {
                return Err(Error::Stagnation { residual });
            }
            break;
        }
    }

    if !converged && opts.require_convergence {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }

    // final projection tightens the constraint residual
    point = project_to_manifold(&point.u, &point.v, params, 4)?;
    let stats = pair_stats(&point.u, &point.v, &engine, &point.conv)?;

    Ok(SolveReport {
        energy: point.energy,
        lambda1: stats.lambda1,
        lambda2: stats.lambda2,
        pohozaev_residual: stats.pohozaev,
        gradient_residual: stats.residual,
        masses: (mass(&point.u), mass(&point.v)),
        u: point.u,
        v: point.v,
        iterations,
        history,
        a_history,
        regime: Regime::Supercritical,
        converged,
        witness_violations: 0,
        notes: Vec::new(),
    })
}

// ------------------------------------------------------------------
// Multiplier sign audit
// ------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignExpectation {
    /// Both multipliers strictly positive (open-space minimization regime).
    BothPositive,
    /// λ₁a² + λ₂b² strictly positive (saddle regime).
    WeightedSumPositive,
    /// No sign prediction for this regime.
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignAudit {
    pub lambda1: f64,
    pub lambda2: f64,
    pub weighted_sum: f64,
    pub expectation: SignExpectation,
    pub pass: bool,
}

/// Compare the multiplier signs of a converged report against the prediction
/// for its regime.
pub fn sign_audit(report: &SolveReport, params: &ModelParams) -> SignAudit {
    let weighted_sum =
        report.lambda1 * params.a * params.a + report.lambda2 * params.b * params.b;
    let expectation = match (report.regime, params.potentials_zero()) {
        (Regime::Subcritical, true) => SignExpectation::BothPositive,
        (Regime::Supercritical, true) => SignExpectation::WeightedSumPositive,
        _ => SignExpectation::None,
    };
    let pass = match expectation {
        SignExpectation::BothPositive => report.lambda1 > 0.0 && report.lambda2 > 0.0,
        SignExpectation::WeightedSumPositive => weighted_sum > 0.0,
        SignExpectation::None => true,
    };
    SignAudit {
        lambda1: report.lambda1,
        lambda2: report.lambda2,
        weighted_sum,
        expectation,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn critical_params_2d() -> ModelParams {
        ModelParams {
            s: 0.75,
            alpha: 1.0,
            p: 2.25,
            q: 2.25,
            r: 2.25,
            mu1: 0.5,
            mu2: 0.5,
            beta: 0.25,
            a: 1.0,
            b: 1.0,
            v1: PotentialSpec::zero(),
            v2: PotentialSpec::zero(),
        }
    }

    #[test]
    fn threshold_decision_table() {
        let mut params = critical_params_2d();
        params.p = 2.0;
        params.q = 2.0;
        params.r = 2.0;
        // a* = 1, mu = 0.5 each, beta = 0.4 < sqrt(0.25) = 0.5
        params.beta = 0.4;
        let v = critical_threshold_check(&params, 1.0);
        assert_eq!(v.classification, Classification::ExistencePredicted);
        // mu1 above the critical mass
        params.mu1 = 2.0;
        let v = critical_threshold_check(&params, 1.0);
        assert_eq!(v.classification, Classification::NonexistencePredicted);
        // boundary value is indeterminate
        params.mu1 = 0.5;
        params.beta = 0.5;
        let v = critical_threshold_check(&params, 1.0);
        assert_eq!(v.classification, Classification::Indeterminate);
    }

    #[test]
    fn sign_audit_synthetic() {
        let g = make_grid(1, 8, 4.0).unwrap();
        let params = critical_params_2d();
        let f = Field::constant(&g, 1.0).unwrap();
        let mut report = SolveReport {
            u: f.clone(),
            v: f,
            energy: -1.0,
            lambda1: 0.7,
            lambda2: 0.3,
            pohozaev_residual: None,
            gradient_residual: 0.0,
            masses: (1.0, 1.0),
            iterations: 1,
            history: vec![],
            a_history: vec![],
            regime: Regime::Subcritical,
            converged: true,
            witness_violations: 0,
            notes: vec![],
        };
        assert!(sign_audit(&report, &params).pass);
        report.lambda2 = -0.3;
        assert!(!sign_audit(&report, &params).pass);
        report.regime = Regime::Supercritical;
        assert!(sign_audit(&report, &params).pass); // 0.7 - 0.3 > 0
    }
}
