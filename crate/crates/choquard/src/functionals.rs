//! Scalar quantities of the variational problem: energies, the nonlocal
//! B-terms, sharp constants, Pohozaev residuals, Rayleigh quotients, scaling
//! derivatives and Lagrange-multiplier estimates.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::ops::{fractional_laplacian, hartree_convolve, inner, kinetic, mass};
use crate::params::{gn_exponent, GNExponents, ModelParams};

/// Sharp constant of the Hardy–Littlewood–Sobolev inequality at the
/// symmetric exponent pair t = r = 2N/(N+α):
/// π^{(N−α)/2} Γ(α/2)/Γ((N+α)/2) · (Γ(N/2)/Γ(N))^{−α/N}.
pub fn hls_sharp_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    let pi = std::f64::consts::PI;
    pi.powf((n - alpha) / 2.0) * libm::tgamma(alpha / 2.0) / libm::tgamma((n + alpha) / 2.0)
        * (libm::tgamma(n / 2.0) / libm::tgamma(n)).powf(-alpha / n)
}

/// Best constant of the nonlocal Gagliardo–Nirenberg inequality
/// B(u,u,p) ≤ C ‖(−Δ)^{s/2}u‖₂^{2pδ_p} ‖u‖₂^{2p(1−δ_p)}, expressed through
/// the squared L² norm `q_mass` of the canonical ground state.
pub fn gn_sharp_constant(dim: usize, p: f64, s: f64, alpha: f64, q_mass: f64) -> Result<f64> {
    let n = dim as f64;
    let denom = 2.0 * s * p - n * p + n + alpha;
    if denom <= 0.0 {
        return Err(Error::param(
            "p",
            "exponent at or above the upper admissible endpoint",
        ));
    }
    if !(q_mass > 0.0) {
        return Err(Error::param("q_mass", "must be positive"));
    }
    let dp = gn_exponent(dim, p, s, alpha);
    Ok(2.0 * s * p / denom * (denom / (n * (p - 1.0) - alpha)).powf(p * dp)
        * q_mass.powf(1.0 - p))
}

/// B(u, v, r) = h^d Σ (I_α ⋆ |u|^r) |v|^r.
pub fn b_term(u: &Field, v: &Field, r: f64, alpha: f64) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let conv = hartree_convolve(&u.map(|x| x.abs().powf(r)), alpha)?;
    Ok(b_term_with(&conv, v, r))
}

/// B-term given a precomputed convolution I_α ⋆ |u|^r.
pub(crate) fn b_term_with(conv_ur: &Field, v: &Field, r: f64) -> f64 {
    let h = v.grid().cell_volume();
    h * conv_ur
        .values()
        .iter()
        .zip(v.values())
        .map(|(&c, &w)| c * w.abs().powf(r))
        .sum::<f64>()
}

/// Precomputed Hartree convolutions of a pair, deduplicated when exponents
/// coincide.
pub(crate) struct PairConvolutions {
    pub conv_up: Field,
    pub conv_vq: Field,
    pub conv_ur: Field,
    pub conv_vr: Field,
}

impl PairConvolutions {
    pub fn compute(u: &Field, v: &Field, params: &ModelParams) -> Result<PairConvolutions> {
        let conv_up = hartree_convolve(&u.map(|x| x.abs().powf(params.p)), params.alpha)?;
        let conv_vq = hartree_convolve(&v.map(|x| x.abs().powf(params.q)), params.alpha)?;
        let conv_ur = if params.r == params.p {
            conv_up.clone()
        } else {
            hartree_convolve(&u.map(|x| x.abs().powf(params.r)), params.alpha)?
        };
        let conv_vr = if params.r == params.q {
            conv_vq.clone()
        } else {
            hartree_convolve(&v.map(|x| x.abs().powf(params.r)), params.alpha)?
        };
        Ok(PairConvolutions {
            conv_up,
            conv_vq,
            conv_ur,
            conv_vr,
        })
    }

    pub fn b_uu(&self, u: &Field, p: f64) -> f64 {
        b_term_with(&self.conv_up, u, p)
    }

    pub fn b_vv(&self, v: &Field, q: f64) -> f64 {
        b_term_with(&self.conv_vq, v, q)
    }

    pub fn b_uv(&self, v: &Field, r: f64) -> f64 {
        b_term_with(&self.conv_ur, v, r)
    }
}

/// Kinetic part A(u,v) = ‖(−Δ)^{s/2}u‖₂² + ‖(−Δ)^{s/2}v‖₂².
pub fn kinetic_pair(u: &Field, v: &Field, s: f64) -> Result<f64> {
    Ok(kinetic(u, s)? + kinetic(v, s)?)
}

fn potential_quadratic(field: &Field, pot: &Option<Field>) -> f64 {
    match pot {
        None => 0.0,
        Some(v) => {
            let h = field.grid().cell_volume();
            h * field
                .values()
                .iter()
                .zip(v.values())
                .map(|(&f, &p)| p * f * f)
                .sum::<f64>()
        }
    }
}

/// Full constrained energy
/// E = ½A + ½∫(V₁u² + V₂v²) − μ₁/(2p)·B(u,u,p) − μ₂/(2q)·B(v,v,q) − β/r·B(u,v,r).
pub fn energy(u: &Field, v: &Field, params: &ModelParams) -> Result<f64> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let conv = PairConvolutions::compute(u, v, params)?;
    let pot1 = params.v1.sample(u.grid());
    let pot2 = params.v2.sample(u.grid());
    Ok(energy_with(u, v, params, &conv, &pot1, &pot2))
}

pub(crate) fn energy_with(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
    pot1: &Option<Field>,
    pot2: &Option<Field>,
) -> f64 {
    let a = kinetic(u, params.s).expect("validated s") + kinetic(v, params.s).expect("validated s");
    let pot = potential_quadratic(u, pot1) + potential_quadratic(v, pot2);
    0.5 * a + 0.5 * pot
        - params.mu1 / (2.0 * params.p) * conv.b_uu(u, params.p)
        - params.mu2 / (2.0 * params.q) * conv.b_vv(v, params.q)
        - params.beta / params.r * conv.b_uv(v, params.r)
}

/// Unconstrained L² gradient of the energy:
/// grad_u = (−Δ)^s u + V₁u − μ₁(I_α⋆|u|^p)|u|^{p−2}u − β(I_α⋆|v|^r)|u|^{r−2}u
/// and symmetrically in v.
pub fn energy_gradient(u: &Field, v: &Field, params: &ModelParams) -> Result<(Field, Field)> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let conv = PairConvolutions::compute(u, v, params)?;
    let pot1 = params.v1.sample(u.grid());
    let pot2 = params.v2.sample(u.grid());
    gradient_with(u, v, params, &conv, &pot1, &pot2)
}

pub(crate) fn gradient_with(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
    pot1: &Option<Field>,
    pot2: &Option<Field>,
) -> Result<(Field, Field)> {
    let lap_u = fractional_laplacian(u, params.s)?;
    let lap_v = fractional_laplacian(v, params.s)?;
    let fu = nonlinear_force(u, v, params, conv, true);
    let fv = nonlinear_force(u, v, params, conv, false);
    let mut gu = lap_u.sub(&fu)?;
    let mut gv = lap_v.sub(&fv)?;
    if let Some(p1) = pot1 {
        gu = gu.add(&u.mul(p1)?)?;
    }
    if let Some(p2) = pot2 {
        gv = gv.add(&v.mul(p2)?)?;
    }
    Ok((gu, gv))
}

/// The attractive nonlinear part of the gradient of one component.
pub(crate) fn nonlinear_force(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
    first: bool,
) -> Field {
    if first {
        let own = conv.conv_up.mul(&u.signed_pow(params.p - 1.0)).unwrap();
        let cross = conv.conv_vr.mul(&u.signed_pow(params.r - 1.0)).unwrap();
        own.scale(params.mu1).add(&cross.scale(params.beta)).unwrap()
    } else {
        let own = conv.conv_vq.mul(&v.signed_pow(params.q - 1.0)).unwrap();
        let cross = conv.conv_ur.mul(&v.signed_pow(params.r - 1.0)).unwrap();
        own.scale(params.mu2).add(&cross.scale(params.beta)).unwrap()
    }
}

/// Scalar Pohozaev residual Q_μ(u) = ‖(−Δ)^{s/2}u‖₂² − μ δ_p B(u,u,p);
/// vanishes on solutions of the single equation.
pub fn pohozaev_scalar_residual(u: &Field, mu: f64, p: f64, s: f64, alpha: f64) -> Result<f64> {
    let dim = u.grid().dim();
    let k = kinetic(u, s)?;
    let b = b_term(u, u, p, alpha)?;
    Ok(k - mu * gn_exponent(dim, p, s, alpha) * b)
}

/// System Pohozaev residual
/// A(u,v) − μ₁δ_p B(u,u,p) − μ₂δ_q B(v,v,q) − 2βδ_r B(u,v,r); defined for
/// vanishing potentials only.
pub fn pohozaev_system_residual(u: &Field, v: &Field, params: &ModelParams) -> Result<f64> {
    if !params.potentials_zero() {
        return Err(Error::param(
            "potential",
            "system Pohozaev residual requires vanishing potentials",
        ));
    }
    let conv = PairConvolutions::compute(u, v, params)?;
    Ok(pohozaev_system_with(u, v, params, &conv)?)
}

pub(crate) fn pohozaev_system_with(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
) -> Result<f64> {
    let dim = u.grid().dim();
    let d = GNExponents::new(params, dim);
    let a = kinetic_pair(u, v, params.s)?;
    Ok(a - params.mu1 * d.delta_p * conv.b_uu(u, params.p)
        - params.mu2 * d.delta_q * conv.b_vv(v, params.q)
        - 2.0 * params.beta * d.delta_r * conv.b_uv(v, params.r))
}

/// ∂_l E(l⋆(u,v)) evaluated from base-point values of A and the B-terms:
/// e^{2l}A − μ₁δ_p e^{2pδ_p l}B_p − μ₂δ_q e^{2qδ_q l}B_q − 2βδ_r e^{2rδ_r l}B_r.
pub fn scaling_energy_derivative(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    l: f64,
) -> Result<f64> {
    if !params.potentials_zero() {
        return Err(Error::param(
            "potential",
            "scaling derivative requires vanishing potentials",
        ));
    }
    let conv = PairConvolutions::compute(u, v, params)?;
    let dim = u.grid().dim();
    let base = ScalingBase {
        a: kinetic_pair(u, v, params.s)?,
        b_uu: conv.b_uu(u, params.p),
        b_vv: conv.b_vv(v, params.q),
        b_uv: conv.b_uv(v, params.r),
        deltas: GNExponents::new(params, dim),
    };
    Ok(base.derivative(params, l))
}

/// Base-point quantities entering the fiber map l ↦ E(l⋆(u,v)).
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalingBase {
    pub a: f64,
    pub b_uu: f64,
    pub b_vv: f64,
    pub b_uv: f64,
    pub deltas: GNExponents,
}

impl ScalingBase {
    pub fn energy(&self, params: &ModelParams, l: f64) -> f64 {
        let d = &self.deltas;
        0.5 * (2.0 * l).exp() * self.a
            - params.mu1 / (2.0 * params.p) * (2.0 * params.p * d.delta_p * l).exp() * self.b_uu
            - params.mu2 / (2.0 * params.q) * (2.0 * params.q * d.delta_q * l).exp() * self.b_vv
            - params.beta / params.r * (2.0 * params.r * d.delta_r * l).exp() * self.b_uv
    }

    pub fn derivative(&self, params: &ModelParams, l: f64) -> f64 {
        let d = &self.deltas;
        (2.0 * l).exp() * self.a
            - params.mu1 * d.delta_p * (2.0 * params.p * d.delta_p * l).exp() * self.b_uu
            - params.mu2 * d.delta_q * (2.0 * params.q * d.delta_q * l).exp() * self.b_vv
            - 2.0 * params.beta * d.delta_r * (2.0 * params.r * d.delta_r * l).exp() * self.b_uv
    }
}

/// The dilation-invariant quotient
/// A(u,v) / [μ₁/p·B(u,u,p) + μ₂/p·B(v,v,p) + 2β/p·B(u,v,p)], defined in the
/// mass-critical regime p = q = r.
pub fn rayleigh_quotient(u: &Field, v: &Field, params: &ModelParams) -> Result<f64> {
    let conv = PairConvolutions::compute(u, v, params)?;
    rayleigh_quotient_with(u, v, params, &conv)
}

pub(crate) fn rayleigh_quotient_with(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
) -> Result<f64> {
    let p = params.p;
    let denom = params.mu1 / p * conv.b_uu(u, p) + params.mu2 / p * conv.b_vv(v, p)
        + 2.0 * params.beta / p * conv.b_uv(v, p);
    if denom <= 0.0 {
        return Err(Error::Diagnostic(
            "Rayleigh quotient denominator vanishes".into(),
        ));
    }
    Ok(kinetic_pair(u, v, params.s)? / denom)
}

/// The one-dimensional threshold curve
/// f(t) = a*(1 + t²)/(μ₁a^{2(p−1)} + μ₂b^{2(p−1)}t² + 2βa^{p−1}b^{p−1}t).
pub fn f_curve(t: f64, params: &ModelParams, a_star: f64) -> f64 {
    let e = 2.0 * (params.p - 1.0);
    let m1 = params.mu1 * params.a.powf(e);
    let m2 = params.mu2 * params.b.powf(e);
    let cross = 2.0 * params.beta * params.a.powf(params.p - 1.0) * params.b.powf(params.p - 1.0);
    a_star * (1.0 + t * t) / (m1 + m2 * t * t + cross * t)
}

/// Multiplier estimates obtained by pairing the stationarity relation with
/// (u, 0) and (0, v):
/// λ₁a² = −‖(−Δ)^{s/2}u‖² − ∫V₁u² + μ₁B(u,u,p) + βB(u,v,r), and symmetrically.
pub fn multiplier_estimates(u: &Field, v: &Field, params: &ModelParams) -> Result<(f64, f64)> {
    let conv = PairConvolutions::compute(u, v, params)?;
    let pot1 = params.v1.sample(u.grid());
    let pot2 = params.v2.sample(u.grid());
    multiplier_estimates_with(u, v, params, &conv, &pot1, &pot2)
}

pub(crate) fn multiplier_estimates_with(
    u: &Field,
    v: &Field,
    params: &ModelParams,
    conv: &PairConvolutions,
    pot1: &Option<Field>,
    pot2: &Option<Field>,
) -> Result<(f64, f64)> {
    let mu = mass(u);
    let mv = mass(v);
    if mu == 0.0 || mv == 0.0 {
        return Err(Error::Diagnostic(
            "multiplier estimate requires nonzero masses".into(),
        ));
    }
    let ku = kinetic(u, params.s)?;
    let kv = kinetic(v, params.s)?;
    let b_uv = conv.b_uv(v, params.r);
    let l1 = (-ku - potential_quadratic(u, pot1) + params.mu1 * conv.b_uu(u, params.p)
        + params.beta * b_uv)
        / mu;
    let l2 = (-kv - potential_quadratic(v, pot2) + params.mu2 * conv.b_vv(v, params.q)
        + params.beta * b_uv)
        / mv;
    Ok((l1, l2))
}

/// ⟨grad, φ⟩ pairing used by the finite-difference gradient checks.
pub fn gradient_pairing(grad: &(Field, Field), phi: &Field, psi: &Field) -> Result<f64> {
    Ok(inner(&grad.0, phi)? + inner(&grad.1, psi)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian, make_grid};
    use crate::params::PotentialSpec;

    fn params_2d() -> ModelParams {
        ModelParams {
            s: 0.75,
            alpha: 1.0,
            p: 2.0,
            q: 2.0,
            r: 2.0,
            mu1: 1.0,
            mu2: 1.3,
            beta: 0.8,
            a: 1.0,
            b: 1.2,
            v1: PotentialSpec::zero(),
            v2: PotentialSpec::zero(),
        }
    }

    #[test]
    fn hls_constant_hand_value() {
        // N = 3, α = 2: (4/3)·(4/√π)^{2/3}
        let expect = 4.0 / 3.0 * (4.0 / std::f64::consts::PI.sqrt()).powf(2.0 / 3.0);
        let got = hls_sharp_constant(3, 2.0);
        assert!((got - expect).abs() / expect < 1e-13, "got {got}");
        assert!((got - 2.2948).abs() < 1e-3);
    }

    #[test]
    fn hls_constant_continuous_toward_dim() {
        let mut last = hls_sharp_constant(3, 2.90);
        for k in 1..=9 {
            let alpha = 2.90 + 0.01 * k as f64;
            let val = hls_sharp_constant(3, alpha);
            assert!(val.is_finite() && val > 0.0);
            assert!((val - last).abs() < 0.2);
            last = val;
        }
    }

    #[test]
    fn gn_constant_critical_reduction() {
        // at p = 1 + (α+2s)/N the constant is p·q_mass^{1−p}
        let (dim, s, alpha) = (3usize, 0.9, 2.0);
        let p = 1.0 + (alpha + 2.0 * s) / dim as f64;
        let qm = 2.7;
        let c = gn_sharp_constant(dim, p, s, alpha, qm).unwrap();
        assert!((c - p * qm.powf(1.0 - p)).abs() / c < 1e-12);
        let c1 = gn_sharp_constant(dim, p, s, alpha, 1.0).unwrap();
        assert!((c1 - p).abs() < 1e-12);
    }

    #[test]
    fn b_term_symmetry_and_zero() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let u = gaussian(&g, &[0.5, 0.0], 0.8).unwrap();
        let v = gaussian(&g, &[-0.3, 0.4], 1.1).unwrap();
        let buv = b_term(&u, &v, 2.0, 1.0).unwrap();
        let bvu = b_term(&v, &u, 2.0, 1.0).unwrap();
        assert!((buv - bvu).abs() / buv < 1e-12);
        let z = crate::grid::Field::zeros(&g);
        assert_eq!(b_term(&z, &v, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_zero_fields() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let z = crate::grid::Field::zeros(&g);
        let params = params_2d();
        assert_eq!(energy(&z, &z, &params).unwrap(), 0.0);
        let (gu, gv) = energy_gradient(&z, &z, &params).unwrap();
        assert_eq!(gu.max_abs(), 0.0);
        assert_eq!(gv.max_abs(), 0.0);
    }

    #[test]
    fn beta_zero_gradient_decouples() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let mut params = params_2d();
        params.beta = 0.0;
        let v = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
        let u1 = gaussian(&g, &[1.0, 0.0], 0.7).unwrap();
        let u2 = gaussian(&g, &[-1.0, 0.5], 1.3).unwrap();
        let (_, gv1) = energy_gradient(&u1, &v, &params).unwrap();
        let (_, gv2) = energy_gradient(&u2, &v, &params).unwrap();
        assert_eq!(gv1.values(), gv2.values());
    }

    #[test]
    fn f_curve_limits_and_symmetric_minimum() {
        let mut params = params_2d();
        params.p = 2.0;
        params.a = 1.0;
        params.b = 1.0;
        params.mu1 = 0.5;
        params.mu2 = 0.5;
        params.beta = 0.25;
        let a_star = 1.0;
        // t → 0⁺ and t → ∞ limits
        assert!((f_curve(1e-9, &params, a_star) - a_star / 0.5).abs() < 1e-6);
        assert!((f_curve(1e9, &params, a_star) - a_star / 0.5).abs() < 1e-6);
        // symmetric parameters: minimum at t = 1 with value 2a*/(2m0 + 2β0)
        let expect = 2.0 * a_star / (2.0 * 0.5 + 2.0 * 0.25);
        assert!((f_curve(1.0, &params, a_star) - expect).abs() < 1e-12);
        for t in [0.3, 0.7, 1.5, 3.0] {
            assert!(f_curve(t, &params, a_star) >= expect - 1e-12);
        }
    }

    #[test]
    fn pohozaev_zero_fields() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let z = crate::grid::Field::zeros(&g);
        let params = params_2d();
        assert_eq!(pohozaev_system_residual(&z, &z, &params).unwrap(), 0.0);
        assert_eq!(
            pohozaev_scalar_residual(&z, 1.0, 2.0, 0.75, 1.0).unwrap(),
            0.0
        );
        let mut trapped = params;
        trapped.v1 = PotentialSpec::power(1.0, 2.0);
        assert!(pohozaev_system_residual(&z, &z, &trapped).is_err());
    }

    #[test]
    fn scaling_derivative_at_origin_is_pohozaev() {
        let g = make_grid(2, 32, 6.0).unwrap();
        let u = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
        let v = gaussian(&g, &[0.5, 0.0], 1.2).unwrap();
        let params = params_2d();
        let d0 = scaling_energy_derivative(&u, &v, &params, 0.0).unwrap();
        let res = pohozaev_system_residual(&u, &v, &params).unwrap();
        assert!((d0 - res).abs() < 1e-12 * res.abs().max(1.0));
    }

    #[test]
    fn scaling_derivative_vanishes_at_minus_infinity() {
        // supercritical exponents: the kinetic term decays slowest, so the
        // fiber derivative approaches zero from above
        let g = make_grid(2, 32, 6.0).unwrap();
        let u = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
        let v = gaussian(&g, &[0.0, 0.0], 1.2).unwrap();
        let mut params = params_2d();
        params.p = 3.0;
        params.q = 3.0;
        params.r = 3.0;
        let d = scaling_energy_derivative(&u, &v, &params, -20.0).unwrap();
        assert!(d > 0.0 && d < 1e-10, "d = {d:.3e}");
    }
}
