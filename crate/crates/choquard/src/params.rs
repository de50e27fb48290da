//! Model parameters: fractional order, kernel exponent, nonlinearity
//! exponents, interaction strengths, target masses and external potentials.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use serde::{Deserialize, Serialize};

/// External potential of one component: either absent or the power-growth
/// trap V(x) = κ|x|^θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    Zero,
    Power { kappa: f64, theta: f64 },
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::Zero
    }

    pub fn power(kappa: f64, theta: f64) -> Self {
        PotentialSpec::Power { kappa, theta }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Power { kappa, .. } => *kappa == 0.0,
        }
    }

    pub fn validate(&self, dim: usize, s: f64, key: &str) -> Result<()> {
        if let PotentialSpec::Power { kappa, theta } = self {
            if !(*kappa >= 0.0 && kappa.is_finite()) {
                return Err(Error::param(key, "kappa must be nonnegative"));
            }
            if *kappa > 0.0 && !(*theta > 0.0 && *theta < dim as f64 + 2.0 * s) {
                return Err(Error::param(
                    key,
                    format!(
                        "theta must lie in (0, dim + 2s) = (0, {}), got {theta}",
                        dim as f64 + 2.0 * s
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Sample V at the grid nodes. Returns `None` for a vanishing potential.
    pub fn sample(&self, grid: &Grid) -> Option<Field> {
        match self {
            PotentialSpec::Zero => None,
            PotentialSpec::Power { kappa, theta } => {
                if *kappa == 0.0 {
                    return None;
                }
                let (k, t) = (*kappa, *theta);
                Some(
                    Field::from_fn(grid, |x| {
                        let r2: f64 = x.iter().map(|a| a * a).sum();
                        if r2 == 0.0 {
                            0.0
                        } else {
                            k * r2.powf(t / 2.0)
                        }
                    })
                    .expect("potential sample is finite"),
                )
            }
        }
    }
}

/// All scalar model parameters of the coupled system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub s: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub v1: PotentialSpec,
    pub v2: PotentialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl ModelParams {
    /// Lower admissible exponent 1 + α/N.
    pub fn lower_exponent(&self, dim: usize) -> f64 {
        1.0 + self.alpha / dim as f64
    }

    /// The mass-critical exponent 1 + (α + 2s)/N.
    pub fn critical_exponent(&self, dim: usize) -> f64 {
        1.0 + (self.alpha + 2.0 * self.s) / dim as f64
    }

    /// Upper admissible exponent (N + α)/(N − 2s), when N > 2s.
    pub fn upper_exponent(&self, dim: usize) -> Option<f64> {
        let n = dim as f64;
        if n > 2.0 * self.s {
            Some((n + self.alpha) / (n - 2.0 * self.s))
        } else {
            None
        }
    }

    /// Classify by the largest of p, q, r relative to the critical exponent.
    pub fn regime(&self, dim: usize) -> Regime {
        let crit = self.critical_exponent(dim);
        let hi = self.p.max(self.q).max(self.r);
        let lo = self.p.min(self.q).min(self.r);
        let tol = 1e-9 * crit;
        if hi < crit - tol {
            Regime::Subcritical
        } else if lo > crit + tol {
            Regime::Supercritical
        } else {
            Regime::Critical
        }
    }

    pub fn potentials_zero(&self) -> bool {
        self.v1.is_zero() && self.v2.is_zero()
    }

    /// Validate every field against the admissible windows for `dim`.
    /// `beta = 0` is admitted so that decoupled runs can share the machinery.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::param("s", format!("must lie in (0, 1], got {}", self.s)));
        }
        if !(self.alpha > 0.0 && self.alpha < dim as f64) {
            return Err(Error::param(
                "alpha",
                format!("must lie in (0, dim) = (0, {dim}), got {}", self.alpha),
            ));
        }
        let lower = self.lower_exponent(dim);
        let upper = self.upper_exponent(dim);
        for (key, e) in [("p", self.p), ("q", self.q), ("r", self.r)] {
            if !(e > lower) {
                return Err(Error::param(
                    key,
                    format!("must exceed 1 + alpha/dim = {lower}, got {e}"),
                ));
            }
            if let Some(up) = upper {
                if !(e < up) {
                    return Err(Error::param(
                        key,
                        format!("must be below (dim + alpha)/(dim - 2s) = {up}, got {e}"),
                    ));
                }
            }
        }
        for (key, v) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::param(
                "beta",
                format!("must be nonnegative, got {}", self.beta),
            ));
        }
        for (key, v) in [("a", self.a), ("b", self.b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(key, format!("must be positive, got {v}")));
            }
        }
        self.v1.validate(dim, self.s, "potential.v1")?;
        self.v2.validate(dim, self.s, "potential.v2")?;
        Ok(())
    }
}

/// The interpolation exponents δ of the Gagliardo–Nirenberg estimate,
/// δ_p = (N(p−1) − α)/(2ps), one per nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GNExponents {
    pub delta_p: f64,
    pub delta_q: f64,
    pub delta_r: f64,
}

impl GNExponents {
    pub fn new(params: &ModelParams, dim: usize) -> GNExponents {
        GNExponents {
            delta_p: gn_exponent(dim, params.p, params.s, params.alpha),
            delta_q: gn_exponent(dim, params.q, params.s, params.alpha),
            delta_r: gn_exponent(dim, params.r, params.s, params.alpha),
        }
    }
}

/// δ_p = (N(p−1) − α)/(2ps).
pub fn gn_exponent(dim: usize, p: f64, s: f64, alpha: f64) -> f64 {
    (dim as f64 * (p - 1.0) - alpha) / (2.0 * p * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams {
            s: 0.9,
            alpha: 2.0,
            p: 2.0,
            q: 2.0,
            r: 2.0,
            mu1: 1.0,
            mu2: 1.0,
            beta: 1.0,
            a: 1.0,
            b: 1.0,
            v1: PotentialSpec::zero(),
            v2: PotentialSpec::zero(),
        }
    }

    #[test]
    fn exponent_hand_value() {
        let d = gn_exponent(3, 2.0, 0.9, 2.0);
        assert!((d - 1.0 / 3.6).abs() < 1e-15);
    }

    #[test]
    fn critical_exponent_algebra() {
        let params = base();
        let crit = params.critical_exponent(3);
        let d = gn_exponent(3, crit, 0.9, 2.0);
        assert!((crit * d - 1.0).abs() < 1e-12);
        // lower endpoint: delta vanishes
        let d0 = gn_exponent(3, 1.0 + 2.0 / 3.0, 0.9, 2.0);
        assert!(d0.abs() < 1e-12);
    }

    #[test]
    fn regime_classification() {
        let mut params = base();
        assert_eq!(params.regime(3), Regime::Subcritical);
        let crit = params.critical_exponent(3);
        params.p = crit;
        params.q = crit;
        params.r = crit;
        assert_eq!(params.regime(3), Regime::Critical);
        params.p = 3.0;
        params.q = 3.0;
        params.r = 3.0;
        assert_eq!(params.regime(3), Regime::Supercritical);
    }

    #[test]
    fn validation_windows() {
        let mut params = base();
        assert!(params.validate(3).is_ok());
        params.p = 1.5; // below 1 + 2/3? no, 1.5 < 1.6667
        assert!(params.validate(3).is_err());
        params.p = 4.5; // above 5/1.2 = 4.1667
        assert!(params.validate(3).is_err());
        params.p = 2.0;
        params.alpha = 3.5;
        assert!(params.validate(3).is_err());
        params.alpha = 2.0;
        params.v1 = PotentialSpec::power(1.0, 6.0); // theta above dim + 2s
        assert!(params.validate(3).is_err());
        params.v1 = PotentialSpec::power(1.0, 2.0);
        assert!(params.validate(3).is_ok());
    }
}
