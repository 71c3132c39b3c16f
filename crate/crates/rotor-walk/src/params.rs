//! Walk parameterization and the derived perturbation constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a p-rotor walk with an (alpha, beta)-random initial
/// configuration.
///
/// `p` is the probability that the rotor at the current site is broken and
/// fails to flip. On first visit, rotors at positive sites point right with
/// probability `alpha`; rotors at negative sites point left with probability
/// `beta`; the origin rotor is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p: f64,
    alpha: f64,
    beta: f64,
}

impl WalkParams {
    /// Build a validated parameter set. Requires `0 < p < 1` and
    /// `alpha, beta` in `[0, 1]`.
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie strictly inside (0, 1), got {p}"
            )));
        }
        Self::with_any_p(p, alpha, beta)
    }

    /// Like [`WalkParams::new`] but admits the degenerate rotor-reliability
    /// values `p = 0` and `p = 1`. The scaling-limit statements need
    /// `p` in the open interval, so this constructor exists for sanity
    /// experiments (e.g. the fully deterministic `p = 1` walk) and tests.
    #[doc(hidden)]
    pub fn with_any_p(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p out of [0, 1]: {p}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha out of [0, 1]: {alpha}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta out of [0, 1]: {beta}")));
        }
        Ok(WalkParams { p, alpha, beta })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Derived perturbation constants of the scaling limit.
    pub fn perturbation(&self) -> PerturbationParams {
        PerturbationParams::derive(self)
    }
}

/// Constants of the limiting perturbed Brownian motion.
///
/// `a = alpha (2p - 1) / p` weights the running maximum and
/// `b = beta (2p - 1) / p` the running minimum. Both are `< 1` for every
/// valid parameter set. When `b = 0` the limit has the explicit one-sided
/// form with coefficient `lambda = a / (1 - a)`; `lambda` is `None`
/// otherwise. `diffusion_scale = sqrt((1 - p) / p)` multiplies the limit
/// process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub a: f64,
    pub b: f64,
    pub lambda: Option<f64>,
    pub diffusion_scale: f64,
}

impl PerturbationParams {
    pub fn derive(params: &WalkParams) -> Self {
        let p = params.p();
        let drift = 2.0 * p - 1.0;
        let a = params.alpha() * drift / p;
        let b = params.beta() * drift / p;
        let lambda = if b == 0.0 { Some(a / (1.0 - a)) } else { None };
        PerturbationParams {
            a,
            b,
            lambda,
            diffusion_scale: ((1.0 - p) / p).sqrt(),
        }
    }

    /// max(1/(1-a), 1/(1-b), 1/((1-a)(1-b))), the Lipschitz constant tying
    /// extrema increments to increments of the driving term.
    pub fn extrema_lipschitz(&self) -> f64 {
        let ra = 1.0 / (1.0 - self.a);
        let rb = 1.0 / (1.0 - self.b);
        ra.max(rb).max(ra * rb)
    }
}
