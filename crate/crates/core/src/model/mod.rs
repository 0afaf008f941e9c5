//! Domain types shared by all computation modules: reservoir states, form
//! factors, junction specifications, and the Fermi-Dirac function.

mod kernels;
mod spline;

pub use kernels::{PairFormFactor, RadialFormFactor, RadialProfile};
pub use spline::CubicSpline;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid inverse temperature {0}: must be positive or +inf")]
    InvalidBeta(f64),
    #[error("invalid chemical potential {0}: must be finite")]
    InvalidMu(f64),
    #[error("junction needs at least one kernel (tunnelling or pair)")]
    NoKernel,
    #[error("spatial dimension must be >= 1, got {0}")]
    BadDimension(u32),
    #[error("kernel parameter out of range: {0}")]
    BadKernelParameter(String),
    #[error("table kernel: {0}")]
    BadTable(String),
}

/// Thermodynamic state of one reservoir: inverse temperature and chemical
/// potential. `beta = +inf` is a first-class value encoding T = 0; all
/// consumers branch on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirState {
    /// Inverse temperature, in (0, +inf].
    pub beta: f64,
    /// Chemical potential (any finite real).
    pub mu: f64,
}

impl ReservoirState {
    pub fn new(beta: f64, mu: f64) -> Result<Self, ModelError> {
        if !(beta > 0.0) {
            return Err(ModelError::InvalidBeta(beta));
        }
        if !mu.is_finite() {
            return Err(ModelError::InvalidMu(mu));
        }
        Ok(Self { beta, mu })
    }

    /// The T = 0 state at chemical potential `mu`.
    pub fn zero_temperature(mu: f64) -> Self {
        Self {
            beta: f64::INFINITY,
            mu,
        }
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// Temperature 1/beta (0 for the zero-temperature state).
    pub fn temperature(&self) -> f64 {
        if self.beta.is_infinite() {
            0.0
        } else {
            1.0 / self.beta
        }
    }
}

/// Fermi-Dirac occupation 1/(e^{beta (E - mu)} + 1).
///
/// Overflow-safe for arbitrarily large |beta (E - mu)|. At beta = +inf this
/// is the ground-state step: 1 below mu, 1/2 at mu, 0 above.
pub fn fermi(energy: f64, r: &ReservoirState) -> f64 {
    if r.beta.is_infinite() {
        return if energy < r.mu {
            1.0
        } else if energy == r.mu {
            0.5
        } else {
            0.0
        };
    }
    let x = r.beta * (energy - r.mu);
    if x > 0.0 {
        // e^{-x}/(1 + e^{-x}) avoids overflow for large positive x.
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// The thermal window e^x / (e^x + 1)^2 with x = beta (E - mu), i.e.
/// -(1/beta) d rho / dE. Peaks at the Fermi edge with width of order the
/// temperature; evaluated as a product of two logistic factors so neither
/// tail overflows. Finite-temperature states only (zero-temperature limits
/// are handled by closed forms at the call sites).
pub fn fermi_window(energy: f64, r: &ReservoirState) -> f64 {
    debug_assert!(r.beta.is_finite(), "fermi_window needs finite beta");
    let x = r.beta * (energy - r.mu);
    let sigma = |x: f64| {
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    };
    sigma(x) * sigma(-x)
}

/// Occupation difference rho_II(E) - rho_I(E) in a cancellation-free form.
///
/// Cancellation only threatens when the exponents x_r = beta^r (E - mu^r)
/// are close; there the fraction form
/// (e^{x_I} - e^{x_II}) / ((e^{x_I}+1)(e^{x_II}+1)) is used, rescaled by
/// e^{-2 max(x, 0)} against overflow and with `exp_m1` carrying the
/// difference at full relative accuracy. For well-separated exponents the
/// direct difference of stable occupations is already exact to absolute
/// 1e-15 and avoids the fraction's underflow corner (both factors
/// denormal when the exponents straddle hundreds).
pub fn fermi_diff(energy: f64, res_i: &ReservoirState, res_ii: &ReservoirState) -> f64 {
    if res_i.beta.is_infinite() || res_ii.beta.is_infinite() {
        return fermi(energy, res_ii) - fermi(energy, res_i);
    }
    let x_i = res_i.beta * (energy - res_i.mu);
    let x_ii = res_ii.beta * (energy - res_ii.mu);
    if (x_ii - x_i).abs() >= 1.0 {
        return fermi(energy, res_ii) - fermi(energy, res_i);
    }
    let m = x_i.max(x_ii).max(0.0);
    let num = -((x_i - 2.0 * m).exp()) * (x_ii - x_i).exp_m1();
    let den = ((x_i - m).exp() + (-m).exp()) * ((x_ii - m).exp() + (-m).exp());
    num / den
}

/// Full description of a junction between two free-fermion reservoirs.
///
/// `g` and `xi` are the two dimensionless coupling constants; the N-particle
/// interaction term carries g xi^N. Kernels store the modulus squared of the
/// momentum-space coupling function; every supported observable consumes
/// only that combination.
#[derive(Debug, Clone)]
pub struct JunctionSpec {
    /// Spatial dimension. Convergence certificates need d >= 3; transport
    /// integrals accept d >= 1 (with a validation warning below 3).
    pub dimension: u32,
    pub reservoir_i: ReservoirState,
    pub reservoir_ii: ReservoirState,
    /// |w_1|^2 for the tunnelling (one-particle) coupling, if present.
    pub tunnelling_kernel: Option<RadialFormFactor>,
    /// |w_2|^2 for the pair (thermal-contact) coupling, if present.
    pub pair_kernel: Option<PairFormFactor>,
    pub g: f64,
    pub xi: f64,
}

impl JunctionSpec {
    /// Checks the structural invariants and returns human-readable warnings
    /// for conditions that are accepted but suspicious (low dimension,
    /// kernels whose shell weight decays too slowly to integrate).
    pub fn validate(&self) -> Result<Vec<String>, ModelError> {
        if self.dimension < 1 {
            return Err(ModelError::BadDimension(self.dimension));
        }
        if self.tunnelling_kernel.is_none() && self.pair_kernel.is_none() {
            return Err(ModelError::NoKernel);
        }
        let mut warnings = Vec::new();
        if self.dimension < 3 {
            warnings.push(format!(
                "dimension {} below 3: transport integrals are supported but convergence \
                 certificates are not",
                self.dimension
            ));
        }
        if let Some(kernel) = &self.tunnelling_kernel {
            if !kernel.shell_weight_integrable(self.dimension) {
                warnings.push(format!(
                    "tunnelling kernel: k^{} u(k,k) does not decay integrably; shell \
                     integrals rely entirely on the Fermi-tail cutoff",
                    2 * self.dimension as i64 - 3
                ));
            }
        }
        Ok(warnings)
    }

    /// rho_II(E) - rho_I(E) for this junction's reservoirs.
    pub fn fermi_diff(&self, energy: f64) -> f64 {
        fermi_diff(energy, &self.reservoir_i, &self.reservoir_ii)
    }

    /// The junction with the two reservoirs exchanged.
    pub fn swapped(&self) -> Self {
        let mut out = self.clone();
        out.reservoir_i = self.reservoir_ii;
        out.reservoir_ii = self.reservoir_i;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermi_at_mu_is_half() {
        for beta in [0.1, 1.0, 10.0, 500.0] {
            let r = ReservoirState::new(beta, 0.7).unwrap();
            assert_eq!(fermi(0.7, &r), 0.5);
        }
    }

    #[test]
    fn fermi_zero_temperature_step() {
        let r = ReservoirState::zero_temperature(2.0);
        assert_eq!(fermi(1.0, &r), 1.0);
        assert_eq!(fermi(3.0, &r), 0.0);
        assert_eq!(fermi(2.0, &r), 0.5);
    }

    #[test]
    fn fermi_closed_form_point() {
        // 1/(e^{ln 3} + 1) = 1/4.
        let r = ReservoirState::new(1.0, 0.0).unwrap();
        assert!((fermi(3.0f64.ln(), &r) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fermi_no_overflow_at_extreme_arguments() {
        let r = ReservoirState::new(1e6, 0.0).unwrap();
        assert_eq!(fermi(1e6, &r), 0.0);
        assert_eq!(fermi(-1e6, &r), 1.0);
        assert!(fermi(1e-7, &r).is_finite());
    }

    #[test]
    fn fermi_diff_identical_reservoirs_vanishes() {
        let r = ReservoirState::new(2.0, 0.3).unwrap();
        for e in [-5.0, 0.0, 0.3, 10.0, 300.0] {
            assert_eq!(fermi_diff(e, &r, &r), 0.0);
        }
    }

    #[test]
    fn fermi_diff_hotter_ii_positive() {
        // Equal mu, reservoir II hotter (smaller beta): rho_II - rho_I > 0.
        let i = ReservoirState::new(2.0, 0.5).unwrap();
        let ii = ReservoirState::new(1.0, 0.5).unwrap();
        for e in [0.6, 1.0, 5.0, 20.0] {
            assert!(fermi_diff(e, &i, &ii) > 0.0, "E = {e}");
        }
    }

    #[test]
    fn fermi_diff_closed_form_point() {
        let i = ReservoirState::new(1.0, 0.0).unwrap();
        let ii = ReservoirState::new(1.0, 0.1).unwrap();
        let expect = 1.0 / ((-0.1f64).exp() + 1.0) - 0.5;
        assert!((fermi_diff(0.0, &i, &ii) - expect).abs() < 1e-16);
        assert!((expect - 0.024979).abs() < 1e-6);
    }

    #[test]
    fn fermi_diff_matches_direct_difference() {
        let grids = [-3.0, -1.0, 0.0, 0.4, 1.0, 2.5, 8.0, 40.0, 600.0];
        for &bi in &[0.5, 1.0, 7.0] {
            for &bii in &[0.2, 1.0, 3.0] {
                for &mi in &[-1.0, 0.0, 0.9] {
                    for &mii in &[-0.5, 0.0, 1.2] {
                        let i = ReservoirState::new(bi, mi).unwrap();
                        let ii = ReservoirState::new(bii, mii).unwrap();
                        for &e in &grids {
                            if (bi * (e - mi)).abs() > 700.0 || (bii * (e - mii)).abs() > 700.0 {
                                continue;
                            }
                            let direct = fermi(e, &ii) - fermi(e, &i);
                            assert!(
                                (fermi_diff(e, &i, &ii) - direct).abs() < 1e-14,
                                "E={e} bi={bi} bii={bii} mi={mi} mii={mii}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fermi_diff_zero_temperature_windows() {
        let i = ReservoirState::zero_temperature(1.0);
        let ii = ReservoirState::zero_temperature(2.0);
        assert_eq!(fermi_diff(0.5, &i, &ii), 0.0);
        assert_eq!(fermi_diff(1.5, &i, &ii), 1.0);
        assert_eq!(fermi_diff(2.5, &i, &ii), 0.0);
    }

    #[test]
    fn reservoir_rejects_nonpositive_beta() {
        assert!(ReservoirState::new(0.0, 0.0).is_err());
        assert!(ReservoirState::new(-1.0, 0.0).is_err());
        assert!(ReservoirState::new(f64::NAN, 0.0).is_err());
        assert!(ReservoirState::new(f64::INFINITY, 0.0).is_ok());
    }

    #[test]
    fn junction_requires_a_kernel() {
        let r = ReservoirState::new(1.0, 0.0).unwrap();
        let spec = JunctionSpec {
            dimension: 3,
            reservoir_i: r,
            reservoir_ii: r,
            tunnelling_kernel: None,
            pair_kernel: None,
            g: 1.0,
            xi: 1.0,
        };
        assert!(matches!(spec.validate(), Err(ModelError::NoKernel)));
    }

    #[test]
    fn junction_low_dimension_warns() {
        let r = ReservoirState::new(1.0, 0.0).unwrap();
        let spec = JunctionSpec {
            dimension: 2,
            reservoir_i: r,
            reservoir_ii: r,
            tunnelling_kernel: Some(RadialFormFactor::gaussian(1.0, 1.0)),
            pair_kernel: None,
            g: 1.0,
            xi: 1.0,
        };
        let warnings = spec.validate().unwrap();
        assert!(warnings.iter().any(|w| w.contains("dimension 2")));
    }
}
