//! Steady-state transport observables of a tunnelling or thermal junction,
//! to lowest non-vanishing order in the coupling constants.
//!
//! Sign convention: every current is the gain of reservoir I per unit time,
//! so at equal chemical potentials a hotter reservoir II drives positive
//! particle and energy currents. Particle and energy currents enter at
//! order g^2 xi^2 (tunnelling) and the thermal-junction energy flow at
//! g^2 xi^4; the order-g^1 terms vanish identically because the decoupled
//! initial state is invariant under each reservoir's particle-number gauge
//! flow, and those zeros are exposed as constants rather than computed.

use std::f64::consts::PI;

use thiserror::Error;

use crate::model::{
    fermi, fermi_diff, fermi_window, JunctionSpec, RadialFormFactor, ReservoirState,
};
use crate::quadrature::{
    fermi_energy_cutoff, integrate_1d_split, integrate_3d_simplex, shell_integral,
    QuadratureConfig, QuadratureError,
};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("operation needs a {0} kernel")]
    MissingKernel(&'static str),
    #[error("low-temperature expansion outside its validity: {0}")]
    DegenerateKernel(String),
    #[error(
        "finite-difference step too large: second-order correction {correction:.3e} \
         exceeds the derivative magnitude {signal:.3e}"
    )]
    StepTooLarge { correction: f64, signal: f64 },
    #[error("thermal-junction flow is implemented for d = 3 only, got d = {0}")]
    UnsupportedDimension(u32),
    #[error("{0}")]
    BadInput(String),
}

/// Particle current of order g^1 (any power of xi): identically zero.
pub const GAUGE_VANISHING_PARTICLE_CURRENT: f64 = 0.0;
/// Energy current of order g^1 (any power of xi): identically zero.
pub const GAUGE_VANISHING_ENERGY_CURRENT: f64 = 0.0;

/// Coupling powers included in a computed observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingOrder {
    pub g_power: u32,
    pub xi_power: u32,
}

/// Lowest-order tunnelling observables of one junction.
#[derive(Debug, Clone, Copy)]
pub struct TransportResult {
    /// Particle gain of reservoir I per unit time.
    pub particle_current: f64,
    /// Energy gain of reservoir I per unit time.
    pub energy_current: f64,
    /// Entropy production rate
    /// (beta_I - beta_II) P - (beta_I mu_I - beta_II mu_II) J.
    pub entropy_rate: f64,
    pub order: CouplingOrder,
}

fn coupling_square(spec: &JunctionSpec) -> f64 {
    spec.g * spec.g * spec.xi * spec.xi
}

/// Particle current at order g^2 xi^2:
/// g^2 xi^2 * 2 pi * shell integral of rho_II(E) - rho_I(E).
pub fn particle_current(
    spec: &JunctionSpec,
    cfg: &QuadratureConfig,
) -> Result<f64, TransportError> {
    let res_i = spec.reservoir_i;
    let res_ii = spec.reservoir_ii;
    let shell = shell_integral(|e| fermi_diff(e, &res_i, &res_ii), spec, cfg)?;
    Ok(coupling_square(spec) * 2.0 * PI * shell.value)
}

/// Energy current at order g^2 xi^2:
/// g^2 xi^2 * 2 pi * shell integral of E (rho_II(E) - rho_I(E)).
pub fn energy_current(spec: &JunctionSpec, cfg: &QuadratureConfig) -> Result<f64, TransportError> {
    let res_i = spec.reservoir_i;
    let res_ii = spec.reservoir_ii;
    let shell = shell_integral(|e| e * fermi_diff(e, &res_i, &res_ii), spec, cfg)?;
    Ok(coupling_square(spec) * 2.0 * PI * shell.value)
}

/// Entropy production rate at order g^2 xi^2, assembled from the two
/// currents by the thermodynamic identity.
pub fn entropy_rate(spec: &JunctionSpec, cfg: &QuadratureConfig) -> Result<f64, TransportError> {
    Ok(currents(spec, cfg)?.entropy_rate)
}

/// All three lowest-order tunnelling observables in one pass.
pub fn currents(spec: &JunctionSpec, cfg: &QuadratureConfig) -> Result<TransportResult, TransportError> {
    let particle = particle_current(spec, cfg)?;
    let energy = energy_current(spec, cfg)?;
    let (bi, bii) = (spec.reservoir_i.beta, spec.reservoir_ii.beta);
    let (mi, mii) = (spec.reservoir_i.mu, spec.reservoir_ii.mu);
    // A zero-temperature reservoir produces entropy at an infinite rate for
    // any nonzero heat flow.
    let entropy = if bi.is_infinite() || bii.is_infinite() {
        if particle == 0.0 && energy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (bi - bii) * energy - (bi * mi - bii * mii) * particle
    };
    Ok(TransportResult {
        particle_current: particle,
        energy_current: energy,
        entropy_rate: entropy,
        order: CouplingOrder {
            g_power: 2,
            xi_power: 2,
        },
    })
}

/// Energy-resolved transmission weight of a d = 3 junction,
/// f(r) = 8 pi^3 r u(sqrt r, sqrt r). Its reciprocal at the Fermi level is
/// the zero-temperature resistance.
pub fn transmission(r: f64, kernel: &RadialFormFactor) -> f64 {
    8.0 * PI.powi(3) * r * kernel.diagonal(r)
}

/// d/dr of [`transmission`].
pub fn transmission_d1(r: f64, kernel: &RadialFormFactor) -> f64 {
    8.0 * PI.powi(3) * (kernel.diagonal(r) + r * kernel.diagonal_d1(r))
}

/// d^2/dr^2 of [`transmission`].
pub fn transmission_d2(r: f64, kernel: &RadialFormFactor) -> f64 {
    8.0 * PI.powi(3) * (2.0 * kernel.diagonal_d1(r) + r * kernel.diagonal_d2(r))
}

/// Junction resistance (d = 3, unit couplings).
#[derive(Debug, Clone, Copy)]
pub struct Resistance {
    pub value: f64,
    /// Set when the transmission vanishes at the Fermi level at T = 0,
    /// making the resistance infinite.
    pub zero_transmission: bool,
}

/// Resistance R(mu, beta) of a d = 3 tunnelling junction at unit couplings,
/// from the linear-response form
/// R^{-1} = 8 pi^3 beta int_0^inf r u(sqrt r, sqrt r) e^{beta(r-mu)} (e^{beta(r-mu)}+1)^{-2} dr.
/// Scale by 1/(g^2 xi^2) externally for a coupled junction. At beta = +inf
/// the thermal window collapses onto the Fermi level and R = 1/f(mu).
pub fn resistance(
    mu: f64,
    beta: f64,
    kernel: &RadialFormFactor,
    cfg: &QuadratureConfig,
) -> Result<Resistance, TransportError> {
    if beta.is_infinite() {
        let f_mu = transmission(mu, kernel);
        if f_mu <= 0.0 {
            return Ok(Resistance {
                value: f64::INFINITY,
                zero_transmission: true,
            });
        }
        return Ok(Resistance {
            value: 1.0 / f_mu,
            zero_transmission: false,
        });
    }
    if !(beta > 0.0) {
        return Err(TransportError::BadInput(format!(
            "inverse temperature {beta} must be positive"
        )));
    }
    let res = ReservoirState { beta, mu };
    let e_max = fermi_energy_cutoff(&res, &res, cfg);
    let mut breaks: Vec<f64> = vec![mu];
    let mut s = e_max;
    for _ in 0..16 {
        s *= 0.5;
        breaks.push(s);
    }
    let mut integrand = |r: f64| r * kernel.diagonal(r) * fermi_window(r, &res);
    let inv = 8.0 * PI.powi(3) * beta
        * integrate_1d_split(&mut integrand, 0.0, e_max, &breaks, cfg)?.value;
    Ok(Resistance {
        value: 1.0 / inv,
        zero_transmission: false,
    })
}

/// Low-temperature expansion of the resistance,
/// R = 1 / (f(mu) + pi^2 T^2 f''(mu) / 6). Valid for beta mu >> 1; a warning
/// is logged below beta mu = 5, and a positive denominator is required.
pub fn resistance_sommerfeld(
    mu: f64,
    beta: f64,
    kernel: &RadialFormFactor,
) -> Result<f64, TransportError> {
    if !(beta > 0.0) {
        return Err(TransportError::BadInput(format!(
            "inverse temperature {beta} must be positive"
        )));
    }
    let t = if beta.is_infinite() { 0.0 } else { 1.0 / beta };
    if beta.is_finite() && beta * mu < 5.0 {
        log::warn!(
            "sommerfeld expansion requested at beta*mu = {:.3}; it is an asymptotic \
             low-temperature form and loses accuracy below beta*mu ~ 5",
            beta * mu
        );
    }
    let denom = transmission(mu, kernel) + PI * PI * t * t * transmission_d2(mu, kernel) / 6.0;
    if denom <= 0.0 {
        return Err(TransportError::DegenerateKernel(format!(
            "expansion denominator {denom:.6e} is not positive at mu = {mu}, T = {t}"
        )));
    }
    Ok(1.0 / denom)
}

/// One line of an Ohm's-law verification table.
#[derive(Debug, Clone, Copy)]
pub struct OhmRow {
    pub dmu: f64,
    /// Computed particle current with mu_II = mu + dmu.
    pub current: f64,
    /// Linear prediction g^2 xi^2 dmu / R(mu, beta).
    pub prediction: f64,
    pub residual: f64,
}

/// Compares the particle current against the linear-response prediction
/// dmu / R for each chemical-potential offset. Requires equal temperatures;
/// reservoir II is offset by dmu from reservoir I.
pub fn ohm_check(
    spec: &JunctionSpec,
    dmu_list: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<OhmRow>, TransportError> {
    if spec.reservoir_i.beta != spec.reservoir_ii.beta {
        return Err(TransportError::BadInput(
            "ohm_check needs equal temperatures in both reservoirs".into(),
        ));
    }
    let kernel = spec
        .tunnelling_kernel
        .as_ref()
        .ok_or(TransportError::MissingKernel("tunnelling"))?;
    let mu = spec.reservoir_i.mu;
    let beta = spec.reservoir_i.beta;
    let r = resistance(mu, beta, kernel, cfg)?;
    let mut rows = Vec::with_capacity(dmu_list.len());
    for &dmu in dmu_list {
        let mut shifted = spec.clone();
        shifted.reservoir_ii = ReservoirState {
            beta,
            mu: mu + dmu,
        };
        let current = particle_current(&shifted, cfg)?;
        let prediction = if r.zero_transmission {
            0.0
        } else {
            coupling_square(spec) * dmu / r.value
        };
        rows.push(OhmRow {
            dmu,
            current,
            prediction,
            residual: current - prediction,
        });
    }
    Ok(rows)
}

/// Result of the Onsager reciprocity check at equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct OnsagerCheck {
    /// dP/d(dnu) at dbeta = dnu = 0 (central difference at step h).
    pub d_energy_d_dnu: f64,
    /// -dJ/d(dbeta) at dbeta = dnu = 0.
    pub minus_d_particle_d_dbeta: f64,
    /// d_energy_d_dnu - minus_d_particle_d_dbeta; reciprocity drives it to 0.
    pub gap: f64,
    /// Convergence order of the gap measured between steps h and h/2.
    pub measured_order: f64,
}

/// Richardson consistency gate for a central difference: the estimated
/// next-order correction (4/3)|D(h) - D(h/2)| must not dominate the
/// derivative itself, otherwise the step cannot resolve it and the
/// requested derivative is reported as unreachable at this step size.
fn step_consistency_gate(d_h: f64, d_h2: f64) -> Result<(), TransportError> {
    let correction = (d_h - d_h2).abs() * 4.0 / 3.0;
    let signal = d_h2.abs();
    if correction > signal {
        return Err(TransportError::StepTooLarge { correction, signal });
    }
    Ok(())
}

/// Near-equilibrium parametrization: beta_I = beta, beta_II = beta - dbeta,
/// nu = beta_I mu_I held fixed, dnu = beta_I mu_I - beta_II mu_II.
fn near_equilibrium_spec(
    beta: f64,
    nu: f64,
    dbeta: f64,
    dnu: f64,
    kernel: &RadialFormFactor,
) -> JunctionSpec {
    let beta_ii = beta - dbeta;
    JunctionSpec {
        dimension: 3,
        reservoir_i: ReservoirState {
            beta,
            mu: nu / beta,
        },
        reservoir_ii: ReservoirState {
            beta: beta_ii,
            mu: (nu - dnu) / beta_ii,
        },
        tunnelling_kernel: Some(kernel.clone()),
        pair_kernel: None,
        g: 1.0,
        xi: 1.0,
    }
}

/// Checks the reciprocity relation dP/d(dnu) = -dJ/d(dbeta) at equilibrium
/// by central finite differences (step h, with a Richardson consistency
/// check at h/2), keeping the verification independent of the analytic
/// derivation of the integrands. Runs at d = 3 and unit couplings.
pub fn onsager_check(
    beta: f64,
    nu: f64,
    kernel: &RadialFormFactor,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<OnsagerCheck, TransportError> {
    if !(h > 0.0) {
        return Err(TransportError::BadInput(format!("step {h} must be > 0")));
    }
    if h >= beta {
        return Err(TransportError::BadInput(format!(
            "step {h} must stay below beta = {beta} so the perturbed reservoir keeps a \
             positive temperature"
        )));
    }
    let d_energy = |step: f64| -> Result<f64, TransportError> {
        let plus = energy_current(&near_equilibrium_spec(beta, nu, 0.0, step, kernel), cfg)?;
        let minus = energy_current(&near_equilibrium_spec(beta, nu, 0.0, -step, kernel), cfg)?;
        Ok((plus - minus) / (2.0 * step))
    };
    let d_particle = |step: f64| -> Result<f64, TransportError> {
        let plus = particle_current(&near_equilibrium_spec(beta, nu, step, 0.0, kernel), cfg)?;
        let minus = particle_current(&near_equilibrium_spec(beta, nu, -step, 0.0, kernel), cfg)?;
        Ok((plus - minus) / (2.0 * step))
    };

    let dp_h = d_energy(h)?;
    let dp_h2 = d_energy(0.5 * h)?;
    let dj_h = d_particle(h)?;
    let dj_h2 = d_particle(0.5 * h)?;
    step_consistency_gate(dp_h, dp_h2)?;
    step_consistency_gate(dj_h, dj_h2)?;

    let gap_h = dp_h + dj_h;
    let gap_h2 = dp_h2 + dj_h2;
    let measured_order = if gap_h2 != 0.0 && gap_h != 0.0 {
        (gap_h / gap_h2).abs().log2()
    } else {
        f64::INFINITY
    };
    Ok(OnsagerCheck {
        d_energy_d_dnu: dp_h2,
        minus_d_particle_d_dbeta: -dj_h2,
        gap: gap_h2,
        measured_order,
    })
}

/// Thermal-junction energy flow at order g^2 xi^4 (d = 3 only):
///
/// g^2 xi^4 * 2 pi (2 pi)^4 *
///   int dE1 dE2 dF1 sqrt(E1 E2 F1 F2) b(E1, E2, F1, F2) (E1 - F1)
///     rho_I(F1) rho_II(F2) (1 - rho_I(E1) - rho_II(E2)),  F2 = E1 + E2 - F1.
///
/// Each d^3 k was reduced to 2 pi sqrt(E) dE. The integrand is evaluated in
/// its swap-symmetrized form (average over E1<->E2, F1<->F2), an exact
/// rewriting under the pair kernel's symmetry that makes the identical-
/// reservoir case vanish pointwise instead of through cancellation between
/// panels.
pub fn thermal_power(spec: &JunctionSpec, cfg: &QuadratureConfig) -> Result<f64, TransportError> {
    let kernel = spec
        .pair_kernel
        .as_ref()
        .ok_or(TransportError::MissingKernel("pair"))?;
    if spec.dimension != 3 {
        return Err(TransportError::UnsupportedDimension(spec.dimension));
    }
    let res_i = spec.reservoir_i;
    let res_ii = spec.reservoir_ii;
    let e_max = fermi_energy_cutoff(&res_i, &res_ii, cfg);
    if e_max <= 0.0 {
        return Ok(0.0);
    }

    let half = |e1: f64, e2: f64, f1: f64, f2: f64| -> f64 {
        if f1 < 0.0 || f2 < 0.0 {
            return 0.0;
        }
        let root = (e1 * e2 * f1 * f2).max(0.0).sqrt();
        root * kernel.eval_energies(e1, e2, f1, f2)
            * (e1 - f1)
            * fermi(f1, &res_i)
            * fermi(f2, &res_ii)
            * (1.0 - fermi(e1, &res_i) - fermi(e2, &res_ii))
    };
    let integrand = move |e1: f64, e2: f64, f1: f64| {
        let f2 = e1 + e2 - f1;
        0.5 * (half(e1, e2, f1, f2) + half(e2, e1, f2, f1))
    };

    let breaks = [res_i.mu, res_ii.mu];
    let reduced = integrate_3d_simplex(integrand, e_max, &breaks, cfg)?;
    let prefactor = spec.g * spec.g * spec.xi.powi(4) * 2.0 * PI * (2.0 * PI).powi(4);
    Ok(prefactor * reduced.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairFormFactor;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn gaussian_spec(res_i: ReservoirState, res_ii: ReservoirState) -> JunctionSpec {
        JunctionSpec {
            dimension: 3,
            reservoir_i: res_i,
            reservoir_ii: res_ii,
            tunnelling_kernel: Some(RadialFormFactor::gaussian(1.0, 1.0)),
            pair_kernel: None,
            g: 1.0,
            xi: 1.0,
        }
    }

    #[test]
    fn identical_reservoirs_carry_no_current() {
        let r = ReservoirState::new(1.3, 0.4).unwrap();
        let out = currents(&gaussian_spec(r, r), &cfg()).unwrap();
        assert_eq!(out.particle_current, 0.0);
        assert_eq!(out.energy_current, 0.0);
        assert_eq!(out.entropy_rate, 0.0);
    }

    #[test]
    fn hotter_ii_drives_positive_flows() {
        let i = ReservoirState::new(2.0, 0.5).unwrap();
        let ii = ReservoirState::new(1.0, 0.5).unwrap();
        let out = currents(&gaussian_spec(i, ii), &cfg()).unwrap();
        assert!(out.particle_current > 0.0);
        assert!(out.energy_current > 0.0);
        assert!(out.entropy_rate > 0.0);
    }

    #[test]
    fn higher_mu_i_drives_negative_flows() {
        let i = ReservoirState::new(1.0, 1.0).unwrap();
        let ii = ReservoirState::new(1.0, 0.2).unwrap();
        let out = currents(&gaussian_spec(i, ii), &cfg()).unwrap();
        assert!(out.particle_current < 0.0);
        assert!(out.energy_current < 0.0);
        assert!(out.entropy_rate > 0.0);
    }

    /// Checked against an independent brute-force trapezoid rule at 10^6
    /// energy points. With mu_II above mu_I the occupation difference is
    /// positive at every energy, so reservoir I gains particles.
    #[test]
    fn particle_current_against_trapezoid_oracle() {
        let i = ReservoirState::new(1.0, 0.0).unwrap();
        let ii = ReservoirState::new(1.0, 0.5).unwrap();
        let value = particle_current(&gaussian_spec(i, ii), &cfg()).unwrap();
        assert!(value > 0.0);
        let reference = brute_force_particle_current(&i, &ii);
        assert!(
            ((value - reference) / reference).abs() < 1e-6,
            "value {value} vs oracle {reference}"
        );
    }

    /// Brute-force trapezoid oracle for the gaussian default kernel,
    /// independent of the adaptive engine and the shell helper.
    pub(crate) fn brute_force_particle_current(
        res_i: &ReservoirState,
        res_ii: &ReservoirState,
    ) -> f64 {
        let e_max = res_i.mu.max(res_ii.mu).max(0.0)
            + 40.0 / res_i.beta.min(res_ii.beta);
        let n = 1_000_000usize;
        let h = e_max / n as f64;
        let f = |e: f64| {
            e * (-2.0 * e).exp() * crate::model::fermi_diff(e, res_i, res_ii)
        };
        let mut acc = 0.5 * (f(0.0) + f(e_max));
        for j in 1..n {
            acc += f(j as f64 * h);
        }
        let integral = acc * h;
        let s = crate::quadrature::sphere_area(3);
        2.0 * PI * s * s / 4.0 * integral
    }

    #[test]
    fn reservoir_swap_negates_currents_bitwise() {
        let i = ReservoirState::new(0.7, -0.2).unwrap();
        let ii = ReservoirState::new(2.2, 0.9).unwrap();
        let spec = gaussian_spec(i, ii);
        let fwd = currents(&spec, &cfg()).unwrap();
        let bwd = currents(&spec.swapped(), &cfg()).unwrap();
        assert_eq!(fwd.particle_current, -bwd.particle_current);
        assert_eq!(fwd.energy_current, -bwd.energy_current);
    }

    #[test]
    fn currents_scale_as_g2_xi2() {
        let i = ReservoirState::new(1.0, 0.1).unwrap();
        let ii = ReservoirState::new(2.0, 0.6).unwrap();
        let mut spec = gaussian_spec(i, ii);
        spec.g = 0.3;
        spec.xi = 0.7;
        let base = currents(&spec, &cfg()).unwrap();
        spec.g *= 2.0;
        spec.xi *= 3.0;
        let scaled = currents(&spec, &cfg()).unwrap();
        assert!(
            (scaled.particle_current / base.particle_current - 36.0).abs() < 1e-12,
            "particle ratio {}",
            scaled.particle_current / base.particle_current
        );
        assert!((scaled.energy_current / base.energy_current - 36.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_gaussian_closed_form() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        for &r in &[0.0, 0.3, 1.0, 2.5] {
            let f = 8.0 * PI.powi(3) * r * (-2.0 * r).exp();
            let f2 = 8.0 * PI.powi(3) * (-2.0 * r).exp() * (4.0 * r - 4.0);
            assert!((transmission(r, &kernel) - f).abs() < 1e-12 * f.abs().max(1.0));
            assert!((transmission_d2(r, &kernel) - f2).abs() < 1e-12 * f2.abs().max(1.0));
        }
        assert_eq!(transmission(0.0, &kernel), 0.0);
        assert!(transmission_d2(1.0, &kernel).abs() < 1e-12);
    }

    #[test]
    fn resistance_zero_temperature_anchor() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let r = resistance(1.0, f64::INFINITY, &kernel, &cfg()).unwrap();
        assert!(!r.zero_transmission);
        assert!(
            (r.value - 1.0 / transmission(1.0, &kernel)).abs() < 1e-10 * r.value
        );
        // Vanishing transmission at the Fermi level: infinite resistance.
        let r0 = resistance(0.0, f64::INFINITY, &kernel, &cfg()).unwrap();
        assert!(r0.zero_transmission);
        assert!(r0.value.is_infinite());
    }

    #[test]
    fn resistance_grows_linearly_at_high_temperature() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let r100 = resistance(1.0, 1.0 / 100.0, &kernel, &cfg()).unwrap().value;
        let r200 = resistance(1.0, 1.0 / 200.0, &kernel, &cfg()).unwrap().value;
        assert!((r200 / r100 - 2.0).abs() < 0.1, "ratio {}", r200 / r100);
    }

    #[test]
    fn resistance_regression_value() {
        // Frozen from the brute-force window integral
        // 8 pi^3 beta int r e^{-2r} w(r) dr at beta = mu = 1 (trapezoid,
        // 10^6 points): R = 1 / 25.74230389...
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let r = resistance(1.0, 1.0, &kernel, &cfg()).unwrap().value;
        let res = ReservoirState::new(1.0, 1.0).unwrap();
        let n = 1_000_000usize;
        let e_max = 41.0;
        let h = e_max / n as f64;
        let f = |e: f64| e * (-2.0 * e).exp() * fermi_window(e, &res);
        let mut acc = 0.5 * (f(0.0) + f(e_max));
        for j in 1..n {
            acc += f(j as f64 * h);
        }
        let inv = 8.0 * PI.powi(3) * acc * h;
        assert!(((1.0 / r) - inv).abs() < 1e-6 * inv, "1/R {} vs {}", 1.0 / r, inv);
    }

    #[test]
    fn sommerfeld_flat_second_derivative_matches_zero_t() {
        // The gaussian transmission has f''(1) = 0, so the expansion is
        // temperature-independent at mu = 1.
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let r0 = 1.0 / transmission(1.0, &kernel);
        for &t in &[0.01, 0.05, 0.1] {
            let r = resistance_sommerfeld(1.0, 1.0 / t, &kernel).unwrap();
            assert!((r - r0).abs() < 1e-12 * r0);
        }
    }

    #[test]
    fn sommerfeld_sign_of_slope_follows_curvature() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        // f'' < 0 at mu = 0.5: resistance increases with T.
        let cold = resistance_sommerfeld(0.5, 100.0, &kernel).unwrap();
        let warm = resistance_sommerfeld(0.5, 25.0, &kernel).unwrap();
        assert!(warm > cold);
        // f'' > 0 at mu = 1.5: resistance decreases with T.
        let cold = resistance_sommerfeld(1.5, 100.0, &kernel).unwrap();
        let warm = resistance_sommerfeld(1.5, 25.0, &kernel).unwrap();
        assert!(warm < cold);
    }

    #[test]
    fn sommerfeld_degenerate_denominator_is_an_error() {
        // Sharp-cutoff kernel beyond its support: zero transmission.
        let kernel = RadialFormFactor::poly_cutoff(1.0, 1.0, 0);
        assert!(matches!(
            resistance_sommerfeld(4.0, 100.0, &kernel),
            Err(TransportError::DegenerateKernel(_))
        ));
    }

    #[test]
    fn ohm_check_residual_is_second_order() {
        let r = ReservoirState::new(1.0, 1.0).unwrap();
        let spec = gaussian_spec(r, r);
        let rows = ohm_check(&spec, &[0.0, 0.04, 0.02, 0.01], &cfg()).unwrap();
        assert_eq!(rows[0].current, 0.0);
        assert_eq!(rows[0].prediction, 0.0);
        let q1 = rows[1].residual / rows[2].residual;
        let q2 = rows[2].residual / rows[3].residual;
        assert!((q1 - 4.0).abs() < 0.8, "first halving ratio {q1}");
        assert!((q2 - 4.0).abs() < 0.8, "second halving ratio {q2}");
        // Relative residual at dmu = 0.01 comfortably below a percent.
        assert!((rows[3].residual / rows[3].current).abs() < 1e-2);
    }

    #[test]
    fn ohm_check_requires_equal_temperatures() {
        let i = ReservoirState::new(1.0, 1.0).unwrap();
        let ii = ReservoirState::new(2.0, 1.0).unwrap();
        assert!(ohm_check(&gaussian_spec(i, ii), &[0.01], &cfg()).is_err());
    }

    #[test]
    fn onsager_reciprocity_at_equilibrium() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let out = onsager_check(1.0, 1.0, &kernel, 1e-3, &cfg()).unwrap();
        let scale = out.d_energy_d_dnu.abs();
        assert!(out.gap.abs() < 1e-6 * scale, "gap {} scale {scale}", out.gap);
        // Both derivatives equal -2 pi * shell integral of E w(E), computed
        // here through the independent shell route.
        let res = ReservoirState::new(1.0, 1.0).unwrap();
        let spec = gaussian_spec(res, res);
        let direct = -2.0
            * PI
            * shell_integral(|e| e * fermi_window(e, &res), &spec, &cfg())
                .unwrap()
                .value;
        assert!(
            ((out.d_energy_d_dnu - direct) / direct).abs() < 1e-5,
            "{} vs {direct}",
            out.d_energy_d_dnu
        );
        assert!(((out.minus_d_particle_d_dbeta - direct) / direct).abs() < 1e-5);
    }

    #[test]
    fn onsager_gap_shrinks_quadratically() {
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        let g1 = onsager_check(1.0, 1.0, &kernel, 1e-2, &cfg()).unwrap();
        let g2 = onsager_check(1.0, 1.0, &kernel, 5e-3, &cfg()).unwrap();
        assert!(g1.measured_order > 1.8, "order {}", g1.measured_order);
        assert!(g2.measured_order > 1.8, "order {}", g2.measured_order);
    }

    #[test]
    fn onsager_step_gate() {
        // The gate itself: a derivative that moves by more than 3/4 of its
        // size when the step halves is rejected.
        assert!(step_consistency_gate(10.0, 10.1).is_ok());
        assert!(matches!(
            step_consistency_gate(10.0, 2.0),
            Err(TransportError::StepTooLarge { .. })
        ));
        // The transport integrands are smooth enough that even a large
        // physical step passes the gate rather than erroring.
        let kernel = RadialFormFactor::gaussian(1.0, 1.0);
        assert!(onsager_check(1.0, 1.0, &kernel, 0.5, &cfg()).is_ok());
        // Steps that would push the second reservoir to negative
        // temperature are rejected outright.
        assert!(matches!(
            onsager_check(1.0, 1.0, &kernel, 1.5, &cfg()),
            Err(TransportError::BadInput(_))
        ));
    }

    fn thermal_spec(res_i: ReservoirState, res_ii: ReservoirState) -> JunctionSpec {
        JunctionSpec {
            dimension: 3,
            reservoir_i: res_i,
            reservoir_ii: res_ii,
            tunnelling_kernel: None,
            pair_kernel: Some(PairFormFactor::product_gaussian(1.0, 1.0)),
            g: 1.0,
            xi: 1.0,
        }
    }

    #[test]
    fn thermal_power_identical_reservoirs_vanishes() {
        let r = ReservoirState::new(1.0, 1.0).unwrap();
        let loose = QuadratureConfig {
            rel_tol: 1e-7,
            ..cfg()
        };
        let p = thermal_power(&thermal_spec(r, r), &loose).unwrap();
        assert!(p.abs() < 1e-12, "got {p}");
    }

    #[test]
    fn thermal_power_flows_from_hot_to_cold() {
        // Reservoir I much hotter: it loses energy, so the gain of I is
        // negative.
        let i = ReservoirState::new(1.0, 1.0).unwrap();
        let ii = ReservoirState::new(20.0, 1.0).unwrap();
        let loose = QuadratureConfig {
            rel_tol: 1e-7,
            ..cfg()
        };
        let p = thermal_power(&thermal_spec(i, ii), &loose).unwrap();
        assert!(p < 0.0, "got {p}");
    }

    #[test]
    fn thermal_power_zero_kernel() {
        let i = ReservoirState::new(1.0, 1.0).unwrap();
        let ii = ReservoirState::new(3.0, 0.5).unwrap();
        let mut spec = thermal_spec(i, ii);
        spec.pair_kernel = Some(PairFormFactor::product_gaussian(0.0, 1.0));
        let p = thermal_power(&spec, &cfg()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn thermal_power_requires_pair_kernel_and_d3() {
        let r = ReservoirState::new(1.0, 1.0).unwrap();
        let mut spec = thermal_spec(r, r);
        spec.pair_kernel = None;
        assert!(matches!(
            thermal_power(&spec, &cfg()),
            Err(TransportError::MissingKernel("pair"))
        ));
        let mut spec = thermal_spec(r, r);
        spec.dimension = 4;
        assert!(matches!(
            thermal_power(&spec, &cfg()),
            Err(TransportError::UnsupportedDimension(4))
        ));
    }
}
