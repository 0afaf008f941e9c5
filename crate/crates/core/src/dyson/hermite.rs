//! Hermite functions: stable evaluation, L1-norm bounds, and free-propagator
//! overlaps.

use num_complex::Complex64;

use crate::quadrature::{integrate_1d_split, GaussLegendre, QuadratureConfig};

use super::DysonError;

/// phi_q(x) by the normalized three-term recurrence
/// phi_{q+1} = sqrt(2/(q+1)) x phi_q - sqrt(q/(q+1)) phi_{q-1},
/// phi_0 = pi^{-1/4} e^{-x^2/2}. Stable for q into the hundreds, unlike the
/// factorial-normalized closed form.
pub fn hermite_eval(q: usize, x: f64) -> f64 {
    hermite_values(q, x)[q]
}

/// All of phi_0(x) ... phi_{q_max}(x) in one recurrence sweep.
pub fn hermite_values(q_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(q_max + 1);
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(phi0);
    if q_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * phi0);
    for q in 1..q_max {
        let qf = q as f64;
        let next = (2.0 / (qf + 1.0)).sqrt() * x * out[q] - (qf / (qf + 1.0)).sqrt() * out[q - 1];
        out.push(next);
    }
    out
}

/// Half-width of the interval outside which phi_q is negligible at double
/// precision: the classical turning point sqrt(2q+1) plus a tail margin.
fn support_radius(q: usize) -> f64 {
    (2.0 * q as f64 + 1.0).sqrt() + 10.0
}

/// L1 norm of phi_q by adaptive quadrature. The integrand has kinks at the
/// q real zeros; the adaptive engine resolves them without needing the
/// zeros explicitly.
pub fn hermite_l1_norm(q: usize, cfg: &QuadratureConfig) -> f64 {
    let radius = support_radius(q);
    // Seed one panel per half-oscillation so refinement starts near the
    // structure.
    let panels = (2 * q + 4).max(8);
    let breaks: Vec<f64> = (1..panels)
        .map(|j| -radius + 2.0 * radius * j as f64 / panels as f64)
        .collect();
    let mut f = |x: f64| hermite_eval(q, x).abs();
    integrate_1d_split(&mut f, -radius, radius, &breaks, cfg)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// One row of the L1-bound verification table.
#[derive(Debug, Clone, Copy)]
pub struct L1BoundRow {
    pub q: usize,
    pub l1_norm: f64,
    /// sqrt(4 pi (q+1)).
    pub bound: f64,
    pub holds: bool,
}

/// Verifies the L1 bound ||phi_q||_1 <= sqrt(4 pi (q+1)) numerically for
/// every q up to `q_max`. A violation would indicate an implementation bug,
/// so it is reported as an error rather than a row flag alone.
pub fn l1_norm_bound_check(
    q_max: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<L1BoundRow>, DysonError> {
    let mut rows = Vec::with_capacity(q_max + 1);
    for q in 0..=q_max {
        let l1_norm = hermite_l1_norm(q, cfg);
        let bound = (4.0 * std::f64::consts::PI * (q as f64 + 1.0)).sqrt();
        let holds = l1_norm <= bound;
        if !holds {
            return Err(DysonError::BoundViolated(format!(
                "||phi_{q}||_1 = {l1_norm} exceeds sqrt(4 pi (q+1)) = {bound}"
            )));
        }
        rows.push(L1BoundRow {
            q,
            l1_norm,
            bound,
            holds,
        });
    }
    Ok(rows)
}

/// Free-propagator matrix element (e^{i t Delta} phi_p, phi_q).
///
/// Hermite functions are eigenvectors of the unitary Fourier transform with
/// eigenvalue (-i)^q, so the double position-space integral against the
/// oscillatory propagator kernel collapses to a single momentum integral
/// (-i)^{p-q} int e^{-i t k^2} phi_p(k) phi_q(k) dk, which has a Gaussian-
/// localized amplitude and a pure quadratic phase. Panels are sized to keep
/// at least ten rule points per local oscillation, so the fixed-order rule
/// resolves the phase at every t.
pub fn propagator_overlap(p: usize, q: usize, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(if p == q { 1.0 } else { 0.0 }, 0.0);
    }
    let radius = support_radius(p.max(q));
    // Total phase across the support is |t| radius^2; ten points per
    // 2 pi of phase with a 15-point rule.
    let cycles = t.abs() * radius * radius / (2.0 * std::f64::consts::PI);
    let rule_order = 15;
    let panels = ((cycles * 10.0 / rule_order as f64).ceil() as usize).max(8);
    let rule = GaussLegendre::new(rule_order);

    let mut real = 0.0;
    let mut imag = 0.0;
    let step = 2.0 * radius / panels as f64;
    for j in 0..panels {
        let a = -radius + j as f64 * step;
        let b = a + step;
        let mut fr = |k: f64| {
            let amp = hermite_eval(p, k) * hermite_eval(q, k);
            amp * (t * k * k).cos()
        };
        let mut fi = |k: f64| {
            let amp = hermite_eval(p, k) * hermite_eval(q, k);
            -amp * (t * k * k).sin()
        };
        real += rule.integrate(a, b, &mut fr);
        imag += rule.integrate(a, b, &mut fi);
    }
    // (-i)^{p-q} prefactor from the Fourier eigenvalues.
    let phase = match (p as i64 - q as i64).rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    phase * Complex64::new(real, imag)
}

/// Dispersive decay bound of the overlap,
/// ||phi_p||_1 ||phi_q||_1 / sqrt(4 pi |t|).
pub fn propagator_overlap_bound(l1_p: f64, l1_q: f64, t: f64) -> f64 {
    l1_p * l1_q / (4.0 * std::f64::consts::PI * t.abs()).sqrt()
}
