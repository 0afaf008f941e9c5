//! Weighted interaction norms: per-N-body Sobolev norms combined with the
//! N 2^{(d+2)N} weights.

use crate::model::{RadialFormFactor, RadialProfile};
use crate::quadrature::{integrate_1d_split, QuadratureConfig};

use super::hermite::hermite_values;
use super::DysonError;

/// One N-body contribution to the interaction norm.
#[derive(Debug, Clone, Copy)]
pub struct BodyTermNorm {
    pub n_body: u32,
    /// The 2dN-variate weighted Sobolev norm of the kernel.
    pub sobolev: f64,
    /// N 2^{(d+2)N} * sobolev.
    pub weighted: f64,
}

/// The interaction norm sum_N N 2^{(d+2)N} ||w_N||'_{2dN} and its breakdown.
#[derive(Debug, Clone)]
pub struct InteractionNorm {
    pub dimension: u32,
    pub contributions: Vec<BodyTermNorm>,
    pub total: f64,
}

fn body_weight(d: u32, n: u32) -> f64 {
    f64::from(n) * 2.0f64.powi(((d + 2) * n) as i32)
}

/// Assembles an interaction norm from externally supplied per-N Sobolev
/// norms. This is the entry point for N >= 2 terms, whose 2dN-variate
/// expansions are impractical to project here.
pub fn interaction_norm_from_parts(d: u32, parts: &[(u32, f64)]) -> InteractionNorm {
    let contributions: Vec<BodyTermNorm> = parts
        .iter()
        .map(|&(n, sobolev)| BodyTermNorm {
            n_body: n,
            sobolev,
            weighted: body_weight(d, n) * sobolev,
        })
        .collect();
    let total = contributions.iter().map(|c| c.weighted).sum();
    InteractionNorm {
        dimension: d,
        contributions,
        total,
    }
}

/// Hermite coefficients of the even profile g(x) = exp(-x^2 / (2 w)),
/// c_q = int phi_q g, by adaptive quadrature up to `q_max`.
fn gaussian_profile_coefficients(
    width: f64,
    q_max: u32,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>, DysonError> {
    let radius = (2.0 * f64::from(q_max) + 1.0).sqrt() + 10.0 * width.sqrt().max(1.0);
    let mut coeffs = Vec::with_capacity(q_max as usize + 1);
    for q in 0..=q_max {
        if q % 2 == 1 {
            coeffs.push(0.0);
            continue;
        }
        let mut f =
            |x: f64| hermite_values(q as usize, x)[q as usize] * (-x * x / (2.0 * width)).exp();
        let breaks: Vec<f64> = (1..32)
            .map(|j| -radius + 2.0 * radius * f64::from(j) / 32.0)
            .collect();
        let c = integrate_1d_split(&mut f, -radius, radius, &breaks, cfg)
            .map_err(DysonError::Quadrature)?
            .value;
        coeffs.push(c);
    }
    Ok(coeffs)
}

/// The one-body interaction norm of a tunnelling kernel, by projection of
/// its position-space kernel onto the product Hermite basis.
///
/// Supported for the gaussian family, whose momentum amplitude
/// sqrt(u) = sqrt(A) exp(-w(|k|^2+|l|^2)/2) factorizes per axis and has the
/// closed-form position profile w^{-1/2} exp(-x^2/(2w)) per axis. The
/// 2d-variate norm is then the product of 2d identical one-axis norms, so
/// no multi-index explosion occurs. The truncation tail is estimated from
/// the decay of the weighted coefficient series; a relative tail above 1%
/// is rejected.
pub fn interaction_norm(
    kernel: &RadialFormFactor,
    d: u32,
    truncation: u32,
    cfg: &QuadratureConfig,
) -> Result<InteractionNorm, DysonError> {
    let RadialProfile::Gaussian { width } = &kernel.profile else {
        return Err(DysonError::UnsupportedKernel(
            "interaction norms are implemented for the gaussian family; supply per-N norms \
             via interaction_norm_from_parts for other kernels"
                .into(),
        ));
    };
    if kernel.amplitude == 0.0 {
        return Ok(interaction_norm_from_parts(d, &[(1, 0.0)]));
    }
    let width = *width;
    let coeffs = gaussian_profile_coefficients(width, truncation, cfg)?;

    // Per-axis weighted sum s = 2^{-3} sum c_q^2 (2q+2)^3 and its tail.
    let weighted: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(q, c)| 0.125 * c * c * (2.0 * q as f64 + 2.0).powi(3))
        .collect();
    let s: f64 = weighted.iter().sum();
    let head: f64 = weighted[..weighted.len().saturating_sub(4)].iter().sum();
    let tail = s - head;
    if !(tail <= 0.01 * s) {
        return Err(DysonError::TruncationInsufficient {
            tail_fraction: tail / s,
        });
    }

    // Momentum amplitude sqrt(A) spread over the position kernel, one
    // factor w^{-1/2} per position axis from the inverse transform.
    let prefactor = kernel.amplitude.sqrt() * width.powf(-f64::from(d));
    let axes = 2 * d;
    // Product structure: the 2d-variate norm is the product of one-axis
    // norms, i.e. s^{axes/2} since s is a squared per-axis norm.
    let sobolev = prefactor * s.powf(f64::from(axes) / 2.0);
    Ok(interaction_norm_from_parts(d, &[(1, sobolev)]))
}
