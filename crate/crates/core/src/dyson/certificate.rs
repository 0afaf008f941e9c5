//! The convergence certificate for the Dyson series of the scattering
//! endomorphism, built from the weighted interaction norm and the
//! time-decay constant 8 pi d / (d - 2).

use crate::quadrature::{integrate_1d_split, QuadratureConfig};

use super::{DysonError, InteractionNorm};

/// Closed form of int_{-inf}^{inf} (1 AND 4 pi / |t|)^{d/2} dt
/// = 8 pi d / (d - 2). Diverges for d <= 2, which is exactly the
/// dimensional restriction of the convergence argument.
pub fn time_decay_constant(d: u32) -> Result<f64, DysonError> {
    if d < 3 {
        return Err(DysonError::DimensionTooLow(d));
    }
    let df = f64::from(d);
    Ok(8.0 * std::f64::consts::PI * df / (df - 2.0))
}

/// Quadrature verification of the defining integral: the plateau |t| <= 4 pi
/// and a long numerical stretch of the power tail, plus the closed-form
/// remainder of the tail beyond the numerical window.
pub fn time_decay_constant_quadrature(d: u32, cfg: &QuadratureConfig) -> Result<f64, DysonError> {
    if d < 3 {
        return Err(DysonError::DimensionTooLow(d));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    let half_d = f64::from(d) / 2.0;
    let t_big = four_pi * 1e6;
    let mut f = |t: f64| {
        if t <= four_pi {
            1.0
        } else {
            (four_pi / t).powf(half_d)
        }
    };
    let breaks: Vec<f64> = (0..24).map(|j| four_pi * 2.0f64.powi(j)).collect();
    let window = integrate_1d_split(&mut f, 0.0, t_big, &breaks, cfg)
        .map_err(DysonError::Quadrature)?
        .value;
    // Remainder of the power tail: int_T^inf (4 pi / t)^{d/2} dt.
    let tail = four_pi.powf(half_d) * t_big.powf(1.0 - half_d) / (half_d - 1.0);
    Ok(2.0 * (window + tail))
}

/// Convergence certificate: x = (8 pi d / (d-2)) ||W||'; the Dyson series
/// for the scattering endomorphism converges when x < 1, with m-th term
/// bounded by x^m / m (times the norm of the observable).
#[derive(Debug, Clone)]
pub struct Certificate {
    pub dimension: u32,
    /// Contraction parameter x = (8 pi d / (d-2)) * ||W||'.
    pub x: f64,
    pub converges: bool,
    /// The interaction norm that produced x.
    pub interaction_norm: f64,
}

impl Certificate {
    /// Tail of the series bound beyond order m0:
    /// sum_{m > m0} x^m / m = -ln(1-x) - sum_{m <= m0} x^m / m.
    /// Undefined (None) when the certificate hypothesis x < 1 fails.
    pub fn tail_bound(&self, m0: u32) -> Option<f64> {
        if !self.converges {
            return None;
        }
        let mut partial = 0.0;
        let mut xm = 1.0;
        for m in 1..=m0 {
            xm *= self.x;
            partial += xm / f64::from(m);
        }
        Some(-(1.0 - self.x).ln() - partial)
    }

    /// Bound on the m-th order term for an observable of weighted norm
    /// `a_norm`: (1/m) x^m a_norm.
    pub fn term_bound(&self, m: u32, a_norm: f64) -> f64 {
        self.x.powi(m as i32) / f64::from(m.max(1)) * a_norm
    }
}

/// Evaluates the certificate for an interaction norm. Fails below d = 3
/// where the time integral diverges.
pub fn certify(norm: &InteractionNorm) -> Result<Certificate, DysonError> {
    let constant = time_decay_constant(norm.dimension)?;
    let x = constant * norm.total;
    Ok(Certificate {
        dimension: norm.dimension,
        x,
        converges: x < 1.0,
        interaction_norm: norm.total,
    })
}

/// Bound of the m-th Dyson term,
/// (1/m) (8 pi d / (d-2))^m ||a||' (||W||')^m.
pub fn theorem_bound(m: u32, w_norm: f64, a_norm: f64, d: u32) -> Result<f64, DysonError> {
    let constant = time_decay_constant(d)?;
    Ok((constant * w_norm).powi(m as i32) / f64::from(m.max(1)) * a_norm)
}
