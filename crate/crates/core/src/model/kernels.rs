//! Tunnelling and pair form factors.
//!
//! Kernels store |w|^2 directly (never the complex amplitude): every
//! supported observable consumes only the modulus squared, so no phase
//! convention is needed. All built-in families are products of a single
//! radial profile, one factor per momentum argument, which makes the
//! hermiticity symmetry u(k,l) = u(l,k) exact by construction and ships
//! analytic first/second derivatives of the on-shell diagonal (finite
//! differences of interpolated data are too noisy for the low-temperature
//! resistance expansion).

use std::path::Path;

use super::spline::CubicSpline;
use super::ModelError;

/// One radial factor of a kernel, parametrized by energy: `profile_e(E)`
/// evaluates p(k) at k = sqrt(E). Working in the energy variable keeps the
/// on-shell diagonal and its derivatives free of square roots for the
/// analytic families.
#[derive(Debug, Clone)]
pub enum RadialProfile {
    /// p(k) = exp(-width k^2)
    Gaussian { width: f64 },
    /// p(k) = (k^2 + scale^2)^{-power}
    Lorentzian { scale: f64, power: i32 },
    /// p(k) = (1 - (k/k_max)^2)_+^power ; power = 0 is the sharp cutoff
    PolyCutoff { k_max: f64, power: i32 },
    /// Cubic-spline table of (k, p(k)) samples; zero beyond the last knot.
    Table(CubicSpline),
}

impl RadialProfile {
    /// p(sqrt(E)).
    pub fn eval_e(&self, e: f64) -> f64 {
        match self {
            Self::Gaussian { width } => (-width * e).exp(),
            Self::Lorentzian { scale, power } => (e + scale * scale).powi(-power),
            Self::PolyCutoff { k_max, power } => {
                let s = 1.0 - e / (k_max * k_max);
                if s <= 0.0 {
                    if *power == 0 && s == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    s.powi(*power)
                }
            }
            Self::Table(spline) => spline.eval(e.max(0.0).sqrt()).max(0.0),
        }
    }

    /// d/dE of `eval_e`.
    pub fn deriv_e(&self, e: f64) -> f64 {
        match self {
            Self::Gaussian { width } => -width * (-width * e).exp(),
            Self::Lorentzian { scale, power } => {
                -f64::from(*power) * (e + scale * scale).powi(-power - 1)
            }
            Self::PolyCutoff { k_max, power } => {
                let km2 = k_max * k_max;
                let s = 1.0 - e / km2;
                if s <= 0.0 || *power == 0 {
                    0.0
                } else {
                    -f64::from(*power) / km2 * s.powi(power - 1)
                }
            }
            Self::Table(spline) => {
                let k = e.max(0.0).sqrt();
                if k == 0.0 {
                    0.0
                } else {
                    spline.deriv(k) / (2.0 * k)
                }
            }
        }
    }

    /// d^2/dE^2 of `eval_e`.
    pub fn second_deriv_e(&self, e: f64) -> f64 {
        match self {
            Self::Gaussian { width } => width * width * (-width * e).exp(),
            Self::Lorentzian { scale, power } => {
                let p = f64::from(*power);
                p * (p + 1.0) * (e + scale * scale).powi(-power - 2)
            }
            Self::PolyCutoff { k_max, power } => {
                let km2 = k_max * k_max;
                let s = 1.0 - e / km2;
                if s <= 0.0 || *power < 2 {
                    0.0
                } else {
                    f64::from(*power) * f64::from(*power - 1) / (km2 * km2) * s.powi(power - 2)
                }
            }
            Self::Table(spline) => {
                let k = e.max(0.0).sqrt();
                if k == 0.0 {
                    0.0
                } else {
                    spline.second_deriv(k) / (4.0 * e) - spline.deriv(k) / (4.0 * e * k)
                }
            }
        }
    }
}

/// |w_1((-k, II), (l, I))|^2 as a function of the two radial momenta:
/// u(k, l) = amplitude * p(k) p(l).
#[derive(Debug, Clone)]
pub struct RadialFormFactor {
    pub amplitude: f64,
    pub profile: RadialProfile,
}

impl RadialFormFactor {
    /// u(k,l) = amplitude * exp(-width (k^2 + l^2)).
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            amplitude,
            profile: RadialProfile::Gaussian { width },
        }
    }

    /// u(k,l) = amplitude / ((k^2 + scale^2)(l^2 + scale^2))^power.
    pub fn lorentzian(amplitude: f64, scale: f64, power: i32) -> Self {
        Self {
            amplitude,
            profile: RadialProfile::Lorentzian { scale, power },
        }
    }

    /// Compactly supported polynomial cutoff; power = 0 gives the sharp
    /// indicator of [0, k_max]^2.
    pub fn poly_cutoff(amplitude: f64, k_max: f64, power: i32) -> Self {
        Self {
            amplitude,
            profile: RadialProfile::PolyCutoff { k_max, power },
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(ModelError::BadKernelParameter(format!(
                "amplitude {} must be finite and nonnegative",
                self.amplitude
            )));
        }
        match &self.profile {
            RadialProfile::Gaussian { width } if !(*width > 0.0) => Err(
                ModelError::BadKernelParameter(format!("gaussian width {width} must be > 0")),
            ),
            RadialProfile::Lorentzian { scale, power } if !(*scale > 0.0) || *power < 1 => {
                Err(ModelError::BadKernelParameter(format!(
                    "lorentzian needs scale > 0 and power >= 1, got scale {scale}, power {power}"
                )))
            }
            RadialProfile::PolyCutoff { k_max, power } if !(*k_max > 0.0) || *power < 0 => {
                Err(ModelError::BadKernelParameter(format!(
                    "poly_cutoff needs k_max > 0 and power >= 0, got k_max {k_max}, power {power}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Loads a table kernel from a two-column CSV of (k, value) samples with
    /// strictly increasing k and values >= 0. A non-numeric first line is
    /// treated as a header. The product form u(k,l) = p(k)p(l) makes the
    /// loaded kernel symmetric automatically.
    pub fn table_from_csv(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::BadTable(format!("{}: {e}", path.display())))?;
        Self::table_from_str(&text)
    }

    /// Same as [`Self::table_from_csv`] but from in-memory text.
    pub fn table_from_str(text: &str) -> Result<Self, ModelError> {
        let mut ks = Vec::new();
        let mut vs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',');
            let a = parts.next().map(str::trim);
            let b = parts.next().map(str::trim);
            if parts.next().is_some() {
                return Err(ModelError::BadTable(format!(
                    "line {}: expected exactly two columns",
                    lineno + 1
                )));
            }
            match (a.and_then(|s| s.parse::<f64>().ok()), b.and_then(|s| s.parse::<f64>().ok())) {
                (Some(k), Some(v)) => {
                    if !(v >= 0.0) {
                        return Err(ModelError::BadTable(format!(
                            "line {}: value {v} must be >= 0",
                            lineno + 1
                        )));
                    }
                    ks.push(k);
                    vs.push(v);
                }
                _ if ks.is_empty() => continue, // header line
                _ => {
                    return Err(ModelError::BadTable(format!(
                        "line {}: cannot parse '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        let spline = CubicSpline::new(ks, vs)?;
        if spline.last_value() != 0.0 {
            log::warn!(
                "table kernel does not decay to zero at its last knot; it is truncated there"
            );
        }
        Ok(Self {
            amplitude: 1.0,
            profile: RadialProfile::Table(spline),
        })
    }

    /// u(k, l).
    pub fn eval(&self, k: f64, l: f64) -> f64 {
        self.amplitude * self.profile.eval_e(k * k) * self.profile.eval_e(l * l)
    }

    /// On-shell diagonal v(E) = u(sqrt(E), sqrt(E)).
    pub fn diagonal(&self, e: f64) -> f64 {
        let q = self.profile.eval_e(e);
        self.amplitude * q * q
    }

    /// dv/dE.
    pub fn diagonal_d1(&self, e: f64) -> f64 {
        2.0 * self.amplitude * self.profile.eval_e(e) * self.profile.deriv_e(e)
    }

    /// d^2 v/dE^2.
    pub fn diagonal_d2(&self, e: f64) -> f64 {
        let q = self.profile.eval_e(e);
        let q1 = self.profile.deriv_e(e);
        let q2 = self.profile.second_deriv_e(e);
        2.0 * self.amplitude * (q1 * q1 + q * q2)
    }

    /// Numerically probes whether k^{2d-3} u(k,k) decays integrably at large
    /// k. Profiles that vanish beyond a finite scale pass trivially; for the
    /// rest the local log-log slope at geometrically growing k must drop
    /// below -1.1.
    pub fn shell_weight_integrable(&self, dimension: u32) -> bool {
        let exponent = 2.0 * f64::from(dimension) - 3.0;
        let weight = |k: f64| k.powf(exponent) * self.diagonal(k * k);
        let mut k = 64.0;
        loop {
            let w0 = weight(k);
            let w1 = weight(2.0 * k);
            if w1 == 0.0 || w0 == 0.0 {
                return true;
            }
            let slope = (w1 / w0).ln() / std::f64::consts::LN_2;
            if slope <= -1.1 {
                return true;
            }
            k *= 2.0;
            if k > 1e6 {
                return false;
            }
        }
    }
}

/// |w_2(-k1, -k2, l1, l2)|^2 as a product radial function of the four
/// moduli: b = amplitude * p(k1) p(k2) p(l1) p(l2). The product form is
/// fully symmetric, which covers the hermiticity constraint on the
/// total-energy shell and the pairwise-swap symmetry used by the
/// thermal-junction flow.
#[derive(Debug, Clone)]
pub struct PairFormFactor {
    pub amplitude: f64,
    pub profile: RadialProfile,
}

impl PairFormFactor {
    /// b = amplitude * exp(-width (k1^2 + k2^2 + l1^2 + l2^2)).
    pub fn product_gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            amplitude,
            profile: RadialProfile::Gaussian { width },
        }
    }

    /// b(k1, k2, l1, l2).
    pub fn eval(&self, k1: f64, k2: f64, l1: f64, l2: f64) -> f64 {
        self.eval_energies(k1 * k1, k2 * k2, l1 * l1, l2 * l2)
    }

    /// b evaluated directly on the four energies |k_i|^2, |l_i|^2.
    pub fn eval_energies(&self, e1: f64, e2: f64, f1: f64, f2: f64) -> f64 {
        self.amplitude
            * self.profile.eval_e(e1)
            * self.profile.eval_e(e2)
            * self.profile.eval_e(f1)
            * self.profile.eval_e(f2)
    }
}
