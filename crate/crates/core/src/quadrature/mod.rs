//! Deterministic adaptive quadrature and energy-shell reduction.
//!
//! Delta constraints are eliminated analytically (change of variables to
//! energy shells), never approximated by smoothed kernels. The adaptive
//! engine keeps a worst-first queue with a total order on (error, panel id),
//! so repeated runs subdivide in exactly the same sequence and results are
//! bit-stable.

mod gauss;

pub use gauss::GaussLegendre;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::model::{JunctionSpec, ReservoirState};

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error(
        "quadrature did not converge: value {value:.6e}, error estimate {error_estimate:.6e} \
         after {subdivisions} subdivisions"
    )]
    NonConvergent {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
    #[error("junction has no tunnelling kernel")]
    MissingKernel,
}

/// Tolerances and cutoff policy for all integrals.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    /// Relative tolerance on the accumulated error estimate.
    pub rel_tol: f64,
    /// Absolute floor below which refinement stops regardless of the value.
    pub abs_tol: f64,
    /// Fermi-tail constant C: energy integrals are truncated at
    /// max(mu_I, mu_II, 0) + C / min(beta_I, beta_II), beyond which the
    /// occupation factors are < e^{-C}.
    pub tail_constant: f64,
    /// Maximum number of panel splits before giving up.
    pub max_subdivisions: usize,
    /// Gauss-Legendre points per panel.
    pub rule_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            tail_constant: 40.0,
            max_subdivisions: 2000,
            rule_order: 15,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0) {
            return Err(format!("rel_tol {} must be > 0", self.rel_tol));
        }
        if self.rule_order < 2 {
            return Err(format!("rule_order {} must be >= 2", self.rule_order));
        }
        Ok(())
    }

    fn with_tolerance_factor(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.rel_tol *= factor;
        out.abs_tol *= factor;
        out
    }
}

/// Converged integral value with its accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

impl QuadResult {
    fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            subdivisions: self.subdivisions,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    id: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Max-heap: largest error first; ties resolved by smaller id so the
    // subdivision order is a total order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn eval_panel<F: FnMut(f64) -> f64>(
    f: &mut F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    id: u64,
) -> Panel {
    let whole = rule.integrate(a, b, f);
    let mid = 0.5 * (a + b);
    let refined = rule.integrate(a, mid, f) + rule.integrate(mid, b, f);
    Panel {
        a,
        b,
        value: refined,
        err: (refined - whole).abs(),
        id,
    }
}

/// Adaptive Gauss-Legendre integration of `f` over [a, b].
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadratureError> {
    integrate_1d_split(&mut f, a, b, &[], cfg)
}

/// Adaptive integration with the initial panel set split at `breakpoints`
/// (integrand kinks, Fermi edges, scale hints). Breakpoints outside (a, b)
/// are ignored.
pub fn integrate_1d_split<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadratureError> {
    assert!(a <= b, "integration bounds out of order: [{a}, {b}]");
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let rule = GaussLegendre::new(cfg.rule_order);

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges.insert(0, a);
    edges.push(b);

    let mut next_id: u64 = 0;
    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        let panel = eval_panel(f, &rule, w[0], w[1], next_id);
        next_id += 1;
        if !panel.value.is_finite() || !panel.err.is_finite() {
            return Err(QuadratureError::NonConvergent {
                value: panel.value,
                error_estimate: panel.err,
                subdivisions: 0,
            });
        }
        heap.push(panel);
    }

    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.err).sum();
    let mut splits = 0usize;

    while total_err > cfg.rel_tol * total.abs() + cfg.abs_tol {
        if splits >= cfg.max_subdivisions {
            let (value, error_estimate) = drain_totals(heap);
            return Err(QuadratureError::NonConvergent {
                value,
                error_estimate,
                subdivisions: splits,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.err <= 0.0 {
            heap.push(worst);
            break;
        }
        total -= worst.value;
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; cannot refine further.
            let mut stuck = worst;
            stuck.err = 0.0;
            total += stuck.value;
            heap.push(stuck);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let child = eval_panel(f, &rule, lo, hi, next_id);
            next_id += 1;
            if !child.value.is_finite() || !child.err.is_finite() {
                return Err(QuadratureError::NonConvergent {
                    value: child.value,
                    error_estimate: child.err,
                    subdivisions: splits,
                });
            }
            total += child.value;
            total_err += child.err;
            heap.push(child);
        }
        splits += 1;
    }

    let (value, error_estimate) = drain_totals(heap);
    Ok(QuadResult {
        value,
        error_estimate,
        subdivisions: splits,
    })
}

/// Final sums are taken in interval order, independent of heap layout.
fn drain_totals(heap: BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a).then_with(|| p.id.cmp(&q.id)));
    let value = panels.iter().map(|p| p.value).sum();
    let err = panels.iter().map(|p| p.err).sum();
    (value, err)
}

/// Surface area of the unit (d-1)-sphere, S_{d-1} = 2 pi^{d/2} / Gamma(d/2),
/// evaluated in closed form for integer d.
pub fn sphere_area(d: u32) -> f64 {
    assert!(d >= 1, "dimension must be >= 1");
    // Gamma(d/2) by upward recursion from Gamma(1) or Gamma(1/2).
    let (mut x, mut gamma) = if d % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5, std::f64::consts::PI.sqrt())
    };
    let target = f64::from(d) / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(target) / gamma
}

/// Upper energy cutoff for Fermi-weighted integrals:
/// max(mu_I, mu_II, 0) + C / min(beta_I, beta_II). Occupation differences
/// beyond it are smaller than e^{-C}. With both reservoirs at T = 0 the
/// cutoff is the larger chemical potential (sharp Fermi seas).
pub fn fermi_energy_cutoff(
    res_i: &ReservoirState,
    res_ii: &ReservoirState,
    cfg: &QuadratureConfig,
) -> f64 {
    let mu_max = res_i.mu.max(res_ii.mu).max(0.0);
    let beta_min = res_i.beta.min(res_ii.beta);
    if beta_min.is_infinite() {
        mu_max
    } else {
        mu_max + cfg.tail_constant / beta_min
    }
}

/// Seed points handed to the adaptive engine: the two Fermi edges (kinks at
/// T = 0, sharp windows at small T) plus a geometric ladder that lets
/// refinement find structure at scales far below the cutoff.
fn shell_breakpoints(spec_mus: [f64; 2], e_max: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = spec_mus
        .iter()
        .copied()
        .filter(|mu| *mu > 0.0 && *mu < e_max)
        .collect();
    let mut s = e_max;
    for _ in 0..16 {
        s *= 0.5;
        breaks.push(s);
    }
    breaks
}

/// The delta-constrained two-momentum integral
/// `int dk dl delta(|k|^2 - |l|^2) u(|k|, |l|) F(|k|^2)` over R^d x R^d,
/// reduced to one energy axis:
/// (S_{d-1}^2 / 4) * int_0^{E_max} E^{d-2} u(sqrt E, sqrt E) F(E) dE.
///
/// Reduction: each d-dimensional integral collapses to its radial part with
/// weight S_{d-1} k^{d-1}; the delta then removes the second radius with
/// Jacobian 1/(2l), and the substitution E = k^2 contributes another
/// 1/(2 sqrt E). The cutoff follows the Fermi-tail policy, so `F` is
/// expected to carry occupation factors of the junction's reservoirs.
pub fn shell_integral<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &JunctionSpec,
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadratureError> {
    let kernel = spec
        .tunnelling_kernel
        .as_ref()
        .ok_or(QuadratureError::MissingKernel)?;
    let e_max = fermi_energy_cutoff(&spec.reservoir_i, &spec.reservoir_ii, cfg);
    if e_max <= 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let power = spec.dimension as i32 - 2;
    let area = sphere_area(spec.dimension);
    let prefactor = area * area / 4.0;
    let breaks = shell_breakpoints([spec.reservoir_i.mu, spec.reservoir_ii.mu], e_max);
    let mut integrand = |e: f64| e.powi(power) * kernel.diagonal(e) * f(e);
    integrate_1d_split(&mut integrand, 0.0, e_max, &breaks, cfg).map(|r| r.scaled(prefactor))
}

/// Adaptive tensor-product integral of f(E1, E2, F1) over
/// [0, E_max]^2 x [0, min(E1 + E2, E_max)].
///
/// Axes are nested (F1 innermost) with proportionally tighter inner
/// tolerances; panel ordering within each axis is the deterministic adaptive
/// order, so results are bit-stable across runs. The reported error estimate
/// is the outer axis's accumulated estimate.
pub fn integrate_3d_simplex<F>(
    f: F,
    e_max: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadratureError>
where
    F: Fn(f64, f64, f64) -> f64,
{
    assert!(e_max >= 0.0);
    if e_max == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let mid_cfg = cfg.with_tolerance_factor(0.5);
    let inner_cfg = cfg.with_tolerance_factor(0.25);
    let failure: std::cell::RefCell<Option<QuadratureError>> = std::cell::RefCell::new(None);

    let record = |err: QuadratureError| {
        let mut slot = failure.borrow_mut();
        if slot.is_none() {
            *slot = Some(err);
        }
        0.0
    };

    let mut outer = |e1: f64| {
        let mut middle = |e2: f64| {
            let top = (e1 + e2).min(e_max);
            let mut inner = |f1: f64| f(e1, e2, f1);
            match integrate_1d_split(&mut inner, 0.0, top, breakpoints, &inner_cfg) {
                Ok(r) => r.value,
                Err(e) => record(e),
            }
        };
        match integrate_1d_split(&mut middle, 0.0, e_max, breakpoints, &mid_cfg) {
            Ok(r) => r.value,
            Err(e) => record(e),
        }
    };

    let result = integrate_1d_split(&mut outer, 0.0, e_max, breakpoints, cfg);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    result
}
