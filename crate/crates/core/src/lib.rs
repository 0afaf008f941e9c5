//! Steady-state transport observables for junctions between two free-fermion
//! reservoirs, together with the convergence machinery that certifies the
//! perturbative construction of the stationary state.
//!
//! The crate is organized around five subsystems:
//!
//! * [`model`] — reservoir states, tunnelling/pair form factors, junction
//!   specifications, and the Fermi-Dirac occupation function.
//! * [`quadrature`] — energy-shell reduction of delta-constrained momentum
//!   integrals and deterministic adaptive Gauss-Legendre quadrature with
//!   Fermi-tail cutoffs.
//! * [`transport`] — lowest-order particle/energy currents, entropy
//!   production, junction resistance (exact, zero-temperature, and
//!   low-temperature expansion), Ohm's-law and Onsager reciprocity checks,
//!   and the thermal-junction energy flow.
//! * [`dyson`] — Hermite-basis machinery, weighted Sobolev interaction
//!   norms, labeled-tree combinatorics, and the convergence certificate for
//!   the Dyson series of the scattering endomorphism.
//! * [`oracle`] — exact finite-lattice dynamics of a quadratic fermion
//!   junction at the one-particle level, used as a non-perturbative check of
//!   current definitions, conservation laws, and entropy-production signs.
//!
//! Units: ħ = 1 and particle mass M = 1/2 throughout, so the dispersion
//! relation is ω(k) = |k|². Currents are signed as gains of reservoir I.

pub mod dyson;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod transport;

pub use model::{fermi, fermi_diff, fermi_window, JunctionSpec, RadialFormFactor, ReservoirState};
pub use quadrature::QuadratureConfig;
