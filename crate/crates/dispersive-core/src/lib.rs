//! Effective Hamiltonians for dispersive light-matter models.
//!
//! This crate mechanizes a transition-operator perturbation theory: given an
//! interaction model (matter levels, bosonic modes, one-photon coupling
//! operators), it enumerates the order-`n` operator strings that survive the
//! matter-overlap constraints, evaluates their time-dependent weights in
//! closed form, applies a time-averaged adiabatic elimination over a
//! coarse-graining window `T`, and assembles the retained terms into an
//! effective Hamiltonian. Every closed-form path is paired with a
//! brute-force oracle (nested quadrature, dense diagonalization, exact state
//! propagation) in [`oracle`] so results can be cross-checked numerically.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI live
//! in the companion `dispersive-cli` crate.
//!
//! ```
//! use dispersive_core::elimination::{assemble_effective, EliminationPolicy};
//! use dispersive_core::model::{build_preset, Params};
//!
//! let params: Params = [("omega_e", 1.0), ("omega_c", 0.8), ("g", 0.02)]
//!     .iter()
//!     .map(|(k, v)| (k.to_string(), *v))
//!     .collect();
//! let model = build_preset("jc", &params).unwrap();
//! let policy = EliminationPolicy::for_model(&model, 1e3);
//! let h = assemble_effective(&model, 1, &policy).unwrap();
//! // Photon-number-dependent level shift g²/δ on the excited level.
//! let number = dispersive_core::algebra::NormalMonomial {
//!     creators: vec![0],
//!     annihilators: vec![0],
//! };
//! let chi = h.coeff_of(1, 1, &number).unwrap().eval(0.0);
//! assert!((chi.re - 2e-3).abs() < 1e-12);
//! ```

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod diagrams;
pub mod elimination;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod util;
pub mod weights;

pub use num_complex::Complex64 as C64;
