//! Exact closed-form dynamics of the linearly driven quantum harmonic
//! oscillator, together with two brute-force oracles (a Crank–Nicolson grid
//! integrator and adaptive overlap quadrature) that check every formula.
//!
//! The Hamiltonian is `p²/2m + mω²x²/2 + x·j(t)` with a real force `j(t)` of
//! compact support. Everything the exact solution needs is carried by the
//! running pulse integrals `F`, `G`, `H` (see [`pulse::PulseIntegrals`]).
//!
//! Conventions used throughout:
//!
//! * amplitudes `a[n][m]` are indexed final state first, initial state second;
//! * the complex displacement is `r = (F + iG)/(√2 αħ)`;
//! * reported amplitudes have the free eigenphase `exp(-iωt(n + ½))` removed,
//!   which leaves the global phase `exp(-iH/(α²ħ²))`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod exec;
pub mod oracle;
pub mod oscillator;
pub mod pulse;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use exec::Execution;
pub use oscillator::{BasisIndex, OscillatorParams, Truncation};
pub use pulse::{Displacement, Pulse, PulseIntegrals};
