//! Numerical laboratory for cohomologically trivial SO(3) pairs
//! (connection `A`, Higgs field `Phi`) on a conformally flat 2-torus.
//!
//! Pairs are produced by Backlund transformations starting from the trivial
//! pair and certified by several independent diagnostics: the transport
//! equation `X(u) + (A + Phi) u = 0` in Fourier-mode calculus, the mode
//! recurrence, an energy identity, the `(f, Psi)` correspondence equations,
//! and ODE transport of the cocycle along geodesics.

pub mod backlund;
pub mod cocycle;
pub mod error;
pub mod io;
pub mod lie3;
pub mod random;
pub mod smfield;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
