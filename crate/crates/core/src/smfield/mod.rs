//! Fields on the unit tangent bundle stored by fiber Fourier modes, and the
//! connection/Higgs pairs acting on them.

pub mod field;
pub mod pair;

pub use field::{commutator, FourierField};
pub use pair::{gauge_trivializer, Connection, Higgs, Pair};
