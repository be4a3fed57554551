//! Finite fields, truncated unramified rings and cyclotomic integers.

mod cyclotomic;
mod field;
mod polymod;
mod zq;

pub use cyclotomic::CyclotomicInt;
pub use field::{is_irreducible, Fe, FieldDesc, FieldEmbedding};
pub use zq::{dual_basis, teichmuller, zp_inverse, DualBasis, RingEmbedding, ZqElement, ZqRing, MAX_MODULUS};
