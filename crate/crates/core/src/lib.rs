//! Burst-erasure streaming codes over GF(2^d) built from exponent matrices,
//! with the information-debt model, an encoder/decoder pair, exhaustive
//! verification and a channel simulator.

mod gf2poly;

pub mod codec;
pub mod constructions;
pub mod debt;
pub mod exponents;
pub mod field;
pub mod linalg;
pub mod simulate;
pub mod verify;

pub use codec::{Decoder, DecoderEvent, Encoder};
pub use constructions::{CodeParams, ConstructionKind, GeneratorSpec};
pub use debt::{DebtState, PatternClass, ViolationKind, WindowPattern};
pub use exponents::{DominanceReport, Exp, ExponentMatrix};
pub use field::{FieldCtx, FieldElement, FieldError};
pub use linalg::{FieldMatrix, LinalgError};
