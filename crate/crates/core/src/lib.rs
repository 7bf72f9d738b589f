//! Classical simulation of QSVT-based modular flow.
//!
//! Polynomial transforms of a block-encoded density matrix are realized by
//! matrix Clenshaw recurrences, so the number of recurrence steps is the
//! number of block-encoding queries an ideal circuit would make. Every
//! approximate result can be checked against an exact eigendecomposition.

pub mod chebyshev;
pub mod dct;
pub mod encoding;
pub mod error;
pub mod estimators;
pub mod flow;
pub mod matfun;
pub mod mh_poly;
pub mod random;
pub mod special;

pub use chebyshev::{ChebyshevSeries, Parity};
pub use encoding::{BlockEncoding, DensityMatrix, PureState};
pub use error::{DensityViolation, Error, Result};
pub use flow::{FlowResult, QueryLedger};
pub use matfun::{ComplexMatrix, SpectralData};
pub use mh_poly::{NormalizationInfo, PolySpec};
