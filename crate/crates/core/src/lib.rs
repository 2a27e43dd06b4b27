//! Exact weight-enumerator machinery for quantum codes whose parties may
//! have different local dimensions.
//!
//! Subsystems are graded by the *multiset* of local dimensions they carry
//! rather than by their party count, which makes the classical enumerator
//! toolbox work across mixed-radix systems:
//!
//! * [`multiset`] — dimension multisets, sub-multiset enumeration and the
//!   superset-counting coefficients that relate enumerator families.
//! * [`hilbert`] — dense states and operators, the shift/clock error basis,
//!   partial traces and Bloch-expansion reconstruction.
//! * [`enumerators`] — brute-force Shor-Laflamme, unitary, shadow and
//!   reduced-purity enumerators, plus the Knill-Laflamme code check.
//! * [`transforms`] — generalized Krawtchouk kernels: the exact linear maps
//!   between enumerator families and the MacWilliams polynomial identity.
//! * [`bounds`] — Hamming, Singleton and Scott-type bounds on code sizes and
//!   absolutely maximally entangled (AME) states.
//! * [`lp`] — exact rational feasibility LP over enumerator profiles, with
//!   Farkas infeasibility certificates.
//! * [`ame`] — closed-form AME enumerators, existence heatmap scans and the
//!   tripartite grid construction of heterogeneous AME states.
//! * [`data`] — bundled reference states, their published enumerator tables
//!   and heatmap annotations.
//!
//! Enumerator coefficients are exact `BigRational` values end to end; floats
//! appear only inside the Hilbert-space layer and are snapped back to
//! rationals with a bounded-denominator continued-fraction step that fails
//! loudly instead of guessing.

pub mod ame;
pub mod bounds;
pub mod data;
pub mod enumerators;
pub mod error;
pub mod hilbert;
pub mod lp;
pub mod multiset;
pub mod rational;
pub mod transforms;

pub use error::{CoreError, CoreResult};
pub use multiset::{DimensionMultiset, DimensionSpec};
pub use rational::Rational;
