//! Fixed-point certificates and Picard pipelines on quasi-ordered metric spaces.
//!
//! The crate models a quasi-ordered metric space `(X, d, <=)` together with a
//! selfmap `T`, and several kinds of contraction evidence for `T`:
//!
//! * explicit comparison functions `phi` / `psi` ([`scalar`]),
//! * six-variable implicit certificates `F(M(x, y)) <= 0` ([`implicit`]),
//! * generalized `(S, P)` certificates `F(M(x, y)) in P` ([`implicit::sp`]).
//!
//! Properties of certificates that quantify over sequences or limits are
//! checked by seeded samplers and reported as `sampled-pass`, never as proven.
//! Finite spaces carry exact rational distances; everything that can be
//! decided on them exhaustively is decided exactly ([`oracle`]).
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and the
//! fuzzing harness live in the `picardlab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod certificate;
pub mod check;
pub mod engine;
pub mod error;
pub mod expr;
pub mod gap;
pub mod implicit;
pub mod oracle;
pub mod rational;
pub mod scalar;
pub mod space;

pub use certificate::Certificate;
pub use check::{CheckConfig, CheckResult, GridConfig, PropertyReport, Verdict, Witness};
pub use engine::{OrbitTrace, PicardVerdict, PipelineConfig, TheoremTag};
pub use error::Error;
pub use implicit::{ImplicitF, Property};
pub use implicit::sp::SpCertificate;
pub use rational::Rational;
pub use scalar::ScalarFn;
pub use space::{FiniteSpace, IntervalSpace, MVector, OrderKind, Point, Selfmap, SpaceModel};
