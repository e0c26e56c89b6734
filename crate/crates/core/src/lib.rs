//! Core library for auditing and rebalancing template-based audio-visual QA
//! corpora.
//!
//! The crate is organized as a pipeline of pure modules:
//!
//! * [`model`] — domain types (templates, QA records, annotations, manifests).
//! * [`share`] — exact rational shares and half-up rounding helpers.
//! * [`seed`] — deterministic child-seed derivation for all sampling.
//! * [`ingest`] — JSON loading/saving with strict/lenient validation.
//! * [`audit`] — per-template answer histograms, bias flags, before/after
//!   comparison.
//! * [`planner`] — deficit computation, audio-swap plans, flip augmentation,
//!   and annotation-driven QA generation.
//! * [`split`] — stratified balanced-test / bias-subset / train-val split
//!   construction.
//! * [`eval`] — per-category accuracy tables and contrasting binary-pair
//!   scoring.
//! * [`fusion`] — numerically verified reference implementation of the
//!   cross-modal fusion attention math.
//! * [`fixtures`] — bundled template registry, cluster map, vocabulary, and
//!   deterministic fixture corpora used by the test suites and demos.
//!
//! Everything is deterministic: all randomness flows from a single `u64` seed
//! through named child streams, rationals are compared exactly, and floating
//! point reductions use a fixed summation order.

pub mod audit;
pub mod eval;
pub mod fixtures;
pub mod fusion;
pub mod ingest;
pub mod meta;
pub mod model;
pub mod planner;
pub mod seed;
pub mod share;
pub mod split;
