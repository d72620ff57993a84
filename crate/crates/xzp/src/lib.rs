//! Canonical models of a family of genus 6 and 7 modular quotient curves,
//! their expected rational points, explicit maps to rank-one elliptic
//! factors, and a residue sieve that certifies the absence of further
//! rational points below a huge height bound.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`qseries`]: exact truncated `q`-expansions over `Q` and prime fields.
//! - [`lattice`]: integer kernels, lattice saturation and exact LLL.
//! - [`fixture`]: on-disk coefficient data for the curves and their sources.
//! - [`model`]: assembling coefficient matrices and cutting out the
//!   canonical model by quadrics.
//! - [`points`]: the cusp and CM points, evaluated and recognized exactly.
//! - [`ec`] and [`param`]: elliptic curve arithmetic and the explicit map
//!   to a one-dimensional factor.
//! - [`height`] and [`sieve`]: height bounds and the mod-`ell` residue
//!   sieve with its certificate.
//! - [`bundle`]: stage orchestration, caching, reports.

pub mod bigfloat;
pub mod bundle;
pub mod ec;
pub mod ffenum;
pub mod fixture;
pub mod height;
pub mod lattice;
pub mod model;
pub mod param;
pub mod points;
pub mod qseries;
pub mod reference;
pub mod report;
pub mod sieve;
pub mod surd;
