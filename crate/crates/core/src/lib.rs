//! Rationalizability and identification of matching surpluses on finite
//! type spaces with transferable utility.
//!
//! An observed matching `μ̂` with margins `(p, q)` is rationalizable when it
//! maximizes `⟨μ, Φ⟩` over the transportation polytope `M(p, q)` for some
//! non-separable surplus `Φ`. That happens exactly when `μ̂` sits on the
//! relative boundary of `M`. Interior matchings are handled by projecting
//! along the ray from `p⊗q` ([`identify::rationalize_gauge`]) or by inverting
//! the gradient of a generalized entropy ([`identify::identify_entropy`]).

pub mod entropy;
pub mod error;
pub mod identify;
pub mod lp;
pub mod market;
pub mod polytope;
mod tree;

pub use error::{Error, Result, Side};
pub use market::{Margins, Matching, SeparableParts, Surplus, TypeValues};
