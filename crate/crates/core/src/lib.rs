//! Decides and constructs common finite covers of compact non-positively
//! curved cube complexes whose vertex links are a fixed Kneser complex.
//!
//! The pipeline: identify every link with `K_n(Δ)`, certify hyperplanes
//! clean and 2-sided (passing to covers that repair failures), build the
//! forced pre-Δ-category of complement-label transports, trivialize parallel
//! holonomies, extend to a full Δ-category, flatten its global holonomy by a
//! kernel cover, read off an orbi-cover edge coloring, and intersect two such
//! colored complexes in a colored fiber product.

pub mod complex;
pub mod cover;
pub mod deltacat;
pub mod holonomy;
pub mod hyperplane;
pub mod instances;
pub mod kneser;
pub mod label;
pub mod report;
