//! Positive (2p,0)-forms on flat quaternionic space.
//!
//! The crate models the complexified exterior algebra of `H^n ≅ C^{2n}`
//! together with the quaternionic operators `I, J, K`, and builds on it:
//!
//! * [`form`], [`quaternion`], [`su2`]: wedge algebra, the real structure
//!   `η ↦ J(η̄)`, the SU(2) action and its weight decomposition.
//! * [`rmap`]: the maps between `(p+q,0)`-forms and top-weight
//!   `(p,q)`-forms.
//! * [`calculus`]: `∂`, `∂̄`, `∂_J` on polynomial-coefficient forms.
//! * [`bridge`]: quaternionic Hermitian metrics versus real `(2,0)`-forms.
//! * [`positivity`]: decision procedures for the positive cones.
//! * [`vmap`]: the volume-pairing map and the constant `λ`.
//! * [`experiments`]: Monte-Carlo integrability and extension experiments.
//! * [`suites`], [`cli`]: named invariant checks and the command-line tool.
//!
//! A guide with worked examples lives in `book/`.
//!
//! ```
//! use quatforms::prelude::*;
//!
//! let s = ModelSpace::new(1).unwrap();
//! let omega: Form = canonical_omega(s);
//! assert!(is_real(&omega));
//! assert_eq!(plus_project(&omega).unwrap(), omega);
//! ```

pub mod bridge;
pub mod calculus;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod format;
pub mod form;
pub mod linalg;
pub mod poly;
pub mod positivity;
pub mod quaternion;
pub mod random;
pub mod rmap;
pub mod scalar;
pub mod space;
pub mod su2;
pub mod suites;
pub mod vmap;

pub mod prelude {
    pub use crate::calculus::{d_plus_components, del, del_j, delbar, hkt_from_potential, PolyForm};
    pub use crate::error::{BridgeError, FormError};
    pub use crate::form::{Blade, Form};
    pub use crate::poly::Poly;
    pub use crate::quaternion::{apply_operator, is_real, real_structure, QuatOperator};
    pub use crate::rmap::{rmap, rmap_eval, rproj};
    pub use crate::scalar::{cint, int, rat, CRational, Coeff, Rational};
    pub use crate::space::ModelSpace;
    pub use crate::su2::{plus_project, weight_decompose};
    pub use crate::vmap::{canonical_omega, canonical_phi, lambda_constant, vmap, vmap_via_pairing};
}

// Compiles the guide's snippets as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}

    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}

    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}

    #[doc = include_str!("../../../book/src/quaternionic.md")]
    mod quaternionic {}

    #[doc = include_str!("../../../book/src/rmap.md")]
    mod rmap {}

    #[doc = include_str!("../../../book/src/calculus.md")]
    mod calculus {}

    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}

    #[doc = include_str!("../../../book/src/positivity.md")]
    mod positivity {}

    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}

    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}

    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
