//! Evolution groups `e^{t a(D)}` for constant-coefficient operators acting on
//! distributions whose Fourier transforms are locally square integrable.
//!
//! Everything lives on the frequency side. A [`SpectralField`] samples `û` on a
//! grid over `[-J, J]^n`, the seminorms `p_j` integrate `|û|²` over the balls
//! `|ξ| ≤ j`, and an operator `a(D)` is multiplication by its symbol `a(ξ)`.
//!
//! ```
//! use frechet_flow::{FrequencyGrid, SpectralField, PolynomialSymbol, MultiplierOperator};
//! use std::sync::Arc;
//!
//! let grid = FrequencyGrid::default_1d();
//! let heat = MultiplierOperator::new(Arc::new(PolynomialSymbol::heat(1)), grid).unwrap();
//! assert!((heat.operator_seminorm(1).unwrap() - (1.0 + 4.0 * std::f64::consts::PI.powi(2))).abs() < 1e-12);
//! let u = SpectralField::ones(grid);
//! assert!(u.seminorm(8).unwrap() > u.seminorm(1).unwrap());
//! ```

pub mod group;
pub mod invariance;
pub mod numeric;
pub mod operator;
pub mod spectral;
pub mod symbol;
pub mod translation;

pub use group::{exp_multiplier, exp_series, ExpResult, GroupTrajectory, Method, SeriesDiagnostics};
pub use invariance::{decide_eprime, decide_l2, find_growth_witness, l2_blowup_construction, EprimeDecision, L2Decision, Verdict};
pub use operator::{FieldOperator, MultiplierOperator, ReflectionOperator};
pub use spectral::{make_grid, FrequencyGrid, QuotientElement, SeminormProfile, SpectralError, SpectralField};
pub use symbol::{parse_symbol, Convention, MultiIndex, PolynomialSymbol, Symbol, SymbolError};
pub use translation::{certify_membership, cinf_seminorm, translate, DerivativeOracle, ExpCertificate, SmoothExpFunction};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/symbols.md")]
    mod symbols {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/invariance.md")]
    mod invariance {}
    #[doc = include_str!("../../../book/src/translation.md")]
    mod translation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
