//! Power-law scaling additive normal tempered stable (ATS) model.
//!
//! The log-forward at maturity t is a Brownian motion with drift, run on the
//! random clock S_t·t, where S_t is a unit-mean tempered stable variable whose
//! variance k_t/t and the drift scale η_t follow power laws in t:
//!
//! ```text
//! k_t = k̄·t^β,   η_t = η̄·t^δ
//! f_t = −(η_t + 1/2)·σ̄²·S_t·t + σ̄·√(S_t·t)·g + φ_t·t
//! ```
//!
//! The crate covers the law of S_t ([`subordinator`]), parameter validation,
//! regime classification and the characteristic function ([`model`]), European
//! pricing by quadrature over S_t or Monte Carlo ([`pricer`]), and implied
//! volatility and short-time smile analytics ([`vol_surface`]).

pub mod error;
pub mod model;
pub mod pricer;
pub mod quadrature;
pub mod special;
pub mod subordinator;
pub mod vol_surface;

pub use error::{AtsError, Result};
pub use model::{AtsParams, RegimeCase};
pub use pricer::{OptionKind, OptionSpec};
pub use subordinator::SubordinatorLaw;
