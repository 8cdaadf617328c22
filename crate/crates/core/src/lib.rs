//! Moment problems, truncated CCR representations, and finite-dimensional
//! POVM machinery.
//!
//! The crate has five areas:
//!
//! * [`moment`]: existence (Hankel positivity) and determinacy
//!   (Carleman, Cramér, Krein) analysis of Hamburger and Stieltjes moment
//!   problems;
//! * [`recon`]: discrete-measure reconstruction from moments through
//!   orthogonal-polynomial recurrences and Gaussian quadrature, with
//!   software-float internals;
//! * [`algebra`]: the one-mode CCR *-algebra in normal order, vacuum and
//!   deformed expectations, and exact truncated Fock representations;
//! * [`operator`]: deficiency indices and extension classification of the
//!   momentum operator on intervals;
//! * [`povm`]: grid POVMs: validation, Naimark dilation, operator
//!   decomposition, compression, consistent measure families and their
//!   reconstruction, and the half-line momentum example.
//!
//! [`reproduce`] wires the pieces into the one-shot pipeline the command
//! line exposes. All values are immutable after construction and all
//! operations are pure, so everything here is safe to call concurrently.
//!
//! Analyze a moment sequence and rebuild a measure matching it:
//!
//! ```
//! use momenta::moment::{hamburger_existence, MomentConfig, MomentKind, MomentSequence};
//! use momenta::recon::{reconstruct_measure, verify_moment_solution};
//!
//! let cfg = MomentConfig::default();
//! let ms = MomentSequence::new(
//!     MomentKind::Hamburger,
//!     vec![1.0, 0.0, 0.5, 0.0, 0.75],
//! )?;
//! assert!(hamburger_existence(&ms, &cfg)?.feasible);
//!
//! let rec = reconstruct_measure(&ms, 2, &cfg)?;
//! let truncated = MomentSequence::new(MomentKind::Hamburger, ms.values()[..4].to_vec())?;
//! assert!(verify_moment_solution(&rec.measure, &truncated, 1e-10, &cfg)?.ok);
//! # Ok::<(), momenta::Error>(())
//! ```
//!
//! Generate the same sequence algebraically and cross-check it against the
//! quadrature oracle:
//!
//! ```
//! use momenta::algebra::{deformed_moment_sequence, gaussian_q_moment_oracle,
//!                        position_element, NormalOrderedElement};
//!
//! let ms = deformed_moment_sequence(
//!     &position_element(),
//!     &NormalOrderedElement::identity(),
//!     4,
//! )?;
//! for (n, value) in ms.values().iter().enumerate() {
//!     let oracle = gaussian_q_moment_oracle(1, n as u32);
//!     assert!((value - oracle).abs() < 1e-12);
//! }
//! # Ok::<(), momenta::Error>(())
//! ```

pub mod algebra;
pub mod config;
pub mod error;
pub mod moment;
pub mod operator;
pub mod povm;
pub mod prec;
pub mod quadrature;
pub mod recon;
pub mod reproduce;

pub use config::Tolerances;
pub use error::{Error, Result};
