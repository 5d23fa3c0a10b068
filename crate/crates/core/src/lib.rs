//! Worst-case machinery for noiseless kernel-based global optimization.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: kernel functions, Gram matrices and box domains.
//! * [`linalg`]: dense Cholesky with a jitter ladder.
//! * [`interpolate`]: noiseless GP interpolation, certified envelopes,
//!   minimum-norm interpolants and random RKHS-ball sampling.
//! * [`search`]: deterministic grid + golden-section acquisition search.
//! * [`policies`]: deterministic optimization policies and regret traces.
//! * [`adversary`]: zero sequences, adversarial witnesses and the
//!   lower-bound certificate.
//! * [`entropy`]: empirical packing numbers and closed-form rate curves.
//! * [`harness`]: experiment configuration, runners and file output.

pub mod adversary;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod interpolate;
pub mod kernels;
pub mod linalg;
pub mod policies;
pub mod search;

pub use error::{Error, Result};
pub use interpolate::{Design, Posterior, RkhsFunction, SampleMode};
pub use kernels::{BoxDomain, KernelSpec, MaternNu};
pub use search::SearchConfig;
