//! Standard continuous state transition algorithm (STA) for box-constrained
//! global minimization, the classic benchmark functions, and an experiment
//! harness that records convergence traces and summary statistics.
//!
//! ```
//! use sta_core::benchmarks::Benchmark;
//! use sta_core::optimizer::{sta_minimize, StaParams};
//!
//! let spec = Benchmark::Sphere.spec(10).unwrap();
//! let params = StaParams::default().with_max_iter(100);
//! let trace = sta_minimize(sta_core::benchmarks::sphere, &spec.domain, &params, 7, None).unwrap();
//! assert!(trace.final_fitness < 1e-6);
//! ```

pub mod benchmarks;
pub mod engine;
pub mod error;
pub mod harness;
pub mod operators;
pub mod optimizer;
pub mod rng;

pub use error::{Result, StaError};
