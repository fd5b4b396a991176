//! Benchmark objectives `f1`..`f5` and their registry.
//!
//! Each function is written so that every summand is nonnegative in floating
//! point as well as analytically, which keeps the reported minima from going
//! slightly negative through cancellation.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StaError};
use crate::operators::{BoundedDomain, StateVector};

/// `sum x_i^2`, usually on `[-100, 100]^n`.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2`, usually on `[-30, 30]^n`.
///
/// Panics when `x` has fewer than two coordinates.
pub fn rosenbrock(x: &[f64]) -> f64 {
    assert!(x.len() >= 2, "rosenbrock needs at least two coordinates");
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

/// `sum x_i^2 - 10 cos(2 pi x_i) + 10`, usually on `[-5.12, 5.12]^n`.
pub fn rastrigin(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| v * v + 10.0 * (1.0 - (2.0 * PI * v).cos()))
        .sum()
}

/// `sum x_i^2 / 4000 - prod cos(x_i / sqrt(i)) + 1` with 1-based `i`,
/// usually on `[-600, 600]^n`.
pub fn griewank(x: &[f64]) -> f64 {
    let (sum, prod) = x
        .iter()
        .enumerate()
        .fold((0.0, 1.0), |(s, p), (i, &v)| {
            (s + v * v, p * (v / ((i + 1) as f64).sqrt()).cos())
        });
    sum / 4000.0 + (1.0 - prod)
}

/// `20 + e - 20 exp(-0.2 sqrt(mean x_i^2)) - exp(mean cos(2 pi x_i))`,
/// usually on `[-32, 32]^n`.
pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let mean_cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    20.0 * (1.0 - (-0.2 * mean_sq.sqrt()).exp()) + (E - mean_cos.exp())
}

/// The five registered benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Sphere,
    Rosenbrock,
    Rastrigin,
    Griewank,
    Ackley,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [
        Benchmark::Sphere,
        Benchmark::Rosenbrock,
        Benchmark::Rastrigin,
        Benchmark::Griewank,
        Benchmark::Ackley,
    ];

    /// Short identifier, `f1`..`f5`.
    pub fn id(self) -> &'static str {
        match self {
            Benchmark::Sphere => "f1",
            Benchmark::Rosenbrock => "f2",
            Benchmark::Rastrigin => "f3",
            Benchmark::Griewank => "f4",
            Benchmark::Ackley => "f5",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Sphere => "sphere",
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::Rastrigin => "rastrigin",
            Benchmark::Griewank => "griewank",
            Benchmark::Ackley => "ackley",
        }
    }

    /// Symmetric per-coordinate bound `b` of the domain `[-b, b]^n`.
    pub fn bound(self) -> f64 {
        match self {
            Benchmark::Sphere => 100.0,
            Benchmark::Rosenbrock => 30.0,
            Benchmark::Rastrigin => 5.12,
            Benchmark::Griewank => 600.0,
            Benchmark::Ackley => 32.0,
        }
    }

    pub fn min_dimension(self) -> usize {
        match self {
            Benchmark::Rosenbrock => 2,
            _ => 1,
        }
    }

    pub fn function(self) -> fn(&[f64]) -> f64 {
        match self {
            Benchmark::Sphere => sphere,
            Benchmark::Rosenbrock => rosenbrock,
            Benchmark::Rastrigin => rastrigin,
            Benchmark::Griewank => griewank,
            Benchmark::Ackley => ackley,
        }
    }

    pub fn evaluate(self, x: &[f64]) -> f64 {
        (self.function())(x)
    }

    pub fn spec(self, dimension: usize) -> Result<BenchmarkSpec> {
        if dimension < self.min_dimension() {
            return Err(StaError::DimensionMismatch {
                expected: self.min_dimension(),
                actual: dimension,
            });
        }
        let opt = if self == Benchmark::Rosenbrock { 1.0 } else { 0.0 };
        Ok(BenchmarkSpec {
            benchmark: self,
            dimension,
            domain: BoundedDomain::uniform(dimension, -self.bound(), self.bound())?,
            optimum: StateVector::new(vec![opt; dimension]),
            optimal_value: 0.0,
        })
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Benchmark {
    type Err = StaError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Benchmark::ALL
            .into_iter()
            .find(|b| b.id() == key || b.name() == key)
            .ok_or_else(|| StaError::UnknownFunction(s.to_string()))
    }
}

/// A benchmark instantiated at a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub benchmark: Benchmark,
    pub dimension: usize,
    pub domain: BoundedDomain,
    pub optimum: StateVector,
    pub optimal_value: f64,
}

impl BenchmarkSpec {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.benchmark.evaluate(x)
    }
}
