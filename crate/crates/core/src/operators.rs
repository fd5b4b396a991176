//! The four continuous state transformations and box projection.
//!
//! Every operator receives its random coefficients as arguments, so each is a
//! pure function of its inputs. The sampling layer in [`crate::engine`] is
//! responsible for drawing those coefficients.

use std::ops::{Deref, DerefMut};

use crate::error::{Result, StaError};

/// Norms at or below this value are treated as zero by rotation and
/// translation.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// A candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(coords: Vec<f64>) -> Self {
        StateVector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        StateVector(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        StateVector(v)
    }
}

impl From<&[f64]> for StateVector {
    fn from(v: &[f64]) -> Self {
        StateVector(v.to_vec())
    }
}

/// Per-coordinate box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundedDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(StaError::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(StaError::InvalidDomain("dimension must be at least 1".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(StaError::InvalidDomain(format!(
                    "bounds for coordinate {i} must be finite with lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(BoundedDomain { lower, upper })
    }

    /// The same interval `[lower, upper]` on every one of `n` coordinates.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }

    /// Clamps `x` into the box coordinate by coordinate.
    ///
    /// Panics if `x` has the wrong dimension.
    pub fn project_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.dim(), "projection dimension mismatch");
        for (v, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            if *v > u {
                *v = u;
            } else if *v < l {
                *v = l;
            }
        }
    }
}

/// Square matrix with entries in `[-1, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl RotationMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(StaError::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !(-1.0..=1.0).contains(*e)) {
            return Err(StaError::InvalidMatrix(format!(
                "entry {bad} lies outside [-1, 1]"
            )));
        }
        Ok(RotationMatrix { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        RotationMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Diagonal of the expansion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian(pub Vec<f64>);

/// The single nonzero diagonal entry of the axesion matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxesionMask {
    pub axis: usize,
    pub value: f64,
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(StaError::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product with eight running partial sums, so the loop vectorizes. The
/// summation order is fixed, which keeps results bit-reproducible.
#[inline(always)]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Supplies the rows of a rotation matrix, in order.
pub(crate) trait RowSource {
    fn next_row(&mut self, row: &mut [f64]);
}

struct MatrixRows<'a> {
    matrix: &'a RotationMatrix,
    next: usize,
}

impl RowSource for MatrixRows<'_> {
    #[inline(always)]
    fn next_row(&mut self, row: &mut [f64]) {
        row.copy_from_slice(self.matrix.row(self.next));
        self.next += 1;
    }
}

/// Rotation kernel shared by [`rotate`] and the streaming sampler. `out`
/// receives the rotated point; `row` is scratch space.
#[inline(always)]
pub(crate) fn rotate_rows<R: RowSource>(x: &[f64], alpha: f64, row: &mut [f64], out: &mut [f64], rows: &mut R) {
    let n = x.len();
    debug_assert_eq!(row.len(), n);
    debug_assert_eq!(out.len(), n);
    let norm = norm2(x);
    if norm < DEGENERATE_NORM {
        // Near the origin the direction R x / |x| is undefined; step along the
        // first column of R instead, which keeps the step inside radius alpha.
        let scale = alpha / n as f64;
        for i in 0..n {
            rows.next_row(row);
            out[i] = x[i] + scale * row[0];
        }
    } else {
        let scale = alpha / (n as f64 * norm);
        for i in 0..n {
            rows.next_row(row);
            out[i] = x[i] + scale * dot(row, x);
        }
    }
}

/// `x + alpha / (n |x|) * R x`.
///
/// When `|x| < 1e-12` the step is `alpha / n` times the first column of `R`.
pub fn rotate(x: &[f64], alpha: f64, r: &RotationMatrix) -> Result<StateVector> {
    check_dim(x.len(), r.dim())?;
    let n = x.len();
    let mut row = vec![0.0; n];
    let mut out = vec![0.0; n];
    rotate_rows(x, alpha, &mut row, &mut out, &mut MatrixRows { matrix: r, next: 0 });
    Ok(StateVector(out))
}

/// `x_new + beta * r_t * (x_new - x_old) / |x_new - x_old|`.
pub fn translate(x_new: &[f64], x_old: &[f64], beta: f64, r_t: f64) -> Result<StateVector> {
    check_dim(x_new.len(), x_old.len())?;
    let distance = x_new
        .iter()
        .zip(x_old)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if distance <= DEGENERATE_NORM {
        return Err(StaError::DegenerateDirection { distance });
    }
    let scale = beta * r_t / distance;
    Ok(StateVector(
        x_new
            .iter()
            .zip(x_old)
            .map(|(a, b)| a + scale * (a - b))
            .collect(),
    ))
}

/// `x + gamma * diag(r_e) * x`.
pub fn expand(x: &[f64], gamma: f64, r_e: &DiagonalGaussian) -> Result<StateVector> {
    check_dim(x.len(), r_e.0.len())?;
    Ok(StateVector(
        x.iter().zip(&r_e.0).map(|(v, g)| v + gamma * g * v).collect(),
    ))
}

/// `x + delta * R_a * x` where `R_a` has one nonzero diagonal entry.
pub fn axesion(x: &[f64], delta: f64, r_a: AxesionMask) -> Result<StateVector> {
    if r_a.axis >= x.len() {
        return Err(StaError::AxisOutOfRange {
            axis: r_a.axis,
            dim: x.len(),
        });
    }
    let mut out = x.to_vec();
    let v = out[r_a.axis];
    out[r_a.axis] = v + delta * r_a.value * v;
    Ok(StateVector(out))
}

/// Coordinatewise clamp into `dom`.
pub fn project(x: &[f64], dom: &BoundedDomain) -> StateVector {
    let mut out = x.to_vec();
    dom.project_in_place(&mut out);
    StateVector(out)
}
