//! Coordinate charts on `T*M` and `TM` and points on them.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Which bundle a chart lives on; fixes the fiber coordinate letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bundle {
    /// `(x1..xn, p1..pn)`
    Cotangent,
    /// `(x1..xn, y1..yn)`
    Tangent,
}

impl Bundle {
    pub fn fiber_letter(self) -> char {
        match self {
            Bundle::Cotangent => 'p',
            Bundle::Tangent => 'y',
        }
    }
}

/// A local chart with `2n` coordinates: `n` base coordinates `x1..xn`
/// followed by `n` fiber coordinates.
///
/// Flat index `i < n` is `x{i+1}`; `n + i` is the fiber coordinate `i + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoordinateChart {
    dim: usize,
    bundle: Bundle,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("chart dimension must be at least 1")]
    ZeroDimension,
    #[error("point has {found} coordinates, chart needs {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("coordinate {name} is not finite")]
    NonFinite { name: String },
    #[error("chart mismatch: {left} vs {right}")]
    Mismatch { left: CoordinateChart, right: CoordinateChart },
    #[error("unknown coordinate {0}")]
    UnknownCoordinate(String),
}

impl CoordinateChart {
    pub fn new(dim: usize, bundle: Bundle) -> Result<Self, ChartError> {
        if dim == 0 {
            return Err(ChartError::ZeroDimension);
        }
        Ok(Self { dim, bundle })
    }

    /// Cotangent chart `(x, p)`; panics if `dim == 0`.
    pub fn cotangent(dim: usize) -> Self {
        Self::new(dim, Bundle::Cotangent).expect("chart dimension must be positive")
    }

    /// Tangent chart `(x, y)`; panics if `dim == 0`.
    pub fn tangent(dim: usize) -> Self {
        Self::new(dim, Bundle::Tangent).expect("chart dimension must be positive")
    }

    /// Base dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of coordinates, `2n`.
    pub fn len(&self) -> usize {
        2 * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bundle(&self) -> Bundle {
        self.bundle
    }

    pub fn base(&self, i: usize) -> usize {
        debug_assert!(i < self.dim);
        i
    }

    pub fn fiber(&self, i: usize) -> usize {
        debug_assert!(i < self.dim);
        self.dim + i
    }

    pub fn is_fiber(&self, index: usize) -> bool {
        index >= self.dim
    }

    pub fn name(&self, index: usize) -> String {
        if index < self.dim {
            format!("x{}", index + 1)
        } else {
            format!("{}{}", self.bundle.fiber_letter(), index - self.dim + 1)
        }
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.name(i)).collect()
    }

    /// Flat index of an identifier such as `x2` or `p1`.
    pub fn index_of(&self, ident: &str) -> Option<usize> {
        let mut chars = ident.chars();
        let head = chars.next()?;
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        if k == 0 || k > self.dim {
            return None;
        }
        if head == 'x' {
            Some(k - 1)
        } else if head == self.bundle.fiber_letter() {
            Some(self.dim + k - 1)
        } else {
            None
        }
    }

    pub fn ensure_same(&self, other: &CoordinateChart) -> Result<(), ChartError> {
        if self == other {
            Ok(())
        } else {
            Err(ChartError::Mismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl fmt::Display for CoordinateChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bundle = match self.bundle {
            Bundle::Cotangent => "T*M",
            Bundle::Tangent => "TM",
        };
        write!(f, "{bundle}(n={})", self.dim)
    }
}

/// A point of a chart: `2n` finite coordinates in flat order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint<T> {
    chart: CoordinateChart,
    coords: Vec<T>,
}

impl<T: Scalar> ChartPoint<T> {
    pub fn new(chart: CoordinateChart, coords: Vec<T>) -> Result<Self, ChartError> {
        if coords.len() != chart.len() {
            return Err(ChartError::WrongLength {
                expected: chart.len(),
                found: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(ChartError::NonFinite { name: chart.name(i) });
        }
        Ok(Self { chart, coords })
    }

    /// Builds a point from separate base and fiber parts.
    pub fn from_parts(chart: CoordinateChart, base: &[T], fiber: &[T]) -> Result<Self, ChartError> {
        let mut coords = base.to_vec();
        coords.extend_from_slice(fiber);
        Self::new(chart, coords)
    }

    pub fn chart(&self) -> CoordinateChart {
        self.chart
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn base(&self) -> &[T] {
        &self.coords[..self.chart.dim()]
    }

    pub fn fiber(&self) -> &[T] {
        &self.coords[self.chart.dim()..]
    }

    /// Copy of the point with coordinate `index` shifted by `delta`.
    pub fn shifted(&self, index: usize, delta: T) -> Self {
        let mut coords = self.coords.clone();
        coords[index] += delta;
        Self {
            chart: self.chart,
            coords,
        }
    }

    pub fn fiber_norm(&self) -> T {
        self.fiber().iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }
}
