//! Seeded sample points on a chart and residual maxima over them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{ChartPoint, CoordinateChart, Evaluator, Expr};
use crate::scalar::Scalar;
use crate::Error;

/// Recorded in reports so a point set can be regenerated.
pub const SAMPLER_ALGORITHM: &str = "rand_chacha::ChaCha8Rng::seed_from_u64";

/// Axis-aligned sampling box with a fiber-norm exclusion around the null section.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingBox {
    pub x_box: Vec<(f64, f64)>,
    pub p_box: Vec<(f64, f64)>,
    pub p_min_norm: f64,
}

impl SamplingBox {
    pub const DEFAULT_X: (f64, f64) = (-1.0, 1.0);
    pub const DEFAULT_P: (f64, f64) = (-2.0, 2.0);
    pub const DEFAULT_MIN_NORM: f64 = 0.1;

    pub fn default_for(dim: usize) -> Self {
        Self {
            x_box: vec![Self::DEFAULT_X; dim],
            p_box: vec![Self::DEFAULT_P; dim],
            p_min_norm: Self::DEFAULT_MIN_NORM,
        }
    }

    fn validate(&self, chart: CoordinateChart) -> Result<(), Error> {
        if self.x_box.len() != chart.dim() || self.p_box.len() != chart.dim() {
            return Err(Error::Shape(format!(
                "sampling box has {}+{} intervals, chart needs {} each",
                self.x_box.len(),
                self.p_box.len(),
                chart.dim()
            )));
        }
        for &(lo, hi) in self.x_box.iter().chain(&self.p_box) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Sampling(format!("bad interval [{lo}, {hi}]")));
            }
        }
        let reach: f64 = self.p_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2)).sum::<f64>().sqrt();
        if !(self.p_min_norm >= 0.0) || self.p_min_norm >= reach && self.p_min_norm > 0.0 {
            return Err(Error::Sampling(format!(
                "fiber box cannot reach norm {}",
                self.p_min_norm
            )));
        }
        Ok(())
    }
}

/// Draws `count` points uniformly from the box, rejecting `‖p‖ < p_min_norm`.
pub fn sample_points(
    chart: CoordinateChart,
    bx: &SamplingBox,
    seed: u64,
    count: usize,
) -> Result<Vec<ChartPoint<f64>>, Error> {
    bx.validate(chart)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let mut out = Vec::with_capacity(count);
    let budget = 1000 * count.max(1);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Sampling(format!(
                "only {} of {count} points accepted after {budget} draws",
                out.len()
            )));
        }
        let base: Vec<f64> = bx.x_box.iter().map(|&iv| draw(&mut rng, iv)).collect();
        let fiber: Vec<f64> = bx.p_box.iter().map(|&iv| draw(&mut rng, iv)).collect();
        let pt = ChartPoint::from_parts(chart, &base, &fiber)?;
        if pt.fiber_norm() >= bx.p_min_norm {
            out.push(pt);
        }
    }
    Ok(out)
}

/// Converts an `f64` point set to another scalar type.
pub fn cast_points<T: Scalar>(pts: &[ChartPoint<f64>]) -> Vec<ChartPoint<T>> {
    pts.iter()
        .map(|p| {
            ChartPoint::new(p.chart(), p.coords().iter().map(|&v| T::lit(v)).collect())
                .expect("finite f64 coordinates stay finite")
        })
        .collect()
}

/// Worst absolute value of a family of expressions over a point set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual<T> {
    pub max_abs: T,
    pub points: usize,
    /// Index of the point attaining the maximum.
    pub worst: Option<usize>,
}

impl<T: Scalar> Residual<T> {
    pub fn zero(points: usize) -> Self {
        Self {
            max_abs: T::zero(),
            points,
            worst: None,
        }
    }

    /// Keeps the larger of two residuals; NaN dominates.
    pub fn merge(self, other: Self) -> Self {
        let take_other = other.max_abs.is_nan() || other.max_abs > self.max_abs;
        let (max_abs, worst) = if take_other && !self.max_abs.is_nan() {
            (other.max_abs, other.worst)
        } else {
            (self.max_abs, self.worst)
        };
        Self {
            max_abs,
            points: self.points.max(other.points),
            worst,
        }
    }
}

pub(crate) fn at_point<T: Scalar>(pt: &ChartPoint<T>, source: crate::expr::EvalError) -> Error {
    Error::AtPoint {
        point: pt.coords().iter().map(|v| v.to_f64_lossy()).collect(),
        source,
    }
}

/// `max_{pt, e} |e(pt)|`.
pub fn max_abs_residual<T: Scalar>(exprs: &[Expr], pts: &[ChartPoint<T>]) -> Result<Residual<T>, Error> {
    max_residual_with(pts, |ev| {
        let mut worst = T::zero();
        for e in exprs {
            let v = ev.eval(e)?.abs();
            if v.is_nan() || v > worst {
                worst = v;
            }
        }
        Ok(worst)
    })
}

/// Maximum over points of a per-point residual computed by `f`.
pub fn max_residual_with<T: Scalar>(
    pts: &[ChartPoint<T>],
    mut f: impl FnMut(&mut Evaluator<'_, T>) -> Result<T, crate::expr::EvalError>,
) -> Result<Residual<T>, Error> {
    let mut acc = Residual::zero(pts.len());
    for (k, pt) in pts.iter().enumerate() {
        let mut ev = Evaluator::new(pt.coords());
        let v = f(&mut ev).map_err(|e| at_point(pt, e))?;
        acc = acc.merge(Residual {
            max_abs: v,
            points: pts.len(),
            worst: Some(k),
        });
    }
    Ok(acc)
}
