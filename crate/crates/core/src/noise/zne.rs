use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZneConfig {
    pub scale_factors: Vec<f64>,
    /// Degree of the extrapolating polynomial.
    pub order: usize,
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self {
            scale_factors: vec![1.0, 2.0, 3.0],
            order: 2,
        }
    }
}

impl ZneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scale_factors.iter().any(|&c| !c.is_finite() || c < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factors must be >= 1: {:?}",
                self.scale_factors
            )));
        }
        if self.scale_factors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "scale factors must be strictly increasing: {:?}",
                self.scale_factors
            )));
        }
        if self.scale_factors.len() < self.order + 1 {
            return Err(Error::InvalidArgument(format!(
                "order {} needs at least {} scale factors",
                self.order,
                self.order + 1
            )));
        }
        Ok(())
    }
}

/// Value at zero of the interpolating polynomial through all points (Lagrange form).
pub fn richardson_extrapolate(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("extrapolation needs at least two points".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[i + 1..].iter().any(|b| b.0 == a.0) {
            return Err(Error::InvalidArgument(format!("duplicate scale {}", a.0)));
        }
    }
    let mut total = 0.0;
    for (j, &(xj, yj)) in points.iter().enumerate() {
        let w: f64 = points
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .map(|(_, &(xm, _))| xm / (xm - xj))
            .product();
        total += w * yj;
    }
    Ok(total)
}

/// Zero-scale value of a degree-`order` polynomial: exact interpolation when the
/// point count is `order + 1`, least squares when larger.
pub fn polynomial_extrapolate(points: &[(f64, f64)], order: usize) -> Result<f64> {
    if points.len() == order + 1 {
        if order == 0 {
            return Ok(points[0].1);
        }
        return richardson_extrapolate(points);
    }
    if points.len() < order + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} points cannot fix a degree-{order} polynomial",
            points.len()
        )));
    }
    let v = DMatrix::from_fn(points.len(), order + 1, |i, k| points[i].0.powi(k as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coef = v
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(coef[0])
}
