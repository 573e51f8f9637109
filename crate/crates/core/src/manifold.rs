//! Model spaces where scalar curvature and geodesic distance are exact: round
//! spheres and flat space with a prescribed curvature field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Registered curvature fields on the flat model.
#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureField<T> {
    Constant(T),
    /// `s0 + |x - x0|²`
    QuadraticWell { s0: T, x0: Vec<T> },
    /// `s0 + depth·(|x - x0|²/width² - 1)²`: a local maximum `s0 + depth` at
    /// `x0` surrounded by a ring of minima `s0` at radius `width`.
    DoubleWell { s0: T, depth: T, width: T, x0: Vec<T> },
}

fn dist2<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

fn norm<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&a| a * a).sum::<T>().sqrt()
}

impl<T: Scalar> CurvatureField<T> {
    pub fn eval(&self, x: &[T]) -> T {
        match self {
            Self::Constant(s) => *s,
            Self::QuadraticWell { s0, x0 } => *s0 + dist2(x, x0),
            Self::DoubleWell { s0, depth, width, x0 } => {
                let q = dist2(x, x0) / (*width * *width) - T::one();
                *s0 + *depth * q * q
            }
        }
    }

    fn center(&self) -> Option<&[T]> {
        match self {
            Self::Constant(_) => None,
            Self::QuadraticWell { x0, .. } | Self::DoubleWell { x0, .. } => Some(x0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldModel<T> {
    /// Round sphere of radius `radius` in ℝ^{n+1}; points are unit vectors.
    Sphere { n: usize, radius: T },
    /// ℝⁿ with the flat distance and a curvature field.
    Euclidean { n: usize, field: CurvatureField<T> },
}

impl<T: Scalar> ManifoldModel<T> {
    pub fn sphere(n: usize, radius: T) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("sphere dimension must be at least 1".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::Config(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Self::Sphere { n, radius })
    }

    pub fn euclidean(n: usize, field: CurvatureField<T>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if let Some(c) = field.center() {
            if c.len() != n {
                return Err(Error::Config(format!(
                    "x0 has {} components, expected {n}",
                    c.len()
                )));
            }
        }
        if let CurvatureField::DoubleWell { width, .. } = &field {
            if !(*width > T::zero()) {
                return Err(Error::Config("double-well width must be positive".into()));
            }
        }
        Ok(Self::Euclidean { n, field })
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::Sphere { n, .. } | Self::Euclidean { n, .. } => *n,
        }
    }

    /// Length of the coordinate vectors representing points.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Sphere { n, .. } => n + 1,
            Self::Euclidean { n, .. } => *n,
        }
    }

    pub fn injectivity_radius(&self) -> T {
        match self {
            Self::Sphere { radius, .. } => T::PI() * *radius,
            Self::Euclidean { .. } => T::infinity(),
        }
    }

    /// North pole of the sphere; the field center (or origin) of the flat model.
    pub fn reference_point(&self) -> Vec<T> {
        match self {
            Self::Sphere { n, .. } => {
                let mut x = vec![T::zero(); n + 1];
                x[*n] = T::one();
                x
            }
            Self::Euclidean { n, field } => field
                .center()
                .map(|c| c.to_vec())
                .unwrap_or_else(|| vec![T::zero(); *n]),
        }
    }

    pub fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.ambient_dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("point has non-finite coordinates".into()));
        }
        if let Self::Sphere { .. } = self {
            let r = norm(x);
            if (r - T::one()).abs() > T::lit(1e-10) {
                return Err(Error::Domain(format!("sphere points are unit vectors, |x| = {r}")));
            }
        }
        Ok(())
    }

    pub fn scalar_curvature(&self, x: &[T]) -> T {
        match self {
            Self::Sphere { n, radius } => {
                let n = T::from_usize_lossy(*n);
                n * (n - T::one()) / (*radius * *radius)
            }
            Self::Euclidean { field, .. } => field.eval(x),
        }
    }

    pub fn distance(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::Sphere { radius, .. } => {
                let diff: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
                let sum: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a + b).collect();
                *radius * T::lit(2.0) * norm(&diff).atan2(norm(&sum))
            }
            Self::Euclidean { .. } => dist2(x, y).sqrt(),
        }
    }

    /// Exponential map at `base` applied to the tangent vector `v` (given in
    /// ambient coordinates, in units of length).
    pub fn offset_point(&self, base: &[T], v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.ambient_dim() {
            return Err(Error::Domain(format!(
                "tangent vector has {} components, expected {}",
                v.len(),
                self.ambient_dim()
            )));
        }
        let len = norm(v);
        if !(len < self.injectivity_radius()) {
            return Err(Error::Domain(format!(
                "|v| = {len} is not below the injectivity radius {}",
                self.injectivity_radius()
            )));
        }
        match self {
            Self::Euclidean { .. } => Ok(base.iter().zip(v).map(|(&b, &w)| b + w).collect()),
            Self::Sphere { radius, .. } => {
                let along: T = base.iter().zip(v).map(|(&b, &w)| b * w).sum();
                if along.abs() > T::lit(1e-9) * len.max(T::one()) {
                    return Err(Error::Domain("offset vector is not tangent at the base point".into()));
                }
                if len == T::zero() {
                    return Ok(base.to_vec());
                }
                let theta = len / *radius;
                let (s, c) = theta.sin_cos();
                let x: Vec<T> = base.iter().zip(v).map(|(&b, &w)| c * b + s * w / len).collect();
                let r = norm(&x);
                Ok(x.into_iter().map(|a| a / r).collect())
            }
        }
    }

    /// Orthonormal basis of the tangent space at `base`, in ambient coordinates.
    pub fn tangent_basis(&self, base: &[T]) -> Vec<Vec<T>> {
        let dim = self.ambient_dim();
        let unit = |i: usize| {
            let mut e = vec![T::zero(); dim];
            e[i] = T::one();
            e
        };
        match self {
            Self::Euclidean { n, .. } => (0..*n).map(unit).collect(),
            Self::Sphere { n, .. } => {
                let mut basis: Vec<Vec<T>> = Vec::with_capacity(*n);
                let mut frame = vec![base.to_vec()];
                // skip the coordinate direction most aligned with the base
                let skip = (0..dim)
                    .max_by(|&a, &b| base[a].abs().partial_cmp(&base[b].abs()).unwrap())
                    .unwrap_or(0);
                for i in (0..dim).filter(|&i| i != skip) {
                    let mut e = unit(i);
                    for _ in 0..2 {
                        for f in &frame {
                            let d: T = e.iter().zip(f).map(|(&a, &b)| a * b).sum();
                            for (a, &b) in e.iter_mut().zip(f) {
                                *a -= d * b;
                            }
                        }
                    }
                    let l = norm(&e);
                    let e: Vec<T> = e.into_iter().map(|a| a / l).collect();
                    frame.push(e.clone());
                    basis.push(e);
                }
                basis
            }
        }
    }

    /// `offset_point(base, Σ cᵢ eᵢ)` for the [`tangent_basis`](Self::tangent_basis) at `base`.
    pub fn chart(&self, base: &[T], basis: &[Vec<T>], coords: &[T]) -> Result<Vec<T>> {
        let mut v = vec![T::zero(); self.ambient_dim()];
        for (c, e) in coords.iter().zip(basis) {
            for (a, &b) in v.iter_mut().zip(e) {
                *a += *c * b;
            }
        }
        self.offset_point(base, &v)
    }
}

/// JSON model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Sphere {
        n: usize,
        #[serde(rename = "R", default = "one")]
        radius: f64,
    },
    Euclidean {
        n: usize,
        curvature: CurvatureKind,
        #[serde(default)]
        s0: f64,
        #[serde(default)]
        x0: Option<Vec<f64>>,
        #[serde(default)]
        depth: Option<f64>,
        #[serde(default)]
        width: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureKind {
    Constant,
    Quadratic,
    DoubleWell,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build<T: Scalar>(&self) -> Result<ManifoldModel<T>> {
        match self {
            Self::Sphere { n, radius } => ManifoldModel::sphere(*n, T::lit(*radius)),
            Self::Euclidean {
                n,
                curvature,
                s0,
                x0,
                depth,
                width,
            } => {
                let s0 = T::lit(*s0);
                let x0: Vec<T> = x0
                    .clone()
                    .unwrap_or_else(|| vec![0.0; *n])
                    .into_iter()
                    .map(T::lit)
                    .collect();
                let field = match curvature {
                    CurvatureKind::Constant => CurvatureField::Constant(s0),
                    CurvatureKind::Quadratic => CurvatureField::QuadraticWell { s0, x0 },
                    CurvatureKind::DoubleWell => CurvatureField::DoubleWell {
                        s0,
                        depth: T::lit(depth.unwrap_or(1.0)),
                        width: T::lit(width.unwrap_or(1.0)),
                        x0,
                    },
                };
                ManifoldModel::euclidean(*n, field)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn curvature_examples() {
        let s = ManifoldModel::<f64>::sphere(3, 1.0).unwrap();
        assert_eq!(s.scalar_curvature(&[1.0, 0.0, 0.0, 0.0]), 6.0);
        let s = ManifoldModel::<f64>::sphere(2, 2.0).unwrap();
        assert_eq!(s.scalar_curvature(&[0.0, 0.0, 1.0]), 0.5);
        let e = ManifoldModel::euclidean(2, CurvatureField::QuadraticWell { s0: 1.0, x0: vec![0.0, 0.0] }).unwrap();
        assert_eq!(e.scalar_curvature(&[1.0, 0.0]), 2.0);
    }

    #[test]
    fn distance_examples() {
        let s = ManifoldModel::<f64>::sphere(2, 1.0).unwrap();
        assert!((s.distance(&[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]) - PI).abs() < 1e-15);
        assert_eq!(s.distance(&[0.6, 0.0, 0.8], &[0.6, 0.0, 0.8]), 0.0);
        let e = ManifoldModel::euclidean(2, CurvatureField::Constant(0.0)).unwrap();
        assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn offset_examples() {
        let e = ManifoldModel::euclidean(3, CurvatureField::Constant(0.0)).unwrap();
        assert_eq!(e.offset_point(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let s = ManifoldModel::<f64>::sphere(2, 1.0).unwrap();
        let pole = s.reference_point();
        let q = s.offset_point(&pole, &[PI / 2.0, 0.0, 0.0]).unwrap();
        assert!(q[2].abs() < 1e-15 && (q[0] - 1.0).abs() < 1e-15);
        assert!((s.distance(&pole, &q) - PI / 2.0).abs() < 1e-15);
        assert_eq!(s.offset_point(&pole, &[0.0; 3]).unwrap(), pole);
        assert!(s.offset_point(&pole, &[PI, 0.0, 0.0]).is_err());
        assert!(s.offset_point(&pole, &[0.0, 0.0, 0.1]).is_err());
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_tangent() {
        let s = ManifoldModel::<f64>::sphere(3, 1.0).unwrap();
        let base = [0.5, -0.5, 0.5, 0.5];
        let b = s.tangent_basis(&base);
        assert_eq!(b.len(), 3);
        for (i, e) in b.iter().enumerate() {
            let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
            assert!(dot(e, &base).abs() < 1e-15);
            for (j, f) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(e, f) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn config_forms_parse() {
        let s = ModelSpec::from_json(r#"{"model":"sphere","n":3,"R":1.0}"#).unwrap();
        assert_eq!(s.build::<f64>().unwrap(), ManifoldModel::Sphere { n: 3, radius: 1.0 });
        let e = ModelSpec::from_json(
            r#"{"model":"euclidean","n":2,"curvature":"quadratic","s0":6.0,"x0":[0,0]}"#,
        )
        .unwrap()
        .build::<f64>()
        .unwrap();
        assert_eq!(e.scalar_curvature(&[1.0, 1.0]), 8.0);
        assert!(ModelSpec::from_json(r#"{"model":"torus","n":2}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"model":"euclidean","n":2,"curvature":"cubic"}"#).is_err());
        let bad = ModelSpec::from_json(r#"{"model":"euclidean","n":2,"curvature":"quadratic","x0":[0]}"#).unwrap();
        assert!(bad.build::<f64>().is_err());
        assert!(ModelSpec::from_json(r#"{"model":"sphere","n":2,"R":-1}"#).unwrap().build::<f64>().is_err());
    }

    #[test]
    fn double_well_shape() {
        let f = CurvatureField::DoubleWell { s0: 1.0f64, depth: 2.0, width: 0.5, x0: vec![0.0, 0.0] };
        assert_eq!(f.eval(&[0.0, 0.0]), 3.0);
        assert!((f.eval(&[0.5, 0.0]) - 1.0).abs() < 1e-15);
    }
}
