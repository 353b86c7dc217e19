//! Structured grids, sampled fields, finite-difference gradients and quadrature.

mod gradient;
mod grid;
pub mod io;
mod quadrature;

pub use gradient::{gradient, GradientField};
pub use grid::{Domain, GridSpec, Layout};
pub use quadrature::{
    circle_trace, circle_trace_scalar, integrate_bulk, integrate_circle, integrate_circle_scalar,
    jacobian_flux, tangential_speed, winding_density,
};

use crate::{Error, Result, Vec2};

/// Tolerance on `|value| = 1` for fields flagged as S¹-valued.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Sampled ℝ²-valued map on a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<Vec2>,
    mask: Vec<bool>,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<Vec2>, mask: Vec<bool>) -> Result<Self> {
        let n = spec.node_count();
        if values.len() != n || mask.len() != n {
            return Err(Error::InvalidField(format!(
                "expected {n} values and mask flags, got {} and {}",
                values.len(),
                mask.len()
            )));
        }
        if let Some(i) = (0..n).find(|&i| mask[i] && !(values[i].x.is_finite() && values[i].y.is_finite()))
        {
            return Err(Error::InvalidField(format!("non-finite value at masked-in node {i}")));
        }
        Ok(GridField { spec, values, mask })
    }

    /// Samples `f` at every node; `None` masks the node out.
    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec2) -> Option<Vec2>) -> Result<Self> {
        let base = spec.domain_mask();
        let mut values = Vec::with_capacity(spec.node_count());
        let mut mask = Vec::with_capacity(spec.node_count());
        for (idx, p) in spec.nodes().enumerate() {
            match (base[idx], f(p)) {
                (true, Some(v)) => {
                    values.push(v);
                    mask.push(true);
                }
                _ => {
                    values.push(Vec2::zeros());
                    mask.push(false);
                }
            }
        }
        Self::new(spec, values, mask)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn value(&self, idx: usize) -> Option<Vec2> {
        self.mask[idx].then(|| self.values[idx])
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Largest deviation of `|value|` from 1 over the mask.
    pub fn max_modulus_defect(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|(v, _)| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unit_valued(&self) -> bool {
        self.max_modulus_defect() <= UNIT_MODULUS_TOL
    }

    /// Maps values node-by-node into a scalar field on the same mask.
    pub fn map_scalar(&self, f: impl Fn(Vec2) -> f64) -> ScalarGridField {
        ScalarGridField {
            spec: self.spec,
            values: self.values.iter().map(|v| f(*v)).collect(),
            mask: self.mask.clone(),
        }
    }

    /// Masks out every node for which `keep` is false.
    pub fn restrict(&self, keep: impl Fn(Vec2) -> bool) -> GridField {
        let mask = self
            .mask
            .iter()
            .enumerate()
            .map(|(i, m)| *m && keep(self.spec.node(i)))
            .collect();
        GridField {
            spec: self.spec,
            values: self.values.clone(),
            mask,
        }
    }
}

/// Sampled scalar field on a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGridField {
    spec: GridSpec,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl ScalarGridField {
    pub fn new(spec: GridSpec, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let n = spec.node_count();
        if values.len() != n || mask.len() != n {
            return Err(Error::InvalidField(format!(
                "expected {n} values and mask flags, got {} and {}",
                values.len(),
                mask.len()
            )));
        }
        if let Some(i) = (0..n).find(|&i| mask[i] && !values[i].is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at masked-in node {i}")));
        }
        Ok(ScalarGridField { spec, values, mask })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec2) -> Option<f64>) -> Result<Self> {
        let base = spec.domain_mask();
        let mut values = Vec::with_capacity(spec.node_count());
        let mut mask = Vec::with_capacity(spec.node_count());
        for (idx, p) in spec.nodes().enumerate() {
            match (base[idx], f(p)) {
                (true, Some(v)) => {
                    values.push(v);
                    mask.push(true);
                }
                _ => {
                    values.push(0.0);
                    mask.push(false);
                }
            }
        }
        Self::new(spec, values, mask)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarGridField {
        ScalarGridField {
            spec: self.spec,
            values: self.values.iter().map(|v| f(*v)).collect(),
            mask: self.mask.clone(),
        }
    }

    pub fn restrict(&self, keep: impl Fn(Vec2) -> bool) -> ScalarGridField {
        let mask = self
            .mask
            .iter()
            .enumerate()
            .map(|(i, m)| *m && keep(self.spec.node(i)))
            .collect();
        ScalarGridField {
            spec: self.spec,
            values: self.values.clone(),
            mask,
        }
    }
}
