use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Planar domain carried by a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    Rectangle {
        center: [f64; 2],
        width: f64,
        height: f64,
    },
}

impl Domain {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Domain::Disk { center, radius }
    }

    pub fn annulus(center: [f64; 2], inner: f64, outer: f64) -> Self {
        Domain::Annulus {
            center,
            inner,
            outer,
        }
    }

    pub fn rectangle(center: [f64; 2], width: f64, height: f64) -> Self {
        Domain::Rectangle {
            center,
            width,
            height,
        }
    }

    pub fn center(&self) -> Vec2 {
        let c = match self {
            Domain::Disk { center, .. }
            | Domain::Annulus { center, .. }
            | Domain::Rectangle { center, .. } => center,
        };
        Vec2::new(c[0], c[1])
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let c = self.center();
        match *self {
            Domain::Disk { radius, .. } => (p - c).norm() < radius,
            Domain::Annulus { inner, outer, .. } => {
                let r = (p - c).norm();
                r > inner && r < outer
            }
            Domain::Rectangle { width, height, .. } => {
                (p.x - c.x).abs() < 0.5 * width && (p.y - c.y).abs() < 0.5 * height
            }
        }
    }

    /// True when the closed disk `B_r(q)` lies inside the domain.
    pub fn contains_disk(&self, q: Vec2, r: f64) -> bool {
        let c = self.center();
        match *self {
            Domain::Disk { radius, .. } => (q - c).norm() + r <= radius,
            Domain::Annulus { inner, outer, .. } => {
                let d = (q - c).norm();
                d + r <= outer && d - r >= inner
            }
            Domain::Rectangle { width, height, .. } => {
                (q.x - c.x).abs() + r <= 0.5 * width && (q.y - c.y).abs() + r <= 0.5 * height
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => PI * radius * radius,
            Domain::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            Domain::Rectangle { width, height, .. } => width * height,
        }
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let c = self.center();
        let (hw, hh) = match *self {
            Domain::Disk { radius, .. } => (radius, radius),
            Domain::Annulus { outer, .. } => (outer, outer),
            Domain::Rectangle { width, height, .. } => (0.5 * width, 0.5 * height),
        };
        (c - Vec2::new(hw, hh), c + Vec2::new(hw, hh))
    }

    fn validate(&self) -> Result<()> {
        let finite_center = self.center().iter().all(|v| v.is_finite());
        if !finite_center {
            return Err(Error::InvalidGrid("center must be finite".into()));
        }
        match *self {
            Domain::Disk { radius, .. } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidGrid(format!("disk radius {radius} must be > 0")))
            }
            Domain::Annulus { inner, outer, .. } if !(inner >= 0.0 && inner < outer) => Err(
                Error::InvalidGrid(format!("annulus needs 0 <= inner < outer, got {inner}, {outer}")),
            ),
            Domain::Rectangle { width, height, .. } if !(width > 0.0 && height > 0.0) => Err(
                Error::InvalidGrid(format!("rectangle sides must be > 0, got {width} x {height}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Node layout: cell-centered Cartesian or polar about the domain center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Layout {
    Cartesian { nx: usize, ny: usize },
    Polar { n_radial: usize, n_angular: usize },
}

/// Structured grid over a disk, annulus or rectangle.
///
/// Cartesian nodes sit at cell centers of the bounding box, row-major
/// (`index = iy * nx + ix`). Polar nodes sit at `ρ_i = inner + (i + ½)Δρ`,
/// `θ_j = jΔθ`, radial-major (`index = i * n_angular + j`), so `ρ = 0` is never
/// a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub domain: Domain,
    pub layout: Layout,
}

impl GridSpec {
    pub fn new(domain: Domain, layout: Layout) -> Result<Self> {
        domain.validate()?;
        match layout {
            Layout::Cartesian { nx, ny } if nx < 4 || ny < 4 => {
                return Err(Error::InvalidGrid(format!(
                    "resolution {nx} x {ny} below the minimum of 4"
                )))
            }
            Layout::Polar {
                n_radial,
                n_angular,
            } => {
                if n_radial < 4 || n_angular < 4 {
                    return Err(Error::InvalidGrid(format!(
                        "resolution {n_radial} x {n_angular} below the minimum of 4"
                    )));
                }
                if matches!(domain, Domain::Rectangle { .. }) {
                    return Err(Error::InvalidGrid(
                        "polar layout needs a disk or annulus".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(GridSpec { domain, layout })
    }

    pub fn cartesian(domain: Domain, nx: usize, ny: usize) -> Result<Self> {
        Self::new(domain, Layout::Cartesian { nx, ny })
    }

    pub fn polar(domain: Domain, n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::new(
            domain,
            Layout::Polar {
                n_radial,
                n_angular,
            },
        )
    }

    /// Re-runs constructor validation (for deserialized specs).
    pub fn validated(self) -> Result<Self> {
        Self::new(self.domain, self.layout)
    }

    pub fn is_polar(&self) -> bool {
        matches!(self.layout, Layout::Polar { .. })
    }

    /// (axis-0 count, axis-1 count): (nx, ny) or (n_radial, n_angular).
    pub fn shape(&self) -> (usize, usize) {
        match self.layout {
            Layout::Cartesian { nx, ny } => (nx, ny),
            Layout::Polar {
                n_radial,
                n_angular,
            } => (n_radial, n_angular),
        }
    }

    pub fn node_count(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    /// Cartesian cell sizes (hx, hy).
    pub fn cell_size(&self) -> (f64, f64) {
        match self.layout {
            Layout::Cartesian { nx, ny } => {
                let (lo, hi) = self.domain.bounding_box();
                ((hi.x - lo.x) / nx as f64, (hi.y - lo.y) / ny as f64)
            }
            Layout::Polar { .. } => {
                let (r0, r1) = self.radial_range();
                let (nr, na) = self.shape();
                ((r1 - r0) / nr as f64, 2.0 * PI / na as f64)
            }
        }
    }

    /// Typical node spacing (max of the Cartesian steps, or the radial step).
    pub fn spacing(&self) -> f64 {
        let (a, b) = self.cell_size();
        if self.is_polar() {
            a
        } else {
            a.max(b)
        }
    }

    /// Radial extent [inner, outer] for polar layouts.
    pub fn radial_range(&self) -> (f64, f64) {
        match self.domain {
            Domain::Disk { radius, .. } => (0.0, radius),
            Domain::Annulus { inner, outer, .. } => (inner, outer),
            Domain::Rectangle { .. } => (0.0, 0.0),
        }
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        match self.layout {
            Layout::Cartesian { nx, .. } => b * nx + a,
            Layout::Polar { n_angular, .. } => a * n_angular + b,
        }
    }

    /// Inverse of [`GridSpec::index`].
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        match self.layout {
            Layout::Cartesian { nx, .. } => (idx % nx, idx / nx),
            Layout::Polar { n_angular, .. } => (idx / n_angular, idx % n_angular),
        }
    }

    pub fn radius_at(&self, i: usize) -> f64 {
        let (r0, _) = self.radial_range();
        let (dr, _) = self.cell_size();
        r0 + (i as f64 + 0.5) * dr
    }

    pub fn angle_at(&self, j: usize) -> f64 {
        let (_, dt) = self.cell_size();
        j as f64 * dt
    }

    /// Physical position of a node.
    pub fn node(&self, idx: usize) -> Vec2 {
        let (a, b) = self.coords(idx);
        match self.layout {
            Layout::Cartesian { .. } => {
                let (lo, _) = self.domain.bounding_box();
                let (hx, hy) = self.cell_size();
                Vec2::new(lo.x + (a as f64 + 0.5) * hx, lo.y + (b as f64 + 0.5) * hy)
            }
            Layout::Polar { .. } => {
                let r = self.radius_at(a);
                let t = self.angle_at(b);
                self.domain.center() + r * Vec2::new(t.cos(), t.sin())
            }
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.node_count()).map(move |i| self.node(i))
    }

    /// Quadrature weight of the cell owning node `idx`.
    pub fn cell_weight(&self, idx: usize) -> f64 {
        let (a, b) = self.cell_size();
        match self.layout {
            Layout::Cartesian { .. } => a * b,
            Layout::Polar { .. } => {
                let (i, _) = self.coords(idx);
                self.radius_at(i) * a * b
            }
        }
    }

    /// Default mask: nodes strictly inside the domain.
    pub fn domain_mask(&self) -> Vec<bool> {
        match self.layout {
            Layout::Polar { .. } => vec![true; self.node_count()],
            Layout::Cartesian { .. } => self.nodes().map(|p| self.domain.contains(p)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_and_degenerate_grids() {
        assert!(GridSpec::cartesian(Domain::disk([0.0, 0.0], 1.0), 3, 8).is_err());
        assert!(GridSpec::polar(Domain::annulus([0.0, 0.0], 0.5, 0.5), 8, 8).is_err());
        assert!(GridSpec::polar(Domain::rectangle([0.0, 0.0], 1.0, 1.0), 8, 8).is_err());
        assert!(GridSpec::cartesian(Domain::disk([0.0, 0.0], -1.0), 8, 8).is_err());
    }

    #[test]
    fn polar_nodes_avoid_origin() {
        let g = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 8, 16).unwrap();
        let rmin = g.nodes().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        assert!((rmin - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn index_roundtrip() {
        let g = GridSpec::cartesian(Domain::rectangle([0.0, 0.0], 2.0, 1.0), 7, 5).unwrap();
        for idx in 0..g.node_count() {
            let (a, b) = g.coords(idx);
            assert_eq!(g.index(a, b), idx);
        }
        let p = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 6, 9).unwrap();
        for idx in 0..p.node_count() {
            let (a, b) = p.coords(idx);
            assert_eq!(p.index(a, b), idx);
        }
    }
}
