//! Region-aligned quadrature rules on disks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{gauss_legendre_on, smooth_step};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: Vec2,
    pub w: f64,
}

/// Resolution of the region-aligned rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadOptions {
    /// Gauss–Legendre order per radial panel.
    pub order: usize,
    /// Radial panels per region segment.
    pub panels: usize,
    /// Uniform angular nodes per ring.
    pub n_angular: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            order: 16,
            panels: 4,
            n_angular: 512,
        }
    }
}

impl QuadOptions {
    pub fn radial_nodes_per_segment(&self) -> usize {
        self.order * self.panels
    }
}

/// Composite Gauss–Legendre rule over consecutive breakpoints.
pub fn composite_gl(breaks: &[f64], panels: usize, order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            out.extend(gauss_legendre_on(lo, lo + h, order));
        }
    }
    out
}

/// Polar product rule about `center`: Gauss–Legendre in ρ (weight ρ) between
/// breakpoints, uniform midpoint angles.
pub fn polar_rule(center: Vec2, breaks: &[f64], opts: &QuadOptions) -> Vec<QuadPoint> {
    let radial = composite_gl(breaks, opts.panels, opts.order);
    let n = opts.n_angular;
    let dt = 2.0 * PI / n as f64;
    let dirs: Vec<Vec2> = (0..n)
        .map(|j| {
            let t = (j as f64 + 0.5) * dt;
            Vec2::new(t.cos(), t.sin())
        })
        .collect();
    let mut out = Vec::with_capacity(radial.len() * n);
    for (r, wr) in radial {
        for d in &dirs {
            out.push(QuadPoint {
                x: center + r * d,
                w: wr * r * dt,
            });
        }
    }
    out
}

/// Smooth cutoff: 1 on `B_{r/2}(c)`, 0 outside `B_r(c)`.
pub fn cutoff(x: Vec2, center: Vec2, r: f64) -> f64 {
    let s = (x - center).norm();
    1.0 - smooth_step((s - 0.5 * r) / (0.5 * r))
}

/// A local patch of a partition-of-unity rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub center: Vec2,
    /// Cutoff radius; the patch rule covers `B_radius(center)`.
    pub radius: f64,
    /// Interior radial breakpoints (strictly between 0 and `radius / 2`).
    pub breaks: Vec<f64>,
}

/// Rule on `B_ℓ(0)` combining a global polar grid with polar patches around
/// singular points, blended by smooth cutoffs `χᵢ` with disjoint supports.
///
/// Global nodes carry weight `(1 − Σχᵢ)`, patch nodes `χᵢ`, so the rule
/// integrates any function whose singularities sit at the patch centers.
pub fn partition_rule(ell: f64, patches: &[Patch], global: &QuadOptions, local: &QuadOptions) -> Vec<QuadPoint> {
    let mut out = Vec::new();
    for q in polar_rule(Vec2::zeros(), &[0.0, ell], global) {
        let chi: f64 = patches.iter().map(|p| cutoff(q.x, p.center, p.radius)).sum();
        let w = q.w * (1.0 - chi);
        if w != 0.0 {
            out.push(QuadPoint { x: q.x, w });
        }
    }
    for p in patches {
        let mut breaks = vec![0.0];
        breaks.extend(p.breaks.iter().copied().filter(|b| *b > 0.0 && *b < 0.5 * p.radius));
        breaks.push(0.5 * p.radius);
        breaks.push(p.radius);
        for q in polar_rule(p.center, &breaks, local) {
            let w = q.w * cutoff(q.x, p.center, p.radius);
            if w != 0.0 {
                out.push(QuadPoint { x: q.x, w });
            }
        }
    }
    out
}
