//! Pointwise and distributional Jacobians, singularity detection, and degree by preimages.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{gradient, integrate_bulk, GridField, GridSpec, Layout, ScalarGridField};
use crate::numerics::{adjugate, angle_increment, det, smooth_step, smooth_step_derivative};
use crate::{Error, Result, Vec2};

/// Edge increments at or above this fraction of π are treated as aliased.
pub const ALIAS_FRACTION: f64 = 0.95;
/// Default cluster separation, in cells.
pub const DEFAULT_SEPARATION_CELLS: f64 = 8.0;
const BARYCENTRIC_TOL: f64 = 1e-9;

/// `det ∇v` at every node.
pub fn pointwise_det(field: &GridField) -> Result<ScalarGridField> {
    let g = gradient(field)?;
    let values = g.values.iter().map(det).collect();
    ScalarGridField::new(g.spec, values, g.mask)
}

/// `∫ |det ∇v|`.
pub fn tv_jacobian(field: &GridField) -> Result<f64> {
    integrate_bulk(&pointwise_det(field)?.map(f64::abs))
}

/// Compactly supported C¹ test function with an analytic gradient.
pub trait TestFunction: Sync {
    fn value(&self, x: Vec2) -> f64;
    fn gradient(&self, x: Vec2) -> Vec2;
    /// Disk containing the support, as (center, radius).
    fn support(&self) -> (Vec2, f64);
}

/// `ψ(x) = exp(1 − 1/(1 − |x − c|²/ρ²))` on `|x − c| < ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
}

impl TestFunction for Bump {
    fn value(&self, x: Vec2) -> f64 {
        let s = (x - self.center).norm_squared() / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        let rel = x - self.center;
        let r2 = self.radius * self.radius;
        let s = rel.norm_squared() / r2;
        if s >= 1.0 {
            return Vec2::zeros();
        }
        let q = 1.0 - s;
        self.value(x) * (-1.0 / (q * q)) * (2.0 / r2) * rel
    }

    fn support(&self) -> (Vec2, f64) {
        (self.center, self.radius)
    }
}

/// Equal to `height` on `B_inner(c)`, decaying smoothly to 0 at `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub center: Vec2,
    pub inner: f64,
    pub outer: f64,
    pub height: f64,
}

impl TestFunction for Plateau {
    fn value(&self, x: Vec2) -> f64 {
        let r = (x - self.center).norm();
        self.height * (1.0 - smooth_step((r - self.inner) / (self.outer - self.inner)))
    }

    fn gradient(&self, x: Vec2) -> Vec2 {
        let rel = x - self.center;
        let r = rel.norm();
        if r == 0.0 {
            return Vec2::zeros();
        }
        let w = self.outer - self.inner;
        -self.height * smooth_step_derivative((r - self.inner) / w) / w * rel / r
    }

    fn support(&self) -> (Vec2, f64) {
        (self.center, self.outer)
    }
}

/// `Det ∇u(ψ) = −½ ∫ (adj ∇u · u) · ∇ψ`.
pub fn distributional_jacobian(field: &GridField, test: &dyn TestFunction) -> Result<f64> {
    let (c, r) = test.support();
    if !field.spec().domain.contains_disk(c, r) {
        return Err(Error::SupportEscapesDomain {
            center: [c.x, c.y],
            radius: r,
        });
    }
    let g = gradient(field)?;
    let spec = *field.spec();
    let values: Vec<f64> = (0..spec.node_count())
        .into_par_iter()
        .map(|i| {
            if !g.mask[i] {
                return 0.0;
            }
            let p = spec.node(i);
            let grad_psi = test.gradient(p);
            if grad_psi == Vec2::zeros() {
                return 0.0;
            }
            -0.5 * (adjugate(&g.values[i]) * field.values()[i]).dot(&grad_psi)
        })
        .collect();
    integrate_bulk(&ScalarGridField::new(spec, values, g.mask)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: [f64; 2],
    pub degree: i64,
    pub residual: f64,
}

/// Atomic Jacobian `π Σ dᵢ δ_{xᵢ}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularitySet {
    pub atoms: Vec<Atom>,
}

impl SingularitySet {
    /// `π Σ |dᵢ|`.
    pub fn total_mass(&self) -> f64 {
        PI * self.atoms.iter().map(|a| a.degree.unsigned_abs() as f64).sum::<f64>()
    }

    pub fn total_degree(&self) -> i64 {
        self.atoms.iter().map(|a| a.degree).sum()
    }
}

fn cartesian_shape(spec: &GridSpec) -> Result<(usize, usize)> {
    match spec.layout {
        Layout::Cartesian { nx, ny } => Ok((nx, ny)),
        Layout::Polar { .. } => Err(Error::InvalidGrid("a Cartesian grid is required".into())),
    }
}

struct Plaquettes {
    nx: usize,
    /// Rounded winding per plaquette (`None` where a corner is masked out).
    winding: Vec<Option<i64>>,
    max_edge: Vec<f64>,
}

impl Plaquettes {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx - 1) + i
    }
}

fn scan_plaquettes(field: &GridField, nx: usize, ny: usize) -> Plaquettes {
    let spec = field.spec();
    let vals = field.values();
    let mask = field.mask();
    let np = (nx - 1) * (ny - 1);
    let data: Vec<(Option<i64>, f64)> = (0..np)
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p % (nx - 1), p / (nx - 1));
            let corners = [
                spec.index(i, j),
                spec.index(i + 1, j),
                spec.index(i + 1, j + 1),
                spec.index(i, j + 1),
            ];
            if corners.iter().any(|c| !mask[*c]) {
                return (None, 0.0);
            }
            let mut sum = 0.0;
            let mut max_edge: f64 = 0.0;
            for k in 0..4 {
                let inc = angle_increment(vals[corners[k]], vals[corners[(k + 1) % 4]]);
                sum += inc;
                max_edge = max_edge.max(inc.abs());
            }
            (Some((sum / (2.0 * PI)).round() as i64), max_edge)
        })
        .collect();
    Plaquettes {
        nx,
        winding: data.iter().map(|d| d.0).collect(),
        max_edge: data.iter().map(|d| d.1).collect(),
    }
}

#[derive(Debug, Clone)]
struct Cluster {
    cells: Vec<(usize, usize)>,
    lo: (usize, usize),
    hi: (usize, usize),
}

impl Cluster {
    fn absorb(&mut self, other: Cluster) {
        self.lo = (self.lo.0.min(other.lo.0), self.lo.1.min(other.lo.1));
        self.hi = (self.hi.0.max(other.hi.0), self.hi.1.max(other.hi.1));
        self.cells.extend(other.cells);
    }

    /// Chebyshev gap between bounding boxes, in cells.
    fn gap(&self, other: &Cluster) -> usize {
        let gx = other.lo.0.saturating_sub(self.hi.0).max(self.lo.0.saturating_sub(other.hi.0));
        let gy = other.lo.1.saturating_sub(self.hi.1).max(self.lo.1.saturating_sub(other.hi.1));
        gx.max(gy)
    }
}

/// Winding along the node loop bounding plaquettes `[i0, i1] × [j0, j1]`.
///
/// Returns the raw winding, or the worst aliased edge if the loop is not clean.
fn loop_winding(
    field: &GridField,
    lo: (usize, usize),
    hi: (usize, usize),
) -> std::result::Result<f64, ((usize, usize), f64)> {
    let spec = field.spec();
    let mut path = Vec::new();
    let (i0, j0) = lo;
    let (i1, j1) = (hi.0 + 1, hi.1 + 1);
    for i in i0..i1 {
        path.push((i, j0));
    }
    for j in j0..j1 {
        path.push((i1, j));
    }
    for i in (i0 + 1..=i1).rev() {
        path.push((i, j1));
    }
    for j in (j0 + 1..=j1).rev() {
        path.push((i0, j));
    }
    let mut sum = 0.0;
    for k in 0..path.len() {
        let a = spec.index(path[k].0, path[k].1);
        let b = spec.index(path[(k + 1) % path.len()].0, path[(k + 1) % path.len()].1);
        let (Some(va), Some(vb)) = (field.value(a), field.value(b)) else {
            return Err((path[k], f64::NAN));
        };
        let inc = angle_increment(va, vb);
        if inc.abs() >= ALIAS_FRACTION * PI {
            return Err((path[k], inc));
        }
        sum += inc;
    }
    Ok(sum / (2.0 * PI))
}

/// Locates winding defects of a unit-valued field on a Cartesian grid.
///
/// Plaquettes with nonzero winding or an aliased edge seed clusters (8-connected,
/// then merged below `min_separation`). Each cluster's degree is the winding of
/// the smallest clean node loop around it, so a single plaquette hiding `|d| ≥ 2`
/// is still counted correctly. `min_separation` defaults to 8 cells.
pub fn detect_singularities(field: &GridField, min_separation: Option<f64>) -> Result<SingularitySet> {
    let spec = *field.spec();
    let (nx, ny) = cartesian_shape(&spec)?;
    let (hx, hy) = spec.cell_size();
    let h = hx.max(hy);
    let sep_cells = (min_separation.unwrap_or(DEFAULT_SEPARATION_CELLS * h) / h).ceil().max(1.0) as usize;
    let pq = scan_plaquettes(field, nx, ny);
    let np = pq.winding.len();
    let seed: Vec<bool> = (0..np)
        .map(|p| pq.winding[p].is_some_and(|w| w != 0 || pq.max_edge[p] >= ALIAS_FRACTION * PI))
        .collect();

    let mut seen = vec![false; np];
    let mut clusters: Vec<Cluster> = Vec::new();
    for start in 0..np {
        if !seed[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let s = (start % (nx - 1), start / (nx - 1));
        let mut c = Cluster {
            cells: Vec::new(),
            lo: s,
            hi: s,
        };
        while let Some(p) = queue.pop_front() {
            let (i, j) = (p % (nx - 1), p / (nx - 1));
            c.absorb(Cluster {
                cells: vec![(i, j)],
                lo: (i, j),
                hi: (i, j),
            });
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= (nx - 1) as i64 || jj >= (ny - 1) as i64 {
                        continue;
                    }
                    let q = pq.idx(ii as usize, jj as usize);
                    if seed[q] && !seen[q] {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        clusters.push(c);
    }

    loop {
        let mut merged = false;
        'outer: for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                if clusters[a].gap(&clusters[b]) < sep_cells {
                    let other = clusters.remove(b);
                    clusters[a].absorb(other);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut atoms = Vec::new();
    for (ci, c) in clusters.iter().enumerate() {
        let mut result = None;
        let mut worst = (c.lo, f64::NAN);
        let max_margin = (sep_cells / 2).max(1);
        for margin in 1..=max_margin {
            if c.lo.0 < margin || c.lo.1 < margin || c.hi.0 + margin + 1 >= nx || c.hi.1 + margin + 1 >= ny {
                break;
            }
            let lo = (c.lo.0 - margin, c.lo.1 - margin);
            let hi = (c.hi.0 + margin, c.hi.1 + margin);
            let touches_other = clusters.iter().enumerate().any(|(k, o)| {
                k != ci && o.lo.0 <= hi.0 + 1 && o.hi.0 + 1 >= lo.0 && o.lo.1 <= hi.1 + 1 && o.hi.1 + 1 >= lo.1
            });
            if touches_other {
                break;
            }
            match loop_winding(field, lo, hi) {
                Ok(raw) => {
                    result = Some(raw);
                    break;
                }
                Err(e) => worst = e,
            }
        }
        let raw = match result {
            Some(raw) => raw,
            None => {
                let plaquette = c
                    .cells
                    .iter()
                    .copied()
                    .max_by(|a, b| {
                        pq.max_edge[pq.idx(a.0, a.1)].total_cmp(&pq.max_edge[pq.idx(b.0, b.1)])
                    })
                    .unwrap_or(worst.0);
                let increment = if worst.1.is_nan() {
                    pq.max_edge[pq.idx(plaquette.0, plaquette.1)]
                } else {
                    worst.1
                };
                return Err(Error::AliasedWinding {
                    plaquette: [plaquette.0, plaquette.1],
                    increment,
                });
            }
        };
        let degree = raw.round() as i64;
        if degree == 0 {
            continue;
        }
        let (lo, _) = spec.domain.bounding_box();
        let mut wsum = 0.0;
        let mut loc = Vec2::zeros();
        for &(i, j) in &c.cells {
            let w = pq.winding[pq.idx(i, j)].unwrap_or(0).unsigned_abs() as f64;
            let center = lo + Vec2::new((i as f64 + 1.0) * hx, (j as f64 + 1.0) * hy);
            loc += w * center;
            wsum += w;
        }
        if wsum == 0.0 {
            for &(i, j) in &c.cells {
                loc += lo + Vec2::new((i as f64 + 1.0) * hx, (j as f64 + 1.0) * hy);
            }
            wsum = c.cells.len() as f64;
        }
        loc /= wsum;
        atoms.push(Atom {
            location: [loc.x, loc.y],
            degree,
            residual: (raw - degree as f64).abs(),
        });
    }
    Ok(SingularitySet { atoms })
}

/// Signed and unsigned preimage counts of a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreimageCount {
    pub degree: i64,
    pub multiplicity: u64,
}

/// Preimages of `y` under the piecewise-affine interpolant on a Cartesian grid.
///
/// Each cell is split along its `(0,0)–(1,1)` diagonal. A value within the
/// barycentric tolerance of an image edge is retried once after a shift of
/// one part in 10⁶ of the image diameter.
pub fn degree_by_preimage(field: &GridField, y: Vec2) -> Result<PreimageCount> {
    let spec = *field.spec();
    cartesian_shape(&spec)?;
    let tris = triangles(field);
    match count_preimages(&tris, y) {
        Some(c) => Ok(c),
        None => {
            let diam = image_diameter(&tris);
            let y2 = y + 1e-6 * diam * Vec2::new(0.6, 0.8);
            count_preimages(&tris, y2).ok_or(Error::NonRegularValue([y.x, y.y]))
        }
    }
}

type Tri = [Vec2; 3];

fn triangles(field: &GridField) -> Vec<Tri> {
    let spec = field.spec();
    let (nx, ny) = spec.shape();
    let mut out = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v = |a: usize, b: usize| field.value(spec.index(a, b));
            if let (Some(p00), Some(p10), Some(p11), Some(p01)) =
                (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1))
            {
                out.push([p00, p10, p11]);
                out.push([p00, p11, p01]);
            }
        }
    }
    out
}

fn image_bounds(tris: &[Tri]) -> (Vec2, Vec2) {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for t in tris {
        for p in t {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
    }
    (lo, hi)
}

fn image_diameter(tris: &[Tri]) -> f64 {
    let (lo, hi) = image_bounds(tris);
    (hi - lo).norm()
}

fn count_preimages(tris: &[Tri], y: Vec2) -> Option<PreimageCount> {
    let mut degree = 0i64;
    let mut mult = 0u64;
    for t in tris {
        let e1 = t[1] - t[0];
        let e2 = t[2] - t[0];
        let d = e1.x * e2.y - e1.y * e2.x;
        let scale = e1.norm() * e2.norm();
        if d.abs() <= 1e-14 * scale || scale == 0.0 {
            continue;
        }
        let r = y - t[0];
        let l1 = (r.x * e2.y - r.y * e2.x) / d;
        let l2 = (e1.x * r.y - e1.y * r.x) / d;
        let l0 = 1.0 - l1 - l2;
        let m = l0.min(l1).min(l2);
        if m < -BARYCENTRIC_TOL {
            continue;
        }
        if m <= BARYCENTRIC_TOL {
            return None;
        }
        degree += d.signum() as i64;
        mult += 1;
    }
    Some(PreimageCount {
        degree,
        multiplicity: mult,
    })
}

/// Monte-Carlo estimate of `∫ mult(y) dy` over the image bounding box.
///
/// Uses `nx × ny` jittered strata, seeded for reproducibility.
pub fn multiplicity_integral(field: &GridField, strata: (usize, usize), seed: u64) -> Result<f64> {
    cartesian_shape(field.spec())?;
    let tris = triangles(field);
    if tris.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (lo, hi) = image_bounds(&tris);
    let size = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sx, sy) = strata;
    let mut ys = Vec::with_capacity(sx * sy);
    for j in 0..sy {
        for i in 0..sx {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            ys.push(lo + Vec2::new(
                (i as f64 + u) / sx as f64 * size.x,
                (j as f64 + v) / sy as f64 * size.y,
            ));
        }
    }
    let diam = size.norm();
    let counts: Result<Vec<u64>> = ys
        .par_iter()
        .map(|y| {
            count_preimages(&tris, *y)
                .or_else(|| count_preimages(&tris, y + 1e-6 * diam * Vec2::new(0.6, 0.8)))
                .map(|c| c.multiplicity)
                .ok_or(Error::NonRegularValue([y.x, y.y]))
        })
        .collect();
    let total: u64 = counts?.iter().sum();
    Ok(total as f64 / ys.len() as f64 * size.x * size.y)
}
