use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::quadrature::{QuadOptions, QuadPoint};
use super::{Construction, InterfacePoint, Param, Region, RegionKind};
use crate::maps::{Junction, MapSpec};
use crate::numerics::{gauss_legendre_on, rotation, unit};
use crate::{Error, Mat2, Result, Vec2};

/// Transition profile `m^ε(t, s)` of the `n`-junction strips.
///
/// A tent in `s ∈ [0, L]` of height `h` at `t = 0`, decaying linearly to 0 at `t = ε`.
pub fn m_epsilon(t: f64, s: f64, eps: f64, n: usize) -> f64 {
    if t >= eps {
        return 0.0;
    }
    let j = Junction::new(n, 0.0);
    let (l, h) = (j.side(), j.apothem());
    let tent = if s <= 0.5 * l { s * h / l } else { (l - s) * h / l };
    2.0 * (eps - t) / eps * tent
}

/// `(∂t m^ε, ∂s m^ε)`, one-sided from the right at the kinks.
pub fn m_epsilon_derivatives(t: f64, s: f64, eps: f64, n: usize) -> (f64, f64) {
    if t >= eps {
        return (0.0, 0.0);
    }
    let j = Junction::new(n, 0.0);
    let (l, h) = (j.side(), j.apothem());
    let (tent, slope) = if s < 0.5 * l { (s * h / l, h / l) } else { ((l - s) * h / l, -h / l) };
    (-2.0 / eps * tent, 2.0 * (eps - t) / eps * slope)
}

/// Member `ε` of the junction family.
///
/// Each interface ray is thickened to a strip of width `ε` on which the value
/// runs linearly between the two neighboring sector values and, near the
/// center, is lifted towards 0 by `m^ε`. The strips end on a regular `n`-gon
/// `P_ε` of side `ε`, split into a central polygon (value 0) and `n` corner
/// triangles with affine values.
#[derive(Debug, Clone)]
pub struct JunctionMember {
    parent: MapSpec,
    junction: Junction,
    ell: f64,
    eps: f64,
    /// Apothem of `P_ε`.
    a: f64,
    /// Circumradius of `P_ε`.
    big_r: f64,
    k_eps: f64,
    frames: Vec<Mat2>,
}

pub fn junction_recovery(spec: &MapSpec, ell: f64, eps: f64) -> Result<JunctionMember> {
    let junction = spec.junction().ok_or(Error::UnsupportedKind(spec.kind_name()))?;
    spec.validate(ell)?;
    let limit = 0.25 * ell;
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::EpsilonTooLarge { epsilon: eps, limit });
    }
    let half = PI / junction.n as f64;
    let a = 0.5 * eps * half.cos() / half.sin();
    let big_r = 0.5 * eps / half.sin();
    let frames = (0..junction.n)
        .map(|j| rotation(junction.offset + j as f64 * junction.sector_angle()))
        .collect();
    Ok(JunctionMember {
        parent: spec.clone(),
        junction,
        ell,
        eps,
        a,
        big_r,
        k_eps: ell / (ell - a),
        frames,
    })
}

impl JunctionMember {
    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn junction(&self) -> Junction {
        self.junction
    }

    /// Apothem `ε/(2 tan(π/n))` of the central polygon.
    pub fn polygon_apothem(&self) -> f64 {
        self.a
    }

    /// Area of one strip `{|x'| ≤ ε/2, a_ε ≤ y', |x| ≤ ℓ}`.
    pub fn strip_area(&self) -> f64 {
        let l = self.ell;
        let f = |x: f64| 0.5 * x * (l * l - x * x).sqrt() + 0.5 * l * l * (x / l).asin();
        f(0.5 * self.eps) - f(-0.5 * self.eps) - self.eps * self.a
    }

    pub fn polygon_area(&self) -> f64 {
        0.5 * self.junction.n as f64 * self.eps * self.a
    }

    fn n(&self) -> usize {
        self.junction.n
    }

    fn prev(&self, j: usize) -> usize {
        (j + self.n() - 1) % self.n()
    }

    /// Coordinates in the frame of strip `j`: `x'` across, `y'` along the ray.
    fn local(&self, j: usize, x: Vec2) -> Vec2 {
        self.frames[j].transpose() * x
    }

    fn global(&self, j: usize, p: Vec2) -> Vec2 {
        self.frames[j] * p
    }

    /// Bisector of sector `j`, pointing at the corner of `P_ε`.
    fn bisector(&self, j: usize) -> Vec2 {
        unit(self.junction.interface_angle(j) + 0.5 * self.junction.sector_angle())
    }

    fn corner_weight(&self, j: usize, x: Vec2) -> f64 {
        let half = PI / self.n() as f64;
        let d = self.big_r * half.sin().powi(2);
        (x.dot(&self.bisector(j)) - self.a * half.cos()) / d
    }

    fn midpoint(&self, j: usize) -> Vec2 {
        self.a * self.junction.interface_dir(j)
    }

    fn corner(&self, j: usize) -> Vec2 {
        self.big_r * self.bisector(j)
    }

    /// Upper end of the strip along `y'` at offset `x'`.
    fn y_max(&self, xp: f64) -> f64 {
        (self.ell * self.ell - xp * xp).sqrt()
    }

    fn strip_local(&self, p: Vec2) -> Vec2 {
        let (l, n) = (self.junction.side(), self.n());
        let alpha = unit(1.5 * PI + PI / n as f64);
        let sigma = 0.5 * l + l * p.x / self.eps;
        let t = self.k_eps * (p.y - self.a);
        alpha + sigma * Vec2::new(-1.0, 0.0) + m_epsilon(t, sigma, self.eps, n) * Vec2::new(0.0, 1.0)
    }

    fn strip_local_jacobian(&self, p: Vec2) -> Mat2 {
        let (l, n) = (self.junction.side(), self.n());
        let sigma = 0.5 * l + l * p.x / self.eps;
        let t = self.k_eps * (p.y - self.a);
        let (mt, ms) = m_epsilon_derivatives(t, sigma, self.eps, n);
        let c = l / self.eps;
        Mat2::new(-c, 0.0, ms * c, mt * self.k_eps)
    }
}

impl Construction for JunctionMember {
    fn parent(&self) -> &MapSpec {
        &self.parent
    }

    fn ell(&self) -> f64 {
        self.ell
    }

    fn param(&self) -> Param {
        Param::Epsilon(self.eps)
    }

    fn region(&self, x: Vec2) -> Region {
        let n = self.n();
        let in_polygon = (0..n).all(|j| x.dot(&self.junction.interface_dir(j)) <= self.a);
        if in_polygon {
            for j in 0..n {
                if self.corner_weight(j, x) > 0.0 {
                    return Region::new(RegionKind::Corner, j);
                }
            }
            return Region::new(RegionKind::Center, 0);
        }
        for j in 0..n {
            let p = self.local(j, x);
            if p.x.abs() <= 0.5 * self.eps && p.y >= self.a {
                return Region::new(RegionKind::Strip, j);
            }
        }
        Region::new(RegionKind::Sector, self.junction.sector_of(x))
    }

    fn eval_region(&self, r: Region, x: Vec2) -> Vec2 {
        match r.kind {
            RegionKind::Strip => self.global(r.index, self.strip_local(self.local(r.index, x))),
            RegionKind::Corner => self.corner_weight(r.index, x) * self.junction.value(r.index),
            RegionKind::Center => Vec2::zeros(),
            _ => self.junction.value(r.index),
        }
    }

    fn jacobian_region(&self, r: Region, x: Vec2) -> Mat2 {
        match r.kind {
            RegionKind::Strip => {
                let q = self.frames[r.index];
                q * self.strip_local_jacobian(self.local(r.index, x)) * q.transpose()
            }
            RegionKind::Corner => {
                let half = PI / self.n() as f64;
                let d = self.big_r * half.sin().powi(2);
                self.junction.value(r.index) * self.bisector(r.index).transpose() / d
            }
            _ => Mat2::zeros(),
        }
    }

    fn interfaces(&self, per_interface: usize, rng: &mut ChaCha8Rng) -> Vec<InterfacePoint> {
        let (e, a) = (self.eps, self.a);
        let mut out = Vec::new();
        for j in 0..self.n() {
            let strip = Region::new(RegionKind::Strip, j);
            let prev = self.prev(j);
            let y_top = self.y_max(0.5 * e);
            let push = |p: Vec2, other: Region, out: &mut Vec<InterfacePoint>| {
                out.push(InterfacePoint {
                    x: self.global(j, p),
                    a: strip,
                    b: other,
                });
            };
            for _ in 0..per_interface {
                let y = rng.gen_range(a..y_top);
                push(Vec2::new(-0.5 * e, y), Region::new(RegionKind::Sector, j), &mut out);
                let y = rng.gen_range(a..y_top);
                push(Vec2::new(0.5 * e, y), Region::new(RegionKind::Sector, prev), &mut out);
                let xp = -0.5 * e * rng.gen::<f64>();
                push(Vec2::new(xp, a), Region::new(RegionKind::Corner, j), &mut out);
                let xp = 0.5 * e * rng.gen::<f64>();
                push(Vec2::new(xp, a), Region::new(RegionKind::Corner, prev), &mut out);
            }
            let (m0, m1) = (self.midpoint(j), self.midpoint((j + 1) % self.n()));
            for _ in 0..per_interface {
                let s = rng.gen::<f64>();
                out.push(InterfacePoint {
                    x: m0 + s * (m1 - m0),
                    a: Region::new(RegionKind::Corner, j),
                    b: Region::new(RegionKind::Center, 0),
                });
            }
        }
        out
    }

    /// Sectors are constant, so each gets a single node carrying its exact area.
    /// Strips use tensor Gauss–Legendre split at `x' = 0` and at the end of the
    /// transition zone; the polygon pieces are triangles with affine values.
    fn quadrature(&self, opts: &QuadOptions) -> Vec<QuadPoint> {
        let n = self.n();
        let (e, a) = (self.eps, self.a);
        let mut out = Vec::new();

        let sector_w = (PI * self.ell * self.ell - n as f64 * self.strip_area() - self.polygon_area()) / n as f64;
        for j in 0..n {
            out.push(QuadPoint {
                x: 0.5 * self.ell * self.bisector(j),
                w: sector_w,
            });
        }

        let panel = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            let h = (hi - lo) / opts.panels as f64;
            (0..opts.panels)
                .flat_map(|p| gauss_legendre_on(lo + p as f64 * h, lo + (p + 1) as f64 * h, opts.order))
                .collect()
        };
        let y_mid = a + e / self.k_eps;
        let xs: Vec<(f64, f64)> = panel(-0.5 * e, 0.0).into_iter().chain(panel(0.0, 0.5 * e)).collect();
        let inner = panel(a, y_mid);
        for j in 0..n {
            for &(xp, wx) in &xs {
                for &(yp, wy) in inner.iter().chain(panel(y_mid, self.y_max(xp)).iter()) {
                    out.push(QuadPoint {
                        x: self.global(j, Vec2::new(xp, yp)),
                        w: wx * wy,
                    });
                }
            }
        }

        let tri_area = |p: Vec2, q: Vec2, r: Vec2| 0.5 * ((q - p).perp(&(r - p))).abs();
        for j in 0..n {
            let (m0, m1) = (self.midpoint(j), self.midpoint((j + 1) % n));
            out.push(QuadPoint {
                x: (m0 + m1) / 3.0,
                w: tri_area(Vec2::zeros(), m0, m1),
            });
            let v = self.corner(j);
            let w = tri_area(v, m0, m1) / 3.0;
            for (p, q, r) in [(v, m0, m1), (m0, m1, v), (m1, v, m0)] {
                out.push(QuadPoint {
                    x: (4.0 * p + q + r) / 6.0,
                    w,
                });
            }
        }
        out
    }

    fn lipschitz_bound(&self) -> f64 {
        let (l, h, e) = (self.junction.side(), self.junction.apothem(), self.eps);
        let strip = ((l / e).powi(2) * (1.0 + (2.0 * h / l).powi(2)) + (self.k_eps * h / e).powi(2)).sqrt();
        let half = PI / self.n() as f64;
        strip.max(1.0 / (self.big_r * half.sin().powi(2)))
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        let y_mid = self.a + self.eps / self.k_eps;
        vec![self.a, self.big_r, y_mid, y_mid.hypot(0.5 * self.eps)]
    }

    fn is_core(&self, r: Region) -> bool {
        r.kind != RegionKind::Sector
    }
}
