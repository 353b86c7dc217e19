use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;

use super::quadrature::{polar_rule, QuadOptions, QuadPoint};
use super::{polar_to_cartesian, random_angle, Construction, InterfacePoint, Param, Region, RegionKind};
use crate::circle::{lift, CircleMap, Homotopy, LiftingSeries};
use crate::maps::{MapSpec, PhiSpec};
use crate::numerics::{perp, unit};
use crate::{Error, Mat2, Result, Vec2};

const CORE: Region = Region::new(RegionKind::Core, 0);
const ANNULUS: Region = Region::new(RegionKind::Annulus, 0);
const OUTER: Region = Region::new(RegionKind::Outer, 0);

/// Member `k` of the vortex-type family on `B_ℓ`.
///
/// Core `|x| < ℓ/k`: `(k|x|/ℓ)·e^{idθ}`. Annulus `ℓ/k ≤ |x| < 2ℓ/k`: the
/// lifting homotopy from `e^{idθ}` to `φ` at `t = k|x|/ℓ − 1`. Outside: `φ(θ)`.
#[derive(Debug, Clone)]
pub struct VortexMember {
    parent: MapSpec,
    ell: f64,
    k: u32,
    degree: i64,
    homotopy: Homotopy,
}

/// Builds member `k` from a sampled boundary datum.
pub fn vortex_recovery(phi: &CircleMap, ell: f64, k: u32) -> Result<VortexMember> {
    let series = LiftingSeries::from_lifting(&lift(phi))?;
    let parent = MapSpec::PhiVortex {
        phi: PhiSpec::Fourier {
            degree: series.degree,
            offset: series.offset,
            cos: series.cos.clone(),
            sin: series.sin.clone(),
        },
    };
    VortexMember::new(parent, series, ell, k)
}

impl VortexMember {
    pub fn from_spec(spec: &MapSpec, ell: f64, k: u32) -> Result<Self> {
        let phi = spec.phi().ok_or(Error::UnsupportedKind(spec.kind_name()))?;
        VortexMember::new(spec.clone(), phi.series(), ell, k)
    }

    fn new(parent: MapSpec, phi: LiftingSeries, ell: f64, k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidIndex(format!("vortex family needs k >= 2, got {k}")));
        }
        if !(ell > 0.0) {
            return Err(Error::InvalidMap(format!("radius {ell} must be positive")));
        }
        let degree = phi.degree;
        let homotopy = Homotopy::from_series(LiftingSeries::linear(0.0, degree), phi.recentered())?;
        Ok(VortexMember {
            parent,
            ell,
            k,
            degree,
            homotopy,
        })
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Core radius `ℓ/k`.
    pub fn r1(&self) -> f64 {
        self.ell / self.k as f64
    }

    /// Outer annulus radius `2ℓ/k`.
    pub fn r2(&self) -> f64 {
        2.0 * self.r1()
    }
}

impl Construction for VortexMember {
    fn parent(&self) -> &MapSpec {
        &self.parent
    }

    fn ell(&self) -> f64 {
        self.ell
    }

    fn param(&self) -> Param {
        Param::K(self.k)
    }

    fn region(&self, x: Vec2) -> Region {
        let r = x.norm();
        if r < self.r1() {
            CORE
        } else if r < self.r2() {
            ANNULUS
        } else {
            OUTER
        }
    }

    fn eval_region(&self, region: Region, x: Vec2) -> Vec2 {
        let rho = x.norm();
        let theta = x.y.atan2(x.x);
        match region.kind {
            RegionKind::Core => {
                if rho == 0.0 {
                    return Vec2::zeros();
                }
                rho / self.r1() * unit(self.degree as f64 * theta)
            }
            RegionKind::Annulus => self.homotopy.eval(rho / self.r1() - 1.0, theta),
            _ => self.homotopy.end().value(theta),
        }
    }

    fn jacobian_region(&self, region: Region, x: Vec2) -> Mat2 {
        let rho = x.norm();
        if rho == 0.0 {
            return Mat2::zeros();
        }
        let theta = x.y.atan2(x.x);
        let r1 = self.r1();
        let (d_rho, d_theta) = match region.kind {
            RegionKind::Core => {
                let e = unit(self.degree as f64 * theta);
                (e / r1, self.degree as f64 / r1 * perp(e))
            }
            RegionKind::Annulus => {
                let t = rho / r1 - 1.0;
                let v = self.homotopy.eval(t, theta);
                let (psi_t, psi_theta) = self.homotopy.lifting_derivatives(t, theta);
                (perp(v) * psi_t / r1, perp(v) * psi_theta / rho)
            }
            _ => {
                let end = self.homotopy.end();
                (Vec2::zeros(), perp(end.value(theta)) * end.derivative(theta) / rho)
            }
        };
        polar_to_cartesian(d_rho, d_theta, theta)
    }

    fn interfaces(&self, per_interface: usize, rng: &mut ChaCha8Rng) -> Vec<InterfacePoint> {
        let mut out = Vec::new();
        let mut ring = |r: f64, a: Region, b: Region, out: &mut Vec<InterfacePoint>| {
            for _ in 0..per_interface {
                out.push(InterfacePoint {
                    x: r * unit(random_angle(rng)),
                    a,
                    b,
                });
            }
        };
        ring(self.r1(), CORE, ANNULUS, &mut out);
        if self.r2() < self.ell {
            ring(self.r2(), ANNULUS, OUTER, &mut out);
        }
        out
    }

    fn quadrature(&self, opts: &QuadOptions) -> Vec<QuadPoint> {
        let mut breaks = vec![0.0, self.r1()];
        if self.r2() < self.ell {
            breaks.push(self.r2());
        }
        breaks.push(self.ell);
        polar_rule(Vec2::zeros(), &breaks, opts)
    }

    fn lipschitz_bound(&self) -> f64 {
        let r1 = self.r1();
        let core = ((1 + self.degree * self.degree) as f64).sqrt() / r1;
        let n = 1024;
        let (mut gap, mut slope) = (0.0f64, 0.0f64);
        for j in 0..n {
            let th = 2.0 * PI * j as f64 / n as f64;
            let (dt, _) = self.homotopy.lifting_derivatives(0.0, th);
            gap = gap.max(dt.abs());
            slope = slope
                .max(self.homotopy.end().derivative(th).abs())
                .max(self.degree.unsigned_abs() as f64);
        }
        let annulus = ((gap / r1).powi(2) + (slope / r1).powi(2)).sqrt();
        core.max(annulus)
    }

    fn radial_breakpoints(&self) -> Vec<f64> {
        vec![self.r1(), self.r2()]
    }

    fn is_core(&self, r: Region) -> bool {
        r.kind == RegionKind::Core
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::power_map;
    use crate::recovery::RecoveryMember;

    #[test]
    fn core_formula_and_outer_region() {
        let m = RecoveryMember::build(&MapSpec::Vortex, 1.0, Param::K(4)).unwrap();
        let x = Vec2::new(0.125, 0.0);
        assert!((m.eval(x) - Vec2::new(0.5, 0.0)).norm() < 1e-15);
        assert!(m.eval(Vec2::zeros()).norm() == 0.0);
        let y = Vec2::new(-0.4, 0.3);
        assert!((m.eval(y) - y / y.norm()).norm() < 1e-15);
    }

    #[test]
    fn core_area_closed_form() {
        for d in [-3i64, 1, 2] {
            let spec = MapSpec::PhiVortex {
                phi: PhiSpec::Power { degree: d },
            };
            let m = RecoveryMember::build(&spec, 1.0, Param::K(8)).unwrap();
            let f = m.functionals_where(&QuadOptions::default(), |r| r.kind == RegionKind::Core);
            let r1: f64 = 1.0 / 8.0;
            let d2 = (d * d) as f64;
            let exact = PI * (r1.powi(4) + (1.0 + d2) * r1 * r1 + d2).sqrt();
            assert!((f.area - exact).abs() < 1e-12, "d = {d}");
            assert!((f.jacobian_mass - PI * d.abs() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_datum_matches_spec() {
        let phi = power_map(-2, 256).unwrap();
        let m = vortex_recovery(&phi, 1.0, 4).unwrap();
        let spec = VortexMember::from_spec(
            &MapSpec::PhiVortex {
                phi: PhiSpec::Power { degree: -2 },
            },
            1.0,
            4,
        )
        .unwrap();
        for x in [Vec2::new(0.1, 0.05), Vec2::new(-0.3, 0.2), Vec2::new(0.7, -0.6)] {
            let r = spec.region(x);
            assert!((m.eval_region(r, x) - spec.eval_region(r, x)).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_jacobian_matches_difference() {
        let spec = MapSpec::PhiVortex {
            phi: PhiSpec::Fourier {
                degree: 2,
                offset: 5.9,
                cos: vec![0.0, 0.3],
                sin: vec![-0.2],
            },
        };
        let m = VortexMember::from_spec(&spec, 1.0, 5).unwrap();
        let h = 1e-7;
        for x in [Vec2::new(0.1, 0.05), Vec2::new(-0.25, 0.2), Vec2::new(0.5, -0.6)] {
            let r = m.region(x);
            let j = m.jacobian_region(r, x);
            for c in 0..2 {
                let e = if c == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
                let fd = (m.eval_region(r, x + e) - m.eval_region(r, x - e)) / (2.0 * h);
                assert!((j.column(c) - fd).norm() < 1e-6, "{x:?} {r:?}");
            }
        }
    }
}
