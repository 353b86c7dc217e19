use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;

use super::quadrature::{partition_rule, Patch, QuadOptions, QuadPoint};
use super::{polar_to_cartesian, random_angle, Construction, InterfacePoint, Param, Region, RegionKind};
use crate::circle::{lift, CircleMap, Homotopy, LiftingSeries, DEFAULT_SAMPLES};
use crate::maps::MapSpec;
use crate::numerics::{perp, unit};
use crate::{Error, Mat2, Result, Vec2};

const OUTER: Region = Region::new(RegionKind::Outer, 0);

#[derive(Debug, Clone)]
struct Site {
    center: Vec2,
    degree: i64,
    homotopy: Homotopy,
}

/// Member `k` of the multi-singularity family.
///
/// Around each `xᵢ`: a linear core on `B_{r_{k+1}}(xᵢ)`, a homotopy annulus up
/// to `r_k`, and the parent map itself elsewhere. `r_k = 1.5·2^{−k}·r₁`.
#[derive(Debug, Clone)]
pub struct GeneralMember {
    parent: MapSpec,
    ell: f64,
    k: u32,
    r1: f64,
    sites: Vec<Site>,
}

/// Builds member `k` for a multi-singularity map on `B_ℓ`.
///
/// `r1` defaults to 0.9 times the largest radius keeping the discs disjoint
/// and inside the domain.
pub fn general_recovery(spec: &MapSpec, ell: f64, k: u32, r1: Option<f64>) -> Result<GeneralMember> {
    let MapSpec::MultiSingularity { singularities } = spec else {
        return Err(Error::UnsupportedKind(spec.kind_name()));
    };
    spec.validate(ell)?;
    if k < 2 {
        return Err(Error::InvalidIndex(format!("general family needs k >= 2, got {k}")));
    }
    let pts: Vec<Vec2> = singularities.iter().map(|s| s.point()).collect();
    let mut limit = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        limit = limit.min(ell - p.norm());
        for q in &pts[i + 1..] {
            limit = limit.min(0.5 * (p - q).norm());
        }
    }
    let r1 = match r1 {
        None => 0.9 * limit,
        Some(r) if r > 0.0 && r < limit => r,
        Some(r) => {
            return Err(Error::DiscsOverlap(format!(
                "r1 = {r} must lie in (0, {limit}) for these singularities"
            )))
        }
    };
    let rk = 1.5 * r1 * 0.5f64.powi(k as i32);
    let mut sites = Vec::with_capacity(pts.len());
    for (s, &c) in singularities.iter().zip(&pts) {
        let trace = CircleMap::from_fn(DEFAULT_SAMPLES, |t| {
            spec.eval(c + rk * unit(t)).expect("trace circle avoids singular points")
        })?;
        let end = LiftingSeries::from_lifting(&lift(&trace))?.recentered();
        let homotopy = Homotopy::from_series(LiftingSeries::linear(0.0, s.degree), end)?;
        sites.push(Site {
            center: c,
            degree: s.degree,
            homotopy,
        });
    }
    Ok(GeneralMember {
        parent: spec.clone(),
        ell,
        k,
        r1,
        sites,
    })
}

impl GeneralMember {
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// `r_k = 1.5·2^{−k}·r₁`.
    pub fn radius(&self, k: u32) -> f64 {
        1.5 * self.r1 * 0.5f64.powi(k as i32)
    }

    fn inner(&self) -> f64 {
        self.radius(self.k + 1)
    }

    fn outer(&self) -> f64 {
        self.radius(self.k)
    }
}

impl Construction for GeneralMember {
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
        let (ri, ro) = (self.inner(), self.outer());
        for (i, s) in self.sites.iter().enumerate() {
            let r = (x - s.center).norm();
            if r < ri {
                return Region::new(RegionKind::Core, i);
            }
            if r < ro {
                return Region::new(RegionKind::Annulus, i);
            }
        }
        OUTER
    }

    fn eval_region(&self, region: Region, x: Vec2) -> Vec2 {
        if region.kind == RegionKind::Outer {
            return self.parent.eval(x).unwrap_or_else(|_| Vec2::zeros());
        }
        let s = &self.sites[region.index];
        let rel = x - s.center;
        let rho = rel.norm();
        let theta = rel.y.atan2(rel.x);
        let ri = self.inner();
        match region.kind {
            RegionKind::Core => {
                if rho == 0.0 {
                    return Vec2::zeros();
                }
                rho / ri * unit(s.degree as f64 * theta)
            }
            _ => s.homotopy.eval((rho - ri) / (self.outer() - ri), theta),
        }
    }

    fn jacobian_region(&self, region: Region, x: Vec2) -> Mat2 {
        if region.kind == RegionKind::Outer {
            return self.parent.jacobian(x).unwrap_or_else(|_| Mat2::zeros());
        }
        let s = &self.sites[region.index];
        let rel = x - s.center;
        let rho = rel.norm();
        if rho == 0.0 {
            return Mat2::zeros();
        }
        let theta = rel.y.atan2(rel.x);
        let ri = self.inner();
        let (d_rho, d_theta) = match region.kind {
            RegionKind::Core => {
                let e = unit(s.degree as f64 * theta);
                (e / ri, s.degree as f64 / ri * perp(e))
            }
            _ => {
                let width = self.outer() - ri;
                let t = (rho - ri) / width;
                let v = s.homotopy.eval(t, theta);
                let (psi_t, psi_theta) = s.homotopy.lifting_derivatives(t, theta);
                (perp(v) * psi_t / width, perp(v) * psi_theta / rho)
            }
        };
        polar_to_cartesian(d_rho, d_theta, theta)
    }

    fn interfaces(&self, per_interface: usize, rng: &mut ChaCha8Rng) -> Vec<InterfacePoint> {
        let mut out = Vec::new();
        for (i, s) in self.sites.iter().enumerate() {
            let core = Region::new(RegionKind::Core, i);
            let annulus = Region::new(RegionKind::Annulus, i);
            for (r, a, b) in [(self.inner(), core, annulus), (self.outer(), annulus, OUTER)] {
                for _ in 0..per_interface {
                    out.push(InterfacePoint {
                        x: s.center + r * unit(random_angle(rng)),
                        a,
                        b,
                    });
                }
            }
        }
        out
    }

    /// Partition-of-unity rule with one patch per singularity; patch rings
    /// break at `r_{k+1}` and `r_k`. The global rule gets four times the panels.
    fn quadrature(&self, opts: &QuadOptions) -> Vec<QuadPoint> {
        let patches: Vec<Patch> = self
            .sites
            .iter()
            .map(|s| Patch {
                center: s.center,
                radius: self.r1,
                breaks: vec![self.inner(), self.outer()],
            })
            .collect();
        let global = QuadOptions {
            panels: 4 * opts.panels,
            ..*opts
        };
        partition_rule(self.ell, &patches, &global, opts)
    }

    fn lipschitz_bound(&self) -> f64 {
        let ri = self.inner();
        let width = self.outer() - ri;
        let n = 1024;
        let mut bound = 0.0f64;
        for s in &self.sites {
            let d = s.degree as f64;
            bound = bound.max((1.0 + d * d).sqrt() / ri);
            for j in 0..n {
                let th = 2.0 * PI * j as f64 / n as f64;
                let (dt, _) = s.homotopy.lifting_derivatives(0.0, th);
                let slope = s.homotopy.end().derivative(th).abs().max(d.abs());
                bound = bound.max(((dt / width).powi(2) + (slope / ri).powi(2)).sqrt());
            }
        }
        bound
    }

    /// Radii of origin-centered circles tangent to some core or annulus boundary.
    fn radial_breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.sites {
            let c = s.center.norm();
            for r in [self.inner(), self.outer()] {
                out.push(c + r);
                if c > r {
                    out.push(c - r);
                } else if c == 0.0 {
                    out.push(r);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn is_core(&self, r: Region) -> bool {
        r.kind == RegionKind::Core
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Singularity;
    use crate::recovery::{RecoveryMember, VortexMember};

    fn pair() -> MapSpec {
        MapSpec::MultiSingularity {
            singularities: vec![
                Singularity {
                    center: [-0.4, 0.1],
                    degree: 1,
                },
                Singularity {
                    center: [0.35, -0.2],
                    degree: -2,
                },
            ],
        }
    }

    #[test]
    fn radii_follow_dyadic_schedule() {
        let m = general_recovery(&pair(), 1.0, 3, None).unwrap();
        let d = (Vec2::new(-0.4, 0.1) - Vec2::new(0.35, -0.2)).norm();
        assert!((m.r1() - 0.9 * (0.5 * d).min(1.0 - 0.35f64.hypot(0.2))).abs() < 1e-15);
        assert!((m.radius(3) - 1.5 * m.r1() / 8.0).abs() < 1e-15);
        assert!(matches!(
            general_recovery(&pair(), 1.0, 3, Some(0.5)),
            Err(Error::DiscsOverlap(_))
        ));
        assert!(matches!(
            general_recovery(&pair(), 1.0, 1, None),
            Err(Error::InvalidIndex(_))
        ));
    }

    #[test]
    fn single_centered_singularity_is_the_vortex_member() {
        let spec = MapSpec::MultiSingularity {
            singularities: vec![Singularity {
                center: [0.0, 0.0],
                degree: 1,
            }],
        };
        // r_3 = 0.1875·r₁ = 1/8 matches the vortex member with k = 8.
        let g = general_recovery(&spec, 1.0, 2, Some(2.0 / 3.0)).unwrap();
        let v = VortexMember::from_spec(&MapSpec::Vortex, 1.0, 8).unwrap();
        for x in [Vec2::new(0.05, 0.02), Vec2::new(-0.15, 0.1), Vec2::new(0.3, 0.6)] {
            let a = g.eval_region(g.region(x), x);
            let b = v.eval_region(v.region(x), x);
            assert!((a - b).norm() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn core_masses_are_pi_times_degree() {
        let m = RecoveryMember::build(&pair(), 1.0, Param::K(4)).unwrap();
        let opts = QuadOptions::default();
        for (i, d) in [(0usize, 1.0), (1, 2.0)] {
            let f = m.functionals_where(&opts, |r| r == Region::new(RegionKind::Core, i));
            assert!((f.jacobian_mass - PI * d).abs() < 1e-9 * PI * d, "{i}: {}", f.jacobian_mass);
        }
    }

    #[test]
    fn analytic_jacobian_matches_difference() {
        let m = general_recovery(&pair(), 1.0, 3, None).unwrap();
        let ri = m.inner();
        let h = 1e-7;
        for x in [
            Vec2::new(-0.4 + 0.5 * ri, 0.1 + 0.2 * ri),
            Vec2::new(0.35 - 1.4 * ri, -0.2 + 0.3 * ri),
            Vec2::new(0.1, 0.5),
        ] {
            let r = m.region(x);
            let j = m.jacobian_region(r, x);
            for c in 0..2 {
                let e = if c == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
                let fd = (m.eval_region(r, x + e) - m.eval_region(r, x - e)) / (2.0 * h);
                assert!((j.column(c) - fd).norm() < 1e-5 * (1.0 + fd.norm()), "{x:?} {r:?}");
            }
        }
    }
}
