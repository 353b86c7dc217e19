//! Closed-form S¹-valued maps on the disk `B_ℓ(0)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle::{variation, CircleMap, LiftingSeries};
use crate::field::{GridField, GridSpec};
use crate::numerics::{cmul, perp, principal_angle, unit};
use crate::{Error, Mat2, Result, Vec2};

/// Boundary datum `φ` of a vortex-type map, given by its lifting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// `θ ↦ e^{idθ}`.
    Power { degree: i64 },
    /// `θ ↦ exp(i[offset + dθ + Σ cosₖ cos kθ + sinₖ sin kθ])`.
    Fourier {
        degree: i64,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl PhiSpec {
    pub fn series(&self) -> LiftingSeries {
        match self {
            PhiSpec::Power { degree } => LiftingSeries::linear(0.0, *degree),
            PhiSpec::Fourier {
                degree,
                offset,
                cos,
                sin,
            } => {
                let k = cos.len().max(sin.len());
                let mut c = cos.clone();
                let mut s = sin.clone();
                c.resize(k, 0.0);
                s.resize(k, 0.0);
                LiftingSeries {
                    offset: *offset,
                    degree: *degree,
                    cos: c,
                    sin: s,
                }
            }
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            PhiSpec::Power { degree } | PhiSpec::Fourier { degree, .. } => *degree,
        }
    }

    pub fn circle_map(&self, n: usize) -> Result<CircleMap> {
        self.series().to_circle_map(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Singularity {
    pub center: [f64; 2],
    pub degree: i64,
}

impl Singularity {
    pub fn point(&self) -> Vec2 {
        Vec2::new(self.center[0], self.center[1])
    }
}

/// Map families. The domain is always `B_ℓ(0)` with `ℓ` supplied by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `x ↦ x/|x|`.
    Vortex,
    /// `x ↦ φ(x/|x|)`.
    PhiVortex { phi: PhiSpec },
    /// `x ↦ Πᵢ ((x − xᵢ)/|x − xᵢ|)^{dᵢ}` (complex powers).
    MultiSingularity { singularities: Vec<Singularity> },
    /// Three constant sectors with values on an equilateral triangle.
    TripleJunction {
        #[serde(default)]
        offset: f64,
    },
    /// `n` constant sectors with values on a regular `n`-gon.
    NJunction {
        n: usize,
        #[serde(default)]
        offset: f64,
    },
}

impl MapSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MapSpec::Vortex => "vortex",
            MapSpec::PhiVortex { .. } => "phi_vortex",
            MapSpec::MultiSingularity { .. } => "multi_singularity",
            MapSpec::TripleJunction { .. } => "triple_junction",
            MapSpec::NJunction { .. } => "n_junction",
        }
    }

    /// Checks the parameter invariants for the disk `B_ℓ(0)`.
    pub fn validate(&self, ell: f64) -> Result<()> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidMap(format!("radius {ell} must be positive")));
        }
        match self {
            MapSpec::MultiSingularity { singularities } => {
                if singularities.is_empty() {
                    return Err(Error::InvalidMap("no singularities given".into()));
                }
                for (i, s) in singularities.iter().enumerate() {
                    if s.degree == 0 {
                        return Err(Error::InvalidMap(format!("singularity {i} has degree 0")));
                    }
                    if !(s.point().norm() < ell) {
                        return Err(Error::InvalidMap(format!(
                            "singularity {i} at {:?} lies outside the disk",
                            s.center
                        )));
                    }
                    for (j, t) in singularities.iter().enumerate().skip(i + 1) {
                        if s.point() == t.point() {
                            return Err(Error::InvalidMap(format!(
                                "singularities {i} and {j} coincide"
                            )));
                        }
                    }
                }
                Ok(())
            }
            MapSpec::NJunction { n, .. } if *n < 2 => {
                Err(Error::InvalidMap(format!("junction needs n >= 2, got {n}")))
            }
            _ => Ok(()),
        }
    }

    /// Junction geometry, for the junction kinds.
    pub fn junction(&self) -> Option<Junction> {
        match *self {
            MapSpec::TripleJunction { offset } => Some(Junction::new(3, offset)),
            MapSpec::NJunction { n, offset } => Some(Junction::new(n, offset)),
            _ => None,
        }
    }

    /// Boundary datum of the vortex kinds.
    pub fn phi(&self) -> Option<PhiSpec> {
        match self {
            MapSpec::Vortex => Some(PhiSpec::Power { degree: 1 }),
            MapSpec::PhiVortex { phi } => Some(phi.clone()),
            _ => None,
        }
    }

    /// Singular atoms `(xᵢ, dᵢ)` of the vortex kinds.
    pub fn singularities(&self) -> Vec<Singularity> {
        match self {
            MapSpec::Vortex => vec![Singularity {
                center: [0.0, 0.0],
                degree: 1,
            }],
            MapSpec::PhiVortex { phi } if phi.degree() != 0 => vec![Singularity {
                center: [0.0, 0.0],
                degree: phi.degree(),
            }],
            MapSpec::MultiSingularity { singularities } => singularities.clone(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        match self {
            MapSpec::Vortex => {
                let r = x.norm();
                if r == 0.0 {
                    return Err(Error::SingularPoint([x.x, x.y]));
                }
                Ok(x / r)
            }
            MapSpec::PhiVortex { phi } => {
                if x.norm() == 0.0 {
                    return Err(Error::SingularPoint([x.x, x.y]));
                }
                Ok(phi.series().value(x.y.atan2(x.x)))
            }
            MapSpec::MultiSingularity { singularities } => {
                let mut acc = Vec2::new(1.0, 0.0);
                for s in singularities {
                    let rel = x - s.point();
                    let r = rel.norm();
                    if r == 0.0 {
                        return Err(Error::SingularPoint(s.center));
                    }
                    acc = cmul(acc, complex_power(rel / r, s.degree));
                }
                Ok(acc / acc.norm())
            }
            MapSpec::TripleJunction { .. } | MapSpec::NJunction { .. } => {
                let j = self.junction().expect("junction kind");
                j.eval(x)
            }
        }
    }

    /// Analytic Jacobian `∂uᵢ/∂xⱼ` away from singular points and jump sets.
    pub fn jacobian(&self, x: Vec2) -> Result<Mat2> {
        let u = self.eval(x)?;
        let grad_angle = match self {
            MapSpec::Vortex => perp(x) / x.norm_squared(),
            MapSpec::PhiVortex { phi } => {
                phi.series().derivative(x.y.atan2(x.x)) * perp(x) / x.norm_squared()
            }
            MapSpec::MultiSingularity { singularities } => singularities
                .iter()
                .map(|s| {
                    let rel = x - s.point();
                    s.degree as f64 * perp(rel) / rel.norm_squared()
                })
                .sum(),
            MapSpec::TripleJunction { .. } | MapSpec::NJunction { .. } => return Ok(Mat2::zeros()),
        };
        Ok(perp(u) * grad_angle.transpose())
    }

    /// Samples on a grid, masking nodes where the value is undefined.
    ///
    /// On Cartesian grids junction maps are also masked within half a cell of the jump set.
    pub fn sample(&self, grid: &GridSpec) -> Result<GridField> {
        let band = if grid.is_polar() {
            0.0
        } else {
            0.5 * grid.spacing()
        };
        let junction = self.junction();
        GridField::from_fn(*grid, |x| {
            if let Some(j) = &junction {
                if j.distance_to_jump_set(x) < band {
                    return None;
                }
            }
            self.eval(x).ok()
        })
    }

    /// Closed-form `|Du|(B_ℓ)`: `ℓ·Var(φ)` for vortex kinds, `nLℓ` for junctions.
    pub fn exact_total_variation(&self, ell: f64) -> Result<f64> {
        match self {
            MapSpec::Vortex => Ok(2.0 * PI * ell),
            MapSpec::PhiVortex { phi } => match phi {
                PhiSpec::Power { degree } => Ok(2.0 * PI * degree.unsigned_abs() as f64 * ell),
                PhiSpec::Fourier { .. } => Ok(ell * variation(&phi.circle_map(1 << 16)?)),
            },
            MapSpec::TripleJunction { .. } | MapSpec::NJunction { .. } => {
                let j = self.junction().expect("junction kind");
                Ok(j.n as f64 * j.side() * ell)
            }
            MapSpec::MultiSingularity { .. } => Err(Error::UnsupportedKind(self.kind_name())),
        }
    }
}

/// `z^d` for a unit complex number `z`.
pub fn complex_power(z: Vec2, d: i64) -> Vec2 {
    let base = if d < 0 { Vec2::new(z.x, -z.y) } else { z };
    let mut acc = Vec2::new(1.0, 0.0);
    for _ in 0..d.unsigned_abs() {
        acc = cmul(acc, base);
    }
    acc
}

/// Symmetric `n`-junction: `n` equal sectors separated by rays from the origin.
///
/// Interface `j` is the ray at angle `π/2 + offset + 2πj/n`. Sector `j` lies
/// between interfaces `j` and `j + 1`; its value is the unit vector opposite
/// to its bisector, so adjacent values differ by the side `L = 2 sin(π/n)` of
/// the inscribed regular `n`-gon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junction {
    pub n: usize,
    pub offset: f64,
}

impl Junction {
    pub fn new(n: usize, offset: f64) -> Self {
        Junction { n, offset }
    }

    pub fn sector_angle(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Polygon side `L = 2 sin(π/n)`.
    pub fn side(&self) -> f64 {
        2.0 * (PI / self.n as f64).sin()
    }

    /// Apothem `h = cos(π/n)`.
    pub fn apothem(&self) -> f64 {
        (PI / self.n as f64).cos()
    }

    /// Area of the value polygon, `(n/2)·h·L`.
    pub fn polygon_area(&self) -> f64 {
        0.5 * self.n as f64 * self.apothem() * self.side()
    }

    pub fn interface_angle(&self, j: usize) -> f64 {
        0.5 * PI + self.offset + j as f64 * self.sector_angle()
    }

    pub fn interface_dir(&self, j: usize) -> Vec2 {
        unit(self.interface_angle(j))
    }

    pub fn value(&self, j: usize) -> Vec2 {
        unit(self.interface_angle(j) + 0.5 * self.sector_angle() + PI)
    }

    /// Sector index and angular distance to the nearest interface.
    fn locate(&self, x: Vec2) -> (usize, f64) {
        let a = (x.y.atan2(x.x) - self.interface_angle(0)).rem_euclid(2.0 * PI);
        let s = self.sector_angle();
        let j = ((a / s).floor() as usize).min(self.n - 1);
        let frac = a - j as f64 * s;
        (j, frac.min(s - frac))
    }

    pub fn sector_of(&self, x: Vec2) -> usize {
        self.locate(x).0
    }

    pub fn distance_to_jump_set(&self, x: Vec2) -> f64 {
        let r = x.norm();
        let (_, da) = self.locate(x);
        if da >= 0.5 * PI {
            r
        } else {
            r * da.sin()
        }
    }

    pub fn eval(&self, x: Vec2) -> Result<Vec2> {
        let r = x.norm();
        let (j, da) = self.locate(x);
        if r == 0.0 || principal_angle(da).abs() * r <= 1e-14 * r.max(1.0) {
            return Err(Error::OnJumpSet([x.x, x.y]));
        }
        Ok(self.value(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vortex_value() {
        let v = MapSpec::Vortex.eval(Vec2::new(0.3, 0.4)).unwrap();
        assert!((v - Vec2::new(0.6, 0.8)).norm() < 1e-15);
        assert!(matches!(
            MapSpec::Vortex.eval(Vec2::zeros()),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn triple_junction_layout() {
        let j = MapSpec::TripleJunction { offset: 0.0 }.junction().unwrap();
        let deg = |v: Vec2| v.y.atan2(v.x).to_degrees();
        assert!((deg(j.value(0)) + 30.0).abs() < 1e-12);
        assert!((deg(j.value(1)) - 90.0).abs() < 1e-12);
        assert!((deg(j.value(2)) + 150.0).abs() < 1e-12);
        assert!(((j.value(0) - j.value(1)).norm() - 3f64.sqrt()).abs() < 1e-12);
        assert!((j.apothem() - 0.5).abs() < 1e-15);
        let deep_b = Vec2::new(0.0, -0.5);
        let v = MapSpec::TripleJunction { offset: 0.0 }.eval(deep_b).unwrap();
        assert!((v - j.value(1)).norm() < 1e-15);
        assert!(matches!(
            MapSpec::TripleJunction { offset: 0.0 }.eval(Vec2::new(0.0, 0.3)),
            Err(Error::OnJumpSet(_))
        ));
    }

    #[test]
    fn dipole_angle() {
        let spec = MapSpec::MultiSingularity {
            singularities: vec![
                Singularity {
                    center: [-0.5, 0.0],
                    degree: 1,
                },
                Singularity {
                    center: [0.5, 0.0],
                    degree: -1,
                },
            ],
        };
        for y in [0.1, 0.4, 0.9] {
            let x = Vec2::new(0.0, y);
            let v = spec.eval(x).unwrap();
            let a1 = (x - Vec2::new(-0.5, 0.0)).y.atan2(0.5);
            let a2 = (x - Vec2::new(0.5, 0.0)).y.atan2(-0.5);
            assert!((principal_angle(v.y.atan2(v.x) - (a1 - a2))).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_jacobian_matches_difference() {
        let specs = [
            MapSpec::Vortex,
            MapSpec::PhiVortex {
                phi: PhiSpec::Fourier {
                    degree: -2,
                    offset: 0.3,
                    cos: vec![0.2],
                    sin: vec![0.0, -0.1],
                },
            },
            MapSpec::MultiSingularity {
                singularities: vec![
                    Singularity {
                        center: [0.2, 0.1],
                        degree: 2,
                    },
                    Singularity {
                        center: [-0.4, 0.0],
                        degree: -1,
                    },
                ],
            },
        ];
        let x = Vec2::new(0.31, -0.47);
        let h = 1e-6;
        for s in &specs {
            let j = s.jacobian(x).unwrap();
            for c in 0..2 {
                let e = if c == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
                let fd = (s.eval(x + e).unwrap() - s.eval(x - e).unwrap()) / (2.0 * h);
                assert!((j.column(c) - fd).norm() < 1e-7, "{s:?}");
            }
        }
    }

    #[test]
    fn exact_variations() {
        assert!((MapSpec::Vortex.exact_total_variation(1.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        let t = MapSpec::TripleJunction { offset: 0.0 };
        assert!((t.exact_total_variation(1.0).unwrap() - 3.0 * 3f64.sqrt()).abs() < 1e-14);
        let q = MapSpec::NJunction { n: 4, offset: 0.0 };
        assert!((q.exact_total_variation(1.0).unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        let m = MapSpec::MultiSingularity {
            singularities: vec![Singularity {
                center: [0.0, 0.0],
                degree: 1,
            }],
        };
        assert!(matches!(m.exact_total_variation(1.0), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn fourier_phi_variation() {
        let spec = MapSpec::PhiVortex {
            phi: PhiSpec::Fourier {
                degree: 1,
                offset: 0.0,
                cos: vec![],
                sin: vec![0.3],
            },
        };
        let tv = spec.exact_total_variation(2.0).unwrap();
        assert!((tv - 4.0 * PI).abs() < 1e-8);
    }
}
