//! Explicit recovery sequences as evaluable, region-decomposed maps.
//!
//! Every member carries closed-form evaluators per region, analytic Jacobians,
//! and a quadrature rule aligned with its region boundaries.

mod general;
mod junction;
pub mod quadrature;
mod vortex;

pub use general::{general_recovery, GeneralMember};
pub use junction::{junction_recovery, m_epsilon, m_epsilon_derivatives, JunctionMember};
pub use vortex::{vortex_recovery, VortexMember};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{GridField, GridSpec};
use crate::maps::MapSpec;
use crate::numerics::{det, frobenius};
use crate::{Error, Mat2, Result, Vec2};
use quadrature::{QuadOptions, QuadPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Core,
    Annulus,
    Outer,
    Sector,
    Strip,
    Corner,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub index: usize,
}

impl Region {
    pub const fn new(kind: RegionKind, index: usize) -> Self {
        Region { kind, index }
    }
}

/// Refinement parameter: an integer index `k` or a width `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    K(u32),
    Epsilon(f64),
}

impl Param {
    /// Mesh-like size: `1/k` or `ε`.
    pub fn size(&self) -> f64 {
        match *self {
            Param::K(k) => 1.0 / k as f64,
            Param::Epsilon(e) => e,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Param::K(k) => k as f64,
            Param::Epsilon(e) => e,
        }
    }
}

/// A point on the shared boundary of two regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub x: Vec2,
    pub a: Region,
    pub b: Region,
}

/// Integrals of one member over `B_ℓ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    /// `∫ √(1 + |∇v|² + det²)`.
    pub area: f64,
    /// `∫ √(1 + |∇v|²)`.
    pub smooth_part: f64,
    /// `∫ |det ∇v|`.
    pub jacobian_mass: f64,
    /// `∫ |∇v|`.
    pub total_variation: f64,
    /// `∫ |v − u|` against the parent map.
    pub l1_error: f64,
}

pub(crate) trait Construction: Send + Sync {
    fn parent(&self) -> &MapSpec;
    fn ell(&self) -> f64;
    fn param(&self) -> Param;
    fn region(&self, x: Vec2) -> Region;
    fn eval_region(&self, r: Region, x: Vec2) -> Vec2;
    fn jacobian_region(&self, r: Region, x: Vec2) -> Mat2;
    fn interfaces(&self, per_interface: usize, rng: &mut ChaCha8Rng) -> Vec<InterfacePoint>;
    fn quadrature(&self, opts: &QuadOptions) -> Vec<QuadPoint>;
    fn lipschitz_bound(&self) -> f64;
    fn radial_breakpoints(&self) -> Vec<f64>;
    /// Regions allowed to leave S¹.
    fn is_core(&self, r: Region) -> bool;
}

#[derive(Debug, Clone)]
pub enum RecoveryMember {
    Vortex(VortexMember),
    General(GeneralMember),
    Junction(JunctionMember),
}

impl RecoveryMember {
    fn c(&self) -> &dyn Construction {
        match self {
            RecoveryMember::Vortex(m) => m,
            RecoveryMember::General(m) => m,
            RecoveryMember::Junction(m) => m,
        }
    }

    /// Builds member `param` of the family recovering `spec` on `B_ℓ`.
    pub fn build(spec: &MapSpec, ell: f64, param: Param) -> Result<Self> {
        spec.validate(ell)?;
        match (spec, param) {
            (MapSpec::Vortex | MapSpec::PhiVortex { .. }, Param::K(k)) => {
                Ok(RecoveryMember::Vortex(VortexMember::from_spec(spec, ell, k)?))
            }
            (MapSpec::MultiSingularity { .. }, Param::K(k)) => {
                Ok(RecoveryMember::General(general_recovery(spec, ell, k, None)?))
            }
            (MapSpec::TripleJunction { .. } | MapSpec::NJunction { .. }, Param::Epsilon(e)) => {
                Ok(RecoveryMember::Junction(junction_recovery(spec, ell, e)?))
            }
            _ => Err(Error::InvalidIndex(format!(
                "{:?} does not index the {} family",
                param,
                spec.kind_name()
            ))),
        }
    }

    pub fn parent(&self) -> &MapSpec {
        self.c().parent()
    }

    pub fn ell(&self) -> f64 {
        self.c().ell()
    }

    pub fn param(&self) -> Param {
        self.c().param()
    }

    pub fn region(&self, x: Vec2) -> Region {
        self.c().region(x)
    }

    /// Evaluates the closed form attached to region `r`, wherever `x` lies.
    pub fn eval_region(&self, r: Region, x: Vec2) -> Vec2 {
        self.c().eval_region(r, x)
    }

    pub fn eval(&self, x: Vec2) -> Vec2 {
        self.c().eval_region(self.region(x), x)
    }

    /// Analytic Jacobian (a representative value on region boundaries).
    pub fn jacobian(&self, x: Vec2) -> Mat2 {
        self.c().jacobian_region(self.region(x), x)
    }

    /// Random points on every region interface, tagged with both neighbors.
    pub fn interface_points(&self, per_interface: usize, seed: u64) -> Vec<InterfacePoint> {
        let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        self.c().interfaces(per_interface, &mut rng)
    }

    pub fn quadrature(&self, opts: &QuadOptions) -> Vec<QuadPoint> {
        self.c().quadrature(opts)
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.c().lipschitz_bound()
    }

    /// Radii of circles about the origin along which the region layout changes.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        self.c().radial_breakpoints()
    }

    pub fn is_core(&self, r: Region) -> bool {
        self.c().is_core(r)
    }

    /// Samples the member on a grid (nodes outside `B_ℓ` masked out).
    pub fn sample(&self, grid: &GridSpec) -> Result<GridField> {
        let ell = self.ell();
        GridField::from_fn(*grid, |x| (x.norm() < ell).then(|| self.eval(x)))
    }

    /// Area, smooth part, Jacobian mass, total variation and L¹ error.
    ///
    /// Summation is chunked in a fixed order so results do not depend on the
    /// thread count.
    pub fn functionals(&self, opts: &QuadOptions) -> Functionals {
        self.functionals_where(opts, |_| true)
    }

    /// As [`RecoveryMember::functionals`], restricted to regions accepted by `keep`.
    pub fn functionals_where(&self, opts: &QuadOptions, keep: impl Fn(Region) -> bool + Sync) -> Functionals {
        let pts = self.quadrature(opts);
        let parent = self.parent();
        let partial: Vec<Functionals> = pts
            .par_chunks(4096)
            .map(|chunk| {
                let mut f = Functionals::default();
                for q in chunk {
                    let r = self.region(q.x);
                    if !keep(r) {
                        continue;
                    }
                    let v = self.c().eval_region(r, q.x);
                    let j = self.c().jacobian_region(r, q.x);
                    let g2 = frobenius(&j).powi(2);
                    let d = det(&j);
                    f.area += q.w * (1.0 + g2 + d * d).sqrt();
                    f.smooth_part += q.w * (1.0 + g2).sqrt();
                    f.jacobian_mass += q.w * d.abs();
                    f.total_variation += q.w * g2.sqrt();
                    if let Ok(u) = parent.eval(q.x) {
                        f.l1_error += q.w * (v - u).norm();
                    }
                }
                f
            })
            .collect();
        partial.iter().fold(Functionals::default(), |mut acc, f| {
            acc.area += f.area;
            acc.smooth_part += f.smooth_part;
            acc.jacobian_mass += f.jacobian_mass;
            acc.total_variation += f.total_variation;
            acc.l1_error += f.l1_error;
            acc
        })
    }
}

pub(crate) fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen::<f64>() * 2.0 * std::f64::consts::PI
}

/// Cartesian Jacobian from the polar derivatives `∂ρv` and `ρ⁻¹∂θv` at angle `θ`.
pub(crate) fn polar_to_cartesian(d_rho: Vec2, d_theta_over_rho: Vec2, theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::from_columns(&[c * d_rho - s * d_theta_over_rho, s * d_rho + c * d_theta_over_rho])
}
