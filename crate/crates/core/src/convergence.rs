//! Strict-BV distances, trace inheritance on circles, and convergence studies.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area::{relaxed_target, singular_map_integral, total_variation, Target};
use crate::field::{integrate_bulk, Domain, GridField, ScalarGridField};
use crate::maps::MapSpec;
use crate::numerics::{angle_increment, frobenius, ls_slope, unit};
use crate::recovery::quadrature::QuadOptions;
use crate::recovery::{Functionals, Param, RecoveryMember};
use crate::{Error, Result, Vec2};

const UNIT_TOL: f64 = 1e-9;

/// `|Du|(B_ℓ)` of the parent map; numeric for multi-singularity maps.
pub fn exact_total_variation(u: &MapSpec, ell: f64) -> Result<f64> {
    match u {
        MapSpec::MultiSingularity { .. } => {
            u.validate(ell)?;
            Ok(singular_map_integral(u, ell, frobenius))
        }
        _ => u.exact_total_variation(ell),
    }
}

/// `‖v − u‖_{L¹} + ||Dv|(B_ℓ) − |Du|(B_ℓ)|` for a recovery member.
pub fn strict_bv_distance(v: &RecoveryMember, u: &MapSpec, ell: f64, opts: &QuadOptions) -> Result<f64> {
    if v.ell() != ell {
        return Err(Error::DomainMismatch(format!("member lives on B_{}, map on B_{ell}", v.ell())));
    }
    let f = v.functionals(opts);
    Ok(f.l1_error + (f.total_variation - exact_total_variation(u, ell)?).abs())
}

/// As [`strict_bv_distance`] for a sampled field on the disk `B_ℓ(0)`.
///
/// Nodes where `u` is undefined (singular points, jump set) drop out of the L¹ term.
pub fn strict_bv_distance_field(v: &GridField, u: &MapSpec, ell: f64) -> Result<f64> {
    let spec = v.spec();
    match spec.domain {
        Domain::Disk { center, radius } if center == [0.0, 0.0] && radius == ell => {}
        d => return Err(Error::DomainMismatch(format!("field domain {d:?} is not B_{ell}(0)"))),
    }
    let values = (0..spec.node_count())
        .map(|i| match (v.value(i), u.eval(spec.node(i))) {
            (Some(a), Ok(b)) => (a - b).norm(),
            _ => 0.0,
        })
        .collect();
    let l1 = integrate_bulk(&ScalarGridField::new(*spec, values, v.mask().to_vec())?)?;
    Ok(l1 + (total_variation(v)? - exact_total_variation(u, ell)?).abs())
}

/// Length of the closed curve through `pts`: arcs between nearby unit
/// values, chords otherwise.
pub fn curve_variation(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|j| {
            let (a, b) = (pts[j], pts[(j + 1) % n]);
            let on_circle = (a.norm() - 1.0).abs() < UNIT_TOL && (b.norm() - 1.0).abs() < UNIT_TOL;
            let inc = if on_circle { angle_increment(a, b).abs() } else { f64::INFINITY };
            if inc < 0.5 * PI {
                inc
            } else {
                (b - a).norm()
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InheritanceRow {
    pub param: Param,
    pub radius: f64,
    /// Variation of the member's trace on `∂B_r`.
    pub trace_variation: f64,
    /// Variation of the parent's trace on the same circle.
    pub reference_variation: f64,
    /// `max |v − u|` over trace samples off the jump set.
    pub sup_distance: f64,
}

/// Per-member, per-radius comparison of traces on circles about the origin.
pub fn circle_inheritance(
    members: &[RecoveryMember],
    u: &MapSpec,
    radii: &[f64],
    n_samples: usize,
) -> Result<Vec<InheritanceRow>> {
    if n_samples < 8 {
        return Err(Error::InvalidParams(format!("need at least 8 trace samples, got {n_samples}")));
    }
    let dirs: Vec<Vec2> = (0..n_samples)
        .map(|j| unit((j as f64 + 0.5) * 2.0 * PI / n_samples as f64))
        .collect();
    let mut rows = Vec::new();
    for m in members {
        let ell = m.ell();
        for &r in radii {
            if !(r > 0.0 && r < ell) {
                return Err(Error::InvalidParams(format!("radius {r} outside (0, {ell})")));
            }
            if let Some(b) = m.radial_breakpoints().into_iter().find(|b| (b - r).abs() < 1e-6 * ell) {
                return Err(Error::RadiusAtBreakpoint { radius: r, breakpoint: b });
            }
            let trace: Vec<Vec2> = dirs.iter().map(|d| m.eval(r * d)).collect();
            let parent: Vec<Option<Vec2>> = dirs.iter().map(|d| u.eval(r * d).ok()).collect();
            let sup_distance = trace
                .iter()
                .zip(&parent)
                .filter_map(|(v, p)| p.map(|p| (v - p).norm()))
                .fold(0.0, f64::max);
            let defined: Vec<Vec2> = parent.iter().flatten().copied().collect();
            rows.push(InheritanceRow {
                param: m.param(),
                radius: r,
                trace_variation: curve_variation(&trace),
                reference_variation: curve_variation(&defined),
                sup_distance,
            });
        }
    }
    Ok(rows)
}

/// Default inheritance radii: fixed fractions of `ℓ` plus the midpoint of the
/// member's first transition band.
pub fn default_radii(member: &RecoveryMember) -> Vec<f64> {
    let ell = member.ell();
    let mut out: Vec<f64> = [0.3, 0.5, 0.7, 0.9].iter().map(|f| f * ell).collect();
    let b = member.radial_breakpoints();
    if b.len() >= 2 && b[1] < ell {
        out.push(0.5 * (b[0] + b[1]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub param: Param,
    /// `1/k` or `ε`.
    pub size: f64,
    pub area: f64,
    pub smooth_part: f64,
    /// `area − smooth_part`.
    pub area_gap: f64,
    pub jacobian_mass: f64,
    pub total_variation: f64,
    pub l1_error: f64,
    pub strict_bv: f64,
}

impl StudyRow {
    fn new(param: Param, f: Functionals, tv_exact: f64) -> Self {
        StudyRow {
            param,
            size: param.size(),
            area: f.area,
            smooth_part: f.smooth_part,
            area_gap: f.area - f.smooth_part,
            jacobian_mass: f.jacobian_mass,
            total_variation: f.total_variation,
            l1_error: f.l1_error,
            strict_bv: f.l1_error + (f.total_variation - tv_exact).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub spec: MapSpec,
    pub ell: f64,
    pub quadrature: QuadOptions,
    pub target: Target,
    pub exact_total_variation: f64,
    pub rows: Vec<StudyRow>,
    /// Richardson limit of the area column from its last three rows.
    pub extrapolated_limit: f64,
    /// Slope of `log|area − target|` against `log size`.
    pub fit_order: f64,
    /// Slope of `log strict_bv` against `log size`.
    pub strict_bv_order: f64,
}

impl ConvergenceStudy {
    pub fn last(&self) -> &StudyRow {
        self.rows.last().expect("studies have at least three rows")
    }

    pub fn relative_error(&self) -> f64 {
        (self.last().area - self.target.value).abs() / self.target.value
    }
}

/// Limit of `a₁, a₂, a₃, …` assuming geometric decay of the differences.
/// Falls back to `a₃` when the ratio is not in `(0, 1)`.
pub fn richardson(a1: f64, a2: f64, a3: f64) -> f64 {
    let (d1, d2) = (a2 - a1, a3 - a2);
    let r = d2 / d1;
    if d1 != 0.0 && r > 0.0 && r < 1.0 {
        a3 + d2 * r / (1.0 - r)
    } else {
        a3
    }
}

fn check_params(spec: &MapSpec, params: &[Param]) -> Result<()> {
    if params.len() < 3 {
        return Err(Error::InvalidParams(format!("a study needs >= 3 members, got {}", params.len())));
    }
    let refining = params.windows(2).all(|w| match (w[0], w[1]) {
        (Param::K(a), Param::K(b)) => b > a,
        (Param::Epsilon(a), Param::Epsilon(b)) => b < a,
        _ => false,
    });
    if !refining {
        return Err(Error::InvalidParams(format!(
            "{} parameters must strictly refine (k increasing or eps decreasing)",
            spec.kind_name()
        )));
    }
    Ok(())
}

/// Builds every member, integrates its functionals, and compares with the
/// relaxed target. Rows are computed concurrently and assembled in parameter order.
pub fn run_study(spec: &MapSpec, ell: f64, params: &[Param], opts: &QuadOptions) -> Result<ConvergenceStudy> {
    check_params(spec, params)?;
    let target = relaxed_target(spec, ell)?;
    let tv_exact = exact_total_variation(spec, ell)?;
    let rows = params
        .par_iter()
        .map(|&p| {
            let m = RecoveryMember::build(spec, ell, p)?;
            Ok(StudyRow::new(p, m.functionals(opts), tv_exact))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    let extrapolated_limit = richardson(rows[n - 3].area, rows[n - 2].area, rows[n - 1].area);
    let log_size: Vec<f64> = rows.iter().map(|r| r.size.ln()).collect();
    let fit = |ys: Vec<f64>| {
        if ys.iter().all(|y| y.is_finite()) {
            ls_slope(&log_size, &ys)
        } else {
            f64::NAN
        }
    };
    let fit_order = fit(rows.iter().map(|r| (r.area - target.value).abs().ln()).collect());
    let strict_bv_order = fit(rows.iter().map(|r| r.strict_bv.ln()).collect());
    Ok(ConvergenceStudy {
        spec: spec.clone(),
        ell,
        quadrature: *opts,
        target,
        exact_total_variation: tv_exact,
        rows,
        extrapolated_limit,
        fit_order,
        strict_bv_order,
    })
}
