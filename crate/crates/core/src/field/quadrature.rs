use std::f64::consts::PI;

use super::{GridField, GridSpec, Layout, ScalarGridField};
use crate::numerics::{periodic_derivative_vec, periodic_sinc};
use crate::{Error, Result, Vec2};

/// Midpoint quadrature over the masked-in cells.
pub fn integrate_bulk(scalar: &ScalarGridField) -> Result<f64> {
    let spec = scalar.spec();
    let mut any = false;
    let mut acc = 0.0;
    for (idx, (v, m)) in scalar.values().iter().zip(scalar.mask()).enumerate() {
        if *m {
            any = true;
            acc += v * spec.cell_weight(idx);
        }
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    Ok(acc)
}

/// Interpolates a node-indexed quantity at `p`; `None` if the stencil leaves the mask.
fn interpolate(spec: &GridSpec, mask: &[bool], get: &dyn Fn(usize) -> Vec2, p: Vec2) -> Option<Vec2> {
    match spec.layout {
        Layout::Cartesian { nx, ny } => {
            let (lo, _) = spec.domain.bounding_box();
            let (hx, hy) = spec.cell_size();
            let fx = (p.x - lo.x) / hx - 0.5;
            let fy = (p.y - lo.y) / hy - 0.5;
            let (i0, j0) = (fx.floor(), fy.floor());
            if i0 < 0.0 || j0 < 0.0 || i0 as usize + 1 >= nx || j0 as usize + 1 >= ny {
                return None;
            }
            let (tx, ty) = (fx - i0, fy - j0);
            let (i0, j0) = (i0 as usize, j0 as usize);
            let mut acc = Vec2::zeros();
            for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
                for (dj, wy) in [(0, 1.0 - ty), (1, ty)] {
                    let idx = spec.index(i0 + di, j0 + dj);
                    if !mask[idx] {
                        return None;
                    }
                    acc += get(idx) * (wx * wy);
                }
            }
            Some(acc)
        }
        Layout::Polar {
            n_radial,
            n_angular,
        } => {
            let rel = p - spec.domain.center();
            let rho = rel.norm();
            let (r0, r1) = spec.radial_range();
            if rho < r0 || rho > r1 {
                return None;
            }
            let theta = rel.y.atan2(rel.x);
            let (dr, dt) = spec.cell_size();
            let fr = (rho - r0) / dr - 0.5;
            let start = (fr.floor() as isize - 1).clamp(0, n_radial as isize - 4) as usize;
            let sinc: Vec<f64> = (0..n_angular)
                .map(|j| periodic_sinc(n_angular, theta - j as f64 * dt))
                .collect();
            let mut acc = Vec2::zeros();
            for a in start..start + 4 {
                let mut lw = 1.0;
                for b in start..start + 4 {
                    if b != a {
                        lw *= (fr - b as f64) / (a as f64 - b as f64);
                    }
                }
                let mut ring = Vec2::zeros();
                for (j, s) in sinc.iter().enumerate() {
                    let idx = spec.index(a, j);
                    if !mask[idx] {
                        return None;
                    }
                    ring += get(idx) * *s;
                }
                acc += ring * lw;
            }
            Some(acc)
        }
    }
}

fn trace_with(
    spec: &GridSpec,
    mask: &[bool],
    get: &dyn Fn(usize) -> Vec2,
    center: Vec2,
    radius: f64,
    n: usize,
) -> Result<Vec<Vec2>> {
    let outside = || Error::CircleOutsideDomain {
        center: [center.x, center.y],
        radius,
    };
    if !(radius > 0.0) || n < 8 {
        return Err(outside());
    }
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            let p = center + radius * Vec2::new(t.cos(), t.sin());
            interpolate(spec, mask, get, p).ok_or_else(outside)
        })
        .collect()
}

/// Samples the field at `n` equispaced points of the circle `∂B_r(center)`, starting at angle 0.
pub fn circle_trace(field: &GridField, center: Vec2, radius: f64, n: usize) -> Result<Vec<Vec2>> {
    let vals = field.values();
    trace_with(field.spec(), field.mask(), &|i| vals[i], center, radius, n)
}

pub fn circle_trace_scalar(
    field: &ScalarGridField,
    center: Vec2,
    radius: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let vals = field.values();
    let t = trace_with(
        field.spec(),
        field.mask(),
        &|i| Vec2::new(vals[i], 0.0),
        center,
        radius,
        n,
    )?;
    Ok(t.into_iter().map(|v| v.x).collect())
}

/// Trapezoid rule in arclength of `integrand(value, ∂ₛvalue)` over `∂B_r(center)`.
pub fn integrate_circle(
    field: &GridField,
    center: Vec2,
    radius: f64,
    n: usize,
    integrand: impl Fn(Vec2, Vec2) -> f64,
) -> Result<f64> {
    let trace = circle_trace(field, center, radius, n)?;
    Ok(integrate_trace(&trace, radius, integrand))
}

pub fn integrate_circle_scalar(
    field: &ScalarGridField,
    center: Vec2,
    radius: f64,
    n: usize,
    integrand: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let trace: Vec<Vec2> = circle_trace_scalar(field, center, radius, n)?
        .into_iter()
        .map(|v| Vec2::new(v, 0.0))
        .collect();
    Ok(integrate_trace(&trace, radius, |v, dv| integrand(v.x, dv.x)))
}

/// Arclength trapezoid over equispaced trace samples on a circle of radius `radius`.
pub(crate) fn integrate_trace(trace: &[Vec2], radius: f64, integrand: impl Fn(Vec2, Vec2) -> f64) -> f64 {
    let n = trace.len();
    let dtheta = 2.0 * PI / n as f64;
    let deriv = periodic_derivative_vec(trace, dtheta);
    let ds = radius * dtheta;
    trace
        .iter()
        .zip(&deriv)
        .map(|(v, d)| integrand(*v, *d / radius))
        .sum::<f64>()
        * ds
}

/// `½(v₁∂ₛv₂ − v₂∂ₛv₁)`: its circle integral equals the enclosed Jacobian.
pub fn jacobian_flux(v: Vec2, dv: Vec2) -> f64 {
    0.5 * (v.x * dv.y - v.y * dv.x)
}

/// Angular speed of `v/|v|` per unit arclength, over 2π; integrates to the winding number.
pub fn winding_density(v: Vec2, dv: Vec2) -> f64 {
    (v.x * dv.y - v.y * dv.x) / (2.0 * PI * v.norm_squared())
}

pub fn tangential_speed(_v: Vec2, dv: Vec2) -> f64 {
    dv.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Domain, GridSpec};
    use crate::numerics::cmul;

    fn ones(spec: GridSpec) -> ScalarGridField {
        ScalarGridField::from_fn(spec, |_| Some(1.0)).unwrap()
    }

    #[test]
    fn disk_and_annulus_areas() {
        let cart = GridSpec::cartesian(Domain::disk([0.0, 0.0], 1.0), 256, 256).unwrap();
        assert!((integrate_bulk(&ones(cart)).unwrap() - PI).abs() < 1e-3);
        let pol = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 64, 64).unwrap();
        assert!((integrate_bulk(&ones(pol)).unwrap() - PI).abs() < 1e-10);
        let ann = GridSpec::polar(Domain::annulus([0.0, 0.0], 0.5, 1.0), 16, 32).unwrap();
        assert!((integrate_bulk(&ones(ann)).unwrap() - 0.75 * PI).abs() < 1e-12);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let spec = GridSpec::cartesian(Domain::disk([0.0, 0.0], 1.0), 8, 8).unwrap();
        let f = ScalarGridField::from_fn(spec, |_| None).unwrap();
        assert!(matches!(integrate_bulk(&f), Err(Error::EmptyMask)));
    }

    #[test]
    fn vortex_flux_and_power_winding() {
        let spec = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 64, 256).unwrap();
        let vortex = GridField::from_fn(spec, |x| Some(x / x.norm())).unwrap();
        let flux = integrate_circle(&vortex, Vec2::zeros(), 0.5, 1024, jacobian_flux).unwrap();
        assert!((flux - PI).abs() < 1e-6);

        let power = GridField::from_fn(spec, |x| {
            let u = x / x.norm();
            let u2 = cmul(u, u);
            Some(Vec2::new(u2.x, -u2.y))
        })
        .unwrap();
        for r in [0.2, 0.5, 0.93] {
            let f = integrate_circle(&power, Vec2::zeros(), r, 1024, jacobian_flux).unwrap();
            assert!((f + 2.0 * PI).abs() < 1e-6, "r = {r}: {f}");
        }
    }

    #[test]
    fn constant_field_has_zero_flux() {
        let spec = GridSpec::cartesian(Domain::disk([0.0, 0.0], 1.0), 32, 32).unwrap();
        let f = GridField::from_fn(spec, |_| Some(Vec2::new(0.6, 0.8))).unwrap();
        let flux = integrate_circle(&f, Vec2::new(0.1, 0.0), 0.4, 256, jacobian_flux).unwrap();
        assert!(flux.abs() < 1e-14);
    }

    #[test]
    fn circle_outside_mask() {
        let spec = GridSpec::cartesian(Domain::disk([0.0, 0.0], 1.0), 32, 32).unwrap();
        let f = GridField::from_fn(spec, |_| Some(Vec2::new(1.0, 0.0))).unwrap();
        let err = integrate_circle(&f, Vec2::zeros(), 0.99, 64, jacobian_flux);
        assert!(matches!(err, Err(Error::CircleOutsideDomain { .. })));
    }
}
