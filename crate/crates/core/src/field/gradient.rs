use super::{GridField, GridSpec, Layout};
use crate::numerics::CENTRAL6;
use crate::{Error, Mat2, Result, Vec2};

/// Per-node Jacobian matrices in the Cartesian frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub spec: GridSpec,
    pub values: Vec<Mat2>,
    pub mask: Vec<bool>,
}

impl GradientField {
    pub fn at(&self, idx: usize) -> Option<Mat2> {
        self.mask[idx].then(|| self.values[idx])
    }
}

/// Finite-difference gradient of a sampled field.
///
/// Cartesian grids use second-order central differences in the interior and
/// one-sided three-point stencils where the mask ends. Polar grids use the same
/// rule radially and sixth-order periodic differences in angle, then rotate
/// `(∂ρ, ρ⁻¹∂θ)` into the Cartesian frame.
pub fn gradient(field: &GridField) -> Result<GradientField> {
    let spec = *field.spec();
    let (na, nb) = spec.shape();
    let mask = field.mask();
    let vals = field.values();
    let (ha, hb) = spec.cell_size();
    let polar = spec.is_polar();

    let neighbor = |a: usize, b: usize, axis: usize, off: isize| -> Option<Vec2> {
        let (a2, b2) = if axis == 0 {
            let a2 = a as isize + off;
            if a2 < 0 || a2 >= na as isize {
                return None;
            }
            (a2 as usize, b)
        } else if polar {
            (a, (b as isize + off).rem_euclid(nb as isize) as usize)
        } else {
            let b2 = b as isize + off;
            if b2 < 0 || b2 >= nb as isize {
                return None;
            }
            (a, b2 as usize)
        };
        let i = spec.index(a2, b2);
        mask[i].then(|| vals[i])
    };

    let mut out = vec![Mat2::zeros(); spec.node_count()];
    for idx in 0..spec.node_count() {
        if !mask[idx] {
            continue;
        }
        let (a, b) = spec.coords(idx);
        let f0 = vals[idx];
        let mut d = [Vec2::zeros(); 2];
        for axis in 0..2 {
            let h = if axis == 0 { ha } else { hb };
            let nb_at = |o: isize| neighbor(a, b, axis, o);
            let high_order = polar && axis == 1 && nb >= 7;
            d[axis] = if high_order && (-3..=3).all(|o| o == 0 || nb_at(o).is_some()) {
                let mut acc = Vec2::zeros();
                for (k, w) in CENTRAL6.iter().enumerate() {
                    let o = k as isize - 3;
                    if o != 0 {
                        acc += nb_at(o).unwrap() * *w;
                    }
                }
                acc / h
            } else if let (Some(m), Some(p)) = (nb_at(-1), nb_at(1)) {
                (p - m) / (2.0 * h)
            } else if let (Some(p1), Some(p2)) = (nb_at(1), nb_at(2)) {
                (-3.0 * f0 + 4.0 * p1 - p2) / (2.0 * h)
            } else if let (Some(m1), Some(m2)) = (nb_at(-1), nb_at(-2)) {
                (3.0 * f0 - 4.0 * m1 + m2) / (2.0 * h)
            } else {
                return Err(Error::MaskTooThin {
                    node: idx,
                    axis: match (polar, axis) {
                        (false, 0) => "x",
                        (false, _) => "y",
                        (true, 0) => "radial",
                        (true, _) => "angular",
                    },
                });
            };
        }
        out[idx] = match spec.layout {
            Layout::Cartesian { .. } => Mat2::from_columns(&[d[0], d[1]]),
            Layout::Polar { .. } => {
                let rho = spec.radius_at(a);
                let (s, c) = spec.angle_at(b).sin_cos();
                let dr = d[0];
                let dt = d[1] / rho;
                Mat2::from_columns(&[c * dr - s * dt, s * dr + c * dt])
            }
        };
    }
    Ok(GradientField {
        spec,
        values: out,
        mask: mask.to_vec(),
    })
}
