//! Circle maps `S¹ → S¹` sampled on uniform angular grids, with liftings,
//! degree, variation, canonical power maps and lifting homotopies.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::field::{integrate_circle, winding_density, GridField};
use crate::numerics::{angle_increment, arg_0_2pi, cmul, principal_angle, unit};
use crate::{Error, Result, Vec2};

/// Default sample count for closed-form maps.
pub const DEFAULT_SAMPLES: usize = 1024;
/// Maximum distance of the raw winding from an integer.
pub const DEGREE_TOLERANCE: f64 = 0.05;
const MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    ClosedForm,
    Sampled,
}

/// Unit vectors `f(θⱼ)` at `θⱼ = 2πj/n`, periodically closed.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleMap {
    samples: Vec<Vec2>,
    source: Source,
}

impl CircleMap {
    pub fn new(samples: Vec<Vec2>, source: Source) -> Result<Self> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::InvalidCircleMap(format!("need at least 3 samples, got {n}")));
        }
        for (j, v) in samples.iter().enumerate() {
            if !((v.norm() - 1.0).abs() <= MODULUS_TOL) {
                return Err(Error::InvalidCircleMap(format!(
                    "sample {j} has modulus {} (not unit)",
                    v.norm()
                )));
            }
        }
        for j in 0..n {
            let next = (j + 1) % n;
            let gap = angle_increment(samples[j], samples[next]).abs();
            if gap >= PI * (1.0 - 1e-12) {
                return Err(Error::AngularGapTooLarge { index: j, next, gap });
            }
        }
        Ok(CircleMap { samples, source })
    }

    /// Samples a closed-form map `θ ↦ f(θ)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec2) -> Result<Self> {
        let samples = (0..n).map(|j| f(angle(j, n))).collect();
        Self::new(samples, Source::ClosedForm)
    }

    /// Samples `θ ↦ e^{iΦ(θ)}` for a closed-form lifting `Φ`.
    pub fn from_lifting_fn(n: usize, phi: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(n, |t| unit(phi(t)))
    }

    /// Wraps measured samples; non-unit inputs are rejected, not normalized.
    pub fn sampled(samples: Vec<Vec2>) -> Result<Self> {
        Self::new(samples, Source::Sampled)
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec2] {
        &self.samples
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn theta(&self, j: usize) -> f64 {
        angle(j, self.n())
    }

    /// Pointwise complex product.
    pub fn product(&self, other: &CircleMap) -> Result<CircleMap> {
        if self.n() != other.n() {
            return Err(Error::InvalidCircleMap(format!(
                "sample counts differ ({} vs {})",
                self.n(),
                other.n()
            )));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| {
                let p = cmul(*a, *b);
                p / p.norm()
            })
            .collect();
        CircleMap::new(samples, Source::Sampled)
    }
}

fn angle(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Real samples `Φ(θⱼ)`, `j = 0..=n`, with `e^{iΦ} = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifting {
    phi: Vec<f64>,
}

impl Lifting {
    pub fn n(&self) -> usize {
        self.phi.len() - 1
    }

    /// The n + 1 samples, endpoint `θ = 2π` included.
    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn base_angle(&self) -> f64 {
        self.phi[0]
    }

    pub fn endpoint_jump(&self) -> f64 {
        self.phi[self.n()] - self.phi[0]
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.phi.windows(2).map(|w| w[1] - w[0])
    }

    /// Same lifting shifted by `2πm`.
    pub fn shifted(&self, m: i64) -> Lifting {
        let s = 2.0 * PI * m as f64;
        Lifting {
            phi: self.phi.iter().map(|p| p + s).collect(),
        }
    }
}

/// Cumulative principal-increment lifting with `Φ(0) ∈ [0, 2π)`.
pub fn lift(map: &CircleMap) -> Lifting {
    let s = map.samples();
    let n = s.len();
    let mut phi = Vec::with_capacity(n + 1);
    phi.push(arg_0_2pi(s[0]));
    for j in 0..n {
        let inc = angle_increment(s[j], s[(j + 1) % n]);
        phi.push(phi[j] + inc);
    }
    Lifting { phi }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub raw: f64,
    pub residual: f64,
}

impl DegreeReport {
    /// Rounds a raw winding, failing if it is not close to an integer.
    pub fn from_raw(raw: f64) -> Result<Self> {
        Self::with_tolerance(raw, DEGREE_TOLERANCE)
    }

    pub fn with_tolerance(raw: f64, tolerance: f64) -> Result<Self> {
        let degree = raw.round();
        let residual = (raw - degree).abs();
        if !(residual <= tolerance) {
            return Err(Error::DegreeAmbiguous {
                raw,
                residual,
                tolerance,
            });
        }
        Ok(DegreeReport {
            degree: degree as i64,
            raw,
            residual,
        })
    }
}

/// Degree from the endpoint jump of the lifting.
pub fn degree(map: &CircleMap) -> Result<DegreeReport> {
    DegreeReport::from_raw(lift(map).endpoint_jump() / (2.0 * PI))
}

/// Degree of a sampled field on `∂B_r(center)` from the winding integral of its trace.
///
/// The trace need not be unit-valued (bilinear traces are not), only nonvanishing.
pub fn degree_on_circle(field: &GridField, center: Vec2, radius: f64, n: usize) -> Result<DegreeReport> {
    DegreeReport::from_raw(winding_on_circle(field, center, radius, n)?)
}

/// Unrounded winding integral behind [`degree_on_circle`].
pub fn winding_on_circle(field: &GridField, center: Vec2, radius: f64, n: usize) -> Result<f64> {
    integrate_circle(field, center, radius, n, winding_density)
}

/// Total variation `∫|f′| dθ`, the sum of `|ΔΦ|`.
pub fn variation(map: &CircleMap) -> f64 {
    lift(map).increments().map(f64::abs).sum()
}

/// `θ ↦ (cos dθ, sin dθ)`.
pub fn power_map(d: i64, n: usize) -> Result<CircleMap> {
    if (n as u64) <= 4 * d.unsigned_abs() {
        return Err(Error::SamplingTooCoarse { n, degree: d });
    }
    CircleMap::from_fn(n, |t| unit(d as f64 * t))
}

/// Continuous lifting `Φ(θ) = c + dθ + Σₖ (aₖ cos kθ + bₖ sin kθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingSeries {
    pub offset: f64,
    pub degree: i64,
    /// `cos[k - 1]` multiplies `cos kθ`.
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl LiftingSeries {
    pub fn linear(offset: f64, degree: i64) -> Self {
        LiftingSeries {
            offset,
            degree,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// Trigonometric interpolant of a sampled lifting.
    pub fn from_lifting(lifting: &Lifting) -> Result<Self> {
        let n = lifting.n();
        let d = DegreeReport::from_raw(lifting.endpoint_jump() / (2.0 * PI))?.degree;
        let phi0 = lifting.base_angle();
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|j| Complex::new(lifting.phi[j] - phi0 - d as f64 * angle(j, n), 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let nf = n as f64;
        let kmax = (n - 1) / 2;
        let mut cos = Vec::with_capacity(kmax + 1);
        let mut sin = Vec::with_capacity(kmax + 1);
        for c in buf.iter().take(kmax + 1).skip(1) {
            cos.push(2.0 * c.re / nf);
            sin.push(-2.0 * c.im / nf);
        }
        if n % 2 == 0 {
            cos.push(buf[n / 2].re / nf);
            sin.push(0.0);
        }
        let mean = buf[0].re / nf;
        let scale = cos
            .iter()
            .chain(&sin)
            .fold(mean.abs(), |m, v| m.max(v.abs()))
            .max(1.0);
        let keep = cos
            .iter()
            .zip(&sin)
            .rposition(|(a, b)| a.abs().max(b.abs()) > 1e-15 * scale)
            .map_or(0, |p| p + 1);
        cos.truncate(keep);
        sin.truncate(keep);
        Ok(LiftingSeries {
            offset: phi0 + mean,
            degree: d,
            cos,
            sin,
        })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.offset + self.degree as f64 * theta;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (s, c) = ((k + 1) as f64 * theta).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let mut acc = self.degree as f64;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kf = (k + 1) as f64;
            let (s, c) = (kf * theta).sin_cos();
            acc += kf * (b * c - a * s);
        }
        acc
    }

    pub fn value(&self, theta: f64) -> Vec2 {
        unit(self.eval(theta))
    }

    /// Shifts the offset by a multiple of 2π so that `Φ(0) ∈ (-π, π]`.
    pub fn recentered(&self) -> Self {
        let phi0 = self.eval(0.0);
        let mut out = self.clone();
        out.offset += principal_angle(phi0) - phi0;
        out
    }

    pub fn to_circle_map(&self, n: usize) -> Result<CircleMap> {
        CircleMap::from_lifting_fn(n, |t| self.eval(t))
    }
}

/// `H(t, θ) = exp(i[tΦ_end(θ) + (1 − t)Φ_start(θ)])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homotopy {
    start: LiftingSeries,
    end: LiftingSeries,
}

/// Homotopy between two sampled maps of equal degree.
pub fn homotopy(a: &CircleMap, b: &CircleMap) -> Result<Homotopy> {
    let start = LiftingSeries::from_lifting(&lift(a))?;
    let end = LiftingSeries::from_lifting(&lift(b))?;
    Homotopy::from_series(start, end)
}

impl Homotopy {
    pub fn from_series(start: LiftingSeries, end: LiftingSeries) -> Result<Self> {
        if start.degree != end.degree {
            return Err(Error::DegreeMismatch {
                start: start.degree,
                end: end.degree,
            });
        }
        Ok(Homotopy { start, end })
    }

    pub fn degree(&self) -> i64 {
        self.start.degree
    }

    pub fn start(&self) -> &LiftingSeries {
        &self.start
    }

    pub fn end(&self) -> &LiftingSeries {
        &self.end
    }

    /// `Ψ(t, θ)`.
    pub fn lifting(&self, t: f64, theta: f64) -> f64 {
        t * self.end.eval(theta) + (1.0 - t) * self.start.eval(theta)
    }

    /// `(∂ₜΨ, ∂θΨ)`.
    pub fn lifting_derivatives(&self, t: f64, theta: f64) -> (f64, f64) {
        (
            self.end.eval(theta) - self.start.eval(theta),
            t * self.end.derivative(theta) + (1.0 - t) * self.start.derivative(theta),
        )
    }

    pub fn eval(&self, t: f64, theta: f64) -> Vec2 {
        unit(self.lifting(t, theta))
    }

    /// `H(t, ·)` sampled on `n` points.
    pub fn at(&self, t: f64, n: usize) -> Result<CircleMap> {
        CircleMap::from_fn(n, |th| self.eval(t, th))
    }
}

/// CSV with columns `theta,f1,f2,phi`.
pub fn write_circle_csv(map: &CircleMap, path: &Path) -> Result<()> {
    let l = lift(map);
    let mut out = String::from("theta,f1,f2,phi\n");
    for (j, v) in map.samples().iter().enumerate() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            map.theta(j),
            v.x,
            v.y,
            l.values()[j]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_lifting() {
        let m = CircleMap::from_fn(256, unit).unwrap();
        let l = lift(&m);
        for (j, p) in l.values().iter().enumerate() {
            assert!((p - angle(j, 256)).abs() < 1e-12);
        }
        assert!((l.endpoint_jump() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(degree(&m).unwrap().degree, 1);
        assert!((variation(&m) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn constant_map() {
        let m = CircleMap::from_fn(64, |_| Vec2::new(0.0, 1.0)).unwrap();
        let l = lift(&m);
        assert!(l.values().iter().all(|p| (p - PI / 2.0).abs() < 1e-15));
        assert_eq!(degree(&m).unwrap().degree, 0);
    }

    #[test]
    fn perturbed_identity_lifting_matches_closed_form() {
        let phi = |t: f64| t + 0.3 * t.sin();
        let m = CircleMap::from_lifting_fn(1024, phi).unwrap();
        let l = lift(&m);
        let c = l.base_angle() - phi(0.0);
        for (j, p) in l.values().iter().enumerate() {
            assert!((p - phi(angle(j, 1024)) - c).abs() < 1e-10);
        }
        assert!((l.endpoint_jump() - 2.0 * PI).abs() < 1e-10);
        assert!((variation(&m) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn degrees_of_examples() {
        assert_eq!(degree(&power_map(-3, 1024).unwrap()).unwrap().degree, -3);
        let m = CircleMap::from_lifting_fn(1024, |t| 2.0 * t + 0.5 * (3.0 * t).cos()).unwrap();
        assert_eq!(degree(&m).unwrap().degree, 2);
    }

    #[test]
    fn power_map_limits() {
        assert!(matches!(power_map(4, 16), Err(Error::SamplingTooCoarse { .. })));
        let m = power_map(5, 64).unwrap();
        assert_eq!(degree(&m).unwrap().degree, 5);
        assert!((variation(&m) - 10.0 * PI).abs() < 1e-10);
        let c = power_map(0, 8).unwrap();
        assert!(c.samples().iter().all(|v| (v - Vec2::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn gap_violation_is_rejected() {
        let samples = vec![unit(0.0), unit(PI), unit(0.5), unit(1.0)];
        assert!(matches!(
            CircleMap::sampled(samples),
            Err(Error::AngularGapTooLarge { .. })
        ));
    }

    #[test]
    fn homotopy_midpoint() {
        let a = power_map(1, 512).unwrap();
        let b = CircleMap::from_lifting_fn(512, |t| t + 0.3 * t.sin()).unwrap();
        let h = homotopy(&a, &b).unwrap();
        for t in [0.1, 1.3, 4.0] {
            let v = h.eval(0.5, t);
            assert!((v - unit(t + 0.15 * t.sin())).norm() < 1e-10);
        }
        let h0 = h.at(0.0, 512).unwrap();
        let h1 = h.at(1.0, 512).unwrap();
        for j in 0..512 {
            assert!((h0.samples()[j] - a.samples()[j]).norm() < 1e-10);
            assert!((h1.samples()[j] - b.samples()[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn homotopy_rejects_degree_mismatch() {
        let a = power_map(1, 64).unwrap();
        let b = power_map(2, 64).unwrap();
        assert!(matches!(homotopy(&a, &b), Err(Error::DegreeMismatch { start: 1, end: 2 })));
    }

    #[test]
    fn series_interpolates_samples() {
        let phi = |t: f64| 0.4 - 2.0 * t + 0.3 * (2.0 * t).sin() - 0.1 * (5.0 * t).cos();
        let m = CircleMap::from_lifting_fn(128, phi).unwrap();
        let s = LiftingSeries::from_lifting(&lift(&m)).unwrap();
        assert_eq!(s.degree, -2);
        assert!(s.cos.len() <= 5);
        let c = s.eval(0.0) - phi(0.0);
        assert!((c / (2.0 * PI) - (c / (2.0 * PI)).round()).abs() < 1e-12);
        for t in [0.0, 0.77, 3.1, 6.0] {
            assert!((s.eval(t) - phi(t) - c).abs() < 1e-12);
            let dphi = -2.0 + 0.6 * (2.0 * t).cos() + 0.5 * (5.0 * t).sin();
            assert!((s.derivative(t) - dphi).abs() < 1e-11);
        }
    }
}
