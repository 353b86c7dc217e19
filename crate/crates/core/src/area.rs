//! Graph area of sampled maps and the closed-form relaxed targets.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::field::{gradient, integrate_bulk, GridField, ScalarGridField};
use crate::maps::{MapSpec, PhiSpec};
use crate::numerics::{det, frobenius, periodic_derivative_vec};
use crate::recovery::quadrature::{partition_rule, Patch, QuadOptions};
use crate::{Mat2, Result};

/// Radial and angular resolution of the smooth reference grid.
pub const REFERENCE_RESOLUTION: (usize, usize) = (4096, 2048);
/// Environment variable naming a directory for the on-disk reference cache.
pub const CACHE_DIR_ENV: &str = "S1LAB_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    pub total: f64,
    /// `∫ √(1 + |∇v|²)`.
    pub smooth_part: f64,
    /// `total − smooth_part`.
    pub jacobian_excess: f64,
    /// Jump contribution; 0 for sampled Lipschitz fields.
    pub jump_part: f64,
}

/// `∫ √(1 + |∇v|² + (det ∇v)²)` and its parts, by bulk quadrature of
/// finite-difference gradients.
pub fn area(field: &GridField) -> Result<AreaBreakdown> {
    let g = gradient(field)?;
    let dens = |f: &dyn Fn(f64, f64) -> f64| -> Result<f64> {
        let values = g
            .values
            .iter()
            .map(|m| f(frobenius(m).powi(2), det(m)))
            .collect();
        integrate_bulk(&ScalarGridField::new(g.spec, values, g.mask.clone())?)
    };
    let total = dens(&|g2, d| (1.0 + g2 + d * d).sqrt())?;
    let smooth_part = dens(&|g2, _| (1.0 + g2).sqrt())?;
    Ok(AreaBreakdown {
        total,
        smooth_part,
        jacobian_excess: total - smooth_part,
        jump_part: 0.0,
    })
}

/// `|Dv|(Ω) = ∫ |∇v|` with the Frobenius norm.
pub fn total_variation(field: &GridField) -> Result<f64> {
    let g = gradient(field)?;
    let values = g.values.iter().map(frobenius).collect();
    integrate_bulk(&ScalarGridField::new(g.spec, values, g.mask)?)
}

/// Relaxed area of a map on `B_ℓ`, split into its summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub value: f64,
    /// Graph area of the map away from its singular set.
    pub smooth_part: f64,
    /// `π Σ |dᵢ|`.
    pub singular_part: f64,
    /// `L·H¹(J_u)` for junctions.
    pub jump_part: f64,
    /// Area of the value polygon for junctions.
    pub polygon_part: f64,
}

pub fn relaxed_target(spec: &MapSpec, ell: f64) -> Result<Target> {
    spec.validate(ell)?;
    if let Some(j) = spec.junction() {
        let smooth_part = PI * ell * ell;
        let jump_part = j.n as f64 * j.side() * ell;
        let polygon_part = j.polygon_area();
        return Ok(Target {
            value: smooth_part + jump_part + polygon_part,
            smooth_part,
            singular_part: 0.0,
            jump_part,
            polygon_part,
        });
    }
    let singular_part = PI * spec.singularities().iter().map(|s| s.degree.unsigned_abs() as f64).sum::<f64>();
    let smooth_part = match spec.phi() {
        Some(phi) => smooth_reference_area(&phi, ell)?,
        None => singular_map_integral(spec, ell, |j| (1.0 + frobenius(j).powi(2)).sqrt()),
    };
    Ok(Target {
        value: smooth_part + singular_part,
        smooth_part,
        singular_part,
        jump_part: 0.0,
        polygon_part: 0.0,
    })
}

/// Smooth graph area `∫_{B_ℓ} √(1 + |∇w|²)` of `w = φ(x/|x|)`.
///
/// Midpoint rule in ρ and periodic trapezoid in θ on the reference polar grid,
/// accumulated ring by ring. Results are memoized per process and, when
/// `S1LAB_CACHE_DIR` is set, on disk.
pub fn smooth_reference_area(phi: &PhiSpec, ell: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<String, f64>>> = OnceLock::new();
    let (nr, na) = REFERENCE_RESOLUTION;
    let key = format!("{}|{:e}|{}x{}", serde_json::to_string(phi)?, ell, nr, na);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(*v);
    }
    let disk = disk_cache_path(&key);
    if let Some(v) = disk.as_ref().and_then(|p| read_cached(p, &key)) {
        cache.lock().expect("cache poisoned").insert(key, v);
        return Ok(v);
    }

    let map = phi.circle_map(na)?;
    let dt = 2.0 * PI / na as f64;
    let speed: Vec<f64> = periodic_derivative_vec(map.samples(), dt)
        .iter()
        .map(|v| v.norm_squared())
        .collect();
    let dr = ell / nr as f64;
    let rings: Vec<f64> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let rho = (i as f64 + 0.5) * dr;
            speed.iter().map(|s| (rho * rho + s).sqrt()).sum::<f64>()
        })
        .collect();
    let value = rings.iter().sum::<f64>() * dr * dt;

    if let Some(p) = disk {
        // A failed cache write only costs a recomputation later.
        let _ = write_cached(&p, &key, value);
    }
    cache.lock().expect("cache poisoned").insert(key, value);
    Ok(value)
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    value: f64,
}

fn disk_cache_path(key: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_DIR_ENV)?;
    let digest = hex::encode(Sha256::digest(key.as_bytes()));
    Some(PathBuf::from(dir).join(format!("smooth_area_{}.json", &digest[..16])))
}

fn read_cached(path: &PathBuf, key: &str) -> Option<f64> {
    let text = std::fs::read_to_string(path).ok()?;
    let entry: CacheEntry = serde_json::from_str(&text).ok()?;
    (entry.key == key && entry.value.is_finite()).then_some(entry.value)
}

fn write_cached(path: &PathBuf, key: &str, value: f64) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let entry = CacheEntry {
        key: key.to_string(),
        value,
    };
    std::fs::write(path, serde_json::to_vec(&entry)?)?;
    Ok(())
}

/// `∫_{B_ℓ} f(∇u)` for a map with point singularities, using the analytic
/// Jacobian and polar patches around every atom.
pub(crate) fn singular_map_integral(spec: &MapSpec, ell: f64, f: impl Fn(&Mat2) -> f64 + Sync) -> f64 {
    let pts: Vec<_> = spec.singularities().iter().map(|s| s.point()).collect();
    let mut limit = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        limit = limit.min(ell - p.norm());
        for q in &pts[i + 1..] {
            limit = limit.min(0.5 * (p - q).norm());
        }
    }
    let patches: Vec<Patch> = pts
        .iter()
        .map(|&c| Patch {
            center: c,
            radius: 0.9 * limit,
            breaks: Vec::new(),
        })
        .collect();
    let global = QuadOptions {
        order: 16,
        panels: 16,
        n_angular: 1024,
    };
    let local = QuadOptions {
        order: 16,
        panels: 8,
        n_angular: 512,
    };
    let rule = partition_rule(ell, &patches, &global, &local);
    let partial: Vec<f64> = rule
        .par_chunks(4096)
        .map(|chunk| {
            chunk
                .iter()
                .map(|q| match spec.jacobian(q.x) {
                    Ok(j) => q.w * f(&j),
                    Err(_) => 0.0,
                })
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}
