use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use s1lab_core::area::{self, AreaBreakdown, Target};
use s1lab_core::circle::{lift, CircleMap, DegreeReport};
use s1lab_core::config::RunConfig;
use s1lab_core::convergence::{circle_inheritance, default_radii, run_study, ConvergenceStudy, InheritanceRow};
use s1lab_core::field::io::{read_field, write_field};
use s1lab_core::field::GridField;
use s1lab_core::jacobian::{detect_singularities, SingularitySet};
use s1lab_core::numerics::unit;
use s1lab_core::recovery::{Param, RecoveryMember};
use s1lab_core::report::{self, Report};
use s1lab_core::{Error, Result, Vec2};

/// Writes the report to the output directory, or to stdout when none is set.
fn emit<T: Serialize>(cfg: &RunConfig, command: &str, result: T, csv: Vec<(&str, String)>) -> Result<()> {
    let stem = cfg.output.stem.as_deref().unwrap_or(command).to_string();
    emit_as(cfg, command, &stem, result, csv)
}

fn emit_as<T: Serialize>(
    cfg: &RunConfig,
    command: &str,
    stem: &str,
    result: T,
    csv: Vec<(&str, String)>,
) -> Result<()> {
    let json = report::to_json_string(&Report::new(command, cfg, result))?;
    let format = cfg.output.format;
    match &cfg.output.dir {
        Some(dir) => {
            for p in report::write_outputs(dir, stem, format, &json, &csv)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            if format.json() {
                print!("{json}");
            }
            if format.csv() {
                for (_, text) in &csv {
                    print!("{text}");
                }
            }
        }
    }
    Ok(())
}

/// The field named by the config: a saved field, or the map sampled on the grid.
fn source_field(cfg: &RunConfig) -> Result<Option<GridField>> {
    if let Some(base) = &cfg.field {
        return read_field(base).map(Some);
    }
    match (&cfg.map, &cfg.grid) {
        (Some(map), Some(grid)) => map.sample(&grid.grid(cfg.ell)?).map(Some),
        _ => Ok(None),
    }
}

#[derive(Serialize)]
struct DegreeResult {
    center: [f64; 2],
    radius: f64,
    samples: usize,
    #[serde(flatten)]
    report: DegreeReport,
}

pub fn degree(cfg: &RunConfig) -> Result<()> {
    let center = cfg.center.unwrap_or([0.0, 0.0]);
    let c = Vec2::from(center);
    let r = cfg.radius.expect("validated");
    let raw = match (&cfg.map, &cfg.field) {
        (Some(map), _) => {
            let samples = (0..cfg.samples)
                .map(|j| map.eval(c + r * unit(2.0 * PI * j as f64 / cfg.samples as f64)))
                .collect::<Result<Vec<_>>>()?;
            lift(&CircleMap::sampled(samples)?).endpoint_jump() / (2.0 * PI)
        }
        (None, Some(base)) => {
            let field = read_field(base)?;
            s1lab_core::circle::winding_on_circle(&field, c, r, cfg.samples)?
        }
        (None, None) => unreachable!("validated"),
    };
    let report = DegreeReport::with_tolerance(raw, cfg.tolerances.degree_residual)?;
    println!("degree: {} (residual {:.1e})", report.degree, report.residual);
    if cfg.output.dir.is_some() {
        let result = DegreeResult {
            center,
            radius: r,
            samples: cfg.samples,
            report,
        };
        emit(cfg, "degree", result, Vec::new())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SingularityResult {
    #[serde(flatten)]
    set: SingularitySet,
    total_mass: f64,
    total_degree: i64,
}

pub fn singularities(cfg: &RunConfig) -> Result<()> {
    let field = source_field(cfg)?.expect("validated");
    let set = detect_singularities(&field, cfg.min_separation)?;
    let csv = report::csv_table(
        &["x", "y", "degree", "residual"],
        set.atoms.iter().map(|a| {
            vec![
                report::fmt_f64(a.location[0]),
                report::fmt_f64(a.location[1]),
                a.degree.to_string(),
                report::fmt_f64(a.residual),
            ]
        }),
    );
    let result = SingularityResult {
        total_mass: set.total_mass(),
        total_degree: set.total_degree(),
        set,
    };
    emit(cfg, "singularities", result, vec![("", csv)])
}

#[derive(Serialize)]
struct AreaResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<AreaBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_variation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
}

pub fn area(cfg: &RunConfig) -> Result<()> {
    let field = source_field(cfg)?;
    let (breakdown, total_variation) = match &field {
        Some(f) => (Some(area::area(f)?), Some(area::total_variation(f)?)),
        None => (None, None),
    };
    let target = match &cfg.map {
        Some(m) => Some(area::relaxed_target(m, cfg.ell)?),
        None => None,
    };
    let mut cells = Vec::new();
    if let Some(b) = &breakdown {
        cells.extend([
            ("total", b.total),
            ("smooth_part", b.smooth_part),
            ("jacobian_excess", b.jacobian_excess),
            ("jump_part", b.jump_part),
        ]);
    }
    if let Some(tv) = total_variation {
        cells.push(("total_variation", tv));
    }
    if let Some(t) = &target {
        cells.extend([
            ("target", t.value),
            ("target_smooth_part", t.smooth_part),
            ("target_singular_part", t.singular_part),
            ("target_jump_part", t.jump_part),
            ("target_polygon_part", t.polygon_part),
        ]);
    }
    let csv = report::csv_table(
        &["quantity", "value"],
        cells.iter().map(|(k, v)| vec![k.to_string(), report::fmt_f64(*v)]),
    );
    let result = AreaResult {
        breakdown,
        total_variation,
        target,
    };
    emit(cfg, "area", result, vec![("", csv)])
}

#[derive(Serialize)]
struct SkippedRadius {
    param: Param,
    radius: f64,
    breakpoint: f64,
}

#[derive(Serialize)]
struct GluingRow {
    param: Param,
    points: usize,
    max_jump: f64,
}

#[derive(Serialize)]
struct StudyResult {
    study: ConvergenceStudy,
    relative_error: f64,
    gluing: Vec<GluingRow>,
    inheritance: Vec<InheritanceRow>,
    skipped_radii: Vec<SkippedRadius>,
}

const GLUING_POINTS: usize = 200;

pub fn study(cfg: &RunConfig) -> Result<()> {
    let map = cfg.map.as_ref().expect("validated");
    let params = cfg.params.as_ref().expect("validated").params();
    let study = run_study(map, cfg.ell, &params, &cfg.quadrature)?;
    let members = params
        .par_iter()
        .map(|&p| RecoveryMember::build(map, cfg.ell, p))
        .collect::<Result<Vec<_>>>()?;

    let gluing = members
        .iter()
        .map(|m| {
            let pts = m.interface_points(GLUING_POINTS, cfg.seed);
            let max_jump = pts
                .iter()
                .map(|q| (m.eval_region(q.a, q.x) - m.eval_region(q.b, q.x)).norm())
                .fold(0.0, f64::max);
            GluingRow {
                param: m.param(),
                points: pts.len(),
                max_jump,
            }
        })
        .collect();

    let mut inheritance = Vec::new();
    let mut skipped_radii = Vec::new();
    for m in &members {
        let radii = match &cfg.inheritance_radii {
            Some(fracs) => fracs.iter().map(|f| f * cfg.ell).collect(),
            None => default_radii(m),
        };
        for r in radii {
            match circle_inheritance(std::slice::from_ref(m), map, &[r], cfg.samples) {
                Ok(rows) => inheritance.extend(rows),
                Err(Error::RadiusAtBreakpoint { radius, breakpoint }) => skipped_radii.push(SkippedRadius {
                    param: m.param(),
                    radius,
                    breakpoint,
                }),
                Err(e) => return Err(e),
            }
        }
    }

    let relative_error = study.relative_error();
    let csv = vec![
        ("", report::study_csv(&study.rows)),
        ("inheritance", report::inheritance_csv(&inheritance)),
    ];
    emit(
        cfg,
        "study",
        StudyResult {
            study,
            relative_error,
            gluing,
            inheritance,
            skipped_radii,
        },
        csv,
    )?;
    match cfg.tolerances.study_relative_error {
        Some(tol) if !(relative_error <= tol) => Err(Error::ToleranceExceeded {
            quantity: "relative area error",
            value: relative_error,
            tolerance: tol,
        }),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct SampleResult {
    files: Vec<PathBuf>,
}

pub fn sample(cfg: &RunConfig) -> Result<()> {
    let dir = cfg
        .output
        .dir
        .as_ref()
        .ok_or_else(|| Error::Config("sample needs an output directory (--out)".into()))?;
    std::fs::create_dir_all(dir)?;
    let stem = cfg.output.stem.as_deref().unwrap_or("sample");
    let mut files = Vec::new();
    if let Some(field) = source_field(cfg)? {
        let base = dir.join(stem);
        write_field(&field, &base)?;
        files.push(base);
    }
    if let (Some(map), Some(grid), Some(params)) = (&cfg.map, &cfg.grid, &cfg.params) {
        let grid = grid.grid(cfg.ell)?;
        for p in params.params() {
            let member = RecoveryMember::build(map, cfg.ell, p)?;
            let tag = match p {
                Param::K(k) => format!("k{k}"),
                Param::Epsilon(e) => format!("eps{e}"),
            };
            let base = dir.join(format!("{stem}_{tag}"));
            write_field(&member.sample(&grid)?, &base)?;
            files.push(base);
        }
    }
    // `<stem>.json` already holds the field metadata.
    emit_as(cfg, "sample", &format!("{stem}_manifest"), SampleResult { files }, Vec::new())
}
