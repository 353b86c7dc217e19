//! Acceptance checks: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s1lab_core::circle::{degree, lift, power_map, variation, CircleMap};
use s1lab_core::convergence::{circle_inheritance, run_study, ConvergenceStudy};
use s1lab_core::field::{integrate_bulk, integrate_circle, jacobian_flux, Domain, GridField, GridSpec};
use s1lab_core::jacobian::{degree_by_preimage, detect_singularities, distributional_jacobian, pointwise_det, Bump};
use s1lab_core::maps::{Junction, MapSpec, PhiSpec, Singularity};
use s1lab_core::numerics::gauss_legendre_on;
use s1lab_core::recovery::quadrature::QuadOptions;
use s1lab_core::recovery::{m_epsilon_derivatives, Param, RecoveryMember};
use s1lab_core::{Error, Vec2};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ks(list: &[u32]) -> Vec<Param> {
    list.iter().map(|&k| Param::K(k)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn study(spec: &MapSpec, params: &[Param]) -> ConvergenceStudy {
    run_study(spec, 1.0, params, &QuadOptions::default()).expect("study runs")
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let s = study(&MapSpec::Vortex, &ks(&[4, 8, 16, 32, 64]));
    let secs = t0.elapsed().as_secs_f64();
    let exact = PI * (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) + PI;
    let err = rel(s.last().area, exact);
    let target_ok = (s.target.value - exact).abs() < 1e-6;
    outcome(
        err <= 0.01 && target_ok && secs <= 60.0,
        format!(
            "final area {:.6} vs {:.6} (rel {:.2e}), target {:.6}, extrapolated {:.6}, {:.1}s",
            s.last().area,
            exact,
            err,
            s.target.value,
            s.extrapolated_limit,
            secs
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut worst_mass = 0.0f64;
    let mut worst_gap = 0.0f64;
    for d in [-3i64, -2, -1, 1, 2, 3] {
        let spec = MapSpec::PhiVortex {
            phi: PhiSpec::Power { degree: d },
        };
        let s = study(&spec, &ks(&[4, 8, 16, 32, 64, 128]));
        let want = PI * d.abs() as f64;
        for r in &s.rows {
            worst_mass = worst_mass.max(rel(r.jacobian_mass, want));
        }
        worst_gap = worst_gap.max(rel(s.last().area_gap, want));
    }
    outcome(
        worst_mass <= 0.005 && worst_gap <= 0.015,
        format!("max rel jacobian-mass error {worst_mass:.2e}, max rel area-gap error at k=128 {worst_gap:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let grid = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 256, 512).unwrap();
    let u = MapSpec::Vortex.sample(&grid).unwrap();
    let bump = Bump {
        center: Vec2::zeros(),
        radius: 0.5,
    };
    let at_origin = distributional_jacobian(&u, &bump).unwrap();
    let off = Bump {
        center: Vec2::new(0.5, 0.1),
        radius: 0.3,
    };
    let away = distributional_jacobian(&u, &off).unwrap();
    let e1 = rel(at_origin, PI);
    let e2 = away.abs() / PI;
    outcome(
        e1 <= 0.01 && e2 <= 0.01,
        format!("centered {at_origin:.6} (rel {e1:.2e}), off-center {away:.2e} (rel to pi {e2:.2e})"),
    )
}

fn criterion_4() -> Outcome {
    let atoms = [([-0.3, 0.1], 1i64), ([0.25, -0.2], -2i64)];
    let spec = MapSpec::MultiSingularity {
        singularities: atoms
            .iter()
            .map(|&(c, d)| Singularity { center: c, degree: d })
            .collect(),
    };
    let grid = GridSpec::cartesian(Domain::rectangle([0.0, 0.0], 2.0, 2.0), 512, 512).unwrap();
    let h = grid.spacing();
    let field = spec.sample(&grid).unwrap();
    let set = detect_singularities(&field, None).unwrap();
    let mut ok = set.atoms.len() == 2;
    let mut worst = 0.0f64;
    for &(c, d) in &atoms {
        let c = Vec2::new(c[0], c[1]);
        match set
            .atoms
            .iter()
            .min_by(|a, b| dist(a.location, c).total_cmp(&dist(b.location, c)))
        {
            Some(a) => {
                worst = worst.max(dist(a.location, c) / h);
                ok &= a.degree == d && dist(a.location, c) <= h;
            }
            None => ok = false,
        }
    }
    let mass = set.total_mass();
    ok &= mass == 3.0 * PI;
    outcome(
        ok,
        format!(
            "{} atoms, degrees {:?}, max location error {worst:.2} cells, mass {mass}",
            set.atoms.len(),
            set.atoms.iter().map(|a| a.degree).collect::<Vec<_>>()
        ),
    )
}

fn dist(a: [f64; 2], b: Vec2) -> f64 {
    (Vec2::new(a[0], a[1]) - b).norm()
}

fn eps_params(finest: u32) -> Vec<Param> {
    (3..=finest.ilog2()).map(|p| Param::Epsilon(1.0 / f64::from(1u32 << p))).collect()
}

fn criterion_5() -> Outcome {
    let s = study(&MapSpec::TripleJunction { offset: 0.0 }, &eps_params(64));
    let target = PI + 3f64.sqrt() * 3.0 + 3.0 * 3f64.sqrt() / 4.0;
    let area_err = rel(s.last().area, target);
    let tv_err = rel(s.last().total_variation, 3.0 * 3f64.sqrt());
    let j = Junction::new(3, 0.0);
    let (l, hgt) = (j.side(), j.apothem());
    let mut worst = 0.0f64;
    for eps in [0.125, 1.0 / 64.0, 1e-3] {
        let mut total = 0.0;
        for (s, ws) in gauss_legendre_on(0.0, 0.5 * l, 4)
            .into_iter()
            .chain(gauss_legendre_on(0.5 * l, l, 4))
        {
            for (t, wt) in gauss_legendre_on(0.0, eps, 4) {
                total += ws * wt * m_epsilon_derivatives(t, s, eps, 3).0.abs();
            }
        }
        worst = worst.max((total - 3f64.sqrt() / 4.0).abs());
    }
    outcome(
        area_err <= 0.015 && tv_err <= 0.01 && worst <= 1e-10 && (0.5 * hgt * l - 3f64.sqrt() / 4.0).abs() < 1e-15,
        format!(
            "area {:.6} vs {target:.6} (rel {area_err:.2e}), TV {:.6} (rel {tv_err:.2e}), |int m_t - sqrt3/4| {worst:.1e}",
            s.last().area,
            s.last().total_variation
        ),
    )
}

fn criterion_6() -> Outcome {
    let s = study(&MapSpec::NJunction { n: 4, offset: 0.0 }, &eps_params(128));
    let target = PI + 4.0 * 2f64.sqrt() + 2.0;
    let err = rel(s.last().area, target);
    outcome(
        err <= 0.015 && (s.target.value - target).abs() < 1e-12,
        format!(
            "area at eps=1/128 {:.6} vs {target:.6} (rel {err:.2e}), extrapolated {:.6}",
            s.last().area,
            s.extrapolated_limit
        ),
    )
}

fn criterion_7() -> Outcome {
    let fields: [(&str, fn(Vec2) -> Vec2); 3] = [
        ("polynomial", |x| Vec2::new(x.x + 0.3 * x.y * x.y, x.y - 0.2 * x.x.powi(3))),
        ("exponential", |x| Vec2::new(x.x.exp() * x.y.cos(), x.x.exp() * x.y.sin())),
        ("trigonometric", |x| Vec2::new((2.0 * x.y).sin() + x.x, (1.5 * x.x).cos() * x.y)),
    ];
    let grid = GridSpec::polar(Domain::disk([0.0, 0.0], 1.0), 500, 512).unwrap();
    let mut worst = 0.0f64;
    for (_, f) in fields {
        let v = GridField::from_fn(grid, |x| Some(f(x))).unwrap();
        let det = pointwise_det(&v).unwrap();
        for r in [0.3, 0.6, 0.9] {
            let bulk = integrate_bulk(&det.restrict(|x| x.norm() < r)).unwrap();
            let boundary = integrate_circle(&v, Vec2::zeros(), r, 1024, jacobian_flux).unwrap();
            worst = worst.max(rel(bulk, boundary));
        }
    }
    outcome(worst <= 1e-4, format!("max relative bulk/boundary gap {worst:.2e} over 9 cases"))
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();

    // Lifting covers the map and its endpoint jump is 2π·degree.
    for _ in 0..50 {
        let d = rng.gen_range(-4i64..=4);
        let a = rng.gen_range(-0.5..0.5);
        let b = rng.gen_range(-0.5..0.5);
        let map = CircleMap::from_lifting_fn(512, |t| d as f64 * t + a * t.sin() + b * (2.0 * t).cos()).unwrap();
        let l = lift(&map);
        let cover = map
            .samples()
            .iter()
            .zip(l.values())
            .all(|(v, p)| (v - Vec2::new(p.cos(), p.sin())).norm() < 1e-12);
        let deg = degree(&map).unwrap().degree;
        if !cover || deg != d || (l.endpoint_jump() - 2.0 * PI * d as f64).abs() > 1e-9 {
            failures.push(format!("lifting d={d}"));
        }
        if variation(&map) < 2.0 * PI * d.abs() as f64 - 1e-9 {
            failures.push(format!("variation d={d}"));
        }
    }

    // Degree is additive under complex products.
    for _ in 0..50 {
        let (d1, d2) = (rng.gen_range(-3i64..=3), rng.gen_range(-3i64..=3));
        let p = power_map(d1, 256).unwrap().product(&power_map(d2, 256).unwrap()).unwrap();
        if degree(&p).unwrap().degree != d1 + d2 {
            failures.push(format!("additivity {d1}+{d2}"));
        }
    }

    // |deg| ≤ mult at 200 sampled values for each field.
    let grid = GridSpec::cartesian(Domain::rectangle([0.0, 0.0], 2.0, 2.0), 96, 96).unwrap();
    let inside = |x: Vec2, f: Vec2| (x.norm() < 0.95).then_some(f);
    let fields: Vec<(&str, GridField, i64)> = vec![
        ("identity", GridField::from_fn(grid, |x| inside(x, x)).unwrap(), 1),
        (
            "square",
            GridField::from_fn(grid, |x| inside(x, Vec2::new(x.x * x.x - x.y * x.y, 2.0 * x.x * x.y))).unwrap(),
            2,
        ),
        (
            "fold",
            GridField::from_fn(grid, |x| inside(x, Vec2::new(x.x * x.x, x.y))).unwrap(),
            0,
        ),
    ];
    for (name, f, _) in &fields {
        let mut bad = 0;
        for _ in 0..200 {
            let y = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            match degree_by_preimage(f, y) {
                Ok(c) if c.degree.unsigned_abs() <= c.multiplicity => {}
                Ok(_) => bad += 1,
                Err(Error::NonRegularValue(_)) => {}
                Err(_) => bad += 1,
            }
        }
        if bad > 0 {
            failures.push(format!("multiplicity {name}: {bad}"));
        }
    }
    let y = Vec2::new(0.1, 0.05);
    for (name, f, d) in &fields {
        if degree_by_preimage(f, y).map(|c| c.degree).ok() != Some(*d) {
            failures.push(format!("preimage degree {name}"));
        }
    }

    // Gluing at 200 points per interface for every family.
    let members = [
        (MapSpec::Vortex, Param::K(4)),
        (
            MapSpec::PhiVortex {
                phi: PhiSpec::Fourier {
                    degree: -2,
                    offset: 1.0,
                    cos: vec![0.3],
                    sin: vec![0.0, -0.2],
                },
            },
            Param::K(6),
        ),
        (
            MapSpec::MultiSingularity {
                singularities: vec![
                    Singularity {
                        center: [-0.3, 0.1],
                        degree: 1,
                    },
                    Singularity {
                        center: [0.25, -0.2],
                        degree: -2,
                    },
                ],
            },
            Param::K(3),
        ),
        (MapSpec::TripleJunction { offset: 0.0 }, Param::Epsilon(0.05)),
        (MapSpec::NJunction { n: 6, offset: 0.3 }, Param::Epsilon(0.1)),
    ];
    for (spec, p) in members {
        let m = RecoveryMember::build(&spec, 1.0, p).unwrap();
        let worst = m
            .interface_points(200, 5)
            .iter()
            .map(|q| (m.eval_region(q.a, q.x) - m.eval_region(q.b, q.x)).norm())
            .fold(0.0, f64::max);
        if worst > 1e-9 {
            failures.push(format!("gluing {}: {worst:.1e}", spec.kind_name()));
        }
    }

    let secs = t0.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs <= 300.0,
        if failures.is_empty() {
            format!("lifting, additivity, variation, multiplicity and gluing checks clean in {secs:.1}s")
        } else {
            format!("failures: {}", failures.join(", "))
        },
    )
}

fn criterion_9() -> Outcome {
    // The pure vortex agrees with its parent outside the core for every k, so a
    // Fourier datum whose annulus differs from the parent at r = 0.7 is checked too.
    let fourier = MapSpec::PhiVortex {
        phi: PhiSpec::Fourier {
            degree: 1,
            offset: 0.0,
            cos: vec![0.4, 0.0, 0.2],
            sin: vec![0.0, -0.3],
        },
    };
    let ks = [2u32, 3, 4, 8, 16, 32, 64];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, u) in [("vortex", MapSpec::Vortex), ("fourier", fourier)] {
        let members: Vec<RecoveryMember> = ks
            .iter()
            .map(|&k| RecoveryMember::build(&u, 1.0, Param::K(k)).unwrap())
            .collect();
        let rows = circle_inheritance(&members, &u, &[0.7], 4096).unwrap();
        // Trace variations converge; they need not match for the coarsest members.
        let tv_err = rows[2..]
            .iter()
            .map(|r| (r.trace_variation - r.reference_variation).abs())
            .fold(0.0, f64::max);
        let above_degree_bound = rows.iter().all(|r| r.trace_variation >= 2.0 * PI - 1e-12);
        let sups: Vec<f64> = rows.iter().map(|r| r.sup_distance).collect();
        let monotone = sups[2..].windows(2).all(|w| w[1] <= w[0] + 1e-15) && *sups.last().unwrap() < 1e-12;
        let mut ok = tv_err < 1e-12 && monotone && above_degree_bound;
        if name == "vortex" {
            let tv_2pi = rows.iter().map(|r| (r.trace_variation - 2.0 * PI).abs()).fold(0.0, f64::max);
            ok &= tv_2pi < 1e-12;
        }
        pass &= ok;
        let sups: Vec<String> = sups.iter().map(|s| format!("{s:.1e}")).collect();
        detail.push(format!("{name}: max |TV - TV(u)| after two members {tv_err:.1e}, sup distances [{}]", sups.join(", ")));
    }
    outcome(pass, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("vortex relaxed area", criterion_1),
        ("degree-d jacobian mass and area gap", criterion_2),
        ("distributional jacobian atom", criterion_3),
        ("multi-singularity decomposition", criterion_4),
        ("triple junction", criterion_5),
        ("n-junction", criterion_6),
        ("bulk-boundary identity", criterion_7),
        ("property suites", criterion_8),
        ("trace inheritance", criterion_9),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        all &= o.pass;
        println!("{} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
