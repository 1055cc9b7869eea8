//! Acceptance criteria 1-14, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use guenterlab::calculus::{
    deformation_surface, domain_gradient, surface_gradient, CurvatureProvenance, ScalarField, VectorField,
};
use guenterlab::geometry::{
    build_mesh, extrude_cylinder, mark_region, tangent_frame, Carrier, CylinderBase, DomainGrid, RegionKind, ShapeSpec,
    SurfaceMesh,
};
use guenterlab::kernels::{
    nullspace, rigid_motion_basis, rotation_basis, subspace_distance, unique_continuation_check, KernelBasis,
    KERNEL_TOLERANCE, REQUIRED_GAP,
};
use guenterlab::norms::{lp_norm, Exponent};
use guenterlab::spectra::{
    assemble_quadratic_form, default_regions, estimate_problem, setup, smallest_eigenpairs_constrained, Domain,
    EigenOptions, FormKind, InequalityId, Problem, Ratio, DEFAULT_LAYERS,
};
use guenterlab::verify::{build_suite, calibrate_sup_constant, calibration_seed, verify_inequality, Family, EPSILON};
use guenterlab::Result;
use nalgebra::{DMatrix, SymmetricEigen};

const SEED: u64 = 0x5EED;
const SAMPLES: usize = 100;

type Outcome = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn sphere(subdivisions: usize) -> Result<SurfaceMesh<f64>> {
    let mesh = build_mesh::<f64>(&ShapeSpec::Sphere { radius: 1.0, subdivisions })?;
    Ok(mesh.as_surface().expect("sphere is a surface").clone())
}

fn problem(id: InequalityId, shape: Option<&ShapeSpec>, level: usize, layers: usize) -> Result<Problem<f64>> {
    setup::<f64>(id, shape, level, layers)?.problem()
}

/// Measured orders `log2(e_k / e_{k+1})`.
fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Second eigenvalue of `D^T W D x = lambda W x` on the interval, with `D` the
/// second-order difference matrix (one-sided at the ends) and `W` trapezoid
/// weights, built and solved densely with nalgebra.
fn neumann_oracle(nodes: usize) -> f64 {
    let h = 1.0 / (nodes - 1) as f64;
    let mut d = DMatrix::<f64>::zeros(nodes, nodes);
    for i in 0..nodes {
        let stencil: &[(isize, f64)] = if i == 0 {
            &[(0, -3.0), (1, 4.0), (2, -1.0)]
        } else if i == nodes - 1 {
            &[(0, 3.0), (-1, -4.0), (-2, 1.0)]
        } else {
            &[(1, 1.0), (-1, -1.0)]
        };
        for &(o, v) in stencil {
            d[(i, (i as isize + o) as usize)] = v / (2.0 * h);
        }
    }
    let w: Vec<f64> = (0..nodes).map(|i| if i == 0 || i == nodes - 1 { h / 2.0 } else { h }).collect();
    let k = d.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w.clone())) * d;
    let s = DMatrix::from_fn(nodes, nodes, |i, j| k[(i, j)] / (w[i] * w[j]).sqrt());
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev[1]
}

fn c1() -> Outcome {
    let start = Instant::now();
    let p = problem(InequalityId::PDomain, Some(&ShapeSpec::Interval { a: 0.0, b: 1.0, nodes: 257 }), 0, 1)?;
    let est = estimate_problem(&p, &EigenOptions::default())?;
    let elapsed = start.elapsed();
    let oracle = 1.0 / neumann_oracle(257).sqrt();
    let target = 1.0 / std::f64::consts::PI;
    let ok = rel(est.c, target) < 0.01 && rel(est.c, oracle) < 1e-8 && elapsed < Duration::from_secs(1);
    Ok((ok, format!("C={:.6} 1/pi={target:.6} oracle={oracle:.6} time={elapsed:.2?}", est.c)))
}

fn c2() -> Outcome {
    let p = problem(InequalityId::PSurface, Some(&ShapeSpec::Circle { radius: 1.0, nodes: 512 }), 0, 1)?;
    let est = estimate_problem(&p, &EigenOptions::default())?;
    Ok((rel(est.c, 1.0) < 0.01, format!("C={:.6} target=1", est.c)))
}

fn c3() -> Outcome {
    let shape = ShapeSpec::Sphere { radius: 1.0, subdivisions: 4 };
    let p = problem(InequalityId::PSurface, Some(&shape), 0, 1)?;
    let est = estimate_problem(&p, &EigenOptions::default())?;
    let target = 1.0 / 2f64.sqrt();
    let ok = p.mesh.nodes >= 2562 && rel(est.lambda_min, 2.0) < 0.02 && rel(est.c, target) < 0.02;
    Ok((
        ok,
        format!(
            "vertices={} lambda={:.5} C={:.6} target={target:.6} path={:?}",
            p.mesh.nodes, est.lambda_min, est.c, est.solver
        ),
    ))
}

fn c4() -> Outcome {
    let target = 2.0 / std::f64::consts::PI;
    let mut cs = Vec::new();
    for layers in [2, 4, 8] {
        let est = estimate_problem(&problem(InequalityId::CylFlatP0, None, 0, layers)?, &EigenOptions::default())?;
        cs.push(est.c);
    }
    let spread = cs.iter().fold(0f64, |m, c| m.max((c - cs[0]).abs()));
    let ok = cs.iter().all(|&c| rel(c, target) < 0.01) && spread <= 1e-8;
    Ok((ok, format!("C(2,4,8)={:.8}/{:.8}/{:.8} spread={spread:.1e} target={target:.6}", cs[0], cs[1], cs[2])))
}

fn def_kernel(grid: &DomainGrid<f64>) -> Result<KernelBasis<f64>> {
    let d = Domain::Grid(grid.clone());
    let a = assemble_quadratic_form(FormKind::StiffnessDef, &d, None)?;
    let b = assemble_quadratic_form(FormKind::VectorMass, &d, None)?;
    let mut k = nullspace(&a, &b, KERNEL_TOLERANCE)?;
    k.components = grid.dim();
    Ok(k)
}

fn c5() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (dim, nodes, expected) in [(2, 33, 3), (3, 9, 6)] {
        let g = DomainGrid::<f64>::unit(dim, nodes)?;
        let k = def_kernel(&g)?;
        let angle = subspace_distance(&k.vectors, &rigid_motion_basis(&g)?.vectors);
        ok &= k.dim() == expected && k.gap >= REQUIRED_GAP && angle < 1e-6;
        msg.push(format!("{dim}D dim={} gap={:.1e} angle={angle:.1e}", k.dim(), k.gap));
    }
    Ok((ok, msg.join("; ")))
}

fn sphere_def_kernel(s: &SurfaceMesh<f64>) -> Result<KernelBasis<f64>> {
    let d = Domain::Surface(s.clone());
    let a = assemble_quadratic_form(FormKind::StiffnessSurfaceDef, &d, None)?;
    let b = assemble_quadratic_form(FormKind::TangentialMass, &d, None)?;
    let k = nullspace(&a, &b, KERNEL_TOLERANCE)?;
    Ok(k.embedded(&guenterlab::calculus::tangential_embedding(s)?, 3))
}

fn c6() -> Outcome {
    let s = sphere(2)?;
    let k = sphere_def_kernel(&s)?;
    let angle = subspace_distance(&k.vectors, &rotation_basis(&s)?.vectors);
    let mut rms = Vec::new();
    for sub in [2, 3, 4] {
        let s = sphere(sub)?;
        let u = VectorField::from_fn(3, (0..s.num_nodes()).map(|i| s.position(i)), |x| vec![-x[1], x[0], 0.0]);
        let u = VectorField { tangential: true, ..u };
        let d = deformation_surface(&s, &u, CurvatureProvenance::Analytic)?;
        let sq: f64 = (0..s.num_nodes()).map(|i| (0..6).map(|c| d.values[i * 6 + c].powi(2)).sum::<f64>()).sum();
        rms.push((sq / s.num_nodes() as f64).sqrt());
    }
    let ord = orders(&rms);
    let ok = k.dim() == 3 && k.gap >= REQUIRED_GAP && angle < 1e-6 && ord.iter().all(|&o| o >= 0.8);
    Ok((
        ok,
        format!(
            "dim={} gap={:.1e} angle={angle:.1e} rms={:.2e}/{:.2e}/{:.2e} orders={:.2}/{:.2}",
            k.dim(),
            k.gap,
            rms[0],
            rms[1],
            rms[2],
            ord[0],
            ord[1]
        ),
    ))
}

fn c7() -> Outcome {
    let g2 = DomainGrid::<f64>::unit(2, 33)?;
    let edge = mark_region(&g2, |x| x[0] == 0.0, RegionKind::BoundaryPart)?;
    let r2 = unique_continuation_check(&def_kernel(&g2)?, &edge)?;
    let g3 = DomainGrid::<f64>::unit(3, 9)?;
    let face = mark_region(&g3, |x| x[0] == 0.0, RegionKind::BoundaryPart)?;
    let r3 = unique_continuation_check(&def_kernel(&g3)?, &face)?;
    let s = sphere(2)?;
    let domain = Domain::Surface(s.clone());
    let regions = default_regions(InequalityId::KornIISurf, &domain)?;
    let rs = unique_continuation_check(&sphere_def_kernel(&s)?, &regions[0].region)?;
    let ok = r2.pass && r2.rank == 3 && r3.pass && r3.rank == 6 && rs.pass && rs.rank == 3;
    Ok((
        ok,
        format!(
            "ranks edge={} face={} half-great-circle={} cond={:.1}/{:.1}/{:.1}",
            r2.rank, r3.rank, rs.rank, r2.condition, r3.condition, rs.condition
        ),
    ))
}

fn c8() -> Outcome {
    let circle = build_mesh::<f64>(&ShapeSpec::Circle { radius: 1.0, nodes: 64 })?.as_surface().unwrap().clone();
    let cyl = extrude_cylinder(CylinderBase::Surface(circle.clone()), (0.0, 1.0), 5)?.to_surface_mesh()?;
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, s) in [("circle", circle), ("sphere", sphere(2)?), ("cylinder", cyl)] {
        let d = Domain::Surface(s);
        let a = assemble_quadratic_form(FormKind::StiffnessSurfaceGrad, &d, None)?;
        let b = assemble_quadratic_form(FormKind::Mass, &d, None)?;
        let k = nullspace(&a, &b, KERNEL_TOLERANCE)?;
        ok &= k.dim() == 1 && k.gap >= REQUIRED_GAP;
        msg.push(format!("{name} dim={} gap={:.1e}", k.dim(), k.gap));
    }
    Ok((ok, msg.join("; ")))
}

fn c9() -> Outcome {
    let shapes = [
        ShapeSpec::Circle { radius: 1.0, nodes: 64 },
        ShapeSpec::Sphere { radius: 1.0, subdivisions: 3 },
        ShapeSpec::Torus { major: 2.0, minor: 0.5, nodes_major: 32, nodes_minor: 12 },
    ];
    let mut worst = 0f64;
    for spec in &shapes {
        let s = build_mesh::<f64>(spec)?.as_surface().unwrap().clone();
        for v in 0..s.num_vertices() {
            let nu = s.normal(v);
            let frame = tangent_frame(nu)?;
            for d in &frame {
                worst = worst.max(nu.iter().zip(d).map(|(a, b)| a * b).sum::<f64>().abs());
            }
            for c in 0..nu.len() {
                worst = worst.max(frame.iter().zip(nu).map(|(d, &n)| n * d[c]).sum::<f64>().abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max defect={worst:.1e} over circle/sphere/torus")))
}

fn c10() -> Outcome {
    let mut errs = Vec::new();
    for nodes in [17, 33, 65] {
        let g = DomainGrid::<f64>::unit(2, nodes)?;
        let pos: Vec<Vec<f64>> = (0..g.num_nodes()).map(|i| g.position(i)).collect();
        let f = ScalarField::from_fn(pos.iter().cloned(), |x| x[0].sin() * x[1].cos());
        let grad = domain_gradient(&g, &f)?;
        let e = pos
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let ex = [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin()];
                (0..2).map(|a| (grad.at(i)[a] - ex[a]).abs()).fold(0f64, f64::max)
            })
            .fold(0f64, f64::max);
        errs.push(e);
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let mut serr = Vec::new();
    for sub in [2, 3, 4] {
        let s = sphere(sub)?;
        let f = ScalarField::from_fn((0..s.num_nodes()).map(|i| s.position(i)), |x| x[2]);
        let g = surface_gradient(&s, &f)?;
        let e = (0..s.num_nodes())
            .map(|v| {
                let nu = s.normal(v);
                (0..3).map(|a| (g.at(v)[a] - ((a == 2) as u8 as f64 - nu[2] * nu[a])).abs()).fold(0f64, f64::max)
            })
            .fold(0f64, f64::max);
        serr.push(e);
    }
    let so = orders(&serr);
    let ok = ratios.iter().all(|r| (3.5..=4.5).contains(r)) && so.iter().all(|&o| o >= 0.8);
    Ok((ok, format!("grid ratios={:.3}/{:.3} sphere orders={:.2}/{:.2}", ratios[0], ratios[1], so[0], so[1])))
}

/// Estimate, suite with the eigenvector, verification at `C (1 + eps)`.
fn closure(p: &Problem<f64>) -> Result<(f64, bool, f64)> {
    let est = estimate_problem(p, &EigenOptions::default())?;
    let suite = build_suite(p, Family::default(), SEED, SAMPLES, Some(&est))?;
    let rep = verify_inequality(p, est.c, &suite, Exponent::TWO, EPSILON)?;
    let eig_ratio = rep.ratios[0].unwrap_or(f64::NAN);
    Ok((est.c, rep.pass, rel(eig_ratio, est.c)))
}

fn stability(id: InequalityId) -> Result<(f64, f64)> {
    let c0 = estimate_problem(&problem(id, None, 0, DEFAULT_LAYERS)?, &EigenOptions::default())?.c;
    let c1 = estimate_problem(&problem(id, None, 1, DEFAULT_LAYERS)?, &EigenOptions::default())?.c;
    Ok((c0, c1))
}

fn c11() -> Outcome {
    let (c0, c1) = stability(InequalityId::FDomain)?;
    let (_, pass, _) = closure(&problem(InequalityId::FDomain, None, 0, DEFAULT_LAYERS)?)?;
    let ok = c0.is_finite() && rel(c1, c0) <= 0.05 && pass;
    Ok((ok, format!("C={c0:.5} refined={c1:.5} change={:.2}% suite={}", 100.0 * rel(c1, c0), pass)))
}

fn c12() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for id in [InequalityId::KornI, InequalityId::KornII, InequalityId::KornISurf, InequalityId::KornIISurf] {
        let (c0, c1) = stability(id)?;
        ok &= c0.is_finite() && rel(c1, c0) <= 0.05;
        msg.push(format!("{}={c0:.4}({:+.2}%)", id.name(), 100.0 * (c1 - c0) / c0));
        if matches!(id, InequalityId::KornII | InequalityId::KornIISurf) {
            let (_, pass, _) = closure(&problem(id, None, 0, DEFAULT_LAYERS)?)?;
            ok &= pass;
            msg.push(format!("suite={pass}"));
        }
    }
    let p = problem(InequalityId::KornI, None, 0, DEFAULT_LAYERS)?.without_rhs_term(0);
    let (a, b) = p.forms()?;
    let eig = smallest_eigenpairs_constrained(&a, &b, &p.constraints, 1, &EigenOptions::default())?;
    let ratio = eig.values[0] / eig.lambda_max;
    ok &= ratio.abs() < 1e-10;
    msg.push(format!("KornI without ||U||: lambda_min/lambda_max={ratio:.1e}"));
    Ok((ok, msg.join(" ")))
}

fn c13() -> Outcome {
    let p = problem(InequalityId::SupP0, None, 0, DEFAULT_LAYERS)?;
    let cal = calibrate_sup_constant(&p, calibration_seed(SEED), 200)?;
    let suite = build_suite(&p, Family::default(), SEED, SAMPLES, None)?;
    let rep = verify_inequality(&p, cal.c, &suite, Exponent::INFINITY, EPSILON)?;
    Ok((
        rep.pass,
        format!(
            "C={:.6} (sqrt2={:.6}) max={:.6} n={} argmax={}",
            cal.c,
            2f64.sqrt(),
            rep.max_ratio,
            rep.n_samples,
            cal.argmax
        ),
    ))
}

fn homogeneous(p: &Problem<f64>, x: &[f64], p_exp: Exponent) -> Result<bool> {
    let base = p.ratio(x, p_exp);
    let full = p.expand(x);
    let norm = if p.components == 1 {
        lp_norm(&ScalarField { values: full.clone() }, p_exp, &mesh_weights(p))?
    } else {
        lp_norm(&VectorField { dim: p.components, values: full.clone(), tangential: false }, p_exp, &mesh_weights(p))?
    };
    for s in [-3.7, 1e-3, 250.0] {
        let y: Vec<f64> = x.iter().map(|v| v * s).collect();
        let ys: Vec<f64> = full.iter().map(|v| v * s).collect();
        let n2 = if p.components == 1 {
            lp_norm(&ScalarField { values: ys }, p_exp, &mesh_weights(p))?
        } else {
            lp_norm(&VectorField { dim: p.components, values: ys, tangential: false }, p_exp, &mesh_weights(p))?
        };
        if rel(n2, s.abs() * norm) > 1e-12 {
            return Ok(false);
        }
        match (base, p.ratio(&y, p_exp)) {
            (Ratio::Value(a), Ratio::Value(b)) if rel(b, a) <= 1e-12 => {}
            (Ratio::ZeroOverZero, Ratio::ZeroOverZero) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Unit weights: homogeneity does not depend on the quadrature.
fn mesh_weights(p: &Problem<f64>) -> Vec<f64> {
    vec![1.0; p.mesh.nodes]
}

fn c14() -> Outcome {
    let mut failed = Vec::new();
    let mut worst_eig = 0f64;
    let ids = InequalityId::all();
    for &id in &ids {
        let p = problem(id, None, 0, DEFAULT_LAYERS)?;
        let (pass, suite, exp) = if id.is_sup() {
            let cal = calibrate_sup_constant(&p, calibration_seed(SEED), 200)?;
            let suite = build_suite(&p, Family::default(), SEED, SAMPLES, None)?;
            let rep = verify_inequality(&p, cal.c, &suite, Exponent::INFINITY, EPSILON)?;
            (rep.pass, suite, Exponent::INFINITY)
        } else {
            let est = estimate_problem(&p, &EigenOptions::default())?;
            let suite = build_suite(&p, Family::default(), SEED, SAMPLES, Some(&est))?;
            let rep = verify_inequality(&p, est.c, &suite, Exponent::TWO, EPSILON)?;
            let e = rel(rep.ratios[0].unwrap_or(f64::NAN), est.c);
            worst_eig = worst_eig.max(e);
            (rep.pass && e <= 1e-6, suite, Exponent::TWO)
        };
        let mut homog = true;
        for s in suite.samples.iter().take(10) {
            homog &= homogeneous(&p, &s.x, exp)?;
        }
        if !(pass && homog) {
            failed.push(format!("{}(closure={pass},homogeneity={homog})", id.name()));
        }
    }
    Ok((
        failed.is_empty(),
        format!(
            "{} ids, worst eigenvector ratio error={worst_eig:.1e}{}",
            ids.len(),
            if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join(", ")) }
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("Poincare interval", c1),
        ("Poincare circle", c2),
        ("Poincare sphere", c3),
        ("cylinder dimension reduction", c4),
        ("rigid-motion kernels", c5),
        ("Killing fields", c6),
        ("unique continuation", c7),
        ("surface gradient kernel", c8),
        ("tangent-frame identities", c9),
        ("operator consistency", c10),
        ("Friedrichs rank-one", c11),
        ("Korn I and II", c12),
        ("sup-norm Poincare", c13),
        ("closure and homogeneity", c14),
    ];
    let total = Instant::now();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!ok);
        println!(
            "criterion {:>2} {:<30} {} [{:.2?}] {detail}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    let elapsed = total.elapsed();
    let in_budget = elapsed < Duration::from_secs(300);
    println!("acceptance runtime {elapsed:.2?} (budget 5 min: {})", if in_budget { "ok" } else { "exceeded" });
    if failures > 0 || !in_budget {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
