use guenterlab::calculus::{
    deformation_domain, domain_gradient, surface_gradient, ScalarField, SymmetricTensorField, VectorField,
};
use guenterlab::geometry::{
    build_mesh, mark_region, tangent_frame, Carrier, DomainGrid, RegionKind, ShapeSpec, SurfaceMesh,
};
use guenterlab::kernels::{nullspace, KERNEL_TOLERANCE};
use guenterlab::norms::{lp_norm, sobolev_norm, trace_moment_functional, Exponent, NormSpec, TraceForm};
use guenterlab::spectra::{assemble_quadratic_form, Domain, FormKind};
use proptest::prelude::*;

fn surface(spec: &ShapeSpec) -> SurfaceMesh<f64> {
    build_mesh::<f64>(spec).unwrap().as_surface().unwrap().clone()
}

fn analytic_shapes() -> Vec<ShapeSpec> {
    vec![
        ShapeSpec::Circle { radius: 1.5, nodes: 48 },
        ShapeSpec::Sphere { radius: 1.0, subdivisions: 2 },
        ShapeSpec::Torus { major: 2.0, minor: 0.5, nodes_major: 24, nodes_minor: 10 },
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn vertices_lie_on_level_sets_with_analytic_normals() {
    for spec in analytic_shapes() {
        let s = surface(&spec);
        let src = s.source().expect("analytic source");
        for v in 0..s.num_vertices() {
            assert!(src.psi(s.vertex(v)).abs() <= 1e-10, "{}", spec.name());
            let nu = src.unit_normal(s.vertex(v)).unwrap();
            let d: f64 = nu.iter().zip(s.normal(v)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 1e-12, "{} vertex {v}: {d:e}", spec.name());
        }
    }
}

#[test]
fn measure_converges_at_second_order() {
    for base in [
        ShapeSpec::Sphere { radius: 1.0, subdivisions: 1 },
        ShapeSpec::Torus { major: 2.0, minor: 0.5, nodes_major: 16, nodes_minor: 8 },
    ] {
        let errs: Vec<f64> = (0..3)
            .map(|l| {
                let spec = base.refine(l);
                (surface(&spec).measure() - spec.exact_measure()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((3.0..=5.0).contains(&r), "{} ratio {r}", base.name());
        }
    }
}

#[test]
fn surface_gradient_kernel_is_one_dimensional() {
    for spec in analytic_shapes() {
        let d = Domain::Surface(surface(&spec));
        let a = assemble_quadratic_form(FormKind::StiffnessSurfaceGrad, &d, None).unwrap();
        let b = assemble_quadratic_form(FormKind::Mass, &d, None).unwrap();
        let k = nullspace(&a, &b, KERNEL_TOLERANCE).unwrap();
        assert_eq!(k.dim(), 1, "{}", spec.name());
    }
}

#[test]
fn augmented_norm_is_definite() {
    let g = DomainGrid::<f64>::unit(2, 9).unwrap();
    let left = mark_region(&g, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
    let d = Domain::Grid(g);
    let a = assemble_quadratic_form(FormKind::StiffnessGrad, &d, None)
        .unwrap()
        .add(&assemble_quadratic_form(FormKind::RankOneTrace, &d, Some(&left)).unwrap())
        .unwrap();
    let b = assemble_quadratic_form(FormKind::Mass, &d, None).unwrap();
    assert_eq!(nullspace(&a, &b, KERNEL_TOLERANCE).unwrap().dim(), 0);
}

fn unit_vector() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=4)
        .prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, n))
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tangent_frame_identities(nu in unit_vector()) {
        let d = tangent_frame(&nu).unwrap();
        for dj in &d {
            prop_assert!(nu.iter().zip(dj).map(|(a, b)| a * b).sum::<f64>().abs() <= 1e-12);
        }
        for c in 0..nu.len() {
            prop_assert!(d.iter().zip(&nu).map(|(dk, n)| n * dk[c]).sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn grid_operators_are_linear(
        f in prop::collection::vec(-1.0f64..1.0, 36),
        g in prop::collection::vec(-1.0f64..1.0, 36),
        u in prop::collection::vec(-1.0f64..1.0, 72),
        a in -3.0f64..3.0,
    ) {
        let grid = DomainGrid::<f64>::unit(2, 6).unwrap();
        let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + y).collect();
        let gf = domain_gradient(&grid, &ScalarField { values: f.clone() }).unwrap();
        let gg = domain_gradient(&grid, &ScalarField { values: g.clone() }).unwrap();
        let gc = domain_gradient(&grid, &ScalarField { values: comb }).unwrap();
        for i in 0..gc.values.len() {
            prop_assert!(close(gc.values[i], a * gf.values[i] + gg.values[i], 1e-12));
        }
        let du = deformation_domain(&grid, &VectorField { dim: 2, values: u.clone(), tangential: false }).unwrap();
        let scaled: Vec<f64> = u.iter().map(|x| a * x).collect();
        let ds = deformation_domain(&grid, &VectorField { dim: 2, values: scaled, tangential: false }).unwrap();
        for i in 0..du.values.len() {
            prop_assert!(close(ds.values[i], a * du.values[i], 1e-12));
        }
    }

    #[test]
    fn deformation_storage_round_trips(u in prop::collection::vec(-1.0f64..1.0, 81)) {
        let grid = DomainGrid::<f64>::unit(3, 3).unwrap();
        let d = deformation_domain(&grid, &VectorField { dim: 3, values: u.clone(), tangential: false }).unwrap();
        for node in 0..d.nodes() {
            for j in 0..3 {
                for k in 0..3 {
                    prop_assert_eq!(d.get(node, j, k), d.get(node, k, j));
                }
            }
        }
        let full: Vec<Vec<f64>> = (0..d.nodes()).map(|n| d.full(n)).collect();
        prop_assert_eq!(SymmetricTensorField::from_full(3, &full), d);
    }

    #[test]
    fn surface_gradient_is_tangential_and_linear(
        f in prop::collection::vec(-1.0f64..1.0, 42),
        g in prop::collection::vec(-1.0f64..1.0, 42),
    ) {
        let s = surface(&ShapeSpec::Sphere { radius: 1.0, subdivisions: 1 });
        let gf = surface_gradient(&s, &ScalarField { values: f.clone() }).unwrap();
        let gg = surface_gradient(&s, &ScalarField { values: g.clone() }).unwrap();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        let gs = surface_gradient(&s, &ScalarField { values: sum }).unwrap();
        for v in 0..s.num_vertices() {
            let dn: f64 = gf.at(v).iter().zip(s.normal(v)).map(|(a, b)| a * b).sum();
            prop_assert!(dn.abs() <= 1e-10);
            for c in 0..3 {
                prop_assert!(close(gs.at(v)[c], gf.at(v)[c] + gg.at(v)[c], 1e-12));
            }
        }
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(
        f in prop::collection::vec(-1.0f64..1.0, 25),
        g in prop::collection::vec(-1.0f64..1.0, 25),
        lambda in prop::num::f64::NORMAL.prop_filter("moderate", |l| l.abs() > 1e-3 && l.abs() < 1e3),
        p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0, f64::INFINITY]),
    ) {
        let grid = DomainGrid::<f64>::unit(2, 5).unwrap();
        let left = mark_region(&grid, |x| x[0] == 0.0, RegionKind::BoundaryPart).unwrap();
        let exp = Exponent::new(p).unwrap();
        let w = grid.node_weights();
        let norms = |v: &[f64]| -> Vec<f64> {
            let s = ScalarField { values: v.to_vec() };
            let mut out = vec![lp_norm(&s, exp, w).unwrap()];
            for m in 0..=2 {
                out.push(sobolev_norm(&grid, &s, &NormSpec::standard(p, m).unwrap()).unwrap());
            }
            out.push(trace_moment_functional(&grid, &s, &left, 1, exp, TraceForm::Moment).unwrap());
            out.push(trace_moment_functional(&grid, &s, &left, 2, exp, TraceForm::Moment).unwrap());
            out.push(trace_moment_functional(&grid, &s, &left, 1, exp, TraceForm::LpTrace).unwrap());
            out
        };
        let nf = norms(&f);
        let ng = norms(&g);
        let scaled: Vec<f64> = f.iter().map(|x| lambda * x).collect();
        let sum: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
        for (i, (a, b)) in norms(&scaled).iter().zip(&nf).enumerate() {
            prop_assert!((a - lambda.abs() * b).abs() <= 1e-12 * a.max(lambda.abs() * b).max(1e-300), "norm {i}");
        }
        for ((s, a), b) in norms(&sum).iter().zip(&nf).zip(&ng) {
            prop_assert!(*s <= (a + b) * (1.0 + 1e-10));
        }
        // W^l <= W^m for l < m
        prop_assert!(nf[1] <= nf[2] * (1.0 + 1e-12) && nf[2] <= nf[3] * (1.0 + 1e-12));
    }
}
