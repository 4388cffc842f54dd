use std::sync::Arc;

use proptest::prelude::*;

use rdfem::analysis::{convergence_rate, ConvergenceReport};
use rdfem::harness::{from_csv, to_csv};
use rdfem::mesh::{build_unit_mesh, build_unit_square_mesh};
use rdfem::nonlinear::monotonicity_pointwise;
use rdfem::projections::{cr_interpolate, pi1_project};
use rdfem::quadrature::{interval_average, simplex_rule};
use rdfem::solver::CsrMatrix;
use rdfem::spaces::build_space;
use rdfem::{DtPolicy, Scheme, SpaceKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_nonlinearity(u in -5.0f64..5.0, v in -5.0f64..5.0, p in prop::sample::select(vec![2.0, 3.0, 4.0, 5.0, 11.0])) {
        let (lhs, rhs) = monotonicity_pointwise(u, v, p);
        prop_assert!(lhs >= rhs - 1e-12 * rhs.abs().max(1.0), "{lhs} < {rhs}");
    }

    #[test]
    fn rate_of_a_power_law(c in 0.01f64..100.0, r in 0.2f64..3.0, h in 0.01f64..0.5) {
        let e1 = c * h.powf(r);
        let e2 = c * (h / 2.0).powf(r);
        prop_assert!((convergence_rate(e1, e2, h, h / 2.0).unwrap() - r).abs() < 1e-10);
    }

    #[test]
    fn triplets_match_dense(entries in prop::collection::vec((0usize..6, 0usize..6, -3.0f64..3.0), 0..40),
                            x in prop::collection::vec(-2.0f64..2.0, 6)) {
        let a = CsrMatrix::from_triplets(6, &entries);
        let mut dense = [[0.0f64; 6]; 6];
        for &(i, j, v) in &entries {
            dense[i][j] += v;
        }
        let y = a.mul_vec(&x);
        for i in 0..6 {
            let expect: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
            prop_assert!((y[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_counts(n in 1usize..12) {
        let m = build_unit_square_mesh(n).unwrap();
        prop_assert_eq!(m.n_cells(), 2 * n * n);
        prop_assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
        prop_assert_eq!(m.n_facets(), 3 * n * n + 2 * n);
        let area: f64 = (0..m.n_cells()).map(|c| m.cell_measure(c)).sum();
        prop_assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn located_cells_contain_the_point(x in 0.0f64..=1.0, y in 0.0f64..=1.0, z in 0.0f64..=1.0, n in 1usize..6) {
        let m = build_unit_mesh(3, n).unwrap();
        let (c, bary) = m.locate(&[x, y, z]).unwrap();
        prop_assert!(bary.iter().all(|&b| b >= -1e-10));
        let p = m.point_in_cell(c, &bary);
        prop_assert!((p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12 && (p[2] - z).abs() < 1e-12);
    }

    #[test]
    fn projections_reproduce_affine(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0, n in 1usize..6) {
        let g = move |x: &[f64]| a + b * x[0] + c * x[1];
        let mesh = Arc::new(build_unit_square_mesh(n).unwrap());
        let cr = Arc::new(build_space(Arc::clone(&mesh), SpaceKind::CrouzeixRaviart));
        let dg = Arc::new(build_space(mesh, SpaceKind::Discontinuous));
        let u = cr_interpolate(&cr, g).unwrap();
        let v = pi1_project(&dg, g).unwrap();
        for pt in [[0.1, 0.2], [0.77, 0.31], [0.5, 0.93]] {
            prop_assert!((v.eval(&pt).unwrap() - g(&pt)).abs() < 1e-11);
        }
        // interior facet dofs hold the midpoint value, boundary facets zero
        let mesh = cr.mesh();
        for (f, facet) in mesh.facets().iter().enumerate() {
            let expect = if facet.is_boundary() {
                0.0
            } else {
                let [p, q] = [facet.vertices()[0], facet.vertices()[1]].map(|v| mesh.vertex(v));
                g(&[(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0])
            };
            prop_assert!((u.coeffs()[f] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_rules_integrate_monomials(i in 0u32..3, j in 0u32..3, k in 0u32..3) {
        // ∫_T x^i y^j z^k over the reference tetrahedron = i! j! k! / (i+j+k+3)!
        let rule = simplex_rule(3, 6).unwrap();
        let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
        let exact = fact(i) * fact(j) * fact(k) / fact(i + j + k + 3);
        let approx: f64 = (0..rule.len())
            .map(|q| {
                let x = rule.reference_point(q);
                rule.weights()[q] * x[0].powi(i as i32) * x[1].powi(j as i32) * x[2].powi(k as i32)
            })
            .sum();
        prop_assert!((approx - exact).abs() < 1e-14, "{approx} vs {exact}");
    }

    #[test]
    fn interval_mean_of_cubic(c0 in -2.0f64..2.0, c3 in -2.0f64..2.0, t0 in 0.0f64..1.0, len in 0.001f64..0.5) {
        let t1 = t0 + len;
        let f = |t: f64| c0 + c3 * t * t * t;
        let exact = c0 + c3 * (t1.powi(4) - t0.powi(4)) / (4.0 * len);
        prop_assert!((interval_average(f, t0, t1, 5).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn proportional_steps_cover_the_interval(c in 0.05f64..2.0, n in 2usize..200) {
        let mut p = rdfem::harness::lookup("cfem_damped_2d").unwrap();
        p.dt = DtPolicy::Proportional(c);
        let h = 1.0 / n as f64;
        let (dt, steps) = p.time_steps(h).unwrap();
        prop_assert!((dt * steps as f64 - p.final_time).abs() < 1e-12);
        prop_assert!(dt <= c * h * (1.0 + 1e-12));
    }

    #[test]
    fn csv_round_trip(errors in prop::collection::vec(1e-6f64..1.0, 2..6)) {
        let data: Vec<(usize, f64, f64)> = errors
            .iter()
            .enumerate()
            .map(|(i, &e)| (4 << i, 2f64.sqrt() / (4 << i) as f64, e))
            .collect();
        let report = ConvergenceReport::from_errors("p", Scheme::Dg, 2, &data).unwrap();
        let back = from_csv(&to_csv(&report), "p", Scheme::Dg).unwrap();
        prop_assert_eq!(back.rows.len(), report.rows.len());
        for (a, b) in back.rows.iter().zip(&report.rows) {
            prop_assert_eq!(&a.grid, &b.grid);
            prop_assert!((a.error - b.error).abs() <= 1e-6 * b.error);
        }
    }
}
