use homog::randfield::{build_short_range, sample_potential};
use homog::{laplacian_apply, Grid, GridFunction};
use proptest::prelude::*;

fn field(grid: Grid) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0f64..1.0, grid.interior_count()).prop_map(move |v| GridFunction::from_values(grid, v))
}

fn grid_2d() -> Grid {
    Grid::new(2, 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(v in field(grid_2d()), w in field(grid_2d()), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid_2d();
        let combo = v.scale(a).add(&w.scale(b));
        let lhs = laplacian_apply(&g, &combo);
        let rhs = laplacian_apply(&g, &v).scale(a).add(&laplacian_apply(&g, &w).scale(b));
        let scale = lhs.linf_norm().max(1.0);
        prop_assert!(lhs.sub(&rhs).linf_norm() <= 1e-12 * scale);
    }

    #[test]
    fn laplacian_is_symmetric_positive(v in field(grid_2d()), w in field(grid_2d())) {
        let g = grid_2d();
        let a = laplacian_apply(&g, &v).inner(&w);
        let b = v.inner(&laplacian_apply(&g, &w));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        if v.linf_norm() > 0.0 {
            prop_assert!(laplacian_apply(&g, &v).inner(&v) > 0.0);
        }
    }

    #[test]
    fn laplacian_3d_symmetry(v in field(Grid::new(3, 6).unwrap()), w in field(Grid::new(3, 6).unwrap())) {
        let g = Grid::new(3, 6).unwrap();
        let a = laplacian_apply(&g, &v).inner(&w);
        let b = v.inner(&laplacian_apply(&g, &w));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn norms_are_consistent(v in field(grid_2d())) {
        prop_assert!((v.l2_norm().powi(2) - v.inner(&v)).abs() <= 1e-14);
        prop_assert!(v.l2_norm() <= v.linf_norm() + 1e-15);
    }

    #[test]
    fn short_range_samples_are_coins(seed in any::<u64>(), a in 0.01f64..2.0) {
        let g = Grid::new(2, 33).unwrap();
        let m = build_short_range(5.0, a).unwrap();
        let s = sample_potential(&m, &g, 0.25, seed).unwrap();
        prop_assert!(s.nu_eps().values().iter().all(|&v| (v.abs() - a).abs() < 1e-12));
        prop_assert_eq!(s, sample_potential(&m, &g, 0.25, seed).unwrap());
    }
}
