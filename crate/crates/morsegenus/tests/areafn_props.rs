use morsegenus::areafn::*;
use morsegenus::surfaces::PointCloud;
use proptest::prelude::*;

fn cloud(z: &[f64]) -> PointCloud {
    PointCloud::new(z.iter().map(|&z| [0.0, 0.0, z]).collect())
}

// heights on a 1/64 lattice keep every shift below exact in floating point
fn lattice_heights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-640i32..640, 2..300)
        .prop_filter("needs two distinct heights", |v| v.iter().min() != v.iter().max())
        .prop_map(|v| v.into_iter().map(|k| k as f64 / 64.0).collect())
}

proptest! {
    #[test]
    fn area_series_is_monotone(z in prop::collection::vec(-50.0f64..50.0, 2..400), step in 0.05f64..3.0) {
        prop_assume!(z.iter().any(|&v| v != z[0]));
        let c = cloud(&z);
        let g = height_grid(&c, step).unwrap();
        let s = area_function(&c, &g).unwrap();
        prop_assert!(s.s.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*s.s.last().unwrap(), 1.0);
        prop_assert!(s.s[0] >= 1.0 / z.len() as f64);
        prop_assert!(g.h_max() >= c.z_range().unwrap().1);
        prop_assert!(g.h_max() - c.z_range().unwrap().1 < step + 1e-9);
    }

    #[test]
    fn translation_keeps_s_values(z in lattice_heights(), shift in -256i32..256) {
        let c = shift as f64 / 8.0;
        let a = cloud(&z);
        let b = cloud(&z.iter().map(|v| v + c).collect::<Vec<_>>());
        let (ga, gb) = (height_grid(&a, 0.5).unwrap(), height_grid(&b, 0.5).unwrap());
        prop_assert_eq!(gb.h_min, ga.h_min + c);
        prop_assert_eq!(ga.len, gb.len);
        prop_assert_eq!(area_function(&a, &ga).unwrap().s, area_function(&b, &gb).unwrap().s);
    }

    #[test]
    fn duplication_keeps_series(z in prop::collection::vec(-20.0f64..20.0, 2..200), k in 2usize..5) {
        prop_assume!(z.iter().any(|&v| v != z[0]));
        let a = cloud(&z);
        let dup: Vec<f64> = z.iter().flat_map(|&v| std::iter::repeat_n(v, k)).collect();
        let b = cloud(&dup);
        let g = height_grid(&a, 0.5).unwrap();
        prop_assert_eq!(g, height_grid(&b, 0.5).unwrap());
        prop_assert_eq!(area_function(&a, &g).unwrap().s, area_function(&b, &g).unwrap().s);
    }

    #[test]
    fn interior_derivative_nonnegative(z in prop::collection::vec(-20.0f64..20.0, 2..200)) {
        prop_assume!(z.iter().any(|&v| v != z[0]));
        let c = cloud(&z);
        let g = height_grid(&c, 0.5).unwrap();
        prop_assume!(g.len >= 3);
        let d = first_derivative(&area_function(&c, &g).unwrap()).unwrap();
        prop_assert!(d.d.iter().all(|&v| v >= 0.0));
    }
}
