use krb_bench::grid::{grid_points, parse_axis};
use proptest::prelude::*;

proptest! {
    #[test]
    fn inclusive_axis_has_expected_count(start in -5i32..5, step_tenths in 1u32..20, count in 1usize..40) {
        let step = step_tenths as f64 / 10.0;
        let stop = start as f64 + step * (count - 1) as f64;
        let axis = parse_axis(&format!("{start}:{step}:{stop}")).unwrap();
        prop_assert_eq!(axis.len(), count);
        prop_assert_eq!(axis[0], start as f64);
        prop_assert_eq!(*axis.last().unwrap(), stop);
        prop_assert!(axis.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn grid_is_lexicographic_product(a in 1usize..6, b in 1usize..6) {
        let axes = vec![format!("1:1:{a}"), format!("0:0.5:{}", 0.5 * (b - 1) as f64)];
        let pts = grid_points(&axes).unwrap();
        prop_assert_eq!(pts.len(), a * b);
        // last axis runs fastest
        for (k, p) in pts.iter().enumerate() {
            prop_assert_eq!(p[0], (k / b + 1) as f64);
            prop_assert_eq!(p[1], 0.5 * (k % b) as f64);
        }
    }
}
