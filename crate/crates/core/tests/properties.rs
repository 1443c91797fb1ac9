use proptest::prelude::*;

use ba_heat::exterior::{interval_count, substitute_with_sign, wedge_reorder_oracle, MultiIndex};
use ba_heat::fourier::{
    apply_s_with, heat_extension_with, lp_norm_with, random_field, read_ffld, stream_rng,
    symbol_matrix, write_ffld, RandomFieldSpec,
};
use ba_heat::heat_matrix::{build_grade_matrix, HeatMatrixSpec};
use ba_heat::Exec;

fn xi_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn small_field_spec() -> impl Strategy<Value = (RandomFieldSpec, u64)> {
    (2usize..=3, 0usize..=2, any::<u64>()).prop_map(|(n, band, seed)| {
        let points = if n == 2 { 16 } else { 8 };
        (
            RandomFieldSpec {
                dims: vec![points; n],
                length: 1.0 + band as f64,
                grades: vec![],
                band: band + 1,
                mean_zero: true,
            },
            seed,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_symmetric_even_and_homogeneous(xi in xi_strategy(3), c in 0.01f64..100.0) {
        let m = symbol_matrix(&xi, 3).unwrap();
        let d = m.dim();
        for i in 0..d {
            for j in 0..d {
                prop_assert!((m.matrix[(i, j)] - m.matrix[(j, i)]).abs() < 1e-14);
            }
        }
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let scaled: Vec<f64> = xi.iter().map(|v| c * v).collect();
        prop_assert!(m.max_diff(&symbol_matrix(&neg, 3).unwrap()) < 1e-14);
        prop_assert!(m.max_diff(&symbol_matrix(&scaled, 3).unwrap()) < 1e-12);
    }

    #[test]
    fn interval_count_is_symmetric(mask in 0u32..(1 << 6), k in 1usize..=6, l in 1usize..=6) {
        prop_assume!(k != l);
        let set = MultiIndex::from_mask(6, mask).unwrap();
        prop_assert_eq!(interval_count(&set, k, l).unwrap(), interval_count(&set, l, k).unwrap());
    }

    #[test]
    fn substitution_sign_matches_wedge_reordering(mask in 1u32..(1 << 7), pick in any::<prop::sample::Index>(), l in 1usize..=7) {
        let set = MultiIndex::from_mask(7, mask).unwrap();
        prop_assume!(!set.contains(l));
        let elems: Vec<usize> = set.elements().collect();
        let k = elems[pick.index(elems.len())];
        let seq: Vec<usize> = elems.iter().map(|&e| if e == k { l } else { e }).collect();
        let (target, sign) = substitute_with_sign(&set, k, l).unwrap();
        let (oracle_set, oracle_sign) = wedge_reorder_oracle(7, &seq).unwrap();
        prop_assert_eq!(target, oracle_set);
        prop_assert_eq!(sign, oracle_sign);
    }

    #[test]
    fn grade_matrices_are_symmetric(n in 2usize..=5, r_frac in 0.0f64..=1.0, alpha in 0.0f64..=1.0) {
        let r = ((n as f64) * r_frac).round() as usize;
        let m = build_grade_matrix(&HeatMatrixSpec::uniform(n, alpha).unwrap(), r).unwrap();
        prop_assert_eq!(&m, &m.transpose());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ffld_round_trips((spec, seed) in small_field_spec()) {
        let f = random_field(&spec, &mut stream_rng(seed, 0), Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        write_ffld(&f, &mut buf).unwrap();
        let g = read_ffld(buf.as_slice()).unwrap();
        prop_assert_eq!(f.components(), g.components());
        prop_assert_eq!(f.grid().dims(), g.grid().dims());
        prop_assert_eq!(f.grid().length(), g.grid().length());
    }

    #[test]
    fn execution_modes_agree_bitwise((spec, seed) in small_field_spec(), t in 0.0f64..0.05) {
        let fs = random_field(&spec, &mut stream_rng(seed, 1), Exec::Sequential).unwrap();
        let fp = random_field(&spec, &mut stream_rng(seed, 1), Exec::Parallel).unwrap();
        prop_assert_eq!(fs.components(), fp.components());
        let ss = apply_s_with(&fs, Exec::Sequential).unwrap();
        let sp = apply_s_with(&fs, Exec::Parallel).unwrap();
        prop_assert_eq!(ss.components(), sp.components());
        let hs = heat_extension_with(&fs, t, Exec::Sequential).unwrap();
        let hp = heat_extension_with(&fs, t, Exec::Parallel).unwrap();
        prop_assert_eq!(hs.components(), hp.components());
        prop_assert_eq!(lp_norm_with(&fs, 3.0, Exec::Sequential).unwrap(), lp_norm_with(&fs, 3.0, Exec::Parallel).unwrap());
    }

    #[test]
    fn heat_is_a_contracting_semigroup((spec, seed) in small_field_spec(), s in 0.0f64..0.05, t in 0.0f64..0.05) {
        let exec = Exec::default();
        let f = random_field(&spec, &mut stream_rng(seed, 2), exec).unwrap();
        let two_step = heat_extension_with(&heat_extension_with(&f, s, exec).unwrap(), t, exec).unwrap();
        let one_step = heat_extension_with(&f, s + t, exec).unwrap();
        let scale = f.max_abs();
        for (a, b) in two_step.components().iter().zip(one_step.components()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
        }
        for p in [1.5, 2.0, 4.0] {
            prop_assert!(lp_norm_with(&one_step, p, exec).unwrap() <= lp_norm_with(&f, p, exec).unwrap() * (1.0 + 1e-12));
        }
    }
}
