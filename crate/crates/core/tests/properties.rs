use proptest::prelude::*;
use spde_lab::bony::Bony;
use spde_lab::io::FieldContainer;
use spde_lab::schemes::leray_project_unchecked;
use spde_lab::torus_spectral::{ModeLattice, ScalarFourierField, VectorFourierField, C64};
use spde_lab::wick_renorm::{MatrixCov, WickProduct};

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        -1.0..1.0f64,
    ]
}

fn field(n: usize) -> impl Strategy<Value = ScalarFourierField> {
    let len = ModeLattice::new(n).unwrap().len();
    prop::collection::vec((coeff(), coeff()), len).prop_map(move |v| {
        let mut it = v.into_iter();
        ScalarFourierField::from_fn(ModeLattice::new(n).unwrap(), |_| {
            let (re, im) = it.next().unwrap();
            C64::new(re, im)
        })
    })
}

fn real_field(n: usize) -> impl Strategy<Value = ScalarFourierField> {
    let len = ModeLattice::new(n).unwrap().len();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len).prop_map(move |v| {
        let mut it = v.into_iter();
        let mut f = ScalarFourierField::from_fn(ModeLattice::new(n).unwrap(), |_| {
            let (re, im) = it.next().unwrap();
            C64::new(re, im)
        });
        f.symmetrize_reality();
        f
    })
}

fn bits(f: &ScalarFourierField) -> Vec<(u64, u64)> {
    f.coeffs().iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn container_round_trips_bitwise(a in field(2), b in field(2)) {
        let c = FieldContainer::from_scalars(&["a", "b"], &[&a, &b]).unwrap();
        let json = FieldContainer::from_json(&c.to_json().unwrap()).unwrap();
        let bin = FieldContainer::from_bytes(&c.to_bytes()).unwrap();
        for back in [json, bin] {
            prop_assert_eq!(bits(&back.scalar("a").unwrap()), bits(&a));
            prop_assert_eq!(bits(&back.scalar("b").unwrap()), bits(&b));
        }
    }

    #[test]
    fn leray_is_idempotent_and_solenoidal(a in real_field(3), b in real_field(3), c in real_field(3)) {
        let v = VectorFourierField::new([a, b, c]).unwrap();
        let scale = v.max_abs().max(1e-300);
        let p = leray_project_unchecked(&v);
        prop_assert!(p.divergence_defect() <= 1e-14 * scale * 3.0);
        prop_assert!(leray_project_unchecked(&p).max_abs_diff(&p) <= 1e-15 * scale * 4.0);
        prop_assert!(p.reality_defect() <= 1e-15 * scale * 4.0);
    }

    #[test]
    fn bony_pieces_sum_to_the_real_product(f in real_field(4), g in real_field(4)) {
        let bony = Bony::new(f.lattice());
        let prod = bony.product(&f, &g).unwrap();
        let parts = bony.decompose(&f, &g).unwrap();
        prop_assert!(parts.sum().max_abs_diff(&prod) <= 1e-12);
        prop_assert!(prod.reality_defect() <= 1e-12);
    }

    #[test]
    fn wick_pairings_match_isserlis(m in prop::collection::vec(-1.0..1.0f64, 16)) {
        // Σ = AAᵀ + I/4 is a valid covariance
        let s: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (0..4).map(|l| m[4 * i + l] * m[4 * j + l]).sum::<f64>() + if i == j { 0.25 } else { 0.0 }).collect())
            .collect();
        let cov = MatrixCov::real(s);
        let (a, b) = (WickProduct::new(vec![0, 1]).unwrap(), WickProduct::new(vec![2, 3]).unwrap());
        let (p, q) = (a.pairing_expectation(&b, &cov), a.isserlis_expectation(&b, &cov));
        prop_assert!((p - q).norm() <= 1e-12 * (1.0 + p.norm()));
    }
}
