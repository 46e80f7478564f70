use proptest::prelude::*;
use smoothlearn::analysis::{noise_sensitivity, noise_sensitivity_pairwise};
use smoothlearn::approx::{berry_esseen_gap, rerandomize_law, DensePolynomial};
use smoothlearn::hypercube::{noisy_copy_law, read_dataset, write_dataset};
use smoothlearn::regression::{l1_fit, FeatureMatrix};
use smoothlearn::structure::{critical_index, regularity};
use smoothlearn::{BitVector, LabeledSample, LinearThresholdFunction, Mode, ProductDistribution};

fn nonzero_vec(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 1..max).prop_filter("some entry nonzero", |v| v.iter().any(|x| x.abs() > 1e-6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularity_is_scale_invariant(w in nonzero_vec(40), c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
        let a = regularity(&w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        prop_assert!((regularity(&scaled).unwrap() - a).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-15);
    }

    #[test]
    fn critical_index_partitions_and_matches_definition(u in nonzero_vec(50), tenths in 1u32..10) {
        let alpha = tenths as f64 / 10.0;
        let rep = critical_index(&u, alpha).unwrap();
        let mut all: Vec<usize> = rep.head.iter().chain(&rep.tail).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..u.len()).collect::<Vec<_>>());
        let mut m: Vec<f64> = u.iter().map(|v| v.abs()).collect();
        m.sort_by(|a, b| b.total_cmp(a));
        let want = (0..m.len()).find(|&i| m[i] <= alpha * m[i..].iter().map(|v| v * v).sum::<f64>().sqrt());
        prop_assert_eq!(rep.ell, want);
    }

    #[test]
    fn noise_sensitivity_matches_pairwise(
        w in prop::collection::vec(-3.0f64..3.0, 1..6),
        theta in -2.0f64..2.0,
        delta in 0.0f64..1.0,
        bias in 0.05f64..0.95,
    ) {
        let n = w.len();
        let f = LinearThresholdFunction::new(w, theta).unwrap();
        let mu = ProductDistribution::new(vec![bias; n]).unwrap();
        let fast = noise_sensitivity(&f, delta, &mu, Mode::Exact, 0).unwrap().value;
        let slow = noise_sensitivity_pairwise(&f, delta, &mu).unwrap();
        prop_assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn berry_esseen_gap_is_scale_invariant(u in nonzero_vec(12), c in 0.1f64..20.0) {
        let a = berry_esseen_gap(&u, Mode::Exact, 0).unwrap();
        let scaled: Vec<f64> = u.iter().map(|v| v * c).collect();
        let b = berry_esseen_gap(&scaled, Mode::Exact, 0).unwrap();
        prop_assert!((a.gap - b.gap).abs() < 1e-9);
        prop_assert!((a.bound_term - b.bound_term).abs() < 1e-9 * a.bound_term.max(1.0));
    }

    #[test]
    fn rerandomization_matches_resampling(idx in 0u64..16, rho in 0.0f64..=1.0, sigma in 0.0f64..=0.5) {
        let z = BitVector::from_index(idx, 4);
        let a = rerandomize_law(&z, rho, sigma).unwrap();
        let b = noisy_copy_law(&z, 1.0 - rho, &ProductDistribution::bit_flip(4, sigma).unwrap()).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let tv: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum::<f64>() / 2.0;
        prop_assert!(tv < 1e-12);
    }

    #[test]
    fn l1_fit_beats_nearby_coefficients(
        rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 3..25),
        dirs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 8),
    ) {
        let y: Vec<f64> = rows.iter().map(|r| (r[0] - 0.5 * r[2]).signum()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let fit = l1_fit(&x, &y, 1e-10).unwrap();
        let obj = |c: &[f64]| x.mul_vec(c).iter().zip(&y).map(|(p, t)| (p - t).abs()).sum::<f64>();
        prop_assert!((obj(&fit.coeffs) - fit.objective).abs() < 1e-9 * fit.objective.max(1.0));
        for d in &dirs {
            for step in [1e-3, 0.1, 1.0] {
                let c: Vec<f64> = fit.coeffs.iter().zip(d).map(|(a, b)| a + step * b).collect();
                prop_assert!(obj(&c) >= fit.objective - 1e-9 * fit.objective.max(1.0));
            }
        }
    }

    #[test]
    fn bit_vectors_round_trip(n in 1usize..40, raw in any::<u64>()) {
        let idx = if n >= 64 { raw } else { raw & ((1u64 << n) - 1) };
        prop_assert_eq!(BitVector::from_index(idx, n).to_index(), idx);
    }

    #[test]
    fn datasets_round_trip(rows in prop::collection::vec((prop::collection::vec(any::<bool>(), 5), any::<bool>()), 1..30)) {
        let data: Vec<LabeledSample> = rows
            .iter()
            .map(|(bits, y)| {
                let x = BitVector::new(bits.iter().map(|&b| if b { -1 } else { 1 }).collect()).unwrap();
                LabeledSample::new(x, if *y { 1 } else { -1 }).unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data).unwrap();
        prop_assert_eq!(read_dataset(&buf[..]).unwrap(), data);
    }

    #[test]
    fn polynomials_round_trip_through_text(coeffs in prop::collection::vec(-1e6f64..1e6, 0..20)) {
        let p = DensePolynomial::new(coeffs);
        prop_assert_eq!(DensePolynomial::from_text(&p.to_text()).unwrap(), p);
    }
}
