use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use secular_core::charpoly::SecularPolynomial;
use secular_core::limit::{
    eval_F, limit_traces, poisson::draw_f64, sample_Zd, secular_limit_coefficients, secular_limit_scaled, FForm,
    FieldSampler,
};
use secular_core::rng::{derive_seed, stream};
use secular_core::spectra::{match_multisets, poly_roots};

/// 100 points spread over the disk of radius `r` (Vogel spiral).
fn disk_grid(r: f64) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..100).map(|i| Complex64::from_polar(r * ((i as f64 + 0.5) / 100.0).sqrt(), golden * i as f64)).collect()
}

#[test]
fn forms_agree_within_recorded_bounds() {
    for d in [1.5, 2.0, 4.0] {
        let sampler = FieldSampler::new(d, 0.5, Some(400)).unwrap();
        for i in 0..50 {
            let field = sampler.sample(derive_seed(13, i));
            for z in disk_grid(0.95 / d) {
                let p = eval_F(&field, z, FForm::Product).unwrap();
                let c = eval_F(&field, z, FForm::Centered).unwrap();
                let t = eval_F(&field, z, FForm::Traces).unwrap();
                assert!((p.value() - c.value()).norm() <= p.bound + c.bound, "d={d} z={z}: {p:?} {c:?}");
                assert!((p.value() - t.value()).norm() <= p.bound + t.bound, "d={d} z={z}: {p:?} {t:?}");
            }
            for z in disk_grid(0.95 / d.sqrt()) {
                let c = eval_F(&field, z, FForm::Centered).unwrap();
                let q = eval_F(&field, z, FForm::CenteredProduct).unwrap();
                assert!((q.value() - c.value()).norm() <= q.bound + c.bound, "d={d} z={z}: {q:?} {c:?}");
            }
        }
    }
}

#[test]
fn horner_on_coefficients_matches_evaluation() {
    for d in [1.5, 2.0, 4.0] {
        let sampler = FieldSampler::new(d, 0.5, Some(80)).unwrap();
        for i in 0..10 {
            let field = sampler.sample(derive_seed(14, i));
            let series = secular_limit_scaled(&field, 80).unwrap();
            for z in disk_grid(0.5 / d.sqrt()) {
                let c = eval_F(&field, z, FForm::Centered).unwrap();
                assert!((series.eval(z) - c.value()).norm() < 1e-8, "d={d} z={z}");
            }
        }
    }
}

#[test]
fn subcritical_function_is_a_polynomial_with_labelled_zeros() {
    let sampler = FieldSampler::new(0.7, 1e-12, None).unwrap();
    let mut nontrivial = 0;
    for i in 0..200 {
        let field = sampler.sample(derive_seed(15, i));
        let mass: usize = (1..=field.len()).map(|l| l * field.y(l).to_usize().unwrap()).sum();
        let c = secular_limit_coefficients(&field, mass + 5).unwrap();
        let exact = c.exact().unwrap();
        assert!(exact[mass + 1..].iter().all(Zero::is_zero));
        let zd = sample_Zd(&field).unwrap();
        assert_eq!(zd.total() as usize, mass);
        if mass == 0 || mass > 24 {
            continue;
        }
        nontrivial += 1;
        let q = SecularPolynomial::from_exact(exact[..=mass].to_vec()).unwrap();
        let roots = poly_roots(&q).unwrap();
        let labelled: Vec<Complex64> =
            zd.entries.iter().flat_map(|(l, &m)| std::iter::repeat_n(l.value(), m as usize)).collect();
        assert!(match_multisets(&roots, &labelled, 1e-6).all_matched(), "field {i}");
    }
    assert!(nontrivial > 50);
}

#[test]
fn all_zero_probability_at_half() {
    let sampler = FieldSampler::new(0.5, 1e-12, None).unwrap();
    let n = 100_000;
    let zeros = (0..n).filter(|&i| sampler.sample(derive_seed(16, i)).is_all_zero()).count();
    let p = zeros as f64 / n as f64;
    let se = (0.25 / n as f64).sqrt();
    assert!((p - 0.5).abs() < 3.0 * se, "{p}");
}

#[test]
fn mean_of_y3_at_two() {
    let sampler = FieldSampler::new(2.0, 0.5, Some(60)).unwrap();
    let n = 100_000;
    let y3: Vec<f64> = (0..n).map(|i| sampler.sample(derive_seed(17, i)).y_f64(3)).collect();
    let mean = y3.iter().sum::<f64>() / n as f64;
    let se = (8.0 / 3.0 / n as f64).sqrt();
    assert!((mean - 8.0 / 3.0).abs() < 3.0 * se, "{mean}");
}

#[test]
fn multiplicity_of_one_matches_a_single_poisson() {
    let sampler = FieldSampler::new(0.5, 1e-12, None).unwrap();
    let n = 100_000;
    let mut a = [0f64; 16];
    for i in 0..n {
        let field = sampler.sample(derive_seed(18, i));
        let m = sample_Zd(&field).unwrap().multiplicity(secular_core::spectra::RootLabel { l: 1, j: 0 });
        assert_eq!(BigUint::from(m), (1..=field.len()).map(|l| field.y(l).clone()).sum::<BigUint>());
        a[(m as usize).min(15)] += 1.0 / n as f64;
    }
    // Σ_ℓ Y_ℓ ~ Poisson(Σ_ℓ 0.5^ℓ/ℓ) = Poisson(log 2)
    let mut rng = stream(19);
    let mut b = vec![0f64; 16];
    for _ in 0..n {
        b[(draw_f64(2f64.ln(), &mut rng).unwrap() as usize).min(15)] += 1.0 / n as f64;
    }
    let tv: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.01, "{tv}");
}

#[test]
fn traces_of_sampled_field() {
    let field = FieldSampler::new(2.0, 0.5, Some(12)).unwrap().sample(5);
    let x12 = limit_traces(&field, 12).unwrap();
    let manual: BigUint = [1usize, 2, 3, 4, 6, 12].iter().map(|&l| field.y(l) * BigUint::from(l)).sum();
    assert_eq!(x12, manual);
}
