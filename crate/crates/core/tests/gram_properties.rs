use nalgebra::DMatrix;
use num_complex::Complex64;
use okounkov_core::gram::{
    dense_gram_p1, discrete_chebyshev_values, minimal_sections, AngularPerturbation, DenseOptions, DenseWeight, GramMatrix,
    Measure, MonomialOrder,
};
use okounkov_core::toric::{Expr, ToricWeight};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spd(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let s = &a * a.transpose() + DMatrix::identity(n, n) * 0.1;
    (0..n).map(|i| (0..n).map(|j| s[(i, j)]).collect()).collect()
}

fn exps(n: usize) -> Vec<Vec<i64>> {
    (0..n as i64).map(|i| vec![i]).collect()
}

fn recombination(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * n)
        .map(|i| {
            let d = if i % (n + 1) == 0 { 1.0 } else { 0.0 };
            Complex64::new(d + rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn product_formula_on_random_spd(n in 1usize..=40, seed in any::<u64>()) {
        let rows = random_spd(n, seed);
        let g = GramMatrix::from_real(&rows).unwrap();
        let f = minimal_sections(&g, 1, exps(n), MonomialOrder::Lex).unwrap();
        let oracle = DMatrix::from_fn(n, n, |i, j| rows[i][j]).cholesky().unwrap().determinant().ln();
        prop_assert!((f.ln_det() - oracle).abs() <= 1e-8 * oracle.abs().max(1.0));
        prop_assert!((g.ln_det().unwrap() - oracle).abs() <= 1e-8 * oracle.abs().max(1.0));
    }

    #[test]
    fn determinant_ratio_is_basis_independent(n in 2usize..=12, seed in any::<u64>()) {
        let a = GramMatrix::from_real(&random_spd(n, seed)).unwrap();
        let b = GramMatrix::from_real(&random_spd(n, seed ^ 0x5555)).unwrap();
        let r = recombination(n, seed.wrapping_add(1));
        let before = a.ln_det().unwrap() - b.ln_det().unwrap();
        let after = a.recombined(&r).unwrap().ln_det().unwrap() - b.recombined(&r).unwrap().ln_det().unwrap();
        prop_assert!((before - after).abs() <= 1e-8 * before.abs().max(1.0));
    }

    #[test]
    fn larger_weights_have_smaller_norms(amp in 0.0f64..0.5, c in 0.0f64..0.3, k in 1u32..24) {
        let mu = Measure::default();
        let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
        let g = psi.g.clone().plus(Expr::QuadraticBump { amplitude: amp, center: vec![0.2], radius: 1.0 }).plus(Expr::constant(c));
        let phi = psi.with_g(g).unwrap();
        let a = discrete_chebyshev_values(&psi, &mu, k, MonomialOrder::Lex).unwrap();
        let b = discrete_chebyshev_values(&phi, &mu, k, MonomialOrder::Lex).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(x >= &(y - 1e-12));
        }
    }
}

#[test]
fn product_formula_on_dense_p1_grams() {
    let fs = ToricWeight::fubini_study(1, 1.0).unwrap();
    for (k, amp) in [(4u32, 0.5), (16, 0.3), (32, 0.2)] {
        let w = DenseWeight::new(fs.clone(), AngularPerturbation { amplitude: amp, harmonic: 2 }).unwrap();
        let g = dense_gram_p1(&w, &Measure::default(), k, &DenseOptions::default()).unwrap();
        let f = minimal_sections(&g, k, exps(k as usize + 1), MonomialOrder::Lex).unwrap();
        let ln_det = g.ln_det().unwrap();
        assert!((f.ln_det() - ln_det).abs() <= 1e-8 * ln_det.abs(), "k = {k}");
        // Recombination invariance of the ratio against the unperturbed Gram. The recombination
        // acts on sections rescaled to unit norm for the reference weight, which keeps the
        // recombined matrices well conditioned.
        let w0 = DenseWeight::new(fs.clone(), AngularPerturbation::default()).unwrap();
        let g0 = dense_gram_p1(&w0, &Measure::default(), k, &DenseOptions::default()).unwrap();
        let r = recombination(k as usize + 1, 7 + k as u64);
        let before = ln_det - g0.ln_det().unwrap();
        let f0 = g0.log_scale.clone();
        let after = g.rescaled(&f0).recombined(&r).unwrap().ln_det().unwrap() - g0.rescaled(&f0).recombined(&r).unwrap().ln_det().unwrap();
        assert!((before - after).abs() <= 1e-8 * before.abs().max(1.0), "k = {k}: {before} {after}");
    }
}

#[test]
fn difference_field_is_uniformly_bounded() {
    let mu = Measure::default();
    let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
    let phi = ToricWeight::fubini_study_with_bump(0.4, 0.0, 1.0).unwrap();
    // sup|ψ − φ| = 2 · 0.4.
    let bound = 0.8 + 1.0;
    for k in [1u32, 2, 4, 8, 16, 32, 64] {
        let a = discrete_chebyshev_values(&psi, &mu, k, MonomialOrder::Lex).unwrap();
        let b = discrete_chebyshev_values(&phi, &mu, k, MonomialOrder::Lex).unwrap();
        let m = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(m <= bound, "k = {k}: {m}");
    }
}
