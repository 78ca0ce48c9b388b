use std::f64::consts::PI;

use faer::Mat;
use matdiff::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The factors `1 + √(τ/M) X_i` of one sample, drawn independently of `build_product`.
fn factors(config: &ProductConfig, sample: usize) -> Vec<Mat<Complex64>> {
    let scale = (config.tau / config.m as f64).sqrt();
    (0..config.m)
        .map(|i| {
            let x = config.kind.sample(config.n, config.factor_seed(sample, i)).unwrap().entries;
            Mat::from_fn(config.n, config.n, |a, b| {
                let one = if a == b { 1.0 } else { 0.0 };
                c(one, 0.0) + x[(a, b)] * scale
            })
        })
        .collect()
}

fn naive_product(fs: &[Mat<Complex64>]) -> Mat<Complex64> {
    let mut y = fs[0].clone();
    for f in &fs[1..] {
        y = &y * f;
    }
    y
}

/// Every target has a distinct partner in `found` within `tol`.
fn matched(found: &[Complex64], targets: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; found.len()];
    targets.iter().all(|t| {
        let best = (0..found.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| (found[i] - t).norm().total_cmp(&(found[j] - t).norm()));
        match best {
            Some(i) if (found[i] - t).norm() <= tol => {
                used[i] = true;
                true
            }
            _ => false,
        }
    })
}

#[test]
fn zero_time_product_is_identity() {
    let config = ProductConfig::new(EnsembleKind::Ginibre, 4, 7, 0.0);
    let p = build_product(&config, 0).unwrap();
    assert_eq!(p.log_scale, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(p.matrix[(i, j)], c(if i == j { 1.0 } else { 0.0 }, 0.0));
        }
    }
}

#[test]
fn zero_time_cloud_is_all_ones() {
    let config = ProductConfig::new(EnsembleKind::Gue, 5, 3, 0.0).samples(2);
    let cloud = sample_cloud(&config).unwrap();
    assert_eq!(cloud.eigenvalues.len(), 10);
    assert!(cloud.eigenvalues.iter().all(|&z| z == c(1.0, 0.0)));
}

#[test]
fn single_scalar_factor() {
    let tau = 0.7;
    let config = ProductConfig::new(EnsembleKind::Gue, 1, 1, tau).seed(RandomSeed::new(21, 5));
    let x = sample_gue(1, config.factor_seed(0, 0)).unwrap().entries[(0, 0)].re;
    let p = build_product(&config, 0).unwrap();
    let y = p.matrix[(0, 0)] * p.log_scale.exp();
    assert!((y - c(1.0 + tau.sqrt() * x, 0.0)).norm() < 1e-15);
}

#[test]
fn product_matches_factor_by_factor_multiplication() {
    for kind in [EnsembleKind::Gue, EnsembleKind::Ginibre] {
        let config = ProductConfig::new(kind, 6, 9, 2.0).seed(RandomSeed::new(22, 0));
        let p = build_product(&config, 3).unwrap();
        let y = naive_product(&factors(&config, 3));
        let scale = p.log_scale.exp();
        let err = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| (p.matrix[(i, j)] * scale - y[(i, j)]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * y.norm_l2(), "{kind:?}: {err}");
    }
}

#[test]
fn determinant_equals_eigenvalue_product() {
    for (n, m, tau) in [(8, 10, 1.0), (16, 50, 3.0), (32, 20, 2.0)] {
        let config = ProductConfig::new(EnsembleKind::Ginibre, n, m, tau).seed(RandomSeed::new(23, n as u64));
        let p = build_product(&config, 0).unwrap();
        let ev = eigenvalues(p.matrix.as_ref()).unwrap();
        // logs avoid overflow; compare e^{Σ ln λ - Σ ln det A_i} with 1
        let from_ev: Complex64 = ev.iter().map(|l| l.ln()).sum::<Complex64>() + n as f64 * p.log_scale;
        let from_det: Complex64 = factors(&config, 0).iter().map(|f| f.determinant().ln()).sum();
        let ratio = (from_ev - from_det).exp();
        assert!((ratio - 1.0).norm() < 1e-6, "n={n}: {ratio}");
    }
}

#[test]
fn eigenvalues_of_known_matrices() {
    let eye = Mat::<Complex64>::identity(5, 5);
    assert!(eigenvalues(eye.as_ref()).unwrap().iter().all(|z| (z - 1.0).norm() < 1e-14));
    let d = Mat::from_fn(3, 3, |i, j| if i != j { c(0.0, 0.0) } else { [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)][i] });
    let ev = eigenvalues(d.as_ref()).unwrap();
    assert!(matched(&ev, &[c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)], 1e-13));
}

/// Characteristic polynomial coefficients by Faddeev–LeVerrier, highest first
/// (`p(λ) = λ^n + c_1 λ^{n-1} + … + c_n`).
fn char_poly(a: &Mat<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    let mut coeffs = vec![c(1.0, 0.0)];
    let mut m = Mat::<Complex64>::zeros(n, n);
    for k in 1..=n {
        let mut next = a * &m;
        let ck_prev = coeffs[k - 1];
        for i in 0..n {
            next[(i, i)] += ck_prev;
        }
        m = next;
        let am = a * &m;
        let trace: Complex64 = (0..n).map(|i| am[(i, i)]).sum();
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

/// All roots by Durand–Kerner, polished by Newton.
fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(c(0.0, 0.0), |acc, &k| acc * z + k);
    let deriv = |z: Complex64| {
        coeffs[..n]
            .iter()
            .enumerate()
            .fold(c(0.0, 0.0), |acc, (i, &k)| acc * z + k * (n - i) as f64)
    };
    let seed = c(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * 1.5).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| roots[i] - roots[j]).product();
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
        .into_iter()
        .map(|mut z| {
            for _ in 0..5 {
                let d = deriv(z);
                if d.norm() > 0.0 {
                    z -= eval(z) / d;
                }
            }
            z
        })
        .collect()
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    for s in 0..5 {
        let a = sample_ginibre(8, RandomSeed::new(24, s)).unwrap().entries;
        let ev = eigenvalues(a.as_ref()).unwrap();
        let roots = poly_roots(&char_poly(&a));
        assert!(matched(&ev, &roots, 1e-8), "sample {s}: {ev:?} vs {roots:?}");
    }
}

#[test]
fn block_embedding_spectrum_is_mth_roots() {
    for (m, n) in [(2usize, 3usize), (3, 4), (5, 2)] {
        let fs: Vec<Mat<Complex64>> = (0..m)
            .map(|i| sample_ginibre(n, RandomSeed::new(25, (m * 10 + i) as u64)).unwrap().entries)
            .collect();
        let b = block_embedding(&fs).unwrap();
        let mu = eigenvalues(b.as_ref()).unwrap();
        let lam = eigenvalues(naive_product(&fs).as_ref()).unwrap();
        let roots: Vec<Complex64> = lam
            .iter()
            .flat_map(|l| {
                let r = l.powf(1.0 / m as f64);
                (0..m).map(move |k| r * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            })
            .collect();
        assert!(matched(&mu, &roots, 1e-8), "(M, N) = ({m}, {n})");
    }
}

#[test]
fn block_embedding_of_identities_gives_roots_of_unity() {
    let fs = vec![Mat::<Complex64>::identity(3, 3); 4];
    let mu = eigenvalues(block_embedding(&fs).unwrap().as_ref()).unwrap();
    let targets: Vec<Complex64> = (0..4)
        .flat_map(|k| std::iter::repeat_n(Complex64::from_polar(1.0, PI * k as f64 / 2.0), 3))
        .collect();
    assert!(matched(&mu, &targets, 1e-10));
}

#[test]
fn block_embedding_rejects_mismatched_factors() {
    let fs = vec![Mat::<Complex64>::identity(3, 3), Mat::<Complex64>::identity(2, 2)];
    assert!(matches!(block_embedding(&fs), Err(Error::InvalidInput(_))));
    assert!(block_embedding(&[]).is_err());
}

#[test]
fn balancing_does_not_move_the_spectrum() {
    // τ = 16 pushes the norm past 10³ several times
    let base = ProductConfig::new(EnsembleKind::Ginibre, 12, 64, 16.0)
        .samples(3)
        .seed(RandomSeed::new(26, 0));
    let sorted = |threshold: f64| {
        let mut ev = sample_cloud(&base.balance_threshold(threshold)).unwrap().eigenvalues;
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    };
    let (a, b) = (sorted(1e3), sorted(1e6));
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() <= 1e-6 * scale, "{x} vs {y}");
    }
    let p = build_product(&base.balance_threshold(1e3), 0).unwrap();
    assert!(p.log_scale > 0.0);
}

#[test]
fn cloud_has_n_times_samples_points_and_is_reproducible() {
    let config = ProductConfig::new(EnsembleKind::Ginibre, 100, 100, 1.0)
        .samples(60)
        .seed(RandomSeed::new(27, 0));
    let a = sample_cloud(&config).unwrap();
    assert_eq!(a.eigenvalues.len(), 6000);
    assert_eq!(a.sample_index(5999), 59);
    let b = sample_cloud(&config.samples(3)).unwrap();
    // samples are independent of how many are requested
    assert_eq!(&a.eigenvalues[..300], &b.eigenvalues[..]);
}

#[test]
fn rescale_multiplies_by_exp_minus_half_tau() {
    let config = ProductConfig::new(EnsembleKind::Gue, 10, 20, 1.5).seed(RandomSeed::new(28, 0));
    let raw = sample_cloud(&config).unwrap().eigenvalues;
    let scaled = sample_cloud(&config.rescale(true)).unwrap().eigenvalues;
    for (r, s) in raw.iter().zip(&scaled) {
        assert!((r * (-0.75f64).exp() - s).norm() < 1e-12 * r.norm().max(1.0));
    }
}

#[test]
fn two_hermitian_product_is_real_below_transition() {
    let tau = 2.0 * 0.4 * 0.4;
    let config = ProductConfig::new(EnsembleKind::Gue, 200, 2, tau)
        .samples(5)
        .seed(RandomSeed::new(29, 0));
    let ev = sample_cloud(&config).unwrap().eigenvalues;
    let real = ev.iter().filter(|z| z.im.abs() < 1e-6).count() as f64 / ev.len() as f64;
    assert!(real >= 0.99, "{real}");
}

fn log_abs_stats(samples: usize) -> (f64, f64, f64, f64) {
    let config = ProductConfig::new(EnsembleKind::Gue, 1, 10_000, 1.0).seed(RandomSeed::new(30, 0));
    let logs: Vec<f64> = (0..samples)
        .map(|s| {
            let p = build_product(&config, s).unwrap();
            p.matrix[(0, 0)].norm().ln() + p.log_scale
        })
        .collect();
    let n = samples as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt(), var, var * (2.0 / (n - 1.0)).sqrt())
}

#[test]
fn one_by_one_product_is_log_normal() {
    let (mean, se_mean, var, se_var) = log_abs_stats(4_000);
    assert!((mean + 0.5).abs() < 3.0 * se_mean, "mean {mean} ± {se_mean}");
    assert!((var - 1.0).abs() < 3.0 * se_var, "variance {var} ± {se_var}");
}

#[test]
#[ignore = "10⁵ products of 10⁴ factors; several minutes"]
fn one_by_one_product_is_log_normal_full_size() {
    let (mean, se_mean, var, se_var) = log_abs_stats(100_000);
    assert!((mean + 0.5).abs() < 3.0 * se_mean, "mean {mean} ± {se_mean}");
    assert!((var - 1.0).abs() < 3.0 * se_var, "variance {var} ± {se_var}");
}

#[test]
fn scalar_walk_at_zero_time_is_exactly_zero() {
    let w = scalar_walk(0.0, 100, 50, RandomSeed::new(31, 0)).unwrap();
    assert_eq!(w.mean, 0.0);
    assert_eq!(w.variance, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invalid_configs_fail_validation(n in 0usize..3, m in 0usize..3, samples in 0usize..3, tau in -1.0f64..1.0) {
        let config = ProductConfig::new(EnsembleKind::Ginibre, n, m, tau).samples(samples);
        let valid = n >= 1 && m >= 1 && samples >= 1 && tau >= 0.0;
        prop_assert_eq!(config.validate().is_ok(), valid);
    }

    #[test]
    fn cloud_size_is_n_times_samples(n in 1usize..6, m in 1usize..5, samples in 1usize..4, tau in 0.0f64..3.0, root in any::<u64>()) {
        let config = ProductConfig::new(EnsembleKind::Gue, n, m, tau).samples(samples).seed(RandomSeed::new(root, 0));
        let cloud = sample_cloud(&config).unwrap();
        prop_assert_eq!(cloud.eigenvalues.len(), n * samples);
        prop_assert_eq!(cloud.log_scale.len(), samples);
    }
}
