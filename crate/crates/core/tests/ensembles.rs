use matdiff::*;
use proptest::prelude::*;

/// Mean and standard error of a sample.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of `<A_ab B_cd>` for the listed index quadruples,
/// where `B` is either `A` or its entrywise conjugate.
fn second_moments(
    draw: impl Fn(u64) -> faer::Mat<Complex64>,
    quads: &[(usize, usize, usize, usize)],
    conj_second: bool,
    samples: u64,
) -> Vec<(Complex64, f64, f64)> {
    let mut re = vec![Vec::with_capacity(samples as usize); quads.len()];
    let mut im = vec![Vec::with_capacity(samples as usize); quads.len()];
    for s in 0..samples {
        let m = draw(s);
        for (k, &(a, b, c, d)) in quads.iter().enumerate() {
            let y = if conj_second { m[(c, d)].conj() } else { m[(c, d)] };
            let p = m[(a, b)] * y;
            re[k].push(p.re);
            im[k].push(p.im);
        }
    }
    (0..quads.len())
        .map(|k| {
            let (mr, sr) = mean_se(&re[k]);
            let (mi, si) = mean_se(&im[k]);
            (Complex64::new(mr, mi), sr, si)
        })
        .collect()
}

fn within(est: &(Complex64, f64, f64), target: Complex64, sigmas: f64) -> bool {
    let (m, sr, si) = *est;
    // a zero standard error only happens for an exactly determined moment
    (m.re - target.re).abs() <= sigmas * sr.max(1e-15) && (m.im - target.im).abs() <= sigmas * si.max(1e-15)
}

#[test]
fn gue_covariance_matches_propagator() {
    let n = 64;
    let quads = [(0, 1, 1, 0), (3, 7, 7, 3), (5, 5, 5, 5), (0, 1, 0, 1), (0, 1, 2, 3), (1, 1, 2, 2), (4, 2, 4, 2)];
    let est = second_moments(|s| sample_gue(n, RandomSeed::new(11, s)).unwrap().entries, &quads, false, 10_000);
    for (q, e) in quads.iter().zip(&est) {
        let (a, b, c, d) = *q;
        // <H_ab H_cd> = δ_ad δ_bc / n
        let target = if a == d && b == c { 1.0 / n as f64 } else { 0.0 };
        assert!(within(e, Complex64::new(target, 0.0), 5.0), "{q:?}: {e:?}");
    }
}

#[test]
fn ginibre_covariance_matches_propagator() {
    let n = 64;
    let quads = [(0, 1, 0, 1), (6, 6, 6, 6), (0, 1, 1, 0), (2, 3, 4, 5), (1, 2, 1, 3)];
    let est = second_moments(|s| sample_ginibre(n, RandomSeed::new(12, s)).unwrap().entries, &quads, true, 10_000);
    for (q, e) in quads.iter().zip(&est) {
        let (a, b, c, d) = *q;
        // <X_ab conj(X_cd)> = δ_ac δ_bd / n
        let target = if a == c && b == d { 1.0 / n as f64 } else { 0.0 };
        assert!(within(e, Complex64::new(target, 0.0), 5.0), "{q:?}: {e:?}");
    }
    // and <X X> = 0
    let est = second_moments(|s| sample_ginibre(n, RandomSeed::new(13, s)).unwrap().entries, &[(0, 1, 0, 1)], false, 10_000);
    assert!(within(&est[0], Complex64::new(0.0, 0.0), 5.0), "{:?}", est[0]);
}

#[test]
fn ginibre_entry_mean_is_zero() {
    let n = 512;
    let x = sample_ginibre(n, RandomSeed::new(14, 0)).unwrap().entries;
    let mut re = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            re.push(x[(i, j)].re);
        }
    }
    let (m, se) = mean_se(&re);
    assert!(m.abs() < 5.0 * se);
}

#[test]
fn gue_spectrum_stays_near_semicircle_support() {
    let h = sample_gue(1024, RandomSeed::new(15, 0)).unwrap();
    let ev = hermitian_eigenvalues(h.entries.as_ref()).unwrap();
    assert!(ev.iter().all(|&x| x.abs() <= 2.2), "extremes {:?}", (ev[0], ev[ev.len() - 1]));
}

#[test]
fn ginibre_spectrum_fills_the_unit_disk() {
    let n = 512;
    let x = sample_ginibre(n, RandomSeed::new(16, 0)).unwrap();
    let ev = eigenvalues(x.entries.as_ref()).unwrap();
    let bound = 1.0 + 4.0 / (n as f64).sqrt();
    let inside = ev.iter().filter(|z| z.norm() <= bound).count() as f64 / n as f64;
    assert!(inside >= 0.995, "{inside}");
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let n = 200;
    let a = sample_ginibre(n, RandomSeed::new(17, 0)).unwrap().entries;
    let b = sample_ginibre(n, RandomSeed::new(17, 1)).unwrap().entries;
    let mut prods = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            prods.push((a[(i, j)] * b[(i, j)].conj()).re);
        }
    }
    let (m, se) = mean_se(&prods);
    assert!(m.abs() < 5.0 * se, "correlation {m} ± {se}");
}

#[test]
fn gaussian_steps_have_unit_variance() {
    let draws: Vec<f64> = (0..1_000_000).map(|k| gaussian_step(RandomSeed::new(18, k))).collect();
    let (m, _) = mean_se(&draws);
    let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws.len() as f64 - 1.0);
    assert!(m.abs() < 5e-3, "mean {m}");
    assert!((var - 1.0).abs() < 0.01, "variance {var}");
    assert_eq!(gaussian_step(RandomSeed::new(18, 3)), draws[3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gue_is_exactly_hermitian(n in 1usize..24, root in any::<u64>(), stream in any::<u64>()) {
        let h = sample_gue(n, RandomSeed::new(root, stream)).unwrap().entries;
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(h[(i, j)], h[(j, i)].conj());
            }
        }
    }

    #[test]
    fn same_seed_same_matrix(n in 1usize..16, root in any::<u64>(), stream in any::<u64>(), gue in any::<bool>()) {
        let kind = if gue { EnsembleKind::Gue } else { EnsembleKind::Ginibre };
        let seed = RandomSeed::new(root, stream);
        let a = kind.sample(n, seed).unwrap().entries;
        let b = kind.sample(n, seed).unwrap().entries;
        prop_assert!(a == b);
    }
}
