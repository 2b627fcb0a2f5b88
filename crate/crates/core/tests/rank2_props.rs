use std::f64::consts::PI;

use gramlax::duality::dualize;
use gramlax::geometry::{alpha_all, nullspace_of_config, random_strictly_convex};
use gramlax::oracle::psd_brute;
use gramlax::rank2::{lambda_matrix, optimal_config, p_matrix, rank2_pipeline, rank2_report, LambdaRoute, SUPPORT_TOL};
use gramlax::{Mat, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn in_pattern(n: usize, i: usize, j: usize) -> bool {
    i == j || (i + 1) % n == j || (j + 1) % n == i
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1];
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn support_and_sign_pattern(seed in any::<u64>(), n in 3usize..=9) {
        let s = random_strictly_convex(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let p = p_matrix(&s, &tol()).unwrap();
        for i in 0..n {
            for j in 0..n {
                if !in_pattern(n, i, j) {
                    prop_assert!(p.p[(i, j)].abs() < SUPPORT_TOL);
                }
            }
            prop_assert!((p.p[(i, i)] - 1.0).abs() < 1e-12);
        }
        for i in 0..n - 1 {
            prop_assert!(p.a[i] < 0.0 && p.b[i] < 0.0);
        }
        prop_assert!(p.a[n - 1] > 0.0 && p.b[n - 1] > 0.0);
        // Columns are dependencies.
        prop_assert!(s.matrix().matmul(&p.p).unwrap().max_abs() < 1e-10);
        // The 2x2 route and the LP route agree on each ε_i.
        let al = alpha_all(&s, &tol()).unwrap();
        for (e, a) in p.eps_per_index.iter().zip(&al.values) {
            prop_assert!((e - a).abs() < 1e-9);
        }
    }

    #[test]
    fn band_products_and_angle_identity(seed in any::<u64>(), n in 3usize..=9) {
        let s = random_strictly_convex(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let p = p_matrix(&s, &tol()).unwrap();
        let lam = lambda_matrix(&p, None, &tol()).unwrap();
        prop_assert_eq!(lam.route, LambdaRoute::Propagation);
        prop_assert!(lam.lambda.iter().all(|&l| l > 0.0));
        let l = &lam.lambda;
        // c_i = (PΛ)[i][i+1], d_i = (PΛ)[i+1][i], corners included.
        let c: Vec<f64> = (0..n).map(|i| p.a[i] * l[(i + 1) % n]).collect();
        let d: Vec<f64> = (0..n).map(|i| p.b[i] * l[i]).collect();
        let pc: f64 = c.iter().map(|x| x.abs().ln()).sum();
        let pd: f64 = d.iter().map(|x| x.abs().ln()).sum();
        prop_assert!((pc - pd).abs() < 1e-8);

        // |d_i| / |c_{i−1}| against |w_{i−1}| sin φ_{i−1} / (|w_{i+1}| sin φ_i)
        // on the antipodal ring.
        let ring: Vec<Vec<f64>> = s.points().iter().cloned()
            .chain(s.points().iter().map(|w| w.iter().map(|x| -x).collect()))
            .collect();
        let m = ring.len();
        for i in 0..n {
            let im = (i + m - 1) % m;
            let ip = i + 1;
            let phi_prev = angle_between(&ring[im], &ring[i]);
            let phi = angle_between(&ring[i], &ring[ip]);
            let len = |v: &Vec<f64>| v[0].hypot(v[1]);
            let want = len(&ring[im]) * phi_prev.sin() / (len(&ring[ip]) * phi.sin());
            let got = d[i].abs() / c[(i + n - 1) % n].abs();
            prop_assert!((got / want - 1.0).abs() < 1e-8, "i={i}: {got} vs {want}");
        }
    }
}

#[test]
fn pipeline_invariants() {
    for n in 3..=12 {
        let r = rank2_pipeline(n, &tol()).unwrap();
        let c = (PI / n as f64).cos();
        assert_eq!(r.verified, Some(true));
        assert!((r.eps - c).abs() < 1e-9);
        assert!(r.psd);
        assert!((r.q_prime.trace() - n as f64).abs() < 1e-10);
        assert!(r.eigenvalues.iter().all(|&e| e >= -1e-9 * n as f64));
        assert_eq!(r.q_prime_rank, 2);
        assert!(r.pl_rank + 2 >= n);
        assert!(r.residuals.pl_symmetry <= 1e-8);
        assert!(r.breaches.is_empty(), "n={n}: {:?}", r.breaches);

        // Three routes to the same number.
        let s = optimal_config(n).unwrap();
        let dual = dualize(&nullspace_of_config(&s, &tol()).unwrap(), &tol()).unwrap().eps;
        let alpha = alpha_all(&s, &tol()).unwrap().max;
        assert!((r.eps - dual).abs() < 1e-9 && (r.eps - alpha).abs() < 1e-9);

        if n <= 8 {
            assert!(psd_brute(&r.q_prime).unwrap());
        }
    }
}

#[test]
fn non_optimal_configs_surface_breaches() {
    // PΛ stays symmetric away from the optimum, but PΛQᵀ no longer vanishes.
    let s = optimal_config(5).unwrap().with_scaled_point(2, 0.9).unwrap();
    let r = rank2_report(&s, &tol()).unwrap();
    assert!(r.residuals.pl_symmetry < 1e-10);
    assert!(r.breaches.iter().any(|b| b == "annihilation"), "{:?}", r.breaches);
}

#[test]
fn psd_oracle_agrees_with_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    let mut checked = 0;
    for _ in 0..300 {
        let n = rng.gen_range(2..=6);
        let mut m = Mat::zeros(n, n);
        let shift = rng.gen_range(-1.0..1.5);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            m[(i, i)] += shift;
        }
        let ev = gramlax::numerics::symmetric_eigenvalues(&m, &tol()).unwrap();
        if ev[0].abs() <= 1e-6 {
            continue;
        }
        checked += 1;
        assert_eq!(psd_brute(&m).unwrap(), ev[0] > 0.0, "{m:?}");
    }
    assert!(checked > 200);
}
