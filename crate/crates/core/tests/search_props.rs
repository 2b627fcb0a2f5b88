use std::f64::consts::PI;

use gramlax::duality::verify_off_certificate;
use gramlax::search::{optimize_d2, optimize_general, welch_bound, FoundConfig, SearchConfig};

fn quick(seed: u64) -> SearchConfig {
    SearchConfig {
        restarts: 3,
        seed,
        ..SearchConfig::default()
    }
}

#[test]
fn planar_results_verify_and_respect_welch() {
    for n in 3..=7 {
        let r = optimize_d2(n, &quick(n as u64)).unwrap();
        let c = &r.certificate;
        assert!(verify_off_certificate(c, &quick(0).tol).passed);
        assert!(c.eps >= welch_bound(n, 2).unwrap() - 1e-9);
        assert!((c.eps - (PI / n as f64).cos()).abs() < 1e-6, "n={n}: {}", c.eps);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(matches!(r.config, FoundConfig::Planar(_)));
    }
}

#[test]
fn seven_lines() {
    let r = optimize_d2(7, &SearchConfig::default()).unwrap();
    assert!((r.certificate.eps - 0.900_968_867_902_419).abs() < 1e-6);
}

#[test]
fn general_results_verify_and_respect_welch() {
    for (n, d) in [(4, 3), (5, 3), (5, 4), (6, 4), (6, 2)] {
        let r = optimize_general(n, d, &quick(1)).unwrap();
        assert!(verify_off_certificate(&r.certificate, &quick(0).tol).passed);
        assert!(r.certificate.eps >= welch_bound(n, d).unwrap() - 1e-9);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn general_planar_instances() {
    let cfg = SearchConfig {
        restarts: 8,
        max_iters: 10_000,
        ..SearchConfig::default()
    };
    let r = optimize_general(3, 2, &cfg).unwrap();
    assert!(r.certificate.eps <= 0.5 + 1e-6);
    let r = optimize_general(5, 2, &cfg).unwrap();
    assert!(r.certificate.eps <= (PI / 5.0).cos() + 1e-4, "{}", r.certificate.eps);
}

#[test]
fn deterministic_under_parallelism() {
    let cfg = quick(42);
    let a = optimize_d2(6, &cfg).unwrap();
    let b = optimize_d2(6, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let a = optimize_general(5, 3, &cfg).unwrap();
    let b = optimize_general(5, 3, &cfg).unwrap();
    assert_eq!(a, b);
    // A single-threaded pool gives the same answer as the global pool.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| optimize_general(5, 3, &cfg).unwrap());
    assert_eq!(a, c);
}
