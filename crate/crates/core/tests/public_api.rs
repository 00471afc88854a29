use progavg_core::counts::{count_outer, count_weighted, sweep_counts};
use progavg_core::expsum::{build_arcs, circle_integral, ArcClass, Alpha};
use progavg_core::local::{lambda_q, rho};
use progavg_core::oracle::{convolution_count, rho_bruteforce_table};
use progavg_core::series::{p_prime_trunc, sigma_full, SeriesTables};
use progavg_core::verify::{run_suite, Suite};
use progavg_core::PolynomialSpec;

fn spec(ell: u32, u: i64) -> PolynomialSpec {
    PolynomialSpec::new(ell, u).unwrap()
}

#[test]
fn rho_agrees_with_table_for_small_primes() {
    for p in [2u64, 3, 5, 7, 11, 13, 101] {
        for ell in 1..=5u32 {
            let table = rho_bruteforce_table(p, ell).unwrap();
            for u in 1..=(2 * p as i64) {
                assert_eq!(rho(p, &spec(ell, u)).unwrap(), table[(u as u64 % p) as usize]);
            }
        }
    }
}

#[test]
fn obstructed_shifts_have_zero_series() {
    // x^2 + u with u odd is always even for odd x, and x^2 + 2 needs x odd.
    for u in [1i64, 2, 3, 5, 9] {
        assert_eq!(sigma_full(&spec(2, u), 1000.0).unwrap().value, 0.0, "u = {u}");
    }
    assert!(sigma_full(&spec(2, 6), 1000.0).unwrap().value > 0.0);
    assert!(p_prime_trunc(&spec(2, 1), 1000.0).unwrap().value > 0.0);
}

#[test]
fn lambda_is_multiplicative() {
    let s = spec(2, 6);
    for (a, b) in [(5u64, 7u64), (7, 11), (5, 13)] {
        assert_eq!(lambda_q(a * b, &s).unwrap(), lambda_q(a, &s).unwrap() * lambda_q(b, &s).unwrap());
    }
}

#[test]
fn counts_match_hand_computation() {
    // m <= 10: m^2 + 2 is 3, 11, 27 = 3^3, 83 at m = 1, 3, 5, 9 and composite otherwise.
    let ln = f64::ln;
    let outer = count_outer(&spec(2, 2), 100).unwrap();
    assert!((outer - (ln(3.0) + ln(11.0) + ln(3.0) + ln(83.0))).abs() < 1e-12);
    let weighted = count_weighted(&spec(2, 2), 100).unwrap();
    let expected = ln(3.0) * ln(11.0) + ln(5.0) * ln(3.0) + ln(3.0) * ln(83.0);
    assert!((weighted - expected).abs() < 1e-12);
    let sweep = sweep_counts(2, 10_000, 8).unwrap();
    assert_eq!(sweep.weighted.len(), 8);
    assert!((sweep.weighted[1] - count_weighted(&spec(2, 2), 10_000).unwrap()).abs() < 1e-9);
}

#[test]
fn circle_identity_on_a_small_block() {
    for u in 1..=6 {
        let s = spec(2, u);
        let lhs = circle_integral(&s, 30.0).unwrap();
        let rhs = convolution_count(&s, 30.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-9, "u = {u}: {lhs} vs {rhs}");
    }
}

#[test]
fn arcs_classify_rationals_with_small_denominators() {
    let arcs = build_arcs(1_000_000, 0.5).unwrap();
    let third: Alpha = "1/3".parse().unwrap();
    assert!(matches!(arcs.classify(&third), ArcClass::Major { q: 3, .. }));
    assert!(build_arcs(1000, 2.0).is_err());
}

#[test]
fn tables_match_free_functions() {
    let tables = SeriesTables::for_products(2000);
    let s = spec(3, 10);
    assert_eq!(
        tables.p_prime_trunc(&s, 2000.0).unwrap().value,
        p_prime_trunc(&s, 2000.0).unwrap().value
    );
}

#[test]
fn local_suite_passes() {
    let report = run_suite(Suite::Local).unwrap();
    assert!(report.iter().all(|r| r.passed()));
}
