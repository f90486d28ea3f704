mod oracle;

use lyapca::ca::{apply, builtin, shift_config, Alphabet, Config, Rule, Symbol};
use lyapca::entropy::{analytic_shift_entropy, count_patterns};
use lyapca::exponents::{capital_lambda, i_exact, lambda_tilde_bounds, lambda_tilde_exact, PointMethod, Side};
use lyapca::{Budgets, Measure};
use proptest::prelude::*;

fn rule_strategy(max_q: usize, max_r: usize) -> impl Strategy<Value = Rule> {
    (2usize..=max_q, 1usize..=max_r).prop_flat_map(|(q, r)| {
        prop::collection::vec(0..q as Symbol, q.pow(2 * r as u32 + 1))
            .prop_map(move |t| Rule::from_table(Alphabet::new(q).unwrap(), r, t).unwrap())
    })
}

/// Rule, a window wide enough for horizon `n + m` and extra shifts, and `n`.
fn setting() -> impl Strategy<Value = (Rule, Config, usize, usize)> {
    (rule_strategy(3, 2), 1usize..=3, 1usize..=3).prop_flat_map(|(rule, n, m)| {
        let q = rule.size();
        let w = (3 * rule.radius() * (n + m) + 4) as i64;
        prop::collection::vec(0..q as Symbol, (2 * w + 1) as usize)
            .prop_map(move |cells| (rule.clone(), Config::new(cells, -w).unwrap(), n, m))
    })
}

fn iterate(rule: &Rule, x: &Config, n: usize) -> Config {
    (0..n).fold(x.clone(), |y, _| apply(rule, &y).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn depths_are_bounded_by_rn((rule, x, n, _m) in setting()) {
        let rn = (rule.radius() * n) as u64;
        for side in [Side::Minus, Side::Plus] {
            prop_assert!(lambda_tilde_exact(&rule, &x, n, side).unwrap() <= rn);
            prop_assert!(i_exact(&rule, &x, n, side).unwrap() <= rn);
        }
    }

    #[test]
    fn maximal_dominates_averaged_depth((rule, x, n, _m) in setting()) {
        for side in [Side::Minus, Side::Plus] {
            let big = capital_lambda(&rule, &x, n, side, PointMethod::Exact).unwrap();
            let i = i_exact(&rule, &x, n, side).unwrap();
            prop_assert!(big.value + 1 >= i, "Λ = {} < I - 1 = {}", big.value, i as i64 - 1);
        }
    }

    #[test]
    fn plus_depth_is_subadditive((rule, x, n, m) in setting()) {
        let whole = lambda_tilde_exact(&rule, &x, n + m, Side::Plus).unwrap();
        let first = lambda_tilde_exact(&rule, &x, n, Side::Plus).unwrap();
        let later = shift_config(&iterate(&rule, &x, n), first as i64);
        let second = lambda_tilde_exact(&rule, &later, m, Side::Plus).unwrap();
        prop_assert!(whole <= first + second, "{whole} > {first} + {second}");
    }

    #[test]
    fn bracket_contains_the_exact_depth((rule, x, n, _m) in setting(), seed in any::<u64>()) {
        for side in [Side::Minus, Side::Plus] {
            let b = lambda_tilde_bounds(&rule, &x, n, side, 64, seed).unwrap();
            let exact = b.exact.expect("small instances fit the budget");
            prop_assert!(b.lower <= exact && exact <= b.upper, "{:?}", b);
        }
    }

    #[test]
    fn pattern_counts_match_enumeration(rule in rule_strategy(2, 2), p in 1usize..=2, n in 1usize..=2) {
        let count = count_patterns(&rule, p, n, &Budgets::default()).unwrap();
        prop_assert!(count.exact);
        prop_assert_eq!(count.count as usize, oracle::spacetime_patterns(&rule, p, n));
    }
}

#[test]
fn pattern_counts_match_enumeration_on_builtins() {
    for name in ["coven:10", "f2:1", "shift", "product:shift,f2:1"] {
        let rule = builtin::by_name(name).unwrap();
        let p = rule.radius().max(1);
        for n in 1..=3 {
            let count = count_patterns(&rule, p, n, &Budgets::default()).unwrap();
            assert_eq!(count.count as usize, oracle::spacetime_patterns(&rule, p, n), "{name} n={n}");
        }
    }
}

#[test]
fn analytic_entropy_sums_track_entropies() {
    let tracks = vec![vec![0.25, 0.75], vec![0.5, 0.2, 0.3]];
    let m = Measure::new(tracks.clone()).unwrap();
    let got = analytic_shift_entropy(&m);
    assert!((got - oracle::bernoulli_entropy(&tracks)).abs() < 1e-12);
    let product = Measure::product_uniform(&[2, 3]).unwrap();
    assert!((analytic_shift_entropy(&product) - 6f64.ln()).abs() < 1e-12);
}
