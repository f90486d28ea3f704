mod oracle;

use lyapca::ca::{builtin, Alphabet, Config, Rule, Symbol};
use lyapca::exponents::{i_exact, lambda_tilde_exact, Side};
use proptest::prelude::*;

fn binary_rule(r: usize) -> impl Strategy<Value = Rule> {
    prop::collection::vec(0..2 as Symbol, 1 << (2 * r + 1))
        .prop_map(move |t| Rule::from_table(Alphabet::new(2).unwrap(), r, t).unwrap())
}

/// Products of two binary rules (alphabet 4), where the engines split by
/// factor.
fn product_instance() -> impl Strategy<Value = (Rule, Config, usize)> {
    (1usize..=2, 1usize..=2).prop_flat_map(|(r, n)| {
        let rn = (r * n) as i64;
        (binary_rule(r), binary_rule(1), prop::collection::vec(0..4 as Symbol, (4 * rn + 1) as usize)).prop_map(
            move |(a, b, cells)| {
                let rule = builtin::product_rule(&a, &b).unwrap();
                (rule, Config::new(cells, -2 * rn).unwrap(), n)
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn exact_exponents_match_brute_force((rule, x, n) in oracle::small_instance()) {
        prop_assert_eq!(lambda_tilde_exact(&rule, &x, n, Side::Minus).unwrap(), oracle::lambda_tilde_minus(&rule, &x, n));
        prop_assert_eq!(lambda_tilde_exact(&rule, &x, n, Side::Plus).unwrap(), oracle::lambda_tilde_plus(&rule, &x, n));
        prop_assert_eq!(i_exact(&rule, &x, n, Side::Minus).unwrap(), oracle::i_minus(&rule, &x, n));
        prop_assert_eq!(i_exact(&rule, &x, n, Side::Plus).unwrap(), oracle::i_plus(&rule, &x, n));
    }

    #[test]
    fn product_exponents_match_brute_force((rule, x, n) in product_instance()) {
        for side in [Side::Minus, Side::Plus] {
            let (lt, i) = match side {
                Side::Minus => (oracle::lambda_tilde_minus(&rule, &x, n), oracle::i_minus(&rule, &x, n)),
                Side::Plus => (oracle::lambda_tilde_plus(&rule, &x, n), oracle::i_plus(&rule, &x, n)),
            };
            prop_assert_eq!(lambda_tilde_exact(&rule, &x, n, side).unwrap(), lt);
            prop_assert_eq!(i_exact(&rule, &x, n, side).unwrap(), i);
        }
    }
}

#[test]
fn shift_moves_perturbations_one_cell_per_step() {
    let rule = builtin::shift();
    let x = Config::from_fn(-10, 10, |c| (c.rem_euclid(3) == 0) as Symbol);
    assert_eq!(oracle::lambda_tilde_minus(&rule, &x, 5), 5);
    assert_eq!(oracle::lambda_tilde_plus(&rule, &x, 5), 0);
    assert_eq!(lambda_tilde_exact(&rule, &x, 5, Side::Minus).unwrap(), 5);
}
