//! The property suite on randomly drawn quadratic algebras.

use koszulkit_core::catalog::random_algebra;
use koszulkit_core::properties::{check_algebra, SuiteConfig};
use koszulkit_core::scalars::Field;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn suite_holds_on_random_algebras(seed in 0u64..10_000, relations in 1usize..=3, prime in prop::bool::ANY) {
        let field = if prime { Field::Prime(7) } else { Field::Rationals };
        let cfg = SuiteConfig { max_p: 3, max_m: 3, trials: 1, seed, bound: 8 };
        let a = random_algebra(seed, field, 2, relations, cfg.bound);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let failures: Vec<_> = check_algebra("random", &a, &cfg, &mut rng)
            .into_iter()
            .filter_map(|o| o.failure.map(|f| format!("{}: {f}", o.check)))
            .collect();
        prop_assert!(failures.is_empty(), "{}\n{}", a.presentation().to_text(), failures.join("\n"));
    }
}
