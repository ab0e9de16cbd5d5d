use budgeted_shapley::catalog::WmgInstance;
use budgeted_shapley::game::{AgentId, ValueFunction};
use budgeted_shapley::oracle::{shapley_brute_subsets, shapley_monte_carlo, SamplerConfig};
use budgeted_shapley::random;
use budgeted_shapley::rational::Rational;
use budgeted_shapley::vector_dp::shapley_exact_dp;
use budgeted_shapley::GameInstance;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mc_error<V: ValueFunction>(
    v: &V,
    i: AgentId,
    exact: &Rational,
    samples: usize,
    seed: u64,
) -> Rational {
    let cfg = SamplerConfig::new(samples, seed).unwrap();
    (shapley_monte_carlo(v, i, &cfg).unwrap() - exact).abs()
}

#[test]
fn monte_carlo_error_shrinks_with_hundredfold_samples() {
    let g = GameInstance::from_pairs(&[(2, 5), (1, 2), (3, 7), (1, 1), (2, 4)], 4).unwrap();
    let w = WmgInstance::new(6, vec![4, 3, 2, 2, 1]);
    for (k, i) in [
        (0usize, AgentId::new(1).unwrap()),
        (1, AgentId::new(3).unwrap()),
    ] {
        let exact_g = shapley_exact_dp(&g, i).unwrap();
        let exact_w = shapley_brute_subsets(&w, i).unwrap();
        let mut improved = (0, 0);
        for seed in 0..20u64 {
            let s = seed + 100 * k as u64;
            if mc_error(&g, i, &exact_g, 2_000, s) < mc_error(&g, i, &exact_g, 20, s) {
                improved.0 += 1;
            }
            if mc_error(&w, i, &exact_w, 2_000, s) < mc_error(&w, i, &exact_w, 20, s) {
                improved.1 += 1;
            }
        }
        assert!(improved.0 > 10 && improved.1 > 10, "{improved:?}");
    }
}

#[test]
fn monte_carlo_is_reproducible_and_exact_on_additive_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let g = random::additive_knapsack(&mut rng, 6, 9);
        let cfg = SamplerConfig::new(300, 77).unwrap();
        for k in 0..g.len() {
            let i = AgentId::from_index(k);
            let a = shapley_monte_carlo(&g, i, &cfg).unwrap();
            assert_eq!(a, shapley_monte_carlo(&g, i, &cfg).unwrap());
            assert_eq!(a, Rational::from_integer(g.agents()[k].weight.into()));
        }
    }
}
