use proptest::prelude::*;
use zoo_opt::estimators::{bootstrapping_est, gradient_est, hessian_est, query_cost, EstimatorKind};
use zoo_opt::function_space::{FunctionClassParams, Quadratic};
use zoo_opt::rng::direction_stream;
use zoo_opt::spectral::SymmetricMatrix;
use zoo_opt::{Error, NoiseModel, NoisyOracle, Point};

fn objective(d: usize) -> Quadratic {
    Quadratic::benchmark(d, FunctionClassParams::new(1.0, 1.0, 1.0).unwrap()).unwrap()
}

fn noise(kind: u8) -> NoiseModel {
    match kind % 3 {
        0 => NoiseModel::Zero,
        1 => NoiseModel::StdGaussian,
        _ => NoiseModel::UniformBounded { a: 1.5 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_observations(seed in any::<u64>(), kind in 0u8..3, d in 1usize..5) {
        let f = objective(d);
        let x = Point::from_element(d, 0.3);
        let mut a = NoisyOracle::new(&f, noise(kind), 50, seed).unwrap();
        let mut b = NoisyOracle::new(&f, noise(kind), 50, seed).unwrap();
        for _ in 0..50 {
            prop_assert_eq!(a.query(&x).unwrap().to_bits(), b.query(&x).unwrap().to_bits());
        }
        let exhausted = matches!(a.query(&x), Err(Error::BudgetExhausted { .. }));
        prop_assert!(exhausted);
    }

    #[test]
    fn estimators_charge_exactly_their_cost(d in 1usize..5, n in 1u64..20, seed in any::<u64>()) {
        let f = objective(d);
        let x = Point::zeros(d);
        let costs = [
            query_cost(EstimatorKind::Gradient, d, n),
            query_cost(EstimatorKind::Bootstrap, d, n),
            query_cost(EstimatorKind::Hessian, d, n),
        ];
        let total: u64 = costs.iter().sum();
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, total, seed).unwrap();
        let mut rng = direction_stream(seed);
        gradient_est(&mut o, &x, &SymmetricMatrix::scaled_identity(d, 0.1), n, &mut rng).unwrap();
        prop_assert_eq!(o.used(), costs[0]);
        bootstrapping_est(&mut o, &x, 0.1, n).unwrap();
        prop_assert_eq!(o.used(), costs[0] + costs[1]);
        hessian_est(&mut o, &x, 0.1, n, 1.0).unwrap();
        prop_assert_eq!(o.used(), total);
        prop_assert_eq!(o.remaining(), 0);
    }

    #[test]
    fn refused_call_leaves_budget_untouched(d in 1usize..5, n in 1u64..20, short in 1u64..10) {
        let f = objective(d);
        let cost = query_cost(EstimatorKind::Hessian, d, n);
        let budget = cost.saturating_sub(short);
        let mut o = NoisyOracle::new(&f, NoiseModel::StdGaussian, budget, 0).unwrap();
        let err = hessian_est(&mut o, &Point::zeros(d), 0.1, n, 1.0);
        prop_assert!(
            matches!(err, Err(Error::BudgetExhausted { .. })),
            "expected the budget error"
        );
        prop_assert_eq!(o.used(), 0);
    }
}
