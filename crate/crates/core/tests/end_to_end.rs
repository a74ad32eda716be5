use zoo_opt::function_space::{make_hard_instance_1d, FunctionClassParams, HardSign, Quadratic};
use zoo_opt::optimizer::run;
use zoo_opt::{Error, NoiseModel};

fn unit() -> FunctionClassParams {
    FunctionClassParams::new(1.0, 1.0, 1.0).unwrap()
}

#[test]
fn noiseless_runs_are_exact() {
    for d in [1, 2, 4] {
        let f = Quadratic::benchmark(d, unit()).unwrap();
        let r = run(&f, 10_000, 0, NoiseModel::Zero).unwrap();
        assert!(r.regret <= 1e-10, "d = {d}: regret {}", r.regret);
        assert!(r.queries_used <= 10_000);
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let f = Quadratic::benchmark(2, unit()).unwrap();
    let a = run(&f, 50_000, 17, NoiseModel::StdGaussian).unwrap();
    let b = run(&f, 50_000, 17, NoiseModel::StdGaussian).unwrap();
    assert_eq!(a.regret.to_bits(), b.regret.to_bits());
    assert_eq!(a.x_t, b.x_t);
    let c = run(&f, 50_000, 18, NoiseModel::StdGaussian).unwrap();
    assert_ne!(a.x_t, c.x_t);
}

#[test]
fn hard_instance_regret_matches_rate_decade() {
    let t = 1_000_000u64;
    let trials = 10;
    let mut total = 0.0;
    for k in 0..trials {
        let which = if k % 2 == 0 { HardSign::One } else { HardSign::Two };
        let f = make_hard_instance_1d(which, t, unit()).unwrap();
        total += run(&f, t, k, NoiseModel::StdGaussian).unwrap().regret;
    }
    let mean = total / trials as f64;
    let rate = (t as f64).powf(-2.0 / 3.0);
    assert!(mean > rate / 10.0 && mean < rate * 10.0, "mean regret {mean} vs rate {rate}");
}

#[test]
fn tiny_budget_is_refused() {
    let f = Quadratic::benchmark(4, unit()).unwrap();
    assert!(matches!(run(&f, 10, 0, NoiseModel::Zero), Err(Error::TooSmallBudget(_))));
}
