//! Analytic gradients and Hessians agree with central finite differences.

use rand::Rng;
use zoo_opt::function_space::{
    make_cubic_perturbed, make_hard_instance_product, make_quadratic, FunctionClassParams, HardSign, Quadratic,
};
use zoo_opt::rng::fuzz_stream;
use zoo_opt::spectral::{random_orthogonal, with_spectrum};
use zoo_opt::{Objective, Point};

const PROBES: usize = 100;

fn fd_gradient(f: &dyn Objective, x: &Point, h: f64) -> Point {
    Point::from_fn(f.dim(), |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (f.value(&xp) - f.value(&xm)) / (2.0 * h)
    })
}

fn assert_close(a: f64, b: f64, scale: f64, what: &str) {
    assert!((a - b).abs() <= 1e-6 * (scale + b.abs()), "{what}: analytic {b}, numeric {a}");
}

fn check(f: &dyn Objective, radius: f64, h: f64, seed: u64) {
    let mut rng = fuzz_stream(seed);
    let d = f.dim();
    for _ in 0..PROBES {
        let x = Point::from_fn(d, |_, _| rng.random_range(-radius..radius));
        let g = f.gradient(&x);
        let fd = fd_gradient(f, &x, h);
        let gscale = g.amax().max(1e-3);
        for i in 0..d {
            assert_close(fd[i], g[i], gscale, "gradient");
        }
        let hess = f.hessian(&x);
        let hscale = hess.as_matrix().amax();
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let col = (f.gradient(&xp) - f.gradient(&xm)) / (2.0 * h);
            for i in 0..d {
                assert_close(col[i], hess.get(i, j), hscale, "hessian");
            }
        }
    }
}

fn unit() -> FunctionClassParams {
    FunctionClassParams::new(1.0, 1.0, 2.0).unwrap()
}

#[test]
fn quadratic_derivatives() {
    let mut rng = fuzz_stream(1);
    let a = with_spectrum(&random_orthogonal(3, &mut rng), &[1.0, 2.5, 7.0]);
    let f = make_quadratic(a, Point::from_vec(vec![0.5, -1.0, 0.25]), unit()).unwrap();
    check(&f, 2.0, 1e-4, 10);
    check(&Quadratic::benchmark(4, unit()).unwrap(), 2.0, 1e-4, 11);
}

#[test]
fn cubic_derivatives() {
    for d in [1, 2, 4] {
        check(&make_cubic_perturbed(0.7, 1.3, d).unwrap(), 1.5, 1e-4, 20 + d as u64);
    }
}

#[test]
fn hard_instance_derivatives() {
    let f = make_hard_instance_product(vec![HardSign::One, HardSign::Two, HardSign::One], 1_000_000, unit()).unwrap();
    let x0 = f.hard_params().x0;
    // Probe the region where the bump lives, with a step well inside its scale.
    check(&f, 4.0 * std::f64::consts::PI * x0, 1e-4 * x0, 30);
    check(&f, 2.0, 1e-5, 31);
}
