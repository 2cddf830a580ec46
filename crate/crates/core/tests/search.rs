use pegasus_core::rng;
use pegasus_core::search::{gradient_ascent, hill_climb, numerical_gradient};

/// `f(x) = -(x - c)' A (x - c) / 2` with `A = L L' + I`.
struct Quadratic {
    a: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl Quadratic {
    fn random(n: usize, seed: u64) -> Self {
        let mut gen = rng::stream(seed, 0);
        let l: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng::uniform_in(&mut gen, -1.0, 1.0)).collect()).collect();
        let a = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| l[i][k] * l[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let c = (0..n).map(|_| rng::uniform_in(&mut gen, -3.0, 3.0)).collect();
        Self { a, c }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.c).map(|(x, c)| x - c).collect();
        let ad = self.matvec(&d);
        -0.5 * d.iter().zip(&ad).map(|(u, v)| u * v).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.c).map(|(x, c)| x - c).collect();
        self.matvec(&d).into_iter().map(|v| -v).collect()
    }

    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn max_eigen_bound(&self) -> f64 {
        self.a.iter().map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn numerical_gradient_matches_analytic() {
    for seed in 0..20 {
        let n = 2 + (seed as usize % 5);
        let f = Quadratic::random(n, seed);
        let mut gen = rng::stream(seed, 1);
        let x: Vec<f64> = (0..n).map(|_| rng::uniform_in(&mut gen, -5.0, 5.0)).collect();
        let num = numerical_gradient(|t| f.value(t), &x, 1e-4).unwrap();
        let exact = f.gradient(&x);
        let err: Vec<f64> = num.iter().zip(&exact).map(|(a, b)| a - b).collect();
        assert!(norm(&err) <= 1e-5 * norm(&exact), "seed {seed}: {num:?} vs {exact:?}");
    }
}

#[test]
fn gradient_ascent_reaches_optimum_with_clamped_steps() {
    for seed in 0..10 {
        let n = 2 + (seed as usize % 4);
        let f = Quadratic::random(n, 100 + seed);
        let step = 1.0 / f.max_eigen_bound();
        let clamp = 0.5;
        let report = gradient_ascent(|t| f.value(t), &vec![0.0; n], step, clamp, 5000, 1e-5).unwrap();
        let best = &report.best_policy;
        let dist = norm(&best.iter().zip(&f.c).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(dist < 1e-3, "seed {seed}: {dist}");
        for w in report.path.windows(2) {
            let len = norm(&w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(len <= clamp * (1.0 + 1e-12), "step {len}");
        }
    }
}

#[test]
fn hill_climb_never_accepts_a_worse_point() {
    let f = Quadratic::random(3, 7);
    let report = hill_climb(|t| f.value(t), &[0.0; 3], 0.3, 500, 11).unwrap();
    let values: Vec<f64> = report.path.iter().map(|t| f.value(t)).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(report.best_estimate, *values.last().unwrap());
    assert!(report.best_estimate > f.value(&[0.0; 3]));
}
