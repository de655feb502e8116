use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PolySpec;

const SAMPLES: usize = 1_000_000;
const SEED: u64 = 0x5eed;
const POLISH_STARTS: usize = 16;

/// Upper bound on `min f` over its box: the best value on a uniform tensor
/// grid with `resolution` points per side (`n ≤ 4`) or on 10⁶ seeded uniform
/// samples (`n > 4`), refined by projected gradient descent from the best
/// few candidates. Every value returned is attained at a point of the box.
pub fn grid_lower_bound_oracle(f: &PolySpec, resolution: usize) -> f64 {
    let n = f.n();
    let dom = f.domain();
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(POLISH_STARTS + 1);
    let mut offer = |value: f64, t: &[f64]| {
        if best.len() < POLISH_STARTS || value < best[best.len() - 1].0 {
            let at = best.partition_point(|(v, _)| *v <= value);
            best.insert(at, (value, t.to_vec()));
            best.truncate(POLISH_STARTS);
        }
    };

    if n <= 4 {
        let res = resolution.max(2);
        let total = res.pow(n as u32);
        let mut t = vec![0.0; n];
        for mut idx in 0..total {
            for j in (0..n).rev() {
                let i = idx % res;
                idx /= res;
                t[j] = dom.lower[j] + (dom.upper[j] - dom.lower[j]) * i as f64 / (res - 1) as f64;
            }
            offer(f.eval(&t), &t);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut t = vec![0.0; n];
        for _ in 0..SAMPLES {
            for j in 0..n {
                t[j] = rng.random_range(dom.lower[j]..=dom.upper[j]);
            }
            offer(f.eval(&t), &t);
        }
    }

    best.iter()
        .map(|(v, t)| polish(f, t.clone()).min(*v))
        .fold(f64::INFINITY, f64::min)
}

fn project(f: &PolySpec, t: &mut [f64]) {
    let dom = f.domain();
    for (j, x) in t.iter_mut().enumerate() {
        *x = x.clamp(dom.lower[j], dom.upper[j]);
    }
}

/// Projected gradient descent with central-difference gradients and
/// backtracking; returns the best value reached.
fn polish(f: &PolySpec, mut t: Vec<f64>) -> f64 {
    let n = t.len();
    let dom = f.domain();
    let width: Vec<f64> = (0..n).map(|j| dom.upper[j] - dom.lower[j]).collect();
    let mut value = f.eval(&t);
    let mut step = 0.1;
    for _ in 0..2000 {
        let grad: Vec<f64> = (0..n)
            .map(|j| {
                let h = 1e-6 * width[j];
                let mut p = t.clone();
                let mut m = t.clone();
                p[j] += h;
                m[j] -= h;
                project(f, &mut p);
                project(f, &mut m);
                if p[j] == m[j] {
                    0.0
                } else {
                    (f.eval(&p) - f.eval(&m)) / (p[j] - m[j])
                }
            })
            .collect();
        let mut improved = false;
        while step > 1e-14 {
            let mut trial: Vec<f64> = t.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            project(f, &mut trial);
            let v = f.eval(&trial);
            if v < value {
                let gain = value - v;
                t = trial;
                value = v;
                improved = gain > 1e-16 * (1.0 + value.abs());
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    value
}
