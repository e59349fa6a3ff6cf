//! Derivative-free minimizers used for retarget-angle searches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// First restart seed; later restarts increment it.
pub const BASE_SEED: u64 = 7;
pub const OBJECTIVE_TOL: f64 = 1e-10;
pub const PARAMETER_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Golden-section search for a unimodal `f` on `[a, b]`.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> Minimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a).abs() > PARAMETER_TOL * 1e-2 && iterations < MAX_ITERATIONS {
        iterations += 1;
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Minimum {
        x: vec![x],
        value,
        iterations,
        converged: (b - a).abs() <= PARAMETER_TOL,
    }
}

/// Golden section on `brackets` equal subintervals of `[a, b]`, keeping the
/// lowest value (ties go to the leftmost bracket).
pub fn bracketed_minimum(f: &dyn Fn(f64) -> f64, a: f64, b: f64, brackets: usize) -> Minimum {
    let width = (b - a) / brackets.max(1) as f64;
    let mut best: Option<Minimum> = None;
    let mut iterations = 0;
    for k in 0..brackets.max(1) {
        let lo = a + k as f64 * width;
        let m = golden_section(f, lo, lo + width);
        iterations += m.iterations;
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let mut best = best.expect("at least one bracket");
    best.iterations = iterations;
    best
}

/// Nelder–Mead simplex search from `x0` with initial edge `step`.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= OBJECTIVE_TOL && size <= PARAMETER_TOL {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let p = along(-0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(0.5);
                let v = f(&p);
                (p, v)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("non-empty simplex");
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// Nelder–Mead from `restarts` starting points drawn uniformly in `bounds`,
/// seeded `BASE_SEED`, `BASE_SEED + 1`, ... The lowest value wins; ties go
/// to the lowest seed.
pub fn nelder_mead_restarts(f: &dyn Fn(&[f64]) -> f64, bounds: &[(f64, f64)], restarts: usize) -> Minimum {
    let mut best: Option<Minimum> = None;
    for k in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + k as u64);
        let x0: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
        let step = bounds
            .iter()
            .map(|&(lo, hi)| (hi - lo) / 10.0)
            .fold(f64::INFINITY, f64::min);
        let m = nelder_mead(f, &x0, step);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    best.expect("at least one restart")
}
