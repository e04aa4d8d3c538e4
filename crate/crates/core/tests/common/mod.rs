#![allow(dead_code)]

use homlab::rate::{BoxSpec, MIN_CUT_FRACTION};
use homlab::MultiGraph;
use rand::Rng;

/// A point with `sum y = 1/2`, `y_i >= 0.0446` and `y_i <= 2 y_{i+1}` for `i >= 1`.
pub fn feasible_point<R: Rng>(rng: &mut R) -> [f64; 7] {
    let spare = 0.5 - 7.0 * MIN_CUT_FRACTION;
    loop {
        let w: [f64; 7] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
        let s: f64 = w.iter().sum();
        let mut y = w.map(|x| MIN_CUT_FRACTION + spare * x / s);
        // put the rounding error on the largest coordinate
        let err = 0.5 - y.iter().sum::<f64>();
        let big = (0..7).max_by(|&i, &j| y[i].total_cmp(&y[j])).unwrap();
        y[big] += err;
        if (1..7).all(|i| y[i] <= 2.0 * y[(i + 1) % 7]) && homlab::rate::check_point(&y).is_ok() {
            return y;
        }
    }
}

/// A box of random width containing `y`.
pub fn box_around<R: Rng>(rng: &mut R, y: &[f64; 7]) -> BoxSpec {
    let width = rng.random_range(0.0005..0.01);
    let a = std::array::from_fn(|i| (y[i] - rng.random::<f64>() * width).max(0.0));
    let b = std::array::from_fn(|i| f64::max(a[i] + width, y[i]));
    BoxSpec::new(a, b).unwrap()
}

/// `ln` of `g(b_i) g(b') g(b_i + b' - z) / (g(z) g(b_i - z)^2 g(b' - a_i + z) g(b' - z))`
/// with `g(x) = x^x`, evaluated as a product.
pub fn factor_oracle(a_i: f64, b_i: f64, b_next: f64, z: f64) -> f64 {
    let g = |x: f64| if x <= 0.0 { 1.0 } else { x.powf(x) };
    let num = g(b_i) * g(b_next) * g(b_i + b_next - z);
    let den = g(z) * g(b_i - z) * g(b_i - z) * g(b_next - a_i + z) * g(b_next - z);
    (num / den).ln()
}

/// All maps `V -> Z_k` that are homomorphisms of `g`, by plain enumeration.
pub fn all_cycle_homs(g: &MultiGraph, k: usize) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    loop {
        let ok = g.edges().iter().all(|&(u, v)| {
            let d = (labels[u] + k - labels[v]) % k;
            d == 1 || d == k - 1
        });
        if ok {
            out.push(labels.clone());
        }
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
    }
}

/// Tightness straight from the definition: every vertex with a non-zero
/// label has a neighbour one step up.
pub fn is_tight_oracle(g: &MultiGraph, labels: &[usize], k: usize) -> bool {
    (0..g.vertex_count()).all(|v| {
        labels[v] == 0
            || g.edges().iter().any(|&(a, b)| {
                (a == v && labels[b] == (labels[v] + 1) % k) || (b == v && labels[a] == (labels[v] + 1) % k)
            })
    })
}
