//! Gauss-Hermite quadrature for integrals against the weight e^{-||t||^2}
//! over the plane.

/// Tensor-product Gauss-Hermite rule on R^2 for the weight e^{-||t||^2}.
///
/// With n points per dimension the rule is exact for integrands that are
/// polynomials of per-dimension degree < 2n-1, and the weights sum to pi
/// (the total Gaussian mass over the plane).
#[derive(Debug, Clone)]
pub struct Hermite2dRule {
    order: usize,
    nodes: Vec<(f64, f64)>,
    weights: Vec<f64>,
}

/// Symmetric tridiagonal QL with implicit shifts, tracking only the first
/// row of the eigenvector matrix (all that Gaussian weights need).
/// `d` holds the diagonal (eigenvalues on exit), `e` the subdiagonal in
/// e[0..n-1], `z` starts as the first unit vector.
fn tql_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Nodes and weights of the n-point Gauss-Hermite rule (weight e^{-x^2}),
/// via Golub-Welsch on the Jacobi matrix (robust at any order). Nodes are
/// returned ascending and exactly symmetrized about the origin.
fn gauss_hermite_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut d = vec![0.0f64; n];
    let mut e: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
    e.push(0.0);
    let mut z = vec![0.0f64; n];
    z[0] = 1.0;
    tql_first_row(&mut d, &mut e, &mut z);

    let mu0 = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = d
        .iter()
        .zip(z.iter())
        .map(|(&x, &zi)| (x, mu0 * zi * zi))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // enforce exact +- symmetry
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for i in 0..n / 2 {
        let xm = 0.5 * (pairs[n - 1 - i].0 - pairs[i].0);
        let wm = 0.5 * (pairs[n - 1 - i].1 + pairs[i].1);
        x[i] = -xm;
        x[n - 1 - i] = xm;
        w[i] = wm;
        w[n - 1 - i] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
        w[n / 2] = pairs[n / 2].1;
    }
    (x, w)
}

impl Hermite2dRule {
    pub fn new(order: usize) -> Self {
        let (x, w) = gauss_hermite_1d(order);
        let mut nodes = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                nodes.push((x[i], x[j]));
                weights.push(w[i] * w[j]);
            }
        }
        Self {
            order,
            nodes,
            weights,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Approximates the plane integral of e^{-||t||^2} g(t) with the given rule.
///
/// Accumulation is compensated (Neumaier), so the result is deterministic
/// and robust to the node ordering.
pub fn integrate_hermite2d<F: Fn(f64, f64) -> f64>(g: F, rule: &Hermite2dRule) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (&(t1, t2), &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let term = w * g(t1, t2);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    sum + comp
}
