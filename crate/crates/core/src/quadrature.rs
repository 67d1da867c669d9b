//! Composite Gauss–Legendre quadrature with panel doubling.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes from Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let dp = legendre(n, x).1;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate_1d`] and [`integrate_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per panel.
    pub order: usize,
    /// Panels per axis on the first pass.
    pub initial_panels: usize,
    /// Give up once panels per axis would exceed this.
    pub max_panels: usize,
    /// Absolute change between successive doublings that counts as converged.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 16,
            initial_panels: 8,
            max_panels: 512,
            tol: 1e-8,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    /// Panels per axis in the accepted pass.
    pub panels: usize,
    /// Largest component change at the last doubling.
    pub change: f64,
}

fn add<const N: usize>(acc: &mut [f64; N], x: &[f64; N], w: f64) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += w * b;
    }
}

fn max_change<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Fixed composite rule over `panels` equal panels. Panels are evaluated in
/// parallel and summed in order, so the result does not depend on the
/// thread count.
pub fn composite_1d<const N: usize, F>(f: &F, a: f64, b: f64, panels: usize, rule: &GaussLegendre) -> [f64; N]
where
    F: Fn(f64) -> [f64; N] + Sync,
{
    let h = (b - a) / panels as f64;
    let partial: Vec<[f64; N]> = (0..panels)
        .into_par_iter()
        .map(|k| {
            let lo = a + h * k as f64;
            let mut acc = [0.0; N];
            for (x, w) in rule.mapped(lo, lo + h) {
                add(&mut acc, &f(x), w);
            }
            acc
        })
        .collect();
    partial.iter().fold([0.0; N], |mut acc, p| {
        add(&mut acc, p, 1.0);
        acc
    })
}

/// Tensor-product composite rule on `[a₀, b₀] × [a₁, b₁]`.
pub fn composite_2d<const N: usize, F>(
    f: &F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    panels: usize,
    rule: &GaussLegendre,
) -> [f64; N]
where
    F: Fn(f64, f64) -> [f64; N] + Sync,
{
    let hx = (x_range.1 - x_range.0) / panels as f64;
    let hy = (y_range.1 - y_range.0) / panels as f64;
    let partial: Vec<[f64; N]> = (0..panels * panels)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / panels, k % panels);
            let xl = x_range.0 + hx * i as f64;
            let yl = y_range.0 + hy * j as f64;
            let mut acc = [0.0; N];
            for (x, wx) in rule.mapped(xl, xl + hx) {
                for (y, wy) in rule.mapped(yl, yl + hy) {
                    add(&mut acc, &f(x, y), wx * wy);
                }
            }
            acc
        })
        .collect();
    partial.iter().fold([0.0; N], |mut acc, p| {
        add(&mut acc, p, 1.0);
        acc
    })
}

fn doubling<const N: usize>(spec: &QuadratureSpec, eval: impl Fn(usize) -> [f64; N]) -> Result<Integral<N>> {
    if spec.order == 0 || spec.initial_panels == 0 || spec.max_panels < 2 * spec.initial_panels {
        return Err(Error::Parameter(format!("invalid quadrature settings {spec:?}")));
    }
    let mut panels = spec.initial_panels;
    let mut prev = eval(panels);
    let mut change = f64::INFINITY;
    while 2 * panels <= spec.max_panels {
        panels *= 2;
        let next = eval(panels);
        change = max_change(&prev, &next);
        prev = next;
        if change < spec.tol {
            return Ok(Integral {
                value: prev,
                panels,
                change,
            });
        }
    }
    Err(Error::Accuracy(format!(
        "quadrature did not converge: change {change:e} at {panels} panels (tolerance {:e})",
        spec.tol
    )))
}

/// Integrates a vector-valued `f` over `[a, b]`, doubling the panel count
/// until no component moves by more than `spec.tol`.
pub fn integrate_1d<const N: usize, F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N] + Sync,
{
    let rule = GaussLegendre::new(spec.order);
    doubling(spec, |p| composite_1d(&f, a, b, p, &rule))
}

/// Two-dimensional counterpart of [`integrate_1d`] on a rectangle.
pub fn integrate_2d<const N: usize, F>(
    f: F,
    x_range: (f64, f64),
    y_range: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Integral<N>>
where
    F: Fn(f64, f64) -> [f64; N] + Sync,
{
    let rule = GaussLegendre::new(spec.order);
    doubling(spec, |p| composite_2d(&f, x_range, y_range, p, &rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 40] {
            let rule = GaussLegendre::new(n);
            assert_abs_diff_eq!(rule.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let rule = GaussLegendre::new(6);
        // degree 11 is the highest integrated exactly
        let got = rule.integrate(0.0, 2.0, |x| x.powi(11) + 3.0 * x.powi(4));
        assert_abs_diff_eq!(got, 2f64.powi(12) / 12.0 + 3.0 * 32.0 / 5.0, epsilon = 1e-10);
    }

    #[test]
    fn known_nodes() {
        let rule = GaussLegendre::new(3);
        assert_abs_diff_eq!(rule.nodes()[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(rule.nodes()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_integral() {
        let f = |x: f64| [(-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt(), x * x];
        let r = integrate_1d(f, -8.0, 8.0, &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(r.value[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.value[1], 2.0 * 512.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn two_dimensional() {
        let f = |x: f64, y: f64| [(-(x * x + y * y)).exp() / std::f64::consts::PI];
        let r = integrate_2d(f, (-7.0, 7.0), (-7.0, 7.0), &QuadratureSpec::default()).unwrap();
        assert_abs_diff_eq!(r.value[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let spec = QuadratureSpec {
            order: 2,
            initial_panels: 1,
            max_panels: 4,
            tol: 1e-14,
        };
        let r = integrate_1d(|x: f64| [(50.0 * x).sin().abs()], 0.0, 3.0, &spec);
        assert!(matches!(r, Err(Error::Accuracy(_))));
    }
}
