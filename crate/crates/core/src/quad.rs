//! Quadrature against the kernel, grid integration and fractional
//! differences for residual checks.
//!
//! `K(t,·)` is continuous but carries `(x − s)^{α−1}` terms that end at
//! `s = η` and `s = t`. The integration range is split at those points and
//! every smooth piece `[a, c]` is mapped by `s = c − (c − a)(1 − w)^4`
//! before composite Gauss–Legendre is applied in `w`, which flattens the
//! power behaviour at the right end of each piece.

use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::grid::GridFunction;
use crate::kernel::{pow0, KernelParams};

const GRADING: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// extra break points in `(0,1)`, strictly increasing
    pub split_points: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule { panels: 32, nodes_per_panel: 8, split_points: Vec::new() }
    }
}

impl QuadratureRule {
    pub fn new(panels: usize, nodes_per_panel: usize, split_points: Vec<f64>) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one panel and one node".into()));
        }
        if split_points.iter().any(|&x| !(x > 0.0 && x < 1.0)) || split_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("split points must be strictly increasing in (0,1)".into()));
        }
        Ok(QuadratureRule { panels, nodes_per_panel, split_points })
    }

    pub fn with_panels(panels: usize) -> Self {
        QuadratureRule { panels, ..Default::default() }
    }

    fn reference(&self) -> (Vec<f64>, Vec<f64>) {
        gauss_legendre_unit(self.nodes_per_panel)
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                dp = legendre(n, z).1;
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Nodes and weights of the graded composite rule on `[a, c]`, appended.
fn push_piece(a: f64, c: f64, rule: &QuadratureRule, gl: &(Vec<f64>, Vec<f64>), s: &mut Vec<f64>, w: &mut Vec<f64>) {
    let len = c - a;
    let width = 1.0 / rule.panels as f64;
    for i in 0..rule.panels {
        let w0 = i as f64 * width;
        for (x, wt) in gl.0.iter().zip(&gl.1) {
            let r = 1.0 - (w0 + width * x);
            s.push(c - len * r.powi(GRADING));
            w.push(width * wt * len * GRADING as f64 * r.powi(GRADING - 1));
        }
    }
}

fn breakpoints(lo: f64, hi: f64, extra: &[f64], rule: &QuadratureRule) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().chain(rule.split_points.iter().copied()).filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Quadrature nodes on `[lo, hi]` split at `extra` and the rule's split points.
pub fn nodes_on(lo: f64, hi: f64, extra: &[f64], rule: &QuadratureRule) -> (Vec<f64>, Vec<f64>) {
    let gl = rule.reference();
    let pts = breakpoints(lo, hi, extra, rule);
    let cap = (pts.len() - 1) * rule.panels * rule.nodes_per_panel;
    let (mut s, mut w) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    for pair in pts.windows(2) {
        push_piece(pair[0], pair[1], rule, &gl, &mut s, &mut w);
    }
    (s, w)
}

/// `s ↦ K(t, s)` folded into the weights of a rule over `[0, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl KernelRow {
    pub fn new(t: f64, upper: f64, params: &KernelParams, rule: &QuadratureRule) -> Self {
        let (nodes, mut weights) = nodes_on(0.0, upper, &[params.eta, t], rule);
        for (w, &s) in weights.iter_mut().zip(&nodes) {
            *w *= params.kernel(t, s);
        }
        KernelRow { nodes, weights }
    }

    pub fn integrate<E>(&self, mut g: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        let mut acc = 0.0;
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * g(s)?;
        }
        Ok(acc)
    }
}

/// `∫₀¹ K(t,s) g(s) ds`
pub fn integrate_against_kernel<E>(
    t: f64,
    g: impl FnMut(f64) -> Result<f64, E>,
    params: &KernelParams,
    rule: &QuadratureRule,
) -> Result<f64, E> {
    KernelRow::new(t, 1.0, params, rule).integrate(g)
}

/// `∫_lo^hi g(s) ds` with the graded composite rule, split at `extra`.
pub fn integrate_on<E>(
    lo: f64,
    hi: f64,
    extra: &[f64],
    mut g: impl FnMut(f64) -> Result<f64, E>,
    rule: &QuadratureRule,
) -> Result<f64, E> {
    let (s, w) = nodes_on(lo, hi, extra, rule);
    let mut acc = 0.0;
    for (x, wt) in s.into_iter().zip(w) {
        acc += wt * g(x)?;
    }
    Ok(acc)
}

/// Composite Simpson on an odd number of uniformly spaced samples over `[0,1]`.
pub fn simpson(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::GridTooSmall { n, min: 3 });
    }
    let h = 1.0 / (n - 1) as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    Ok(h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even))
}

pub fn integrate_grid(u: &GridFunction) -> f64 {
    simpson(u.values()).expect("grid functions have an odd node count >= 3")
}

/// Second-order one-sided approximation of `u'(0)`.
pub fn derivative_at_zero(u: &GridFunction) -> f64 {
    (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * u.step())
}

/// L1 scheme for the Caputo derivative of order `mu ∈ (0,1]`.
pub fn caputo_low(u: &GridFunction, mu: f64) -> Result<GridFunction> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!("L1 order {mu} not in (0, 1]")));
    }
    let n = u.len();
    if n < 3 {
        return Err(Error::GridTooSmall { n, min: 3 });
    }
    let h = u.step();
    let q = 1.0 - mu;
    // b_m = (m+1)^{1−μ} − m^{1−μ}; μ = 1 leaves only b_0 = 1 (backward difference)
    let b: Vec<f64> = (0..n).map(|m| pow0((m + 1) as f64, q) - pow0(m as f64, q)).collect();
    let scale = h.powf(-mu) / gamma(2.0 - mu);
    let du: Vec<f64> = u.values().windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for j in 0..k {
            acc += du[j] * b[k - 1 - j];
        }
        *slot = scale * acc;
    }
    GridFunction::new(out)
}

fn second_differences(u: &GridFunction) -> Vec<f64> {
    let v = u.values();
    let n = v.len();
    let h2 = u.step() * u.step();
    let mut d = vec![0.0; n];
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    for k in 1..n - 1 {
        d[k] = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2;
    }
    d
}

/// Caputo derivative of order `alpha ∈ (1,2]`: second differences integrated
/// against the weakly singular weight, `O(h^{3−α})` for smooth `u`.
/// `alpha = 2` returns `u''` itself.
pub fn caputo_high(u: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::InvalidArgument(format!("order {alpha} not in (1, 2]")));
    }
    let n = u.len();
    if n < 5 {
        return Err(Error::GridTooSmall { n, min: 5 });
    }
    let upp = second_differences(u);
    if alpha == 2.0 {
        return GridFunction::new(upp);
    }
    let q = 2.0 - alpha;
    let h = u.step();
    // ∫_{t_j}^{t_{j+1}} (t_k − s)^{1−α} ds / Γ(2−α) = h^{2−α} c_{k−1−j} / Γ(3−α)
    let c: Vec<f64> = (0..n).map(|m| pow0((m + 1) as f64, q) - pow0(m as f64, q)).collect();
    let scale = h.powf(q) / gamma(3.0 - alpha);
    // cell value of u'': mean of the two end values
    let cell: Vec<f64> = upp.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for j in 0..k {
            acc += cell[j] * c[k - 1 - j];
        }
        *slot = scale * acc;
    }
    GridFunction::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok(x: f64) -> Result<f64, Infallible> {
        Ok(x)
    }

    // ∫₀¹ K(t,s) ds by hand: β + (η^α − t^α)/Γ(α+1)
    fn kernel_integral_oracle(p: &KernelParams, t: f64) -> f64 {
        p.beta + (p.eta.powf(p.alpha) - t.powf(p.alpha)) / gamma(p.alpha + 1.0)
    }

    #[test]
    fn gauss_legendre_is_exact_for_high_degree_polynomials() {
        let (x, w) = gauss_legendre_unit(8);
        for deg in 0..16 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((got - 1.0 / (deg + 1) as f64).abs() < 1e-15, "degree {deg}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn node_count_matches_pieces() {
        let p = KernelParams::new(1.5, 0.5, 1.0);
        let rule = QuadratureRule::new(4, 3, vec![0.9]).unwrap();
        let row = KernelRow::new(0.25, 1.0, &p, &rule);
        // pieces [0,.25] [.25,.5] [.5,.9] [.9,1]
        assert_eq!(row.nodes.len(), 4 * 4 * 3);
        assert!(row.nodes.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn rule_validation() {
        assert!(QuadratureRule::new(0, 8, vec![]).is_err());
        assert!(QuadratureRule::new(4, 8, vec![0.5, 0.3]).is_err());
        assert!(QuadratureRule::new(4, 8, vec![1.0]).is_err());
    }

    #[test]
    fn kernel_integral_of_one_matches_closed_form() {
        let rule = QuadratureRule::default();
        for p in [KernelParams::new(1.8, 0.6, 0.515_845_120_520_963_2), KernelParams::new(1.5, 0.5, 0.1)] {
            for t in [0.0, 0.3, p.eta, 0.9, 1.0, 0.123_456] {
                let got = integrate_against_kernel(t, |_| ok(1.0), &p, &rule).unwrap();
                let want = kernel_integral_oracle(&p, t);
                assert!((got - want).abs() <= 1e-10, "t = {t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_integrand_gives_exact_zero() {
        let p = KernelParams::new(1.5, 0.5, 0.1);
        assert_eq!(integrate_against_kernel(0.4, |_| ok(0.0), &p, &QuadratureRule::default()).unwrap(), 0.0);
    }

    #[test]
    fn doubling_panels_converges_quickly() {
        let p = KernelParams::new(1.3, 0.45, 0.2);
        let t = 0.7;
        let want = kernel_integral_oracle(&p, t);
        let mut prev = f64::INFINITY;
        for panels in [1, 2, 4, 8, 16, 32] {
            let rule = QuadratureRule { panels, nodes_per_panel: 2, split_points: vec![] };
            let err = (integrate_against_kernel(t, |_| ok(1.0), &p, &rule).unwrap() - want).abs();
            assert!(err <= prev / 4.0 || err <= 1e-12, "panels {panels}: {err} after {prev}");
            prev = err;
        }
    }

    #[test]
    fn linear_in_the_integrand() {
        let p = KernelParams::new(1.7, 0.35, 0.3);
        let rule = QuadratureRule::default();
        let g1 = |s: f64| ok((3.0 * s).sin());
        let g2 = |s: f64| ok(s * s - 0.2);
        let a = -2.5;
        let lhs = integrate_against_kernel(0.6, |s| ok(a * g1(s)? + g2(s)?), &p, &rule).unwrap();
        let rhs = a * integrate_against_kernel(0.6, g1, &p, &rule).unwrap()
            + integrate_against_kernel(0.6, g2, &p, &rule).unwrap();
        assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs.abs()));
    }

    #[test]
    fn simpson_examples() {
        let c = GridFunction::constant(7, 3.5).unwrap();
        assert!((integrate_grid(&c) - 3.5).abs() < 1e-15);
        let sq = GridFunction::from_fn(1025, |t| t * t).unwrap();
        assert!((integrate_grid(&sq) - 1.0 / 3.0).abs() <= 1e-12);
        let r = GridFunction::from_fn(1025, |t| t.powf(1.5)).unwrap();
        assert!((integrate_grid(&r) - 0.4).abs() <= 1e-6);
        assert!(matches!(simpson(&[1.0, 2.0]), Err(Error::GridTooSmall { .. })));
        assert!(matches!(simpson(&[1.0, 2.0, 3.0, 4.0]), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn caputo_of_constants_vanishes() {
        let u = GridFunction::constant(65, 4.2).unwrap();
        assert!(caputo_low(&u, 0.4).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(caputo_high(&u, 1.6).unwrap().values().iter().all(|&v| v.abs() < 1e-9));
    }

    #[test]
    fn l1_power_rule_for_linear_function() {
        let n = 257;
        let u = GridFunction::from_fn(n, |t| t).unwrap();
        let d = caputo_low(&u, 0.5).unwrap();
        let h: f64 = 1.0 / (n - 1) as f64;
        for (k, t) in u.nodes().enumerate() {
            let want = t.sqrt() / gamma(1.5);
            assert!((d[k] - want).abs() <= 10.0 * h.powf(1.5), "t = {t}");
        }
    }

    #[test]
    fn l1_quadratic_at_one() {
        let u = GridFunction::from_fn(1025, |t| t * t).unwrap();
        let d = caputo_low(&u, 0.5).unwrap();
        assert!((d[1024] - 1.504_505_556_127_350_1).abs() <= 5e-3);
    }

    #[test]
    fn l1_order_one_is_backward_difference() {
        let u = GridFunction::from_fn(9, |t| t * t * t).unwrap();
        let d = caputo_low(&u, 1.0).unwrap();
        for k in 1..9 {
            assert!((d[k] - (u[k] - u[k - 1]) / u.step()).abs() < 1e-12);
        }
    }

    #[test]
    fn high_order_examples() {
        let lin = GridFunction::from_fn(129, |t| 3.0 * t - 1.0).unwrap();
        let d = caputo_high(&lin, 1.4).unwrap();
        assert!(d.values()[1..128].iter().all(|v| v.abs() < 1e-8));

        let sq = GridFunction::from_fn(1025, |t| t * t).unwrap();
        let d = caputo_high(&sq, 1.5).unwrap();
        assert!((d[1024] - 2.256_758_334_191_025).abs() <= 5e-2);

        let cube = GridFunction::from_fn(1025, |t| t * t * t).unwrap();
        let d = caputo_high(&cube, 1.8).unwrap();
        assert!((d[1024] - 5.445_622_105_291_681).abs() <= 5e-2);
    }

    #[test]
    fn order_two_is_second_derivative() {
        let u = GridFunction::from_fn(33, |t| t * t * t).unwrap();
        let d = caputo_high(&u, 2.0).unwrap();
        for k in 1..32 {
            assert!((d[k] - 6.0 * u.node(k)).abs() < 1e-9);
        }
    }

    #[test]
    fn fractional_differences_are_linear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a: f64 = rng.gen_range(-3.0..3.0);
            let u = GridFunction::new((0..65).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let v = GridFunction::new((0..65).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let w = u.combine(a, &v, 1.0);
            for (op, order) in [(caputo_low as fn(&GridFunction, f64) -> Result<GridFunction>, 0.3), (caputo_high, 1.7)]
            {
                let lhs = op(&w, order).unwrap();
                let rhs = op(&u, order).unwrap().combine(a, &op(&v, order).unwrap(), 1.0);
                let scale = 1.0 + lhs.sup_norm();
                assert!(lhs.distance(&rhs) <= 1e-11 * scale);
            }
        }
    }

    #[test]
    fn grid_size_errors() {
        let u = GridFunction::constant(3, 1.0).unwrap();
        assert!(matches!(caputo_high(&u, 1.5), Err(Error::GridTooSmall { n: 3, min: 5 })));
        assert!(caputo_low(&u, 1.5).is_err());
    }
}
