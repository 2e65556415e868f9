//! Scalar special functions and one-dimensional quadrature.

use std::f64::consts::PI;

pub use statrs::function::gamma::ln_gamma;

/// `π²/6 = ζ(2) = Li₂(1)`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Dilogarithm `Li₂(x) = Σ_{m≥1} x^m / m²` on `[0, 1]`.
///
/// For `x <= 1/2` the power series is summed until the tail bound
/// `x^{K+1} / ((K+1)² (1 - x))` drops below `1e-17` relative to the partial sum.
/// For `x > 1/2` the reflection `Li₂(x) = π²/6 - ln x ln(1-x) - Li₂(1-x)` maps the
/// argument back into the fast range.
pub fn dilog(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x), "dilog argument {x} outside [0,1]");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return ZETA2;
    }
    if x <= 0.5 {
        dilog_series(x)
    } else {
        let y = 1.0 - x;
        ZETA2 - x.ln() * y.ln() - dilog_series(y)
    }
}

fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = x;
    let mut k = 1.0_f64;
    loop {
        sum += power / (k * k);
        let next = power * x;
        let tail = next / ((k + 1.0) * (k + 1.0) * (1.0 - x));
        if tail <= 1e-17 * sum {
            return sum;
        }
        power = next;
        k += 1.0;
    }
}

/// Riemann zeta for real `s > 1`: direct sum of the first terms plus the
/// Euler–Maclaurin remainder (integral term, boundary term, Bernoulli corrections).
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1");
    const N: usize = 12;
    // B_{2j} / (2j)!
    const BERNOULLI: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum = 0.0;
    for k in (1..N).rev() {
        sum += (k as f64).powf(-s);
    }
    let nf = N as f64;
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s + 2j - 2) times N^{-s-2j+1}
    let mut rising = s;
    let mut power = nf.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        tail += b * rising * power;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        power /= nf * nf;
    }
    sum + tail
}

/// `ln(1 - e^{-x})` for `x > 0`, accurate for both small and large `x`.
pub fn log1mexp(x: f64) -> f64 {
    if x <= std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `ln C(a + b, b)` for reals, via log-gamma.
pub fn ln_binomial(top: f64, k: f64) -> f64 {
    ln_gamma(top + 1.0) - ln_gamma(k + 1.0) - ln_gamma(top - k + 1.0)
}

/// Neumaier-compensated running sum. `value()` returns `hi + lo`; `parts()` exposes the
/// unevaluated pair so differences of two long sums keep full precision.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    hi: f64,
    lo: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.hi + x;
        if self.hi.abs() >= x.abs() {
            self.lo += (self.hi - t) + x;
        } else {
            self.lo += (x - t) + self.hi;
        }
        self.hi = t;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.hi, self.lo)
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of a slice in index order.
pub fn stable_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
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

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

// Kronrod 15-point nodes (non-negative half) and weights; the Gauss 7-point rule is embedded.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
/// Intervals are summed in left-to-right order so the result is deterministic.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    integrate_panels(f, &[a, b], abs_tol, rel_tol, max_intervals)
}

/// [`integrate`] started from the panels between consecutive `breaks` (ascending),
/// so known kinks or scale changes sit on panel edges from the start.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Integral {
    let mut intervals = Vec::with_capacity(breaks.len().max(2));
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            intervals.push((w[0], w[1], v, e));
            evaluations += 15;
        }
    }
    if intervals.is_empty() {
        return Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
    }
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.3).sum();
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        if total <= abs_tol.max(rel_tol * value.abs()) || intervals.len() >= max_intervals {
            let mut sorted = intervals.clone();
            sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
            let value = sorted
                .iter()
                .map(|iv| iv.2)
                .collect::<CompensatedSum>()
                .value();
            return Integral {
                value,
                error: total,
                evaluations,
            };
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn panels_put_kinks_on_edges() {
        let f = |x: f64| (x - 0.3).abs() * (1.0 + x);
        // ∫_0^0.3 (0.3-x)(1+x) = 0.0495; ∫_0^0.7 y(1.3+y) dy = 1.3·0.245 + 0.343/3
        let exact = 0.0495 + 1.3 * 0.245 + 0.343 / 3.0;
        let with = integrate_panels(f, &[0.0, 0.3, 1.0], 0.0, 1e-15, 2);
        assert_eq!(with.evaluations, 30);
        assert_relative_eq!(with.value, exact, max_relative = 1e-14);
        let without = integrate(f, 0.0, 1.0, 1e-13, 0.0, 1000);
        assert!(without.evaluations > 30);
        assert_relative_eq!(without.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn dilog_known_values() {
        let ln2 = std::f64::consts::LN_2;
        assert_relative_eq!(
            dilog(0.5),
            PI * PI / 12.0 - 0.5 * ln2 * ln2,
            max_relative = 1e-15
        );
        assert_relative_eq!(dilog(1.0), ZETA2);
        assert_eq!(dilog(0.0), 0.0);
        // Li₂(x) + Li₂(1-x) = π²/6 - ln x ln(1-x)
        for &x in &[0.1, 0.3, 0.77, 0.999] {
            let lhs = dilog(x) + dilog(1.0 - x);
            let rhs = ZETA2 - x.ln() * (1.0 - x).ln();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
        }
    }

    #[test]
    fn dilog_matches_slow_series() {
        for &x in &[0.05f64, 0.45, 0.6, 0.9] {
            let slow: f64 = (1..200_000).map(|m| x.powi(m) / (m as f64).powi(2)).sum();
            assert_relative_eq!(dilog(x), slow, max_relative = 1e-13);
        }
    }

    #[test]
    fn zeta_values() {
        assert_relative_eq!(zeta(2.0), ZETA2, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(3.0), 1.202_056_903_159_594_3, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x| x.sqrt().recip(), 0.0, 1.0, 1e-10, 1e-12, 500);
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
        let r = integrate(|x| (1.0 + x).ln(), 0.0, 1.0, 1e-14, 1e-14, 100);
        assert_relative_eq!(
            r.value,
            2.0 * std::f64::consts::LN_2 - 1.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn log1mexp_regimes() {
        assert_relative_eq!(log1mexp(1e-10), (1e-10f64).ln(), max_relative = 1e-9);
        assert_relative_eq!(log1mexp(50.0), -(-50.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
