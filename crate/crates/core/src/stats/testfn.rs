//! Test functions `ψ` and the operator `D` with `(i/2π)∂∂̄ψ ∧ ω^{n-1} = Dψ · μ`.
//!
//! For `H_{jk} = ∂²ψ/∂z_j∂z̄_k`,
//! `Dψ(z) = (1-|z|²)/n · Σ_{j,k} (δ_{jk} - z_j z̄_k) H_{jk}(z)`, which is `(1/n) tr(Ω⁻¹H)`
//! for the matrix `Ω` of `ω`. For a radial `ψ = g(|z|²)` this is
//! `Dψ = (1-t)/n · [(n-t) g'(t) + t(1-t) g''(t)]`.

use crate::geometry::{pseudo_distance_sq, Automorphism, Point};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt::Debug;

/// A real test function on `𝔹ₙ`, compactly supported in `|z| < support_radius`.
pub trait TestFunction: Send + Sync + Debug {
    fn n(&self) -> usize;
    fn support_radius(&self) -> f64;
    fn value(&self, z: &Point) -> f64;
    /// Short label used in outputs.
    fn family(&self) -> String;

    /// `H_{jk} = ∂²ψ/∂z_j∂z̄_k`; finite differences unless overridden.
    fn complex_hessian(&self, z: &Point) -> DMatrix<Complex64> {
        finite_difference_hessian(|p| self.value(p), z)
    }

    /// `(g, g', g'')` at `t` when `ψ(z) = g(|z|²)`.
    fn radial_profile(&self, _t: f64) -> Option<[f64; 3]> {
        None
    }

    /// Values of `t = |z|²` where a radial profile changes formula.
    fn radial_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Complex Hessian from central differences of the real Hessian in
/// `(x_1, y_1, …, x_n, y_n)`.
pub fn finite_difference_hessian<F: Fn(&Point) -> f64>(f: F, z: &Point) -> DMatrix<Complex64> {
    let n = z.dim();
    let h = 1e-4;
    let base: Vec<f64> = z.coords().iter().flat_map(|c| [c.re, c.im]).collect();
    let eval = |v: &[f64]| {
        let coords = v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        f(&Point::new(coords).expect("difference stencil left the ball"))
    };
    let d = 2 * n;
    let f0 = eval(&base);
    let mut real = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let shifted = |sa: f64, sb: f64| {
                let mut v = base.clone();
                v[a] += sa;
                v[b] += sb;
                eval(&v)
            };
            real[a][b] = if a == b {
                (shifted(h, 0.0) - 2.0 * f0 + shifted(-h, 0.0)) / (h * h)
            } else {
                (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h)
            };
            real[b][a] = real[a][b];
        }
    }
    DMatrix::from_fn(n, n, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        Complex64::new(
            0.25 * (real[xj][xk] + real[yj][yk]),
            0.25 * (real[xj][yk] - real[yj][xk]),
        )
    })
}

/// `Dψ(z)`.
pub fn d_operator(psi: &dyn TestFunction, z: &Point) -> f64 {
    let t = z.norm_sq();
    if let Some(g) = psi.radial_profile(t) {
        return radial_d(psi.n(), t, g);
    }
    let h = psi.complex_hessian(z);
    let c = z.coords();
    let n = z.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let delta = if j == k { 1.0 } else { 0.0 };
            acc += (Complex64::new(delta, 0.0) - c[j] * c[k].conj()) * h[(j, k)];
        }
    }
    (1.0 - t) / n as f64 * acc.re
}

/// `Dψ` for `ψ = g(|z|²)` from `[g, g', g'']` at `t`.
pub fn radial_d(n: usize, t: f64, g: [f64; 3]) -> f64 {
    let nf = n as f64;
    (1.0 - t) / nf * ((nf - t) * g[1] + t * (1.0 - t) * g[2])
}

/// `(1-t/s²)^k` on `t < s²`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub n: usize,
    pub s: f64,
    pub k: u32,
}

impl RadialBump {
    pub fn new(n: usize, s: f64, k: u32) -> Self {
        assert!(
            s > 0.0 && s < 1.0 && k >= 3,
            "bump needs 0 < s < 1 and k ≥ 3"
        );
        RadialBump { n, s, k }
    }
}

impl TestFunction for RadialBump {
    fn n(&self) -> usize {
        self.n
    }
    fn support_radius(&self) -> f64 {
        self.s
    }
    fn value(&self, z: &Point) -> f64 {
        self.radial_profile(z.norm_sq()).unwrap()[0]
    }
    fn family(&self) -> String {
        format!("bump(s={},k={})", self.s, self.k)
    }
    fn complex_hessian(&self, z: &Point) -> DMatrix<Complex64> {
        radial_hessian(z, self.radial_profile(z.norm_sq()).unwrap())
    }
    fn radial_profile(&self, t: f64) -> Option<[f64; 3]> {
        let s2 = self.s * self.s;
        if t >= s2 {
            return Some([0.0; 3]);
        }
        let u = 1.0 - t / s2;
        let k = self.k as i32;
        let kf = k as f64;
        Some([
            u.powi(k),
            -kf / s2 * u.powi(k - 1),
            kf * (kf - 1.0) / (s2 * s2) * u.powi(k - 2),
        ])
    }
    fn radial_breaks(&self) -> Vec<f64> {
        vec![self.s * self.s]
    }
}

/// `H_{jk} = g' δ_{jk} + g'' z̄_j z_k` for `ψ = g(|z|²)`.
pub fn radial_hessian(z: &Point, g: [f64; 3]) -> DMatrix<Complex64> {
    let c = z.coords();
    DMatrix::from_fn(z.dim(), z.dim(), |j, k| {
        let d = if j == k { g[1] } else { 0.0 };
        Complex64::new(d, 0.0) + c[j].conj() * c[k] * g[2]
    })
}

/// A `C²` smoothing of the indicator of `B(0, s)`: equal to 1 for `|z| ≤ s-η`, 0 for
/// `|z| ≥ s+η`, and `1 - S((t-a)/(b-a))` in between, where `t = |z|²`,
/// `[a, b] = [(s-η)², (s+η)²]` and `S(x) = 6x⁵ - 15x⁴ + 10x³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifiedIndicator {
    pub n: usize,
    pub s: f64,
    pub eta: f64,
}

impl MollifiedIndicator {
    pub fn new(n: usize, s: f64, eta: f64) -> Self {
        assert!(
            eta > 0.0 && s - eta >= 0.0 && s + eta < 1.0,
            "transition must lie inside the ball"
        );
        MollifiedIndicator { n, s, eta }
    }

    /// `(ψ₁, ψ₂)` with `ψ₁ ≤ χ_{B(0,s)} ≤ ψ₂`, each with a transition of half-width `η`.
    pub fn sandwich(n: usize, s: f64, eta: f64) -> (Self, Self) {
        (Self::new(n, s - eta, eta), Self::new(n, s + eta, eta))
    }

    fn window(&self) -> (f64, f64) {
        ((self.s - self.eta).powi(2), (self.s + self.eta).powi(2))
    }
}

impl TestFunction for MollifiedIndicator {
    fn n(&self) -> usize {
        self.n
    }
    fn support_radius(&self) -> f64 {
        self.s + self.eta
    }
    fn value(&self, z: &Point) -> f64 {
        self.radial_profile(z.norm_sq()).unwrap()[0]
    }
    fn family(&self) -> String {
        format!("mollified(s={},eta={})", self.s, self.eta)
    }
    fn complex_hessian(&self, z: &Point) -> DMatrix<Complex64> {
        radial_hessian(z, self.radial_profile(z.norm_sq()).unwrap())
    }
    fn radial_profile(&self, t: f64) -> Option<[f64; 3]> {
        let (a, b) = self.window();
        if t <= a {
            return Some([1.0, 0.0, 0.0]);
        }
        if t >= b {
            return Some([0.0; 3]);
        }
        let w = b - a;
        let x = (t - a) / w;
        let s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
        let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x);
        let dds = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
        Some([1.0 - s, -ds / w, -dds / (w * w)])
    }
    fn radial_breaks(&self) -> Vec<f64> {
        let (a, b) = self.window();
        vec![a, b]
    }
}

/// `(1 - ϱ(z,w)²/s²)^k` on the pseudo-hyperbolic ball `E(w, s)`: a bump centred away from
/// the origin. Its Hessian comes from finite differences.
#[derive(Debug, Clone)]
pub struct PseudoBump {
    pub center: Point,
    pub s: f64,
    pub k: u32,
}

impl PseudoBump {
    pub fn new(center: Point, s: f64, k: u32) -> Self {
        assert!(s > 0.0 && s < 1.0 && k >= 3);
        PseudoBump { center, s, k }
    }

    /// The same bump pulled back to the origin: `ψ = B ∘ φ_w` with `B` radial.
    pub fn centred(&self) -> RadialBump {
        RadialBump::new(self.center.dim(), self.s, self.k)
    }

    pub fn automorphism(&self) -> Automorphism {
        Automorphism::new(self.center.clone())
    }
}

impl TestFunction for PseudoBump {
    fn n(&self) -> usize {
        self.center.dim()
    }
    fn support_radius(&self) -> f64 {
        let w = self.center.norm();
        (w + self.s) / (1.0 + w * self.s)
    }
    fn value(&self, z: &Point) -> f64 {
        let r2 = pseudo_distance_sq(z, &self.center);
        let s2 = self.s * self.s;
        if r2 >= s2 {
            0.0
        } else {
            (1.0 - r2 / s2).powi(self.k as i32)
        }
    }
    fn family(&self) -> String {
        format!(
            "pseudo-bump(|w|={},s={},k={})",
            self.center.norm(),
            self.s,
            self.k
        )
    }
}

/// `Dψ` assembled from determinants: the coefficient of `ε` in
/// `det(Ω + εH)/det Ω`, divided by `n`, extracted with a five-point stencil that is
/// exact for polynomials of degree four.
pub fn wedge_density(psi: &dyn TestFunction, z: &Point) -> f64 {
    let omega = crate::geometry::omega_matrix(z);
    let h = psi.complex_hessian(z);
    let scale = omega.norm() / h.norm().max(1e-300);
    let e = 1e-2 * scale;
    let det = |x: f64| (&omega + &h * Complex64::new(x, 0.0)).determinant().re;
    let d1 = (-det(2.0 * e) + 8.0 * det(e) - 8.0 * det(-e) + det(-2.0 * e)) / (12.0 * e);
    d1 / omega.determinant().re / z.dim() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{aux_rng, std_normal, uniform};
    use approx::assert_relative_eq;

    /// `ψ(z) = Re(z^* A z) + Re(b^T z)·…`: a real quadratic with Hermitian `A`, whose
    /// complex Hessian is `A^T` everywhere.
    #[derive(Debug)]
    struct Quadratic {
        a: DMatrix<Complex64>,
    }

    impl TestFunction for Quadratic {
        fn n(&self) -> usize {
            self.a.nrows()
        }
        fn support_radius(&self) -> f64 {
            1.0
        }
        fn value(&self, z: &Point) -> f64 {
            let c = z.coords();
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..self.n() {
                for k in 0..self.n() {
                    v += c[j].conj() * self.a[(j, k)] * c[k];
                }
            }
            v.re
        }
        fn family(&self) -> String {
            "quadratic".into()
        }
    }

    fn random_point(rng: &mut rand_chacha::ChaCha8Rng, n: usize, r: f64) -> Point {
        let dir = crate::rng::sphere_point(rng, n);
        let rad = r * uniform(rng).sqrt();
        Point::new(dir.into_iter().map(|c| c * rad).collect()).unwrap()
    }

    #[test]
    fn quadratic_at_origin() {
        // ψ = |z|² near 0: Dψ(0) = 1 in every dimension
        for n in 1..=3 {
            let q = Quadratic {
                a: DMatrix::identity(n, n),
            };
            assert_relative_eq!(d_operator(&q, &Point::origin(n)), 1.0, max_relative = 1e-7);
        }
    }

    #[test]
    fn closed_form_matches_wedge_oracle() {
        let mut rng = aux_rng(3, 0, 0);
        for n in 1..=3 {
            for _ in 0..20 {
                let m = DMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(std_normal(&mut rng), std_normal(&mut rng))
                });
                let a = &m + m.adjoint();
                let q = Quadratic { a };
                let z = random_point(&mut rng, n, 0.9);
                let closed = d_operator(&q, &z);
                let oracle = wedge_density(&q, &z);
                assert!(
                    (closed - oracle).abs() <= 1e-8 * oracle.abs().max(1e-3),
                    "n={n}: {closed} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn one_dimensional_laplacian_form() {
        let b = RadialBump::new(1, 0.8, 4);
        for &x in &[0.0, 0.2, 0.5, 0.79] {
            let z = Point::real(&[x]).unwrap();
            let t = x * x;
            let g = b.radial_profile(t).unwrap();
            // Δψ = 4 ∂∂̄ψ = 4 (g' + t g'')
            let lap = 4.0 * (g[1] + t * g[2]);
            assert_relative_eq!(
                d_operator(&b, &z),
                (1.0 - t).powi(2) * lap / 4.0,
                max_relative = 1e-10,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn analytic_hessians_match_finite_differences() {
        let mut rng = aux_rng(4, 0, 0);
        let fns: Vec<Box<dyn TestFunction>> = vec![
            Box::new(RadialBump::new(2, 0.8, 4)),
            Box::new(MollifiedIndicator::new(2, 0.5, 0.2)),
        ];
        for f in &fns {
            for _ in 0..10 {
                let z = random_point(&mut rng, 2, 0.75);
                let a = f.complex_hessian(&z);
                let d = finite_difference_hessian(|p| f.value(p), &z);
                assert!((&a - &d).norm() < 1e-5 * (1.0 + a.norm()), "{}", f.family());
            }
        }
    }

    #[test]
    fn support_is_respected() {
        let fns: Vec<Box<dyn TestFunction>> = vec![
            Box::new(RadialBump::new(1, 0.6, 3)),
            Box::new(MollifiedIndicator::new(2, 0.5, 0.05)),
            Box::new(PseudoBump::new(Point::real(&[0.4]).unwrap(), 0.3, 4)),
        ];
        for f in &fns {
            let r = f.support_radius();
            let mut coords = vec![Complex64::new(0.0, 0.0); f.n()];
            coords[0] = Complex64::new(0.0, r + 1e-6);
            let z = Point::new(coords).unwrap();
            assert_eq!(f.value(&z), 0.0);
            assert_eq!(d_operator(f.as_ref(), &z).abs(), 0.0);
        }
    }

    #[test]
    fn d_commutes_with_automorphisms() {
        // D is invariant: D(B ∘ φ_w) = (DB) ∘ φ_w
        let w = Point::real(&[0.3, -0.2]).unwrap();
        let pb = PseudoBump::new(w, 0.5, 5);
        let phi = pb.automorphism();
        let base = pb.centred();
        let mut rng = aux_rng(5, 0, 0);
        for _ in 0..10 {
            let z = phi.apply(&random_point(&mut rng, 2, 0.45));
            let lhs = d_operator(&pb, &z);
            let rhs = d_operator(&base, &phi.apply(&z));
            assert!(
                (lhs - rhs).abs() < 1e-5 * rhs.abs().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn sandwich_orders() {
        let (lo, hi) = MollifiedIndicator::sandwich(1, 0.5, 0.05);
        for k in 0..=100 {
            let x = 0.7 * k as f64 / 100.0;
            let z = Point::real(&[x]).unwrap();
            let chi = if x < 0.5 { 1.0 } else { 0.0 };
            assert!(lo.value(&z) <= chi && chi <= hi.value(&z));
        }
    }
}
