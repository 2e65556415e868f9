use super::layer::{coefficients_up_to, enumerate_layer, LayerIndex};
use super::series::{LayerScales, RadialSeries};
use super::truncation::{choose_truncation, log_tail_variance, TailPolicy};
use super::weights::WeightTable;
use crate::caps::Caps;
use crate::error::{GafError, Result};
use crate::geometry::Point;
use crate::rng::CoefficientStream;
use num_complex::Complex64;
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Everything about a truncated `f_L` that does not depend on the coefficients.
#[derive(Debug)]
pub struct GafModel {
    pub n: usize,
    pub l: f64,
    pub degree: usize,
    pub tail: TailPolicy,
    pub weights: WeightTable,
    pub layers: Vec<LayerIndex>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) half_log_multinomial: Vec<f64>,
    pub(crate) scales: Arc<LayerScales>,
}

impl GafModel {
    /// Model whose degree is chosen by [`choose_truncation`] for the tail policy.
    pub fn new(n: usize, l: f64, tail: TailPolicy, caps: &Caps) -> Result<Arc<Self>> {
        let degree = choose_truncation(n, l, tail.r_max, tail.eps_tail, caps)?;
        Self::with_degree(n, l, degree, tail, caps)
    }

    pub fn with_degree(
        n: usize,
        l: f64,
        degree: usize,
        tail: TailPolicy,
        caps: &Caps,
    ) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(GafError::domain("dimension must be positive"));
        }
        Caps::check("truncation degree", degree as u64, caps.max_degree as u64)?;
        Caps::check(
            "coefficients",
            coefficients_up_to(n, degree),
            caps.max_coefficients,
        )?;
        let weights = WeightTable::new(l, degree)?;
        let mut layers = Vec::with_capacity(degree + 1);
        let mut offsets = Vec::with_capacity(degree + 2);
        let mut hlm = Vec::new();
        let mut offset = 0;
        for m in 0..=degree {
            let layer = enumerate_layer(n, m, caps)?;
            offsets.push(offset);
            offset += layer.count();
            if n > 1 {
                hlm.extend(
                    layer
                        .indices
                        .iter()
                        .map(|a| weights.half_log_multinomial(a)),
                );
            }
            layers.push(layer);
        }
        offsets.push(offset);
        let scales = Arc::new(LayerScales::new(
            l,
            (0..=degree).map(|m| weights.layer_log_weight(m)).collect(),
        ));
        Ok(Arc::new(GafModel {
            n,
            l,
            degree,
            tail,
            weights,
            layers,
            offsets,
            half_log_multinomial: hlm,
            scales,
        }))
    }

    pub fn coefficient_count(&self) -> usize {
        *self.offsets.last().expect("offsets")
    }

    /// Draw the coefficients of trial `trial` under master seed `seed`.
    pub fn sample(self: &Arc<Self>, seed: u64, trial: u64) -> GafSample {
        let mut stream = CoefficientStream::new(seed, trial);
        let coeffs = (0..self.coefficient_count())
            .map(|_| stream.next_gaussian())
            .collect();
        GafSample {
            model: Arc::clone(self),
            coeffs,
            seed,
            trial,
        }
    }

    /// A sample with prescribed coefficients (layer order), for constructed test inputs.
    pub fn from_coefficients(self: &Arc<Self>, coeffs: Vec<Complex64>) -> Result<GafSample> {
        if coeffs.len() != self.coefficient_count() {
            return Err(GafError::domain(format!(
                "expected {} coefficients, got {}",
                self.coefficient_count(),
                coeffs.len()
            )));
        }
        Ok(GafSample {
            model: Arc::clone(self),
            coeffs,
            seed: 0,
            trial: 0,
        })
    }

    /// Position of `α` in the layer-ordered coefficient vector.
    pub fn ordinal(&self, alpha: &[u32]) -> Option<usize> {
        let m: usize = alpha.iter().map(|&a| a as usize).sum();
        if m > self.degree || alpha.len() != self.n {
            return None;
        }
        self.layers[m]
            .indices
            .iter()
            .position(|a| a.as_slice() == alpha)
            .map(|p| self.offsets[m] + p)
    }
}

/// Largest radius at which a degree-`degree` truncation has tail standard deviation
/// at most `eps_tail`.
pub fn trusted_radius(l: f64, degree: usize, eps_tail: f64) -> f64 {
    let target = 2.0 * eps_tail.ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if log_tail_variance(l, mid * mid, degree) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// One truncated realisation of `f_L`.
#[derive(Debug, Clone)]
pub struct GafSample {
    pub model: Arc<GafModel>,
    /// `a_α`, layer by layer in [`LayerIndex`] order.
    pub coeffs: Vec<Complex64>,
    pub seed: u64,
    pub trial: u64,
}

/// Sample of degree `degree`; the tail policy records the radius on which this degree
/// keeps the tail standard deviation below `1e-8`.
pub fn sample(n: usize, l: f64, degree: usize, seed: u64, trial: u64) -> Result<GafSample> {
    let eps = 1e-8;
    let tail = TailPolicy::new(trusted_radius(l, degree, eps), eps);
    Ok(GafModel::with_degree(n, l, degree, tail, &Caps::from_env())?.sample(seed, trial))
}

impl GafSample {
    pub fn n(&self) -> usize {
        self.model.n
    }

    pub fn intensity(&self) -> f64 {
        self.model.l
    }

    pub fn degree(&self) -> usize {
        self.model.degree
    }

    pub fn layer(&self, m: usize) -> &[Complex64] {
        &self.coeffs[self.model.offsets[m]..self.model.offsets[m + 1]]
    }

    /// Whether `z` lies where the truncation error is controlled.
    pub fn trusted(&self, z: &Point) -> bool {
        z.norm() <= self.model.tail.r_max * (1.0 + 1e-12)
    }

    /// Restriction `t ↦ f(tζ)` to the complex line through a unit vector `ζ`.
    pub fn slice(&self, zeta: &[Complex64]) -> RadialSeries {
        let model = &self.model;
        let coeffs = if model.n == 1 {
            let u = zeta[0];
            let mut p = Complex64::new(1.0, 0.0);
            self.coeffs
                .iter()
                .map(|a| {
                    let v = a * p;
                    p *= u;
                    v
                })
                .collect()
        } else {
            let ln_abs: Vec<f64> = zeta.iter().map(|c| c.norm().ln()).collect();
            let arg: Vec<f64> = zeta.iter().map(|c| c.arg()).collect();
            (0..=model.degree)
                .map(|m| {
                    let base = model.offsets[m];
                    model.layers[m]
                        .indices
                        .iter()
                        .enumerate()
                        .map(|(i, alpha)| {
                            let mut lm = model.half_log_multinomial[base + i];
                            let mut ph = 0.0;
                            for (j, &a) in alpha.iter().enumerate() {
                                if a > 0 {
                                    lm += a as f64 * ln_abs[j];
                                    ph += a as f64 * arg[j];
                                }
                            }
                            self.coeffs[base + i] * Complex64::from_polar(lm.exp(), ph)
                        })
                        .sum()
                })
                .collect()
        };
        RadialSeries::new(Arc::clone(&model.scales), coeffs)
    }

    /// Slice through `z` together with the complex parameter `t` with `tζ = z`.
    fn slice_through(&self, z: &Point) -> (RadialSeries, Complex64) {
        let r = z.norm();
        if self.model.n == 1 {
            let one = [Complex64::new(1.0, 0.0)];
            return (self.slice(&one), z.coords()[0]);
        }
        if r == 0.0 {
            let mut e1 = vec![Complex64::new(0.0, 0.0); self.model.n];
            e1[0] = Complex64::new(1.0, 0.0);
            return (self.slice(&e1), Complex64::new(0.0, 0.0));
        }
        let zeta: Vec<Complex64> = z.coords().iter().map(|c| c / r).collect();
        (self.slice(&zeta), Complex64::new(r, 0.0))
    }

    /// `f_L(z)` of the truncation (may overflow for very large `L`; prefer the
    /// normalised forms).
    pub fn evaluate(&self, z: &Point) -> Complex64 {
        let (s, t) = self.slice_through(z);
        let shift = -0.5 * self.model.l * (-z.norm_sq()).ln_1p();
        s.eval_normalized(t) * shift.exp()
    }

    /// `f̂_L(z) = f_L(z) (1-|z|²)^{L/2}` up to a unimodular factor.
    pub fn evaluate_normalized(&self, z: &Point) -> Complex64 {
        let (s, t) = self.slice_through(z);
        s.eval_normalized(t)
    }

    /// `log|f̂_L(z)|² = log|f_L(z)|² + L log(1-|z|²)`.
    pub fn evaluate_log_normalized(&self, z: &Point) -> f64 {
        self.evaluate_normalized(z).norm_sqr().ln()
    }

    /// Coefficient dump: a header line `n,L,M,seed,trial`, its values, then one row
    /// `ordinal,degree,alpha,re,im` per coefficient with `alpha` as `a1;a2;…`.
    pub fn write_coefficients_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,L,M,seed,trial")?;
        writeln!(
            w,
            "{},{:.16e},{},{},{}",
            self.model.n, self.model.l, self.model.degree, self.seed, self.trial
        )?;
        writeln!(w, "ordinal,degree,alpha,re,im")?;
        let mut k = 0;
        for layer in &self.model.layers {
            for alpha in &layer.indices {
                let a = self.coeffs[k];
                let idx: Vec<String> = alpha.iter().map(|x| x.to_string()).collect();
                writeln!(
                    w,
                    "{k},{},{},{:.16e},{:.16e}",
                    layer.m,
                    idx.join(";"),
                    a.re,
                    a.im
                )?;
                k += 1;
            }
        }
        Ok(())
    }
}

/// Dense evaluator of a truncation at arbitrary points: `Σ_α (a_α w_α) z^α` with the
/// products `a_α w_α` formed once. Cheaper than slicing when many points are needed.
#[derive(Debug, Clone)]
pub struct PointEvaluator {
    n: usize,
    degree: usize,
    l: f64,
    terms: Vec<Complex64>,
    exponents: Vec<u32>,
}

/// Largest log-weight accepted by [`PointEvaluator`] before products could overflow.
const MAX_LOG_WEIGHT: f64 = 600.0;

impl PointEvaluator {
    pub fn new(sample: &GafSample) -> Result<Self> {
        let model = &sample.model;
        let mut terms = Vec::with_capacity(sample.coeffs.len());
        let mut exponents = Vec::with_capacity(sample.coeffs.len() * model.n);
        let mut k = 0;
        for layer in &model.layers {
            for alpha in &layer.indices {
                let lw = model.weights.log_weight(alpha);
                if lw > MAX_LOG_WEIGHT {
                    return Err(GafError::Numeric(format!(
                        "weight e^{lw:.0} too large for direct evaluation"
                    )));
                }
                terms.push(sample.coeffs[k] * lw.exp());
                exponents.extend_from_slice(alpha);
                k += 1;
            }
        }
        Ok(PointEvaluator {
            n: model.n,
            degree: model.degree,
            l: model.l,
            terms,
            exponents,
        })
    }

    /// `f_L(z)` of the truncation.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.n);
        if self.n == 1 {
            return self
                .terms
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z[0] + c);
        }
        let stride = self.degree + 1;
        let mut powers = vec![Complex64::new(1.0, 0.0); self.n * stride];
        for (j, zj) in z.iter().enumerate() {
            for m in 1..stride {
                powers[j * stride + m] = powers[j * stride + m - 1] * zj;
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, alpha) in self.terms.iter().zip(self.exponents.chunks(self.n)) {
            let mut p = *c;
            for (j, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    p *= powers[j * stride + a as usize];
                }
            }
            acc += p;
        }
        acc
    }

    /// `log|f̂_L(z)|² = log|f_L(z)|² + L log(1-|z|²)`.
    pub fn log_normalized(&self, z: &[Complex64]) -> f64 {
        let t: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        self.eval(z).norm_sqr().ln() + self.l * (-t).ln_1p()
    }
}

/// Header and coefficients parsed from [`GafSample::write_coefficients_csv`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDump {
    pub n: usize,
    pub l: f64,
    pub degree: usize,
    pub seed: u64,
    pub trial: u64,
    pub coeffs: Vec<Complex64>,
}

pub fn read_coefficients_csv<R: BufRead>(r: R) -> Result<CoefficientDump> {
    let bad = |msg: &str| GafError::Config(format!("coefficient dump: {msg}"));
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| bad("truncated"))?
            .map_err(GafError::from)
    };
    if next()?.trim() != "n,L,M,seed,trial" {
        return Err(bad("missing header"));
    }
    let head = next()?;
    let h: Vec<&str> = head.trim().split(',').collect();
    if h.len() != 5 {
        return Err(bad("malformed header values"));
    }
    let parse_err = |_| bad("unparsable number");
    let n = h[0].parse().map_err(|_| bad("n"))?;
    let l = h[1].parse().map_err(|_| bad("L"))?;
    let degree = h[2].parse().map_err(|_| bad("M"))?;
    let seed = h[3].parse().map_err(|_| bad("seed"))?;
    let trial = h[4].parse().map_err(|_| bad("trial"))?;
    next()?;
    let mut coeffs = Vec::new();
    while let Ok(line) = next() {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 5 {
            return Err(bad("malformed row"));
        }
        let re: f64 = f[3].parse().map_err(parse_err)?;
        let im: f64 = f[4].parse().map_err(parse_err)?;
        coeffs.push(Complex64::new(re, im));
    }
    Ok(CoefficientDump {
        n,
        l,
        degree,
        seed,
        trial,
        coeffs,
    })
}
