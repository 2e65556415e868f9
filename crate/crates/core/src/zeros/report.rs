use super::roots::polynomial_roots;
use super::winding::{winding_count, WindingCount};
use crate::error::{GafError, Result};
use crate::gaf::{tail_envelope, GafSample};
use crate::rng::{aux_rng, sphere_point};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest FFT length used when refining a winding count.
pub const MAX_WINDING_SAMPLES: usize = 1 << 16;

/// Residual accepted for a returned root, relative to the largest layer scale.
pub const ROOT_RESIDUAL: f64 = 1e-8;

/// Stream domain for slice directions.
const SLICE_DOMAIN: u64 = 0x51ce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Companion-matrix roots (n = 1).
    ExactRoots,
    /// Argument-principle count only, no root locations (n = 1).
    Winding,
    /// Counts along complex lines through the origin (n ≥ 2).
    SliceEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    Certified,
    Uncertain,
}

/// Zeros of one sample in a centred disk or ball. Serialises to one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub trial: u64,
    pub count: usize,
    pub certainty: Certainty,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub roots: Option<Vec<[f64; 2]>>,
    pub mode: CountMode,
    #[serde(default)]
    pub slices_used: usize,
}

impl ZeroReport {
    pub fn roots_complex(&self) -> Vec<Complex64> {
        self.roots
            .as_ref()
            .map(|r| r.iter().map(|p| Complex64::new(p[0], p[1])).collect())
            .unwrap_or_default()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

fn check_radius(sample: &GafSample, r: f64) -> Result<()> {
    if !(r > 0.0) || r > sample.model.tail.r_max * (1.0 + 1e-12) {
        return Err(GafError::domain(format!(
            "radius {r} outside (0, r_max = {}]",
            sample.model.tail.r_max
        )));
    }
    Ok(())
}

fn envelope(sample: &GafSample, r: f64) -> f64 {
    let m = &sample.model;
    tail_envelope(m.n, m.l, r, m.degree, m.tail.p_exceed)
}

fn unit_line() -> [Complex64; 1] {
    [Complex64::new(1.0, 0.0)]
}

/// Argument-principle count of the zeros of an `n = 1` sample in `|z| < r`.
pub fn winding_disk(sample: &GafSample, r: f64) -> Result<(WindingCount, f64)> {
    if sample.n() != 1 {
        return Err(GafError::domain("winding counts need n = 1"));
    }
    check_radius(sample, r)?;
    let c = sample.slice(&unit_line()).scaled_coeffs(r);
    Ok((winding_count(&c, MAX_WINDING_SAMPLES), envelope(sample, r)))
}

/// Zero count in `|z| < r` for `n = 1` without locating the roots.
pub fn count_disk(sample: &GafSample, r: f64) -> Result<ZeroReport> {
    let (w, env) = winding_disk(sample, r)?;
    Ok(ZeroReport {
        trial: sample.trial,
        count: w.count,
        certainty: if w.certified_against(env) {
            Certainty::Certified
        } else {
            Certainty::Uncertain
        },
        roots: None,
        mode: CountMode::Winding,
        slices_used: 0,
    })
}

/// Roots of the degree-`M` truncation in `|z| < r` (`n = 1`).
///
/// The polynomial is solved in `u = z/r` with coefficients `b_m(r) S_m`, which keeps the
/// companion matrix well scaled for any intensity. The count is certified when the
/// argument principle on `|z| = r` agrees with the roots and the circle margin exceeds
/// the tail envelope.
pub fn roots_disk(sample: &GafSample, r: f64) -> Result<ZeroReport> {
    if sample.n() != 1 {
        return Err(GafError::domain("roots_disk needs n = 1"));
    }
    check_radius(sample, r)?;
    let series = sample.slice(&unit_line());
    let c = series.scaled_coeffs(r);
    let scale = sample
        .model
        .scales
        .scales(r)
        .into_iter()
        .fold(0.0, f64::max);
    let all = polynomial_roots(&c)?;
    let mut inside = Vec::new();
    for u in all {
        if u.norm() < 1.0 {
            let p = c
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * u + x);
            if !(p.norm() < ROOT_RESIDUAL * scale) {
                return Err(GafError::Numeric(format!(
                    "root {} has residual {:.3e} (trial {})",
                    u * r,
                    p.norm(),
                    sample.trial
                )));
            }
            inside.push(u * r);
        }
    }
    let w = winding_count(&c, MAX_WINDING_SAMPLES);
    let certified = w.certified_against(envelope(sample, r)) && w.count == inside.len();
    inside.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    Ok(ZeroReport {
        trial: sample.trial,
        count: inside.len(),
        certainty: if certified {
            Certainty::Certified
        } else {
            Certainty::Uncertain
        },
        roots: Some(inside.iter().map(|z| [z.re, z.im]).collect()),
        mode: CountMode::ExactRoots,
        slices_used: 0,
    })
}

/// All `M` roots of an `n = 1` truncation over the whole plane.
pub fn truncation_roots(sample: &GafSample) -> Result<Vec<Complex64>> {
    if sample.n() != 1 {
        return Err(GafError::domain("truncation_roots needs n = 1"));
    }
    let series = sample.slice(&unit_line());
    let lw = &sample.model.scales.log_weight;
    let m = series.degree();
    // balance |c_0| and |c_M| by rescaling u = z/ρ
    let lr = if m > 0 {
        (lw[0] - lw[m]) / m as f64
    } else {
        0.0
    };
    let c: Vec<Complex64> = series
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, s)| s * (lw[k] + k as f64 * lr).exp())
        .collect();
    let rho = lr.exp();
    Ok(polynomial_roots(&c)?.into_iter().map(|u| u * rho).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoleVerdict {
    Hole,
    NoHole,
    Uncertain,
}

/// Outcome of a hole test; `heuristic` marks verdicts that are not certified
/// (a declared hole in dimension two and higher).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleCheck {
    pub verdict: HoleVerdict,
    pub heuristic: bool,
    pub slices_used: usize,
    /// Smallest certified circle margin seen (normalised units).
    pub margin: f64,
}

/// Whether `f` has no zero in `|z| < r`.
///
/// For `n = 1` this is the certified argument-principle count on `|z| = r`. For `n ≥ 2`
/// the function is restricted to `slices` complex lines through the origin with
/// directions drawn from the sample's seed; a zero on any line is a proof of no hole,
/// while zero-free lines with positive margins only suggest a hole.
pub fn hole_indicator(sample: &GafSample, r: f64, slices: usize) -> Result<HoleCheck> {
    check_radius(sample, r)?;
    let env = envelope(sample, r);
    if sample.n() == 1 {
        let (w, env) = winding_disk(sample, r)?;
        let verdict = if !w.certified_against(env) {
            HoleVerdict::Uncertain
        } else if w.count == 0 {
            HoleVerdict::Hole
        } else {
            HoleVerdict::NoHole
        };
        return Ok(HoleCheck {
            verdict,
            heuristic: false,
            slices_used: 1,
            margin: w.margin,
        });
    }
    let n = sample.n();
    let mut rng = aux_rng(sample.seed, SLICE_DOMAIN, sample.trial);
    let mut all_clear = true;
    let mut margin = f64::INFINITY;
    for k in 0..slices.max(1) {
        let zeta = sphere_point(&mut rng, n);
        let w = winding_count(&sample.slice(&zeta).scaled_coeffs(r), MAX_WINDING_SAMPLES);
        margin = margin.min(w.margin);
        if w.certified_against(env) {
            if w.count > 0 {
                return Ok(HoleCheck {
                    verdict: HoleVerdict::NoHole,
                    heuristic: false,
                    slices_used: k + 1,
                    margin,
                });
            }
        } else {
            all_clear = false;
        }
    }
    Ok(HoleCheck {
        verdict: if all_clear {
            HoleVerdict::Hole
        } else {
            HoleVerdict::Uncertain
        },
        heuristic: true,
        slices_used: slices.max(1),
        margin,
    })
}

/// The single-line version of [`hole_indicator`] applied to an `n = 1` sample through
/// [`roots_disk`]; used to cross-check the two code paths.
pub fn hole_from_roots(sample: &GafSample, r: f64) -> Result<HoleVerdict> {
    let rep = roots_disk(sample, r)?;
    Ok(match (rep.certainty, rep.count) {
        (Certainty::Uncertain, _) => HoleVerdict::Uncertain,
        (_, 0) => HoleVerdict::Hole,
        _ => HoleVerdict::NoHole,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::Caps;
    use crate::gaf::{GafModel, TailPolicy};
    use std::sync::Arc;

    fn model(n: usize, l: f64, r: f64) -> Arc<GafModel> {
        GafModel::new(n, l, TailPolicy::new(r, 1e-10), &Caps::default()).unwrap()
    }

    #[test]
    fn constructed_quadratic() {
        // L = 1 has unit weights, so a_0 = -0.12, a_1 = 0.1, a_2 = 1 gives (z-0.3)(z+0.4)
        let m =
            GafModel::with_degree(1, 1.0, 2, TailPolicy::new(0.6, 1e-8), &Caps::default()).unwrap();
        let s = m
            .from_coefficients(vec![
                Complex64::new(-0.12, 0.0),
                Complex64::new(0.1, 0.0),
                Complex64::new(1.0, 0.0),
            ])
            .unwrap();
        let rep = roots_disk(&s, 0.6).unwrap();
        let mut roots = rep.roots_complex();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(rep.count, 2);
        assert!((roots[0] - Complex64::new(-0.4, 0.0)).norm() < 1e-12);
        assert!((roots[1] - Complex64::new(0.3, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_has_a_hole() {
        for n in [1, 2, 3] {
            let m = model(n, 5.0, 0.5);
            let mut c = vec![Complex64::new(0.0, 0.0); m.coefficient_count()];
            c[0] = Complex64::new(1.0, 0.0);
            let s = m.from_coefficients(c).unwrap();
            let h = hole_indicator(&s, 0.5, 8).unwrap();
            assert_eq!(h.verdict, HoleVerdict::Hole);
            assert_eq!(h.heuristic, n > 1);
        }
    }

    #[test]
    fn first_coordinate_has_no_hole() {
        let m = model(2, 3.0, 0.5);
        let mut c = vec![Complex64::new(0.0, 0.0); m.coefficient_count()];
        c[m.ordinal(&[1, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        let s = m.from_coefficients(c).unwrap();
        let h = hole_indicator(&s, 0.5, 4).unwrap();
        assert_eq!(h.verdict, HoleVerdict::NoHole);
        assert!(!h.heuristic);
    }

    #[test]
    fn winding_agrees_with_roots() {
        let m = model(1, 20.0, 0.5);
        let mut disagreements = 0;
        for trial in 0..1000 {
            let s = m.sample(11, trial);
            let a = hole_indicator(&s, 0.5, 1).unwrap().verdict;
            let b = hole_from_roots(&s, 0.5).unwrap();
            if a != b && a != HoleVerdict::Uncertain && b != HoleVerdict::Uncertain {
                disagreements += 1;
            }
            let rep = roots_disk(&s, 0.5).unwrap();
            let w = count_disk(&s, 0.5).unwrap();
            if rep.certainty == Certainty::Certified {
                assert_eq!(rep.count, w.count, "trial {trial}");
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn full_root_count_is_the_degree() {
        let m = GafModel::with_degree(1, 3.0, 25, TailPolicy::new(0.3, 1e-8), &Caps::default())
            .unwrap();
        for trial in 0..20 {
            let s = m.sample(5, trial);
            let roots = truncation_roots(&s).unwrap();
            assert_eq!(roots.len(), 25);
        }
    }

    #[test]
    fn certified_counts_survive_more_degree() {
        let base = model(1, 20.0, 0.5);
        let deg = base.degree;
        let bigger = GafModel::with_degree(1, 20.0, deg + 10, base.tail, &Caps::default()).unwrap();
        for trial in 0..300 {
            let a = roots_disk(&base.sample(3, trial), 0.5).unwrap();
            let b = roots_disk(&bigger.sample(3, trial), 0.5).unwrap();
            if a.certainty == Certainty::Certified {
                assert_eq!(a.count, b.count);
            }
        }
    }

    #[test]
    fn json_line_round_trip() {
        let rep = ZeroReport {
            trial: 7,
            count: 1,
            certainty: Certainty::Certified,
            roots: Some(vec![[0.1, -0.2]]),
            mode: CountMode::ExactRoots,
            slices_used: 0,
        };
        let line = rep.to_json_line();
        assert!(line.starts_with("{\"trial\":7,\"count\":1,\"certainty\":\"certified\",\"roots\""));
        let back: ZeroReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, rep);
    }
}
