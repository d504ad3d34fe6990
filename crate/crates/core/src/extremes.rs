//! Rescaling, extremal point processes and their limit tests.
//!
//! The limit object is the Poisson point process with intensity `e^{-x} dx`
//! and its maximum, the standard Gumbel law `exp(-e^{-t})`.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::gff::FieldSample;
use crate::quadrature::adaptive_simpson;
use crate::special::normal_sf;

/// Points below this value are dropped from an extracted process by default.
pub const DEFAULT_FLOOR: f64 = -5.0;
/// Minimum replica count for the Kolmogorov–Smirnov test.
pub const KS_MIN_SAMPLES: usize = 100;
/// Terms kept in the Kolmogorov series.
pub const KOLMOGOROV_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescalingConstants {
    pub n: usize,
    pub r: usize,
    /// `√((r-1)/(r-2))`
    pub sigma_r: f64,
    /// `√(2 ln N) - (ln ln N + ln 4π) / (2√(2 ln N))`
    pub a_n: f64,
    /// `1/a_N`
    pub b_n: f64,
}

pub fn rescaling_constants(n: usize, r: usize) -> Result<RescalingConstants> {
    if n < 3 {
        return Err(Error::invalid(format!("rescaling needs N >= 3, got {n}")));
    }
    if r < 3 {
        return Err(Error::invalid(format!("rescaling needs r >= 3, got {r}")));
    }
    let ln_n = (n as f64).ln();
    let root = (2.0 * ln_n).sqrt();
    let a_n = root - (ln_n.ln() + (4.0 * std::f64::consts::PI).ln()) / (2.0 * root);
    if a_n <= 0.0 {
        return Err(Error::invalid(format!(
            "a_N = {a_n} is not positive for N = {n}"
        )));
    }
    let rf = r as f64;
    Ok(RescalingConstants {
        n,
        r,
        sigma_r: ((rf - 1.0) / (rf - 2.0)).sqrt(),
        a_n,
        b_n: 1.0 / a_n,
    })
}

impl RescalingConstants {
    /// `(z - a_N)/b_N` for a unit-variance value `z`.
    #[inline]
    pub fn rescale(&self, z: f64) -> f64 {
        (z - self.a_n) * self.a_n
    }

    /// `N · Φ̄(a_N + t b_N)`, which tends to `e^{-t}`.
    pub fn iid_tail_mass(&self, t: f64) -> f64 {
        self.n as f64 * normal_sf(self.a_n + t * self.b_n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexSetKind {
    All,
    GoodOnly,
}

/// How field values become unit-variance values `Z_x`.
#[derive(Debug, Clone, Copy)]
pub enum Normalization<'a> {
    /// `Z_x = ψ(x)`, for fields that already have unit variance.
    Unit,
    /// `Z_x = ψ(x)/σ_r`.
    SigmaR,
    /// `Z_x = ψ(x)/√v_x` with the exact per-vertex variances `v`.
    ExactVariance(&'a [f64]),
}

/// Rescaled points `(Z_x - a_N)/b_N`, truncated below `floor` when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalProcess {
    /// Retained points in decreasing order.
    pub points: Vec<f64>,
    pub max_point: f64,
    /// Index of the vertex attaining the maximum.
    pub argmax: usize,
    pub vertex_set_kind: VertexSetKind,
    /// Size of the chosen vertex set, counting truncated points.
    pub set_size: usize,
    pub floor: Option<f64>,
    pub stream_id: u64,
}

impl ExtremalProcess {
    /// Number of points in `(lo, hi]`; `hi = None` means `+∞`.
    pub fn count(&self, iv: &Interval) -> usize {
        self.points.iter().filter(|&&p| iv.contains(p)).count()
    }

    /// `Σ φ(p)` over retained points.
    pub fn pair_with(&self, phi: &TestFunction) -> f64 {
        self.points.iter().map(|&p| phi.eval(p)).sum()
    }

    /// True when every point below `x` may have been dropped.
    fn truncation_covers(&self, x: f64) -> bool {
        self.floor.is_none_or(|f| f <= x)
    }
}

pub fn extract_process(
    sample: &FieldSample,
    c: &RescalingConstants,
    normalize: Normalization<'_>,
    mask: Option<&[bool]>,
    floor: Option<f64>,
) -> Result<ExtremalProcess> {
    extract_values(&sample.values, sample.stream_id, c, normalize, mask, floor)
}

pub fn extract_values(
    values: &[f64],
    stream_id: u64,
    c: &RescalingConstants,
    normalize: Normalization<'_>,
    mask: Option<&[bool]>,
    floor: Option<f64>,
) -> Result<ExtremalProcess> {
    let n = values.len();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::invalid(format!(
                "mask length {} differs from sample length {n}",
                m.len()
            )));
        }
    }
    if let Normalization::ExactVariance(v) = normalize {
        if v.len() != n {
            return Err(Error::invalid(format!(
                "variance length {} differs from sample length {n}",
                v.len()
            )));
        }
    }
    let mut points = Vec::new();
    let mut max_point = f64::NEG_INFINITY;
    let mut argmax = 0;
    let mut set_size = 0;
    for (x, &psi) in values.iter().enumerate() {
        if mask.is_some_and(|m| !m[x]) {
            continue;
        }
        set_size += 1;
        let z = match normalize {
            Normalization::Unit => psi,
            Normalization::SigmaR => psi / c.sigma_r,
            Normalization::ExactVariance(v) => psi / v[x].sqrt(),
        };
        let p = c.rescale(z);
        if p > max_point {
            max_point = p;
            argmax = x;
        }
        if floor.is_none_or(|f| p >= f) {
            points.push(p);
        }
    }
    if set_size == 0 {
        return Err(Error::invalid("chosen vertex set is empty"));
    }
    points.sort_by(|a, b| b.total_cmp(a));
    Ok(ExtremalProcess {
        points,
        max_point,
        argmax,
        vertex_set_kind: if mask.is_some() {
            VertexSetKind::GoodOnly
        } else {
            VertexSetKind::All
        },
        set_size,
        floor,
        stream_id,
    })
}

pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

pub fn gumbel_quantile(u: f64) -> f64 {
    -(-u.ln()).ln()
}

/// `P(K > λ)` for the Kolmogorov distribution, `2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    // The alternating series is useless near 0, where the value is 1 to machine precision.
    if lambda < 0.18 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=KOLMOGOROV_TERMS {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov distance to an arbitrary continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_gumbel(max_samples: &[f64]) -> Result<KsResult> {
    if max_samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: max_samples.len(),
            need: KS_MIN_SAMPLES,
        });
    }
    let statistic = ks_statistic(max_samples, gumbel_cdf);
    let n = max_samples.len();
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_sf((n as f64).sqrt() * statistic),
        n,
    })
}

/// Interval `(lo, hi]`; `hi = None` is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Interval {
    pub fn new(lo: f64, hi: Option<f64>) -> Result<Self> {
        let iv = Self { lo, hi };
        iv.validate()?;
        Ok(iv)
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self { lo, hi: Some(hi) }
    }

    pub fn upper(lo: f64) -> Self {
        Self { lo, hi: None }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lo.is_finite() && self.hi.is_none_or(|h| h.is_finite() && h > self.lo);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "interval ({}, {:?}) must have finite lo < hi",
                self.lo, self.hi
            )))
        }
    }

    #[inline]
    pub fn contains(&self, p: f64) -> bool {
        p > self.lo && self.hi.is_none_or(|h| p <= h)
    }

    /// `∫ e^{-x} dx` over the interval.
    pub fn ppp_mean(&self) -> f64 {
        (-self.lo).exp() - self.hi.map_or(0.0, |h| (-h).exp())
    }

    /// Default intervals for the count tests.
    pub fn defaults() -> Vec<Interval> {
        vec![
            Interval::upper(0.0),
            Interval::bounded(-1.0, 0.0),
            Interval::bounded(-2.0, -1.0),
            Interval::bounded(-3.0, -2.0),
        ]
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.hi {
            Some(h) => write!(f, "({}, {}]", self.lo, h),
            None => write!(f, "({}, inf)", self.lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalTest {
    pub interval: Interval,
    pub target_mean: f64,
    pub mean_count: f64,
    pub variance: f64,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln = k as f64 * mean.ln() - mean - ln_factorial(k);
    ln.exp()
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Chi-square goodness of fit of non-negative counts to `Poisson(mean)`.
///
/// Consecutive count values are pooled until every bin expects at least 5
/// observations; the last bin absorbs the upper tail. Returns
/// `(statistic, dof, p_value)`; a single bin gives `(0, 0, 1)`.
pub fn poisson_chi_square(counts: &[usize], mean: f64) -> (f64, usize, f64) {
    let r = counts.len() as f64;
    let kmax = counts.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0usize; kmax + 1];
    for &c in counts {
        observed[c] += 1;
    }
    // Bins as [start, end) over count values; the last one is open above.
    let mut bins: Vec<(f64, usize)> = Vec::new();
    let mut exp_acc = 0.0;
    let mut obs_acc = 0;
    let mut cdf = 0.0;
    let mut k = 0;
    loop {
        let p = poisson_pmf(k, mean);
        cdf += p;
        exp_acc += r * p;
        obs_acc += observed.get(k).copied().unwrap_or(0);
        k += 1;
        let tail = r * (1.0 - cdf).max(0.0);
        if exp_acc >= 5.0 && tail >= 5.0 {
            bins.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0;
        } else if tail < 5.0 {
            let rest: usize = observed.iter().skip(k).sum();
            let tail_bin = (exp_acc + tail, obs_acc + rest);
            match bins.last_mut() {
                Some(last) if tail_bin.0 < 5.0 => {
                    last.0 += tail_bin.0;
                    last.1 += tail_bin.1;
                }
                _ => bins.push(tail_bin),
            }
            break;
        }
    }
    if bins.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let stat: f64 = bins.iter().map(|&(e, o)| (o as f64 - e).powi(2) / e).sum();
    let dof = bins.len() - 1;
    let p = ChiSquared::new(dof as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN);
    (stat, dof, p)
}

pub fn ppp_interval_test(
    processes: &[ExtremalProcess],
    intervals: &[Interval],
) -> Result<Vec<IntervalTest>> {
    if processes.is_empty() {
        return Err(Error::invalid("empty process list"));
    }
    intervals
        .iter()
        .map(|iv| {
            iv.validate()?;
            if processes.iter().any(|p| !p.truncation_covers(iv.lo)) {
                return Err(Error::invalid(format!(
                    "interval {iv} reaches below the truncation floor"
                )));
            }
            let counts: Vec<usize> = processes.iter().map(|p| p.count(iv)).collect();
            let r = counts.len() as f64;
            let mean_count = counts.iter().sum::<usize>() as f64 / r;
            let variance = if counts.len() > 1 {
                counts
                    .iter()
                    .map(|&c| (c as f64 - mean_count).powi(2))
                    .sum::<f64>()
                    / (r - 1.0)
            } else {
                0.0
            };
            let target_mean = iv.ppp_mean();
            let (chi_square, dof, p_value) = poisson_chi_square(&counts, target_mean);
            Ok(IntervalTest {
                interval: *iv,
                target_mean,
                mean_count,
                variance,
                chi_square,
                dof,
                p_value,
            })
        })
        .collect()
}

/// Smooth step `s(u) = f(u)/(f(u) + f(1-u))`, `f(u) = e^{-1/u}` for `u > 0`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let f = |v: f64| (-1.0 / v).exp();
        let a = f(u);
        a / (a + f(1.0 - u))
    }
}

/// `height · s((x - lo)/(hi - lo))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
}

/// Non-decreasing smooth function, zero far left and constant far right:
/// a non-negative combination of smooth ramps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub ramps: Vec<Ramp>,
}

impl TestFunction {
    pub fn zero() -> Self {
        Self { ramps: Vec::new() }
    }

    pub fn ramp(lo: f64, hi: f64, height: f64) -> Result<Self> {
        let f = Self {
            ramps: vec![Ramp { lo, hi, height }],
        };
        f.validate()?;
        Ok(f)
    }

    /// Unit-height ramps on `(0,1)`, `(-1,1)` and `(-2,0)`.
    pub fn canonical() -> Vec<TestFunction> {
        [(0.0, 1.0), (-1.0, 1.0), (-2.0, 0.0)]
            .into_iter()
            .map(|(lo, hi)| Self {
                ramps: vec![Ramp {
                    lo,
                    hi,
                    height: 1.0,
                }],
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.ramps {
            let ok = r.lo.is_finite()
                && r.hi.is_finite()
                && r.lo < r.hi
                && r.height.is_finite()
                && r.height >= 0.0;
            if !ok {
                return Err(Error::invalid(format!(
                    "ramp {r:?} leaves the non-decreasing cone"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.ramps
            .iter()
            .map(|r| r.height * smooth_step((x - r.lo) / (r.hi - r.lo)))
            .sum()
    }

    /// Interval carrying `φ'`, or `None` for a constant function.
    pub fn support(&self) -> Option<(f64, f64)> {
        let active = self.ramps.iter().filter(|r| r.height > 0.0);
        let lo = active.clone().map(|r| r.lo).fold(f64::INFINITY, f64::min);
        let hi = active.map(|r| r.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo < hi).then_some((lo, hi))
    }

    pub fn limit(&self) -> f64 {
        self.ramps.iter().map(|r| r.height).sum()
    }
}

/// `exp(-∫(1 - e^{-φ}) e^{-x} dx)`: quadrature over the support plus the
/// closed-form tail `(1 - e^{-φ(∞)}) e^{-hi}`.
pub fn laplace_target(phi: &TestFunction) -> Result<f64> {
    phi.validate()?;
    let Some((lo, hi)) = phi.support() else {
        return Ok(1.0);
    };
    let integrand = |x: f64| -(-phi.eval(x)).exp_m1() * (-x).exp();
    let body = adaptive_simpson(&integrand, lo, hi, 1e-12);
    let tail = -(-phi.limit()).exp_m1() * (-hi).exp();
    Ok((-(body + tail)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceResult {
    pub empirical: f64,
    pub std_error: f64,
    pub target: f64,
}

pub fn laplace_functional(
    processes: &[ExtremalProcess],
    phi: &TestFunction,
) -> Result<LaplaceResult> {
    if processes.is_empty() {
        return Err(Error::invalid("empty process list"));
    }
    let target = laplace_target(phi)?;
    if let Some((lo, _)) = phi.support() {
        if processes.iter().any(|p| !p.truncation_covers(lo)) {
            return Err(Error::invalid(
                "test function support reaches below the truncation floor",
            ));
        }
    }
    let vals: Vec<f64> = processes
        .iter()
        .map(|p| (-p.pair_with(phi)).exp())
        .collect();
    let r = vals.len() as f64;
    let empirical = vals.iter().sum::<f64>() / r;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - empirical).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    Ok(LaplaceResult {
        empirical,
        std_error: (var / r).sqrt(),
        target,
    })
}

/// Exact draw of the limit process restricted to `(floor, ∞)`, decreasing.
pub fn sample_ppp<R: Rng + ?Sized>(rng: &mut R, floor: f64) -> Vec<f64> {
    let mass = (-floor).exp();
    let count = Poisson::new(mass)
        .map(|d| d.sample(rng) as usize)
        .unwrap_or(0);
    let mut pts: Vec<f64> = (0..count)
        .map(|_| floor + rng.sample::<f64, _>(Exp1))
        .collect();
    pts.sort_by(|a, b| b.total_cmp(a));
    pts
}

/// Wraps limit-process points as an [`ExtremalProcess`].
pub fn process_from_points(mut points: Vec<f64>, floor: f64, stream_id: u64) -> ExtremalProcess {
    points.sort_by(|a, b| b.total_cmp(a));
    let max_point = points.first().copied().unwrap_or(f64::NEG_INFINITY);
    ExtremalProcess {
        set_size: points.len(),
        points,
        max_point,
        argmax: 0,
        vertex_set_kind: VertexSetKind::All,
        floor: Some(floor),
        stream_id,
    }
}

/// CSV with one row per replica: `stream_id,max` then one count per interval.
pub fn write_replica_csv<W: Write>(
    mut w: W,
    processes: &[ExtremalProcess],
    intervals: &[Interval],
) -> Result<()> {
    let mut header = String::from("stream_id,max");
    for iv in intervals {
        header.push_str(&format!(",\"count {iv}\""));
    }
    writeln!(w, "{header}")?;
    for p in processes {
        let mut line = format!("{},{:e}", p.stream_id, p.max_point);
        for iv in intervals {
            line.push_str(&format!(",{}", p.count(iv)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gff::FieldKind;
    use crate::rng::from_seed;

    #[test]
    fn constants_n1024() {
        let c = rescaling_constants(1024, 3).unwrap();
        assert!((c.a_n - 3.1234129637).abs() < 1e-9);
        assert!((c.b_n - 0.3201625951).abs() < 1e-9);
        assert_eq!(c.a_n * c.b_n, 1.0);
        assert!((c.sigma_r - 2f64.sqrt()).abs() < 1e-15);
        assert!(rescaling_constants(2, 3).is_err());
        assert!(rescaling_constants(100, 2).is_err());
    }

    #[test]
    fn gumbel_values() {
        assert!((gumbel_cdf(0.0) - (-1f64).exp()).abs() < 1e-15);
        assert!((gumbel_cdf(0.36651292058) - 0.5).abs() < 1e-10);
        assert_eq!(gumbel_cdf(1e3), 1.0);
        assert_eq!(gumbel_cdf(-1e3), 0.0);
        assert!((gumbel_quantile(0.5) - 0.36651292058).abs() < 1e-10);
    }

    #[test]
    fn kolmogorov_reference_points() {
        // P(K > 1.3581) = 0.05 and P(K > 1.6276) = 0.01.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!((kolmogorov_sf(0.3) - 0.99999).abs() < 1e-5);
    }

    #[test]
    fn constant_field_rescales_to_zero() {
        let c = rescaling_constants(50, 3).unwrap();
        let s = FieldSample {
            values: vec![c.sigma_r * c.a_n; 50],
            kind: FieldKind::Iid,
            stream_id: 0,
        };
        let p = extract_process(&s, &c, Normalization::SigmaR, None, None).unwrap();
        assert_eq!(p.points.len(), 50);
        assert!(p.points.iter().all(|&x| x.abs() < 1e-12));
        assert!(p.max_point.abs() < 1e-12);
        let bad = extract_process(&s, &c, Normalization::SigmaR, Some(&[true; 3]), None);
        assert!(bad.is_err());
    }

    #[test]
    fn ks_rejects_uniform_and_short_input() {
        let mut rng = from_seed(4);
        let u: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_gumbel(&u).unwrap().statistic >= 0.2);
        assert!(matches!(
            ks_gumbel(&u[..99]),
            Err(Error::TooFewSamples { got: 99, need: 100 })
        ));
    }

    #[test]
    fn interval_means() {
        assert_eq!(Interval::upper(0.0).ppp_mean(), 1.0);
        assert!((Interval::bounded(-1.0, 0.0).ppp_mean() - 1.718281828459045).abs() < 1e-15);
        assert!(Interval::new(1.0, Some(0.0)).is_err());
        assert!(ppp_interval_test(&[], &Interval::defaults()).is_err());
    }

    #[test]
    fn chi_square_single_bin() {
        let (s, dof, p) = poisson_chi_square(&[0, 0, 1], 0.5);
        assert_eq!((s, dof, p), (0.0, 0, 1.0));
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn laplace_targets() {
        assert_eq!(laplace_target(&TestFunction::zero()).unwrap(), 1.0);
        // A steep ramp on (1, 2) approaches the void probability of (1, ∞).
        let steep = TestFunction::ramp(1.0, 2.0, 60.0).unwrap();
        let void = (-(-1f64).exp()).exp();
        let t = laplace_target(&steep).unwrap();
        assert!(t > void && t < void * 1.2);
        assert!(TestFunction::ramp(1.0, 0.0, 1.0).is_err());
        assert!(TestFunction::ramp(0.0, 1.0, -1.0).is_err());
    }
}
