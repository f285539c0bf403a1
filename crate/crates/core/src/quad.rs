//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 21-point Kronrod rule with embedded 10-point Gauss rule drives a global
//! bisection strategy (largest error first), in the spirit of QUADPACK's
//! `qag`. Semi-infinite ranges are mapped onto `(0, 1]`, and slowly decaying
//! oscillatory integrals are summed panel by panel with Wynn's epsilon
//! algorithm.

use crate::error::{Error, Result};

/// Requested accuracy for an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    /// Maximum number of subintervals kept by the bisection strategy.
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_intervals: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_734,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// One application of the 21-point Kronrod rule on `[a, b]`.
/// Returns `(value, error, resabs)`.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err, resabs)
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    integrate_points(f, &[a, b], tol)
}

/// Adaptive integral over `[points[0], points[last]]` with the interior
/// points used as initial breakpoints (kinks, peaks, scale changes).
pub fn integrate_points<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    assert!(points.len() >= 2, "need at least two points");
    let mut panels = Vec::with_capacity(64);
    let mut evaluations = 0;
    let mut roundoff_floor = 0.0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, error, resabs) = gk21(&mut f, w[0], w[1]);
        evaluations += 21;
        roundoff_floor += 50.0 * f64::EPSILON * resabs;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= tol.target(total) || err <= roundoff_floor {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations,
            });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                value: total,
                error: err,
                evaluations,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let worst = panels.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval collapsed to adjacent floats
            return Err(Error::Quadrature {
                value: total,
                error: err,
                evaluations,
            });
        }
        let (v1, e1, _) = gk21(&mut f, worst.a, mid);
        let (v2, e2, _) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        panels.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        panels.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

/// Integral of `f` over `[a, ∞)` through the map `x = a + (1 - u) / u`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integral of `f` over `[a, ∞)` after splitting at the given breakpoints;
/// the last segment `[points.last(), ∞)` is mapped to a finite range.
pub fn integrate_points_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    assert!(!points.is_empty());
    let last = *points.last().unwrap();
    let head = if points.len() >= 2 {
        integrate_points(&mut f, points, tol)?
    } else {
        Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        }
    };
    let tail = integrate_to_infinity(&mut f, last, tol)?;
    Ok(Estimate {
        value: head.value + tail.value,
        error: head.error + tail.error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// Wynn's epsilon algorithm over a sequence of partial sums.
#[derive(Debug, Default, Clone)]
pub struct EpsilonTable {
    // last computed diagonal of the epsilon table
    row: Vec<f64>,
    estimates: Vec<f64>,
}

impl EpsilonTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds the next partial sum; returns the current extrapolated limit.
    pub fn push(&mut self, s: f64) -> f64 {
        let mut new_row = Vec::with_capacity(self.row.len() + 1);
        new_row.push(s);
        // eps_{-1} = 0 implicitly
        for k in 0..self.row.len() {
            let prev_lower = if k == 0 { 0.0 } else { self.row[k - 1] };
            let diff = new_row[k] - self.row[k];
            let next = if diff.abs() < f64::MIN_POSITIVE * 1e10 {
                f64::INFINITY
            } else {
                prev_lower + 1.0 / diff
            };
            if !next.is_finite() {
                break;
            }
            new_row.push(next);
        }
        self.row = new_row;
        // even columns hold approximations to the limit
        let best_idx = if self.row.len() % 2 == 1 {
            self.row.len() - 1
        } else {
            self.row.len() - 2
        };
        let est = self.row[best_idx];
        self.estimates.push(est);
        est
    }

    /// Spread of the last three limit estimates.
    pub fn spread(&self) -> f64 {
        let n = self.estimates.len();
        if n < 3 {
            return f64::INFINITY;
        }
        let e = &self.estimates[n - 3..];
        (e[0] - e[2]).abs().max((e[1] - e[2]).abs())
    }
}

/// Sum of `∫ f` over consecutive panels `[a + k w, a + (k+1) w]`, `k ≥ 0`,
/// accelerated by the epsilon algorithm. Intended for Fourier-type integrals
/// whose amplitude decays monotonically, with `w` a half period.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    width: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate> {
    let mut partial = 0.0;
    let mut eps = EpsilonTable::new();
    let mut evaluations = 0;
    let mut err_sum = 0.0;
    let inner = Tolerance {
        abs: tol.abs * 0.1,
        rel: tol.rel * 0.1,
        max_intervals: tol.max_intervals,
    };
    let mut last = f64::NAN;
    let mut quiet = 0;
    for k in 0..max_panels {
        let lo = a + k as f64 * width;
        let hi = lo + width;
        let piece = integrate(&mut f, lo, hi, inner)?;
        evaluations += piece.evaluations;
        err_sum += piece.error;
        partial += piece.value;
        let est = eps.push(partial);
        let target = tol.target(est);
        // panels that contribute nothing are a sign the integrand has died off
        if piece.value.abs() <= 0.01 * target && k >= 2 {
            quiet += 1;
            if quiet >= 3 {
                return Ok(Estimate {
                    value: partial,
                    error: err_sum + piece.value.abs(),
                    evaluations,
                });
            }
        } else {
            quiet = 0;
        }
        if k >= 6 && eps.spread() <= 0.5 * target && (est - last).abs() <= 0.5 * target {
            return Ok(Estimate {
                value: est,
                error: eps.spread() + err_sum,
                evaluations,
            });
        }
        last = est;
    }
    Err(Error::Quadrature {
        value: last,
        error: eps.spread(),
        evaluations,
    })
}

/// Fixed Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        let mut f = |x: f64| x.powi(30) + 3.0 * x.powi(7) - x;
        let (v, _, _) = gk21(&mut f, -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        // gauss part alone integrates degree 19 exactly
        let mut g = |x: f64| x.powi(18);
        let (v, err, _) = gk21(&mut g, 0.0, 1.0);
        assert!((v - 1.0 / 19.0).abs() < 1e-15);
        assert!(err < 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let est =
            integrate_to_infinity(|x: f64| (-x * x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((est.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn panels_sum_dirichlet_integral() {
        // ∫_0^∞ sin x / x dx = π/2, amplitude decays only like 1/x
        let f = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
        let est = integrate_panels(
            f,
            0.0,
            std::f64::consts::PI,
            Tolerance::new(1e-10, 1e-10),
            500,
        )
        .unwrap();
        assert!(
            (est.value - std::f64::consts::FRAC_PI_2).abs() < 1e-9,
            "{}",
            est.value
        );
    }

    #[test]
    fn nonconvergence_reports_estimate() {
        let tol = Tolerance::new(1e-14, 1e-14).with_max_intervals(4);
        let err = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 3.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn gauss_legendre_weights() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((m - 2.0 / 23.0).abs() < 1e-14);
    }
}
