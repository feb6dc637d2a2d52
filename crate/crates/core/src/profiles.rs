//! The two profile functions of the construction.
//!
//! * [`MollifiedTriangle`]: an odd, half-period antiperiodic triangle wave of
//!   slope one, smoothed near its corners by convolution with a compactly
//!   supported `C^inf` mollifier. It is exactly linear on
//!   `[-(1/4 - delta), 1/4 - delta]` and is stored as its sine series
//!   `T(z) = sum_i a_i sin(2 (2i - 1) pi z)`.
//! * [`BumpProfile`]: a `C^inf` bump built from the `exp(-1/x)` smoothstep,
//!   equal to one on a plateau and zero outside a support interval.
//!
//! Both are immutable after construction.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::real::Real;

pub const DEFAULT_DELTA: f64 = 1.0 / 128.0;
pub const DEFAULT_I_MAX: usize = 8192;
pub const MIN_I_MAX: usize = 64;
pub const DEFAULT_BREAKPOINTS: [f64; 4] = [1.0 / 16.0, 1.0 / 8.0, 3.0 / 16.0, 7.0 / 32.0];

/// Samples used for the mollifier's Fourier transform (periodic trapezoid).
const MOLLIFIER_FFT_MIN: usize = 1 << 18;

/// Unnormalized mollifier `exp(-1/(1 - (s/delta)^2))` on `(-delta, delta)`.
fn mollifier<R: Real>(s: R, delta: R) -> R {
    let x = s / delta;
    let q = R::one() - x * x;
    if q <= R::zero() {
        R::zero()
    } else {
        (-q.recip()).exp()
    }
}

/// The unsmoothed triangle wave: slope one on `[-1/4, 1/4]`, odd, and
/// antiperiodic under `z -> z + 1/2`.
pub fn triangle_wave<R: Real>(z: R) -> R {
    let quarter = R::lit(0.25);
    let half = R::lit(0.5);
    let r = z - z.round();
    if r.abs() <= quarter {
        r
    } else {
        half.copysign(r) - r
    }
}

fn wrap_unit<R: Real>(z: R) -> R {
    let w = z - z.floor();
    if w >= R::one() {
        R::zero()
    } else {
        w
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(bound = "R: Real")]
pub struct MollifiedTriangle<R: Real> {
    delta: R,
    coeffs: Vec<R>,
}

impl<R: Real> MollifiedTriangle<R> {
    /// Builds the profile with mollifier half-width `delta` in `(0, 1/128]`
    /// and `i_max >= 64` sine coefficients.
    pub fn build(delta: R, i_max: usize) -> Result<Self> {
        if !(delta > R::zero() && delta <= R::lit(DEFAULT_DELTA)) {
            return Err(Error::Config(format!(
                "triangle mollifier width must lie in (0, 1/128], got {delta}"
            )));
        }
        Self::build_relaxed(delta, i_max)
    }

    /// Like [`MollifiedTriangle::build`] but accepts any `delta` in `(0, 1/4)`.
    /// Such profiles may fail [`validate_profiles`].
    pub fn build_relaxed(delta: R, i_max: usize) -> Result<Self> {
        if !(delta > R::zero() && delta < R::lit(0.25)) {
            return Err(Error::Config(format!(
                "triangle mollifier width must lie in (0, 1/4), got {delta}"
            )));
        }
        if i_max < MIN_I_MAX {
            return Err(Error::Config(format!(
                "sine series truncation must be at least {MIN_I_MAX}, got {i_max}"
            )));
        }
        let coeffs = triangle_coefficients(delta, i_max);
        Ok(Self { delta, coeffs })
    }

    pub fn delta(&self) -> R {
        self.delta
    }

    /// Half-width of the interval on which `T(z) = z` exactly.
    pub fn plateau(&self) -> R {
        R::lit(0.25) - self.delta
    }

    /// Sine coefficients; entry `i - 1` multiplies `sin(2 (2i - 1) pi z)`.
    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn i_max(&self) -> usize {
        self.coeffs.len()
    }

    /// Integer frequency `2i - 1` of the 1-based term `i`.
    pub fn frequency(i: usize) -> i64 {
        2 * i as i64 - 1
    }

    /// `T`, `T'` or `T''` from the truncated sine series; `z` is taken mod 1.
    pub fn eval(&self, z: R, order: u8) -> R {
        self.eval_truncated(z, order, self.coeffs.len())
    }

    /// Series evaluation using only the first `terms` coefficients.
    pub fn eval_truncated(&self, z: R, order: u8, terms: usize) -> R {
        assert!(order <= 2, "derivative order must be 0, 1 or 2");
        let z = wrap_unit(z);
        let two_pi = R::TAU();
        let mut acc = R::zero();
        // smallest terms first
        for i in (1..=terms.min(self.coeffs.len())).rev() {
            let w = two_pi * R::lit(Self::frequency(i) as f64);
            let a = self.coeffs[i - 1];
            let phase = w * z;
            acc = acc
                + match order {
                    0 => a * phase.sin(),
                    1 => a * w * phase.cos(),
                    _ => -a * w * w * phase.sin(),
                };
        }
        acc
    }

    /// `T(z)` by direct quadrature of the convolution of the triangle wave with
    /// the normalized mollifier. Independent of the stored coefficients.
    pub fn direct(&self, z: R) -> R {
        let delta = self.delta;
        let quarter = R::lit(0.25);
        let half = R::lit(0.5);
        // signed offset of z from the nearest corner at 1/4 + j/2; the
        // integrand kinks at s = offset
        let rel = wrap_unit(z - quarter);
        let kink = rel - (rel / half).round() * half;
        if kink.abs() >= delta {
            return triangle_wave(z);
        }
        let h = R::lit(1.0 / 64.0);
        let mass = tanh_sinh(|s| mollifier(s, delta), -delta, delta, h);
        let f = |s: R| triangle_wave(z - s) * mollifier(s, delta);
        let left = tanh_sinh(f, -delta, kink, h);
        let right = tanh_sinh(f, kink, delta, h);
        (left + right) / mass
    }

    /// Samples `T^(order)` on the `n`-point grid `j / n`, exactly at the nodes.
    pub fn sample(&self, grid: &mut crate::spectral::PeriodicGrid<R>, order: u8) -> Vec<R> {
        let two_pi = R::TAU();
        let terms = self.coeffs.iter().enumerate().map(|(k, &a)| {
            let q = Self::frequency(k + 1);
            let w = two_pi * R::lit(q as f64);
            (q, a, w)
        });
        match order {
            0 => grid.sample_sine_series(terms.map(|(q, a, _)| (q, a))),
            1 => grid.sample_cosine_series(terms.map(|(q, a, w)| (q, a * w))),
            2 => grid.sample_sine_series(terms.map(|(q, a, w)| (q, -a * w * w))),
            _ => panic!("derivative order must be 0, 1 or 2"),
        }
    }

    /// `int_0^1 T^2` and `int_0^1 T'^2` from the coefficients.
    pub fn norms(&self) -> (R, R) {
        let half = R::lit(0.5);
        let two_pi = R::TAU();
        self.coeffs
            .iter()
            .enumerate()
            .fold((R::zero(), R::zero()), |(l2, h1), (k, &a)| {
                let w = two_pi * R::lit(Self::frequency(k + 1) as f64);
                (l2 + half * a * a, h1 + half * a * a * w * w)
            })
    }
}

/// `a_i = b_i * rho_hat(2 pi (2i - 1))` where `b_i = 2 (-1)^(i-1) / (pi (2i-1))^2`
/// are the triangle wave's coefficients and `rho_hat` the mollifier's
/// normalized Fourier transform, computed by a periodic trapezoid rule (FFT).
fn triangle_coefficients<R: Real>(delta: R, i_max: usize) -> Vec<R> {
    let n = MOLLIFIER_FFT_MIN.max((8 * i_max).next_power_of_two());
    let inv_n = R::one() / R::from_usize_lossy(n);
    let mut buf: Vec<Complex<R>> = (0..n)
        .map(|j| {
            let s = R::from_usize_lossy(j) * inv_n;
            let s = if s >= R::lit(0.5) { s - R::one() } else { s };
            Complex::new(mollifier(s, delta), R::zero())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mass = buf[0].re;
    let pi2 = R::PI() * R::PI();
    (1..=i_max)
        .map(|i| {
            let q = 2 * i - 1;
            let sign = if i % 2 == 1 { R::one() } else { -R::one() };
            let q_r = R::from_usize_lossy(q);
            let b = R::lit(2.0) * sign / (pi2 * q_r * q_r);
            b * buf[q].re / mass
        })
        .collect()
}

/// Smoothstep `S(x) = e(x) / (e(x) + e(1 - x))` with `e(x) = exp(-1/x)` for
/// `x > 0`, together with its first two derivatives.
fn smoothstep<R: Real>(x: R, order: u8) -> R {
    if x <= R::zero() {
        return R::zero();
    }
    if x >= R::one() {
        return if order == 0 { R::one() } else { R::zero() };
    }
    let (p, p1, p2) = edge(x);
    let (q, q1, q2) = edge(R::one() - x);
    // d/dx e(1 - x) = -e'(1 - x), d2/dx2 e(1 - x) = e''(1 - x)
    let q1 = -q1;
    let s = p + q;
    match order {
        0 => p / s,
        1 => (p1 * q - p * q1) / (s * s),
        _ => {
            let num = p1 * q - p * q1;
            let num1 = p2 * q - p * q2;
            num1 / (s * s) - R::lit(2.0) * num * (p1 + q1) / (s * s * s)
        }
    }
}

/// `e(x) = exp(-1/x)` and its first two derivatives for `x > 0`.
fn edge<R: Real>(x: R) -> (R, R, R) {
    let inv = x.recip();
    let e = (-inv).exp();
    let inv2 = inv * inv;
    (e, e * inv2, e * (inv2 * inv2 - R::lit(2.0) * inv2 * inv))
}

/// Smooth bump: rises on `[z0, z1]`, equals one on `[z1, z2]`, falls on
/// `[z2, z3]`, zero elsewhere on the unit circle.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(bound = "R: Real")]
pub struct BumpProfile<R: Real> {
    breakpoints: [R; 4],
}

impl<R: Real> BumpProfile<R> {
    pub fn new(breakpoints: [R; 4]) -> Result<Self> {
        let ok = breakpoints.iter().all(|b| b.is_finite())
            && breakpoints.windows(2).all(|w| w[0] < w[1])
            && breakpoints[3] - breakpoints[0] < R::one();
        if !ok {
            return Err(Error::Config(format!(
                "bump breakpoints must be strictly increasing within one period, got {breakpoints:?}"
            )));
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> [R; 4] {
        self.breakpoints
    }

    /// `phi`, `phi'` or `phi''` at `z` (taken mod 1 relative to `z0`).
    pub fn eval(&self, z: R, order: u8) -> R {
        assert!(order <= 2, "derivative order must be 0, 1 or 2");
        let [z0, z1, z2, z3] = self.breakpoints;
        let z = z0 + wrap_unit(z - z0);
        if z <= z0 || z >= z3 {
            return R::zero();
        }
        if z < z1 {
            let w = z1 - z0;
            let s = smoothstep((z - z0) / w, order);
            return s / w.powi(order as i32);
        }
        if z <= z2 {
            return if order == 0 { R::one() } else { R::zero() };
        }
        let w = z3 - z2;
        let s = smoothstep((z3 - z) / w, order);
        let sign = if order == 1 { -R::one() } else { R::one() };
        sign * s / w.powi(order as i32)
    }

    /// Samples `phi^(order)` at the grid points `j / n`.
    pub fn sample(&self, n: usize, order: u8) -> Vec<R> {
        let inv = R::one() / R::from_usize_lossy(n);
        (0..n)
            .map(|j| self.eval(R::from_usize_lossy(j) * inv, order))
            .collect()
    }
}

impl<R: Real> Default for BumpProfile<R> {
    fn default() -> Self {
        Self::new(DEFAULT_BREAKPOINTS.map(R::lit)).expect("default breakpoints are valid")
    }
}

/// Outcome of one invariant check; `margin` is tolerance minus measurement,
/// positive when the check passes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub margin: f64,
}

impl InvariantCheck {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: measured.is_finite() && measured <= tolerance,
            measured,
            tolerance,
            margin: tolerance - measured,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProfileReport {
    pub checks: Vec<InvariantCheck>,
}

impl ProfileReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `Err` naming every violated invariant.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Validation(self.failures().join(", ")))
        }
    }
}

/// Bound on `sup_{i <= 64} |a_i| i^8` for the default width (measured 3.4e8).
pub const DECAY_BOUND_I8: f64 = 1e9;

pub const CHECK_LINEAR: &str = "triangle T(z) = z on plateau";
pub const CHECK_SLOPE: &str = "triangle T'(z) = 1 on plateau";
pub const CHECK_CURVATURE: &str = "triangle T''(z) = 0 on plateau";
pub const CHECK_ODD: &str = "triangle odd";
pub const CHECK_ANTIPERIODIC: &str = "triangle antiperiodic";
pub const CHECK_DECAY_HEAD: &str = "triangle |a_i| i^8 bounded for i <= 64";
pub const CHECK_DECAY_TAIL: &str = "triangle |a_i| i^8 eventually decreasing";
pub const CHECK_SERIES: &str = "triangle series matches pointwise";
pub const CHECK_BUMP_RANGE: &str = "bump 0 <= phi <= 1";
pub const CHECK_BUMP_PLATEAU: &str = "bump [z1,z2] contains [1/8,3/16]";
pub const CHECK_BUMP_SUPPORT: &str = "bump (z0,z3) inside (0,1/4)";
pub const CHECK_BUMP_FLAT: &str = "bump derivatives vanish off the transitions";
pub const CHECK_BUMP_CONTINUITY: &str = "bump C2 at breakpoints";
pub const CHECK_SUPPORT_IN_PLATEAU: &str = "support inside plateau";

/// Checks every structural property of the two profiles.
pub fn validate_profiles<R: Real>(
    tri: &MollifiedTriangle<R>,
    phi: &BumpProfile<R>,
) -> ProfileReport {
    let mut checks = Vec::new();
    let f = |x: R| x.as_f64();
    let p = tri.plateau();

    let plateau_pts: Vec<R> = (0..=400)
        .map(|k| p * (R::lit(k as f64 / 200.0) - R::one()))
        .collect();
    let mut lin: f64 = 0.0;
    let mut slope: f64 = 0.0;
    let mut curv: f64 = 0.0;
    for &z in &plateau_pts {
        lin = lin.max(f((tri.eval(z, 0) - z).abs()));
        slope = slope.max(f((tri.eval(z, 1) - R::one()).abs()));
        curv = curv.max(f(tri.eval(z, 2).abs()));
    }
    checks.push(InvariantCheck::at_most(CHECK_LINEAR, lin, 1e-12));
    checks.push(InvariantCheck::at_most(CHECK_SLOPE, slope, 1e-10));
    checks.push(InvariantCheck::at_most(CHECK_CURVATURE, curv, 1e-10));

    let circle: Vec<R> = (0..512)
        .map(|k| R::lit((k as f64 + 0.37) / 512.0))
        .collect();
    let mut odd: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for &z in &circle {
        let t = tri.eval(z, 0);
        odd = odd.max(f((tri.eval(-z, 0) + t).abs()));
        anti = anti.max(f((tri.eval(z + R::lit(0.5), 0) + t).abs()));
    }
    checks.push(InvariantCheck::at_most(CHECK_ODD, odd, 1e-13));
    checks.push(InvariantCheck::at_most(CHECK_ANTIPERIODIC, anti, 1e-12));

    let weighted: Vec<f64> = tri
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| f(a).abs() * ((k + 1) as f64).powi(8))
        .collect();
    let head_max = weighted.iter().take(64).cloned().fold(0.0, f64::max);
    checks.push(InvariantCheck::at_most(
        CHECK_DECAY_HEAD,
        head_max,
        DECAY_BOUND_I8,
    ));
    let mid = weighted.len() / 2;
    let first = weighted[..mid].iter().cloned().fold(0.0, f64::max);
    let second = weighted[mid..].iter().cloned().fold(0.0, f64::max);
    checks.push(InvariantCheck::at_most(
        CHECK_DECAY_TAIL,
        second / first,
        1.0,
    ));

    let mut series_gap: f64 = 0.0;
    for z in series_sample_points(tri.delta()) {
        series_gap = series_gap.max(f((tri.eval(z, 0) - tri.direct(z)).abs()));
    }
    checks.push(InvariantCheck::at_most(CHECK_SERIES, series_gap, 1e-12));

    let [z0, z1, z2, z3] = phi.breakpoints();
    let bump_pts: Vec<R> = (0..4096).map(|k| R::lit(k as f64 / 4096.0)).collect();
    let mut range: f64 = 0.0;
    let mut flat: f64 = 0.0;
    for &z in &bump_pts {
        let v = phi.eval(z, 0);
        range = range.max(f(-v)).max(f(v - R::one()));
        let on_transition = (z > z0 && z < z1) || (z > z2 && z < z3);
        if !on_transition {
            flat = flat
                .max(f(phi.eval(z, 1).abs()))
                .max(f(phi.eval(z, 2).abs()));
        }
    }
    checks.push(InvariantCheck::at_most(CHECK_BUMP_RANGE, range, 0.0));
    let plateau_excess = f(z1 - R::lit(0.125)).max(f(R::lit(0.1875) - z2));
    checks.push(InvariantCheck::at_most(
        CHECK_BUMP_PLATEAU,
        plateau_excess,
        0.0,
    ));
    let support_excess = f(-z0).max(f(z3 - R::lit(0.25)));
    checks.push(InvariantCheck::at_most(
        CHECK_BUMP_SUPPORT,
        support_excess,
        0.0,
    ));
    checks.push(InvariantCheck::at_most(CHECK_BUMP_FLAT, flat, 0.0));

    let eps = R::lit(1e-7);
    let mut jump: f64 = 0.0;
    for b in phi.breakpoints() {
        for order in 0..=2u8 {
            let l = phi.eval(b - eps, order);
            let r = phi.eval(b + eps, order);
            let scale = R::one().max(l.abs()).max(r.abs());
            jump = jump.max(f((l - r).abs() / scale));
        }
    }
    checks.push(InvariantCheck::at_most(CHECK_BUMP_CONTINUITY, jump, 1e-6));

    let overlap = f(z3 - p).max(f(-p - z0));
    checks.push(InvariantCheck::at_most(
        CHECK_SUPPORT_IN_PLATEAU,
        overlap,
        0.0,
    ));

    ProfileReport { checks }
}

/// Uniform points on the circle plus dense clusters around both corners.
fn series_sample_points<R: Real>(delta: R) -> Vec<R> {
    let mut pts: Vec<R> = (0..1024)
        .map(|k| R::lit((k as f64 + 0.5) / 1024.0))
        .collect();
    for corner in [0.25, 0.75] {
        for k in 0..=128 {
            let off = delta * R::lit(1.5 * (k as f64 / 64.0 - 1.0));
            pts.push(R::lit(corner) + off);
        }
    }
    pts
}

/// Reproducibility stamp of both profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfilesDocument {
    pub delta: f64,
    pub plateau: f64,
    pub i_max: usize,
    pub breakpoints: [f64; 4],
    pub coefficients: Vec<f64>,
}

impl ProfilesDocument {
    pub fn new<R: Real>(tri: &MollifiedTriangle<R>, phi: &BumpProfile<R>) -> Self {
        Self {
            delta: tri.delta().as_f64(),
            plateau: tri.plateau().as_f64(),
            i_max: tri.i_max(),
            breakpoints: phi.breakpoints().map(|b| b.as_f64()),
            coefficients: tri.coeffs().iter().map(|a| a.as_f64()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_triangle() -> MollifiedTriangle<f64> {
        MollifiedTriangle::build(DEFAULT_DELTA, DEFAULT_I_MAX).unwrap()
    }

    #[test]
    fn plateau_values_are_exact() {
        let t = default_triangle();
        assert!((t.eval(0.1, 0) - 0.1).abs() < 1e-13);
        assert!((t.eval(0.35, 0) - 0.15).abs() < 1e-13);
        assert!(t.eval(0.0, 0).abs() < 1e-15);
        assert!((t.eval(3.0 / 16.0, 1) - 1.0).abs() < 1e-10);
        assert_eq!(t.direct(0.1), 0.1);
    }

    #[test]
    fn slope_vanishes_at_quarter() {
        let t = default_triangle();
        assert!(t.eval(0.25, 1).abs() < 1e-10);
        // finite-difference oracle on the series
        let h = 1e-6;
        let fd = (t.eval(0.25 + h, 0) - t.eval(0.25 - h, 0)) / (2.0 * h);
        assert!(fd.abs() < 1e-7, "{fd}");
    }

    #[test]
    fn first_coefficient_is_damped_triangle_coefficient() {
        let t = default_triangle();
        let raw = 2.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let a1 = t.coeffs()[0];
        assert!(a1 < raw && a1 > 0.99 * raw, "{a1} vs {raw}");
        assert!(t.coeffs()[1] < 0.0);
    }

    #[test]
    fn delta_out_of_range_is_rejected() {
        assert!(MollifiedTriangle::<f64>::build(1.0 / 16.0, 64).is_err());
        assert!(MollifiedTriangle::<f64>::build(0.0, 64).is_err());
        assert!(MollifiedTriangle::<f64>::build(DEFAULT_DELTA, 32).is_err());
        assert!(MollifiedTriangle::<f64>::build_relaxed(1.0 / 16.0, 64).is_ok());
    }

    #[test]
    fn bump_values() {
        let phi = BumpProfile::<f64>::default();
        assert_eq!(phi.eval(5.0 / 32.0, 0), 1.0);
        assert_eq!(phi.eval(0.5, 0), 0.0);
        let [z0, z1, ..] = phi.breakpoints();
        let z = 0.5 * (z0 + z1);
        let h = 1e-7;
        let fd = (phi.eval(z + h, 0) - phi.eval(z - h, 0)) / (2.0 * h);
        assert!((fd - phi.eval(z, 1)).abs() < 1e-6, "{fd}");
        let fd2 = (phi.eval(z + h, 1) - phi.eval(z - h, 1)) / (2.0 * h);
        assert!((fd2 - phi.eval(z, 2)).abs() < 1e-4 * phi.eval(z, 2).abs().max(1.0));
    }

    #[test]
    fn bump_fall_derivatives_match_finite_differences() {
        let phi = BumpProfile::<f64>::default();
        let h = 1e-6;
        for z in [0.19, 0.2, 0.205, 0.21, 0.215] {
            let fd = (phi.eval(z + h, 0) - phi.eval(z - h, 0)) / (2.0 * h);
            assert!((fd - phi.eval(z, 1)).abs() < 1e-5 * phi.eval(z, 1).abs().max(1.0));
            let fd2 = (phi.eval(z + h, 1) - phi.eval(z - h, 1)) / (2.0 * h);
            assert!((fd2 - phi.eval(z, 2)).abs() < 1e-4 * phi.eval(z, 2).abs().max(1.0));
        }
    }

    #[test]
    fn bump_rejects_unordered_breakpoints() {
        assert!(BumpProfile::new([0.1, 0.05, 0.2, 0.22]).is_err());
    }

    #[test]
    fn default_profiles_validate() {
        let report = validate_profiles(&default_triangle(), &BumpProfile::default());
        for c in &report.checks {
            assert!(
                c.passed,
                "{} measured {} tol {}",
                c.name, c.measured, c.tolerance
            );
        }
    }

    #[test]
    fn wide_mollifier_breaks_support_condition() {
        let t = MollifiedTriangle::build_relaxed(1.0 / 16.0, DEFAULT_I_MAX).unwrap();
        let phi =
            BumpProfile::new([1.0 / 16.0, 1.0 / 8.0, 3.0 / 16.0, 0.25 - 1.0 / 128.0]).unwrap();
        let report = validate_profiles(&t, &phi);
        assert!(report.failures().contains(&CHECK_SUPPORT_IN_PLATEAU));
        assert!(report.into_result().is_err());
    }

    #[test]
    fn narrow_plateau_is_flagged() {
        let phi = BumpProfile::new([1.0 / 16.0, 0.14, 3.0 / 16.0, 7.0 / 32.0]).unwrap();
        let report = validate_profiles(&default_triangle(), &phi);
        assert_eq!(report.failures(), vec![CHECK_BUMP_PLATEAU]);
    }

    #[test]
    fn serializes_round_trip() {
        let t = MollifiedTriangle::<f64>::build(DEFAULT_DELTA, 64).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: MollifiedTriangle<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        let doc = ProfilesDocument::new(&t, &BumpProfile::default());
        assert_eq!(doc.coefficients.len(), 64);
    }
}
