//! Closed-form objects of the construction.
//!
//! Everything lives on the unit torus. The `x2` direction is written in the
//! cell variable `y = M x2 mod 1` with `M = nu^(-1/2) = 2^n`, in which the
//! shear dynamics is independent of `nu`. The `x1` wavenumber is
//! `kappa = 2 pi m` with `m = round(nu^(-alpha))`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::diagnostics::FlowNorms;
use crate::error::{Error, Result};
use crate::profiles::{BumpProfile, MollifiedTriangle};
use crate::real::Real;
use crate::solver::resolution_policy;
use crate::spectral::PeriodicGrid;

/// Largest level accepted; `nu = 2^-60` is still far from underflow and
/// `m` still fits comfortably in a `u64`.
pub const MAX_LEVEL: u32 = 30;

/// Most profiles kept per case for the difference record.
pub const MAX_SNAPSHOTS: usize = 1024;

/// `exp(-x)` is exactly zero in double precision beyond this argument.
const EXP_CUTOFF: f64 = 745.0;

/// Optional departures from the resolution policy and ablation switches.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct CaseOverrides {
    pub n_y: Option<usize>,
    pub dt: Option<f64>,
    /// Multiplies the advecting shear; `0` removes the stretching.
    pub coupling: Option<f64>,
    /// Initial value of the ansatz amplitude `a(0)`.
    pub a0: Option<f64>,
}

/// One experiment instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct CaseConfig<R: Real> {
    pub n: u32,
    pub alpha: R,
    pub nu: R,
    /// Number of cells `M = 2^n` in `x2`.
    pub cells: u64,
    /// Integer `x1` mode `m`.
    pub mode: u64,
    pub kappa: R,
    pub c0: R,
    pub t_star: R,
    pub n_y: usize,
    pub dt: R,
    pub steps: usize,
    pub coupling: R,
    pub a0: R,
    pub warnings: Vec<String>,
}

impl<R: Real> CaseConfig<R> {
    pub fn new(n: u32, alpha: R) -> Result<Self> {
        Self::with_overrides(n, alpha, &CaseOverrides::default())
    }

    pub fn with_overrides(n: u32, alpha: R, overrides: &CaseOverrides) -> Result<Self> {
        if !(alpha > R::zero() && alpha < R::lit(0.75)) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 3/4), got {alpha}"
            )));
        }
        if n == 0 || n > MAX_LEVEL {
            return Err(Error::Config(format!(
                "level n must lie in 1..={MAX_LEVEL}, got {n}"
            )));
        }
        let cells = 1u64 << n;
        let nu = R::lit(2f64.powi(-2 * n as i32));
        let mode = R::lit(2f64).powf(R::lit(2.0 * n as f64) * alpha).round();
        let mode = mode.to_u64().filter(|&m| m >= 1).ok_or_else(|| {
            Error::Config(format!("x1 mode out of range for n = {n}, alpha = {alpha}"))
        })?;
        let kappa = R::TAU() * R::lit(mode as f64);
        let t_star = nu.powf(R::lit(2.0 / 3.0) * alpha);
        let (policy_ny, policy_dt) = resolution_policy(kappa, t_star);

        let mut warnings = Vec::new();
        let n_y = match overrides.n_y {
            Some(v) => {
                if v < 2 || !v.is_power_of_two() {
                    return Err(Error::Config(format!(
                        "n_y must be a power of two >= 2, got {v}"
                    )));
                }
                if v < policy_ny {
                    warnings.push(format!(
                        "n_y = {v} is below the resolution policy ({policy_ny})"
                    ));
                }
                v
            }
            None => policy_ny,
        };
        let dt_target = match overrides.dt {
            Some(v) => {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("dt must be positive, got {v}")));
                }
                if R::lit(v) > policy_dt {
                    warnings.push(format!(
                        "dt = {v:e} exceeds the resolution policy ({:e})",
                        policy_dt.as_f64()
                    ));
                }
                R::lit(v)
            }
            None => policy_dt,
        };
        let steps = (t_star / dt_target).ceil().to_usize().unwrap_or(1).max(1);
        // a multiple of the snapshot stride, so kept profiles are evenly spaced
        let stride = steps.div_ceil(MAX_SNAPSHOTS);
        let steps = steps.div_ceil(stride) * stride;
        let dt = t_star / R::from_usize_lossy(steps);
        let coupling = R::lit(overrides.coupling.unwrap_or(1.0));
        if coupling != R::one() {
            warnings.push(format!("advective coupling scaled by {coupling}"));
        }
        let a0 = R::lit(overrides.a0.unwrap_or(0.0));
        if a0 != R::zero() {
            warnings.push(format!("ansatz amplitude starts at a(0) = {a0}"));
        }
        Ok(Self {
            n,
            alpha,
            nu,
            cells,
            mode,
            kappa,
            c0: R::lit(4.0) * R::PI() * R::PI(),
            t_star,
            n_y,
            dt,
            steps,
            coupling,
            a0,
            warnings,
        })
    }

    /// `nu^(-alpha)` before rounding.
    pub fn mode_exact(&self) -> R {
        self.nu.powf(-self.alpha)
    }

    pub fn time(&self, step: usize) -> R {
        self.dt * R::from_usize_lossy(step)
    }

    pub fn amplitude_law(&self) -> AmplitudeLaw<R> {
        AmplitudeLaw {
            a0: self.a0,
            nu: self.nu,
            kappa: self.kappa,
            c0: self.c0,
        }
    }
}

/// Shear tilt `tau(t) = (1 - exp(-c0 t)) / c0`.
pub fn tilt<R: Real>(t: R, c0: R) -> R {
    R::one_minus_exp_neg(c0 * t) / c0
}

/// `a(t)` solving `a' = nu kappa^2 + kappa^2 tau(t)^2`, `a(0) = a0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct AmplitudeLaw<R: Real> {
    pub a0: R,
    pub nu: R,
    pub kappa: R,
    pub c0: R,
}

impl<R: Real> AmplitudeLaw<R> {
    pub fn rate(&self, t: R) -> R {
        let tau = tilt(t, self.c0);
        let k2 = self.kappa * self.kappa;
        self.nu * k2 + k2 * tau * tau
    }

    /// `a0 + nu kappa^2 t + (kappa^2 / c0^3) B(c0 t)` with
    /// `B(x) = x - 2 (1 - e^-x) + (1 - e^-2x) / 2`.
    pub fn value(&self, t: R) -> R {
        let k2 = self.kappa * self.kappa;
        let c0 = self.c0;
        self.a0 + self.nu * k2 * t + k2 / (c0 * c0 * c0) * stretch_integral(c0 * t)
    }

    /// Small-time form `a0 + nu kappa^2 t + kappa^2 t^3 / 3`.
    pub fn small_time(&self, t: R) -> R {
        let k2 = self.kappa * self.kappa;
        self.a0 + self.nu * k2 * t + k2 * t * t * t / R::lit(3.0)
    }
}

/// `B(x) = x - 2 (1 - e^-x) + (1 - e^-2x) / 2 = int_0^x (1 - e^-s)^2 ds`,
/// by its Taylor series below `x = 0.1` where the closed form cancels.
fn stretch_integral<R: Real>(x: R) -> R {
    if x < R::lit(0.1) {
        // coefficient of x^k is (-1)^k (2 - 2^(k-1)) / k!
        let mut sum = R::zero();
        let mut pow = x * x;
        let mut fact = R::lit(2.0);
        for k in 3..=24 {
            pow = pow * x;
            fact = fact * R::lit(k as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * (2.0 - 2f64.powi(k - 1));
            sum = sum + R::lit(c) * pow / fact;
        }
        sum
    } else {
        x - R::lit(2.0) * R::one_minus_exp_neg(x)
            + R::lit(0.5) * R::one_minus_exp_neg(R::lit(2.0) * x)
    }
}

/// Decay rate `(2 pi (2i - 1))^2` of the shear's sine mode `i` (1-based).
pub fn shear_rate<R: Real>(i: usize) -> R {
    let w = R::TAU() * R::lit(MollifiedTriangle::<R>::frequency(i) as f64);
    w * w
}

/// The large-scale shear `U(t, y) = sum_i a_i sin(2 pi (2i-1) y) exp(-(2 pi (2i-1))^2 t)`.
pub fn large_scale<R: Real>(t: R, y: R, tri: &MollifiedTriangle<R>) -> R {
    let mut acc = R::zero();
    for (k, &a) in tri.coeffs().iter().enumerate().rev() {
        let i = k + 1;
        let lam = shear_rate::<R>(i);
        if lam * t > R::lit(EXP_CUTOFF) {
            continue;
        }
        let w = R::TAU() * R::lit(MollifiedTriangle::<R>::frequency(i) as f64);
        acc = acc + a * (w * y).sin() * (-lam * t).exp();
    }
    acc
}

/// The frozen shear `T(y) exp(-c0 t)`.
pub fn large_scale_frozen<R: Real>(t: R, y: R, tri: &MollifiedTriangle<R>) -> R {
    let c0 = R::lit(4.0) * R::PI() * R::PI();
    tri.eval(y, 0) * (-c0 * t).exp()
}

/// Everything needed to evaluate the tilted-wave ansatz and its residual.
#[derive(Clone, Copy, Debug)]
pub struct Ansatz<'a, R: Real> {
    pub cfg: &'a CaseConfig<R>,
    pub tri: &'a MollifiedTriangle<R>,
    pub phi: &'a BumpProfile<R>,
    pub law: AmplitudeLaw<R>,
}

impl<'a, R: Real> Ansatz<'a, R> {
    pub fn new(
        cfg: &'a CaseConfig<R>,
        tri: &'a MollifiedTriangle<R>,
        phi: &'a BumpProfile<R>,
    ) -> Self {
        Self {
            cfg,
            tri,
            phi,
            law: cfg.amplitude_law(),
        }
    }

    /// `e^{-a(t)} sin(kappa (x1 - tau(t) T(y))) phi(y)`.
    pub fn value(&self, t: R, x1: R, y: R) -> R {
        let tau = tilt(t, self.cfg.c0);
        let theta = self.cfg.kappa * (x1 - tau * self.tri.eval(y, 0));
        (-self.law.value(t)).exp() * theta.sin() * self.phi.eval(y, 0)
    }

    /// Complex profile `vbar` with `ubar^S = Im[e^{i kappa x1} vbar(t, y)]`.
    pub fn profile(&self, t: R, y: R) -> Complex<R> {
        self.profile_from(t, self.tri.eval(y, 0), self.phi.eval(y, 0))
    }

    /// [`Ansatz::profile`] given `T(y)` and `phi(y)`.
    pub fn profile_from(&self, t: R, t_val: R, phi_val: R) -> Complex<R> {
        let tau = tilt(t, self.cfg.c0);
        let amp = (-self.law.value(t)).exp() * phi_val;
        Complex::from_polar(amp, -self.cfg.kappa * tau * t_val)
    }

    /// The residual `g` (with its `nu^-1` factor): the ansatz solves
    /// `d_t u + ubar^L d_x1 u = nu Lap u - nu g`.
    pub fn residual_g(&self, t: R, x1: R, y: R) -> R {
        let tau = tilt(t, self.cfg.c0);
        let kappa = self.cfg.kappa;
        let theta = kappa * (x1 - tau * self.tri.eval(y, 0));
        let amp = (-self.law.value(t)).exp() / self.cfg.nu;
        amp * (-R::lit(2.0) * kappa * tau * theta.cos() * self.phi.eval(y, 1)
            + theta.sin() * self.phi.eval(y, 2))
    }

    /// Complex profile of `nu g`, `e^{-a} e^{-i kappa tau T} (phi'' - 2 i kappa tau phi')`.
    pub fn residual_profile_from(&self, t: R, t_val: R, dphi: R, d2phi: R) -> Complex<R> {
        let tau = tilt(t, self.cfg.c0);
        let kappa = self.cfg.kappa;
        let rot = Complex::from_polar((-self.law.value(t)).exp(), -kappa * tau * t_val);
        rot * Complex::new(d2phi, -R::lit(2.0) * kappa * tau * dphi)
    }
}

/// The heat flow of the same initial data, by exact Fourier multipliers.
///
/// The shear part decays mode by mode as `exp(-(2 pi (2i-1))^2 t)` in cell
/// units; the blob's profile mode `k` decays as `exp(-((2 pi k)^2 + nu kappa^2) t)`.
#[derive(Clone, Debug)]
pub struct HeatFlow<R: Real> {
    /// `(|a_i|^2 / 2, rate)` for the shear.
    shear: Vec<(R, R)>,
    /// `(|phi_k|^2, (2 pi k)^2, rate)` for the blob profile on the case grid.
    blob: Vec<(R, R, R)>,
    nu_kappa2: R,
}

impl<R: Real> HeatFlow<R> {
    pub fn new(cfg: &CaseConfig<R>, tri: &MollifiedTriangle<R>, phi: &BumpProfile<R>) -> Self {
        let half = R::lit(0.5);
        let shear = tri
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &a)| (half * a * a, shear_rate::<R>(k + 1)))
            .collect();
        let mut grid = PeriodicGrid::new(cfg.n_y);
        let mut buf: Vec<Complex<R>> = phi
            .sample(cfg.n_y, 0)
            .into_iter()
            .map(|v| Complex::new(v, R::zero()))
            .collect();
        grid.analyze(&mut buf);
        let nu_kappa2 = cfg.nu * cfg.kappa * cfg.kappa;
        let blob = buf
            .iter()
            .zip(grid.wavenumbers())
            .map(|(c, &k)| (c.norm_sqr(), k * k, k * k + nu_kappa2))
            .collect();
        Self {
            shear,
            blob,
            nu_kappa2,
        }
    }

    /// The five norms at time `t`.
    pub fn norms(&self, t: R) -> FlowNorms<R> {
        let two = R::lit(2.0);
        let half = R::lit(0.5);
        let mut out = FlowNorms::default();
        for &(w, lam) in &self.shear {
            let x = two * lam * t;
            if x > R::lit(EXP_CUTOFF) {
                continue;
            }
            let d = (-x).exp();
            out.energy_l = out.energy_l + w * d;
            out.grad_l = out.grad_l + w * lam * d;
        }
        for &(p, k2, lam) in &self.blob {
            let x = two * lam * t;
            if x > R::lit(EXP_CUTOFF) {
                continue;
            }
            let d = half * p * (-x).exp();
            out.energy_s = out.energy_s + d;
            out.grad_s_x1 = out.grad_s_x1 + self.nu_kappa2 * d;
            out.grad_s_x2 = out.grad_s_x2 + k2 * d;
        }
        out
    }

    /// `int_0^t` of each of the five norms, in closed form.
    pub fn integrals(&self, t: R) -> FlowNorms<R> {
        let two = R::lit(2.0);
        let half = R::lit(0.5);
        let mut out = FlowNorms::default();
        // int_0^t e^{-2 lam s} ds = (1 - e^{-2 lam t}) / (2 lam)
        let window = |lam: R| {
            if lam == R::zero() {
                t
            } else {
                R::one_minus_exp_neg(two * lam * t) / (two * lam)
            }
        };
        for &(w, lam) in &self.shear {
            let s = window(lam);
            out.energy_l = out.energy_l + w * s;
            out.grad_l = out.grad_l + w * lam * s;
        }
        for &(p, k2, lam) in &self.blob {
            let s = half * p * window(lam);
            out.energy_s = out.energy_s + s;
            out.grad_s_x1 = out.grad_s_x1 + self.nu_kappa2 * s;
            out.grad_s_x2 = out.grad_s_x2 + k2 * s;
        }
        out
    }

    /// `nu int_0^t |grad u^heat|^2`.
    pub fn dissipation(&self, t: R) -> R {
        self.integrals(t).dissipation()
    }
}

/// Unweighted gradient norms `(|grad u^L_heat|^2, |grad u^S_heat|^2)` at `t`.
pub fn heat_norms<R: Real>(
    t: R,
    cfg: &CaseConfig<R>,
    tri: &MollifiedTriangle<R>,
    phi: &BumpProfile<R>,
) -> (R, R) {
    let n = HeatFlow::new(cfg, tri, phi).norms(t);
    (n.grad_l / cfg.nu, (n.grad_s_x1 + n.grad_s_x2) / cfg.nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{DEFAULT_DELTA, DEFAULT_I_MAX};

    fn triangle() -> MollifiedTriangle<f64> {
        MollifiedTriangle::build(DEFAULT_DELTA, DEFAULT_I_MAX).unwrap()
    }

    #[test]
    fn case_config_invariants() {
        for n in [2, 3, 5, 8, 12, 16, 20, 24] {
            for alpha in [0.1, 0.5, 0.7] {
                let c = CaseConfig::<f64>::new(n, alpha).unwrap();
                assert_eq!(c.nu * (c.cells as f64).powi(2), 1.0);
                assert!((c.mode as f64 - c.mode_exact()).abs() <= 0.5);
                assert!(c.n_y.is_power_of_two());
                assert!(c.dt <= (c.t_star / 1000.0).min(0.1 / c.kappa) * (1.0 + 1e-12));
                assert!((c.dt * c.steps as f64 - c.t_star).abs() < 1e-14 * c.t_star);
                assert_eq!(c.steps % c.steps.div_ceil(MAX_SNAPSHOTS), 0);
            }
        }
        assert!(CaseConfig::<f64>::new(4, 0.8).is_err());
        assert!(CaseConfig::<f64>::new(4, 0.0).is_err());
        assert!(CaseConfig::<f64>::new(0, 0.5).is_err());
    }

    #[test]
    fn overrides_warn() {
        let o = CaseOverrides {
            dt: Some(1e-2),
            ..Default::default()
        };
        let c = CaseConfig::<f64>::with_overrides(4, 0.5, &o).unwrap();
        assert_eq!(c.warnings.len(), 1);
        assert!(c.warnings[0].contains("dt"));
    }

    #[test]
    fn large_scale_values() {
        let t = triangle();
        assert!((large_scale(0.0, 0.1, &t) - 0.1).abs() < 1e-13);
        assert_eq!(large_scale(100.0, 0.3, &t), 0.0);
        assert!((large_scale_frozen(0.0, 0.1, &t) - 0.1).abs() < 1e-13);
        let tq = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
        assert!((large_scale_frozen(tq, 0.1, &t) - 0.1 / std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn large_scale_series_converged_at_small_time() {
        // direct summation with the first half of the terms agrees
        let t = triangle();
        let full = large_scale(0.01, 0.1, &t);
        let coeffs = &t.coeffs()[..t.i_max() / 2];
        let half: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let q = (2 * k + 1) as f64;
                let w = std::f64::consts::TAU * q;
                a * (w * 0.1).sin() * (-w * w * 0.01).exp()
            })
            .sum();
        assert!((full - half).abs() < 1e-12);
    }

    #[test]
    fn stretch_integral_branches_agree() {
        for x in [0.05f64, 0.0999, 0.1, 0.1001, 0.2] {
            let closed = x - 2.0 * (1.0 - (-x).exp()) + 0.5 * (1.0 - (-2.0 * x).exp());
            let series = stretch_integral(x);
            assert!((closed - series).abs() < 1e-15, "{x}: {closed} {series}");
        }
    }

    fn rk4_amplitude(law: &AmplitudeLaw<f64>, t_end: f64, steps: usize) -> f64 {
        let h = t_end / steps as f64;
        let mut a = law.a0;
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = law.rate(t);
            let k2 = law.rate(t + 0.5 * h);
            let k4 = law.rate(t + h);
            a += h / 6.0 * (k1 + 4.0 * k2 + k4);
        }
        a
    }

    #[test]
    fn amplitude_matches_ode_integration() {
        let c = CaseConfig::<f64>::new(4, 0.5).unwrap();
        let law = c.amplitude_law();
        assert_eq!(law.value(0.0), law.a0);
        let oracle = rk4_amplitude(&law, c.t_star, 20_000);
        assert!(
            (law.value(c.t_star) - oracle).abs() < 1e-10,
            "{} {}",
            law.value(c.t_star),
            oracle
        );
    }

    #[test]
    fn amplitude_small_time_ratio() {
        let c = CaseConfig::<f64>::new(6, 0.5).unwrap();
        let law = c.amplitude_law();
        let mut prev = f64::INFINITY;
        for t in [1e-3, 1e-4, 1e-5, 1e-6] {
            let dev = ((law.value(t) - law.a0) / (law.small_time(t) - law.a0) - 1.0).abs();
            assert!(dev < prev);
            prev = dev;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn ansatz_initial_datum_and_support() {
        let c = CaseConfig::<f64>::new(4, 0.5).unwrap();
        let t = triangle();
        let phi = BumpProfile::default();
        let ans = Ansatz::new(&c, &t, &phi);
        let x1 = 1.0 / (4.0 * c.mode as f64);
        assert!((ans.value(0.0, x1, 5.0 / 32.0) - 1.0).abs() < 1e-12);
        for time in [0.0, 0.01, c.t_star] {
            assert_eq!(ans.value(time, 0.3, 0.5), 0.0);
            assert_eq!(ans.residual_g(time, 0.3, 0.5), 0.0);
        }
    }

    #[test]
    fn residual_structure() {
        let c = CaseConfig::<f64>::new(4, 0.5).unwrap();
        let t = triangle();
        let phi = BumpProfile::default();
        let ans = Ansatz::new(&c, &t, &phi);
        // plateau of phi
        assert_eq!(ans.residual_g(0.05, 0.2, 0.15), 0.0);
        // at t = 0 only the phi'' term remains
        let (x1, y) = (0.013, 0.09);
        let expect = (c.kappa * x1).sin() * phi.eval(y, 2) / c.nu;
        assert!((ans.residual_g(0.0, x1, y) - expect).abs() < 1e-10 * expect.abs());
    }

    #[test]
    fn residual_profile_lifts_to_residual() {
        let c = CaseConfig::<f64>::new(3, 0.5).unwrap();
        let t = triangle();
        let phi = BumpProfile::default();
        let ans = Ansatz::new(&c, &t, &phi);
        let (time, x1, y) = (0.02, 0.37, 0.1);
        let prof = ans.residual_profile_from(time, t.eval(y, 0), phi.eval(y, 1), phi.eval(y, 2));
        let lifted = (Complex::from_polar(1.0, c.kappa * x1) * prof).im / c.nu;
        let direct = ans.residual_g(time, x1, y);
        assert!((lifted - direct).abs() < 1e-10 * direct.abs().max(1.0));
        let v = ans.profile(time, y);
        let lifted = (Complex::from_polar(1.0, c.kappa * x1) * v).im;
        assert!((lifted - ans.value(time, x1, y)).abs() < 1e-13);
    }

    #[test]
    fn heat_flow_limits() {
        let c = CaseConfig::<f64>::new(4, 0.5).unwrap();
        let t = triangle();
        let phi = BumpProfile::default();
        let heat = HeatFlow::new(&c, &t, &phi);
        let late = heat.norms(1e3);
        assert_eq!(late.grad_l + late.grad_s_x1 + late.grad_s_x2, 0.0);
        let start = heat.norms(0.0);
        let (tl2, th1) = t.norms();
        assert!((start.energy_l - tl2).abs() < 1e-15);
        assert!((start.grad_l - th1).abs() < 1e-12 * th1);
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let e = heat.norms(k as f64 * 0.01).energy();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn heat_integrals_match_graded_trapezoid() {
        let c = CaseConfig::<f64>::new(4, 0.5).unwrap();
        let flow = HeatFlow::new(&c, &triangle(), &BumpProfile::default());
        // geometric grid resolves the fast early decay of the high modes
        let mut times = vec![0.0];
        let steps = 40_000;
        let (lo, hi) = (1e-10f64, c.t_star);
        times.extend((0..=steps).map(|k| lo * (hi / lo).powf(k as f64 / steps as f64)));
        let norms: Vec<FlowNorms<f64>> = times.iter().map(|&t| flow.norms(t)).collect();
        let trap = crate::diagnostics::running_trapezoid(&times, &norms);
        let quad = trap.last().unwrap();
        let exact = flow.integrals(c.t_star);
        for (q, e) in quad.values().iter().zip(exact.values()) {
            assert!((q - e).abs() <= 1e-6 * e.abs(), "{q} {e}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn large_scale_is_odd_and_antiperiodic(t in 0.0f64..0.3, y in 0.0f64..1.0) {
            let tri = triangle();
            let u = large_scale(t, y, &tri);
            proptest::prop_assert!((u + large_scale(t, -y, &tri)).abs() < 1e-13);
            proptest::prop_assert!((u + large_scale(t, y + 0.5, &tri)).abs() < 1e-13);
            proptest::prop_assert!(u.abs() <= 0.25 + 1e-12);
        }
    }
}
