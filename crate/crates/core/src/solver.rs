//! Time integration of the reduced system.
//!
//! The small-scale field is carried by one `x1` mode,
//! `u^S = Im[e^{i kappa x1} v(t, y)]`, and `v` solves
//! `v_t = v_yy - nu kappa^2 v - i kappa U(t, y) v (+ forcing)` on the unit
//! cell. Each step is a Strang splitting: exact half-step diffusion in Fourier
//! space, the exact advection phase `exp(-i kappa int U dt)` in physical space,
//! and another half-step of diffusion.

use std::io::{BufRead, Write};

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::diagnostics::FlowNorms;
use crate::error::{Error, Result};
use crate::exact::{shear_rate, tilt, AmplitudeLaw, CaseConfig, HeatFlow};
use crate::profiles::{BumpProfile, MollifiedTriangle};
use crate::real::Real;
use crate::spectral::{signed_index, PeriodicGrid};

/// Smallest cell grid. The bump's spectrum is near `1e-11` at `k = 1024`.
pub const NY_FLOOR: usize = 2048;

/// Largest level the 2D reference solver accepts.
pub const FULL2D_MAX_LEVEL: u32 = 5;

const EXP_CUTOFF: f64 = 745.0;

/// `(N_y, dt)`: `N_y` the smallest power of two at least
/// `max(NY_FLOOR, 16 (1 + kappa t* / 2 pi))`, `dt = min(t*/1000, 0.1/kappa)`.
pub fn resolution_policy<R: Real>(kappa: R, t_star: R) -> (usize, R) {
    let need = R::lit(16.0) * (R::one() + kappa * t_star / R::TAU());
    let need = need.ceil().to_usize().unwrap_or(usize::MAX / 2);
    let n_y = need.max(NY_FLOOR).next_power_of_two();
    let dt = (t_star / R::lit(1000.0)).min(R::lit(0.1) / kappa);
    (n_y, dt)
}

/// The shear advecting the small scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdvectingField {
    /// The exact heat-flow shear `U(t, y)`.
    Series,
    /// The frozen profile `T(y) exp(-c0 t)`.
    Frozen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Forcing {
    None,
    /// The manufactured forcing `-nu g` under which the ansatz is exact.
    AnsatzResidual,
}

/// Steps at which full profiles are kept. Step `0` and the last step are
/// always included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    Endpoints,
    Stride(usize),
    Steps(Vec<usize>),
}

impl Schedule {
    /// Maps output times onto the step grid of `cfg`.
    pub fn from_times<R: Real>(times: &[R], cfg: &CaseConfig<R>) -> Result<Self> {
        let mut steps = Vec::with_capacity(times.len());
        for &t in times {
            if t < R::zero() || t > cfg.t_star * (R::one() + R::lit(1e-12)) {
                return Err(Error::Config(format!("output time {t} outside [0, t*]")));
            }
            let s = (t / cfg.dt).round();
            if (s * cfg.dt - t).abs() > R::lit(1e-9) * cfg.dt {
                return Err(Error::Config(format!(
                    "output time {t} is not on the step grid"
                )));
            }
            steps.push(s.to_usize().unwrap_or(0));
        }
        if !steps.contains(&0) || !steps.contains(&cfg.steps) {
            return Err(Error::Config("schedule must include 0 and t*".into()));
        }
        steps.sort_unstable();
        steps.dedup();
        Ok(Schedule::Steps(steps))
    }

    /// A stride keeping at most `max` snapshots (plus the endpoints).
    pub fn capped(steps: usize, max: usize) -> Self {
        Schedule::Stride(steps.div_ceil(max.max(1)).max(1))
    }

    pub fn includes(&self, step: usize, last: usize) -> bool {
        if step == 0 || step == last {
            return true;
        }
        match self {
            Schedule::Endpoints => false,
            Schedule::Stride(s) => step.is_multiple_of(*s),
            Schedule::Steps(v) => v.binary_search(&step).is_ok(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub field: AdvectingField,
    pub forcing: Forcing,
    pub schedule: Schedule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            field: AdvectingField::Series,
            forcing: Forcing::None,
            schedule: Schedule::Endpoints,
        }
    }
}

/// The profile `v(t, .)` as Fourier coefficients on the cell grid.
#[derive(Clone, Debug)]
pub struct ReducedState<R: Real> {
    pub t: R,
    pub step: usize,
    pub coeffs: Vec<Complex<R>>,
}

impl<R: Real> ReducedState<R> {
    /// `v(0) = phi`.
    pub fn initial(phi: &BumpProfile<R>, grid: &mut PeriodicGrid<R>) -> Self {
        let mut coeffs: Vec<Complex<R>> = phi
            .sample(grid.len(), 0)
            .into_iter()
            .map(|v| Complex::new(v, R::zero()))
            .collect();
        grid.analyze(&mut coeffs);
        Self {
            t: R::zero(),
            step: 0,
            coeffs,
        }
    }

    pub fn values(&self, grid: &mut PeriodicGrid<R>) -> Vec<Complex<R>> {
        let mut buf = self.coeffs.clone();
        grid.synthesize(&mut buf);
        buf
    }

    /// Small-scale part of the norm quintet, through the norm bridge.
    pub fn norms(&self, cfg: &CaseConfig<R>, grid: &PeriodicGrid<R>) -> FlowNorms<R> {
        let (l2, h1) = grid.norms_from_coefficients(&self.coeffs);
        small_scale_norms(cfg, l2, h1)
    }
}

/// `|u^S|^2 = 1/2 int |v|^2`, `nu |d1 u^S|^2 = nu kappa^2 / 2 int |v|^2`,
/// `nu |d2 u^S|^2 = 1/2 int |v_y|^2`.
pub fn small_scale_norms<R: Real>(cfg: &CaseConfig<R>, l2: R, h1: R) -> FlowNorms<R> {
    let half = R::lit(0.5);
    FlowNorms {
        energy_s: half * l2,
        grad_s_x1: half * cfg.nu * cfg.kappa * cfg.kappa * l2,
        grad_s_x2: half * h1,
        ..FlowNorms::default()
    }
}

/// Exact small-scale dissipation `int nu |grad u^S|^2 dt` over one step.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepDissipation<R> {
    pub x1: R,
    pub x2: R,
}

/// Reusable Strang stepper for one case.
pub struct ReducedStepper<R: Real> {
    cfg: CaseConfig<R>,
    field: AdvectingField,
    forcing: Forcing,
    grid: PeriodicGrid<R>,
    shear: Vec<(i64, R, R)>,
    t_nodes: Vec<R>,
    dphi: Vec<R>,
    d2phi: Vec<R>,
    law: AmplitudeLaw<R>,
    buf: Vec<Complex<R>>,
    cached_half: Option<(R, Vec<R>, Vec<R>)>,
}

impl<R: Real> ReducedStepper<R> {
    pub fn new(
        cfg: &CaseConfig<R>,
        tri: &MollifiedTriangle<R>,
        phi: &BumpProfile<R>,
        field: AdvectingField,
        forcing: Forcing,
    ) -> Self {
        let mut grid = PeriodicGrid::new(cfg.n_y);
        let shear = tri
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                (
                    MollifiedTriangle::<R>::frequency(k + 1),
                    a,
                    shear_rate::<R>(k + 1),
                )
            })
            .collect();
        let needs_t = field == AdvectingField::Frozen || forcing == Forcing::AnsatzResidual;
        let t_nodes = if needs_t {
            tri.sample(&mut grid, 0)
        } else {
            Vec::new()
        };
        let (dphi, d2phi) = if forcing == Forcing::AnsatzResidual {
            (phi.sample(cfg.n_y, 1), phi.sample(cfg.n_y, 2))
        } else {
            (Vec::new(), Vec::new())
        };
        Self {
            cfg: cfg.clone(),
            field,
            forcing,
            buf: vec![Complex::default(); cfg.n_y],
            grid,
            shear,
            t_nodes,
            dphi,
            d2phi,
            law: cfg.amplitude_law(),
            cached_half: None,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid<R> {
        &self.grid
    }

    pub fn grid_mut(&mut self) -> &mut PeriodicGrid<R> {
        &mut self.grid
    }

    /// `Phi_j = int_{t0}^{t1} U(s, y_j) ds`, without the coupling factor.
    pub fn phase(&mut self, t0: R, t1: R) -> Vec<R> {
        match self.field {
            AdvectingField::Frozen => {
                let c0 = self.cfg.c0;
                let w = (-c0 * t0).exp() * R::one_minus_exp_neg(c0 * (t1 - t0)) / c0;
                self.t_nodes.iter().map(|&t| t * w).collect()
            }
            AdvectingField::Series => {
                let h = t1 - t0;
                let cutoff = R::lit(EXP_CUTOFF);
                let terms = self
                    .shear
                    .iter()
                    .filter(|(_, _, lam)| *lam * t0 <= cutoff)
                    .map(|&(q, a, lam)| {
                        (
                            q,
                            a * (-lam * t0).exp() * R::one_minus_exp_neg(lam * h) / lam,
                        )
                    });
                self.grid.sample_sine_series(terms.collect::<Vec<_>>())
            }
        }
    }

    fn half_diffusion_factors(&mut self, h: R) -> (Vec<R>, Vec<R>) {
        if let Some((hc, d, w)) = &self.cached_half {
            if *hc == h {
                return (d.clone(), w.clone());
            }
        }
        let two = R::lit(2.0);
        let nk2 = self.cfg.nu * self.cfg.kappa * self.cfg.kappa;
        let mut decay = Vec::with_capacity(self.cfg.n_y);
        let mut window = Vec::with_capacity(self.cfg.n_y);
        for &k in self.grid.wavenumbers() {
            let lam = k * k + nk2;
            decay.push((-lam * h).exp());
            window.push(if lam == R::zero() {
                h
            } else {
                R::one_minus_exp_neg(two * lam * h) / (two * lam)
            });
        }
        self.cached_half = Some((h, decay.clone(), window.clone()));
        (decay, window)
    }

    fn diffuse(
        &self,
        coeffs: &mut [Complex<R>],
        decay: &[R],
        window: &[R],
        loss: &mut StepDissipation<R>,
    ) {
        let half = R::lit(0.5);
        let nk2 = self.cfg.nu * self.cfg.kappa * self.cfg.kappa;
        let mut x1 = R::zero();
        let mut x2 = R::zero();
        for ((c, &d), (&w, &k)) in coeffs
            .iter_mut()
            .zip(decay)
            .zip(window.iter().zip(self.grid.wavenumbers()))
        {
            let p = half * c.norm_sqr() * w;
            x1 = x1 + nk2 * p;
            x2 = x2 + k * k * p;
            *c = c.scale(d);
        }
        loss.x1 = loss.x1 + x1;
        loss.x2 = loss.x2 + x2;
    }

    fn rotate(&mut self, phase: &[R]) {
        let s = -self.cfg.kappa * self.cfg.coupling;
        for (v, &p) in self.buf.iter_mut().zip(phase) {
            *v = *v * Complex::from_polar(R::one(), s * p);
        }
    }

    /// `-nu g_v(t)` on the grid nodes, into `buf`.
    fn forcing_nodes(&mut self, t: R) {
        let tau = tilt(t, self.cfg.c0);
        let kappa = self.cfg.kappa;
        let amp = -(-self.law.value(t)).exp();
        let two = R::lit(2.0);
        for j in 0..self.buf.len() {
            let d1 = self.dphi[j];
            let d2 = self.d2phi[j];
            self.buf[j] = if d1 == R::zero() && d2 == R::zero() {
                Complex::default()
            } else {
                Complex::from_polar(amp, -kappa * tau * self.t_nodes[j])
                    * Complex::new(d2, -two * kappa * tau * d1)
            };
        }
    }

    /// `v <- e^{hL} v + h phi1(hL) f(tm)`: diffusion with the forcing frozen
    /// at `tm`, exact in each Fourier mode.
    fn forced_diffusion(&mut self, coeffs: &mut [Complex<R>], h: R, tm: R) {
        self.forcing_nodes(tm);
        self.grid.analyze(&mut self.buf);
        let nk2 = self.cfg.nu * self.cfg.kappa * self.cfg.kappa;
        for ((c, f), &k) in coeffs
            .iter_mut()
            .zip(&self.buf)
            .zip(self.grid.wavenumbers())
        {
            let x = (k * k + nk2) * h;
            let phi1 = if x == R::zero() {
                R::one()
            } else {
                R::one_minus_exp_neg(x) / x
            };
            *c = c.scale((-x).exp()) + f.scale(h * phi1);
        }
    }

    fn advect(&mut self, coeffs: &mut [Complex<R>], t0: R, t1: R) {
        if self.cfg.coupling == R::zero() {
            return;
        }
        self.buf.copy_from_slice(coeffs);
        self.grid.synthesize(&mut self.buf);
        let p = self.phase(t0, t1);
        self.rotate(&p);
        self.grid.analyze(&mut self.buf);
        coeffs.copy_from_slice(&self.buf);
    }

    /// One Strang step of length `dt`. Unforced, returns the exact
    /// dissipation of the two diffusion substeps (advection conserves `|v|`
    /// pointwise). With forcing, the diffusion substeps carry the forcing and
    /// the returned losses are zero.
    pub fn step(&mut self, state: &mut ReducedState<R>, dt: R) -> StepDissipation<R> {
        let half = R::lit(0.5);
        let quarter = R::lit(0.25);
        let t0 = state.t;
        let mut loss = StepDissipation::default();
        match self.forcing {
            Forcing::None => {
                let (decay, window) = self.half_diffusion_factors(half * dt);
                self.diffuse(&mut state.coeffs, &decay, &window, &mut loss);
                self.advect(&mut state.coeffs, t0, t0 + dt);
                self.diffuse(&mut state.coeffs, &decay, &window, &mut loss);
            }
            Forcing::AnsatzResidual => {
                self.forced_diffusion(&mut state.coeffs, half * dt, t0 + quarter * dt);
                self.advect(&mut state.coeffs, t0, t0 + dt);
                self.forced_diffusion(&mut state.coeffs, half * dt, t0 + (half + quarter) * dt);
            }
        }
        state.step += 1;
        state.t = t0 + dt;
        loss
    }
}

/// Kept profile `v(t, y_j)` at one output step.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<R> {
    pub step: usize,
    pub t: R,
    pub values: Vec<Complex<R>>,
}

/// Output of [`solve_reduced`]; norms are kept at every step.
#[derive(Clone, Debug)]
pub struct ReducedTrajectory<R: Real> {
    pub n_y: usize,
    pub dt: R,
    pub field: AdvectingField,
    pub forcing: Forcing,
    pub times: Vec<R>,
    pub norms: Vec<FlowNorms<R>>,
    /// Running `int_0^t` of the norms: exact per diffusion substep for the
    /// small-scale gradients, closed form for the shear. Energies are zero.
    pub exact_integrals: Vec<FlowNorms<R>>,
    pub snapshots: Vec<Snapshot<R>>,
    /// `|u^S|` never increased across a step.
    pub monotone: bool,
}

impl<R: Real> ReducedTrajectory<R> {
    pub fn last(&self) -> Option<&Snapshot<R>> {
        self.snapshots.last()
    }
}

/// Integrates the reduced equation from `v(0) = phi` to `t*`.
pub fn solve_reduced<R: Real>(
    cfg: &CaseConfig<R>,
    tri: &MollifiedTriangle<R>,
    phi: &BumpProfile<R>,
    opts: &SolveOptions,
) -> Result<ReducedTrajectory<R>> {
    let heat = HeatFlow::new(cfg, tri, phi);
    let mut stepper = ReducedStepper::new(cfg, tri, phi, opts.field, opts.forcing);
    let mut state = ReducedState::initial(phi, stepper.grid_mut());
    let with_shear = |n: FlowNorms<R>, t: R| {
        let h = heat.norms(t);
        FlowNorms {
            energy_l: h.energy_l,
            grad_l: h.grad_l,
            ..n
        }
    };

    let mut times = Vec::with_capacity(cfg.steps + 1);
    let mut norms = Vec::with_capacity(cfg.steps + 1);
    let mut exact = Vec::with_capacity(cfg.steps + 1);
    let mut snapshots = Vec::new();
    let mut monotone = true;

    let first = with_shear(state.norms(cfg, stepper.grid()), R::zero());
    times.push(R::zero());
    norms.push(first);
    exact.push(FlowNorms::default());
    snapshots.push(Snapshot {
        step: 0,
        t: R::zero(),
        values: state.values(stepper.grid_mut()),
    });

    let mut acc = StepDissipation::<R>::default();
    let slack = R::one() + R::lit(64.0) * R::epsilon();
    for step in 1..=cfg.steps {
        let loss = stepper.step(&mut state, cfg.dt);
        acc.x1 = acc.x1 + loss.x1;
        acc.x2 = acc.x2 + loss.x2;
        let t = cfg.time(step);
        state.t = t;
        let n = with_shear(state.norms(cfg, stepper.grid()), t);
        if !n.is_finite() {
            return Err(Error::Blowup {
                time: t.as_f64(),
                what: "non-finite small-scale norm".into(),
            });
        }
        if n.energy_s > norms[step - 1].energy_s * slack {
            monotone = false;
        }
        let shear = heat.integrals(t);
        times.push(t);
        norms.push(n);
        exact.push(FlowNorms {
            energy_l: R::zero(),
            grad_l: shear.grad_l,
            energy_s: R::zero(),
            grad_s_x1: acc.x1,
            grad_s_x2: acc.x2,
        });
        if opts.schedule.includes(step, cfg.steps) {
            snapshots.push(Snapshot {
                step,
                t,
                values: state.values(stepper.grid_mut()),
            });
        }
    }
    Ok(ReducedTrajectory {
        n_y: cfg.n_y,
        dt: cfg.dt,
        field: opts.field,
        forcing: opts.forcing,
        times,
        norms,
        exact_integrals: exact,
        snapshots,
        monotone,
    })
}

/// The comparison heat flow; exact by construction.
pub fn solve_heat<R: Real>(
    cfg: &CaseConfig<R>,
    tri: &MollifiedTriangle<R>,
    phi: &BumpProfile<R>,
) -> HeatFlow<R> {
    HeatFlow::new(cfg, tri, phi)
}

/// A real field on an `n1 x n2` grid of the torus, row-major in `x1`:
/// `values[i * n2 + j] = u(i / n1, j / n2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<R> {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<R>,
}

impl<R: Real> Field2D<R> {
    pub fn from_fn(n1: usize, n2: usize, f: impl Fn(usize, usize) -> R) -> Self {
        let mut values = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            for j in 0..n2 {
                values.push(f(i, j));
            }
        }
        Self { n1, n2, values }
    }

    /// `int |u|^2` over the torus.
    pub fn l2_squared(&self) -> R {
        let s = self.values.iter().fold(R::zero(), |a, &v| a + v * v);
        s / R::from_usize_lossy(self.values.len())
    }

    /// `|self - other|_{L2} / |other|_{L2}`.
    pub fn relative_distance(&self, other: &Self) -> Result<R> {
        if self.n1 != other.n1 || self.n2 != other.n2 {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.n1, self.n2, other.n1, other.n2
            )));
        }
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(R::zero(), |a, (&x, &y)| a + (x - y) * (x - y));
        let base = other.values.iter().fold(R::zero(), |a, &y| a + y * y);
        Ok((diff / base).sqrt())
    }

    /// RMS amplitude of each `x1` Fourier row, in FFT order.
    pub fn x1_spectrum(&self) -> Vec<R> {
        let n2 = R::from_usize_lossy(self.n2);
        x1_transform(self)
            .iter()
            .map(|r| (r.iter().fold(R::zero(), |a, c| a + c.norm_sqr()) / n2).sqrt())
            .collect()
    }

    /// Signed `x1` frequencies whose row amplitude exceeds `tol` times the largest.
    pub fn x1_support(&self, tol: R) -> Vec<i64> {
        let amp = self.x1_spectrum();
        let top = amp.iter().fold(R::zero(), |a, &p| a.max(p));
        amp.iter()
            .enumerate()
            .filter(|(_, &p)| p > tol * top)
            .map(|(k, _)| signed_index(k, self.n1))
            .collect()
    }
}

/// Rows of `x1` Fourier coefficients, each a function of `x2` on the grid.
fn x1_transform<R: Real>(f: &Field2D<R>) -> Vec<Vec<Complex<R>>> {
    let fft = FftPlanner::new().plan_fft_forward(f.n1);
    let scale = R::one() / R::from_usize_lossy(f.n1);
    let mut rows = vec![vec![Complex::default(); f.n2]; f.n1];
    let mut col = vec![Complex::default(); f.n1];
    for j in 0..f.n2 {
        for (i, c) in col.iter_mut().enumerate() {
            *c = Complex::new(f.values[i * f.n2 + j], R::zero());
        }
        fft.process(&mut col);
        for (row, c) in rows.iter_mut().zip(&col) {
            row[j] = c.scale(scale);
        }
    }
    rows
}

fn x1_synthesis<R: Real>(rows: &[Vec<Complex<R>>], n2: usize) -> Field2D<R> {
    let n1 = rows.len();
    let fft = FftPlanner::new().plan_fft_inverse(n1);
    let mut values = vec![R::zero(); n1 * n2];
    let mut col = vec![Complex::default(); n1];
    for j in 0..n2 {
        for (k, c) in col.iter_mut().enumerate() {
            *c = rows[k][j];
        }
        fft.process(&mut col);
        for (i, c) in col.iter().enumerate() {
            values[i * n2 + j] = c.re;
        }
    }
    Field2D { n1, n2, values }
}

/// `(N1, N2)` for the 2D solver: `N1` the smallest power of two `>= 4m`,
/// `N2 = M N_y`.
pub fn full2d_sizes<R: Real>(cfg: &CaseConfig<R>) -> (usize, usize) {
    (
        (4 * cfg.mode as usize).next_power_of_two(),
        cfg.cells as usize * cfg.n_y,
    )
}

/// Lifts a cell profile to `Im[e^{i kappa x1} v(M x2 mod 1)]` on an `n1 x (M N_y)` grid.
pub fn lift_reduced<R: Real>(values: &[Complex<R>], cfg: &CaseConfig<R>, n1: usize) -> Field2D<R> {
    let n_y = values.len();
    let n2 = cfg.cells as usize * n_y;
    let m = cfg.mode as usize;
    Field2D::from_fn(n1, n2, |i, j| {
        // kappa x1 = 2 pi m i / n1, reduced exactly modulo the period
        let num = (m * i) % n1;
        let angle = R::TAU() * R::from_usize_lossy(num) / R::from_usize_lossy(n1);
        (Complex::from_polar(R::one(), angle) * values[j % n_y]).im
    })
}

/// Reference solve of `u_t + U(t, M x2) u_x1 = nu Lap u` on the full torus,
/// `x1`-spectral and `x2`-physical, with the same splitting.
pub fn solve_full2d<R: Real>(
    cfg: &CaseConfig<R>,
    tri: &MollifiedTriangle<R>,
    phi: &BumpProfile<R>,
    schedule: &Schedule,
) -> Result<Vec<(R, Field2D<R>)>> {
    if cfg.n > FULL2D_MAX_LEVEL {
        return Err(Error::Resource(format!(
            "2D solver refuses n = {} (limit {FULL2D_MAX_LEVEL})",
            cfg.n
        )));
    }
    let (n1, n2) = full2d_sizes(cfg);
    if n1 < 4 * cfg.mode as usize {
        return Err(Error::Config("N1 must be at least 4m".into()));
    }
    let phi_nodes = phi.sample(cfg.n_y, 0);
    let m = cfg.mode as usize;
    let initial = Field2D::from_fn(n1, n2, |i, j| {
        let angle = R::TAU() * R::from_usize_lossy((m * i) % n1) / R::from_usize_lossy(n1);
        angle.sin() * phi_nodes[j % cfg.n_y]
    });

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n2);
    let inv = planner.plan_fft_inverse(n2);
    let mut x2_grid = PeriodicGrid::<R>::new(n2);
    let k2: Vec<R> = x2_grid.wavenumbers().to_vec();
    let k1: Vec<R> = (0..n1)
        .map(|k| R::TAU() * R::lit(signed_index(k, n1) as f64))
        .collect();
    let scale = R::one() / R::from_usize_lossy(n2);

    // rows: x1 mode k, x2-spectral between steps
    let mut rows = x1_transform(&initial);
    rows.par_iter_mut().for_each(|r| {
        fwd.process(r);
        for c in r.iter_mut() {
            *c = c.scale(scale);
        }
    });

    let cells = cfg.cells as i64;
    let shear: Vec<(i64, R, R)> = tri
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            (
                cells * MollifiedTriangle::<R>::frequency(k + 1),
                a,
                shear_rate::<R>(k + 1),
            )
        })
        .collect();
    let half_dt = R::lit(0.5) * cfg.dt;
    let decay: Vec<Vec<R>> = k1
        .iter()
        .map(|&a| {
            k2.iter()
                .map(|&b| (-cfg.nu * (a * a + b * b) * half_dt).exp())
                .collect()
        })
        .collect();

    let to_physical = |rows: &[Vec<Complex<R>>]| {
        let mut phys = rows.to_vec();
        phys.par_iter_mut().for_each(|r| inv.process(r));
        x1_synthesis(&phys, n2)
    };

    let mut out = vec![(R::zero(), to_physical(&rows))];
    for step in 1..=cfg.steps {
        let t0 = cfg.time(step - 1);
        let cutoff = R::lit(EXP_CUTOFF);
        let terms: Vec<(i64, R)> = shear
            .iter()
            .filter(|(_, _, lam)| *lam * t0 <= cutoff)
            .map(|&(q, a, lam)| {
                (
                    q,
                    a * (-lam * t0).exp() * R::one_minus_exp_neg(lam * cfg.dt) / lam,
                )
            })
            .collect();
        let phase = x2_grid.sample_sine_series(terms);
        let coupling = cfg.coupling;
        rows.par_iter_mut()
            .zip(decay.par_iter())
            .zip(k1.par_iter())
            .for_each(|((r, d), &kk)| {
                for (c, &f) in r.iter_mut().zip(d) {
                    *c = c.scale(f);
                }
                inv.process(r);
                let s = -kk * coupling;
                for (c, &p) in r.iter_mut().zip(&phase) {
                    *c = *c * Complex::from_polar(R::one(), s * p);
                }
                fwd.process(r);
                for (c, &f) in r.iter_mut().zip(d) {
                    *c = c.scale(f * scale);
                }
            });
        if schedule.includes(step, cfg.steps) {
            out.push((cfg.time(step), to_physical(&rows)));
        }
    }
    Ok(out)
}

/// Version tag of the snapshot text format.
pub const SNAPSHOT_FORMAT: &str = "stretchdiss-snapshot 1";

/// Writes a snapshot as text:
///
/// ```text
/// stretchdiss-snapshot 1
/// t <time>
/// config <hash>
/// n_y <points>
/// <y_j> <Re v_j> <Im v_j>      (n_y rows)
/// ```
pub fn write_snapshot<R: Real, W: Write>(
    mut w: W,
    snap: &Snapshot<R>,
    config_hash: &str,
) -> Result<()> {
    let n = snap.values.len();
    writeln!(w, "{SNAPSHOT_FORMAT}")?;
    writeln!(w, "t {}", snap.t)?;
    writeln!(w, "config {config_hash}")?;
    writeln!(w, "n_y {n}")?;
    for (j, v) in snap.values.iter().enumerate() {
        let y = R::from_usize_lossy(j) / R::from_usize_lossy(n);
        writeln!(w, "{} {} {}", y, v.re, v.im)?;
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]; returns it with its config hash.
pub fn read_snapshot<R: Real, B: BufRead>(r: B) -> Result<(Snapshot<R>, String)> {
    let bad = |what: &str| Error::Config(format!("malformed snapshot: {what}"));
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| bad("truncated"))?
            .map_err(Error::from)
    };
    if next()? != SNAPSHOT_FORMAT {
        return Err(bad("unknown format tag"));
    }
    let field = |line: String, key: &str| -> Result<String> {
        line.strip_prefix(key)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| bad(key))
    };
    let parse = |s: &str| -> Result<R> { s.parse::<f64>().map(R::lit).map_err(|_| bad(s)) };
    let t = parse(&field(next()?, "t")?)?;
    let hash = field(next()?, "config")?;
    let n: usize = field(next()?, "n_y")?.parse().map_err(|_| bad("n_y"))?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let line = next()?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(bad("row width"));
        }
        values.push(Complex::new(parse(cols[1])?, parse(cols[2])?));
    }
    Ok((Snapshot { step: 0, t, values }, hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{DEFAULT_DELTA, DEFAULT_I_MAX};

    fn setup(n: u32) -> (CaseConfig<f64>, MollifiedTriangle<f64>, BumpProfile<f64>) {
        (
            CaseConfig::new(n, 0.5).unwrap(),
            MollifiedTriangle::build(DEFAULT_DELTA, DEFAULT_I_MAX).unwrap(),
            BumpProfile::default(),
        )
    }

    #[test]
    fn policy_values() {
        let c = CaseConfig::<f64>::new(8, 0.5).unwrap();
        let kt = c.kappa * c.t_star;
        assert!((kt - 39.9).abs() < 0.1, "{kt}");
        assert_eq!(resolution_policy(c.kappa, c.t_star).0, NY_FLOOR);
        assert_eq!(resolution_policy(1e6, 1.0).0, 4_194_304);
    }

    #[test]
    fn schedule_from_times() {
        let c = CaseConfig::<f64>::new(3, 0.5).unwrap();
        let s = Schedule::from_times(&[0.0, c.time(10), c.t_star], &c).unwrap();
        assert!(s.includes(10, c.steps));
        assert!(!s.includes(11, c.steps));
        assert!(Schedule::from_times(&[0.0, 0.5 * c.dt, c.t_star], &c).is_err());
        assert!(Schedule::from_times(&[0.0, c.time(3)], &c).is_err());
    }

    #[test]
    fn pure_diffusion_without_coupling() {
        let (mut c, tri, phi) = setup(3);
        c.coupling = 0.0;
        let mut st = ReducedStepper::new(&c, &tri, &phi, AdvectingField::Series, Forcing::None);
        let mut s = ReducedState::initial(&phi, st.grid_mut());
        let start = s.coeffs.clone();
        st.step(&mut s, c.dt);
        let nk2 = c.nu * c.kappa * c.kappa;
        for ((a, b), &k) in s.coeffs.iter().zip(&start).zip(st.grid().wavenumbers()) {
            let e = b.scale((-(k * k + nk2) * c.dt).exp());
            assert!((a - e).norm() < 1e-14);
        }
    }

    #[test]
    fn advection_is_pointwise_isometry() {
        let (c, tri, phi) = setup(3);
        let mut st = ReducedStepper::new(&c, &tri, &phi, AdvectingField::Series, Forcing::None);
        let p = st.phase(0.0, 0.01);
        // the phase is the time integral of U; compare with a fine midpoint rule
        let grid = st.grid().clone();
        for j in [100usize, 333, 1500] {
            let y = grid.point(j);
            let h = 0.01 / 2000.0;
            let quad: f64 = (0..2000)
                .map(|s| crate::exact::large_scale((s as f64 + 0.5) * h, y, &tri) * h)
                .sum();
            assert!((p[j] - quad).abs() < 1e-9, "{} {}", p[j], quad);
        }
    }

    #[test]
    fn exact_losses_match_energy_drop() {
        let (c, tri, phi) = setup(3);
        let traj = solve_reduced(&c, &tri, &phi, &SolveOptions::default()).unwrap();
        assert!(traj.monotone);
        let e0 = traj.norms[0].energy_s;
        let e1 = traj.norms.last().unwrap().energy_s;
        let ex = traj.exact_integrals.last().unwrap();
        // d/dt |u^S|^2 = -2 nu |grad u^S|^2
        assert!(((e0 - e1) / 2.0 - ex.dissipation_s()).abs() < 1e-13);
    }

    #[test]
    fn snapshot_round_trip() {
        let snap = Snapshot {
            step: 0,
            t: 0.125,
            values: vec![Complex::new(0.1, -2e-17), Complex::new(1.0 / 3.0, 0.5)],
        };
        let mut out = Vec::new();
        write_snapshot(&mut out, &snap, "abc123").unwrap();
        let (back, hash) = read_snapshot::<f64, _>(out.as_slice()).unwrap();
        assert_eq!(hash, "abc123");
        assert_eq!(back, snap);
        assert!(read_snapshot::<f64, _>(&b"garbage\n"[..]).is_err());
    }

    #[test]
    fn full2d_guard() {
        let (c, tri, phi) = setup(6);
        assert!(matches!(
            solve_full2d(&c, &tri, &phi, &Schedule::Endpoints),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn self_convergence_under_grid_doubling() {
        use crate::exact::CaseOverrides;
        let (c, tri, phi) = setup(3);
        let fine_cfg = CaseConfig::with_overrides(
            3,
            0.5,
            &CaseOverrides {
                n_y: Some(2 * c.n_y),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(fine_cfg.warnings.is_empty());
        let coarse = solve_reduced(&c, &tri, &phi, &SolveOptions::default()).unwrap();
        let fine = solve_reduced(&fine_cfg, &tri, &phi, &SolveOptions::default()).unwrap();
        let a = &coarse.last().unwrap().values;
        let b = &fine.last().unwrap().values;
        let num: f64 = a
            .iter()
            .zip(b.iter().step_by(2))
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        let den: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-8, "{}", (num / den).sqrt());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
        #[test]
        fn step_losses_close_the_energy_budget(dt in 1e-5f64..1e-2, coupling in 0.0f64..2.0, t0 in 0.0f64..0.2) {
            let (mut c, tri, phi) = setup(3);
            c.coupling = coupling;
            let mut st = ReducedStepper::new(&c, &tri, &phi, AdvectingField::Series, Forcing::None);
            let mut s = ReducedState::initial(&phi, st.grid_mut());
            s.t = t0;
            let e0 = s.norms(&c, st.grid()).energy_s;
            let lost = st.step(&mut s, dt);
            let e1 = s.norms(&c, st.grid()).energy_s;
            proptest::prop_assert!(e1 <= e0);
            proptest::prop_assert!(((e0 - e1) / 2.0 - lost.x1 - lost.x2).abs() < 1e-14 * e0);
        }
    }
}
