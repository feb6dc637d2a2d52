//! Norms, dissipation integrals, energy balance and difference records.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{shear_rate, tilt, AmplitudeLaw, CaseConfig, HeatFlow};
use crate::profiles::{BumpProfile, MollifiedTriangle};
use crate::quadrature::tanh_sinh;
use crate::real::Real;
use crate::solver::{small_scale_norms, ReducedTrajectory};
use crate::spectral::PeriodicGrid;

/// The quintet of squared norms of a 2.5D field at one time.
///
/// `energy_l = |u^L|^2`, `grad_l = nu |d2 u^L|^2`, `energy_s = |u^S|^2`,
/// `grad_s_x1 = nu |d1 u^S|^2`, `grad_s_x2 = nu |d2 u^S|^2`, all over the
/// unit torus. The pointwise squared gradient of `(u^L, 0, u^S)` is the sum
/// of the three gradient terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct FlowNorms<R: Real> {
    pub energy_l: R,
    pub grad_l: R,
    pub energy_s: R,
    pub grad_s_x1: R,
    pub grad_s_x2: R,
}

impl<R: Real> FlowNorms<R> {
    /// `|u|^2`.
    pub fn energy(&self) -> R {
        self.energy_l + self.energy_s
    }

    /// `nu |grad u|^2`.
    pub fn dissipation(&self) -> R {
        self.grad_l + self.grad_s_x1 + self.grad_s_x2
    }

    pub fn dissipation_s(&self) -> R {
        self.grad_s_x1 + self.grad_s_x2
    }

    pub fn component(&self, c: Component) -> R {
        match c {
            Component::All => self.dissipation(),
            Component::L => self.grad_l,
            Component::S => self.dissipation_s(),
            Component::SX1 => self.grad_s_x1,
            Component::SX2 => self.grad_s_x2,
            Component::Energy => self.energy(),
        }
    }

    pub fn map(self, f: impl Fn(R) -> R) -> Self {
        Self {
            energy_l: f(self.energy_l),
            grad_l: f(self.grad_l),
            energy_s: f(self.energy_s),
            grad_s_x1: f(self.grad_s_x1),
            grad_s_x2: f(self.grad_s_x2),
        }
    }

    pub fn values(&self) -> [R; 5] {
        [
            self.energy_l,
            self.grad_l,
            self.energy_s,
            self.grad_s_x1,
            self.grad_s_x2,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

impl<R: Real> Add for FlowNorms<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            energy_l: self.energy_l + o.energy_l,
            grad_l: self.grad_l + o.grad_l,
            energy_s: self.energy_s + o.energy_s,
            grad_s_x1: self.grad_s_x1 + o.grad_s_x1,
            grad_s_x2: self.grad_s_x2 + o.grad_s_x2,
        }
    }
}

impl<R: Real> Sub for FlowNorms<R> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            energy_l: self.energy_l - o.energy_l,
            grad_l: self.grad_l - o.grad_l,
            energy_s: self.energy_s - o.energy_s,
            grad_s_x1: self.grad_s_x1 - o.grad_s_x1,
            grad_s_x2: self.grad_s_x2 - o.grad_s_x2,
        }
    }
}

impl<R: Real> Mul<R> for FlowNorms<R> {
    type Output = Self;
    fn mul(self, s: R) -> Self {
        self.map(|v| v * s)
    }
}

/// Which part of the gradient integrand to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    All,
    L,
    S,
    SX1,
    SX2,
    Energy,
}

/// Which flow a dissipation integral refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flow {
    Ns,
    Heat,
    Ansatz,
}

/// The ansatz and its frozen shear sampled on the cell grid of a case.
#[derive(Clone, Debug)]
pub struct AnsatzGrid<R: Real> {
    cfg: CaseConfig<R>,
    law: AmplitudeLaw<R>,
    grid: PeriodicGrid<R>,
    t_nodes: Vec<R>,
    phi_nodes: Vec<R>,
    dphi_nodes: Vec<R>,
    d2phi_nodes: Vec<R>,
    shear_norms: (R, R),
}

impl<R: Real> AnsatzGrid<R> {
    pub fn new(cfg: &CaseConfig<R>, tri: &MollifiedTriangle<R>, phi: &BumpProfile<R>) -> Self {
        let mut grid = PeriodicGrid::new(cfg.n_y);
        let t_nodes = tri.sample(&mut grid, 0);
        Self {
            cfg: cfg.clone(),
            law: cfg.amplitude_law(),
            t_nodes,
            phi_nodes: phi.sample(cfg.n_y, 0),
            dphi_nodes: phi.sample(cfg.n_y, 1),
            d2phi_nodes: phi.sample(cfg.n_y, 2),
            grid,
            shear_norms: tri.norms(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `vbar(t, y_j) = e^{-a} e^{-i kappa tau T(y_j)} phi(y_j)`.
    pub fn profile(&self, t: R) -> Vec<Complex<R>> {
        let tau = tilt(t, self.cfg.c0);
        let amp = (-self.law.value(t)).exp();
        self.t_nodes
            .iter()
            .zip(&self.phi_nodes)
            .map(|(&tv, &p)| Complex::from_polar(amp * p, -self.cfg.kappa * tau * tv))
            .collect()
    }

    /// Norm quintet of `(ubar^L, ubar^S)`; the small-scale part by Parseval.
    pub fn norms(&mut self, t: R) -> FlowNorms<R> {
        let mut buf = self.profile(t);
        self.grid.analyze(&mut buf);
        let (l2, h1) = self.grid.norms_from_coefficients(&buf);
        let decay = (-R::lit(2.0) * self.cfg.c0 * t).exp();
        FlowNorms {
            energy_l: decay * self.shear_norms.0,
            grad_l: decay * self.shear_norms.1,
            ..small_scale_norms(&self.cfg, l2, h1)
        }
    }

    /// `|nu g(t)|_{L2}` over the torus, `(1/2 int |nu g_v|^2)^(1/2)`.
    pub fn residual_norm(&self, t: R) -> R {
        let tau = tilt(t, self.cfg.c0);
        let kappa = self.cfg.kappa;
        let two = R::lit(2.0);
        let amp = (-self.law.value(t)).exp();
        let sum =
            self.dphi_nodes
                .iter()
                .zip(&self.d2phi_nodes)
                .fold(R::zero(), |acc, (&d1, &d2)| {
                    let g = Complex::new(d2, -two * kappa * tau * d1);
                    acc + g.norm_sqr()
                });
        amp * (R::lit(0.5) * sum / R::from_usize_lossy(self.len())).sqrt()
    }

    /// `int_0^1 phi^2` on the grid.
    pub fn phi_l2(&self) -> R {
        self.phi_nodes.iter().fold(R::zero(), |a, &p| a + p * p) / R::from_usize_lossy(self.len())
    }
}

/// Small-time estimate `(kappa^2 / 2) |phi|^2 int_0^{t*} t^2 e^{-2 a(t)} dt`
/// of the ansatz's `x2` dissipation.
pub fn ansatz_small_time_estimate<R: Real>(cfg: &CaseConfig<R>, phi_l2: R) -> R {
    let law = cfg.amplitude_law();
    let two = R::lit(2.0);
    let integral = tanh_sinh(
        |t: R| t * t * (-two * law.value(t)).exp(),
        R::zero(),
        cfg.t_star,
        R::lit(1.0 / 64.0),
    );
    R::lit(0.5) * cfg.kappa * cfg.kappa * phi_l2 * integral
}

/// Step of a uniform time grid, or an error naming the first irregular gap.
pub fn uniform_step<R: Real>(times: &[R]) -> Result<R> {
    if times.len() < 2 {
        return Err(Error::NonUniformSchedule("fewer than two times".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / R::from_usize_lossy(times.len() - 1);
    let tol = R::lit(1e-9) * dt;
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > tol {
            return Err(Error::NonUniformSchedule(format!(
                "gap {} at index {k} differs from {}",
                w[1] - w[0],
                dt
            )));
        }
    }
    Ok(dt)
}

/// Running trapezoid integrals of a norm series.
pub fn running_trapezoid<R: Real>(times: &[R], series: &[FlowNorms<R>]) -> Vec<FlowNorms<R>> {
    let half = R::lit(0.5);
    let mut out = Vec::with_capacity(series.len());
    let mut acc = FlowNorms::default();
    out.push(acc);
    for k in 1..series.len() {
        let h = times[k] - times[k - 1];
        acc = acc + (series[k] + series[k - 1]) * (half * h);
        out.push(acc);
    }
    out
}

/// Norm histories of the Navier-Stokes, heat and ansatz flows on one step grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct DissipationRecord<R: Real> {
    pub times: Vec<R>,
    pub ns: Vec<FlowNorms<R>>,
    pub heat: Vec<FlowNorms<R>>,
    pub ansatz: Vec<FlowNorms<R>>,
    pub ns_integral: Vec<FlowNorms<R>>,
    pub heat_integral: Vec<FlowNorms<R>>,
    pub ansatz_integral: Vec<FlowNorms<R>>,
    /// Gradient integrals at `t*` without time quadrature: per-substep
    /// diffusion losses for Navier-Stokes, mode sums for the heat flow.
    pub ns_exact: FlowNorms<R>,
    pub heat_exact: FlowNorms<R>,
    pub ns_monotone: bool,
}

impl<R: Real> DissipationRecord<R> {
    pub fn series(&self, flow: Flow) -> (&[FlowNorms<R>], &[FlowNorms<R>]) {
        match flow {
            Flow::Ns => (&self.ns, &self.ns_integral),
            Flow::Heat => (&self.heat, &self.heat_integral),
            Flow::Ansatz => (&self.ansatz, &self.ansatz_integral),
        }
    }

    /// Writes one row per time.
    /// `stamp` goes into a leading `# config` comment line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, stamp: &str) -> Result<()> {
        writeln!(w, "# config {stamp}")?;
        let mut out = csv::Writer::from_writer(w);
        let names = ["energy_l", "grad_l", "energy_s", "grad_s_x1", "grad_s_x2"];
        let mut header = vec!["t".to_string()];
        for block in ["ns", "heat", "ansatz", "ns_int", "heat_int", "ansatz_int"] {
            header.extend(names.iter().map(|n| format!("{block}_{n}")));
        }
        out.write_record(&header)?;
        for k in 0..self.times.len() {
            let mut row = vec![self.times[k].to_string()];
            for block in [
                &self.ns,
                &self.heat,
                &self.ansatz,
                &self.ns_integral,
                &self.heat_integral,
                &self.ansatz_integral,
            ] {
                row.extend(block[k].values().iter().map(|v| v.to_string()));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Collects the norm histories of a reduced solve, the heat flow and the ansatz.
pub fn record_norms<R: Real>(
    traj: &ReducedTrajectory<R>,
    heat: &HeatFlow<R>,
    ansatz: &mut AnsatzGrid<R>,
    cfg: &CaseConfig<R>,
) -> Result<DissipationRecord<R>> {
    uniform_step(&traj.times)?;
    if ansatz.len() != traj.n_y {
        return Err(Error::GridMismatch(format!(
            "ansatz grid {} vs trajectory grid {}",
            ansatz.len(),
            traj.n_y
        )));
    }
    let heat_series: Vec<_> = traj.times.iter().map(|&t| heat.norms(t)).collect();
    let ansatz_series: Vec<_> = traj.times.iter().map(|&t| ansatz.norms(t)).collect();
    for (k, n) in traj.norms.iter().enumerate() {
        if !n.is_finite() || n.values().iter().any(|&v| v < R::zero()) {
            return Err(Error::Blowup {
                time: traj.times[k].as_f64(),
                what: "invalid norm in trajectory".into(),
            });
        }
    }
    let last = *traj.exact_integrals.last().unwrap_or(&FlowNorms::default());
    Ok(DissipationRecord {
        ns_integral: running_trapezoid(&traj.times, &traj.norms),
        heat_integral: running_trapezoid(&traj.times, &heat_series),
        ansatz_integral: running_trapezoid(&traj.times, &ansatz_series),
        times: traj.times.clone(),
        ns: traj.norms.clone(),
        heat: heat_series,
        ansatz: ansatz_series,
        ns_exact: last,
        heat_exact: heat.integrals(cfg.t_star),
        ns_monotone: traj.monotone,
    })
}

/// Trapezoid integral of one component over the whole record.
pub fn dissipation_integral<R: Real>(
    record: &DissipationRecord<R>,
    flow: Flow,
    component: Component,
) -> R {
    let (_, integral) = record.series(flow);
    integral
        .last()
        .map(|n| n.component(component))
        .unwrap_or(R::zero())
}

/// `max_k |Delta(|u|^2 / 2) / Delta t + mean(nu |grad u|^2)| / (|u_0|^2 / (2 t_end))`,
/// the mean being the trapezoid average over the step.
pub fn energy_balance_residual<R: Real>(times: &[R], norms: &[FlowNorms<R>]) -> Result<R> {
    let dt = uniform_step(times)?;
    let half = R::lit(0.5);
    let e0 = half * norms[0].energy();
    if e0 == R::zero() {
        return Ok(R::zero());
    }
    let span = times[times.len() - 1] - times[0];
    let mut worst = R::zero();
    for w in norms.windows(2) {
        let de = half * (w[1].energy() - w[0].energy()) / dt;
        let d = half * (w[0].dissipation() + w[1].dissipation());
        worst = worst.max((de + d).abs());
    }
    Ok(worst / (e0 / span))
}

/// As [`energy_balance_residual`], with exact step integrals of the dissipation.
pub fn energy_balance_residual_exact<R: Real>(
    times: &[R],
    norms: &[FlowNorms<R>],
    integrals: &[FlowNorms<R>],
) -> Result<R> {
    let dt = uniform_step(times)?;
    let half = R::lit(0.5);
    let e0 = half * norms[0].energy();
    if e0 == R::zero() {
        return Ok(R::zero());
    }
    let span = times[times.len() - 1] - times[0];
    let mut worst = R::zero();
    for k in 1..norms.len() {
        let de = half * (norms[k].energy() - norms[k - 1].energy());
        let d = integrals[k].dissipation() - integrals[k - 1].dissipation();
        worst = worst.max((de + d).abs() / dt);
    }
    Ok(worst / (e0 / span))
}

/// `w = ubar^S - u^S` along the kept snapshots.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct DifferenceRecord<R: Real> {
    pub times: Vec<R>,
    /// `|w(t)|_{L2}`.
    pub norm: Vec<R>,
    /// `|w(t)| / (t + t^2 nu^-alpha)`, zero at `t = 0`.
    pub ratio: Vec<R>,
    pub grad: Vec<FlowNorms<R>>,
    /// Running `nu int_0^t |grad w|^2` (small-scale components only).
    pub grad_integral: Vec<FlowNorms<R>>,
    /// `|w(0)|_{L2}`; zero when the ansatz starts from the initial datum.
    pub initial_defect: R,
}

impl<R: Real> DifferenceRecord<R> {
    pub fn sup_ratio(&self) -> R {
        self.ratio.iter().fold(R::zero(), |a, &r| a.max(r))
    }

    pub fn dissipation(&self) -> FlowNorms<R> {
        self.grad_integral.last().copied().unwrap_or_default()
    }

    /// `stamp` goes into a leading `# config` comment line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, stamp: &str) -> Result<()> {
        writeln!(w, "# config {stamp}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t",
            "w_norm",
            "ratio",
            "grad_x1",
            "grad_x2",
            "int_grad_x1",
            "int_grad_x2",
        ])?;
        for k in 0..self.times.len() {
            let g = self.grad[k];
            let i = self.grad_integral[k];
            out.write_record(
                [
                    self.times[k],
                    self.norm[k],
                    self.ratio[k],
                    g.grad_s_x1,
                    g.grad_s_x2,
                    i.grad_s_x1,
                    i.grad_s_x2,
                ]
                .iter()
                .map(|v| v.to_string()),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Difference between the ansatz and the reduced solution at every snapshot.
pub fn difference_record<R: Real>(
    traj: &ReducedTrajectory<R>,
    ansatz: &mut AnsatzGrid<R>,
    cfg: &CaseConfig<R>,
) -> Result<DifferenceRecord<R>> {
    let times: Vec<R> = traj.snapshots.iter().map(|s| s.t).collect();
    uniform_step(&times)?;
    let scale = cfg.mode_exact();
    let mut rec = DifferenceRecord {
        times,
        norm: Vec::new(),
        ratio: Vec::new(),
        grad: Vec::new(),
        grad_integral: Vec::new(),
        initial_defect: R::zero(),
    };
    for snap in &traj.snapshots {
        if snap.values.len() != ansatz.len() {
            return Err(Error::GridMismatch(format!(
                "snapshot at t = {} has {} points, ansatz grid {}",
                snap.t,
                snap.values.len(),
                ansatz.len()
            )));
        }
        let mut w: Vec<Complex<R>> = ansatz
            .profile(snap.t)
            .iter()
            .zip(&snap.values)
            .map(|(a, v)| a - v)
            .collect();
        ansatz.grid.analyze(&mut w);
        let (l2, h1) = ansatz.grid.norms_from_coefficients(&w);
        let n = small_scale_norms(cfg, l2, h1);
        let norm = n.energy_s.sqrt();
        let t = snap.t;
        rec.ratio.push(if t > R::zero() {
            norm / (t + t * t * scale)
        } else {
            R::zero()
        });
        rec.norm.push(norm);
        rec.grad.push(n);
    }
    rec.initial_defect = rec.norm[0];
    rec.grad_integral = running_trapezoid(&rec.times, &rec.grad);
    Ok(rec)
}

/// `max_t sup_y |U(t, y) - T(y) e^{-c0 t}| / t` over the given times, on the case grid.
pub fn frozen_gap_constant<R: Real>(
    cfg: &CaseConfig<R>,
    tri: &MollifiedTriangle<R>,
    times: &[R],
) -> R {
    let mut grid = PeriodicGrid::new(cfg.n_y);
    let t_nodes = tri.sample(&mut grid, 0);
    let mut worst = R::zero();
    for &t in times {
        let terms: Vec<(i64, R)> = tri
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                (
                    MollifiedTriangle::<R>::frequency(k + 1),
                    a * (-shear_rate::<R>(k + 1) * t).exp(),
                )
            })
            .collect();
        let u = grid.sample_sine_series(terms);
        let frozen = (-cfg.c0 * t).exp();
        let gap = u
            .iter()
            .zip(&t_nodes)
            .fold(R::zero(), |a, (&x, &tv)| a.max((x - tv * frozen).abs()));
        worst = worst.max(gap / t);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{DEFAULT_DELTA, DEFAULT_I_MAX};

    fn linear(t: f64) -> FlowNorms<f64> {
        FlowNorms {
            energy_l: 1.0 + t,
            grad_l: 2.0 * t,
            energy_s: 3.0 - t,
            grad_s_x1: t,
            grad_s_x2: 0.5,
        }
    }

    #[test]
    fn trapezoid_is_exact_on_linear_series() {
        let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
        let s: Vec<_> = times.iter().map(|&t| linear(t)).collect();
        let i = running_trapezoid(&times, &s);
        let want = [1.5, 1.0, 2.5, 0.5, 0.5];
        for (a, b) in i[10].values().iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_step_detects_gaps() {
        assert!((uniform_step(&[0.0f64, 0.25, 0.5, 0.75]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            uniform_step(&[0.0f64, 0.2, 0.5]),
            Err(Error::NonUniformSchedule(_))
        ));
        assert!(uniform_step(&[0.0f64]).is_err());
    }

    #[test]
    fn ansatz_grid_at_start() {
        let c = CaseConfig::<f64>::new(3, 0.5).unwrap();
        let tri = MollifiedTriangle::build(DEFAULT_DELTA, DEFAULT_I_MAX).unwrap();
        let phi = BumpProfile::default();
        let mut a = AnsatzGrid::new(&c, &tri, &phi);
        let n = a.norms(0.0);
        // Parseval against the nodal sum
        assert!((n.energy_s - 0.5 * a.phi_l2()).abs() < 1e-14);
        let (el, gl) = tri.norms();
        assert_eq!((n.energy_l, n.grad_l), (el, gl));
        assert!((n.grad_s_x1 - 0.5 * c.nu * c.kappa * c.kappa * a.phi_l2()).abs() < 1e-14);
        let p = a.profile(0.0);
        assert!(p.iter().all(|z| z.im.abs() < 1e-15 && z.re >= 0.0));
    }

    proptest::proptest! {
        #[test]
        fn norm_arithmetic(a in proptest::array::uniform5(-1e3f64..1e3), b in proptest::array::uniform5(-1e3f64..1e3), s in -10.0f64..10.0) {
            let x = FlowNorms { energy_l: a[0], grad_l: a[1], energy_s: a[2], grad_s_x1: a[3], grad_s_x2: a[4] };
            let y = FlowNorms { energy_l: b[0], grad_l: b[1], energy_s: b[2], grad_s_x1: b[3], grad_s_x2: b[4] };
            let z = (x + y) - y;
            for (p, q) in z.values().iter().zip(x.values()) {
                proptest::prop_assert!((p - q).abs() <= 1e-12 * (1.0 + q.abs() + 1e3));
            }
            proptest::prop_assert!(((x * s).dissipation() - s * x.dissipation()).abs() <= 1e-9);
            proptest::prop_assert_eq!(x.dissipation(), x.grad_l + x.grad_s_x1 + x.grad_s_x2);
        }
    }
}
