//! Viscosity sweeps, exponent fits and the verdict on the two estimates.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    ansatz_small_time_estimate, difference_record, dissipation_integral, energy_balance_residual,
    energy_balance_residual_exact, record_norms, AnsatzGrid, Component, DifferenceRecord,
    DissipationRecord, Flow,
};
use crate::error::{Error, Result};
use crate::exact::{CaseConfig, CaseOverrides};
use crate::profiles::{BumpProfile, MollifiedTriangle, DEFAULT_DELTA, DEFAULT_I_MAX};
use crate::solver::{solve_heat, solve_reduced, AdvectingField, Forcing, Schedule, SolveOptions};

pub const MANUFACTURED_TOL: f64 = 1e-6;
pub const ORDER_TARGET: f64 = 2.0;
pub const ORDER_TOL: f64 = 0.1;

pub use crate::exact::MAX_SNAPSHOTS;

/// Tolerance on `|w(0)|` for the chain check.
pub const INITIAL_DEFECT_TOL: f64 = 1e-12;

pub const FLOOR_RATIO: f64 = 0.5;
pub const FLOOR_SPREAD: f64 = 0.25;
pub const HEAT_EXPONENT_TOL: f64 = 0.10;
pub const HEAT_RATIO_MAX: f64 = 0.1;
pub const ENERGY_TOL_NS: f64 = 1e-6;
pub const ENERGY_TOL_HEAT: f64 = 1e-8;

/// The two profiles shared by every case of a sweep.
#[derive(Clone, Debug)]
pub struct Profiles {
    pub tri: MollifiedTriangle<f64>,
    pub phi: BumpProfile<f64>,
}

impl Profiles {
    pub fn standard() -> Result<Self> {
        Ok(Self {
            tri: MollifiedTriangle::build(DEFAULT_DELTA, DEFAULT_I_MAX)?,
            phi: BumpProfile::default(),
        })
    }
}

/// The inequality chain `D_NS >= D_NS,S,x2 >= 1/2 D_ansatz,x2 - D_w,x2`.
///
/// The second link follows from `|a|^2 >= |b|^2 / 2 - |b - a|^2`. The form
/// without the factor `1/2` is reported as `literal_holds`; it is not an
/// inequality in general.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainCheck {
    pub d_all: f64,
    pub d_s_x2: f64,
    pub ansatz_x2: f64,
    pub diff_x2: f64,
    pub bound: f64,
    pub holds: bool,
    pub literal_bound: f64,
    pub literal_holds: bool,
    pub initial_defect: f64,
    pub passed: bool,
}

/// Scalar outcome of one case.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseSummary {
    pub n: u32,
    pub alpha: f64,
    pub nu: f64,
    pub t_star: f64,
    pub mode: u64,
    pub n_y: usize,
    pub steps: usize,
    pub dt: f64,
    /// `nu int_0^{t*} |grad u|^2` from the exact substep losses.
    pub d_ns: f64,
    pub d_ns_trapezoid: f64,
    pub d_ns_s: f64,
    pub d_ns_s_x2: f64,
    /// Heat flow, closed form.
    pub d_heat: f64,
    pub d_heat_trapezoid: f64,
    pub d_heat_l: f64,
    /// Ansatz `x2` dissipation of the small scales, by trapezoid.
    pub d_ansatz: f64,
    pub d_ansatz_estimate: f64,
    /// `nu int_0^{t*} |grad w|^2`.
    pub d_diff: f64,
    pub d_diff_x2: f64,
    pub w_ratio_sup: f64,
    pub energy_residual_ns: f64,
    pub energy_residual_ns_exact: f64,
    pub energy_residual_heat: f64,
    pub u0_norm2: f64,
    pub d_ns_normalized: f64,
    pub monotone: bool,
    pub chain: ChainCheck,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub config: CaseConfig<f64>,
    pub record: DissipationRecord<f64>,
    pub difference: DifferenceRecord<f64>,
    pub summary: CaseSummary,
}

/// Heat flow, unforced reduced solve, ansatz and difference for one `(n, alpha)`.
pub fn run_case(
    n: u32,
    alpha: f64,
    overrides: &CaseOverrides,
    profiles: &Profiles,
) -> Result<CaseOutcome> {
    if n < 2 {
        return Err(Error::Config(format!("run_case needs n >= 2, got {n}")));
    }
    let start = Instant::now();
    let cfg = CaseConfig::with_overrides(n, alpha, overrides)?;
    let (tri, phi) = (&profiles.tri, &profiles.phi);
    let heat = solve_heat(&cfg, tri, phi);
    let opts = SolveOptions {
        field: AdvectingField::Series,
        forcing: Forcing::None,
        schedule: Schedule::capped(cfg.steps, MAX_SNAPSHOTS),
    };
    let traj = solve_reduced(&cfg, tri, phi, &opts)?;
    let mut ansatz = AnsatzGrid::new(&cfg, tri, phi);
    let record = record_norms(&traj, &heat, &mut ansatz, &cfg)?;
    let difference = difference_record(&traj, &mut ansatz, &cfg)?;

    let d_ns = record.ns_exact.dissipation();
    let d_ns_s_x2 = record.ns_exact.grad_s_x2;
    let ansatz_x2 = dissipation_integral(&record, Flow::Ansatz, Component::SX2);
    let diff = difference.dissipation();
    let bound = 0.5 * ansatz_x2 - diff.grad_s_x2;
    let literal_bound = ansatz_x2 - diff.grad_s_x2;
    let initial_defect = difference.initial_defect;
    let holds = d_ns >= d_ns_s_x2 && d_ns_s_x2 >= bound;
    let chain = ChainCheck {
        d_all: d_ns,
        d_s_x2: d_ns_s_x2,
        ansatz_x2,
        diff_x2: diff.grad_s_x2,
        bound,
        holds,
        literal_bound,
        literal_holds: d_ns >= d_ns_s_x2 && d_ns_s_x2 >= literal_bound,
        initial_defect,
        passed: holds && initial_defect <= INITIAL_DEFECT_TOL,
    };
    let u0_norm2 = record.ns[0].energy();
    let summary = CaseSummary {
        n,
        alpha,
        nu: cfg.nu,
        t_star: cfg.t_star,
        mode: cfg.mode,
        n_y: cfg.n_y,
        steps: cfg.steps,
        dt: cfg.dt,
        d_ns,
        d_ns_trapezoid: dissipation_integral(&record, Flow::Ns, Component::All),
        d_ns_s: record.ns_exact.dissipation_s(),
        d_ns_s_x2,
        d_heat: record.heat_exact.dissipation(),
        d_heat_trapezoid: dissipation_integral(&record, Flow::Heat, Component::All),
        d_heat_l: record.heat_exact.grad_l,
        d_ansatz: ansatz_x2,
        d_ansatz_estimate: ansatz_small_time_estimate(&cfg, ansatz.phi_l2()),
        d_diff: diff.dissipation_s(),
        d_diff_x2: diff.grad_s_x2,
        w_ratio_sup: difference.sup_ratio(),
        energy_residual_ns: energy_balance_residual(&record.times, &record.ns)?,
        energy_residual_ns_exact: energy_balance_residual_exact(
            &traj.times,
            &traj.norms,
            &traj.exact_integrals,
        )?,
        energy_residual_heat: energy_balance_residual(&record.times, &record.heat)?,
        u0_norm2,
        d_ns_normalized: d_ns / u0_norm2,
        monotone: record.ns_monotone,
        chain,
        warnings: cfg.warnings.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(CaseOutcome {
        config: cfg,
        record,
        difference,
        summary,
    })
}

/// Manufactured-solution run at one time step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManufacturedRun {
    pub dt: f64,
    pub steps: usize,
    /// `|v(t*) - vbar(t*)| / |vbar(t*)|` in `L2`.
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManufacturedReport {
    pub n: u32,
    pub alpha: f64,
    pub runs: Vec<ManufacturedRun>,
    /// `log2(e(dt) / e(dt/2))` for consecutive halvings.
    pub orders: Vec<f64>,
    pub error_passed: bool,
    pub order_passed: bool,
}

impl ManufacturedReport {
    pub fn passed(&self) -> bool {
        self.error_passed && self.order_passed
    }
}

/// Forced reduced solve with the frozen shear, which the ansatz solves
/// exactly; relative error at `t*`.
pub fn manufactured_error(cfg: &CaseConfig<f64>, profiles: &Profiles) -> Result<f64> {
    let opts = SolveOptions {
        field: AdvectingField::Frozen,
        forcing: Forcing::AnsatzResidual,
        schedule: Schedule::Endpoints,
    };
    let traj = solve_reduced(cfg, &profiles.tri, &profiles.phi, &opts)?;
    let exact = AnsatzGrid::new(cfg, &profiles.tri, &profiles.phi).profile(cfg.t_star);
    let last = traj
        .last()
        .ok_or_else(|| Error::Incomplete("no final state".into()))?;
    let num: f64 = exact
        .iter()
        .zip(&last.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let den: f64 = exact.iter().map(|a| a.norm_sqr()).sum();
    Ok((num / den).sqrt())
}

/// Runs the manufactured solution at the case's time step and `halvings`
/// successive halvings of it. The first halving decides the order check.
pub fn manufactured_check(
    n: u32,
    alpha: f64,
    overrides: &CaseOverrides,
    halvings: usize,
    profiles: &Profiles,
) -> Result<ManufacturedReport> {
    let base = CaseConfig::with_overrides(n, alpha, overrides)?;
    let mut runs = Vec::new();
    for h in 0..=halvings {
        let o = CaseOverrides {
            dt: Some(base.dt / 2f64.powi(h as i32)),
            ..overrides.clone()
        };
        let cfg = CaseConfig::with_overrides(n, alpha, &o)?;
        runs.push(ManufacturedRun {
            dt: cfg.dt,
            steps: cfg.steps,
            error: manufactured_error(&cfg, profiles)?,
        });
    }
    let orders: Vec<f64> = runs
        .windows(2)
        .map(|w| (w[0].error / w[1].error).log2())
        .collect();
    Ok(ManufacturedReport {
        n,
        alpha,
        error_passed: runs[0].error <= MANUFACTURED_TOL,
        order_passed: orders
            .first()
            .is_some_and(|o| (o - ORDER_TARGET).abs() <= ORDER_TOL),
        runs,
        orders,
    })
}

/// Log-log least squares `log value = exponent * log nu + intercept`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Largest absolute deviation in `log value`.
    pub residual: f64,
    /// Indices of pairs dropped for a nonpositive entry.
    pub rejected: Vec<usize>,
}

pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    let mut rejected = Vec::new();
    let mut pts = Vec::new();
    for (k, &(nu, v)) in pairs.iter().enumerate() {
        if nu > 0.0 && v > 0.0 && nu.is_finite() && v.is_finite() {
            pts.push((nu.ln(), v.ln()));
        } else {
            rejected.push(k);
        }
    }
    if pts.len() < 3 {
        return Err(Error::Config(format!(
            "exponent fit needs at least 3 positive pairs, got {} (rejected {rejected:?})",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Config(
            "exponent fit needs distinct viscosities".into(),
        ));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - exponent * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        exponent,
        intercept,
        residual,
        rejected,
    })
}

/// `t* (1 + nu^{1 - 2 max(1/2, alpha)})`, the heat-flow bound without its constant.
pub fn heat_bound(nu: f64, alpha: f64) -> f64 {
    nu.powf(2.0 * alpha / 3.0) * (1.0 + nu.powf(1.0 - 2.0 * alpha.max(0.5)))
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepFits {
    pub ns: Option<ExponentFit>,
    pub heat: Option<ExponentFit>,
    pub heat_l: Option<ExponentFit>,
    pub heat_bound: Option<ExponentFit>,
    pub ansatz: Option<ExponentFit>,
    pub diff: Option<ExponentFit>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseFailure {
    pub n: u32,
    pub error: String,
}

/// One criterion of the verdict; `margin > 0` when it passes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub criteria: Vec<CriterionResult>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub alpha: f64,
    pub n_list: Vec<u32>,
    pub overrides: CaseOverrides,
    pub rows: Vec<CaseSummary>,
    pub failures: Vec<CaseFailure>,
    pub fits: SweepFits,
    pub verdict: Verdict,
    #[serde(skip)]
    pub outcomes: Vec<CaseOutcome>,
}

/// Runs every case of the sweep on a pool of `workers` threads.
pub fn run_sweep(
    alpha: f64,
    n_list: &[u32],
    overrides: &CaseOverrides,
    workers: usize,
    profiles: &Profiles,
) -> Result<SweepReport> {
    run_sweep_cancellable(
        alpha,
        n_list,
        overrides,
        workers,
        profiles,
        &AtomicBool::new(false),
    )
}

/// [`run_sweep`]; cases not yet started when `cancel` is set are recorded as
/// failures, so the report stays partial but consistent.
pub fn run_sweep_cancellable(
    alpha: f64,
    n_list: &[u32],
    overrides: &CaseOverrides,
    workers: usize,
    profiles: &Profiles,
    cancel: &AtomicBool,
) -> Result<SweepReport> {
    if n_list.len() < 3 {
        return Err(Error::Config(format!(
            "a sweep needs at least 3 levels, got {}",
            n_list.len()
        )));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("n_list must be strictly increasing".into()));
    }
    if !(alpha > 0.0 && alpha < 0.75) {
        return Err(Error::Config(format!(
            "alpha must lie in (0, 3/4), got {alpha}"
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<(u32, Result<CaseOutcome>)> = pool.install(|| {
        n_list
            .par_iter()
            .map(|&n| {
                if cancel.load(Ordering::Relaxed) {
                    return (n, Err(Error::Incomplete("cancelled before start".into())));
                }
                (n, run_case(n, alpha, overrides, profiles))
            })
            .collect()
    });
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => failures.push(CaseFailure {
                n,
                error: e.to_string(),
            }),
        }
    }
    let rows: Vec<CaseSummary> = outcomes.iter().map(|o| o.summary.clone()).collect();
    let fits = fit_rows(&rows, alpha);
    let mut report = SweepReport {
        alpha,
        n_list: n_list.to_vec(),
        overrides: overrides.clone(),
        rows,
        failures,
        fits,
        verdict: Verdict {
            status: Status::Indeterminate,
            criteria: Vec::new(),
            notes: Vec::new(),
        },
        outcomes,
    };
    report.verdict = verify_theorem(&report);
    Ok(report)
}

fn fit_rows(rows: &[CaseSummary], alpha: f64) -> SweepFits {
    let fit = |f: &dyn Fn(&CaseSummary) -> f64| {
        let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.nu, f(r))).collect();
        fit_exponent(&pairs).ok()
    };
    SweepFits {
        ns: fit(&|r| r.d_ns),
        heat: fit(&|r| r.d_heat),
        heat_l: fit(&|r| r.d_heat_l),
        heat_bound: fit(&|r| heat_bound(r.nu, alpha)),
        ansatz: fit(&|r| r.d_ansatz),
        diff: fit(&|r| r.d_diff),
    }
}

/// Floor criterion on a sequence of dissipation values ordered by `n`:
/// `min >= 0.5 max` and the last three agree pairwise within 25%.
pub fn floor_criterion(values: &[f64]) -> CriterionResult {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = &values[values.len().saturating_sub(3)..];
    let mut spread = 0.0f64;
    for a in tail {
        for b in tail {
            spread = spread.max((a - b).abs() / a.max(*b));
        }
    }
    let ratio = min / max;
    let passed = values.len() >= 3 && ratio >= FLOOR_RATIO && spread < FLOOR_SPREAD;
    CriterionResult {
        id: "i".into(),
        name: "dissipation floor".into(),
        passed,
        measured: ratio,
        threshold: FLOOR_RATIO,
        margin: (ratio - FLOOR_RATIO).min(FLOOR_SPREAD - spread),
        detail: format!("min/max = {ratio:.4}, last-three spread = {spread:.4}"),
    }
}

/// Checks criteria (i) to (iv) on a finished report.
pub fn verify_theorem(report: &SweepReport) -> Verdict {
    let rows = &report.rows;
    let mut notes = Vec::new();
    let mut criteria = Vec::new();
    if rows.len() < 3 {
        notes.push(format!("only {} completed cases", rows.len()));
        return Verdict {
            status: Status::Indeterminate,
            criteria,
            notes,
        };
    }
    let d_ns: Vec<f64> = rows.iter().map(|r| r.d_ns).collect();
    criteria.push(floor_criterion(&d_ns));

    let last = rows.last().expect("rows checked above");
    let ratio = last.d_heat / last.d_ns;
    criteria.push(match (&report.fits.heat, &report.fits.heat_bound) {
        (Some(h), Some(b)) => {
            let rel = (h.exponent - b.exponent).abs() / b.exponent.abs();
            CriterionResult {
                id: "ii".into(),
                name: "heat-flow exponent".into(),
                passed: rel <= HEAT_EXPONENT_TOL && ratio <= HEAT_RATIO_MAX,
                measured: h.exponent,
                threshold: b.exponent,
                margin: (HEAT_EXPONENT_TOL - rel).min(HEAT_RATIO_MAX - ratio),
                detail: format!(
                    "fitted {:.4} vs predicted {:.4} (relative gap {rel:.3}); D_heat/D_NS at n = {} is {ratio:.4}",
                    h.exponent, b.exponent, last.n
                ),
            }
        }
        _ => CriterionResult {
            id: "ii".into(),
            name: "heat-flow exponent".into(),
            passed: false,
            measured: f64::NAN,
            threshold: f64::NAN,
            margin: f64::NEG_INFINITY,
            detail: "exponent fit unavailable".into(),
        },
    });

    let broken: Vec<String> = rows
        .iter()
        .filter(|r| !r.chain.passed)
        .map(|r| {
            format!(
                "n = {}: D_S,x2 = {:.4e}, bound = {:.4e}, |w(0)| = {:.2e}",
                r.n, r.chain.d_s_x2, r.chain.bound, r.chain.initial_defect
            )
        })
        .collect();
    let chain_margin = rows
        .iter()
        .map(|r| r.chain.d_s_x2 - r.chain.bound)
        .fold(f64::INFINITY, f64::min);
    criteria.push(CriterionResult {
        id: "iii".into(),
        name: "lower-bound chain".into(),
        passed: broken.is_empty(),
        measured: chain_margin,
        threshold: 0.0,
        margin: chain_margin,
        detail: if broken.is_empty() {
            "holds in every case".into()
        } else {
            broken.join("; ")
        },
    });

    let worst_ns = rows
        .iter()
        .map(|r| r.energy_residual_ns)
        .fold(0.0, f64::max);
    let worst_heat = rows
        .iter()
        .map(|r| r.energy_residual_heat)
        .fold(0.0, f64::max);
    criteria.push(CriterionResult {
        id: "iv".into(),
        name: "energy balance".into(),
        passed: worst_ns <= ENERGY_TOL_NS && worst_heat <= ENERGY_TOL_HEAT,
        measured: worst_ns,
        threshold: ENERGY_TOL_NS,
        margin: (ENERGY_TOL_NS - worst_ns).min(ENERGY_TOL_HEAT - worst_heat),
        detail: format!("max residual NS {worst_ns:.3e}, heat {worst_heat:.3e}"),
    });

    for f in &report.failures {
        notes.push(format!("case n = {} failed: {}", f.n, f.error));
    }
    if rows.iter().any(|r| r.n <= 3) {
        notes.push("small levels are preasymptotic: c0 t* is not small there".into());
    }
    let status = if criteria.iter().any(|c| !c.passed) {
        Status::Fail
    } else if !report.failures.is_empty() {
        Status::Indeterminate
    } else {
        Status::Pass
    };
    Verdict {
        status,
        criteria,
        notes,
    }
}

/// File name of a case's CSV, `case_{n}_{alpha}.csv`.
pub fn case_file_name(n: u32, alpha: f64) -> String {
    format!("case_{n}_{alpha}.csv")
}

impl SweepReport {
    /// Writes `report.json`, one CSV per case (plus the difference record and
    /// a JSON sidecar) and `plotdata.dat` under `dir`.
    pub fn write(&self, dir: &Path, stamp: &str) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut doc = serde_json::to_value(self)?;
        doc["config_hash"] = serde_json::Value::String(stamp.to_owned());
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&doc)?)?;
        for o in &self.outcomes {
            let name = case_file_name(o.summary.n, self.alpha);
            o.record
                .write_csv(fs::File::create(dir.join(&name))?, stamp)?;
            let stem = name.trim_end_matches(".csv");
            o.difference.write_csv(
                fs::File::create(dir.join(format!("{stem}_difference.csv")))?,
                stamp,
            )?;
            let mut side = serde_json::to_value(&o.summary)?;
            side["config_hash"] = serde_json::Value::String(stamp.to_owned());
            side["wall_time_s"] = serde_json::Value::Null;
            fs::write(
                dir.join(format!("{stem}.json")),
                serde_json::to_string_pretty(&side)?,
            )?;
        }
        let mut plot = fs::File::create(dir.join("plotdata.dat"))?;
        writeln!(plot, "# config {stamp}")?;
        writeln!(plot, "# log2(1/nu) ln(D_NS) ln(D_heat) ln(D_ansatz)")?;
        for r in &self.rows {
            writeln!(
                plot,
                "{} {} {} {}",
                2 * r.n,
                r.d_ns.ln(),
                r.d_heat.ln(),
                r.d_ansatz.ln()
            )?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_fit() {
        let pairs: Vec<(f64, f64)> = (3..9)
            .map(|n| {
                let nu = 2f64.powi(-2 * n);
                (nu, 3.0 * nu.powf(1.0 / 3.0))
            })
            .collect();
        let f = fit_exponent(&pairs).unwrap();
        assert!((f.exponent - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_nonpositive() {
        let pairs = [(0.1, 1.0), (0.01, -1.0), (0.001, 2.0), (1e-4, 3.0)];
        let f = fit_exponent(&pairs).unwrap();
        assert_eq!(f.rejected, vec![1]);
        assert!(fit_exponent(&pairs[..3]).is_err());
    }

    #[test]
    fn floor_rule() {
        assert!(floor_criterion(&[1.0, 0.9, 0.95, 0.92]).passed);
        assert!(!floor_criterion(&[1.0, 0.4, 0.45, 0.42]).passed);
        assert!(!floor_criterion(&[1.0, 0.9, 0.6, 0.95]).passed);
    }

    #[test]
    fn heat_bound_branches() {
        let nu: f64 = 2f64.powi(-10);
        assert!((heat_bound(nu, 0.5) - 2.0 * nu.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(heat_bound(nu, 0.7) > nu.powf(0.7 * 2.0 / 3.0));
    }

    #[test]
    fn sweep_preconditions() {
        let p = Profiles::standard().unwrap();
        let o = CaseOverrides::default();
        assert!(run_sweep(0.5, &[3, 4], &o, 1, &p).is_err());
        assert!(run_sweep(0.5, &[4, 3, 5], &o, 1, &p).is_err());
        assert!(run_sweep(0.8, &[3, 4, 5], &o, 1, &p).is_err());
        assert!(run_case(1, 0.5, &o, &p).is_err());
    }

    proptest::proptest! {
        #[test]
        fn fit_recovers_random_power_laws(e in -1.0f64..1.0, c in 0.01f64..100.0) {
            let pairs: Vec<(f64, f64)> = (3..9).map(|n| {
                let nu = 2f64.powi(-2 * n);
                (nu, c * nu.powf(e))
            }).collect();
            let f = fit_exponent(&pairs).unwrap();
            proptest::prop_assert!((f.exponent - e).abs() < 1e-10);
            proptest::prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
        }
    }
}
