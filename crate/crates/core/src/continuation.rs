//! Continuation in the pin radius `R`: minimize, rescale, recenter and
//! collect per-`R` diagnostics.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    action_constant, angular_diagnostics, area_rate_check, asymptotic_direction, escape_profile, DirectionOptions,
    DirectionReport,
};
use crate::error::{Error, Result};
use crate::linalg::{norm, orthogonal_unit};
use crate::loops::SymmetricLoop;
use crate::minimize::{minimize_loop, MinimizeOptions, MinimizeStats};
use crate::orbit::{maupertuis_rescale, residuals, time_translate, PeriodicOrbit};
use crate::potentials::{check_hypotheses, virial_threshold_radii, PotentialSpec, SamplingGrid, VirialThresholds};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub potential: PotentialSpec,
    pub energy: f64,
    pub direction: Vec<f64>,
    pub schedule: Vec<f64>,
    pub grid: usize,
    /// `None` picks `0.75 · min(schedule)`.
    pub comparison_l: Option<f64>,
    /// `None` picks `M_outer`.
    pub recenter_radius: Option<f64>,
    pub window_tau: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub minimizer: MinimizeOptions,
}

impl ContinuationConfig {
    pub fn new(potential: PotentialSpec, energy: f64, direction: Vec<f64>) -> Self {
        Self {
            potential,
            energy,
            direction,
            schedule: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            grid: 1024,
            comparison_l: None,
            recenter_radius: None,
            window_tau: 2.0,
            eta: 0.1,
            epsilon: 0.1,
            minimizer: MinimizeOptions::default(),
        }
    }

    pub fn comparison_radius(&self) -> f64 {
        self.comparison_l.unwrap_or_else(|| 0.75 * self.schedule.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Checks everything that does not need the potential's thresholds.
    pub fn validate_basic(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.energy.is_finite() && self.energy > 0.0) {
            return bad(format!("energy {} must be > 0", self.energy));
        }
        if self.direction.len() != self.potential.dim {
            return bad("direction dimension differs from the potential's".into());
        }
        if (norm(&self.direction) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidFrame("direction must be a unit vector".into()));
        }
        if self.schedule.is_empty() {
            return bad("empty schedule".into());
        }
        if self.schedule.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("schedule radii must be positive".into());
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad("schedule must be strictly increasing".into());
        }
        if self.grid < crate::loops::MIN_HALF_NODES {
            return bad(format!("grid {} is below the minimum half-grid count", self.grid));
        }
        if !(self.window_tau > 0.0) {
            return bad("window_tau must be > 0".into());
        }
        if !(self.eta > 0.0 && self.eta < 0.5) {
            return bad(format!("eta = {} must lie in (0, 1/2)", self.eta));
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be > 0".into());
        }
        Ok(())
    }

    /// Full validation including `M_outer < L < min R`.
    pub fn validate(&self, thresholds: &VirialThresholds) -> Result<()> {
        self.validate_basic()?;
        let l = self.comparison_radius();
        let r_min = self.schedule[0];
        if !(l > thresholds.m_outer) {
            return Err(Error::InvalidArgument(format!("L = {l} must exceed M_outer = {}", thresholds.m_outer)));
        }
        if !(l < r_min) {
            return Err(Error::InvalidComparisonRadius { l, r: r_min });
        }
        if self.recenter_radius.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::InvalidArgument("recenter radius must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizerSummary {
    pub iterations: usize,
    pub final_gradient: f64,
    pub guard: f64,
    pub perturbed_start: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionBound {
    /// `√(2 f(q_R))`.
    pub sqrt_2f: f64,
    /// Comparison half-path action.
    pub half_action: f64,
    /// `2√H R + M₆`.
    pub proof_chain_bound: f64,
    /// `√(2H) R + M₆`.
    pub statement_bound: f64,
    /// `proof_chain_bound − sqrt_2f`; negative means the literal bound fails.
    pub proof_chain_slack: f64,
    pub statement_slack: f64,
    /// `√(2f) ≤ 2·half_action`: the same comparison closed into a full loop.
    pub full_loop_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub radius: f64,
    pub action: f64,
    pub period: f64,
    pub min_radius: f64,
    pub max_radius: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    /// `T_R/2 − t₊`.
    pub escape_margin: f64,
    /// `√H (R − L)`.
    pub escape_lhs: f64,
    /// `√2 (H + M₃)(T_R/2 − t₊)`.
    pub escape_rhs: f64,
    pub t_star: Option<f64>,
    pub energy_residual: f64,
    pub ode_residual: f64,
    pub virial_residual: f64,
    pub corner_jump_sum: f64,
    pub virial_balance: f64,
    pub lipschitz: f64,
    pub m3: f64,
    pub m5: f64,
    pub cloc_delta: Option<f64>,
    pub action_bound: ActionBound,
    pub direction_error: Option<f64>,
    pub direction: Option<DirectionReport>,
    pub area_rate_excess: f64,
    pub physical_spacing: f64,
    pub minimizer: MinimizerSummary,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ContinuationRun {
    pub records: Vec<DiagnosticsRecord>,
    pub loops: Vec<SymmetricLoop>,
    pub orbits: Vec<PeriodicOrbit>,
    /// Recentered orbits; `None` where no crossing of the recenter radius exists.
    pub recentered: Vec<Option<PeriodicOrbit>>,
    pub thresholds: VirialThresholds,
    pub comparison_l: f64,
    pub recenter_radius: f64,
    pub m6: f64,
    /// Whether the C_loc deltas that exist are non-increasing.
    pub cloc_monotone: Option<bool>,
    pub warnings: Vec<String>,
}

impl ContinuationRun {
    /// Final recentered orbit, the proxy for the limit orbit.
    pub fn limit_proxy(&self) -> Option<&PeriodicOrbit> {
        self.recentered.last()?.as_ref()
    }
}

pub fn run_continuation(cfg: &ContinuationConfig) -> Result<ContinuationRun> {
    cfg.validate_basic()?;
    let p = &cfg.potential;
    let report = check_hypotheses(p, &SamplingGrid::standard(p.dim))?;
    if !report.core_passed() {
        return Err(Error::Hypothesis(format!("{} fails {:?}", p.id(), report.failures())));
    }
    let thresholds = virial_threshold_radii(p, cfg.energy, &SamplingGrid::standard(p.dim))?;
    cfg.validate(&thresholds)?;

    let h = cfg.energy;
    let l = cfg.comparison_radius();
    let recenter_radius = cfg.recenter_radius.unwrap_or(thresholds.m_outer);
    let m6 = action_constant(p, h, &cfg.direction)?;
    let label = p.id();
    let eta_vec = orthogonal_unit(&cfg.direction);

    let mut run = ContinuationRun {
        records: Vec::new(),
        loops: Vec::new(),
        orbits: Vec::new(),
        recentered: Vec::new(),
        thresholds,
        comparison_l: l,
        recenter_radius,
        m6,
        cloc_monotone: None,
        warnings: Vec::new(),
    };

    for &radius in &cfg.schedule {
        let abort = |run: &ContinuationRun, e: Error| Error::ContinuationAborted {
            radius,
            partial: Box::new(run.records.clone()),
            source: Box::new(e),
        };
        let start = match run.loops.last() {
            None => SymmetricLoop::build_circular(radius, &cfg.direction, &eta_vec, cfg.grid),
            Some(prev) => prev.resample(cfg.grid, Some(radius)),
        }
        .map_err(|e| abort(&run, e))?;
        let (q, stats) = minimize_loop(p, &start, h, &cfg.minimizer).map_err(|e| abort(&run, e))?;
        let orbit = maupertuis_rescale(p, &q, h, &label).map_err(|e| abort(&run, e))?;
        let res = residuals(p, &orbit).map_err(|e| abort(&run, e))?;
        let mut warnings = stats.warnings.clone();

        let (t_minus, t_plus) = escape_times(&orbit, l).map_err(|e| abort(&run, e))?;
        let recentered = match recenter(&orbit, recenter_radius) {
            Ok((o, t)) => Some((o, t)),
            Err(e @ Error::RecenterImpossible { .. }) => {
                warnings.push(format!("no recentering: {e}"));
                None
            }
            Err(e) => return Err(abort(&run, e)),
        };
        if orbit.dt > 0.05 {
            warnings.push(format!("physical grid spacing {:.4} exceeds 0.05", orbit.dt));
        }

        let cloc = match (&recentered, run.recentered.last()) {
            (Some((cur, _)), Some(Some(prev))) => {
                Some(cloc_delta(prev, cur, cfg.window_tau).map_err(|e| abort(&run, e))?)
            }
            _ => None,
        };

        let profile =
            escape_profile(p, h, &cfg.direction, radius.max(1.0 + 1e-9), Some(m6)).map_err(|e| abort(&run, e))?;
        let sqrt_2f = (2.0 * stats.final_f).sqrt();
        let action_bound = ActionBound {
            sqrt_2f,
            half_action: profile.half_action,
            proof_chain_bound: profile.proof_chain_bound,
            statement_bound: profile.statement_bound,
            proof_chain_slack: profile.proof_chain_bound - sqrt_2f,
            statement_slack: profile.statement_bound - sqrt_2f,
            full_loop_ok: sqrt_2f <= 2.0 * profile.half_action,
        };

        let direction = match asymptotic_direction(
            &orbit,
            p,
            DirectionOptions { epsilon: cfg.epsilon, eta: cfg.eta, tol: orbit.dt * orbit.dt },
        ) {
            Ok(d) => Some(d),
            Err(e) => {
                warnings.push(format!("asymptotic direction unavailable: {e}"));
                None
            }
        };

        let traj = orbit.to_trajectory();
        let diag = angular_diagnostics(&traj);
        let skip: Vec<usize> = orbit.corners.iter().filter(|&&c| c < orbit.cycle() && c > 0).copied().collect();
        let area = area_rate_check(&diag, &traj, p, &skip, 0.0).map_err(|e| abort(&run, e))?;

        let escape_margin = orbit.half_period() - t_plus;
        run.records.push(DiagnosticsRecord {
            radius,
            action: stats.final_f,
            period: orbit.period,
            min_radius: orbit.min_radius(),
            max_radius: orbit.max_radius(),
            t_minus,
            t_plus,
            escape_margin,
            escape_lhs: h.sqrt() * (radius - l),
            escape_rhs: 2f64.sqrt() * (h + res.m3) * escape_margin,
            t_star: recentered.as_ref().map(|(_, t)| *t),
            energy_residual: res.energy,
            ode_residual: res.ode,
            virial_residual: res.virial,
            corner_jump_sum: res.corner_jump_sum,
            virial_balance: res.virial_balance,
            lipschitz: res.lipschitz,
            m3: res.m3,
            m5: res.m5,
            cloc_delta: cloc,
            action_bound,
            direction_error: direction.as_ref().map(|d| d.estimate_error),
            direction,
            area_rate_excess: area.max_excess,
            physical_spacing: orbit.dt,
            minimizer: summary(&stats),
            warnings,
        });
        run.loops.push(q);
        run.orbits.push(orbit);
        run.recentered.push(recentered.map(|(o, _)| o));
    }

    let deltas: Vec<f64> = run.records.iter().filter_map(|r| r.cloc_delta).collect();
    if deltas.len() >= 2 {
        let mono = deltas.windows(2).all(|w| w[1] <= w[0]);
        if !mono {
            run.warnings.push("C_loc deltas are not monotone (tolerated: convergence is along a subsequence)".into());
        }
        run.cloc_monotone = Some(mono);
    }
    if run.recentered.iter().all(Option::is_none) {
        run.warnings.push(format!("no orbit crosses the recenter radius {recenter_radius}"));
    }
    Ok(run)
}

fn summary(stats: &MinimizeStats) -> MinimizerSummary {
    MinimizerSummary {
        iterations: stats.iterations,
        final_gradient: stats.final_gradient,
        guard: stats.guard,
        perturbed_start: stats.perturbed_start,
    }
}

/// Time of the earliest crossing of `|u| = radius`, with linear
/// interpolation of `|u|` between grid nodes.
pub fn first_crossing(orbit: &PeriodicOrbit, radius: f64) -> Option<f64> {
    let r = orbit.radii();
    for i in 0..r.len() {
        if r[i] == radius {
            return Some(orbit.time(i));
        }
        if i + 1 < r.len() && (r[i] - radius) * (r[i + 1] - radius) < 0.0 {
            let w = (radius - r[i]) / (r[i + 1] - r[i]);
            return Some(orbit.time(i) + w * orbit.dt);
        }
    }
    None
}

/// Shifts the orbit so that its first crossing of `|u| = radius` sits at
/// `t = 0`; returns the shifted orbit and `t*`.
pub fn recenter(orbit: &PeriodicOrbit, radius: f64) -> Result<(PeriodicOrbit, f64)> {
    let t_star = first_crossing(orbit, radius).ok_or(Error::RecenterImpossible {
        radius,
        min_radius: orbit.min_radius(),
        max_radius: orbit.max_radius(),
    })?;
    Ok((time_translate(orbit, t_star), t_star))
}

/// First and last times with `|u| ≤ L`, interpolated at the crossings.
pub fn escape_times(orbit: &PeriodicOrbit, l: f64) -> Result<(f64, f64)> {
    if !(l < orbit.radius) {
        return Err(Error::InvalidComparisonRadius { l, r: orbit.radius });
    }
    let r = orbit.radii();
    let inside = |i: usize| r[i] <= l;
    let first = (0..r.len())
        .find(|&i| inside(i))
        .ok_or(Error::NoInteriorPassage { radius: l, min_radius: orbit.min_radius() })?;
    let last = (0..r.len()).rfind(|&i| inside(i)).unwrap_or(first);
    let cross = |a: usize, b: usize| orbit.time(a) + (l - r[a]) / (r[b] - r[a]) * (orbit.time(b) - orbit.time(a));
    let t_minus = if first == 0 { orbit.time(0) } else { cross(first - 1, first) };
    let t_plus = if last + 1 == r.len() { orbit.time(last) } else { cross(last, last + 1) };
    Ok((t_minus, t_plus))
}

/// `sup_{|t| ≤ τ} |a(t) − b(t)|` on a common grid finer than either orbit's.
pub fn cloc_delta(a: &PeriodicOrbit, b: &PeriodicOrbit, tau: f64) -> Result<f64> {
    let half = a.half_period().min(b.half_period());
    if !(tau > 0.0) || tau > half {
        return Err(Error::Window { tau, half_period: half });
    }
    let step = 0.25 * a.dt.min(b.dt);
    let n = (2.0 * tau / step).ceil() as usize;
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let t = -tau + 2.0 * tau * i as f64 / n as f64;
        let (x, y) = (a.interpolate(t), b.interpolate(t));
        sup = sup.max(x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt());
    }
    Ok(sup)
}
