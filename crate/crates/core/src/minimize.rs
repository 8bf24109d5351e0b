//! Collision-guarded descent for the discrete action.
//!
//! Barzilai-Borwein steps with Armijo backtracking. The search direction is
//! the Sobolev gradient `A⁻¹ g`, where `A = tridiag(-1, 2, -1)` is the pinned
//! second-difference matrix; without it the iteration count grows like M².

use serde::{Deserialize, Serialize};

use crate::action::{evaluate, radial_pairing, ActionEvaluation};
use crate::error::{Error, Result};
use crate::linalg::{apply_laplacian, dot, norm, solve_laplacian};
use crate::loops::SymmetricLoop;
use crate::potentials::{virial_threshold_radii, Potential, PotentialSpec, SamplingGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Converged when `max |grad| ≤ tol · max(1, f)`.
    pub tol: f64,
    /// Collision guard; `None` picks `½ m_inner`, or `1e-3 R` when the
    /// virial thresholds are unavailable.
    pub guard: Option<f64>,
    /// Largest node displacement of the first trial step; `None` is `1e-2 R`.
    pub initial_step: Option<f64>,
    pub backtrack: f64,
    pub armijo: f64,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iters: 20000, tol: 1e-8, guard: None, initial_step: None, backtrack: 0.5, armijo: 1e-4, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
    StepUnderflow,
    CollisionTrap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeStats {
    pub iterations: usize,
    pub initial_f: f64,
    pub final_f: f64,
    /// Max-norm of the interior gradient at the returned loop.
    pub final_gradient: f64,
    /// Smallest node radius seen over all accepted iterates.
    pub min_radius: f64,
    pub guard: f64,
    pub termination: Termination,
    pub perturbed_start: bool,
    /// Accepted f values, starting with the initial one.
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Guard radius used when `opts.guard` is unset.
pub fn default_guard(p: &PotentialSpec, energy: f64, radius: f64) -> f64 {
    match virial_threshold_radii(p, energy, &SamplingGrid::standard(p.dim)) {
        Ok(t) if 0.5 * t.m_inner < radius => 0.5 * t.m_inner,
        _ => 1e-3 * radius,
    }
}

pub fn minimize_loop(
    p: &PotentialSpec,
    loop0: &SymmetricLoop,
    energy: f64,
    opts: &MinimizeOptions,
) -> Result<(SymmetricLoop, MinimizeStats)> {
    let guard = opts.guard.unwrap_or_else(|| default_guard(p, energy, loop0.radius()));
    minimize_with_guard(p, loop0, energy, opts, guard)
}

/// Same as [`minimize_loop`] for any potential, with an explicit guard.
pub fn minimize_with_guard(
    pot: &dyn Potential,
    loop0: &SymmetricLoop,
    energy: f64,
    opts: &MinimizeOptions,
    guard: f64,
) -> Result<(SymmetricLoop, MinimizeStats)> {
    validate(opts, energy, guard, loop0)?;
    let dim = loop0.dim();
    let radius = loop0.radius();

    let mut current = loop0.clone();
    let mut eval = evaluate(pot, &current, energy)?;
    let initial_f = eval.value;
    let mut perturbed_start = false;
    if radial_pairing(pot, &current, energy)?.abs() <= 1e-10 * eval.value.max(1.0) {
        let trial = current.perturbed(1e-6 * radius, opts.seed)?;
        if trial.min_radius() > guard {
            current = trial;
            eval = evaluate(pot, &current, energy)?;
            perturbed_start = true;
        }
    }

    let mut stats = MinimizeStats {
        iterations: 0,
        initial_f,
        final_f: eval.value,
        final_gradient: max_abs(&eval.gradient),
        min_radius: current.min_radius(),
        guard,
        termination: Termination::Converged,
        perturbed_start,
        history: vec![eval.value],
        warnings: Vec::new(),
    };

    let mut dir = sobolev(&eval.gradient, dim);
    let first = opts.initial_step.unwrap_or(1e-2 * radius);
    let mut step = first / max_abs(&dir).max(f64::MIN_POSITIVE);

    loop {
        stats.final_gradient = max_abs(&eval.gradient);
        stats.final_f = eval.value;
        if stats.final_gradient <= opts.tol * eval.value.max(1.0) {
            stats.termination = Termination::Converged;
            break;
        }
        if stats.iterations >= opts.max_iters {
            stats.termination = Termination::MaxIterations;
            return Err(Error::NonConvergence { best: Box::new(current), stats: Box::new(stats) });
        }

        let slope = dot(&eval.gradient, &dir);
        let x = current.interior();
        let mut a = step;
        let mut guard_hit = false;
        let accepted: Option<(SymmetricLoop, ActionEvaluation)> = loop {
            if a * max_abs(&dir) < 1e-15 * radius {
                break None;
            }
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi - a * di).collect();
            if trial.chunks(dim).any(|row| norm(row) <= guard) {
                guard_hit = true;
                a *= opts.backtrack;
                continue;
            }
            let cand = current.with_interior(&trial)?;
            match evaluate(pot, &cand, energy) {
                Ok(e) if e.value <= eval.value - opts.armijo * a * slope => break Some((cand, e)),
                Ok(_) => a *= opts.backtrack,
                Err(Error::Collision { .. }) => {
                    guard_hit = true;
                    a *= opts.backtrack;
                }
                Err(e) => return Err(e),
            }
        };

        let Some((next, next_eval)) = accepted else {
            if guard_hit {
                stats.termination = Termination::CollisionTrap;
                return Err(Error::CollisionTrap { best: Box::new(current), stats: Box::new(stats) });
            }
            stats.termination = Termination::StepUnderflow;
            return Err(Error::NonConvergence { best: Box::new(current), stats: Box::new(stats) });
        };

        let s: Vec<f64> = next.interior().iter().zip(x).map(|(b, a)| b - a).collect();
        let y: Vec<f64> = next_eval.gradient.iter().zip(&eval.gradient).map(|(b, a)| b - a).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &apply_laplacian(&s, dim)) / sy } else { 2.0 * a };

        current = next;
        eval = next_eval;
        dir = sobolev(&eval.gradient, dim);
        stats.iterations += 1;
        stats.history.push(eval.value);
        stats.min_radius = stats.min_radius.min(current.min_radius());
    }

    let r = current.min_radius();
    if r < 1.1 * guard {
        stats.warnings.push(format!("minimizer min radius {r:.6e} is within 10% of the guard {guard:.6e}"));
    }
    Ok((current, stats))
}

fn validate(opts: &MinimizeOptions, energy: f64, guard: f64, loop0: &SymmetricLoop) -> Result<()> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidArgument(format!("energy {energy} must be > 0")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    if !(opts.backtrack > 0.0 && opts.backtrack < 1.0) {
        return Err(Error::InvalidArgument("backtracking factor must lie in (0, 1)".into()));
    }
    if !(opts.armijo > 0.0 && opts.armijo < 1.0) {
        return Err(Error::InvalidArgument("Armijo constant must lie in (0, 1)".into()));
    }
    if opts.initial_step.is_some_and(|s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("initial step must be > 0".into()));
    }
    if !(guard > 0.0 && guard < loop0.radius()) {
        return Err(Error::InvalidArgument(format!("guard {guard} must lie in (0, R = {})", loop0.radius())));
    }
    if loop0.min_radius() <= guard {
        return Err(Error::InvalidArgument(format!(
            "start loop min radius {} is inside the guard {guard}",
            loop0.min_radius()
        )));
    }
    Ok(())
}

fn sobolev(g: &[f64], dim: usize) -> Vec<f64> {
    let mut p = g.to_vec();
    solve_laplacian(&mut p, dim);
    p
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::action_value;
    use std::f64::consts::PI;

    fn circle(r: f64, m: usize) -> SymmetricLoop {
        SymmetricLoop::build_circular(r, &[1.0, 0.0], &[0.0, 1.0], m).unwrap()
    }

    #[test]
    fn unit_circle_start_descends_below_circle_action() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let (q, st) = minimize_loop(&p, &circle(1.0, 128), 1.0, &MinimizeOptions::default()).unwrap();
        assert_eq!(st.termination, Termination::Converged);
        assert!(st.final_f <= 4.0 * PI * PI + 1e-6);
        assert!(st.final_f <= st.initial_f);
        assert!(st.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(st.final_f >= 0.5 * q.seminorm_sq());
        assert!(q.min_radius() > st.guard);
    }

    #[test]
    fn radius_four_bound() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let (q, st) = minimize_loop(&p, &circle(4.0, 256), 1.0, &MinimizeOptions::default()).unwrap();
        let bound = 2.0 * PI * PI * 16.0 * (1.0 + 4f64.powi(-3));
        assert!(st.final_f <= bound, "{} > {bound}", st.final_f);
        assert!((action_value(&p, &q, 1.0).unwrap() - st.final_f).abs() < 1e-12 * st.final_f);
    }

    #[test]
    fn critical_circle_is_perturbed() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let l = circle(2f64.powf(-1.0 / 3.0), 64);
        let (_, st) = minimize_loop(&p, &l, 1.0, &MinimizeOptions::default()).unwrap();
        assert!(st.perturbed_start);
    }

    #[test]
    fn deterministic() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let l = circle(2.0, 64).perturbed(0.1, 9).unwrap();
        let opts = MinimizeOptions::default();
        let (a, sa) = minimize_loop(&p, &l, 1.0, &opts).unwrap();
        let (b, sb) = minimize_loop(&p, &l, 1.0, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa.history, sb.history);
    }

    #[test]
    fn iteration_cap_returns_best() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let opts = MinimizeOptions { max_iters: 2, ..Default::default() };
        match minimize_loop(&p, &circle(4.0, 64), 1.0, &opts) {
            Err(Error::NonConvergence { best, stats }) => {
                assert_eq!(stats.iterations, 2);
                assert!(stats.final_f <= stats.initial_f);
                assert_eq!(best.radius(), 4.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn guard_must_be_inside() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let opts = MinimizeOptions { guard: Some(2.0), ..Default::default() };
        assert!(matches!(minimize_loop(&p, &circle(1.0, 16), 1.0, &opts), Err(Error::InvalidArgument(_))));
    }
}
