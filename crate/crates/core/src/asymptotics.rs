//! Angular diagnostics on escape segments and the action / direction bounds
//! for the large-`R` limit.
//!
//! The two escape tails of a rescaled minimizer are the pieces adjacent to
//! the `+Re` pin: the arc leaving the last periapsis and running out to the
//! pin, and the arc arriving from the pin, taken in reversed time so both
//! are outward escapes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, orthogonal_unit, wedge_norm_sq};
use crate::orbit::{PeriodicOrbit, Trajectory};
use crate::potentials::{Potential, PotentialSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AngularDiagnostics {
    pub dim: usize,
    pub times: Vec<f64>,
    /// `A = √(|u|²|u̇|² − (u, u̇)²)`.
    pub area: Vec<f64>,
    /// `ω = A / (|u||u̇|)`, clamped to `[0, 1]`.
    pub omega: Vec<f64>,
    /// `u/|u|`, row-major.
    pub directions: Vec<f64>,
    /// Sign of `(u, u̇)`: -1, 0 or 1.
    pub radial_sign: Vec<i8>,
    pub radii: Vec<f64>,
    pub speeds: Vec<f64>,
}

impl AngularDiagnostics {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.dim..(i + 1) * self.dim]
    }
}

pub fn angular_diagnostics(traj: &Trajectory) -> AngularDiagnostics {
    let n = traj.len();
    let d = traj.dim;
    let mut out = AngularDiagnostics {
        dim: d,
        times: traj.times.clone(),
        area: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        directions: Vec::with_capacity(n * d),
        radial_sign: Vec::with_capacity(n),
        radii: Vec::with_capacity(n),
        speeds: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (u, v) = (traj.position(i), traj.velocity(i));
        let (r, s) = (norm(u), norm(v));
        let a = wedge_norm_sq(u, v).max(0.0).sqrt();
        let w = if r * s > 0.0 { (a / (r * s)).clamp(0.0, 1.0) } else { 0.0 };
        let uv = dot(u, v);
        out.area.push(a);
        out.omega.push(w);
        out.directions.extend(u.iter().map(|x| x / r));
        out.radial_sign.push(if uv > 0.0 {
            1
        } else if uv < 0.0 {
            -1
        } else {
            0
        });
        out.radii.push(r);
        out.speeds.push(s);
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AreaRateReport {
    /// max over intervals of `|ΔA/Δt| − max |u||∇V(u)|` at the endpoints.
    pub max_excess: f64,
    pub max_rate: f64,
    pub tol: f64,
    pub intervals: usize,
    pub pass: bool,
}

/// Checks `|ΔA/Δt| ≤ |u||∇V(u)| + tol` on every grid interval, skipping
/// intervals that end at a node listed in `skip_ending_at`.
pub fn area_rate_check(
    diag: &AngularDiagnostics,
    traj: &Trajectory,
    pot: &dyn Potential,
    skip_ending_at: &[usize],
    tol: f64,
) -> Result<AreaRateReport> {
    let mut g = vec![0.0; traj.dim];
    let mut bound = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        pot.value_gradient(traj.position(i), &mut g)?;
        bound.push(diag.radii[i] * norm(&g));
    }
    let mut rep = AreaRateReport { max_excess: f64::NEG_INFINITY, max_rate: 0.0, tol, intervals: 0, pass: true };
    for i in 0..traj.len().saturating_sub(1) {
        if skip_ending_at.contains(&(i + 1)) {
            continue;
        }
        let dt = diag.times[i + 1] - diag.times[i];
        let rate = (diag.area[i + 1] - diag.area[i]).abs() / dt.abs();
        rep.max_rate = rep.max_rate.max(rate);
        rep.max_excess = rep.max_excess.max(rate - bound[i].max(bound[i + 1]));
        rep.intervals += 1;
    }
    rep.pass = rep.max_excess <= tol;
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct EscapeTails {
    /// From the periapsis before the `+Re` pin out to the pin.
    pub outgoing: Trajectory,
    /// From the periapsis after the pin back out to the pin, time reversed.
    pub incoming: Trajectory,
}

/// Splits off the two arcs adjacent to the pin at `+Re`.
pub fn escape_tails(orbit: &PeriodicOrbit) -> Result<EscapeTails> {
    let n = orbit.cycle();
    let d = orbit.dim;
    let e = &orbit.direction;
    let c = orbit
        .corners
        .iter()
        .copied()
        .max_by(|&a, &b| dot(orbit.position(a), e).total_cmp(&dot(orbit.position(b), e)))
        .ok_or_else(|| Error::InvalidArgument("orbit has no pinned corner".into()))?;
    if dot(orbit.position(c), e) <= 0.0 {
        return Err(Error::InvalidArgument("no corner on the +e side".into()));
    }
    let at = |k: i64| -> &[f64] { orbit.position(k.rem_euclid(n as i64) as usize) };
    let r = |k: i64| norm(at(k));
    let dt = orbit.dt;
    let c = c as i64;

    // outgoing: walk back from the pin while the radius keeps decreasing
    let mut lo = c;
    while c - lo < n as i64 / 2 && r(lo - 1) < r(lo) {
        lo -= 1;
    }
    // incoming: walk forward from the pin
    let mut hi = c;
    while hi - c < n as i64 / 2 && r(hi + 1) < r(hi) {
        hi += 1;
    }
    if c - lo < 3 || hi - c < 3 {
        return Err(Error::InvalidArgument("escape tails are too short".into()));
    }

    let velocity = |k: i64, side_in: bool| -> Vec<f64> {
        let kk = k.rem_euclid(n as i64) as usize;
        if k == c {
            (0..d)
                .map(|j| {
                    if side_in {
                        (3.0 * at(k)[j] - 4.0 * at(k - 1)[j] + at(k - 2)[j]) / (2.0 * dt)
                    } else {
                        (-3.0 * at(k)[j] + 4.0 * at(k + 1)[j] - at(k + 2)[j]) / (2.0 * dt)
                    }
                })
                .collect()
        } else if orbit.is_corner(kk) {
            (0..d).map(|j| (at(k + 1)[j] - at(k - 1)[j]) / (2.0 * dt)).collect()
        } else {
            orbit.velocity(kk).to_vec()
        }
    };
    let t_c = orbit.time(c as usize);
    let mut outgoing = Trajectory { dim: d, times: vec![], positions: vec![], velocities: vec![] };
    for k in lo..=c {
        outgoing.times.push(t_c + (k - c) as f64 * dt);
        outgoing.positions.extend_from_slice(at(k));
        outgoing.velocities.extend(velocity(k, true));
    }
    let mut incoming = Trajectory { dim: d, times: vec![], positions: vec![], velocities: vec![] };
    for k in (c..=hi).rev() {
        incoming.times.push(-(t_c + (k - c) as f64 * dt));
        incoming.positions.extend_from_slice(at(k));
        incoming.velocities.extend(velocity(k, false).into_iter().map(|x| -x));
    }
    Ok(EscapeTails { outgoing, incoming })
}

/// First index of the trailing run on which `(u, u̇) > 0` and `ω < η`
/// persist to the end, i.e. the empirical `L_η` onset.
pub fn escape_onset(diag: &AngularDiagnostics, eta: f64) -> Option<usize> {
    let n = diag.len();
    let ok = |i: usize| diag.radial_sign[i] > 0 && diag.omega[i] < eta;
    if n == 0 || !ok(n - 1) {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && ok(i - 1) {
        i -= 1;
    }
    Some(i)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotoneEscapeReport {
    pub t0: f64,
    pub index: usize,
    pub precondition_met: bool,
    pub reason: Option<String>,
    /// (i) `ω < η` on `[t₀, end]`.
    pub omega_ok: bool,
    /// (ii) `d|u|/dt ≥ √(1−η²)|u̇| − tol`.
    pub radial_speed_ok: bool,
    /// (iii) `d|u|/dt ≥ √(2(1−η²)H) − tol`.
    pub growth_rate_ok: bool,
    /// (iv) `|u(t)| ≥ |u(t₀)| + √(2(1−η²)H)(t − t₀) − tol`.
    pub linear_growth_ok: bool,
    /// Smallest slack of (ii), (iii), (iv) respectively.
    pub margins: [f64; 3],
    pub tol: f64,
}

impl MonotoneEscapeReport {
    pub fn pass(&self) -> bool {
        self.precondition_met && self.omega_ok && self.radial_speed_ok && self.growth_rate_ok && self.linear_growth_ok
    }
}

/// `d|u|/dt` by finite differences of the radius on the trajectory grid.
fn radial_rate(diag: &AngularDiagnostics) -> Vec<f64> {
    let r = &diag.radii;
    let t = &diag.times;
    let n = r.len();
    (0..n)
        .map(|i| {
            if n < 3 {
                (r[n - 1] - r[0]) / (t[n - 1] - t[0])
            } else if i == 0 {
                let h = t[1] - t[0];
                (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * h)
            } else if i == n - 1 {
                let h = t[n - 1] - t[n - 2];
                (3.0 * r[n - 1] - 4.0 * r[n - 2] + r[n - 3]) / (2.0 * h)
            } else {
                (r[i + 1] - r[i - 1]) / (t[i + 1] - t[i - 1])
            }
        })
        .collect()
}

pub fn monotone_escape_check(
    diag: &AngularDiagnostics,
    energy: f64,
    t0: f64,
    eta: f64,
    tol: f64,
) -> MonotoneEscapeReport {
    let index = diag.times.iter().position(|&t| t >= t0 - 1e-12).unwrap_or(diag.len().saturating_sub(1));
    let mut rep = MonotoneEscapeReport {
        t0,
        index,
        precondition_met: false,
        reason: None,
        omega_ok: false,
        radial_speed_ok: false,
        growth_rate_ok: false,
        linear_growth_ok: false,
        margins: [f64::NAN; 3],
        tol,
    };
    if diag.is_empty() {
        rep.reason = Some("empty trajectory".into());
        return rep;
    }
    if diag.radial_sign[index] <= 0 {
        rep.reason = Some("(u, u') <= 0 at t0".into());
        return rep;
    }
    if diag.omega[index] >= eta {
        rep.reason = Some(format!("omega(t0) = {} >= eta", diag.omega[index]));
        return rep;
    }
    rep.precondition_met = true;
    let c = (1.0 - eta * eta).sqrt();
    let floor = (2.0 * (1.0 - eta * eta) * energy).sqrt();
    let rate = radial_rate(diag);
    let mut m = [f64::INFINITY; 3];
    rep.omega_ok = true;
    for i in index..diag.len() {
        rep.omega_ok &= diag.omega[i] < eta;
        m[0] = m[0].min(rate[i] - c * diag.speeds[i]);
        m[1] = m[1].min(rate[i] - floor);
        m[2] = m[2].min(diag.radii[i] - diag.radii[index] - floor * (diag.times[i] - diag.times[index]));
    }
    rep.radial_speed_ok = m[0] >= -tol;
    rep.growth_rate_ok = m[1] >= -tol;
    rep.linear_growth_ok = m[2] >= -tol;
    rep.margins = m;
    rep
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftReport {
    pub t0: f64,
    pub t1: f64,
    pub drift: f64,
    pub bound: f64,
    pub m10: f64,
    pub pass: bool,
}

/// `M₁₀ = M₀ / (√(2(1−η²)H)(β−1))`.
pub fn drift_constant(spec: &PotentialSpec, energy: f64, eta: f64) -> Result<f64> {
    let d = spec.decay.ok_or_else(|| Error::UnsupportedPotential(spec.id()))?;
    Ok(d.m0 / ((2.0 * (1.0 - eta * eta) * energy).sqrt() * (d.beta - 1.0)))
}

/// `(A(t₀) + M₁₀/|u(t₀)|^(β−1)) / (√(2(1−η²)H)|u(t₀)|)` at sample `i`.
pub fn drift_bound_at(diag: &AngularDiagnostics, spec: &PotentialSpec, energy: f64, eta: f64, i: usize) -> Result<f64> {
    let d = spec.decay.ok_or_else(|| Error::UnsupportedPotential(spec.id()))?;
    let m10 = drift_constant(spec, energy, eta)?;
    let r = diag.radii[i];
    Ok((diag.area[i] + m10 / r.powf(d.beta - 1.0)) / ((2.0 * (1.0 - eta * eta) * energy).sqrt() * r))
}

pub fn direction_drift_check(
    diag: &AngularDiagnostics,
    spec: &PotentialSpec,
    energy: f64,
    t0: f64,
    t1: f64,
    eta: f64,
    tol: f64,
) -> Result<DriftReport> {
    let decay = spec.decay.ok_or_else(|| Error::UnsupportedPotential(spec.id()))?;
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must lie in (0, 1/2)")));
    }
    if !(t1 >= t0) {
        return Err(Error::InvalidArgument("drift window must have t1 >= t0".into()));
    }
    let i0 = diag
        .times
        .iter()
        .position(|&t| t >= t0 - 1e-12)
        .ok_or_else(|| Error::InvalidArgument("t0 past the end".into()))?;
    let i1 = diag.times.iter().rposition(|&t| t <= t1 + 1e-12).unwrap_or(i0).max(i0);
    if diag.radii[i0..=i1].iter().any(|&r| r < decay.r0) {
        return Err(Error::InvalidArgument(format!("trajectory dips below r0 = {} in the window", decay.r0)));
    }
    let mono = monotone_escape_check(diag, energy, t0, eta, tol);
    if !mono.pass() {
        return Err(Error::InvalidArgument(format!(
            "monotone escape does not hold from t0 = {t0}: {}",
            mono.reason.unwrap_or_else(|| "growth clause failed".into())
        )));
    }
    let drift = dist(diag.direction(i1), diag.direction(i0));
    let bound = drift_bound_at(diag, spec, energy, eta, i0)?;
    Ok(DriftReport {
        t0: diag.times[i0],
        t1: diag.times[i1],
        drift,
        bound,
        m10: drift_constant(spec, energy, eta)?,
        pass: drift <= bound + tol,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailConfinement {
    pub onset_index: Option<usize>,
    /// Radius at the onset (empirical `L_η`).
    pub l_eta: Option<f64>,
    /// First radius on the tail where the drift bound drops below ε.
    pub m11: Option<f64>,
    pub samples: usize,
    pub max_deviation: f64,
    /// `None` when no sample reaches `M₁₁`.
    pub confined: Option<bool>,
    pub drift: Option<DriftReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionReport {
    pub estimate: Vec<f64>,
    pub estimate_error: f64,
    pub outgoing: TailConfinement,
    pub incoming: TailConfinement,
}

impl DirectionReport {
    /// `Some(true)` when both tails are confined, `None` if either is
    /// inconclusive.
    pub fn confined(&self) -> Option<bool> {
        Some(self.outgoing.confined? && self.incoming.confined?)
    }

    pub fn drift_pass(&self) -> Option<bool> {
        Some(self.outgoing.drift.as_ref()?.pass && self.incoming.drift.as_ref()?.pass)
    }

    pub fn max_deviation(&self) -> f64 {
        self.outgoing.max_deviation.max(self.incoming.max_deviation)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DirectionOptions {
    pub epsilon: f64,
    pub eta: f64,
    pub tol: f64,
}

fn tail_confinement(
    tail: &Trajectory,
    spec: &PotentialSpec,
    energy: f64,
    e: &[f64],
    opts: DirectionOptions,
) -> Result<TailConfinement> {
    let diag = angular_diagnostics(tail);
    let onset = escape_onset(&diag, opts.eta);
    let mut out = TailConfinement {
        onset_index: onset,
        l_eta: onset.map(|i| diag.radii[i]),
        m11: None,
        samples: 0,
        max_deviation: 0.0,
        confined: None,
        drift: None,
    };
    let Some(i0) = onset else { return Ok(out) };
    let r0 = spec.decay.ok_or_else(|| Error::UnsupportedPotential(spec.id()))?.r0;
    let start = (i0..diag.len()).find(|&i| diag.radii[i] >= r0);
    let Some(start) = start else { return Ok(out) };
    let last = diag.len() - 1;
    out.drift =
        Some(direction_drift_check(&diag, spec, energy, diag.times[start], diag.times[last], opts.eta, opts.tol)?);
    for i in start..diag.len() {
        if drift_bound_at(&diag, spec, energy, opts.eta, i)? < opts.epsilon {
            out.m11 = Some(diag.radii[i]);
            break;
        }
    }
    let Some(m11) = out.m11 else { return Ok(out) };
    let mut ok = true;
    for i in 0..diag.len() {
        if diag.radii[i] >= m11 {
            let dev = dist(diag.direction(i), e);
            out.samples += 1;
            out.max_deviation = out.max_deviation.max(dev);
            ok &= dev < opts.epsilon;
        }
    }
    out.confined = Some(ok);
    Ok(out)
}

/// Direction estimate at the last grid time before the closing pin, plus
/// ε-cone confinement of both escape tails beyond `M₁₁`.
pub fn asymptotic_direction(
    orbit: &PeriodicOrbit,
    spec: &PotentialSpec,
    opts: DirectionOptions,
) -> Result<DirectionReport> {
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be > 0".into()));
    }
    let e = &orbit.direction;
    let u = orbit.position(orbit.cycle() - 1);
    let r = norm(u);
    let estimate: Vec<f64> = u.iter().map(|x| x / r).collect();
    let tails = escape_tails(orbit)?;
    Ok(DirectionReport {
        estimate_error: dist(&estimate, e),
        estimate,
        outgoing: tail_confinement(&tails.outgoing, spec, orbit.energy, e, opts)?,
        incoming: tail_confinement(&tails.incoming, spec, orbit.energy, e, opts)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EscapeProfile {
    pub radius: f64,
    /// `(t, ξ(t))` samples from `t = 1` up to `τ_R`.
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub tau_r: f64,
    /// `∫₁^R √(H − V(s e)) ds`, the action of one radial piece.
    pub radial_action: f64,
    /// Action of the half-circle connector on `[0, 1]`.
    pub connector_action: f64,
    /// Action of the comparison half path over `[−τ_R, τ_R]`.
    pub half_action: f64,
    /// Run-level constant with `half_action ≤ 2√H R + M₆` for every R.
    pub m6: f64,
    pub proof_chain_bound: f64,
    pub statement_bound: f64,
}

fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn radial_speed(p: &PotentialSpec, energy: f64, s: f64) -> f64 {
    (2.0 * (energy - p.radial(s).0)).sqrt()
}

/// `(1/√2)∫₀¹[½|φ̇|² + H − V(φ)]` for `φ(t) = −cos(πt) e + sin(πt) f`.
pub fn connector_action(p: &PotentialSpec, energy: f64, e: &[f64]) -> Result<f64> {
    let f = orthogonal_unit(e);
    let pi = std::f64::consts::PI;
    let mut x = vec![0.0; e.len()];
    let mut err = None;
    let integral = simpson(
        |t| {
            let (s, c) = (pi * t).sin_cos();
            x.iter_mut().enumerate().for_each(|(k, xk)| *xk = -c * e[k] + s * f[k]);
            let v = p.value(&x).unwrap_or_else(|e| {
                err = Some(e);
                0.0
            });
            0.5 * pi * pi + energy - v
        },
        0.0,
        1.0,
        2000,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(integral / 2f64.sqrt())
}

/// `M₆ = I_connector − 2√H + 2∫₁^∞(√(H − V(s e)) − √H) ds`. Beyond the
/// quadrature range the (V7) decay bound supplies an upper tail estimate.
pub fn action_constant(p: &PotentialSpec, energy: f64, e: &[f64]) -> Result<f64> {
    let sh = energy.sqrt();
    let upper = 1e6f64;
    // s = exp(x) spreads nodes evenly over the decades
    let excess = simpson(
        |x| {
            let s = x.exp();
            ((energy - p.radial(s).0).sqrt() - sh) * s
        },
        0.0,
        upper.ln(),
        40000,
    );
    let tail = p.decay.map(|d| d.m0 / (2.0 * sh * d.beta * upper.powf(d.beta))).unwrap_or(0.0);
    Ok(connector_action(p, energy, e)? - 2.0 * sh + 2.0 * (excess + tail))
}

/// Integrates `ξ̇ = √(2(H − V(ξe)))`, `ξ(1) = 1` with RK4 until `ξ = R` and
/// evaluates the comparison-path action.
pub fn escape_profile(
    p: &PotentialSpec,
    energy: f64,
    e: &[f64],
    radius: f64,
    m6: Option<f64>,
) -> Result<EscapeProfile> {
    if !(energy > 0.0) {
        return Err(Error::InvalidArgument(format!("energy {energy} must be > 0")));
    }
    if !(radius > 1.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must exceed 1")));
    }
    if (norm(e) - 1.0).abs() > 1e-12 || e.len() != p.dim {
        return Err(Error::InvalidFrame("direction must be a unit vector of the potential's dimension".into()));
    }
    let h = 1e-2;
    let f = |x: f64| radial_speed(p, energy, x);
    let (mut t, mut xi) = (1.0, 1.0);
    let mut times = vec![t];
    let mut xis = vec![xi];
    let tau_r = loop {
        let k1 = f(xi);
        let k2 = f(xi + 0.5 * h * k1);
        let k3 = f(xi + 0.5 * h * k2);
        let k4 = f(xi + h * k3);
        let next = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next >= radius {
            // invert the cubic Hermite interpolant on the last step
            let (x0, x1, d0, d1) = (xi, next, k1 * h, f(next) * h);
            let mut s = (radius - x0) / (x1 - x0);
            for _ in 0..50 {
                let (s2, s3) = (s * s, s * s * s);
                let val = (2.0 * s3 - 3.0 * s2 + 1.0) * x0
                    + (s3 - 2.0 * s2 + s) * d0
                    + (-2.0 * s3 + 3.0 * s2) * x1
                    + (s3 - s2) * d1;
                let der = (6.0 * s2 - 6.0 * s) * x0
                    + (3.0 * s2 - 4.0 * s + 1.0) * d0
                    + (-6.0 * s2 + 6.0 * s) * x1
                    + (3.0 * s2 - 2.0 * s) * d1;
                let ds = (val - radius) / der;
                s -= ds;
                if ds.abs() < 1e-15 {
                    break;
                }
            }
            times.push(t + s * h);
            xis.push(radius);
            break t + s * h;
        }
        t += h;
        xi = next;
        times.push(t);
        xis.push(xi);
    };
    let n = ((radius - 1.0) * 400.0).ceil() as usize;
    let radial_action = simpson(|s| (energy - p.radial(s).0).sqrt(), 1.0, radius, n.max(2000));
    let connector = connector_action(p, energy, e)?;
    let m6 = match m6 {
        Some(m) => m,
        None => action_constant(p, energy, e)?,
    };
    let sh = energy.sqrt();
    Ok(EscapeProfile {
        radius,
        times,
        xi: xis,
        tau_r,
        radial_action,
        connector_action: connector,
        half_action: 2.0 * radial_action + connector,
        m6,
        proof_chain_bound: 2.0 * sh * radius + m6,
        statement_bound: (2.0 * energy).sqrt() * radius + m6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radial_line(n: usize, dt: f64) -> Trajectory {
        let mut tr = Trajectory { dim: 2, times: vec![], positions: vec![], velocities: vec![] };
        for i in 0..n {
            let t = i as f64 * dt;
            tr.times.push(t);
            tr.positions.extend([1.0 + t, 0.0]);
            tr.velocities.extend([1.0, 0.0]);
        }
        tr
    }

    #[test]
    fn radial_has_zero_area() {
        let d = angular_diagnostics(&radial_line(50, 0.1));
        assert!(d.area.iter().all(|&a| a == 0.0));
        assert!(d.omega.iter().all(|&w| w == 0.0));
        assert!(d.radial_sign.iter().all(|&s| s == 1));
    }

    #[test]
    fn circle_has_unit_omega() {
        let mut tr = Trajectory { dim: 2, times: vec![], positions: vec![], velocities: vec![] };
        for i in 0..100 {
            let t = i as f64 * 0.05;
            tr.times.push(t);
            tr.positions.extend([2.0 * t.cos(), 2.0 * t.sin()]);
            tr.velocities.extend([-2.0 * t.sin(), 2.0 * t.cos()]);
        }
        let d = angular_diagnostics(&tr);
        for (a, w) in d.area.iter().zip(&d.omega) {
            assert!((w - 1.0).abs() < 1e-12);
            assert!((a - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_escape_satisfies_all_clauses() {
        let tr = radial_line(200, 0.05);
        let d = angular_diagnostics(&tr);
        // speed 1 corresponds to H = ½ with V ≈ 0
        let rep = monotone_escape_check(&d, 0.5, 0.0, 0.1, 1e-9);
        assert!(rep.pass(), "{rep:?}");
        assert!(rep.margins[0].abs() < 1e-2);
    }

    #[test]
    fn inward_start_fails_precondition() {
        let mut tr = radial_line(20, 0.1);
        tr.velocities.iter_mut().for_each(|v| *v = -*v);
        let d = angular_diagnostics(&tr);
        let rep = monotone_escape_check(&d, 0.5, 0.0, 0.1, 1e-9);
        assert!(!rep.precondition_met);
        assert!(rep.reason.is_some());
    }

    #[test]
    fn radial_drift_is_zero() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let d = angular_diagnostics(&radial_line(200, 0.05));
        let rep = direction_drift_check(&d, &p, 0.5, 0.0, 9.0, 0.1, 1e-9).unwrap();
        assert_eq!(rep.drift, 0.0);
        assert!(rep.pass);
        assert!(rep.bound > 0.0);
    }

    #[test]
    fn drift_needs_decay_metadata() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap().with_decay(None);
        let d = angular_diagnostics(&radial_line(20, 0.05));
        assert!(matches!(direction_drift_check(&d, &p, 0.5, 0.0, 0.5, 0.1, 1e-9), Err(Error::UnsupportedPotential(_))));
    }

    #[test]
    fn profile_initial_and_terminal_speed() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        assert!((radial_speed(&p, 1.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((radial_speed(&p, 1.0, 1e4) - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn profile_time_matches_quadrature() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let prof = escape_profile(&p, 1.0, &[1.0, 0.0], 8.0, None).unwrap();
        let tau = 1.0 + simpson(|s| 1.0 / radial_speed(&p, 1.0, s), 1.0, 8.0, 20000);
        assert!((prof.tau_r - tau).abs() < 1e-8, "{} vs {tau}", prof.tau_r);
        assert_eq!(*prof.xi.last().unwrap(), 8.0);
        assert!(prof.half_action <= prof.proof_chain_bound);
    }

    #[test]
    fn half_action_stays_below_chain_bound() {
        let p = PotentialSpec::log_blend(2).unwrap();
        let m6 = action_constant(&p, 1.0, &[0.0, 1.0]).unwrap();
        for r in [1.5, 3.0, 20.0, 100.0] {
            let prof = escape_profile(&p, 1.0, &[0.0, 1.0], r, Some(m6)).unwrap();
            assert!(prof.half_action <= prof.proof_chain_bound, "R = {r}");
        }
    }

    #[test]
    fn connector_on_unit_circle() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let pi = std::f64::consts::PI;
        let expect = (0.5 * pi * pi + 2.0) / 2f64.sqrt();
        assert!((connector_action(&p, 1.0, &[1.0, 0.0]).unwrap() - expect).abs() < 1e-12);
    }
}
