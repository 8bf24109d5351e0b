//! Periodic orbits obtained from loops by the fixed-energy time rescaling,
//! plus an independent RK4 integrator and orbit classification.
//!
//! A rescaled minimizer has velocity corners at the pinned points. An orbit
//! keeps the corner node indices; there the stored velocity is the outgoing
//! one-sided derivative, except at the closing node where it is incoming.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, normalized, solve_dense};
use crate::loops::SymmetricLoop;
use crate::potentials::Potential;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub dim: usize,
    pub radius: f64,
    pub direction: Vec<f64>,
    pub energy: f64,
    pub period: f64,
    /// Time of sample 0; samples are `start_time + i·dt`, `i = 0..=2M`.
    pub start_time: f64,
    pub dt: f64,
    /// `(2M + 1) * dim`, last row repeats the first.
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Sample indices (in `0..=2M`) of velocity corners.
    pub corners: Vec<usize>,
    pub potential: String,
}

impl PeriodicOrbit {
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of distinct samples per period (2M).
    pub fn cycle(&self) -> usize {
        self.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start_time + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn radii(&self) -> Vec<f64> {
        self.positions.chunks(self.dim).map(norm).collect()
    }

    pub fn half_period(&self) -> f64 {
        0.5 * self.period
    }

    pub fn min_radius(&self) -> f64 {
        self.radii().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius(&self) -> f64 {
        self.radii().into_iter().fold(0.0, f64::max)
    }

    pub fn is_corner(&self, i: usize) -> bool {
        let n = self.cycle();
        self.corners.iter().any(|&c| c % n == i % n)
    }

    /// Position at an arbitrary time by linear interpolation, periodic in `T`.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let n = self.cycle();
        let s = (t - self.start_time) / self.dt;
        let s = s.rem_euclid(n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let w = s - i as f64;
        let (a, b) = (self.position(i), self.position(i + 1));
        a.iter().zip(b).map(|(x, y)| (1.0 - w) * x + w * y).collect()
    }

    pub fn to_trajectory(&self) -> Trajectory {
        Trajectory {
            dim: self.dim,
            times: self.times(),
            positions: self.positions.clone(),
            velocities: self.velocities.clone(),
        }
    }
}

/// Velocities for `2M + 1` samples of a periodic orbit with given corners.
fn orbit_velocities(pos: &[f64], dim: usize, corners: &[usize], dt: f64) -> Vec<f64> {
    let n = pos.len() / dim - 1;
    let corner = |i: usize| corners.iter().any(|&c| c % n == i % n);
    let at = |k: usize, c: usize| pos[(k % n) * dim + c];
    let mut v = vec![0.0; (n + 1) * dim];
    for i in 0..n {
        for c in 0..dim {
            v[i * dim + c] = if corner(i) {
                (-3.0 * at(i, c) + 4.0 * at(i + 1, c) - at(i + 2, c)) / (2.0 * dt)
            } else {
                (at(i + 1, c) - at(i + n - 1, c)) / (2.0 * dt)
            };
        }
    }
    for c in 0..dim {
        v[n * dim + c] =
            if corner(0) { (3.0 * at(n, c) - 4.0 * at(n - 1, c) + at(n - 2, c)) / (2.0 * dt) } else { v[c] };
    }
    v
}

/// Rescales a loop to a `T`-periodic orbit at energy `H` with
/// `T² = (½∫|q̇|²) / ∫(H − V(q))`, sampled on `t ∈ [−T/2, T/2]`.
pub fn maupertuis_rescale(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64, label: &str) -> Result<PeriodicOrbit> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidArgument(format!("energy {energy} must be > 0")));
    }
    let s = lp.seminorm_sq();
    if !(s > 0.0) {
        return Err(Error::DegenerateLoop);
    }
    let ev = crate::action::evaluate(pot, lp, energy)?;
    let period = (0.5 * s / ev.potential_integral).sqrt();
    let m = lp.half_nodes();
    let dim = lp.dim();
    let dt = period * lp.spacing();
    let mut positions = Vec::with_capacity((2 * m + 1) * dim);
    for k in 0..=2 * m {
        positions.extend(lp.full_node(k));
    }
    let corners = vec![0, m, 2 * m];
    let velocities = orbit_velocities(&positions, dim, &corners, dt);
    Ok(PeriodicOrbit {
        dim,
        radius: lp.radius(),
        direction: lp.direction().to_vec(),
        energy,
        period,
        start_time: -0.5 * period,
        dt,
        positions,
        velocities,
        corners,
        potential: label.to_string(),
    })
}

/// `w(t) = u(t + t₀)`: samples are rotated by the nearest whole number of
/// steps and the grid absorbs the sub-step remainder.
pub fn time_translate(orbit: &PeriodicOrbit, t0: f64) -> PeriodicOrbit {
    let n = orbit.cycle();
    let t0 = t0 - orbit.period * (t0 / orbit.period).round();
    let steps = (t0 / orbit.dt).round();
    let rem = t0 - steps * orbit.dt;
    let shift = (steps as i64).rem_euclid(n as i64) as usize;
    let d = orbit.dim;
    let mut positions = Vec::with_capacity(orbit.positions.len());
    for i in 0..=n {
        positions.extend_from_slice(orbit.position((i + shift) % n));
    }
    let mut corners: Vec<usize> = orbit.corners.iter().map(|&c| (c % n + n - shift) % n).collect();
    corners.sort_unstable();
    corners.dedup();
    if corners.first() == Some(&0) {
        corners.push(n);
    }
    let velocities = if orbit.corners.is_empty() {
        let mut v = Vec::with_capacity(orbit.velocities.len());
        for i in 0..=n {
            v.extend_from_slice(orbit.velocity((i + shift) % n));
        }
        v
    } else {
        orbit_velocities(&positions, d, &corners, orbit.dt)
    };
    PeriodicOrbit { start_time: orbit.start_time - rem, positions, velocities, corners, ..orbit.clone() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn energies(&self, pot: &dyn Potential) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| Ok(0.5 * dot(self.velocity(i), self.velocity(i)) + pot.value(self.position(i))?))
            .collect()
    }

    fn push(&mut self, t: f64, u: &[f64], v: &[f64]) {
        self.times.push(t);
        self.positions.extend_from_slice(u);
        self.velocities.extend_from_slice(v);
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrateOptions {
    /// Abort with a near-collision error once `|u|` drops below this.
    pub guard: Option<f64>,
    /// Stop (successfully) once `|u|` exceeds this.
    pub stop_radius: Option<f64>,
}

/// Classical RK4 on `(u, u̇)` with equal steps from `t_start` to `t_end`
/// (either direction). The step is adjusted so that it divides the span.
pub fn integrate_ode(
    pot: &dyn Potential,
    u0: &[f64],
    v0: &[f64],
    t_start: f64,
    t_end: f64,
    step: f64,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    let d = u0.len();
    if v0.len() != d || pot.dim() != d {
        return Err(Error::InvalidArgument("state dimensions disagree".into()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {step} must be > 0")));
    }
    if norm(u0) == 0.0 {
        return Err(Error::Singularity);
    }
    let span = t_end - t_start;
    let n = ((span.abs() / step) - 1e-9).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let guard = opts.guard.unwrap_or(0.0);

    let mut traj =
        Trajectory { dim: d, times: Vec::with_capacity(n + 1), positions: Vec::new(), velocities: Vec::new() };
    let (mut u, mut v) = (u0.to_vec(), v0.to_vec());
    traj.push(t_start, &u, &v);

    let acc = |x: &[f64], out: &mut [f64]| -> Result<()> {
        pot.value_gradient(x, out)?;
        out.iter_mut().for_each(|a| *a = -*a);
        Ok(())
    };
    let mut k = [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut tmp = vec![0.0; d];
    for s in 1..=n {
        let t = t_start + (s - 1) as f64 * h;
        let mut step_once = || -> Result<(Vec<f64>, Vec<f64>)> {
            // k_i holds accelerations; velocity stages are explicit
            acc(&u, &mut k[0])?;
            let v1 = v.clone();
            tmp.iter_mut().enumerate().for_each(|(c, x)| *x = u[c] + 0.5 * h * v1[c]);
            acc(&tmp, &mut k[1])?;
            let v2: Vec<f64> = (0..d).map(|c| v[c] + 0.5 * h * k[0][c]).collect();
            tmp.iter_mut().enumerate().for_each(|(c, x)| *x = u[c] + 0.5 * h * v2[c]);
            acc(&tmp, &mut k[2])?;
            let v3: Vec<f64> = (0..d).map(|c| v[c] + 0.5 * h * k[1][c]).collect();
            tmp.iter_mut().enumerate().for_each(|(c, x)| *x = u[c] + h * v3[c]);
            acc(&tmp, &mut k[3])?;
            let v4: Vec<f64> = (0..d).map(|c| v[c] + h * k[2][c]).collect();
            let un = (0..d).map(|c| u[c] + h / 6.0 * (v1[c] + 2.0 * v2[c] + 2.0 * v3[c] + v4[c])).collect();
            let vn = (0..d).map(|c| v[c] + h / 6.0 * (k[0][c] + 2.0 * k[1][c] + 2.0 * k[2][c] + k[3][c])).collect();
            Ok((un, vn))
        };
        let (un, vn) = match step_once() {
            Ok(x) => x,
            Err(Error::Singularity) => {
                return Err(Error::NearCollision { guard, time: t, partial: Box::new(traj) });
            }
            Err(e) => return Err(e),
        };
        u = un;
        v = vn;
        let t_next = if s == n { t_end } else { t_start + s as f64 * h };
        let r = norm(&u);
        if !r.is_finite() || r < guard {
            traj.push(t_next, &u, &v);
            return Err(Error::NearCollision { guard, time: t_next, partial: Box::new(traj) });
        }
        traj.push(t_next, &u, &v);
        if opts.stop_radius.is_some_and(|rs| r > rs) {
            break;
        }
    }
    Ok(traj)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    /// sup |½|u̇|² + V(u) − H| over all samples.
    pub energy: f64,
    /// sup |ü + ∇V(u)| by second differences, corners excluded.
    pub ode: f64,
    /// |∫(2H − (2V + (∇V, u)))dt| over one period.
    pub virial: f64,
    /// Σ over corners of u·(u̇⁻ − u̇⁺); equals the virial integral for a
    /// piecewise-smooth solution.
    pub corner_jump_sum: f64,
    /// |∫(2H − (2V + (∇V, u)))dt − corner_jump_sum|.
    pub virial_balance: f64,
    /// sup |Δu| / Δt between neighbouring samples.
    pub lipschitz: f64,
    /// sup √(2(H − V(u))).
    pub m5: f64,
    /// sup |V(u)|.
    pub m3: f64,
}

pub fn residuals(pot: &dyn Potential, orbit: &PeriodicOrbit) -> Result<ResidualReport> {
    let d = orbit.dim;
    let n = orbit.cycle();
    let h = orbit.energy;
    let dt = orbit.dt;
    let mut g = vec![0.0; d];
    let mut rep = ResidualReport {
        energy: 0.0,
        ode: 0.0,
        virial: 0.0,
        corner_jump_sum: 0.0,
        virial_balance: 0.0,
        lipschitz: 0.0,
        m5: 0.0,
        m3: 0.0,
    };
    let mut integral = 0.0;
    for i in 0..=n {
        let u = orbit.position(i);
        let v = pot.value_gradient(u, &mut g)?;
        let vel = orbit.velocity(i);
        rep.energy = rep.energy.max((0.5 * dot(vel, vel) + v - h).abs());
        rep.m5 = rep.m5.max((2.0 * (h - v)).sqrt());
        rep.m3 = rep.m3.max(v.abs());
        if i == n {
            break;
        }
        integral += 2.0 * h - (2.0 * v + dot(&g, u));
        rep.lipschitz = rep.lipschitz.max(dist(orbit.position(i + 1), u) / dt);
        if !orbit.is_corner(i) {
            let prev = orbit.position((i + n - 1) % n);
            let next = orbit.position(i + 1);
            let r: f64 =
                (0..d).map(|c| ((next[c] - 2.0 * u[c] + prev[c]) / (dt * dt) + g[c]).powi(2)).sum::<f64>().sqrt();
            rep.ode = rep.ode.max(r);
        }
    }
    integral *= dt;
    let at = |k: usize, c: usize| orbit.positions[(k % n) * d + c];
    let mut corners: Vec<usize> = orbit.corners.iter().map(|&c| c % n).collect();
    corners.sort_unstable();
    corners.dedup();
    for &c in &corners {
        let jump: f64 = (0..d)
            .map(|k| {
                let out = (-3.0 * at(c, k) + 4.0 * at(c + 1, k) - at(c + 2, k)) / (2.0 * dt);
                let inc = (3.0 * at(c + n, k) - 4.0 * at(c + n - 1, k) + at(c + n - 2, k)) / (2.0 * dt);
                at(c, k) * (inc - out)
            })
            .sum();
        rep.corner_jump_sum += jump;
    }
    rep.virial = integral.abs();
    rep.virial_balance = (integral - rep.corner_jump_sum).abs();
    Ok(rep)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConicFit {
    pub eccentricity: f64,
    /// Semi-latus rectum p in `1/r = (1 + e cos(θ − ω))/p`.
    pub semi_latus: f64,
    pub periapsis_angle: f64,
    pub rms: f64,
}

/// Least-squares fit of `1/r = a + b cos θ + c sin θ` in the plane spanned
/// by the initial position and velocity.
pub fn conic_fit(traj: &Trajectory) -> Result<ConicFit> {
    if traj.len() < 3 {
        return Err(Error::InvalidArgument("conic fit needs at least 3 samples".into()));
    }
    let e1 = normalized(traj.position(0));
    let v0 = traj.velocity(0);
    let along = dot(v0, &e1);
    let perp: Vec<f64> = v0.iter().zip(&e1).map(|(v, e)| v - along * e).collect();
    if norm(&perp) == 0.0 {
        return Err(Error::InvalidArgument("radial trajectory has no orbital plane".into()));
    }
    let e2 = normalized(&perp);
    let mut ata = vec![vec![0.0; 3]; 3];
    let mut atb = vec![0.0; 3];
    let mut rows = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let u = traj.position(i);
        let (x, y) = (dot(u, &e1), dot(u, &e2));
        let th = y.atan2(x);
        let row = [1.0, th.cos(), th.sin()];
        let rhs = 1.0 / x.hypot(y);
        for a in 0..3 {
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * rhs;
        }
        rows.push((row, rhs));
    }
    let coef = solve_dense(ata, atb).ok_or_else(|| Error::InvalidArgument("degenerate conic fit".into()))?;
    let ss: f64 = rows.iter().map(|(r, b)| (r[0] * coef[0] + r[1] * coef[1] + r[2] * coef[2] - b).powi(2)).sum();
    Ok(ConicFit {
        eccentricity: coef[1].hypot(coef[2]) / coef[0],
        semi_latus: 1.0 / coef[0],
        periapsis_angle: coef[2].atan2(coef[1]),
        rms: (ss / rows.len() as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
    Undetermined,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub r_far: f64,
    pub speed_tol: f64,
}

impl ClassifyOptions {
    /// `R_far = 100·max(1, R)`; speed tolerance `0.05·√(2H)` for `H > 0`,
    /// `1e-2` otherwise.
    pub fn defaults(energy: f64, radius: f64) -> Self {
        let speed_tol = if energy > 0.0 { 0.05 * (2.0 * energy).sqrt() } else { 1e-2 };
        Self { r_far: 100.0 * radius.max(1.0), speed_tol }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Classification {
    pub class: OrbitClass,
    /// Extrapolated speed at infinity (escaping trajectories only).
    pub terminal_speed: Option<f64>,
}

/// Escape is judged by crossing `r_far`; the terminal speed is the
/// intercept of a least-squares fit of `|u̇|²` against `1/|u|` over samples
/// beyond `r_far/2`, since the raw speed at any finite radius still carries
/// the potential's contribution.
pub fn classify_orbit(traj: &Trajectory, opts: ClassifyOptions) -> Classification {
    let n = traj.len();
    if n < 3 {
        return Classification { class: OrbitClass::Undetermined, terminal_speed: None };
    }
    let radii: Vec<f64> = (0..n).map(|i| norm(traj.position(i))).collect();
    if radii.iter().any(|&r| r > opts.r_far) {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut cnt = 0.0;
        for i in 0..n {
            if radii[i] >= 0.5 * opts.r_far {
                let x = 1.0 / radii[i];
                let y = dot(traj.velocity(i), traj.velocity(i));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                cnt += 1.0;
            }
        }
        let den = cnt * sxx - sx * sx;
        let intercept = if cnt >= 2.0 && den.abs() > 1e-300 { (sy * sxx - sx * sxy) / den } else { sy / cnt };
        let speed = intercept.max(0.0).sqrt();
        let class = if speed > opts.speed_tol { OrbitClass::Hyperbolic } else { OrbitClass::Parabolic };
        return Classification { class, terminal_speed: Some(speed) };
    }
    if is_recurrent(traj, &radii) {
        return Classification { class: OrbitClass::Elliptic, terminal_speed: None };
    }
    Classification { class: OrbitClass::Undetermined, terminal_speed: None }
}

// returns near its start after leaving it, or the radius turns at least twice
fn is_recurrent(traj: &Trajectory, radii: &[f64]) -> bool {
    let u0 = traj.position(0);
    let far = (0..traj.len()).map(|i| dist(traj.position(i), u0)).fold(0.0, f64::max);
    if far > 0.0 {
        let mut left = false;
        for i in 0..traj.len() {
            let d = dist(traj.position(i), u0);
            if d > 0.5 * far {
                left = true;
            } else if left && d < 5e-2 * far {
                return true;
            }
        }
    }
    let span =
        radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * radii[0].max(1.0);
    let mut turns = 0;
    let mut last = 0.0;
    for w in radii.windows(2) {
        let dr = w[1] - w[0];
        if dr.abs() <= tol {
            continue;
        }
        if last != 0.0 && dr.signum() != last {
            turns += 1;
        }
        last = dr.signum();
    }
    span > tol && turns >= 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{FreeParticle, PotentialSpec};
    use std::f64::consts::PI;

    fn circle(r: f64, m: usize) -> SymmetricLoop {
        SymmetricLoop::build_circular(r, &[1.0, 0.0], &[0.0, 1.0], m).unwrap()
    }

    #[test]
    fn circular_periods() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let l = circle(1.0, 512);
        let o = maupertuis_rescale(&p, &l, 1.0, "p").unwrap();
        assert!((o.period - PI).abs() < 1e-4, "{}", o.period);
        let o3 = maupertuis_rescale(&p, &l, 3.0, "p").unwrap();
        assert!((o3.period - PI / 2f64.sqrt()).abs() < 1e-4);
        assert_eq!(o.position(0), &[1.0, 0.0]);
        assert_eq!(o.position(o.cycle()), &[1.0, 0.0]);
        assert_eq!(o.start_time, -0.5 * o.period);
    }

    #[test]
    fn rescaling_recovers_loop_nodes() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let l = circle(2.0, 32).perturbed(0.1, 1).unwrap();
        let o = maupertuis_rescale(&p, &l, 1.0, "p").unwrap();
        for j in 0..=l.half_nodes() {
            let t = o.time(j);
            let s = ((t + o.half_period()) / o.period * 2.0 * l.half_nodes() as f64).round() as usize;
            assert_eq!(o.position(j), l.node(s));
        }
        let m = l.half_nodes();
        for j in 0..m {
            for c in 0..2 {
                assert_eq!(o.position(j + m)[c], -o.position(j)[c]);
            }
        }
    }

    #[test]
    fn nonpositive_energy_is_rejected() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        assert!(maupertuis_rescale(&p, &circle(1.0, 8), 0.0, "p").is_err());
    }

    #[test]
    fn translate_identity_and_full_period() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let o = maupertuis_rescale(&p, &circle(1.5, 64).perturbed(0.05, 2).unwrap(), 1.0, "p").unwrap();
        assert_eq!(time_translate(&o, 0.0), o);
        assert_eq!(time_translate(&o, o.period), o);
        let w = time_translate(&o, 0.3 * o.period);
        let a = residuals(&p, &o).unwrap();
        let b = residuals(&p, &w).unwrap();
        assert!((a.energy - b.energy).abs() <= 1e-12 * a.energy.max(1.0));
        assert!((a.ode - b.ode).abs() <= 1e-9 * a.ode.max(1.0));
    }

    #[test]
    fn translate_shifts_samples() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let o = maupertuis_rescale(&p, &circle(1.0, 64), 1.0, "p").unwrap();
        let w = time_translate(&o, 5.0 * o.dt);
        assert_eq!(w.position(0), o.position(5));
        for t in [-1.0, 0.0, 0.7] {
            let a = w.interpolate(t);
            let b = o.interpolate(t + 5.0 * o.dt);
            assert!(dist(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn free_particle_is_a_line() {
        let fp = FreeParticle { dim: 2 };
        let tr = integrate_ode(&fp, &[1.0, 2.0], &[0.5, -0.25], 0.0, 4.0, 0.1, IntegrateOptions::default()).unwrap();
        for i in 0..tr.len() {
            let t = tr.times[i];
            assert!((tr.position(i)[0] - (1.0 + 0.5 * t)).abs() < 1e-14);
            assert!((tr.position(i)[1] - (2.0 - 0.25 * t)).abs() < 1e-14);
        }
    }

    #[test]
    fn kepler_hyperbola() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let tr = integrate_ode(&p, &[1.0, 0.0], &[0.0, 2.0], 0.0, 10.0, 1e-3, IntegrateOptions::default()).unwrap();
        let fit = conic_fit(&tr).unwrap();
        assert!((fit.eccentricity - 3.0).abs() < 1e-6, "{}", fit.eccentricity);
        assert!((fit.semi_latus - 4.0).abs() < 1e-6);
        let e = tr.energies(&p).unwrap();
        let drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-9, "{drift}");
    }

    #[test]
    fn kepler_circle_returns() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let tr = integrate_ode(&p, &[1.0, 0.0], &[0.0, 1.0], 0.0, 2.0 * PI, 1e-3, IntegrateOptions::default()).unwrap();
        assert!(dist(tr.position(tr.len() - 1), &[1.0, 0.0]) < 1e-6);
    }

    #[test]
    fn guard_aborts_with_partial() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let opts = IntegrateOptions { guard: Some(0.5), stop_radius: None };
        match integrate_ode(&p, &[1.0, 0.0], &[-0.1, 0.0], 0.0, 5.0, 1e-3, opts) {
            Err(Error::NearCollision { partial, time, .. }) => {
                assert!(partial.len() > 1);
                assert!(time > 0.0 && time < 5.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trichotomy() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let run = |v: f64, t: f64, far: f64| {
            let o = IntegrateOptions { guard: Some(1e-3), stop_radius: Some(far * 1.5) };
            integrate_ode(&p, &[1.0, 0.0], &[0.0, v], 0.0, t, 1e-2, o).unwrap()
        };
        let opts = |h: f64| ClassifyOptions::defaults(h, 1.0);
        assert_eq!(classify_orbit(&run(1.0, 20.0, 100.0), opts(-0.5)).class, OrbitClass::Elliptic);
        assert_eq!(classify_orbit(&run(2f64.sqrt(), 5000.0, 100.0), opts(0.0)).class, OrbitClass::Parabolic);
        let c = classify_orbit(&run(2.0, 500.0, 100.0), opts(1.0));
        assert_eq!(c.class, OrbitClass::Hyperbolic);
        assert!((c.terminal_speed.unwrap() - 2f64.sqrt()).abs() < 1e-2 * 2f64.sqrt());
    }
}
