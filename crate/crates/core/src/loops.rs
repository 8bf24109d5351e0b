//! Antiperiodic loops pinned at `Re`, stored on the half period.
//!
//! Nodes sit at `t_j = j/(2M)` for `j = 0..=M`; the second half of the period
//! is reconstructed as `q(t + 1/2) = -q(t)`, so `q_M = -q_0` exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, norm_sq};

const FRAME_TOL: f64 = 1e-12;
pub const MIN_HALF_NODES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricLoop {
    dim: usize,
    radius: f64,
    direction: Vec<f64>,
    half_nodes: usize,
    /// `(M + 1) * dim` coordinates, row-major.
    nodes: Vec<f64>,
}

/// Samples of a loop over one full period `[0, 1)`.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub times: Vec<f64>,
    /// `2M * dim`, row-major.
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub seminorm_sq: f64,
    pub min_radius: f64,
}

impl SymmetricLoop {
    /// Builds a loop from its interior nodes `q_1..q_{M-1}` (row-major).
    pub fn from_interior(radius: f64, direction: &[f64], half_nodes: usize, interior: &[f64]) -> Result<Self> {
        let dim = direction.len();
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("dimension {dim} must be >= 2")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("boundary radius {radius} must be > 0")));
        }
        if (norm(direction) - 1.0).abs() > FRAME_TOL {
            return Err(Error::InvalidFrame("boundary direction is not a unit vector".into()));
        }
        if half_nodes < MIN_HALF_NODES {
            return Err(Error::InvalidArgument(format!("half-grid count {half_nodes} must be >= {MIN_HALF_NODES}")));
        }
        if interior.len() != (half_nodes - 1) * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} interior coordinates, got {}",
                (half_nodes - 1) * dim,
                interior.len()
            )));
        }
        if interior.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite node coordinate".into()));
        }
        let mut nodes = Vec::with_capacity((half_nodes + 1) * dim);
        nodes.extend(direction.iter().map(|e| radius * e));
        nodes.extend_from_slice(interior);
        nodes.extend(direction.iter().map(|e| -radius * e));
        Ok(Self { dim, radius, direction: direction.to_vec(), half_nodes, nodes })
    }

    /// Samples `Q(t) = R(ξ cos 2πt + η sin 2πt)` on the half grid.
    pub fn build_circular(radius: f64, xi: &[f64], eta: &[f64], half_nodes: usize) -> Result<Self> {
        if xi.len() != eta.len() {
            return Err(Error::InvalidFrame("frame vectors differ in dimension".into()));
        }
        if (norm(xi) - 1.0).abs() > FRAME_TOL || (norm(eta) - 1.0).abs() > FRAME_TOL {
            return Err(Error::InvalidFrame("frame vectors must have unit length".into()));
        }
        if dot(xi, eta).abs() > FRAME_TOL {
            return Err(Error::InvalidFrame("frame vectors must be orthogonal".into()));
        }
        if half_nodes < MIN_HALF_NODES {
            return Err(Error::InvalidArgument(format!("half-grid count {half_nodes} must be >= {MIN_HALF_NODES}")));
        }
        let mut interior = Vec::with_capacity((half_nodes - 1) * xi.len());
        for j in 1..half_nodes {
            let a = std::f64::consts::PI * j as f64 / half_nodes as f64;
            let (s, c) = a.sin_cos();
            interior.extend(xi.iter().zip(eta).map(|(x, e)| radius * (x * c + e * s)));
        }
        Self::from_interior(radius, xi, half_nodes, &interior)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// M, the number of half-grid intervals.
    pub fn half_nodes(&self) -> usize {
        self.half_nodes
    }

    /// Grid spacing `1/(2M)` in loop time.
    pub fn spacing(&self) -> f64 {
        0.5 / self.half_nodes as f64
    }

    /// Half-grid node `q_j`, `j = 0..=M`.
    pub fn node(&self, j: usize) -> &[f64] {
        &self.nodes[j * self.dim..(j + 1) * self.dim]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior(&self) -> &[f64] {
        &self.nodes[self.dim..self.half_nodes * self.dim]
    }

    pub fn with_interior(&self, interior: &[f64]) -> Result<Self> {
        Self::from_interior(self.radius, &self.direction, self.half_nodes, interior)
    }

    /// Node `k` of the full period, `k` taken modulo `2M`.
    pub fn full_node(&self, k: usize) -> Vec<f64> {
        let k = k % (2 * self.half_nodes);
        if k < self.half_nodes {
            self.node(k).to_vec()
        } else {
            self.node(k - self.half_nodes).iter().map(|x| -x).collect()
        }
    }

    /// `2M` rows over `[0, 1)`, row-major.
    pub fn full_samples(&self) -> Vec<f64> {
        let m = self.half_nodes;
        let mut out = Vec::with_capacity(2 * m * self.dim);
        out.extend_from_slice(&self.nodes[..m * self.dim]);
        out.extend(self.nodes[..m * self.dim].iter().map(|x| -x));
        out
    }

    /// ∫₀¹|q̇|² of the piecewise-linear interpolant.
    pub fn seminorm_sq(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for j in 0..self.half_nodes {
            let (a, b) = (self.node(j), self.node(j + 1));
            s += (0..d).map(|k| (b[k] - a[k]).powi(2)).sum::<f64>();
        }
        2.0 * s / self.spacing()
    }

    pub fn min_radius(&self) -> f64 {
        self.nodes.chunks(self.dim).map(norm).fold(f64::INFINITY, f64::min)
    }

    /// Index of the node closest to the origin.
    pub fn closest_node(&self) -> usize {
        self.nodes.chunks(self.dim).map(norm_sq).enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).map_or(0, |(j, _)| j)
    }

    pub fn kinematics(&self) -> Kinematics {
        let n = 2 * self.half_nodes;
        let h = self.spacing();
        let positions = self.full_samples();
        let velocities = loop_velocities(&positions, self.dim, self.half_nodes, h);
        Kinematics {
            times: (0..n).map(|k| k as f64 * h).collect(),
            positions,
            velocities,
            seminorm_sq: self.seminorm_sq(),
            min_radius: self.min_radius(),
        }
    }

    /// Linear interpolation onto a new half grid, optionally rescaled so
    /// that `|q_0| = new_radius`.
    pub fn resample(&self, new_half_nodes: usize, new_radius: Option<f64>) -> Result<Self> {
        if new_half_nodes < MIN_HALF_NODES {
            return Err(Error::InvalidArgument(format!(
                "half-grid count {new_half_nodes} must be >= {MIN_HALF_NODES}"
            )));
        }
        let radius = new_radius.unwrap_or(self.radius);
        let scale = radius / self.radius;
        let d = self.dim;
        let mut interior = Vec::with_capacity((new_half_nodes - 1) * d);
        for j in 1..new_half_nodes {
            let s = j as f64 * self.half_nodes as f64 / new_half_nodes as f64;
            let i = (s.floor() as usize).min(self.half_nodes - 1);
            let w = s - i as f64;
            let (a, b) = (self.node(i), self.node(i + 1));
            interior.extend((0..d).map(|k| scale * ((1.0 - w) * a[k] + w * b[k])));
        }
        Self::from_interior(radius, &self.direction, new_half_nodes, &interior)
    }

    /// Adds seeded Gaussian noise of standard deviation `amplitude` to
    /// every interior coordinate.
    pub fn perturbed(&self, amplitude: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let interior: Vec<f64> = self
            .interior()
            .iter()
            .map(|x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x + amplitude * z
            })
            .collect();
        self.with_interior(&interior)
    }
}

/// Velocities over one period of a loop sampled on `2M` nodes. The pinned
/// nodes (`k = 0` and `k = M`) are velocity corners of minimizers, so they
/// use the outgoing one-sided second-order stencil; everything else is a
/// periodic central difference.
pub(crate) fn loop_velocities(pos: &[f64], dim: usize, half: usize, h: f64) -> Vec<f64> {
    let n = 2 * half;
    let at = |k: usize, c: usize| pos[(k % n) * dim + c];
    let mut v = vec![0.0; n * dim];
    for k in 0..n {
        for c in 0..dim {
            v[k * dim + c] = if k % half == 0 {
                (-3.0 * at(k, c) + 4.0 * at(k + 1, c) - at(k + 2, c)) / (2.0 * h)
            } else {
                (at(k + 1, c) - at(k + n - 1, c)) / (2.0 * h)
            };
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(r: f64, m: usize) -> SymmetricLoop {
        SymmetricLoop::build_circular(r, &[1.0, 0.0], &[0.0, 1.0], m).unwrap()
    }

    #[test]
    fn circular_pins_and_radius() {
        let l = circle(1.0, 64);
        assert_eq!(l.node(0), &[1.0, 0.0]);
        assert_eq!(l.node(64), &[-1.0, -0.0]);
        for row in l.nodes().chunks(2) {
            assert!((norm(row) - 1.0).abs() < 1e-15);
        }
        assert!((circle(2.0, 64).min_radius() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn frame_validation() {
        let bad = SymmetricLoop::build_circular(1.0, &[1.0, 0.0], &[0.6, 0.8], 16);
        assert!(matches!(bad, Err(Error::InvalidFrame(_))));
        let short = SymmetricLoop::build_circular(1.0, &[1.0, 0.0], &[0.0, 0.9], 16);
        assert!(matches!(short, Err(Error::InvalidFrame(_))));
        assert!(SymmetricLoop::build_circular(1.0, &[1.0, 0.0], &[0.0, 1.0], 4).is_err());
    }

    #[test]
    fn circular_seminorm() {
        let k = circle(1.0, 128).kinematics();
        assert!((k.seminorm_sq - 4.0 * PI * PI).abs() < 1e-2);
        // exact value for the inscribed polygon is n² · 4 sin²(π/n)
        let n = 256.0;
        assert!((k.seminorm_sq - 4.0 * n * n * (PI / n).sin().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn seminorm_converges_at_second_order() {
        let err = |m| (circle(1.0, m).seminorm_sq() - 4.0 * PI * PI).abs();
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn reconstruction_is_antiperiodic_and_mean_free() {
        let l = circle(1.5, 32).perturbed(0.2, 7).unwrap();
        let full = l.full_samples();
        let m = l.half_nodes();
        for j in 0..m {
            for c in 0..2 {
                assert_eq!(full[(j + m) * 2 + c], -full[j * 2 + c]);
            }
        }
        for c in 0..2 {
            let mean: f64 = full.iter().skip(c).step_by(2).sum::<f64>() / (2 * m) as f64;
            assert!(mean.abs() < 1e-14);
        }
    }

    #[test]
    fn circle_velocities() {
        let l = circle(1.0, 256);
        let k = l.kinematics();
        for row in k.velocities.chunks(2) {
            assert!((norm(row) - 2.0 * PI).abs() < 1e-3);
        }
    }

    #[test]
    fn resample_identity_and_pinning() {
        let l = circle(1.0, 64).perturbed(0.05, 3).unwrap();
        assert_eq!(l.resample(64, None).unwrap(), l);
        let r = l.resample(100, Some(2.0)).unwrap();
        assert_eq!(r.node(0), &[2.0, 0.0]);
        assert_eq!(r.node(100), &[-2.0, -0.0]);
        assert_eq!(r.radius(), 2.0);
    }

    #[test]
    fn interior_length_is_checked() {
        assert!(SymmetricLoop::from_interior(1.0, &[1.0, 0.0], 8, &[0.0; 10]).is_err());
    }
}
