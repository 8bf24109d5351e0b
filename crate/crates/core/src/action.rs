//! Discrete fixed-energy action `f(q) = ½ S(q) P(q)` on symmetric loops.
//!
//! `S = Σ |q_{k+1} - q_k|² / h` over the full period and
//! `P = h Σ (H - V(q_k))` is the periodic trapezoid rule. The gradient is the
//! exact gradient of this discrete functional with respect to the interior
//! half-grid nodes, with the reflected second half folded back in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::loops::SymmetricLoop;
use crate::potentials::Potential;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionEvaluation {
    pub value: f64,
    /// `(M - 1) * dim` entries, one row per interior node.
    pub gradient: Vec<f64>,
    pub seminorm_sq: f64,
    pub potential_integral: f64,
}

struct Parts {
    s: f64,
    p: f64,
    // per half node j = 0..M-1: ∇V(q_j) and ∇V(-q_j)
    grad_v: Vec<f64>,
    grad_v_neg: Vec<f64>,
    // Σ_k ∇V(q_k)·q_k over the full period
    force_virial: f64,
}

fn parts(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<Parts> {
    let d = lp.dim();
    if pot.dim() != d {
        return Err(Error::InvalidArgument(format!("potential dimension {} vs loop dimension {d}", pot.dim())));
    }
    let m = lp.half_nodes();
    let h = lp.spacing();
    let mut grad_v = vec![0.0; m * d];
    let mut grad_v_neg = vec![0.0; m * d];
    let mut neg = vec![0.0; d];
    let mut sum = 0.0;
    let mut force_virial = 0.0;
    for j in 0..m {
        let q = lp.node(j);
        neg.iter_mut().zip(q).for_each(|(n, x)| *n = -x);
        let collide = |e: Error| match e {
            Error::Singularity => Error::Collision { node: j },
            e => e,
        };
        let v = pot.value_gradient(q, &mut grad_v[j * d..(j + 1) * d]).map_err(collide)?;
        let vn = pot.value_gradient(&neg, &mut grad_v_neg[j * d..(j + 1) * d]).map_err(collide)?;
        sum += 2.0 * energy - v - vn;
        force_virial += dot(&grad_v[j * d..(j + 1) * d], q) + dot(&grad_v_neg[j * d..(j + 1) * d], &neg);
    }
    Ok(Parts { s: lp.seminorm_sq(), p: h * sum, grad_v, grad_v_neg, force_virial })
}

/// Gradient rows for half nodes `0..M`; row 0 is the derivative with respect
/// to the pin with `q_M = -q_0` tied to it.
fn half_gradient(lp: &SymmetricLoop, pt: &Parts) -> Vec<f64> {
    let d = lp.dim();
    let m = lp.half_nodes();
    let h = lp.spacing();
    let mut g = vec![0.0; m * d];
    for j in 0..m {
        let q = lp.node(j);
        let (prev, next): (Vec<f64>, &[f64]) = if j == 0 {
            (lp.node(m - 1).iter().map(|x| -x).collect(), lp.node(1))
        } else {
            (lp.node(j - 1).to_vec(), lp.node(j + 1))
        };
        for c in 0..d {
            let ds = 4.0 / h * (2.0 * q[c] - prev[c] - next[c]);
            let dp = h * (pt.grad_v_neg[j * d + c] - pt.grad_v[j * d + c]);
            g[j * d + c] = 0.5 * (ds * pt.p + pt.s * dp);
        }
    }
    g
}

pub fn evaluate(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<ActionEvaluation> {
    let pt = parts(pot, lp, energy)?;
    let mut gradient = half_gradient(lp, &pt);
    gradient.drain(..lp.dim());
    Ok(ActionEvaluation { value: 0.5 * pt.s * pt.p, gradient, seminorm_sq: pt.s, potential_integral: pt.p })
}

pub fn action_value(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<f64> {
    let pt = parts(pot, lp, energy)?;
    Ok(0.5 * pt.s * pt.p)
}

pub fn action_gradient(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<Vec<f64>> {
    Ok(evaluate(pot, lp, energy)?.gradient)
}

/// `∫|q̇|² · ∫(H - V(q) - ½(∇V(q), q))`, discretized with the same
/// quadrature as the action.
pub fn radial_pairing(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<f64> {
    let pt = parts(pot, lp, energy)?;
    Ok(pt.s * (pt.p - 0.5 * lp.spacing() * pt.force_virial))
}

/// `d/dε f((1 + ε) q)` at `ε = 0`, computed from the node gradient with the
/// pins included (scaling moves the boundary point too).
pub fn scaling_derivative(pot: &dyn Potential, lp: &SymmetricLoop, energy: f64) -> Result<f64> {
    let pt = parts(pot, lp, energy)?;
    let g = half_gradient(lp, &pt);
    Ok(g.chunks(lp.dim()).enumerate().map(|(j, row)| dot(row, lp.node(j))).sum())
}

/// `Σ_j grad_j · q_j` over the interior nodes only.
pub fn interior_pairing(eval: &ActionEvaluation, lp: &SymmetricLoop) -> f64 {
    dot(&eval.gradient, lp.interior())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;
    use std::f64::consts::PI;

    fn circle(r: f64, m: usize) -> SymmetricLoop {
        SymmetricLoop::build_circular(r, &[1.0, 0.0], &[0.0, 1.0], m).unwrap()
    }

    fn cubic() -> PotentialSpec {
        PotentialSpec::power_law(3.0, 2).unwrap()
    }

    #[test]
    fn circular_action() {
        let f = action_value(&cubic(), &circle(1.0, 512), 1.0).unwrap();
        assert!((f - 4.0 * PI * PI).abs() < 0.01, "{f}");
    }

    #[test]
    fn affine_in_energy() {
        let l = circle(1.0, 512);
        let f1 = action_value(&cubic(), &l, 1.0).unwrap();
        let f2 = action_value(&cubic(), &l, 2.0).unwrap();
        assert!((f2 - f1 - 0.5 * l.seminorm_sq()).abs() < 1e-10);
        assert!((f2 - f1 - 2.0 * PI * PI).abs() < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = cubic();
        let l = circle(1.3, 16).perturbed(0.1, 11).unwrap();
        let g = action_gradient(&p, &l, 1.0).unwrap();
        let x = l.interior().to_vec();
        for i in 0..x.len() {
            let step = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let fp = action_value(&p, &l.with_interior(&xp).unwrap(), 1.0).unwrap();
            let fm = action_value(&p, &l.with_interior(&xm).unwrap(), 1.0).unwrap();
            let fd = (fp - fm) / (2.0 * step);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn pairing_on_circles() {
        let p = cubic();
        let l = circle(1.0, 256);
        let pr = radial_pairing(&p, &l, 1.0).unwrap();
        assert!((pr - 0.5 * l.seminorm_sq()).abs() < 1e-10);
        assert!((pr - 2.0 * PI * PI).abs() < 1e-2);
        let crit = circle(2f64.powf(-1.0 / 3.0), 256);
        let eval = evaluate(&p, &crit, 1.0).unwrap();
        assert!(radial_pairing(&p, &crit, 1.0).unwrap().abs() < 1e-10);
        assert!(interior_pairing(&eval, &crit).abs() < 1e-10);
    }

    #[test]
    fn pairing_equals_scaling_derivative() {
        let p = cubic();
        let l = circle(2.0, 32).perturbed(0.3, 5).unwrap();
        let a = radial_pairing(&p, &l, 1.0).unwrap();
        let b = scaling_derivative(&p, &l, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn collision_is_reported() {
        let p = cubic();
        let l = circle(1.0, 16);
        let mut x = l.interior().to_vec();
        x[6] = 0.0;
        x[7] = 0.0;
        let l = l.with_interior(&x).unwrap();
        assert!(matches!(action_value(&p, &l, 1.0), Err(Error::Collision { node: 4 })));
    }
}
