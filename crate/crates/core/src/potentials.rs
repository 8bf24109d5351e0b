//! Radial singular potentials, their gradients, and sampled checks of the
//! structural hypotheses the variational construction relies on.
//!
//! Every built-in family is radial, `V(x) = φ(|x|)`, so `∇V(x) = φ'(r) x / r`.
//! Hypothesis checks are sampling based: a pass means no counterexample was
//! found on the grid, and the asymptotic conditions are checked as monotone
//! trends over the outermost/innermost decade plus an endpoint threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Anything that can be evaluated as a potential on R^N \ {0}.
pub trait Potential: Sync {
    fn dim(&self) -> usize;

    /// Writes ∇V(x) into `grad` and returns V(x).
    fn value_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; x.len()];
        self.value_gradient(x, &mut g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// V = -|x|^(-alpha)
    PowerLaw { alpha: f64 },
    /// -ln(r² + r⁻²)/r² inside the unit ball, -1/r³ beyond r = 2, and a
    /// cubic Hermite blend in r on [1, 2].
    LogBlend,
    /// V = -1/|x|. Fails the collision hypothesis; only used as an
    /// analytic oracle for the integrator.
    KeplerTest,
}

/// Decay metadata `|x|^(β+1)|∇V| ≤ M₀`, `|x|^(β+1)|V| ≤ M₀` for `|x| ≥ r₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub beta: f64,
    pub m0: f64,
    pub r0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: Family,
    pub dim: usize,
    pub decay: Option<DecayBound>,
}

impl PotentialSpec {
    pub fn power_law(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("power-law exponent {alpha} must be > 0")));
        }
        check_dim(dim)?;
        // r^α · α r^(-α-1) = α/r ≤ α and r^α · r^(-α) = 1 ≤ α on r ≥ 1
        let decay = (alpha > 2.0).then_some(DecayBound { beta: alpha - 1.0, m0: alpha, r0: 1.0 });
        Ok(Self { family: Family::PowerLaw { alpha }, dim, decay })
    }

    pub fn log_blend(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { family: Family::LogBlend, dim, decay: Some(DecayBound { beta: 2.0, m0: 3.0, r0: 2.0 }) })
    }

    pub fn kepler_test(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { family: Family::KeplerTest, dim, decay: None })
    }

    pub fn with_decay(mut self, decay: Option<DecayBound>) -> Self {
        self.decay = decay;
        self
    }

    /// Whether the family is admissible for the minimization (V1) to (V6).
    pub fn is_admissible(&self) -> bool {
        match self.family {
            Family::PowerLaw { alpha } => alpha > 2.0,
            Family::LogBlend => true,
            Family::KeplerTest => false,
        }
    }

    pub fn id(&self) -> String {
        match self.family {
            Family::PowerLaw { alpha } => format!("power-law(alpha={alpha})"),
            Family::LogBlend => "log-blend".to_string(),
            Family::KeplerTest => "kepler-test".to_string(),
        }
    }

    /// Radial profile φ(r) and φ'(r).
    pub fn radial(&self, r: f64) -> (f64, f64) {
        match self.family {
            Family::PowerLaw { alpha } => power_law_radial(alpha, r),
            Family::KeplerTest => power_law_radial(1.0, r),
            Family::LogBlend => log_blend_radial(r),
        }
    }

    pub fn evaluate_with_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; x.len()];
        let v = self.value_gradient(x, &mut g)?;
        Ok((v, g))
    }

    /// 2V(x) + (x, ∇V(x)).
    pub fn virial_defect(&self, x: &[f64]) -> Result<f64> {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::Singularity);
        }
        let (phi, dphi) = self.radial(r);
        Ok(2.0 * phi + r * dphi)
    }
}

impl Potential for PotentialSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let r = norm(x);
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Singularity);
        }
        let (phi, dphi) = self.radial(r);
        let s = dphi / r;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g = s * xi;
        }
        Ok(phi)
    }
}

/// V ≡ 0. Plumbing for integrator tests; not a singular potential.
#[derive(Clone, Copy, Debug)]
pub struct FreeParticle {
    pub dim: usize,
}

impl Potential for FreeParticle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_gradient(&self, _x: &[f64], grad: &mut [f64]) -> Result<f64> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        Ok(0.0)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dimension {dim} must be >= 2")));
    }
    Ok(())
}

fn power_law_radial(alpha: f64, r: f64) -> (f64, f64) {
    let p = r.powf(-alpha);
    (-p, alpha * p / r)
}

fn log_blend_radial(r: f64) -> (f64, f64) {
    if r <= 1.0 {
        inner_log(r)
    } else if r >= 2.0 {
        power_law_radial(3.0, r)
    } else {
        let (y0, m0) = inner_log(1.0);
        let (y1, m1) = power_law_radial(3.0, 2.0);
        let s = r - 1.0;
        let (s2, s3) = (s * s, s * s * s);
        let v =
            (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        let dv = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        (v, dv)
    }
}

// -ln(r² + r⁻²)/r², with ln(r² + r⁻²) = ln(1 + r⁴) − 2 ln r to avoid overflow
fn inner_log(r: f64) -> (f64, f64) {
    let r2 = r * r;
    let l = (r2 * r2).ln_1p() - 2.0 * r.ln();
    let dl = 4.0 * r2 * r / (1.0 + r2 * r2) - 2.0 / r;
    (-l / r2, -dl / r2 + 2.0 * l / (r2 * r))
}

/// `n` radii log-spaced over `[lo, hi]`, endpoints included.
pub fn log_radius_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
}

/// Deterministic unit directions: evenly spaced on the circle for N = 2,
/// seeded Gaussian samples otherwise.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm(&v);
            v.into_iter().map(|x| x / n).collect()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SamplingGrid {
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl SamplingGrid {
    /// 400 log-spaced radii on [1e-3, 1e3] × 8 directions.
    pub fn standard(dim: usize) -> Self {
        Self { radii: log_radius_grid(1e-3, 1e3, 400), directions: sample_directions(dim, 8, 0x5eed) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub status: CheckStatus,
    /// Sampled quantity backing the verdict.
    pub evidence: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub potential: String,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn passed(&self, id: &str) -> bool {
        self.get(id).is_some_and(|c| c.status == CheckStatus::Pass)
    }

    /// (V1) to (V6), the hypotheses required for existence of minimizers.
    pub fn core_passed(&self) -> bool {
        ["V1", "V2", "V3", "V4", "V5", "V6"].iter().all(|id| self.passed(id))
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.id.as_str()).collect()
    }
}

const ENDPOINT_TOL: f64 = 1e-2;
const BLOWUP_MIN: f64 = 1e2;

pub fn check_hypotheses(p: &PotentialSpec, grid: &SamplingGrid) -> Result<HypothesisReport> {
    let radii = &grid.radii;
    if radii.len() < 2 || radii[0] > 1e-3 * (1.0 + 1e-12) || radii[radii.len() - 1] < 1e3 * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument("radius grid must span at least [1e-3, 1e3]".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radius grid must be strictly increasing".into()));
    }
    if grid.directions.is_empty() {
        return Err(Error::InvalidArgument("no direction samples".into()));
    }

    // per radius: (min V, max V, min defect, max defect, max |V(x) − V(−x)|)
    let mut rows = Vec::with_capacity(radii.len());
    let mut x = vec![0.0; p.dim];
    let mut neg = vec![0.0; p.dim];
    let mut g = vec![0.0; p.dim];
    for &r in radii {
        let mut row = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, 0.0];
        for d in &grid.directions {
            for k in 0..p.dim {
                x[k] = r * d[k];
                neg[k] = -x[k];
            }
            let v = p.value_gradient(&x, &mut g)?;
            let defect = 2.0 * v + dot(&x, &g);
            let vn = p.value(&neg)?;
            row[0] = row[0].min(v);
            row[1] = row[1].max(v);
            row[2] = row[2].min(defect);
            row[3] = row[3].max(defect);
            row[4] = f64::max(row[4], (v - vn).abs());
        }
        rows.push(row);
    }

    let n = radii.len();
    let outer: Vec<usize> = (0..n).filter(|&i| radii[i] >= radii[n - 1] / 10.0).collect();
    let inner: Vec<usize> = (0..n).filter(|&i| radii[i] <= radii[0] * 10.0).collect();
    let status = |ok: bool| if ok { CheckStatus::Pass } else { CheckStatus::Fail };
    let mut checks = Vec::new();

    let sym = rows.iter().map(|r| r[4] / r[0].abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    checks.push(HypothesisCheck {
        id: "V1".into(),
        status: status(sym <= 1e-14),
        evidence: sym,
        detail: "max relative |V(x) - V(-x)|".into(),
    });

    let vmax = rows.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max);
    checks.push(HypothesisCheck {
        id: "V2".into(),
        status: status(vmax < 0.0),
        evidence: vmax,
        detail: "max sampled V".into(),
    });

    // (V3): sup |defect| decays to 0 at infinity
    let sup_abs = |r: &[f64; 5]| r[2].abs().max(r[3].abs());
    let end = sup_abs(&rows[n - 1]);
    let trend = non_increasing(outer.iter().map(|&i| sup_abs(&rows[i])));
    checks.push(HypothesisCheck {
        id: "V3".into(),
        status: status(end <= ENDPOINT_TOL && trend),
        evidence: end,
        detail: format!("sup |2V + (x,∇V)| at r = {:.3e}; monotone over outer decade: {trend}", radii[n - 1]),
    });

    // (V4): inf defect blows up at 0
    let start = rows[0][2];
    let trend = non_increasing(inner.iter().map(|&i| rows[i][2]));
    checks.push(HypothesisCheck {
        id: "V4".into(),
        status: status(start >= BLOWUP_MIN && trend),
        evidence: start,
        detail: format!("inf 2V + (x,∇V) at r = {:.3e}; increasing inward: {trend}", radii[0]),
    });

    // (V5): -V blows up at 0
    let start = -rows[0][1];
    let trend = non_increasing(inner.iter().map(|&i| -rows[i][1]));
    checks.push(HypothesisCheck {
        id: "V5".into(),
        status: status(start >= BLOWUP_MIN && trend),
        evidence: start,
        detail: format!("inf -V at r = {:.3e}; increasing inward: {trend}", radii[0]),
    });

    // (V6): V → 0 at infinity
    let end = rows[n - 1][0].abs();
    let trend = non_increasing(outer.iter().map(|&i| rows[i][0].abs()));
    checks.push(HypothesisCheck {
        id: "V6".into(),
        status: status(end <= ENDPOINT_TOL && trend),
        evidence: end,
        detail: format!("sup |V| at r = {:.3e}; decreasing over outer decade: {trend}", radii[n - 1]),
    });

    checks.push(match p.decay {
        None => HypothesisCheck {
            id: "V7".into(),
            status: CheckStatus::Skipped,
            evidence: f64::NAN,
            detail: "no decay metadata".into(),
        },
        Some(d) => {
            let mut worst: f64 = 0.0;
            let tail = radii.iter().copied().filter(|&r| r >= d.r0);
            for r in std::iter::once(d.r0).chain(tail) {
                let (phi, dphi) = p.radial(r);
                let w = r.powf(d.beta + 1.0);
                worst = worst.max(w * dphi.abs()).max(w * phi.abs());
            }
            let ok = d.beta > 1.0 && d.r0 >= 1.0 && worst <= d.m0 * (1.0 + 1e-12);
            HypothesisCheck {
                id: "V7".into(),
                status: status(ok),
                evidence: worst,
                detail: format!(
                    "max |x|^(beta+1) max(|V|, |grad V|) on |x| >= {} with beta = {}, M0 = {}",
                    d.r0, d.beta, d.m0
                ),
            }
        }
    });

    Ok(HypothesisReport { potential: p.id(), checks })
}

fn non_increasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrongForce {
    pub delta: f64,
    /// Constant in the barrier −V(x) ≥ C/|x|², so that U(x) = √C ln|x|.
    pub c: f64,
    /// min over samples of −V(x)|x|²/C (≥ 1 when the barrier holds).
    pub min_ratio: f64,
    pub samples: usize,
}

/// Gordon strong-force constant on (0, δ].
pub fn strong_force_constant(p: &PotentialSpec, delta: f64, directions: &[Vec<f64>]) -> Result<StrongForce> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let radii = log_radius_grid(delta * 1e-6, delta, 200);
    let mut x = vec![0.0; p.dim];
    let mut g = vec![0.0; p.dim];
    // φ(r) = −V r² is non-increasing on (0, δ] exactly when the virial defect is ≥ 0 there
    for &r in &radii {
        for d in directions {
            x.iter_mut().zip(d).for_each(|(xi, di)| *xi = r * di);
            let v = p.value_gradient(&x, &mut g)?;
            let defect = 2.0 * v + dot(&x, &g);
            if defect < -1e-12 * v.abs() {
                return Err(Error::InadmissibleDelta { delta, radius: r });
            }
        }
    }
    let mut c = f64::INFINITY;
    for d in directions {
        x.iter_mut().zip(d).for_each(|(xi, di)| *xi = delta * di);
        c = c.min(-p.value(&x)? * delta * delta);
    }
    let mut min_ratio = f64::INFINITY;
    for &r in &radii {
        for d in directions {
            x.iter_mut().zip(d).for_each(|(xi, di)| *xi = r * di);
            let ratio = -p.value(&x)? * r * r / c;
            if ratio < 1.0 - 1e-12 {
                return Err(Error::InadmissibleDelta { delta, radius: r });
            }
            min_ratio = min_ratio.min(ratio);
        }
    }
    Ok(StrongForce { delta, c, min_ratio, samples: radii.len() * directions.len() })
}

/// Radii where the virial defect crosses 2H.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialThresholds {
    /// Largest radius with defect > 2H on the whole ball inside it.
    pub m_inner: f64,
    /// Smallest radius with defect < 2H everywhere outside it.
    pub m_outer: f64,
}

pub fn virial_threshold_radii(p: &PotentialSpec, energy: f64, grid: &SamplingGrid) -> Result<VirialThresholds> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidArgument(format!("energy {energy} must be > 0")));
    }
    let two_h = 2.0 * energy;
    let dirs = &grid.directions;
    let extreme = |r: f64, take_min: bool| -> Result<f64> {
        let mut x = vec![0.0; p.dim];
        let mut g = vec![0.0; p.dim];
        let mut acc = if take_min { f64::INFINITY } else { f64::NEG_INFINITY };
        for d in dirs {
            x.iter_mut().zip(d).for_each(|(xi, di)| *xi = r * di);
            let v = p.value_gradient(&x, &mut g)?;
            let defect = 2.0 * v + dot(&x, &g);
            acc = if take_min { acc.min(defect) } else { acc.max(defect) };
        }
        Ok(acc)
    };
    let radii = &grid.radii;
    let lows = radii.iter().map(|&r| extreme(r, true)).collect::<Result<Vec<_>>>()?;
    let highs = radii.iter().map(|&r| extreme(r, false)).collect::<Result<Vec<_>>>()?;

    let first_fail = lows.iter().position(|&d| d <= two_h);
    let m_inner = match first_fail {
        None => return Err(Error::InconclusiveThresholds("defect stays above 2H on the whole grid".into())),
        Some(0) => return Err(Error::InconclusiveThresholds("defect is below 2H at the innermost radius".into())),
        Some(i) => bisect(|r| Ok(extreme(r, true)? - two_h), radii[i - 1], radii[i])?,
    };
    let last_high = highs.iter().rposition(|&d| d >= two_h);
    let m_outer = match last_high {
        None => return Err(Error::InconclusiveThresholds("defect is below 2H at the innermost radius".into())),
        Some(j) if j + 1 == radii.len() => {
            return Err(Error::InconclusiveThresholds("defect exceeds 2H at the outermost radius".into()))
        }
        Some(j) => bisect(|r| Ok(extreme(r, false)? - two_h), radii[j], radii[j + 1])?,
    };
    Ok(VirialThresholds { m_inner, m_outer: m_outer.max(m_inner) })
}

// root of a function positive at `lo` and non-positive at `hi`
fn bisect(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn power_law_values() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let (v, g) = p.evaluate_with_gradient(&[1.0, 0.0]).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(g, vec![3.0, 0.0]);
        let (v, g) = p.evaluate_with_gradient(&[2.0, 0.0]).unwrap();
        assert!(close(v, -0.125, 1e-15));
        assert!(close(g[0], 0.1875, 1e-15) && g[1] == 0.0);
    }

    #[test]
    fn kepler_values() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let (v, g) = p.evaluate_with_gradient(&[0.0, 1.0]).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(g, vec![0.0, 1.0]);
        assert!(!p.is_admissible());
    }

    #[test]
    fn origin_is_rejected() {
        let p = PotentialSpec::power_law(3.0, 3).unwrap();
        assert!(matches!(p.evaluate_with_gradient(&[0.0, 0.0, 0.0]), Err(Error::Singularity)));
        assert!(matches!(p.virial_defect(&[0.0, 0.0, 0.0]), Err(Error::Singularity)));
    }

    #[test]
    fn virial_defect_examples() {
        let p3 = PotentialSpec::power_law(3.0, 2).unwrap();
        assert!(close(p3.virial_defect(&[1.0, 0.0]).unwrap(), 1.0, 1e-15));
        assert!(close(p3.virial_defect(&[0.0, 2.0]).unwrap(), 0.125, 1e-15));
        let p2 = PotentialSpec::power_law(2.0, 2).unwrap();
        for x in [[0.3, 0.4], [5.0, -1.0], [1e-3, 0.0]] {
            let d = p2.virial_defect(&x).unwrap();
            assert!(d.abs() <= 1e-15 * p2.value(&x).unwrap().abs(), "{d}");
        }
    }

    #[test]
    fn log_blend_is_c1_at_the_seams() {
        for r in [1.0, 2.0] {
            let (a, da) = log_blend_radial(r - 1e-9);
            let (b, db) = log_blend_radial(r + 1e-9);
            assert!((a - b).abs() < 1e-8, "value jump at {r}");
            assert!((da - db).abs() < 1e-7, "slope jump at {r}");
        }
    }

    #[test]
    fn log_blend_inner_profile_is_stable_near_zero() {
        let (v, dv) = inner_log(1e-60);
        assert!(v.is_finite() && v < 0.0 && dv.is_finite());
        let direct = -((1e-3f64).powi(2) + (1e-3f64).powi(-2)).ln() / 1e-6;
        assert!(close(inner_log(1e-3).0, direct, 1e-12));
    }

    #[test]
    fn hypotheses_for_cubic_power_law() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let rep = check_hypotheses(&p, &SamplingGrid::standard(2)).unwrap();
        assert!(rep.core_passed(), "{:?}", rep.failures());
        let v7 = rep.get("V7").unwrap();
        assert_eq!(v7.status, CheckStatus::Pass);
        assert_eq!(p.decay, Some(DecayBound { beta: 2.0, m0: 3.0, r0: 1.0 }));
        assert!(close(v7.evidence, 3.0, 1e-12));
    }

    #[test]
    fn hypotheses_for_log_blend_and_higher_dimension() {
        for p in [PotentialSpec::log_blend(2).unwrap(), PotentialSpec::power_law(2.5, 3).unwrap()] {
            let rep = check_hypotheses(&p, &SamplingGrid::standard(p.dim)).unwrap();
            assert!(rep.core_passed(), "{}: {:?}", p.id(), rep.failures());
            assert!(rep.passed("V7"), "{}", p.id());
        }
    }

    #[test]
    fn kepler_fails_v4_only_among_core() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        let rep = check_hypotheses(&p, &SamplingGrid::standard(2)).unwrap();
        assert_eq!(rep.get("V4").unwrap().status, CheckStatus::Fail);
        assert!(!rep.core_passed());
        assert_eq!(rep.failures(), vec!["V4"]);
    }

    #[test]
    fn too_narrow_grid_is_rejected() {
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        let grid = SamplingGrid { radii: log_radius_grid(1e-2, 1e3, 50), directions: sample_directions(2, 4, 1) };
        assert!(check_hypotheses(&p, &grid).is_err());
    }

    #[test]
    fn strong_force_examples() {
        let dirs = sample_directions(2, 8, 1);
        let p = PotentialSpec::power_law(3.0, 2).unwrap();
        assert!(close(strong_force_constant(&p, 1.0, &dirs).unwrap().c, 1.0, 1e-14));
        assert!(close(strong_force_constant(&p, 0.5, &dirs).unwrap().c, 2.0, 1e-14));
        let inv_sq = PotentialSpec::power_law(2.0, 2).unwrap();
        let sf = strong_force_constant(&inv_sq, 1.0, &dirs).unwrap();
        assert!(close(sf.c, 1.0, 1e-14));
        assert!(close(sf.min_ratio, 1.0, 1e-12));
    }

    #[test]
    fn strong_force_rejects_kepler() {
        let dirs = sample_directions(2, 8, 1);
        let p = PotentialSpec::kepler_test(2).unwrap();
        assert!(matches!(strong_force_constant(&p, 1.0, &dirs), Err(Error::InadmissibleDelta { .. })));
    }

    #[test]
    fn virial_thresholds_examples() {
        let grid = SamplingGrid::standard(2);
        let p3 = PotentialSpec::power_law(3.0, 2).unwrap();
        let t = virial_threshold_radii(&p3, 1.0, &grid).unwrap();
        let expect = 2f64.powf(-1.0 / 3.0);
        assert!(close(t.m_inner, expect, 1e-12) && close(t.m_outer, expect, 1e-12), "{t:?}");
        let t = virial_threshold_radii(&p3, 0.5, &grid).unwrap();
        assert!(close(t.m_inner, 1.0, 1e-12) && close(t.m_outer, 1.0, 1e-12));
        let p4 = PotentialSpec::power_law(4.0, 2).unwrap();
        let t = virial_threshold_radii(&p4, 1.0, &grid).unwrap();
        assert!(close(t.m_inner, 1.0, 1e-12) && close(t.m_outer, 1.0, 1e-12));
    }

    #[test]
    fn virial_thresholds_inconclusive_for_kepler() {
        let p = PotentialSpec::kepler_test(2).unwrap();
        assert!(matches!(
            virial_threshold_radii(&p, 1.0, &SamplingGrid::standard(2)),
            Err(Error::InconclusiveThresholds(_))
        ));
    }
}
