//! Config-driven runner behind the `maupertuis` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};

use maupertuis::asymptotics::{angular_diagnostics, area_rate_check, escape_onset};
use maupertuis::continuation::{run_continuation, ContinuationConfig};
use maupertuis::io::{
    parse_diagnostics, read_orbit_csv, to_json, write_angular_csv, write_loop_csv, write_orbit_csv, write_table,
    DiagnosticsDocument,
};
use maupertuis::minimize::{minimize_loop, MinimizeOptions};
use maupertuis::orbit::{
    classify_orbit, conic_fit, integrate_ode, maupertuis_rescale, residuals, ClassifyOptions, IntegrateOptions,
    OrbitClass,
};
use maupertuis::potentials::{
    check_hypotheses, strong_force_constant, virial_threshold_radii, DecayBound, PotentialSpec, SamplingGrid,
};
use maupertuis::{Error, SymmetricLoop};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckPotential,
    Minimize,
    Continue,
    Analyze,
    Oracle,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub m0: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
}

fn default_dim() -> usize {
    2
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizerConfig {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
    pub guard: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub potential: PotentialConfig,
    #[serde(default = "default_energy")]
    pub energy: f64,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
    /// Single radius for `minimize`; defaults to the first schedule entry.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub minimizer: MinimizerConfig,
    #[serde(default)]
    pub window_tau: Option<f64>,
    #[serde(default, rename = "comparison_L")]
    pub comparison_l: Option<f64>,
    #[serde(default)]
    pub recenter_radius: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Strong-force radius reported by `check-potential`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Omit timestamps so identical inputs give byte-identical output.
    #[serde(default)]
    pub canonical: bool,
    pub out_dir: PathBuf,
}

fn default_energy() -> f64 {
    1.0
}

/// Error record written to `error.json` and stderr.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl RunConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without semantic validation.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("invalid config")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.continuation_config()?.validate_basic()?;
        if self.radius.is_some_and(|r| !(r.is_finite() && r > 0.0)) {
            bail!("radius must be positive");
        }
        Ok(())
    }

    pub fn potential_spec(&self) -> anyhow::Result<PotentialSpec> {
        let pc = &self.potential;
        let spec = match pc.family.as_str() {
            "power-law" => {
                let alpha = pc.alpha.ok_or_else(|| anyhow!("power-law needs `alpha`"))?;
                PotentialSpec::power_law(alpha, pc.dim)?
            }
            "log-blend" => PotentialSpec::log_blend(pc.dim)?,
            "kepler-test" => PotentialSpec::kepler_test(pc.dim)?,
            other => bail!("unknown potential family `{other}`"),
        };
        let decay = match (pc.beta, pc.m0, pc.r0) {
            (None, None, None) => return Ok(spec),
            (Some(beta), Some(m0), Some(r0)) => DecayBound { beta, m0, r0 },
            _ => bail!("decay bound needs all of `beta`, `m0`, `r0`"),
        };
        if !(decay.beta > 1.0 && decay.m0 > 0.0 && decay.r0 > 0.0) {
            bail!("decay bound needs beta > 1, m0 > 0, r0 > 0");
        }
        Ok(spec.with_decay(Some(decay)))
    }

    pub fn continuation_config(&self) -> anyhow::Result<ContinuationConfig> {
        let p = self.potential_spec()?;
        let dir = self.direction.clone().unwrap_or_else(|| {
            let mut e = vec![0.0; p.dim];
            e[0] = 1.0;
            e
        });
        let mut cfg = ContinuationConfig::new(p, self.energy, dir);
        if let Some(s) = &self.schedule {
            cfg.schedule = s.clone();
        }
        if let Some(m) = self.grid {
            cfg.grid = m;
        }
        if let Some(t) = self.window_tau {
            cfg.window_tau = t;
        }
        if let Some(e) = self.eta {
            cfg.eta = e;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        cfg.comparison_l = self.comparison_l;
        cfg.recenter_radius = self.recenter_radius;
        cfg.minimizer = self.minimizer_options();
        Ok(cfg)
    }

    pub fn minimizer_options(&self) -> MinimizeOptions {
        let d = MinimizeOptions::default();
        let m = &self.minimizer;
        MinimizeOptions {
            max_iters: m.max_iters.unwrap_or(d.max_iters),
            tol: m.tol.unwrap_or(d.tol),
            guard: m.guard,
            seed: m.seed.unwrap_or(d.seed),
            ..d
        }
    }
}

/// Maps an error to its exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Hypothesis(_)) => EXIT_HYPOTHESIS,
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

pub fn error_record(err: &anyhow::Error) -> ErrorRecord {
    let exit_code = exit_code(err);
    let kind = match exit_code {
        EXIT_HYPOTHESIS => "hypothesis",
        EXIT_NUMERICAL => "numerical",
        _ => "config",
    };
    ErrorRecord { kind, exit_code, message: format!("{err:#}") }
}

/// Loads `config_path`, executes it, and returns the exit status. Every
/// failure is also recorded as `error.json` in the output directory when
/// the config got far enough to name one.
pub fn run_file(config_path: &Path) -> i32 {
    let parsed = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))
        .and_then(|text| RunConfig::parse(&text));
    let cfg = match parsed {
        Ok(c) => c,
        Err(e) => return report(&e, None),
    };
    match cfg.validate().and_then(|_| execute(&cfg)) {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e, Some(&cfg.out_dir)),
    }
}

fn report(err: &anyhow::Error, out_dir: Option<&Path>) -> i32 {
    let rec = error_record(err);
    let json = to_json(&rec).unwrap_or_else(|_| format!("{{\"message\": {:?}}}\n", rec.message));
    eprint!("{json}");
    if let Some(dir) = out_dir {
        let _ = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join("error.json"), &json));
    }
    rec.exit_code
}

pub fn execute(cfg: &RunConfig) -> anyhow::Result<()> {
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let _ = fs::remove_file(cfg.out_dir.join("error.json"));
    match cfg.command {
        Command::CheckPotential => check_potential(cfg),
        Command::Minimize => minimize(cfg),
        Command::Continue => continue_run(cfg),
        Command::Analyze => analyze(cfg),
        Command::Oracle => oracle(cfg),
    }
}

/// File-name tag of a radius: `8` for 8.0, `2.5` for 2.5.
pub fn radius_tag(r: f64) -> String {
    format!("{r}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn create(dir: &Path, name: &str) -> anyhow::Result<fs::File> {
    let path = dir.join(name);
    fs::File::create(&path).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct PotentialReport {
    report: maupertuis::potentials::HypothesisReport,
    thresholds: Option<maupertuis::potentials::VirialThresholds>,
    strong_force: Option<maupertuis::potentials::StrongForce>,
}

fn check_potential(cfg: &RunConfig) -> anyhow::Result<()> {
    let p = cfg.potential_spec()?;
    let grid = SamplingGrid::standard(p.dim);
    let report = check_hypotheses(&p, &grid)?;
    let thresholds = virial_threshold_radii(&p, cfg.energy, &grid).ok();
    let strong_force = match cfg.delta {
        Some(delta) => Some(strong_force_constant(&p, delta, &grid.directions)?),
        None => None,
    };
    let passed = report.core_passed();
    let failures = report.failures().join(", ");
    write_file(&cfg.out_dir, "hypotheses.json", &to_json(&PotentialReport { report, thresholds, strong_force })?)?;
    if !passed {
        return Err(Error::Hypothesis(format!("{} fails {failures}", p.id())).into());
    }
    Ok(())
}

fn require_hypotheses(p: &PotentialSpec) -> anyhow::Result<()> {
    let report = check_hypotheses(p, &SamplingGrid::standard(p.dim))?;
    if !report.core_passed() {
        return Err(Error::Hypothesis(format!("{} fails {}", p.id(), report.failures().join(", "))).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct MinimizeReport {
    potential: String,
    energy: f64,
    radius: f64,
    grid: usize,
    action: f64,
    period: f64,
    min_radius: f64,
    stats: maupertuis::MinimizeStats,
    residuals: maupertuis::orbit::ResidualReport,
}

fn minimize(cfg: &RunConfig) -> anyhow::Result<()> {
    let cc = cfg.continuation_config()?;
    require_hypotheses(&cc.potential)?;
    let radius = cfg.radius.unwrap_or(cc.schedule[0]);
    let xi = &cc.direction;
    let eta = maupertuis::linalg::orthogonal_unit(xi);
    let start = SymmetricLoop::build_circular(radius, xi, &eta, cc.grid)?;
    let (q, stats) = minimize_loop(&cc.potential, &start, cc.energy, &cc.minimizer)?;
    let orbit = maupertuis_rescale(&cc.potential, &q, cc.energy, &cc.potential.id())?;
    let res = residuals(&cc.potential, &orbit)?;
    let tag = radius_tag(radius);
    write_loop_csv(create(&cfg.out_dir, &format!("loop_R{tag}.csv"))?, &q)?;
    write_orbit_csv(create(&cfg.out_dir, &format!("orbit_R{tag}.csv"))?, &orbit.to_trajectory())?;
    let report = MinimizeReport {
        potential: cc.potential.id(),
        energy: cc.energy,
        radius,
        grid: cc.grid,
        action: stats.final_f,
        period: orbit.period,
        min_radius: q.min_radius(),
        stats,
        residuals: res,
    };
    write_file(&cfg.out_dir, "minimize.json", &to_json(&report)?)
}

fn continue_run(cfg: &RunConfig) -> anyhow::Result<()> {
    let cc = cfg.continuation_config()?;
    let run = run_continuation(&cc)?;
    for (rec, orbit) in run.records.iter().zip(&run.orbits) {
        let name = format!("orbit_R{}.csv", radius_tag(rec.radius));
        write_orbit_csv(create(&cfg.out_dir, &name)?, &orbit.to_trajectory())?;
    }
    let mut doc = DiagnosticsDocument::from_run(&cc, &run);
    if !cfg.canonical {
        doc.generated_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    write_file(&cfg.out_dir, "diagnostics.json", &to_json(&doc)?)
}

#[derive(Serialize)]
struct TailAnalysis {
    radius: f64,
    samples: usize,
    omega_min: f64,
    omega_max: f64,
    area_rate_max_excess: f64,
    area_rate_pass: bool,
    escape_onset_time: Option<f64>,
}

/// Angular diagnostics of every orbit CSV from a previous `continue` run in
/// `out_dir`, plus the plot bundle.
fn analyze(cfg: &RunConfig) -> anyhow::Result<()> {
    let p = cfg.potential_spec()?;
    let cc = cfg.continuation_config()?;
    let text = fs::read_to_string(cfg.out_dir.join("diagnostics.json"))
        .with_context(|| format!("no diagnostics.json in {}", cfg.out_dir.display()))?;
    let doc = parse_diagnostics(&text)?;
    let mut out = Vec::new();
    for rec in &doc.records {
        let tag = radius_tag(rec.radius);
        let path = cfg.out_dir.join(format!("orbit_R{tag}.csv"));
        let file = fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let traj = read_orbit_csv(file)?;
        let diag = angular_diagnostics(&traj);
        write_angular_csv(create(&cfg.out_dir, &format!("angular_R{tag}.csv"))?, &diag)?;
        // orbit CSVs written by `continue` have the interior pin corner at the middle sample
        let n = traj.len();
        let area = area_rate_check(&diag, &traj, &p, &[(n - 1) / 2], 1e-6)?;
        let (lo, hi) = diag.omega.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| (a.min(w), b.max(w)));
        out.push(TailAnalysis {
            radius: rec.radius,
            samples: diag.len(),
            omega_min: lo,
            omega_max: hi,
            area_rate_max_excess: area.max_excess,
            area_rate_pass: area.pass,
            escape_onset_time: escape_onset(&diag, cc.eta).map(|i| diag.times[i]),
        });
    }
    write_file(&cfg.out_dir, "analysis.json", &to_json(&out)?)?;
    export_plot_data(&cfg.out_dir, &cfg.out_dir.join("plot"))?;
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    eccentricity: f64,
    semi_latus: f64,
    energy_drift: f64,
    classes: Vec<(f64, OrbitClass)>,
    pass: bool,
}

/// Kepler checks: the hyperbola u₀=(1,0), v₀=(0,2) and the energy trichotomy.
fn oracle(cfg: &RunConfig) -> anyhow::Result<()> {
    let p = PotentialSpec::kepler_test(2)?;
    let tr = integrate_ode(&p, &[1.0, 0.0], &[0.0, 2.0], 0.0, 10.0, 1e-3, IntegrateOptions::default())?;
    let fit = conic_fit(&tr)?;
    let e = tr.energies(&p)?;
    let energy_drift = e.iter().map(|x| (x - e[0]).abs()).fold(0.0, f64::max);
    let mut classes = Vec::new();
    let mut expected = Vec::new();
    for (v, t_end, class) in [
        (1.0, 20.0, OrbitClass::Elliptic),
        (2f64.sqrt(), 5000.0, OrbitClass::Parabolic),
        (2.0, 500.0, OrbitClass::Hyperbolic),
    ] {
        let h = 0.5 * v * v - 1.0;
        let o = IntegrateOptions { guard: Some(1e-3), stop_radius: Some(150.0) };
        let traj = integrate_ode(&p, &[1.0, 0.0], &[0.0, v], 0.0, t_end, 1e-2, o)?;
        classes.push((h, classify_orbit(&traj, ClassifyOptions::defaults(h, 1.0)).class));
        expected.push(class);
    }
    let pass = (fit.eccentricity - 3.0).abs() < 1e-6
        && energy_drift < 1e-9
        && classes.iter().map(|c| c.1).eq(expected.iter().copied());
    let report =
        OracleReport { eccentricity: fit.eccentricity, semi_latus: fit.semi_latus, energy_drift, classes, pass };
    write_file(&cfg.out_dir, "oracle.json", &to_json(&report)?)?;
    if !pass {
        return Err(Error::InconclusiveThresholds(format!(
            "Kepler oracle out of tolerance: e = {}, drift = {energy_drift:e}",
            fit.eccentricity
        ))
        .into());
    }
    Ok(())
}

/// Writes plain CSV series for external plotting from the artifacts of a
/// `continue` run: `series_R<R>.csv` (t, radius, speed, omega),
/// `f_vs_R.csv` and `escape_time_vs_R.csv`.
pub fn export_plot_data(run_dir: &Path, dest: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let diag_path = run_dir.join("diagnostics.json");
    if !diag_path.is_file() {
        return Err(
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("{} not found", diag_path.display())).into()
        );
    }
    let doc = parse_diagnostics(&fs::read_to_string(&diag_path)?)?;
    fs::create_dir_all(dest)?;
    let mut written = Vec::new();
    for rec in &doc.records {
        let tag = radius_tag(rec.radius);
        let path = run_dir.join(format!("orbit_R{tag}.csv"));
        let file =
            fs::File::open(&path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        let traj = read_orbit_csv(file)?;
        let diag = angular_diagnostics(&traj);
        let name = format!("series_R{tag}.csv");
        write_table(
            create(dest, &name)?,
            &["t", "radius", "speed", "omega"],
            (0..diag.len()).map(|i| vec![diag.times[i], diag.radii[i], diag.speeds[i], diag.omega[i]]),
        )?;
        written.push(dest.join(name));
    }
    write_table(
        create(dest, "f_vs_R.csv")?,
        &["R", "f", "T"],
        doc.records.iter().map(|r| vec![r.radius, r.action, r.period]),
    )?;
    write_table(
        create(dest, "escape_time_vs_R.csv")?,
        &["R", "t_minus", "t_plus", "escape_margin"],
        doc.records.iter().map(|r| vec![r.radius, r.t_minus, r.t_plus, r.escape_margin]),
    )?;
    written.push(dest.join("f_vs_R.csv"));
    written.push(dest.join("escape_time_vs_R.csv"));
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "command": "continue",
            "potential": {"family": "power-law", "alpha": 3.0, "dim": 2},
            "energy": 1.0,
            "direction": [1.0, 0.0],
            "schedule": [4.0, 8.0],
            "grid": 128,
            "out_dir": "out"
        })
    }

    #[test]
    fn parses_full_config() {
        let mut v = base();
        v["minimizer"] = serde_json::json!({"max_iters": 100, "tol": 1e-7, "guard": 0.1, "seed": 3});
        v["comparison_L"] = 2.0.into();
        v["window_tau"] = 1.5.into();
        let cfg = RunConfig::from_json(&v.to_string()).unwrap();
        let cc = cfg.continuation_config().unwrap();
        assert_eq!(cc.comparison_l, Some(2.0));
        assert_eq!(cc.minimizer.max_iters, 100);
        assert_eq!(cc.minimizer.guard, Some(0.1));
        assert_eq!(cc.window_tau, 1.5);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut v = base();
        v["bogus"] = 1.into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
        let mut v = base();
        v["potential"]["family"] = "yukawa".into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
        let mut v = base();
        v["direction"] = serde_json::json!([1.0, 1.0]);
        let err = RunConfig::from_json(&v.to_string()).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        let mut v = base();
        v["potential"]["beta"] = 2.0.into();
        assert!(RunConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Hypothesis("x".into()).into()), EXIT_HYPOTHESIS);
        assert_eq!(exit_code(&Error::DegenerateLoop.into()), EXIT_NUMERICAL);
        assert_eq!(exit_code(&anyhow!("plain")), EXIT_CONFIG);
    }

    #[test]
    fn radius_tags() {
        assert_eq!(radius_tag(8.0), "8");
        assert_eq!(radius_tag(2.5), "2.5");
    }
}
