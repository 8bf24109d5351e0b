use maupertuis::linalg::dist;
use maupertuis::orbit::{integrate_ode, maupertuis_rescale, IntegrateOptions};
use maupertuis::{minimize_loop, MinimizeOptions, PotentialSpec, SymmetricLoop};

/// Between the pin corners the rescaled minimizer is a solution: integrating
/// from its middle corner with the outgoing velocity reproduces the samples
/// up to the closing corner at `T/2`.
#[test]
fn rescaled_minimizer_follows_the_flow_between_corners() {
    let p = PotentialSpec::power_law(3.0, 2).unwrap();
    let mut errs = Vec::new();
    for m in [256, 512] {
        let start = SymmetricLoop::build_circular(8.0, &[1.0, 0.0], &[0.0, 1.0], m).unwrap();
        let (q, _) = minimize_loop(&p, &start, 1.0, &MinimizeOptions::default()).unwrap();
        let orbit = maupertuis_rescale(&p, &q, 1.0, "ode").unwrap();
        let mid = orbit.cycle() / 2;
        assert!(orbit.is_corner(mid));
        let t0 = orbit.time(mid);
        let t1 = orbit.time(orbit.cycle());
        let step = orbit.dt / 8.0;
        let tr = integrate_ode(&p, orbit.position(mid), orbit.velocity(mid), t0, t1, step, IntegrateOptions::default())
            .unwrap();
        let mut err = 0.0f64;
        for i in mid..=orbit.cycle() {
            let j = (i - mid) * 8;
            err = err.max(dist(tr.position(j), orbit.position(i)));
        }
        errs.push(err);
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}
