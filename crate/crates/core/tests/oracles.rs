//! Frozen reference values through the public API.

use approx::assert_relative_eq;
use phasebound::channel_math::{cq_surface, Degeneracy};
use phasebound::oracle::{build_state, default_dim, state_moments};
use phasebound::probe::{ecs_mean, ecs_variance_direct, ecs_variance_published, moments};
use phasebound::{
    cq_star_n, cq_star_single, derive_params, MomentMode, ProbeFamily, ProbeMoments, ProbeSpec,
};

#[test]
fn channel_parameters() {
    let p = derive_params(0.5, 1.0).unwrap();
    assert_relative_eq!(p.gain, 1.5, max_relative = 1e-15);
    assert_relative_eq!(p.tau, 1.0 / 3.0, max_relative = 1e-15);
    let p = derive_params(1.0, 5.0).unwrap();
    assert_eq!((p.gain, p.tau), (1.0, 1.0));
    let p = derive_params(0.5, 0.0).unwrap();
    assert_eq!((p.gain, p.tau), (1.0, 0.5));
    assert!(derive_params(0.0, 1.0).is_err());
    assert!(derive_params(1.01, 1.0).is_err());
    assert!(derive_params(0.5, -0.1).is_err());
}

#[test]
fn single_mode_optimum() {
    let p = derive_params(0.5, 1.0).unwrap();
    let m = ProbeMoments::single(1.0, 1.0).unwrap();
    let r = cq_star_single(&p, &m).unwrap();
    assert_relative_eq!(r.cq_star, 16.0 / 13.0, max_relative = 1e-14);
    assert_relative_eq!(r.mse_lower, 13.0 / 16.0, max_relative = 1e-14);
    assert!(r.hessian_ok);
    assert_relative_eq!(
        cq_surface(r.gauge(), &p, &m),
        r.cq_star,
        max_relative = 1e-10
    );
}

#[test]
fn lossless_and_noiseless_limits() {
    let m = ProbeMoments::single(1.0, 1.0).unwrap();
    let r = cq_star_single(&derive_params(1.0, 0.7).unwrap(), &m).unwrap();
    assert_relative_eq!(r.cq_star, 4.0, max_relative = 1e-14);
    assert_eq!(r.degeneracy, Some(Degeneracy::Lossless));
    let r = cq_star_single(&derive_params(0.5, 0.0).unwrap(), &m).unwrap();
    assert_eq!(r.degeneracy, Some(Degeneracy::NoThermalNoise));
    assert!(r.cq_star > 0.0);
}

#[test]
fn fock_probe_has_zero_bound() {
    let m = moments(
        &ProbeSpec::single(ProbeFamily::Fock { photons: 2 }),
        MomentMode::PublishedMoments,
    )
    .unwrap();
    let r = cq_star_single(&derive_params(0.5, 1.0).unwrap(), &m).unwrap();
    assert_eq!(r.cq_star, 0.0);
    assert!(r.mse_lower.is_infinite());
}

#[test]
fn probe_family_moments() {
    let get = |f| moments(&ProbeSpec::single(f), MomentMode::PublishedMoments).unwrap();
    let c = get(ProbeFamily::Coherent { alpha: 1.0 });
    assert_eq!((c.mean_total, c.var_total), (1.0, 1.0));
    let f = get(ProbeFamily::Fock { photons: 3 });
    assert_eq!((f.mean_total, f.var_total), (3.0, 0.0));
    let t = get(ProbeFamily::Thermal { mean: 2.0 });
    assert_relative_eq!(t.var_total, 6.0, max_relative = 1e-15);
    let s = get(ProbeFamily::SqueezedVacuum {
        squeeze: 1f64.asinh(),
    });
    assert_relative_eq!(s.mean_total, 1.0, max_relative = 1e-14);
    assert_relative_eq!(s.var_total, 4.0, max_relative = 1e-14);
}

#[test]
fn ecs_moments_published_and_direct() {
    let expected = 1.0 / (1.0 + (-1f64).exp());
    assert_relative_eq!(ecs_mean(1.0), expected, max_relative = 1e-15);
    assert_relative_eq!(ecs_variance_published(1.0), expected, max_relative = 1e-15);
    assert!((ecs_mean(1.0) - 0.731059).abs() < 1e-6);
    assert!((ecs_variance_direct(1.0) - 0.92767).abs() < 1e-5);

    let spec = ProbeSpec::ecs(1.0);
    let s = build_state(&spec, default_dim(&spec).unwrap()).unwrap();
    let m = state_moments(&s);
    assert!((m.mean_total - ecs_mean(1.0)).abs() < 1e-6);
    assert!((m.var_total - ecs_variance_direct(1.0)).abs() < 1e-6);
    let oracle = moments(&spec, MomentMode::OracleMoments).unwrap();
    assert!((oracle.var_total - ecs_variance_direct(1.0)).abs() < 1e-6);
}

#[test]
fn oracle_moments_agree_with_closed_forms() {
    for f in [
        ProbeFamily::Coherent { alpha: 1.3 },
        ProbeFamily::Thermal { mean: 0.6 },
        ProbeFamily::SqueezedVacuum { squeeze: 0.4 },
        ProbeFamily::Fock { photons: 4 },
    ] {
        let spec = ProbeSpec::single(f);
        let d = default_dim(&spec).unwrap();
        let oracle = state_moments(&build_state(&spec, d).unwrap());
        let closed = moments(&spec, MomentMode::PublishedMoments).unwrap();
        assert_relative_eq!(
            oracle.mean_total,
            closed.mean_total,
            max_relative = 1e-8,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            oracle.var_total,
            closed.var_total,
            max_relative = 1e-8,
            epsilon = 1e-12
        );
    }
}

#[test]
fn multimode_with_one_mode_is_single_mode() {
    let p = derive_params(0.3, 2.0).unwrap();
    let m = ProbeMoments::single(2.5, 0.4).unwrap();
    let a = cq_star_n(&p, &m).unwrap();
    let b = cq_star_single(&p, &m).unwrap();
    assert_relative_eq!(a.cq_star, b.cq_star, max_relative = 1e-12);
    assert_relative_eq!(a.x0, b.x0, max_relative = 1e-12, epsilon = 1e-14);
    assert_relative_eq!(a.y0, b.y0, max_relative = 1e-12, epsilon = 1e-14);
}
