//! Batch cross-checks of the closed forms against the Fock-space oracle.
//!
//! Random draws are reproducible: draw `i` uses a ChaCha8 stream `i` under
//! the run seed, so results do not depend on evaluation order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_math::{
    bound_derivative_nbar, cq_quadratic, cq_star_n, cq_star_single, cq_surface, derive_params,
    ChannelParams, KrausGaugePoint, ProbeMoments,
};
use crate::error::{Error, Result};
use crate::oracle::{
    apply_channel, build_state, cq_numeric, cq_numeric_multimode, minimize_cq_numeric, qfi_exact,
    qfi_of_state, raw_identity_deviations, state_moments, trace_distance, verify_identities_seeded,
    Cutoffs, PhaseConvention, TruncatedState, MAX_TWO_MODE_DIM,
};
use crate::probe::{
    ecs_variance_direct, ecs_variance_published, moments, MomentMode, ProbeFamily, ProbeSpec,
};

/// Relative comparisons fall back to absolute ones below this magnitude.
pub const REL_FLOOR: f64 = 1e-3;

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(REL_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Reported for information only; never fails a run.
    pub informational: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn new(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tolerance,
            informational: false,
            residual,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn info(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            informational: true,
            residual: 0.0,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            informational: false,
            residual: f64::INFINITY,
            tolerance: 0.0,
            detail: format!("error: {err}"),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.informational, self.passed) {
            (true, _) => "INFO",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        if self.informational {
            write!(f, "[{tag}] {}: {}", self.name, self.detail)
        } else {
            write!(
                f,
                "[{tag}] {}: residual {:.3e} (tol {:.1e}) {}",
                self.name, self.residual, self.tolerance, self.detail
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Identities,
    DualPath,
    Minimization,
    GaugeInvariance,
    GammaInvariance,
    Stationarity,
    Monotonicity,
    Dominance,
    ThetaIndependence,
    Reduction,
    NConsistency,
    PresetOracle,
    EcsMoments,
}

impl CheckKind {
    pub const ALL: [CheckKind; 13] = [
        CheckKind::Identities,
        CheckKind::DualPath,
        CheckKind::Minimization,
        CheckKind::GaugeInvariance,
        CheckKind::GammaInvariance,
        CheckKind::Stationarity,
        CheckKind::Monotonicity,
        CheckKind::Dominance,
        CheckKind::ThetaIndependence,
        CheckKind::Reduction,
        CheckKind::NConsistency,
        CheckKind::PresetOracle,
        CheckKind::EcsMoments,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Identities => "identities",
            CheckKind::DualPath => "dual-path",
            CheckKind::Minimization => "minimization",
            CheckKind::GaugeInvariance => "gauge-invariance",
            CheckKind::GammaInvariance => "gamma-invariance",
            CheckKind::Stationarity => "stationarity",
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::Dominance => "dominance",
            CheckKind::ThetaIndependence => "theta-independence",
            CheckKind::Reduction => "reduction",
            CheckKind::NConsistency => "n-consistency",
            CheckKind::PresetOracle => "preset-oracle",
            CheckKind::EcsMoments => "ecs-moments",
        }
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::domain(format!("unknown check `{s}`")))
    }
}

/// A single channel/probe point for the dominance check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceTarget {
    pub probe: ProbeSpec,
    pub eta: f64,
    pub nbar_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub dim: usize,
    pub draws: usize,
    pub only: Option<CheckKind>,
    pub dominance_target: Option<DominanceTarget>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            dim: 30,
            draws: 200,
            only: None,
            dominance_target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub dim: usize,
    pub draws: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.informational || c.passed)
    }
}

/// Probe of a random draw.
#[derive(Debug, Clone, PartialEq)]
pub enum DrawProbe {
    Family(ProbeSpec),
    /// Random mixed state `Σ w_i |v_i⟩⟨v_i|` on the lowest levels.
    Mixed {
        weights: Vec<f64>,
        vectors: Vec<Vec<Complex64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub index: usize,
    pub params: ChannelParams,
    pub probe: DrawProbe,
    /// An arbitrary gauge point for surface comparisons.
    pub gauge: KrausGaugePoint,
}

const MIXED_LEVELS: usize = 6;
const MIXED_RANK: usize = 3;

fn draw_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw `index`: `η ∈ [0.05, 0.95]`, `n̄_B ∈ [0, 3]`, probe family cycling
/// through coherent, thermal, Fock and random mixed states.
pub fn random_draw(seed: u64, index: usize) -> Draw {
    let mut rng = draw_rng(seed, index as u64);
    let eta = rng.random_range(0.05..=0.95);
    let nbar_b = rng.random_range(0.0..=3.0);
    let probe = match index % 4 {
        0 => DrawProbe::Family(ProbeSpec::single(ProbeFamily::Coherent {
            alpha: rng.random_range(0.05f64..=4.0).sqrt(),
        })),
        // at d = 30 a thermal tail stays below the construction budget for n̄ < 0.87
        1 => DrawProbe::Family(ProbeSpec::single(ProbeFamily::Thermal {
            mean: rng.random_range(0.05..=0.85),
        })),
        2 => DrawProbe::Family(ProbeSpec::single(ProbeFamily::Fock {
            photons: rng.random_range(1..=8),
        })),
        _ => {
            let mut vectors = Vec::with_capacity(MIXED_RANK);
            let mut weights = Vec::with_capacity(MIXED_RANK);
            for _ in 0..MIXED_RANK {
                let v: Vec<Complex64> = (0..MIXED_LEVELS)
                    .map(|_| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    })
                    .collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                vectors.push(v.into_iter().map(|z| z / norm).collect());
                weights.push(rng.random_range(0.1..1.0));
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            DrawProbe::Mixed { weights, vectors }
        }
    };
    let gauge = KrausGaugePoint::new(rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0));
    Draw {
        index,
        params: derive_params(eta, nbar_b).expect("draw lies in the domain"),
        probe,
        gauge,
    }
}

pub fn random_draws(seed: u64, count: usize) -> Vec<Draw> {
    (0..count).map(|i| random_draw(seed, i)).collect()
}

impl Draw {
    pub fn state(&self, d: usize) -> Result<TruncatedState> {
        match &self.probe {
            DrawProbe::Family(spec) => build_state(spec, d),
            DrawProbe::Mixed { weights, vectors } => {
                if d < MIXED_LEVELS {
                    return Err(Error::domain(format!(
                        "mixed draws need d >= {MIXED_LEVELS}"
                    )));
                }
                let mut rho = nalgebra::DMatrix::<Complex64>::zeros(d, d);
                for (w, v) in weights.iter().zip(vectors) {
                    for (i, a) in v.iter().enumerate() {
                        for (j, b) in v.iter().enumerate() {
                            rho[(i, j)] += a * b.conj() * *w;
                        }
                    }
                }
                TruncatedState::from_density(1, d, rho)
            }
        }
    }

    pub fn label(&self) -> String {
        let probe = match &self.probe {
            DrawProbe::Family(s) => match s.family {
                ProbeFamily::Coherent { alpha } => format!("coherent |a|^2={:.3}", alpha * alpha),
                ProbeFamily::Thermal { mean } => format!("thermal n={mean:.3}"),
                ProbeFamily::Fock { photons } => format!("fock m={photons}"),
                _ => s.name().to_string(),
            },
            DrawProbe::Mixed { .. } => "random mixed".to_string(),
        };
        format!(
            "#{} eta={:.3} nbar_b={:.3} {probe}",
            self.index, self.params.eta, self.params.nbar_b
        )
    }
}

/// Per-draw worst case, kept with its label for reporting.
#[derive(Debug, Clone)]
struct Worst {
    value: f64,
    label: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            label: String::new(),
        }
    }

    fn update(&mut self, value: f64, label: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.label = label();
        }
    }

    fn detail(&self) -> String {
        if self.label.is_empty() {
            String::new()
        } else {
            format!("worst at {}", self.label)
        }
    }
}

fn collect_draws<T: Send>(
    draws: &[Draw],
    f: impl Fn(&Draw) -> Result<T> + Sync,
) -> Result<Vec<(usize, T)>> {
    draws
        .par_iter()
        .map(|d| f(d).map(|v| (d.index, v)))
        .collect()
}

/// Identity suite on the four reference channels, plus convergence of the
/// plain-truncation deviation on a fixed block when `dim` doubles.
pub fn check_identities(dim: usize, seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &(eta, nb) in &[(0.3, 0.5), (0.3, 2.0), (0.7, 0.5), (0.7, 2.0)] {
        let p = derive_params(eta, nb).expect("reference channel");
        let name = format!("identities eta={eta} nbar_b={nb} d={dim}");
        match verify_identities_seeded(&p, dim, seed) {
            Ok(r) => {
                let (worst_name, worst) = r
                    .identities
                    .iter()
                    .map(|(k, e)| (k.clone(), e.max_deviation))
                    .fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
                out.push(CheckResult::new(
                    name,
                    r.max_deviation(),
                    1e-10,
                    format!(
                        "14 sums, worst {worst_name} {worst:.2e}, work_dim {}",
                        r.cutoffs.work_dim
                    ),
                ));
                out.push(CheckResult::new(
                    format!("commutation lemmas eta={eta} nbar_b={nb}"),
                    r.max_lemma_deviation(),
                    1e-12,
                    "",
                ));
            }
            Err(e) => out.push(CheckResult::failed(name, &e)),
        }
        let raw = |d: usize| {
            raw_identity_deviations(&p, d, dim / 2)
                .values()
                .cloned()
                .fold(0.0, f64::max)
        };
        let (a, b) = (raw(dim), raw(2 * dim));
        out.push(CheckResult::new(
            format!("truncation convergence eta={eta} nbar_b={nb}"),
            b,
            a.max(1e-11),
            format!(
                "plain-truncation deviation on the first {} levels: {a:.2e} at d={dim} -> {b:.2e} at d={}",
                dim / 2,
                2 * dim
            ),
        ));
    }
    out
}

/// `cq_numeric` at the closed-form optimum and at an arbitrary gauge point
/// against the closed-form surface, using the truncated state's own moments.
pub fn check_dual_path(draws: &[Draw], dim: usize) -> CheckResult {
    let name = format!("dual-path ({} draws, d={dim})", draws.len());
    let res = collect_draws(draws, |d| {
        let s = d.state(dim)?;
        let c = Cutoffs::for_state(&s, &d.params)?;
        let m = state_moments(&s);
        let closed = cq_star_single(&d.params, &m)?;
        let at_opt = rel_err(
            cq_numeric(&s, closed.gauge(), &d.params, &c)?,
            closed.cq_star,
        );
        let at_g = rel_err(
            cq_numeric(&s, d.gauge, &d.params, &c)?,
            cq_surface(d.gauge, &d.params, &m),
        );
        Ok(at_opt.max(at_g))
    });
    match res {
        Ok(v) => {
            let mut w = Worst::new();
            for (i, e) in v {
                w.update(e, || draws[i].label());
            }
            CheckResult::new(name, w.value, 1e-8, w.detail())
        }
        Err(e) => CheckResult::failed(name, &e),
    }
}

/// Numerical minimisation against the closed-form optimum.
pub fn check_minimization(draws: &[Draw], dim: usize) -> Vec<CheckResult> {
    let res = collect_draws(draws, |d| {
        let s = d.state(dim)?;
        let c = Cutoffs::for_state(&s, &d.params)?;
        let closed = cq_star_single(&d.params, &state_moments(&s))?;
        let r = minimize_cq_numeric(&s, &d.params, &c)?;
        Ok((
            (r.x_min - closed.x0).abs().max((r.y_min - closed.y0).abs()),
            rel_err(r.c_min, closed.cq_star),
            r.c_min - r.grid_min,
        ))
    });
    let v = match res {
        Ok(v) => v,
        Err(e) => return vec![CheckResult::failed("minimization", &e)],
    };
    let (mut coord, mut value, mut convex) = (Worst::new(), Worst::new(), Worst::new());
    for (i, (a, b, c)) in v {
        coord.update(a, || draws[i].label());
        value.update(b, || draws[i].label());
        convex.update(c, || draws[i].label());
    }
    vec![
        CheckResult::new(
            "minimization: gauge coordinates",
            coord.value,
            1e-4,
            coord.detail(),
        ),
        CheckResult::new(
            "minimization: optimal value (relative)",
            value.value,
            1e-6,
            value.detail(),
        ),
        CheckResult::new(
            "minimization: grid never below solve",
            convex.value,
            1e-10,
            convex.detail(),
        ),
    ]
}

/// Coherent draws and a two-mode entangled coherent state used by the
/// invariance checks.
fn invariance_inputs(
    draws: &[Draw],
    dim: usize,
) -> Result<Vec<(String, TruncatedState, ChannelParams, Cutoffs)>> {
    let mut out = Vec::new();
    for d in draws
        .iter()
        .filter(|d| {
            matches!(
                d.probe,
                DrawProbe::Family(ProbeSpec {
                    family: ProbeFamily::Coherent { .. },
                    ..
                })
            )
        })
        .take(4)
    {
        let s = d.state(dim)?;
        let c = Cutoffs::for_state(&s, &d.params)?;
        out.push((d.label(), s, d.params, c));
    }
    let ecs_dim = 14;
    for &(eta, nb) in &[(0.4, 0.5), (0.7, 2.0)] {
        let p = derive_params(eta, nb)?;
        // projected output; the deficit is identical across conventions
        let c = Cutoffs::truncated(ecs_dim).with_budget(1.0);
        out.push((
            format!("ecs |a|=1 eta={eta} nbar_b={nb} d={ecs_dim}/mode"),
            build_state(&ProbeSpec::ecs(1.0), ecs_dim)?,
            p,
            c,
        ));
    }
    Ok(out)
}

fn pairwise_spread(outs: &[TruncatedState]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            worst = worst.max(trace_distance(&outs[i], &outs[j])?);
        }
    }
    Ok(worst)
}

fn invariance_check(
    name: &str,
    draws: &[Draw],
    dim: usize,
    conventions: &[PhaseConvention],
    theta: f64,
) -> CheckResult {
    let inputs = match invariance_inputs(draws, dim) {
        Ok(v) => v,
        Err(e) => return CheckResult::failed(name, &e),
    };
    let res: Result<Vec<(String, f64)>> = inputs
        .par_iter()
        .map(|(label, s, p, c)| {
            let outs = conventions
                .iter()
                .map(|conv| apply_channel(s, p, theta, *conv, c).map(|o| o.state))
                .collect::<Result<Vec<_>>>()?;
            Ok((label.clone(), pairwise_spread(&outs)?))
        })
        .collect();
    match res {
        Ok(v) => {
            let mut w = Worst::new();
            for (label, e) in v {
                w.update(e, || label);
            }
            CheckResult::new(name, w.value, 1e-10, w.detail())
        }
        Err(e) => CheckResult::failed(name, &e),
    }
}

pub fn check_gauge_invariance(draws: &[Draw], dim: usize) -> CheckResult {
    let conv = [
        PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
        PhaseConvention::Gauge(KrausGaugePoint::new(3.0, -2.0)),
        PhaseConvention::Gauge(KrausGaugePoint::new(-1.7, 0.45)),
    ];
    invariance_check("gauge invariance (trace distance)", draws, dim, &conv, 0.3)
}

pub fn check_gamma_invariance(draws: &[Draw], dim: usize) -> CheckResult {
    let conv = [
        PhaseConvention::Gamma(-1.0),
        PhaseConvention::Gamma(0.0),
        PhaseConvention::Gamma(0.37),
        PhaseConvention::PhaseFirst,
    ];
    invariance_check("gamma invariance (trace distance)", draws, dim, &conv, 0.3)
}

/// Gradient of the closed-form surface at the closed-form optimum, for
/// single-mode moments and for the same moments spread over three modes.
pub fn check_stationarity(draws: &[Draw]) -> Vec<CheckResult> {
    let mut grad = Worst::new();
    let mut hess_fail = 0usize;
    for d in draws {
        let m = match d.state(MIXED_LEVELS.max(30)).map(|s| state_moments(&s)) {
            Ok(m) => m,
            Err(e) => return vec![CheckResult::failed("stationarity", &e)],
        };
        let spread = ProbeMoments { n_modes: 3, ..m };
        for (probe, closed) in [
            (m, cq_star_single(&d.params, &m)),
            (spread, cq_star_n(&d.params, &spread)),
        ] {
            let closed = match closed {
                Ok(c) => c,
                Err(e) => return vec![CheckResult::failed("stationarity", &e)],
            };
            let q = cq_quadratic(&d.params, &probe);
            let (gx, gy) = q.gradient(closed.gauge());
            let scale = [q.xx, q.yy, q.xy, q.x, q.y, q.c]
                .iter()
                .map(|c| c.abs())
                .sum::<f64>()
                * (1.0 + closed.x0.abs() + closed.y0.abs()).powi(2);
            grad.update(gx.abs().max(gy.abs()) / scale, || d.label());
            if !closed.hessian_ok {
                hess_fail += 1;
            }
        }
    }
    vec![
        CheckResult::new(
            "stationarity: gradient at optimum (scaled)",
            grad.value,
            1e-12,
            grad.detail(),
        ),
        CheckResult::new(
            "stationarity: positive-definite Hessian",
            hess_fail as f64,
            0.0,
            format!("{} optima checked", 2 * draws.len()),
        ),
    ]
}

/// Probes used on the monotonicity grid.
pub fn monotonicity_probes() -> Vec<(String, ProbeMoments)> {
    let spec =
        |f| moments(&ProbeSpec::single(f), MomentMode::PublishedMoments).expect("valid probe");
    vec![
        (
            "ecs |a|=1".into(),
            moments(&ProbeSpec::ecs(1.0), MomentMode::PublishedMoments).expect("valid probe"),
        ),
        (
            "coherent |a|^2=1".into(),
            spec(ProbeFamily::Coherent { alpha: 1.0 }),
        ),
        (
            "thermal n=0.5".into(),
            spec(ProbeFamily::Thermal { mean: 0.5 }),
        ),
        (
            "squeezed r=0.5".into(),
            spec(ProbeFamily::SqueezedVacuum { squeeze: 0.5 }),
        ),
        (
            "custom n=3 mean=2 var=0.7".into(),
            ProbeMoments {
                n_modes: 3,
                mean_total: 2.0,
                var_total: 0.7,
            },
        ),
    ]
}

/// `∂C*/∂n̄_B < 0` on a 10×10×5 grid and agreement with central differences.
pub fn check_monotonicity() -> Vec<CheckResult> {
    let etas: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let nbs: Vec<f64> = (0..10).map(|i| 0.1 + 0.5 * i as f64).collect();
    let mut sign = Worst::new();
    let mut fd = Worst::new();
    let mut count = 0;
    for (label, m) in monotonicity_probes() {
        for &eta in &etas {
            for &nb in &nbs {
                let p = derive_params(eta, nb).expect("grid point");
                let deriv = match bound_derivative_nbar(&p, &m) {
                    Ok(v) => v,
                    Err(e) => return vec![CheckResult::failed("monotonicity", &e)],
                };
                let h = 1e-5 * (1.0 + nb);
                let at = |b: f64| {
                    cq_star_n(&derive_params(eta, b).expect("grid point"), &m).map(|r| r.cq_star)
                };
                let central = match (at(nb + h), at(nb - h)) {
                    (Ok(a), Ok(b)) => (a - b) / (2.0 * h),
                    (Err(e), _) | (_, Err(e)) => {
                        return vec![CheckResult::failed("monotonicity", &e)]
                    }
                };
                let tag = || format!("{label} eta={eta:.2} nbar_b={nb:.2}");
                sign.update(deriv, tag);
                fd.update((deriv - central).abs() / deriv.abs(), tag);
                count += 1;
            }
        }
    }
    vec![
        CheckResult::new(
            "monotonicity: derivative negative",
            sign.value,
            -f64::MIN_POSITIVE,
            format!(
                "{count} points, largest derivative {:.3e}; {}",
                sign.value,
                sign.detail()
            ),
        ),
        CheckResult::new(
            "monotonicity: matches central differences (relative)",
            fd.value,
            1e-6,
            fd.detail(),
        ),
    ]
}

/// Two-mode dominance points: `|α| = 1`, three transmissivities, three
/// thermal occupancies.
pub fn ecs_dominance_points() -> Vec<(f64, f64)> {
    [0.1, 0.4, 0.7]
        .iter()
        .flat_map(|&e| [0.2, 1.0, 3.0].iter().map(move |&b| (e, b)))
        .collect()
}

/// Exact QFI of the channel output against the closed-form optimum using the
/// truncated probe's own moments. Two-mode outputs are projected onto `d`
/// levels per mode, which can only lower the QFI.
pub fn dominance_gap(
    state: &TruncatedState,
    p: &ChannelParams,
    theta: f64,
) -> Result<(f64, f64, f64)> {
    let m = state_moments(state);
    let bound = cq_star_n(p, &m)?.cq_star;
    let (c, deficit_note) = if state.n_modes() == 1 {
        (Cutoffs::for_state(state, p)?, 0.0)
    } else {
        (Cutoffs::truncated(state.dim()).with_budget(1.0), 1.0)
    };
    let out = apply_channel(
        state,
        p,
        theta,
        PhaseConvention::Gauge(KrausGaugePoint::ORIGIN),
        &c,
    )?;
    let f = qfi_of_state(&out.state)?;
    Ok((f, bound, out.trace_deficit * deficit_note))
}

pub fn check_dominance(draws: &[Draw], dim: usize, ecs_dim: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let res = collect_draws(draws, |d| {
        let s = d.state(dim)?;
        let (f, bound, _) = dominance_gap(&s, &d.params, 0.3)?;
        Ok(f - bound)
    });
    match res {
        Ok(v) => {
            let mut w = Worst::new();
            for (i, e) in v {
                w.update(e, || draws[i].label());
            }
            out.push(CheckResult::new(
                format!("dominance: F_Q - C* over {} draws", draws.len()),
                w.value,
                1e-9,
                w.detail(),
            ));
        }
        Err(e) => out.push(CheckResult::failed("dominance (draws)", &e)),
    }
    let ecs = match build_state(&ProbeSpec::ecs(1.0), ecs_dim) {
        Ok(s) => s,
        Err(e) => {
            out.push(CheckResult::failed("dominance (ecs)", &e));
            return out;
        }
    };
    let points = ecs_dominance_points();
    let res: Result<Vec<_>> = points
        .par_iter()
        .map(|&(eta, nb)| dominance_gap(&ecs, &derive_params(eta, nb)?, 0.3).map(|r| (eta, nb, r)))
        .collect();
    match res {
        Ok(v) => {
            let mut w = Worst::new();
            let mut min_gap = f64::INFINITY;
            for (eta, nb, (f, bound, deficit)) in v {
                w.update(f - bound, || {
                    format!(
                        "eta={eta} nbar_b={nb} (F_Q {f:.6}, C* {bound:.6}, deficit {deficit:.1e})"
                    )
                });
                min_gap = min_gap.min(bound - f);
            }
            out.push(CheckResult::new(
                format!(
                    "dominance: ecs |a|=1 at {} points, d={ecs_dim}/mode",
                    points.len()
                ),
                w.value,
                1e-9,
                format!("smallest gap {min_gap:.3e}; {}", w.detail()),
            ));
        }
        Err(e) => out.push(CheckResult::failed("dominance (ecs)", &e)),
    }
    out
}

/// Dominance at one requested point, reporting the gap.
pub fn check_dominance_target(t: &DominanceTarget, dim: usize) -> CheckResult {
    let name = format!(
        "dominance: {} eta={} nbar_b={}",
        t.probe.name(),
        t.eta,
        t.nbar_b
    );
    let run = || -> Result<CheckResult> {
        let p = derive_params(t.eta, t.nbar_b)?;
        let d = if t.probe.n_modes >= 2 {
            dim.min(MAX_TWO_MODE_DIM)
        } else {
            dim
        };
        let s = build_state(&t.probe, d)?;
        let (f, bound, deficit) = dominance_gap(&s, &p, 0.3)?;
        Ok(CheckResult::new(
            name.clone(),
            f - bound,
            1e-9,
            format!(
                "F_Q {f:.9}, C* {bound:.9}, gap {:.3e}, d={d}, deficit {deficit:.1e}",
                bound - f
            ),
        ))
    };
    run().unwrap_or_else(|e| CheckResult::failed(name.clone(), &e))
}

/// QFI at `θ ∈ {0, 0.3, 1.1}` on a subset of draws.
pub fn check_theta_independence(draws: &[Draw], dim: usize) -> CheckResult {
    let subset: Vec<Draw> = draws.iter().take(12).cloned().collect();
    let res = collect_draws(&subset, |d| {
        let s = d.state(dim)?;
        let c = Cutoffs::for_state(&s, &d.params)?;
        let f: Vec<f64> = [0.0, 0.3, 1.1]
            .iter()
            .map(|t| qfi_exact(&s, &d.params, *t, &c))
            .collect::<Result<_>>()?;
        Ok((f[1] - f[0]).abs().max((f[2] - f[0]).abs()))
    });
    match res {
        Ok(v) => {
            let mut w = Worst::new();
            for (i, e) in v {
                w.update(e, || subset[i].label());
            }
            CheckResult::new(
                format!("theta independence ({} draws)", subset.len()),
                w.value,
                1e-9,
                w.detail(),
            )
        }
        Err(e) => CheckResult::failed("theta independence", &e),
    }
}

fn random_moments(rng: &mut ChaCha8Rng) -> ProbeMoments {
    ProbeMoments {
        n_modes: rng.random_range(1..=4),
        mean_total: rng.random_range(0.0..=5.0),
        var_total: rng.random_range(0.0..=10.0),
    }
}

/// Lossless channels reduce the bound to `4⟨ΔN²⟩`.
pub fn check_reduction(seed: u64) -> CheckResult {
    let mut rng = draw_rng(seed, 1 << 40);
    let mut w = Worst::new();
    for i in 0..50 {
        let m = random_moments(&mut rng);
        for nb in [0.0, 1.0, 5.0] {
            let p = derive_params(1.0, nb).expect("lossless channel");
            match cq_star_n(&p, &m) {
                Ok(r) => w.update(rel_err(r.cq_star, 4.0 * m.var_total), || {
                    format!("probe #{i} nbar_b={nb}")
                }),
                Err(e) => return CheckResult::failed("lossless reduction", &e),
            }
        }
    }
    CheckResult::new(
        "lossless reduction: C* = 4 var (50 probes x 3)",
        w.value,
        1e-12,
        w.detail(),
    )
}

/// The n-mode closed form with one mode equals the single-mode closed form.
pub fn check_n_consistency(seed: u64) -> CheckResult {
    let mut rng = draw_rng(seed, 1 << 41);
    let mut w = Worst::new();
    for i in 0..100 {
        let p = derive_params(rng.random_range(0.05..=0.95), rng.random_range(0.0..=3.0))
            .expect("domain");
        let m = ProbeMoments {
            n_modes: 1,
            ..random_moments(&mut rng)
        };
        match (cq_star_n(&p, &m), cq_star_single(&p, &m)) {
            (Ok(a), Ok(b)) => w.update(rel_err(a.cq_star, b.cq_star), || format!("draw #{i}")),
            (Err(e), _) | (_, Err(e)) => return CheckResult::failed("n=1 consistency", &e),
        }
    }
    CheckResult::new("n=1 consistency (100 draws)", w.value, 1e-12, w.detail())
}

/// Grid points of the two-mode preset spot-checked against the oracle.
pub fn preset_spot_points() -> Vec<(f64, f64)> {
    vec![(0.1, 0.0), (0.1, 2.5), (0.4, 1.0), (0.7, 0.5), (0.7, 5.0)]
}

/// Two-mode oracle bound at the closed-form optimum for the entangled
/// coherent probe, with identical (oracle) moments on both sides.
pub fn check_preset_oracle(dim: usize) -> CheckResult {
    let name = format!(
        "two-mode oracle vs closed form at {} preset points",
        preset_spot_points().len()
    );
    let run = || -> Result<CheckResult> {
        let d = dim.min(MAX_TWO_MODE_DIM);
        let s = build_state(&ProbeSpec::ecs(1.0), d)?;
        let m = state_moments(&s);
        let v: Vec<(f64, f64, f64)> = preset_spot_points()
            .par_iter()
            .map(|&(eta, nb)| {
                let p = derive_params(eta, nb)?;
                let closed = cq_star_n(&p, &m)?;
                let c = Cutoffs::guarded(&p, d)?;
                Ok((
                    eta,
                    nb,
                    rel_err(
                        cq_numeric_multimode(&s, closed.gauge(), &p, &c)?,
                        closed.cq_star,
                    ),
                ))
            })
            .collect::<Result<_>>()?;
        let mut w = Worst::new();
        for (eta, nb, e) in v {
            w.update(e, || format!("eta={eta} nbar_b={nb}"));
        }
        Ok(CheckResult::new(
            name.clone(),
            w.value,
            1e-6,
            format!("d={d}/mode; {}", w.detail()),
        ))
    };
    run().unwrap_or_else(|e| CheckResult::failed(name.clone(), &e))
}

/// Entangled coherent state moments computed on the truncated state and
/// compared with the published closed form.
pub fn check_ecs_moments() -> Vec<CheckResult> {
    let s = match build_state(&ProbeSpec::ecs(1.0), 25) {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::failed("ecs moments", &e)],
    };
    let m = state_moments(&s);
    let published = ecs_variance_published(1.0);
    let direct = ecs_variance_direct(1.0);
    let verdict = if (m.var_total - published).abs() <= 1e-6 {
        "AGREES with"
    } else {
        "DISAGREES with"
    };
    vec![
        CheckResult::new("ecs |a|=1 mean photon number", (m.mean_total - 0.731059).abs(), 1e-6, format!("oracle mean {:.9}", m.mean_total)),
        CheckResult::info(
            "ecs |a|=1 variance",
            format!(
                "oracle variance {:.9} {verdict} the published closed form {:.9} (difference {:.3e}); \
                 direct algebraic form gives {:.9}",
                m.var_total,
                published,
                m.var_total - published,
                direct
            ),
        ),
    ]
}

/// Runs the selected checks.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.dim < 8 {
        return Err(Error::domain(format!(
            "verification needs d >= 8, got {}",
            opts.dim
        )));
    }
    let wanted = |k: CheckKind| opts.only.map_or(true, |o| o == k);
    let draws = random_draws(opts.seed, opts.draws);
    let d = opts.dim;
    let mut checks = Vec::new();
    if wanted(CheckKind::Identities) {
        checks.extend(check_identities(d, opts.seed));
    }
    if wanted(CheckKind::DualPath) {
        checks.push(check_dual_path(&draws, d));
    }
    if wanted(CheckKind::Minimization) {
        checks.extend(check_minimization(&draws, d));
    }
    if wanted(CheckKind::GaugeInvariance) {
        checks.push(check_gauge_invariance(&draws, d));
    }
    if wanted(CheckKind::GammaInvariance) {
        checks.push(check_gamma_invariance(&draws, d));
    }
    if wanted(CheckKind::Stationarity) {
        checks.extend(check_stationarity(&draws));
    }
    if wanted(CheckKind::Monotonicity) {
        checks.extend(check_monotonicity());
    }
    if wanted(CheckKind::Dominance) {
        match &opts.dominance_target {
            Some(t) => checks.push(check_dominance_target(t, d)),
            None => checks.extend(check_dominance(&draws, d, 25)),
        }
    }
    if wanted(CheckKind::ThetaIndependence) {
        checks.push(check_theta_independence(&draws, d));
    }
    if wanted(CheckKind::Reduction) {
        checks.push(check_reduction(opts.seed));
    }
    if wanted(CheckKind::NConsistency) {
        checks.push(check_n_consistency(opts.seed));
    }
    if wanted(CheckKind::PresetOracle) {
        checks.push(check_preset_oracle(20));
    }
    if wanted(CheckKind::EcsMoments) {
        checks.extend(check_ecs_moments());
    }
    Ok(VerifyReport {
        seed: opts.seed,
        dim: d,
        draws: opts.draws,
        checks,
    })
}
