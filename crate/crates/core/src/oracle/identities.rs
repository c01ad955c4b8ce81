//! Operator-sum identities of the loss/amplifier Kraus family, checked by
//! explicit summation in a truncated Fock space.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::Cutoffs;
use super::fock::{FockOperatorMatrix, KrausTables};
use super::ladder::LadderOp;
use crate::channel_math::ChannelParams;
use crate::error::{Error, Result};

/// One operator sum `Σ_{k,l} w(k,l) A_l† n̂^a B_k† n̂^b B_k A_l`, diagonal in
/// the Fock basis, with its closed-form diagonal.
struct Identity {
    name: &'static str,
    /// Which Kraus families take part.
    family: Family,
    weight: fn(f64, f64) -> f64,
    /// Power of `n̂` between `A_l†` and `B_k†`.
    mid_power: u32,
    /// Power of `n̂` between `B_k†` and `B_k`.
    out_power: u32,
    rhs: fn(&Moments) -> f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Loss,
    Amp,
    Both,
}

/// Closed-form building blocks evaluated at input photon number `n`.
struct Moments {
    n: f64,
    g: f64,
    s1: f64,
    s2: f64,
}

impl Moments {
    fn new(n: f64, p: &ChannelParams) -> Self {
        let t = p.tau;
        Self {
            n,
            g: p.gain,
            s1: (1.0 - t) * n,
            s2: (1.0 - t) * (t * n + (1.0 - t) * n * n),
        }
    }

    /// `n̂ − Ŝ1`, the mean photon number after loss.
    fn p(&self) -> f64 {
        self.n - self.s1
    }

    /// `n̂² − 2n̂Ŝ1 + Ŝ2`, the second moment after loss.
    fn q(&self) -> f64 {
        self.n * self.n - 2.0 * self.n * self.s1 + self.s2
    }
}

fn one(_: f64, _: f64) -> f64 {
    1.0
}

const IDENTITIES: [Identity; 14] = [
    Identity {
        name: "sum1",
        family: Family::Loss,
        weight: one,
        mid_power: 0,
        out_power: 0,
        rhs: |_| 1.0,
    },
    Identity {
        name: "sum2",
        family: Family::Amp,
        weight: one,
        mid_power: 0,
        out_power: 0,
        rhs: |_| 1.0,
    },
    Identity {
        name: "sum3",
        family: Family::Both,
        weight: |_, l| l,
        mid_power: 0,
        out_power: 0,
        rhs: |m| m.s1,
    },
    Identity {
        name: "sum4",
        family: Family::Both,
        weight: |_, l| l * l,
        mid_power: 0,
        out_power: 0,
        rhs: |m| m.s2,
    },
    Identity {
        name: "sum5",
        family: Family::Both,
        weight: |k, l| k * l,
        mid_power: 0,
        out_power: 0,
        rhs: |m| (m.g - 1.0) * (m.n * m.s1 - m.s2 + m.s1),
    },
    Identity {
        name: "sum6",
        family: Family::Both,
        weight: |_, l| l,
        mid_power: 0,
        out_power: 1,
        rhs: |m| m.g * (m.n * m.s1 - m.s2) + (m.g - 1.0) * m.s1,
    },
    Identity {
        name: "sum7",
        family: Family::Both,
        weight: one,
        mid_power: 2,
        out_power: 0,
        rhs: |m| m.q(),
    },
    Identity {
        name: "sum8",
        family: Family::Both,
        weight: one,
        mid_power: 1,
        out_power: 0,
        rhs: |m| m.p(),
    },
    Identity {
        name: "sum9",
        family: Family::Both,
        weight: one,
        mid_power: 1,
        out_power: 1,
        rhs: |m| m.g * m.q() + (m.g - 1.0) * m.p(),
    },
    Identity {
        name: "sum10",
        family: Family::Both,
        weight: |k, _| k * k,
        mid_power: 0,
        out_power: 0,
        rhs: |m| {
            let g = m.g;
            (g - 1.0).powi(2) * m.q()
                + (g - 1.0) * (3.0 * g - 2.0) * m.p()
                + (g - 1.0) * (2.0 * g - 1.0)
        },
    },
    Identity {
        name: "sum11",
        family: Family::Both,
        weight: |k, _| k,
        mid_power: 0,
        out_power: 0,
        rhs: |m| (m.g - 1.0) * (m.p() + 1.0),
    },
    Identity {
        name: "sum12",
        family: Family::Both,
        weight: one,
        mid_power: 0,
        out_power: 1,
        rhs: |m| m.g * (m.p() + 1.0) - 1.0,
    },
    Identity {
        name: "sum13",
        family: Family::Both,
        weight: one,
        mid_power: 0,
        out_power: 2,
        rhs: |m| {
            let g = m.g;
            g * g * m.q() + 3.0 * g * (g - 1.0) * m.p() + (g - 1.0) * (2.0 * g - 1.0)
        },
    },
    Identity {
        name: "sum14",
        family: Family::Both,
        weight: |k, _| k,
        mid_power: 0,
        out_power: 1,
        rhs: |m| {
            let g = m.g;
            g * (g - 1.0) * m.q()
                + (g - 1.0) * (3.0 * g - 1.0) * m.p()
                + (g - 1.0) * (2.0 * g - 1.0)
        },
    },
];

/// Names of the checked identities, in order.
pub fn identity_names() -> impl Iterator<Item = &'static str> {
    IDENTITIES.iter().map(|i| i.name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry {
    /// Largest entry deviation on the guarded block.
    pub max_deviation: f64,
    pub block_size: usize,
    /// Deviation with plain truncation at the requested dimension, measured
    /// on the lower half of the levels.
    pub raw_deviation: f64,
    pub raw_block_size: usize,
    pub cutoffs: Cutoffs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub eta: f64,
    pub nbar_b: f64,
    pub dim: usize,
    pub cutoffs: Cutoffs,
    pub identities: BTreeMap<String, IdentityEntry>,
    /// Largest relative deviation of each ladder commutation lemma over
    /// random monomials.
    pub lemmas: BTreeMap<String, f64>,
    /// `max_m (1 − Σ_{k,l} ⟨m|A_l†B_k†B_kA_l|m⟩)` on the guarded block.
    pub trace_deficit: f64,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.identities
            .values()
            .map(|e| e.max_deviation)
            .fold(0.0, f64::max)
    }

    pub fn max_lemma_deviation(&self) -> f64 {
        self.lemmas.values().cloned().fold(0.0, f64::max)
    }
}

/// Diagonal of `Σ w(k,l) A_l† n̂^a B_k† n̂^b B_k A_l` on a `dim`-level space.
fn lhs_diagonal(
    id: &Identity,
    tables: &KrausTables,
    dim: usize,
    loss_max: usize,
    amp_max: usize,
) -> Vec<f64> {
    let nmid = LadderOp::real_diagonal(dim, |m| (m as f64).powi(id.mid_power as i32));
    let nout = LadderOp::real_diagonal(dim, |m| (m as f64).powi(id.out_power as i32));
    let ident = LadderOp::real_diagonal(dim, |_| 1.0);
    let ls: Vec<usize> = if id.family == Family::Amp {
        vec![0]
    } else {
        (0..=loss_max.min(dim - 1)).collect()
    };
    let ks: Vec<usize> = if id.family == Family::Loss {
        vec![0]
    } else {
        (0..=amp_max.min(dim - 1)).collect()
    };
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    for &l in &ls {
        let a = if id.family == Family::Amp {
            ident.clone()
        } else {
            tables.loss_op(l, dim)
        };
        let left = a.adjoint().compose(&nmid);
        for &k in &ks {
            let w = (id.weight)(k as f64, l as f64);
            if w == 0.0 {
                continue;
            }
            let b = if id.family == Family::Loss {
                ident.clone()
            } else {
                tables.amp_op(k, dim)
            };
            let term = left
                .compose(&b.adjoint())
                .compose(&nout)
                .compose(&b)
                .compose(&a);
            debug_assert_eq!(term.shift(), 0);
            for (s, t) in acc.iter_mut().zip(term.weights()) {
                *s += t * w;
            }
        }
    }
    acc.into_iter().map(|z| z.re).collect()
}

fn block_deviation(id: &Identity, lhs: &[f64], p: &ChannelParams, block: usize) -> f64 {
    lhs.iter()
        .take(block)
        .enumerate()
        .map(|(m, v)| (v - (id.rhs)(&Moments::new(m as f64, p))).abs())
        .fold(0.0, f64::max)
}

/// Evaluates every identity by explicit summation at dimension `d`, on a
/// guarded working space, and again under plain truncation.
pub fn verify_identities(p: &ChannelParams, d: usize) -> Result<IdentityReport> {
    verify_identities_seeded(p, d, 0)
}

pub fn verify_identities_seeded(p: &ChannelParams, d: usize, seed: u64) -> Result<IdentityReport> {
    if d < 4 {
        return Err(Error::domain(format!(
            "identity checks need d >= 4, got {d}"
        )));
    }
    let guarded = Cutoffs::guarded(p, d)?;
    let gt = KrausTables::new(p, d, guarded.loss, guarded.amp);
    let raw = raw_identity_deviations(p, d, d / 2);

    let mut identities = BTreeMap::new();
    for id in &IDENTITIES {
        let g = lhs_diagonal(id, &gt, guarded.work_dim, guarded.loss, guarded.amp);
        identities.insert(
            id.name.to_string(),
            IdentityEntry {
                max_deviation: block_deviation(id, &g, p, d),
                block_size: d,
                raw_deviation: raw[id.name],
                raw_block_size: d / 2,
                cutoffs: guarded,
            },
        );
    }

    let completeness = Identity {
        name: "completeness",
        family: Family::Both,
        weight: one,
        mid_power: 0,
        out_power: 0,
        rhs: |_| 1.0,
    };
    let trace_deficit = lhs_diagonal(
        &completeness,
        &gt,
        guarded.work_dim,
        guarded.loss,
        guarded.amp,
    )
    .iter()
    .take(d)
    .map(|v| 1.0 - v)
    .fold(f64::NEG_INFINITY, f64::max);

    Ok(IdentityReport {
        eta: p.eta,
        nbar_b: p.nbar_b,
        dim: d,
        cutoffs: guarded,
        identities,
        lemmas: verify_lemmas(p.gain, p.tau, d, seed),
        trace_deficit,
    })
}

/// Deviations under plain truncation at `d` levels, measured on the first
/// `block` levels. For a fixed block these shrink as `d` grows.
pub fn raw_identity_deviations(
    p: &ChannelParams,
    d: usize,
    block: usize,
) -> BTreeMap<&'static str, f64> {
    let block = block.min(d);
    let raw = Cutoffs::truncated(d);
    let rt = KrausTables::new(p, d, raw.loss, raw.amp);
    IDENTITIES
        .iter()
        .map(|id| {
            (
                id.name,
                block_deviation(id, &lhs_diagonal(id, &rt, d, raw.loss, raw.amp), p, block),
            )
        })
        .collect()
}

fn power(op: &FockOperatorMatrix, k: u32) -> FockOperatorMatrix {
    (0..k).fold(FockOperatorMatrix::identity(op.dim()), |acc, _| &acc * op)
}

fn diag(d: usize, f: impl Fn(f64) -> f64) -> FockOperatorMatrix {
    FockOperatorMatrix::diagonal(&(0..d).map(|m| f(m as f64)).collect::<Vec<_>>())
}

fn rel_dev(lhs: &FockOperatorMatrix, rhs: &FockOperatorMatrix, block: usize) -> f64 {
    let (l, r) = (lhs.block(block), rhs.block(block));
    let scale = r.entries().iter().map(|z| z.norm()).fold(1e-300, f64::max);
    l.max_abs_diff(&r) / scale
}

/// Ladder commutation lemmas on random monomials; relative deviations.
fn verify_lemmas(gain: f64, tau: f64, d: usize, seed: u64) -> BTreeMap<String, f64> {
    const DRAWS: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = FockOperatorMatrix::annihilation(d);
    let ad = FockOperatorMatrix::creation(d);
    let n = FockOperatorMatrix::number(d);
    let mut out = BTreeMap::new();
    let mut worst = |name: &str, v: f64| {
        let e = out.entry(name.to_string()).or_insert(0.0f64);
        *e = e.max(v);
    };
    for _ in 0..DRAWS {
        let l: u32 = rng.random_range(1..=4);
        let k: u32 = rng.random_range(0..=3);
        let al = power(&a, l);
        let adl = power(&ad, l);
        let nk = power(&n, k);
        let lf = f64::from(l);
        let kk = k as i32;

        let shifted_up = diag(d, |m| (m + lf).powi(kk));
        worst("com1", rel_dev(&(&al * &nk), &(&shifted_up * &al), d));
        let gn = diag(d, |m| gain.powf(m));
        let gnl = diag(d, |m| gain.powf(m + lf));
        worst("com1_exp", rel_dev(&(&al * &gn), &(&gnl * &al), d));

        let shifted_down = diag(d, |m| (m - lf).powi(kk));
        worst("com2", rel_dev(&(&adl * &nk), &(&shifted_down * &adl), d));
        let tn = diag(d, |m| tau.powf(m));
        let tnl = diag(d, |m| tau.powf(m - lf));
        worst("com2_exp", rel_dev(&(&adl * &tn), &(&tnl * &adl), d));

        let rising = diag(d, |m| (1..=l).map(|j| m + f64::from(j)).product());
        // â^l â†^l leaves the truncated space for m + l ≥ d
        worst("akadk", rel_dev(&(&al * &adl), &rising, d - l as usize));
        let falling = diag(d, |m| (1..=l).map(|j| m - f64::from(j) + 1.0).product());
        worst("adkak", rel_dev(&(&adl * &al), &falling, d));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_math::derive_params;
    use crate::oracle::fock::{build_kraus_amp, build_kraus_loss};

    #[test]
    fn guarded_identities_hold() {
        for &(eta, nb) in &[(0.5, 1.0), (0.3, 2.0)] {
            let r = verify_identities(&derive_params(eta, nb).unwrap(), 30).unwrap();
            for (name, e) in &r.identities {
                assert!(e.max_deviation < 1e-10, "{name}: {}", e.max_deviation);
            }
            assert!(r.max_lemma_deviation() < 1e-12, "{:?}", r.lemmas);
            assert!(r.trace_deficit < 1e-14);
            assert_eq!(r.identities.len(), 14);
        }
    }

    #[test]
    fn identity_channel_is_exact() {
        let r = verify_identities(&derive_params(1.0, 0.0).unwrap(), 20).unwrap();
        for (name, e) in &r.identities {
            assert!(e.max_deviation < 1e-14, "{name}");
            assert!(e.raw_deviation < 1e-14, "{name}");
        }
    }

    #[test]
    fn raw_deviation_shrinks_with_dimension() {
        let p = derive_params(0.5, 1.0).unwrap();
        let devs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&d| verify_identities(&p, d).unwrap().identities["sum10"].raw_deviation)
            .collect();
        assert!(
            devs[1] < devs[0] && (devs[2] < devs[1] || devs[2] < 1e-11),
            "{devs:?}"
        );
        assert!(
            devs[0] > 1e-8,
            "truncation artefact should be visible at d=16: {devs:?}"
        );
    }

    #[test]
    fn ladder_path_matches_dense_products() {
        // sum13 via dense matrices on a small guarded space
        let p = derive_params(0.6, 0.7).unwrap();
        let d = 6;
        let c = Cutoffs::guarded(&p, d).unwrap();
        let w = c.work_dim;
        let n2 = diag(w, |m| m * m);
        let mut acc = FockOperatorMatrix::zeros(w);
        for l in 0..=c.loss {
            let a = build_kraus_loss(l, p.tau, w);
            for k in 0..=c.amp {
                let b = build_kraus_amp(k, p.gain, w);
                let term = &(&(&a.adjoint() * &b.adjoint()) * &n2) * &(&b * &a);
                acc = &acc + &term;
            }
        }
        let tables = KrausTables::new(&p, d, c.loss, c.amp);
        let lhs = lhs_diagonal(&IDENTITIES[12], &tables, w, c.loss, c.amp);
        for (m, want) in lhs.iter().enumerate().take(d) {
            assert!((acc.entries()[(m, m)].re - want).abs() < 1e-11);
            assert!(acc.entries()[(m, m)].im.abs() < 1e-14);
        }
    }

    #[test]
    fn report_serialises() {
        let r = verify_identities(&derive_params(0.7, 0.5).unwrap(), 8).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["identities"]["sum9"]["max_deviation"].is_number());
        assert!(v["identities"]["sum9"]["cutoffs"]["work_dim"].is_number());
    }

    #[test]
    fn rejects_tiny_dimension() {
        assert!(verify_identities(&derive_params(0.5, 1.0).unwrap(), 3).is_err());
    }
}
