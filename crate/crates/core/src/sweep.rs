//! Parameter sweeps of the optimised bound over channel grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_math::{
    cq_star_n, cq_star_single, derive_params, BoundResult, ChannelParams, ProbeMoments,
};
use crate::error::{Error, Result};
use crate::format::fmt_num;
use crate::probe::{moments, MomentMode, ProbeSpec};

pub const CSV_HEADER: &str = "eta,nbar_b,n_modes,mean_ns,var_ns,x0,y0,cq_star,mse_lower";

/// Evenly spaced values `start..=stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub etas: Vec<f64>,
    pub nbar_b: Range,
    pub probe: ProbeSpec,
    pub moment_mode: MomentMode,
}

impl SweepSpec {
    /// Two-mode entangled coherent state with `|α| = 1`, three transmissivities,
    /// thermal occupancy from 0 to 5 in 101 steps.
    pub fn ecs_preset() -> Self {
        Self {
            etas: vec![0.1, 0.4, 0.7],
            nbar_b: Range {
                start: 0.0,
                stop: 5.0,
                count: 101,
            },
            probe: ProbeSpec::ecs(1.0),
            moment_mode: MomentMode::PublishedMoments,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.etas.is_empty() {
            return Err(Error::domain("eta grid is empty"));
        }
        let r = &self.nbar_b;
        if r.count == 0 {
            return Err(Error::domain("nbar_b range is empty"));
        }
        if r.count == 1 && r.start != r.stop {
            return Err(Error::domain(
                "a range with distinct endpoints needs count >= 2",
            ));
        }
        if !(r.start.is_finite() && r.stop.is_finite() && r.start >= 0.0 && r.stop >= r.start) {
            return Err(Error::domain(format!(
                "nbar_b range must satisfy 0 <= start <= stop, got {}..{}",
                r.start, r.stop
            )));
        }
        self.probe.validate()
    }

    /// Grid points ordered by `(eta, nbar_b)`.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let mut etas = self.etas.clone();
        etas.sort_by(f64::total_cmp);
        etas.dedup();
        let nbs = self.nbar_b.values();
        etas.iter()
            .flat_map(|&e| nbs.iter().map(move |&b| (e, b)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub nbar_b: f64,
    pub n_modes: u32,
    pub mean_ns: f64,
    pub var_ns: f64,
    pub x0: f64,
    pub y0: f64,
    pub cq_star: f64,
    pub mse_lower: f64,
}

/// Optimum for `m`, through the single-mode form when `m` has one mode.
pub fn optimum(p: &ChannelParams, m: &ProbeMoments) -> Result<BoundResult> {
    if m.n_modes == 1 {
        cq_star_single(p, m)
    } else {
        cq_star_n(p, m)
    }
}

impl SweepRow {
    pub fn evaluate(eta: f64, nbar_b: f64, m: &ProbeMoments) -> Result<Self> {
        let p = derive_params(eta, nbar_b)?;
        let r = optimum(&p, m)?;
        Ok(Self {
            eta,
            nbar_b,
            n_modes: m.n_modes,
            mean_ns: m.mean_total,
            var_ns: m.var_total,
            x0: r.x0,
            y0: r.y0,
            cq_star: r.cq_star,
            mse_lower: r.mse_lower,
        })
    }

    pub fn csv_line(&self) -> String {
        [
            fmt_num(self.eta),
            fmt_num(self.nbar_b),
            self.n_modes.to_string(),
            fmt_num(self.mean_ns),
            fmt_num(self.var_ns),
            fmt_num(self.x0),
            fmt_num(self.y0),
            fmt_num(self.cq_star),
            fmt_num(self.mse_lower),
        ]
        .join(",")
    }
}

/// Evaluates the closed-form optimum at every grid point. Points are computed
/// in parallel; the returned rows follow [`SweepSpec::grid`] order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let m = moments(&spec.probe, spec.moment_mode)?;
    spec.grid()
        .par_iter()
        .map(|&(e, b)| SweepRow::evaluate(e, b, &m))
        .collect()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}
