use entscope_core::estimate::SamplingMode;
use entscope_core::fisher::{outcome_probs, OutcomeDistribution};
use entscope_core::modes::Scene;
use entscope_core::protocol::{run_block, run_protocol_traced, BlockOutcome, Conditioning, ProtocolConfig, StageCounts};
use entscope_core::rng::stream_rng;
use entscope_core::Sign;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::with_threads;
use crate::config::RunConfig;
use crate::error::AppError;

/// One line of the JSON-lines trace. Fields the run did not produce are
/// `null`: dark blocks carry no photon, fast mode skips the qubit pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub seed: u64,
    pub run: u64,
    pub s: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<usize>,
    #[serde(rename = "N_m")]
    pub n_m: Option<usize>,
    pub f: Option<Sign>,
    pub sign: Option<Sign>,
    pub counts: Option<StageCounts>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub mode: SamplingMode,
    pub blocks: u64,
    pub photons: u64,
    #[serde(rename = "K")]
    pub spatial_modes: usize,
    #[serde(rename = "M")]
    pub temporal_modes: usize,
    /// `n_{q±}`, rows indexed by `q`, columns `[+, -]`.
    pub counts: Vec<[u64; 2]>,
    pub empirical: Vec<[f64; 2]>,
    pub analytic: Vec<[f64; 2]>,
    /// Total-variation distance to the analytic law; `null` without photons.
    pub tv_distance: Option<f64>,
    pub tv_defined: bool,
}

fn dark(seed: u64, run: u64) -> TraceRecord {
    TraceRecord { seed, run, s: None, m: None, q: None, n_m: None, f: None, sign: None, counts: None }
}

fn full_run(config: &ProtocolConfig, seed: u64, run: u64) -> Result<TraceRecord, AppError> {
    let mut rng = stream_rng(seed, "simulate", run);
    if config.options().conditioning == Conditioning::Unconditional {
        if let BlockOutcome::Vacuum = run_block(config, &mut rng).map_err(AppError::numerical)? {
            return Ok(dark(seed, run));
        }
        rng = stream_rng(seed, "simulate-photon", run);
    }
    let t = run_protocol_traced(config, &mut rng).map_err(AppError::numerical)?;
    Ok(TraceRecord {
        seed,
        run,
        s: Some(t.record.source),
        m: Some(t.record.m),
        q: Some(t.record.q),
        n_m: Some(t.record.flipped),
        f: Some(t.record.f),
        sign: Some(t.record.sign),
        counts: Some(t.counts),
    })
}

/// Draws source, time bin and `(q, ±)` from the analytic per-source laws.
fn fast_run(config: &ProtocolConfig, laws: &[OutcomeDistribution], seed: u64, run: u64) -> TraceRecord {
    let mut rng = stream_rng(seed, "simulate", run);
    if config.options().conditioning == Conditioning::Unconditional {
        let p_photon = config.temporal_modes() as f64 * config.epsilon();
        if rng.random::<f64>() >= p_photon {
            return dark(seed, run);
        }
    }
    let sources = config.scene().sources();
    let mut u = rng.random::<f64>();
    let mut s = sources.len() - 1;
    for (i, src) in sources.iter().enumerate() {
        if u < src.brightness {
            s = i;
            break;
        }
        u -= src.brightness;
    }
    let m = rng.random_range(1..=config.temporal_modes());
    let mut u = rng.random::<f64>() * laws[s].total();
    let mut pick = None;
    for (q, sign, p) in laws[s].iter() {
        pick = Some((q, sign));
        if u < p {
            break;
        }
        u -= p;
    }
    let (q, sign) = pick.expect("at least one outcome");
    TraceRecord { seed, run, s: Some(s), m: Some(m), q: Some(q), n_m: None, f: None, sign: Some(sign), counts: None }
}

/// `photons` protocol executions (blocks, in unconditional mode) on
/// per-run random streams.
pub fn simulate(config: &RunConfig) -> Result<(Vec<TraceRecord>, SimulationSummary), AppError> {
    let protocol = config.protocol_config()?;
    let analytic =
        outcome_probs(protocol.aperture(), protocol.basis(), protocol.scene()).map_err(AppError::numerical)?;
    let laws = protocol
        .scene()
        .sources()
        .iter()
        .map(|src| {
            let single = Scene::single(src.x).map_err(AppError::numerical)?;
            outcome_probs(protocol.aperture(), protocol.basis(), &single).map_err(AppError::numerical)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let seed = config.seed;
    let mode = config.simulate.mode;
    let trace = with_threads(config, || {
        (0..config.simulate.photons)
            .into_par_iter()
            .map(|run| match mode {
                SamplingMode::Full => full_run(&protocol, seed, run),
                SamplingMode::Fast => Ok(fast_run(&protocol, &laws, seed, run)),
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let k = protocol.spatial_modes();
    let mut counts = vec![[0u64; 2]; k];
    for rec in &trace {
        if let (Some(q), Some(sign)) = (rec.q, rec.sign) {
            counts[q][sign.index()] += 1;
        }
    }
    let photons: u64 = counts.iter().map(|r| r[0] + r[1]).sum();
    let empirical = OutcomeDistribution::from_rows(
        counts
            .iter()
            .map(|r| if photons == 0 { [0.0; 2] } else { [r[0] as f64 / photons as f64, r[1] as f64 / photons as f64] })
            .collect(),
    );
    let tv = (photons > 0).then(|| empirical.tv_distance(&analytic));
    let summary = SimulationSummary {
        seed,
        mode,
        blocks: config.simulate.photons,
        photons,
        spatial_modes: k,
        temporal_modes: protocol.temporal_modes(),
        counts,
        empirical: empirical.rows().to_vec(),
        analytic: analytic.rows().to_vec(),
        tv_distance: tv,
        tv_defined: tv.is_some(),
    };
    Ok((trace, summary))
}
