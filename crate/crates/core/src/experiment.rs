//! Quenched local convergence experiments: exhaustive per-map histograms of
//! ball codes, their spread across independent maps, and the limit law.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bdfg::MapSampler;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::limit::{limit_ball, LimitModel};
use crate::map::{PlanarMap, RootKind};
use crate::mobile::Conditioning;
use crate::rng::{stream, stream2};
use crate::topology::{ball_code, BallCode};
use crate::weights::{WeightModel, WeightSeq};

pub const SCHEMA_VERSION: u32 = 1;

/// Frequencies of ball codes keyed by their hex form.
pub type Histogram = BTreeMap<String, f64>;

/// Exact distribution of the radius-`k` ball around a uniform mark of
/// `kind`, enumerating every mark. The map's own root and mark are ignored.
pub fn quenched_histogram(map: &PlanarMap, kind: RootKind, k: usize) -> Histogram {
    let counts = quenched_counts(map, kind, k);
    let total: u64 = counts.values().sum();
    counts.into_iter().map(|(c, n)| (c.to_hex(), n as f64 / total as f64)).collect()
}

/// Number of marks of each ball code.
pub fn quenched_counts(map: &PlanarMap, kind: RootKind, k: usize) -> BTreeMap<BallCode, u64> {
    let mut out = BTreeMap::new();
    let bare = map.with_mark(None).expect("dropping the mark is always valid");
    if bare.dart_count() == 0 {
        let code = match kind {
            RootKind::Vertex => Some(ball_code(&bare, kind, k)),
            _ => None,
        };
        if let Some(c) = code {
            out.insert(c, 1);
        }
        return out;
    }
    let roots: Vec<usize> = match kind {
        RootKind::Vertex => bare.vertices(),
        RootKind::HalfEdge => (0..bare.dart_count()).collect(),
        // the face on the left of alpha(d) is the face on the right of d
        RootKind::Face => bare.faces().into_iter().map(|f| bare.alpha(f)).collect(),
    };
    for r in roots {
        let m = bare.with_root(r).expect("dart in range");
        *out.entry(ball_code(&m, kind, k)).or_insert(0) += 1;
    }
    out
}

/// Configuration of a quenched experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchedConfig {
    pub model: WeightSeq,
    pub conditioning: Conditioning,
    pub kind: RootKind,
    pub k: usize,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    #[serde(default = "default_limit_samples")]
    pub limit_samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub exec: ExecMode,
    #[serde(default = "default_budget")]
    pub limit_budget: u64,
}

fn default_limit_samples() -> usize {
    10_000
}
fn default_budget() -> u64 {
    10_000_000
}

impl QuenchedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas < 2 {
            return Err(Error::InvalidConfig("at least two replicas are needed".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("no sizes given".into()));
        }
        Ok(())
    }
}

/// Mean and standard deviation of a code's frequency across replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeStats {
    pub mean: f64,
    pub sd: f64,
}

/// Spread of the per-map histograms at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub n: usize,
    pub codes: BTreeMap<String, CodeStats>,
    /// L¹ distance of each replica's histogram to the replica mean.
    pub l1_dispersion: Vec<f64>,
    pub mean_l1: f64,
}

impl Concentration {
    /// Codes ordered by decreasing mean frequency, ties by code.
    pub fn top_codes(&self, count: usize) -> Vec<String> {
        let mut v: Vec<(&String, f64)> = self.codes.iter().map(|(c, s)| (c, s.mean)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v.into_iter().take(count).map(|(c, _)| c.clone()).collect()
    }

    /// Mean standard deviation over the `count` most frequent codes.
    pub fn mean_top_sd(&self, count: usize) -> f64 {
        let top = self.top_codes(count);
        top.iter().map(|c| self.codes[c].sd).sum::<f64>() / top.len().max(1) as f64
    }
}

/// Frequency of a code under the limit law, with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFreq {
    pub freq: f64,
    pub se: f64,
}

/// Per-size histograms of every replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeHistograms {
    pub n: usize,
    pub replicas: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchedReport {
    pub schema_version: u32,
    pub config: QuenchedConfig,
    pub per_map_histograms: Vec<SizeHistograms>,
    pub concentration: Vec<Concentration>,
    pub limit_estimate: LimitEstimate,
}

/// One row of the comparison between finite maps and the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub code: String,
    pub mean: f64,
    pub se: f64,
    pub limit: f64,
    pub limit_se: f64,
}

impl Agreement {
    /// Difference in units of the combined standard error.
    pub fn z(&self) -> f64 {
        let s = (self.se * self.se + self.limit_se * self.limit_se).sqrt();
        if s == 0.0 {
            if self.mean == self.limit {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - self.limit).abs() / s
        }
    }
}

impl QuenchedReport {
    pub fn concentration_at(&self, n: usize) -> Option<&Concentration> {
        self.concentration.iter().find(|c| c.n == n)
    }

    /// Replica means at size `n` against the limit estimate on the `top`
    /// most frequent codes.
    pub fn agreement(&self, n: usize, top: usize) -> Vec<Agreement> {
        let Some(c) = self.concentration_at(n) else { return Vec::new() };
        let r = self.config.replicas as f64;
        c.top_codes(top)
            .into_iter()
            .map(|code| {
                let s = c.codes[&code];
                let l = self.limit_estimate.get(&code);
                Agreement { code, mean: s.mean, se: s.sd / r.sqrt(), limit: l.freq, limit_se: l.se }
            })
            .collect()
    }

    /// `code,n,mean_freq,sd,limit_freq,limit_se` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("code,n,mean_freq,sd,limit_freq,limit_se\n");
        for c in &self.concentration {
            for code in c.top_codes(usize::MAX) {
                let s = c.codes[&code];
                let l = self.limit_estimate.get(&code);
                out.push_str(&format!("{code},{},{},{},{},{}\n", c.n, s.mean, s.sd, l.freq, l.se));
            }
        }
        out
    }
}

/// Mean/sd per code and L¹ dispersion of a set of histograms.
pub fn concentration(n: usize, hists: &[Histogram]) -> Concentration {
    let r = hists.len() as f64;
    let keys: BTreeSet<&String> = hists.iter().flat_map(|h| h.keys()).collect();
    let mut codes = BTreeMap::new();
    let mut means: BTreeMap<&String, f64> = BTreeMap::new();
    for k in keys {
        let vals: Vec<f64> = hists.iter().map(|h| h.get(k).copied().unwrap_or(0.0)).collect();
        let mean = vals.iter().sum::<f64>() / r;
        let var = if hists.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0) } else { 0.0 };
        codes.insert(k.clone(), CodeStats { mean, sd: var.sqrt() });
        means.insert(k, mean);
    }
    let l1_dispersion: Vec<f64> = hists
        .iter()
        .map(|h| means.iter().map(|(k, m)| (h.get(*k).copied().unwrap_or(0.0) - m).abs()).sum())
        .collect();
    let mean_l1 = l1_dispersion.iter().sum::<f64>() / r;
    Concentration { n, codes, l1_dispersion, mean_l1 }
}

/// Monte Carlo estimate of the limit law of radius-`k` balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub samples: usize,
    pub codes: BTreeMap<String, LimitFreq>,
    /// Samples whose exploration ran out of budget; their mass is not
    /// attributed to any code.
    pub unresolved: LimitFreq,
}

impl LimitEstimate {
    pub fn get(&self, code: &str) -> LimitFreq {
        self.codes.get(code).copied().unwrap_or(LimitFreq { freq: 0.0, se: 0.0 })
    }
}

fn freq(m: u64, n: f64) -> LimitFreq {
    let p = m as f64 / n;
    LimitFreq { freq: p, se: (p * (1.0 - p) / n).sqrt() }
}

/// Sample `samples` limit balls. Other errors than an exhausted
/// exploration budget are returned.
pub fn limit_estimate(
    lm: &LimitModel,
    kind: RootKind,
    k: usize,
    samples: usize,
    seed: u64,
    budget: u64,
    mode: ExecMode,
) -> Result<LimitEstimate> {
    let codes = map_indexed(mode, samples, |i| limit_ball(lm, kind, k, budget, stream(seed, "limit", i as u64)));
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut unresolved = 0;
    for c in codes {
        match c {
            Ok(c) => *counts.entry(c.to_hex()).or_insert(0) += 1,
            Err(Error::ExplorationBudget(_)) => unresolved += 1,
            Err(e) => return Err(e),
        }
    }
    let n = samples as f64;
    Ok(LimitEstimate {
        samples,
        codes: counts.into_iter().map(|(c, m)| (c, freq(m, n))).collect(),
        unresolved: freq(unresolved, n),
    })
}

/// Sample `replicas` maps at every size, histogram them exhaustively and
/// compare with the limit.
pub fn run_quenched_experiment(config: &QuenchedConfig) -> Result<QuenchedReport> {
    config.validate()?;
    let model = WeightModel::critical(&config.model)?;
    let sampler = MapSampler::new(&model, config.conditioning)?;
    let lm = LimitModel::new(&model)?;
    let mut per_map = Vec::new();
    let mut conc = Vec::new();
    for &n in &config.sizes {
        let hists = map_indexed(config.exec, config.replicas, |r| {
            let mut rng = stream2(config.seed, "replica", n as u64, r as u64);
            sampler
                .sample(n, &mut rng)
                .map(|s| quenched_histogram(&s.map, config.kind, config.k))
                .map_err(|e| Error::Replica { n, replica: r, source: Box::new(e) })
        });
        let hists: Vec<Histogram> = hists.into_iter().collect::<Result<_>>()?;
        conc.push(concentration(n, &hists));
        per_map.push(SizeHistograms { n, replicas: hists });
    }
    let limit = limit_estimate(&lm, config.kind, config.k, config.limit_samples, config.seed, config.limit_budget, config.exec)?;
    Ok(QuenchedReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        per_map_histograms: per_map,
        concentration: conc,
        limit_estimate: limit,
    })
}
