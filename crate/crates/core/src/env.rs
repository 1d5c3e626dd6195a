//! Seeded channel-rate and arrival generators.
//!
//! Every environment is materialized in full before any policy acts, so the
//! adversary is oblivious by construction.
//!
//! # Random streams
//!
//! All randomness comes from [`RngStream`]: a ChaCha8 generator seeded with
//! `ChaCha8Rng::seed_from_u64(master_seed)` whose 64-bit stream number is a
//! SplitMix64 hash of `(purpose, node, run, channel)`. Any two distinct labels
//! get independent streams, and nothing drawn for one run can shift the draws
//! of another, whatever order runs execute in.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default gap between the best channel mean and the auto-tuned arrival rate.
pub const DEFAULT_EPSILON: f64 = 0.05;

/// `T x N` matrix of normalized channel rates in `[0, 1]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceMatrix {
    rates: Vec<f64>,
    horizon: usize,
    n_arms: usize,
}

impl ServiceMatrix {
    pub fn new(horizon: usize, n_arms: usize, rates: Vec<f64>) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("service matrix needs at least one channel"));
        }
        if rates.len() != horizon * n_arms {
            return Err(Error::invalid(format!(
                "expected {} rates for a {horizon}x{n_arms} matrix, got {}",
                horizon * n_arms,
                rates.len()
            )));
        }
        if let Some(k) = rates.iter().position(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid(format!(
                "rate {} at slot {}, channel {} outside [0, 1]",
                rates[k],
                k / n_arms + 1,
                k % n_arms
            )));
        }
        Ok(Self {
            rates,
            horizon,
            n_arms,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let horizon = rows.len();
        let n_arms = rows.first().map_or(0, Vec::len);
        if let Some(t) = rows.iter().position(|r| r.len() != n_arms) {
            return Err(Error::invalid(format!(
                "row {t} has {} channels, expected {n_arms}",
                rows[t].len()
            )));
        }
        Self::new(horizon, n_arms, rows.into_iter().flatten().collect())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_arms(&self) -> usize {
        self.n_arms
    }

    /// Rates of all channels at slot `t` (counted from 0).
    pub fn row(&self, t: usize) -> &[f64] {
        &self.rates[t * self.n_arms..(t + 1) * self.n_arms]
    }

    pub fn get(&self, t: usize, arm: usize) -> f64 {
        self.rates[t * self.n_arms + arm]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rates.chunks_exact(self.n_arms)
    }

    pub fn column(&self, arm: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[arm])
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_arms];
        for row in self.rows() {
            for (s, r) in sums.iter_mut().zip(row) {
                *s += r;
            }
        }
        sums
    }

    pub fn column_means(&self) -> Vec<f64> {
        let t = self.horizon.max(1) as f64;
        self.column_sums().into_iter().map(|s| s / t).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    /// Returns a copy with slots reordered by `order` (a permutation of `0..T`).
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let rates = order.iter().flat_map(|&t| self.row(t).to_vec()).collect();
        Self {
            rates,
            horizon: self.horizon,
            n_arms: self.n_arms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Services,
    Arrivals,
    Policy,
    Audit,
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Services => 1,
            Purpose::Arrivals => 2,
            Purpose::Policy => 3,
            Purpose::Audit => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub purpose: Purpose,
    pub node: u32,
    pub run: u64,
    pub channel: u32,
}

impl StreamId {
    pub fn new(purpose: Purpose, run: u64) -> Self {
        Self {
            purpose,
            node: 0,
            run,
            channel: 0,
        }
    }

    pub fn node(self, node: u32) -> Self {
        Self { node, ..self }
    }

    pub fn channel(self, channel: u32) -> Self {
        Self { channel, ..self }
    }

    fn stream_number(&self) -> u64 {
        let mut h = splitmix64(self.purpose.code());
        h = splitmix64(h ^ u64::from(self.node));
        h = splitmix64(h ^ self.run);
        splitmix64(h ^ u64::from(self.channel))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible random substream keyed by `(master_seed, id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub master_seed: u64,
    pub id: StreamId,
}

impl RngStream {
    pub fn new(master_seed: u64, id: StreamId) -> Self {
        Self { master_seed, id }
    }

    pub fn with_id(self, id: StreamId) -> Self {
        Self { id, ..self }
    }

    pub fn with_channel(self, channel: u32) -> Self {
        self.with_id(self.id.channel(channel))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.id.stream_number());
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelModel {
    /// Rates follow `S(t+1) = clamp(alpha * S(t) + zeta(t))` with `alpha`
    /// redrawn from `Unif(0,1)` at the start of each of `num_blocks` blocks and
    /// `zeta(t) ~ Unif(-1,1)`. Without `initial_rate`, `S(1) ~ Unif(0,1)`.
    BlockMarkov {
        num_blocks: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_rate: Option<f64>,
    },
    IidUniform,
    Trace { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArrivalRate {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

impl ArrivalRate {
    pub const AUTO: ArrivalRate = ArrivalRate::Auto(AutoTag::Auto);
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArrivalModel {
    /// I.i.d. `Unif(0, 2 * lambda)` arrivals, so the mean is `lambda`. With
    /// `lambda = "auto"`, `lambda` is the largest empirical channel mean minus
    /// `epsilon`.
    UniformRate {
        lambda: ArrivalRate,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// The same amount every slot; values of at least 1 keep the queue from
    /// ever draining.
    Constant { value: f64 },
    Trace { path: PathBuf },
}

/// Inclusive-exclusive block start indices `ceil(k T / m)` for `k = 0..=m`.
pub fn block_boundaries(horizon: usize, num_blocks: usize) -> Vec<usize> {
    (0..=num_blocks)
        .map(|k| (k * horizon).div_ceil(num_blocks))
        .collect()
}

/// `max(0, min(1, alpha * s + zeta))`.
pub fn block_markov_step(s: f64, alpha: f64, zeta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("rate {s} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    if !(-1.0..=1.0).contains(&zeta) {
        return Err(Error::invalid(format!("zeta {zeta} outside [-1, 1]")));
    }
    Ok((alpha * s + zeta).clamp(0.0, 1.0))
}

/// Materializes a `horizon x n_arms` rate matrix.
///
/// Channel `i` draws from `rng.with_channel(i)`. For block-Markov channels the
/// draw order per channel is: the initial rate (if not given), then for each
/// transition `t -> t+1` a fresh `alpha` when slot `t` opens a block, then
/// `zeta(t)`.
pub fn generate_service_matrix(
    model: &ChannelModel,
    horizon: usize,
    n_arms: usize,
    rng: &RngStream,
) -> Result<ServiceMatrix> {
    if horizon == 0 || n_arms == 0 {
        return Err(Error::invalid("horizon and channel count must be at least 1"));
    }
    let mut rates = vec![0.0; horizon * n_arms];
    match model {
        ChannelModel::BlockMarkov {
            num_blocks,
            initial_rate,
        } => {
            if *num_blocks == 0 {
                return Err(Error::invalid("block-Markov model needs at least one block"));
            }
            if let Some(s0) = initial_rate {
                if !(0.0..=1.0).contains(s0) {
                    return Err(Error::invalid(format!("initial rate {s0} outside [0, 1]")));
                }
            }
            let bounds = block_boundaries(horizon, *num_blocks);
            for arm in 0..n_arms {
                let mut g = rng.with_channel(arm as u32).rng();
                let mut s = match initial_rate {
                    Some(s0) => *s0,
                    None => g.random::<f64>(),
                };
                rates[arm] = s;
                let mut alpha = 0.0;
                for t in 1..horizon {
                    if bounds.binary_search(&(t - 1)).is_ok() {
                        alpha = g.random::<f64>();
                    }
                    let zeta = 2.0 * g.random::<f64>() - 1.0;
                    s = block_markov_step(s, alpha, zeta)?;
                    rates[t * n_arms + arm] = s;
                }
            }
        }
        ChannelModel::IidUniform => {
            for arm in 0..n_arms {
                let mut g = rng.with_channel(arm as u32).rng();
                for t in 0..horizon {
                    rates[t * n_arms + arm] = g.random::<f64>();
                }
            }
        }
        ChannelModel::Trace { path } => {
            let m = read_service_trace(path)?;
            if m.horizon() != horizon || m.n_arms() != n_arms {
                return Err(Error::input(
                    path,
                    format!(
                        "trace is {}x{}, expected {horizon}x{n_arms}",
                        m.horizon(),
                        m.n_arms()
                    ),
                ));
            }
            return Ok(m);
        }
    }
    ServiceMatrix::new(horizon, n_arms, rates)
}

/// Generates `horizon` nonnegative arrivals. `services` is required when the
/// rate is `"auto"`.
pub fn generate_arrivals(
    model: &ArrivalModel,
    horizon: usize,
    rng: &RngStream,
    services: Option<&ServiceMatrix>,
) -> Result<Vec<f64>> {
    match model {
        ArrivalModel::UniformRate { lambda, epsilon } => {
            let lambda = resolve_rate(*lambda, *epsilon, services)?;
            let mut g = rng.rng();
            Ok((0..horizon)
                .map(|_| 2.0 * lambda * g.random::<f64>())
                .collect())
        }
        ArrivalModel::Constant { value } => {
            if !(*value >= 0.0) || !value.is_finite() {
                return Err(Error::invalid(format!("constant arrival {value} must be nonnegative")));
            }
            Ok(vec![*value; horizon])
        }
        ArrivalModel::Trace { path } => {
            let a = read_arrival_trace(path)?;
            if a.len() != horizon {
                return Err(Error::input(
                    path,
                    format!("trace has {} slots, expected {horizon}", a.len()),
                ));
            }
            Ok(a)
        }
    }
}

/// The mean arrival rate a [`ArrivalRate`] resolves to.
pub fn resolve_rate(
    lambda: ArrivalRate,
    epsilon: f64,
    services: Option<&ServiceMatrix>,
) -> Result<f64> {
    match lambda {
        ArrivalRate::Fixed(l) if l >= 0.0 && l.is_finite() => Ok(l),
        ArrivalRate::Fixed(l) => Err(Error::invalid(format!("arrival rate {l} must be nonnegative"))),
        ArrivalRate::Auto(_) => {
            if !(epsilon >= 0.0) {
                return Err(Error::invalid(format!("epsilon {epsilon} must be nonnegative")));
            }
            let services = services
                .ok_or_else(|| Error::invalid("auto arrival rate needs the service matrix"))?;
            let best = services
                .column_means()
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let l = best - epsilon;
            if l < 0.0 {
                log::warn!("auto arrival rate {l} is negative; clamping to 0");
                Ok(0.0)
            } else {
                Ok(l)
            }
        }
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::input(path, e.to_string()))
}

fn parse_field(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::input(path, format!("line {line}: {field:?} is not a number")))
}

/// Reads a `t,s1,...,sN` service trace, one row per slot starting at `t = 1`.
pub fn read_service_trace(path: impl AsRef<Path>) -> Result<ServiceMatrix> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let header = rdr
        .headers()
        .map_err(|e| Error::input(path, e.to_string()))?
        .clone();
    let n_arms = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n_arms).map(|i| format!("s{i}")))
        .collect();
    if n_arms == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::input(path, "header must be t,s1,...,sN"));
    }
    let mut rates = Vec::new();
    let mut horizon = 0;
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::input(path, e.to_string()))?;
        if rec.len() != n_arms + 1 {
            return Err(Error::input(path, format!("line {line}: wrong number of fields")));
        }
        let t = parse_field(path, line, &rec[0])?;
        if t != (k + 1) as f64 {
            return Err(Error::input(path, format!("line {line}: expected t = {}", k + 1)));
        }
        for f in rec.iter().skip(1) {
            rates.push(parse_field(path, line, f)?);
        }
        horizon += 1;
    }
    ServiceMatrix::new(horizon, n_arms, rates).map_err(|e| Error::input(path, e.to_string()))
}

/// Reads a `t,a` arrival trace.
pub fn read_arrival_trace(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let header = rdr
        .headers()
        .map_err(|e| Error::input(path, e.to_string()))?
        .clone();
    if header.iter().ne(["t", "a"]) {
        return Err(Error::input(path, "header must be t,a"));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::input(path, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::input(path, format!("line {line}: wrong number of fields")));
        }
        let t = parse_field(path, line, &rec[0])?;
        if t != (k + 1) as f64 {
            return Err(Error::input(path, format!("line {line}: expected t = {}", k + 1)));
        }
        let a = parse_field(path, line, &rec[1])?;
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::input(path, format!("line {line}: arrival {a} must be nonnegative")));
        }
        out.push(a);
    }
    Ok(out)
}

pub fn write_service_trace(path: impl AsRef<Path>, services: &ServiceMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::input(path, e.to_string()))?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=services.n_arms()).map(|i| format!("s{i}")))
        .collect();
    let to_err = |e: csv::Error| Error::input(path, e.to_string());
    w.write_record(&header).map_err(to_err)?;
    for (t, row) in services.rows().enumerate() {
        let rec: Vec<String> = std::iter::once((t + 1).to_string())
            .chain(row.iter().map(|r| r.to_string()))
            .collect();
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_arrival_trace(path: impl AsRef<Path>, arrivals: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::input(path, e.to_string()))?;
    let to_err = |e: csv::Error| Error::input(path, e.to_string());
    w.write_record(["t", "a"]).map_err(to_err)?;
    for (t, a) in arrivals.iter().enumerate() {
        w.write_record([(t + 1).to_string(), a.to_string()])
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(run: u64) -> RngStream {
        RngStream::new(7, StreamId::new(Purpose::Services, run))
    }

    #[test]
    fn block_markov_step_examples() {
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(block_markov_step(s, 0.0, 0.4).unwrap(), 0.4);
        }
        for (s, a) in [(1.0, 1.0), (0.5, 0.3), (0.0, 0.9)] {
            assert_eq!(block_markov_step(s, a, -1.0).unwrap(), 0.0);
        }
        assert_eq!(block_markov_step(0.9, 0.5, 0.8).unwrap(), 1.0);
        assert!(block_markov_step(1.2, 0.5, 0.0).is_err());
        assert!(block_markov_step(0.5, -0.1, 0.0).is_err());
        assert!(block_markov_step(0.5, 0.5, 1.5).is_err());
    }

    #[test]
    fn block_boundaries_use_ceiling_rule() {
        assert_eq!(
            block_boundaries(10_000, 7),
            vec![0, 1429, 2858, 4286, 5715, 7143, 8572, 10_000]
        );
        assert_eq!(block_boundaries(10, 1), vec![0, 10]);
        assert_eq!(block_boundaries(3, 5), vec![0, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn single_block_uses_one_alpha_per_channel() {
        let model = ChannelModel::BlockMarkov {
            num_blocks: 1,
            initial_rate: Some(0.5),
        };
        let m = generate_service_matrix(&model, 50, 2, &stream(1)).unwrap();
        for arm in 0..2 {
            let mut g = stream(1).with_channel(arm as u32).rng();
            let alpha: f64 = g.random();
            let mut s = 0.5;
            assert_eq!(m.get(0, arm), s);
            for t in 1..50 {
                let zeta = 2.0 * g.random::<f64>() - 1.0;
                s = (alpha * s + zeta).clamp(0.0, 1.0);
                assert_eq!(m.get(t, arm), s);
            }
        }
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let model = ChannelModel::BlockMarkov {
            num_blocks: 7,
            initial_rate: None,
        };
        let a = generate_service_matrix(&model, 500, 5, &stream(3)).unwrap();
        let b = generate_service_matrix(&model, 500, 5, &stream(3)).unwrap();
        let c = generate_service_matrix(&model, 500, 5, &stream(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.as_slice().iter().all(|r| (0.0..=1.0).contains(r)));

        let iid = generate_service_matrix(&ChannelModel::IidUniform, 200, 3, &stream(3)).unwrap();
        assert!(iid.as_slice().iter().all(|r| (0.0..1.0).contains(r)));
    }

    #[test]
    fn swapping_stream_ids_swaps_outputs() {
        let model = ChannelModel::IidUniform;
        let a = generate_service_matrix(&model, 20, 2, &stream(1)).unwrap();
        let b = generate_service_matrix(&model, 20, 2, &stream(2)).unwrap();
        let b2 = generate_service_matrix(&model, 20, 2, &stream(2)).unwrap();
        let a2 = generate_service_matrix(&model, 20, 2, &stream(1)).unwrap();
        assert_eq!((a, b), (a2, b2));
    }

    #[test]
    fn stream_labels_are_distinct() {
        let base = StreamId::new(Purpose::Services, 1);
        let ids = [
            base,
            base.node(1),
            base.channel(1),
            StreamId::new(Purpose::Arrivals, 1),
            StreamId::new(Purpose::Services, 2),
        ];
        let firsts: Vec<u64> = ids
            .iter()
            .map(|&id| RngStream::new(0, id).rng().random::<u64>())
            .collect();
        for i in 0..firsts.len() {
            for j in i + 1..firsts.len() {
                assert_ne!(firsts[i], firsts[j]);
            }
        }
    }

    #[test]
    fn arrival_models() {
        let s = RngStream::new(1, StreamId::new(Purpose::Arrivals, 1));
        let a = generate_arrivals(&ArrivalModel::Constant { value: 1.0 }, 4, &s, None).unwrap();
        assert_eq!(a, vec![1.0; 4]);

        let services = ServiceMatrix::from_rows(vec![
            vec![0.2, 0.7, 0.5],
            vec![0.2, 0.7, 0.5],
        ])
        .unwrap();
        let l = resolve_rate(ArrivalRate::AUTO, 0.05, Some(&services)).unwrap();
        assert!((l - 0.65).abs() < 1e-12);
        assert!(resolve_rate(ArrivalRate::AUTO, 0.05, None).is_err());
        assert_eq!(resolve_rate(ArrivalRate::AUTO, 0.9, Some(&services)).unwrap(), 0.0);

        let model = ArrivalModel::UniformRate {
            lambda: ArrivalRate::Fixed(0.5),
            epsilon: DEFAULT_EPSILON,
        };
        let a = generate_arrivals(&model, 100_000, &s, None).unwrap();
        assert!(a.iter().all(|&x| (0.0..1.0).contains(&x)));
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn model_serde_shapes() {
        let m: ChannelModel =
            serde_json::from_str(r#"{"type":"block_markov","num_blocks":7}"#).unwrap();
        assert_eq!(
            m,
            ChannelModel::BlockMarkov {
                num_blocks: 7,
                initial_rate: None
            }
        );
        let a: ArrivalModel =
            serde_json::from_str(r#"{"type":"uniform_rate","lambda":"auto"}"#).unwrap();
        assert_eq!(
            a,
            ArrivalModel::UniformRate {
                lambda: ArrivalRate::AUTO,
                epsilon: 0.05
            }
        );
        let a: ArrivalModel =
            serde_json::from_str(r#"{"type":"uniform_rate","lambda":0.3,"epsilon":0.1}"#).unwrap();
        assert!(matches!(
            a,
            ArrivalModel::UniformRate {
                lambda: ArrivalRate::Fixed(l),
                ..
            } if l == 0.3
        ));
        assert!(serde_json::from_str::<ArrivalModel>(r#"{"type":"uniform_rate","lambda":"fast"}"#).is_err());
    }

    #[test]
    fn trace_files_round_trip_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        let services = ServiceMatrix::from_rows(vec![vec![0.1, 0.9], vec![0.25, 0.5]]).unwrap();
        let sp = dir.path().join("s.csv");
        write_service_trace(&sp, &services).unwrap();
        assert_eq!(read_service_trace(&sp).unwrap(), services);
        let model = ChannelModel::Trace { path: sp.clone() };
        let rng = stream(1);
        assert_eq!(generate_service_matrix(&model, 2, 2, &rng).unwrap(), services);
        assert!(matches!(
            generate_service_matrix(&model, 3, 2, &rng),
            Err(Error::Input { .. })
        ));

        let ap = dir.path().join("a.csv");
        write_arrival_trace(&ap, &[0.5, 2.0]).unwrap();
        assert_eq!(read_arrival_trace(&ap).unwrap(), vec![0.5, 2.0]);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "t,s1\n1,1.5\n").unwrap();
        assert!(matches!(read_service_trace(&bad), Err(Error::Input { .. })));
        std::fs::write(&bad, "t,x1\n1,0.5\n").unwrap();
        assert!(read_service_trace(&bad).is_err());
        std::fs::write(&bad, "t,s1\n2,0.5\n").unwrap();
        assert!(read_service_trace(&bad).is_err());
        std::fs::write(&bad, "t,a\n1,-1\n").unwrap();
        assert!(read_arrival_trace(&bad).is_err());
    }
}
