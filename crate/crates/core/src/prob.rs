//! Finite distributions, channels and the information quantities built on them.
//!
//! All logarithms are base 2. Probabilities below [`ZERO_PROB`] are treated as
//! zero inside entropy sums (0·log 0 = 0).

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Deviation from unit mass tolerated (and renormalized away) at construction.
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Entries below this are ignored in entropy sums.
pub const ZERO_PROB: f64 = 1e-12;

fn normalize(mut probs: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty alphabet")));
    }
    for (i, p) in probs.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::InvalidDistribution(format!("{what}: entry {i} is not finite")));
        }
        if *p < 0.0 {
            if *p < -ZERO_PROB {
                return Err(Error::InvalidDistribution(format!(
                    "{what}: entry {i} is negative ({p})"
                )));
            }
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entries sum to {total}, not 1"
        )));
    }
    if total != 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(probs)
}

/// A probability mass function on `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    probs: Vec<f64>,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;
    fn try_from(r: DistributionRepr) -> Result<Self> {
        Distribution::new(r.probs)
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr { probs: d.probs }
    }
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(Self { probs: normalize(probs, "distribution")? })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self { probs: vec![1.0 / size as f64; size] })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::InvalidInput(format!("point mass at {at} outside alphabet {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    /// `(1-p, p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| **p > ZERO_PROB).map(|(i, _)| i)
    }

    pub fn min_nonzero(&self) -> f64 {
        self.probs.iter().copied().filter(|p| *p > ZERO_PROB).fold(f64::INFINITY, f64::min)
    }

    /// Product distribution on pairs, indexed `a * other.len() + b`.
    pub fn tensor(&self, other: &Distribution) -> Distribution {
        let probs = self
            .probs
            .iter()
            .flat_map(|a| other.probs.iter().map(move |b| a * b))
            .collect();
        Distribution { probs }
    }
}

/// A row-stochastic matrix: row `x` is the output distribution `W_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    output_size: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        Channel::new(r.rows)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr { rows: c.rows }
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let output_size = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDistribution("channel without rows".into()))?;
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(x, row)| {
                check_dims(&format!("channel row {x} length"), row.len(), output_size)?;
                normalize(row, &format!("channel row {x}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { output_size, rows })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new((0..size).map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect())
    }

    /// Every input mapped to the same output distribution.
    pub fn constant(input_size: usize, row: &Distribution) -> Result<Self> {
        Self::new(vec![row.probs().to_vec(); input_size])
    }

    /// Binary symmetric channel with crossover probability `flip`.
    pub fn bsc(flip: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row_distribution(&self, x: usize) -> Distribution {
        Distribution { probs: self.rows[x].clone() }
    }

    /// Smallest strictly positive entry.
    pub fn min_nonzero(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .copied()
            .filter(|p| *p > ZERO_PROB)
            .fold(f64::INFINITY, f64::min)
    }

    /// `W ⊗ V` acting on pairs; inputs `a * V.in + b`, outputs `y * V.out + z`.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut rows = Vec::with_capacity(self.input_size() * other.input_size());
        for a in &self.rows {
            for b in &other.rows {
                rows.push(a.iter().flat_map(|p| b.iter().map(move |q| p * q)).collect());
            }
        }
        Channel { output_size: self.output_size * other.output_size, rows }
    }
}

/// Joint distribution on `X × Y`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    x_size: usize,
    y_size: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(x_size: usize, y_size: usize, probs: Vec<f64>) -> Result<Self> {
        check_dims("joint distribution entries", probs.len(), x_size * y_size)?;
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidDistribution("empty joint alphabet".into()));
        }
        Ok(Self { x_size, y_size, probs: normalize(probs, "joint distribution")? })
    }

    /// `G(x, y) = P(x) W(y|x)`.
    pub fn from_source(p: &Distribution, w: &Channel) -> Result<Self> {
        check_dims("source vs channel input", p.len(), w.input_size())?;
        let probs = (0..p.len())
            .flat_map(|x| w.row(x).iter().map(move |wy| p.get(x) * wy))
            .collect();
        Self::new(p.len(), w.output_size(), probs)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.y_size + y]
    }

    pub fn x_marginal(&self) -> Distribution {
        let probs = (0..self.x_size).map(|x| (0..self.y_size).map(|y| self.get(x, y)).sum()).collect();
        Distribution { probs }
    }

    pub fn y_marginal(&self) -> Distribution {
        let probs = (0..self.y_size).map(|y| (0..self.x_size).map(|x| self.get(x, y)).sum()).collect();
        Distribution { probs }
    }
}

/// Entropy in bits of a raw probability vector.
pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|p| **p > ZERO_PROB)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

pub fn entropy(p: &Distribution) -> f64 {
    entropy_of(p.probs())
}

/// `h(p) = -p log p - (1-p) log(1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// The output distribution `PW`.
pub fn push_forward(p: &Distribution, w: &Channel) -> Result<Distribution> {
    check_dims("source vs channel input", p.len(), w.input_size())?;
    let mut q = vec![0.0; w.output_size()];
    for (x, row) in w.rows().iter().enumerate() {
        for (y, wy) in row.iter().enumerate() {
            q[y] += p.get(x) * wy;
        }
    }
    Distribution::new(q)
}

/// `H(W|P) = Σ_x P(x) H(W_x)`.
pub fn conditional_entropy(p: &Distribution, w: &Channel) -> Result<f64> {
    check_dims("source vs channel input", p.len(), w.input_size())?;
    Ok(w.rows().iter().enumerate().map(|(x, row)| p.get(x) * entropy_of(row)).sum())
}

/// `I(P;W) = H(PW) - H(W|P)`.
pub fn mutual_information(p: &Distribution, w: &Channel) -> Result<f64> {
    let q = push_forward(p, w)?;
    let mi = entropy(&q) - conditional_entropy(p, w)?;
    Ok(mi.max(0.0))
}

/// Total variation distance of raw vectors, `½‖p − q‖₁`.
pub fn tv_of(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims("tv_distance alphabets", p.len(), q.len())?;
    Ok(tv_of(p.probs(), q.probs()))
}

/// The Bayes-reverse channel together with `Q = PW`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transpose {
    pub q: Distribution,
    pub v: Channel,
    /// Outputs `y` with `Q(y) = 0`; their rows of `v` are uniform placeholders.
    pub unreachable: Vec<usize>,
}

pub fn transpose_channel(p: &Distribution, w: &Channel) -> Result<Transpose> {
    let q = push_forward(p, w)?;
    let xs = p.len();
    let mut unreachable = Vec::new();
    let rows = (0..w.output_size())
        .map(|y| {
            if q.get(y) <= ZERO_PROB {
                unreachable.push(y);
                vec![1.0 / xs as f64; xs]
            } else {
                let mut row: Vec<f64> = (0..xs).map(|x| p.get(x) * w.get(x, y)).collect();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= total);
                row
            }
        })
        .collect();
    Ok(Transpose { q, v: Channel::new(rows)?, unreachable })
}

/// Continuity bound on entropy: with `λ = ‖p − q‖₁ ≤ 1/2` and alphabet size `a`,
/// `|H(p) − H(q)| ≤ −λ log(λ / a)`.
pub fn entropy_continuity_bound(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_dims("entropy_continuity_bound alphabets", p.len(), q.len())?;
    let lambda = 2.0 * tv_of(p.probs(), q.probs());
    if lambda > 0.5 + 1e-12 {
        return Err(Error::InvalidInput(format!("l1 distance {lambda} exceeds 1/2")));
    }
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    Ok(-lambda * (lambda / p.len() as f64).log2())
}

/// Rate penalty in the finite-error lower bound `(1/n) log M ≥ I(P;W) − f(λ)`:
/// `f(λ) = λ (log|X| + 2 log|Y|) + 2 h(λ)`, valid for `λ ≤ 1/2`.
///
/// Exposed as a documented formula; nothing downstream relies on its tightness.
pub fn lower_bound_penalty(lambda: f64, x_size: usize, y_size: usize) -> f64 {
    lambda * ((x_size as f64).log2() + 2.0 * (y_size as f64).log2()) + 2.0 * binary_entropy(lambda)
}

/// `(D∘E)(y|x) = Σ_c D(y|c) E(c|x)`.
pub fn channel_compose(e: &Channel, d: &Channel) -> Result<Channel> {
    check_dims("compose: e outputs vs d inputs", e.output_size(), d.input_size())?;
    let rows = e
        .rows()
        .iter()
        .map(|erow| {
            let mut out = vec![0.0; d.output_size()];
            for (c, ec) in erow.iter().enumerate() {
                if *ec == 0.0 {
                    continue;
                }
                for (y, dy) in d.row(c).iter().enumerate() {
                    out[y] += ec * dy;
                }
            }
            out
        })
        .collect();
    Channel::new(rows)
}
