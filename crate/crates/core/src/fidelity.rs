//! Fidelity criteria for block codes, and derandomization of a
//! common-randomness code into a fixed code under the letterwise criterion.
//!
//! All four criteria use the total variation distance:
//!
//! * global: `Σ Pⁿ(xⁿ) TV(Wⁿ_{xⁿ}, DE(xⁿ))`
//! * local: `Σ Pⁿ(xⁿ) (1/n) Σ_k TV(W_{x_k}, DE(xⁿ)_k)`
//! * letterwise source: `Σ_a P(a) (1/n) Σ_k TV(W_a, Σ_{xⁿ: x_k = a} Pⁿ(xⁿ)/P(a) · DE(xⁿ)_k)`
//! * empirical joint: `Σ Pⁿ(xⁿ) TV(G, (1/n) Σ_k δ_{x_k} ⊗ DE(xⁿ)_k)` with `G(x,y) = P(x) W(y|x)`
//!
//! A code enters only through its exact output law `DE(xⁿ)` averaged over
//! any randomness it uses, which makes stochastic codes and deterministic
//! ones interchangeable here.

use std::f64::consts::LN_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_dims, Error, Result};
use crate::prob::{tv_of, Channel, Distribution};
use crate::seed;
use crate::simulate::{NuWeights, SharedIndex, SimCode, Transcript};
use crate::types::{channel_word_row, index_to_word, word_probability, Word};

/// Any `n`-block code viewed as a channel `Xⁿ → Yⁿ`.
pub trait BlockCode: Sync {
    fn block_length(&self) -> usize;
    fn input_size(&self) -> usize;
    fn output_size(&self) -> usize;
    /// Law of the decoded word over `Yⁿ`, in word-index order.
    fn output_distribution(&self, x_word: &[usize], caps: &Caps) -> Result<Vec<f64>>;
}

impl BlockCode for SimCode {
    fn block_length(&self) -> usize {
        self.n()
    }
    fn input_size(&self) -> usize {
        self.source.len()
    }
    fn output_size(&self) -> usize {
        self.channel.output_size()
    }
    fn output_distribution(&self, x_word: &[usize], caps: &Caps) -> Result<Vec<f64>> {
        SimCode::output_distribution(self, x_word, caps)
    }
}

/// A weighted family of explicit block channels (one per `ν`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFamilyCode {
    pub n: usize,
    pub x_size: usize,
    pub y_size: usize,
    /// `members[ν][x index][y index]`.
    pub members: Vec<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
}

impl ChannelFamilyCode {
    pub fn new(n: usize, x_size: usize, y_size: usize, members: Vec<Vec<Vec<f64>>>, weights: Vec<f64>) -> Result<Self> {
        check_dims("weights per member", weights.len(), members.len())?;
        Distribution::new(weights.clone())?;
        let xs = x_size.pow(n as u32);
        let ys = y_size.pow(n as u32);
        for m in &members {
            check_dims("member rows", m.len(), xs)?;
            for row in m {
                check_dims("member row length", row.len(), ys)?;
            }
            Channel::new(m.clone())?;
        }
        Ok(Self { n, x_size, y_size, members, weights })
    }

    /// Members given as deterministic maps from input index to output index.
    pub fn deterministic(n: usize, x_size: usize, y_size: usize, maps: &[Vec<usize>], weights: Vec<f64>) -> Result<Self> {
        let ys = y_size.pow(n as u32);
        let members = maps
            .iter()
            .map(|map| {
                map.iter()
                    .map(|&y| {
                        let mut row = vec![0.0; ys];
                        if y >= ys {
                            return Err(Error::InvalidInput(format!("output index {y} out of range")));
                        }
                        row[y] = 1.0;
                        Ok(row)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, x_size, y_size, members, weights)
    }
}

impl BlockCode for ChannelFamilyCode {
    fn block_length(&self) -> usize {
        self.n
    }
    fn input_size(&self) -> usize {
        self.x_size
    }
    fn output_size(&self) -> usize {
        self.y_size
    }
    fn output_distribution(&self, x_word: &[usize], _caps: &Caps) -> Result<Vec<f64>> {
        check_dims("input word length", x_word.len(), self.n)?;
        let xi = crate::types::word_to_index(x_word, self.x_size);
        let ys = self.y_size.pow(self.n as u32);
        let mut out = vec![0.0; ys];
        for (m, w) in self.members.iter().zip(&self.weights) {
            for (o, v) in out.iter_mut().zip(&m[xi]) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FidelityMode {
    Exact,
    /// Samples `xⁿ ∼ Pⁿ`; each sample's output law is still exact.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub global_err: f64,
    pub local_err: f64,
    pub letterwise_source_err: f64,
    pub empirical_joint_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub global_err: f64,
    pub local_err: f64,
    pub letterwise_source_err: f64,
    pub empirical_joint_err: f64,
    /// Present in Monte Carlo mode.
    pub standard_errors: Option<StandardErrors>,
}

/// Per-word contributions, kept so that reductions run in a fixed order.
struct WordTerms {
    weight: f64,
    x: Word,
    global: f64,
    local: f64,
    joint: f64,
    marginals: Vec<Vec<f64>>,
}

fn letter_marginals(out: &[f64], n: usize, y_size: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; y_size]; n];
    for (i, p) in out.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        for (k, y) in index_to_word(i, y_size, n).into_iter().enumerate() {
            m[k][y] += p;
        }
    }
    m
}

fn word_terms<C: BlockCode + ?Sized>(
    code: &C,
    source: &Distribution,
    channel: &Channel,
    x: Word,
    weight: f64,
    caps: &Caps,
) -> Result<WordTerms> {
    let n = code.block_length();
    let ys = channel.output_size();
    let out = code.output_distribution(&x, caps)?;
    let target = channel_word_row(channel, &x);
    let marginals = letter_marginals(&out, n, ys);
    let local = (0..n).map(|k| tv_of(channel.row(x[k]), &marginals[k])).sum::<f64>() / n as f64;
    let mut emp = vec![0.0; source.len() * ys];
    for (k, m) in marginals.iter().enumerate() {
        for (y, v) in m.iter().enumerate() {
            emp[x[k] * ys + y] += v / n as f64;
        }
    }
    let g: Vec<f64> = (0..source.len())
        .flat_map(|a| channel.row(a).iter().map(move |w| source.get(a) * w))
        .collect();
    Ok(WordTerms { weight, global: tv_of(&out, &target), local, joint: tv_of(&g, &emp), marginals, x })
}

/// Letterwise source criterion from per-word marginals.
fn letterwise_source(terms: &[WordTerms], source: &Distribution, channel: &Channel, n: usize) -> f64 {
    let ys = channel.output_size();
    let xs = source.len();
    // acc[k][a][y] = Σ_{x: x_k = a} weight(x) DE(x)_k(y); mass[k][a] = Σ weight
    let mut acc = vec![vec![vec![0.0; ys]; xs]; n];
    let mut mass = vec![vec![0.0; xs]; n];
    for t in terms {
        for k in 0..n {
            let a = t.x[k];
            mass[k][a] += t.weight;
            for (y, v) in t.marginals[k].iter().enumerate() {
                acc[k][a][y] += t.weight * v;
            }
        }
    }
    let mut total = 0.0;
    for a in 0..xs {
        if source.get(a) == 0.0 {
            continue;
        }
        let mut per_a = 0.0;
        for k in 0..n {
            if mass[k][a] == 0.0 {
                // no sampled word has `a` at position k
                per_a += 1.0;
                continue;
            }
            let cond: Vec<f64> = acc[k][a].iter().map(|v| v / mass[k][a]).collect();
            per_a += tv_of(channel.row(a), &cond);
        }
        total += source.get(a) * per_a / n as f64;
    }
    total
}

pub fn measure_fidelity<C: BlockCode + ?Sized>(
    source: &Distribution,
    channel: &Channel,
    code: &C,
    mode: FidelityMode,
    caps: &Caps,
) -> Result<FidelityReport> {
    check_dims("source vs channel input", source.len(), channel.input_size())?;
    check_dims("code input alphabet", code.input_size(), source.len())?;
    check_dims("code output alphabet", code.output_size(), channel.output_size())?;
    let n = code.block_length();
    let xs = source.len();
    caps.word_space(channel.output_size(), n)?;
    match mode {
        FidelityMode::Exact => {
            let space = caps.word_space(xs, n)? as usize;
            let terms: Vec<WordTerms> = (0..space)
                .into_par_iter()
                .filter_map(|i| {
                    let x = index_to_word(i, xs, n);
                    let px = word_probability(source, &x);
                    (px > 0.0).then(|| word_terms(code, source, channel, x, px, caps))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FidelityReport {
                global_err: terms.iter().map(|t| t.weight * t.global).sum(),
                local_err: terms.iter().map(|t| t.weight * t.local).sum(),
                letterwise_source_err: letterwise_source(&terms, source, channel, n),
                empirical_joint_err: terms.iter().map(|t| t.weight * t.joint).sum(),
                standard_errors: None,
            })
        }
        FidelityMode::MonteCarlo { samples, seed: master } => {
            if samples < 2 {
                return Err(Error::InvalidInput("Monte Carlo mode needs at least 2 samples".into()));
            }
            let terms: Vec<WordTerms> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seed::rng(master, "fidelity/monte-carlo", i as u64);
                    let x: Word = (0..n).map(|_| sample_index(source.probs(), &mut rng)).collect();
                    word_terms(code, source, channel, x, 1.0 / samples as f64, caps)
                })
                .collect::<Result<Vec<_>>>()?;
            let mean_se = |f: &dyn Fn(&WordTerms) -> f64| {
                let vals: Vec<f64> = terms.iter().map(f).collect();
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
                (m, (var / vals.len() as f64).sqrt())
            };
            let (g, g_se) = mean_se(&|t| t.global);
            let (l, l_se) = mean_se(&|t| t.local);
            let (j, j_se) = mean_se(&|t| t.joint);
            let ls = letterwise_source(&terms, source, channel, n);
            // batch means for the nonlinear criterion
            let batches = 20.min(samples / 2).max(2);
            let size = samples / batches;
            let estimates: Vec<f64> = (0..batches)
                .map(|b| {
                    let chunk = &terms[b * size..(b + 1) * size];
                    letterwise_source(chunk, source, channel, n)
                })
                .collect();
            let bm = estimates.iter().sum::<f64>() / batches as f64;
            let bvar = estimates.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
            Ok(FidelityReport {
                global_err: g,
                local_err: l,
                letterwise_source_err: ls,
                empirical_joint_err: j,
                standard_errors: Some(StandardErrors {
                    global_err: g_se,
                    local_err: l_se,
                    letterwise_source_err: (bvar / batches as f64).sqrt(),
                    empirical_joint_err: j_se,
                }),
            })
        }
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Smallest integer `Q > (4 ln 2/(ε² u))·(n log₂|X| + log₂(2|Y|))`.
pub fn derandomization_q(n: usize, x_size: usize, y_size: usize, epsilon: f64, u: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidInput(format!("need 0 < eps < 1 and 0 < u <= 1, got {epsilon}, {u}")));
    }
    let bound = 4.0 * LN_2 / (epsilon * epsilon * u) * (n as f64 * (x_size as f64).log2() + (2.0 * y_size as f64).log2());
    Ok(bound.floor() as u64 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    /// Every typical word and letter checked exactly.
    Exact,
    /// Accepted on the union bound alone.
    Declared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerandomizeOptions {
    pub epsilon: f64,
    pub seed: u64,
    pub max_retries: u32,
    /// Exact verification runs for `n` up to this value.
    pub exact_max_n: usize,
}

impl Default for DerandomizeOptions {
    fn default() -> Self {
        Self { epsilon: 0.1, seed: 0, max_retries: 10, exact_max_n: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct DerandomizedCode<'a> {
    pub base: &'a SimCode,
    pub selected_indices: Vec<SharedIndex>,
    pub q: u64,
    pub u: f64,
    pub verification: Verification,
    pub retries: u32,
    /// `max TV(W_{x_k}, DE(xⁿ)_k)` over typical `xⁿ` and positions `k`, when verified exactly.
    pub letterwise_max_err: Option<f64>,
    weights: Vec<Vec<f64>>,
}

impl DerandomizedCode<'_> {
    /// `ceil(log₂ Q)`, the bits spent announcing the selected index.
    pub fn index_bits(&self) -> u32 {
        if self.q <= 1 {
            0
        } else {
            64 - (self.q - 1).leading_zeros()
        }
    }

    pub fn index_overhead(&self) -> f64 {
        self.index_bits() as f64 / self.base.n() as f64
    }

    pub fn nu_weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

impl BlockCode for DerandomizedCode<'_> {
    fn block_length(&self) -> usize {
        self.base.n()
    }
    fn input_size(&self) -> usize {
        self.base.source.len()
    }
    fn output_size(&self) -> usize {
        self.base.channel.output_size()
    }
    fn output_distribution(&self, x_word: &[usize], caps: &Caps) -> Result<Vec<f64>> {
        self.base.output_distribution_weighted(x_word, NuWeights::Explicit(&self.weights), caps)
    }
}

fn selection_weights(code: &SimCode, selected: &[SharedIndex]) -> Vec<Vec<f64>> {
    let q = selected.len() as f64;
    let mut w: Vec<Vec<f64>> = code.index_sizes().iter().map(|n| vec![0.0; *n as usize]).collect();
    for s in selected {
        for (ti, nu) in s.0.iter().enumerate() {
            w[ti][*nu as usize] += 1.0 / q;
        }
    }
    w
}

/// Replaces the shared index by a uniform choice among `Q` indices drawn
/// once from the common-randomness law; the choice is made by the sender
/// and announced with `ceil(log₂ Q)` bits.
pub fn derandomize<'a>(code: &'a SimCode, opts: &DerandomizeOptions, caps: &Caps) -> Result<DerandomizedCode<'a>> {
    let u = code.channel.min_nonzero();
    let n = code.n();
    let xs = code.source.len();
    let trivial = code.index_sizes().iter().all(|s| *s == 1);
    let q = if trivial {
        1
    } else {
        derandomization_q(n, xs, code.channel.output_size(), opts.epsilon, u)?
    };
    let exact = n <= opts.exact_max_n && caps.word_space(xs, n).is_ok();

    let typical: Vec<(Word, Vec<Vec<f64>>)> = if exact {
        let space = caps.word_space(xs, n)? as usize;
        (0..space)
            .into_par_iter()
            .filter_map(|i| {
                let x = index_to_word(i, xs, n);
                code.is_typical_input(&x).then(|| {
                    let m = code.letter_marginals(&x, NuWeights::Uniform)?;
                    Ok((x, m))
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    for (x, m) in &typical {
        for (k, mk) in m.iter().enumerate() {
            for (y, w) in code.channel.row(x[k]).iter().enumerate() {
                if *w > 0.0 && mk[y] < u / 2.0 - 1e-12 {
                    return Err(Error::Infeasible(format!(
                        "letter marginal {:.4} below u/2 = {:.4} at word {x:?}, position {k}; epsilon too large for this code",
                        mk[y],
                        u / 2.0
                    )));
                }
            }
        }
    }

    for attempt in 0..=opts.max_retries {
        let label = format!("derandomize/{attempt}");
        let selected: Vec<SharedIndex> = (0..q)
            .map(|i| code.sample_shared_index(&mut seed::rng(opts.seed, &label, i)))
            .collect();
        let weights = selection_weights(code, &selected);
        if !exact {
            return Ok(DerandomizedCode {
                base: code,
                selected_indices: selected,
                q,
                u,
                verification: Verification::Declared,
                retries: attempt,
                letterwise_max_err: None,
                weights,
            });
        }
        let results: Vec<(bool, f64)> = typical
            .par_iter()
            .map(|(x, base)| {
                let m = code.letter_marginals(x, NuWeights::Explicit(&weights))?;
                let mut ok = true;
                let mut worst = 0.0f64;
                for k in 0..n {
                    let w = code.channel.row(x[k]);
                    for y in 0..w.len() {
                        if w[y] > 0.0 && (m[k][y] - base[k][y]).abs() > opts.epsilon * base[k][y] + 1e-12 {
                            ok = false;
                        }
                    }
                    worst = worst.max(tv_of(w, &m[k]));
                }
                Ok((ok, worst))
            })
            .collect::<Result<Vec<_>>>()?;
        if results.iter().all(|(ok, _)| *ok) {
            let worst = results.iter().map(|(_, w)| *w).fold(0.0, f64::max);
            return Ok(DerandomizedCode {
                base: code,
                selected_indices: selected,
                q,
                u,
                verification: Verification::Exact,
                retries: attempt,
                letterwise_max_err: Some(worst),
                weights,
            });
        }
    }
    Err(Error::RetriesExhausted {
        attempts: opts.max_retries + 1,
        reason: format!("no selection of Q={q} indices met the letterwise (1±ε) condition"),
    })
}

/// One block through the derandomized code: the sender picks one of the
/// `Q` selected indices and sends it along with the base transcript.
pub fn run_fixed_code<R: Rng + ?Sized>(dcode: &DerandomizedCode<'_>, x_word: &[usize], rng: &mut R) -> Result<Transcript> {
    let q = rng.random_range(0..dcode.q) as usize;
    let mut t = dcode.base.encode(x_word, &dcode.selected_indices[q], rng)?;
    t.bits_sent += dcode.index_bits() as f64;
    t.randomness_used = 0.0;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{build_sim_code, SimParams};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn toy() -> (Distribution, Channel) {
        (Distribution::uniform(2).unwrap(), Channel::bsc(0.25).unwrap())
    }

    #[test]
    fn perfect_code_has_zero_error() {
        let (p, w) = toy();
        // the block channel W² itself
        let rows: Vec<Vec<f64>> = (0..4).map(|i| channel_word_row(&w, &index_to_word(i, 2, 2))).collect();
        let code = ChannelFamilyCode::new(2, 2, 2, vec![rows], vec![1.0]).unwrap();
        let r = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        assert!(r.global_err < 1e-12 && r.local_err < 1e-12);
        assert!(r.letterwise_source_err < 1e-12);
        // the empirical joint criterion still sees the type of xⁿ: E TV(P, type(xⁿ)) = (0.5 + 0 + 0 + 0.5)/4
        assert!(close(r.empirical_joint_err, 0.25));
    }

    #[test]
    fn identity_channel_lossless_code() {
        let p = Distribution::uniform(2).unwrap();
        let w = Channel::identity(2).unwrap();
        let code = ChannelFamilyCode::deterministic(2, 2, 2, &[vec![0, 1, 2, 3]], vec![1.0]).unwrap();
        let r = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        assert!(r.global_err < 1e-12 && r.local_err < 1e-12 && r.letterwise_source_err < 1e-12);
        assert!(close(r.empirical_joint_err, 0.25));
    }

    #[test]
    fn hand_computed_deterministic_code() {
        // D(E(x)) = x under BSC(0.25), P uniform, n = 2
        let (p, w) = toy();
        let code = ChannelFamilyCode::deterministic(2, 2, 2, &[vec![0, 1, 2, 3]], vec![1.0]).unwrap();
        let r = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        assert!(close(r.global_err, 0.4375));
        assert!(close(r.local_err, 0.25));
        assert!(close(r.letterwise_source_err, 0.25));
        assert!(close(r.empirical_joint_err, 0.4375));
    }

    #[test]
    fn hand_computed_randomized_code() {
        // half identity, half constant 00
        let (p, w) = toy();
        let code =
            ChannelFamilyCode::deterministic(2, 2, 2, &[vec![0, 1, 2, 3], vec![0, 0, 0, 0]], vec![0.5, 0.5]).unwrap();
        let r = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        assert!(close(r.global_err, 0.375));
        assert!(close(r.local_err, 0.25));
        assert!(close(r.letterwise_source_err, 0.25));
        assert!(close(r.empirical_joint_err, 0.40625));
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let (p, w) = toy();
        let code = build_sim_code(&p, &w, &SimParams::default(), &Caps::default()).unwrap();
        let exact = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        let mc = measure_fidelity(&p, &w, &code, FidelityMode::MonteCarlo { samples: 4000, seed: 5 }, &Caps::default())
            .unwrap();
        let se = mc.standard_errors.unwrap();
        assert!((mc.global_err - exact.global_err).abs() <= 3.0 * se.global_err + 1e-12);
        assert!((mc.local_err - exact.local_err).abs() <= 3.0 * se.local_err + 1e-12);
        assert!((mc.empirical_joint_err - exact.empirical_joint_err).abs() <= 3.0 * se.empirical_joint_err + 1e-12);
    }

    #[test]
    fn q_formula() {
        let q = derandomization_q(4, 2, 2, 0.1, 0.25).unwrap();
        let oracle = (4.0 * 2f64.ln() / (0.01 * 0.25) * (4.0 + 2.0)).floor() as u64 + 1;
        assert_eq!(q, oracle);
        assert!(derandomization_q(4, 2, 2, 0.05, 0.25).unwrap() >= 4 * q - 4);
    }

    #[test]
    fn trivial_base_keeps_q_one() {
        let p = Distribution::uniform(2).unwrap();
        let w = Channel::identity(2).unwrap();
        let code = build_sim_code(&p, &w, &SimParams::default(), &Caps::default()).unwrap();
        let d = derandomize(&code, &DerandomizeOptions::default(), &Caps::default()).unwrap();
        assert_eq!(d.q, 1);
        assert_eq!(d.index_bits(), 0);
        let x = vec![0, 1, 1, 0];
        assert_eq!(
            d.output_distribution(&x, &Caps::default()).unwrap(),
            code.output_distribution(&x, &Caps::default()).unwrap()
        );
        let t = run_fixed_code(&d, &x, &mut seed::rng(0, "t", 0)).unwrap();
        assert_eq!(t.y_word, x);
    }
}
