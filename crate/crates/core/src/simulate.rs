//! Channel simulation with common randomness.
//!
//! The sender sees `xⁿ`, draws a joint type `T` with probability
//! `Wⁿ(T_T(xⁿ)|xⁿ)` and announces it. If the X-marginal of `T` is not
//! δ-typical for the source, or `T` is not conditionally typical for `W`, the
//! protocol terminates and the receiver outputs the all-zero word. Otherwise
//! a shared index `ν` selects one of the `N_T` covering lists of `T`, and the
//! sender transmits the position `μ` of a uniformly chosen list entry lying
//! in `T_T(xⁿ)`. The receiver outputs the stored word.
//!
//! The shared randomness is one independent uniform index per joint type
//! ([`SharedIndex`]); only the announced type's index is ever read, so the
//! consumption per block is `log₂ N_T` bits.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::covering::{build_covering, CoveringCheck, CoveringContext, CoveringFamily, CoveringMode};
use crate::error::{check_dims, Error, Result};
use crate::prob::{conditional_entropy, entropy, mutual_information, push_forward, tv_of, Channel, Distribution};
use crate::types::{
    channel_word_row, count_occurrences, enumerate_exact_types, enumerate_joint_types, index_to_word,
    is_conditionally_typical, rank_in_type, unrank_in_type, word_probability, word_to_index, ExactType,
    JointType, TypicalSpec, Word,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub max_retries: u32,
}

impl Default for SimParams {
    fn default() -> Self {
        Self { n: 4, delta: 2.0, epsilon: 0.1, seed: 0, max_retries: 20 }
    }
}

#[derive(Debug, Clone)]
struct TypeEntry {
    family: CoveringFamily,
    check: CoveringCheck,
    ctx: CoveringContext,
    /// Per `ν`, word counts over `T_S` ranks.
    hists: Vec<Vec<u32>>,
    /// `T_S` listed by rank.
    s_words: Vec<Word>,
}

impl TypeEntry {
    fn new(family: CoveringFamily, check: CoveringCheck, ctx: CoveringContext) -> Result<Self> {
        let hists = (0..family.n_indices as usize).map(|nu| ctx.histogram(&family, nu)).collect();
        let s = family.joint_type.y_marginal();
        let s_words = (0..ctx.s_size as u64).map(|r| unrank_in_type(&s, r)).collect::<Result<Vec<_>>>()?;
        Ok(Self { family, check, ctx, hists, s_words })
    }
}

/// One uniform index per joint type of the code, in code order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SharedIndex(pub Vec<u32>);

/// Distribution over `ν` used when averaging, per joint type.
#[derive(Debug, Clone, Copy)]
pub enum NuWeights<'a> {
    Uniform,
    Explicit(&'a [Vec<f64>]),
}

#[derive(Debug, Clone)]
pub struct SimCode {
    pub params: SimParams,
    pub source: Distribution,
    pub channel: Channel,
    entries: Vec<TypeEntry>,
    index: HashMap<JointType, usize>,
    by_x_type: HashMap<ExactType, Vec<usize>>,
    spec: TypicalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub x_word: Word,
    /// `None` is the terminate marker.
    pub announced_type: Option<JointType>,
    pub nu: Option<u32>,
    pub mu: Option<u64>,
    pub y_word: Word,
    pub bits_sent: f64,
    pub randomness_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub n: usize,
    pub num_types: usize,
    /// `ceil(log₂ #types)`.
    pub announcement_bits: u32,
    pub max_m: u64,
    pub max_n: u64,
    /// `(log₂ max M + announcement bits) / n`.
    pub rate: f64,
    /// `log₂ max N / n`.
    pub cr_rate: f64,
    pub mutual_information: f64,
    pub conditional_entropy: f64,
    pub output_entropy: f64,
    /// `rate − I(P;W)`.
    pub rate_slack: f64,
    /// `rate + cr_rate − H(PW)`.
    pub total_slack: f64,
    pub total_words: u64,
    pub total_retries: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongFidelity {
    /// `max TV(output(xⁿ), Wⁿ(·|xⁿ))` over δ-typical `xⁿ`.
    pub lambda: f64,
    pub worst_word: Word,
    /// Average TV under `Pⁿ`, all words included.
    pub global_err: f64,
    /// `Pⁿ` of the non-typical words.
    pub atypical_mass: f64,
    pub typical_words: usize,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    params: SimParams,
    source: Distribution,
    channel: Channel,
    types: Vec<String>,
    accounting: Accounting,
}

/// The joint types for which a code at block length `n` carries families:
/// X-marginal δ-typical for `source`, conditionally δ-typical for `channel`.
pub fn jointly_typical_types(
    source: &Distribution,
    channel: &Channel,
    n: usize,
    delta: f64,
    caps: &Caps,
) -> Result<Vec<JointType>> {
    check_dims("source vs channel input", source.len(), channel.input_size())?;
    let spec = TypicalSpec::new(source.clone(), n, delta)?;
    let mut out = Vec::new();
    for r in enumerate_exact_types(n, source.len(), caps)? {
        if !spec.admits(&r) {
            continue;
        }
        for t in enumerate_joint_types(n, source.len(), channel.output_size(), Some(&r), caps)? {
            if is_conditionally_typical(&t, channel, delta) {
                out.push(t);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn build_sim_code(source: &Distribution, channel: &Channel, params: &SimParams, caps: &Caps) -> Result<SimCode> {
    let types = jointly_typical_types(source, channel, params.n, params.delta, caps)?;
    if types.is_empty() {
        return Err(Error::Infeasible("no jointly typical joint types at this block length".into()));
    }
    let sizes = types
        .iter()
        .map(|t| {
            let s = crate::types::multinomial_u128(t.y_marginal().counts()).unwrap_or(u128::MAX);
            if s == 1 {
                Ok(1u128)
            } else {
                let r = crate::covering::required_m_n(t, params.epsilon)?;
                Ok(r.m as u128 * r.n as u128)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let total: u128 = sizes.iter().sum();
    if total > caps.max_code_words as u128 {
        return Err(Error::cap("total covering words", total, caps.max_code_words));
    }
    let entries = types
        .par_iter()
        .map(|t| {
            let ctx = CoveringContext::new(t, caps)?;
            let (family, check) =
                build_covering(&ctx, params.epsilon, CoveringMode::Guaranteed, params.seed, params.max_retries, caps)?;
            TypeEntry::new(family, check, ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    SimCode::assemble(source.clone(), channel.clone(), params.clone(), entries)
}

impl SimCode {
    fn assemble(source: Distribution, channel: Channel, params: SimParams, entries: Vec<TypeEntry>) -> Result<Self> {
        let spec = TypicalSpec::new(source.clone(), params.n, params.delta)?;
        let mut index = HashMap::new();
        let mut by_x_type: HashMap<ExactType, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            index.insert(e.family.joint_type.clone(), i);
            by_x_type.entry(e.family.joint_type.x_marginal()).or_default().push(i);
        }
        Ok(Self { params, source, channel, entries, index, by_x_type, spec })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn num_types(&self) -> usize {
        self.entries.len()
    }

    pub fn joint_types(&self) -> Vec<JointType> {
        self.entries.iter().map(|e| e.family.joint_type.clone()).collect()
    }

    pub fn family(&self, type_index: usize) -> &CoveringFamily {
        &self.entries[type_index].family
    }

    pub fn check(&self, type_index: usize) -> &CoveringCheck {
        &self.entries[type_index].check
    }

    pub fn type_index(&self, t: &JointType) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// `N_T` for every type, in code order.
    pub fn index_sizes(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.family.n_indices).collect()
    }

    pub fn announcement_bits(&self) -> u32 {
        let k = self.entries.len() as u64;
        if k <= 1 {
            0
        } else {
            64 - (k - 1).leading_zeros()
        }
    }

    /// Code types whose X-marginal is `type(xⁿ)`.
    pub fn types_for_input(&self, x_word: &[usize]) -> Result<&[usize]> {
        self.check_word(x_word)?;
        let r = count_occurrences(x_word, self.source.len())?;
        Ok(self.by_x_type.get(&r).map_or(&[], Vec::as_slice))
    }

    /// `Wⁿ(T_T(xⁿ)|xⁿ)`: the probability that the sender announces type `type_index`.
    pub fn type_draw_probability(&self, type_index: usize, x_word: &[usize]) -> Result<f64> {
        let e = self.entry(type_index)?;
        let t = &e.family.joint_type;
        if count_occurrences(x_word, self.source.len())? != t.x_marginal() {
            return Ok(0.0);
        }
        let mut p = e.ctx.compatible[rank_in_type(x_word, self.source.len())? as usize].len() as f64;
        for x in 0..t.x_size() {
            for y in 0..t.y_size() {
                p *= self.channel.get(x, y).powi(t.get(x, y) as i32);
            }
        }
        Ok(p)
    }

    /// Ranks (within `T_S`) of the words of `T_T(xⁿ)`, sorted.
    pub fn compatible_ranks(&self, type_index: usize, x_word: &[usize]) -> Result<&[u32]> {
        let e = self.entry(type_index)?;
        let r = e.family.joint_type.x_marginal();
        if count_occurrences(x_word, self.source.len())? != r {
            return Err(Error::InvalidInput("word does not have the type's X-marginal".into()));
        }
        Ok(&e.ctx.compatible[rank_in_type(x_word, self.source.len())? as usize])
    }

    /// Word counts of list `ν` over `T_S` ranks.
    pub fn list_histogram(&self, type_index: usize, nu: usize) -> Result<&[u32]> {
        self.entry(type_index)?
            .hists
            .get(nu)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("list index {nu} outside the family")))
    }

    /// The word of `T_S` with the given rank.
    pub fn stored_word(&self, type_index: usize, rank: u32) -> Result<&[usize]> {
        self.entry(type_index)?
            .s_words
            .get(rank as usize)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("rank {rank} outside T_S")))
    }

    fn entry(&self, type_index: usize) -> Result<&TypeEntry> {
        self.entries
            .get(type_index)
            .ok_or_else(|| Error::InvalidInput(format!("type index {type_index} outside the code")))
    }

    pub fn fallback_word(&self) -> Word {
        vec![0; self.params.n]
    }

    pub fn sample_shared_index<R: Rng + ?Sized>(&self, rng: &mut R) -> SharedIndex {
        SharedIndex(self.entries.iter().map(|e| rng.random_range(0..e.family.n_indices) as u32).collect())
    }

    fn check_word(&self, x_word: &[usize]) -> Result<()> {
        check_dims("input word length", x_word.len(), self.params.n)?;
        if let Some(s) = x_word.iter().find(|s| **s >= self.source.len()) {
            return Err(Error::InvalidInput(format!("symbol {s} outside the input alphabet")));
        }
        Ok(())
    }

    fn terminated(&self, x_word: &[usize]) -> Transcript {
        Transcript {
            x_word: x_word.to_vec(),
            announced_type: None,
            nu: None,
            mu: None,
            y_word: self.fallback_word(),
            bits_sent: self.announcement_bits() as f64,
            randomness_used: 0.0,
        }
    }

    /// Runs the sender's side and the receiver's table lookup.
    ///
    /// `rng` is the sender's private randomness (type draw and `μ`);
    /// `shared` is the common randomness.
    pub fn encode<R: Rng + ?Sized>(&self, x_word: &[usize], shared: &SharedIndex, rng: &mut R) -> Result<Transcript> {
        self.check_word(x_word)?;
        check_dims("shared index length", shared.0.len(), self.entries.len())?;
        let y_draw: Word = x_word
            .iter()
            .map(|&x| {
                let u: f64 = rng.random();
                let row = self.channel.row(x);
                let mut acc = 0.0;
                for (y, p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return y;
                    }
                }
                row.iter().rposition(|p| *p > 0.0).unwrap_or(0)
            })
            .collect();
        let t = JointType::of_words(x_word, &y_draw, self.source.len(), self.channel.output_size())?;
        let Some(ti) = self.type_index(&t) else {
            return Ok(self.terminated(x_word));
        };
        let entry = &self.entries[ti];
        let nu = shared.0[ti];
        if nu as u64 >= entry.family.n_indices {
            return Err(Error::InvalidInput(format!("shared index {nu} outside [0, {})", entry.family.n_indices)));
        }
        let x_rank = rank_in_type(x_word, self.source.len())? as usize;
        let compat = &entry.ctx.compatible[x_rank];
        let candidates: Vec<usize> = entry
            .family
            .words_of(nu as usize)
            .iter()
            .enumerate()
            .filter(|(_, w)| compat.binary_search(w).is_ok())
            .map(|(mu, _)| mu)
            .collect();
        if candidates.is_empty() {
            return Ok(self.terminated(x_word));
        }
        let mu = candidates[rng.random_range(0..candidates.len())];
        let y_word = self.decode(ti, nu, mu as u64)?;
        Ok(Transcript {
            x_word: x_word.to_vec(),
            announced_type: Some(t),
            nu: Some(nu),
            mu: Some(mu as u64),
            y_word,
            bits_sent: (entry.family.m as f64).log2() + self.announcement_bits() as f64,
            randomness_used: (entry.family.n_indices as f64).log2(),
        })
    }

    pub fn decode(&self, type_index: usize, nu: u32, mu: u64) -> Result<Word> {
        let entry = self
            .entries
            .get(type_index)
            .ok_or_else(|| Error::InvalidInput(format!("type index {type_index} outside the code")))?;
        let rank = entry.family.word(nu as usize, mu as usize)?;
        Ok(entry.s_words[rank as usize].clone())
    }

    /// Receiver's output for a transcript; the fallback word on termination.
    pub fn decode_transcript(&self, t: &Transcript) -> Result<Word> {
        match (&t.announced_type, t.nu, t.mu) {
            (Some(jt), Some(nu), Some(mu)) => {
                let ti = self
                    .type_index(jt)
                    .ok_or_else(|| Error::InvalidInput(format!("type {jt} not in the code")))?;
                self.decode(ti, nu, mu)
            }
            _ => Ok(self.fallback_word()),
        }
    }

    /// Feeds `(y-word, probability)` pairs of the exact output law to `sink`;
    /// returns the mass sent to the fallback word.
    fn accumulate(&self, x_word: &[usize], weights: NuWeights<'_>, sink: &mut dyn FnMut(&[usize], f64)) -> Result<f64> {
        self.check_word(x_word)?;
        if let NuWeights::Explicit(w) = weights {
            check_dims("weights per type", w.len(), self.entries.len())?;
        }
        let r = count_occurrences(x_word, self.source.len())?;
        let Some(types) = self.by_x_type.get(&r) else {
            return Ok(1.0);
        };
        let x_rank = rank_in_type(x_word, self.source.len())? as usize;
        let mut delivered = 0.0;
        for &ti in types {
            let e = &self.entries[ti];
            let t = &e.family.joint_type;
            let mut p_t = e.ctx.compatible[x_rank].len() as f64;
            for x in 0..t.x_size() {
                for y in 0..t.y_size() {
                    p_t *= self.channel.get(x, y).powi(t.get(x, y) as i32);
                }
            }
            if p_t == 0.0 {
                continue;
            }
            let n_nu = e.family.n_indices as usize;
            let compat = &e.ctx.compatible[x_rank];
            for nu in 0..n_nu {
                let w = match weights {
                    NuWeights::Uniform => 1.0 / n_nu as f64,
                    NuWeights::Explicit(ws) => ws[ti][nu],
                };
                if w == 0.0 {
                    continue;
                }
                let h = &e.hists[nu];
                let k: u64 = compat.iter().map(|y| h[*y as usize] as u64).sum();
                if k == 0 {
                    continue;
                }
                let scale = p_t * w / k as f64;
                for &y in compat {
                    let c = h[y as usize];
                    if c > 0 {
                        sink(&e.s_words[y as usize], scale * c as f64);
                        delivered += scale * c as f64;
                    }
                }
            }
        }
        Ok((1.0 - delivered).max(0.0))
    }

    /// Exact law of the receiver's output given `xⁿ`, over `Yⁿ` in word-index order.
    pub fn output_distribution_weighted(&self, x_word: &[usize], weights: NuWeights<'_>, caps: &Caps) -> Result<Vec<f64>> {
        let ys = self.channel.output_size();
        let size = caps.word_space(ys, self.params.n)? as usize;
        let mut out = vec![0.0; size];
        let fallback = self.accumulate(x_word, weights, &mut |y, p| out[word_to_index(y, ys)] += p)?;
        out[0] += fallback;
        Ok(out)
    }

    pub fn output_distribution(&self, x_word: &[usize], caps: &Caps) -> Result<Vec<f64>> {
        self.output_distribution_weighted(x_word, NuWeights::Uniform, caps)
    }

    /// Per-position marginals (`n × |Y|`) of the output law.
    pub fn letter_marginals(&self, x_word: &[usize], weights: NuWeights<'_>) -> Result<Vec<Vec<f64>>> {
        let mut m = vec![vec![0.0; self.channel.output_size()]; self.params.n];
        let fallback = self.accumulate(x_word, weights, &mut |y, p| {
            for (k, s) in y.iter().enumerate() {
                m[k][*s] += p;
            }
        })?;
        for row in m.iter_mut() {
            row[0] += fallback;
        }
        Ok(m)
    }

    pub fn is_typical_input(&self, x_word: &[usize]) -> bool {
        crate::types::is_typical(x_word, &self.spec)
    }

    /// Exact per-word fidelity over all of `Xⁿ`.
    pub fn strong_fidelity(&self, caps: &Caps) -> Result<StrongFidelity> {
        let xs = self.source.len();
        let n = self.params.n;
        let x_space = caps.word_space(xs, n)? as usize;
        caps.word_space(self.channel.output_size(), n)?;
        let rows: Vec<Option<(f64, f64, bool)>> = (0..x_space)
            .into_par_iter()
            .map(|i| {
                let x = index_to_word(i, xs, n);
                let px = word_probability(&self.source, &x);
                if px == 0.0 {
                    return Ok(None);
                }
                let out = self.output_distribution(&x, caps)?;
                let target = channel_word_row(&self.channel, &x);
                Ok(Some((px, tv_of(&out, &target), self.is_typical_input(&x))))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report =
            StrongFidelity { lambda: 0.0, worst_word: Vec::new(), global_err: 0.0, atypical_mass: 0.0, typical_words: 0 };
        for (i, row) in rows.into_iter().enumerate() {
            let Some((px, tv, typical)) = row else { continue };
            report.global_err += px * tv;
            if typical {
                report.typical_words += 1;
                if tv > report.lambda || report.worst_word.is_empty() {
                    report.lambda = tv;
                    report.worst_word = index_to_word(i, xs, n);
                }
            } else {
                report.atypical_mass += px;
            }
        }
        Ok(report)
    }

    pub fn accounting(&self) -> Result<Accounting> {
        let n = self.params.n as f64;
        let max_m = self.entries.iter().map(|e| e.family.m).max().unwrap_or(1);
        let max_n = self.entries.iter().map(|e| e.family.n_indices).max().unwrap_or(1);
        let bits = self.announcement_bits();
        let rate = ((max_m as f64).log2() + bits as f64) / n;
        let cr_rate = (max_n as f64).log2() / n;
        let mi = mutual_information(&self.source, &self.channel)?;
        let ce = conditional_entropy(&self.source, &self.channel)?;
        let oe = entropy(&push_forward(&self.source, &self.channel)?);
        Ok(Accounting {
            n: self.params.n,
            num_types: self.entries.len(),
            announcement_bits: bits,
            max_m,
            max_n,
            rate,
            cr_rate,
            mutual_information: mi,
            conditional_entropy: ce,
            output_entropy: oe,
            rate_slack: rate - mi,
            total_slack: rate + cr_rate - oe,
            total_words: self.entries.iter().map(|e| e.family.words.len() as u64).sum(),
            total_retries: self.entries.iter().map(|e| e.family.retries as u64).sum(),
        })
    }

    /// Writes `manifest.json` plus `families/NNNN.json`, one per joint type.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("families"))?;
        let manifest = Manifest {
            params: self.params.clone(),
            source: self.source.clone(),
            channel: self.channel.clone(),
            types: self.entries.iter().map(|e| e.family.joint_type.to_string()).collect(),
            accounting: self.accounting()?,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        for (i, e) in self.entries.iter().enumerate() {
            let f = BufWriter::new(fs::File::create(dir.join("families").join(format!("{i:04}.json")))?);
            serde_json::to_writer(f, &e.family)?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path, caps: &Caps) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let entries = (0..manifest.types.len())
            .into_par_iter()
            .map(|i| {
                let f = BufReader::new(fs::File::open(dir.join("families").join(format!("{i:04}.json")))?);
                let family: CoveringFamily = serde_json::from_reader(f)?;
                if family.joint_type.to_string() != manifest.types[i] {
                    return Err(Error::InvalidInput(format!("family {i} does not match the manifest")));
                }
                let ctx = CoveringContext::new(&family.joint_type, caps)?;
                let check = crate::covering::verify_covering(&family, &ctx)?;
                TypeEntry::new(family, check, ctx)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(manifest.source, manifest.channel, manifest.params, entries)
    }
}

pub fn write_transcripts(path: &Path, transcripts: &[Transcript]) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    for t in transcripts {
        serde_json::to_writer(&mut f, t)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_transcripts(path: &Path) -> Result<Vec<Transcript>> {
    BufReader::new(fs::File::open(path)?)
        .lines()
        .filter(|l| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
