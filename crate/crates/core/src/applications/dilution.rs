//! Turning uniform randomness into an arbitrary distribution `Q` on `C`.
//!
//! Letters are grouped by probability into geometric buckets
//! `I_a = [(1+ε)^(−a), (1+ε)^(−(a−1)))`, `a = 1..k`, with everything below
//! `(1+ε)^(−k)` dropped. Within a bucket `Q` is replaced by the uniform law,
//! and the bucket weights are rounded to a `k²`-type, so one uniform draw
//! on `k²` helper values followed by a uniform draw within the bucket
//! realizes the approximation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{tv_of, Distribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    /// `a` in `1..=k`.
    pub level: usize,
    pub members: Vec<usize>,
    /// `q_a = Q(C_a)`.
    pub mass: f64,
    /// Helper values assigned to this bucket, out of `k²`.
    pub helper_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilutionPlan {
    pub target: Distribution,
    pub epsilon: f64,
    pub k: usize,
    /// Nonempty finite buckets, by level.
    pub buckets: Vec<Bucket>,
    /// Letters below `(1+ε)^(−k)`.
    pub dropped: Vec<usize>,
    /// `q_∞`
    pub dropped_mass: f64,
    /// `k²`
    pub helper_size: u64,
    /// `k² · lcm(|C_a|)`: one index in this range drives one sample.
    pub total_uniform_size: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Bucket of a positive probability; endpoints go to the lower level.
fn level_of(p: f64, epsilon: f64) -> usize {
    let ratio = 1.0 + epsilon;
    let mut a = ((-p.log2()) / ratio.log2()).ceil().max(1.0) as usize;
    // repair float error around the endpoints
    while a > 1 && p >= ratio.powi(-(a as i32 - 1)) {
        a -= 1;
    }
    while p < ratio.powi(-(a as i32)) {
        a += 1;
    }
    a
}

pub fn build_dilution(target: &Distribution, epsilon: f64) -> Result<DilutionPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let size = target.len();
    let k = (((size as f64).log2() - epsilon.log2()) / epsilon).ceil().max(1.0) as usize;
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut dropped = Vec::new();
    for c in 0..size {
        let p = target.get(c);
        if p <= 0.0 {
            dropped.push(c);
            continue;
        }
        let a = level_of(p, epsilon);
        if a > k { dropped.push(c) } else { levels[a - 1].push(c) }
    }
    let dropped_mass: f64 = dropped.iter().map(|&c| target.get(c)).sum();
    let kept = 1.0 - dropped_mass;
    let helper_size = (k as u64) * (k as u64);
    let mut buckets: Vec<Bucket> = levels
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(i, members)| {
            let mass = members.iter().map(|&c| target.get(c)).sum();
            Bucket { level: i + 1, members, mass, helper_count: 0 }
        })
        .collect();
    // largest remainder rounding of q_a / (1 − q_∞) to multiples of 1/k²
    let exact: Vec<f64> = buckets.iter().map(|b| b.mass / kept * helper_size as f64).collect();
    let mut counts: Vec<u64> = exact.iter().map(|v| v.floor() as u64).collect();
    let short = helper_size - counts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..exact.len()).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().take(short as usize) {
        counts[i] += 1;
    }
    for (b, c) in buckets.iter_mut().zip(counts) {
        b.helper_count = c;
    }
    let lcm = buckets
        .iter()
        .filter(|b| b.helper_count > 0)
        .try_fold(1u64, |acc, b| {
            let s = b.members.len() as u64;
            (acc / gcd(acc, s)).checked_mul(s)
        });
    let total_uniform_size = lcm
        .and_then(|l| l.checked_mul(helper_size))
        .ok_or_else(|| Error::cap("uniform index range", u128::MAX, u64::MAX))?;
    Ok(DilutionPlan { target: target.clone(), epsilon, k, buckets, dropped, dropped_mass, helper_size, total_uniform_size })
}

impl DilutionPlan {
    /// The law actually sampled: `Σ_a (n_a/k²) U_a`.
    pub fn realized(&self) -> Distribution {
        let mut p = vec![0.0; self.target.len()];
        for b in &self.buckets {
            let w = b.helper_count as f64 / self.helper_size as f64 / b.members.len() as f64;
            for &c in &b.members {
                p[c] += w;
            }
        }
        Distribution::new(p).expect("bucket weights sum to one")
    }

    /// `Σ_a q_a/(1−q_∞) U_a` before rounding the weights.
    pub fn bucket_mixture(&self) -> Distribution {
        let kept = 1.0 - self.dropped_mass;
        let mut p = vec![0.0; self.target.len()];
        for b in &self.buckets {
            for &c in &b.members {
                p[c] += b.mass / kept / b.members.len() as f64;
            }
        }
        Distribution::new(p).expect("bucket weights sum to one")
    }

    pub fn realized_error(&self) -> f64 {
        tv_of(self.target.probs(), self.realized().probs())
    }

    /// `2ε + 1/k`
    pub fn error_bound(&self) -> f64 {
        2.0 * self.epsilon + 1.0 / self.k as f64
    }

    /// Maps one uniform index in `[0, total_uniform_size)` to a letter.
    pub fn letter_for(&self, u: u64) -> Result<usize> {
        if u >= self.total_uniform_size {
            return Err(Error::InvalidInput(format!("index {u} outside [0, {})", self.total_uniform_size)));
        }
        let inner = self.total_uniform_size / self.helper_size;
        let (helper, rest) = (u / inner, u % inner);
        let mut acc = 0;
        for b in &self.buckets {
            acc += b.helper_count;
            if helper < acc {
                return Ok(b.members[(rest % b.members.len() as u64) as usize]);
            }
        }
        unreachable!("helper counts sum to k²")
    }
}

/// Draws one letter from a stream of uniform indices in `[0, total_uniform_size)`.
pub fn realize_from_uniform(plan: &DilutionPlan, stream: &mut impl Iterator<Item = u64>) -> Result<usize> {
    let u = stream.next().ok_or_else(|| Error::InvalidInput("uniform stream exhausted".into()))?;
    plan.letter_for(u)
}

pub fn sample_dilution<R: Rng + ?Sized>(plan: &DilutionPlan, rng: &mut R, count: usize) -> Result<Vec<usize>> {
    let mut stream = std::iter::repeat_with(|| rng.random_range(0..plan.total_uniform_size));
    (0..count).map(|_| realize_from_uniform(plan, &mut stream)).collect()
}
