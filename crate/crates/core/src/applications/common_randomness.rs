//! Creating correlated pairs `(X, Y)` from shared uniform randomness alone.
//!
//! Given a factorization `W = D∘E` through an intermediate alphabet `C`,
//! both parties dilute the same uniform index into `c ∼ Q ≈ E(P)`; the
//! receiver applies `D` and the sender applies the reverse channel of `E`.
//! Only the constructive part is here: whether `I(X;Y)` bits per pair
//! suffice in the block limit is an open conjecture, so the rate is
//! reported but never checked.

use rand::Rng;
use serde::Serialize;

use super::dilution::{build_dilution, DilutionPlan};
use crate::error::{Error, Result};
use crate::fidelity::sample_index;
use crate::prob::{channel_compose, entropy, mutual_information, transpose_channel, tv_of, Channel, Distribution};

#[derive(Debug, Clone, Serialize)]
pub struct PairSimulation {
    pub source: Distribution,
    pub plan: DilutionPlan,
    /// `E'`, the reverse of `E` under `P`, as a channel `C → X`.
    pub reverse: Channel,
    pub decoder: Channel,
    /// Row-major `|X| × |Y|` law produced by the pipeline.
    pub realized_joint: Vec<f64>,
    /// `TV(realized joint, P × W)`
    pub joint_tv: f64,
    /// `H(E(P))`
    pub intermediate_entropy: f64,
    pub mutual_information: f64,
    /// `log₂` of the uniform index range consumed per pair.
    pub uniform_bits: f64,
}

/// The pipeline for one factorization `channel = decoder ∘ encoder`.
pub fn simulate_pair(source: &Distribution, encoder: &Channel, decoder: &Channel, epsilon: f64) -> Result<PairSimulation> {
    let w = channel_compose(encoder, decoder)?;
    let t = transpose_channel(source, encoder)?;
    let plan = build_dilution(&t.q, epsilon)?;
    let realized = plan.realized();
    let (xs, ys) = (source.len(), decoder.output_size());
    let mut joint = vec![0.0; xs * ys];
    for c in 0..realized.len() {
        let qc = realized.get(c);
        if qc == 0.0 {
            continue;
        }
        if t.unreachable.contains(&c) {
            return Err(Error::InvalidInput(format!("dilution realized unreachable symbol {c}")));
        }
        for x in 0..xs {
            for y in 0..ys {
                joint[x * ys + y] += qc * t.v.get(c, x) * decoder.get(c, y);
            }
        }
    }
    let target: Vec<f64> = (0..xs).flat_map(|x| (0..ys).map(move |y| (x, y))).map(|(x, y)| source.get(x) * w.get(x, y)).collect();
    Ok(PairSimulation {
        joint_tv: tv_of(&joint, &target),
        intermediate_entropy: entropy(&t.q),
        mutual_information: mutual_information(source, &w)?,
        uniform_bits: (plan.total_uniform_size as f64).log2(),
        source: source.clone(),
        plan,
        reverse: t.v,
        decoder: decoder.clone(),
        realized_joint: joint,
    })
}

impl PairSimulation {
    /// Both sides read the same uniform index; the remaining coins are private.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, usize)> {
        let c = self.plan.letter_for(rng.random_range(0..self.plan.total_uniform_size))?;
        let x = sample_index(self.reverse.row(c), rng);
        let y = sample_index(self.decoder.row(c), rng);
        Ok((x, y))
    }

    /// The dilution guarantee; the pair law inherits it since `E'` and `D` act on `c` alone.
    pub fn error_bound(&self) -> f64 {
        self.plan.error_bound()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn identity_factorization_reproduces_joint() {
        // C = X: the pair law is exact whenever P itself dilutes exactly
        let p = Distribution::uniform(4).unwrap();
        let w = Channel::new(vec![vec![0.7, 0.3], vec![0.1, 0.9], vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let sim = simulate_pair(&p, &Channel::identity(4).unwrap(), &w, 0.1).unwrap();
        assert!(sim.joint_tv < 1e-12);
        assert!((sim.intermediate_entropy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pair_error_within_dilution_bound() {
        let p = Distribution::new(vec![0.6, 0.4]).unwrap();
        let e = Channel::new(vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.3, 0.7]]).unwrap();
        let d = Channel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let sim = simulate_pair(&p, &e, &d, 0.1).unwrap();
        assert!(sim.joint_tv <= sim.plan.realized_error() + 1e-12);
        assert!(sim.joint_tv <= sim.error_bound());
        let mut rng = seed::rng(0, "test/pairs", 0);
        let mut counts = [0usize; 4];
        let draws = 20_000;
        for _ in 0..draws {
            let (x, y) = sim.sample(&mut rng).unwrap();
            counts[x * 2 + y] += 1;
        }
        for (c, j) in counts.iter().zip(&sim.realized_joint) {
            let sd = (j * (1.0 - j) / draws as f64).sqrt();
            assert!((*c as f64 / draws as f64 - j).abs() <= 4.0 * sd + 1e-12);
        }
    }
}
