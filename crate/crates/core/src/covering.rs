//! Randomized coverings of a type class and their exhaustive verification.
//!
//! A family for a joint type `T` with marginals `R`, `S` stores `N × M`
//! words of `T_S`, each encoded as its rank in the lexicographic listing of
//! `T_S`. Condition `(I_ν)` asks that, for every `ν` and every `xⁿ ∈ T_R`,
//! the averaged reverse channel `(1/M) Σ_μ V_T(xⁿ|Y_μ)` lies within
//! `(1 ± ε)/|T_R|`; condition `(II)` asks that the empirical measure of all
//! `N·M` words lies within `(1 ± ε)/|T_S|` pointwise.

use std::f64::consts::LN_2;

use num_traits::ToPrimitive;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::seed;
use crate::types::{
    conditional_class_words, conditional_size_given_x, conditional_size_given_y, joint_class_size,
    multinomial_u128, rank_in_type, type_class_size, unrank_in_type, words_of_type, JointType, Side,
};

pub const DEFAULT_EPSILON: f64 = 0.1;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

/// Union-bound failure probability of the sampling estimate:
/// `2K · 2^(−M η² s / (2 ln 2))`.
pub fn sampling_failure_bound(k_size: f64, m: f64, eta: f64, s: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 0.5) || !(s > 0.0) || !(k_size >= 1.0) || !(m >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need K >= 1, M >= 0, 0 < eta < 1/2, s > 0; got K={k_size} M={m} eta={eta} s={s}"
        )));
    }
    Ok(2.0 * k_size * (-m * eta * eta * s / (2.0 * LN_2)).exp2())
}

/// The `M` at which [`sampling_failure_bound`] equals 1.
pub fn sampling_threshold_m(k_size: f64, eta: f64, s: f64) -> Result<f64> {
    sampling_failure_bound(k_size, 0.0, eta, s)?;
    Ok(2.0 * LN_2 * (2.0 * k_size).log2() / (eta * eta * s))
}

/// The cardinalities a joint type induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSizes {
    /// `|T_R|`
    pub r: f64,
    /// `|T_S|`
    pub s: f64,
    /// `|T_T|`
    pub t: f64,
    /// `|T_T(yⁿ)|` for any `yⁿ ∈ T_S`
    pub given_y: f64,
    /// `|T_T(xⁿ)|` for any `xⁿ ∈ T_R`
    pub given_x: f64,
}

impl ClassSizes {
    pub fn of(t: &JointType) -> Self {
        let f = |b: num_bigint::BigUint| b.to_f64().unwrap_or(f64::INFINITY);
        Self {
            r: f(type_class_size(&t.x_marginal())),
            s: f(type_class_size(&t.y_marginal())),
            t: f(joint_class_size(t)),
            given_y: f(conditional_size_given_y(t)),
            given_x: f(conditional_size_given_x(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredSizes {
    pub m: u64,
    pub n: u64,
}

/// Smallest `M` (with the matching smallest `N`) satisfying both covering
/// inequalities
///
/// `M > (2 ln 2/ε²)·(|T_R||T_S|/|T_T|)·log₂(4N|T_R|)` and
/// `NM > (2 ln 2/ε²)·|T_S|·log₂(4|T_S|)`.
///
/// The coupled pair is resolved by fixpoint iteration from `N = 1`; since
/// the first inequality only gets easier as `M` grows (larger `M`, smaller
/// `N`), a binary search then lowers `M` to its minimum.
pub fn required_m_n(t: &JointType, epsilon: f64) -> Result<RequiredSizes> {
    check_epsilon(epsilon)?;
    let sizes = ClassSizes::of(t);
    let a = 2.0 * LN_2 / (epsilon * epsilon);
    let rho = sizes.r * sizes.s / sizes.t;
    let b = a * sizes.s * (4.0 * sizes.s).log2();
    let n_for = |m: u64| (b / m as f64).floor() as u64 + 1;
    let m_needed = |n: u64| (a * rho * (4.0 * n as f64 * sizes.r).log2()).floor() as u64 + 1;
    let feasible = |m: u64| m as f64 > a * rho * (4.0 * n_for(m) as f64 * sizes.r).log2();

    let mut m = m_needed(1);
    for _ in 0..200 {
        let next = m_needed(n_for(m));
        if next == m {
            break;
        }
        m = next;
    }
    while !feasible(m) {
        m += 1;
    }
    let (mut lo, mut hi) = (1u64, m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(RequiredSizes { m: hi, n: n_for(hi) })
}

/// Right-hand sides of the two covering inequalities at the given `N`:
/// `(2 ln 2/ε²)·ρ·log₂(4N|T_R|)` (against `M`) and
/// `(2 ln 2/ε²)·|T_S|·log₂(4|T_S|)` (against `NM`).
pub fn covering_thresholds(t: &JointType, epsilon: f64, n_indices: u64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let sizes = ClassSizes::of(t);
    let a = 2.0 * LN_2 / (epsilon * epsilon);
    let m_rhs = a * sizes.r * sizes.s / sizes.t * (4.0 * n_indices as f64 * sizes.r).log2();
    let nm_rhs = a * sizes.s * (4.0 * sizes.s).log2();
    Ok((m_rhs, nm_rhs))
}

/// How `build_covering` sizes a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringMode {
    /// `M`, `N` from [`required_m_n`]; draw and verify until both conditions hold.
    Guaranteed,
    /// Caller-chosen sizes; draw and verify until both conditions hold.
    Sized { m: u64, n: u64 },
    /// Every `ν` lists the whole of `T_S` once, in order.
    Saturated { n: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringFamily {
    pub joint_type: JointType,
    pub epsilon: f64,
    pub n_indices: u64,
    pub m: u64,
    /// Row-major `N × M` ranks within `T_S`.
    pub words: Vec<u32>,
    /// Failed draws before this one.
    pub retries: u32,
}

impl CoveringFamily {
    pub fn words_of(&self, nu: usize) -> &[u32] {
        let m = self.m as usize;
        &self.words[nu * m..(nu + 1) * m]
    }

    pub fn word(&self, nu: usize, mu: usize) -> Result<u32> {
        if nu as u64 >= self.n_indices || mu as u64 >= self.m {
            return Err(Error::InvalidInput(format!(
                "index (nu={nu}, mu={mu}) outside family of size {}x{}",
                self.n_indices, self.m
            )));
        }
        Ok(self.words[nu * self.m as usize + mu])
    }
}

/// Precomputed incidence between `T_R` and `T_S` for one joint type.
#[derive(Debug, Clone)]
pub struct CoveringContext {
    pub joint_type: JointType,
    pub r_size: usize,
    pub s_size: usize,
    /// `|T_T(yⁿ)|`
    pub given_y: u64,
    /// For each `xⁿ` rank in `T_R`, the sorted ranks of `T_T(xⁿ)` within `T_S`.
    pub compatible: Vec<Vec<u32>>,
}

impl CoveringContext {
    pub fn new(t: &JointType, caps: &Caps) -> Result<Self> {
        let r = t.x_marginal();
        let s = t.y_marginal();
        let t_size = multinomial_u128(t.counts()).unwrap_or(u128::MAX);
        if t_size > caps.max_class_size as u128 {
            return Err(Error::cap("joint class size", t_size, caps.max_class_size));
        }
        let s_size = multinomial_u128(s.counts()).unwrap_or(u128::MAX);
        if s_size > u32::MAX as u128 {
            return Err(Error::cap("|T_S|", s_size, u32::MAX));
        }
        let x_words = words_of_type(&r, caps)?;
        let compatible = x_words
            .par_iter()
            .map(|x| {
                let ys = conditional_class_words(t, x, Side::X, caps)?;
                let mut ranks = ys
                    .iter()
                    .map(|y| rank_in_type(y, t.y_size()).map(|v| v as u32))
                    .collect::<Result<Vec<_>>>()?;
                ranks.sort_unstable();
                Ok(ranks)
            })
            .collect::<Result<Vec<_>>>()?;
        let given_y = (0..t.y_size())
            .map(|y| multinomial_u128(&t.column(y)).unwrap_or(u128::MAX))
            .product::<u128>() as u64;
        Ok(Self { joint_type: t.clone(), r_size: x_words.len(), s_size: s_size as usize, given_y, compatible })
    }

    /// Word-count histogram of family `ν` over `T_S`.
    pub fn histogram(&self, family: &CoveringFamily, nu: usize) -> Vec<u32> {
        let mut h = vec![0u32; self.s_size];
        for &w in family.words_of(nu) {
            h[w as usize] += 1;
        }
        h
    }

    /// `K_ν(xⁿ)`: the number of `μ` with `Y_μ ∈ T_T(xⁿ)`, for every `xⁿ ∈ T_R`.
    pub fn incidence(&self, hist: &[u32]) -> Vec<u64> {
        self.compatible
            .iter()
            .map(|ys| ys.iter().map(|y| hist[*y as usize] as u64).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    /// Per `ν`: `ε − max_x |K_ν(x)·|T_R| / (M·|T_T(y)|) − 1|`.
    pub condition_i_margin: Vec<f64>,
    /// `ε − max_y |count(y)·|T_S| / (NM) − 1|`.
    pub condition_ii_margin: f64,
    pub passed: bool,
}

impl CoveringCheck {
    pub fn min_condition_i_margin(&self) -> f64 {
        self.condition_i_margin.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn verify_covering(family: &CoveringFamily, ctx: &CoveringContext) -> Result<CoveringCheck> {
    if family.joint_type != ctx.joint_type {
        return Err(Error::InvalidInput("context built for a different joint type".into()));
    }
    let eps = family.epsilon;
    let scale_i = ctx.r_size as f64 / (family.m as f64 * ctx.given_y as f64);
    let per_nu: Vec<(f64, Vec<u32>)> = (0..family.n_indices as usize)
        .into_par_iter()
        .map(|nu| {
            let hist = ctx.histogram(family, nu);
            let worst = ctx
                .incidence(&hist)
                .iter()
                .map(|k| (*k as f64 * scale_i - 1.0).abs())
                .fold(0.0f64, f64::max);
            (eps - worst, hist)
        })
        .collect();
    let mut total = vec![0u64; ctx.s_size];
    for (_, h) in &per_nu {
        for (t, c) in total.iter_mut().zip(h) {
            *t += *c as u64;
        }
    }
    let scale_ii = ctx.s_size as f64 / (family.n_indices as f64 * family.m as f64);
    let worst_ii = total.iter().map(|c| (*c as f64 * scale_ii - 1.0).abs()).fold(0.0f64, f64::max);
    let condition_i_margin: Vec<f64> = per_nu.into_iter().map(|(m, _)| m).collect();
    let condition_ii_margin = eps - worst_ii;
    // relative slack is exact in rationals; allow float noise on the boundary
    let passed = condition_i_margin.iter().all(|m| *m >= -1e-12) && condition_ii_margin >= -1e-12;
    Ok(CoveringCheck { condition_i_margin, condition_ii_margin, passed })
}

/// Draws (and in the sampling modes verifies) a covering family.
///
/// Attempt `a` draws the words of index `ν` from the stream
/// `seed::rng(master, "covering/<T>/<a>", ν)`, so the result does not
/// depend on scheduling.
pub fn build_covering(
    ctx: &CoveringContext,
    epsilon: f64,
    mode: CoveringMode,
    master_seed: u64,
    max_retries: u32,
    caps: &Caps,
) -> Result<(CoveringFamily, CoveringCheck)> {
    check_epsilon(epsilon)?;
    let t = &ctx.joint_type;
    let s_size = ctx.s_size as u64;
    let (m, n) = match mode {
        CoveringMode::Guaranteed if s_size == 1 => (1, 1),
        CoveringMode::Guaranteed => {
            let req = required_m_n(t, epsilon)?;
            (req.m, req.n)
        }
        CoveringMode::Sized { m, n } => (m, n),
        CoveringMode::Saturated { n } => (s_size, n),
    };
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("covering sizes must be positive".into()));
    }
    let total = (m as u128) * (n as u128);
    if total > caps.max_code_words as u128 {
        return Err(Error::cap("covering words", total, caps.max_code_words));
    }

    if let CoveringMode::Saturated { .. } = mode {
        let words: Vec<u32> = (0..n).flat_map(|_| 0..s_size as u32).collect();
        let family = CoveringFamily { joint_type: t.clone(), epsilon, n_indices: n, m, words, retries: 0 };
        let check = verify_covering(&family, ctx)?;
        return Ok((family, check));
    }

    let label_base = format!("covering/{t}");
    let mut last = None;
    for attempt in 0..=max_retries {
        let label = format!("{label_base}/{attempt}");
        let mut words = vec![0u32; total as usize];
        words.par_chunks_mut(m as usize).enumerate().for_each(|(nu, chunk)| {
            let mut rng = seed::rng(master_seed, &label, nu as u64);
            for w in chunk.iter_mut() {
                *w = rng.random_range(0..s_size) as u32;
            }
        });
        let family = CoveringFamily { joint_type: t.clone(), epsilon, n_indices: n, m, words, retries: attempt };
        let check = verify_covering(&family, ctx)?;
        if check.passed {
            return Ok((family, check));
        }
        last = Some(check);
    }
    let last = last.expect("at least one attempt");
    Err(Error::RetriesExhausted {
        attempts: max_retries + 1,
        reason: format!(
            "covering for type {t} with M={m}, N={n}: min (I) margin {:.4}, (II) margin {:.4}",
            last.min_condition_i_margin(),
            last.condition_ii_margin
        ),
    })
}

/// Unranks a stored word.
pub fn family_word(family: &CoveringFamily, nu: usize, mu: usize) -> Result<Vec<usize>> {
    unrank_in_type(&family.joint_type.y_marginal(), family.word(nu, mu)? as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(s: &str) -> CoveringContext {
        CoveringContext::new(&JointType::parse(s).unwrap(), &Caps::default()).unwrap()
    }

    #[test]
    fn sampling_bound_values() {
        let b = sampling_failure_bound(2.0, 1000.0, 0.1, 0.5).unwrap();
        let oracle = 4.0 * 2f64.powf(-1000.0 * 0.01 * 0.5 / (2.0 * 2f64.ln()));
        assert!((b - oracle).abs() < 1e-15);
        assert!(sampling_failure_bound(2.0, 1e7, 0.1, 0.5).unwrap() < 1e-300);
        let m = sampling_threshold_m(1.0, 0.49, 1.0).unwrap();
        assert!((sampling_failure_bound(1.0, m, 0.49, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(sampling_failure_bound(1.0, 1.0, 0.5, 1.0).is_err());
        assert!(sampling_failure_bound(1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn required_sizes_satisfy_both_inequalities() {
        let t = JointType::parse("2,0;0,2").unwrap();
        let req = required_m_n(&t, 0.1).unwrap();
        // |T_R| = |T_S| = |T_T| = 6
        let a = 2.0 * LN_2 / 0.01;
        let (m, n) = (req.m as f64, req.n as f64);
        assert!(m > a * 6.0 * (4.0 * n * 6.0).log2());
        assert!(n * m > a * 6.0 * 24f64.log2());
        // minimality: M - 1 with its best N fails
        let m1 = m - 1.0;
        let n1 = (a * 6.0 * 24f64.log2() / m1).floor() + 1.0;
        assert!(m1 <= a * 6.0 * (4.0 * n1 * 6.0).log2());
    }

    #[test]
    fn halving_epsilon_quadruples_m() {
        let t = JointType::parse("1,1;1,1").unwrap();
        let big = required_m_n(&t, 0.2).unwrap();
        let small = required_m_n(&t, 0.1).unwrap();
        assert!(small.m as f64 >= 3.9 * big.m as f64);
    }

    #[test]
    fn saturated_family_has_margin_epsilon() {
        let c = ctx("1,1;1,1");
        let (fam, check) = build_covering(&c, 0.1, CoveringMode::Saturated { n: 2 }, 0, 0, &Caps::default()).unwrap();
        assert_eq!(fam.m, 6);
        assert!(check.passed);
        assert!((check.condition_ii_margin - 0.1).abs() < 1e-12);
        for m in check.condition_i_margin {
            assert!((m - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn guaranteed_family_verifies() {
        let c = ctx("1,1;1,1");
        let (fam, check) = build_covering(&c, 0.1, CoveringMode::Guaranteed, 9, 5, &Caps::default()).unwrap();
        assert!(check.passed);
        assert_eq!(fam.words.len() as u64, fam.m * fam.n_indices);
        let again = build_covering(&c, 0.1, CoveringMode::Guaranteed, 9, 5, &Caps::default()).unwrap().0;
        assert_eq!(fam, again);
    }

    #[test]
    fn tiny_family_exhausts_retries() {
        let c = ctx("1,1;1,1");
        let err = build_covering(&c, 0.1, CoveringMode::Sized { m: 1, n: 1 }, 0, 3, &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::RetriesExhausted { attempts: 4, .. }));
    }

    #[test]
    fn constant_family_fails_condition_ii() {
        let c = ctx("1,1;1,1");
        let fam = CoveringFamily {
            joint_type: c.joint_type.clone(),
            epsilon: 0.1,
            n_indices: 1,
            m: 10,
            words: vec![3; 10],
            retries: 0,
        };
        let check = verify_covering(&fam, &c).unwrap();
        assert!(!check.passed);
        assert!(check.condition_ii_margin < 0.0);
    }

    #[test]
    fn singleton_output_class() {
        // S = (4, 0): one y-word
        let c = ctx("2,0;2,0");
        let (fam, check) = build_covering(&c, 0.1, CoveringMode::Guaranteed, 0, 0, &Caps::default()).unwrap();
        assert_eq!((fam.m, fam.n_indices), (1, 1));
        assert!(check.passed);
        assert_eq!(family_word(&fam, 0, 0).unwrap(), vec![0, 0, 0, 0]);
    }
}
