//! Exact types, joint types, type classes and typical sets.
//!
//! Words are symbol vectors (`Vec<usize>`). A word space `A^n` is indexed so
//! that numeric order equals lexicographic order (position 0 most
//! significant); the all-zero word has index 0.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_dims, Error, Result};
use crate::prob::{entropy_of, Channel, Distribution};

pub type Word = Vec<usize>;

/// Slack applied to typicality windows so that counts sitting exactly on a
/// window edge are not lost to rounding.
pub const WINDOW_SLACK: f64 = 1e-9;

/// Empirical count vector of a length-`n` word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ExactType {
    counts: Vec<u32>,
}

impl TryFrom<Vec<u32>> for ExactType {
    type Error = Error;
    fn try_from(counts: Vec<u32>) -> Result<Self> {
        ExactType::new(counts)
    }
}

impl From<ExactType> for Vec<u32> {
    fn from(t: ExactType) -> Self {
        t.counts
    }
}

impl ExactType {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidInput("type over an empty alphabet".into()));
        }
        if counts.iter().all(|c| *c == 0) {
            return Err(Error::InvalidInput("type of block length 0".into()));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.iter().map(|c| *c as usize).sum()
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn distribution(&self) -> Distribution {
        let n = self.n() as f64;
        Distribution::new(self.counts.iter().map(|c| *c as f64 / n).collect())
            .expect("counts/n is stochastic")
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(self.distribution().probs())
    }
}

/// Joint count matrix over `X × Y`, row-major. Orders lexicographically on
/// the flattened counts (for equal shapes).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "JointTypeRepr", into = "JointTypeRepr")]
pub struct JointType {
    x_size: usize,
    y_size: usize,
    counts: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct JointTypeRepr {
    counts: Vec<Vec<u32>>,
}

impl TryFrom<JointTypeRepr> for JointType {
    type Error = Error;
    fn try_from(r: JointTypeRepr) -> Result<Self> {
        JointType::from_rows(r.counts)
    }
}

impl From<JointType> for JointTypeRepr {
    fn from(t: JointType) -> Self {
        JointTypeRepr { counts: t.counts.chunks(t.y_size).map(<[u32]>::to_vec).collect() }
    }
}

impl fmt::Display for JointType {
    /// Rows separated by `;`, cells by `,`, e.g. `2,0;1,1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .counts
            .chunks(self.y_size)
            .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl JointType {
    pub fn new(x_size: usize, y_size: usize, counts: Vec<u32>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidInput("joint type over an empty alphabet".into()));
        }
        check_dims("joint type cells", counts.len(), x_size * y_size)?;
        if counts.iter().all(|c| *c == 0) {
            return Err(Error::InvalidInput("joint type of block length 0".into()));
        }
        Ok(Self { x_size, y_size, counts })
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let x_size = rows.len();
        let y_size = rows.first().map(Vec::len).unwrap_or(0);
        for r in &rows {
            check_dims("joint type row length", r.len(), y_size)?;
        }
        Self::new(x_size, y_size, rows.concat())
    }

    /// Parses the [`Display`](fmt::Display) form `a,b;c,d`.
    pub fn parse(s: &str) -> Result<Self> {
        let rows = s
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::InvalidInput(format!("bad joint type cell '{c}'")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Joint type of a pair of words.
    pub fn of_words(x_word: &[usize], y_word: &[usize], x_size: usize, y_size: usize) -> Result<Self> {
        check_dims("word lengths", x_word.len(), y_word.len())?;
        let mut counts = vec![0u32; x_size * y_size];
        for (&x, &y) in x_word.iter().zip(y_word) {
            if x >= x_size || y >= y_size {
                return Err(Error::InvalidInput(format!("symbol pair ({x},{y}) out of range")));
            }
            counts[x * y_size + y] += 1;
        }
        Self::new(x_size, y_size, counts)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn n(&self) -> usize {
        self.counts.iter().map(|c| *c as usize).sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.counts[x * self.y_size + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.counts[x * self.y_size..(x + 1) * self.y_size]
    }

    pub fn column(&self, y: usize) -> Vec<u32> {
        (0..self.x_size).map(|x| self.get(x, y)).collect()
    }

    pub fn x_marginal(&self) -> ExactType {
        ExactType { counts: (0..self.x_size).map(|x| self.row(x).iter().sum()).collect() }
    }

    pub fn y_marginal(&self) -> ExactType {
        ExactType { counts: (0..self.y_size).map(|y| self.column(y).iter().sum()).collect() }
    }

    /// The channel `Z` with `T(x, y) = R(x) Z(y|x)`; rows with `R(x) = 0` are uniform.
    pub fn conditional_channel(&self) -> Channel {
        let rows = (0..self.x_size)
            .map(|x| {
                let row = self.row(x);
                let total: u32 = row.iter().sum();
                if total == 0 {
                    vec![1.0 / self.y_size as f64; self.y_size]
                } else {
                    row.iter().map(|c| *c as f64 / total as f64).collect()
                }
            })
            .collect();
        Channel::new(rows).expect("count rows are stochastic")
    }

    /// `H(Z|R)` in bits.
    pub fn conditional_entropy(&self) -> f64 {
        let n = self.n() as f64;
        (0..self.x_size)
            .map(|x| {
                let total: u32 = self.row(x).iter().sum();
                if total == 0 {
                    0.0
                } else {
                    let probs: Vec<f64> = self.row(x).iter().map(|c| *c as f64 / total as f64).collect();
                    total as f64 / n * entropy_of(&probs)
                }
            })
            .sum()
    }

    /// `I(R;Z)` in bits.
    pub fn mutual_information(&self) -> f64 {
        self.y_marginal().entropy() - self.conditional_entropy()
    }
}

/// Parameters of the typical set `{xⁿ : |N(x|xⁿ) − nP(x)| ≤ δ√n σ_x ∀x}`
/// with `σ_x = sqrt(P(x)(1 − P(x)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSpec {
    pub p: Distribution,
    pub n: usize,
    pub delta: f64,
}

impl TypicalSpec {
    pub fn new(p: Distribution, n: usize, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("block length must be positive".into()));
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidInput(format!("delta must be >= 0, got {delta}")));
        }
        Ok(Self { p, n, delta })
    }

    pub fn sigma(&self, x: usize) -> f64 {
        let p = self.p.get(x);
        (p * (1.0 - p)).sqrt()
    }

    /// Half-width of the admissible count window for symbol `x`.
    pub fn window(&self, x: usize) -> f64 {
        self.delta * (self.n as f64).sqrt() * self.sigma(x)
    }

    pub fn admits_count(&self, x: usize, count: u32) -> bool {
        (count as f64 - self.n as f64 * self.p.get(x)).abs() <= self.window(x) + WINDOW_SLACK
    }

    pub fn admits(&self, t: &ExactType) -> bool {
        t.alphabet_size() == self.p.len()
            && t.n() == self.n
            && t.counts().iter().enumerate().all(|(x, c)| self.admits_count(x, *c))
    }
}

/// Conditional typicality of a joint type: for every `x` and `y`,
/// `|N(x,y) − N(x) W(y|x)| ≤ δ √N(x) σ_{xy}` with `σ_{xy} = sqrt(W(y|x)(1 − W(y|x)))`.
pub fn is_conditionally_typical(t: &JointType, w: &Channel, delta: f64) -> bool {
    if t.x_size() != w.input_size() || t.y_size() != w.output_size() {
        return false;
    }
    (0..t.x_size()).all(|x| {
        let nx: u32 = t.row(x).iter().sum();
        (0..t.y_size()).all(|y| {
            let wy = w.get(x, y);
            let window = delta * (nx as f64).sqrt() * (wy * (1.0 - wy)).sqrt();
            (t.get(x, y) as f64 - nx as f64 * wy).abs() <= window + WINDOW_SLACK
        })
    })
}

pub fn count_occurrences(word: &[usize], alphabet_size: usize) -> Result<ExactType> {
    if word.is_empty() {
        return Err(Error::InvalidInput("word of length 0".into()));
    }
    let mut counts = vec![0u32; alphabet_size];
    for &s in word {
        if s >= alphabet_size {
            return Err(Error::InvalidInput(format!("symbol {s} outside alphabet {alphabet_size}")));
        }
        counts[s] += 1;
    }
    ExactType::new(counts)
}

/// Words of a different length, or with out-of-range symbols, are not typical.
pub fn is_typical(word: &[usize], spec: &TypicalSpec) -> bool {
    word.len() == spec.n
        && count_occurrences(word, spec.p.len()).map(|t| spec.admits(&t)).unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalBounds {
    /// `1 − |X|/δ²`; `−∞` when `δ = 0`.
    pub chebyshev: f64,
    /// `1 − |X|·2^(−δ²)`.
    pub chernoff: f64,
    /// `Pⁿ(typical set)`.
    pub exact: f64,
}

/// The two closed-form lower bounds on the typical-set probability and its
/// exact value.
///
/// The exact value is `n! Σ Π_x P(x)^{r_x} / r_x!` over admissible count
/// vectors `r`; the window constraint is per-symbol, so the sum factorizes
/// into a convolution over symbols indexed by the running total.
pub fn typical_probability_bounds(spec: &TypicalSpec) -> TypicalBounds {
    let a = spec.p.len() as f64;
    let d2 = spec.delta * spec.delta;
    let chebyshev = if spec.delta == 0.0 { f64::NEG_INFINITY } else { 1.0 - a / d2 };
    let chernoff = 1.0 - a * (-d2).exp2();

    let n = spec.n;
    let mut ln_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    // acc[m] = Σ over admissible counts of the first symbols summing to m of Π p^r / r!
    let mut acc = vec![0.0f64; n + 1];
    acc[0] = 1.0;
    for x in 0..spec.p.len() {
        let px = spec.p.get(x);
        let terms: Vec<(usize, f64)> = (0..=n)
            .filter(|r| spec.admits_count(x, *r as u32))
            .filter_map(|r| {
                if px == 0.0 {
                    (r == 0).then_some((0, 1.0))
                } else {
                    Some((r, (r as f64 * px.ln() - ln_fact[r]).exp()))
                }
            })
            .collect();
        let mut next = vec![0.0f64; n + 1];
        for (m, v) in acc.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            for &(r, t) in &terms {
                if m + r <= n {
                    next[m + r] += v * t;
                }
            }
        }
        acc = next;
    }
    let exact = (acc[n] * ln_fact[n].exp()).min(1.0);
    TypicalBounds { chebyshev, chernoff, exact }
}

/// `n! / Π counts!`.
pub fn multinomial(counts: &[u32]) -> BigUint {
    let mut result = BigUint::one();
    let mut total: u64 = 0;
    for &c in counts {
        // multiply by C(total + c, c) incrementally
        for k in 1..=c as u64 {
            total += 1;
            result *= total;
            result /= k;
        }
    }
    result
}

/// Exact multinomial in `u128`, `None` on overflow.
pub fn multinomial_u128(counts: &[u32]) -> Option<u128> {
    let mut result: u128 = 1;
    let mut total: u128 = 0;
    for &c in counts {
        for k in 1..=c as u128 {
            total += 1;
            result = result.checked_mul(total)? / k;
        }
    }
    Some(result)
}

pub fn log2_multinomial(counts: &[u32]) -> f64 {
    let lf = |m: u64| (1..=m).map(|k| (k as f64).log2()).sum::<f64>();
    let n: u64 = counts.iter().map(|c| *c as u64).sum();
    lf(n) - counts.iter().map(|c| lf(*c as u64)).sum::<f64>()
}

/// `|T^n_R|`.
pub fn type_class_size(t: &ExactType) -> BigUint {
    multinomial(t.counts())
}

/// `|T^n_T|`, the number of word pairs with joint type `T`.
pub fn joint_class_size(t: &JointType) -> BigUint {
    multinomial(t.counts())
}

/// `|T^n_T(xⁿ)| = Π_x multinomial(row x)`; depends on `xⁿ` only through its type.
pub fn conditional_type_class_size(t: &JointType, x_word: &[usize]) -> Result<BigUint> {
    let r = count_occurrences(x_word, t.x_size())?;
    if r != t.x_marginal() {
        return Err(Error::InvalidInput(format!(
            "word type {:?} differs from the joint type's X marginal {:?}",
            r.counts(),
            t.x_marginal().counts()
        )));
    }
    Ok(conditional_size_given_x(t))
}

pub fn conditional_size_given_x(t: &JointType) -> BigUint {
    (0..t.x_size()).map(|x| multinomial(t.row(x))).product()
}

pub fn conditional_size_given_y(t: &JointType) -> BigUint {
    (0..t.y_size()).map(|y| multinomial(&t.column(y))).product()
}

/// Compositions of `total` into `parts` nonnegative parts, lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(remaining - v, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// All exact `n`-types over an alphabet, lexicographic.
pub fn enumerate_exact_types(n: usize, alphabet_size: usize, caps: &Caps) -> Result<Vec<ExactType>> {
    if n == 0 || alphabet_size == 0 {
        return Err(Error::InvalidInput("n and alphabet size must be positive".into()));
    }
    let count = binomial_u128((n + alphabet_size - 1) as u64, (alphabet_size - 1) as u64);
    if count > caps.max_joint_types as u128 {
        return Err(Error::cap("number of exact types", count, caps.max_joint_types));
    }
    Ok(compositions(n as u32, alphabet_size).into_iter().map(|counts| ExactType { counts }).collect())
}

/// All joint `n`-types on `X × Y`, optionally restricted to a given X
/// marginal; canonical lexicographic order on count matrices.
pub fn enumerate_joint_types(
    n: usize,
    x_size: usize,
    y_size: usize,
    base: Option<&ExactType>,
    caps: &Caps,
) -> Result<Vec<JointType>> {
    if n == 0 || x_size == 0 || y_size == 0 {
        return Err(Error::InvalidInput("n and alphabet sizes must be positive".into()));
    }
    if n > caps.max_n {
        return Err(Error::cap("n", n, caps.max_n));
    }
    if x_size * y_size > caps.max_joint_cells {
        return Err(Error::cap("|X||Y|", x_size * y_size, caps.max_joint_cells));
    }
    match base {
        None => {
            let count = binomial_u128((n + x_size * y_size - 1) as u64, (x_size * y_size - 1) as u64);
            if count > caps.max_joint_types as u128 {
                return Err(Error::cap("number of joint types", count, caps.max_joint_types));
            }
            Ok(compositions(n as u32, x_size * y_size)
                .into_iter()
                .map(|counts| JointType { x_size, y_size, counts })
                .collect())
        }
        Some(r) => {
            check_dims("base type alphabet", r.alphabet_size(), x_size)?;
            check_dims("base type length", r.n(), n)?;
            let per_row: Vec<Vec<Vec<u32>>> = r.counts().iter().map(|c| compositions(*c, y_size)).collect();
            let count = per_row.iter().map(|v| v.len() as u128).product::<u128>();
            if count > caps.max_joint_types as u128 {
                return Err(Error::cap("number of joint types", count, caps.max_joint_types));
            }
            let mut out = vec![Vec::new()];
            for rows in &per_row {
                out = out
                    .into_iter()
                    .flat_map(|prefix: Vec<u32>| {
                        rows.iter().map(move |row| {
                            let mut v = prefix.clone();
                            v.extend_from_slice(row);
                            v
                        })
                    })
                    .collect();
            }
            Ok(out.into_iter().map(|counts| JointType { x_size, y_size, counts }).collect())
        }
    }
}

/// A uniformly random member of `T^n_T(xⁿ)`: within each block of positions
/// carrying the same x-symbol, the y-symbols of the corresponding row of `T`
/// are placed by a uniform shuffle.
pub fn sample_conditional_type_word<R: Rng + ?Sized>(t: &JointType, x_word: &[usize], rng: &mut R) -> Result<Word> {
    let r = count_occurrences(x_word, t.x_size())?;
    if r != t.x_marginal() {
        return Err(Error::InvalidInput("conditional type class of this word is empty".into()));
    }
    let mut y_word = vec![0usize; x_word.len()];
    for x in 0..t.x_size() {
        let positions: Vec<usize> = (0..x_word.len()).filter(|&k| x_word[k] == x).collect();
        let mut symbols: Vec<usize> =
            (0..t.y_size()).flat_map(|y| std::iter::repeat_n(y, t.get(x, y) as usize)).collect();
        symbols.shuffle(rng);
        for (k, s) in positions.into_iter().zip(symbols) {
            y_word[k] = s;
        }
    }
    Ok(y_word)
}

/// All words of type `t`, lexicographic.
pub fn words_of_type(t: &ExactType, caps: &Caps) -> Result<Vec<Word>> {
    let size = multinomial_u128(t.counts()).unwrap_or(u128::MAX);
    if size > caps.max_class_size as u128 {
        return Err(Error::cap("type class size", size, caps.max_class_size));
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut remaining = t.counts().to_vec();
    let mut word = Vec::with_capacity(t.n());
    multiset_permutations(&mut remaining, t.n(), &mut word, &mut |w| out.push(w.to_vec()));
    Ok(out)
}

fn multiset_permutations(remaining: &mut [u32], len: usize, word: &mut Word, emit: &mut dyn FnMut(&[usize])) {
    if word.len() == len {
        emit(word);
        return;
    }
    for s in 0..remaining.len() {
        if remaining[s] > 0 {
            remaining[s] -= 1;
            word.push(s);
            multiset_permutations(remaining, len, word, emit);
            word.pop();
            remaining[s] += 1;
        }
    }
}

/// Position of `word` in the lexicographic listing of its type class.
pub fn rank_in_type(word: &[usize], alphabet_size: usize) -> Result<u64> {
    let t = count_occurrences(word, alphabet_size)?;
    let mut remaining = t.counts().to_vec();
    let mut total = multinomial_u128(&remaining)
        .ok_or_else(|| Error::cap("type class size", u128::MAX, u64::MAX))?;
    let mut rank: u128 = 0;
    let mut m = word.len() as u128;
    for &s in word {
        for smaller in 0..s {
            if remaining[smaller] > 0 {
                rank += total * remaining[smaller] as u128 / m;
            }
        }
        total = total * remaining[s] as u128 / m;
        remaining[s] -= 1;
        m -= 1;
    }
    u64::try_from(rank).map_err(|_| Error::cap("rank", rank, u64::MAX))
}

/// Inverse of [`rank_in_type`].
pub fn unrank_in_type(t: &ExactType, rank: u64) -> Result<Word> {
    let mut remaining = t.counts().to_vec();
    let mut total = multinomial_u128(&remaining)
        .ok_or_else(|| Error::cap("type class size", u128::MAX, u64::MAX))?;
    if rank as u128 >= total {
        return Err(Error::InvalidInput(format!("rank {rank} outside type class of size {total}")));
    }
    let mut rank = rank as u128;
    let mut m = t.n() as u128;
    let mut word = Vec::with_capacity(t.n());
    while m > 0 {
        for s in 0..remaining.len() {
            if remaining[s] == 0 {
                continue;
            }
            let block = total * remaining[s] as u128 / m;
            if rank < block {
                word.push(s);
                total = block;
                remaining[s] -= 1;
                m -= 1;
                break;
            }
            rank -= block;
        }
    }
    Ok(word)
}

/// Which side of a joint type a fixed word lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// All words on the other side that form joint type `t` together with
/// `given`, i.e. `T^n_T(xⁿ)` for `Side::X` and `T^n_T(yⁿ)` for `Side::Y`.
pub fn conditional_class_words(t: &JointType, given: &[usize], side: Side, caps: &Caps) -> Result<Vec<Word>> {
    let (given_size, other_size) = match side {
        Side::X => (t.x_size(), t.y_size()),
        Side::Y => (t.y_size(), t.x_size()),
    };
    let given_type = count_occurrences(given, given_size)?;
    let expected = match side {
        Side::X => t.x_marginal(),
        Side::Y => t.y_marginal(),
    };
    if given_type != expected {
        return Err(Error::InvalidInput("given word does not have the joint type's marginal".into()));
    }
    let cell = |g: usize, o: usize| match side {
        Side::X => t.get(g, o),
        Side::Y => t.get(o, g),
    };
    let size: u128 = (0..given_size)
        .map(|g| multinomial_u128(&(0..other_size).map(|o| cell(g, o)).collect::<Vec<_>>()).unwrap_or(u128::MAX))
        .fold(1u128, |a, b| a.saturating_mul(b));
    if size > caps.max_class_size as u128 {
        return Err(Error::cap("conditional class size", size, caps.max_class_size));
    }
    let groups: Vec<Vec<usize>> =
        (0..given_size).map(|g| (0..given.len()).filter(|&k| given[k] == g).collect()).collect();
    let per_group: Vec<Vec<Word>> = (0..given_size)
        .map(|g| {
            let counts: Vec<u32> = (0..other_size).map(|o| cell(g, o)).collect();
            let mut out = Vec::new();
            let len = counts.iter().sum::<u32>() as usize;
            let mut remaining = counts;
            multiset_permutations(&mut remaining, len, &mut Vec::new(), &mut |w| out.push(w.to_vec()));
            out
        })
        .collect();
    let mut words = vec![vec![0usize; given.len()]];
    for (positions, options) in groups.iter().zip(&per_group) {
        let mut next = Vec::with_capacity(words.len() * options.len());
        for w in &words {
            for fill in options {
                let mut w = w.clone();
                for (pos, s) in positions.iter().zip(fill) {
                    w[*pos] = *s;
                }
                next.push(w);
            }
        }
        words = next;
    }
    words.sort();
    Ok(words)
}

pub fn word_to_index(word: &[usize], alphabet_size: usize) -> usize {
    word.iter().fold(0, |acc, s| acc * alphabet_size + s)
}

pub fn index_to_word(mut index: usize, alphabet_size: usize, n: usize) -> Word {
    let mut word = vec![0; n];
    for k in (0..n).rev() {
        word[k] = index % alphabet_size;
        index /= alphabet_size;
    }
    word
}

/// `Pⁿ(xⁿ)`.
pub fn word_probability(p: &Distribution, word: &[usize]) -> f64 {
    word.iter().map(|s| p.get(*s)).product()
}

/// `Wⁿ(yⁿ|xⁿ)`.
pub fn channel_word_probability(w: &Channel, x_word: &[usize], y_word: &[usize]) -> f64 {
    x_word.iter().zip(y_word).map(|(x, y)| w.get(*x, *y)).product()
}

/// Dense `Wⁿ(·|xⁿ)` over `Yⁿ` in word-index order.
pub fn channel_word_row(w: &Channel, x_word: &[usize]) -> Vec<f64> {
    let ys = w.output_size();
    let mut row = vec![1.0f64];
    for &x in x_word {
        let wx = w.row(x);
        row = row.iter().flat_map(|r| wx.iter().map(move |p| r * p)).collect();
    }
    debug_assert_eq!(row.len(), ys.pow(x_word.len() as u32));
    row
}
