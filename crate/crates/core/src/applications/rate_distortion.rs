//! Single-letter rate-distortion function and a block code obtained from a
//! channel simulation of the optimal test channel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_dims, Error, Result};
use crate::prob::{mutual_information, Channel, Distribution};
use crate::simulate::{build_sim_code, SharedIndex, SimCode, SimParams};
use crate::types::{index_to_word, word_probability, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionSpec {
    /// `d[x][y] ≥ 0`
    pub d: Vec<Vec<f64>>,
    pub target_d: f64,
}

impl DistortionSpec {
    pub fn new(d: Vec<Vec<f64>>, target_d: f64) -> Result<Self> {
        let width = d.first().map_or(0, Vec::len);
        if d.is_empty() || width == 0 || d.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidInput("distortion matrix must be rectangular and nonempty".into()));
        }
        if d.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("distortion entries must be finite and nonnegative".into()));
        }
        if !(target_d.is_finite() && target_d >= 0.0) {
            return Err(Error::InvalidInput(format!("target distortion must be nonnegative, got {target_d}")));
        }
        Ok(Self { d, target_d })
    }

    pub fn hamming(size: usize, target_d: f64) -> Result<Self> {
        let d = (0..size).map(|x| (0..size).map(|y| if x == y { 0.0 } else { 1.0 }).collect()).collect();
        Self::new(d, target_d)
    }

    pub fn with_target(&self, target_d: f64) -> Result<Self> {
        Self::new(self.d.clone(), target_d)
    }

    fn x_size(&self) -> usize {
        self.d.len()
    }

    fn y_size(&self) -> usize {
        self.d[0].len()
    }

    /// `Σ P(x) W(y|x) d(x,y)`
    pub fn expected(&self, source: &Distribution, w: &Channel) -> f64 {
        let mut s = 0.0;
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                s += source.get(x) * w.get(x, y) * self.d[x][y];
            }
        }
        s
    }

    /// Sum of `d` along a pair of words.
    pub fn word_distortion(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter().zip(y).map(|(a, b)| self.d[*a][*b]).sum()
    }

    /// `Σ P(x) min_y d(x,y)`
    pub fn min_distortion(&self, source: &Distribution) -> f64 {
        (0..self.x_size())
            .map(|x| source.get(x) * self.d[x].iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    fn range(&self) -> f64 {
        let (lo, hi) = self.d.iter().flatten().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        hi - lo
    }
}

fn check(source: &Distribution, spec: &DistortionSpec, y_size: usize) -> Result<()> {
    check_dims("distortion rows vs |X|", spec.x_size(), source.len())?;
    check_dims("distortion columns vs |Y|", spec.y_size(), y_size)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub target_d: f64,
    /// bits per letter
    pub rate: f64,
    pub channel: Channel,
    pub distortion: f64,
    /// Lagrange slope in bits per unit distortion; infinite at the minimum distortion.
    pub beta: f64,
}

const BA_MAX_ITERS: usize = 200_000;

/// Fixed point of `W_x(y) ∝ q(y)·2^(−β d(x,y))`, `q = PW`, from `q`.
/// `β = ∞` restricts each row to the minimizers of `d(x,·)`.
fn blahut_arimoto(source: &Distribution, spec: &DistortionSpec, beta: f64, q: &mut Vec<f64>) -> Channel {
    let xs = spec.x_size();
    let ys = spec.y_size();
    let kernel: Vec<Vec<f64>> = (0..xs)
        .map(|x| {
            let m = spec.d[x].iter().copied().fold(f64::INFINITY, f64::min);
            (0..ys)
                .map(|y| {
                    let gap = spec.d[x][y] - m;
                    if beta.is_infinite() {
                        if gap <= 1e-12 { 1.0 } else { 0.0 }
                    } else {
                        (-beta * gap).exp2()
                    }
                })
                .collect()
        })
        .collect();
    let rows_for = |q: &[f64]| -> Vec<Vec<f64>> {
        kernel
            .iter()
            .map(|k| {
                let row: Vec<f64> = k.iter().zip(q).map(|(a, b)| a * b).collect();
                let z: f64 = row.iter().sum();
                if z > 0.0 {
                    row.into_iter().map(|v| v / z).collect()
                } else {
                    let z: f64 = k.iter().sum();
                    k.iter().map(|v| v / z).collect()
                }
            })
            .collect()
    };
    for _ in 0..BA_MAX_ITERS {
        let rows = rows_for(q);
        let mut next = vec![0.0; ys];
        for (x, r) in rows.iter().enumerate() {
            for (n, v) in next.iter_mut().zip(r) {
                *n += source.get(x) * v;
            }
        }
        let change: f64 = next.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
        *q = next;
        if change < 1e-15 {
            break;
        }
    }
    Channel::new(rows_for(q)).expect("rows are normalized")
}

/// `R(d) = min { I(P;W) : E d(X,Y) ≤ d }` by alternating updates of the
/// channel and its output law at a fixed slope, with bisection on the slope.
pub fn rd_function(source: &Distribution, spec: &DistortionSpec, y_size: usize) -> Result<RdPoint> {
    check(source, spec, y_size)?;
    let target = spec.target_d;
    let d_min = spec.min_distortion(source);
    if target < d_min - 1e-12 {
        return Err(Error::Infeasible(format!("target distortion {target} is below the minimum {d_min}")));
    }
    // a constant output letter is free
    let (best_y, d_max) = (0..y_size)
        .map(|y| (y, (0..source.len()).map(|x| source.get(x) * spec.d[x][y]).sum::<f64>()))
        .fold((0, f64::INFINITY), |acc, (y, v)| if v < acc.1 { (y, v) } else { acc });
    if target >= d_max {
        let w = Channel::constant(source.len(), &Distribution::point_mass(y_size, best_y)?)?;
        return Ok(RdPoint { target_d: target, rate: 0.0, distortion: d_max, channel: w, beta: 0.0 });
    }
    let mut q = vec![1.0 / y_size as f64; y_size];
    let point = |w: Channel, beta: f64| -> Result<RdPoint> {
        Ok(RdPoint { target_d: target, rate: mutual_information(source, &w)?, distortion: spec.expected(source, &w), channel: w, beta })
    };
    if target <= d_min + 1e-12 {
        let w = blahut_arimoto(source, spec, f64::INFINITY, &mut q);
        return point(w, f64::INFINITY);
    }
    let mut hi = 1.0;
    let mut w_hi = blahut_arimoto(source, spec, hi, &mut q);
    while spec.expected(source, &w_hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            let w = blahut_arimoto(source, spec, f64::INFINITY, &mut q);
            return point(w, f64::INFINITY);
        }
        w_hi = blahut_arimoto(source, spec, hi, &mut q);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut qm = q.clone();
        let w = blahut_arimoto(source, spec, mid, &mut qm);
        if spec.expected(source, &w) > target {
            lo = mid;
        } else {
            hi = mid;
            w_hi = w;
            q = qm;
        }
    }
    point(w_hi, hi)
}

/// `R(d)` at several targets, in parallel.
pub fn rd_curve(source: &Distribution, spec: &DistortionSpec, y_size: usize, targets: &[f64]) -> Result<Vec<RdPoint>> {
    targets
        .par_iter()
        .map(|t| rd_function(source, &spec.with_target(*t)?, y_size))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOracle {
    pub rate: f64,
    pub channel: Channel,
    pub evaluated: u64,
}

fn simplex_offsets(dim: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim - 1 {
        out = out.into_iter().flat_map(|v| (-m..=m).map(move |k| [v.clone(), vec![k]].concat())).collect();
    }
    out.into_iter()
        .map(|mut v| {
            let s: i64 = v.iter().sum();
            v.push(-s);
            v
        })
        .collect()
}

fn simplex_points(dim: usize, r: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::<usize>::new(), r)];
    while let Some((cur, left)) = stack.pop() {
        if cur.len() == dim - 1 {
            let mut v: Vec<f64> = cur.iter().map(|k| *k as f64 / r as f64).collect();
            v.push(left as f64 / r as f64);
            out.push(v);
            continue;
        }
        for k in 0..=left {
            let mut c = cur.clone();
            c.push(k);
            stack.push((c, left - k));
        }
    }
    out
}

/// Independent check of [`rd_function`]: grid search over channel rows at
/// the given resolution, then repeated local grids of shrinking pitch around
/// the best feasible point. Every evaluated channel is feasible, so the
/// result is an upper bound on `R(d)`.
pub fn rd_grid_oracle(
    source: &Distribution,
    spec: &DistortionSpec,
    resolution: usize,
    refinements: usize,
    caps: &Caps,
) -> Result<GridOracle> {
    let xs = spec.x_size();
    let ys = spec.y_size();
    check_dims("distortion rows vs |X|", xs, source.len())?;
    if resolution == 0 || ys < 2 {
        return Err(Error::InvalidInput("oracle needs resolution >= 1 and |Y| >= 2".into()));
    }
    let row_grid = simplex_points(ys, resolution);
    let total = (row_grid.len() as u128).checked_pow(xs as u32).unwrap_or(u128::MAX);
    if total > caps.oracle_grid_points as u128 {
        return Err(Error::cap("rate-distortion oracle grid points", total, caps.oracle_grid_points));
    }
    let eval = |rows: &[Vec<f64>]| -> Option<f64> {
        let w = Channel::new(rows.to_vec()).ok()?;
        if spec.expected(source, &w) > spec.target_d {
            return None;
        }
        mutual_information(source, &w).ok()
    };
    let search = |choices: &[Vec<Vec<f64>>]| -> Option<(f64, Vec<Vec<f64>>)> {
        let count: usize = choices.iter().map(Vec::len).product();
        (0..count)
            .into_par_iter()
            .filter_map(|mut i| {
                let rows: Vec<Vec<f64>> = choices
                    .iter()
                    .map(|c| {
                        let r = c[i % c.len()].clone();
                        i /= c.len();
                        r
                    })
                    .collect();
                eval(&rows).map(|v| (v, rows))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
    };
    let base: Vec<Vec<Vec<f64>>> = vec![row_grid; xs];
    let (mut best, mut rows) =
        search(&base).ok_or_else(|| Error::Infeasible("no grid channel meets the distortion target".into()))?;
    let mut evaluated = total as u64;
    let mut pitch = 1.0 / resolution as f64;
    let steps = 8;
    let local = (2 * steps + 1) as u128;
    let per_level = local.pow(((ys - 1) * xs) as u32);
    if refinements > 0 && per_level > caps.oracle_grid_points as u128 {
        return Err(Error::cap("rate-distortion oracle refinement points", per_level, caps.oracle_grid_points));
    }
    let offsets = simplex_offsets(ys, steps);
    for _ in 0..refinements {
        pitch /= 4.0;
        let choices: Vec<Vec<Vec<f64>>> = rows
            .iter()
            .map(|r| {
                offsets
                    .iter()
                    .map(|o| r.iter().zip(o).map(|(v, k)| v + *k as f64 * pitch).collect::<Vec<f64>>())
                    .filter(|v| v.iter().all(|p| *p >= 0.0 && *p <= 1.0))
                    .collect()
            })
            .collect();
        evaluated += choices.iter().map(|c| c.len() as u64).product::<u64>();
        if let Some((v, r)) = search(&choices) {
            if v < best {
                best = v;
                rows = r;
            }
        }
    }
    Ok(GridOracle { rate: best, channel: Channel::new(rows)?, evaluated })
}

/// A deterministic block code selected from a channel simulation of the
/// optimal test channel.
#[derive(Debug, Clone, Serialize)]
pub struct RdCode {
    pub rd: RdPoint,
    #[serde(skip)]
    pub code: SimCode,
    /// The shared index minimizing the expected distortion.
    pub selected: SharedIndex,
    /// Per-letter expected distortion of the simulation, averaged over the shared index.
    pub distortion_mean: f64,
    /// Same with the shared index fixed to `selected`.
    pub distortion_selected: f64,
    /// Per-letter expected distortion of the deterministic encoder.
    pub distortion: f64,
    /// `global TV error × (max d − min d)`: bound on `distortion_mean − E d` under the test channel.
    pub slack: f64,
    pub global_err: f64,
    /// Per `xⁿ` in word-index order: `(type index, μ)`, or `None` for the terminate message.
    pub encoder: Vec<Option<(usize, u64)>>,
    /// Nominal code rate `(log₂ max M + announcement bits)/n`.
    pub rate: f64,
    pub cr_rate: f64,
    pub used_messages: u64,
    /// `log₂(messages used)/n`
    pub used_rate: f64,
    /// `R(distortion)`, a lower bound on `used_rate`.
    pub converse_rate: f64,
}

impl RdCode {
    pub fn decode(&self, x_index: usize) -> Result<Word> {
        match self.encoder.get(x_index) {
            Some(Some((ti, mu))) => self.code.decode(*ti, self.selected.0[*ti], *mu),
            Some(None) => Ok(self.code.fallback_word()),
            None => Err(Error::InvalidInput(format!("input index {x_index} outside the code"))),
        }
    }
}

/// Simulates the optimal test channel, picks the shared index with the
/// smallest expected distortion, then lets the encoder send the best
/// available message for each input, which can only lower the distortion.
pub fn rd_code_via_simulation(
    source: &Distribution,
    spec: &DistortionSpec,
    y_size: usize,
    params: &SimParams,
    caps: &Caps,
) -> Result<RdCode> {
    let rd = rd_function(source, spec, y_size)?;
    let code = build_sim_code(source, &rd.channel, params, caps)?;
    let n = params.n;
    let xs = source.len();
    let x_space = caps.word_space(xs, n)? as usize;
    let fallback = code.fallback_word();
    let sizes = code.index_sizes();

    // per type and list index: contribution to the expected block distortion
    let rows = (0..x_space)
        .into_par_iter()
        .map(|i| -> Result<(f64, Vec<(usize, Vec<f64>)>)> {
            let x = index_to_word(i, xs, n);
            let px = word_probability(source, &x);
            if px == 0.0 {
                return Ok((0.0, Vec::new()));
            }
            let d_fb = spec.word_distortion(&x, &fallback);
            let mut in_code = 0.0;
            let mut parts = Vec::new();
            for &ti in code.types_for_input(&x)? {
                let p = code.type_draw_probability(ti, &x)?;
                if p == 0.0 {
                    continue;
                }
                in_code += p;
                let compat = code.compatible_ranks(ti, &x)?;
                let dist: Vec<f64> = compat
                    .iter()
                    .map(|r| code.stored_word(ti, *r).map(|y| spec.word_distortion(&x, y)))
                    .collect::<Result<_>>()?;
                let per_nu = (0..sizes[ti] as usize)
                    .map(|nu| {
                        let h = code.list_histogram(ti, nu)?;
                        let (mut k, mut s) = (0u64, 0.0);
                        for (r, d) in compat.iter().zip(&dist) {
                            let c = h[*r as usize] as u64;
                            k += c;
                            s += c as f64 * d;
                        }
                        Ok(px * p * if k == 0 { d_fb } else { s / k as f64 })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                parts.push((ti, per_nu));
            }
            Ok((px * (1.0 - in_code).max(0.0) * d_fb, parts))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut constant = 0.0;
    let mut contrib: Vec<Vec<f64>> = sizes.iter().map(|s| vec![0.0; *s as usize]).collect();
    for (c, parts) in rows {
        constant += c;
        for (ti, per_nu) in parts {
            for (a, b) in contrib[ti].iter_mut().zip(per_nu) {
                *a += b;
            }
        }
    }
    let mut selected = Vec::with_capacity(contrib.len());
    let (mut mean, mut best) = (constant, constant);
    for c in &contrib {
        let (arg, min) = c.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
        selected.push(arg as u32);
        best += min;
        mean += c.iter().sum::<f64>() / c.len() as f64;
    }
    let selected = SharedIndex(selected);

    // deterministic encoder over the selected lists; ties keep the first message
    let choices = (0..x_space)
        .into_par_iter()
        .map(|i| -> Result<(f64, Option<(usize, u64)>)> {
            let x = index_to_word(i, xs, n);
            let mut best: (f64, Option<(usize, u64)>) = (spec.word_distortion(&x, &fallback), None);
            for &ti in code.types_for_input(&x)? {
                let nu = selected.0[ti] as usize;
                for (mu, r) in code.family(ti).words_of(nu).iter().enumerate() {
                    let d = spec.word_distortion(&x, code.stored_word(ti, *r)?);
                    if d < best.0 - 1e-12 {
                        best = (d, Some((ti, mu as u64)));
                    }
                }
            }
            Ok((word_probability(source, &x) * best.0, best.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let distortion = choices.iter().map(|c| c.0).sum::<f64>() / n as f64;
    let encoder: Vec<Option<(usize, u64)>> = choices.into_iter().map(|c| c.1).collect();
    let mut used: Vec<&Option<(usize, u64)>> = encoder.iter().collect();
    used.sort_unstable();
    used.dedup();
    let used_messages = used.len() as u64;

    let fidelity = code.strong_fidelity(caps)?;
    let acc = code.accounting()?;
    let converse_rate = rd_function(source, &spec.with_target(distortion.max(spec.min_distortion(source)))?, y_size)?.rate;
    Ok(RdCode {
        distortion_mean: mean / n as f64,
        distortion_selected: best / n as f64,
        distortion,
        slack: fidelity.global_err * spec.range(),
        global_err: fidelity.global_err,
        rate: acc.rate,
        cr_rate: acc.cr_rate,
        used_messages,
        used_rate: (used_messages as f64).log2() / n as f64,
        converse_rate,
        rd,
        code,
        selected,
        encoder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    fn half() -> Distribution {
        Distribution::bernoulli(0.5).unwrap()
    }

    #[test]
    fn zero_distortion_needs_full_entropy() {
        let p = Distribution::new(vec![0.2, 0.8]).unwrap();
        let r = rd_function(&p, &DistortionSpec::hamming(2, 0.0).unwrap(), 2).unwrap();
        assert!((r.rate - binary_entropy(0.2)).abs() < 1e-9);
    }

    #[test]
    fn large_distortion_is_free() {
        let r = rd_function(&half(), &DistortionSpec::hamming(2, 0.5).unwrap(), 2).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.distortion <= 0.5);
    }

    #[test]
    fn binary_hamming_curve() {
        for d in [0.05, 0.1, 0.25, 0.4] {
            let r = rd_function(&half(), &DistortionSpec::hamming(2, d).unwrap(), 2).unwrap();
            assert!((r.rate - (1.0 - binary_entropy(d))).abs() < 1e-7, "d={d}: {}", r.rate);
            assert!(r.distortion <= d + 1e-12 && r.distortion >= d - 1e-6);
        }
    }

    #[test]
    fn below_minimum_is_infeasible() {
        let spec = DistortionSpec::new(vec![vec![0.5, 1.0], vec![1.0, 0.5]], 0.2).unwrap();
        assert!(matches!(rd_function(&half(), &spec, 2), Err(Error::Infeasible(_))));
    }

    #[test]
    fn grid_oracle_upper_bounds() {
        let spec = DistortionSpec::hamming(2, 0.1).unwrap();
        let o = rd_grid_oracle(&half(), &spec, 200, 6, &Caps::default()).unwrap();
        let exact = 1.0 - binary_entropy(0.1);
        assert!(o.rate >= exact - 1e-12 && o.rate - exact < 1e-4, "{}", o.rate);
    }

    #[test]
    fn offsets_sum_to_zero() {
        let o = simplex_offsets(3, 2);
        assert_eq!(o.len(), 25);
        assert!(o.iter().all(|v| v.iter().sum::<i64>() == 0));
        assert_eq!(simplex_points(3, 4).len(), 15);
    }
}
