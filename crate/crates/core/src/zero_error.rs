//! Exact factorizations `W = D∘E` through an intermediate alphabet `C` with
//! minimal `H(μ)`, `μ = E(P)`.
//!
//! For fixed `D` the feasible `E` form a product of polytopes `B_x` (one per
//! input letter) and the concave objective is minimized at a vertex of each;
//! [`e_step`] searches those vertices. For fixed `E`, [`d_step`] moves `D`
//! inside its own feasibility polytope to maximize `Σ_c μ_c H(D_c)`, which
//! leaves the objective unchanged but reshapes the next vertex search.
//! [`alternate`] iterates the two.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution as _, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{check_dims, Error, Result};
use crate::linalg::{lstsq, lstsq_full_rank, nnls, null_space};
use crate::prob::{entropy, entropy_of, mutual_information, Channel, Distribution, ZERO_PROB};
use crate::seed;

/// Residual allowed in `D∘E = W`.
pub const FEASIBILITY_TOL: f64 = 1e-7;
const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBound {
    /// `|X||Y| − 1`
    Full,
    /// `|X||Y| − |X| + 1`
    Refined,
}

pub fn intermediate_size_bound(x_size: usize, y_size: usize, variant: SizeBound) -> Result<usize> {
    if x_size == 0 || y_size == 0 {
        return Err(Error::InvalidInput("alphabet sizes must be positive".into()));
    }
    match variant {
        SizeBound::Full => Ok((x_size * y_size - 1).max(1)),
        SizeBound::Refined => {
            if x_size < 2 || y_size < 2 {
                return Err(Error::InvalidInput("the refined bound needs both alphabets of size >= 2".into()));
            }
            Ok(x_size * y_size - x_size + 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroErrorInstance {
    pub source: Distribution,
    pub channel: Channel,
    pub c_max: usize,
}

impl ZeroErrorInstance {
    pub fn new(source: Distribution, channel: Channel, c_max: Option<usize>) -> Result<Self> {
        check_dims("source vs channel input", source.len(), channel.input_size())?;
        let c_max = match c_max {
            Some(c) => c,
            None => intermediate_size_bound(channel.input_size(), channel.output_size(), SizeBound::Full)?,
        };
        if c_max == 0 {
            return Err(Error::InvalidInput("c_max must be positive".into()));
        }
        Ok(Self { source, channel, c_max })
    }

    fn x_size(&self) -> usize {
        self.channel.input_size()
    }

    fn y_size(&self) -> usize {
        self.channel.output_size()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub e: Channel,
    pub d: Channel,
    pub mu: Distribution,
    pub objective: f64,
}

impl Factorization {
    pub fn new(source: &Distribution, e: Channel, d: Channel) -> Result<Self> {
        check_dims("source vs E input", source.len(), e.input_size())?;
        check_dims("E output vs D input", e.output_size(), d.input_size())?;
        let mu = crate::prob::push_forward(source, &e)?;
        let objective = entropy(&mu);
        Ok(Self { e, d, mu, objective })
    }

    /// Nonzero entries of each row of `E`.
    pub fn row_supports(&self) -> Vec<usize> {
        self.e.rows().iter().map(|r| r.iter().filter(|v| **v > ZERO_PROB).count()).collect()
    }

    /// Intermediate symbols used by some input.
    pub fn used_columns(&self) -> usize {
        (0..self.e.output_size())
            .filter(|&c| self.e.rows().iter().any(|r| r[c] > ZERO_PROB))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCheck {
    pub feasible: bool,
    pub residual: f64,
}

pub fn feasible_check(instance: &ZeroErrorInstance, e: &Channel, d: &Channel) -> Result<FeasibilityCheck> {
    check_dims("E input vs |X|", e.input_size(), instance.x_size())?;
    check_dims("E output vs D input", e.output_size(), d.input_size())?;
    check_dims("D output vs |Y|", d.output_size(), instance.y_size())?;
    let mut residual = 0.0f64;
    for x in 0..instance.x_size() {
        for y in 0..instance.y_size() {
            let v: f64 = (0..e.output_size()).map(|c| e.get(x, c) * d.get(c, y)).sum();
            residual = residual.max((v - instance.channel.get(x, y)).abs());
        }
    }
    Ok(FeasibilityCheck { feasible: residual <= FEASIBILITY_TOL, residual })
}

fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn support_of(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] > ZERO_PROB).collect()
}

/// Vertices of `B_x = {e ∈ Δ_C : Σ_c e_c D_c = W_x}`: basic solutions on
/// linearly independent subsets of at most `|Y|` rows of `D`, sorted by
/// support pattern.
pub fn polytope_vertices(d: &Channel, target: &[f64]) -> Vec<Vec<f64>> {
    let c = d.input_size();
    let ys = d.output_size();
    let b = DVector::from_column_slice(target);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for s in subsets_up_to(c, ys.min(c)) {
        let m = DMatrix::from_fn(ys, s.len(), |y, j| d.get(s[j], y));
        let Some(sol) = lstsq_full_rank(&m, &b) else { continue };
        if (&m * &sol - &b).amax() > 1e-9 || sol.iter().any(|v| *v < -1e-10) {
            continue;
        }
        let mut v = vec![0.0; c];
        for (j, &ci) in s.iter().enumerate() {
            v[ci] = sol[j].max(0.0);
        }
        let total: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= total);
        v.iter_mut().filter(|x| **x <= ZERO_PROB).for_each(|x| *x = 0.0);
        if !found.iter().any(|f| f.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9)) {
            found.push(v);
        }
    }
    found.sort_by(|a, b| {
        support_of(a)
            .cmp(&support_of(b))
            .then_with(|| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    found
}

fn mu_entropy(p: &Distribution, rows: &[&Vec<f64>], c: usize) -> f64 {
    let mut mu = vec![0.0; c];
    for (x, row) in rows.iter().enumerate() {
        for (m, v) in mu.iter_mut().zip(row.iter()) {
            *m += p.get(x) * v;
        }
    }
    entropy_of(&mu)
}

/// Minimizes `H(E(P))` over feasible `E` for fixed `D`.
///
/// Exhaustive over vertex combinations while their number stays within
/// `caps.e_step_combos`, coordinate descent over vertices beyond that. Ties
/// keep the earliest combination in vertex order.
pub fn e_step(instance: &ZeroErrorInstance, d: &Channel, caps: &Caps) -> Result<Factorization> {
    check_dims("D output vs |Y|", d.output_size(), instance.y_size())?;
    let c = d.input_size();
    let xs = instance.x_size();
    let vertices: Vec<Vec<Vec<f64>>> = (0..xs).map(|x| polytope_vertices(d, instance.channel.row(x))).collect();
    if let Some(x) = vertices.iter().position(Vec::is_empty) {
        return Err(Error::Infeasible(format!("row {x} of W is not a mixture of the rows of D")));
    }
    let active: Vec<usize> = (0..xs).filter(|&x| instance.source.get(x) > 0.0).collect();
    let combos = active.iter().map(|&x| vertices[x].len() as u128).product::<u128>();
    let mut choice = vec![0usize; xs];
    let eval = |choice: &[usize]| {
        let rows: Vec<&Vec<f64>> = (0..xs).map(|x| &vertices[x][choice[x]]).collect();
        mu_entropy(&instance.source, &rows, c)
    };
    let mut best = eval(&choice);
    if combos <= caps.e_step_combos as u128 {
        let mut cur = choice.clone();
        'odometer: loop {
            let mut k = active.len();
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                let x = active[k];
                cur[x] += 1;
                if cur[x] < vertices[x].len() {
                    break;
                }
                cur[x] = 0;
            }
            let v = eval(&cur);
            if v < best - IMPROVEMENT_TOL {
                best = v;
                choice.clone_from(&cur);
            }
        }
    } else {
        loop {
            let mut improved = false;
            for &x in &active {
                for i in 0..vertices[x].len() {
                    let mut trial = choice.clone();
                    trial[x] = i;
                    let v = eval(&trial);
                    if v < best - IMPROVEMENT_TOL {
                        best = v;
                        choice = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    let e = Channel::new((0..xs).map(|x| vertices[x][choice[x]].clone()).collect())?;
    Factorization::new(&instance.source, e, d.clone())
}

/// Constraint system `A vec(D) = b` for fixed `E`: `Σ_c E(c|x) D(y|c) = W(y|x)`
/// and unit row sums. Variable `(c, y)` sits at `c·|Y| + y`.
fn d_constraints(instance: &ZeroErrorInstance, e: &Channel) -> (DMatrix<f64>, DVector<f64>) {
    let xs = instance.x_size();
    let ys = instance.y_size();
    let c = e.output_size();
    let mut a = DMatrix::zeros(xs * ys + c, c * ys);
    let mut b = DVector::zeros(xs * ys + c);
    for x in 0..xs {
        for y in 0..ys {
            for ci in 0..c {
                a[(x * ys + y, ci * ys + y)] = e.get(x, ci);
            }
            b[x * ys + y] = instance.channel.get(x, y);
        }
    }
    for ci in 0..c {
        for y in 0..ys {
            a[(xs * ys + ci, ci * ys + y)] = 1.0;
        }
        b[xs * ys + ci] = 1.0;
    }
    (a, b)
}

fn d_objective(d: &[f64], mu: &[f64], ys: usize) -> f64 {
    d.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| -mu[i / ys] * v * v.log2())
        .sum()
}

fn d_gradient(v: f64, mu: f64) -> f64 {
    // slope at a boundary point is +∞; a large finite stand-in keeps directions comparable
    let v = v.max(1e-15);
    -mu * (v.log2() + std::f64::consts::LOG2_E)
}

fn projected_direction(a: &DMatrix<f64>, free: &[usize], grad: &[f64], n: usize) -> Vec<f64> {
    let sub = DMatrix::from_fn(a.nrows(), free.len(), |r, j| a[(r, free[j])]);
    let basis = null_space(&sub);
    let mut p = vec![0.0; n];
    if basis.ncols() == 0 {
        return p;
    }
    let g = DVector::from_iterator(free.len(), free.iter().map(|&i| grad[i]));
    let pf = &basis * (basis.transpose() * g);
    for (j, &i) in free.iter().enumerate() {
        p[i] = pf[j];
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DStepReport {
    pub iterations: usize,
    pub converged: bool,
    /// `Σ_c μ_c H(D_c)` at the returned `D`.
    pub conditional_entropy: f64,
}

/// Maximizes `Σ_c μ_c H(D_c)` over `D` with `D∘E = W` (gradient projection
/// with an active set; every step stays inside the polytope). `start` must
/// be feasible; without one, a feasible point is found by nonnegative least
/// squares.
pub fn d_step(instance: &ZeroErrorInstance, e: &Channel, start: Option<&Channel>) -> Result<(Channel, DStepReport)> {
    check_dims("E input vs |X|", e.input_size(), instance.x_size())?;
    let ys = instance.y_size();
    let c = e.output_size();
    let n = c * ys;
    let (a, b) = d_constraints(instance, e);
    let mut d: Vec<f64> = match start {
        Some(s) => {
            check_dims("start D shape", s.input_size() * s.output_size(), n)?;
            s.rows().concat()
        }
        None => nnls(&a, &b).iter().copied().collect(),
    };
    let residual = (&a * DVector::from_column_slice(&d) - &b).amax();
    if residual > FEASIBILITY_TOL {
        return Err(Error::Infeasible(format!("no stochastic D reproduces W through this E (residual {residual:.2e})")));
    }
    let mu: Vec<f64> = (0..c).map(|ci| (0..instance.x_size()).map(|x| instance.source.get(x) * e.get(x, ci)).sum()).collect();
    let f = |d: &[f64]| d_objective(d, &mu, ys);
    let mut value = f(&d);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..5000 {
        iterations = it + 1;
        let grad: Vec<f64> = (0..n).map(|i| d_gradient(d[i], mu[i / ys])).collect();
        let free: Vec<usize> = (0..n).filter(|&i| d[i] > 0.0).collect();
        let mut p = projected_direction(&a, &free, &grad, n);
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 {
            // stationary on this face: try leaving it through one zero coordinate
            let mut best: Option<(f64, Vec<f64>)> = None;
            for i in (0..n).filter(|&i| d[i] <= 0.0 && mu[i / ys] > 0.0) {
                let mut f2 = free.clone();
                f2.push(i);
                f2.sort_unstable();
                let q = projected_direction(&a, &f2, &grad, n);
                let slope: f64 = q.iter().zip(&grad).map(|(u, g)| u * g).sum();
                if q[i] > 1e-12 && slope > 1e-12 && best.as_ref().is_none_or(|(s, _)| slope > *s) {
                    best = Some((slope, q));
                }
            }
            match best {
                Some((_, q)) => p = q,
                None => {
                    converged = true;
                    break;
                }
            }
        }
        let t_max = (0..n)
            .filter(|&i| p[i] < -1e-15)
            .map(|i| d[i] / -p[i])
            .fold(f64::INFINITY, f64::min);
        let t_max = if t_max.is_finite() { t_max } else { 1.0 };
        let at = |t: f64| -> Vec<f64> { d.iter().zip(&p).map(|(v, s)| (v + t * s).max(0.0)).collect() };
        // golden section on the concave slice
        let (mut lo, mut hi) = (0.0, t_max);
        let phi = 0.618_033_988_749_895;
        let mut m1 = hi - phi * (hi - lo);
        let mut m2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (f(&at(m1)), f(&at(m2)));
        for _ in 0..80 {
            if f1 < f2 {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + phi * (hi - lo);
                f2 = f(&at(m2));
            } else {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - phi * (hi - lo);
                f1 = f(&at(m1));
            }
        }
        let t_mid = 0.5 * (lo + hi);
        let (t, next_value) = {
            let v_mid = f(&at(t_mid));
            let v_end = f(&at(t_max));
            if v_end >= v_mid { (t_max, v_end) } else { (t_mid, v_mid) }
        };
        if next_value <= value + 1e-13 {
            converged = true;
            break;
        }
        let mut next = at(t);
        if t == t_max {
            for i in 0..n {
                if p[i] < -1e-15 && next[i] <= 1e-13 {
                    next[i] = 0.0;
                }
            }
        }
        for v in next.iter_mut() {
            if *v < 1e-15 {
                *v = 0.0;
            }
        }
        d = next;
        value = f(&d);
    }
    // remove drift from the affine set
    let dv = DVector::from_column_slice(&d);
    let r = &a * &dv - &b;
    if r.amax() > 1e-12 {
        let corr = lstsq(&a, &r);
        d = (dv - corr).iter().map(|v| v.max(0.0)).collect();
    }
    let rows: Vec<Vec<f64>> = d.chunks(ys).map(<[f64]>::to_vec).collect();
    let out = Channel::new(rows)?;
    let report = DStepReport { iterations, converged, conditional_entropy: d_objective(&out.rows().concat(), &mu, ys) };
    Ok((out, report))
}

/// A feasible `E` for `D` by nonnegative least squares per input letter.
pub fn feasible_e(instance: &ZeroErrorInstance, d: &Channel) -> Option<Channel> {
    let c = d.input_size();
    let ys = instance.y_size();
    let a = DMatrix::from_fn(ys + 1, c, |r, ci| if r < ys { d.get(ci, r) } else { 1.0 });
    let rows = (0..instance.x_size())
        .map(|x| {
            let mut b: Vec<f64> = instance.channel.row(x).to_vec();
            b.push(1.0);
            let b = DVector::from_vec(b);
            let sol = nnls(&a, &b);
            if (&a * &sol - &b).amax() > 1e-9 {
                return None;
            }
            Some(sol.iter().copied().collect::<Vec<f64>>())
        })
        .collect::<Option<Vec<_>>>()?;
    Channel::new(rows).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternateOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub init_attempts: usize,
}

impl Default for AlternateOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 20, max_iters: 100, init_attempts: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternateResult {
    pub factorization: Factorization,
    pub best_restart: usize,
    /// Objective after each iteration of the winning restart; entry 0 is the start.
    pub trace: Vec<f64>,
    /// Final objective per restart.
    pub restart_objectives: Vec<f64>,
    pub converged: bool,
}

fn initial_pool(instance: &ZeroErrorInstance) -> Vec<Vec<f64>> {
    let ys = instance.y_size();
    let mut pool: Vec<Vec<f64>> = Vec::new();
    let rows = instance.channel.rows().iter().cloned();
    let points = (0..ys).map(|y| (0..ys).map(|j| if j == y { 1.0 } else { 0.0 }).collect());
    for r in rows.chain(points) {
        if !pool.iter().any(|p: &Vec<f64>| p.iter().zip(&r).all(|(a, b)| (a - b).abs() < 1e-12)) {
            pool.push(r);
        }
    }
    pool
}

fn restart_start(instance: &ZeroErrorInstance, restart: usize, opts: &AlternateOptions) -> Result<(Channel, Channel)> {
    let c = instance.c_max;
    let ys = instance.y_size();
    let pool = initial_pool(instance);
    if restart == 0 {
        // structured start: W rows, then point masses
        let rows: Vec<Vec<f64>> = (0..c).map(|i| pool[i % pool.len()].clone()).collect();
        let d = Channel::new(rows)?;
        if let Some(e) = feasible_e(instance, &d) {
            return Ok((e, d));
        }
    }
    let mut rng = seed::rng(opts.seed, "zero-error/restart", restart as u64);
    for _ in 0..opts.init_attempts {
        let rows: Vec<Vec<f64>> = (0..c)
            .map(|_| {
                if rng.random_bool(0.5) {
                    pool[rng.random_range(0..pool.len())].clone()
                } else {
                    let g: Vec<f64> = (0..ys).map(|_| Exp1.sample(&mut rng)).collect();
                    let s: f64 = g.iter().sum();
                    g.into_iter().map(|v| v / s).collect()
                }
            })
            .collect();
        let d = Channel::new(rows)?;
        if let Some(e) = feasible_e(instance, &d) {
            return Ok((e, d));
        }
    }
    Err(Error::RetriesExhausted {
        attempts: opts.init_attempts as u32,
        reason: format!("no feasible initialization for restart {restart}"),
    })
}

fn run_restart(
    instance: &ZeroErrorInstance,
    restart: usize,
    opts: &AlternateOptions,
    caps: &Caps,
) -> Result<(Factorization, Vec<f64>, bool)> {
    let (e, d) = restart_start(instance, restart, opts)?;
    let mut current = Factorization::new(&instance.source, e, d)?;
    let mut trace = vec![current.objective];
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let before = current.objective;
        let candidate = e_step(instance, &current.d, caps)?;
        if candidate.objective < current.objective - IMPROVEMENT_TOL {
            current = candidate;
        }
        let (d, _) = d_step(instance, &current.e, Some(&current.d))?;
        current = Factorization::new(&instance.source, current.e.clone(), d)?;
        trace.push(current.objective);
        if before - current.objective < 1e-9 {
            converged = true;
            break;
        }
    }
    // a final exact vertex search on the settled D
    let last = e_step(instance, &current.d, caps)?;
    if last.objective < current.objective - IMPROVEMENT_TOL {
        current = last;
        trace.push(current.objective);
    }
    Ok((current, trace, converged))
}

/// Alternating minimization with restarts; restart `r` draws from its own
/// seeded stream, so the result does not depend on worker scheduling.
pub fn alternate(instance: &ZeroErrorInstance, opts: &AlternateOptions, caps: &Caps) -> Result<AlternateResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidInput("at least one restart is required".into()));
    }
    let runs = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_restart(instance, r, opts, caps))
        .collect::<Vec<_>>();
    let mut best: Option<(usize, Factorization, Vec<f64>, bool)> = None;
    let mut restart_objectives = Vec::with_capacity(runs.len());
    let mut first_err = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok((f, trace, conv)) => {
                restart_objectives.push(f.objective);
                if best.as_ref().is_none_or(|(_, b, _, _)| f.objective < b.objective - IMPROVEMENT_TOL) {
                    best = Some((r, f, trace, conv));
                }
            }
            Err(e) => {
                restart_objectives.push(f64::NAN);
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((best_restart, factorization, trace, converged)) => {
            Ok(AlternateResult { factorization, best_restart, trace, restart_objectives, converged })
        }
        None => Err(first_err.expect("no restart succeeded and none failed")),
    }
}

/// Points `k/r` of the probability simplex over `dim` outcomes.
fn simplex_grid(dim: usize, r: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, dim: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if dim == 1 {
            cur.push(left);
            out.push(cur.iter().map(|k| *k as f64 / r as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, dim - 1, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, dim, r, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub factorization: Factorization,
    pub grid_resolution: usize,
    pub grid_matrices: u64,
    /// Largest objective change over one-pitch moves of a single row of the best `D`.
    pub accuracy: f64,
}

/// Exhaustive search over `D` whose rows lie on the simplex grid of the given
/// resolution (multisets of `c_max` rows), each with an exact vertex search
/// for `E`.
pub fn brute_force_oracle(instance: &ZeroErrorInstance, grid_resolution: usize, caps: &Caps) -> Result<OracleResult> {
    let xs = instance.x_size();
    let ys = instance.y_size();
    let c = instance.c_max;
    if xs > 3 || ys > 3 || c > 4 {
        return Err(Error::cap("oracle instance size (|X|,|Y| <= 3, c_max <= 4)", xs.max(ys).max(c), 3));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidInput("grid resolution must be positive".into()));
    }
    let grid = simplex_grid(ys, grid_resolution);
    let g = grid.len() as u128;
    let count = binomial(g + c as u128 - 1, c as u128);
    if count > caps.oracle_grid_points as u128 {
        return Err(Error::cap("oracle grid matrices", count, caps.oracle_grid_points));
    }
    // multisets as nondecreasing index tuples, split by first index for parallelism
    let best = (0..grid.len())
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut idx = vec![first; c];
            loop {
                let d = Channel::new(idx.iter().map(|&i| grid[i].clone()).collect()).ok();
                if let Some(f) = d.and_then(|d| e_step(instance, &d, caps).ok()) {
                    if best.as_ref().is_none_or(|(b, _)| f.objective < *b - IMPROVEMENT_TOL) {
                        best = Some((f.objective, idx.clone()));
                    }
                }
                // advance positions 1.. keeping idx nondecreasing
                let mut k = c;
                loop {
                    if k <= 1 {
                        return best;
                    }
                    k -= 1;
                    if idx[k] + 1 < grid.len() {
                        idx[k] += 1;
                        for j in k + 1..c {
                            idx[j] = idx[k];
                        }
                        break;
                    }
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<usize>)>, |acc, (v, idx)| match acc {
            Some((b, _)) if v >= b - IMPROVEMENT_TOL => acc,
            _ => Some((v, idx)),
        });
    let Some((objective, idx)) = best else {
        return Err(Error::Infeasible("no grid matrix D admits an exact factorization".into()));
    };
    let d = Channel::new(idx.iter().map(|&i| grid[i].clone()).collect())?;
    let factorization = e_step(instance, &d, caps)?;
    let pitch = 1.0 / grid_resolution as f64;
    let mut accuracy = 0.0f64;
    for row in 0..c {
        for from in 0..ys {
            for to in 0..ys {
                if from == to || d.get(row, from) < pitch - 1e-12 {
                    continue;
                }
                let mut rows = d.rows().to_vec();
                rows[row][from] -= pitch;
                rows[row][to] += pitch;
                rows[row].iter_mut().for_each(|v| *v = v.max(0.0));
                let Ok(nd) = Channel::new(rows) else { continue };
                if let Ok(f) = e_step(instance, &nd, caps) {
                    accuracy = accuracy.max((f.objective - objective).abs());
                }
            }
        }
    }
    Ok(OracleResult { factorization, grid_resolution, grid_matrices: count as u64, accuracy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub mutual_information: f64,
    pub objective: f64,
    pub source_entropy: f64,
    pub holds: bool,
}

/// `I(P;W) ≤ H(μ) ≤ H(P)`.
pub fn sandwich(instance: &ZeroErrorInstance, f: &Factorization) -> Result<Sandwich> {
    let mi = mutual_information(&instance.source, &instance.channel)?;
    let hp = entropy(&instance.source);
    Ok(Sandwich {
        mutual_information: mi,
        objective: f.objective,
        source_entropy: hp,
        holds: mi <= f.objective + 1e-9 && f.objective <= hp + 1e-9,
    })
}

/// `(P ⊗ P, W ⊗ W)` with `c_max` from the given bound on the product alphabets.
pub fn product_instance(instance: &ZeroErrorInstance, c_max: Option<usize>) -> Result<ZeroErrorInstance> {
    ZeroErrorInstance::new(instance.source.tensor(&instance.source), instance.channel.tensor(&instance.channel), c_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaBracket {
    pub lower: f64,
    pub upper: f64,
    pub s1: f64,
    pub s2: Option<f64>,
}

/// Bracket on the asymptotic per-letter rate from the single-letter and
/// (optionally) the two-letter solutions: `I(P;W) ≤ Γ ≤ min(S(1), S(2)/2)`.
pub fn gamma_bracket(instance: &ZeroErrorInstance, with_pairs: bool, opts: &AlternateOptions, caps: &Caps) -> Result<GammaBracket> {
    let s1 = alternate(instance, opts, caps)?.factorization.objective;
    let s2 = if with_pairs {
        let pair = product_instance(instance, None)?;
        Some(alternate(&pair, opts, caps)?.factorization.objective)
    } else {
        None
    };
    let lower = mutual_information(&instance.source, &instance.channel)?;
    let upper = s2.map_or(s1, |s| s1.min(s / 2.0));
    Ok(GammaBracket { lower, upper, s1, s2 })
}
