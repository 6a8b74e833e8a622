//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use distcomp::applications::{
    build_dilution, rd_code_via_simulation, rd_curve, rd_function, rd_grid_oracle, sample_dilution, DistortionSpec,
};
use distcomp::caps::Caps;
use distcomp::cli::{self, ExperimentConfig};
use distcomp::covering::{
    build_covering, sampling_failure_bound, verify_covering, ClassSizes, CoveringContext, CoveringMode,
};
use distcomp::fidelity::{derandomization_q, derandomize, measure_fidelity, DerandomizeOptions, FidelityMode, Verification};
use distcomp::prob::{
    binary_entropy, conditional_entropy, entropy, entropy_continuity_bound, mutual_information, push_forward, Channel,
    Distribution,
};
use distcomp::seed;
use distcomp::simulate::{build_sim_code, jointly_typical_types, SimParams};
use distcomp::types::{
    conditional_size_given_x, conditional_size_given_y, enumerate_exact_types, enumerate_joint_types, joint_class_size,
    type_class_size, typical_probability_bounds, TypicalSpec,
};
use distcomp::zero_error::{alternate, brute_force_oracle, sandwich, AlternateOptions, ZeroErrorInstance};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|x| x.to_string())
}

fn random_dist<R: Rng>(rng: &mut R, size: usize) -> Distribution {
    let mut v: Vec<f64> = (0..size).map(|_| rng.random::<f64>()).collect();
    // occasionally zero out a letter so supports vary
    if size > 1 && rng.random::<f64>() < 0.2 {
        v[rng.random_range(0..size)] = 0.0;
    }
    let s: f64 = v.iter().sum();
    Distribution::new(v.iter().map(|x| x / s).collect()).unwrap()
}

fn log2_big(b: &BigUint) -> f64 {
    b.to_f64().unwrap().log2()
}

fn information_identities() -> Outcome {
    let mut rng = seed::rng(1, "acceptance/info", 0);
    let mut worst_chain = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for _ in 0..1000 {
        let xs = rng.random_range(1..=6);
        let ys = rng.random_range(1..=6);
        let p = random_dist(&mut rng, xs);
        let w = e(Channel::new((0..xs).map(|_| random_dist(&mut rng, ys).probs().to_vec()).collect()))?;
        let gap = (entropy(&e(push_forward(&p, &w))?) - e(mutual_information(&p, &w))? - e(conditional_entropy(&p, &w))?).abs();
        worst_chain = worst_chain.max(gap);

        // a second distribution within l1 distance 1/2 of p
        let dir = random_dist(&mut rng, xs);
        let l1: f64 = p.probs().iter().zip(dir.probs()).map(|(a, b)| (a - b).abs()).sum();
        let t = if l1 > 0.0 { (rng.random::<f64>() * 0.5 / l1).min(1.0) } else { 0.0 };
        let q = e(Distribution::new(p.probs().iter().zip(dir.probs()).map(|(a, b)| (1.0 - t) * a + t * b).collect()))?;
        let bound = e(entropy_continuity_bound(&p, &q))?;
        let dh = (entropy(&p) - entropy(&q)).abs();
        ensure(dh <= bound + 1e-12, || format!("|dH| = {dh} exceeds bound {bound}"))?;
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(dh / bound);
        }
    }
    ensure(worst_chain <= 1e-9, || format!("chain rule gap {worst_chain}"))?;
    Ok(format!("max chain-rule gap {worst_chain:.1e}, max |dH|/bound {worst_ratio:.3}"))
}

fn type_machinery() -> Outcome {
    let caps = Caps::default();
    let mut checked = 0usize;
    for n in 1..=10 {
        for xs in 1..=3 {
            for r in e(enumerate_exact_types(n, xs, &caps))? {
                let size = log2_big(&type_class_size(&r));
                let nh = n as f64 * r.entropy();
                let lower = nh - xs as f64 * ((n + 1) as f64).log2();
                ensure(size <= nh + 1e-9 && size >= lower - 1e-9, || format!("type {:?}: log2|T| = {size}", r.counts()))?;
                checked += 1;
            }
            for ys in 1..=3 {
                for t in e(enumerate_joint_types(n, xs, ys, None, &caps))? {
                    let nh = n as f64 * t.conditional_entropy();
                    let given_x = log2_big(&conditional_size_given_x(&t));
                    let lower = nh - (xs * ys) as f64 * ((n + 1) as f64).log2();
                    ensure(given_x <= nh + 1e-9 && given_x >= lower - 1e-9, || format!("joint type {t}: log2|T(x)| = {given_x}"))?;
                    let joint = log2_big(&joint_class_size(&t));
                    let hj = n as f64 * entropy(&Distribution::new(t.counts().iter().map(|c| *c as f64 / n as f64).collect()).unwrap());
                    ensure(joint <= hj + 1e-9, || format!("joint type {t}: log2|T| = {joint} > {hj}"))?;
                    checked += 1;
                }
            }
        }
    }
    // uniform on T_R through W_T is uniform on T_S; the reverse kernel is 1/|T_T(y)|
    let mut classes = 0usize;
    for n in 1..=6 {
        for xs in 1..=3 {
            for ys in 1..=3 {
                for t in e(enumerate_joint_types(n, xs, ys, None, &caps))? {
                    let ctx = e(CoveringContext::new(&t, &caps))?;
                    let gx = conditional_size_given_x(&t).to_u64().unwrap() as usize;
                    let gy = conditional_size_given_y(&t).to_u64().unwrap();
                    ensure(gy == ctx.given_y, || format!("{t}: |T(y)| mismatch"))?;
                    let mut q = vec![0.0f64; ctx.s_size];
                    let mut hits = vec![0u64; ctx.s_size];
                    for ys_of_x in &ctx.compatible {
                        ensure(ys_of_x.len() == gx, || format!("{t}: W_T row size {} != {gx}", ys_of_x.len()))?;
                        for y in ys_of_x {
                            q[*y as usize] += 1.0 / (ctx.r_size as f64 * gx as f64);
                            hits[*y as usize] += 1;
                        }
                    }
                    for (qy, h) in q.iter().zip(&hits) {
                        ensure((qy - 1.0 / ctx.s_size as f64).abs() < 1e-12, || format!("{t}: output law not uniform"))?;
                        // reverse kernel: P(x|y) = (1/|T_R|)(1/|T(x)|)/(1/|T_S|) on the h compatible x
                        let v = (1.0 / (ctx.r_size as f64 * gx as f64)) / qy;
                        ensure(*h == gy && (v - 1.0 / gy as f64).abs() < 1e-12, || format!("{t}: transpose is not 1/|T(y)|"))?;
                    }
                    classes += 1;
                }
            }
        }
    }
    Ok(format!("{checked} cardinality sandwiches, {classes} joint types summed exhaustively"))
}

fn typicality() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for p in [[0.5, 0.5], [0.9, 0.1]] {
        for n in [4, 8, 16, 32] {
            for delta in [1.0, 2.0, 3.0] {
                let b = typical_probability_bounds(&e(TypicalSpec::new(e(Distribution::new(p.to_vec()))?, n, delta))?);
                let slack = b.exact - b.chebyshev.max(b.chernoff);
                worst = worst.min(slack);
                if slack < -1e-9 {
                    failures.push(format!(
                        "P={p:?} n={n} delta={delta}: exact {:.6} < chebyshev {:.6} / chernoff {:.6}",
                        b.exact, b.chebyshev, b.chernoff
                    ));
                }
            }
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("min slack {worst:.6}"))
}

fn covering() -> Outcome {
    let caps = Caps::default();
    let p = e(Distribution::uniform(2))?;
    let w = e(Channel::bsc(0.25))?;
    let eps = 0.1;
    let types = e(jointly_typical_types(&p, &w, 4, 2.0, &caps))?;
    let mut failed_draws = 0u64;
    let mut draws = 0u64;
    let mut worst_bound = 0.0f64;
    for t in &types {
        let ctx = e(CoveringContext::new(t, &caps))?;
        let (fam, check) = e(build_covering(&ctx, eps, CoveringMode::Guaranteed, 0, 20, &caps))?;
        let again = e(verify_covering(&fam, &ctx))?;
        ensure(check.passed && again == check, || format!("{t}: family fails verification"))?;
        if ctx.s_size == 1 {
            continue;
        }
        // union bound over condition (I) for every index and condition (II)
        let sizes = ClassSizes::of(t);
        let rho = sizes.r * sizes.s / sizes.t;
        let bound = fam.n_indices as f64 * e(sampling_failure_bound(sizes.r, fam.m as f64, eps, 1.0 / rho))?
            + e(sampling_failure_bound(sizes.s, (fam.n_indices * fam.m) as f64, eps, 1.0 / sizes.s))?;
        ensure(bound < 1.0, || format!("{t}: union bound {bound} >= 1"))?;
        worst_bound = worst_bound.max(bound);
        let (mut fails, mut total) = (0u64, 0u64);
        for s in 0..100 {
            let (fam, _) = e(build_covering(&ctx, eps, CoveringMode::Guaranteed, s, 20, &caps))?;
            fails += fam.retries as u64;
            total += fam.retries as u64 + 1;
        }
        let rate = fails as f64 / total as f64;
        let allowance = bound + 3.0 * (bound * (1.0 - bound) / total as f64).sqrt();
        ensure(rate <= allowance, || format!("{t}: failed-draw rate {rate} above union bound {bound}"))?;
        failed_draws += fails;
        draws += total;
    }
    Ok(format!(
        "{} types verified; {failed_draws}/{draws} failed draws over 100 seeds, max union bound {worst_bound:.4}",
        types.len()
    ))
}

fn simulation_fidelity() -> Outcome {
    let caps = Caps::default();
    let p = e(Distribution::uniform(2))?;
    let w = e(Channel::bsc(0.25))?;
    let mut parts = Vec::new();
    for n in 1..=6 {
        let code = match build_sim_code(&p, &w, &SimParams { n, ..Default::default() }, &caps) {
            Ok(c) => c,
            // no typical types at all: nothing to simulate at this length
            Err(distcomp::Error::Infeasible(_)) => continue,
            Err(x) => return Err(x.to_string()),
        };
        let strong = e(code.strong_fidelity(&caps))?;
        let report = e(measure_fidelity(&p, &w, &code, FidelityMode::Exact, &caps))?;
        ensure(strong.lambda <= 0.15, || format!("n={n}: lambda {}", strong.lambda))?;
        ensure(report.global_err <= strong.lambda + strong.atypical_mass + 1e-12, || {
            format!("n={n}: average {} > lambda {} + atypical {}", report.global_err, strong.lambda, strong.atypical_mass)
        })?;
        parts.push(format!("n={n} lambda={:.4}", strong.lambda));
    }
    ensure(!parts.is_empty(), || "no block length produced a code".into())?;
    Ok(parts.join(", "))
}

fn rate_trends() -> Outcome {
    let caps = Caps::default();
    let p = e(Distribution::uniform(2))?;
    let w = e(Channel::bsc(0.25))?;
    let mi = 1.0 - binary_entropy(0.25);
    let mut prev = f64::INFINITY;
    let mut rates = Vec::new();
    for n in 4..=12 {
        let code = e(build_sim_code(&p, &w, &SimParams { n, ..Default::default() }, &caps))?;
        let a = e(code.accounting())?;
        ensure((a.mutual_information - mi).abs() <= 1e-9, || format!("I(P;W) = {}", a.mutual_information))?;
        ensure(a.rate <= prev, || format!("n={n}: rate {} above {prev}", a.rate))?;
        ensure(a.rate >= mi - 1e-9, || format!("n={n}: rate {} below I", a.rate))?;
        let overhead = a.announcement_bits as f64 / n as f64;
        ensure(a.rate + a.cr_rate >= a.output_entropy - overhead, || format!("n={n}: total rate below H(PW)"))?;
        prev = a.rate;
        rates.push(format!("{:.3}", a.rate));
    }
    Ok(format!("rates {}", rates.join(" ")))
}

fn derandomization() -> Outcome {
    let caps = Caps::default();
    let p = e(Distribution::uniform(2))?;
    let w = e(Channel::bsc(0.25))?;
    let eps = 0.1;
    let mut prev = f64::INFINITY;
    let mut detail = String::new();
    for n in 4..=10 {
        let code = e(build_sim_code(&p, &w, &SimParams { n, ..Default::default() }, &caps))?;
        let d = e(derandomize(&code, &DerandomizeOptions { epsilon: eps, ..Default::default() }, &caps))?;
        let q = e(derandomization_q(n, 2, 2, eps, w.min_nonzero()))?;
        ensure(d.q == q, || format!("n={n}: Q = {} but formula gives {q}", d.q))?;
        if n == 4 {
            ensure(d.verification == Verification::Exact, || "n=4 code was not verified exactly".into())?;
            let err = d.letterwise_max_err.unwrap_or(f64::INFINITY);
            ensure(err <= 3.0 * eps, || format!("letterwise error {err} > 3 eps"))?;
            detail = format!("n=4 letterwise {err:.4}, Q={q}");
        }
        let o = d.index_overhead();
        ensure(o < prev, || format!("n={n}: overhead {o} not below {prev}"))?;
        prev = o;
    }
    Ok(format!("{detail}, overhead at n=10 {prev:.3}"))
}

fn zero_error() -> Outcome {
    let caps = Caps::default();
    let opts = AlternateOptions { restarts: 20, ..Default::default() };
    let check = |inst: &ZeroErrorInstance, f: &distcomp::zero_error::Factorization| -> Result<(), String> {
        let s = e(sandwich(inst, f))?;
        ensure(s.holds, || format!("sandwich fails: {} <= {} <= {}", s.mutual_information, s.objective, s.source_entropy))?;
        let (xs, ys) = (inst.channel.input_size(), inst.channel.output_size());
        ensure(f.row_supports().iter().all(|k| *k <= ys), || "row support above |Y|".into())?;
        ensure(f.used_columns() < xs * ys, || "more than |X||Y|-1 intermediate symbols".into())
    };

    let p = e(Distribution::new(vec![0.3, 0.7]))?;
    let same = e(Channel::new(vec![vec![0.2, 0.5, 0.3], vec![0.2, 0.5, 0.3]]))?;
    let inst = e(ZeroErrorInstance::new(p, same, None))?;
    let r = e(alternate(&inst, &opts, &caps))?;
    check(&inst, &r.factorization)?;
    ensure(r.factorization.objective.abs() <= 1e-9, || format!("identical rows gave {}", r.factorization.objective))?;

    let p = e(Distribution::new(vec![0.5, 0.3, 0.2]))?;
    let inst = e(ZeroErrorInstance::new(p.clone(), e(Channel::identity(3))?, None))?;
    let r = e(alternate(&inst, &opts, &caps))?;
    check(&inst, &r.factorization)?;
    ensure((r.factorization.objective - entropy(&p)).abs() <= 1e-9, || format!("point masses gave {}", r.factorization.objective))?;

    let mut parts = Vec::new();
    for rows in [[[0.75, 0.25], [0.25, 0.75]], [[0.9, 0.1], [0.2, 0.8]], [[0.6, 0.4], [0.1, 0.9]]] {
        let w = e(Channel::new(rows.iter().map(|r| r.to_vec()).collect()))?;
        let inst = e(ZeroErrorInstance::new(e(Distribution::uniform(2))?, w, None))?;
        let r = e(alternate(&inst, &opts, &caps))?;
        check(&inst, &r.factorization)?;
        let oracle = e(brute_force_oracle(&inst, 80, &caps))?;
        let gap = (r.factorization.objective - oracle.factorization.objective).abs();
        ensure(gap <= oracle.accuracy + 1e-4, || {
            format!("rows {rows:?}: alternate {} vs oracle {} (accuracy {})", r.factorization.objective, oracle.factorization.objective, oracle.accuracy)
        })?;
        parts.push(format!("{:.6}/{:.6}", r.factorization.objective, oracle.factorization.objective));
    }
    Ok(format!("trivial instances exact; alternate/oracle {}", parts.join(" ")))
}

fn rate_distortion() -> Outcome {
    let caps = Caps::default();
    let p = e(Distribution::bernoulli(0.5))?;
    let spec = e(DistortionSpec::hamming(2, 0.0))?;
    for d in [0.05, 0.1, 0.25] {
        let s = e(spec.with_target(d))?;
        let truth = 1.0 - binary_entropy(d);
        let r = e(rd_function(&p, &s, 2))?.rate;
        let g = e(rd_grid_oracle(&p, &s, 200, 6, &caps))?.rate;
        ensure((r - truth).abs() <= 1e-4 && (g - truth).abs() <= 1e-4, || format!("d={d}: R={r}, oracle {g}, 1-h(d)={truth}"))?;
    }
    let targets: Vec<f64> = (0..=25).map(|i| i as f64 * 0.02).collect();
    let curve = e(rd_curve(&p, &spec, 2, &targets))?;
    for k in 1..curve.len() {
        ensure(curve[k].rate <= curve[k - 1].rate + 1e-9, || format!("R not nonincreasing at d={}", targets[k]))?;
        if k + 1 < curve.len() {
            let mid = 0.5 * (curve[k - 1].rate + curve[k + 1].rate);
            ensure(curve[k].rate <= mid + 1e-7, || format!("R not convex at d={}", targets[k]))?;
        }
    }
    let code = e(rd_code_via_simulation(&p, &e(spec.with_target(0.25))?, 2, &SimParams { n: 6, ..Default::default() }, &caps))?;
    ensure(code.distortion_mean <= 0.25 + code.slack, || format!("simulated distortion {} > 0.25 + {}", code.distortion_mean, code.slack))?;
    ensure(code.distortion <= 0.25 + code.slack, || format!("encoder distortion {} > 0.25 + {}", code.distortion, code.slack))?;
    Ok(format!(
        "code at n=6: distortion {:.4} (simulated {:.4}), slack {:.4}",
        code.distortion, code.distortion_mean, code.slack
    ))
}

fn dilution() -> Outcome {
    let mut rng = seed::rng(10, "acceptance/dilution", 0);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_z = 0.0f64;
    for i in 0..100u64 {
        let size = rng.random_range(2..=16);
        let q = random_dist(&mut rng, size);
        for eps in [0.05, 0.1, 0.2] {
            let plan = e(build_dilution(&q, eps))?;
            let err = plan.realized_error();
            ensure(err <= plan.error_bound() + 1e-12, || format!("target {i}, eps {eps}: TV {err} > {}", plan.error_bound()))?;
            worst = worst.max(err - plan.error_bound());

            let draws = 10_000;
            let mut srng = seed::rng(10, "acceptance/dilution-sample", i);
            let mut counts = vec![0usize; size];
            for c in e(sample_dilution(&plan, &mut srng, draws))? {
                counts[c] += 1;
            }
            let realized = plan.realized();
            let tv: f64 = 0.5 * counts.iter().zip(realized.probs()).map(|(c, p)| (*c as f64 / draws as f64 - p).abs()).sum::<f64>();
            let sigma: f64 = 0.5 * realized.probs().iter().map(|p| (p * (1.0 - p) / draws as f64).sqrt()).sum::<f64>();
            ensure(tv <= 3.0 * sigma, || format!("target {i}, eps {eps}: sampled TV {tv} > 3 sigma {}", 3.0 * sigma))?;
            if sigma > 0.0 {
                worst_z = worst_z.max(tv / sigma);
            }
        }
    }
    Ok(format!("max TV - bound {worst:.4}, max sampled TV/sigma {worst_z:.2}"))
}

fn csv_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in e(fs::read_dir(dir))? {
        let path = e(entry)?.path();
        if path.extension().is_some_and(|x| x == "csv") {
            out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), e(fs::read(&path))?);
        }
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"command":"info","preset":"bsc:0.25"}"#,
        r#"{"command":"typical","source":[0.9,0.1],"channel":[[1,0],[0,1]],"ns":[4,8,16,32],"deltas":[1,2,3]}"#,
        r#"{"command":"cover","n":4,"seed":7}"#,
        r#"{"command":"simulate","n":5,"seed":3,"transcripts":50}"#,
        r#"{"command":"simulate","n":5,"seed":3,"fidelity":{"mode":"monte_carlo","samples":500,"seed":4}}"#,
        r#"{"command":"derandomize","n":4,"seed":5}"#,
        r#"{"command":"zero-error","channel":[[0.75,0.25],[0.25,0.75]],"restarts":5,"oracle_resolution":20}"#,
        r#"{"command":"rd","source":[0.5,0.5],"channel":[[1,0],[0,1]],"rd_code_n":4}"#,
        r#"{"command":"dilute","target":[0.5,0.3,0.15,0.05],"samples":2000,"seed":9}"#,
        r#"{"command":"dilute","channel":[[0.9,0.1],[0.2,0.8]],"restarts":5,"samples":2000,"seed":9}"#,
        r#"{"command":"sweep","sweep":{"command":"derandomize","n_from":4,"n_to":6}}"#,
    ];
    let root = e(tempfile::tempdir())?;
    let single = e(rayon::ThreadPoolBuilder::new().num_threads(1).build())?;
    let mut files = 0usize;
    for (i, text) in configs.iter().enumerate() {
        let config: ExperimentConfig = e(serde_json::from_str(text))?;
        let a = root.path().join(format!("{i}-a"));
        let b = root.path().join(format!("{i}-b"));
        e(cli::write_outputs(&e(cli::run(&config))?, &a))?;
        // second run on one thread, so scheduling cannot leak into the output
        e(cli::write_outputs(&e(single.install(|| cli::run(&config)))?, &b))?;
        let (fa, fb) = (csv_files(&a)?, csv_files(&b)?);
        ensure(!fa.is_empty() && fa == fb, || format!("config {i} ({text}): CSV output differs between runs"))?;
        files += fa.len();
    }
    Ok(format!("{files} CSV files identical across reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("information identities", information_identities, 5),
        ("type machinery", type_machinery, 60),
        ("typicality", typicality, 10),
        ("covering", covering, 300),
        ("simulation fidelity", simulation_fidelity, 600),
        ("rate trends", rate_trends, 1800),
        ("derandomization", derandomization, 600),
        ("zero-error", zero_error, 600),
        ("rate-distortion", rate_distortion, 600),
        ("dilution", dilution, 120),
        ("determinism", determinism, 600),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = f();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > Duration::from_secs(*limit) {
            outcome = Err(format!("took {:.1}s, limit {limit}s", elapsed.as_secs_f64()));
        }
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{:.2}s]", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{:.2}s]", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
