use distcomp::applications::{build_dilution, rd_code_via_simulation, rd_function, DistortionSpec};
use distcomp::caps::Caps;
use distcomp::covering::{build_covering, verify_covering, CoveringContext, CoveringMode};
use distcomp::fidelity::{measure_fidelity, ChannelFamilyCode, FidelityMode};
use distcomp::prob::{
    conditional_entropy, entropy, entropy_continuity_bound, mutual_information, push_forward, transpose_channel,
    tv_distance, Channel, Distribution,
};
use distcomp::simulate::{build_sim_code, SimParams};
use distcomp::types::{
    conditional_type_class_size, enumerate_exact_types, enumerate_joint_types, type_class_size, unrank_in_type,
    ExactType, JointType,
};
use distcomp::zero_error::{alternate, e_step, feasible_check, AlternateOptions, ZeroErrorInstance};
use distcomp::seed;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn dist(size: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.0f64..1.0, size).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-6).then(|| Distribution::new(v.iter().map(|x| x / s).collect()).unwrap())
    })
}

fn channel(xs: usize, ys: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(dist(ys), xs).prop_map(|rows| Channel::new(rows.iter().map(|r| r.probs().to_vec()).collect()).unwrap())
}

fn instance(max: usize) -> impl Strategy<Value = (Distribution, Channel)> {
    (1..=max, 1..=max).prop_flat_map(|(xs, ys)| (dist(xs), channel(xs, ys)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn information_identities((p, w) in instance(6)) {
        let i = mutual_information(&p, &w).unwrap();
        let hq = entropy(&push_forward(&p, &w).unwrap());
        prop_assert!(i >= -1e-12);
        prop_assert!(i <= entropy(&p).min((w.output_size() as f64).log2()) + 1e-9);
        prop_assert!((hq - i - conditional_entropy(&p, &w).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn transpose_of_transpose((p, w) in instance(5)) {
        let t = transpose_channel(&p, &w).unwrap();
        let back = transpose_channel(&t.q, &t.v).unwrap();
        for x in p.support() {
            for y in t.q.support() {
                prop_assert!((back.v.get(x, y) - w.get(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn continuity_bound_dominates(p in dist(6), dir in dist(6), scale in 0.0f64..1.0) {
        // move p toward another distribution until the l1 distance is at most 1/2
        let l1: f64 = p.probs().iter().zip(dir.probs()).map(|(a, b)| (a - b).abs()).sum();
        let t = if l1 > 0.0 { (scale * 0.5 / l1).min(1.0) } else { 0.0 };
        let q = Distribution::new(p.probs().iter().zip(dir.probs()).map(|(a, b)| (1.0 - t) * a + t * b).collect()).unwrap();
        let bound = entropy_continuity_bound(&p, &q).unwrap();
        prop_assert!((entropy(&p) - entropy(&q)).abs() <= bound + 1e-12);
    }

    #[test]
    fn tv_triangle(p in dist(5), q in dist(5), r in dist(5)) {
        let (pq, qr, pr) = (tv_distance(&p, &q).unwrap(), tv_distance(&q, &r).unwrap(), tv_distance(&p, &r).unwrap());
        prop_assert!(pr <= pq + qr + 1e-12);
    }

    #[test]
    fn type_probabilities_sum_to_one(p in dist(3), n in 1usize..10) {
        let total: f64 = enumerate_exact_types(n, 3, &Caps::default())
            .unwrap()
            .iter()
            .map(|t| {
                let per_word: f64 = t.counts().iter().enumerate().map(|(x, c)| p.get(x).powi(*c as i32)).product();
                type_class_size(t).to_f64().unwrap() * per_word
            })
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn joint_type_count_is_polynomial(n in 1usize..7, xs in 1usize..4, ys in 1usize..4) {
        let count = enumerate_joint_types(n, xs, ys, None, &Caps::default()).unwrap().len() as f64;
        prop_assert!(count <= ((n + 1) as f64).powi((xs * ys) as i32));
    }

    #[test]
    fn conditional_class_sandwich(rows in prop::collection::vec(prop::collection::vec(0u32..4, 2), 2)) {
        prop_assume!(rows.iter().flatten().sum::<u32>() > 0);
        let t = JointType::from_rows(rows).unwrap();
        let n = t.n();
        let r = t.x_marginal();
        let x = unrank_in_type(&r, 0).unwrap();
        let size = conditional_type_class_size(&t, &x).unwrap().to_f64().unwrap();
        let h = n as f64 * t.conditional_entropy();
        prop_assert!(size <= h.exp2() * (1.0 + 1e-12));
        prop_assert!(size >= ((n + 1) as f64).powi(-4) * h.exp2() * (1.0 - 1e-12));
    }

    #[test]
    fn criterion_ordering(weights in dist(3), seed_val in 0u64..1000, flip in 0.05f64..0.45) {
        // three random deterministic members on n = 2, binary alphabets
        use rand::Rng;
        let mut rng = seed::rng(seed_val, "test/ordering", 0);
        let maps: Vec<Vec<usize>> = (0..3).map(|_| (0..4).map(|_| rng.random_range(0..4)).collect()).collect();
        let code = ChannelFamilyCode::deterministic(2, 2, 2, &maps, weights.probs().to_vec()).unwrap();
        let p = Distribution::uniform(2).unwrap();
        let w = Channel::bsc(flip).unwrap();
        let rep = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &Caps::default()).unwrap();
        prop_assert!(rep.local_err <= rep.global_err + 1e-12);
        prop_assert!(rep.letterwise_source_err <= rep.local_err + 1e-12);
    }

    #[test]
    fn dilution_within_bound(q in (2usize..17).prop_flat_map(dist), eps in 0.02f64..0.5) {
        let plan = build_dilution(&q, eps).unwrap();
        prop_assert!(plan.realized_error() <= plan.error_bound() + 1e-12);
        prop_assert!(plan.dropped_mass <= eps + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_error_outputs_are_feasible((p, w) in (2usize..4, 2usize..4).prop_flat_map(|(xs, ys)| (dist(xs), channel(xs, ys)))) {
        let inst = ZeroErrorInstance::new(p.clone(), w.clone(), None).unwrap();
        let caps = Caps::default();
        let r = alternate(&inst, &AlternateOptions { restarts: 3, max_iters: 20, ..Default::default() }, &caps).unwrap();
        let f = &r.factorization;
        prop_assert!(feasible_check(&inst, &f.e, &f.d).unwrap().feasible);
        let i = mutual_information(&p, &w).unwrap();
        prop_assert!(i <= f.objective + 1e-9 && f.objective <= entropy(&p) + 1e-9);
        prop_assert!(r.trace.windows(2).all(|s| s[1] <= s[0] + 1e-12));
        // vertex search on the final D keeps every row within |Y| nonzeros
        let v = e_step(&inst, &f.d, &caps).unwrap();
        prop_assert!(v.row_supports().iter().all(|s| *s <= w.output_size()));
        prop_assert!(v.used_columns() <= w.input_size() * w.output_size() - 1);
    }

    #[test]
    fn rd_is_monotone_and_convex(p in dist(2), a in 0.0f64..0.5) {
        let spec = DistortionSpec::hamming(2, 0.0).unwrap();
        let ts = [a * 0.5, a * 0.75, a];
        let r: Vec<f64> = ts.iter().map(|t| rd_function(&p, &spec.with_target(*t).unwrap(), 2).unwrap().rate).collect();
        prop_assert!(r[0] >= r[1] - 1e-9 && r[1] >= r[2] - 1e-9);
        prop_assert!(r[1] <= 0.5 * (r[0] + r[2]) + 1e-7);
    }
}

#[test]
fn conditional_class_uniformity_and_transpose() {
    // pushing uniform-on-T_R through W_T gives uniform-on-T_S, and the reverse kernel is V_T
    let caps = Caps::default();
    for n in 1..=5 {
        for t in enumerate_joint_types(n, 2, 3, None, &caps).unwrap() {
            let ctx = CoveringContext::new(&t, &caps).unwrap();
            let mut q = vec![0.0; ctx.s_size];
            let mut reverse = vec![vec![0.0; ctx.r_size]; ctx.s_size];
            for (xr, ys) in ctx.compatible.iter().enumerate() {
                for y in ys {
                    let mass = 1.0 / ctx.r_size as f64 / ys.len() as f64;
                    q[*y as usize] += mass;
                    reverse[*y as usize][xr] += mass;
                }
            }
            for (y, qy) in q.iter().enumerate() {
                assert!((qy - 1.0 / ctx.s_size as f64).abs() < 1e-12, "type {t}");
                for (xr, v) in reverse[y].iter().enumerate() {
                    let vt = if ctx.compatible[xr].binary_search(&(y as u32)).is_ok() { 1.0 / ctx.given_y as f64 } else { 0.0 };
                    assert!((v / qy - vt).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn exact_type_sandwich() {
    for n in 1..=10 {
        for t in enumerate_exact_types(n, 3, &Caps::default()).unwrap() {
            let size = type_class_size(&t).to_f64().unwrap();
            let h = n as f64 * t.entropy();
            assert!(size <= h.exp2() * (1.0 + 1e-12));
            assert!(size >= ((n + 1) as f64).powi(-3) * h.exp2() * (1.0 - 1e-12));
        }
    }
    assert!(ExactType::new(vec![]).is_err() || ExactType::new(vec![0]).is_err());
}

#[test]
fn covering_verification_is_order_free() {
    let caps = Caps::default();
    let ctx = CoveringContext::new(&JointType::parse("2,1;1,2").unwrap(), &caps).unwrap();
    let (mut fam, check) = build_covering(&ctx, 0.1, CoveringMode::Guaranteed, 3, 10, &caps).unwrap();
    let mut rng = seed::rng(0, "test/shuffle", 0);
    let m = fam.m as usize;
    for chunk in fam.words.chunks_mut(m) {
        chunk.shuffle(&mut rng);
    }
    assert_eq!(verify_covering(&fam, &ctx).unwrap(), check);
}

#[test]
fn transcripts_feed_back_and_repeat() {
    let p = Distribution::uniform(2).unwrap();
    let w = Channel::bsc(0.25).unwrap();
    let caps = Caps::default();
    let params = SimParams { n: 4, ..Default::default() };
    let code = build_sim_code(&p, &w, &params, &caps).unwrap();
    let again = build_sim_code(&p, &w, &params, &caps).unwrap();
    let run = |c: &distcomp::simulate::SimCode| {
        (0..200u64)
            .map(|i| {
                let mut rng = seed::rng(5, "test/transcripts", i);
                let x: Vec<usize> = (0..4).map(|k| ((i >> k) & 1) as usize).collect();
                let shared = c.sample_shared_index(&mut rng);
                c.encode(&x, &shared, &mut rng).unwrap()
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (run(&code), run(&again));
    assert_eq!(a, b);
    for t in &a {
        assert_eq!(code.decode_transcript(t).unwrap(), t.y_word);
    }
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let p = Distribution::new(vec![0.6, 0.4]).unwrap();
    let w = Channel::bsc(0.25).unwrap();
    let caps = Caps::default();
    let code = build_sim_code(&p, &w, &SimParams { n: 4, ..Default::default() }, &caps).unwrap();
    let exact = measure_fidelity(&p, &w, &code, FidelityMode::Exact, &caps).unwrap();
    let mc = measure_fidelity(&p, &w, &code, FidelityMode::MonteCarlo { samples: 20_000, seed: 1 }, &caps).unwrap();
    let se = mc.standard_errors.unwrap();
    assert!((mc.global_err - exact.global_err).abs() <= 3.0 * se.global_err + 1e-12);
    assert!((mc.local_err - exact.local_err).abs() <= 3.0 * se.local_err + 1e-12);
    assert!((mc.empirical_joint_err - exact.empirical_joint_err).abs() <= 3.0 * se.empirical_joint_err + 1e-12);
}

#[test]
fn rd_code_respects_converse() {
    let p = Distribution::new(vec![0.5, 0.5]).unwrap();
    let caps = Caps::default();
    for (n, d) in [(4, 0.1), (4, 0.25), (5, 0.2)] {
        let spec = DistortionSpec::hamming(2, d).unwrap();
        let code = rd_code_via_simulation(&p, &spec, 2, &SimParams { n, ..Default::default() }, &caps).unwrap();
        assert!(code.used_rate >= code.converse_rate - 1e-6, "n={n} d={d}");
        assert!(code.distortion_selected <= code.distortion_mean + 1e-12);
        assert!(code.distortion <= code.distortion_selected + 1e-12);
    }
}
