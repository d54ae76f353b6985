//! Acceptance gate. One test per shipped guarantee; each prints a single
//! pass/fail line with its runtime. Seeds, tolerances, and wall-clock
//! budgets are pinned here, so speed regressions fail as loudly as wrong
//! answers.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use sqsum::analytic::{
    bump_build, divisor_witness_from_factors, poisson_check, tail_bound_check, weyl_bound_ratio,
    weyl_sum, weyl_sum_oracle, BumpSpec,
};
use sqsum::arith::integer_kth_root;
use sqsum::congruence::{brute_force_congruence, solution_bound, solve_quadratic_congruence};
use sqsum::corpus;
use sqsum::extremal::{construct_example1, is_square_sum_free, sf_exact, sf_exhaustive};
use sqsum::factor::SpfSieve;
use sqsum::gap_squares::{
    exhaustive_ap_scan, exhaustive_gap2_scan, find_pz2_in_ap, find_pz2_in_gap2,
};
use sqsum::structure::{dichotomy, merge_algorithm, verify_dichotomy, DichotomyBranch};
use sqsum::sumset::{ruzsa_cover, SumBitset};
use sqsum::{Error, IntegerSet, SolverConfig};

const SEED_AP_GUARANTEED: u64 = 101;
const SEED_AP_RANDOM: u64 = 102;
const SEED_GAP2: u64 = 103;
const SEED_CONGRUENCE: u64 = 104;
const SEED_WEYL_AUDIT: u64 = 105;
const SEED_WEYL_RATIO: u64 = 106;
const SEED_COVER: u64 = 107;
const SEED_THROUGHPUT: u64 = 108;

const VERIFY_BUDGET_BITS: u64 = 1 << 32;

fn tag(num: u32, slug: &str) -> String {
    format!("criterion {num:02} {slug}")
}

/// Asserts the wall-clock budget, then prints the one-line verdict.
fn report(num: u32, slug: &str, started: Instant, budget: Duration, note: &str) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "{}: FAIL — took {elapsed:.2?}, budget {budget:?}",
        tag(num, slug)
    );
    println!("{}: PASS ({elapsed:.2?}{note})", tag(num, slug));
}

fn search_config() -> SolverConfig {
    SolverConfig {
        enumeration_budget: 4_000_000_000,
        ..SolverConfig::default()
    }
}

#[test]
fn criterion_01_exact_search_matches_oracle() {
    let t0 = Instant::now();
    let slug = "exact-search-vs-oracle";
    let cfg = search_config();
    let mut prev = 0;
    for n in 1..=25u64 {
        let r = sf_exact(n, &cfg).unwrap();
        let (oracle, oracle_witness) = sf_exhaustive(n).unwrap();
        assert_eq!(
            r.sf_value,
            oracle,
            "{}: FAIL — n={n} search {} vs oracle {}",
            tag(1, slug),
            r.sf_value,
            oracle
        );
        assert!(r.exact, "{}: FAIL — n={n} did not close", tag(1, slug));
        assert_eq!(r.witness.len() as u64, r.sf_value);
        assert_eq!(oracle_witness.len() as u64, oracle);
        assert!(is_square_sum_free(&r.witness, VERIFY_BUDGET_BITS).unwrap());
        prev = r.sf_value;
    }
    assert!(
        t0.elapsed() < Duration::from_secs(60),
        "{}: FAIL — oracle range overran 60s",
        tag(1, slug)
    );
    let mut nodes = 0;
    for n in 26..=40u64 {
        let r = sf_exact(n, &cfg).unwrap();
        assert!(
            r.exact,
            "{}: FAIL — n={n} exhausted its node budget",
            tag(1, slug)
        );
        assert_eq!(r.witness.len() as u64, r.sf_value);
        assert!(is_square_sum_free(&r.witness, VERIFY_BUDGET_BITS).unwrap());
        assert!(
            r.sf_value >= prev,
            "{}: FAIL — maximum dropped from {prev} at n={n}",
            tag(1, slug)
        );
        prev = r.sf_value;
        nodes += r.nodes;
    }
    let note = format!("; sf(40)={prev}, {nodes} nodes above the oracle range");
    report(1, slug, t0, Duration::from_secs(660), &note);
}

#[test]
fn criterion_02_multiplier_family_scales() {
    let t0 = Instant::now();
    let slug = "multiplier-family";
    let ns = corpus::log_spaced(100, 100_000, 30);
    assert_eq!(ns.len(), 30);
    for &n in &ns {
        let a = construct_example1(n).unwrap();
        assert!(
            is_square_sum_free(&a, VERIFY_BUDGET_BITS).unwrap(),
            "{}: FAIL — n={n} family hits a square",
            tag(2, slug)
        );
        let floor_cbrt = integer_kth_root(n as u128, 3) as u64;
        assert!(
            a.len() as u64 >= floor_cbrt / 2,
            "{}: FAIL — n={n} size {} below {}",
            tag(2, slug),
            a.len(),
            floor_cbrt / 2
        );
        assert!(a.elements().iter().all(|&e| e >= 1 && e <= n));
    }
    report(2, slug, t0, Duration::from_secs(30), "");
}

#[test]
fn criterion_03_progression_square_search() {
    let t0 = Instant::now();
    let slug = "progression-square-search";
    for inst in corpus::guaranteed_ap_instances(SEED_AP_GUARANTEED, 1000) {
        let hit = find_pz2_in_ap(&inst)
            .unwrap()
            .unwrap_or_else(|| panic!("{}: FAIL — guaranteed instance missed", tag(3, slug)));
        assert!(
            hit.constructive,
            "{}: FAIL — {inst:?} fell back to scanning",
            tag(3, slug)
        );
        assert_eq!(
            inst.p * hit.z * hit.z,
            inst.r + inst.q * hit.x,
            "{}: FAIL — hit does not satisfy its own equation",
            tag(3, slug)
        );
        assert!(hit.x >= 0 && hit.x <= inst.l as i128);
    }
    for inst in corpus::random_ap_instances(SEED_AP_RANDOM, 1000, 10_000) {
        let found = match find_pz2_in_ap(&inst) {
            Ok(opt) => opt,
            Err(Error::NoResidueRoot) => None,
            Err(e) => panic!("{}: FAIL — {e}", tag(3, slug)),
        };
        let oracle = exhaustive_ap_scan(&inst, 1_000_000).unwrap();
        assert_eq!(
            found.is_some(),
            oracle.is_some(),
            "{}: FAIL — existence disagrees on {inst:?}",
            tag(3, slug)
        );
        if let Some(hit) = found {
            assert_eq!(inst.p * hit.z * hit.z, inst.r + inst.q * hit.x);
            assert!(hit.x >= 0 && hit.x <= inst.l as i128);
        }
    }
    report(3, slug, t0, Duration::from_secs(30), "");
}

#[test]
fn criterion_04_rank2_square_search() {
    let t0 = Instant::now();
    let slug = "rank2-square-search";
    for inst in corpus::random_gap2_instances(SEED_GAP2, 300, 100_000) {
        let found = match find_pz2_in_gap2(&inst) {
            Ok(opt) => opt,
            Err(Error::NoResidueRoot) => None,
            Err(e) => panic!("{}: FAIL — {e}", tag(4, slug)),
        };
        let oracle = exhaustive_gap2_scan(&inst, 100_000).unwrap();
        assert_eq!(
            found.is_some(),
            oracle.is_some(),
            "{}: FAIL — existence disagrees on {inst:?}",
            tag(4, slug)
        );
        if let Some(hit) = found {
            assert!(hit.x1 >= 0 && hit.x1 <= inst.l1 as i128);
            assert!(hit.x2 >= 0 && hit.x2 <= inst.l2 as i128);
            assert_eq!(
                inst.p * hit.w * hit.w,
                inst.r + inst.q * (inst.q1 * hit.x1 + inst.q2 * hit.x2),
                "{}: FAIL — hit escapes the value set on {inst:?}",
                tag(4, slug)
            );
        }
    }
    report(4, slug, t0, Duration::from_secs(60), "");
}

#[test]
fn criterion_05_congruence_solver() {
    let t0 = Instant::now();
    let slug = "congruence-solver";
    let exp_d = 3;
    let mut oracle_ran = 0usize;
    let mut worst_ratio = 0.0f64;
    let instances = corpus::random_congruence_instances(SEED_CONGRUENCE, 500, 5000, 4);
    for inst in &instances {
        let solved = solve_quadratic_congruence(inst, exp_d);
        if let Ok(sol) = &solved {
            assert!(
                inst.check(&sol.x, sol.z, sol.bound_used),
                "{}: FAIL — solution fails its own congruence on {inst:?}",
                tag(5, slug)
            );
            let scale = ((inst.p * inst.q) as f64).sqrt();
            let log_cap = (inst.q as f64).ln().max(1.0).powi(3);
            let ratio = sol.x.iter().map(|&x| x as f64 / scale).fold(0.0, f64::max);
            assert!(
                ratio <= log_cap,
                "{}: FAIL — x/{scale:.1} = {ratio:.3} above {log_cap:.3} on {inst:?}",
                tag(5, slug)
            );
            worst_ratio = worst_ratio.max(ratio / log_cap);
        }
        let bound = solution_bound(inst.p, inst.q, exp_d);
        match brute_force_congruence(inst, bound) {
            Ok(Some(_)) => {
                oracle_ran += 1;
                assert!(
                    solved.is_ok(),
                    "{}: FAIL — oracle solves {inst:?}, solver errs",
                    tag(5, slug)
                );
            }
            Ok(None) => {
                oracle_ran += 1;
                assert!(
                    solved.is_err(),
                    "{}: FAIL — solver claims a solution the oracle box lacks on {inst:?}",
                    tag(5, slug)
                );
            }
            Err(Error::BudgetExceeded { .. }) => {}
            Err(e) => panic!("{}: FAIL — oracle error {e}", tag(5, slug)),
        }
    }
    let note = format!(
        "; oracle covered {oracle_ran}/{}, worst bound fraction {worst_ratio:.3}",
        instances.len()
    );
    report(5, slug, t0, Duration::from_secs(120), &note);
}

#[test]
fn criterion_06_divisor_witness_sweep() {
    let t0 = Instant::now();
    let slug = "divisor-witness-sweep";
    let sieve = SpfSieve::new(1_000_001);
    for n in 1..=1_000_000u64 {
        let factors = sieve.factorize(n);
        let tau_n = sieve.tau(n) as f64;
        for k in [3u32, 4, 5] {
            let d = divisor_witness_from_factors(n, &factors, k).unwrap();
            assert!(
                n % d == 0 && (d as u128).pow(k) <= n as u128,
                "{}: FAIL — witness {d} for n={n}, k={k} out of range",
                tag(6, slug)
            );
            let kf = k as f64;
            let lhs = (kf + 1.0).powf(kf) * (sieve.tau(d) as f64).powf(kf * (kf + 1.0).ln());
            assert!(
                lhs >= tau_n,
                "{}: FAIL — bound misses at n={n}, k={k}: {lhs:.3} < {tau_n}",
                tag(6, slug)
            );
        }
    }
    report(6, slug, t0, Duration::from_secs(120), "");
}

#[test]
fn criterion_07_periodization_identity() {
    let t0 = Instant::now();
    let slug = "periodization-identity";
    for delta in [0.01, 0.03, 0.06] {
        let f = bump_build(BumpSpec {
            m: 3.0,
            n: 50.0,
            delta,
        })
        .unwrap();
        let tol = 1e-9 * f.fourier_zero();
        for j in 0..10 {
            let big_t = 0.75 * 1.5f64.powi(j);
            for i in 0..10 {
                let t = -10.0 + 7.0 * i as f64;
                let (lhs, rhs, diff) = poisson_check(&f, big_t, t).unwrap();
                assert!(
                    diff <= tol,
                    "{}: FAIL — delta={delta}, T={big_t:.2}, t={t}: {lhs} vs {rhs}",
                    tag(7, slug)
                );
            }
        }
    }
    report(7, slug, t0, Duration::from_secs(10), "");
}

#[test]
fn criterion_08_transform_decay() {
    let t0 = Instant::now();
    let slug = "transform-decay";
    let n = 50.0;
    for delta in [0.01, 0.03, 0.06] {
        let f = bump_build(BumpSpec { m: 3.0, n, delta }).unwrap();
        for i in 0..200 {
            let u = (i as f64 + 1.0) / 200.0;
            let lambda_n = u * u * 1e4; // |lambda * n| <= 1e4
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let lambda = sign * lambda_n / n;
            let measured = f.fourier(lambda).norm();
            let envelope =
                16.0 * f.fourier_zero() * (-(delta / 2.0) * (lambda * n).abs().sqrt()).exp();
            assert!(
                measured <= envelope,
                "{}: FAIL — delta={delta}, lambda={lambda:.4}: {measured:e} > {envelope:e}",
                tag(8, slug)
            );
        }
    }
    report(8, slug, t0, Duration::from_secs(10), "");
}

#[test]
fn criterion_09_exponential_sum_audit() {
    let t0 = Instant::now();
    let slug = "exponential-sum-audit";
    for inst in corpus::random_weyl_instances(SEED_WEYL_AUDIT, 100) {
        let fast = weyl_sum(&inst).unwrap();
        let exact = weyl_sum_oracle(&inst).unwrap();
        assert!(
            (fast - exact).abs() <= 1e-9 * exact.max(1.0),
            "{}: FAIL — {fast} vs oracle {exact} on {inst:?}",
            tag(9, slug)
        );
    }
    let mut worst = 0.0f64;
    for inst in corpus::weyl_ratio_grid(SEED_WEYL_RATIO) {
        let ratio = weyl_bound_ratio(&inst, 6.0).unwrap();
        worst = worst.max(ratio);
    }
    assert!(
        worst <= 100.0,
        "{}: FAIL — bound ratio reached {worst:.2}",
        tag(9, slug)
    );
    let note = format!("; max bound ratio {worst:.3}");
    report(9, slug, t0, Duration::from_secs(120), &note);
}

#[test]
fn criterion_10_tail_envelope() {
    let t0 = Instant::now();
    let slug = "tail-envelope";
    let k0s = corpus::log_spaced(1, 1_000_000, 20);
    assert_eq!(k0s.len(), 20);
    for i in 1..=20u32 {
        let x = i as f64 / 21.0;
        for &k0 in &k0s {
            let (sum, bound) = tail_bound_check(x, k0).unwrap();
            assert!(
                sum <= bound,
                "{}: FAIL — x={x:.3}, k0={k0}: {sum} > {bound}",
                tag(10, slug)
            );
        }
    }
    report(10, slug, t0, Duration::from_secs(5), "");
}

#[test]
fn criterion_11_covering_bound() {
    let t0 = Instant::now();
    let slug = "covering-bound";
    for (x, y) in corpus::random_pair_slices(SEED_COVER, 1000) {
        let cover = ruzsa_cover(&x, &y).unwrap();
        let xy: HashSet<i64> = x
            .iter()
            .flat_map(|&a| y.iter().map(move |&b| a + b))
            .collect();
        assert_eq!(xy.len(), cover.xy_size);
        assert!(
            cover.translates.len() <= xy.len() / y.len(),
            "{}: FAIL — {} translates exceed {}/{}",
            tag(11, slug),
            cover.translates.len(),
            xy.len(),
            y.len()
        );
        let diffs: HashSet<i64> = y
            .iter()
            .flat_map(|&a| y.iter().map(move |&b| a - b))
            .collect();
        for &xv in &x {
            assert!(
                cover
                    .translates
                    .iter()
                    .any(|&t| diffs.contains(&(xv - t))),
                "{}: FAIL — {xv} not covered for X={x:?}, Y={y:?}",
                tag(11, slug)
            );
        }
    }
    report(11, slug, t0, Duration::from_secs(10), "");
}

#[test]
fn criterion_12_structure_pipeline() {
    let t0 = Instant::now();
    let slug = "structure-pipeline";
    for seed in 0..100u64 {
        let (blocks, rest, config) = corpus::random_merge_run(seed);
        let (trace, finals) = merge_algorithm(&blocks, &rest, &config).unwrap();
        trace.check().unwrap();
        let n_max = blocks
            .iter()
            .flat_map(|b| b.elements.iter())
            .chain(rest.iter())
            .copied()
            .max()
            .unwrap();
        let rounds_cap = trace.growth_rounds_bound(n_max, 1).unwrap();
        assert!(
            (trace.k as f64) <= rounds_cap,
            "{}: FAIL — seed {seed} ran {} rounds, cap {rounds_cap:.2}",
            tag(12, slug),
            trace.k
        );
        let pool: HashSet<u64> = rest.iter().copied().collect();
        let mut seen = HashSet::new();
        for &a in &trace.consumed {
            assert!(pool.contains(&a) && seen.insert(a));
        }
        let final_len = trace.b[trace.k] as usize;
        assert!(!finals.is_empty());
        assert!(finals.iter().all(|f| f.len() == final_len));
        for &(round, used) in &trace.h_deviations {
            assert!(round >= 1 && used < config.h);
        }
    }
    let cfg = SolverConfig::default();
    for seed in 0..50u64 {
        let (set, d) = corpus::scaled_divisor_set(seed);
        let outcome = dichotomy(&set, 1, &cfg).unwrap();
        match outcome.branch {
            DichotomyBranch::Divisor { d: found } => assert_eq!(
                found,
                d,
                "{}: FAIL — seed {seed} found divisor {found}, built {d}",
                tag(12, slug)
            ),
            ref other => panic!(
                "{}: FAIL — seed {seed} took branch {other:?}",
                tag(12, slug)
            ),
        }
        verify_dichotomy(&set, 1, &cfg, &outcome).unwrap();
    }
    let interval = IntegerSet::interval(64);
    let outcome = dichotomy(&interval, 1, &cfg).unwrap();
    match &outcome.branch {
        DichotomyBranch::Progression { gap, .. } => {
            assert!(gap.rank() >= 1 && gap.rank() <= 2);
        }
        other => panic!("{}: FAIL — interval took branch {other:?}", tag(12, slug)),
    }
    verify_dichotomy(&interval, 1, &cfg, &outcome).unwrap();
    report(12, slug, t0, Duration::from_secs(60), "");
}

#[test]
fn criterion_13_throughput() {
    let t0 = Instant::now();
    let slug = "throughput";
    let mut times = Vec::new();
    for i in 0..11u64 {
        let a = corpus::random_set(SEED_THROUGHPUT + i, 48, 100_000);
        let t = Instant::now();
        let sums = SumBitset::subset_sums(&a, VERIFY_BUDGET_BITS).unwrap();
        times.push(t.elapsed());
        assert!(sums.count() > 0);
    }
    times.sort();
    let median = times[times.len() / 2];
    assert!(
        median < Duration::from_millis(100),
        "{}: FAIL — median subset-sum time {median:.2?}",
        tag(13, slug)
    );
    let t_search = Instant::now();
    let r = sf_exact(30, &search_config()).unwrap();
    let search_elapsed = t_search.elapsed();
    assert!(r.exact);
    assert!(
        search_elapsed < Duration::from_secs(10),
        "{}: FAIL — sf_exact(30) took {search_elapsed:.2?}",
        tag(13, slug)
    );
    let note = format!("; median sums {median:.2?}, sf_exact(30) {search_elapsed:.2?}");
    report(13, slug, t0, Duration::from_secs(30), &note);
}
