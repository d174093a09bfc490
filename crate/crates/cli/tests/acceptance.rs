//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are run in full and reported as FAIL; the process
//! exits 0 only when the failing set is exactly that list. `ACCEPTANCE_ONLY=3,5` runs a subset.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sagap_core::conc::{mc_concentration, strictly_balanced, EdgeSet};
use sagap_core::hgraph::{for_each_combination, sample_gnp, to_incidence_bipartite, witness_scan, Vertex};
use sagap_core::lift::{ie_sum, verify_all, ConstraintReport, Mode};
use sagap_core::logvalue::compensated_sum;
use sagap_core::oracle::PhiOracle;
use sagap_core::phi::{binom, phi, phi_star_bruteforce, phi_star_closure};
use sagap_core::pseudocal::{chi, compare_all, PcParams};
use sagap_core::rational::{rat, to_f64};
use sagap_core::relax::{dksh_opt, dksh_opt_enumerate, gap_report_at, mpu_opt, mpu_opt_enumerate, ssbve_opt, target_exponent, Problem};
use sagap_core::solution::{build_table, desk_params, Overrides, Params, PseudoSolution, TableView};
use sagap_core::{Error, Hypergraph, Rational, VertexSet};
use std::collections::HashSet;
use std::time::Instant;

/// Criteria that fail at desk scale; see the decisions ledger for the analysis.
const KNOWN_UNATTAINABLE: &[u32] = &[6];

type Verdict = Result<Vec<String>, Vec<String>>;

fn desk(n: usize, overrides: &Overrides) -> Params {
    desk_params(n, 2, rat(1, 2), rat(1, 2), overrides).unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, max: usize) -> VertexSet {
    let size = rng.gen_range(0..=max.min(n));
    let mut v: Vec<Vertex> = (0..n as Vertex).collect();
    v.shuffle(rng);
    VertexSet::from_vec(v[..size].to_vec())
}

fn verdict(ok: bool, details: Vec<String>) -> Verdict {
    if ok {
        Ok(details)
    } else {
        Err(details)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let alphas = [rat(1, 3), rat(1, 2), rat(4, 5), rat(3, 2)];
    let probs = [0.15, 0.3, 0.5, 0.7];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut compared, mut cap_bound, mut bad) = (0usize, 0usize, Vec::new());
    let mut k = 0usize;
    while compared < 600 {
        let c = if k.is_multiple_of(2) { 2 } else { 3 };
        let n = rng.gen_range(4..=12);
        let g = sample_gnp(n, c, probs[rng.gen_range(0..probs.len())], rng.gen()).unwrap();
        let at = alphas[(k / 2) % alphas.len()];
        k += 1;
        let s = random_set(&mut rng, n, 3);
        let tau = rng.gen_range(s.len().max(1)..=n);
        let fam = phi_star_bruteforce(&g, at, &s, tau).unwrap();
        if fam.cap_bound {
            cap_bound += 1;
            continue;
        }
        compared += 1;
        let (value, set) = phi_star_closure(&g, at, &s);
        if value != fam.phi_star || set != fam.maximal_set {
            bad.push(format!("n={n} c={c} alphaTilde={at} S={s}: closure ({value}, {set}) vs brute force ({}, {})", fam.phi_star, fam.maximal_set));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut details = vec![format!("{compared} instances compared, {cap_bound} skipped where the cap binds, {} discrepancies, {secs:.1}s", bad.len())];
    let ok = bad.is_empty() && secs < 120.0;
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

fn criterion_2() -> Verdict {
    let alphas = [rat(1, 3), rat(1, 2), rat(9, 20), rat(4, 5), rat(3, 2), rat(2, 1)];
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut bad = Vec::new();
    let mut triples = 0;
    for _ in 0..200 {
        let c = rng.gen_range(2..=3);
        let n = rng.gen_range(6..=30);
        let g = sample_gnp(n, c, rng.gen_range(0.05..0.6), rng.gen()).unwrap();
        for _ in 0..50 {
            let at = alphas[rng.gen_range(0..alphas.len())];
            let s1 = random_set(&mut rng, n, n);
            let s2 = random_set(&mut rng, n, n);
            triples += 1;
            let lhs = phi(&g, at, &s1.union(&s2)) + phi(&g, at, &s1.intersection(&s2));
            let rhs = phi(&g, at, &s1) + phi(&g, at, &s2);
            if lhs < rhs {
                bad.push(format!("n={n} S1={s1} S2={s2}: {lhs} < {rhs}"));
            }
        }
    }
    let mut details = vec![format!("{triples} triples, {} violations", bad.len())];
    let ok = bad.is_empty() && triples >= 10_000;
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

/// Every superset of `s` with at most `cap` vertices, for graphs (c = 2) on at most 32 vertices.
struct Family {
    best: i64,
    winners: Vec<u32>,
}

fn enumerate_family(adj: &[u32], s: u32, cap: u32, a: i64, b: i64) -> Family {
    #[allow(clippy::too_many_arguments)]
    fn rec(adj: &[u32], s: u32, cur: u32, start: usize, edges: i64, cap: u32, a: i64, b: i64, fam: &mut Family) {
        let val = a * edges - b * cur.count_ones() as i64;
        if val > fam.best {
            fam.best = val;
            fam.winners.clear();
        }
        if val == fam.best {
            fam.winners.push(cur);
        }
        if cur.count_ones() >= cap {
            return;
        }
        for v in start..adj.len() {
            if s >> v & 1 == 0 {
                let gained = (adj[v] & cur).count_ones() as i64;
                rec(adj, s, cur | 1 << v, v + 1, edges + gained, cap, a, b, fam);
            }
        }
    }
    let inner: i64 = (0..adj.len()).filter(|&v| s >> v & 1 == 1).map(|v| (adj[v] & s).count_ones() as i64).sum::<i64>() / 2;
    let mut fam = Family { best: i64::MIN, winners: Vec::new() };
    rec(adj, s, s, 0, inner, cap, a, b, &mut fam);
    fam
}

fn mask_of(s: &VertexSet) -> u32 {
    s.iter().fold(0, |m, v| m | 1 << v)
}

fn set_of(mask: u32) -> VertexSet {
    (0..32).filter(|v| mask >> v & 1 == 1).collect()
}

fn criterion_3() -> Verdict {
    let mut details = Vec::new();
    let mut bad = Vec::new();
    // The desk setting, then alphaTilde = alpha, where ties between optima are common.
    let settings = [Overrides::default(), Overrides { alpha_tilde: Some(rat(1, 2)), allow_equal: true, ..Overrides::default() }];
    for overrides in &settings {
        structure_pass(&desk(20, overrides), &mut details, &mut bad);
    }
    let ok = bad.is_empty();
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

fn structure_pass(params: &Params, details: &mut Vec<String>, bad: &mut Vec<String>) {
    let n = params.n;
    let (a, b) = (*params.alpha_tilde.numer(), *params.alpha_tilde.denom());
    let tau = params.tau as u32;
    let half = tau / 2;
    let (mut total, mut qualifying, mut tied) = (0usize, 0usize, 0usize);
    let (mut unions, mut nestings, mut iso_a, mut iso_b) = (0usize, 0usize, 0usize, 0usize);
    let before = bad.len();
    for seed in 0..100u64 {
        let g = sample_gnp(n, 2, params.prob(), seed).unwrap();
        let mut adj = vec![0u32; n];
        for e in g.edges() {
            adj[e[0] as usize] |= 1 << e[1];
            adj[e[1] as usize] |= 1 << e[0];
        }
        let mut oracle = PhiOracle::new(&g, params.alpha_tilde, params.tau);
        let mut sets = Vec::new();
        for k in 0..=2 {
            for_each_combination(n, k, |c| sets.push(VertexSet::from_sorted(c)));
        }
        // Maximal optimal set of every qualifying S.
        let mut maximal = std::collections::HashMap::new();
        let mut families = std::collections::HashMap::new();
        for s in &sets {
            total += 1;
            let fam = enumerate_family(&adj, mask_of(s), tau, a, b);
            if oracle.phi_star(s) != Rational::new(fam.best, b) {
                bad.push(format!("seed {seed} S={s}: oracle {} vs enumeration {}", oracle.phi_star(s), Rational::new(fam.best, b)));
            }
            if fam.winners.iter().any(|w| w.count_ones() > half) {
                continue;
            }
            qualifying += 1;
            tied += usize::from(fam.winners.len() > 1);
            let winners: HashSet<u32> = fam.winners.iter().copied().collect();
            for &x in &fam.winners {
                for &y in &fam.winners {
                    unions += 1;
                    if !winners.contains(&(x | y)) {
                        bad.push(format!("seed {seed} S={s}: union of optima {} and {} is not optimal", set_of(x), set_of(y)));
                    }
                }
            }
            let top = fam.winners.iter().fold(0u32, |m, &w| m | w);
            if set_of(top) != oracle.best_set(s) {
                bad.push(format!("seed {seed} S={s}: maximal optimum {} vs oracle {}", set_of(top), oracle.best_set(s)));
            }
            maximal.insert(mask_of(s), top);
            families.insert(mask_of(s), winners);
        }
        for s in sets.iter().filter(|s| s.len() <= 1) {
            let sm = mask_of(s);
            let Some(&top) = maximal.get(&sm) else { continue };
            for i in 0..n {
                if sm >> i & 1 == 1 {
                    continue;
                }
                let si = sm | 1 << i;
                let Some(&top_i) = maximal.get(&si) else { continue };
                nestings += 1;
                if top & !top_i != 0 {
                    bad.push(format!("seed {seed} S={s} i={i}: {} not inside {}", set_of(top), set_of(top_i)));
                }
                let isolated = adj[i] & top_i == 0;
                if isolated && top >> i & 1 == 0 {
                    iso_a += 1;
                    if !families[&si].contains(&(top | 1 << i)) {
                        bad.push(format!("seed {seed} S={s} i={i}: isolated i but S_max + i is not optimal"));
                    }
                }
                if !isolated {
                    iso_b += 1;
                    let outside = top_i & !sm;
                    if (0..n).any(|j| outside >> j & 1 == 1 && adj[j] & top_i == 0) {
                        bad.push(format!("seed {seed} S={s} i={i}: isolated vertex outside S in {}", set_of(top_i)));
                    }
                }
            }
        }
    }
    let skipped = total - qualifying;
    details.push(format!(
        "alphaTilde={}: {qualifying}/{total} sets qualify (non-qualifying fraction {:.4}), {tied} with several optima",
        params.alpha_tilde,
        skipped as f64 / total as f64
    ));
    details.push(format!(
        "    {unions} union checks, {nestings} nesting checks, {iso_a} isolated and {iso_b} non-isolated cases; {} violations",
        bad.len() - before
    ));
}

fn criterion_4() -> Verdict {
    let n = 18;
    let params = desk(n, &Overrides { r: Some(4), ..Overrides::default() });
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for seed in 0..5u64 {
        let g = sample_gnp(n, 2, params.prob(), seed).unwrap();
        let sol = build_table(&g, &params).unwrap();
        let mut view = TableView::new(&sol, Some(&g));
        for k in 0..=4 {
            let mut pairs = Vec::new();
            for_each_combination(n, k, |c| {
                for mask in 0..1u32 << k {
                    let s: VertexSet = c.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 0).map(|(_, &v)| v).collect();
                    let t: VertexSet = c.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &v)| v).collect();
                    pairs.push((s, t));
                }
            });
            for (s, t) in pairs {
                checked += 1;
                let term = ie_sum(&mut view, &s, &t).unwrap().value;
                let ys = view.y(&s).unwrap().float;
                if term > ys * (1.0 + 1e-9) || term < ys / 2.0 * (1.0 - 1e-9) {
                    bad.push(format!("seed {seed} S={s} T={t}: {term} against y_S={ys}"));
                }
            }
        }
    }
    let mut details = vec![format!("{checked} pairs over 5 instances, {} violations", bad.len())];
    let ok = bad.is_empty();
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

struct Run {
    n: usize,
    seed: u64,
    g: Hypergraph,
    sol: PseudoSolution,
    report: ConstraintReport,
    witness: bool,
}

fn run_instance(n: usize, seed: u64, mode: &Mode) -> Run {
    let params = desk(n, &Overrides::default());
    let g = sample_gnp(n, 2, params.prob(), seed).unwrap();
    let sol = build_table(&g, &params).unwrap();
    let report = verify_all(&g, &sol, mode).unwrap();
    let witness = witness_scan(&g, params.alpha_tilde.recip(), params.tau).is_some();
    Run { n, seed, g, sol, report, witness }
}

fn mode_for(n: usize, seed: u64) -> Mode {
    match n {
        32 => Mode::Exhaustive,
        64 => Mode::Sampled { count: 100_000, seed, ratio_count: 40 },
        _ => Mode::Sampled { count: 100_000, seed, ratio_count: 16 },
    }
}

fn criterion_5(runs: &mut Vec<Run>) -> Verdict {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut bad = Vec::new();
    for n in [32usize, 64, 128] {
        let t0 = Instant::now();
        let (mut witnesses, mut pairs, mut ratio_pairs) = (0, 0, 0);
        for seed in 0..20u64 {
            let r = run_instance(n, seed, &mode_for(n, seed));
            pairs = pairs.max(r.report.enumerated);
            ratio_pairs = ratio_pairs.max(r.report.ratio_checked);
            if r.witness {
                witnesses += 1;
            } else {
                let rep = &r.report;
                if !rep.y_empty_is_one {
                    bad.push(format!("n={n} seed={seed}: y_empty != 1"));
                }
                if !rep.box_violations.is_empty() {
                    bad.push(format!("n={n} seed={seed}: {} box violations", rep.box_violations.len()));
                }
                if !rep.size_within_envelope {
                    bad.push(format!("n={n} seed={seed}: size ratio above the envelope"));
                }
                if !rep.per_edge.violations.is_empty() {
                    bad.push(format!("n={n} seed={seed}: {} per-edge violations", rep.per_edge.violations.len()));
                }
            }
            runs.push(r);
        }
        let max_size = runs.iter().filter(|r| r.n == n).filter_map(|r| r.report.max_size_ratio.as_ref().map(|m| m.value)).fold(0.0, f64::max);
        let envelope = runs.iter().find(|r| r.n == n).map_or(0.0, |r| r.report.envelope);
        let per_edge: u64 = runs.iter().filter(|r| r.n == n).map(|r| r.report.per_edge.checked).sum();
        details.push(format!(
            "n={n}: witness rate {witnesses}/20, {pairs} pairs per instance ({ratio_pairs} with ratio checks), max size ratio {max_size:.3} against envelope {envelope:.3e}, {per_edge} per-edge checks, {:.0}s",
            t0.elapsed().as_secs_f64()
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    details.push(format!("{} violations on non-witness instances, {secs:.0}s total", bad.len()));
    let ok = bad.is_empty() && secs <= 1800.0;
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

fn gap_at(r: &Run) -> Result<f64, String> {
    let k = (r.n as f64).sqrt().ceil() as usize;
    match gap_report_at(&r.g, &r.sol, &r.report, Problem::DkSH, Some(k)) {
        Ok(g) => Ok(g.gap),
        Err(Error::DegenerateGap(_)) => Ok(0.0),
        Err(e) => Err(format!("n={} seed={}: {e}", r.n, r.seed)),
    }
}

fn criterion_6(runs: &[Run]) -> Verdict {
    let mut details = Vec::new();
    let mut medians = Vec::new();
    let mut errors = Vec::new();
    let mut summarize = |n: usize, group: &[&Run], details: &mut Vec<String>| {
        let k = (n as f64).sqrt().ceil() as usize;
        let gaps: Vec<f64> = group.iter().filter_map(|r| gap_at(r).map_err(|e| errors.push(e)).ok()).collect();
        let cert_p: Vec<f64> = group.iter().map(|r| r.report.certified_p.unwrap_or(0.0)).collect();
        let dens: Vec<f64> = group.iter().filter_map(|r| r.report.min_density_ratio.as_ref().map(|m| m.value)).collect();
        let med = median(gaps.clone());
        let target = (n as f64).powf(target_exponent(Problem::DkSH, 2, 0.5, 0.5));
        let opt = if n <= 128 {
            let opts: Vec<f64> = group.iter().map(|r| dksh_opt(&r.g, k).unwrap() as f64).collect();
            format!(", median dksh_opt {:.1}", median(opts))
        } else {
            String::new()
        };
        details.push(format!(
            "n={n} k={k}: median gap {med:.3} over {} seeds, median certifiedP {:.1}, median min density ratio {:.3}{opt}, target n^(1/4) = {target:.2}",
            gaps.len(),
            median(cert_p),
            median(dens)
        ));
        med
    };
    for n in [32usize, 64, 128] {
        let group: Vec<&Run> = runs.iter().filter(|r| r.n == n).collect();
        medians.push(summarize(n, &group, &mut details));
    }
    // n = 256 costs minutes per seed; the full 20 only matter when the smaller sizes pass.
    let seeds = if medians.iter().all(|&m| m > 1.0) { 20 } else { 3 };
    let big: Vec<Run> = (0..seeds).map(|seed| run_instance(256, seed, &mode_for(256, seed))).collect();
    let group: Vec<&Run> = big.iter().collect();
    let m256 = summarize(256, &group, &mut details);
    if seeds < 20 {
        details.push("n=256 ran 3 seeds: the verdict was already fixed by the smaller sizes".into());
    }
    medians.push(m256);
    let above = medians.iter().all(|&m| m > 1.0);
    let monotone = medians.windows(2).all(|w| w[1] >= w[0]);
    details.push(format!("medians {medians:?}: all above 1: {above}, nondecreasing: {monotone}"));
    let ok = above && monotone && errors.is_empty() && seeds == 20;
    details.extend(errors.into_iter().take(5));
    verdict(ok, details)
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut equal, mut bnb) = (0usize, 0usize);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let c = rng.gen_range(2..=3);
        let n = rng.gen_range(8..=14);
        let g = sample_gnp(n, c, rng.gen_range(0.1..0.5), rng.gen()).unwrap();
        let b = to_incidence_bipartite(&g);
        for p in 1..=g.m() {
            let (x, y) = (ssbve_opt(&b, p).unwrap(), mpu_opt(&g, p).unwrap());
            equal += 1;
            if x != y {
                bad.push(format!("n={n} c={c} p={p}: ssbve {x} vs mpu {y}"));
            }
            if binom(n as i64, (y as i64).min(n as i64)) <= 100_000 {
                if let Ok(e) = mpu_opt_enumerate(&g, p) {
                    bnb += 1;
                    if e != y {
                        bad.push(format!("n={n} c={c} p={p}: mpu {y} vs enumeration {e}"));
                    }
                }
            }
        }
        for k in 0..=n {
            if binom(n as i64, k as i64) > 100_000 {
                continue;
            }
            let (x, y) = (dksh_opt(&g, k).unwrap(), dksh_opt_enumerate(&g, k).unwrap());
            bnb += 1;
            if x != y {
                bad.push(format!("n={n} c={c} k={k}: dksh {x} vs enumeration {y}"));
            }
        }
    }
    let mut details = vec![format!("{equal} incidence comparisons, {bnb} enumeration comparisons, {} mismatches", bad.len())];
    let ok = bad.is_empty();
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

fn criterion_8() -> Verdict {
    let params = desk(64, &Overrides::default());
    let mut details = Vec::new();
    let mut ok = true;
    for (k, s_max) in [VertexSet::from_slice(&[0]), VertexSet::from_slice(&[0, 1])].iter().enumerate() {
        let mc = mc_concentration(&params, s_max, 3, 200, 800 + k as u64, 3.0).unwrap();
        let ratio = mc.mean / mc.expectation_value;
        let within = (1.0 / 3.0..=3.0).contains(&ratio);
        ok &= within;
        details.push(format!("sMax={s_max}: Monte Carlo mean {:.4} vs exact {:.4} (ratio {ratio:.3})", mc.mean, mc.expectation_value));
    }
    let alphas = [rat(1, 3), rat(9, 20), rat(1, 2), rat(4, 5)];
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut draws, mut balanced_sets) = (0usize, 0usize);
    let mut bad = Vec::new();
    while draws < 10_000 {
        let s_max = random_set(&mut rng, 4, 3);
        let at = alphas[rng.gen_range(0..alphas.len())];
        let mut pool = Vec::new();
        for_each_combination(9, 2, |e| {
            if !e.iter().all(|&v| s_max.contains(v)) {
                pool.push(e.to_vec());
            }
        });
        pool.shuffle(&mut rng);
        pool.truncate(rng.gen_range(1..=7));
        let t = EdgeSet::new(2, pool.clone()).unwrap();
        if !strictly_balanced(&t, &s_max, at).unwrap() {
            continue;
        }
        balanced_sets += 1;
        for _ in 0..4 {
            let sub: Vec<Vec<Vertex>> = pool.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            draws += 1;
            let t2 = EdgeSet::new(2, sub.clone()).unwrap();
            if !strictly_balanced(&t2, &s_max, at).unwrap() {
                bad.push(format!("sMax={s_max} alphaTilde={at}: {pool:?} balanced but {sub:?} not"));
            }
        }
    }
    details.push(format!("heredity: {draws} subsets of {balanced_sets} strictly balanced sets, {} violations", bad.len()));
    ok &= bad.is_empty();
    details.extend(bad.into_iter().take(5));
    verdict(ok, details)
}

fn criterion_9() -> Verdict {
    let (alpha, beta) = (rat(1, 2), rat(1, 2));
    let mut compared = 0usize;
    let mut min_ratio = f64::INFINITY;
    let mut bad = Vec::new();
    for n in 6..=12usize {
        let params = desk(n, &Overrides::default());
        let pc = PcParams::matched(n, 2, alpha, beta, beta, params.tau).unwrap();
        let mut sets = Vec::new();
        for k in 0..=2 {
            for_each_combination(n, k, |c| sets.push(VertexSet::from_sorted(c)));
        }
        for seed in 0..6u64 {
            let prob = [0.25, 0.45, 0.65][seed as usize % 3];
            let g = sample_gnp(n, 2, prob, 900 + seed).unwrap();
            for cmp in compare_all(&g, &params, &pc, &sets).unwrap() {
                compared += 1;
                let brute = phi_star_bruteforce(&g, alpha, &cmp.s, params.tau).unwrap();
                min_ratio = min_ratio.min(cmp.ratio);
                if cmp.max_exponent != (Rational::from_integer(1) - beta) * brute.phi_star {
                    bad.push(format!("n={n} seed={seed} S={}: max term exponent {} disagrees with brute force", cmp.s, cmp.max_exponent));
                }
                if cmp.ratio < 1.0 {
                    bad.push(format!("n={n} seed={seed} S={}: ratio {}", cmp.s, cmp.ratio));
                }
            }
        }
    }
    let mut details = vec![format!("{compared} moments over n=6..12, smallest sum/max ratio {min_ratio:.4}, {} violations", bad.len())];
    let mut ok = bad.is_empty();
    details.extend(bad.into_iter().take(5));

    // Orthonormality of chi_T on K4 edge sets under G(4, 1/3).
    let p = rat(1, 3);
    let sets: Vec<EdgeSet> = [vec![], vec![[0, 1]], vec![[0, 1], [1, 2]], vec![[2, 3]], vec![[0, 2], [1, 3], [0, 3]]]
        .iter()
        .map(|es: &Vec<[Vertex; 2]>| EdgeSet::new(2, es.iter().map(|e| e.to_vec()).collect()).unwrap())
        .collect();
    let samples = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut products = vec![Vec::with_capacity(samples); sets.len() * sets.len()];
    for _ in 0..samples {
        let g = sample_gnp(4, 2, to_f64(&p), rng.gen()).unwrap();
        let vals: Vec<f64> = sets.iter().map(|t| chi(&g, t, p).unwrap().value(p)).collect();
        for i in 0..sets.len() {
            for j in 0..sets.len() {
                products[i * sets.len() + j].push(vals[i] * vals[j]);
            }
        }
    }
    let mut worst = 0.0f64;
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            let xs = &products[i * sets.len() + j];
            let mean = compensated_sum(xs.iter().copied()) / samples as f64;
            let var = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (samples as f64 - 1.0);
            let want = if i == j { 1.0 } else { 0.0 };
            let sigma = (var / samples as f64).sqrt();
            let z = if sigma > 0.0 { (mean - want).abs() / sigma } else { (mean - want).abs() * 1e12 };
            worst = worst.max(z);
        }
    }
    ok &= worst <= 5.0;
    details.push(format!("chi orthonormality: {samples} samples, {} pairs, largest deviation {worst:.2} sigma", sets.len() * sets.len()));
    verdict(ok, details)
}

fn criterion_10() -> Verdict {
    use std::process::Command;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("neg.cfg");
    std::fs::write(&cfg, "n = 20\nseeds = 1\n").unwrap();
    let out = tmp.path().join("out");
    let sagap = |stage: &str| {
        Command::new(env!("CARGO_BIN_EXE_sagap"))
            .args([stage, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap()
    };
    let mut details = Vec::new();
    for stage in ["sample", "solve"] {
        let res = sagap(stage);
        if res.status.code() != Some(0) {
            return Err(vec![format!("{stage} failed: {}", String::from_utf8_lossy(&res.stderr))]);
        }
    }
    let clean = sagap("verify");
    let clean_err = String::from_utf8_lossy(&clean.stderr).to_string();
    if clean_err.contains("monotonicity violation") {
        return Err(vec![format!("untampered table already reports a violation: {clean_err}")]);
    }
    let path = out.join("n20/seed1/solution.txt");
    let text = std::fs::read_to_string(&path).unwrap();
    // Multiply y_{0} by L: its power of 1/L drops by one.
    let tampered: String = text
        .lines()
        .map(|line| match line.split_whitespace().collect::<Vec<_>>()[..] {
            ["0", a, rho] => format!("0 {} {rho}\n", a.parse::<i64>().unwrap() - 1),
            _ => format!("{line}\n"),
        })
        .collect();
    if tampered == text {
        return Err(vec!["no entry for {0} in the solution file".into()]);
    }
    std::fs::write(&path, tampered).unwrap();
    let res = sagap("verify");
    let err = String::from_utf8_lossy(&res.stderr).to_string();
    let named = err.contains("monotonicity violation at S={} i=0");
    details.push(format!("verify exit code {:?}; violation naming (S={{}}, i=0) reported: {named}", res.status.code()));
    verdict(res.status.code() == Some(1) && named, details)
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: u32| only.as_ref().is_none_or(|o| o.contains(&k));
    let mut runs = Vec::new();
    let mut failed = Vec::new();
    let mut report = |k: u32, title: &str, v: Verdict| {
        let (tag, lines) = match v {
            Ok(l) => ("PASS", l),
            Err(l) => {
                failed.push(k);
                ("FAIL", l)
            }
        };
        println!("criterion {k:>2}: {tag}  {title}");
        for l in lines {
            println!("    {l}");
        }
    };
    let start = Instant::now();
    if wanted(1) {
        report(1, "closure agrees with brute force", criterion_1());
    }
    if wanted(2) {
        report(2, "supermodularity", criterion_2());
    }
    if wanted(3) {
        report(3, "union closure, nesting and isolated vertices", criterion_3());
    }
    if wanted(4) {
        report(4, "factor-two sandwich", criterion_4());
    }
    if wanted(5) || wanted(6) {
        let v = criterion_5(&mut runs);
        if wanted(5) {
            report(5, "feasibility suite", v);
        }
    }
    if wanted(6) {
        report(6, "gap trend", criterion_6(&runs));
    }
    if wanted(7) {
        report(7, "integral oracle cross-checks", criterion_7());
    }
    if wanted(8) {
        report(8, "concentration workbench", criterion_8());
    }
    if wanted(9) {
        report(9, "pseudo-calibration", criterion_9());
    }
    if wanted(10) {
        report(10, "tampered solution is rejected", criterion_10());
    }
    let expected: Vec<u32> = KNOWN_UNATTAINABLE.iter().copied().filter(|&k| wanted(k)).collect();
    println!("acceptance: {} failing {:?}, documented as unattainable {:?}, {:.0}s", failed.len(), failed, expected, start.elapsed().as_secs_f64());
    if failed != expected {
        println!("acceptance: failing set differs from the documented one");
        std::process::exit(1);
    }
}
