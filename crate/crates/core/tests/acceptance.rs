//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roundelim_core::bounds::{failure_floor, multi_step, randomized_regime, LogProb, NodeCount, RegimeVerdict};
use roundelim_core::cert::{verify_certificate_text, Certificate};
use roundelim_core::family::{auto_bound, make_phi, make_psi, t_bound, verify_chain, SearchConfig};
use roundelim_core::problem::{
    equal_up_to_renaming, parse_problem, CondensedConfiguration, Constraint, Group, Label, Problem, Side, Term,
};
use roundelim_core::re::{re_black, ReLimits};
use roundelim_core::relax::{merge_labels, RelaxationMap};
use roundelim_core::sim::{check_xy_matching, gen_regular_bipartite, gen_tree, run_proposal};
use roundelim_core::zero_round::{brute_force_oracle, zero_round, zero_round_white};

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fail<T>(msg: impl Into<String>) -> std::result::Result<T, String> {
    Err(msg.into())
}

/// Independent evaluation of the round bound from its two-case definition.
fn rounds(delta: usize, x: usize, y: usize) -> usize {
    if y == delta {
        return 0;
    }
    let k = (delta - x).div_ceil(y);
    match k {
        0 => 0,
        _ if delta.div_ceil(y) > k => 2 * k,
        _ => 2 * k - 1,
    }
}

fn chain_reproduction() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for delta in 2..=5 {
        for x in 0..=delta {
            for y in 1..delta {
                let chain = verify_chain(delta, x, y).map_err(|e| format!("Δ={delta} x={x} y={y}: {e}"))?;
                let want = rounds(delta, x, y);
                if chain.claimed_bound != want || t_bound(delta, x, y).unwrap() != want {
                    return fail(format!("Δ={delta} x={x} y={y}: bound {} expected {want}", chain.claimed_bound));
                }
                count += 1;
            }
        }
    }
    let el = start.elapsed();
    if el > Duration::from_secs(600) {
        return fail(format!("took {el:?}"));
    }
    Ok(format!("{count} chains, exact, {el:.2?}"))
}

fn pow(l: &str, m: usize) -> String {
    match m {
        0 => String::new(),
        1 => l.to_string(),
        _ => format!("{l}^{m}"),
    }
}

fn worked_examples() -> Outcome {
    for delta in 3..=6 {
        let d = delta - 1;
        let sinkless = parse_problem(&format!("delta: {delta}\nwhite:\nB [AB]^{d}\nblack:\nA [AB]^{d}\n")).unwrap();
        let got = re_black(&sinkless).map_err(|e| e.to_string())?.result;
        let want = parse_problem(&format!("delta: {delta}\nwhite:\nB [AB]^{d}\nblack:\nA B^{d}\n")).unwrap();
        if equal_up_to_renaming(&got, &want).unwrap().is_none() {
            return fail(format!("sinkless Δ={delta}: got\n{got}"));
        }

        let o2 = pow("O", delta - 2);
        let before = parse_problem(&format!(
            "delta: {delta}\nwhite:\nM O^{d}\nY P^{d}\nX Z {o2}\nblack:\n[MYX] [PYOX]^{d}\n[ZMPYOX] [OX]^{d}\n"
        ))
        .unwrap();
        let merged = merge_labels(&before, &RelaxationMap::merge(Side::White, &[("Y", "X")]).unwrap())
            .map_err(|e| format!("merge Δ={delta}: {e}"))?;
        let want = parse_problem(&format!(
            "delta: {delta}\nwhite:\nM O^{d}\nX P^{d}\nX Z {o2}\nblack:\n[MX] [POX]^{d}\n[ZMPOX] [OX]^{d}\n"
        ))
        .unwrap();
        if equal_up_to_renaming(&merged, &want).unwrap().is_none() {
            return fail(format!("merge Δ={delta}: got\n{merged}"));
        }
    }
    Ok("sinkless Δ=3..6 and Y→X merge Δ=3..6 match".into())
}

fn condensed(n: usize, delta: usize) -> Vec<CondensedConfiguration> {
    let groups: Vec<Group> = (1..(1u64 << n)).map(Group::from_bits).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; delta];
    loop {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &g in &pick {
            *counts.entry(g).or_default() += 1;
        }
        out.push(CondensedConfiguration::new(counts.into_iter().map(|(g, m)| Term::new(groups[g], m))));
        // Next nondecreasing tuple.
        let mut i = delta;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] + 1 < groups.len() {
                let v = pick[i] + 1;
                for p in pick.iter_mut().skip(i) {
                    *p = v;
                }
                break;
            }
        }
    }
}

fn sides(cfgs: &[CondensedConfiguration], max: usize) -> Vec<Vec<CondensedConfiguration>> {
    let mut out: Vec<Vec<CondensedConfiguration>> = cfgs.iter().map(|c| vec![c.clone()]).collect();
    if max >= 2 {
        for i in 0..cfgs.len() {
            for j in i + 1..cfgs.len() {
                out.push(vec![cfgs[i].clone(), cfgs[j].clone()]);
            }
        }
    }
    out
}

fn build(n: usize, delta: usize, white: &[CondensedConfiguration], black: &[CondensedConfiguration]) -> Problem {
    let alphabet = (0..n).map(|i| Label::new(((b'A' + i as u8) as char).to_string()).unwrap()).collect();
    Problem::new(delta, alphabet, Constraint::new(white.to_vec()), Constraint::new(black.to_vec())).unwrap()
}

fn agree(p: &Problem) -> std::result::Result<(), String> {
    let fast = zero_round_white(p).map_err(|e| e.to_string())?;
    let slow = brute_force_oracle(p).map_err(|e| e.to_string())?;
    if fast.solvable != slow.solvable {
        return fail(format!("disagreement on\n{p}"));
    }
    Ok(())
}

fn zero_round_oracle() -> Outcome {
    let mut cases = 0usize;
    // Exhaustive: Δ = 2, three labels, at most two configurations per side.
    let c2 = condensed(3, 2);
    let s2 = sides(&c2, 2);
    for w in &s2 {
        for b in &s2 {
            agree(&build(3, 2, w, b))?;
            cases += 1;
        }
    }
    // Exhaustive: Δ = 3, three labels, one configuration per side.
    let c3 = condensed(3, 3);
    for w in &c3 {
        for b in &c3 {
            agree(&build(3, 3, std::slice::from_ref(w), std::slice::from_ref(b)))?;
            cases += 1;
        }
    }
    // Sampled: Δ = 3, up to three configurations per side.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let n = rng.gen_range(1..=3);
        let pool = condensed(n, 3);
        let mut side = || -> Vec<CondensedConfiguration> {
            (0..rng.gen_range(1..=3)).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
        };
        let (w, b) = (side(), side());
        agree(&build(n, 3, &w, &b))?;
        cases += 1;
    }
    if cases < 10_000 {
        return fail(format!("only {cases} cases"));
    }
    Ok(format!("{cases} cases, 100% agreement"))
}

fn zero_round_lemma() -> Outcome {
    let mut psi = 0;
    for delta in 2..=5 {
        for a in 1..delta {
            for b in 0..delta - a {
                for c in 0..delta - a {
                    let p = make_psi(delta, a, b, c, Side::White).unwrap();
                    if zero_round(&p, Side::White).unwrap().solvable {
                        return fail(format!("Psi^W_{delta}({a},{b},{c}) reported solvable"));
                    }
                    psi += 1;
                }
            }
        }
        for x in 0..=delta {
            for y in 1..=delta {
                let solvable = zero_round(&make_phi(delta, x, y).unwrap(), Side::White).unwrap().solvable;
                if solvable != (x == delta || y == delta) {
                    return fail(format!("Phi^W_{delta}({x},{y}) solvable = {solvable}"));
                }
            }
        }
    }
    Ok(format!("{psi} Psi members unsolvable, Phi solvable iff x=Δ or y=Δ"))
}

fn upper_bound() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for delta in 3..=5 {
        let trees = gen_tree(delta, 4).unwrap();
        for x in 0..=delta {
            for y in 1..=delta {
                let want = rounds(delta, x, y);
                let mut graphs = vec![("tree".to_string(), trees.clone())];
                for seed in 0..20 {
                    graphs.push((format!("seed {seed}"), gen_regular_bipartite(2000, delta, seed, false).unwrap()));
                }
                for (name, g) in &graphs {
                    let run = run_proposal(g, x, y).map_err(|e| e.to_string())?;
                    if run.transcript.rounds_used != want {
                        return fail(format!(
                            "Δ={delta} x={x} y={y} {name}: {} rounds, expected {want}",
                            run.transcript.rounds_used
                        ));
                    }
                    let v = check_xy_matching(g, &run.labeling, x, y).map_err(|e| e.to_string())?;
                    if !v.valid() {
                        return fail(format!("Δ={delta} x={x} y={y} {name}: invalid output {v:?}"));
                    }
                    runs += 1;
                }
            }
        }
    }
    let el = start.elapsed();
    if el > Duration::from_secs(300) {
        return fail(format!("took {el:?}"));
    }
    Ok(format!("{runs} runs, all exact and valid, {el:.2?}"))
}

fn auto_search() -> Outcome {
    let start = Instant::now();
    let p = make_phi(3, 0, 1).unwrap();
    let cfg = SearchConfig {
        max_labels: 5,
        ..SearchConfig::default()
    };
    let out = auto_bound(&p, &cfg).map_err(|e| e.to_string())?;
    let text = Certificate::from_chain(&out.chain).to_json();
    let report = verify_certificate_text(&text, &ReLimits::default()).map_err(|e| format!("certificate: {e}"))?;
    let el = start.elapsed();
    if report.bound < 5 {
        return fail(format!("certified only {}", report.bound));
    }
    if el > Duration::from_secs(300) {
        return fail(format!("took {el:?}"));
    }
    Ok(format!("certified bound {} ({} RE steps), {el:.2?}", report.bound, out.re_steps))
}

fn calculators() -> Outcome {
    let mut points = 0;
    for delta in 2..=64 {
        for j in 0..=20 {
            for e in [10.0, 11.0, 16.0, 40.0, 100.0, 1e3, 1e6, 1e12] {
                let m = multi_step(LogProb::from_neg_log2(e), delta, j, 11.0, 5);
                if !m.dominated() {
                    return fail(format!("Δ={delta} j={j} p=2^-{e}: recursion exceeds closed form"));
                }
                points += 1;
            }
        }
    }
    if failure_floor(3, 5).unwrap() != LogProb::Exact(177_147) {
        return fail("failure_floor(3,5) is not 2^-177147");
    }

    let mut seen = [false; 3];
    let mut grid = 0;
    for e in [4.0, 16.0, 64.0, 256.0, 1024.0, 65536.0, 1e9, 1e15, 1e30, 1e60, 1e120, 1e240] {
        for delta in [2usize, 3, 4, 5, 8, 16] {
            for k in [1usize, 2, 3] {
                for (x, y) in [(0, 1), (1, 1), (0, 2), (delta, 1), (0, delta)] {
                    if x > delta || y > delta {
                        continue;
                    }
                    let got = randomized_regime(NodeCount::pow2(e), delta, x, y, k).unwrap();
                    let t = rounds(delta, x, y) as f64;
                    let ll = e.log2();
                    let threshold = if ll.log2() > 0.0 { ll / ll.log2() / (3.0 * k as f64) } else { 0.0 };
                    let want = if t >= threshold {
                        RegimeVerdict::ExemptTooLarge
                    } else if t <= (delta as f64).powf(1.0 / k as f64) {
                        RegimeVerdict::ExemptSmall
                    } else {
                        RegimeVerdict::Applies
                    };
                    if got.verdict != want {
                        return fail(format!("n=2^{e} Δ={delta} x={x} y={y} k={k}: {:?} expected {want:?}", got.verdict));
                    }
                    let floor_ok = t == 0.0 || (delta as f64).powf(2.0 * t + 1.0) <= e;
                    if got.floor_at_least_inverse_n != floor_ok {
                        return fail(format!("n=2^{e} Δ={delta} x={x} y={y}: floor comparison differs"));
                    }
                    seen[want as usize] = true;
                    grid += 1;
                }
            }
        }
    }
    if !seen.iter().all(|&s| s) {
        return fail("grid does not cross every regime boundary");
    }
    Ok(format!("{points} sweep points dominated, floor exact, {grid} regime points"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 chain reproduction", chain_reproduction),
        ("2 worked examples", worked_examples),
        ("3 zero-round oracle equivalence", zero_round_oracle),
        ("4 zero-round lemma", zero_round_lemma),
        ("5 upper-bound match", upper_bound),
        ("6 bounded auto-search", auto_search),
        ("7 probability calculators", calculators),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
