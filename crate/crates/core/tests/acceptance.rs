//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use twistmin::arith::gcd;
use twistmin::basis::{
    basis_for, dimension, newform_coeffs_from_min, sturm_bound, trace_form, trace_gram,
};
use twistmin::characters::{all_characters, DirichletCharacter};
use twistmin::decomp::twist_pairs;
use twistmin::oracle::{trace_full, trace_min_sieved, trace_new};
use twistmin::quadratic::{class_number_character_sum, class_number_forms, is_fundamental};
use twistmin::trace::{gates_pass, trace_min, trace_min_in, RootChoice, SpaceKind, SpaceSpec};
use twistmin::CycloNumber;

const SWEEP_WEIGHTS: [u32; 6] = [2, 3, 4, 5, 6, 12];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    let mut detail = summary;
    if !failures.is_empty() {
        detail.push_str(&format!("; {} failures, first: {}", failures.len(), failures[..failures.len().min(5)].join(" | ")));
    }
    Outcome { pass: failures.is_empty(), detail }
}

fn minimal_characters(level: u64) -> Vec<DirichletCharacter> {
    all_characters(level).into_iter().filter(|c| c.is_twist_minimal()).collect()
}

fn parity_matches(chi: &DirichletCharacter, k: u32) -> bool {
    chi.parity() == if k.is_multiple_of(2) { 1 } else { -1 }
}

/// Traces from the sweep of criterion 1, with both square-root choices.
struct SweepRecord {
    label: String,
    real_character: bool,
    direct: CycloNumber,
    negated: CycloNumber,
    sieved: CycloNumber,
}

fn dual_path_sweep() -> Vec<SweepRecord> {
    let jobs: Vec<(DirichletCharacter, u32)> = (1..=100u64)
        .flat_map(minimal_characters)
        .flat_map(|chi| {
            SWEEP_WEIGHTS
                .into_iter()
                .filter(|&k| parity_matches(&chi, k))
                .map(|k| (chi.clone(), k))
                .collect::<Vec<_>>()
        })
        .collect();
    jobs.par_iter()
        .flat_map_iter(|(chi, k)| {
            let spec = SpaceSpec::new(chi.modulus(), *k, chi.clone(), SpaceKind::Min).unwrap();
            let o = chi.order();
            (1..=20u64).map(move |n| SweepRecord {
                label: format!("{chi} k={k} n={n}"),
                real_character: chi.is_real(),
                direct: trace_min(&spec, n).unwrap(),
                negated: trace_min_in(&spec, n, o, RootChoice::Negated).unwrap(),
                sieved: trace_min_sieved(chi, *k, n, o).unwrap(),
            })
        })
        .collect()
}

fn criterion_1(sweep: &[SweepRecord]) -> Outcome {
    let failures: Vec<String> = sweep
        .iter()
        .filter(|r| r.direct != r.sieved)
        .map(|r| format!("{}: direct {} vs sieved {}", r.label, r.direct, r.sieved))
        .collect();
    outcome(&failures, format!("{} traces compared (N ≤ 100, k ∈ {SWEEP_WEIGHTS:?}, n ≤ 20)", sweep.len()))
}

fn legendre(a: i64, p: u64) -> i64 {
    // Euler's criterion, independent of the library's Kronecker symbol
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let mut r = 1u64;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 { 1 } else { -1 }
}

fn prime_powers(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Genus of `X0(N)`: `1 + μ/12 - ν2/4 - ν3/3 - c/2`.
fn genus_x0(n: u64) -> i64 {
    let pp = prime_powers(n);
    let mu: i64 = pp.iter().map(|&(p, e)| (p.pow(e) + p.pow(e - 1)) as i64).product();
    let nu2: i64 = if n.is_multiple_of(4) { 0 } else { pp.iter().map(|&(p, _)| if p == 2 { 1 } else { 1 + legendre(-1, p) }).product() };
    let nu3: i64 = if n.is_multiple_of(9) {
        0
    } else {
        pp.iter().map(|&(p, _)| if p == 3 { 1 } else if p == 2 { 1 + if 2 == 1 { 1 } else { -1 } } else { 1 + legendre(-3, p) }).product()
    };
    let cusps: i64 = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| phi(gcd(d, n / d)) as i64).sum();
    let twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * cusps;
    assert_eq!(twelve_g % 12, 0);
    twelve_g / 12
}

fn phi(n: u64) -> u64 {
    (1..=n).filter(|&x| gcd(x, n) == 1).count() as u64
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    for n in 1..=50u64 {
        let t = trace_full(&DirichletCharacter::trivial(n), 2, 1, 1).unwrap();
        let expect = CycloNumber::from_integer(1, genus_x0(n));
        if t != expect {
            failures.push(format!("N={n}: trace {t} genus {expect}"));
        }
    }
    outcome(&failures, "Tr T_1 on S_2(Γ0(N)) vs genus of X0(N), N ≤ 50".into())
}

fn tau_table(limit: usize) -> Vec<i64> {
    // q ∏_{j ≤ limit} (1 - q^j)^24, coefficients 0..=limit
    let mut series = vec![0i64; limit + 1];
    series[0] = 1;
    for j in 1..=limit {
        for _ in 0..24 {
            for i in (j..=limit).rev() {
                series[i] -= series[i - j];
            }
        }
    }
    let mut tau = vec![0i64; limit + 1];
    tau[1..=limit].copy_from_slice(&series[..limit]);
    tau
}

fn criterion_3() -> Outcome {
    let tau = tau_table(30);
    let spec = SpaceSpec::new(1, 12, DirichletCharacter::trivial(1), SpaceKind::Min).unwrap();
    let failures: Vec<String> = (1..=30u64)
        .filter_map(|n| {
            let t = trace_min(&spec, n).unwrap();
            let expect = CycloNumber::from_integer(1, tau[n as usize]);
            (t != expect).then(|| format!("n={n}: {t} vs τ = {expect}"))
        })
        .collect();
    outcome(&failures, "Tr T_n on S_12(1) vs τ(n), n ≤ 30".into())
}

fn squarefree(n: u64) -> bool {
    prime_powers(n).iter().all(|&(_, e)| e == 1)
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7157_4d19);
    let mut failures = Vec::new();
    let (mut parity_cases, mut squarefree_cases) = (0, 0);
    let mut sampled = 0;
    while sampled < 200 {
        let level = rng.gen_range(1..=100u64);
        let chars = minimal_characters(level);
        let chi = chars[rng.gen_range(0..chars.len())].clone();
        let k = rng.gen_range(2..=12u32);
        let n = rng.gen_range(1..=60u64);
        let cof = level / chi.conductor();
        let parity_bad = !parity_matches(&chi, k);
        let sq_bad = !squarefree(gcd(gcd(cof * cof, n * n), level));
        if !parity_bad && !sq_bad {
            continue;
        }
        sampled += 1;
        parity_cases += parity_bad as u32;
        squarefree_cases += sq_bad as u32;
        assert!(!gates_pass(&chi, k, n));
        let spec = SpaceSpec::new(level, k, chi.clone(), SpaceKind::Min).unwrap();
        let direct = trace_min(&spec, n).unwrap();
        let sieved = trace_min_sieved(&chi, k, n, chi.order()).unwrap();
        if !direct.is_zero() || !sieved.is_zero() {
            failures.push(format!("{chi} k={k} n={n}: direct {direct}, sieved {sieved}"));
        }
    }
    outcome(
        &failures,
        format!("200 gate-violating specs ({parity_cases} parity, {squarefree_cases} squarefree)"),
    )
}

fn criterion_5() -> Outcome {
    let mut count = 0;
    let failures: Vec<String> = (-999i64..0)
        .filter(|&d| is_fundamental(d))
        .filter_map(|d| {
            count += 1;
            let a = class_number_forms(d);
            let b = class_number_character_sum(d);
            (a != b).then(|| format!("d={d}: forms {a}, character sum {b}"))
        })
        .collect();
    outcome(&failures, format!("{count} fundamental discriminants in (-1000, 0)"))
}

fn criterion_6(sweep: &[SweepRecord]) -> Outcome {
    let failures: Vec<String> = sweep
        .iter()
        .filter(|r| r.direct != r.negated)
        .map(|r| format!("{}: {} vs {}", r.label, r.direct, r.negated))
        .collect();
    outcome(&failures, format!("{} traces recomputed with the negated square root", sweep.len()))
}

fn criterion_7(sweep: &[SweepRecord]) -> Outcome {
    let mut failures = Vec::new();
    let mut real = 0;
    for r in sweep {
        if !r.direct.is_integral() {
            failures.push(format!("{}: {} not integral", r.label, r.direct));
        }
        if r.real_character {
            real += 1;
            if !r.direct.is_rational() {
                failures.push(format!("{}: {} not rational", r.label, r.direct));
            }
        }
    }
    outcome(&failures, format!("{} traces integral, {real} with real χ rational", sweep.len()))
}

fn criterion_8() -> Outcome {
    let jobs: Vec<(DirichletCharacter, u32)> = (1..=30u64)
        .flat_map(minimal_characters)
        .flat_map(|chi| [2u32, 4, 6].into_iter().map(move |k| (chi.clone(), k)))
        .collect();
    let results: Vec<(Vec<String>, usize)> = jobs
        .par_iter()
        .map(|(chi, k)| {
            let mut failures = Vec::new();
            let mut checked = 0;
            let level = chi.modulus();
            let o = chi.order();
            for kind in [SpaceKind::Min, SpaceKind::New, SpaceKind::Full] {
                let spec = SpaceSpec::new(level, *k, chi.clone(), kind).unwrap();
                let b = sturm_bound(&spec) as usize;
                let rank = match basis_for(&spec, b) {
                    Ok(m) => m.certified_rank as u64,
                    Err(e) => {
                        failures.push(format!("{chi} k={k} {kind}: {e}"));
                        continue;
                    }
                };
                let traces: Vec<CycloNumber> = match kind {
                    SpaceKind::Min => vec![
                        trace_min(&spec, 1).unwrap(),
                        trace_min_sieved(chi, *k, 1, o).unwrap(),
                    ],
                    SpaceKind::New => vec![trace_new(chi, *k, 1, o).unwrap()],
                    SpaceKind::Full => vec![trace_full(chi, *k, 1, o).unwrap()],
                };
                for t in traces {
                    checked += 1;
                    if t != CycloNumber::from_integer(o, rank) {
                        failures.push(format!("{chi} k={k} {kind}: rank {rank} vs Tr T_1 {t}"));
                    }
                }
            }
            for kind in [SpaceKind::Min, SpaceKind::New] {
                let spec = SpaceSpec::new(level, *k, chi.clone(), kind).unwrap();
                let g = trace_gram(&spec, 12).unwrap();
                for i in 0..12 {
                    for j in 0..i {
                        if g[i][j] != g[j][i] {
                            failures.push(format!("{chi} k={k} {kind}: Gram ({},{})", i + 1, j + 1));
                        }
                    }
                }
            }
            (failures, checked)
        })
        .collect();
    let checked: usize = results.iter().map(|r| r.1).sum();
    let failures: Vec<String> = results.into_iter().flat_map(|r| r.0).collect();
    outcome(
        &failures,
        format!("{} specs × {{min,new,full}}, {checked} rank/trace comparisons, Gram 12×12 on min and new", jobs.len()),
    )
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut class_count_failures = 0;
    for level in 1..=30u64 {
        for chi in minimal_characters(level) {
            for k in SWEEP_WEIGHTS {
                cases += 1;
                let new_spec = SpaceSpec::new(level, k, chi.clone(), SpaceKind::New).unwrap();
                let new_dim = dimension(&new_spec).unwrap();
                let mut weighted = 0;
                let mut per_class = 0;
                for pair in twist_pairs(&chi).unwrap() {
                    let spec = SpaceSpec::new(pair.level, k, pair.twisted.clone(), SpaceKind::Min).unwrap();
                    let d = dimension(&spec).unwrap();
                    weighted += pair.class_size * d;
                    per_class += d;
                }
                if weighted != new_dim {
                    failures.push(format!("{chi} k={k}: dim new {new_dim}, Σ class_size·dim min {weighted}, Σ dim min {per_class}"));
                }
                if per_class != new_dim {
                    class_count_failures += 1;
                }
            }
        }
    }
    outcome(
        &failures,
        format!(
            "{cases} spaces (N ≤ 30, k ∈ {SWEEP_WEIGHTS:?}); unweighted sum over classes disagrees in {class_count_failures}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let bound = 50usize;
    let spec = SpaceSpec::new(11, 2, DirichletCharacter::trivial(11), SpaceKind::Min).unwrap();
    let f = trace_form(&spec, bound).unwrap();
    let psi = DirichletCharacter::from_conrey(3, 2).unwrap();
    let mut failures = Vec::new();
    let there = newform_coeffs_from_min(&f, &psi).unwrap();
    if there.level != 99 || !there.character.is_trivial() {
        failures.push(format!("twist lands at level {} character {}", there.level, there.character));
    }
    for (p, b) in &there.prime_coeffs {
        let a = f.coeff(*p as usize).unwrap().embed_into(there.order).unwrap();
        let expect = &a * &psi.eval_in(*p as i64, there.order);
        if b != &expect {
            failures.push(format!("forward p={p}: {b} vs {expect}"));
        }
    }
    let back = there.twist(&psi.conj()).unwrap();
    if back.level != 11 {
        failures.push(format!("round trip lands at level {}", back.level));
    }
    let mut primes = 0;
    for (p, b) in &back.prime_coeffs {
        primes += 1;
        let a = f.coeff(*p as usize).unwrap().embed_into(back.order).unwrap();
        if b != &a {
            failures.push(format!("p={p}: {b} vs a_p = {a}"));
        }
    }
    outcome(&failures, format!("S_2^new(11) twisted by 3.2 and back, {primes} primes ≤ {bound}"))
}

fn main() {
    let start = Instant::now();
    let sweep = dual_path_sweep();
    let sweep_time = start.elapsed();
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(|| criterion_1(&sweep))),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(|| criterion_6(&sweep))),
        (7, Box::new(|| criterion_7(&sweep))),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut all_pass = true;
    for (id, run) in criteria {
        let t = Instant::now();
        let o = run();
        let mut elapsed = t.elapsed();
        if id == 1 {
            elapsed += sweep_time;
        }
        all_pass &= o.pass;
        println!(
            "{} criterion {id}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    if !all_pass {
        std::process::exit(1);
    }
}
