//! Acceptance criteria 1-7, one line each.  Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use asw_core::charsum::{l_from_lstar, CharacterSpec};
use asw_core::polygon::q_adic_polygon;
use asw_core::tower::{Basis, TowerSpec};
use asw_core::verify::*;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<i64>;

struct Outcome {
    pass: bool,
    assertions: usize,
    note: String,
}

#[derive(Default)]
struct Tally {
    assertions: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.assertions += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn report(&mut self, rep: &VerifyReport) {
        self.assertions += rep.checked;
        if let Some(w) = rep.witnesses.first() {
            self.failures.push(format!("{}: {} {}", rep.claim_id, w.index, w.data));
        }
    }

    fn outcome(self, note: String) -> Outcome {
        let pass = self.failures.is_empty() && self.assertions > 0;
        let note = self.failures.first().cloned().unwrap_or(note);
        Outcome { pass, assertions: self.assertions, note }
    }
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Exact polygon values shared by criteria 1 and 2.
fn slope_values(spec: &TowerSpec, t: &mut Tally) {
    for m in [1, 2] {
        let chars = CharacterSpec::all_of_conductor(spec.p, spec.ell, m);
        let lstars = lstar_batch(spec, &chars, 0).expect("L* computes");
        for (chi, ls) in chars.iter().zip(&lstars) {
            let l = l_from_lstar(spec, ls).expect("trivial factor divides");
            let poly = q_adic_polygon(&l.coeffs, spec.a as u32).expect("polygon");
            let tag = format!("m={m} b={:?}", chi.b);
            if m == 1 {
                t.check(l.degree() == 1, || format!("{tag}: degree {}", l.degree()));
                t.check(poly.slope_list() == vec![q(1, 2)], || format!("{tag}: slopes {:?}", poly.slope_list()));
            } else {
                let heights = [q(1, 6), q(1, 2), q(1, 1), q(5, 3), q(5, 2)];
                for (i, h) in heights.iter().enumerate() {
                    let x = i as i64 + 1;
                    t.check(poly.height_at(x) == Some(*h), || format!("{tag}: height at {x} is {:?}", poly.height_at(x)));
                }
                let mut s = poly.slope_list();
                s.sort();
                let want: Vec<Q> = (1..=5).map(|i| q(i, 6)).collect();
                t.check(s == want, || format!("{tag}: slopes {s:?}"));
            }
        }
        let rep = check_lfunction_slopes(spec, &chars, 0).expect("checker runs");
        t.report(&rep);
    }
}

fn criterion_1() -> Outcome {
    let spec = TowerSpec::from_prime_coeffs(3, 1, 1, &[0, 1, 1]).unwrap();
    let mut t = Tally::default();
    slope_values(&spec, &mut t);
    t.outcome("p=3 a=l=1: m=1 slope 1/2, m=2 slopes 1/6..5/6".into())
}

fn criterion_2() -> Outcome {
    let spec = TowerSpec::standard_small();
    let mut t = Tally::default();
    slope_values(&spec, &mut t);
    t.outcome("p=3 a=l=2: 8 characters at m=1, 72 at m=2".into())
}

fn criterion_3() -> Outcome {
    let spec = TowerSpec::standard_small();
    let chars = CharacterSpec::all_of_conductor(3, 2, 1);
    let mut t = Tally::default();
    t.check(chars.len() == 8, || format!("{} conductor-1 characters", chars.len()));
    let rep = check_oracle_equivalence(&spec, &chars, 4, 8, 15).expect("checker runs");
    t.report(&rep);
    let mut worst = u32::MAX;
    for (k, v) in rep.parameters.extra.iter().filter(|(k, _)| k.starts_with("M'")) {
        let mp: u32 = v.parse().unwrap();
        worst = worst.min(mp);
        t.check(mp >= 3, || format!("{k} = {mp} below 3"));
    }
    t.outcome(format!("k <= 4, M = 8, D = 15, smallest M' = {worst}"))
}

fn criterion_4() -> Outcome {
    let spec = TowerSpec::standard_small();
    let mut t = Tally::default();
    t.report(&check_hodge_bound(&spec, 5, 4, 23).expect("checker runs"));
    t.report(&check_leading_term(&spec, 1..=2, 4, 23).expect("checker runs"));
    t.outcome("k = 2..5 at M = 4, D = 23: val_I = lambda_k, unit leading term".into())
}

fn rank_one_of(spec: &TowerSpec) -> TowerSpec {
    let mut lo = spec.clone();
    lo.ell = 1;
    lo.basis = Basis::Teichmuller(vec![vec![1]]);
    lo
}

fn criterion_5() -> Outcome {
    let spec = TowerSpec::standard_small();
    let mut t = Tally::default();
    t.report(&check_rank_independence(&spec, &rank_one_of(&spec), 8, 30).expect("checker runs"));
    t.outcome("k <= 8, series through degree 30".into())
}

fn random_character(rng: &mut ChaCha8Rng, p: u64, ell: usize, mmax: u32) -> CharacterSpec {
    let m = rng.gen_range(1..=mmax);
    let pm = p.pow(m);
    loop {
        let b: Vec<u64> = (0..ell).map(|_| rng.gen_range(0..pm)).collect();
        if b.iter().any(|x| x % p != 0) {
            return CharacterSpec::new(p, m, b).unwrap();
        }
    }
}

fn criterion_6() -> Outcome {
    let std = TowerSpec::standard_small();
    let rank3 = TowerSpec::from_prime_coeffs(2, 3, 3, &[0, 1, 0, 1]).unwrap();
    let towers = [
        std.clone(),
        TowerSpec::from_prime_coeffs(3, 1, 1, &[0, 1, 1]).unwrap(),
        rank3.clone(),
        TowerSpec::from_prime_coeffs(5, 1, 1, &[0, 1, 0, 1]).unwrap(),
    ];
    let mut notes = Vec::new();
    let mut total = Tally::default();
    let mut suite = |name: &str, reps: Vec<VerifyReport>| {
        let n: usize = reps.iter().map(|r| r.checked).sum();
        notes.push(format!("{name} {n}"));
        total.check(n >= 100, || format!("{name}: only {n} assertions"));
        for r in &reps {
            total.report(r);
        }
    };
    suite("recurrence", towers.iter().map(|s| check_recurrence(s, 40, 3, 20).unwrap()).collect());
    let inc = check_incremental_bound(&std, 16, 3, 20, 50, 11).unwrap();
    let minors = inc.parameters.extra["minors"].clone();
    suite(&format!("entry-bounds+{minors}-minors"), vec![inc]);
    suite("artin-hasse", vec![check_artin_hasse(&[2, 3, 5, 7], 50)]);
    suite("teichmuller", vec![check_teichmuller(&[(2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)], 4).unwrap()]);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let r2: Vec<CharacterSpec> = (0..20).map(|_| random_character(&mut rng, 3, 2, 3)).collect();
    let r3: Vec<CharacterSpec> = (0..20).map(|_| random_character(&mut rng, 2, 3, 3)).collect();
    let mut exhaustive = CharacterSpec::all_of_conductor(3, 2, 1);
    exhaustive.extend(CharacterSpec::all_of_conductor(3, 2, 2));
    suite(
        "admissibility",
        vec![
            check_admissible_locus(&std, &r2, 5).unwrap(),
            check_admissible_locus(&rank3, &r3, 5).unwrap(),
            check_admissible_locus(&std, &exhaustive, 5).unwrap(),
        ],
    );
    suite(
        "basis-changes",
        vec![check_basis_independence(&std, 50, 5, 3).unwrap(), check_basis_independence(&rank3, 50, 6, 3).unwrap()],
    );
    total.outcome(notes.join(", "))
}

fn criterion_7() -> Outcome {
    let spec = TowerSpec::standard_small();
    let mut t = Tally::default();
    let rep = check_truncation_sufficiency(&spec, 4, 4, 15).expect("checker runs");
    let k = rep.parameters.k.unwrap_or(0);
    t.report(&rep);
    t.outcome(format!("w_0..w_4 identical at K = {k} and K = {}", 2 * k))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 7] = [
        ("rank-one slopes", criterion_1, Duration::from_secs(120)),
        ("higher-rank slopes", criterion_2, Duration::from_secs(900)),
        ("oracle equivalence", criterion_3, Duration::from_secs(600)),
        ("leading terms", criterion_4, Duration::from_secs(600)),
        ("rank independence of minors", criterion_5, Duration::from_secs(600)),
        ("property suites", criterion_6, Duration::from_secs(600)),
        ("truncation sufficiency", criterion_7, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let el = start.elapsed();
        let pass = out.pass && el <= *budget;
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        let over = if el > *budget { format!(" over budget {}s", budget.as_secs()) } else { String::new() };
        println!(
            "criterion {}: {verdict} {name} [{} assertions, {:.2}s{over}] {}",
            i + 1,
            out.assertions,
            el.as_secs_f64(),
            out.note
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
