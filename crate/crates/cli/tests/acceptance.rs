//! Acceptance scoreboard: one PASS/FAIL line per criterion, with timings.
//! Runs without the test harness; exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roc_core::checks::{self, fixpoint_residual, run_checks, CheckOptions, CheckResult, Comparison, CHECK_NAMES};
use roc_core::corpus::{residual_corpus, standard_corpus, Sample};
use roc_core::fixtures::{C_INF, C_L};
use roc_core::grammar::{count_finite_derivations, triple_pair_construct, XItem, XSymbol};
use roc_core::omega::behavior_omega_member;
use roc_core::oracle::{oracle_count_runs, RunBounds};
use roc_core::{DerivCount, RocAutomaton, SquareMatrix, UPWord, Weight, WeightDomain};

const SEED: u64 = 2024;
const PER_DOMAIN: usize = 50;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn criterion(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let mut out = f();
    let took = t.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            out.ok = false;
            out.detail = format!("{}; over the {:.0?} limit", out.detail, limit);
        }
    }
    println!("{} criterion {id}: {title} [{:.2?}] {}", if out.ok { "PASS" } else { "FAIL" }, took, out.detail);
    out.ok
}

// ---------------------------------------------------------------- semirings

/// Every axiom instance on `(a, b, c)`; returns the name of the first broken one.
fn axioms(a: Weight, b: Weight, c: Weight) -> Option<&'static str> {
    let d = a.domain();
    let (zero, one) = (Weight::zero(d), Weight::one(d));
    let add = |x: Weight, y: Weight| x.add(y).unwrap();
    let mul = |x: Weight, y: Weight| x.mul(y).unwrap();
    let checks: [(&str, Weight, Weight); 12] = [
        ("add associative", add(add(a, b), c), add(a, add(b, c))),
        ("add commutative", add(a, b), add(b, a)),
        ("add identity", add(a, zero), a),
        ("mul associative", mul(mul(a, b), c), mul(a, mul(b, c))),
        ("mul identity", mul(one, a), mul(a, one)),
        ("mul identity value", mul(a, one), a),
        ("zero annihilates", add(mul(zero, a), mul(a, zero)), zero),
        ("left distributive", mul(a, add(b, c)), add(mul(a, b), mul(a, c))),
        ("right distributive", mul(add(a, b), c), add(mul(a, c), mul(b, c))),
        ("star unfolds left", a.star(), add(one, mul(a, a.star()))),
        ("star unfolds right", a.star(), add(one, mul(a.star(), a))),
        ("sum star", add(a, b).star(), mul(mul(a.star(), b).star(), a.star())),
    ];
    for (name, l, r) in checks {
        if l != r {
            return Some(name);
        }
    }
    if mul(a, b).star() != add(one, mul(mul(a, mul(b, a).star()), b)) {
        return Some("product star");
    }
    None
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, domain: WeightDomain) -> SquareMatrix {
    let rows = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match domain {
                    WeightDomain::Bool => Weight::Bool(rng.gen_bool(0.4)),
                    WeightDomain::NatInf => match rng.gen_range(0..10) {
                        0..=4 => Weight::Nat(0),
                        5..=7 => Weight::Nat(1),
                        8 => Weight::Nat(rng.gen_range(2..5)),
                        _ => Weight::Inf,
                    },
                })
                .collect()
        })
        .collect();
    SquareMatrix::from_rows(rows).unwrap()
}

fn semiring_axioms() -> Outcome {
    let bools = [Weight::Bool(false), Weight::Bool(true)];
    let mut triples = 0;
    for &a in &bools {
        for &b in &bools {
            for &c in &bools {
                triples += 1;
                if let Some(name) = axioms(a, b, c) {
                    return outcome(false, format!("bool {name} fails on ({a}, {b}, {c})"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let specials = [Weight::Nat(0), Weight::Nat(1), Weight::Inf];
    let pick = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.3) {
            specials[rng.gen_range(0..3)]
        } else {
            Weight::Nat(rng.gen_range(0..1u128 << 40))
        }
    };
    let mut nat_triples = 0;
    for &a in &specials {
        for &b in &specials {
            for &c in &specials {
                nat_triples += 1;
                if let Some(name) = axioms(a, b, c) {
                    return outcome(false, format!("natinf {name} fails on ({a}, {b}, {c})"));
                }
            }
        }
    }
    while nat_triples < 2000 {
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        nat_triples += 1;
        if let Some(name) = axioms(a, b, c) {
            return outcome(false, format!("natinf {name} fails on ({a}, {b}, {c})"));
        }
    }
    let mut matrices = 0;
    for domain in [WeightDomain::Bool, WeightDomain::NatInf] {
        for n in 1..=4 {
            for _ in 0..50 {
                let m = random_matrix(&mut rng, n, domain);
                let star = m.star().unwrap();
                let id = SquareMatrix::identity(n, domain);
                matrices += 1;
                if star != id.add(&m.mul(&star).unwrap()).unwrap() || star != id.add(&star.mul(&m).unwrap()).unwrap() {
                    return outcome(false, format!("matrix star does not unfold on {m:?}"));
                }
            }
        }
    }
    outcome(true, format!("{triples} bool triples, {nat_triples} natinf triples, {matrices} matrix stars"))
}

// ---------------------------------------------------------------- corpus suites

fn summarize(per_sample: impl IntoIterator<Item = (String, CheckResult)>) -> Outcome {
    let (mut cases, mut skipped, mut failed) = (0, 0, 0);
    let mut first = None;
    for (name, r) in per_sample {
        cases += r.cases;
        skipped += r.skipped;
        failed += r.failed;
        if first.is_none() && !r.failures.is_empty() {
            first = Some(format!("{name}: {} {}", r.name, r.failures[0]));
        }
    }
    let mut detail = format!("cases={cases} skipped={skipped} failed={failed}");
    if let Some(f) = first {
        detail = format!("{detail}; first failure {f}");
    }
    outcome(failed == 0 && cases > 0, detail)
}

fn suite(samples: &[&Sample], names: &[&str]) -> Outcome {
    let opts = CheckOptions::default();
    let mut all = Vec::new();
    for s in samples {
        match run_checks(&s.automaton, &opts, names) {
            Ok(rs) => all.extend(rs.into_iter().map(|r| (s.name.clone(), r))),
            Err(e) => return outcome(false, format!("{}: {e}", s.name)),
        }
    }
    summarize(all)
}

fn residuals() -> Outcome {
    let corpus = residual_corpus(SEED, PER_DOMAIN);
    let mut all = Vec::new();
    for s in &corpus {
        match fixpoint_residual(&s.automaton, 8) {
            Ok(r) => all.push((s.name.clone(), r)),
            Err(e) => return outcome(false, format!("{}: {e}", s.name)),
        }
    }
    let o = summarize(all);
    outcome(o.ok, format!("{} automata, {}", corpus.len(), o.detail))
}

fn derivation_counts(samples: &[&Sample]) -> Outcome {
    let o = suite(samples, &["derivation-count"]);
    let c_inf = RocAutomaton::parse(C_INF).unwrap();
    let b = c_inf.alphabet().parse_word("b").unwrap();
    let grammar = count_finite_derivations(&triple_pair_construct(&c_inf), &b).unwrap();
    let oracle = oracle_count_runs(&c_inf, &b, RunBounds::default()).unwrap();
    let both_inf = grammar == DerivCount::Infinite && oracle.count == DerivCount::Infinite && oracle.complete && oracle.pump.is_some();
    outcome(o.ok && both_inf, format!("{}; pumped Lukasiewicz on b: grammar {grammar}, oracle {}", o.detail, oracle.count))
}

// ---------------------------------------------------------------- fixture

fn roc(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_roc")).args(args).output().expect("roc runs");
    (String::from_utf8_lossy(&out.stdout).into_owned(), out.status.code().unwrap_or(-1))
}

fn lukasiewicz() -> Outcome {
    let c = RocAutomaton::parse(C_L).unwrap();
    let g = triple_pair_construct(&c);
    let name = |s: &XSymbol| match s {
        XSymbol::Start => "x0".to_string(),
        XSymbol::Triple(0, 0) => "S".to_string(),
        XSymbol::Triple(i, j) => format!("[{},p,{}]", i + 1, j + 1),
    };
    let render = |items: &[XItem]| {
        items
            .iter()
            .map(|it| match it {
                XItem::Letter(a) => c.alphabet().name(*a).to_string(),
                XItem::Var(v) => name(v),
            })
            .collect::<String>()
    };
    let got: BTreeSet<String> = g.productions_x.iter().map(|p| format!("{}->{}", name(&p.lhs), render(&p.rhs))).collect();
    let want: BTreeSet<String> = ["x0->S", "S->aSS", "S->b"].iter().map(|s| s.to_string()).collect();
    if got != want {
        return outcome(false, format!("X-productions {got:?}"));
    }
    let al = c.alphabet();
    for (w, expected) in [("b", true), ("abb", true), ("aabbb", true), ("ab", false), ("ba", false), ("", false)] {
        let word = al.parse_word(w).unwrap();
        if (!roc_core::weight_of_word(&c, &word).unwrap().is_zero()) != expected {
            return outcome(false, format!("finite word {w:?}"));
        }
    }
    let c0 = c.with_k(0).unwrap();
    for period in ["a", "ab"] {
        let up = UPWord::new(Vec::new(), al.parse_word(period).unwrap()).unwrap();
        if !behavior_omega_member(&c, &up).unwrap() || behavior_omega_member(&c0, &up).unwrap() {
            return outcome(false, format!("omega word ({period})^ω"));
        }
    }
    for u in checks::up_words(2, 3) {
        if behavior_omega_member(&c0, &u).unwrap() {
            return outcome(false, "k=0 accepts an ω-word");
        }
    }

    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let (f1, f0) = (dir.join("acceptance_lukasiewicz.roc"), dir.join("acceptance_lukasiewicz_k0.roc"));
    std::fs::write(&f1, C_L).unwrap();
    std::fs::write(&f0, C_L.replace("repeated 1", "repeated 0")).unwrap();
    let (p1, p0) = (f1.to_str().unwrap(), f0.to_str().unwrap());
    let mut expectations: Vec<(Vec<&str>, String, i32)> = vec![
        (vec!["weight", "--automaton", p1, "--word", "abb"], "1\n".into(), 0),
        (vec!["weight", "--automaton", p1, "--word", "ab"], "0\n".into(), 0),
        (vec!["omega", "--automaton", p1, "--prefix", "", "--period", "a"], "accept\n".into(), 0),
        (vec!["omega", "--automaton", p1, "--prefix", "", "--period", "ab"], "accept\n".into(), 0),
        (vec!["omega", "--automaton", p0, "--prefix", "", "--period", "a"], "reject\n".into(), 0),
        (vec!["omega", "--automaton", p0, "--prefix", "", "--period", "ab"], "reject\n".into(), 0),
        (vec!["count", "--automaton", p1, "--word", "aabbb"], "1\n".into(), 0),
    ];
    for w in ["b", "abb", "aabbb"] {
        expectations.push((vec!["member", "--automaton", p1, "--word", w], "accept\n".into(), 0));
    }
    for w in ["ab", "ba", "\"\""] {
        expectations.push((vec!["member", "--automaton", p1, "--word", w], "reject\n".into(), 0));
    }
    let pass_lines: String = CHECK_NAMES.iter().map(|_| "PASS").collect::<Vec<_>>().join("\n");
    let runs = expectations.len() + 1;
    for (args, out, code) in &expectations {
        let got = roc(args);
        if got != (out.clone(), *code) {
            return outcome(false, format!("roc {}: got {got:?}", args.join(" ")));
        }
    }
    let (out, code) = roc(&["validate", "--automaton", p1, "--max-len", "6"]);
    let statuses = out.lines().map(|l| l.split(' ').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    if code != 0 || statuses != pass_lines {
        return outcome(false, format!("roc validate: got {out:?}"));
    }
    outcome(true, format!("grammar S->aSS|b, 6 finite and 4 ω verdicts, k=0 rejects, {runs} CLI runs bit-exact"))
}

fn full_suite(corpus: &[Sample]) -> Outcome {
    let opts = CheckOptions::default();
    let (mut cases, mut failed, mut skipped) = (0, 0, 0);
    let (mut finite, mut omega) = (0, 0);
    for (i, s) in corpus.iter().enumerate() {
        let results = match checks::validate(&s.automaton, &opts) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{}: {e}", s.name)),
        };
        for r in &results {
            cases += r.cases;
            skipped += r.skipped;
            failed += r.failed;
        }
        if let Some(r) = results.iter().find(|r| !r.passed()) {
            return outcome(false, format!("{}: {} failed: {:?}", s.name, r.name, r.failures));
        }
        match checks::compare(&s.automaton, &opts, SEED + i as u64) {
            Ok(Comparison::Equivalent { finite_words, omega_words }) => {
                finite += finite_words;
                omega += omega_words;
            }
            Ok(Comparison::Disagreement { query, grammar, automaton }) => {
                return outcome(false, format!("{}: {query}: grammar {grammar}, automaton {automaton}", s.name))
            }
            Err(e) => return outcome(false, format!("{}: {e}", s.name)),
        }
    }
    outcome(
        failed == 0,
        format!(
            "{} automata, validate cases={cases} skipped={skipped} failed={failed}, compare finite={finite} omega={omega}",
            corpus.len()
        ),
    )
}

fn main() {
    let corpus = standard_corpus(SEED, PER_DOMAIN);
    let all: Vec<&Sample> = corpus.iter().collect();
    let by_domain = |d: WeightDomain| corpus.iter().filter(|s| s.automaton.domain() == d).collect::<Vec<_>>();
    let (bools, nats) = (by_domain(WeightDomain::Bool), by_domain(WeightDomain::NatInf));

    let results = [
        criterion(1, "semiring and star axioms", Some(Duration::from_secs(1)), semiring_axioms),
        criterion(2, "least-fixpoint residual, |w| <= 8", Some(Duration::from_secs(20)), residuals),
        criterion(3, "counter-i block equals i-fold power, i <= 3", None, || suite(&all, &["power-identity", "power-factorization"])),
        criterion(4, "grammar vs automaton membership over the bool corpus", Some(Duration::from_secs(60)), || {
            suite(&bools, &["grammar-membership", "grammar-behavior"])
        }),
        criterion(5, "derivation count equals run count over the natinf corpus", None, || derivation_counts(&nats)),
        criterion(6, "start-counter split and one-step unfolding, |u|,|v| <= 3", None, || {
            suite(&all, &["omega-counter-split", "omega-unfolding"])
        }),
        criterion(7, "Lukasiewicz fixture", None, lukasiewicz),
        criterion(8, "full validate + compare over the corpus", Some(Duration::from_secs(60)), || full_suite(&corpus)),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
