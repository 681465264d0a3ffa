//! Acceptance criteria, one check per criterion.
//!
//! Every criterion is run even when an earlier one fails; each prints a
//! single PASS/FAIL line and the test fails at the end if any did. Lines go
//! straight to the stderr handle so they show up without `--nocapture`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;

use inqkh::decide::{
    delkh_valid, entails, inqb_member, s5_valid, s5_valid_bruteforce, EntailmentMode, Method,
};
use inqkh::fuzz::{
    atom_names, fuzz_equivalence, random_delkh, random_el, random_pl, reduction_counterexample,
    trial_rng, FuzzConfig,
};
use inqkh::proof::{check_proof, parse_proof};
use inqkh::resolution::DEFAULT_CAP;
use inqkh::semantics::{classify, satisfies, Route};
use inqkh::{full_model, parse_formula, Formula, Model, Result};

/// Per-formula time budget for criterion 1.
const MEMBERSHIP_BUDGET: Duration = Duration::from_secs(1);
const FUZZ_SEED: u64 = 7;
const FUZZ_TRIALS: usize = 1000;
const REDUCTION_SEED: u64 = 11;
const REDUCTION_TRIALS: usize = 500;
const LAW_SEED: u64 = 13;
const LAW_INSTANCES: usize = 50;
const DISJUNCTION_SEED: u64 = 17;
const DISJUNCTION_CORPUS: usize = 200;
const ORACLE_SEED: u64 = 19;
const ORACLE_TRIALS: usize = 500;
const ENTAILMENT_SEED: u64 = 23;
const ENTAILMENT_PAIRS: usize = 200;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

type Outcome = std::result::Result<String, String>;

fn lift<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("error: {e}"))
}

fn report(n: usize, title: &str, outcome: &Outcome) {
    let line = match outcome {
        Ok(detail) => format!("criterion {n:>2} PASS  {title}: {detail}\n"),
        Err(detail) => format!("criterion {n:>2} FAIL  {title}: {detail}\n"),
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
}

// 1 -------------------------------------------------------------------------

fn known_theorems() -> Outcome {
    let table = [
        ("~~p -> p", true),
        ("(~p -> q | r) -> (~p -> q) | (~p -> r)", true),
        ("(~p -> ~q | ~r) -> (~p -> ~q) | (~p -> ~r)", true),
        ("((p -> q) -> p) -> p", true),
        ("p | ~p", false),
        ("(((p | ~p) -> p) -> p | ~p) -> p | ~p", false),
    ];
    for (text, expected) in table {
        let alpha = f(text);
        let start = Instant::now();
        let v = lift(inqb_member(&alpha))?;
        let took = start.elapsed();
        if v.result != expected {
            return Err(format!("`{text}`: expected {expected}, got {}", v.result));
        }
        if took > MEMBERSHIP_BUDGET {
            return Err(format!("`{text}` took {took:?}"));
        }
        if !expected {
            // The counterexample must be the full model at its trivial state.
            let w = v.witness.ok_or(format!("`{text}`: no witness"))?;
            let m = lift(Model::from_document(&w.model))?;
            let full = lift(full_model(&alpha.atoms()))?;
            if m.to_document() != full.to_document()
                || w.state.as_deref() != Some(full.world_ids())
            {
                return Err(format!("`{text}`: witness is not the full model"));
            }
        }
    }
    Ok(format!("{} formulas, each under {MEMBERSHIP_BUDGET:?}", table.len()))
}

// 2 -------------------------------------------------------------------------

fn example_model() -> Outcome {
    let m = lift(Model::new(vec![
        ("w".into(), BTreeSet::from(["p".to_string()])),
        ("v".into(), BTreeSet::new()),
    ]))?;
    let k = f("K(p | ~p)");
    let kh = f("Kh(p | ~p)");
    for w in ["w", "v"] {
        if !lift(satisfies(&m, w, &k))? {
            return Err(format!("K(p | ~p) false at {w}"));
        }
        if lift(satisfies(&m, w, &kh))? {
            return Err(format!("Kh(p | ~p) true at {w}"));
        }
    }
    Ok("K(p | ~p) at w and v; Kh(p | ~p) at neither".into())
}

// 3 -------------------------------------------------------------------------

fn four_way_equivalence() -> Outcome {
    let cfg = FuzzConfig {
        seed: FUZZ_SEED,
        trials: FUZZ_TRIALS,
        max_worlds: 4,
        max_atoms: 3,
        max_depth: 4,
        max_imp_nesting: 2,
        routes: vec![Route::Resolution, Route::Rl, Route::Reduced],
        cap: DEFAULT_CAP,
    };
    let r = lift(fuzz_equivalence(&cfg))?;
    if let Some(d) = r.discrepancies.first() {
        return Err(format!(
            "{} discrepancies; first: {}",
            r.discrepancies.len(),
            serde_json::to_string(d).unwrap()
        ));
    }
    Ok(format!(
        "{} trials, {} state checks, {} pointed rewrite checks, {} redraws, 0 discrepancies",
        r.trials, r.kh_checks, r.reduction_checks, r.redraws
    ))
}

// 4 -------------------------------------------------------------------------

fn reduction_soundness() -> Outcome {
    let atoms = atom_names(2);
    let universe: BTreeSet<String> = atoms.iter().cloned().collect();
    for i in 0..REDUCTION_TRIALS {
        let mut rng = trial_rng(REDUCTION_SEED, i);
        let phi = random_delkh(&mut rng, &atoms, 3);
        if let Some((m, s, w, values)) = lift(reduction_counterexample(&phi, &universe))? {
            return Err(format!(
                "trial {i}: `{phi}` at {} in {:?}: {values:?}",
                m.world_id(w),
                m.state_ids(s)
            ));
        }
    }
    Ok(format!("{REDUCTION_TRIALS} formulas, every pointed model over {{p, q}}"))
}

// 5 -------------------------------------------------------------------------

type Law = (&'static str, fn(&Formula, &Formula, &Formula) -> Formula);

fn validity_laws() -> Outcome {
    let laws: Vec<Law> = vec![
        ("Kh a -> K a", |a, _, _| Formula::implies(kh_(a), Formula::know(a.clone()))),
        ("Kh p <-> K p", |a, _, _| {
            let p = first_atom(a);
            Formula::iff(kh_(&p), Formula::know(p))
        }),
        ("Kh ~a <-> K ~a", |a, _, _| {
            let na = Formula::not(a.clone());
            Formula::iff(kh_(&na), Formula::know(na))
        }),
        ("Kh ~~a <-> K a", |a, _, _| {
            Formula::iff(kh_(&Formula::not(Formula::not(a.clone()))), Formula::know(a.clone()))
        }),
        ("Kh a <-> [] Kh a", |a, _, _| Formula::iff(kh_(a), Formula::update(kh_(a)))),
        ("a <-> <> Kh a", |a, _, _| Formula::iff(a.clone(), Formula::diamond(kh_(a)))),
        ("Kh(a | b) <-> Kh a | Kh b", |a, b, _| {
            Formula::iff(kh_(&Formula::or(a.clone(), b.clone())), Formula::or(kh_(a), kh_(b)))
        }),
        ("Kh(a & b) <-> Kh a & Kh b", |a, b, _| {
            Formula::iff(kh_(&Formula::and(a.clone(), b.clone())), Formula::and(kh_(a), kh_(b)))
        }),
        ("Kh(a -> b) <-> K [](Kh a -> Kh b)", |a, b, _| {
            Formula::iff(
                kh_(&Formula::implies(a.clone(), b.clone())),
                Formula::know(Formula::update(Formula::implies(kh_(a), kh_(b)))),
            )
        }),
        ("K [] phi -> [] K phi", |_, _, phi| {
            Formula::implies(
                Formula::know(Formula::update(phi.clone())),
                Formula::update(Formula::know(phi.clone())),
            )
        }),
    ];
    let atoms = atom_names(2);
    let mut checked = 0;
    for (li, (name, law)) in laws.iter().enumerate() {
        for i in 0..LAW_INSTANCES {
            let mut rng = trial_rng(LAW_SEED + li as u64, i);
            let a = random_pl(&mut rng, &atoms, 3, 1);
            let b = random_pl(&mut rng, &atoms, 3, 1);
            let phi = random_delkh(&mut rng, &atoms, 2);
            let inst = law(&a, &b, &phi);
            let v = lift(delkh_valid(&inst))?;
            if !v.result {
                return Err(format!("{name}: instance `{inst}` refuted"));
            }
            checked += 1;
        }
    }
    Ok(format!("{} laws, {checked} instances over {{p, q}}", laws.len()))
}

fn kh_(a: &Formula) -> Formula {
    Formula::KnowHow(Box::new(a.clone()))
}

fn first_atom(a: &Formula) -> Formula {
    Formula::atom(a.atoms().into_iter().next().unwrap_or_else(|| "p".to_string()))
}

// 6 -------------------------------------------------------------------------

/// Random PL formulas, a third of them forced into shapes that are often
/// valid so both sides of the property get exercised.
fn corpus_formula<R: Rng>(rng: &mut R, atoms: &[String]) -> Formula {
    let g = random_pl(rng, atoms, 3, 1);
    match rng.gen_range(0..3) {
        0 => Formula::implies(g.clone(), g),
        1 => Formula::implies(Formula::not(Formula::not(g.clone())), g),
        _ => g,
    }
}

fn disjunction_property() -> Outcome {
    let atoms = atom_names(3);
    let mut valid_disjunctions = 0;
    for i in 0..DISJUNCTION_CORPUS {
        let mut rng = trial_rng(DISJUNCTION_SEED, i);
        let a = corpus_formula(&mut rng, &atoms);
        let b = corpus_formula(&mut rng, &atoms);
        let whole = lift(inqb_member(&Formula::or(a.clone(), b.clone())))?.result;
        let parts = lift(inqb_member(&a))?.result || lift(inqb_member(&b))?.result;
        if whole != parts {
            return Err(format!("`{a}` / `{b}`: disjunction {whole}, disjuncts {parts}"));
        }
        valid_disjunctions += whole as usize;
    }
    Ok(format!(
        "{DISJUNCTION_CORPUS} pairs, {valid_disjunctions} with a valid disjunction"
    ))
}

// 7 -------------------------------------------------------------------------

fn oracle_agreement() -> Outcome {
    let atoms = atom_names(2);
    let mut valid = 0;
    for i in 0..ORACLE_TRIALS {
        let mut rng = trial_rng(ORACLE_SEED, i);
        let phi = random_el(&mut rng, &atoms, 3);
        let fast = lift(s5_valid(&phi))?;
        let slow = lift(s5_valid_bruteforce(&phi))?;
        if fast.result != slow.result {
            return Err(format!(
                "`{phi}`: clause criterion {}, brute force {}",
                fast.result, slow.result
            ));
        }
        valid += fast.result as usize;
    }
    Ok(format!("{ORACLE_TRIALS} formulas, {valid} valid, 0 disagreements"))
}

// 8 -------------------------------------------------------------------------

fn proof_fixtures() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/proofs");
    let load = |name: &str| {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        lift(parse_proof(&text)).map(|p| check_proof(&p))
    };
    let accepted = [
        "khdnp.proof",
        "kkhn.proof",
        "khnd1.proof",
        "khnd2.proof",
        "bor.proof",
        "bkor.proof",
    ];
    for name in accepted {
        let r = load(name)?;
        if !r.accepted {
            return Err(format!("{name} rejected: {:?}", r.first_rejection()));
        }
    }
    let rejected = [
        ("bad_mp_operands.proof", "mp-mismatch"),
        ("bad_kkhp_sort.proof", "sort-violation"),
        ("bad_rre_in_kh.proof", "kh-scope-violation"),
        ("bad_forward_ref.proof", "forward-reference"),
        ("bad_eu_arity.proof", "eu-arity"),
        ("bad_taut.proof", "not-a-tautology"),
    ];
    for (name, code) in rejected {
        let r = load(name)?;
        match r.first_rejection() {
            Some((_, why)) if why.code() == code && !r.accepted => {}
            other => return Err(format!("{name}: expected {code}, got {other:?}")),
        }
    }
    Ok(format!("{} accepted, {} rejected with the named reason", accepted.len(), rejected.len()))
}

// 9 -------------------------------------------------------------------------

fn classification() -> Outcome {
    let m = lift(full_model(&BTreeSet::from(["p".to_string(), "q".to_string()])))?;
    let c = lift(classify(&m, &f("p | ~p")))?;
    if !(c.question && c.inquisitive && c.alternatives.len() == 2) {
        return Err(format!("p | ~p: {c:?}"));
    }
    let c = lift(classify(&m, &f("p")))?;
    if !c.statement {
        return Err(format!("p: {c:?}"));
    }
    let c = lift(classify(&m, &f("~p -> q")))?;
    if !c.statement {
        return Err(format!("~p -> q: {c:?}"));
    }
    let c = lift(classify(&m, &f("p & q")))?;
    if !c.informative {
        return Err(format!("p & q: {c:?}"));
    }
    Ok("p | ~p question with 2 alternatives; p, ~p -> q statements; p & q informative".into())
}

// 10 ------------------------------------------------------------------------

fn entailment_bridge() -> Outcome {
    let atoms = atom_names(2);
    let mut holds = 0;
    for i in 0..ENTAILMENT_PAIRS {
        let mut rng = trial_rng(ENTAILMENT_SEED, i);
        let n = rng.gen_range(1..=2);
        let gamma: Vec<Formula> = (0..n).map(|_| random_pl(&mut rng, &atoms, 3, 1)).collect();
        // Lean the conclusion towards the premises so both verdicts occur.
        let alpha = match rng.gen_range(0..3) {
            0 => Formula::or(gamma[0].clone(), random_pl(&mut rng, &atoms, 2, 1)),
            1 => gamma.iter().cloned().reduce(Formula::and).expect("nonempty"),
            _ => random_pl(&mut rng, &atoms, 3, 1),
        };
        let sup = lift(entails(&gamma, &alpha, EntailmentMode::Support))?;
        let kh = lift(entails(&gamma, &alpha, EntailmentMode::Knowhow))?;
        if sup.result != kh.result {
            return Err(format!("{gamma:?} / `{alpha}`: support {}, knowhow {}", sup.result, kh.result));
        }
        let (last, rest) = gamma.split_last().expect("nonempty");
        let shuffled = Formula::implies(last.clone(), alpha.clone());
        for mode in [EntailmentMode::Support, EntailmentMode::Knowhow] {
            let dt = lift(entails(rest, &shuffled, mode))?;
            if dt.result != sup.result {
                return Err(format!(
                    "deduction theorem fails for {gamma:?} / `{alpha}` in {mode:?}"
                ));
            }
        }
        holds += sup.result as usize;
    }
    Ok(format!("{ENTAILMENT_PAIRS} pairs, {holds} entailments, both modes and the reshuffle agree"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("known-theorem table", known_theorems),
        ("example model", example_model),
        ("four-way equivalence", four_way_equivalence),
        ("reduction soundness", reduction_soundness),
        ("validity laws", validity_laws),
        ("disjunction property", disjunction_property),
        ("oracle agreement", oracle_agreement),
        ("proof fixtures", proof_fixtures),
        ("classification", classification),
        ("entailment bridge", entailment_bridge),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().map(|d| format!("{d} [{:.1}s]", start.elapsed().as_secs_f64()));
        report(i + 1, title, &outcome);
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    // Methods are part of the contract the CLI reports.
    assert_eq!(inqb_member(&f("p | ~p")).unwrap().method, Method::FullModel);
}
