//! Seeded cross-checks between the evaluators and the rewrite pipeline.
//!
//! Each trial draws a model and a propositional formula `alpha`, then
//! compares, on every nonempty state `s`, support of `alpha` at `s` with
//! `Kh alpha` evaluated through uniform resolutions, the RL translation and
//! the `Kh`/`[]`-free reduction. A second formula from the full language
//! checks `eliminate_kh` and `eliminate_box` pointwise against their input.
//!
//! The PL generator weights implication down and caps how deeply
//! implications nest: resolution spaces grow as a tower under `->`, so an
//! unconstrained generator mostly yields formulas no route can enumerate.
//! Draws above the resolution cap are redrawn and the redraws are counted
//! in the report.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::model::{full_model, Model, ModelDocument, State};
use crate::resolution::{fits_cap, uniform_resolutions, DEFAULT_CAP};
use crate::semantics::{supports, valid_on_model, EvalOptions, Evaluator, Route};
use crate::transform::{eliminate_box, eliminate_kh, rl_translation};

pub const MAX_FUZZ_WORLDS: usize = 5;
pub const MAX_FUZZ_ATOMS: usize = 3;
pub const MAX_FUZZ_DEPTH: usize = 4;
pub const MAX_FUZZ_IMP_NESTING: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_worlds: usize,
    pub max_atoms: usize,
    pub max_depth: usize,
    pub max_imp_nesting: usize,
    /// Routes compared against support; the uniform-resolution check runs
    /// with `resolution`.
    pub routes: Vec<Route>,
    pub cap: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            trials: 100,
            max_worlds: 4,
            max_atoms: 3,
            max_depth: 4,
            max_imp_nesting: 2,
            routes: vec![Route::Resolution, Route::Rl, Route::Reduced],
            cap: DEFAULT_CAP,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, max: usize| Err(Error::Invalid(format!("{what} must be at most {max}")));
        if self.max_worlds == 0 || self.max_worlds > MAX_FUZZ_WORLDS {
            return Err(Error::Invalid(format!("max_worlds must be in 1..={MAX_FUZZ_WORLDS}")));
        }
        if self.max_atoms == 0 || self.max_atoms > MAX_FUZZ_ATOMS {
            return Err(Error::Invalid(format!("max_atoms must be in 1..={MAX_FUZZ_ATOMS}")));
        }
        if self.max_depth > MAX_FUZZ_DEPTH {
            return bad("max_depth", MAX_FUZZ_DEPTH);
        }
        if self.max_imp_nesting > MAX_FUZZ_IMP_NESTING {
            return bad("max_imp_nesting", MAX_FUZZ_IMP_NESTING);
        }
        if let Some(r) = self
            .routes
            .iter()
            .find(|r| matches!(r, Route::Auto | Route::Support))
        {
            return Err(Error::Invalid(format!("route `{r:?}` is not a comparison route")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyKind {
    /// The routes for `Kh alpha` disagree on a state.
    KhRoutes,
    /// A rewrite changed the truth value at a pointed model.
    Reduction,
    /// A route failed outright (resource or internal error).
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub trial: usize,
    pub kind: DiscrepancyKind,
    pub model: ModelDocument,
    pub state: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<String>,
    pub formula: String,
    pub values: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub trials: usize,
    /// States on which the `Kh` routes were compared.
    pub kh_checks: u64,
    /// Pointed models on which rewrites were compared.
    pub reduction_checks: u64,
    /// PL draws rejected for exceeding the resolution cap.
    pub redraws: u64,
    pub discrepancies: Vec<Discrepancy>,
}

impl FuzzReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Generators

pub fn atom_names(n: usize) -> Vec<String> {
    ["p", "q", "r"].iter().take(n).map(|s| s.to_string()).collect()
}

/// A model with 1..=`max_worlds` worlds named `w0, w1, ...`.
pub fn random_model<R: Rng>(rng: &mut R, max_worlds: usize, atoms: &[String]) -> Model {
    let n = rng.gen_range(1..=max_worlds);
    let worlds = (0..n)
        .map(|i| {
            let val: BTreeSet<String> = atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            (format!("w{i}"), val)
        })
        .collect();
    Model::new(worlds).expect("generated models are well formed")
}

/// Random PL formula. `imp_budget` bounds how many implications may sit on
/// one root-to-leaf path; negations are free since `S(~a)` is a singleton.
pub fn random_pl<R: Rng>(rng: &mut R, atoms: &[String], depth: usize, imp_budget: usize) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return leaf(rng, atoms);
    }
    let imp_weight = if imp_budget > 0 { 1 } else { 0 };
    let choices = [(0, 2), (1, 3), (2, 3), (3, imp_weight), (4, 1)];
    let op = choices
        .choose_weighted(rng, |c| c.1)
        .expect("weights are positive")
        .0;
    let mut sub = |budget| random_pl(rng, atoms, depth - 1, budget);
    match op {
        0 => Formula::not(sub(imp_budget)),
        1 => Formula::and(sub(imp_budget), sub(imp_budget)),
        2 => Formula::or(sub(imp_budget), sub(imp_budget)),
        3 => Formula::implies(sub(imp_budget - 1), sub(imp_budget - 1)),
        _ => leaf(rng, atoms),
    }
}

fn leaf<R: Rng>(rng: &mut R, atoms: &[String]) -> Formula {
    if rng.gen_ratio(1, 8) {
        Formula::bot()
    } else {
        Formula::atom(atoms.choose(rng).expect("at least one atom").clone())
    }
}

/// Random formula of the full language with modal depth at most `depth`.
pub fn random_delkh<R: Rng>(rng: &mut R, atoms: &[String], depth: usize) -> Formula {
    random_modal(rng, atoms, depth, 3, true)
}

/// Random S5 formula (`K` only) with modal depth at most `depth`.
pub fn random_el<R: Rng>(rng: &mut R, atoms: &[String], depth: usize) -> Formula {
    random_modal(rng, atoms, depth, 3, false)
}

fn random_modal<R: Rng>(
    rng: &mut R,
    atoms: &[String],
    modal: usize,
    connectives: usize,
    full: bool,
) -> Formula {
    if connectives == 0 && modal == 0 || rng.gen_ratio(1, 5) {
        return leaf(rng, atoms);
    }
    let c = connectives.saturating_sub(1);
    let mut ops: Vec<u8> = Vec::new();
    if connectives > 0 {
        ops.extend([0, 1, 2, 3]);
    }
    if modal > 0 {
        ops.extend([4, 4]);
        if full {
            ops.extend([5, 6]);
        }
    }
    match *ops.choose(rng).expect("some operator is available") {
        0 => Formula::not(random_modal(rng, atoms, modal, c, full)),
        1 => Formula::and(
            random_modal(rng, atoms, modal, c, full),
            random_modal(rng, atoms, modal, c, full),
        ),
        2 => Formula::or(
            random_modal(rng, atoms, modal, c, full),
            random_modal(rng, atoms, modal, c, full),
        ),
        3 => Formula::implies(
            random_modal(rng, atoms, modal, c, full),
            random_modal(rng, atoms, modal, c, full),
        ),
        4 => Formula::know(random_modal(rng, atoms, modal - 1, 2, full)),
        5 => Formula::update(random_modal(rng, atoms, modal - 1, 2, full)),
        _ => Formula::KnowHow(Box::new(random_pl(rng, atoms, 2, 1))),
    }
}

/// Per-trial generator; trials are independent so any subset can be rerun.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

// ---------------------------------------------------------------------------
// Checks

/// Values of `Kh alpha` on state `s` of `m`, one per route.
pub fn kh_route_values(
    m: &Model,
    s: State,
    alpha: &Formula,
    routes: &[Route],
    cap: u64,
) -> Result<BTreeMap<String, bool>> {
    let kh = Formula::KnowHow(Box::new(alpha.clone()));
    let w = s.indices().next().ok_or(Error::EmptyState)?;
    let mut out = BTreeMap::new();
    out.insert("support".to_string(), supports(m, s, alpha)?);
    for route in routes {
        match route {
            Route::Resolution => {
                let opts = EvalOptions { route: Route::Resolution, cap };
                out.insert("resolution".into(), Evaluator::new(m, opts).eval_in(&kh, s, w)?);
                let uniform = uniform_resolutions(m, s, alpha, cap)?;
                out.insert("uniform".into(), !uniform.is_empty());
            }
            Route::Rl => {
                let sub = m.restrict(s)?;
                out.insert("rl".into(), valid_on_model(&sub, &rl_translation(alpha, cap)?)?);
            }
            Route::Reduced => {
                let reduced = eliminate_box(&eliminate_kh(&kh))?;
                let opts = EvalOptions { route: Route::Support, cap };
                out.insert("reduced".into(), Evaluator::new(m, opts).eval_in(&reduced, s, w)?);
            }
            Route::Auto | Route::Support => {}
        }
    }
    Ok(out)
}

/// Values of `phi`, `eliminate_kh(phi)` and `eliminate_box(eliminate_kh(phi))`
/// at world `w` of the submodel induced by `s`.
pub fn reduction_values(m: &Model, s: State, w: usize, phi: &Formula) -> Result<BTreeMap<String, bool>> {
    let no_kh = eliminate_kh(phi);
    let no_box = eliminate_box(&no_kh)?;
    let mut ev = Evaluator::new(m, EvalOptions { route: Route::Support, ..EvalOptions::default() });
    Ok(BTreeMap::from([
        ("input".to_string(), ev.eval_in(phi, s, w)?),
        ("eliminate-kh".to_string(), ev.eval_in(&no_kh, s, w)?),
        ("eliminate-box".to_string(), ev.eval_in(&no_box, s, w)?),
    ]))
}

/// Checks the reduction of `phi` on every pointed model over its atoms (or
/// over `atoms`, when given). Returns the first disagreement as
/// `(state, world, values)` on the full model.
pub fn reduction_counterexample(
    phi: &Formula,
    atoms: &BTreeSet<String>,
) -> Result<Option<(Model, State, usize, BTreeMap<String, bool>)>> {
    let mut all = atoms.clone();
    all.extend(phi.atoms());
    let m = full_model(&all)?;
    let no_kh = eliminate_kh(phi);
    if no_kh.has_knowhow() {
        return Err(Error::Internal(format!("eliminate_kh left Kh in {no_kh}")));
    }
    let no_box = eliminate_box(&no_kh)?;
    if no_box.has_knowhow() || no_box.has_update() {
        return Err(Error::Internal(format!("eliminate_box left a modality in {no_box}")));
    }
    let mut ev = Evaluator::new(&m, EvalOptions { route: Route::Support, ..EvalOptions::default() });
    for s in m.nonempty_states() {
        for w in s.indices() {
            let a = ev.eval_in(phi, s, w)?;
            let b = ev.eval_in(&no_kh, s, w)?;
            let c = ev.eval_in(&no_box, s, w)?;
            if a != b || a != c {
                let values = BTreeMap::from([
                    ("input".to_string(), a),
                    ("eliminate-kh".to_string(), b),
                    ("eliminate-box".to_string(), c),
                ]);
                return Ok(Some((m, s, w, values)));
            }
        }
    }
    Ok(None)
}

fn disagree(values: &BTreeMap<String, bool>) -> bool {
    let mut it = values.values();
    let first = it.next();
    it.any(|v| Some(v) != first)
}

// ---------------------------------------------------------------------------
// Shrinking

/// A failing case: a model, a state of it, and a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub model: Model,
    pub state: State,
    pub formula: Formula,
}

/// Greedy delta debugging: restricts the model to the state, then drops
/// worlds and replaces subformulas by simpler ones for as long as `fails`
/// keeps holding. The result is a fixpoint that still fails.
pub fn shrink(case: Case, fails: &dyn Fn(&Case) -> bool) -> Case {
    let mut best = case;
    if let Ok(sub) = best.model.restrict(best.state) {
        let c = Case {
            state: sub.full_state(),
            model: sub,
            formula: best.formula.clone(),
        };
        if fails(&c) {
            best = c;
        }
    }
    loop {
        let next = world_removals(&best)
            .chain(simpler_formulas(&best.formula).into_iter().map(|f| Case {
                formula: f,
                ..best.clone()
            }))
            .find(|c| fails(c));
        match next {
            Some(c) => best = c,
            None => return best,
        }
    }
}

fn world_removals(case: &Case) -> impl Iterator<Item = Case> + '_ {
    case.state.indices().filter_map(move |i| {
        let keep = case.model.full_state().without(i);
        if keep.is_empty() {
            return None;
        }
        let model = case.model.restrict(keep).ok()?;
        // Reindex the state into the smaller model.
        let state = State(
            case.state
                .indices()
                .filter(|&j| j != i)
                .map(|j| if j > i { j - 1 } else { j })
                .fold(0, |acc, j| acc | 1 << j),
        );
        (!state.is_empty()).then(|| Case {
            model,
            state,
            formula: case.formula.clone(),
        })
    })
}

/// Candidates strictly smaller than `f`: `bot`, atoms, direct subformulas,
/// and `f` with one child simplified.
fn simpler_formulas(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    if *f != Formula::Bot {
        out.push(Formula::bot());
    }
    for a in f.atoms() {
        let a = Formula::atom(a);
        if a != *f {
            out.push(a);
        }
    }
    for c in f.children() {
        out.push(c.clone());
    }
    let rebuild = |f: &Formula, i: usize, g: Formula| -> Formula { f.replace_at(&[i], &g).expect("child exists") };
    for (i, c) in f.children().into_iter().enumerate() {
        for g in simpler_formulas(c) {
            out.push(rebuild(f, i, g));
        }
    }
    out.retain(|g| g.size() < f.size() && g.is_well_formed());
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// Harness

pub fn fuzz_equivalence(cfg: &FuzzConfig) -> Result<FuzzReport> {
    cfg.validate()?;
    let mut report = FuzzReport {
        config: cfg.clone(),
        trials: cfg.trials,
        kh_checks: 0,
        reduction_checks: 0,
        redraws: 0,
        discrepancies: Vec::new(),
    };
    for trial in 0..cfg.trials {
        run_trial(cfg, trial, &mut report);
    }
    report.discrepancies.sort_by_key(|d| d.trial);
    Ok(report)
}

fn run_trial(cfg: &FuzzConfig, trial: usize, report: &mut FuzzReport) {
    let mut rng = trial_rng(cfg.seed, trial);
    let n_atoms = rng.gen_range(1..=cfg.max_atoms);
    let atoms = atom_names(n_atoms);
    let m = random_model(&mut rng, cfg.max_worlds, &atoms);
    let alpha = loop {
        let a = random_pl(&mut rng, &atoms, cfg.max_depth, cfg.max_imp_nesting);
        if fits_cap(&a, cfg.cap) {
            break a;
        }
        report.redraws += 1;
    };
    let phi = random_delkh(&mut rng, &atoms, cfg.max_depth.min(3));

    let kh_fails = |c: &Case| {
        kh_route_values(&c.model, c.state, &c.formula, &cfg.routes, cfg.cap)
            .map_or(true, |v| disagree(&v))
    };
    for s in m.nonempty_states() {
        report.kh_checks += 1;
        let outcome = kh_route_values(&m, s, &alpha, &cfg.routes, cfg.cap);
        if outcome.as_ref().is_ok_and(|v| !disagree(v)) {
            continue;
        }
        let small = shrink(
            Case {
                model: m.clone(),
                state: s,
                formula: alpha.clone(),
            },
            &|c| c.formula.is_pl() && kh_fails(c),
        );
        let again = kh_route_values(&small.model, small.state, &small.formula, &cfg.routes, cfg.cap);
        report.discrepancies.push(discrepancy(trial, &small, None, again));
        break;
    }

    let red_fails = |c: &Case, w: usize| {
        reduction_values(&c.model, c.state, w, &c.formula).map_or(true, |v| disagree(&v))
    };
    'outer: for s in m.nonempty_states() {
        for w in s.indices() {
            report.reduction_checks += 1;
            let outcome = reduction_values(&m, s, w, &phi);
            if outcome.as_ref().is_ok_and(|v| !disagree(v)) {
                continue;
            }
            // Track the designated world by name while worlds are dropped.
            let name = m.world_id(w).to_string();
            let small = shrink(
                Case {
                    model: m.clone(),
                    state: s,
                    formula: phi.clone(),
                },
                &|c| {
                    c.model
                        .index_of(&name)
                        .is_ok_and(|i| c.state.contains(i) && red_fails(c, i))
                },
            );
            let i = small.model.index_of(&name).expect("shrinking keeps the world");
            let again = reduction_values(&small.model, small.state, i, &small.formula);
            report.discrepancies.push(discrepancy(trial, &small, Some(name), again));
            break 'outer;
        }
    }
}

fn discrepancy(
    trial: usize,
    case: &Case,
    world: Option<String>,
    outcome: Result<BTreeMap<String, bool>>,
) -> Discrepancy {
    let (kind, values, error) = match outcome {
        Ok(v) if world.is_some() => (DiscrepancyKind::Reduction, v, None),
        Ok(v) => (DiscrepancyKind::KhRoutes, v, None),
        Err(e) => (DiscrepancyKind::Error, BTreeMap::new(), Some(e.to_string())),
    };
    Discrepancy {
        trial,
        kind,
        model: case.model.to_document(),
        state: case.model.state_ids(case.state),
        world,
        formula: case.formula.to_string(),
        values,
        error,
    }
}
