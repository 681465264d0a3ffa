//! Support over states for PL, and truth at pointed models for the full
//! language.
//!
//! Everything runs on the original model with states as masks: the
//! submodel induced by a state never has to be materialized, because
//! support, `K`, `Kh` and `[]` only look at worlds inside the current mask.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::model::{Model, State};
use crate::resolution::{fits_cap, Resolver, DEFAULT_CAP};
use crate::transform::{eliminate_kh, rl};

/// How `Kh` is decided during evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Uniform resolutions when the space fits the cap, support otherwise.
    #[default]
    Auto,
    /// Intersect per-world resolution sets.
    Resolution,
    /// Support of the argument at the current world set.
    Support,
    /// `K`-disjunction over the formula-level resolutions.
    Rl,
    /// Evaluate the `Kh`-free rewrite.
    Reduced,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Route> {
        Ok(match s {
            "auto" => Route::Auto,
            "resolution" => Route::Resolution,
            "support" => Route::Support,
            "rl" => Route::Rl,
            "reduced" => Route::Reduced,
            _ => return Err(Error::Invalid(format!("unknown route `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    pub route: Route,
    pub cap: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            route: Route::Auto,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states_visited: u64,
    pub cache_hits: u64,
}

impl Stats {
    fn add(&mut self, other: Stats) {
        self.states_visited += other.states_visited;
        self.cache_hits += other.cache_hits;
    }
}

/// Worlds of `m` where the PL formula is classically true.
pub fn truth_set(m: &Model, alpha: &Formula) -> Result<State> {
    let full = m.full_state().0;
    fn go(m: &Model, f: &Formula, full: u32) -> Result<u32> {
        Ok(match f {
            Formula::Atom(p) => m.atom_state(p).0,
            Formula::Bot => 0,
            Formula::And(a, b) => go(m, a, full)? & go(m, b, full)?,
            Formula::Or(a, b) => go(m, a, full)? | go(m, b, full)?,
            Formula::Implies(a, b) => (!go(m, a, full)? | go(m, b, full)?) & full,
            _ => return Err(Error::NotPropositional(f.to_string())),
        })
    }
    Ok(State(go(m, alpha, full)?))
}

// ---------------------------------------------------------------------------
// Support

#[derive(Clone, Debug)]
enum PlNode {
    Atom(u32),
    Bot,
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

/// Memoized support checker for one formula on one model.
#[derive(Clone, Debug)]
pub struct SupportEval {
    nodes: Vec<PlNode>,
    root: usize,
    memo: HashMap<(usize, u32), bool>,
    stats: Stats,
}

impl SupportEval {
    pub fn new(m: &Model, alpha: &Formula) -> Result<SupportEval> {
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        let root = Self::compile(m, alpha, &mut nodes, &mut index)?;
        Ok(SupportEval {
            nodes,
            root,
            memo: HashMap::new(),
            stats: Stats::default(),
        })
    }

    fn compile(
        m: &Model,
        f: &Formula,
        nodes: &mut Vec<PlNode>,
        index: &mut HashMap<Formula, usize>,
    ) -> Result<usize> {
        if let Some(&i) = index.get(f) {
            return Ok(i);
        }
        let node = match f {
            Formula::Atom(p) => PlNode::Atom(m.atom_state(p).0),
            Formula::Bot => PlNode::Bot,
            Formula::And(a, b) => {
                PlNode::And(Self::compile(m, a, nodes, index)?, Self::compile(m, b, nodes, index)?)
            }
            Formula::Or(a, b) => {
                PlNode::Or(Self::compile(m, a, nodes, index)?, Self::compile(m, b, nodes, index)?)
            }
            Formula::Implies(a, b) => {
                PlNode::Imp(Self::compile(m, a, nodes, index)?, Self::compile(m, b, nodes, index)?)
            }
            _ => return Err(Error::NotPropositional(f.to_string())),
        };
        nodes.push(node);
        index.insert(f.clone(), nodes.len() - 1);
        Ok(nodes.len() - 1)
    }

    pub fn supports(&mut self, s: State) -> bool {
        self.at(self.root, s.0)
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    fn at(&mut self, n: usize, s: u32) -> bool {
        match self.nodes[n] {
            PlNode::Atom(mask) => s & !mask == 0,
            PlNode::Bot => s == 0,
            PlNode::And(a, b) => self.at(a, s) && self.at(b, s),
            PlNode::Or(a, b) => self.at(a, s) || self.at(b, s),
            PlNode::Imp(a, b) => {
                if let Some(&v) = self.memo.get(&(n, s)) {
                    self.stats.cache_hits += 1;
                    return v;
                }
                self.stats.states_visited += 1;
                // Every substate is s itself or below s minus one world.
                let mut v = !self.at(a, s) || self.at(b, s);
                let mut rest = s;
                while v && rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    rest &= !bit;
                    v = self.at(n, s & !bit);
                }
                self.memo.insert((n, s), v);
                v
            }
        }
    }
}

/// `s` supports `alpha`.
pub fn supports(m: &Model, s: State, alpha: &Formula) -> Result<bool> {
    Ok(supports_with_stats(m, s, alpha)?.0)
}

pub fn supports_with_stats(m: &Model, s: State, alpha: &Formula) -> Result<(bool, Stats)> {
    if !s.is_subset(m.full_state()) {
        return Err(Error::Invalid("state mentions worlds outside the model".into()));
    }
    let mut ev = SupportEval::new(m, alpha)?;
    let v = ev.supports(s);
    Ok((v, ev.stats()))
}

// ---------------------------------------------------------------------------
// Truth at pointed models

#[derive(Clone, Debug)]
enum Node {
    Atom(u32),
    Bot,
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Know(usize),
    Update(usize),
    Kh(KhCheck),
}

#[derive(Clone, Debug)]
enum KhCheck {
    Resolution(Resolver),
    Support(usize),
    /// Truth sets of the formula-level resolutions.
    Rl(Vec<u32>),
    Reduced(usize),
}

/// Evaluator for one model; formulas are compiled on demand and share a memo.
#[derive(Debug)]
pub struct Evaluator<'m> {
    model: &'m Model,
    opts: EvalOptions,
    nodes: Vec<Node>,
    index: HashMap<Formula, usize>,
    supports: Vec<SupportEval>,
    memo: HashMap<(usize, u32, u8), bool>,
    stats: Stats,
}

/// Memo key for nodes whose value does not depend on the world.
const ANY_WORLD: u8 = u8::MAX;

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m Model, opts: EvalOptions) -> Evaluator<'m> {
        Evaluator {
            model,
            opts,
            nodes: Vec::new(),
            index: HashMap::new(),
            supports: Vec::new(),
            memo: HashMap::new(),
            stats: Stats::default(),
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn stats(&self) -> Stats {
        let mut s = self.stats;
        for ev in &self.supports {
            s.add(ev.stats());
        }
        s
    }

    fn compile(&mut self, f: &Formula) -> Result<usize> {
        if let Some(&i) = self.index.get(f) {
            return Ok(i);
        }
        let node = match f {
            Formula::Atom(p) => Node::Atom(self.model.atom_state(p).0),
            Formula::Bot => Node::Bot,
            Formula::And(a, b) => Node::And(self.compile(a)?, self.compile(b)?),
            Formula::Or(a, b) => Node::Or(self.compile(a)?, self.compile(b)?),
            Formula::Implies(a, b) => Node::Imp(self.compile(a)?, self.compile(b)?),
            Formula::Know(a) => Node::Know(self.compile(a)?),
            Formula::Update(a) => Node::Update(self.compile(a)?),
            Formula::KnowHow(alpha) => Node::Kh(self.compile_kh(f, alpha)?),
        };
        self.nodes.push(node);
        self.index.insert(f.clone(), self.nodes.len() - 1);
        Ok(self.nodes.len() - 1)
    }

    fn compile_kh(&mut self, whole: &Formula, alpha: &Formula) -> Result<KhCheck> {
        if !alpha.is_pl() {
            return Err(Error::KhScope(alpha.to_string()));
        }
        let route = match self.opts.route {
            Route::Auto if fits_cap(alpha, self.opts.cap) => Route::Resolution,
            Route::Auto => Route::Support,
            r => r,
        };
        Ok(match route {
            Route::Resolution => KhCheck::Resolution(Resolver::new(alpha, self.opts.cap)?),
            Route::Support => {
                self.supports.push(SupportEval::new(self.model, alpha)?);
                KhCheck::Support(self.supports.len() - 1)
            }
            Route::Rl => {
                let masks = rl(alpha, self.opts.cap)?
                    .iter()
                    .map(|rho| truth_set(self.model, rho).map(|s| s.0))
                    .collect::<Result<_>>()?;
                KhCheck::Rl(masks)
            }
            Route::Reduced => KhCheck::Reduced(self.compile(&eliminate_kh(whole))?),
            Route::Auto => unreachable!(),
        })
    }

    /// Truth of `phi` at world `w` of the submodel induced by `within`.
    pub fn eval_in(&mut self, phi: &Formula, within: State, w: usize) -> Result<bool> {
        if !within.contains(w) || !within.is_subset(self.model.full_state()) {
            return Err(Error::Invalid("world outside the evaluation state".into()));
        }
        let n = self.compile(phi)?;
        Ok(self.at(n, within.0, w))
    }

    pub fn eval(&mut self, phi: &Formula, w: usize) -> Result<bool> {
        self.eval_in(phi, self.model.full_state(), w)
    }

    /// Truth at every world of the submodel induced by `within`.
    pub fn valid_in(&mut self, phi: &Formula, within: State) -> Result<bool> {
        let n = self.compile(phi)?;
        Ok(within.indices().all(|w| self.at(n, within.0, w)))
    }

    fn at(&mut self, n: usize, s: u32, w: usize) -> bool {
        match &self.nodes[n] {
            Node::Atom(mask) => mask >> w & 1 == 1,
            Node::Bot => false,
            &Node::And(a, b) => self.at(a, s, w) && self.at(b, s, w),
            &Node::Or(a, b) => self.at(a, s, w) || self.at(b, s, w),
            &Node::Imp(a, b) => !self.at(a, s, w) || self.at(b, s, w),
            &Node::Know(a) => {
                let key = (n, s, ANY_WORLD);
                if let Some(&v) = self.memo.get(&key) {
                    self.stats.cache_hits += 1;
                    return v;
                }
                self.stats.states_visited += 1;
                let v = State(s).indices().all(|v| self.at(a, s, v));
                self.memo.insert(key, v);
                v
            }
            &Node::Update(a) => {
                let key = (n, s, w as u8);
                if let Some(&v) = self.memo.get(&key) {
                    self.stats.cache_hits += 1;
                    return v;
                }
                self.stats.states_visited += 1;
                let others = State(s).without(w);
                let v = others.subsets().all(|t| self.at(a, t.0 | 1 << w, w));
                self.memo.insert(key, v);
                v
            }
            Node::Kh(_) => {
                let key = (n, s, ANY_WORLD);
                if let Some(&v) = self.memo.get(&key) {
                    self.stats.cache_hits += 1;
                    return v;
                }
                self.stats.states_visited += 1;
                let v = self.kh(n, s, w);
                self.memo.insert(key, v);
                v
            }
        }
    }

    fn kh(&mut self, n: usize, s: u32, w: usize) -> bool {
        let Node::Kh(check) = &self.nodes[n] else {
            unreachable!()
        };
        match check {
            KhCheck::Resolution(r) => !r
                .uniform(self.model, State(s))
                .expect("evaluation states are nonempty")
                .is_clear(),
            &KhCheck::Support(i) => self.supports[i].supports(State(s)),
            KhCheck::Rl(masks) => masks.iter().any(|&t| s & !t == 0),
            &KhCheck::Reduced(r) => self.at(r, s, w),
        }
    }
}

pub fn satisfies(m: &Model, w: &str, phi: &Formula) -> Result<bool> {
    satisfies_with(m, w, phi, EvalOptions::default())
}

pub fn satisfies_with(m: &Model, w: &str, phi: &Formula, opts: EvalOptions) -> Result<bool> {
    let i = m.index_of(w)?;
    Evaluator::new(m, opts).eval(phi, i)
}

pub fn valid_on_model(m: &Model, phi: &Formula) -> Result<bool> {
    valid_on_model_with(m, phi, EvalOptions::default())
}

pub fn valid_on_model_with(m: &Model, phi: &Formula, opts: EvalOptions) -> Result<bool> {
    Evaluator::new(m, opts).valid_in(phi, m.full_state())
}

// ---------------------------------------------------------------------------
// Propositions, alternatives, classification

/// Every supporting state, the empty one included, ascending by mask.
pub fn proposition(m: &Model, alpha: &Formula) -> Result<Vec<State>> {
    let mut ev = SupportEval::new(m, alpha)?;
    Ok(m.full_state().subsets().filter(|&s| ev.supports(s)).collect())
}

/// Maximal supporting states, ascending by mask.
pub fn alternatives(m: &Model, alpha: &Formula) -> Result<Vec<State>> {
    let prop = proposition(m, alpha)?;
    Ok(maximal(&prop))
}

fn maximal(states: &[State]) -> Vec<State> {
    states
        .iter()
        .copied()
        .filter(|&s| !states.iter().any(|&t| t != s && s.is_subset(t)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub informative: bool,
    pub inquisitive: bool,
    pub question: bool,
    pub statement: bool,
    #[serde(skip)]
    pub alternatives: Vec<State>,
    /// A world outside every alternative.
    #[serde(skip)]
    pub uncovered_world: Option<usize>,
    /// A state whose submodel satisfies `K alpha & ~Kh alpha`.
    #[serde(skip)]
    pub witness_submodel: Option<State>,
}

/// Classifies `alpha` relative to `m`, by the alternatives and again by the
/// epistemic characterizations; the two must agree.
pub fn classify(m: &Model, alpha: &Formula) -> Result<Classification> {
    if !alpha.is_pl() {
        return Err(Error::NotPropositional(alpha.to_string()));
    }
    let alts = alternatives(m, alpha)?;
    let covered = alts.iter().fold(0u32, |acc, s| acc | s.0);
    let uncovered_world = State(m.full_state().0 & !covered).indices().next();
    let informative = uncovered_world.is_some();
    let inquisitive = alts.len() >= 2;

    let know = Formula::know(alpha.clone());
    let kh = Formula::KnowHow(Box::new(alpha.clone()));
    let not_known = Formula::not(know.clone());
    let gap = Formula::and(know, Formula::not(kh));
    let inquisitive_el = Formula::khat(Formula::diamond(gap.clone()));

    let mut ev = Evaluator::new(m, EvalOptions::default());
    let informative_el = ev.valid_in(&not_known, m.full_state())?;
    let inquisitive_by_el = ev.valid_in(&inquisitive_el, m.full_state())?;
    if informative_el != informative || inquisitive_by_el != inquisitive {
        return Err(Error::Internal(format!(
            "classification of `{alpha}` disagrees: alternatives give informative={informative}, \
             inquisitive={inquisitive}; epistemic route gives informative={informative_el}, \
             inquisitive={inquisitive_by_el}"
        )));
    }
    let mut witness_submodel = None;
    if inquisitive {
        for t in m.nonempty_states() {
            let w = t.indices().next().expect("nonempty");
            if ev.eval_in(&gap, t, w)? {
                witness_submodel = Some(t);
                break;
            }
        }
    }
    Ok(Classification {
        informative,
        inquisitive,
        question: !informative,
        statement: !inquisitive,
        alternatives: alts,
        uncovered_world,
        witness_submodel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::model::full_model;
    use std::collections::BTreeSet;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn atoms(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn example() -> Model {
        Model::new(vec![
            ("w".into(), atoms(&["p"])),
            ("v".into(), BTreeSet::new()),
        ])
        .unwrap()
    }

    const ROUTES: [Route; 5] = [
        Route::Auto,
        Route::Resolution,
        Route::Support,
        Route::Rl,
        Route::Reduced,
    ];

    #[test]
    fn support_basics() {
        let m = full_model(&atoms(&["p"])).unwrap();
        assert!(supports(&m, State::EMPTY, &f("bot")).unwrap());
        assert!(!supports(&m, m.full_state(), &f("p | ~p")).unwrap());
        let w = m.state_from_ids(&["w{p}"]).unwrap();
        assert!(supports(&m, w, &f("p")).unwrap());
        assert!(supports(&m, m.full_state(), &f("~~p -> p")).unwrap());
        assert!(supports(&m, m.full_state(), &f("K p")).is_err());
    }

    #[test]
    fn example_model_all_routes() {
        let m = example();
        for route in ROUTES {
            let opts = EvalOptions {
                route,
                cap: DEFAULT_CAP,
            };
            for w in ["w", "v"] {
                assert!(satisfies_with(&m, w, &f("K(p | ~p)"), opts).unwrap());
                assert!(!satisfies_with(&m, w, &f("Kh(p | ~p)"), opts).unwrap());
            }
            assert!(!valid_on_model_with(&m, &f("Kh(p | ~p) <-> K(p | ~p)"), opts).unwrap());
        }
    }

    #[test]
    fn singleton_knows_how() {
        let m = Model::new(vec![("u".into(), atoms(&["p"]))]).unwrap();
        assert!(satisfies(&m, "u", &f("Kh p")).unwrap());
    }

    #[test]
    fn valid_laws_on_example() {
        let m = example();
        for law in [
            "Kh(p & ~p) -> K(p & ~p)",
            "Kh p <-> K p",
            "Kh(p | ~p) -> K(p | ~p)",
            "(p | ~p) <-> <> Kh(p | ~p)",
            "Kh(~~p -> p)",
        ] {
            assert!(valid_on_model(&m, &f(law)).unwrap(), "{law}");
        }
    }

    #[test]
    fn update_quantifies_over_submodels() {
        let m = example();
        // At w some submodel keeps v, so not K p; the singleton submodel knows p.
        assert!(satisfies(&m, "w", &f("<> K p")).unwrap());
        assert!(!satisfies(&m, "w", &f("[] K p")).unwrap());
        assert!(!satisfies(&m, "v", &f("<> K p")).unwrap());
    }

    #[test]
    fn alternatives_and_propositions() {
        let m = full_model(&atoms(&["p"])).unwrap();
        let ids = |v: Vec<State>| -> Vec<Vec<String>> {
            v.into_iter().map(|s| m.state_ids(s)).collect()
        };
        assert_eq!(
            ids(alternatives(&m, &f("p | ~p")).unwrap()),
            vec![vec!["w{p}".to_string()], vec!["w{}".to_string()]]
        );
        assert_eq!(ids(alternatives(&m, &f("p")).unwrap()), vec![vec!["w{p}".to_string()]]);
        assert_eq!(alternatives(&m, &f("top")).unwrap(), vec![m.full_state()]);
        assert_eq!(
            proposition(&m, &f("p")).unwrap(),
            vec![State::EMPTY, m.state_from_ids(&["w{p}"]).unwrap()]
        );
        assert_eq!(proposition(&m, &f("bot")).unwrap(), vec![State::EMPTY]);
        assert_eq!(proposition(&m, &f("top")).unwrap().len(), 4);
        assert_eq!(alternatives(&m, &f("bot")).unwrap(), vec![State::EMPTY]);
    }

    #[test]
    fn classification() {
        let m1 = full_model(&atoms(&["p"])).unwrap();
        let c = classify(&m1, &f("p | ~p")).unwrap();
        assert!(c.question && c.inquisitive && !c.informative);
        assert_eq!(c.alternatives.len(), 2);
        assert!(c.witness_submodel.is_some());

        let m2 = full_model(&atoms(&["p", "q"])).unwrap();
        assert!(classify(&m2, &f("p")).unwrap().statement);
        assert!(classify(&m2, &f("~p -> q")).unwrap().statement);
        let c = classify(&m2, &f("p & q")).unwrap();
        assert!(c.informative);
        assert!(c.uncovered_world.is_some());
        let c = classify(&m2, &f("bot")).unwrap();
        assert!(c.informative && c.statement);
    }

    #[test]
    fn stats_are_reported() {
        let m = full_model(&atoms(&["p", "q"])).unwrap();
        let (v, st) = supports_with_stats(&m, m.full_state(), &f("(p -> q) -> (~q -> ~p)")).unwrap();
        assert!(v);
        assert!(st.states_visited > 0);
    }
}
