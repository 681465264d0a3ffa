//! Decision procedures: classical tautologies, S5 validity, membership in
//! the basic inquisitive logic, validity of the full language, and
//! entailment both as support and as knowing how.
//!
//! S5 validity uses a clause criterion on the normal form. A clause
//! `a | Khat a0 | K a1 | ... | K an` fails at a pointed model exactly when
//! `~a & ~a0` holds at the point, `a0` holds nowhere, and each `ai` fails
//! somewhere, necessarily at a `~a0` world. Such a model exists iff
//! `a | a0` is not a tautology and no `a0 | ai` is one.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::model::{canonical_world_id, full_model, Model, ModelDocument, State};
use crate::resolution::DEFAULT_CAP;
use crate::semantics::{EvalOptions, Evaluator, SupportEval};
use crate::transform::{
    eliminate_box_traced, eliminate_kh, rl_translation, s5_normal_form_with_limit,
    DEFAULT_CLAUSE_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TruthTable,
    FullModel,
    Reduction,
    ClauseCriterion,
    BruteForce,
}

/// A falsifying point: a world for truth, a state for support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub model: ModelDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub world: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub result: bool,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    fn valid(method: Method) -> Verdict {
        Verdict {
            result: true,
            method,
            witness: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Atoms in a truth table.
    pub taut_atoms: usize,
    /// Atoms in a full model.
    pub full_model_atoms: usize,
    /// Resolution-space cap for the RL route.
    pub cap: u64,
    pub clause_limit: usize,
    /// Largest RL translation used only to cross-check a full-model verdict.
    pub cross_check_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            taut_atoms: 20,
            full_model_atoms: 4,
            cap: DEFAULT_CAP,
            clause_limit: DEFAULT_CLAUSE_LIMIT,
            cross_check_cap: 1 << 12,
        }
    }
}

fn pure_world(val: &BTreeSet<String>) -> Model {
    Model::new(vec![(canonical_world_id(val), val.clone())]).expect("one world")
}

/// A valuation falsifying `alpha`, if any.
fn falsifier(alpha: &Formula, limit: usize) -> Result<Option<BTreeSet<String>>> {
    let atoms: Vec<String> = alpha.atoms().into_iter().collect();
    if atoms.len() > limit {
        return Err(Error::Resource(format!(
            "truth table over {} atoms exceeds the limit of {limit}",
            atoms.len()
        )));
    }
    for code in 0..1u64 << atoms.len() {
        let val: BTreeSet<String> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| code >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        if !alpha.eval_classical(&|p| val.contains(p)) {
            return Ok(Some(val));
        }
    }
    Ok(None)
}

pub fn taut(alpha: &Formula) -> Result<Verdict> {
    taut_with(alpha, &Limits::default())
}

pub fn taut_with(alpha: &Formula, limits: &Limits) -> Result<Verdict> {
    if !alpha.is_pl() {
        return Err(Error::NotPropositional(alpha.to_string()));
    }
    Ok(match falsifier(alpha, limits.taut_atoms)? {
        None => Verdict::valid(Method::TruthTable),
        Some(val) => {
            let m = pure_world(&val);
            Verdict {
                result: false,
                method: Method::TruthTable,
                witness: Some(Witness {
                    world: Some(m.world_id(0).to_string()),
                    model: m.to_document(),
                    state: None,
                }),
            }
        }
    })
}

fn require_el(phi: &Formula) -> Result<()> {
    if phi.has_knowhow() {
        return Err(Error::Fragment("Kh"));
    }
    if phi.has_update() {
        return Err(Error::Fragment("[]"));
    }
    Ok(())
}

pub fn s5_valid(phi: &Formula) -> Result<Verdict> {
    s5_valid_with(phi, &Limits::default())
}

pub fn s5_valid_with(phi: &Formula, limits: &Limits) -> Result<Verdict> {
    require_el(phi)?;
    let nf = s5_normal_form_with_limit(phi, limits.clause_limit)?;
    for clause in &nf.clauses {
        let a0 = clause.hat.clone().unwrap_or(Formula::Bot);
        let Some(here) = falsifier(&Formula::or(clause.base.clone(), a0.clone()), limits.taut_atoms)?
        else {
            continue;
        };
        let mut elsewhere = Vec::new();
        let mut valid = false;
        for k in &clause.knows {
            match falsifier(&Formula::or(a0.clone(), k.clone()), limits.taut_atoms)? {
                Some(v) => elsewhere.push(v),
                None => {
                    valid = true;
                    break;
                }
            }
        }
        if valid {
            continue;
        }
        let model = assemble(here, elsewhere);
        let (model, world) = minimize(model, 0, phi)?;
        return Ok(Verdict {
            result: false,
            method: Method::ClauseCriterion,
            witness: Some(Witness {
                world: Some(model.world_id(world).to_string()),
                model: model.to_document(),
                state: None,
            }),
        });
    }
    Ok(Verdict::valid(Method::ClauseCriterion))
}

/// Designated world first, the rest deduplicated by valuation.
fn assemble(here: BTreeSet<String>, elsewhere: Vec<BTreeSet<String>>) -> Model {
    let mut vals = vec![here];
    for v in elsewhere {
        if !vals.contains(&v) {
            vals.push(v);
        }
    }
    Model::new(
        vals.into_iter()
            .map(|v| (canonical_world_id(&v), v))
            .collect(),
    )
    .expect("distinct valuations, at most one world per K part")
}

/// Drops worlds other than the designated one while `phi` stays false there.
fn minimize(mut model: Model, mut world: usize, phi: &Formula) -> Result<(Model, usize)> {
    if Evaluator::new(&model, EvalOptions::default()).eval(phi, world)? {
        return Err(Error::Internal(format!(
            "assembled countermodel does not falsify `{phi}`"
        )));
    }
    let mut i = 0;
    while i < model.len() {
        if i == world {
            i += 1;
            continue;
        }
        let keep = model.full_state().without(i);
        let smaller = model.restrict(keep)?;
        let w = if i < world { world - 1 } else { world };
        if !Evaluator::new(&smaller, EvalOptions::default()).eval(phi, w)? {
            model = smaller;
            world = w;
        } else {
            i += 1;
        }
    }
    Ok((model, world))
}

/// Tries every pointed model whose worlds carry distinct valuations over
/// at most two atoms.
pub fn s5_valid_bruteforce(phi: &Formula) -> Result<Verdict> {
    let atoms: Vec<String> = phi.atoms().into_iter().collect();
    if atoms.len() > 2 {
        return Err(Error::Resource(format!(
            "brute force handles at most 2 atoms, got {}",
            atoms.len()
        )));
    }
    let vals: Vec<BTreeSet<String>> = (0..1u32 << atoms.len())
        .map(|code| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| code >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    for pick in 1u32..1 << vals.len() {
        let worlds = State(pick)
            .indices()
            .map(|i| (canonical_world_id(&vals[i]), vals[i].clone()))
            .collect();
        let m = Model::new(worlds)?;
        let mut ev = Evaluator::new(&m, EvalOptions::default());
        for w in 0..m.len() {
            if !ev.eval(phi, w)? {
                return Ok(Verdict {
                    result: false,
                    method: Method::BruteForce,
                    witness: Some(Witness {
                        world: Some(m.world_id(w).to_string()),
                        model: m.to_document(),
                        state: None,
                    }),
                });
            }
        }
    }
    Ok(Verdict::valid(Method::BruteForce))
}

pub fn inqb_member(alpha: &Formula) -> Result<Verdict> {
    inqb_member_with(alpha, &Limits::default())
}

/// Support at the trivial state of the full model, cross-checked against
/// S5 validity of the RL translation whenever both fit their limits.
pub fn inqb_member_with(alpha: &Formula, limits: &Limits) -> Result<Verdict> {
    if !alpha.is_pl() {
        return Err(Error::NotPropositional(alpha.to_string()));
    }
    let atoms = alpha.atoms();
    let by_model = if atoms.len() <= limits.full_model_atoms {
        let m = full_model(&atoms)?;
        let ok = SupportEval::new(&m, alpha)?.supports(m.full_state());
        Some(Verdict {
            result: ok,
            method: Method::FullModel,
            witness: (!ok).then(|| Witness {
                state: Some(m.world_ids().to_vec()),
                model: m.to_document(),
                world: None,
            }),
        })
    } else {
        None
    };
    let cap = if by_model.is_some() {
        limits.cross_check_cap
    } else {
        limits.cap
    };
    let by_translation = match rl_translation(alpha, cap).and_then(|t| s5_valid_with(&t, limits)) {
        Ok(v) => Some(v),
        Err(e) if e.is_resource() => None,
        Err(e) => return Err(e),
    };
    match (by_model, by_translation) {
        (Some(a), Some(b)) if a.result != b.result => Err(Error::Internal(format!(
            "membership of `{alpha}`: full model says {}, RL translation says {}",
            a.result, b.result
        ))),
        (Some(a), _) => Ok(a),
        (None, Some(mut b)) => {
            b.method = Method::Reduction;
            Ok(b)
        }
        (None, None) => Err(Error::Resource(format!(
            "`{alpha}` exceeds both the full-model atom limit and the resolution cap"
        ))),
    }
}

pub fn delkh_valid(phi: &Formula) -> Result<Verdict> {
    delkh_valid_with(phi, &Limits::default())
}

/// Reduce to S5, decide, and re-check any countermodel on the input.
pub fn delkh_valid_with(phi: &Formula, limits: &Limits) -> Result<Verdict> {
    phi.check_well_formed()?;
    let (el, _) = eliminate_box_traced(&eliminate_kh(phi), limits.clause_limit)?;
    let mut v = s5_valid_with(&el, limits)?;
    v.method = Method::Reduction;
    if let Some(w) = &v.witness {
        let m = Model::from_document(&w.model)?;
        let world = m.index_of(w.world.as_deref().expect("truth witness"))?;
        if Evaluator::new(&m, EvalOptions::default()).eval(phi, world)? {
            return Err(Error::Internal(format!(
                "countermodel for the reduct does not falsify `{phi}`"
            )));
        }
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntailmentMode {
    Support,
    Knowhow,
}

impl std::str::FromStr for EntailmentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "support" => Ok(EntailmentMode::Support),
            "knowhow" => Ok(EntailmentMode::Knowhow),
            _ => Err(Error::Invalid(format!("unknown entailment mode `{s}`"))),
        }
    }
}

pub fn entails(gamma: &[Formula], alpha: &Formula, mode: EntailmentMode) -> Result<Verdict> {
    entails_with(gamma, alpha, mode, &Limits::default())
}

pub fn entails_with(
    gamma: &[Formula],
    alpha: &Formula,
    mode: EntailmentMode,
    limits: &Limits,
) -> Result<Verdict> {
    for f in gamma.iter().chain(std::iter::once(alpha)) {
        if !f.is_pl() {
            return Err(Error::NotPropositional(f.to_string()));
        }
    }
    match mode {
        EntailmentMode::Support => {
            let atoms: BTreeSet<String> = gamma
                .iter()
                .chain(std::iter::once(alpha))
                .flat_map(Formula::atoms)
                .collect();
            if atoms.len() > limits.full_model_atoms {
                return Err(Error::Resource(format!(
                    "{} atoms exceed the full-model limit of {}",
                    atoms.len(),
                    limits.full_model_atoms
                )));
            }
            let m = full_model(&atoms)?;
            let mut premises = gamma
                .iter()
                .map(|g| SupportEval::new(&m, g))
                .collect::<Result<Vec<_>>>()?;
            let mut conclusion = SupportEval::new(&m, alpha)?;
            for s in m.full_state().subsets() {
                if premises.iter_mut().all(|p| p.supports(s)) && !conclusion.supports(s) {
                    return Ok(Verdict {
                        result: false,
                        method: Method::FullModel,
                        witness: Some(Witness {
                            model: m.to_document(),
                            world: None,
                            state: Some(m.state_ids(s)),
                        }),
                    });
                }
            }
            Ok(Verdict::valid(Method::FullModel))
        }
        EntailmentMode::Knowhow => {
            let kh = |f: &Formula| Formula::KnowHow(Box::new(f.clone()));
            let goal = Formula::implies(Formula::conj(gamma.iter().map(kh)), kh(alpha));
            delkh_valid_with(&goal, limits)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::semantics::supports;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn refutes(v: &Verdict, phi: &Formula) {
        let w = v.witness.as_ref().expect("witness");
        let m = Model::from_document(&w.model).unwrap();
        if let Some(world) = &w.world {
            let i = m.index_of(world).unwrap();
            assert!(!Evaluator::new(&m, EvalOptions::default()).eval(phi, i).unwrap());
        } else {
            let s = m.state_from_ids(w.state.as_ref().unwrap()).unwrap();
            assert!(!supports(&m, s, phi).unwrap());
        }
    }

    #[test]
    fn tautologies() {
        assert!(taut(&f("p | ~p")).unwrap().result);
        assert!(taut(&f("~~p -> p")).unwrap().result);
        let v = taut(&f("p -> q")).unwrap();
        assert!(!v.result);
        assert_eq!(v.witness.unwrap().model.valuation["w{p}"], ["p"]);
    }

    #[test]
    fn s5() {
        assert!(s5_valid(&f("K p -> p")).unwrap().result);
        let v = s5_valid(&f("p -> K p")).unwrap();
        assert!(!v.result);
        assert_eq!(v.witness.as_ref().unwrap().model.worlds.len(), 2);
        refutes(&v, &f("p -> K p"));
        assert!(s5_valid(&f("K(p | q) -> Khat p | K q")).unwrap().result);
        assert!(s5_valid(&f("K(p | q) -> Khat p | K q")).unwrap().result);
        let v = s5_valid(&f("K(p | q) -> K p | K q")).unwrap();
        assert!(!v.result);
        refutes(&v, &f("K(p | q) -> K p | K q"));
        assert!(s5_valid(&f("[] p")).is_err());
    }

    #[test]
    fn brute_force() {
        assert!(s5_valid_bruteforce(&f("K p -> p")).unwrap().result);
        let v = s5_valid_bruteforce(&f("Khat p")).unwrap();
        assert!(!v.result);
        refutes(&v, &f("Khat p"));
        let v = s5_valid_bruteforce(&f("K(p | q) -> K p | K q")).unwrap();
        assert!(!v.result);
        assert_eq!(v.witness.unwrap().model.worlds.len(), 2);
        assert!(s5_valid_bruteforce(&f("p | q | r")).is_err());
    }

    #[test]
    fn inqb() {
        assert!(inqb_member(&f("~~p -> p")).unwrap().result);
        let v = inqb_member(&f("p | ~p")).unwrap();
        assert!(!v.result);
        assert_eq!(v.method, Method::FullModel);
        refutes(&v, &f("p | ~p"));
        assert!(inqb_member(&f("(~p -> q | r) -> (~p -> q) | (~p -> r)")).unwrap().result);
        // Beyond four atoms only the translation route remains.
        let v = inqb_member(&f("a | b | c | d | e -> a | b | c | d | e")).unwrap();
        assert!(v.result);
        assert_eq!(v.method, Method::Reduction);
    }

    #[test]
    fn delkh() {
        assert!(delkh_valid(&f("Kh(p & q) -> K(p & q)")).unwrap().result);
        let phi = f("K(p | ~p) -> Kh(p | ~p)");
        let v = delkh_valid(&phi).unwrap();
        assert!(!v.result);
        refutes(&v, &phi);
        assert!(delkh_valid(&f("(p -> q) <-> <> Kh(p -> q)")).unwrap().result);
    }

    #[test]
    fn entailment() {
        for mode in [EntailmentMode::Support, EntailmentMode::Knowhow] {
            assert!(entails(&[f("p & q")], &f("p"), mode).unwrap().result);
            assert!(entails(&[f("~~p")], &f("p"), mode).unwrap().result);
            let v = entails(&[f("p | q")], &f("p"), mode).unwrap();
            assert!(!v.result);
        }
        let v = entails(&[f("p | q")], &f("p"), EntailmentMode::Support).unwrap();
        assert_eq!(v.witness.unwrap().state.unwrap(), ["w{q}"]);
    }
}
