//! Axiom schemas: formula skeletons with sorted metavariables at the leaves.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sort {
    /// A single proposition letter.
    Atom,
    /// Any formula without `K`, `Kh` or `[]`.
    Pl,
    /// Any formula.
    Full,
}

impl Sort {
    pub fn admits(self, f: &Formula) -> bool {
        match self {
            Sort::Atom => matches!(f, Formula::Atom(_)),
            Sort::Pl => f.is_pl(),
            Sort::Full => true,
        }
    }
}

/// Sort implied by a metavariable name: `p`, `q` range over atoms;
/// `alpha`, `beta`, `gamma` (optionally numbered) over PL; `phi`, `psi`,
/// `chi` over all formulas.
pub fn sort_of_name(name: &str) -> Option<Sort> {
    let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
    match stem {
        "p" | "q" if stem.len() == name.len() => Some(Sort::Atom),
        "alpha" | "beta" | "gamma" => Some(Sort::Pl),
        "phi" | "psi" | "chi" if stem.len() == name.len() => Some(Sort::Full),
        _ => None,
    }
}

pub type Binding = BTreeMap<String, Formula>;

/// A skeleton whose atoms listed in `sorts` are metavariables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaPattern {
    pub skeleton: Formula,
    pub sorts: BTreeMap<String, Sort>,
}

impl SchemaPattern {
    pub fn new(skeleton: Formula, sorts: BTreeMap<String, Sort>) -> Self {
        SchemaPattern { skeleton, sorts }
    }

    /// Parses a skeleton and reads metavariables off the atom names.
    pub fn parse(text: &str) -> Result<Self> {
        let skeleton = parse_formula(text)?;
        let sorts = skeleton
            .atoms()
            .into_iter()
            .filter_map(|a| sort_of_name(&a).map(|s| (a, s)))
            .collect();
        Ok(SchemaPattern { skeleton, sorts })
    }

    /// Same skeleton with every metavariable widened to `Full`.
    pub fn relaxed(&self) -> SchemaPattern {
        SchemaPattern {
            skeleton: self.skeleton.clone(),
            sorts: self.sorts.keys().map(|k| (k.clone(), Sort::Full)).collect(),
        }
    }
}

/// Structural match; `None` if the shapes differ, a metavariable would bind
/// two different formulas, or a sort constraint fails.
pub fn match_schema(pattern: &SchemaPattern, candidate: &Formula) -> Option<Binding> {
    let mut b = Binding::new();
    go(pattern, &pattern.skeleton, candidate, &mut b).then_some(b)
}

fn go(p: &SchemaPattern, node: &Formula, c: &Formula, b: &mut Binding) -> bool {
    use Formula::*;
    if let Atom(name) = node {
        if let Some(sort) = p.sorts.get(name) {
            if !sort.admits(c) {
                return false;
            }
            return match b.get(name) {
                Some(prev) => prev == c,
                None => {
                    b.insert(name.clone(), c.clone());
                    true
                }
            };
        }
    }
    match (node, c) {
        (Atom(x), Atom(y)) => x == y,
        (Bot, Bot) => true,
        (And(a, b1), And(c1, d)) | (Or(a, b1), Or(c1, d)) | (Implies(a, b1), Implies(c1, d)) => {
            go(p, a, c1, b) && go(p, b1, d, b)
        }
        (Know(a), Know(x)) | (KnowHow(a), KnowHow(x)) | (Update(a), Update(x)) => go(p, a, x, b),
        _ => false,
    }
}

/// Replaces every metavariable by its binding, checking sorts.
pub fn substitute(pattern: &SchemaPattern, binding: &Binding) -> Result<Formula> {
    for (name, sort) in &pattern.sorts {
        let f = binding
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("missing binding for `{name}`")))?;
        if !sort.admits(f) {
            return Err(Error::Invalid(format!(
                "sort violation: `{name}` cannot be `{f}`"
            )));
        }
    }
    Ok(subst(&pattern.skeleton, &pattern.sorts, binding))
}

fn subst(f: &Formula, sorts: &BTreeMap<String, Sort>, b: &Binding) -> Formula {
    use Formula::*;
    match f {
        Atom(n) if sorts.contains_key(n) => b[n].clone(),
        Atom(_) | Bot => f.clone(),
        And(l, r) => Formula::and(subst(l, sorts, b), subst(r, sorts, b)),
        Or(l, r) => Formula::or(subst(l, sorts, b), subst(r, sorts, b)),
        Implies(l, r) => Formula::implies(subst(l, sorts, b), subst(r, sorts, b)),
        Know(a) => Formula::know(subst(a, sorts, b)),
        KnowHow(a) => KnowHow(Box::new(subst(a, sorts, b))),
        Update(a) => Formula::update(subst(a, sorts, b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn names_and_sorts() {
        assert_eq!(sort_of_name("alpha3"), Some(Sort::Pl));
        assert_eq!(sort_of_name("p"), Some(Sort::Atom));
        assert_eq!(sort_of_name("p1"), None);
        assert_eq!(sort_of_name("phi"), Some(Sort::Full));
        assert_eq!(sort_of_name("r"), None);
    }

    #[test]
    fn khk_instance() {
        let pat = SchemaPattern::parse("Kh alpha -> K alpha").unwrap();
        let b = match_schema(&pat, &f("Kh(p & q) -> K(p & q)")).unwrap();
        assert_eq!(b["alpha"], f("p & q"));
        assert!(match_schema(&pat, &f("Kh p -> K q")).is_none());
    }

    #[test]
    fn kkhp_needs_an_atom() {
        let pat = SchemaPattern::parse("K p -> Kh p").unwrap();
        let c = f("K(p | q) -> Kh(p | q)");
        assert!(match_schema(&pat, &c).is_none());
        assert!(match_schema(&pat.relaxed(), &c).is_some());
        assert!(match_schema(&pat, &f("K r -> Kh r")).is_some());
    }

    #[test]
    fn closed_schema_gives_empty_binding() {
        let pat = SchemaPattern::parse("Kh bot <-> bot").unwrap();
        assert_eq!(match_schema(&pat, &f("Kh bot <-> bot")), Some(Binding::new()));
    }

    #[test]
    fn pl_metavariable_rejects_modal() {
        let pat = SchemaPattern::parse("alpha -> [] alpha").unwrap();
        assert!(match_schema(&pat, &f("K p -> [] K p")).is_none());
        let full = SchemaPattern::parse("K phi -> phi").unwrap();
        assert!(match_schema(&full, &f("K [] p -> [] p")).is_some());
    }

    #[test]
    fn substitute_checks() {
        let pat = SchemaPattern::parse("alpha -> [] alpha").unwrap();
        let mut b = Binding::new();
        assert!(substitute(&pat, &b).is_err());
        b.insert("alpha".into(), f("K p"));
        assert!(substitute(&pat, &b).is_err());
        b.insert("alpha".into(), f("p & q"));
        assert_eq!(substitute(&pat, &b).unwrap(), f("p & q -> [](p & q)"));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::atom("p")),
            Just(Formula::atom("q")),
            Just(Formula::Bot)
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                inner.clone().prop_map(Formula::know),
                inner.prop_map(Formula::update),
            ]
        })
    }

    proptest! {
        #[test]
        fn match_then_substitute_is_identity(c in arb_formula()) {
            for text in ["phi -> psi", "K phi -> phi", "alpha -> [] alpha", "phi & phi", "p"] {
                let pat = SchemaPattern::parse(text).unwrap();
                if let Some(b) = match_schema(&pat, &c) {
                    prop_assert_eq!(substitute(&pat, &b).unwrap(), c.clone());
                }
            }
        }

        #[test]
        fn no_match_means_no_binding(c in arb_formula()) {
            // Metavariables sit at leaves, so any binding draws from subformulas of c.
            let pat = SchemaPattern::parse("phi -> (psi -> phi)").unwrap();
            let found = match_schema(&pat, &c).is_some();
            let mut subs = Vec::new();
            c.visit(&mut |s| subs.push(s.clone()));
            let mut exists = false;
            for a in &subs {
                for b2 in &subs {
                    let mut b = Binding::new();
                    b.insert("phi".into(), a.clone());
                    b.insert("psi".into(), b2.clone());
                    if substitute(&pat, &b).unwrap() == c {
                        exists = true;
                    }
                }
            }
            prop_assert_eq!(found, exists);
        }
    }
}
