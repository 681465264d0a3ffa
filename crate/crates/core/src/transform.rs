//! The reduction pipeline: `Kh` elimination, S5 normal forms, `[]`
//! elimination, and the RL translation of PL formulas.
//!
//! `eliminate_kh` terminates because every rewrite strictly shrinks the
//! argument of each `Kh` it produces. `eliminate_box` works innermost
//! first, so each `[]` it meets has a `[]`-free argument and disappears in
//! one step.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::resolution::Resolver;

pub const DEFAULT_CLAUSE_LIMIT: usize = 4096;

/// One rewrite, with the axioms that justify it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub axioms: Vec<&'static str>,
    pub redex: String,
    pub result: String,
}

// ---------------------------------------------------------------------------
// Kh elimination

pub fn eliminate_kh(phi: &Formula) -> Formula {
    eliminate_kh_traced(phi).0
}

pub fn eliminate_kh_traced(phi: &Formula) -> (Formula, Vec<TraceStep>) {
    let mut trace = Vec::new();
    let out = strip_kh(phi, &mut trace);
    (out, trace)
}

fn strip_kh(phi: &Formula, trace: &mut Vec<TraceStep>) -> Formula {
    match phi {
        Formula::Atom(_) | Formula::Bot => phi.clone(),
        Formula::And(a, b) => Formula::and(strip_kh(a, trace), strip_kh(b, trace)),
        Formula::Or(a, b) => Formula::or(strip_kh(a, trace), strip_kh(b, trace)),
        Formula::Implies(a, b) => Formula::implies(strip_kh(a, trace), strip_kh(b, trace)),
        Formula::Know(a) => Formula::know(strip_kh(a, trace)),
        Formula::Update(a) => Formula::update(strip_kh(a, trace)),
        Formula::KnowHow(alpha) => reduce_kh(alpha, trace),
    }
}

/// `Kh alpha` as a `Kh`-free formula.
fn reduce_kh(alpha: &Formula, trace: &mut Vec<TraceStep>) -> Formula {
    let (out, axioms) = match alpha {
        Formula::Bot => (Formula::Bot, vec!["Kh⊥"]),
        Formula::Atom(_) => (Formula::know(alpha.clone()), vec!["KhK", "KKhp"]),
        Formula::Or(a, b) => (
            Formula::or(reduce_kh(a, trace), reduce_kh(b, trace)),
            vec!["Kh∨"],
        ),
        Formula::And(a, b) => (
            Formula::and(reduce_kh(a, trace), reduce_kh(b, trace)),
            vec!["Kh∧"],
        ),
        Formula::Implies(a, b) => (
            Formula::know(Formula::update(Formula::implies(
                reduce_kh(a, trace),
                reduce_kh(b, trace),
            ))),
            vec!["Kh→"],
        ),
        // Well-formedness keeps modal operators out of Kh.
        _ => return Formula::KnowHow(Box::new(alpha.clone())),
    };
    trace.push(TraceStep {
        axioms,
        redex: Formula::KnowHow(Box::new(alpha.clone())).to_string(),
        result: out.to_string(),
    });
    out
}

// ---------------------------------------------------------------------------
// S5 normal form

/// `base | Khat hat | K knows[0] | ...`; every component is PL.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub base: Formula,
    pub hat: Option<Formula>,
    pub knows: Vec<Formula>,
}

/// Conjunction of clauses; the empty conjunction is `top`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub clauses: Vec<Clause>,
}

impl Clause {
    pub fn to_formula(&self) -> Formula {
        let mut parts = Vec::new();
        if self.base != Formula::Bot {
            parts.push(self.base.clone());
        }
        if let Some(h) = &self.hat {
            parts.push(Formula::khat(h.clone()));
        }
        parts.extend(self.knows.iter().cloned().map(Formula::know));
        Formula::disj(parts)
    }

    pub fn is_propositional(&self) -> bool {
        self.hat.is_none() && self.knows.is_empty()
    }
}

impl NormalForm {
    pub fn to_formula(&self) -> Formula {
        Formula::conj(self.clauses.iter().map(Clause::to_formula))
    }
}

/// Truth tables over the atoms of the formula being normalized, so that PL
/// parts are compared up to classical equivalence. Above `TABLE_ATOMS`
/// atoms only syntactic identity is used.
const TABLE_ATOMS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Key {
    Table(Rc<[u64]>),
    Syntax(Formula),
}

struct Tables {
    atoms: Vec<String>,
    rows: usize,
    cache: RefCell<HashMap<Formula, Rc<[u64]>>>,
}

impl Tables {
    fn new(phi: &Formula) -> Tables {
        let atoms: Vec<String> = phi.atoms().into_iter().collect();
        let rows = if atoms.len() <= TABLE_ATOMS { 1 << atoms.len() } else { 0 };
        Tables {
            atoms,
            rows,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn table(&self, f: &Formula) -> Option<Rc<[u64]>> {
        if self.rows == 0 {
            return None;
        }
        if let Some(t) = self.cache.borrow().get(f) {
            return Some(t.clone());
        }
        let mut bits = vec![0u64; self.rows.div_ceil(64)];
        for row in 0..self.rows {
            let holds = |p: &str| {
                let i = self.atoms.iter().position(|a| a == p).expect("atom of the input");
                row >> i & 1 == 1
            };
            if f.eval_classical(&holds) {
                bits[row / 64] |= 1 << (row % 64);
            }
        }
        let t: Rc<[u64]> = bits.into();
        self.cache.borrow_mut().insert(f.clone(), t.clone());
        Some(t)
    }

    fn key(&self, f: &Formula) -> Key {
        self.table(f).map_or_else(|| Key::Syntax(f.clone()), Key::Table)
    }

    fn count(&self, f: &Formula) -> Option<usize> {
        self.table(f)
            .map(|t| t.iter().map(|w| w.count_ones() as usize).sum())
    }

    fn unsat(&self, f: &Formula) -> bool {
        *f == Formula::Bot || self.count(f) == Some(0)
    }

    fn valid(&self, f: &Formula) -> bool {
        *f == Formula::top() || self.count(f) == Some(self.rows)
    }

    /// Whether `a` classically entails `b`.
    fn entails(&self, a: &Formula, b: &Formula) -> bool {
        if a == b || self.unsat(a) {
            return true;
        }
        match (self.table(a), self.table(b)) {
            (Some(x), Some(y)) => x.iter().zip(y.iter()).all(|(x, y)| x & !y == 0),
            _ => false,
        }
    }
}

/// Working clause: a PL part (`bot` when absent), one merged `Khat` part,
/// and the `K` parts.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Raw {
    pl: Formula,
    hat: Option<Formula>,
    knows: Vec<Formula>,
}

impl Default for Raw {
    fn default() -> Self {
        Raw {
            pl: Formula::Bot,
            hat: None,
            knows: Vec::new(),
        }
    }
}

fn or_pl(a: &Formula, b: &Formula) -> Formula {
    match (a, b) {
        (Formula::Bot, x) | (x, Formula::Bot) => x.clone(),
        _ if a == b => a.clone(),
        _ => Formula::or(a.clone(), b.clone()),
    }
}

fn and_pl(a: &Formula, b: &Formula) -> Formula {
    match (a, b) {
        (Formula::Bot, _) | (_, Formula::Bot) => Formula::Bot,
        _ if a == b => a.clone(),
        _ => Formula::and(a.clone(), b.clone()),
    }
}

/// Clauses keyed by their modal part, so clauses that differ only in the
/// PL part merge: `(b1 | M) & (b2 | M)` is `(b1 & b2) | M`.
type ClauseKey = (Option<Key>, Vec<Key>);

#[derive(Default)]
struct Cnf {
    clauses: BTreeMap<ClauseKey, Raw>,
}

impl Cnf {
    fn len(&self) -> usize {
        self.clauses.len()
    }
}

/// Negation that strips an outer `-> bot` instead of stacking another.
fn negate_pl(f: &Formula) -> Formula {
    match f.as_negation() {
        Some(inner) => inner.clone(),
        None => Formula::not(f.clone()),
    }
}

/// Subsumption is quadratic; skip it on large clause sets.
const SUBSUMPTION_MAX: usize = 512;

struct Normalizer {
    limit: usize,
    t: Tables,
}

impl Normalizer {
    fn too_big(&self) -> Error {
        Error::Resource(format!("normal form exceeds {} clauses", self.limit))
    }

    /// Canonical form of a clause; `None` when the clause is valid.
    fn normalize(&self, mut c: Raw) -> Option<Raw> {
        let t = &self.t;
        if let Some(h) = &c.hat {
            if t.valid(h) {
                return None;
            }
            if t.unsat(h) {
                c.hat = None;
            }
        }
        c.knows.retain(|k| !t.unsat(k));
        if c.knows.iter().any(|k| t.valid(k)) {
            return None;
        }
        let h = c.hat.clone().unwrap_or(Formula::Bot);
        // Valid exactly when the clause criterion says so.
        if t.valid(&or_pl(&c.pl, &h)) || c.knows.iter().any(|k| t.valid(&or_pl(&h, k))) {
            return None;
        }
        if c.hat.is_some() {
            // `K k` and a true `k` both already give `Khat h` when `k` entails `h`.
            c.knows.retain(|k| !t.entails(k, &h));
            if t.entails(&c.pl, &h) {
                c.pl = Formula::Bot;
            }
        }
        if t.unsat(&c.pl) {
            c.pl = Formula::Bot;
        }
        let mut keyed: Vec<(Key, Formula)> = c.knows.drain(..).map(|k| (t.key(&k), k)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        // `K k1 | K k2` is `K k2` when `k1` entails `k2`.
        let weaker: Vec<bool> = (0..keyed.len())
            .map(|i| (0..keyed.len()).any(|j| i != j && t.entails(&keyed[i].1, &keyed[j].1)))
            .collect();
        c.knows = keyed
            .into_iter()
            .zip(weaker)
            .filter(|(_, w)| !w)
            .map(|((_, k), _)| k)
            .collect();
        Some(c)
    }

    fn clause_key(&self, c: &Raw) -> ClauseKey {
        (
            c.hat.as_ref().map(|h| self.t.key(h)),
            c.knows.iter().map(|k| self.t.key(k)).collect(),
        )
    }

    fn insert(&self, cnf: &mut Cnf, c: Raw) -> Result<()> {
        let Some(c) = self.normalize(c) else {
            return Ok(());
        };
        let key = self.clause_key(&c);
        match cnf.clauses.remove(&key) {
            Some(old) => {
                let merged = Raw {
                    pl: and_pl(&old.pl, &c.pl),
                    ..old
                };
                if let Some(m) = self.normalize(merged) {
                    cnf.clauses.insert(key, m);
                }
            }
            None => {
                cnf.clauses.insert(key, c);
            }
        }
        if cnf.len() > self.limit {
            return Err(self.too_big());
        }
        Ok(())
    }

    fn subsumes(&self, a: &Raw, b: &Raw) -> bool {
        let t = &self.t;
        let hat_ok = match (&a.hat, &b.hat) {
            (None, _) => true,
            (Some(x), Some(y)) => t.entails(x, y),
            (Some(_), None) => false,
        };
        hat_ok
            && t.entails(&a.pl, &b.pl)
            && a.knows
                .iter()
                .all(|k| b.knows.iter().any(|k2| t.entails(k, k2)))
    }

    fn prune(&self, mut cnf: Cnf) -> Cnf {
        if cnf.len() < 2 || cnf.len() > SUBSUMPTION_MAX {
            return cnf;
        }
        let entries: Vec<(ClauseKey, Raw)> = std::mem::take(&mut cnf.clauses).into_iter().collect();
        for (i, (key, b)) in entries.iter().enumerate() {
            let dominated = entries.iter().enumerate().any(|(j, (_, a))| {
                // Of two clauses that subsume each other, keep the first.
                j != i && self.subsumes(a, b) && (j < i || !self.subsumes(b, a))
            });
            if !dominated {
                cnf.clauses.insert(key.clone(), b.clone());
            }
        }
        cnf
    }

    fn unit(&self, c: Raw) -> Result<Cnf> {
        let mut out = Cnf::default();
        self.insert(&mut out, c)?;
        Ok(out)
    }

    fn or(&self, a: Cnf, b: Cnf) -> Result<Cnf> {
        if a.len().saturating_mul(b.len()) > self.limit.saturating_mul(16) {
            return Err(self.too_big());
        }
        let mut out = Cnf::default();
        for x in a.clauses.values() {
            for y in b.clauses.values() {
                let hat = match (&x.hat, &y.hat) {
                    (Some(p), Some(q)) => Some(or_pl(p, q)),
                    (p, q) => p.clone().or_else(|| q.clone()),
                };
                let merged = Raw {
                    pl: or_pl(&x.pl, &y.pl),
                    hat,
                    knows: x.knows.iter().chain(&y.knows).cloned().collect(),
                };
                self.insert(&mut out, merged)?;
            }
        }
        Ok(self.prune(out))
    }

    fn and(&self, mut a: Cnf, b: Cnf) -> Result<Cnf> {
        for c in b.clauses.into_values() {
            self.insert(&mut a, c)?;
        }
        Ok(self.prune(a))
    }

    /// CNF of `phi` when `positive`, of `~phi` otherwise.
    fn nf(&self, phi: &Formula, positive: bool) -> Result<Cnf> {
        if phi.is_pl() {
            let lit = if positive { phi.clone() } else { negate_pl(phi) };
            return self.unit(Raw {
                pl: lit,
                ..Raw::default()
            });
        }
        match phi {
            Formula::And(a, b) if positive => self.and(self.nf(a, true)?, self.nf(b, true)?),
            Formula::And(a, b) => self.or(self.nf(a, false)?, self.nf(b, false)?),
            Formula::Or(a, b) if positive => self.or(self.nf(a, true)?, self.nf(b, true)?),
            Formula::Or(a, b) => self.and(self.nf(a, false)?, self.nf(b, false)?),
            Formula::Implies(a, b) if positive => {
                self.or(self.nf(a, false)?, self.nf(b, true)?)
            }
            Formula::Implies(a, b) => self.and(self.nf(a, true)?, self.nf(b, false)?),
            Formula::Know(psi) => {
                let known = self.know(psi)?;
                if positive {
                    Ok(known)
                } else {
                    self.not_know(known)
                }
            }
            Formula::KnowHow(_) => Err(Error::Fragment("Kh")),
            Formula::Update(_) => Err(Error::Fragment("[]")),
            Formula::Atom(_) | Formula::Bot => unreachable!("propositional"),
        }
    }

    /// Clauses of `K psi`. The modal parts of a clause are the same at every
    /// world, so `K` only moves onto the propositional part.
    fn know(&self, psi: &Formula) -> Result<Cnf> {
        let mut out = Cnf::default();
        for c in self.nf(psi, true)?.clauses.into_values() {
            let mut knows = c.knows;
            if c.pl != Formula::Bot {
                knows.push(c.pl);
            }
            self.insert(
                &mut out,
                Raw {
                    pl: Formula::Bot,
                    hat: c.hat,
                    knows,
                },
            )?;
        }
        Ok(self.prune(out))
    }

    /// Negation of a conjunction of modal-only clauses.
    fn not_know(&self, clauses: Cnf) -> Result<Cnf> {
        // ~(C1 & ... & Cm) = ~C1 | ... | ~Cm, and each ~Ci is a conjunction of units.
        let mut acc = self.unit(Raw::default())?;
        for c in clauses.clauses.into_values() {
            debug_assert_eq!(c.pl, Formula::Bot);
            let mut units = Cnf::default();
            if let Some(h) = &c.hat {
                self.insert(
                    &mut units,
                    Raw {
                        knows: vec![negate_pl(h)],
                        ..Raw::default()
                    },
                )?;
            }
            for k in &c.knows {
                self.insert(
                    &mut units,
                    Raw {
                        hat: Some(negate_pl(k)),
                        ..Raw::default()
                    },
                )?;
            }
            acc = self.or(acc, units)?;
        }
        Ok(acc)
    }
}

fn finish(cnf: Cnf) -> NormalForm {
    NormalForm {
        clauses: cnf
            .clauses
            .into_values()
            .map(|c| Clause {
                base: c.pl,
                hat: c.hat,
                knows: c.knows,
            })
            .collect(),
    }
}

pub fn s5_normal_form(phi: &Formula) -> Result<NormalForm> {
    s5_normal_form_with_limit(phi, DEFAULT_CLAUSE_LIMIT)
}

/// Normal form of a formula without `Kh` and `[]`.
pub fn s5_normal_form_with_limit(phi: &Formula, limit: usize) -> Result<NormalForm> {
    let n = Normalizer {
        limit,
        t: Tables::new(phi),
    };
    Ok(finish(n.nf(phi, true)?))
}

// ---------------------------------------------------------------------------
// [] elimination

pub fn eliminate_box(phi: &Formula) -> Result<Formula> {
    Ok(eliminate_box_traced(phi, DEFAULT_CLAUSE_LIMIT)?.0)
}

pub fn eliminate_box_traced(phi: &Formula, limit: usize) -> Result<(Formula, Vec<TraceStep>)> {
    if phi.has_knowhow() {
        return Err(Error::Fragment("Kh"));
    }
    let mut trace = Vec::new();
    let out = strip_box(phi, limit, &mut trace)?;
    Ok((out, trace))
}

fn strip_box(phi: &Formula, limit: usize, trace: &mut Vec<TraceStep>) -> Result<Formula> {
    Ok(match phi {
        Formula::Atom(_) | Formula::Bot => phi.clone(),
        Formula::And(a, b) => Formula::and(strip_box(a, limit, trace)?, strip_box(b, limit, trace)?),
        Formula::Or(a, b) => Formula::or(strip_box(a, limit, trace)?, strip_box(b, limit, trace)?),
        Formula::Implies(a, b) => {
            Formula::implies(strip_box(a, limit, trace)?, strip_box(b, limit, trace)?)
        }
        Formula::Know(a) => Formula::know(strip_box(a, limit, trace)?),
        Formula::KnowHow(_) => return Err(Error::Fragment("Kh")),
        Formula::Update(psi) => {
            let inner = strip_box(psi, limit, trace)?;
            let nf = s5_normal_form_with_limit(&inner, limit)?;
            let parts: Vec<Formula> = nf
                .clauses
                .iter()
                .map(|c| {
                    let (out, axioms) = box_clause(c);
                    trace.push(TraceStep {
                        axioms,
                        redex: Formula::update(c.to_formula()).to_string(),
                        result: out.to_string(),
                    });
                    out
                })
                .collect();
            Formula::conj(parts)
        }
    })
}

/// `[]` applied to one normal-form clause.
fn box_clause(c: &Clause) -> (Formula, Vec<&'static str>) {
    let mut axioms = Vec::new();
    let has_base = c.base != Formula::Bot;
    let mut parts = Vec::new();
    if has_base {
        parts.push(c.base.clone());
    }
    match &c.hat {
        Some(h) => {
            if has_base {
                axioms.push("B∨");
            }
            axioms.push(if c.knows.is_empty() { "hKINV" } else { "BK∨" });
            parts.push(h.clone());
            parts.extend(
                c.knows
                    .iter()
                    .map(|k| Formula::know(Formula::or(h.clone(), k.clone()))),
            );
        }
        None if c.knows.is_empty() => axioms.push("INV"),
        None => {
            if has_base {
                axioms.push("B∨");
            }
            axioms.push("KINV");
            parts.extend(c.knows.iter().cloned().map(Formula::know));
        }
    }
    (Formula::disj(parts), axioms)
}

/// `Kh` and `[]` removed, in that order.
pub fn reduce_to_el(phi: &Formula) -> Result<Formula> {
    eliminate_box(&eliminate_kh(phi))
}

// ---------------------------------------------------------------------------
// RL

/// Formula-level resolutions in canonical order.
pub fn rl(alpha: &Formula, cap: u64) -> Result<Vec<Formula>> {
    // |RL(a)| follows the same recurrence as |S(a)|, so the same cap applies.
    Resolver::new(alpha, cap)?;
    Ok(rl_unchecked(alpha))
}

fn rl_unchecked(alpha: &Formula) -> Vec<Formula> {
    match alpha {
        Formula::Atom(_) | Formula::Bot => vec![alpha.clone()],
        Formula::Or(a, b) => {
            let mut v = rl_unchecked(a);
            v.extend(rl_unchecked(b));
            v
        }
        Formula::And(a, b) => {
            let rb = rl_unchecked(b);
            rl_unchecked(a)
                .into_iter()
                .flat_map(|x| rb.iter().map(move |y| Formula::and(x.clone(), y.clone())))
                .collect()
        }
        Formula::Implies(a, b) => {
            let ra = rl_unchecked(a);
            let rb = rl_unchecked(b);
            let mut out = Vec::new();
            // Odometer over functions ra -> rb; the first antecedent varies slowest.
            let mut digits = vec![0usize; ra.len()];
            loop {
                out.push(Formula::conj(
                    ra.iter()
                        .zip(&digits)
                        .map(|(x, &d)| Formula::implies(x.clone(), rb[d].clone())),
                ));
                let mut k = digits.len();
                loop {
                    if k == 0 {
                        return out;
                    }
                    k -= 1;
                    digits[k] += 1;
                    if digits[k] < rb.len() {
                        break;
                    }
                    digits[k] = 0;
                }
            }
        }
        _ => unreachable!("checked propositional"),
    }
}

/// `K rho1 | K rho2 | ...` over `rl(alpha)`, bracketed as a balanced tree:
/// translations run to thousands of disjuncts and a left fold that deep
/// overflows every recursive pass downstream.
pub fn rl_translation(alpha: &Formula, cap: u64) -> Result<Formula> {
    let ks: Vec<Formula> = rl(alpha, cap)?.into_iter().map(Formula::know).collect();
    Ok(balanced_disj(&ks))
}

fn balanced_disj(items: &[Formula]) -> Formula {
    match items {
        [] => Formula::bot(),
        [one] => one.clone(),
        _ => {
            let (l, r) = items.split_at(items.len() / 2);
            Formula::or(balanced_disj(l), balanced_disj(r))
        }
    }
}
