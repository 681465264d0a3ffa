//! Checker for Hilbert-style derivations.
//!
//! A script has one step per line:
//!
//! ```text
//! <n>. <formula> ; <justification>
//! ```
//!
//! with justifications `ax NAME {x:=f, ...}` (the binding may be omitted),
//! `mp i j`, `neck i`, `necbox i`, `rre i at PATH using j`, `rkhimp i` and
//! `taut i j ...`. Blank lines and `#` comments are ignored.
//!
//! `rre i at PATH using j` replaces, inside the theorem on line `i`, the
//! node at `PATH` by the other side of the biconditional on line `j`;
//! `PATH` is a dot-separated list of child indices (`root` for the whole
//! formula) and must not pass through a `Kh`. `taut i j ...` accepts any
//! formula `c` such that `l_i -> (l_j -> ... -> c)` is a tautology once
//! modal subformulas are read as letters.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::decide::{taut_with, Limits};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula};
use crate::schema::{match_schema, substitute, Binding, SchemaPattern, Sort};

// ---------------------------------------------------------------------------
// Axioms

const AXIOMS: &[(&str, &[&str], &str)] = &[
    ("DIST_K", &[], "K(phi -> psi) -> (K phi -> K psi)"),
    ("T_K", &[], "K phi -> phi"),
    ("4_K", &[], "K phi -> K K phi"),
    ("5_K", &[], "~K phi -> K ~K phi"),
    ("DIST_□", &["DIST_box"], "[](phi -> psi) -> ([] phi -> [] psi)"),
    ("T_□", &["T_box"], "[] phi -> phi"),
    ("4_□", &["4_box"], "[] phi -> [] [] phi"),
    ("PR", &[], "K [] phi -> [] K phi"),
    ("Per", &[], "alpha -> [] alpha"),
    ("Ver", &[], "alpha -> <> Kh alpha"),
    ("KhK", &[], "Kh alpha -> K alpha"),
    ("KKhp", &[], "K p -> Kh p"),
    ("Kh⊥", &["Khbot"], "Kh bot <-> bot"),
    ("Kh∨", &["Khor"], "Kh(alpha | beta) <-> Kh alpha | Kh beta"),
    ("Kh∧", &["Khand"], "Kh(alpha & beta) <-> Kh alpha & Kh beta"),
    ("Kh→", &["Khimp"], "Kh(alpha -> beta) <-> K [](Kh alpha -> Kh beta)"),
    ("4_Kh", &[], "Kh alpha -> K Kh alpha"),
    ("5_Kh", &[], "~Kh alpha -> K ~Kh alpha"),
];

/// Canonical axiom names, `TAUT` and the `EU_k` family included.
pub fn axiom_names() -> Vec<&'static str> {
    let mut v = vec!["TAUT"];
    v.extend(AXIOMS.iter().map(|a| a.0));
    v.push("EU_k");
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum AxiomRef {
    Taut,
    Schema(&'static str, &'static str),
    /// `EU_k` with a fixed `k`, or with `k` still open.
    Eu(Option<usize>),
}

fn resolve_axiom(name: &str) -> Option<AxiomRef> {
    if name == "TAUT" {
        return Some(AxiomRef::Taut);
    }
    if let Some(k) = name.strip_prefix("EU_") {
        if k == "k" {
            return Some(AxiomRef::Eu(None));
        }
        return k.parse().ok().map(|k| AxiomRef::Eu(Some(k)));
    }
    AXIOMS
        .iter()
        .find(|(canon, aliases, _)| *canon == name || aliases.contains(&name))
        .map(|&(canon, _, text)| AxiomRef::Schema(canon, text))
}

pub fn axiom_schema(name: &str) -> Option<SchemaPattern> {
    match resolve_axiom(name)? {
        AxiomRef::Schema(_, text) => Some(SchemaPattern::parse(text).expect("axiom table parses")),
        AxiomRef::Eu(Some(k)) => Some(eu_schema(k)),
        _ => None,
    }
}

/// `alpha & Khat(alpha & alpha1) & ... -> <>(K alpha & Khat alpha1 & ...)`,
/// conjunctions folded to the left; `k = 0` leaves `alpha -> <> K alpha`.
fn eu_schema(k: usize) -> SchemaPattern {
    let a = || Formula::atom("alpha");
    let ai = |i: usize| Formula::atom(format!("alpha{i}"));
    let lhs = Formula::conj(
        std::iter::once(a()).chain((1..=k).map(|i| Formula::khat(Formula::and(a(), ai(i))))),
    );
    let rhs = Formula::conj(
        std::iter::once(Formula::know(a())).chain((1..=k).map(|i| Formula::khat(ai(i)))),
    );
    let mut sorts = BTreeMap::from([("alpha".to_string(), Sort::Pl)]);
    for i in 1..=k {
        sorts.insert(format!("alpha{i}"), Sort::Pl);
    }
    SchemaPattern::new(Formula::implies(lhs, Formula::diamond(rhs)), sorts)
}

/// The instance of a named schema under `binding`; `k` selects the member
/// of the `EU_k` family when the name does not fix it.
pub fn instantiate(name: &str, binding: &Binding, k: Option<usize>) -> Result<Formula> {
    let pattern = match resolve_axiom(name) {
        Some(AxiomRef::Schema(_, text)) => SchemaPattern::parse(text)?,
        Some(AxiomRef::Eu(fixed)) => {
            let k = fixed
                .or(k)
                .ok_or_else(|| Error::Invalid("EU_k needs k".into()))?;
            eu_schema(k)
        }
        Some(AxiomRef::Taut) => {
            return Err(Error::Invalid("TAUT is decided, not instantiated".into()))
        }
        None => return Err(Error::Invalid(format!("unknown axiom `{name}`"))),
    };
    if let Some(extra) = binding.keys().find(|v| !pattern.sorts.contains_key(*v)) {
        return Err(Error::Invalid(format!("`{extra}` is not a metavariable of {name}")));
    }
    substitute(&pattern, binding)
}

// ---------------------------------------------------------------------------
// Scripts

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom {
        name: String,
        binding: Option<Binding>,
    },
    Mp(usize, usize),
    NecK(usize),
    NecBox(usize),
    Rre {
        line: usize,
        path: Vec<usize>,
        using: usize,
    },
    RKhImp(usize),
    Taut(Vec<usize>),
}

impl Justification {
    fn references(&self) -> Vec<usize> {
        match self {
            Justification::Axiom { .. } => vec![],
            Justification::Mp(i, j) => vec![*i, *j],
            Justification::NecK(i) | Justification::NecBox(i) | Justification::RKhImp(i) => {
                vec![*i]
            }
            Justification::Rre { line, using, .. } => vec![*line, *using],
            Justification::Taut(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub label: usize,
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

fn script_error(line_no: usize, msg: impl Into<String>) -> Error {
    Error::Invalid(format!("proof line {line_no}: {}", msg.into()))
}

pub fn parse_proof(text: &str) -> Result<Proof> {
    let mut lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (label, rest) = body
            .split_once('.')
            .ok_or_else(|| script_error(line_no, "expected `<n>.`"))?;
        let label: usize = label
            .trim()
            .parse()
            .map_err(|_| script_error(line_no, "bad step number"))?;
        let (formula, just) = rest
            .split_once(';')
            .ok_or_else(|| script_error(line_no, "expected `; <justification>`"))?;
        let formula = parse_formula(formula.trim())
            .map_err(|e| script_error(line_no, format!("formula: {e}")))?;
        let justification =
            parse_justification(just.trim()).map_err(|m| script_error(line_no, m))?;
        lines.push(ProofLine {
            label,
            formula,
            justification,
        });
    }
    Ok(Proof { lines })
}

fn parse_justification(text: &str) -> std::result::Result<Justification, String> {
    let mut words = text.split_whitespace();
    let head = words.next().ok_or("empty justification")?;
    let num = |w: Option<&str>| -> std::result::Result<usize, String> {
        w.ok_or("missing step reference")?
            .parse()
            .map_err(|_| "step references are numbers".to_string())
    };
    let j = match head {
        "ax" => {
            let rest = text[2..].trim();
            let (name, binding) = match rest.split_once('{') {
                Some((name, b)) => {
                    let b = b.trim().strip_suffix('}').ok_or("unclosed binding")?;
                    (name.trim(), Some(parse_binding(b)?))
                }
                None => (rest, None),
            };
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err("expected one axiom name".into());
            }
            return Ok(Justification::Axiom {
                name: name.to_string(),
                binding,
            });
        }
        "mp" => Justification::Mp(num(words.next())?, num(words.next())?),
        "neck" => Justification::NecK(num(words.next())?),
        "necbox" => Justification::NecBox(num(words.next())?),
        "rkhimp" => Justification::RKhImp(num(words.next())?),
        "rre" => {
            let line = num(words.next())?;
            if words.next() != Some("at") {
                return Err("expected `at PATH`".into());
            }
            let path = parse_path(words.next().ok_or("missing path")?)?;
            if words.next() != Some("using") {
                return Err("expected `using j`".into());
            }
            Justification::Rre {
                line,
                path,
                using: num(words.next())?,
            }
        }
        "taut" => {
            let refs = words.by_ref().map(|w| num(Some(w))).collect::<std::result::Result<_, _>>()?;
            return Ok(Justification::Taut(refs));
        }
        other => return Err(format!("unknown justification `{other}`")),
    };
    if words.next().is_some() {
        return Err("trailing words in justification".into());
    }
    Ok(j)
}

fn parse_path(text: &str) -> std::result::Result<Vec<usize>, String> {
    if matches!(text, "root" | "." | "ε") {
        return Ok(vec![]);
    }
    text.split('.')
        .map(|s| s.parse().map_err(|_| format!("bad path `{text}`")))
        .collect()
}

fn parse_binding(text: &str) -> std::result::Result<Binding, String> {
    let mut b = Binding::new();
    for entry in text.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (var, f) = entry
            .split_once(":=")
            .ok_or_else(|| format!("binding entry `{entry}` lacks `:=`"))?;
        let f = parse_formula(f.trim()).map_err(|e| format!("binding for `{}`: {e}", var.trim()))?;
        b.insert(var.trim().to_string(), f);
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// Checking

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail", rename_all = "kebab-case")]
pub enum Rejection {
    /// Cites a step at or after itself.
    ForwardReference(usize),
    /// Cites a step number that does not exist, or repeats a label.
    MalformedReference(String),
    /// Cites a step that was itself rejected.
    ReliesOnRejected(usize),
    UnknownAxiom(String),
    NotAnInstance(String),
    SortViolation(String),
    EuArity(String),
    NotATautology,
    MpMismatch,
    NecMismatch,
    RreMismatch(String),
    KhScopeViolation,
    RkhShape,
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::ForwardReference(_) => "forward-reference",
            Rejection::MalformedReference(_) => "malformed-reference",
            Rejection::ReliesOnRejected(_) => "relies-on-rejected",
            Rejection::UnknownAxiom(_) => "unknown-axiom",
            Rejection::NotAnInstance(_) => "not-an-instance",
            Rejection::SortViolation(_) => "sort-violation",
            Rejection::EuArity(_) => "eu-arity",
            Rejection::NotATautology => "not-a-tautology",
            Rejection::MpMismatch => "mp-mismatch",
            Rejection::NecMismatch => "nec-mismatch",
            Rejection::RreMismatch(_) => "rre-mismatch",
            Rejection::KhScopeViolation => "kh-scope-violation",
            Rejection::RkhShape => "rkh-shape",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineReport {
    pub label: usize,
    pub formula: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<Rejection>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProofReport {
    pub accepted: bool,
    pub theorem: Option<String>,
    pub lines: Vec<LineReport>,
}

impl ProofReport {
    pub fn first_rejection(&self) -> Option<(usize, &Rejection)> {
        self.lines
            .iter()
            .find_map(|l| l.rejection.as_ref().map(|r| (l.label, r)))
    }
}

pub fn check_proof(pf: &Proof) -> ProofReport {
    let mut by_label: HashMap<usize, (usize, bool)> = HashMap::new();
    let mut reports = Vec::with_capacity(pf.lines.len());
    for (pos, line) in pf.lines.iter().enumerate() {
        let verdict = if by_label.contains_key(&line.label) {
            Err(Rejection::MalformedReference(format!(
                "step {} is numbered twice",
                line.label
            )))
        } else {
            resolve_refs(line, &by_label).and_then(|refs| {
                let cited: Vec<&Formula> = refs.iter().map(|&p| &pf.lines[p].formula).collect();
                check_line(line, &cited)
            })
        };
        by_label.entry(line.label).or_insert((pos, verdict.is_ok()));
        reports.push(LineReport {
            label: line.label,
            formula: line.formula.to_string(),
            ok: verdict.is_ok(),
            rejection: verdict.err(),
        });
    }
    ProofReport {
        accepted: !reports.is_empty() && reports.iter().all(|r| r.ok),
        theorem: pf.lines.last().map(|l| l.formula.to_string()),
        lines: reports,
    }
}

/// Positions of the cited lines, in citation order.
fn resolve_refs(
    line: &ProofLine,
    by_label: &HashMap<usize, (usize, bool)>,
) -> std::result::Result<Vec<usize>, Rejection> {
    line.justification
        .references()
        .into_iter()
        .map(|r| {
            if r >= line.label {
                return Err(Rejection::ForwardReference(r));
            }
            match by_label.get(&r) {
                None => Err(Rejection::MalformedReference(format!("no step {r}"))),
                Some(&(_, false)) => Err(Rejection::ReliesOnRejected(r)),
                Some(&(pos, true)) => Ok(pos),
            }
        })
        .collect()
}

fn check_line(line: &ProofLine, cited: &[&Formula]) -> std::result::Result<(), Rejection> {
    let current = &line.formula;
    match &line.justification {
        Justification::Axiom { name, binding } => check_axiom(name, binding.as_ref(), current),
        Justification::Mp(..) => {
            let expected = Formula::implies(cited[0].clone(), current.clone());
            (*cited[1] == expected).then_some(()).ok_or(Rejection::MpMismatch)
        }
        Justification::NecK(_) => (*current == Formula::know(cited[0].clone()))
            .then_some(())
            .ok_or(Rejection::NecMismatch),
        Justification::NecBox(_) => (*current == Formula::update(cited[0].clone()))
            .then_some(())
            .ok_or(Rejection::NecMismatch),
        Justification::Rre { path, .. } => check_rre(cited[0], path, cited[1], current),
        Justification::RKhImp(_) => {
            let ok = match (cited[0], current) {
                (Formula::Implies(l, r), Formula::KnowHow(goal)) => {
                    match (&**l, &**r, &**goal) {
                        (Formula::KnowHow(a), Formula::KnowHow(b), Formula::Implies(ga, gb)) => {
                            a == ga && b == gb
                        }
                        _ => false,
                    }
                }
                _ => false,
            };
            ok.then_some(()).ok_or(Rejection::RkhShape)
        }
        Justification::Taut(_) => {
            let chained = cited
                .iter()
                .rev()
                .fold(current.clone(), |acc, p| Formula::implies((*p).clone(), acc));
            is_tautology(&chained)
                .then_some(())
                .ok_or(Rejection::NotATautology)
        }
    }
}

fn check_axiom(
    name: &str,
    binding: Option<&Binding>,
    current: &Formula,
) -> std::result::Result<(), Rejection> {
    let axiom = resolve_axiom(name).ok_or_else(|| Rejection::UnknownAxiom(name.to_string()))?;
    let not_instance = || Rejection::NotAnInstance(name.to_string());
    let pattern = match axiom {
        AxiomRef::Taut => {
            return is_tautology(current)
                .then_some(())
                .ok_or(Rejection::NotATautology)
        }
        AxiomRef::Eu(None) => return Err(Rejection::EuArity("EU_k needs a concrete k".into())),
        AxiomRef::Eu(Some(k)) => {
            if let Some(b) = binding {
                let expected: Vec<String> = std::iter::once("alpha".to_string())
                    .chain((1..=k).map(|i| format!("alpha{i}")))
                    .collect();
                let given: Vec<String> = b.keys().cloned().collect();
                let mut sorted_expected = expected.clone();
                sorted_expected.sort();
                if given != sorted_expected {
                    return Err(Rejection::EuArity(format!(
                        "EU_{k} binds {}, got {}",
                        expected.join(", "),
                        given.join(", ")
                    )));
                }
            } else if match_schema(&eu_schema(k), current).is_none() {
                if let Some(other) = (0..=8).find(|&j| match_schema(&eu_schema(j), current).is_some()) {
                    return Err(Rejection::EuArity(format!("instance of EU_{other}, not EU_{k}")));
                }
            }
            eu_schema(k)
        }
        AxiomRef::Schema(_, text) => SchemaPattern::parse(text).expect("axiom table parses"),
    };
    match binding {
        Some(b) => {
            if let Some(extra) = b.keys().find(|v| !pattern.sorts.contains_key(*v)) {
                return Err(Rejection::NotAnInstance(format!(
                    "`{extra}` is not a metavariable of {name}"
                )));
            }
            if let Some((var, _)) = b.iter().find(|(v, f)| !pattern.sorts[*v].admits(f)) {
                return Err(Rejection::SortViolation(var.clone()));
            }
            let inst = substitute(&pattern, b).map_err(|_| not_instance())?;
            (inst == *current).then_some(()).ok_or_else(not_instance)
        }
        None => {
            if match_schema(&pattern, current).is_some() {
                return Ok(());
            }
            match match_schema(&pattern.relaxed(), current) {
                Some(b) => {
                    let var = b
                        .iter()
                        .find(|(v, f)| !pattern.sorts[*v].admits(f))
                        .map(|(v, _)| v.clone())
                        .expect("relaxed match differs only in sorts");
                    Err(Rejection::SortViolation(var))
                }
                None => Err(not_instance()),
            }
        }
    }
}

/// Classical tautology after reading each maximal modal subformula as a letter.
pub fn is_tautology(f: &Formula) -> bool {
    let mut table: Vec<Formula> = Vec::new();
    let abstracted = abstract_modal(f, &mut table);
    let limits = Limits {
        taut_atoms: 24,
        ..Limits::default()
    };
    taut_with(&abstracted, &limits).is_ok_and(|v| v.result)
}

fn abstract_modal(f: &Formula, table: &mut Vec<Formula>) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Bot => f.clone(),
        Formula::And(a, b) => Formula::and(abstract_modal(a, table), abstract_modal(b, table)),
        Formula::Or(a, b) => Formula::or(abstract_modal(a, table), abstract_modal(b, table)),
        Formula::Implies(a, b) => {
            Formula::implies(abstract_modal(a, table), abstract_modal(b, table))
        }
        Formula::Know(_) | Formula::KnowHow(_) | Formula::Update(_) => {
            let i = table.iter().position(|g| g == f).unwrap_or_else(|| {
                table.push(f.clone());
                table.len() - 1
            });
            // Not a legal atom name, so it cannot collide with a real letter.
            Formula::Atom(format!("#{i}"))
        }
    }
}

fn check_rre(
    theorem: &Formula,
    path: &[usize],
    equivalence: &Formula,
    current: &Formula,
) -> std::result::Result<(), Rejection> {
    let (a, b) = equivalence
        .as_iff()
        .ok_or_else(|| Rejection::RreMismatch("cited equivalence is not a biconditional".into()))?;
    let target = theorem
        .at_path(path)
        .ok_or_else(|| Rejection::RreMismatch("path leaves the formula".into()))?;
    for k in 0..path.len() {
        if matches!(theorem.at_path(&path[..k]), Some(Formula::KnowHow(_))) {
            return Err(Rejection::KhScopeViolation);
        }
    }
    let replacement = if target == a {
        b
    } else if target == b {
        a
    } else {
        return Err(Rejection::RreMismatch(
            "node at path matches neither side of the equivalence".into(),
        ));
    };
    let result = theorem.replace_at(path, replacement).expect("path exists");
    (result == *current)
        .then_some(())
        .ok_or_else(|| Rejection::RreMismatch("replacement does not yield this step".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn bind(pairs: &[(&str, &str)]) -> Binding {
        pairs.iter().map(|(k, v)| (k.to_string(), f(v))).collect()
    }

    fn check(text: &str) -> ProofReport {
        check_proof(&parse_proof(text).unwrap())
    }

    #[test]
    fn instances() {
        assert_eq!(
            instantiate("Kh→", &bind(&[("alpha", "p"), ("beta", "q")]), None).unwrap(),
            f("Kh(p -> q) <-> K [](Kh p -> Kh q)")
        );
        assert_eq!(
            instantiate("EU_k", &bind(&[("alpha", "p")]), Some(0)).unwrap(),
            f("p -> <> K p")
        );
        assert_eq!(
            instantiate("Per", &bind(&[("alpha", "p & q")]), None).unwrap(),
            f("p & q -> [](p & q)")
        );
        assert_eq!(
            instantiate("EU_2", &bind(&[("alpha", "a"), ("alpha1", "b"), ("alpha2", "c")]), None)
                .unwrap(),
            f("a & Khat(a & b) & Khat(a & c) -> <>(K a & Khat b & Khat c)")
        );
        assert!(instantiate("KKhp", &bind(&[("p", "p | q")]), None).is_err());
        assert!(instantiate("Per", &Binding::new(), None).is_err());
        assert!(instantiate("EU_1", &bind(&[("alpha", "p")]), None).is_err());
    }

    #[test]
    fn aliases_resolve() {
        for (alias, canon) in [("DIST_box", "DIST_□"), ("Khimp", "Kh→"), ("Khbot", "Kh⊥")] {
            assert_eq!(axiom_schema(alias), axiom_schema(canon));
        }
        assert!(axiom_schema("NOPE").is_none());
        assert_eq!(axiom_names().len(), 20);
    }

    #[test]
    fn small_derivation() {
        let r = check(
            "1. ~~p -> p ; ax TAUT\n\
             2. K(~~p -> p) ; neck 1\n\
             3. K(~~p -> p) -> (K ~~p -> K p) ; ax DIST_K\n\
             4. K ~~p -> K p ; mp 2 3\n",
        );
        assert!(r.accepted, "{r:?}");
    }

    #[test]
    fn named_rejections() {
        let reason = |text: &str| check(text).first_rejection().map(|(_, r)| r.code());
        assert_eq!(reason("1. K(p | q) -> Kh(p | q) ; ax KKhp"), Some("sort-violation"));
        assert_eq!(reason("1. K p -> p ; ax TAUT"), Some("not-a-tautology"));
        assert_eq!(reason("1. p ; neck 1"), Some("forward-reference"));
        assert_eq!(reason("2. p -> p ; ax TAUT\n3. K(p -> p) ; neck 1"), Some("malformed-reference"));
        assert_eq!(reason("1. p -> p ; ax NOPE"), Some("unknown-axiom"));
        assert_eq!(
            reason("1. ~p & Khat(~p & ~q) -> <>(K ~p & Khat ~q) ; ax EU_2 {alpha:=~p, alpha1:=~q}"),
            Some("eu-arity")
        );
        assert_eq!(
            reason("1. ~p & Khat(~p & ~q) -> <>(K ~p & Khat ~q) ; ax EU_2"),
            Some("eu-arity")
        );
        assert_eq!(
            reason("1. ~~p <-> p ; ax TAUT\n2. Kh ~~p -> Kh ~~p ; ax TAUT\n3. Kh ~~p -> Kh p ; rre 2 at 1.0 using 1"),
            Some("kh-scope-violation")
        );
        assert_eq!(
            reason("1. p -> p ; ax TAUT\n2. K(p -> p) -> (K p -> K p) ; ax DIST_K\n3. K p -> K p ; mp 2 1"),
            Some("mp-mismatch")
        );
        assert_eq!(reason("1. p -> p ; ax TAUT\n2. K(p -> q) ; neck 1"), Some("nec-mismatch"));
        assert_eq!(reason("1. Kh p -> K p ; ax KhK\n2. Kh(p -> p) ; rkhimp 1"), Some("rkh-shape"));
        assert_eq!(reason("1. K p -> K q ; ax T_K"), Some("not-an-instance"));
    }

    #[test]
    fn rejected_lines_poison_dependents() {
        let r = check("1. p ; ax TAUT\n2. K p ; neck 1");
        assert_eq!(r.lines[1].rejection, Some(Rejection::ReliesOnRejected(1)));
        assert!(!r.accepted);
    }

    #[test]
    fn explicit_binding_sort_violation() {
        let r = check("1. K(p | q) -> Kh(p | q) ; ax KKhp {p:=p | q}");
        assert_eq!(r.first_rejection().unwrap().1, &Rejection::SortViolation("p".into()));
    }

    #[test]
    fn rre_at_root_and_sides() {
        let r = check(
            "1. Kh bot <-> bot ; ax Khbot\n\
             2. bot -> bot ; ax TAUT\n\
             3. Kh bot -> bot ; rre 2 at 0 using 1\n",
        );
        assert!(r.accepted, "{r:?}");
    }

    #[test]
    fn script_syntax_errors() {
        assert!(parse_proof("1 p ; ax TAUT").is_err());
        assert!(parse_proof("1. p ax TAUT").is_err());
        assert!(parse_proof("1. p ; frobnicate").is_err());
        assert!(parse_proof("1. p ; rre 1 along 0 using 2").is_err());
        assert!(parse_proof("1. p ; ax Per {alpha p}").is_err());
    }
}
