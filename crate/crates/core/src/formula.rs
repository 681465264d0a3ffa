//! Formulas of the propositional language and of the dynamic epistemic
//! language of knowing how.
//!
//! The AST has exactly eight constructors. Negation, `top`, biconditional,
//! the diamond and the dual of `K` are abbreviations: the parser expands
//! them and the renderer folds them back.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Knowing that.
    Know(Box<Formula>),
    /// Knowing how; the argument is always propositional.
    KnowHow(Box<Formula>),
    /// The update modality: truth in every submodel containing the current world.
    Update(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn bot() -> Formula {
        Formula::Bot
    }

    pub fn top() -> Formula {
        Formula::not(Formula::Bot)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bot)
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::and(Formula::implies(l.clone(), r.clone()), Formula::implies(r, l))
    }

    pub fn know(f: Formula) -> Formula {
        Formula::Know(Box::new(f))
    }

    /// `Khat f`, i.e. `~K~f`.
    pub fn khat(f: Formula) -> Formula {
        Formula::not(Formula::know(Formula::not(f)))
    }

    pub fn update(f: Formula) -> Formula {
        Formula::Update(Box::new(f))
    }

    /// `<> f`, i.e. `~[]~f`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::not(Formula::update(Formula::not(f)))
    }

    /// Builds `Kh f`, rejecting arguments that are not propositional.
    pub fn knowhow(f: Formula) -> Result<Formula, Error> {
        if !f.is_pl() {
            return Err(Error::KhScope(f.to_string()));
        }
        Ok(Formula::KnowHow(Box::new(f)))
    }

    /// Left-folded conjunction; `top` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or_else(Formula::top)
    }

    /// Left-folded disjunction; `bot` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
    }

    /// True iff no `K`, `Kh` or `[]` occurs.
    pub fn is_pl(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Bot => true,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.is_pl() && r.is_pl()
            }
            Formula::Know(_) | Formula::KnowHow(_) | Formula::Update(_) => false,
        }
    }

    pub fn has_knowhow(&self) -> bool {
        self.any(&|f| matches!(f, Formula::KnowHow(_)))
    }

    pub fn has_update(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Update(_)))
    }

    pub fn is_disjunction_free(&self) -> bool {
        !self.any(&|f| matches!(f, Formula::Or(..)))
    }

    /// Every `Kh` node has a propositional argument.
    pub fn is_well_formed(&self) -> bool {
        !self.any(&|f| matches!(f, Formula::KnowHow(a) if !a.is_pl()))
    }

    pub fn check_well_formed(&self) -> Result<(), Error> {
        let mut bad = None;
        self.visit(&mut |f| {
            if bad.is_none() {
                if let Formula::KnowHow(a) = f {
                    if !a.is_pl() {
                        bad = Some(a.to_string());
                    }
                }
            }
        });
        match bad {
            Some(arg) => Err(Error::KhScope(arg)),
            None => Ok(()),
        }
    }

    fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any(pred))
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Bot => vec![],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => vec![l, r],
            Formula::Know(a) | Formula::KnowHow(a) | Formula::Update(a) => vec![a],
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Nesting depth of `K`, `Kh` and `[]`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bot => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.modal_depth().max(r.modal_depth())
            }
            Formula::Know(a) | Formula::KnowHow(a) | Formula::Update(a) => 1 + a.modal_depth(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Subformula reached by following child indices from the root.
    pub fn at_path(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Copy of `self` with the node at `path` replaced.
    pub fn replace_at(&self, path: &[usize], with: &Formula) -> Option<Formula> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(with.clone());
        };
        let rebuilt = match (self, first) {
            (Formula::And(l, r), 0) => Formula::and(l.replace_at(rest, with)?, (**r).clone()),
            (Formula::And(l, r), 1) => Formula::and((**l).clone(), r.replace_at(rest, with)?),
            (Formula::Or(l, r), 0) => Formula::or(l.replace_at(rest, with)?, (**r).clone()),
            (Formula::Or(l, r), 1) => Formula::or((**l).clone(), r.replace_at(rest, with)?),
            (Formula::Implies(l, r), 0) => {
                Formula::implies(l.replace_at(rest, with)?, (**r).clone())
            }
            (Formula::Implies(l, r), 1) => {
                Formula::implies((**l).clone(), r.replace_at(rest, with)?)
            }
            (Formula::Know(a), 0) => Formula::know(a.replace_at(rest, with)?),
            (Formula::KnowHow(a), 0) => Formula::KnowHow(Box::new(a.replace_at(rest, with)?)),
            (Formula::Update(a), 0) => Formula::update(a.replace_at(rest, with)?),
            _ => return None,
        };
        Some(rebuilt)
    }

    /// Splits `(a -> b) & (b -> a)` into `(a, b)`.
    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Implies(a, b), Formula::Implies(c, d)) if a == d && b == c => {
                    Some((a, b))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Strips one `-> bot`.
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if **b == Formula::Bot => Some(a),
            _ => None,
        }
    }

    /// Classical truth of a propositional formula under a valuation predicate.
    /// Modal nodes are not propositional; callers guarantee `is_pl`.
    pub fn eval_classical(&self, holds: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Atom(p) => holds(p),
            Formula::Bot => false,
            Formula::And(l, r) => l.eval_classical(holds) && r.eval_classical(holds),
            Formula::Or(l, r) => l.eval_classical(holds) || r.eval_classical(holds),
            Formula::Implies(l, r) => !l.eval_classical(holds) || r.eval_classical(holds),
            Formula::Know(_) | Formula::KnowHow(_) | Formula::Update(_) => {
                panic!("classical evaluation of a modal formula")
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    K,
    Kh,
    Khat,
    BoxOp,
    Diamond,
    Bot,
    Top,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Implies,
            '↔' => Tok::Iff,
            '□' => Tok::BoxOp,
            '◇' => Tok::Diamond,
            '⊥' => Tok::Bot,
            '⊤' => Tok::Top,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if next == Some('>') => {
                i += 2;
                out.push((Tok::Implies, pos));
                continue;
            }
            '<' if next == Some('-') && chars.get(i + 2).map(|x| x.1) == Some('>') => {
                i += 3;
                out.push((Tok::Iff, pos));
                continue;
            }
            '<' if next == Some('>') => {
                i += 2;
                out.push((Tok::Diamond, pos));
                continue;
            }
            '[' if next == Some(']') => {
                i += 2;
                out.push((Tok::BoxOp, pos));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                // `K̂` written with a combining circumflex.
                if word == "K" && chars.get(i).map(|x| x.1) == Some('\u{302}') {
                    i += 1;
                    out.push((Tok::Khat, pos));
                    continue;
                }
                let tok = match word.as_str() {
                    "K" => Tok::K,
                    "Kh" => Tok::Kh,
                    "Khat" => Tok::Khat,
                    "bot" => Tok::Bot,
                    "top" => Tok::Top,
                    w if w.starts_with(|c: char| c.is_ascii_lowercase()) => Tok::Atom(word),
                    _ => {
                        return Err(ParseError::new(pos, format!("unknown operator `{word}`")));
                    }
                };
                out.push((tok, pos));
                continue;
            }
            other => return Err(ParseError::new(pos, format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    // iff  := impl ( '<->' iff )?
    fn iff(&mut self) -> Result<Formula, Error> {
        let l = self.implication()?;
        if self.eat(&Tok::Iff) {
            let r = self.iff()?;
            return Ok(Formula::iff(l, r));
        }
        Ok(l)
    }

    // impl := disj ( '->' impl )?
    fn implication(&mut self) -> Result<Formula, Error> {
        let l = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let r = self.implication()?;
            return Ok(Formula::implies(l, r));
        }
        Ok(l)
    }

    fn disjunction(&mut self) -> Result<Formula, Error> {
        let mut l = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let r = self.conjunction()?;
            l = Formula::or(l, r);
        }
        Ok(l)
    }

    fn conjunction(&mut self) -> Result<Formula, Error> {
        let mut l = self.unary()?;
        while self.eat(&Tok::And) {
            let r = self.unary()?;
            l = Formula::and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula, Error> {
        let pos = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::new(pos, "unexpected end of input").into());
        };
        self.idx += 1;
        Ok(match tok {
            Tok::Not => Formula::not(self.unary()?),
            Tok::K => Formula::know(self.unary()?),
            Tok::Khat => Formula::khat(self.unary()?),
            Tok::BoxOp => Formula::update(self.unary()?),
            Tok::Diamond => Formula::diamond(self.unary()?),
            Tok::Kh => {
                let arg = self.unary()?;
                if !arg.is_pl() {
                    return Err(Error::KhScopeAt {
                        position: pos,
                        argument: arg.to_string(),
                    });
                }
                Formula::KnowHow(Box::new(arg))
            }
            Tok::Atom(name) => Formula::Atom(name),
            Tok::Bot => Formula::Bot,
            Tok::Top => Formula::top(),
            Tok::LParen => {
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::new(self.pos(), "expected `)`").into());
                }
                inner
            }
            other => {
                return Err(ParseError::new(pos, format!("unexpected token {other:?}")).into());
            }
        })
    }
}

/// Parses the concrete syntax.
///
/// Precedence from tightest: prefixes (`~ K Kh Khat [] <>`), `&`, `|`,
/// `->` (right associative), `<->` (right associative).
pub fn parse_formula(text: &str) -> Result<Formula, Error> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.idx != p.toks.len() {
        return Err(ParseError::new(p.pos(), "trailing input").into());
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Rendering

const PREC_IFF: u8 = 1;
const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_PREFIX: u8 = 5;

enum View<'a> {
    Leaf(String),
    Prefix(&'static str, &'a Formula),
    Binary(&'static str, u8, &'a Formula, &'a Formula),
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::Atom(p) => View::Leaf(p.clone()),
        Formula::Bot => View::Leaf("bot".into()),
        Formula::Implies(a, b) if **b == Formula::Bot => match &**a {
            Formula::Bot => View::Leaf("top".into()),
            Formula::Update(inner) if inner.as_negation().is_some() => {
                View::Prefix("<>", inner.as_negation().unwrap())
            }
            Formula::Know(inner) if inner.as_negation().is_some() => {
                View::Prefix("Khat", inner.as_negation().unwrap())
            }
            _ => View::Prefix("~", a),
        },
        Formula::And(..) if f.as_iff().is_some() => {
            let (a, b) = f.as_iff().unwrap();
            View::Binary("<->", PREC_IFF, a, b)
        }
        Formula::And(l, r) => View::Binary("&", PREC_AND, l, r),
        Formula::Or(l, r) => View::Binary("|", PREC_OR, l, r),
        Formula::Implies(l, r) => View::Binary("->", PREC_IMP, l, r),
        Formula::Know(a) => View::Prefix("K", a),
        Formula::KnowHow(a) => View::Prefix("Kh", a),
        Formula::Update(a) => View::Prefix("[]", a),
    }
}

fn prec(f: &Formula) -> u8 {
    match view(f) {
        View::Leaf(_) | View::Prefix(..) => PREC_PREFIX,
        View::Binary(_, p, _, _) => p,
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    match view(f) {
        View::Leaf(s) => out.push_str(&s),
        View::Prefix(op, arg) => {
            out.push_str(op);
            if prec(arg) < PREC_PREFIX {
                out.push('(');
                write_formula(arg, out);
                out.push(')');
            } else {
                if op != "~" {
                    out.push(' ');
                }
                write_formula(arg, out);
            }
        }
        View::Binary(op, p, l, r) => {
            // `&` and `|` associate to the left, `->` and `<->` to the right.
            let right_assoc = p <= PREC_IMP;
            let (lp, rp) = (prec(l), prec(r));
            let wrap_l = if right_assoc { lp <= p } else { lp < p };
            let wrap_r = if right_assoc { rp < p } else { rp <= p };
            write_wrapped(l, wrap_l, out);
            out.push(' ');
            out.push_str(op);
            out.push(' ');
            write_wrapped(r, wrap_r, out);
        }
    }
}

fn write_wrapped(f: &Formula, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

/// ASCII rendering that re-sugars `~`, `top`, `<->`, `<>` and `Khat`.
pub fn render_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, &mut s);
    s
}

impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(de)?;
        parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn double_negation_expands() {
        let expected = Formula::implies(
            Formula::implies(Formula::implies(a("p"), Formula::Bot), Formula::Bot),
            a("p"),
        );
        assert_eq!(p("~~p -> p"), expected);
    }

    #[test]
    fn knowhow_of_excluded_middle() {
        let expected = Formula::KnowHow(Box::new(Formula::or(a("p"), Formula::not(a("p")))));
        assert_eq!(p("Kh(p | ~p)"), expected);
    }

    #[test]
    fn knowhow_rejects_modal_argument() {
        match parse_formula("Kh(K p)") {
            Err(Error::KhScopeAt { position, .. }) => assert_eq!(position, 0),
            other => panic!("expected scope error, got {other:?}"),
        }
        assert!(Formula::knowhow(Formula::know(a("p"))).is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_formula("p & (q |") {
            Err(Error::Parse(e)) => assert_eq!(e.position, 8),
            other => panic!("{other:?}"),
        }
        match parse_formula("p $ q") {
            Err(Error::Parse(e)) => assert_eq!(e.position, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("Kp").is_err());
        assert!(parse_formula("p q").is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(p("p & q | r"), Formula::or(Formula::and(a("p"), a("q")), a("r")));
        assert_eq!(
            p("p -> q -> r"),
            Formula::implies(a("p"), Formula::implies(a("q"), a("r")))
        );
        assert_eq!(
            p("K p -> p"),
            Formula::implies(Formula::know(a("p")), a("p"))
        );
        assert_eq!(
            p("p <-> q -> r"),
            Formula::iff(a("p"), Formula::implies(a("q"), a("r")))
        );
        assert_eq!(p("[] K p"), Formula::update(Formula::know(a("p"))));
        assert_eq!(p("<> p"), Formula::diamond(a("p")));
        assert_eq!(p("Khat p"), Formula::khat(a("p")));
        assert_eq!(p("top"), Formula::top());
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(p("¬p ∧ q → ⊥"), p("~p & q -> bot"));
        assert_eq!(p("□◇p ↔ ⊤ ∨ p"), p("[]<>p <-> top | p"));
        assert_eq!(p("K\u{302}p"), p("Khat p"));
    }

    #[test]
    fn rendering() {
        assert_eq!(render_formula(&Formula::not(a("p"))), "~p");
        assert_eq!(
            render_formula(&Formula::KnowHow(Box::new(Formula::or(a("p"), a("q"))))),
            "Kh(p | q)"
        );
        assert_eq!(render_formula(&Formula::update(Formula::know(a("p")))), "[] K p");
        assert_eq!(render_formula(&Formula::khat(a("p"))), "Khat p");
        assert_eq!(render_formula(&Formula::diamond(a("p"))), "<> p");
        assert_eq!(render_formula(&p("(p -> q) -> r")), "(p -> q) -> r");
        assert_eq!(render_formula(&p("p -> q -> r")), "p -> q -> r");
        assert_eq!(render_formula(&p("~(p & q)")), "~(p & q)");
        assert_eq!(render_formula(&p("(p <-> q) & r")), "(p <-> q) & r");
    }

    #[test]
    fn pl_and_atoms() {
        assert!(p("p | ~p").is_pl());
        assert!(!p("K p").is_pl());
        assert!(!p("p & Kh q").is_pl());
        assert_eq!(p("p | ~p").atoms(), BTreeSet::from(["p".to_string()]));
        assert!(Formula::Bot.atoms().is_empty());
        assert_eq!(
            p("Kh(p -> q)").atoms(),
            BTreeSet::from(["p".to_string(), "q".to_string()])
        );
    }

    #[test]
    fn paths() {
        let f = p("K ~p -> K [](Kh p -> bot)");
        assert_eq!(f.at_path(&[1, 0, 0, 1]), Some(&Formula::Bot));
        let g = f.replace_at(&[1, 0, 0, 1], &p("Kh bot")).unwrap();
        assert_eq!(g, p("K ~p -> K [](Kh p -> Kh bot)"));
        assert!(f.at_path(&[2]).is_none());
    }
}
