//! Resolution spaces and per-world resolutions of propositional formulas.
//!
//! Each element of a space is addressed by an index in `0..size`, and the
//! index order is the canonical enumeration order:
//!
//! * `a | b`: the left injections `0..|a|`, then the right ones.
//! * `a & b`: pair `(i, j)` sits at `i * |b| + j`.
//! * `a -> b`: a table `f` is read as a number in base `|b|` whose most
//!   significant digit is `f` applied to the first element of `S(a)`, so
//!   index order is lexicographic in the antecedent order.
//!
//! Sets of resolutions are bitsets over these indices; [`Resolution`]
//! values are only materialized for output.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::model::{Model, State};

pub const DEFAULT_CAP: u64 = 1_000_000;

/// Above this many bits, computing `|S|` exactly is refused.
const MAX_SIZE_BITS: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resolution {
    Atom(String),
    Bottom,
    Inl(Box<Resolution>),
    Inr(Box<Resolution>),
    Pair(Box<Resolution>, Box<Resolution>),
    /// One entry per element of the antecedent space, in canonical order.
    Fn(Vec<(Resolution, Resolution)>),
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Atom(p) => write!(f, "{p}"),
            Resolution::Bottom => write!(f, "bot"),
            Resolution::Inl(r) => write!(f, "inl({r})"),
            Resolution::Inr(r) => write!(f, "inr({r})"),
            Resolution::Pair(a, b) => write!(f, "({a},{b})"),
            Resolution::Fn(entries) => {
                write!(f, "{{")?;
                for (i, (x, y)) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}↦{y}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

fn require_pl(alpha: &Formula) -> Result<()> {
    if alpha.is_pl() {
        Ok(())
    } else {
        Err(Error::NotPropositional(alpha.to_string()))
    }
}

/// `|S(alpha)|`, exactly.
///
/// Returns a resource error only when the number itself would be too large
/// to write down (more than 2^24 bits).
pub fn resolution_space_size(alpha: &Formula) -> Result<BigUint> {
    require_pl(alpha)?;
    big_size(alpha)
}

fn big_size(alpha: &Formula) -> Result<BigUint> {
    Ok(match alpha {
        Formula::Atom(_) | Formula::Bot => BigUint::one(),
        Formula::Or(a, b) => big_size(a)? + big_size(b)?,
        Formula::And(a, b) => big_size(a)? * big_size(b)?,
        Formula::Implies(a, b) => {
            let base = big_size(b)?;
            if base.is_one() {
                return Ok(base);
            }
            let exp = big_size(a)?;
            let bits = exp
                .to_u64()
                .and_then(|e| e.checked_mul(base.bits()))
                .filter(|&b| b <= MAX_SIZE_BITS);
            match bits {
                Some(_) => base.pow(exp.to_u32().expect("bounded above")),
                None => {
                    return Err(Error::Resource(format!(
                        "resolution space of `{alpha}` has more than 2^24 bits of size"
                    )))
                }
            }
        }
        _ => unreachable!("checked propositional"),
    })
}

/// Compiled space of a PL formula with every subspace within the cap.
#[derive(Clone, Debug)]
pub struct Resolver {
    root: Node,
}

#[derive(Clone, Debug)]
struct Node {
    size: u64,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Atom(String),
    Bot,
    Or(Box<Node>, Box<Node>),
    And(Box<Node>, Box<Node>),
    Imp(Box<Node>, Box<Node>),
}

fn compile(alpha: &Formula, cap: u64) -> Result<Node> {
    let too_big = || {
        Error::Resource(format!(
            "resolution space of `{alpha}` exceeds the cap of {cap}"
        ))
    };
    let node = match alpha {
        Formula::Atom(p) => Node {
            size: 1,
            kind: Kind::Atom(p.clone()),
        },
        Formula::Bot => Node {
            size: 1,
            kind: Kind::Bot,
        },
        Formula::Or(a, b) => {
            let (a, b) = (compile(a, cap)?, compile(b, cap)?);
            Node {
                size: a.size.checked_add(b.size).ok_or_else(too_big)?,
                kind: Kind::Or(Box::new(a), Box::new(b)),
            }
        }
        Formula::And(a, b) => {
            let (a, b) = (compile(a, cap)?, compile(b, cap)?);
            Node {
                size: a.size.checked_mul(b.size).ok_or_else(too_big)?,
                kind: Kind::And(Box::new(a), Box::new(b)),
            }
        }
        Formula::Implies(a, b) => {
            let (a, b) = (compile(a, cap)?, compile(b, cap)?);
            let size = if b.size == 1 {
                1
            } else {
                u32::try_from(a.size)
                    .ok()
                    .and_then(|e| b.size.checked_pow(e))
                    .ok_or_else(too_big)?
            };
            Node {
                size,
                kind: Kind::Imp(Box::new(a), Box::new(b)),
            }
        }
        _ => return Err(Error::NotPropositional(alpha.to_string())),
    };
    if node.size > cap {
        return Err(too_big());
    }
    Ok(node)
}

impl Resolver {
    pub fn new(alpha: &Formula, cap: u64) -> Result<Resolver> {
        require_pl(alpha)?;
        Ok(Resolver {
            root: compile(alpha, cap)?,
        })
    }

    pub fn size(&self) -> u64 {
        self.root.size
    }

    pub fn decode(&self, index: u64) -> Resolution {
        decode(&self.root, index)
    }

    pub fn encode(&self, r: &Resolution) -> Option<u64> {
        encode(&self.root, r)
    }

    /// `R(w, alpha)` for a world given by its valuation.
    pub fn at(&self, holds: &dyn Fn(&str) -> bool) -> FixedBitSet {
        resolve(&self.root, holds)
    }

    /// `R(s, alpha)`: the intersection over the worlds of a nonempty state.
    pub fn uniform(&self, m: &Model, s: State) -> Result<FixedBitSet> {
        if s.is_empty() {
            return Err(Error::EmptyState);
        }
        // Resolutions depend only on the valuation, so equal valuations share work.
        let mut seen: HashMap<&_, ()> = HashMap::new();
        let mut acc: Option<FixedBitSet> = None;
        for i in s.indices() {
            let val = m.valuation(i);
            if seen.insert(val, ()).is_some() {
                continue;
            }
            let here = self.at(&|p| val.contains(p));
            match &mut acc {
                None => acc = Some(here),
                Some(a) => a.intersect_with(&here),
            }
            if acc.as_ref().is_some_and(|a| a.is_clear()) {
                break;
            }
        }
        Ok(acc.expect("nonempty state"))
    }

    pub fn decode_set(&self, set: &FixedBitSet) -> Vec<Resolution> {
        set.ones().map(|i| self.decode(i as u64)).collect()
    }
}

fn decode(node: &Node, i: u64) -> Resolution {
    match &node.kind {
        Kind::Atom(p) => Resolution::Atom(p.clone()),
        Kind::Bot => Resolution::Bottom,
        Kind::Or(a, b) => {
            if i < a.size {
                Resolution::Inl(Box::new(decode(a, i)))
            } else {
                Resolution::Inr(Box::new(decode(b, i - a.size)))
            }
        }
        Kind::And(a, b) => Resolution::Pair(
            Box::new(decode(a, i / b.size)),
            Box::new(decode(b, i % b.size)),
        ),
        Kind::Imp(a, b) => Resolution::Fn(
            table_digits(i, a.size, b.size)
                .into_iter()
                .enumerate()
                .map(|(k, d)| (decode(a, k as u64), decode(b, d)))
                .collect(),
        ),
    }
}

/// The values of table `i`, most significant (first antecedent) first.
fn table_digits(mut i: u64, len: u64, base: u64) -> Vec<u64> {
    let mut out = vec![0; len as usize];
    if base > 1 {
        for slot in out.iter_mut().rev() {
            *slot = i % base;
            i /= base;
        }
    }
    out
}

fn encode(node: &Node, r: &Resolution) -> Option<u64> {
    match (&node.kind, r) {
        (Kind::Atom(p), Resolution::Atom(q)) if p == q => Some(0),
        (Kind::Bot, Resolution::Bottom) => Some(0),
        (Kind::Or(a, _), Resolution::Inl(x)) => encode(a, x),
        (Kind::Or(a, b), Resolution::Inr(x)) => Some(a.size + encode(b, x)?),
        (Kind::And(a, b), Resolution::Pair(x, y)) => Some(encode(a, x)? * b.size + encode(b, y)?),
        (Kind::Imp(a, b), Resolution::Fn(entries)) => {
            if entries.len() as u64 != a.size {
                return None;
            }
            let mut idx = 0u64;
            for (k, (x, y)) in entries.iter().enumerate() {
                if encode(a, x)? != k as u64 {
                    return None;
                }
                if b.size > 1 {
                    idx = idx * b.size + encode(b, y)?;
                } else {
                    encode(b, y)?;
                }
            }
            Some(idx)
        }
        _ => None,
    }
}

fn resolve(node: &Node, holds: &dyn Fn(&str) -> bool) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(node.size as usize);
    match &node.kind {
        Kind::Atom(p) => {
            if holds(p) {
                out.insert(0);
            }
        }
        Kind::Bot => {}
        Kind::Or(a, b) => {
            for i in resolve(a, holds).ones() {
                out.insert(i);
            }
            for j in resolve(b, holds).ones() {
                out.insert(a.size as usize + j);
            }
        }
        Kind::And(a, b) => {
            let rb = resolve(b, holds);
            for i in resolve(a, holds).ones() {
                for j in rb.ones() {
                    out.insert(i * b.size as usize + j);
                }
            }
        }
        Kind::Imp(a, b) => {
            let ra = resolve(a, holds);
            let rb = resolve(b, holds);
            if ra.is_clear() {
                out.insert_range(..);
            } else if b.size == 1 {
                if rb.contains(0) {
                    out.insert(0);
                }
            } else {
                // f qualifies iff it maps every actual resolution of a into R(w, b).
                let positions: Vec<usize> = ra.ones().collect();
                for f in 0..node.size {
                    let digits = table_digits(f, a.size, b.size);
                    if positions.iter().all(|&k| rb.contains(digits[k] as usize)) {
                        out.insert(f as usize);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionSpace {
    pub formula: Formula,
    pub size: BigUint,
    /// Canonical enumeration of `S(alpha)`.
    pub elements: Vec<Resolution>,
}

pub fn resolution_space(alpha: &Formula, cap: u64) -> Result<ResolutionSpace> {
    let r = Resolver::new(alpha, cap)?;
    Ok(ResolutionSpace {
        formula: alpha.clone(),
        size: BigUint::from(r.size()),
        elements: (0..r.size()).map(|i| r.decode(i)).collect(),
    })
}

/// `R(w, alpha)` in canonical order.
pub fn resolutions_at(m: &Model, w: &str, alpha: &Formula, cap: u64) -> Result<Vec<Resolution>> {
    let i = m.index_of(w)?;
    let r = Resolver::new(alpha, cap)?;
    Ok(r.decode_set(&r.at(&|p| m.holds(i, p))))
}

/// Resolutions shared by every world of a nonempty state.
pub fn uniform_resolutions(
    m: &Model,
    s: State,
    alpha: &Formula,
    cap: u64,
) -> Result<Vec<Resolution>> {
    let r = Resolver::new(alpha, cap)?;
    Ok(r.decode_set(&r.uniform(m, s)?))
}

/// Whether `alpha`'s space and all its subspaces fit within `cap`.
pub fn fits_cap(alpha: &Formula, cap: u64) -> bool {
    alpha.is_pl() && compile(alpha, cap).is_ok()
}
