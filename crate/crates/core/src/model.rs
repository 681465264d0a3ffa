//! Finite S5 models with named worlds, and states as world bitmasks.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Models are capped so that a state fits in a `u32` mask.
pub const MAX_WORLDS: usize = 16;

/// JSON shape of a model: `{"worlds": [...], "valuation": {"w": ["p"]}}`.
///
/// Worlds absent from `valuation` make every atom false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

/// A subset of a model's worlds, as a bitmask over the declared world order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct State(pub u32);

impl State {
    pub const EMPTY: State = State(0);

    pub fn singleton(i: usize) -> State {
        State(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: State) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn without(self, i: usize) -> State {
        State(self.0 & !(1 << i))
    }

    pub fn with(self, i: usize) -> State {
        State(self.0 | 1 << i)
    }

    /// World indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..32).filter(move |i| m >> i & 1 == 1)
    }

    /// All subsets of `self`, ascending by mask value.
    pub fn subsets(self) -> impl Iterator<Item = State> {
        let full = self.0;
        let mut cur: Option<u32> = Some(0);
        std::iter::from_fn(move || {
            let out = cur?;
            // Next submask in increasing order.
            cur = if out == full {
                None
            } else {
                Some(((out | !full).wrapping_add(1)) & full)
            };
            Some(State(out))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    worlds: Vec<String>,
    valuation: Vec<BTreeSet<String>>,
}

impl Model {
    /// Checks the invariants and builds a model.
    pub fn new(worlds: Vec<(String, BTreeSet<String>)>) -> Result<Model> {
        if worlds.is_empty() {
            return Err(Error::EmptyWorlds);
        }
        if worlds.len() > MAX_WORLDS {
            return Err(Error::Resource(format!(
                "model has {} worlds, limit is {MAX_WORLDS}",
                worlds.len()
            )));
        }
        let mut seen = HashSet::new();
        for (id, _) in &worlds {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateWorld(id.clone()));
            }
        }
        let (worlds, valuation) = worlds.into_iter().unzip();
        Ok(Model { worlds, valuation })
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Model> {
        if doc.worlds.is_empty() {
            return Err(Error::EmptyWorlds);
        }
        let declared: HashSet<&str> = doc.worlds.iter().map(String::as_str).collect();
        if let Some(stray) = doc.valuation.keys().find(|w| !declared.contains(w.as_str())) {
            return Err(Error::UnknownWorld(stray.clone()));
        }
        let worlds = doc
            .worlds
            .iter()
            .map(|w| {
                let atoms = doc
                    .valuation
                    .get(w)
                    .map(|v| v.iter().cloned().collect())
                    .unwrap_or_default();
                (w.clone(), atoms)
            })
            .collect();
        Model::new(worlds)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            worlds: self.worlds.clone(),
            valuation: self
                .worlds
                .iter()
                .zip(&self.valuation)
                .map(|(w, v)| (w.clone(), v.iter().cloned().collect()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world_ids(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_id(&self, i: usize) -> &str {
        &self.worlds[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.worlds
            .iter()
            .position(|w| w == id)
            .ok_or_else(|| Error::UnknownWorld(id.to_string()))
    }

    pub fn valuation(&self, i: usize) -> &BTreeSet<String> {
        &self.valuation[i]
    }

    pub fn holds(&self, i: usize, atom: &str) -> bool {
        self.valuation[i].contains(atom)
    }

    /// The trivial state: every world.
    pub fn full_state(&self) -> State {
        State(((1u64 << self.len()) - 1) as u32)
    }

    /// Worlds where `atom` is true.
    pub fn atom_state(&self, atom: &str) -> State {
        let mut s = State::EMPTY;
        for i in 0..self.len() {
            if self.holds(i, atom) {
                s = s.with(i);
            }
        }
        s
    }

    pub fn state_from_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<State> {
        let mut s = State::EMPTY;
        for id in ids {
            s = s.with(self.index_of(id.as_ref())?);
        }
        Ok(s)
    }

    pub fn state_ids(&self, s: State) -> Vec<String> {
        s.indices().map(|i| self.worlds[i].clone()).collect()
    }

    /// The submodel induced by a nonempty state.
    pub fn restrict(&self, s: State) -> Result<Model> {
        if s.is_empty() {
            return Err(Error::EmptyState);
        }
        if !s.is_subset(self.full_state()) {
            return Err(Error::Invalid("state mentions worlds outside the model".into()));
        }
        Ok(Model {
            worlds: s.indices().map(|i| self.worlds[i].clone()).collect(),
            valuation: s.indices().map(|i| self.valuation[i].clone()).collect(),
        })
    }

    /// Every induced submodel containing world `w`, by ascending mask.
    pub fn submodels_containing(&self, w: &str) -> Result<impl Iterator<Item = Model> + '_> {
        let i = self.index_of(w)?;
        Ok(self
            .submasks_containing(self.full_state(), i)
            .map(move |s| self.restrict(s).expect("nonempty")))
    }

    /// Subsets of `within` that contain world `i`, ascending.
    pub fn submasks_containing(&self, within: State, i: usize) -> impl Iterator<Item = State> {
        within
            .without(i)
            .subsets()
            .map(move |s| s.with(i))
    }

    /// All nonempty states, ascending by mask.
    pub fn nonempty_states(&self) -> impl Iterator<Item = State> {
        self.full_state().subsets().skip(1)
    }

    /// Atoms true somewhere in the model.
    pub fn atoms(&self) -> BTreeSet<String> {
        self.valuation.iter().flatten().cloned().collect()
    }
}

/// Canonical id of a world with the given true atoms, e.g. `w{p,q}`.
pub fn canonical_world_id<'a>(atoms: impl IntoIterator<Item = &'a String>) -> String {
    let names: Vec<&str> = atoms.into_iter().map(String::as_str).collect();
    format!("w{{{}}}", names.join(","))
}

/// One world per subset of `atoms`; the first world makes every atom true.
///
/// Fails with a resource error above four atoms, since the result would
/// exceed the world limit.
pub fn full_model(atoms: &BTreeSet<String>) -> Result<Model> {
    let n = atoms.len();
    if 1usize.checked_shl(n as u32).is_none_or(|c| c > MAX_WORLDS) {
        return Err(Error::Resource(format!(
            "full model over {n} atoms exceeds {MAX_WORLDS} worlds"
        )));
    }
    let names: Vec<&String> = atoms.iter().collect();
    let worlds = (0..1u32 << n)
        .rev()
        .map(|code| {
            let val: BTreeSet<String> = names
                .iter()
                .enumerate()
                .filter(|(j, _)| code >> (n - 1 - j) & 1 == 1)
                .map(|(_, a)| (*a).clone())
                .collect();
            (canonical_world_id(&val), val)
        })
        .collect();
    Model::new(worlds)
}
