//! JSON model files.
//!
//! ```json
//! {
//!   "moments": ["r", "a", "b"],
//!   "precedence": [["r", "a"], ["r", "b"]],
//!   "valuation": { "p": ["a@0", "r"] },
//!   "similarity": { "r@0": { "ranks": { "r@0": 0, "r@1": 1 } } },
//!   "instants": [["r"], ["a", "b"]]
//! }
//! ```
//!
//! Point references are `moment@historyIndex`, or a bare `moment` for every
//! point at that moment. Bases missing from `similarity` get the empty order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    compute_histories, BtModel, History, InstantPartition, ModelError, MomentId, Point, Precedence,
    SimilarityOrder,
};
use crate::formula::is_atom_name;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub moments: Vec<String>,
    #[serde(default)]
    pub precedence: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histories: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub similarity: BTreeMap<String, SimilarityEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instants: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("malformed model file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{0}` is not a valid atom name")]
    BadAtomName(String),
    #[error("similarity for `{0}` gives both `ranks` and `pairs`")]
    RanksAndPairs(String),
    #[error("history {0} is empty")]
    EmptyHistory(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Take the transitive closure of the declared precedence pairs.
    pub close_precedence: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            close_precedence: true,
        }
    }
}

/// Parse a model file. The result is not validated.
pub fn load_model(text: &str) -> Result<BtModel, ModelFileError> {
    load_model_with(text, LoadOptions::default())
}

pub fn load_model_with(text: &str, opts: LoadOptions) -> Result<BtModel, ModelFileError> {
    let file: ModelFile = serde_json::from_str(text)?;
    file.into_model(opts)
}

impl ModelFile {
    pub fn into_model(self, opts: LoadOptions) -> Result<BtModel, ModelFileError> {
        let mut seen = BTreeSet::new();
        for m in &self.moments {
            if !seen.insert(m.as_str()) {
                return Err(ModelError::DuplicateMoment(m.clone()).into());
            }
        }
        let find = |name: &str| -> Result<MomentId, ModelError> {
            self.moments
                .iter()
                .position(|m| m == name)
                .map(MomentId)
                .ok_or_else(|| ModelError::UnknownMoment(name.to_string()))
        };
        let mut precedence = Precedence::new(self.moments.len());
        for [a, b] in &self.precedence {
            precedence.add(find(a)?, find(b)?);
        }
        if opts.close_precedence {
            precedence = precedence.transitive_closure();
        }
        let histories = match &self.histories {
            Some(declared) => declared
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    if h.is_empty() {
                        return Err(ModelFileError::EmptyHistory(i));
                    }
                    Ok(History::new(
                        h.iter().map(|m| find(m)).collect::<Result<_, _>>()?,
                    ))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => compute_histories(&precedence),
        };
        let mut model = BtModel::new(self.moments.clone(), precedence, histories);

        for (atom, refs) in &self.valuation {
            if !is_atom_name(atom) {
                return Err(ModelFileError::BadAtomName(atom.clone()));
            }
            let pts = resolve_all(&model, refs)?;
            model.set_atom(atom.clone(), pts);
        }

        for (base_ref, entry) in &self.similarity {
            let scope = entry
                .scope
                .as_ref()
                .map(|s| resolve_all(&model, s))
                .transpose()?;
            let order = match (&entry.ranks, &entry.pairs) {
                (Some(_), Some(_)) => return Err(ModelFileError::RanksAndPairs(base_ref.clone())),
                (Some(ranks), None) => {
                    let mut resolved = BTreeMap::new();
                    for (r, rank) in ranks {
                        for p in model.resolve_ref(r)? {
                            resolved.insert(p, *rank);
                        }
                    }
                    SimilarityOrder::from_ranks(&resolved)
                }
                (None, Some(pairs)) => {
                    let mut out = Vec::new();
                    for [x, y] in pairs {
                        for px in model.resolve_ref(x)? {
                            for py in model.resolve_ref(y)? {
                                out.push((px, py));
                            }
                        }
                    }
                    SimilarityOrder::from_pairs(out)
                }
                (None, None) => SimilarityOrder::empty(),
            };
            let order = order.with_scope(scope);
            for base in model.resolve_ref(base_ref)? {
                model.set_similarity(base, order.clone());
            }
        }

        if let Some(blocks) = &self.instants {
            let blocks = blocks
                .iter()
                .map(|b| b.iter().map(|m| find(m)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            model.set_instants(Some(InstantPartition::new(blocks)));
        }
        Ok(model)
    }
}

fn resolve_all(model: &BtModel, refs: &[String]) -> Result<BTreeSet<Point>, ModelError> {
    let mut out = BTreeSet::new();
    for r in refs {
        out.extend(model.resolve_ref(r)?);
    }
    Ok(out)
}

/// Explicit file form of a model: histories declared, every point spelled
/// `moment@history`, similarity as pair lists. A strict partial order is
/// written as its covering pairs; any other relation is written pair by pair
/// so that loading without closure reproduces it.
pub fn model_to_file(model: &BtModel) -> ModelFile {
    let name = |m: MomentId| model.moment_name(m).to_string();
    let prec = model.precedence();
    let pairs = if prec.is_transitively_closed() && prec.is_irreflexive() {
        prec.covering_pairs()
    } else {
        prec.pairs().collect()
    };
    let precedence = pairs.into_iter().map(|(a, b)| [name(a), name(b)]).collect();
    let histories = model
        .histories()
        .iter()
        .map(|h| h.moments().iter().map(|&m| name(m)).collect())
        .collect();
    let valuation = model
        .valuation()
        .iter()
        .map(|(atom, pts)| {
            (
                atom.clone(),
                pts.iter().map(|&p| model.point_ref(p)).collect(),
            )
        })
        .collect();
    let similarity = model
        .similarity()
        .iter()
        .filter(|(_, o)| !o.pairs().is_empty() || o.scope().is_some())
        .map(|(&base, o)| {
            let entry = SimilarityEntry {
                ranks: None,
                pairs: Some(
                    o.pairs()
                        .iter()
                        .map(|&(x, y)| [model.point_ref(x), model.point_ref(y)])
                        .collect(),
                ),
                scope: o
                    .scope()
                    .map(|s| s.iter().map(|&p| model.point_ref(p)).collect()),
            };
            (model.point_ref(base), entry)
        })
        .collect();
    let instants = model.instants().map(|i| {
        i.blocks()
            .iter()
            .map(|b| b.iter().map(|&m| name(m)).collect())
            .collect()
    });
    ModelFile {
        moments: model.moments().map(name).collect(),
        precedence,
        histories: Some(histories),
        valuation,
        similarity,
        instants,
    }
}

pub fn save_model(model: &BtModel) -> String {
    serde_json::to_string_pretty(&model_to_file(model)).expect("model files always serialize")
}
