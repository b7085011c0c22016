use std::collections::BTreeMap;

use thiserror::Error;

use crate::formula::{is_metavariable, Formula};
use crate::parser::{parse, ParseError};

/// Metavariable name to replacement formula.
pub type Substitution = BTreeMap<String, Formula>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("no substitution for metavariable `{0}`")]
    MissingSubstitution(String),
    #[error("schema `{name}`: {source}")]
    Parse { name: String, source: ParseError },
}

/// A formula template over the metavariables `A`, `B`, `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomSchema {
    pub name: String,
    pub template: Formula,
    metavariables: Vec<String>,
}

impl AxiomSchema {
    pub fn new(name: impl Into<String>, template: Formula) -> Self {
        let metavariables = template
            .atoms()
            .into_iter()
            .filter(|a| is_metavariable(a))
            .map(str::to_string)
            .collect();
        AxiomSchema {
            name: name.into(),
            template,
            metavariables,
        }
    }

    pub fn parse(name: &str, template: &str) -> Result<Self, SchemaError> {
        let template = parse(template).map_err(|source| SchemaError::Parse {
            name: name.to_string(),
            source,
        })?;
        Ok(Self::new(name, template))
    }

    /// Sorted distinct metavariables of the template.
    pub fn metavariables(&self) -> &[String] {
        &self.metavariables
    }

    pub fn arity(&self) -> usize {
        self.metavariables.len()
    }

    /// Replace every metavariable simultaneously. The language has no
    /// binders, so no renaming is ever needed.
    pub fn instantiate(&self, subst: &Substitution) -> Result<Formula, SchemaError> {
        if let Some(missing) = self.metavariables.iter().find(|m| !subst.contains_key(*m)) {
            return Err(SchemaError::MissingSubstitution(missing.clone()));
        }
        Ok(self
            .template
            .substitute(&|name| subst.get(name).filter(|_| is_metavariable(name)).cloned()))
    }
}
