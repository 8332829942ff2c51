use std::collections::BTreeMap;
use std::sync::Arc;

use super::{builtins, merge_properties, ExtSourceProperties, ExternalSource, InputKind};
use crate::syntax::{ExternalAtom, Program};
use crate::LinkError;

/// Named external sources available to a program.
#[derive(Clone, Default)]
pub struct Registry {
    sources: BTreeMap<String, Arc<dyn ExternalSource>>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// Registry preloaded with the builtin library.
    pub fn with_builtins() -> Registry {
        let mut r = Registry::new();
        for source in builtins::all() {
            r.register_arc(source).expect("builtin names are distinct");
        }
        r
    }

    pub fn register<S: ExternalSource + 'static>(&mut self, source: S) -> Result<(), LinkError> {
        self.register_arc(Arc::new(source))
    }

    pub fn register_arc(&mut self, source: Arc<dyn ExternalSource>) -> Result<(), LinkError> {
        let name = source.name().to_string();
        if self.sources.contains_key(&name) {
            return Err(LinkError::DuplicateName(name));
        }
        self.sources.insert(name, source);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<Arc<dyn ExternalSource>, LinkError> {
        self.sources
            .get(name)
            .cloned()
            .ok_or_else(|| LinkError::NotFound(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.sources.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sources.keys().map(String::as_str)
    }

    /// Resolves an external atom occurrence: checks it against the source's
    /// signature and output arity, and merges its tag properties.
    pub fn resolve(&self, ext: &ExternalAtom) -> Result<(Arc<dyn ExternalSource>, ExtSourceProperties), LinkError> {
        let source = self.lookup(&ext.name)?;
        let sig = source.signature();
        if sig.len() != ext.inputs.len() {
            return Err(LinkError::SignatureMismatch {
                name: ext.name.clone(),
                detail: format!("expected {} inputs, got {}", sig.len(), ext.inputs.len()),
            });
        }
        for (i, (kind, term)) in sig.iter().zip(&ext.inputs).enumerate() {
            if *kind == InputKind::Predicate && term.as_symbol().is_none() {
                return Err(LinkError::SignatureMismatch {
                    name: ext.name.clone(),
                    detail: format!("input {i} must be a predicate name, got {term}"),
                });
            }
        }
        if source.output_arity() != ext.outputs.len() {
            return Err(LinkError::OutputArity {
                name: ext.name.clone(),
                expected: source.output_arity(),
                found: ext.outputs.len(),
            });
        }
        let props = merge_properties(source.properties(), &ext.tag_properties, &ext.inputs);
        Ok((source, props))
    }

    /// Checks every external atom of `program` against this registry.
    pub fn link(&self, program: &Program) -> Result<(), LinkError> {
        for rule in &program.rules {
            for ext in rule.externals() {
                self.resolve(ext)?;
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.sources.keys()).finish()
    }
}
