//! Named registry of decision engines and crash-force models, so that the
//! variant in use can be picked from a scenario file or the command line.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::decision::{DecisionEngine, SelEngine, UtilitarianEngine};
use crate::ethics::{CrashForceModel, WorkEnergyModel};

pub const DEFAULT_ENGINE: &str = "utilitarian";
pub const DEFAULT_CRASH_MODEL: &str = "work-energy";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("unknown decision engine `{name}` (available: {available})")]
    UnknownEngine { name: String, available: String },
    #[error("unknown crash-force model `{name}` (available: {available})")]
    UnknownCrashModel { name: String, available: String },
    #[error("`{0}` is already registered")]
    Duplicate(String),
}

#[derive(Clone)]
pub struct Registry {
    engines: BTreeMap<String, Arc<dyn DecisionEngine>>,
    crash_models: BTreeMap<String, Arc<dyn CrashForceModel>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("engines", &self.engines.keys().collect::<Vec<_>>())
            .field("crash_models", &self.crash_models.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            engines: BTreeMap::new(),
            crash_models: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register_engine(Arc::new(UtilitarianEngine)).expect("fresh registry");
        r.register_engine(Arc::new(SelEngine)).expect("fresh registry");
        r.register_crash_model(Arc::new(WorkEnergyModel)).expect("fresh registry");
        r
    }

    pub fn register_engine(&mut self, engine: Arc<dyn DecisionEngine>) -> Result<(), RegistryError> {
        let name = engine.name().to_string();
        if self.engines.contains_key(&name) {
            return Err(RegistryError::Duplicate(name));
        }
        self.engines.insert(name, engine);
        Ok(())
    }

    pub fn register_crash_model(
        &mut self,
        model: Arc<dyn CrashForceModel>,
    ) -> Result<(), RegistryError> {
        let name = model.name().to_string();
        if self.crash_models.contains_key(&name) {
            return Err(RegistryError::Duplicate(name));
        }
        self.crash_models.insert(name, model);
        Ok(())
    }

    pub fn engine(&self, name: &str) -> Result<Arc<dyn DecisionEngine>, RegistryError> {
        self.engines
            .get(name)
            .cloned()
            .ok_or_else(|| RegistryError::UnknownEngine {
                name: name.to_string(),
                available: join(self.engines.keys()),
            })
    }

    pub fn crash_model(&self, name: &str) -> Result<Arc<dyn CrashForceModel>, RegistryError> {
        self.crash_models
            .get(name)
            .cloned()
            .ok_or_else(|| RegistryError::UnknownCrashModel {
                name: name.to_string(),
                available: join(self.crash_models.keys()),
            })
    }

    pub fn engine_names(&self) -> impl Iterator<Item = &str> {
        self.engines.keys().map(String::as_str)
    }

    pub fn crash_model_names(&self) -> impl Iterator<Item = &str> {
        self.crash_models.keys().map(String::as_str)
    }
}

fn join<'a>(names: impl Iterator<Item = &'a String>) -> String {
    names.map(String::as_str).collect::<Vec<_>>().join(", ")
}
