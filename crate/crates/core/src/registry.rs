//! Approach registry with optional file persistence.
//!
//! On disk a configuration directory holds two human-editable files:
//! `approaches.toml` (an ordered `[[approach]]` array) and
//! `refinement_prompt.txt`. Mutations rewrite the affected file atomically.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::approach::{Approach, ApproachError, RefinementPrompt};

pub const APPROACHES_FILE: &str = "approaches.toml";
pub const REFINEMENT_PROMPT_FILE: &str = "refinement_prompt.txt";

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error(transparent)]
    Approach(#[from] ApproachError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Serialize, Deserialize)]
struct ApproachEntry {
    name: String,
    refinement: bool,
    template: String,
}

#[derive(Serialize, Deserialize, Default)]
struct ApproachFile {
    #[serde(default)]
    approach: Vec<ApproachEntry>,
}

const SEED_HEADER: &str = "\
# Commit-message generation approaches, tried in the order listed.
#
# Each [[approach]] needs a unique `name`, a `refinement` flag, and a
# non-empty `template`. Templates may reference commit data with the tags
# [DIFF] [PR] [IR] [CT] [OM]. Missing data renders as N/A.
#
# [OM] inserts the original commit message. Metric scores are computed
# against that same message, so approaches that use it are not comparable.
";

const SEED_SLOTS: &str = "
# Slots for further approaches (for example prompts published with prior
# work on LLM commit-message generation). Uncomment, name, and paste the
# prompt text to enable.
#
# [[approach]]
# name = \"Approach B\"
# refinement = false
# template = \"\"\"
# ...
# \"\"\"
#
# [[approach]]
# name = \"Approach C\"
# refinement = false
# template = \"\"\"
# ...
# \"\"\"
";

#[derive(Debug, Clone)]
pub struct ApproachRegistry {
    approaches: Vec<Approach>,
    refinement: RefinementPrompt,
    dir: Option<PathBuf>,
}

impl Default for ApproachRegistry {
    fn default() -> Self {
        Self::seeded()
    }
}

impl ApproachRegistry {
    /// An unpersisted registry holding only the stock approach.
    pub fn seeded() -> Self {
        Self {
            approaches: vec![Approach::default_approach()],
            refinement: RefinementPrompt::default(),
            dir: None,
        }
    }

    pub fn in_memory(
        approaches: impl IntoIterator<Item = Approach>,
        refinement: RefinementPrompt,
    ) -> Result<Self, RegistryError> {
        let mut reg = Self {
            approaches: Vec::new(),
            refinement,
            dir: None,
        };
        for a in approaches {
            reg.insert(a)?;
        }
        Ok(reg)
    }

    /// Loads the registry from `dir`, writing the seed files first if they do
    /// not exist yet.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| RegistryError::Io {
            path: dir.clone(),
            source,
        })?;

        let approaches_path = dir.join(APPROACHES_FILE);
        if !approaches_path.exists() {
            let body = render_approaches(&[Approach::default_approach()])?;
            write_atomic(&approaches_path, &format!("{SEED_HEADER}\n{body}{SEED_SLOTS}"))?;
        }
        let prompt_path = dir.join(REFINEMENT_PROMPT_FILE);
        if !prompt_path.exists() {
            write_atomic(&prompt_path, RefinementPrompt::default().as_str())?;
        }

        let text = read(&approaches_path)?;
        let file: ApproachFile = toml::from_str(&text).map_err(|e| RegistryError::Parse {
            path: approaches_path.clone(),
            message: e.to_string(),
        })?;
        let refinement = RefinementPrompt::new(read(&prompt_path)?)?;
        let mut reg = Self {
            approaches: Vec::new(),
            refinement,
            dir: Some(dir),
        };
        for e in file.approach {
            reg.insert(Approach::new(e.name, e.template, e.refinement))?;
        }
        Ok(reg)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn list(&self) -> &[Approach] {
        &self.approaches
    }

    pub fn names(&self) -> Vec<&str> {
        self.approaches.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Approach> {
        self.approaches.iter().find(|a| a.name == name)
    }

    pub fn refinement_prompt(&self) -> &RefinementPrompt {
        &self.refinement
    }

    fn insert(&mut self, approach: Approach) -> Result<(), ApproachError> {
        approach.validate()?;
        if self.get(&approach.name).is_some() {
            return Err(ApproachError::DuplicateName(approach.name));
        }
        self.approaches.push(approach);
        Ok(())
    }

    fn index_of(&self, name: &str) -> Result<usize, ApproachError> {
        self.approaches
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| ApproachError::UnknownName(name.to_owned()))
    }

    pub fn add_approach(&mut self, approach: Approach) -> Result<(), RegistryError> {
        self.insert(approach)?;
        if let Err(e) = self.persist_approaches() {
            self.approaches.pop();
            return Err(e);
        }
        Ok(())
    }

    pub fn remove_approach(&mut self, name: &str) -> Result<Approach, RegistryError> {
        let idx = self.index_of(name)?;
        let removed = self.approaches.remove(idx);
        if let Err(e) = self.persist_approaches() {
            self.approaches.insert(idx, removed);
            return Err(e);
        }
        Ok(removed)
    }

    pub fn set_refinement(&mut self, name: &str, enabled: bool) -> Result<(), RegistryError> {
        let idx = self.index_of(name)?;
        let before = self.approaches[idx].refinement_enabled;
        if before == enabled {
            return Ok(());
        }
        self.approaches[idx].refinement_enabled = enabled;
        if let Err(e) = self.persist_approaches() {
            self.approaches[idx].refinement_enabled = before;
            return Err(e);
        }
        Ok(())
    }

    pub fn set_refinement_prompt(&mut self, prompt: RefinementPrompt) -> Result<(), RegistryError> {
        if let Some(dir) = &self.dir {
            write_atomic(&dir.join(REFINEMENT_PROMPT_FILE), prompt.as_str())?;
        }
        self.refinement = prompt;
        Ok(())
    }

    fn persist_approaches(&self) -> Result<(), RegistryError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let body = render_approaches(&self.approaches)?;
        write_atomic(&dir.join(APPROACHES_FILE), &format!("{SEED_HEADER}\n{body}"))
    }
}

fn render_approaches(approaches: &[Approach]) -> Result<String, RegistryError> {
    let file = ApproachFile {
        approach: approaches
            .iter()
            .map(|a| ApproachEntry {
                name: a.name.clone(),
                refinement: a.refinement_enabled,
                template: a.template.clone(),
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| RegistryError::Parse {
        path: PathBuf::from(APPROACHES_FILE),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, RegistryError> {
    fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), RegistryError> {
    let tmp = path.with_extension("tmp");
    let io_err = |source| RegistryError::Io {
        path: path.to_owned(),
        source,
    };
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_has_default() {
        let reg = ApproachRegistry::seeded();
        assert_eq!(reg.names(), ["Default"]);
        assert!(reg.get("Default").unwrap().refinement_enabled);
    }

    #[test]
    fn add_duplicate_and_empty() {
        let mut reg = ApproachRegistry::seeded();
        let err = reg.add_approach(Approach::default_approach()).unwrap_err();
        assert!(matches!(err, RegistryError::Approach(ApproachError::DuplicateName(_))));
        let err = reg.add_approach(Approach::new("B", "", false)).unwrap_err();
        assert!(matches!(err, RegistryError::Approach(ApproachError::EmptyTemplate(_))));
        assert_eq!(reg.list().len(), 1);
    }

    #[test]
    fn add_then_list_round_trips() {
        let mut reg = ApproachRegistry::seeded();
        let b = Approach::new("Terse", "Summarize: [DIFF]", false);
        reg.add_approach(b.clone()).unwrap();
        assert_eq!(reg.list()[1], b);
    }

    #[test]
    fn remove_and_unknown() {
        let mut reg = ApproachRegistry::seeded();
        reg.remove_approach("Default").unwrap();
        assert!(reg.get("Default").is_none());
        assert!(matches!(
            reg.remove_approach("Default"),
            Err(RegistryError::Approach(ApproachError::UnknownName(_)))
        ));
    }

    #[test]
    fn set_refinement_idempotent() {
        let mut reg = ApproachRegistry::seeded();
        reg.set_refinement("Default", false).unwrap();
        reg.set_refinement("Default", false).unwrap();
        assert!(!reg.get("Default").unwrap().refinement_enabled);
        assert!(reg.set_refinement("Nope", true).is_err());
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let mut reg = ApproachRegistry::open(dir.path()).unwrap();
        assert_eq!(reg.names(), ["Default"]);
        assert_eq!(reg.refinement_prompt(), &RefinementPrompt::default());

        reg.add_approach(Approach::new("Terse", "Summarize:\n[DIFF]\n", false)).unwrap();
        reg.set_refinement("Default", false).unwrap();
        reg.set_refinement_prompt(RefinementPrompt::new("Check: [MESSAGE]").unwrap())
            .unwrap();

        let again = ApproachRegistry::open(dir.path()).unwrap();
        assert_eq!(again.list(), reg.list());
        assert_eq!(again.refinement_prompt().as_str(), "Check: [MESSAGE]");
    }

    #[test]
    fn seed_file_is_editable_toml() {
        let dir = tempfile::tempdir().unwrap();
        ApproachRegistry::open(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(APPROACHES_FILE)).unwrap();
        let enabled = text.replacen("# [[approach]]\n# name = \"Approach B\"\n# refinement = false\n# template = \"\"\"\n# ...\n# \"\"\"",
            "[[approach]]\nname = \"Approach B\"\nrefinement = false\ntemplate = \"\"\"\nDescribe [DIFF]\n\"\"\"", 1);
        assert_ne!(enabled, text);
        fs::write(dir.path().join(APPROACHES_FILE), enabled).unwrap();
        let reg = ApproachRegistry::open(dir.path()).unwrap();
        assert_eq!(reg.names(), ["Default", "Approach B"]);
    }

    #[test]
    fn bad_refinement_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(REFINEMENT_PROMPT_FILE), "no tag here").unwrap();
        assert!(matches!(
            ApproachRegistry::open(dir.path()),
            Err(RegistryError::Approach(ApproachError::MessageTag(0)))
        ));
    }
}
