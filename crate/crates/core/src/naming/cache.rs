use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ProviderError, SynonymProvider, SynonymRequest};

type Slot = Arc<Mutex<Option<String>>>;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    name: String,
}

/// Memoizes another provider. Concurrent requests for the same key wait for
/// the first one; answers can be persisted as JSON lines.
pub struct CachingProvider<P> {
    inner: P,
    slots: Mutex<HashMap<String, Slot>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl<P: SynonymProvider> CachingProvider<P> {
    pub fn new(inner: P) -> Self {
        Self { inner, slots: Mutex::new(HashMap::new()), file: None, path: None }
    }

    /// Loads earlier answers from `path` (if present) and appends new ones to it.
    pub fn with_file(inner: P, path: &Path) -> std::io::Result<Self> {
        let mut slots = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if let Ok(e) = serde_json::from_str::<Entry>(&line) {
                    slots.insert(e.key, Arc::new(Mutex::new(Some(e.name))));
                }
            }
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { inner, slots: Mutex::new(slots), file: Some(Mutex::new(file)), path: Some(path.to_path_buf()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        let slots = self.slots.lock().unwrap();
        slots.values().filter(|s| s.lock().unwrap().is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

/// Hash of name, role, context and attempt number.
pub fn cache_key(r: &SynonymRequest) -> String {
    let mut h = Sha256::new();
    for part in [r.original_name.as_str(), r.role.as_str(), r.context_snippet.as_str()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.update(r.attempt.to_le_bytes());
    hex::encode(h.finalize())
}

impl<P: SynonymProvider> SynonymProvider for CachingProvider<P> {
    fn propose(&self, request: &SynonymRequest) -> Result<String, ProviderError> {
        let key = cache_key(request);
        let slot = self.slots.lock().unwrap().entry(key.clone()).or_default().clone();
        let mut guard = slot.lock().unwrap();
        if let Some(name) = guard.as_ref() {
            return Ok(name.clone());
        }
        let name = self.inner.propose(request)?;
        if let Some(f) = &self.file {
            let line = serde_json::to_string(&Entry { key, name: name.clone() }).expect("entry serializes");
            let mut f = f.lock().unwrap();
            writeln!(f, "{line}").map_err(|e| ProviderError(format!("cache write: {e}")))?;
        }
        *guard = Some(name.clone());
        Ok(name)
    }
}
