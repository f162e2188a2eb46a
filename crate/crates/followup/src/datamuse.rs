//! Sounds-like lookups against a Datamuse-compatible HTTP endpoint, with a
//! per-token disk cache and local fallback.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use followup_core::phonetics::{HomophoneError, HomophoneSource};
use followup_core::text;
use serde::Deserialize;

pub const DEFAULT_BASE_URL: &str = "https://api.datamuse.com/words";

#[derive(Debug, Deserialize)]
struct WordScore {
    word: String,
    #[allow(dead_code)]
    #[serde(default)]
    score: Option<f64>,
}

/// Parses a response body into single-token words spelled differently from
/// `token`, in response order.
pub fn parse_response(token: &str, body: &str) -> Result<Vec<String>, HomophoneError> {
    let items: Vec<WordScore> = serde_json::from_str(body).map_err(|e| HomophoneError::Malformed(e.to_string()))?;
    let original = text::fold_key(token);
    Ok(items
        .into_iter()
        .map(|w| w.word.trim().to_string())
        .filter(|w| !w.contains(char::is_whitespace) && text::tokenize(w).len() == 1)
        .filter(|w| text::fold_key(w) != original)
        .collect())
}

pub struct RemoteHomophones {
    base_url: String,
    cache_dir: Option<PathBuf>,
    agent: ureq::Agent,
    write_lock: Mutex<()>,
}

impl RemoteHomophones {
    pub fn new(base_url: &str, cache_dir: Option<PathBuf>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(timeout)).build().into();
        RemoteHomophones { base_url: base_url.into(), cache_dir, agent, write_lock: Mutex::new(()) }
    }

    fn cache_path(&self, token: &str) -> Option<PathBuf> {
        // hex keeps arbitrary tokens filesystem-safe
        let name: String = token.bytes().map(|b| format!("{b:02x}")).collect();
        self.cache_dir.as_ref().map(|d| d.join(format!("{name}.json")))
    }

    fn fetch(&self, token: &str) -> Result<String, HomophoneError> {
        let unavailable = |e: ureq::Error| HomophoneError::Unavailable(e.to_string());
        let mut resp = self.agent.get(&self.base_url).query("sl", token).call().map_err(unavailable)?;
        resp.body_mut().read_to_string().map_err(unavailable)
    }

    fn store(&self, path: &Path, body: &str) -> io::Result<()> {
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut tmp = tempfile::NamedTempFile::new_in(path.parent().unwrap_or(Path::new(".")))?;
        io::Write::write_all(&mut tmp, body.as_bytes())?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Raw response body for `token`, from the cache when present.
    pub fn body(&self, token: &str) -> Result<String, HomophoneError> {
        let token = text::fold_key(token);
        let path = self.cache_path(&token);
        if let Some(p) = &path {
            if let Ok(cached) = fs::read_to_string(p) {
                return Ok(cached);
            }
        }
        let body = self.fetch(&token)?;
        // only well-formed bodies are cached
        parse_response(&token, &body)?;
        if let Some(p) = &path {
            if let Err(e) = self.store(p, &body) {
                log::warn!("cannot cache {}: {e}", p.display());
            }
        }
        Ok(body)
    }
}

impl HomophoneSource for RemoteHomophones {
    fn homophones(&self, token: &str) -> Result<Vec<String>, HomophoneError> {
        parse_response(token, &self.body(token)?)
    }
}

/// Tries `primary`, and on any error answers from `fallback`.
pub struct WithFallback<P, F> {
    pub primary: P,
    pub fallback: F,
}

impl<P: HomophoneSource, F: HomophoneSource> HomophoneSource for WithFallback<P, F> {
    fn homophones(&self, token: &str) -> Result<Vec<String>, HomophoneError> {
        self.primary.homophones(token).or_else(|e| {
            log::warn!("remote homophones for `{token}` failed ({e}); using local lexicon");
            self.fallback.homophones(token)
        })
    }
}
