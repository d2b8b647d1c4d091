use std::io::ErrorKind;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::ContextDocument;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    /// Extra attempts after the first one.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff_ms: u64,
    /// Upper bound on concurrent requests in [`RemoteScorer::score_many`].
    pub max_concurrency: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8080/score".into(),
            timeout_ms: 30_000,
            retries: 3,
            backoff_ms: 200,
            max_concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemoteScore {
    pub score: f64,
    pub retries: u32,
}

/// HTTP client for an externally hosted scorer.
///
/// Request body `{"text": ...}`, response body `{"score": p}` with p in [0, 1].
pub struct RemoteScorer {
    cfg: RemoteConfig,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct Request<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct Response {
    score: Option<f64>,
}

fn is_timeout(e: &ureq::Error) -> bool {
    match e {
        ureq::Error::Timeout(_) => true,
        ureq::Error::Io(io) => matches!(io.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock),
        _ => false,
    }
}

impl RemoteScorer {
    pub fn new(cfg: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteScorer { cfg, agent }
    }

    fn attempt(&self, text: &str) -> Result<f64> {
        let body = serde_json::to_string(&Request { text })?;
        let mut resp = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Content-Type", "application/json")
            .send(body.as_str())
            .map_err(|e| if is_timeout(&e) { Error::Timeout { attempts: 1 } } else { Error::Transport(e.to_string()) })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Transport(format!("HTTP status {}", status.as_u16())));
        }
        let text = resp.body_mut().read_to_string().map_err(|e| {
            if is_timeout(&e) {
                Error::Timeout { attempts: 1 }
            } else {
                Error::Transport(e.to_string())
            }
        })?;
        let parsed: Response =
            serde_json::from_str(&text).map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
        match parsed.score {
            None => Err(Error::Protocol("response has no \"score\" field".into())),
            Some(s) if (0.0..=1.0).contains(&s) => Ok(s),
            Some(s) => Err(Error::Protocol(format!("score {s} outside [0, 1]"))),
        }
    }

    /// Score one text, retrying timeouts and transport failures with
    /// exponential backoff. Protocol errors are not retried.
    pub fn score_text(&self, text: &str) -> Result<RemoteScore> {
        let mut delay = Duration::from_millis(self.cfg.backoff_ms);
        let mut attempt = 0;
        loop {
            match self.attempt(text) {
                Ok(score) => return Ok(RemoteScore { score, retries: attempt }),
                Err(e @ (Error::Timeout { .. } | Error::Transport(_))) if attempt < self.cfg.retries => {
                    log::warn!("remote scorer attempt {} failed: {e}", attempt + 1);
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(Error::Timeout { .. }) => return Err(Error::Timeout { attempts: attempt + 1 }),
                Err(e) => return Err(e),
            }
        }
    }

    pub fn score(&self, doc: &ContextDocument) -> Result<RemoteScore> {
        self.score_text(&doc.text())
    }

    /// Score many documents with at most `max_concurrency` requests in
    /// flight. Results keep the input order.
    pub fn score_many(&self, docs: &[ContextDocument]) -> Result<Vec<Result<RemoteScore>>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.max_concurrency.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(pool.install(|| docs.par_iter().map(|d| self.score(d)).collect()))
    }
}
