//! HTTP backends for a model inference service.
//!
//! Wire schema (JSON over HTTP POST, batch order preserved in responses):
//!
//! | endpoint       | request                                                   | response                                   |
//! |----------------|-----------------------------------------------------------|--------------------------------------------|
//! | `/v1/extract`  | `{"texts": [..]}`                                         | `{"acus": [[..], ..]}`                     |
//! | `/v1/entail`   | `{"items": [{"premise", "hypothesis", "context"?}, ..]}`  | `{"results": [{"label", "probability"}]}`  |
//! | `/v1/score`    | `{"candidate", "reference", "direction"}`                 | `{"score"}`                                |
//! | `/v1/generate` | `{"source", "num_candidates"}`                            | `{"candidates": [..]}`                     |
//! | `/v1/health`   | `GET`                                                     | `{"status", "models": [..]}`               |
//!
//! In contextual mode `context` carries the text the unit was extracted
//! from; how premise, context and hypothesis are assembled into model input
//! is up to the service.

use std::time::Duration;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::{CheckMode, CheckRequest, Checker, Extractor, ACU_DELIMITER};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractResponse {
    pub acus: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailItem {
    pub premise: String,
    pub hypothesis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailRequest {
    pub items: Vec<EntailItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailResult {
    pub label: u8,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailResponse {
    pub results: Vec<EntailResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub candidate: String,
    pub reference: String,
    pub direction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub source: String,
    pub num_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    #[serde(default)]
    pub models: Vec<String>,
}

/// Blocking JSON client for the inference service.
#[derive(Debug, Clone)]
pub struct RemoteClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self::with_timeout(endpoint, Duration::from_secs(300))
    }

    pub fn with_timeout(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .timeout_connect(Some(Duration::from_secs(5)))
            .build();
        RemoteClient {
            endpoint: endpoint.into().trim_end_matches('/').to_owned(),
            agent: ureq::Agent::new_with_config(config),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        backend: &str,
        path: &str,
        body: &Req,
    ) -> Result<Resp> {
        let url = format!("{}{path}", self.endpoint);
        self.agent
            .post(&url)
            .send_json(body)
            .and_then(|mut r| r.body_mut().read_json::<Resp>())
            .map_err(|e| Error::backend(backend, format!("POST {url}: {e}")))
    }

    pub fn health(&self) -> Result<HealthResponse> {
        let url = format!("{}/v1/health", self.endpoint);
        self.agent
            .get(&url)
            .call()
            .and_then(|mut r| r.body_mut().read_json())
            .map_err(|e| Error::backend("remote", format!("GET {url}: {e}")))
    }

    pub fn extract(&self, texts: &[&str]) -> Result<Vec<Vec<String>>> {
        let req = ExtractRequest {
            texts: texts.iter().map(|t| t.to_string()).collect(),
        };
        let resp: ExtractResponse = self.post("remote-extractor", "/v1/extract", &req)?;
        if resp.acus.len() != texts.len() {
            return Err(Error::backend(
                "remote-extractor",
                format!("{} results for {} texts", resp.acus.len(), texts.len()),
            ));
        }
        Ok(resp.acus)
    }

    pub fn entail(&self, items: Vec<EntailItem>) -> Result<Vec<EntailResult>> {
        let n = items.len();
        let resp: EntailResponse =
            self.post("remote-checker", "/v1/entail", &EntailRequest { items })?;
        if resp.results.len() != n {
            return Err(Error::backend(
                "remote-checker",
                format!("{} results for {n} items", resp.results.len()),
            ));
        }
        Ok(resp.results)
    }

    pub fn score(&self, candidate: &str, reference: &str, direction: &str) -> Result<f64> {
        let req = ScoreRequest {
            candidate: candidate.to_owned(),
            reference: reference.to_owned(),
            direction: direction.to_owned(),
        };
        let resp: ScoreResponse = self.post("remote-scorer", "/v1/score", &req)?;
        if !resp.score.is_finite() {
            return Err(Error::backend("remote-scorer", "non-finite score"));
        }
        Ok(resp.score.clamp(0.0, 1.0))
    }

    pub fn generate(&self, source: &str, num_candidates: usize) -> Result<Vec<String>> {
        let req = GenerateRequest {
            source: source.to_owned(),
            num_candidates,
        };
        let resp: GenerateResponse = self.post("remote-generator", "/v1/generate", &req)?;
        Ok(resp.candidates)
    }
}

#[derive(Debug, Clone)]
pub struct RemoteExtractor {
    client: RemoteClient,
}

impl RemoteExtractor {
    pub fn new(client: RemoteClient) -> Self {
        RemoteExtractor { client }
    }
}

impl Extractor for RemoteExtractor {
    fn name(&self) -> &str {
        "remote-extractor"
    }

    fn generate(&self, text: &str) -> Result<String> {
        self.generate_batch(&[text]).map(|mut v| v.remove(0))
    }

    fn generate_batch(&self, texts: &[&str]) -> Result<Vec<String>> {
        Ok(self
            .client
            .extract(texts)?
            .into_iter()
            .map(|units| units.join(ACU_DELIMITER))
            .collect())
    }

    fn concurrent(&self) -> bool {
        false
    }
}

/// Service-backed entailment checker. The service's probability is
/// re-binarized locally against `threshold`.
#[derive(Debug, Clone)]
pub struct RemoteChecker {
    client: RemoteClient,
    pub mode: CheckMode,
    pub threshold: f64,
}

impl RemoteChecker {
    pub fn new(client: RemoteClient, mode: CheckMode, threshold: f64) -> Self {
        RemoteChecker {
            client,
            mode,
            threshold,
        }
    }
}

impl Checker for RemoteChecker {
    fn name(&self) -> &str {
        "remote-checker"
    }

    fn mode(&self) -> CheckMode {
        self.mode
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn entailment_probability(&self, request: &CheckRequest<'_>) -> Result<f64> {
        self.probability_batch(std::slice::from_ref(request))
            .map(|v| v[0])
    }

    fn probability_batch(&self, requests: &[CheckRequest<'_>]) -> Result<Vec<f64>> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        let items = requests
            .iter()
            .map(|r| EntailItem {
                premise: r.target.to_owned(),
                hypothesis: r.acu.text.clone(),
                context: r.source.map(str::to_owned),
            })
            .collect();
        let results = self.client.entail(items)?;
        results
            .into_iter()
            .map(|r| {
                if (0.0..=1.0).contains(&r.probability) {
                    Ok(r.probability)
                } else {
                    Err(Error::backend(
                        self.name(),
                        format!("probability {} outside [0, 1]", r.probability),
                    ))
                }
            })
            .collect()
    }

    fn concurrent(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_messages_round_trip() {
        let req = EntailRequest {
            items: vec![
                EntailItem {
                    premise: "p".into(),
                    hypothesis: "h".into(),
                    context: None,
                },
                EntailItem {
                    premise: "p".into(),
                    hypothesis: "h".into(),
                    context: Some("c".into()),
                },
            ],
        };
        let json = serde_json::to_string(&req).unwrap();
        assert!(!json.contains("\"context\":null"));
        assert_eq!(serde_json::from_str::<EntailRequest>(&json).unwrap(), req);
        let resp: ExtractResponse = serde_json::from_str(r#"{"acus":[["a","b"],[]]}"#).unwrap();
        assert_eq!(resp.acus[0], ["a", "b"]);
    }

    #[test]
    fn unreachable_service_is_backend_error() {
        // Port 9 (discard) on localhost is expected to refuse connections.
        let client = RemoteClient::with_timeout("http://127.0.0.1:9", Duration::from_secs(2));
        let err = RemoteExtractor::new(client).generate("text").unwrap_err();
        assert_eq!(err.class(), crate::error::ErrorClass::Backend);
    }
}
