//! Client for OpenAI-compatible completion endpoints.
//!
//! Generation posts `{model, prompt | messages, max_tokens, temperature: 0}`.
//! Scoring posts the text itself as the prompt with `echo: true` and
//! `logprobs: 0`, then keeps the log-probabilities of the echoed prompt tokens
//! (those whose `text_offset` lies inside the prompt). The first token has no
//! conditional probability and is skipped when the server reports `null`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::backend::{BackendError, ScoringBackend, TextScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ApiStyle {
    /// `POST {base}/completions` with a raw prompt.
    #[default]
    Completions,
    /// `POST {base}/chat/completions` with a single user message.
    Chat,
}

#[derive(Debug, Clone)]
pub struct OpenAiCompatBackend {
    base_url: String,
    model: String,
    api_key: Option<String>,
    style: ApiStyle,
    agent: ureq::Agent,
}

impl OpenAiCompatBackend {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .http_status_as_error(false)
            .build()
            .into();
        OpenAiCompatBackend {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            api_key: None,
            style: ApiStyle::Completions,
            agent,
        }
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key.filter(|k| !k.is_empty());
        self
    }

    pub fn with_style(mut self, style: ApiStyle) -> Self {
        self.style = style;
        self
    }

    fn post(&self, route: &str, body: &Value) -> Result<Value, BackendError> {
        let request_id = uuid::Uuid::new_v4().to_string();
        let url = format!("{}/{}", self.base_url, route);
        let mut req = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .header("x-request-id", &request_id);
        if let Some(key) = &self.api_key {
            req = req.header("authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| BackendError::transport(format!("{url}: {e}")).with_request_id(&request_id))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::transport(e.to_string()).with_request_id(&request_id))?;
        if status >= 500 || status == 429 {
            return Err(BackendError::transport(format!("HTTP {status}: {}", truncate(&text)))
                .with_request_id(&request_id));
        }
        if status >= 400 {
            return Err(BackendError::protocol(format!("HTTP {status}: {}", truncate(&text)))
                .with_request_id(&request_id));
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| {
            BackendError::protocol(format!("response is not JSON: {e}")).with_request_id(&request_id)
        })?;
        Ok(value)
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(200).collect()
}

impl ScoringBackend for OpenAiCompatBackend {
    fn identity(&self) -> String {
        let style = match self.style {
            ApiStyle::Completions => "completions",
            ApiStyle::Chat => "chat",
        };
        format!("openai-compatible:{style}:{}@{}", self.model, self.base_url)
    }

    fn generate(&self, prompt: &str, max_tokens: usize) -> Result<String, BackendError> {
        match self.style {
            ApiStyle::Completions => {
                let body = json!({
                    "model": self.model,
                    "prompt": prompt,
                    "max_tokens": max_tokens,
                    "temperature": 0,
                });
                let v = self.post("completions", &body)?;
                v.pointer("/choices/0/text")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| BackendError::protocol("missing choices[0].text"))
            }
            ApiStyle::Chat => {
                let body = json!({
                    "model": self.model,
                    "messages": [{"role": "user", "content": prompt}],
                    "max_tokens": max_tokens,
                    "temperature": 0,
                });
                let v = self.post("chat/completions", &body)?;
                v.pointer("/choices/0/message/content")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .ok_or_else(|| BackendError::protocol("missing choices[0].message.content"))
            }
        }
    }

    fn score(&self, text: &str) -> Result<TextScore, BackendError> {
        let body = json!({
            "model": self.model,
            "prompt": text,
            "max_tokens": 1,
            "temperature": 0,
            "echo": true,
            "logprobs": 0,
        });
        let v = self.post("completions", &body)?;
        parse_echo_logprobs(&v, text)
    }
}

/// Extract the prompt-token log-probabilities from an echoed completion.
pub fn parse_echo_logprobs(v: &Value, prompt: &str) -> Result<TextScore, BackendError> {
    let logprobs = v
        .pointer("/choices/0/logprobs")
        .ok_or_else(|| BackendError::unsupported("response carries no logprobs; scoring needs echo+logprobs"))?;
    let values = logprobs
        .get("token_logprobs")
        .and_then(Value::as_array)
        .ok_or_else(|| BackendError::protocol("missing logprobs.token_logprobs"))?;
    let prompt_chars = prompt.chars().count() as u64;
    let keep = match logprobs.get("text_offset").and_then(Value::as_array) {
        Some(offsets) if offsets.len() == values.len() => offsets
            .iter()
            .map(|o| o.as_u64().map(|o| o < prompt_chars).unwrap_or(false))
            .collect::<Vec<_>>(),
        // Without offsets assume one generated token trails the echo.
        _ => (0..values.len()).map(|i| i + 1 < values.len()).collect(),
    };
    let mut out = Vec::new();
    for (value, keep) in values.iter().zip(keep) {
        if !keep {
            continue;
        }
        match value {
            Value::Null => {}
            Value::Number(n) => out.push(
                n.as_f64()
                    .ok_or_else(|| BackendError::protocol("non-finite log-probability"))?,
            ),
            other => return Err(BackendError::protocol(format!("bad log-probability {other}"))),
        }
    }
    if out.is_empty() {
        return Err(BackendError::protocol("no prompt tokens were scored"));
    }
    Ok(TextScore { token_logprobs: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_parsing_uses_offsets() {
        let v = json!({"choices": [{"text": "abc!", "logprobs": {
            "tokens": ["a", "bc", "!"],
            "token_logprobs": [null, -1.5, -0.25],
            "text_offset": [0, 1, 3]
        }}]});
        let s = parse_echo_logprobs(&v, "abc").unwrap();
        assert_eq!(s.token_logprobs, vec![-1.5]);
    }

    #[test]
    fn echo_parsing_without_offsets_drops_last() {
        let v = json!({"choices": [{"logprobs": {"token_logprobs": [-0.5, -1.0, -9.0]}}]});
        let s = parse_echo_logprobs(&v, "ab").unwrap();
        assert_eq!(s.token_logprobs, vec![-0.5, -1.0]);
    }

    #[test]
    fn missing_logprobs_is_unsupported() {
        let v = json!({"choices": [{"text": "x"}]});
        let e = parse_echo_logprobs(&v, "x").unwrap_err();
        assert_eq!(e.kind, super::super::backend::BackendErrorKind::Unsupported);
    }
}
