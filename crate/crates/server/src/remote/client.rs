use std::time::Duration;

use reqwest::blocking::{Client, Response};
use serde::de::DeserializeOwned;
use serde_json::json;

use super::api::{ErrorBody, ResultResponse, StatusResponse, SubmitRequest, SubmitResponse};
use crate::jobs::{JobError, JobStatus};

/// Blocking client for the emulator's `/v1` API.
#[derive(Debug, Clone)]
pub struct RemoteClient {
    base: String,
    http: Client,
}

impl RemoteClient {
    pub fn new(base_url: &str, timeout: Duration) -> Result<Self, JobError> {
        let http = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| JobError::new("BackendUnavailableError", e.to_string()))?;
        Ok(Self {
            base: base_url.trim_end_matches('/').to_string(),
            http,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn unavailable(&self, e: reqwest::Error) -> JobError {
        JobError::new(
            "BackendUnavailableError",
            format!("remote service at {} is unreachable: {e}", self.base),
        )
    }

    fn decode<T: DeserializeOwned>(&self, resp: Response) -> Result<T, JobError> {
        let status = resp.status();
        let body = resp.text().map_err(|e| self.unavailable(e))?;
        if status.is_success() {
            return serde_json::from_str(&body).map_err(|e| {
                JobError::new("RemoteProtocolError", format!("unexpected response body: {e}"))
            });
        }
        let mut err = match serde_json::from_str::<ErrorBody>(&body) {
            Ok(b) => b.error,
            Err(_) => JobError::new("RemoteError", body.trim().to_string()),
        };
        err.details = Some(Box::new(json!({ "http_status": status.as_u16() })));
        Err(err)
    }

    pub fn submit(&self, request: &SubmitRequest) -> Result<SubmitResponse, JobError> {
        let resp = self
            .http
            .post(format!("{}/v1/jobs", self.base))
            .json(request)
            .send()
            .map_err(|e| self.unavailable(e))?;
        self.decode(resp)
    }

    pub fn status(&self, remote_id: &str) -> Result<JobStatus, JobError> {
        let resp = self
            .http
            .get(format!("{}/v1/jobs/{remote_id}", self.base))
            .send()
            .map_err(|e| self.unavailable(e))?;
        Ok(self.decode::<StatusResponse>(resp)?.status)
    }

    pub fn result(&self, remote_id: &str) -> Result<ResultResponse, JobError> {
        let resp = self
            .http
            .get(format!("{}/v1/jobs/{remote_id}/result", self.base))
            .send()
            .map_err(|e| self.unavailable(e))?;
        self.decode(resp)
    }
}
