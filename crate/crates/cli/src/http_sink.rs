use std::time::Duration;

use fdf_core::route::{BusRegistration, RouteNetwork};
use fdf_datacenter::BusReport;
use fdf_sim::{ReportSink, SinkError};
use serde::Serialize;
use serde_json::Value;
use ureq::Agent;

/// Posts reports to a running datacenter over its HTTP API.
pub struct HttpSink {
    base: String,
    agent: Agent,
}

impl HttpSink {
    /// `addr` is `host:port` or a full `http://` URL.
    pub fn new(addr: &str) -> Self {
        let base = if addr.contains("://") { addr.trim_end_matches('/').to_string() } else { format!("http://{addr}") };
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(10)))
            .build()
            .into();
        Self { base, agent }
    }

    fn send<B: Serialize>(&self, path: &str, body: &B) -> Result<(u16, Value), SinkError> {
        let url = format!("{}{path}", self.base);
        let mut resp = self.agent.post(&url).send_json(body).map_err(|e| SinkError(format!("POST {url}: {e}")))?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_json::<Value>().unwrap_or(Value::Null);
        Ok((status, body))
    }
}

fn rejected(what: &str, status: u16, body: &Value) -> SinkError {
    let message = body.get("message").and_then(Value::as_str).unwrap_or("no message");
    SinkError(format!("{what} rejected with {status}: {message}"))
}

impl ReportSink for HttpSink {
    fn register(&mut self, network: &RouteNetwork, buses: &[BusRegistration]) -> Result<(), SinkError> {
        for route in &network.routes {
            // 409: the service already knows this route id, typically from its routes file
            match self.send("/routes", route)? {
                (201 | 409, _) => {}
                (status, body) => return Err(rejected(&format!("route {}", route.route_id), status, &body)),
            }
        }
        for bus in buses {
            match self.send("/buses", bus)? {
                (201, _) => {}
                (status, body) => return Err(rejected(&format!("bus {}", bus.bus_id), status, &body)),
            }
        }
        Ok(())
    }

    fn post(&mut self, report: &BusReport) -> Result<u64, SinkError> {
        match self.send("/reports", report)? {
            (200, body) => body
                .get("version")
                .and_then(Value::as_u64)
                .ok_or_else(|| SinkError("report response has no version".into())),
            (status, body) => Err(rejected(&format!("report from {}", report.bus_id), status, &body)),
        }
    }
}
