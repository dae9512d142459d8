use std::io::Read;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// One blocking GET. `Err` means no HTTP response was received at all.
pub trait Transport {
    fn get(&self, url: &str, bearer_token: Option<&str>) -> Result<HttpResponse, String>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn get(&self, url: &str, bearer_token: Option<&str>) -> Result<HttpResponse, String> {
        (**self).get(url, bearer_token)
    }
}

#[derive(Debug, Clone)]
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration, user_agent: &str) -> Self {
        Self {
            agent: ureq::AgentBuilder::new()
                .timeout(timeout)
                .user_agent(user_agent)
                .build(),
        }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(
            Duration::from_secs(30),
            concat!("geosid/", env!("CARGO_PKG_VERSION")),
        )
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, bearer_token: Option<&str>) -> Result<HttpResponse, String> {
        let mut request = self.agent.get(url);
        if let Some(token) = bearer_token {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        let response = match request.call() {
            Ok(r) => r,
            Err(ureq::Error::Status(_, r)) => r,
            Err(e) => return Err(e.to_string()),
        };
        let status = response.status();
        let mut body = String::new();
        response
            .into_reader()
            .take(1 << 20)
            .read_to_string(&mut body)
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}
