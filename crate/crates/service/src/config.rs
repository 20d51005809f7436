use std::net::{IpAddr, SocketAddr};

use crate::ApiError;

/// Cell cap of a single maximin request: 201 cluster sizes on a 61 x 61 grid.
pub const DEFAULT_MAX_CELLS: usize = 201 * 61 * 61;

/// Startup settings, read once from the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    /// Async worker threads; `None` uses one per core.
    pub workers: Option<usize>,
    /// Allowed browser origin; `*` allows any.
    pub cors_origin: Option<String>,
    pub max_cells: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: IpAddr::from([127, 0, 0, 1]),
            port: 8080,
            workers: None,
            cors_origin: None,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: String) -> Result<T, ApiError> {
    value
        .trim()
        .parse()
        .map_err(|_| ApiError::validation(key, format!("cannot parse '{value}'")))
}

impl ServiceConfig {
    /// Reads `CRT_DESIGN_BIND`, `CRT_DESIGN_PORT`, `CRT_DESIGN_WORKERS`,
    /// `CRT_DESIGN_CORS_ORIGIN` and `CRT_DESIGN_MAX_CELLS`.
    pub fn from_env() -> Result<Self, ApiError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ApiError> {
        let mut c = ServiceConfig::default();
        if let Some(v) = get("CRT_DESIGN_BIND") {
            c.bind = parse("CRT_DESIGN_BIND", v)?;
        }
        if let Some(v) = get("CRT_DESIGN_PORT") {
            c.port = parse("CRT_DESIGN_PORT", v)?;
        }
        if let Some(v) = get("CRT_DESIGN_WORKERS") {
            let w: usize = parse("CRT_DESIGN_WORKERS", v)?;
            if w == 0 {
                return Err(ApiError::validation("CRT_DESIGN_WORKERS", "must be positive"));
            }
            c.workers = Some(w);
        }
        c.cors_origin = get("CRT_DESIGN_CORS_ORIGIN").filter(|s| !s.is_empty());
        if let Some(v) = get("CRT_DESIGN_MAX_CELLS") {
            c.max_cells = parse("CRT_DESIGN_MAX_CELLS", v)?;
        }
        Ok(c)
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}
