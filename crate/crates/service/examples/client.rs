//! Starts the service on a free local port and talks to it over plain
//! HTTP/1.1, the way any JSON client would.
//!
//! cargo run -p crt-design-service --example client
//!
//! Point it at a running server instead with `client http://127.0.0.1:8080`.

use std::io::{Read, Write};
use std::net::TcpStream;

use crt_design_service::{router, ServiceConfig};
use serde_json::{json, Value};

fn request(addr: &str, method: &str, path: &str, body: Option<&Value>) -> std::io::Result<(u16, Value)> {
    let mut stream = TcpStream::connect(addr)?;
    let payload = body.map(Value::to_string).unwrap_or_default();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    let mut raw = String::new();
    stream.read_to_string(&mut raw)?;
    let (head, body) = raw.split_once("\r\n\r\n").unwrap_or((&raw, ""));
    let status = head
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    Ok((status, serde_json::from_str(body).unwrap_or(Value::Null)))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let addr = match std::env::args().nth(1) {
        Some(url) => url
            .trim_start_matches("http://")
            .trim_end_matches('/')
            .to_string(),
        None => {
            let rt = tokio::runtime::Runtime::new()?;
            let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
            let addr = listener.local_addr()?.to_string();
            let app = router(&ServiceConfig::default());
            std::thread::spawn(move || rt.block_on(async { axum::serve(listener, app).await }));
            addr
        }
    };

    let (_, health) = request(&addr, "GET", "/v1/health", None)?;
    println!("health: {health}");

    let scenario = json!({
        "budget": 100000, "cluster_cost": 500, "indiv_cost": 50,
        "rho_y": 0.05, "rho_x": 0.75, "beta_hte": 0.2,
    });
    let (status, lod) = request(&addr, "POST", "/v1/lod/hte", Some(&scenario))?;
    let r = &lod["result"];
    println!(
        "lod/hte {status}: m={} n={} power={:.3}",
        r["m"],
        r["n"],
        r["power"][0]["power"].as_f64().unwrap_or(f64::NAN)
    );

    let robust = json!({
        "budget": 100000, "cluster_cost": 500, "indiv_cost": 50,
        "rho_y_min": 0.005, "rho_y_max": 0.2, "rho_x_min": 0.1, "rho_x_max": 1.0, "lambda": 0.6,
    });
    let (status, mm) = request(&addr, "POST", "/v1/maximin/compound", Some(&robust))?;
    let r = &mm["result"];
    println!(
        "maximin/compound {status}: m={} n={} min RE={:.4} ({:.0} ms)",
        r["m"],
        r["n"],
        r["min_value"].as_f64().unwrap_or(f64::NAN),
        mm["compute_ms"].as_f64().unwrap_or(0.0)
    );

    let bad = json!({ "budget": 100000, "cluster_cost": 500, "indiv_cost": 50, "rho_y": 0.05, "rho_x": 0.5, "lambda": 2 });
    let (status, err) = request(&addr, "POST", "/v1/lod/compound", Some(&bad))?;
    println!("lod/compound {status}: {}", err["error"]);
    Ok(())
}
