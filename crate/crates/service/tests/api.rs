use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use crt_design::ScenarioConfig;
use crt_design_service::{router, schema, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(&ServiceConfig::default())
}

async fn send(app: Router, req: Request<Body>) -> (StatusCode, Value) {
    let res = app.oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn post(uri: &str, body: Value) -> (StatusCode, Value) {
    post_to(app(), uri, body).await
}

async fn post_to(app: Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    send(app, req).await
}

fn k10() -> Value {
    json!({ "budget": 100000, "cluster_cost": 500, "indiv_cost": 50, "min_clusters": 6 })
}

fn with(mut base: Value, extra: Value) -> Value {
    for (k, v) in extra.as_object().unwrap() {
        base[k] = v.clone();
    }
    base
}

fn kdpp() -> Value {
    json!({
        "budget": 20000, "cluster_cost": 100, "indiv_cost": 5,
        "min_cluster_size": 8, "max_cluster_size": 40, "min_clusters": 66,
        "reference_min_cluster_size": 2, "reference_min_clusters": 6,
        "rho_y_min": 0.005, "rho_y_max": 0.1, "rho_x_min": 0.1, "rho_x_max": 0.75,
    })
}

fn assert_field(body: &Value, field: &str) {
    assert_eq!(body["error"]["field"], field, "{body}");
}

#[tokio::test]
async fn health_and_schema() {
    let (s, body) = send(app(), Request::get("/v1/health").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["ready"], true);

    let (s, body) = send(app(), Request::get("/v1/schema").body(Body::empty()).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert!(body["paths"]["/v1/maximin/{kind}"]["post"].is_object());
}

#[test]
fn schema_lists_every_scenario_key() {
    let full = ScenarioConfig {
        budget: Some(1.0),
        cluster_cost: Some(1.0),
        indiv_cost: Some(1.0),
        var_y: Some(1.0),
        var_x: Some(1.0),
        var_w: Some(0.25),
        rho_y: Some(0.1),
        rho_x: Some(0.1),
        rho_y_min: Some(0.1),
        rho_y_max: Some(0.1),
        rho_x_min: Some(0.1),
        rho_x_max: Some(0.1),
        grid_steps: Some(1),
        rho_y_levels: Some(vec![0.1]),
        min_cluster_size: Some(2),
        max_cluster_size: Some(3),
        min_clusters: Some(2),
        reference_min_cluster_size: Some(2),
        reference_max_cluster_size: Some(3),
        reference_min_clusters: Some(2),
        lambda: Some(0.5),
        rounding: Some(Default::default()),
        compound_weighting: Some(Default::default()),
        m: Some(2),
        n: Some(2),
        beta_ate: Some(0.1),
        beta_hte: Some(0.1),
        alpha: Some(0.05),
        approximation: Some(Default::default()),
        ate_variance: Some(Default::default()),
        test: Some(crt_design::EffectTest::Hte),
    };
    let value = serde_json::to_value(full).unwrap();
    let mut config_keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
    let mut schema_keys: Vec<&str> = schema::SCENARIO_KEYS.iter().map(|k| k.0).collect();
    config_keys.sort_unstable();
    schema_keys.sort_unstable();
    assert_eq!(config_keys, schema_keys);
}

#[tokio::test]
async fn lod_hte_row() {
    let (s, body) = post(
        "/v1/lod/hte",
        with(k10(), json!({ "rho_y": 0.05, "rho_x": 0.75, "beta_hte": 0.2 })),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let r = &body["result"];
    assert_eq!((r["m"].as_u64(), r["n"].as_u64()), (Some(22), Some(62)));
    assert_eq!(r["capped"], false);
    assert!((r["power"][0]["power"].as_f64().unwrap() - 0.830).abs() < 0.005);
    assert_eq!(body["inputs"]["rho_x"], 0.75);
    assert_eq!(body["schema_version"], "1");
    assert!(body["compute_ms"].as_f64().unwrap() >= 0.0);
}

#[tokio::test]
async fn lod_below_condition_is_capped() {
    let (s, body) = post("/v1/lod/hte", with(k10(), json!({ "rho_y": 0.05, "rho_x": 0.1 }))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["result"]["capped"], true);
    assert_eq!(body["result"]["condition_satisfied"], false);
}

#[tokio::test]
async fn lod_compound_row() {
    let body = with(k10(), json!({ "rho_y": 0.05, "rho_x": 0.5, "lambda": 0.6 }));
    let (s, body) = post("/v1/lod/compound", body).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        (body["result"]["m"].as_u64(), body["result"]["n"].as_u64()),
        (Some(17), Some(74))
    );
}

#[tokio::test]
async fn validation_errors_name_the_field() {
    let (s, body) = post(
        "/v1/lod/compound",
        with(k10(), json!({ "rho_y": 0.05, "rho_x": 0.5, "lambda": 1.5 })),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "lambda");

    let (s, body) = post("/v1/lod/hte", with(k10(), json!({ "rho_y": 0.05 }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "rho_x");

    let (s, body) = post("/v1/lod/hte", with(k10(), json!({ "bugdet": 1 }))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "bugdet");

    let (s, body) = post("/v1/lod/hte", json!({ "budget": "lots" })).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "budget");

    let (s, body) = post("/v1/power/curve", json!({ "rho_y_levels": [0.1, "x"] })).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "rho_y_levels[1]");

    let (s, body) = post("/v1/lod/median", k10()).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_field(&body, "kind");

    let (s, body) = post(
        "/v1/lod/hte",
        with(k10(), json!({ "budget": 10 , "rho_y": 0.1, "rho_x": 0.5})),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(body["error"]["field"].is_string());
}

#[tokio::test]
async fn non_json_body_is_rejected() {
    let req = Request::post("/v1/lod/hte").body(Body::from("budget=1")).unwrap();
    let (s, body) = send(app(), req).await;
    assert_eq!(s, StatusCode::UNSUPPORTED_MEDIA_TYPE);
    assert_field(&body, "$");
}

#[tokio::test]
async fn degenerate_input_is_422() {
    let body =
        json!({ "m": 10, "n": 2, "rho_y": 0.1, "rho_x": 0.5, "beta_hte": 0.2, "approximation": "student_t" });
    let (s, body) = post("/v1/power/point", body).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["kind"], "degenerate");
}

#[tokio::test]
async fn unknown_route_is_404() {
    let (s, body) = post("/v2/lod/hte", k10()).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_field(&body, "$");
}

#[tokio::test]
async fn maximin_reference_setup() {
    let body = with(
        k10(),
        json!({ "rho_y_min": 0.005, "rho_y_max": 0.2, "rho_x_min": 0.1, "rho_x_max": 1.0 }),
    );
    let (s, res) = post("/v1/maximin/hte", body.clone()).await;
    assert_eq!(s, StatusCode::OK);
    let r = &res["result"];
    assert_eq!((r["m"].as_u64(), r["n"].as_u64()), (Some(22), Some(62)));
    assert!((r["min_value"].as_f64().unwrap() - 0.68).abs() < 0.02);
    assert!(r.get("surface").is_none());

    let small = with(body, json!({ "grid_steps": 4, "max_cluster_size": 30 }));
    let (s, res) = post("/v1/maximin/hte?surface=true", small).await;
    assert_eq!(s, StatusCode::OK);
    let r = &res["result"];
    let rows = r["surface"].as_array().unwrap();
    assert_eq!(rows.len() as u64, r["candidates"].as_u64().unwrap() * 25);
    assert_eq!(rows[0].as_object().unwrap().len(), 7);
}

#[tokio::test]
async fn maximin_case_study() {
    let (s, res) = post("/v1/maximin/compound", with(kdpp(), json!({ "lambda": 0.5 }))).await;
    assert_eq!(s, StatusCode::OK, "{res}");
    assert_eq!(
        (res["result"]["m"].as_u64(), res["result"]["n"].as_u64()),
        (Some(26), Some(86))
    );
}

#[tokio::test]
async fn oversized_sweeps_are_413() {
    let body = with(
        k10(),
        json!({ "rho_y_min": 0.005, "rho_y_max": 0.2, "rho_x_min": 0.1, "rho_x_max": 1.0, "grid_steps": 100 }),
    );
    let (s, res) = post("/v1/maximin/hte", body).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
    assert_field(&res, "grid_steps");

    let tight = router(&ServiceConfig {
        max_cells: 100,
        ..Default::default()
    });
    let body = json!({ "m": 27, "n": 85, "beta_hte": 0.2, "rho_y_min": 0.0, "rho_y_max": 0.1,
        "rho_x_min": 0.0, "rho_x_max": 0.5, "grid_steps": 10 });
    let (s, _) = post_to(tight, "/v1/power/bounds", body).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn power_bounds_case_study() {
    let body = with(
        kdpp(),
        json!({ "m": 27, "n": 85, "var_y": 10.27 * 10.27, "var_x": 4.031 * 4.031, "beta_hte": -0.375, "test": "hte" }),
    );
    let (s, res) = post("/v1/power/bounds", body).await;
    assert_eq!(s, StatusCode::OK, "{res}");
    let b = &res["result"]["bounds"][0];
    assert!((b["lower"].as_f64().unwrap() - 0.687).abs() < 0.005, "{b}");
    assert!((b["upper"].as_f64().unwrap() - 0.943).abs() < 0.005, "{b}");
}

#[tokio::test]
async fn power_curve_records() {
    let body = with(
        k10(),
        json!({ "m": 22, "beta_hte": 0.2, "rho_y_min": 0.005, "rho_y_max": 0.2, "rho_x_min": 0.1, "rho_x_max": 1.0, "grid_steps": 10 }),
    );
    let (s, res) = post("/v1/power/curve", body).await;
    assert_eq!(s, StatusCode::OK, "{res}");
    assert_eq!(res["result"]["mode"], "curve");
    assert_eq!(res["result"]["records"].as_array().unwrap().len(), 4 * 11);
}

#[tokio::test]
async fn identical_requests_give_identical_results() {
    let body = with(
        k10(),
        json!({ "rho_y_min": 0.005, "rho_y_max": 0.2, "rho_x_min": 0.1, "rho_x_max": 1.0,
        "grid_steps": 10, "lambda": 0.6 }),
    );
    let calls = (0..8).map(|_| {
        let b = body.clone();
        tokio::spawn(async move { post("/v1/maximin/compound?surface=true", b).await })
    });
    let mut outs = Vec::new();
    for c in calls {
        let (s, mut v) = c.await.unwrap();
        assert_eq!(s, StatusCode::OK);
        v.as_object_mut().unwrap().remove("compute_ms");
        outs.push(v);
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn environment_settings() {
    let env = |k: &str| match k {
        "CRT_DESIGN_PORT" => Some("9000".to_string()),
        "CRT_DESIGN_BIND" => Some("0.0.0.0".to_string()),
        "CRT_DESIGN_WORKERS" => Some("3".to_string()),
        "CRT_DESIGN_CORS_ORIGIN" => Some("http://localhost:5173".to_string()),
        _ => None,
    };
    let c = ServiceConfig::from_lookup(env).unwrap();
    assert_eq!(c.addr().to_string(), "0.0.0.0:9000");
    assert_eq!(c.workers, Some(3));
    assert_eq!(c.max_cells, 201 * 61 * 61);
    let bad = ServiceConfig::from_lookup(|k| (k == "CRT_DESIGN_PORT").then(|| "http".to_string()));
    assert_eq!(bad.unwrap_err().field, "CRT_DESIGN_PORT");
}

#[tokio::test]
async fn cors_preflight() {
    let app = router(&ServiceConfig {
        cors_origin: Some("http://localhost:5173".into()),
        ..Default::default()
    });
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/v1/lod/hte")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert_eq!(
        res.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(),
        "http://localhost:5173"
    );
}
