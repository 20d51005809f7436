use crt_design::ops::SCHEMA_VERSION;
use serde_json::{json, Map, Value};

/// `(key, JSON type, description)` for every request body key.
pub const SCENARIO_KEYS: &[(&str, &str, &str)] = &[
    ("budget", "number", "total budget"),
    ("cluster_cost", "number", "fixed cost per cluster"),
    ("indiv_cost", "number", "cost per enrolled individual"),
    (
        "var_y",
        "number",
        "outcome variance given the covariate (default 1)",
    ),
    ("var_x", "number", "covariate variance (default 1)"),
    (
        "var_w",
        "number",
        "treatment indicator variance, at most 0.25 (default 0.25)",
    ),
    ("rho_y", "number", "outcome ICC given the covariate, in [0, 1)"),
    ("rho_x", "number", "covariate ICC, in [0, 1]"),
    ("rho_y_min", "number", "lower end of the outcome-ICC range"),
    ("rho_y_max", "number", "upper end of the outcome-ICC range"),
    ("rho_x_min", "number", "lower end of the covariate-ICC range"),
    ("rho_x_max", "number", "upper end of the covariate-ICC range"),
    ("grid_steps", "integer", "intervals per ICC axis (default 40)"),
    ("rho_y_levels", "array", "outcome-ICC levels of a power curve"),
    (
        "min_cluster_size",
        "integer",
        "smallest admissible cluster size (default 2)",
    ),
    ("max_cluster_size", "integer", "largest admissible cluster size"),
    ("min_clusters", "integer", "least number of clusters (default 6)"),
    (
        "reference_min_cluster_size",
        "integer",
        "smallest cluster size of the maximin references",
    ),
    (
        "reference_max_cluster_size",
        "integer",
        "largest cluster size of the maximin references",
    ),
    (
        "reference_min_clusters",
        "integer",
        "least number of clusters of the maximin references",
    ),
    ("lambda", "number", "weight on the average effect, in [0, 1]"),
    ("rounding", "string", "floor | best_neighbor"),
    ("compound_weighting", "string", "unadjusted | consistent"),
    ("m", "integer", "cluster size of a fixed design"),
    (
        "n",
        "integer",
        "clusters of a fixed design (default: what the budget buys)",
    ),
    ("beta_ate", "number", "average effect on the outcome scale"),
    ("beta_hte", "number", "heterogeneity effect on the outcome scale"),
    ("alpha", "number", "two-sided level (default 0.05)"),
    ("approximation", "string", "normal | student_t"),
    ("ate_variance", "string", "residual | total"),
    ("test", "string", "hte | ate"),
];

fn enum_values(description: &str) -> Option<Vec<&str>> {
    description
        .contains(" | ")
        .then(|| description.split(" | ").collect())
}

fn scenario_schema() -> Value {
    let mut props = Map::new();
    for (key, ty, description) in SCENARIO_KEYS {
        let mut p = json!({ "type": ty, "description": description });
        if let Some(values) = enum_values(description) {
            p["enum"] = json!(values);
        }
        if *ty == "array" {
            p["items"] = json!({ "type": "number" });
        }
        props.insert((*key).to_string(), p);
    }
    json!({ "type": "object", "additionalProperties": false, "properties": props })
}

fn post(summary: &str, kinds: &[&str], extra: Option<Value>) -> Value {
    let mut params = vec![json!({
        "name": "kind", "in": "path", "required": true,
        "schema": { "type": "string", "enum": kinds }
    })];
    params.extend(extra);
    json!({
        "post": {
            "summary": summary,
            "parameters": params,
            "requestBody": {
                "required": true,
                "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Scenario" } } }
            },
            "responses": {
                "200": { "$ref": "#/components/responses/Ok" },
                "400": { "$ref": "#/components/responses/Error" },
                "413": { "$ref": "#/components/responses/Error" },
                "422": { "$ref": "#/components/responses/Error" }
            }
        }
    })
}

/// OpenAPI document describing the service.
pub fn document() -> Value {
    let criteria = ["hte", "ate", "compound"];
    json!({
        "openapi": "3.0.3",
        "info": {
            "title": "crt-design",
            "version": env!("CARGO_PKG_VERSION"),
            "x-schema-version": SCHEMA_VERSION
        },
        "paths": {
            "/v1/health": { "get": { "summary": "Version and readiness", "responses": { "200": { "description": "ready" } } } },
            "/v1/schema": { "get": { "summary": "This document", "responses": { "200": { "description": "OpenAPI document" } } } },
            "/v1/lod/{kind}": post("Locally optimal design", &criteria, None),
            "/v1/maximin/{kind}": post(
                "Maximin design over an ICC rectangle",
                &criteria,
                Some(json!({ "name": "surface", "in": "query", "schema": { "type": "boolean" } })),
            ),
            "/v1/power/{kind}": post("Power at a point, its bounds over a rectangle, or a curve", &["point", "bounds", "curve"], None),
        },
        "components": {
            "schemas": {
                "Scenario": scenario_schema(),
                "Error": {
                    "type": "object",
                    "properties": {
                        "schema_version": { "type": "string" },
                        "error": {
                            "type": "object",
                            "properties": {
                                "status": { "type": "integer" },
                                "kind": { "type": "string", "enum": ["validation", "too_large", "degenerate", "internal"] },
                                "field": { "type": "string" },
                                "message": { "type": "string" }
                            }
                        }
                    }
                }
            },
            "responses": {
                "Ok": {
                    "description": "schema_version, endpoint, inputs (the validated request), result and compute_ms",
                    "content": { "application/json": { "schema": { "type": "object" } } }
                },
                "Error": {
                    "description": "error with the field path of the violated constraint",
                    "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } }
                }
            }
        }
    })
}
