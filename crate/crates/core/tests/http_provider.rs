use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

use simpeval::embed::{deterministic_vector, fetch_embeddings_http, EmbedError, EmbeddingProvider, ProviderSpec};
use simpeval::harness::{evaluate_corpus, EvalConfig, EvalRecord};
use simpeval::tokenize;

#[derive(Clone, Copy)]
enum Mode {
    Conforming,
    DropLastRow,
    BadRequest,
    FailFirst,
    AlwaysUnavailable,
    Garbage,
}

struct Service {
    endpoint: String,
    requests: Arc<AtomicUsize>,
    bodies: Arc<std::sync::Mutex<Vec<Value>>>,
}

fn json_response(status: u16, body: Value) -> Response<std::io::Cursor<Vec<u8>>> {
    Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(Header::from_bytes("Content-Type", "application/json").unwrap())
}

/// Deterministic-mode embedding service (seed 7, dimension 16) on a random port.
fn spawn(mode: Mode) -> Service {
    let server = Server::http("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", server.server_addr().to_ip().unwrap());
    let requests = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(std::sync::Mutex::new(Vec::new()));
    let (count, seen) = (requests.clone(), bodies.clone());
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let n = count.fetch_add(1, Ordering::SeqCst);
            let mut raw = String::new();
            req.as_reader().read_to_string(&mut raw).unwrap();
            let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
            seen.lock().unwrap().push(body.clone());
            if req.url() != "/embed" || req.method() != &tiny_http::Method::Post {
                let _ = req.respond(json_response(404, json!({"error": "not found"})));
                continue;
            }
            let tokens: Vec<String> =
                body["tokens"].as_array().map_or_else(Vec::new, |a| a.iter().map(|t| t.as_str().unwrap_or_default().to_owned()).collect());
            let mut vectors: Vec<Vec<f64>> = tokens.iter().map(|t| deterministic_vector(7, 16, t)).collect();
            let resp = match mode {
                Mode::Conforming => json_response(200, json!({"dimension": 16, "vectors": vectors})),
                Mode::DropLastRow => {
                    vectors.pop();
                    json_response(200, json!({"dimension": 16, "vectors": vectors}))
                }
                Mode::BadRequest => json_response(400, json!({"error": "malformed request"})),
                Mode::FailFirst if n == 0 => json_response(503, json!({"error": "warming up"})),
                Mode::FailFirst => json_response(200, json!({"dimension": 16, "vectors": vectors})),
                Mode::AlwaysUnavailable => json_response(503, json!({"error": "overloaded"})),
                Mode::Garbage => Response::from_string("not json").with_status_code(200),
            };
            let _ = req.respond(resp);
        }
    });
    Service { endpoint, requests, bodies }
}

fn http(endpoint: &str, timeout: Duration) -> ProviderSpec {
    ProviderSpec::Http { endpoint: endpoint.to_owned(), timeout }
}

#[test]
fn conforming_service_returns_one_row_per_token() {
    let svc = spawn(Mode::Conforming);
    let tokens = tokenize("Der Sandmann kommt, ja.");
    assert_eq!(tokens.len(), 6);
    let m = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokens).unwrap();
    assert_eq!((m.token_count(), m.dimension()), (6, 16));
    assert_eq!(m.row(1), deterministic_vector(7, 16, "sandmann").as_slice());

    let body = &svc.bodies.lock().unwrap()[0];
    assert_eq!(body, &json!({"tokens": ["der", "sandmann", "kommt", ",", "ja", "."]}));
}

#[test]
fn five_tokens_five_rows() {
    let svc = spawn(Mode::Conforming);
    let tokens = tokenize("eins zwei drei vier fünf");
    let m = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokens).unwrap();
    assert_eq!(m.token_count(), 5);
}

#[test]
fn short_response_is_a_count_mismatch() {
    let svc = spawn(Mode::DropLastRow);
    let err = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokenize("eins zwei drei vier fünf")).unwrap_err();
    assert!(matches!(err, EmbedError::TokenCountMismatch { expected: 5, found: 4 }), "{err:?}");
}

#[test]
fn client_errors_are_not_retried() {
    let svc = spawn(Mode::BadRequest);
    let err = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokenize("a b")).unwrap_err();
    match err {
        EmbedError::Protocol { message, .. } => assert!(message.contains("400") && message.contains("malformed request"), "{message}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(svc.requests.load(Ordering::SeqCst), 1);
}

#[test]
fn server_errors_are_retried_once() {
    let svc = spawn(Mode::FailFirst);
    let m = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokenize("a b c")).unwrap();
    assert_eq!(m.token_count(), 3);
    assert_eq!(svc.requests.load(Ordering::SeqCst), 2);

    let svc = spawn(Mode::AlwaysUnavailable);
    let err = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokenize("a b c")).unwrap_err();
    assert!(matches!(err, EmbedError::Protocol { .. }), "{err:?}");
    assert_eq!(svc.requests.load(Ordering::SeqCst), 2);
}

#[test]
fn malformed_body_is_a_protocol_error() {
    let svc = spawn(Mode::Garbage);
    let err = fetch_embeddings_http(&http(&svc.endpoint, Duration::from_secs(5)), &tokenize("a")).unwrap_err();
    assert!(matches!(err, EmbedError::Protocol { .. }), "{err:?}");
}

#[test]
fn silent_endpoint_times_out() {
    // accepts connections but never answers
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        let mut held = Vec::new();
        for stream in listener.incoming() {
            held.push(stream);
        }
    });
    let timeout = Duration::from_millis(300);
    let start = Instant::now();
    let err = fetch_embeddings_http(&http(&endpoint, timeout), &tokenize("a b")).unwrap_err();
    let elapsed = start.elapsed();
    assert!(matches!(err, EmbedError::Timeout { timeout_ms: 300, .. }), "{err:?}");
    // one retry: two attempts of the configured duration each
    assert!(elapsed >= timeout * 2, "{elapsed:?}");
    assert!(elapsed < Duration::from_secs(5), "{elapsed:?}");
}

#[test]
fn refused_connection_is_unreachable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = fetch_embeddings_http(&http(&format!("http://127.0.0.1:{port}"), Duration::from_secs(2)), &tokenize("a")).unwrap_err();
    assert!(matches!(err, EmbedError::Unreachable { .. }), "{err:?}");
}

#[test]
fn service_scores_equal_in_process_scores() {
    let svc = spawn(Mode::Conforming);
    let records: Vec<EvalRecord> = [
        ("a", "Der Sandmann kam jeden Abend.", "Der Sandmann kam am Abend.", "Jeden Abend kam der Sandmann."),
        ("b", "Ein Wolf lebte im Norden.", "Ein Wolf lebte im kalten Norden.", "Im Norden lebte ein Wolf."),
        ("c", "Die Flut kam in der Nacht.", "Nachts kam die Flut. Nachts kam die Flut.", "In der Nacht kam die Flut."),
    ]
    .iter()
    .map(|(id, s, h, r)| EvalRecord {
        source_id: (*id).into(),
        source_text: (*s).into(),
        hypothesis_text: (*h).into(),
        reference_text: (*r).into(),
    })
    .collect();
    let config = EvalConfig::default();
    let remote = evaluate_corpus(&records, &http(&svc.endpoint, Duration::from_secs(5)), &config, "avg");
    let local = evaluate_corpus(&records, &ProviderSpec::Deterministic { seed: 7, dimension: 16 }, &config, "avg");
    assert_eq!(remote.failed(), 0);
    for (r, l) in remote.records.iter().zip(&local.records) {
        let (r, l) = (r.metrics().unwrap(), l.metrics().unwrap());
        for (x, y) in
            [(r.bertscore_precision, l.bertscore_precision), (r.bertscore_recall, l.bertscore_recall), (r.bertscore_f1, l.bertscore_f1)]
        {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }
    let (ra, la) = (remote.average.unwrap(), local.average.unwrap());
    for (x, y) in ra.values().iter().zip(la.values()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn provider_trait_dispatches_to_http() {
    let svc = spawn(Mode::Conforming);
    let spec: ProviderSpec = svc.endpoint.parse().unwrap();
    let m = spec.embed("ignored", &tokenize("hallo welt")).unwrap();
    assert_eq!(m.token_count(), 2);
}
