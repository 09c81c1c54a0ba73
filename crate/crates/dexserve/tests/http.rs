use std::fs;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use dexaction::{ActionChunk, ActionSpace, BoundsPolicy};
use dexserve::{
    run_rollout, serve, write_replay_file, ActInputs, BackendError, PControlBackend,
    PolicyBackend, ReplayBackend, RolloutOptions, ServeError, ServerHandle, ZeroBackend,
};
use serde_json::{json, Value};

fn start(backend: Arc<dyn PolicyBackend>) -> ServerHandle {
    serve(SocketAddr::from(([127, 0, 0, 1], 0)), backend).expect("server starts on a free port")
}

fn client() -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .unwrap()
}

fn post_act(
    client: &reqwest::blocking::Client,
    url: &str,
    body: &Value,
) -> (reqwest::StatusCode, Value) {
    let response = client
        .post(format!("{url}/v1/act"))
        .json(body)
        .send()
        .unwrap();
    let status = response.status();
    let payload: Value = response.json().unwrap();
    (status, payload)
}

#[test]
fn health_reports_identity_and_uptime() {
    let handle = start(Arc::new(ZeroBackend::new(16).unwrap()));
    let response = client()
        .get(format!("{}/v1/health", handle.url()))
        .send()
        .unwrap();
    assert_eq!(response.status(), 200);
    let body: Value = response.json().unwrap();
    assert_eq!(body["status"], "ok");
    assert_eq!(body["backend"], "zero");
    assert_eq!(body["dof"], 16);
    let uptime = body["uptime_s"].as_f64().unwrap();
    assert!(uptime >= 0.0 && uptime.is_finite(), "uptime_s {uptime}");
}

#[test]
fn unknown_routes_are_404() {
    let handle = start(Arc::new(ZeroBackend::default()));
    let http = client();
    let response = http
        .get(format!("{}/v1/nope", handle.url()))
        .send()
        .unwrap();
    assert_eq!(response.status(), 404);
}

#[test]
fn zero_backend_serves_the_requested_shape() {
    let handle = start(Arc::new(ZeroBackend::default()));
    let http = client();

    let (status, body) = post_act(
        &http,
        &handle.url(),
        &json!({ "prompt": "hold still", "state": [1.0, 2.0], "chunk_size": 3 }),
    );
    assert_eq!(status, 200);
    assert_eq!(body["actions"], json!(vec![vec![0.0; 7]; 3]));
    assert_eq!(body["backend"], "zero");
    assert_eq!(body["dof"], 7);
    let latency = body["latency_ms"].as_f64().unwrap();
    assert!(latency >= 0.0 && latency.is_finite(), "latency_ms {latency}");

    // chunk_size defaults to 8 when omitted.
    let (status, body) = post_act(
        &http,
        &handle.url(),
        &json!({ "prompt": "hold still", "state": [1.0] }),
    );
    assert_eq!(status, 200);
    assert_eq!(body["actions"].as_array().unwrap().len(), 8);
}

#[test]
fn pcontrol_answers_with_the_proportional_law() {
    let handle = start(Arc::new(PControlBackend::default()));
    let (status, body) = post_act(
        &client(),
        &handle.url(),
        &json!({ "prompt": "reach 0.5 0.5", "state": [0.0, 0.0], "chunk_size": 2 }),
    );
    assert_eq!(status, 200);
    // Unit gain closes the gap on step one; step two has nothing to do.
    assert_eq!(body["actions"], json!([[0.5, 0.5], [0.0, 0.0]]));
    assert_eq!(body["backend"], "pcontrol");
    assert_eq!(body["dof"], 2);
}

#[test]
fn client_faults_map_to_machine_readable_400s() {
    let handle = start(Arc::new(ZeroBackend::default()));
    let http = client();
    let cases: Vec<(Value, &str)> = vec![
        (json!({ "state": [1.0] }), "MISSING_FIELD"),
        (json!({ "prompt": 5, "state": [1.0] }), "BAD_FIELD"),
        (
            json!({ "prompt": "p", "state": [1.0], "chunk_size": 65 }),
            "CHUNK_SIZE_OUT_OF_RANGE",
        ),
        (
            json!({ "prompt": "p", "state": [1.0], "chunk_size": 0 }),
            "CHUNK_SIZE_OUT_OF_RANGE",
        ),
        (
            json!({
                "prompt": "p",
                "images": { "cam": { "media_type": "image/png", "data": "@@@" } },
            }),
            "BAD_BASE64",
        ),
        (json!({ "prompt": "p" }), "EMPTY_OBSERVATION"),
    ];
    for (body, code) in cases {
        let (status, payload) = post_act(&http, &handle.url(), &body);
        assert_eq!(status, 400, "body {body} -> {payload}");
        assert_eq!(payload["code"], code, "body {body} -> {payload}");
        assert!(
            payload["message"].as_str().is_some_and(|m| !m.is_empty()),
            "{payload}"
        );
    }

    // A body that is not JSON at all gets its own code.
    let response = http
        .post(format!("{}/v1/act", handle.url()))
        .header("content-type", "application/json")
        .body("{oops")
        .send()
        .unwrap();
    assert_eq!(response.status(), 400);
    let payload: Value = response.json().unwrap();
    assert_eq!(payload["code"], "BAD_JSON");
}

/// A backend that lies about finiteness: always answers NaN.
struct NanBackend;

impl PolicyBackend for NanBackend {
    fn name(&self) -> &str {
        "nan"
    }
    fn dof(&self) -> usize {
        1
    }
    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(vec![vec![f64::NAN]; inputs.chunk_size])
    }
}

/// A backend that returns one row too few.
struct ShortBackend;

impl PolicyBackend for ShortBackend {
    fn name(&self) -> &str {
        "short"
    }
    fn dof(&self) -> usize {
        1
    }
    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(vec![vec![0.0]; inputs.chunk_size.saturating_sub(1)])
    }
}

/// A backend that fails outright.
struct FailingBackend;

impl PolicyBackend for FailingBackend {
    fn name(&self) -> &str {
        "failing"
    }
    fn dof(&self) -> usize {
        1
    }
    fn act(&self, _: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        Err(BackendError("checkpoint went missing".to_owned()))
    }
}

#[test]
fn backend_faults_map_to_named_500s_never_200s() {
    let http = client();
    let cases: Vec<(Arc<dyn PolicyBackend>, &str, &str)> = vec![
        (Arc::new(NanBackend), "nan", "NON_FINITE_ACTION"),
        (Arc::new(ShortBackend), "short", "BAD_BACKEND_SHAPE"),
        (Arc::new(FailingBackend), "failing", "BACKEND_ERROR"),
    ];
    for (backend, name, code) in cases {
        let handle = start(backend);
        let (status, payload) = post_act(
            &http,
            &handle.url(),
            &json!({ "prompt": "p", "state": [0.0], "chunk_size": 4 }),
        );
        assert_eq!(status, 500, "{name} -> {payload}");
        assert_eq!(payload["code"], code, "{payload}");
        assert_eq!(payload["backend"], name, "{payload}");
    }
}

#[test]
fn responses_keep_their_shape_across_random_requests() {
    let handle = start(Arc::new(PControlBackend::default()));
    let http = client();
    // Pseudo-random but fixed request mix: chunk sizes and states vary,
    // the response must always be chunk_size x dof and finite.
    let mut seed = 0x2545f491_u64;
    for _ in 0..40 {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let chunk_size = (seed >> 33) % 64 + 1;
        let x = ((seed >> 11) % 2000) as f64 / 1000.0 - 1.0;
        let y = ((seed >> 21) % 2000) as f64 / 1000.0 - 1.0;
        let (status, body) = post_act(
            &http,
            &handle.url(),
            &json!({
                "prompt": "reach 0.25 -0.75",
                "state": [x, y],
                "chunk_size": chunk_size,
            }),
        );
        assert_eq!(status, 200);
        let actions = body["actions"].as_array().unwrap();
        assert_eq!(actions.len() as u64, chunk_size);
        for row in actions {
            let row = row.as_array().unwrap();
            assert_eq!(row.len(), 2);
            assert!(row.iter().all(|v| v.as_f64().unwrap().is_finite()));
        }
    }
}

#[test]
fn concurrent_requests_match_their_serial_answers() {
    let handle = start(Arc::new(PControlBackend::default()));
    let url = handle.url();
    let http = client();

    let request = |i: usize| {
        json!({
            "prompt": "reach 0.5 0.5",
            "state": [i as f64 * 0.01, i as f64 * -0.02],
            "chunk_size": 4,
            "request_id": i.to_string(),
        })
    };

    let serial: Vec<Value> = (0..100)
        .map(|i| {
            let (status, body) = post_act(&http, &url, &request(i));
            assert_eq!(status, 200);
            body["actions"].clone()
        })
        .collect();

    // The same hundred requests again, ten threads of ten: a stateless
    // backend must answer each identically to the serial pass.
    let concurrent: Vec<Value> = thread::scope(|scope| {
        let handles: Vec<_> = (0..10)
            .map(|t| {
                let url = &url;
                let http = &http;
                scope.spawn(move || {
                    (0..10)
                        .map(|j| {
                            let i = t * 10 + j;
                            let (status, body) = post_act(http, url, &request(i));
                            assert_eq!(status, 200);
                            (i, body["actions"].clone())
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut answers = vec![Value::Null; 100];
        for handle in handles {
            for (i, actions) in handle.join().unwrap() {
                answers[i] = actions;
            }
        }
        answers
    });

    assert_eq!(serial, concurrent);
}

/// Zero rows after a configurable delay; lets the drain test hold a
/// request in flight while the server is told to stop.
struct SlowBackend {
    delay: Duration,
}

impl PolicyBackend for SlowBackend {
    fn name(&self) -> &str {
        "slow"
    }
    fn dof(&self) -> usize {
        1
    }
    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        thread::sleep(self.delay);
        Ok(vec![vec![0.0]; inputs.chunk_size])
    }
}

#[test]
fn shutdown_drains_inflight_requests_before_closing() {
    let handle = start(Arc::new(SlowBackend {
        delay: Duration::from_millis(400),
    }));
    let url = handle.url();
    let addr = handle.addr();

    let inflight = thread::spawn({
        let url = url.clone();
        move || {
            post_act(
                &client(),
                &url,
                &json!({ "prompt": "p", "state": [0.0], "chunk_size": 1 }),
            )
        }
    });

    // Let the request reach the handler, then stop the server while the
    // backend is still sleeping.
    thread::sleep(Duration::from_millis(100));
    let clock = Instant::now();
    handle.shutdown();
    assert!(
        clock.elapsed() >= Duration::from_millis(200),
        "shutdown returned before the in-flight request could have finished"
    );

    let (status, body) = inflight.join().unwrap();
    assert_eq!(status, 200, "drained request must complete: {body}");
    assert_eq!(body["actions"], json!([[0.0]]));

    // The port is actually released and no longer accepting.
    assert!(std::net::TcpStream::connect(addr).is_err());
}

#[test]
fn occupied_ports_are_reported_as_such() {
    let first = start(Arc::new(ZeroBackend::default()));
    match serve(first.addr(), Arc::new(ZeroBackend::default())) {
        Err(ServeError::PortInUse(addr)) => assert_eq!(addr, first.addr()),
        other => panic!("expected PortInUse, got {other:?}"),
    }
}

#[test]
fn replay_recordings_serve_over_http_with_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chunk.json");
    let space = ActionSpace::new(vec![-1.0, -1.0], vec![1.0, 1.0], BoundsPolicy::MinMax).unwrap();
    let recorded = ActionChunk::new(
        space.clone(),
        vec![vec![0.5, 0.5], vec![-0.25, 0.25], vec![0.125, -0.125]],
    )
    .unwrap();
    write_replay_file(&path, &recorded).unwrap();

    // What the file actually stores: the originals snapped to bin centers.
    let decoded = ActionChunk::from_tokens(space, &recorded.quantize()).unwrap();
    let steps = decoded.steps();

    let handle = start(Arc::new(ReplayBackend::from_file(&path).unwrap()));
    let (status, body) = post_act(
        &client(),
        &handle.url(),
        &json!({
            "prompt": "p", "state": [0.0], "chunk_size": 4, "request_id": "1",
        }),
    );
    assert_eq!(status, 200);
    assert_eq!(
        body["actions"],
        json!([steps[1], steps[2], steps[2], steps[2]]),
        "offset 1 plus repeat-last padding"
    );
    assert_eq!(body["dof"], 2);
}

/// Mirror of the gateway + environment arithmetic for the pcontrol
/// rollout, written out step by step: an open-loop proportional chunk
/// with Euclidean clipping, re-clipped and applied by the environment,
/// stopping as soon as the goal circle is hit.
fn simulate_pcontrol_rollout(
    start: [f64; 2],
    goal: [f64; 2],
    k: f64,
    clip: f64,
    chunk_size: usize,
    max_steps: u64,
) -> (Vec<(Vec<f64>, Vec<f64>)>, bool) {
    let max_step = 0.1;
    let radius = 0.05;
    let mut pos = start;
    let mut steps: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    if f64::hypot(pos[0] - goal[0], pos[1] - goal[1]) <= radius {
        return (steps, true);
    }
    loop {
        // The backend's answer, predicted open loop from the observation.
        let mut sim = pos;
        let mut chunk: Vec<[f64; 2]> = Vec::new();
        for _ in 0..chunk_size {
            let mut d = [k * (goal[0] - sim[0]), k * (goal[1] - sim[1])];
            let norm = f64::hypot(d[0], d[1]);
            if norm > clip {
                let scale = clip / norm;
                d = [d[0] * scale, d[1] * scale];
            }
            sim = [sim[0] + d[0], sim[1] + d[1]];
            chunk.push(d);
        }
        // The environment executes it action by action.
        for d in chunk {
            let observed = pos;
            let mut applied = d;
            let norm = f64::hypot(applied[0], applied[1]);
            if norm > max_step {
                let scale = max_step / norm;
                applied = [applied[0] * scale, applied[1] * scale];
            }
            pos = [
                (pos[0] + applied[0]).clamp(-10.0, 10.0),
                (pos[1] + applied[1]).clamp(-10.0, 10.0),
            ];
            steps.push((observed.to_vec(), d.to_vec()));
            if f64::hypot(pos[0] - goal[0], pos[1] - goal[1]) <= radius {
                return (steps, true);
            }
            if steps.len() as u64 >= max_steps {
                return (steps, false);
            }
        }
    }
}

#[test]
fn pcontrol_rollout_replays_the_clipped_proportional_law_exactly() {
    let handle = start(Arc::new(PControlBackend::new(1.0, Some(0.1)).unwrap()));
    let mut options = RolloutOptions::new(handle.url(), [0.5, 0.5]);
    options.max_steps = 10;
    let result = run_rollout(&options).unwrap();

    let (expected, success) =
        simulate_pcontrol_rollout([0.0, 0.0], [0.5, 0.5], 1.0, 0.1, options.chunk_size, 10);
    assert!(success, "the oracle itself must reach the goal");
    assert!(result.success);
    assert_eq!(result.steps_taken, expected.len() as u64);
    assert!(result.steps_taken <= 10, "{} steps", result.steps_taken);

    // Bit-exact agreement, state and action, every step.
    assert_eq!(result.trajectory.len(), expected.len());
    for (step, (state, action)) in result.trajectory.iter().zip(&expected) {
        assert_eq!(&step.state, state, "state at t={}", step.t);
        assert_eq!(&step.action, action, "action at t={}", step.t);
    }
    for (t, step) in result.trajectory.iter().enumerate() {
        assert_eq!(step.t, t as u64);
    }
}

#[test]
fn zero_backend_rollouts_go_nowhere_and_fail() {
    let handle = start(Arc::new(ZeroBackend::default()));
    let mut options = RolloutOptions::new(handle.url(), [0.5, 0.5]);
    options.max_steps = 12;
    let result = run_rollout(&options).unwrap();

    assert!(!result.success);
    assert_eq!(result.steps_taken, 12);
    assert_eq!(result.trajectory.len(), 12);
    for step in &result.trajectory {
        assert_eq!(step.state, vec![0.0, 0.0], "zeros must not move the point");
        assert_eq!(step.action, vec![0.0; 7]);
    }
}

#[test]
fn rollout_at_the_goal_succeeds_without_a_single_request() {
    // No server at this address: success-at-start must not need one.
    let options = {
        let mut o = RolloutOptions::new("http://127.0.0.1:9", [0.25, -0.25]);
        o.start = [0.25, -0.25];
        o
    };
    let result = run_rollout(&options).unwrap();
    assert!(result.success);
    assert_eq!(result.steps_taken, 0);
    assert!(result.trajectory.is_empty());
}

#[test]
fn seeded_rollouts_record_byte_identical_trajectories() {
    let handle = start(Arc::new(PControlBackend::new(1.0, Some(0.1)).unwrap()));
    let dir = tempfile::tempdir().unwrap();

    let run = |seed: u64, name: &str| {
        let mut options = RolloutOptions::new(handle.url(), [0.3, 0.3]);
        options.seed = Some(seed);
        options.record = Some(dir.path().join(name));
        run_rollout(&options).unwrap()
    };

    let a = run(42, "a.jsonl");
    let b = run(42, "b.jsonl");
    assert_eq!(a, b);
    assert!(a.success);

    let bytes_a = fs::read(dir.path().join("a.jsonl")).unwrap();
    let bytes_b = fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed, same bytes");
    assert!(!bytes_a.is_empty());

    // The recording is one canonical JSON line per executed step.
    let text = String::from_utf8(bytes_a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len() as u64, a.steps_taken);
    for (t, line) in lines.iter().enumerate() {
        let value: Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["t"], t as u64);
        assert_eq!(value["state"].as_array().unwrap().len(), 2);
        assert_eq!(value["action"].as_array().unwrap().len(), 2);
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["action", "state", "t"], "canonical key order");
    }

    // A different seed starts somewhere else.
    let c = run(43, "c.jsonl");
    assert_ne!(
        a.trajectory.first().map(|s| s.state.clone()),
        c.trajectory.first().map(|s| s.state.clone()),
        "different seeds must jitter the start"
    );
}

#[test]
fn unreachable_servers_are_a_structured_error() {
    let options = RolloutOptions::new("http://127.0.0.1:9", [0.5, 0.5]);
    match run_rollout(&options) {
        Err(ServeError::ServerUnreachable { url, .. }) => {
            assert_eq!(url, "http://127.0.0.1:9")
        }
        other => panic!("expected ServerUnreachable, got {other:?}"),
    }
}

#[test]
fn gateway_error_bodies_surface_in_rollout_failures() {
    // The gateway happily serves 1-dof zeros; it is the environment
    // that rejects an action without both (dx, dy).
    let handle = start(Arc::new(ZeroBackend::new(1).unwrap()));
    let options = RolloutOptions::new(handle.url(), [0.5, 0.5]);
    match run_rollout(&options) {
        Err(ServeError::Env(detail)) => assert!(detail.contains("two"), "{detail}"),
        other => panic!("expected Env error, got {other:?}"),
    }

    // A failing backend surfaces as BadResponse carrying the 500 body.
    let handle = start(Arc::new(FailingBackend));
    let options = RolloutOptions::new(handle.url(), [0.5, 0.5]);
    match run_rollout(&options) {
        Err(ServeError::BadResponse { detail, .. }) => {
            assert!(detail.contains("BACKEND_ERROR"), "{detail}");
            assert!(detail.contains("500"), "{detail}");
        }
        other => panic!("expected BadResponse, got {other:?}"),
    }
}
