use std::io::Write;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use fhdr_core::dataset::skyline;
use fhdr_core::harness::gen_uniform;
use fhdr_core::preference::gen_sparse_utility;
use fhdr_core::session::ResultKind;
use fhdr_core::{Dataset, DimensionSet, Session, SessionConfig, SimulatedUser, UtilityVector};
use fhdr_server::wire::{CreateResponse, Next, WireKind, WireQuestion, WireResult};
use fhdr_server::{router, AppState, Registry};
use http_body_util::BodyExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

fn dataset() -> Arc<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    Arc::new(skyline(&gen_uniform(400, 30, &mut rng).unwrap()))
}

fn app_with(ttl: Duration) -> (Router, Arc<Dataset>) {
    let x = dataset();
    let mut reg = Registry::new();
    reg.insert("synthetic", x.clone(), None);
    (router(AppState::with_ttl(reg, ttl)), x)
}

fn app() -> (Router, Arc<Dataset>) {
    app_with(fhdr_server::DEFAULT_TTL)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn create(app: &Router, config: Value) -> CreateResponse {
    let (status, v) = call(
        app,
        Method::POST,
        "/sessions",
        Some(json!({"dataset": "synthetic", "config": config})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

fn question(next: &Next) -> &WireQuestion {
    match next {
        Next::Question(q) => q,
        Next::Result(_) => panic!("expected a question"),
    }
}

/// Answers from the wire payload alone, by partial utility.
fn wire_answer(user: &SimulatedUser, q: &WireQuestion, d: usize) -> Value {
    let dims = DimensionSet::new(q.attribute_indices.clone(), d).unwrap();
    let rows: Vec<Vec<f64>> = q
        .tuples
        .iter()
        .map(|t| {
            let mut full = vec![0.0; d];
            for (&j, &v) in q.attribute_indices.iter().zip(&t.values) {
                full[j] = v;
            }
            full
        })
        .collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    match user.answer(&dims, &refs) {
        fhdr_core::Answer::Choose(i) => {
            json!({"question_index": q.question_index, "action": "choose", "choice": i})
        }
        fhdr_core::Answer::OptOut => {
            json!({"question_index": q.question_index, "action": "opt_out"})
        }
        fhdr_core::Answer::Quit => json!({"question_index": q.question_index, "action": "quit"}),
    }
}

fn engine_run(
    x: &Arc<Dataset>,
    cfg: SessionConfig,
    user: &SimulatedUser,
) -> fhdr_core::SessionResult {
    let mut s = Session::new(x.clone(), cfg).unwrap();
    while !s.is_terminal() {
        let q = s.current_question().unwrap();
        let rows: Vec<&[f64]> = q.tuples.iter().map(|&r| x.row(r)).collect();
        let a = user.answer(&q.shown_dims, &rows);
        s.submit_answer(a).unwrap();
    }
    s.result().unwrap().clone()
}

#[tokio::test]
async fn lists_registered_datasets() {
    let (app, x) = app();
    let (status, v) = call(&app, Method::GET, "/datasets", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v[0]["name"], "synthetic");
    assert_eq!(v[0]["n"], x.n());
    assert_eq!(v[0]["d"], 30);
}

#[tokio::test]
async fn default_session_opens_with_a_pair_over_seven_attributes() {
    let (app, x) = app();
    let created = create(&app, json!({})).await;
    let q = question(&created.next);
    assert_eq!(q.question_index, 0);
    assert_eq!(q.tuples.len(), 2);
    assert!(q.attributes.len() <= 7);
    for t in &q.tuples {
        let expected: Vec<f64> = q
            .attribute_indices
            .iter()
            .map(|&j| x.row(t.row)[j])
            .collect();
        assert_eq!(t.values, expected);
        assert!(t.raw.is_none());
    }
    for (name, &j) in q.attributes.iter().zip(&q.attribute_indices) {
        assert_eq!(name, &x.attribute_names()[j]);
    }
}

#[tokio::test]
async fn display_override_limits_attributes() {
    let (app, _) = app();
    let created = create(&app, json!({"m": 5, "seed": 3})).await;
    assert_eq!(created.seed, 3);
    assert!(question(&created.next).attributes.len() <= 5);
}

#[tokio::test]
async fn bad_requests_map_to_status_codes() {
    let (app, _) = app();
    let (s, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"dataset": "nope"})),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"dataset": "synthetic", "config": {"s": 1}})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"dataset": "synthetic", "config": {"bogus": 1}})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&app, Method::GET, "/sessions/not-a-uuid/question", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(
        &app,
        Method::GET,
        &format!("/sessions/{}/result", uuid::Uuid::nil()),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let created = create(&app, json!({"seed": 1})).await;
    let base = format!("/sessions/{}", created.session_id);
    let answer = format!("{base}/answer");
    for body in [
        json!({"question_index": 0, "action": "choose"}),
        json!({"question_index": 0, "action": "opt_out", "choice": 1}),
        json!({"question_index": 0, "action": "dance"}),
        json!({"question_index": 0, "action": "choose", "choice": 5}),
        json!({"action": "quit"}),
    ] {
        let (s, v) = call(&app, Method::POST, &answer, Some(body.clone())).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{body} -> {v}");
        assert!(v["error"].is_string());
    }
    let (s, _) = call(&app, Method::GET, &format!("{base}/result"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn scripted_client_matches_the_engine() {
    let (app, x) = app();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..4u64 {
        let truth = gen_sparse_utility(x.d(), 3, &mut rng).unwrap();
        let user = SimulatedUser::new(truth);
        let created = create(&app, json!({"seed": seed})).await;
        let answer = format!("/sessions/{}/answer", created.session_id);
        let mut next = created.next;
        while let Next::Question(q) = &next {
            let (s, v) = call(
                &app,
                Method::POST,
                &answer,
                Some(wire_answer(&user, q, x.d())),
            )
            .await;
            assert_eq!(s, StatusCode::OK, "{v}");
            next = serde_json::from_value(v).unwrap();
        }
        let Next::Result(wire) = next else {
            unreachable!()
        };

        let cfg = SessionConfig {
            seed,
            ..Default::default()
        };
        let local = engine_run(&x, cfg, &user);
        let ResultKind::Favorite { row } = local.kind else {
            panic!("engine should finish with a favorite")
        };
        assert_eq!(wire.kind, WireKind::Favorite);
        assert_eq!(wire.tuples[0].row, row);
        assert_eq!(wire.tuples[0].values, x.row(row));
        assert_eq!(wire.questions_asked, local.questions_asked);
        let keys: Vec<String> = local
            .identified_keys
            .iter()
            .map(|&j| x.attribute_names()[j].clone())
            .collect();
        assert_eq!(wire.identified_keys, keys);

        let (s, v) = call(
            &app,
            Method::GET,
            &format!("/sessions/{}/result", created.session_id),
            None,
        )
        .await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(serde_json::from_value::<WireResult>(v).unwrap(), wire);
    }
}

#[tokio::test]
async fn double_submit_is_rejected() {
    let (app, x) = app();
    let user = SimulatedUser::new(
        UtilityVector::normalized((0..x.d()).map(|j| (j % 4) as f64).collect()).unwrap(),
    );
    let created = create(&app, json!({"seed": 5})).await;
    let answer = format!("/sessions/{}/answer", created.session_id);
    let body = wire_answer(&user, question(&created.next), x.d());
    let (s, _) = call(&app, Method::POST, &answer, Some(body.clone())).await;
    assert_eq!(s, StatusCode::OK);
    let (s, v) = call(&app, Method::POST, &answer, Some(body)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(v["error"]
        .as_str()
        .unwrap()
        .contains("pending question is 1"));
    let (s, v) = call(
        &app,
        Method::GET,
        &format!("/sessions/{}/question", created.session_id),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        question(&serde_json::from_value(v).unwrap()).question_index,
        1
    );
}

#[tokio::test]
async fn quit_on_first_question_returns_a_full_set() {
    let (app, x) = app();
    let created = create(&app, json!({"seed": 2, "K": 12})).await;
    let answer = format!("/sessions/{}/answer", created.session_id);
    let (s, v) = call(
        &app,
        Method::POST,
        &answer,
        Some(json!({"question_index": 0, "action": "quit"})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    let Next::Result(r) = serde_json::from_value(v).unwrap() else {
        panic!("quit must yield a result")
    };
    assert_eq!(r.kind, WireKind::RegretSet);
    assert_eq!(r.tuples.len(), 12);
    assert!(r.tuples.iter().all(|t| t.values.len() == x.d()));
    assert!(r.coverage.is_some());
    assert!(!r.expired);
    let (s, _) = call(
        &app,
        Method::POST,
        &answer,
        Some(json!({"question_index": 1, "action": "quit"})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn idle_session_expires_as_quit() {
    let (app, _) = app_with(Duration::from_millis(1));
    let created = create(&app, json!({"seed": 4, "K": 10})).await;
    tokio::time::sleep(Duration::from_millis(20)).await;
    let (s, v) = call(
        &app,
        Method::GET,
        &format!("/sessions/{}/question", created.session_id),
        None,
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    let Next::Result(r) = serde_json::from_value(v).unwrap() else {
        panic!("expired session must report its result")
    };
    assert!(r.expired);
    assert_eq!(r.kind, WireKind::RegretSet);
    assert_eq!(r.tuples.len(), 10);
}

#[tokio::test]
async fn csv_datasets_show_source_values() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "price,size,age").unwrap();
    writeln!(f, "min,max,min").unwrap();
    for (p, s, a) in [
        (300, 80, 5),
        (250, 60, 20),
        (420, 120, 2),
        (200, 50, 40),
        (310, 95, 1),
    ] {
        writeln!(f, "{p},{s},{a}").unwrap();
    }
    f.flush().unwrap();
    let mut reg = Registry::new();
    let x = reg.load_csv("houses", f.path(), 0.01).unwrap();
    let app = router(AppState::new(reg));
    let (s, v) = call(
        &app,
        Method::POST,
        "/sessions",
        Some(json!({"dataset": "houses", "config": {"seed": 0}})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    let created: CreateResponse = serde_json::from_value(v).unwrap();
    let q = question(&created.next);
    let source = [
        [300.0, 80.0, 5.0],
        [250.0, 60.0, 20.0],
        [420.0, 120.0, 2.0],
        [200.0, 50.0, 40.0],
        [310.0, 95.0, 1.0],
    ];
    for t in &q.tuples {
        let raw = t.raw.as_ref().expect("csv datasets keep raw values");
        let expected: Vec<Option<f64>> = q
            .attribute_indices
            .iter()
            .map(|&j| Some(source[t.origin_id][j]))
            .collect();
        assert_eq!(raw, &expected);
        assert_eq!(x.origin_id(t.row), t.origin_id);
    }
    let (_, v) = call(&app, Method::GET, "/datasets", None).await;
    assert_eq!(v[0]["has_raw_values"], true);
}
