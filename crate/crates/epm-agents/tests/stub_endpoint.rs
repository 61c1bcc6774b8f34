//! Endpoint-contract tests against a scripted loopback server: happy path,
//! retry/backoff, timeout, malformed responses, auth handling, and the
//! live judge and director adapters end to end.

mod support;

use epm_agents::{
    AgentError, ChatClient, ChatEndpointConfig, ChatMessage, DialoguePair, Director,
    DirectorAction, DirectorObservation, JudgeWindowContext, JudgeWireOutput, LiveDirector,
    LiveJudge, LiveTestModel, LiveUserSimulator, ModelTurnContext, Pacing, TestModel,
    UserSimulator, UserTurnContext, WindowJudge,
};
use epm_core::{AxisId, MdepChannel, MdepWindowRating};
use epm_scenario::fixtures;
use std::collections::BTreeMap;
use support::{chat_body, Step, StubServer};

fn test_config(base_url: &str) -> ChatEndpointConfig {
    ChatEndpointConfig {
        base_url: base_url.to_string(),
        model_name: "stub-model".to_string(),
        auth_env_var: String::new(),
        timeout_ms: 2_000,
        max_retries: 3,
        rate_limit_per_min: 0,
        backoff_ms: 10,
        temperature: 0.0,
        top_p: None,
        max_tokens: None,
    }
}

#[test]
fn echoed_fixture_text_comes_back_verbatim() {
    let server = StubServer::start(vec![Step::ChatText("fixture text".to_string())]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let text = client.complete(&[ChatMessage::user("hello")]).unwrap();
    assert_eq!(text, "fixture text");

    let recorded = server.finish();
    assert_eq!(recorded.len(), 1);
    assert_eq!(recorded[0].path, "/chat/completions");
    let body = recorded[0].body_json();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["messages"][0]["content"], "hello");
}

#[test]
fn two_rate_limit_hits_then_success_costs_two_retries() {
    let server = StubServer::start(vec![
        Step::Reply { status: 429, body: "slow down".to_string() },
        Step::Reply { status: 429, body: "slow down".to_string() },
        Step::ChatText("recovered".to_string()),
    ]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let text = client.complete(&[ChatMessage::user("x")]).unwrap();
    assert_eq!(text, "recovered");
    assert_eq!(client.last_retries(), 2);
    assert_eq!(server.finish().len(), 3);
}

#[test]
fn persistent_rate_limiting_surfaces_after_budget() {
    let steps = (0..3)
        .map(|_| Step::Reply { status: 429, body: String::new() })
        .collect();
    let server = StubServer::start(steps);
    let mut config = test_config(&server.base_url);
    config.max_retries = 2;
    let client = ChatClient::new(config).unwrap();
    let err = client.complete(&[ChatMessage::user("x")]).unwrap_err();
    let AgentError::RateLimited { attempts } = err else { panic!("wrong error: {err}") };
    assert_eq!(attempts, 3);
    server.finish();
}

#[test]
fn unresponsive_server_times_out() {
    let server = StubServer::start(vec![Step::Hang { hold_ms: 1_500 }]);
    let mut config = test_config(&server.base_url);
    config.timeout_ms = 150;
    config.max_retries = 0;
    let client = ChatClient::new(config).unwrap();
    let err = client.complete(&[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, AgentError::Timeout { after_ms: 150 }), "got {err}");
    server.finish();
}

#[test]
fn non_transient_status_fails_without_retry() {
    let server =
        StubServer::start(vec![Step::Reply { status: 400, body: "bad request".to_string() }]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let err = client.complete(&[ChatMessage::user("x")]).unwrap_err();
    let AgentError::Http { status, .. } = err else { panic!("wrong error: {err}") };
    assert_eq!(status, 400);
    assert_eq!(server.finish().len(), 1, "no retry on 400");
}

#[test]
fn junk_success_body_is_malformed_response() {
    let server =
        StubServer::start(vec![Step::Reply { status: 200, body: "not json".to_string() }]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let err = client.complete(&[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, AgentError::MalformedResponse { .. }), "got {err}");
    server.finish();
}

#[test]
fn named_env_var_becomes_bearer_header() {
    std::env::set_var("EPM_TEST_KEY_BEARER", "sk-stub-123");
    let server = StubServer::start(vec![Step::ChatText("ok".to_string())]);
    let mut config = test_config(&server.base_url);
    config.auth_env_var = "EPM_TEST_KEY_BEARER".to_string();
    let client = ChatClient::new(config).unwrap();
    client.complete(&[ChatMessage::user("x")]).unwrap();
    let recorded = server.finish();
    assert_eq!(recorded[0].header("authorization"), Some("Bearer sk-stub-123"));
}

#[test]
fn empty_env_var_fails_before_any_request() {
    std::env::set_var("EPM_TEST_KEY_EMPTY", "  ");
    // No server at all: if the client tried the network this would be a
    // transport error, not AuthMissing.
    let mut config = test_config("http://127.0.0.1:1");
    config.auth_env_var = "EPM_TEST_KEY_EMPTY".to_string();
    let client = ChatClient::new(config).unwrap();
    let err = client.complete(&[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, AgentError::AuthMissing { .. }), "got {err}");
}

#[test]
fn live_user_simulator_gets_redacted_card_and_begin_cue() {
    let scenario = fixtures::exemplar_scenario();
    let server = StubServer::start(vec![Step::ChatText("opening message".to_string())]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let mut user = LiveUserSimulator::new(client);
    let released = BTreeMap::new();
    let ctx = UserTurnContext {
        persona: &scenario.persona,
        crisis_event: &scenario.crisis_event,
        history: &[],
        released_memories: &released,
        guidance: None,
        pacing: Pacing::Hold,
        turn: 1,
    };
    assert_eq!(user.next_utterance(&ctx).unwrap(), "opening message");

    let recorded = server.finish();
    let body = recorded[0].body_json();
    let system = body["messages"][0]["content"].as_str().unwrap();
    assert!(system.contains("[not yet surfaced]"), "background blocks must start hidden");
    assert!(!system.contains(&scenario.persona.story.epilogue));
    assert_eq!(body["messages"][1]["content"], "[begin]");
}

#[test]
fn live_test_model_sees_only_history_and_utterance() {
    let server = StubServer::start(vec![Step::ChatText("a supportive reply".to_string())]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let mut model = LiveTestModel::new(client, None);
    let history = vec![DialoguePair {
        turn: 1,
        user: "first user line".to_string(),
        model: "first reply".to_string(),
    }];
    let ctx = ModelTurnContext { history: &history, user_utterance: "second user line" };
    assert_eq!(model.reply(&ctx).unwrap(), "a supportive reply");

    let recorded = server.finish();
    let body = recorded[0].body_json();
    let messages = body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 3, "no system prompt unless configured");
    assert_eq!(messages[0]["role"], "user");
    assert_eq!(messages[1]["role"], "assistant");
    assert_eq!(messages[2]["content"], "second user line");
}

#[test]
fn live_judge_repairs_after_invalid_rating() {
    let scenario = fixtures::exemplar_scenario();
    let bad = r#"{"kind": "mdep", "version": 1, "channels": [
        {"axis": "cognitive", "channel": "prog", "level": 2, "evidence": "", "reasoning": "x"},
        {"axis": "cognitive", "channel": "neg", "level": 0, "evidence": "", "reasoning": ""},
        {"axis": "affective", "channel": "prog", "level": 0, "evidence": "", "reasoning": ""},
        {"axis": "affective", "channel": "neg", "level": 0, "evidence": "", "reasoning": ""},
        {"axis": "proactive", "channel": "prog", "level": 0, "evidence": "", "reasoning": ""},
        {"axis": "proactive", "channel": "neg", "level": 0, "evidence": "", "reasoning": ""}
    ]}"#;
    let good = JudgeWireOutput::Mdep(
        MdepWindowRating::from_levels(2, [(1, 0), (2, -1), (0, 0)]).unwrap(),
    )
    .to_wire_text();
    let server = StubServer::start(vec![
        Step::ChatText(bad.to_string()),
        Step::ChatText(good),
    ]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let mut judge = LiveJudge::new(client);
    let window = vec![DialoguePair {
        turn: 1,
        user: "seeker line".to_string(),
        model: "supporter line".to_string(),
    }];
    let ctx = JudgeWindowContext {
        persona: &scenario.persona,
        crisis_event: &scenario.crisis_event,
        window_index: 2,
        window: &window,
    };
    let rating = judge.rate_window(&ctx).unwrap();
    assert_eq!(rating.channel(AxisId::Affective, MdepChannel::Prog).level, 2);

    let recorded = server.finish();
    assert_eq!(recorded.len(), 2);
    let repair_body = recorded[1].body_json();
    let messages = repair_body["messages"].as_array().unwrap();
    let last = messages.last().unwrap()["content"].as_str().unwrap();
    assert!(last.contains("rejected"), "repair prompt must quote the rejection: {last}");
    assert!(last.contains("evidence"), "fault text names the offending field: {last}");
}

#[test]
fn live_director_parses_closed_set_and_rejects_strays() {
    let obs = DirectorObservation {
        window_index: 2,
        r0: 30.0,
        resistance: 28.0,
        e_total: 3.0,
        last_delta_e: 0.0,
        mean_cos: Some(0.4),
        stagnation_streak: 2,
        penalty_intensity: 0.0,
        pacing: Pacing::Hold,
        released: vec![],
        available: vec!["childhood".to_string()],
    };

    let good = r#"Given the stall I will open material.
        {"action": {"kind": "release_memory", "key": "childhood"}, "rationale": "stalled"}"#;
    let server = StubServer::start(vec![Step::ChatText(good.to_string())]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let mut director = LiveDirector::new(client);
    let decision = director.decide(&obs).unwrap();
    assert_eq!(decision.action, DirectorAction::ReleaseMemory { key: "childhood".to_string() });
    server.finish();

    let stray = r#"{"action": {"kind": "pause"}, "rationale": "made up"}"#;
    let server = StubServer::start(vec![Step::ChatText(stray.to_string())]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    let mut director = LiveDirector::new(client);
    let err = director.decide(&obs).unwrap_err();
    assert!(matches!(err, AgentError::InvalidDirectorAction { .. }), "got {err}");
    server.finish();
}

#[test]
fn transient_500_then_success_recovers() {
    let server = StubServer::start(vec![
        Step::Reply { status: 503, body: "warming up".to_string() },
        Step::ChatText("warm now".to_string()),
    ]);
    let client = ChatClient::new(test_config(&server.base_url)).unwrap();
    assert_eq!(client.complete(&[ChatMessage::user("x")]).unwrap(), "warm now");
    assert_eq!(client.last_retries(), 1);
    server.finish();
}

#[test]
fn stub_chat_body_is_shaped_like_a_completion() {
    let value: serde_json::Value = serde_json::from_str(&chat_body("abc")).unwrap();
    assert_eq!(value["choices"][0]["message"]["content"], "abc");
}
