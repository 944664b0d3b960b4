use std::time::{Duration, Instant};

use commitbench_clients::{ConfigError, LlmConfig, OpenRouterClient};
use commitbench_core::llm::LlmError;
use commitbench_fixtures::{MockLlm, MockReply};
use url::Url;

fn config_for(mock: &MockLlm, model: &str) -> LlmConfig {
    let mut c = LlmConfig::new("sk-test-key");
    c.base_url = Url::parse(&mock.base_url()).unwrap();
    c.model_id = model.into();
    c.timeout_ms = 5_000;
    c
}

#[tokio::test]
async fn happy_path_trims_and_sends_single_user_message() {
    let mock = MockLlm::constant("  Fix bug\n").await;
    let client = OpenRouterClient::new(config_for(&mock, "vendor/model-a")).unwrap();
    assert_eq!(client.complete("Describe the change").await.unwrap(), "Fix bug");

    let calls = mock.calls();
    assert_eq!(calls.len(), 1);
    assert_eq!(calls[0].model(), Some("vendor/model-a"));
    let messages = calls[0].body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 1);
    assert_eq!(messages[0]["role"], "user");
    assert_eq!(messages[0]["content"], "Describe the change");
    assert_eq!(calls[0].authorization.as_deref(), Some("Bearer sk-test-key"));
    assert!(calls[0].body.get("temperature").is_none());
}

#[tokio::test]
async fn http_500_is_status_error() {
    let mock = MockLlm::start(|_, _| MockReply::Status(500)).await;
    let client = OpenRouterClient::new(config_for(&mock, "m")).unwrap();
    match client.complete("p").await {
        Err(LlmError::Status { status: 500, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[tokio::test]
async fn empty_choices_is_malformed() {
    let mock = MockLlm::start(|_, _| MockReply::EmptyChoices).await;
    let client = OpenRouterClient::new(config_for(&mock, "m")).unwrap();
    assert!(matches!(client.complete("p").await, Err(LlmError::Malformed(_))));
}

#[tokio::test]
async fn swap_model_and_base_url() {
    let first = MockLlm::constant("one").await;
    let second = MockLlm::constant("two").await;
    let client = OpenRouterClient::new(config_for(&first, "model-a")).unwrap();
    client.complete("p").await.unwrap();

    client.swap_provider(config_for(&first, "model-b")).unwrap();
    client.complete("p").await.unwrap();
    let models: Vec<_> = first.calls().iter().map(|c| c.model().unwrap().to_owned()).collect();
    assert_eq!(models, ["model-a", "model-b"]);

    client.swap_provider(config_for(&second, "model-b")).unwrap();
    assert_eq!(client.complete("p").await.unwrap(), "two");
    assert_eq!(first.calls().len(), 2);
    assert_eq!(second.calls().len(), 1);
}

#[tokio::test]
async fn swap_rejects_empty_key_and_keeps_old_config() {
    let mock = MockLlm::constant("ok").await;
    let client = OpenRouterClient::new(config_for(&mock, "m")).unwrap();
    let mut bad = config_for(&mock, "other");
    bad.api_key = "".into();
    assert_eq!(client.swap_provider(bad), Err(ConfigError::EmptyApiKey));
    assert_eq!(client.config().model_id, "m");
}

#[tokio::test]
async fn stalled_server_times_out() {
    let mock = MockLlm::start(|_, _| {
        MockReply::Stall(Duration::from_secs(5), Box::new(MockReply::content("late")))
    })
    .await;
    let mut cfg = config_for(&mock, "m");
    cfg.timeout_ms = 200;
    let client = OpenRouterClient::new(cfg).unwrap();
    let start = Instant::now();
    assert!(matches!(client.complete("p").await, Err(LlmError::Transport(_))));
    assert!(start.elapsed() < Duration::from_secs(3));
}
