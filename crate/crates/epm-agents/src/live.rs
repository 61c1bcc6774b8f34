//! Live backends: each of the four roles adapted onto a chat endpoint.
//!
//! Prompt templates ship as versioned text assets under
//! `assets/prompts/`; they are data, and nothing downstream of the parsed
//! levels ever reads them. The user simulator receives a redacted persona
//! card: the five releasable background blocks stay hidden until the
//! director releases them, which is what makes a release observable in
//! behavior.

use crate::backends::{
    Director, DirectorAction, DirectorDecision, DirectorObservation, JudgeWindowContext,
    ModelTurnContext, TestModel, UserSimulator, UserTurnContext, WindowJudge,
};
use crate::chat::{ChatClient, ChatMessage};
use crate::wire::{
    adjudicate_with_repair, json_object_spans, JudgeMode, JudgeWireOutput, RepairPolicy,
    WIRE_VERSION,
};
use crate::AgentError;
use epm_core::{IedrAssessment, IndicatorId, MdepWindowRating};
use epm_scenario::PersonaCard;
use serde::Deserialize;

const USER_TEMPLATE: &str = include_str!("../assets/prompts/user_simulator.txt");
const JUDGE_INITIAL_TEMPLATE: &str = include_str!("../assets/prompts/judge_initial.txt");
const JUDGE_WINDOW_TEMPLATE: &str = include_str!("../assets/prompts/judge_window.txt");
const DIRECTOR_TEMPLATE: &str = include_str!("../assets/prompts/director.txt");

const REDACTED: &str = "[not yet surfaced]";

fn render(template: &str, slots: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (key, value) in slots {
        out = out.replace(&format!("<<{key}>>"), value);
    }
    out
}

fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("in-memory values serialize")
}

/// The persona as the user simulator first sees it: releasable background
/// blocks blanked out so a later release changes observable input.
fn redacted_persona(persona: &PersonaCard) -> PersonaCard {
    let mut card = persona.clone();
    card.past_experiences.childhood = REDACTED.to_string();
    card.past_experiences.adolescence = REDACTED.to_string();
    card.past_experiences.young_adulthood = REDACTED.to_string();
    card.past_experiences.implicit_arc = REDACTED.to_string();
    card.story.epilogue = REDACTED.to_string();
    card
}

fn iedr_schema() -> String {
    let rows: Vec<String> = IndicatorId::ALL
        .into_iter()
        .map(|id| {
            format!(
                "  {{\"id\": \"{id}\", \"level\": 0, \"evidence\": \"\", \"reasoning\": \"\"}}"
            )
        })
        .collect();
    format!(
        "{{\"kind\": \"iedr\", \"version\": {WIRE_VERSION}, \"indicators\": [\n{}\n]}}",
        rows.join(",\n")
    )
}

fn mdep_schema(window_index: u32) -> String {
    let mut rows = Vec::new();
    for axis in ["cognitive", "affective", "proactive"] {
        for channel in ["prog", "neg"] {
            rows.push(format!(
                "  {{\"axis\": \"{axis}\", \"channel\": \"{channel}\", \"level\": 0, \
                 \"evidence\": \"\", \"reasoning\": \"\"}}"
            ));
        }
    }
    format!(
        "{{\"kind\": \"mdep\", \"version\": {WIRE_VERSION}, \"window_index\": {window_index}, \
         \"channels\": [\n{}\n]}}",
        rows.join(",\n")
    )
}

// ---------------------------------------------------------------- user --

#[derive(Debug, Clone)]
pub struct LiveUserSimulator {
    client: ChatClient,
    template: String,
}

impl LiveUserSimulator {
    pub fn new(client: ChatClient) -> Self {
        LiveUserSimulator { client, template: USER_TEMPLATE.to_string() }
    }

    pub fn with_template(client: ChatClient, template: String) -> Self {
        LiveUserSimulator { client, template }
    }
}

impl UserSimulator for LiveUserSimulator {
    fn next_utterance(&mut self, ctx: &UserTurnContext<'_>) -> Result<String, AgentError> {
        let system = render(
            &self.template,
            &[
                ("persona", pretty_json(&redacted_persona(ctx.persona))),
                ("crisis_event", ctx.crisis_event.to_string()),
                ("released", pretty_json(ctx.released_memories)),
                ("pacing", ctx.pacing.to_string()),
                ("guidance", ctx.guidance.unwrap_or("").to_string()),
            ],
        );
        let mut messages = vec![ChatMessage::system(system)];
        // From the simulator's seat its own utterances are assistant turns
        // and the supporter's replies arrive as user turns.
        for pair in ctx.history {
            messages.push(ChatMessage::assistant(pair.user.clone()));
            messages.push(ChatMessage::user(pair.model.clone()));
        }
        if ctx.history.is_empty() {
            messages.push(ChatMessage::user("[begin]"));
        }
        self.client.complete(&messages)
    }
}

// ---------------------------------------------------------- test model --

#[derive(Debug, Clone)]
pub struct LiveTestModel {
    client: ChatClient,
    system_prompt: Option<String>,
}

impl LiveTestModel {
    pub fn new(client: ChatClient, system_prompt: Option<String>) -> Self {
        LiveTestModel { client, system_prompt }
    }
}

impl TestModel for LiveTestModel {
    fn reply(&mut self, ctx: &ModelTurnContext<'_>) -> Result<String, AgentError> {
        let mut messages = Vec::with_capacity(2 * ctx.history.len() + 2);
        if let Some(prompt) = &self.system_prompt {
            messages.push(ChatMessage::system(prompt.clone()));
        }
        for pair in ctx.history {
            messages.push(ChatMessage::user(pair.user.clone()));
            messages.push(ChatMessage::assistant(pair.model.clone()));
        }
        messages.push(ChatMessage::user(ctx.user_utterance.to_string()));
        self.client.complete(&messages)
    }
}

// --------------------------------------------------------------- judge --

#[derive(Debug, Clone)]
pub struct LiveJudge {
    client: ChatClient,
    repair: RepairPolicy,
}

impl LiveJudge {
    pub fn new(client: ChatClient) -> Self {
        LiveJudge { client, repair: RepairPolicy::default() }
    }

    pub fn with_repair(client: ChatClient, repair: RepairPolicy) -> Self {
        LiveJudge { client, repair }
    }

    /// Ask-parse-repair over one growing conversation: each rejection is
    /// quoted back as a new user turn.
    fn converse(
        &self,
        mode: JudgeMode,
        mut messages: Vec<ChatMessage>,
    ) -> Result<JudgeWireOutput, AgentError> {
        let client = &self.client;
        adjudicate_with_repair(mode, self.repair, move |_attempt, fault| {
            if let Some(fault) = fault {
                messages.push(ChatMessage::user(format!(
                    "Your previous reply was rejected: {fault}. \
                     Send one corrected JSON object and nothing else."
                )));
            }
            let reply = client.complete(&messages)?;
            messages.push(ChatMessage::assistant(reply.clone()));
            Ok(reply)
        })
    }
}

impl WindowJudge for LiveJudge {
    fn assess_initial(
        &mut self,
        persona: &PersonaCard,
        crisis_event: &str,
    ) -> Result<IedrAssessment, AgentError> {
        let system = render(
            JUDGE_INITIAL_TEMPLATE,
            &[
                ("persona", pretty_json(persona)),
                ("crisis_event", crisis_event.to_string()),
                ("schema", iedr_schema()),
            ],
        );
        let messages = vec![
            ChatMessage::system(system),
            ChatMessage::user("Rate all nine indicators now.".to_string()),
        ];
        match self.converse(JudgeMode::Iedr, messages)? {
            JudgeWireOutput::Iedr(assessment) => Ok(assessment),
            JudgeWireOutput::Mdep(_) => unreachable!("mode pins the variant"),
        }
    }

    fn rate_window(
        &mut self,
        ctx: &JudgeWindowContext<'_>,
    ) -> Result<MdepWindowRating, AgentError> {
        let transcript: String = ctx
            .window
            .iter()
            .map(|pair| format!("seeker: {}\nsupporter: {}\n", pair.user, pair.model))
            .collect();
        let system = render(
            JUDGE_WINDOW_TEMPLATE,
            &[
                ("persona", pretty_json(ctx.persona)),
                ("crisis_event", ctx.crisis_event.to_string()),
                ("window_index", ctx.window_index.to_string()),
                ("transcript", transcript),
                ("schema", mdep_schema(ctx.window_index)),
            ],
        );
        let messages = vec![
            ChatMessage::system(system),
            ChatMessage::user("Rate all six channels now.".to_string()),
        ];
        match self.converse(JudgeMode::Mdep { window_index: ctx.window_index }, messages)? {
            JudgeWireOutput::Mdep(rating) => Ok(rating),
            JudgeWireOutput::Iedr(_) => unreachable!("mode pins the variant"),
        }
    }
}

// ------------------------------------------------------------ director --

#[derive(Deserialize)]
struct DecisionWire {
    action: DirectorAction,
    #[serde(default)]
    rationale: String,
}

#[derive(Debug, Clone)]
pub struct LiveDirector {
    client: ChatClient,
}

impl LiveDirector {
    pub fn new(client: ChatClient) -> Self {
        LiveDirector { client }
    }
}

impl Director for LiveDirector {
    fn decide(&mut self, obs: &DirectorObservation) -> Result<DirectorDecision, AgentError> {
        let system = render(DIRECTOR_TEMPLATE, &[("observation", pretty_json(obs))]);
        let messages = vec![
            ChatMessage::system(system),
            ChatMessage::user("Decide now.".to_string()),
        ];
        let reply = self.client.complete(&messages)?;
        for span in json_object_spans(&reply) {
            if let Ok(decision) = serde_json::from_str::<DecisionWire>(span) {
                return Ok(DirectorDecision {
                    action: decision.action,
                    rationale: decision.rationale,
                });
            }
        }
        let mut got: String = reply.chars().take(120).collect();
        if got.len() < reply.len() {
            got.push_str("...");
        }
        Err(AgentError::InvalidDirectorAction { got })
    }
}
