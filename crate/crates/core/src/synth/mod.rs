//! Synthetic conversations with known labels, brute-force oracles and mock services.

mod generator;
mod mock;
mod oracle;

pub use generator::{generate_conversation, EventKind, ScriptedEvent, SynthConversation, SynthError, SynthProfile};
pub use mock::{mock_backchannel_verdict, mock_chat, mock_personality_labels, BACKCHANNEL_PROMPT_MARKER, PERSONALITY_PROMPT_MARKER};
pub use oracle::{brute_force_labels, brute_force_overlaps};
