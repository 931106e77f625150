//! Backchannel resolution through the chat client and per-response affect labels.

mod affect;
mod backchannel;

pub use affect::{
    assign_affect, classify_affect, AffectTask, ClassifierError, HttpTextClassifier, LexiconMock, TextClassifier, LEXICON,
};
pub use backchannel::{
    build_backchannel_prompt, insertion_index, parse_verdict, resolve_backchannels, BackchannelVerdict,
    InterjectionType, PromptError, ResolveError, BACKCHANNEL_TEMPLATE,
};

/// Extra attempts granted to a reply that does not parse.
pub const MALFORMED_RETRIES: u32 = 3;
