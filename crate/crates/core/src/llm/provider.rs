use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use super::prompt::PromptBundle;

/// A chat-style text completion backend.
///
/// Implementations perform blocking IO; callers may invoke one provider from
/// several threads at once, so implementations hold no per-call state.
pub trait LlmProvider {
    /// Short identifier such as `mock` or `openai`.
    fn id(&self) -> &str;

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ProviderError>;
}

impl<P: LlmProvider + ?Sized> LlmProvider for &P {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ProviderError> {
        (**self).complete(prompt)
    }
}

/// Transport, authentication or protocol failure reported by a provider.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("provider `{provider}` failed: {message}")]
pub struct ProviderError {
    pub provider: String,
    pub message: String,
}

impl ProviderError {
    pub fn new(provider: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            provider: provider.into(),
            message: message.into(),
        }
    }
}

/// Replays canned replies in order, repeating the last one once exhausted.
///
/// Useful for exercising the repair loop without a network.
pub struct ScriptedProvider {
    replies: Vec<Result<String, ProviderError>>,
    next: AtomicUsize,
}

impl ScriptedProvider {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_results(replies.into_iter().map(|r| Ok(r.into())).collect())
    }

    pub fn with_results(replies: Vec<Result<String, ProviderError>>) -> Self {
        assert!(!replies.is_empty(), "a scripted provider needs at least one reply");
        Self {
            replies,
            next: AtomicUsize::new(0),
        }
    }

    /// Number of completions served so far.
    pub fn calls(&self) -> usize {
        self.next.load(Ordering::SeqCst)
    }
}

impl LlmProvider for ScriptedProvider {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, _prompt: &PromptBundle) -> Result<String, ProviderError> {
        let i = self.next.fetch_add(1, Ordering::SeqCst);
        self.replies[i.min(self.replies.len() - 1)].clone()
    }
}
