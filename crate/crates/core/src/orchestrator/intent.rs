use super::types::IntentKind;

/// Phrase tables in precedence order. Phrases are matched as contiguous
/// token runs after lowercasing and dropping apostrophes.
const TABLE: &[(IntentKind, &[&str])] = &[
    (
        IntentKind::Refusal,
        &["wont", "refuse", "leave me alone", "dont want", "not taking", "go away", "not going to take"],
    ),
    (
        IntentKind::RepeatRequest,
        &["say that again", "say it again", "repeat", "pardon", "didnt hear", "didnt catch", "come again", "what did you say"],
    ),
    (
        IntentKind::HelpRequest,
        &["help", "where is", "where are", "where did", "cant find", "dont know where", "show me", "lost"],
    ),
    (IntentKind::Deny, &["no", "nope", "not yet", "cant", "didnt", "havent", "not done"]),
    (
        IntentKind::Confirm,
        &["yes", "yeah", "yep", "done", "ok", "okay", "took", "did it", "finished", "got it", "i have", "sure", "coming", "ready", "alright"],
    ),
    (
        IntentKind::OffTopic,
        &["weather", "tv", "television", "lunch", "dinner", "football", "news", "garden", "radio"],
    ),
];

fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace(['\'', '\u{2019}'], "")
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn contains_phrase(tokens: &[String], phrase: &str) -> bool {
    let p: Vec<&str> = phrase.split(' ').collect();
    tokens.windows(p.len()).any(|w| w.iter().zip(&p).all(|(a, b)| a == b))
}

/// Rule-based intent classifier.
pub fn interpret(transcript: &str) -> IntentKind {
    let toks = tokens(transcript);
    TABLE
        .iter()
        .find(|(_, phrases)| phrases.iter().any(|p| contains_phrase(&toks, p)))
        .map_or(IntentKind::Unknown, |(kind, _)| *kind)
}

/// Anything that turns a transcript into an intent. `latency` is the
/// simulated processing time, seconds.
pub trait IntentBackend {
    fn classify(&self, transcript: &str) -> (IntentKind, f64);
}

/// The keyword classifier with a fixed processing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleBackend {
    pub latency: f64,
}

impl Default for RuleBackend {
    fn default() -> Self {
        Self { latency: 0.5 }
    }
}

impl IntentBackend for RuleBackend {
    fn classify(&self, transcript: &str) -> (IntentKind, f64) {
        (interpret(transcript), self.latency)
    }
}

/// Substitutes `Unknown` when the inner backend takes longer than `deadline`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deadline<B> {
    pub inner: B,
    pub deadline: f64,
}

impl<B: IntentBackend> IntentBackend for Deadline<B> {
    fn classify(&self, transcript: &str) -> (IntentKind, f64) {
        let (kind, latency) = self.inner.classify(transcript);
        if latency > self.deadline {
            (IntentKind::Unknown, self.deadline)
        } else {
            (kind, latency)
        }
    }
}
