use crate::sid::SidGrammar;

const OPEN: &str = "<think>";
const CLOSE: &str = "</think>";
const STEPS: [&str; 3] = ["Step 1:", "Step 2:", "Step 3:"];

/// True for a single `<think>` block holding the three reasoning steps in
/// order, followed by exactly one id run and nothing else but whitespace.
pub fn is_valid_trace(completion: &str, grammar: &SidGrammar) -> bool {
    if completion.matches(OPEN).count() != 1 || completion.matches(CLOSE).count() != 1 {
        return false;
    }
    let (Some(open), Some(close)) = (completion.find(OPEN), completion.find(CLOSE)) else {
        return false;
    };
    if close < open || !completion[..open].trim().is_empty() {
        return false;
    }
    let body = &completion[open + OPEN.len()..close];
    let mut cursor = 0;
    for step in STEPS {
        match body[cursor..].find(step) {
            Some(at) => cursor += at + step.len(),
            None => return false,
        }
    }
    grammar
        .parse_exact(&completion[close + CLOSE.len()..])
        .is_some()
}

pub fn format_reward(completion: &str, grammar: &SidGrammar, fmt_value: f64) -> f64 {
    if is_valid_trace(completion, grammar) {
        fmt_value
    } else {
        0.0
    }
}
