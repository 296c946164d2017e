use super::LlmError;

pub const MAX_TOPICS: usize = 10;

/// Parses a line- or comma-delimited topic list into at most [`MAX_TOPICS`]
/// lowercase, deduplicated topics.
pub fn parse_topic_list(raw: &str) -> Result<Vec<String>, LlmError> {
    parse_topic_list_capped(raw, MAX_TOPICS)
}

/// [`parse_topic_list`] with an explicit cap.
pub fn parse_topic_list_capped(raw: &str, max: usize) -> Result<Vec<String>, LlmError> {
    let mut topics: Vec<String> = Vec::new();
    for line in raw.lines() {
        let line = line.trim();
        // Headings such as "Ambiti:" introduce a list and are not topics.
        if line.ends_with(':') {
            continue;
        }
        for item in line.split([',', ';']) {
            let topic = clean(item);
            if !topic.is_empty() && !topics.contains(&topic) {
                topics.push(topic);
            }
        }
    }
    if topics.is_empty() {
        return Err(LlmError::UnparsableOutput(raw.chars().take(200).collect()));
    }
    topics.truncate(max);
    Ok(topics)
}

fn clean(item: &str) -> String {
    let mut s = item.trim();
    s = s.trim_start_matches(['-', '*', '•', '–', '·']).trim_start();
    // Enumerators like "1." or "2)".
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 && s[digits..].starts_with(['.', ')']) {
        s = s[digits + 1..].trim_start();
    }
    let s = s.trim_matches(|c: char| matches!(c, '"' | '\'' | '“' | '”' | '«' | '»' | '`' | '.') || c.is_whitespace());
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}
