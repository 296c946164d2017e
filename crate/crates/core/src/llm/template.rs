use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    TopicExtraction,
    TopicExpansion,
    ReportPolish,
}

impl TemplateId {
    pub const ALL: [TemplateId; 3] = [
        TemplateId::TopicExtraction,
        TemplateId::TopicExpansion,
        TemplateId::ReportPolish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::TopicExtraction => "topic_extraction",
            TemplateId::TopicExpansion => "topic_expansion",
            TemplateId::ReportPolish => "report_polish",
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| LlmError::UnknownTemplate(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// A prompt template. The file format is a system message, a line holding
/// only `---`, then the user message; `{{name}}` marks a placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    system: String,
    user: String,
}

impl Template {
    pub fn parse(id: TemplateId, source: &str) -> Result<Self, LlmError> {
        let invalid = |message: &str| LlmError::InvalidTemplate {
            template: id.to_string(),
            message: message.to_string(),
        };
        let mut system = Vec::new();
        let mut user = Vec::new();
        let mut in_user = false;
        for line in source.lines() {
            if !in_user && line.trim_end() == "---" {
                in_user = true;
            } else if in_user {
                user.push(line);
            } else {
                system.push(line);
            }
        }
        if !in_user {
            return Err(invalid("missing `---` separator"));
        }
        let template = Self {
            system: system.join("\n").trim().to_string(),
            user: user.join("\n").trim().to_string(),
        };
        if template.user.is_empty() {
            return Err(invalid("empty user message"));
        }
        for part in [&template.system, &template.user] {
            scan(part).map_err(|m| invalid(&m))?;
        }
        Ok(template)
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for part in [&self.system, &self.user] {
            for piece in scan(part).expect("validated at parse time") {
                if let Piece::Var(name) = piece {
                    if !names.iter().any(|n| n == name) {
                        names.push(name.to_string());
                    }
                }
            }
        }
        names
    }

    pub fn render(&self, id: TemplateId, variables: &BTreeMap<String, String>) -> Result<Vec<ChatMessage>, LlmError> {
        let fill = |part: &str| -> Result<String, LlmError> {
            let mut out = String::with_capacity(part.len());
            for piece in scan(part).expect("validated at parse time") {
                match piece {
                    Piece::Text(t) => out.push_str(t),
                    Piece::Var(name) => out.push_str(variables.get(name).ok_or_else(|| LlmError::UnboundVariable {
                        template: id.to_string(),
                        variable: name.to_string(),
                    })?),
                }
            }
            Ok(out)
        };
        let mut messages = Vec::with_capacity(2);
        if !self.system.is_empty() {
            messages.push(ChatMessage {
                role: Role::System,
                content: fill(&self.system)?,
            });
        }
        messages.push(ChatMessage {
            role: Role::User,
            content: fill(&self.user)?,
        });
        Ok(messages)
    }
}

enum Piece<'a> {
    Text(&'a str),
    Var(&'a str),
}

fn scan(source: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut pieces = Vec::new();
    let mut rest = source;
    while let Some(start) = rest.find("{{") {
        if start > 0 {
            pieces.push(Piece::Text(&rest[..start]));
        }
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or("unterminated placeholder")?;
        let name = after[..end].trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("invalid placeholder name {name:?}"));
        }
        pieces.push(Piece::Var(name));
        rest = &after[end + 2..];
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest));
    }
    Ok(pieces)
}

/// The templates a gateway can render.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemplateSet {
    templates: BTreeMap<TemplateId, Template>,
}

impl TemplateSet {
    /// Templates shipped with the crate.
    pub fn builtin() -> Self {
        let sources = [
            (
                TemplateId::TopicExtraction,
                include_str!("../../templates/topic_extraction.txt"),
            ),
            (
                TemplateId::TopicExpansion,
                include_str!("../../templates/topic_expansion.txt"),
            ),
            (
                TemplateId::ReportPolish,
                include_str!("../../templates/report_polish.txt"),
            ),
        ];
        let templates = sources
            .into_iter()
            .map(|(id, src)| (id, Template::parse(id, src).expect("builtin template is valid")))
            .collect();
        Self { templates }
    }

    /// Loads `<id>.txt` files from `dir`; missing files are left out.
    pub fn from_dir(dir: &Path) -> Result<Self, LlmError> {
        let mut set = Self::default();
        for id in TemplateId::ALL {
            let path = dir.join(format!("{id}.txt"));
            match std::fs::read_to_string(&path) {
                Ok(source) => set.insert(id, Template::parse(id, &source)?),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(source) => return Err(LlmError::Io { path, source }),
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, id: TemplateId, template: Template) {
        self.templates.insert(id, template);
    }

    pub fn get(&self, id: TemplateId) -> Option<&Template> {
        self.templates.get(&id)
    }

    pub fn render(&self, id: TemplateId, variables: &BTreeMap<String, String>) -> Result<Vec<ChatMessage>, LlmError> {
        self.get(id)
            .ok_or_else(|| LlmError::UnknownTemplate(id.to_string()))?
            .render(id, variables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn builtin_placeholders() {
        let set = TemplateSet::builtin();
        assert_eq!(set.get(TemplateId::TopicExtraction).unwrap().placeholders(), ["text"]);
        assert_eq!(
            set.get(TemplateId::TopicExpansion).unwrap().placeholders(),
            ["max_topics", "topics"]
        );
        assert_eq!(set.get(TemplateId::ReportPolish).unwrap().placeholders(), ["report"]);
    }

    #[test]
    fn render_fills_variables() {
        let t = Template::parse(TemplateId::ReportPolish, "sys {{a}}\n---\nuser {{ b }} and {{a}}").unwrap();
        let m = t
            .render(TemplateId::ReportPolish, &vars(&[("a", "1"), ("b", "2")]))
            .unwrap();
        assert_eq!(m[0].content, "sys 1");
        assert_eq!(m[1].content, "user 2 and 1");
        assert_eq!(m[1].role, Role::User);
    }

    #[test]
    fn unbound_variable() {
        let t = Template::parse(TemplateId::ReportPolish, "---\n{{x}}").unwrap();
        let err = t.render(TemplateId::ReportPolish, &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, LlmError::UnboundVariable { variable, .. } if variable == "x"));
    }

    #[test]
    fn malformed_templates() {
        assert!(Template::parse(TemplateId::ReportPolish, "no separator").is_err());
        assert!(Template::parse(TemplateId::ReportPolish, "---\n{{open").is_err());
        assert!(Template::parse(TemplateId::ReportPolish, "---\n{{bad name}}").is_err());
    }

    #[test]
    fn ids_parse() {
        assert_eq!(
            "topic_expansion".parse::<TemplateId>().unwrap(),
            TemplateId::TopicExpansion
        );
        assert!(matches!(
            "summary".parse::<TemplateId>(),
            Err(LlmError::UnknownTemplate(_))
        ));
    }
}
