//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! `#` and `;` start comments. Keys inside a section are unique. Values are
//! applied onto a typed default through its serde representation, so every
//! override is checked against the target type: numbers must parse, unknown
//! keys are rejected, nested fields use dotted keys (`fillet.value = 1.2`),
//! list fields take comma-separated items and optional fields accept `none`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("[{section}] {key}: {detail}")]
    Value { section: String, key: String, detail: String },
    #[error("[{section}] unknown key '{key}'")]
    UnknownKey { section: String, key: String },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

pub type Section = BTreeMap<String, String>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub sections: BTreeMap<String, Section>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split(['#', ';']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, detail: "unterminated section header".into() })?
                    .trim()
                    .to_ascii_lowercase();
                if name.is_empty() {
                    return Err(ConfigError::Syntax { line, detail: "empty section name".into() });
                }
                if sections.contains_key(&name) {
                    return Err(ConfigError::Syntax { line, detail: format!("section [{name}] repeated") });
                }
                sections.insert(name.clone(), Section::new());
                current = Some(name);
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, detail: format!("expected 'key = value', got '{body}'") })?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line, detail: "empty key".into() });
            }
            let section = current
                .as_ref()
                .ok_or_else(|| ConfigError::Syntax { line, detail: "key outside any section".into() })?;
            let map = sections.get_mut(section).expect("section exists");
            if map.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax { line, detail: format!("key '{key}' repeated in [{section}]") });
            }
        }
        Ok(Self { sections })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), detail: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    /// Fails on any section not in `known`.
    pub fn expect_sections(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.sections.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownSection(k.clone())),
            None => Ok(()),
        }
    }

    /// Raw string value, if present.
    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                section: section.into(),
                key: key.into(),
                detail: format!("cannot parse '{v}'"),
            }),
        }
    }
}

/// Comma-separated list, each item parsed as `T`.
pub fn parse_list<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| ConfigError::Value {
                section: section.into(),
                key: key.into(),
                detail: format!("cannot parse list item '{s}'"),
            })
        })
        .collect()
}

fn scalar(template: &Value, text: &str) -> Result<Value, String> {
    match template {
        Value::Bool(_) => {
            text.parse::<bool>().map(Value::Bool).map_err(|_| format!("expected true or false, got '{text}'"))
        }
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            text.parse::<i64>().map(Value::from).map_err(|_| format!("expected an integer, got '{text}'"))
        }
        Value::Number(_) => {
            let x: f64 = text.parse().map_err(|_| format!("expected a number, got '{text}'"))?;
            serde_json::Number::from_f64(x).map(Value::Number).ok_or_else(|| format!("'{text}' is not finite"))
        }
        Value::String(_) => Ok(Value::String(text.to_string())),
        _ => {
            if text.eq_ignore_ascii_case("none") {
                Ok(Value::Null)
            } else if let Ok(b) = text.parse::<bool>() {
                Ok(Value::Bool(b))
            } else if let Ok(i) = text.parse::<i64>() {
                Ok(Value::from(i))
            } else if let Some(n) = text.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                Ok(Value::Number(n))
            } else {
                Ok(Value::String(text.to_string()))
            }
        }
    }
}

fn set(target: &mut Value, path: &[&str], text: &str) -> Result<(), String> {
    let obj = target.as_object_mut().ok_or("not a structured field")?;
    let slot = obj.get_mut(path[0]).ok_or("unknown key")?;
    if path.len() > 1 {
        if slot.is_null() {
            return Err(format!("'{}' is unset; give it a value before its fields", path[0]));
        }
        return set(slot, &path[1..], text);
    }
    let new = match &*slot {
        Value::Array(items) => {
            let template = items.first().cloned().unwrap_or(Value::Null);
            Value::Array(
                text.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| scalar(&template, s))
                    .collect::<Result<_, _>>()?,
            )
        }
        _ if text.eq_ignore_ascii_case("none") => Value::Null,
        other => scalar(other, text)?,
    };
    *slot = new;
    Ok(())
}

/// Applies every `key = value` of `section` (except those in `skip`) onto
/// `base` and re-validates the result through deserialization.
pub fn apply<T: Serialize + DeserializeOwned>(
    base: &T,
    name: &str,
    section: Option<&Section>,
    skip: &[&str],
) -> Result<T, ConfigError> {
    let Some(section) = section else {
        return serde_json::from_value(serde_json::to_value(base).expect("serialisable"))
            .map_err(|e| ConfigError::Value { section: name.into(), key: String::new(), detail: e.to_string() });
    };
    let mut v = serde_json::to_value(base).expect("serialisable");
    for (key, text) in section {
        if skip.contains(&key.as_str()) {
            continue;
        }
        let path: Vec<&str> = key.split('.').collect();
        set(&mut v, &path, text).map_err(|detail| {
            if detail == "unknown key" {
                ConfigError::UnknownKey { section: name.into(), key: key.clone() }
            } else {
                ConfigError::Value { section: name.into(), key: key.clone(), detail }
            }
        })?;
    }
    serde_json::from_value(v).map_err(|e| ConfigError::Value {
        section: name.into(),
        key: String::new(),
        detail: e.to_string(),
    })
}
