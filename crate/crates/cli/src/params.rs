use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
    List(Vec<f64>),
    Bool(bool),
}

impl Value {
    /// Interpret a command-line `k=v` right-hand side.
    pub fn parse(raw: &str) -> Value {
        let raw = raw.trim();
        if let Ok(x) = raw.parse::<f64>() {
            return Value::Num(x);
        }
        match raw {
            "true" => return Value::Bool(true),
            "false" => return Value::Bool(false),
            _ => {}
        }
        if let Some(inner) = raw.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let items: std::result::Result<Vec<f64>, _> =
                inner.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect();
            if let Ok(v) = items {
                return Value::List(v);
            }
        }
        Value::Text(raw.to_string())
    }

    fn from_toml(key: &str, v: &toml::Value) -> Result<Value> {
        Ok(match v {
            toml::Value::Integer(i) => Value::Num(*i as f64),
            toml::Value::Float(x) => Value::Num(*x),
            toml::Value::String(s) => Value::Text(s.clone()),
            toml::Value::Boolean(b) => Value::Bool(*b),
            toml::Value::Array(items) => Value::List(
                items
                    .iter()
                    .map(|item| match item {
                        toml::Value::Integer(i) => Ok(*i as f64),
                        toml::Value::Float(x) => Ok(*x),
                        _ => Err(invalid(format!("'{key}' must be a list of numbers"))),
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(invalid(format!("'{key}' has an unsupported value type"))),
        })
    }
}

/// Named parameters of one process, potential or theorem. Every read is
/// recorded so leftover keys can be reported as unknown.
#[derive(Debug, Clone)]
pub struct Params {
    context: String,
    map: BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn new(context: impl Into<String>, map: BTreeMap<String, Value>) -> Self {
        Self {
            context: context.into(),
            map,
            used: RefCell::default(),
        }
    }

    pub fn from_table(context: impl Into<String>, table: &toml::Table, skip: &[&str]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in table {
            if skip.contains(&k.as_str()) {
                continue;
            }
            map.insert(k.clone(), Value::from_toml(k, v)?);
        }
        Ok(Self::new(context, map))
    }

    /// `k=v` pairs, as given on the command line.
    pub fn from_pairs<'a>(context: impl Into<String>, pairs: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let context = context.into();
        let mut map = BTreeMap::new();
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| invalid(format!("{context}: expected key=value, got '{pair}'")))?;
            map.insert(k.trim().to_string(), Value::parse(v));
        }
        Ok(Self::new(context, map))
    }

    /// `name` or `name(key=value, ...)`; list values go in brackets.
    pub fn parse_call(text: &str) -> Result<(String, Params)> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            None => (text, ""),
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| invalid(format!("'{text}': missing closing parenthesis")))?;
                (&text[..open], inner)
            }
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Err(invalid(format!("'{text}': expected name(key=value, ...)")));
        }
        let mut pairs = Vec::new();
        let (mut depth, mut start) = (0i32, 0);
        for (i, c) in args.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                ',' if depth == 0 => {
                    pairs.push(&args[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pairs.push(&args[start..]);
        let pairs = pairs.into_iter().map(str::trim).filter(|s| !s.is_empty());
        Ok((name.to_string(), Params::from_pairs(name, pairs)?))
    }

    /// A copy with `key` set to `value`; read marks start afresh.
    pub fn with(&self, key: &str, value: Value) -> Params {
        let mut map = self.map.clone();
        map.insert(key.to_string(), value);
        Params::new(self.context.clone(), map)
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key)
    }

    pub fn opt_num(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Num(x)) => Ok(Some(*x)),
            Some(other) => Err(invalid(format!("{}: '{key}' must be a number, got {other:?}", self.context))),
        }
    }

    pub fn num(&self, key: &str) -> Result<f64> {
        self.opt_num(key)?
            .ok_or_else(|| invalid(format!("{}: missing parameter '{key}'", self.context)))
    }

    pub fn num_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_num(key)?.unwrap_or(default))
    }

    pub fn opt_uint(&self, key: &str) -> Result<Option<u64>> {
        match self.opt_num(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(63) => Ok(Some(x as u64)),
            Some(x) => Err(invalid(format!("{}: '{key}' must be a non-negative integer, got {x}", self.context))),
        }
    }

    pub fn uint(&self, key: &str) -> Result<u64> {
        self.opt_uint(key)?
            .ok_or_else(|| invalid(format!("{}: missing parameter '{key}'", self.context)))
    }

    pub fn uint_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.opt_uint(key)?.unwrap_or(default))
    }

    pub fn opt_text(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Text(s)) => Ok(Some(s.clone())),
            Some(other) => Err(invalid(format!("{}: '{key}' must be text, got {other:?}", self.context))),
        }
    }

    pub fn text_or(&self, key: &str, default: &str) -> Result<String> {
        Ok(self.opt_text(key)?.unwrap_or_else(|| default.to_string()))
    }

    pub fn opt_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(other) => Err(invalid(format!("{}: '{key}' must be true or false, got {other:?}", self.context))),
        }
    }

    pub fn opt_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::List(v)) => Ok(Some(v.clone())),
            Some(Value::Num(x)) => Ok(Some(vec![*x])),
            Some(other) => Err(invalid(format!("{}: '{key}' must be a list of numbers, got {other:?}", self.context))),
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        self.opt_list(key)?
            .ok_or_else(|| invalid(format!("{}: missing parameter '{key}'", self.context)))
    }

    /// Fails if any key was never read.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.map.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(invalid(format!("{}: unknown parameter(s) {}", self.context, unknown.join(", "))))
        }
    }
}
