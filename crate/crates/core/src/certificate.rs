//! Uniform record of a verified property.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

/// A named certificate.
///
/// Gating entries come in three kinds: `margins` must be strictly positive,
/// `slacks` must be non-negative (inequalities that are only claimed in the
/// non-strict form), and `checks` are boolean facts. `values` are reported
/// but never gate the status.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub margins: BTreeMap<String, f64>,
    pub slacks: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    pub values: BTreeMap<String, f64>,
    pub grid_spec: String,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(name: impl Into<String>) -> Self {
        Certificate {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: f64) -> &mut Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn margin(&mut self, key: &str, value: f64) -> &mut Self {
        self.margins.insert(key.to_string(), value);
        self
    }

    pub fn slack(&mut self, key: &str, value: f64) -> &mut Self {
        self.slacks.insert(key.to_string(), value);
        self
    }

    pub fn check(&mut self, key: &str, ok: bool) -> &mut Self {
        self.checks.insert(key.to_string(), ok);
        self
    }

    pub fn value(&mut self, key: &str, value: f64) -> &mut Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn grid(&mut self, spec: impl Into<String>) -> &mut Self {
        self.grid_spec = spec.into();
        self
    }

    pub fn status(&self) -> Status {
        let ok = self.margins.values().all(|m| *m > 0.0)
            && self.slacks.values().all(|s| *s >= 0.0)
            && self.checks.values().all(|c| *c);
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    /// Names of the gating entries that fail.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.extend(self.margins.iter().filter(|(_, m)| **m <= 0.0).map(|(k, _)| format!("margin.{k}")));
        out.extend(self.slacks.iter().filter(|(_, s)| **s < 0.0).map(|(k, _)| format!("slack.{k}")));
        out.extend(self.checks.iter().filter(|(_, c)| !**c).map(|(k, _)| format!("check.{k}")));
        out
    }

    /// Line-oriented `name = value` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("[certificate {}]\n", self.name));
        s.push_str(&format!("status = {}\n", self.status()));
        for (k, v) in &self.params {
            s.push_str(&format!("param.{k} = {v:e}\n"));
        }
        for (k, v) in &self.margins {
            s.push_str(&format!("margin.{k} = {v:e}\n"));
        }
        for (k, v) in &self.slacks {
            s.push_str(&format!("slack.{k} = {v:e}\n"));
        }
        for (k, v) in &self.checks {
            s.push_str(&format!("check.{k} = {v}\n"));
        }
        for (k, v) in &self.values {
            s.push_str(&format!("value.{k} = {v:e}\n"));
        }
        if !self.grid_spec.is_empty() {
            s.push_str(&format!("grid = {}\n", self.grid_spec));
        }
        for n in &self.notes {
            s.push_str(&format!("note = {n}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_entries() {
        let mut c = Certificate::new("demo");
        assert!(c.passed());
        c.margin("a", 1e-9).slack("b", 0.0).check("c", true);
        assert!(c.passed());
        c.margin("d", 0.0);
        assert_eq!(c.status(), Status::Fail);
        assert_eq!(c.failures(), vec!["margin.d".to_string()]);
        c.margin("d", 1.0).slack("b", -1e-300);
        assert!(!c.passed());
        c.slack("b", 0.0).check("e", false);
        assert!(!c.passed());
        c.check("e", true).value("info", -5.0);
        assert!(c.passed());
    }

    #[test]
    fn text_block_is_stable() {
        let mut c = Certificate::new("x");
        c.value("z", 1.0).margin("m", 0.5).param("r", 0.05).note("hello");
        let t = c.to_text();
        assert!(t.starts_with("[certificate x]\nstatus = pass\nparam.r = 5e-2\nmargin.m = 5e-1\n"));
        assert_eq!(t, c.clone().to_text());
    }
}
