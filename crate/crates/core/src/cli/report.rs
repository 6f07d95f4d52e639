//! Ordered certificate collections with a fixed text layout.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certificate::{Certificate, Status};

/// One claim of the summary table and the certificates backing it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub certificates: Vec<String>,
    pub status: Status,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub certificates: Vec<Certificate>,
    /// Preformatted informational blocks, printed after the certificates.
    pub sections: Vec<String>,
    pub claims: Vec<Claim>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, cert: Certificate) {
        self.certificates.push(cert);
    }

    pub fn find(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }

    /// Adds a claim that passes iff all named certificates are present and pass.
    pub fn claim(&mut self, name: &str, certs: &[&str]) {
        let ok = certs
            .iter()
            .all(|c| self.find(c).is_some_and(Certificate::passed));
        self.claims.push(Claim {
            name: name.to_string(),
            certificates: certs.iter().map(|s| s.to_string()).collect(),
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }

    pub fn status(&self) -> Status {
        if self.certificates.iter().all(Certificate::passed) && self.claims.iter().all(|c| c.status == Status::Pass) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[report {}]", self.command);
        let _ = writeln!(s, "status = {}", self.status());
        let _ = writeln!(s, "certificates = {}", self.certificates.len());
        for c in &self.certificates {
            let failures = c.failures();
            if !failures.is_empty() {
                let _ = writeln!(s, "failed.{} = {}", c.name, failures.join(" "));
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        for c in &self.certificates {
            s.push('\n');
            s.push_str(&c.to_text());
        }
        for sec in &self.sections {
            s.push('\n');
            s.push_str(sec);
        }
        if !self.claims.is_empty() {
            let width = self.claims.iter().map(|c| c.name.len()).max().unwrap_or(0);
            s.push_str("\n[summary]\n");
            for c in &self.claims {
                let _ = writeln!(
                    s,
                    "{:<width$} = {}  ({})",
                    c.name,
                    c.status,
                    c.certificates.join(", ")
                );
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            status: Status,
            #[serde(flatten)]
            report: &'a Report,
        }
        serde_json::to_string_pretty(&Doc {
            status: self.status(),
            report: self,
        })
        .expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_and_claims() {
        let mut r = Report::new("demo");
        let mut a = Certificate::new("a");
        a.margin("m", 1.0);
        r.push(a);
        r.claim("first", &["a"]);
        assert_eq!(r.status(), Status::Pass);
        r.claim("missing", &["b"]);
        assert_eq!(r.status(), Status::Fail);
        let mut bad = Certificate::new("c");
        bad.check("x", false);
        let mut q = Report::new("q");
        q.push(bad);
        assert_eq!(q.status(), Status::Fail);
        assert!(q.to_text().contains("failed.c = check.x"));
        assert!(q.to_json().contains("\"status\": \"fail\""));
        assert!(r.to_text().ends_with("missing = fail  (b)\n"));
    }
}
