//! Three-valued answers with certificates.

use std::fmt;

use serde::Serialize;

use crate::words::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Proven,
    Refuted,
    UnknownAtBudget,
}

impl Status {
    /// Shell exit code: 0, 1 or 2.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Proven => 0,
            Status::Refuted => 1,
            Status::UnknownAtBudget => 2,
        }
    }

    /// Conjunction: any Refuted wins, then any Unknown.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (UnknownAtBudget, _) | (_, UnknownAtBudget) => UnknownAtBudget,
            _ => Proven,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proven => "Proven",
            Status::Refuted => "Refuted",
            Status::UnknownAtBudget => "UnknownAtBudget",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness_words: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_vertex: Option<Word>,
    /// Inclusive range of quotient levels the statement was checked on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
}

impl Verdict {
    pub fn new(status: Status, note: impl Into<String>) -> Verdict {
        let note = note.into();
        let mut certificate = Certificate::default();
        if !note.is_empty() {
            certificate.notes.push(note);
        }
        Verdict { status, certificate }
    }

    pub fn proven(note: impl Into<String>) -> Verdict {
        Verdict::new(Status::Proven, note)
    }

    pub fn refuted(note: impl Into<String>) -> Verdict {
        Verdict::new(Status::Refuted, note)
    }

    pub fn unknown(note: impl Into<String>) -> Verdict {
        Verdict::new(Status::UnknownAtBudget, note)
    }

    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn is_refuted(&self) -> bool {
        self.status == Status::Refuted
    }

    pub fn is_unknown(&self) -> bool {
        self.status == Status::UnknownAtBudget
    }

    pub fn note(mut self, note: impl Into<String>) -> Verdict {
        self.certificate.notes.push(note.into());
        self
    }

    pub fn witness(mut self, word: impl Into<String>) -> Verdict {
        self.certificate.witness_words.push(word.into());
        self
    }

    pub fn at_vertex(mut self, v: Word) -> Verdict {
        self.certificate.witness_vertex = Some(v);
        self
    }

    pub fn levels(mut self, lo: usize, hi: usize) -> Verdict {
        self.certificate.levels = Some((lo, hi));
        self
    }

    pub fn assume(mut self, assumptions: impl IntoIterator<Item = String>) -> Verdict {
        for a in assumptions {
            if !self.certificate.assumptions.contains(&a) {
                self.certificate.assumptions.push(a);
            }
        }
        self
    }

    /// Folds a list of verdicts into one, keeping the certificate of the
    /// deciding member (the first Refuted, else the first Unknown). The note
    /// is attached only when every member is Proven.
    pub fn all(parts: impl IntoIterator<Item = Verdict>, note: &str) -> Verdict {
        let parts: Vec<Verdict> = parts.into_iter().collect();
        let status = parts.iter().fold(Status::Proven, |s, v| s.and(v.status));
        let mut out = parts
            .iter()
            .find(|v| v.status == status && status != Status::Proven)
            .cloned()
            .unwrap_or_else(|| Verdict::new(status, ""));
        out.status = status;
        if status == Status::Proven && !note.is_empty() {
            out.certificate.notes.insert(0, note.to_string());
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        let c = &self.certificate;
        if let Some(v) = &c.witness_vertex {
            write!(f, " at {v}")?;
        }
        if let Some((lo, hi)) = c.levels {
            write!(f, " (levels {lo}..{hi})")?;
        }
        for n in &c.notes {
            write!(f, "\n  {n}")?;
        }
        for w in &c.witness_words {
            write!(f, "\n  witness: {w}")?;
        }
        for a in &c.assumptions {
            write!(f, "\n  assumes: {a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_prefers_refuted() {
        let v = Verdict::all(
            [Verdict::proven("x"), Verdict::unknown("u"), Verdict::refuted("r")],
            "all",
        );
        assert_eq!(v.status, Status::Refuted);
        assert_eq!(v.certificate.notes, vec!["r"]);
        let ok = Verdict::all([Verdict::proven("x")], "all");
        assert_eq!(ok.certificate.notes, vec!["all"]);
        assert_eq!(Verdict::all([], "").status, Status::Proven);
        assert_eq!(Status::UnknownAtBudget.exit_code(), 2);
    }
}
