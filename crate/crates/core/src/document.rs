//! Pair documents: the versioned JSON format and the line-oriented text format.
//!
//! Text layout:
//!
//! ```text
//! # free-form comment
//! q=4 n=2
//! # name: len2
//! # provenance: binary length-2 pair
//! A: 0 0
//! B: 0 2
//! ```
//!
//! Lines starting with `#` are comments. `# name:` and `# provenance:`
//! comments attach to the next `A:` line; every other comment is ignored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sequence::{SeqPair, SequenceError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("pair {name:?}: {source}")]
    Pair { name: String, source: SequenceError },
    #[error("pair {name:?}: length {got}, document declares {expected}")]
    Length {
        name: String,
        got: usize,
        expected: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub name: String,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDocument {
    pub format_version: u32,
    pub q: usize,
    pub length: usize,
    pub pairs: Vec<PairEntry>,
}

impl PairEntry {
    pub fn from_pair(name: impl Into<String>, pair: &SeqPair, provenance: Option<String>) -> Self {
        Self {
            name: name.into(),
            a: pair.a().exps().to_vec(),
            b: pair.b().exps().to_vec(),
            provenance,
        }
    }
}

impl PairDocument {
    pub fn new(q: usize, length: usize) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            q,
            length,
            pairs: Vec::new(),
        }
    }

    /// A document holding a single pair.
    pub fn single(name: impl Into<String>, pair: &SeqPair, provenance: Option<String>) -> Self {
        let mut doc = Self::new(pair.q(), pair.len());
        doc.pairs.push(PairEntry::from_pair(name, pair, provenance));
        doc
    }

    /// Checks the document invariants and builds the pairs.
    pub fn to_pairs(&self) -> Result<Vec<(String, SeqPair)>, DocumentError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DocumentError::Version(self.format_version));
        }
        self.pairs
            .iter()
            .map(|p| {
                for got in [p.a.len(), p.b.len()] {
                    if got != self.length {
                        return Err(DocumentError::Length {
                            name: p.name.clone(),
                            got,
                            expected: self.length,
                        });
                    }
                }
                let pair =
                    SeqPair::from_exps(self.q, p.a.clone(), p.b.clone()).map_err(|source| {
                        DocumentError::Pair {
                            name: p.name.clone(),
                            source,
                        }
                    })?;
                Ok((p.name.clone(), pair))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), DocumentError> {
        self.to_pairs().map(|_| ())
    }

    pub fn from_json(s: &str) -> Result<Self, DocumentError> {
        let doc: Self = serde_json::from_str(s)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        self.to_text_with_header(&[])
    }

    /// Text form with extra `#` comment lines before the header.
    pub fn to_text_with_header(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str(&format!("q={} n={}\n", self.q, self.length));
        let join = |v: &[usize]| {
            v.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for p in &self.pairs {
            out.push_str(&format!("# name: {}\n", p.name));
            if let Some(prov) = &p.provenance {
                out.push_str(&format!("# provenance: {prov}\n"));
            }
            out.push_str(&format!("A: {}\n", join(&p.a)));
            out.push_str(&format!("B: {}\n", join(&p.b)));
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self, DocumentError> {
        let mut header: Option<(usize, usize)> = None;
        let mut pairs = Vec::new();
        let mut name: Option<String> = None;
        let mut provenance: Option<String> = None;
        let mut pending_a: Option<(usize, Vec<usize>)> = None;

        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: &str| DocumentError::Syntax {
                line: line_no,
                msg: msg.to_string(),
            };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("name:") {
                    name = Some(v.trim().to_string());
                } else if let Some(v) = comment.strip_prefix("provenance:") {
                    provenance = Some(v.trim().to_string());
                }
                continue;
            }
            if header.is_none() {
                header = Some(parse_header(line).ok_or_else(|| err("expected `q=<int> n=<int>`"))?);
                continue;
            }
            if let Some(rest) = line.strip_prefix("A:") {
                if pending_a.is_some() {
                    return Err(err("`A:` line without a following `B:` line"));
                }
                pending_a = Some((
                    line_no,
                    parse_exps(rest).ok_or_else(|| err("bad exponent"))?,
                ));
            } else if let Some(rest) = line.strip_prefix("B:") {
                let (_, a) = pending_a
                    .take()
                    .ok_or_else(|| err("`B:` line without `A:`"))?;
                let b = parse_exps(rest).ok_or_else(|| err("bad exponent"))?;
                pairs.push(PairEntry {
                    name: name
                        .take()
                        .unwrap_or_else(|| format!("pair{}", pairs.len())),
                    a,
                    b,
                    provenance: provenance.take(),
                });
            } else {
                return Err(err("expected `A:`, `B:` or a `#` comment"));
            }
        }
        if let Some((line, _)) = pending_a {
            return Err(DocumentError::Syntax {
                line,
                msg: "`A:` line without a following `B:` line".into(),
            });
        }
        let (q, length) = header.ok_or(DocumentError::Syntax {
            line: 0,
            msg: "missing `q=<int> n=<int>` header".into(),
        })?;
        let doc = Self {
            format_version: FORMAT_VERSION,
            q,
            length,
            pairs,
        };
        doc.validate()?;
        Ok(doc)
    }

    /// JSON when the first non-blank character is `{`, text otherwise.
    pub fn parse(s: &str) -> Result<Self, DocumentError> {
        if s.trim_start().starts_with('{') {
            Self::from_json(s)
        } else {
            Self::from_text(s)
        }
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut q = None;
    let mut n = None;
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=')?;
        let v: usize = v.parse().ok()?;
        match k {
            "q" => q = Some(v),
            "n" => n = Some(v),
            _ => return None,
        }
    }
    Some((q?, n?))
}

fn parse_exps(s: &str) -> Option<Vec<usize>> {
    s.split_whitespace().map(|t| t.parse().ok()).collect()
}
