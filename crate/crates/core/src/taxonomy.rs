//! Error categories and the lookup table that maps parser error strings
//! onto them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Where in the parsing pipeline a certificate was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCategory {
    #[serde(rename = "ASN1_PARSE_ERROR")]
    Asn1ParseError,
    #[serde(rename = "CRYPTO_UNSUPPORTED")]
    CryptoUnsupported,
    #[serde(rename = "CRYPTO_VALUE_ERROR")]
    CryptoValueError,
    #[serde(rename = "UNCATEGORIZED")]
    Uncategorized,
    #[serde(rename = "X509_PARSE_ERROR")]
    X509ParseError,
    #[serde(rename = "X509_UNSUPPORTED")]
    X509Unsupported,
    #[serde(rename = "X509_VALUE_ERROR")]
    X509ValueError,
}

impl ErrorCategory {
    /// All categories in column order.
    pub const ALL: [ErrorCategory; 7] = [
        ErrorCategory::Asn1ParseError,
        ErrorCategory::CryptoUnsupported,
        ErrorCategory::CryptoValueError,
        ErrorCategory::Uncategorized,
        ErrorCategory::X509ParseError,
        ErrorCategory::X509Unsupported,
        ErrorCategory::X509ValueError,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCategory::Asn1ParseError => "ASN1_PARSE_ERROR",
            ErrorCategory::CryptoUnsupported => "CRYPTO_UNSUPPORTED",
            ErrorCategory::CryptoValueError => "CRYPTO_VALUE_ERROR",
            ErrorCategory::Uncategorized => "UNCATEGORIZED",
            ErrorCategory::X509ParseError => "X509_PARSE_ERROR",
            ErrorCategory::X509Unsupported => "X509_UNSUPPORTED",
            ErrorCategory::X509ValueError => "X509_VALUE_ERROR",
        }
    }

    /// Position in [`ErrorCategory::ALL`].
    pub fn index(&self) -> usize {
        ErrorCategory::ALL.iter().position(|c| c == self).unwrap()
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for ErrorCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// An error with its category attached.
///
/// `check_id` names the built-in check that produced it; errors read from
/// external parsers have none and keep their message verbatim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct CategorizedError {
    pub category: ErrorCategory,
    pub message: String,
    pub check_id: Option<String>,
    pub offset: Option<usize>,
}

impl CategorizedError {
    pub fn new(category: ErrorCategory, check_id: &str, message: impl Into<String>) -> Self {
        CategorizedError {
            category,
            message: message.into(),
            check_id: Some(check_id.to_string()),
            offset: None,
        }
    }

    pub fn with_offset(mut self, offset: usize) -> Self {
        self.offset = Some(offset);
        self
    }

    /// External parser error classified through a table.
    pub fn external(category: ErrorCategory, message: impl Into<String>) -> Self {
        CategorizedError {
            category,
            message: message.into(),
            check_id: None,
            offset: None,
        }
    }
}

impl fmt::Display for CategorizedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.check_id {
            Some(id) => write!(f, "{id}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// A literal error string, or a literal prefix when written with a single
/// trailing `*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Exact(String),
    Prefix(String),
}

impl Pattern {
    pub fn parse(text: &str) -> Self {
        match text.strip_suffix('*') {
            Some(prefix) => Pattern::Prefix(prefix.to_string()),
            None => Pattern::Exact(text.to_string()),
        }
    }

    pub fn matches(&self, s: &str) -> bool {
        match self {
            Pattern::Exact(e) => s == e,
            Pattern::Prefix(p) => s.starts_with(p.as_str()),
        }
    }

    /// Whether every string this pattern's successor `other` matches is
    /// already matched by `self`.
    fn covers(&self, other: &Pattern) -> bool {
        match (self, other) {
            (Pattern::Prefix(p), Pattern::Exact(s) | Pattern::Prefix(s)) => s.starts_with(p.as_str()),
            (Pattern::Exact(a), Pattern::Exact(b)) => a == b,
            (Pattern::Exact(_), Pattern::Prefix(_)) => false,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Exact(s) => f.write_str(s),
            Pattern::Prefix(p) => write!(f, "{p}*"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub parser_id: String,
    pub pattern: Pattern,
    pub category: ErrorCategory,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("reading table: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableWarning {
    /// Rule `index` can never fire because rule `shadowed_by` matches first.
    Unreachable { index: usize, shadowed_by: usize },
    /// Rule `index` repeats the parser and pattern of rule `first`.
    Duplicate { index: usize, first: usize },
}

impl fmt::Display for TableWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableWarning::Unreachable { index, shadowed_by } => {
                write!(f, "rule {index} is unreachable, shadowed by rule {shadowed_by}")
            }
            TableWarning::Duplicate { index, first } => {
                write!(f, "rule {index} duplicates rule {first}")
            }
        }
    }
}

pub const TABLE_HEADER: &str = "parseval-table 1";
const FORMAT_VERSION: u32 = 1;
const DEFAULT_TABLE: &str = include_str!("../tables/default.tsv");

/// Ordered classification rules. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClassificationTable {
    rules: Vec<Rule>,
}

impl ClassificationTable {
    /// Builds a table from rules. UNCATEGORIZED is the fall-through and may
    /// not appear as a rule's target.
    pub fn new(rules: Vec<Rule>) -> Result<Self, TableError> {
        if let Some(i) = rules.iter().position(|r| r.category == ErrorCategory::Uncategorized) {
            return Err(TableError::Parse {
                line: i + 1,
                reason: "UNCATEGORIZED cannot be assigned by a rule".into(),
            });
        }
        Ok(ClassificationTable { rules })
    }

    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TABLE).expect("shipped table parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end() == TABLE_HEADER => {}
            Some((_, header)) => {
                return Err(TableError::Parse {
                    line: 1,
                    reason: format!("expected header {TABLE_HEADER:?}, found {header:?}"),
                })
            }
            None => {
                return Err(TableError::Parse {
                    line: 1,
                    reason: "empty file".into(),
                })
            }
        }
        let mut rules = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |reason: String| TableError::Parse {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [parser_id, pattern, category] = fields[..] else {
                return Err(parse_err(format!(
                    "expected 3 tab-separated fields, found {}",
                    fields.len()
                )));
            };
            if parser_id.is_empty() || parser_id.contains(char::is_whitespace) {
                return Err(parse_err(format!("bad parser id {parser_id:?}")));
            }
            if pattern.is_empty() {
                return Err(parse_err("empty pattern".into()));
            }
            let category: ErrorCategory = category.parse().map_err(|e: UnknownCategory| parse_err(e.to_string()))?;
            if category == ErrorCategory::Uncategorized {
                return Err(parse_err("UNCATEGORIZED cannot be assigned by a rule".into()));
            }
            rules.push(Rule {
                parser_id: parser_id.to_string(),
                pattern: Pattern::parse(pattern),
                category,
            });
        }
        Ok(ClassificationTable { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Serializes to the table file format; `parse` of the result yields an
    /// equal table.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for rule in &self.rules {
            out.push_str(&format!("{}\t{}\t{}\n", rule.parser_id, rule.pattern, rule.category));
        }
        out
    }

    /// Format version plus a digest of the rules, e.g. `1-3f2a09c4d1e7`.
    pub fn version(&self) -> String {
        let digest = Sha256::digest(self.to_file_string().as_bytes());
        format!("{FORMAT_VERSION}-{}", &hex::encode(digest)[..12])
    }

    /// First matching rule's category for this parser, else UNCATEGORIZED.
    pub fn classify(&self, parser_id: &str, error_string: &str) -> ErrorCategory {
        self.rules
            .iter()
            .filter(|r| r.parser_id == parser_id)
            .find(|r| r.pattern.matches(error_string))
            .map_or(ErrorCategory::Uncategorized, |r| r.category)
    }

    /// Reports duplicated and shadowed rules.
    pub fn validate(&self) -> Vec<TableWarning> {
        let mut warnings = Vec::new();
        for (index, rule) in self.rules.iter().enumerate() {
            let earlier = self.rules[..index]
                .iter()
                .enumerate()
                .filter(|(_, r)| r.parser_id == rule.parser_id);
            for (first, prior) in earlier {
                if prior.pattern == rule.pattern {
                    warnings.push(TableWarning::Duplicate { index, first });
                    break;
                }
                if prior.pattern.covers(&rule.pattern) {
                    warnings.push(TableWarning::Unreachable {
                        index,
                        shadowed_by: first,
                    });
                    break;
                }
            }
        }
        warnings
    }
}

/// Free-function form of [`ClassificationTable::classify`].
pub fn classify(parser_id: &str, error_string: &str, table: &ClassificationTable) -> ErrorCategory {
    table.classify(parser_id, error_string)
}
