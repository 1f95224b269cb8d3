//! Hash-chained forensic audit log.
//!
//! A log is a sequence of JSON lines. Each record carries the SHA-256 of its
//! predecessor (`prev_hash`) and of its own canonical serialization with the
//! `this_hash` field left out. The canonical form is what `serde_json`
//! produces for [`AuditRecord`]: fields in declaration order, object keys in
//! `body` sorted, no whitespace, shortest round-trip number formatting. Only
//! logical time is recorded, so replays are byte-identical.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// `prev_hash` of the first record in a log.
pub const GENESIS_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("record {sequence}: prev_hash does not match the log head")]
    ChainBreak { sequence: u64 },
    #[error("record {sequence}: sequence must follow {head}")]
    SequenceOutOfOrder { sequence: u64, head: u64 },
    #[error("record {sequence}: this_hash does not match its contents")]
    HashMismatch { sequence: u64 },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordKind {
    Decision,
    RulebaseUpdate,
    PapaViolation,
    AttackObservation,
    Preemption,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Something worth recording, before it is placed in a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub kind: RecordKind,
    pub logical_time: u64,
    pub inputs_digest: String,
    pub rulebase_version: Option<u64>,
    pub chosen: Option<String>,
    pub body: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub sequence: u64,
    pub logical_time: u64,
    pub record_kind: RecordKind,
    pub inputs_digest: String,
    pub rulebase_version: Option<u64>,
    pub chosen: Option<String>,
    /// Kind-specific details. For decisions: the recorded inputs and every
    /// PEV/TEV/UF/TUF intermediate with the verdicts.
    pub body: serde_json::Value,
    pub prev_hash: String,
    pub this_hash: String,
}

/// Same fields as [`AuditRecord`] minus `this_hash`, in the same order.
#[derive(Serialize)]
struct HashedFields<'a> {
    sequence: u64,
    logical_time: u64,
    record_kind: RecordKind,
    inputs_digest: &'a str,
    rulebase_version: Option<u64>,
    chosen: Option<&'a str>,
    body: &'a serde_json::Value,
    prev_hash: &'a str,
}

impl AuditRecord {
    /// Builds a record chained onto `prev_hash` and seals it.
    pub fn seal(sequence: u64, prev_hash: impl Into<String>, event: AuditEvent) -> Self {
        let mut record = AuditRecord {
            sequence,
            logical_time: event.logical_time,
            record_kind: event.kind,
            inputs_digest: event.inputs_digest,
            rulebase_version: event.rulebase_version,
            chosen: event.chosen,
            body: event.body,
            prev_hash: prev_hash.into(),
            this_hash: String::new(),
        };
        record.this_hash = record.compute_hash();
        record
    }

    pub fn compute_hash(&self) -> String {
        digest_json(&HashedFields {
            sequence: self.sequence,
            logical_time: self.logical_time,
            record_kind: self.record_kind,
            inputs_digest: &self.inputs_digest,
            rulebase_version: self.rulebase_version,
            chosen: self.chosen.as_deref(),
            body: &self.body,
            prev_hash: &self.prev_hash,
        })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("audit records serialize")
    }
}

/// Hex SHA-256 of the compact JSON serialization of `value`.
pub fn digest_json<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes to JSON");
    hex::encode(Sha256::digest(&bytes))
}

/// An append-only, single-writer audit log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditLog {
    records: Vec<AuditRecord>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[AuditRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn head_hash(&self) -> &str {
        self.records
            .last()
            .map(|r| r.this_hash.as_str())
            .unwrap_or(GENESIS_HASH)
    }

    pub fn next_sequence(&self) -> u64 {
        self.records.last().map_or(0, |r| r.sequence + 1)
    }

    /// Appends an externally built record after checking it chains onto the
    /// current head.
    pub fn append(&mut self, record: AuditRecord) -> Result<(), AuditError> {
        if record.prev_hash != self.head_hash() {
            return Err(AuditError::ChainBreak {
                sequence: record.sequence,
            });
        }
        if let Some(last) = self.records.last() {
            if record.sequence <= last.sequence {
                return Err(AuditError::SequenceOutOfOrder {
                    sequence: record.sequence,
                    head: last.sequence,
                });
            }
        }
        if record.compute_hash() != record.this_hash {
            return Err(AuditError::HashMismatch {
                sequence: record.sequence,
            });
        }
        self.records.push(record);
        Ok(())
    }

    /// Seals `event` onto the head and appends it.
    pub fn record(&mut self, event: AuditEvent) -> &AuditRecord {
        let record = AuditRecord::seal(self.next_sequence(), self.head_hash(), event);
        self.records.push(record);
        self.records.last().expect("just pushed")
    }

    /// One canonical JSON record per line, each terminated by `\n`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.records {
            out.extend_from_slice(r.to_line().as_bytes());
            out.push(b'\n');
        }
        out
    }

    /// Parses a log and checks the whole chain.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AuditError> {
        let mut log = AuditLog::new();
        for (i, (line, complete)) in lines(bytes).into_iter().enumerate() {
            let malformed = |message: String| AuditError::Malformed {
                line: i + 1,
                message,
            };
            if !complete {
                return Err(malformed("missing line terminator".into()));
            }
            let record = parse_line(line).map_err(malformed)?;
            log.append(record)?;
        }
        Ok(log)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStatus {
    Intact,
    /// Sequence number of the first record that fails verification. For a
    /// line that no longer parses this is the sequence it should have had.
    FirstBreakAt(u64),
}

/// Splits a log into lines. A final line without its terminating newline is
/// returned with `complete = false`.
fn lines(bytes: &[u8]) -> Vec<(&[u8], bool)> {
    if bytes.is_empty() {
        return Vec::new();
    }
    let complete = bytes.ends_with(b"\n");
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    let mut out: Vec<(&[u8], bool)> = body.split(|&b| b == b'\n').map(|l| (l, true)).collect();
    if let Some(last) = out.last_mut() {
        last.1 = complete;
    }
    out
}

fn parse_line(line: &[u8]) -> Result<AuditRecord, String> {
    let record: AuditRecord = serde_json::from_slice(line).map_err(|e| e.to_string())?;
    // Reject anything that is not byte-for-byte canonical, so edits that
    // happen to parse to the same values are still caught.
    if record.to_line().as_bytes() != line {
        return Err("record is not in canonical form".into());
    }
    Ok(record)
}

/// Recomputes every hash and link in a serialized log.
pub fn verify_chain(bytes: &[u8]) -> ChainStatus {
    let mut prev_hash = GENESIS_HASH.to_string();
    let mut prev_seq: Option<u64> = None;
    for (line, complete) in lines(bytes) {
        let expected = prev_seq.map_or(0, |s| s + 1);
        let record = match parse_line(line) {
            Ok(r) if complete => r,
            _ => return ChainStatus::FirstBreakAt(expected),
        };
        let in_order = prev_seq.is_none_or(|s| record.sequence > s);
        if !in_order
            || record.prev_hash != prev_hash
            || record.compute_hash() != record.this_hash
        {
            return ChainStatus::FirstBreakAt(expected);
        }
        prev_hash = record.this_hash;
        prev_seq = Some(record.sequence);
    }
    ChainStatus::Intact
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn event(t: u64) -> AuditEvent {
        AuditEvent {
            kind: RecordKind::Decision,
            logical_time: t,
            inputs_digest: digest_json(&t),
            rulebase_version: Some(1),
            chosen: Some(format!("a{t}")),
            body: json!({"intermediates": {"tuf": [42500.0, 3500.0], "t": t}}),
        }
    }

    #[test]
    fn genesis_append_accepted() {
        let mut log = AuditLog::new();
        let r = AuditRecord::seal(0, GENESIS_HASH, event(0));
        log.append(r).unwrap();
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn stale_prev_hash_rejected() {
        let mut log = AuditLog::new();
        log.record(event(0));
        let stale = AuditRecord::seal(1, GENESIS_HASH, event(1));
        assert_eq!(log.append(stale), Err(AuditError::ChainBreak { sequence: 1 }));
    }

    #[test]
    fn tampered_record_rejected_on_append() {
        let mut log = AuditLog::new();
        let mut r = AuditRecord::seal(0, GENESIS_HASH, event(0));
        r.chosen = Some("other".into());
        assert_eq!(log.append(r), Err(AuditError::HashMismatch { sequence: 0 }));
    }

    #[test]
    fn empty_log_is_intact() {
        assert_eq!(verify_chain(b""), ChainStatus::Intact);
        assert_eq!(AuditLog::from_bytes(b"").unwrap().len(), 0);
    }

    #[test]
    fn thousand_appends_verify() {
        let mut log = AuditLog::new();
        for t in 0..1000 {
            let r = AuditRecord::seal(log.next_sequence(), log.head_hash(), event(t));
            log.append(r).unwrap();
        }
        let bytes = log.to_bytes();
        assert_eq!(verify_chain(&bytes), ChainStatus::Intact);
        assert_eq!(AuditLog::from_bytes(&bytes).unwrap(), log);
    }

    #[test]
    fn flipped_byte_in_record_five_is_located() {
        let mut log = AuditLog::new();
        for t in 0..8 {
            log.record(event(t));
        }
        let bytes = log.to_bytes();
        let line_starts: Vec<usize> = std::iter::once(0)
            .chain(bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').map(|(i, _)| i + 1))
            .collect();
        let line5 = &bytes[line_starts[5]..line_starts[6]];
        let offset = line_starts[5]
            + line5
                .windows(b"intermediates".len())
                .position(|w| w == b"intermediates")
                .unwrap()
            + 20;
        let mut tampered = bytes.clone();
        tampered[offset] ^= 0x01;
        assert_eq!(verify_chain(&tampered), ChainStatus::FirstBreakAt(5));
    }

    #[test]
    fn equivalent_number_spelling_is_detected() {
        let mut log = AuditLog::new();
        log.record(event(0));
        let text = String::from_utf8(log.to_bytes()).unwrap();
        // 42500.0 and 42500e0 parse to the same value.
        let edited = text.replacen("42500.0", "42500e0", 1);
        assert_ne!(edited, text);
        assert_eq!(verify_chain(edited.as_bytes()), ChainStatus::FirstBreakAt(0));
    }
}
