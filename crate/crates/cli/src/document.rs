//! Line-oriented text documents for models and policies.
//!
//! Both formats are versioned, human-diffable, and lossless: floating-point
//! fields are written with Rust's shortest round-trip formatting. A document
//! carries a fingerprint (SHA-256 over the model's exact contents) so stale
//! policies are rejected instead of silently applied to a different model.

use sha2::{Digest, Sha256};
use stmdp::mdp::MdpModel;
use stmdp::trigger::SelfTriggeredPolicy;
use thiserror::Error;

pub const POLICY_HEADER: &str = "stmdp-policy v1";
pub const MODEL_HEADER: &str = "stmdp-model v1";

#[derive(Debug, Error)]
pub enum DocError {
    #[error("unrecognised document header {0:?}")]
    UnknownHeader(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field {0:?}")]
    MissingField(&'static str),
    #[error("document covers state {display} more than once")]
    DuplicateState { display: usize },
    #[error("document covers {got} states, expected {expected}")]
    Coverage { expected: usize, got: usize },
    #[error("fingerprint mismatch: document has {document}, model has {model}")]
    FingerprintMismatch { document: String, model: String },
    #[error("unknown action label {0:?}")]
    UnknownAction(String),
}

/// SHA-256 over the exact model contents (dimensions, transition and cost
/// bits, labels), hex encoded.
pub fn fingerprint(model: &MdpModel) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"stmdp-model-v1\0");
    hasher.update((model.num_states() as u64).to_le_bytes());
    hasher.update((model.num_actions() as u64).to_le_bytes());
    for a in 0..model.num_actions() {
        for x in 0..model.num_states() {
            for y in 0..model.num_states() {
                hasher.update(model.transition_prob(x, a, y).to_bits().to_le_bytes());
            }
        }
    }
    for x in 0..model.num_states() {
        for a in 0..model.num_actions() {
            hasher.update(model.cost(x, a).to_bits().to_le_bytes());
        }
    }
    if let Some(labels) = model.action_labels() {
        for label in labels {
            hasher.update((label.len() as u64).to_le_bytes());
            hasher.update(label.as_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Which synthesis produced a policy, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// Penalized lookahead solve with update penalty O.
    Penalty(f64),
    /// Greedy guaranteed synthesis with suboptimality factor alpha.
    Guarantee(f64),
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Penalty(_) => "penalty",
            ProblemKind::Guarantee(_) => "guarantee",
        }
    }

    /// Key under which the parameter is stored in documents.
    pub fn parameter_key(&self) -> &'static str {
        match self {
            ProblemKind::Penalty(_) => "penalty",
            ProblemKind::Guarantee(_) => "alpha",
        }
    }

    pub fn parameter(&self) -> f64 {
        match self {
            ProblemKind::Penalty(v) | ProblemKind::Guarantee(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRecord {
    pub display: usize,
    pub tau: usize,
    pub action: String,
    pub value: f64,
}

/// A solved policy: fingerprint, solver metadata, and one record per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDocument {
    pub fingerprint: String,
    pub problem: ProblemKind,
    pub beta: f64,
    pub t_bar: usize,
    pub iterations: usize,
    pub residual: f64,
    pub records: Vec<PolicyRecord>,
}

impl PolicyDocument {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(POLICY_HEADER);
        out.push('\n');
        out.push_str(&format!("fingerprint = {}\n", self.fingerprint));
        out.push_str(&format!("problem = {}\n", self.problem.name()));
        out.push_str(&format!(
            "{} = {}\n",
            self.problem.parameter_key(),
            self.problem.parameter()
        ));
        out.push_str(&format!("beta = {}\n", self.beta));
        out.push_str(&format!("t_bar = {}\n", self.t_bar));
        out.push_str(&format!("iterations = {}\n", self.iterations));
        out.push_str(&format!("residual = {}\n", self.residual));
        out.push_str(&format!("states = {}\n", self.records.len()));
        out.push_str("# state\ttau\taction\tvalue\n");
        for r in &self.records {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                r.display, r.tau, r.action, r.value
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, DocError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(DocError::MissingField("header"))?;
        if header != POLICY_HEADER {
            return Err(DocError::UnknownHeader(header.to_string()));
        }
        let mut fingerprint = None;
        let mut problem_name: Option<String> = None;
        let mut parameter = None;
        let mut beta = None;
        let mut t_bar = None;
        let mut iterations = None;
        let mut residual = None;
        let mut states = None;
        let mut records = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once(" = ") {
                let malformed = |message: String| DocError::Malformed {
                    line: line_no,
                    message,
                };
                match key {
                    "fingerprint" => fingerprint = Some(value.to_string()),
                    "problem" => problem_name = Some(value.to_string()),
                    "penalty" | "alpha" => {
                        parameter =
                            Some(value.parse::<f64>().map_err(|_| {
                                malformed(format!("cannot parse parameter {value:?}"))
                            })?)
                    }
                    "beta" => {
                        beta = Some(
                            value
                                .parse::<f64>()
                                .map_err(|_| malformed(format!("cannot parse beta {value:?}")))?,
                        )
                    }
                    "t_bar" => {
                        t_bar = Some(
                            value
                                .parse::<usize>()
                                .map_err(|_| malformed(format!("cannot parse t_bar {value:?}")))?,
                        )
                    }
                    "iterations" => {
                        iterations =
                            Some(value.parse::<usize>().map_err(|_| {
                                malformed(format!("cannot parse iterations {value:?}"))
                            })?)
                    }
                    "residual" => {
                        residual =
                            Some(value.parse::<f64>().map_err(|_| {
                                malformed(format!("cannot parse residual {value:?}"))
                            })?)
                    }
                    "states" => {
                        states = Some(
                            value
                                .parse::<usize>()
                                .map_err(|_| malformed(format!("cannot parse states {value:?}")))?,
                        )
                    }
                    other => {
                        return Err(malformed(format!("unknown key {other:?}")));
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(DocError::Malformed {
                    line: line_no,
                    message: format!("expected 4 tab-separated fields, got {}", fields.len()),
                });
            }
            let bad = |what: &str| DocError::Malformed {
                line: line_no,
                message: format!("cannot parse {what}"),
            };
            records.push(PolicyRecord {
                display: fields[0].parse().map_err(|_| bad("state"))?,
                tau: fields[1].parse().map_err(|_| bad("tau"))?,
                action: fields[2].to_string(),
                value: fields[3].parse().map_err(|_| bad("value"))?,
            });
        }
        let problem_name = problem_name.ok_or(DocError::MissingField("problem"))?;
        let parameter = parameter.ok_or(DocError::MissingField("penalty/alpha"))?;
        let problem = match problem_name.as_str() {
            "penalty" => ProblemKind::Penalty(parameter),
            "guarantee" => ProblemKind::Guarantee(parameter),
            other => {
                return Err(DocError::Malformed {
                    line: 0,
                    message: format!("unknown problem kind {other:?}"),
                })
            }
        };
        let expected = states.ok_or(DocError::MissingField("states"))?;
        let doc = Self {
            fingerprint: fingerprint.ok_or(DocError::MissingField("fingerprint"))?,
            problem,
            beta: beta.ok_or(DocError::MissingField("beta"))?,
            t_bar: t_bar.ok_or(DocError::MissingField("t_bar"))?,
            iterations: iterations.ok_or(DocError::MissingField("iterations"))?,
            residual: residual.ok_or(DocError::MissingField("residual"))?,
            records,
        };
        doc.check_coverage(expected)?;
        Ok(doc)
    }

    /// Every display index 1..=expected exactly once.
    fn check_coverage(&self, expected: usize) -> Result<(), DocError> {
        if self.records.len() != expected {
            return Err(DocError::Coverage {
                expected,
                got: self.records.len(),
            });
        }
        let mut seen = vec![false; expected];
        for r in &self.records {
            if r.display < 1 || r.display > expected {
                return Err(DocError::Coverage {
                    expected,
                    got: r.display,
                });
            }
            if seen[r.display - 1] {
                return Err(DocError::DuplicateState { display: r.display });
            }
            seen[r.display - 1] = true;
        }
        Ok(())
    }

    /// Rejects the document unless its fingerprint matches `model`.
    pub fn check_model(&self, model: &MdpModel) -> Result<(), DocError> {
        let expected = fingerprint(model);
        if self.fingerprint != expected {
            return Err(DocError::FingerprintMismatch {
                document: self.fingerprint.clone(),
                model: expected,
            });
        }
        if self.records.len() != model.num_states() {
            return Err(DocError::Coverage {
                expected: model.num_states(),
                got: self.records.len(),
            });
        }
        Ok(())
    }

    /// Reconstructs the policy, resolving action labels against `model`.
    pub fn to_policy(&self, model: &MdpModel) -> Result<SelfTriggeredPolicy, DocError> {
        let n = model.num_states();
        let mut tau = vec![0usize; n];
        let mut pi = vec![0usize; n];
        for r in &self.records {
            let state = r.display - 1;
            tau[state] = r.tau;
            pi[state] = action_index(model, &r.action)?;
        }
        Ok(SelfTriggeredPolicy::new(tau, pi))
    }
}

fn action_index(model: &MdpModel, label: &str) -> Result<usize, DocError> {
    if let Some(labels) = model.action_labels() {
        if let Some(idx) = labels.iter().position(|l| l == label) {
            return Ok(idx);
        }
    }
    label
        .parse::<usize>()
        .ok()
        .filter(|&a| a < model.num_actions())
        .ok_or_else(|| DocError::UnknownAction(label.to_string()))
}

/// Serializes a model losslessly: dimensions, labels, costs, and sparse
/// transition rows in display indices.
pub fn model_to_text(model: &MdpModel) -> String {
    let n = model.num_states();
    let m = model.num_actions();
    let mut out = String::new();
    out.push_str(MODEL_HEADER);
    out.push('\n');
    out.push_str(&format!("fingerprint = {}\n", fingerprint(model)));
    out.push_str(&format!("states = {n}\n"));
    out.push_str(&format!("actions = {m}\n"));
    let labels: Vec<String> = (0..m).map(|a| model.action_label(a)).collect();
    out.push_str(&format!("labels = {}\n", labels.join("\t")));
    out.push_str("# cost <state>\t<per-action costs>\n");
    for x in 0..n {
        let row: Vec<String> = (0..m).map(|a| model.cost(x, a).to_string()).collect();
        out.push_str(&format!("cost {}\t{}\n", x + 1, row.join("\t")));
    }
    out.push_str("# trans <action> <state>\t<dest>:<prob> ...\n");
    for (a, label) in labels.iter().enumerate() {
        for x in 0..n {
            let mut entries = Vec::new();
            for y in 0..n {
                let p = model.transition_prob(x, a, y);
                if p != 0.0 {
                    entries.push(format!("{}:{}", y + 1, p));
                }
            }
            out.push_str(&format!(
                "trans {label} {}\t{}\n",
                x + 1,
                entries.join("\t")
            ));
        }
    }
    out
}

/// Sparse transition row: `(destination, probability)` pairs.
type SparseRow = Vec<(usize, f64)>;

/// Parses [`model_to_text`] output and re-verifies the embedded fingerprint.
pub fn model_from_text(text: &str) -> Result<MdpModel, DocError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DocError::MissingField("header"))?;
    if header != MODEL_HEADER {
        return Err(DocError::UnknownHeader(header.to_string()));
    }
    let mut stated_fingerprint = None;
    let mut states = None;
    let mut actions = None;
    let mut labels: Option<Vec<String>> = None;
    let mut costs: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut trans: Vec<(String, usize, SparseRow)> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: String| DocError::Malformed {
            line: line_no,
            message,
        };
        if let Some(rest) = line.strip_prefix("cost ") {
            let (state, row) = rest
                .split_once('\t')
                .ok_or_else(|| malformed("cost line needs a tab".into()))?;
            let state: usize = state
                .parse()
                .map_err(|_| malformed(format!("bad state {state:?}")))?;
            let row: Result<Vec<f64>, _> = row.split('\t').map(str::parse).collect();
            costs.push((state, row.map_err(|_| malformed("bad cost value".into()))?));
        } else if let Some(rest) = line.strip_prefix("trans ") {
            let (head, entries) = rest
                .split_once('\t')
                .ok_or_else(|| malformed("trans line needs a tab".into()))?;
            let (label, state) = head
                .rsplit_once(' ')
                .ok_or_else(|| malformed("trans line needs `<action> <state>`".into()))?;
            let state: usize = state
                .parse()
                .map_err(|_| malformed(format!("bad state {state:?}")))?;
            let mut row = Vec::new();
            for entry in entries.split('\t').filter(|e| !e.is_empty()) {
                let (dest, prob) = entry
                    .split_once(':')
                    .ok_or_else(|| malformed(format!("bad entry {entry:?}")))?;
                let dest: usize = dest
                    .parse()
                    .map_err(|_| malformed(format!("bad destination {dest:?}")))?;
                let prob: f64 = prob
                    .parse()
                    .map_err(|_| malformed(format!("bad probability {prob:?}")))?;
                row.push((dest, prob));
            }
            trans.push((label.to_string(), state, row));
        } else if let Some((key, value)) = line.split_once(" = ") {
            match key {
                "fingerprint" => stated_fingerprint = Some(value.to_string()),
                "states" => {
                    states = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| malformed(format!("bad states {value:?}")))?,
                    )
                }
                "actions" => {
                    actions = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| malformed(format!("bad actions {value:?}")))?,
                    )
                }
                "labels" => labels = Some(value.split('\t').map(str::to_string).collect()),
                other => return Err(malformed(format!("unknown key {other:?}"))),
            }
        } else {
            return Err(malformed(format!("unrecognised line {line:?}")));
        }
    }
    let n = states.ok_or(DocError::MissingField("states"))?;
    let m = actions.ok_or(DocError::MissingField("actions"))?;
    let labels = labels.ok_or(DocError::MissingField("labels"))?;
    if labels.len() != m {
        return Err(DocError::Coverage {
            expected: m,
            got: labels.len(),
        });
    }
    let mut cost_table = vec![vec![0.0f64; m]; n];
    for (state, row) in costs {
        if state < 1 || state > n || row.len() != m {
            return Err(DocError::Coverage {
                expected: n,
                got: state,
            });
        }
        cost_table[state - 1] = row;
    }
    let mut matrices = vec![vec![vec![0.0f64; n]; n]; m];
    for (label, state, row) in trans {
        let a = labels
            .iter()
            .position(|l| *l == label)
            .ok_or(DocError::UnknownAction(label))?;
        if state < 1 || state > n {
            return Err(DocError::Coverage {
                expected: n,
                got: state,
            });
        }
        for (dest, prob) in row {
            if dest < 1 || dest > n {
                return Err(DocError::Coverage {
                    expected: n,
                    got: dest,
                });
            }
            matrices[a][state - 1][dest - 1] = prob;
        }
    }
    let model = MdpModel::from_rows(matrices, cost_table)
        .map_err(|e| DocError::Malformed {
            line: 0,
            message: e.to_string(),
        })?
        .with_action_labels(labels)
        .map_err(|e| DocError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
    let stated = stated_fingerprint.ok_or(DocError::MissingField("fingerprint"))?;
    let actual = fingerprint(&model);
    if stated != actual {
        return Err(DocError::FingerprintMismatch {
            document: stated,
            model: actual,
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> MdpModel {
        MdpModel::from_rows(
            vec![
                vec![vec![0.25, 0.75], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            ],
            vec![vec![1.5, 0.0], vec![10.0, 0.125]],
        )
        .unwrap()
        .with_action_labels(vec!["hold", "move"])
        .unwrap()
    }

    fn sample_policy_doc() -> PolicyDocument {
        PolicyDocument {
            fingerprint: fingerprint(&sample_model()),
            problem: ProblemKind::Penalty(0.1),
            beta: 0.95,
            t_bar: 6,
            iterations: 33,
            residual: 7.18771e-6,
            records: vec![
                PolicyRecord {
                    display: 1,
                    tau: 2,
                    action: "hold".into(),
                    value: 91.92798327809038,
                },
                PolicyRecord {
                    display: 2,
                    tau: 6,
                    action: "move".into(),
                    value: 0.2774893,
                },
            ],
        }
    }

    #[test]
    fn policy_document_round_trips() {
        let doc = sample_policy_doc();
        let parsed = PolicyDocument::parse(&doc.to_text()).unwrap();
        assert_eq!(parsed, doc);
    }

    #[test]
    fn guarantee_documents_use_the_alpha_key() {
        let mut doc = sample_policy_doc();
        doc.problem = ProblemKind::Guarantee(1.4);
        let text = doc.to_text();
        assert!(text.contains("problem = guarantee\nalpha = 1.4\n"));
        assert_eq!(PolicyDocument::parse(&text).unwrap(), doc);
    }

    #[test]
    fn duplicate_records_are_rejected() {
        let mut doc = sample_policy_doc();
        doc.records[1].display = 1;
        let err = PolicyDocument::parse(&doc.to_text()).unwrap_err();
        assert!(matches!(err, DocError::DuplicateState { display: 1 }));
    }

    #[test]
    fn model_document_round_trips_bit_exactly() {
        let model = sample_model();
        let text = model_to_text(&model);
        let parsed = model_from_text(&text).unwrap();
        assert_eq!(parsed, model);
        assert_eq!(model_to_text(&parsed), text);
    }

    #[test]
    fn fingerprint_tracks_model_contents() {
        let a = fingerprint(&sample_model());
        let other = MdpModel::from_rows(
            vec![
                vec![vec![0.25, 0.75], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            ],
            vec![vec![1.5, 0.0], vec![10.0, 0.126]],
        )
        .unwrap()
        .with_action_labels(vec!["hold", "move"])
        .unwrap();
        assert_ne!(a, fingerprint(&other));
    }

    #[test]
    fn policies_resolve_action_labels() {
        let model = sample_model();
        let doc = sample_policy_doc();
        let policy = doc.to_policy(&model).unwrap();
        assert_eq!(policy.action(0), 0);
        assert_eq!(policy.action(1), 1);
        assert_eq!(policy.waiting_time(1), 6);
        let mut bad = doc;
        bad.records[0].action = "sideways".into();
        assert!(matches!(
            bad.to_policy(&model),
            Err(DocError::UnknownAction(_))
        ));
    }
}
