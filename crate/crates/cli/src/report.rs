//! The versioned JSON report and its text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use pisym::execution::Execution;
use pisym::symexec::{Round, RoundCase, SymmetricExecution};
use pisym::symmetry::SymmetricNetwork;
use pisym::{canonical, Process, Transition};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "pisym-report/1";

/// A network descriptor, as given on the command line or in a TOML file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NetDescriptor {
    pub base: String,
    #[serde(default)]
    pub perm: String,
    pub degree: usize,
    #[serde(default)]
    pub restrict: Vec<String>,
}

impl NetDescriptor {
    pub fn of(net: &SymmetricNetwork) -> Self {
        NetDescriptor {
            base: net.base().to_string(),
            perm: net.relation().perm().to_string(),
            degree: net.degree(),
            restrict: net.restriction().iter().map(|x| x.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Input {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetDescriptor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepReport {
    pub label: String,
    pub target: String,
    pub canonical: String,
    pub actors: Vec<usize>,
}

impl StepReport {
    pub fn of(t: &Transition) -> Self {
        StepReport {
            label: t.label.to_string(),
            target: t.target.to_string(),
            canonical: canonical_text(&t.target),
            actors: t.actors.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub labels: Vec<String>,
    pub steps: Vec<StepReport>,
    #[serde(rename = "final")]
    pub final_term: String,
    pub maximal: bool,
    pub truncated: bool,
    pub cycle: bool,
}

impl ExecutionReport {
    pub fn of(e: &Execution) -> Self {
        ExecutionReport {
            labels: e.labels().iter().map(|l| l.to_string()).collect(),
            steps: e.steps.iter().map(StepReport::of).collect(),
            final_term: e.final_term().to_string(),
            maximal: e.maximal,
            truncated: e.truncated,
            cycle: e.cycle,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundReport {
    pub case: String,
    pub labels: Vec<String>,
    pub steps: Vec<StepReport>,
    pub sigma: String,
    pub restriction: Vec<String>,
    pub term: String,
}

impl RoundReport {
    pub fn of(r: &Round) -> Self {
        RoundReport {
            case: match r.case {
                RoundCase::Internal { actor } => format!("internal({actor})"),
                RoundCase::Communication { sender, receiver } => format!("communication({sender},{receiver})"),
            },
            labels: r.labels.iter().map(|l| l.to_string()).collect(),
            steps: r.steps.iter().map(StepReport::of).collect(),
            sigma: r.sigma().perm().to_string(),
            restriction: r.restriction().iter().map(|x| x.to_string()).collect(),
            term: r.network.denote().to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub input: Input,
    pub bounds: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub executions: Vec<ExecutionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma_chain: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionReport>,
    pub verdict: String,
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Report {
    pub fn new(command: &str, input: Input) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            input,
            bounds: BTreeMap::new(),
            steps: Vec::new(),
            executions: Vec::new(),
            rounds: Vec::new(),
            sigma_chain: Vec::new(),
            criteria: Vec::new(),
            verdict: "ok".to_string(),
            truncated: false,
            detail: None,
        }
    }

    pub fn bound(mut self, key: &str, value: usize) -> Self {
        self.bounds.insert(key.to_string(), value);
        self
    }

    pub fn with_execution(&mut self, ex: &SymmetricExecution) {
        self.rounds = ex.rounds.iter().map(RoundReport::of).collect();
        self.sigma_chain = ex.sigma_chain().iter().map(|s| s.perm().to_string()).collect();
        self.truncated = !ex.complete;
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(t) = &self.input.term {
            let _ = writeln!(out, "term: {t}");
        }
        if let Some(n) = &self.input.network {
            let _ = writeln!(
                out,
                "network: base `{}`, perm `{}`, degree {}, restrict [{}]",
                n.base,
                n.perm,
                n.degree,
                n.restrict.join(",")
            );
        }
        for s in &self.steps {
            let _ = writeln!(out, "  --{}--> {}  {:?}", s.label, s.target, s.actors);
        }
        for (i, e) in self.executions.iter().enumerate() {
            let tag = if e.maximal {
                "maximal"
            } else if e.cycle {
                "cycle"
            } else {
                "truncated"
            };
            let _ = writeln!(out, "  #{i} [{tag}] {}", e.labels.join(" "));
        }
        for (i, r) in self.rounds.iter().enumerate() {
            let _ = writeln!(out, "  round {i} {}: {}", r.case, r.labels.join(", "));
            let _ = writeln!(out, "    σ = {{{}}}  ν [{}]", r.sigma, r.restriction.join(","));
            let _ = writeln!(out, "    {}", r.term);
        }
        for c in &self.criteria {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  [{mark}] {:>2} {}: {}", c.id, c.title, c.detail);
        }
        if let Some(d) = &self.detail {
            let _ = writeln!(out, "{d}");
        }
        let trunc = if self.truncated { " (truncated)" } else { "" };
        let _ = writeln!(out, "verdict: {}{trunc}", self.verdict);
        out
    }
}

pub fn canonical_text(p: &Process) -> String {
    canonical(p).term().to_string()
}
