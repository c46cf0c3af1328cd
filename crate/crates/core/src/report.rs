//! Pass/fail records for relation sweeps.

use serde::Serialize;

/// One checked instance of a relation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationInstance {
    pub relation: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub lhs: String,
    pub rhs: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl RelationInstance {
    pub fn new(relation: &str, n: usize, i: Option<usize>, j: Option<usize>) -> Self {
        RelationInstance {
            relation: relation.to_string(),
            n,
            i,
            j,
            lhs: String::new(),
            rhs: String::new(),
            passed: false,
            detail: None,
        }
    }

    pub fn with_sides(mut self, lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        self.lhs = lhs.into();
        self.rhs = rhs.into();
        self
    }

    pub fn verdict(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Stable key used to order instances in reports.
    pub fn key(&self) -> (String, usize, Option<usize>, Option<usize>) {
        (self.relation.clone(), self.n, self.i, self.j)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelationReport {
    pub suite: String,
    pub instances: Vec<RelationInstance>,
}

impl RelationReport {
    pub fn new(suite: &str) -> Self {
        RelationReport {
            suite: suite.to_string(),
            instances: Vec::new(),
        }
    }

    pub fn push(&mut self, inst: RelationInstance) {
        self.instances.push(inst);
    }

    pub fn extend(&mut self, other: RelationReport) {
        self.instances.extend(other.instances);
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn all_passed(&self) -> bool {
        self.instances.iter().all(|i| i.passed)
    }

    pub fn passed_count(&self) -> usize {
        self.instances.iter().filter(|i| i.passed).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationInstance> {
        self.instances.iter().filter(|i| !i.passed)
    }

    /// Distinct relation ids in first-seen order.
    pub fn relations(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for i in &self.instances {
            if !out.contains(&i.relation) {
                out.push(i.relation.clone());
            }
        }
        out
    }

    pub fn sort(&mut self) {
        self.instances.sort_by_key(|a| a.key());
    }
}
