use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    /// The statement the check exercises.
    pub anchor: String,
    pub status: Status,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub tower: String,
    pub depth: usize,
    pub suite: String,
    pub seed: u64,
    pub objects: Vec<String>,
    pub self_test: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub config: ConfigEcho,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl CheckReport {
    /// Records are put in canonical (suite, name) order.
    pub fn new(config: ConfigEcho, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| (&a.suite, &a.name).cmp(&(&b.suite, &b.name)));
        let count = |s| records.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            total: records.len(),
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            skip: count(Status::Skip),
        };
        CheckReport {
            config,
            records,
            summary,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }
}

/// Pretty JSON with keys sorted at every depth.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

pub fn to_text(report: &CheckReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        out.push_str(&format!(
            "{} {}/{} [{}] {}\n",
            r.status.tag(),
            r.suite,
            r.name,
            r.anchor,
            serde_json::to_string(&r.payload).expect("values serialize")
        ));
    }
    let s = &report.summary;
    out.push_str(&format!(
        "summary: {} checks, {} pass, {} fail, {} skip (tower {}, depth {}, seed {})\n",
        s.total,
        s.pass,
        s.fail,
        s.skip,
        report.config.tower,
        report.config.depth,
        report.config.seed
    ));
    out
}
