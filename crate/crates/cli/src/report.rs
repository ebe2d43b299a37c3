use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::config::Settings;

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub check: String,
    pub instance: String,
    pub passed: bool,
    pub details: Value,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Runtimes are kept out of the JSON so that it is byte-identical across runs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub settings: Settings,
    pub summary: Summary,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(settings: Settings, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| (&a.check, &a.instance).cmp(&(&b.check, &b.instance)));
        let passed = records.iter().filter(|r| r.passed).count();
        let summary = Summary { total: records.len(), passed, failed: records.len() - passed };
        Self { settings, summary, records }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Writes `report.json`, `report.csv` and `timings.csv` into `dir`.
pub fn write(report: &Report, timings: &[(String, String, Duration)], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(dir.join("report.json"), json)?;

    let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
    w.write_record(["check", "instance", "verdict", "error"])?;
    for r in &report.records {
        let error = r.details.get("error").and_then(Value::as_str).unwrap_or("");
        w.write_record([r.check.as_str(), r.instance.as_str(), if r.passed { "pass" } else { "fail" }, error])?;
    }
    w.flush()?;

    let mut sorted: Vec<_> = timings.iter().collect();
    sorted.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut w = csv::Writer::from_path(dir.join("timings.csv"))?;
    w.write_record(["check", "instance", "seconds"])?;
    for (check, instance, t) in sorted {
        w.write_record([check.as_str(), instance.as_str(), &format!("{:.6}", t.as_secs_f64())])?;
    }
    w.flush()?;
    Ok(())
}
