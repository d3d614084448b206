//! Run directories: `manifest.json`, one CSV per table and `summary.txt`.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Environment variable that overrides `--out`.
pub const OUT_ENV: &str = "NLSLAB_OUT";

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub schema_version: u32,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Guard outcomes: Monte-Carlo fallbacks, capped horizons, empty regions.
    pub flags: Vec<String>,
    pub summary: Vec<String>,
    /// Extra files written verbatim into the run directory.
    #[serde(skip)]
    pub attachments: Vec<(String, Vec<u8>)>,
}

/// Shortest round-trip text of a float; empty for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        x.to_string()
    } else {
        String::new()
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            config: BTreeMap::new(),
            seeds: Vec::new(),
            tables: Vec::new(),
            checks: Vec::new(),
            flags: Vec::new(),
            summary: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn table(&mut self, name: &str, columns: &[&str]) -> &mut Table {
        self.tables.push(Table {
            name: name.to_string(),
            schema_version: 1,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        });
        self.tables.last_mut().expect("just pushed")
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.summary
            .push(format!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" }));
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn flag(&mut self, msg: impl Into<String>) {
        self.flags.push(msg.into());
    }

    pub fn attach(&mut self, file: &str, bytes: Vec<u8>) {
        self.attachments.push((file.to_string(), bytes));
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(&self.config).expect("string map serializes");
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update(text.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.columns)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let hash = self.config_hash();
        let mut files = Vec::new();
        for t in &self.tables {
            let file = format!("{}.csv", t.name);
            std::fs::write(dir.join(&file), Self::csv_bytes(t)?)?;
            files.push(serde_json::json!({
                "file": file,
                "schema_version": t.schema_version,
                "columns": t.columns,
                "rows": t.rows.len(),
            }));
        }
        for (file, bytes) in &self.attachments {
            std::fs::write(dir.join(file), bytes)?;
        }
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = serde_json::json!({
            "command": self.command,
            "code_version": env!("CARGO_PKG_VERSION"),
            "run_id": &hash[..12],
            "config_hash": hash,
            "config": self.config,
            "seeds": self.seeds,
            "guards": self.flags,
            "tables": files,
            "attachments": self.attachments.iter().map(|a| &a.0).collect::<Vec<_>>(),
            "checks": self.checks,
            "passed": self.passed(),
            "timestamp_unix": timestamp,
        });
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        let mut summary = format!("{} ({})\n", self.command, &hash[..12]);
        for line in self.summary.iter().chain(self.flags.iter().map(|f| f as &String)) {
            summary.push_str(line);
            summary.push('\n');
        }
        summary.push_str(if self.passed() { "status: ok\n" } else { "status: FAILED\n" });
        std::fs::write(dir.join("summary.txt"), summary)?;
        Ok(())
    }
}

/// `NLSLAB_OUT`, then `--out`, then the config's `output_dir`, then `nlslab-out/<command>`.
pub fn resolve_output_dir(cli: Option<&Path>, configured: Option<String>, command: &str) -> PathBuf {
    if let Some(env) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    cli.map(Path::to_path_buf)
        .or_else(|| configured.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("nlslab-out").join(command))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_writes_manifest_and_exits_zero() {
        let dir = tempfile::tempdir().unwrap();
        let r = RunReport::new("census");
        r.write(dir.path()).unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["passed"], true);
        assert_eq!(r.exit_code(), 0);
        assert_eq!(m["tables"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn failed_check_sets_exit_code_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RunReport::new("verify");
        r.check("soundness", false, "witness [1, -1]");
        let t = r.table("rows", &["a", "b"]);
        t.push(vec![num(1.5), num(f64::NAN)]);
        r.write(dir.path()).unwrap();
        assert_eq!(r.exit_code(), 2);
        let s = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(s.contains("FAIL soundness: witness [1, -1]"));
        assert_eq!(std::fs::read_to_string(dir.path().join("rows.csv")).unwrap(), "a,b\n1.5,\n");
    }

    #[test]
    fn hash_depends_on_config() {
        let mut a = RunReport::new("budget");
        let b = a.clone();
        a.config.insert("seed".into(), "2".into());
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
