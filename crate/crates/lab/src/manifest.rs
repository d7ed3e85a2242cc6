//! Run manifests, appended as JSON lines to `manifest.jsonl` in the output
//! directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

pub const FILE_NAME: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Partial,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub outputs: Vec<PathBuf>,
    pub status: Status,
    pub wall_time: f64,
}

impl RunManifest {
    /// Outputs listed but absent on disk.
    pub fn missing_outputs(&self) -> Vec<&Path> {
        self.outputs.iter().filter(|p| !p.exists()).map(|p| p.as_path()).collect()
    }

    pub fn to_json_line(&self) -> String {
        json!({
            "command": self.command,
            "config_path": self.config_path.as_ref().map(|p| p.to_string_lossy()),
            "seed": self.seed,
            "outputs": self.outputs.iter().map(|p| p.to_string_lossy()).collect::<Vec<_>>(),
            "status": self.status.name(),
            "wall_time": self.wall_time,
        })
        .to_string()
    }

    /// Appends to `dir/manifest.jsonl`. A passing manifest whose outputs
    /// are not all on disk is demoted to a failure first.
    pub fn append(mut self, dir: &Path) -> std::io::Result<Self> {
        if self.status == Status::Pass && !self.missing_outputs().is_empty() {
            self.status = Status::Fail;
        }
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(FILE_NAME))?;
        writeln!(f, "{}", self.to_json_line())?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appends_one_line_per_invocation() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("a.csv");
        std::fs::write(&out, "x").unwrap();
        let m = RunManifest {
            command: "run".into(),
            config_path: Some("c.json".into()),
            seed: 7,
            outputs: vec![out.clone()],
            status: Status::Pass,
            wall_time: 0.5,
        };
        assert_eq!(m.clone().append(dir.path()).unwrap().status, Status::Pass);
        let gone = RunManifest { outputs: vec![dir.path().join("gone.csv")], ..m };
        assert_eq!(gone.append(dir.path()).unwrap().status, Status::Fail);
        let text = std::fs::read_to_string(dir.path().join(FILE_NAME)).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["outputs"][0], out.to_string_lossy().as_ref());
    }
}
