use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One named assertion with the measured value and its limit.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub pass: bool,
}

impl Certificate {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            limit,
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            limit,
            pass: value >= limit,
        }
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "[{}] {}: {:.6e} {rel} {:.6e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit
        )
    }
}

/// Everything a command produces, held in memory until the run finishes.
#[derive(Default)]
pub struct Output {
    prefix: String,
    pub certificates: Vec<Certificate>,
    pub data: serde_json::Map<String, Value>,
    pub files: Vec<(String, String)>,
}

impl Output {
    /// Names of certificates, data keys and files gain `prefix` until reset.
    pub fn set_prefix(&mut self, prefix: &str) {
        self.prefix = prefix.to_string();
    }

    fn name(&self, s: &str) -> String {
        if self.prefix.is_empty() {
            s.to_string()
        } else {
            format!("{}.{s}", self.prefix)
        }
    }

    pub fn cert(&mut self, mut c: Certificate) {
        c.name = self.name(&c.name);
        self.certificates.push(c);
    }

    pub fn data(&mut self, key: &str, v: impl Serialize) {
        let k = self.name(key);
        self.data.insert(k, serde_json::to_value(v).expect("serializable"));
    }

    pub fn file(&mut self, name: &str, contents: String) {
        let n = if self.prefix.is_empty() {
            name.to_string()
        } else {
            format!("{}_{name}", self.prefix)
        };
        self.files.push((n, contents));
    }

    /// Appends everything `other` produced, keeping its names.
    pub fn merge(&mut self, other: Output) {
        self.certificates.extend(other.certificates);
        self.data.extend(other.data);
        self.files.extend(other.files);
    }

    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    tol_scale: f64,
    pass: bool,
    certificates: &'a [Certificate],
    data: &'a serde_json::Map<String, Value>,
}

pub fn write(out_dir: &Path, command: &str, hash: &str, seed: u64, tol_scale: f64, o: &Output) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (name, contents) in &o.files {
        let p = out_dir.join(name);
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    }
    let r = Report {
        schema: 1,
        command,
        config_hash: hash,
        seed,
        tol_scale,
        pass: o.passed(),
        certificates: &o.certificates,
        data: &o.data,
    };
    let mut text = serde_json::to_string_pretty(&r)?;
    text.push('\n');
    let p = out_dir.join("report.json");
    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
    Ok(())
}
