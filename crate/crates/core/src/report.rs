//! Output writers. CSV files open with `# key=value` lines; JSON reports
//! wrap their body as `{"meta": …, "report": …}`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Provenance stamped into every output file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub mode: String,
    pub level: u32,
    pub cutoff_len: usize,
    pub tail_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Meta {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("tool", self.tool.to_string()),
            ("version", self.version.to_string()),
            ("command", self.command.clone()),
            ("config_hash", self.config_hash.clone()),
            ("mode", self.mode.clone()),
            ("level", self.level.to_string()),
            ("cutoff_len", self.cutoff_len.to_string()),
            ("tail_bound", format!("{:e}", self.tail_bound)),
        ];
        if let Some(s) = self.seed {
            v.push(("seed", s.to_string()));
        }
        v
    }
}

pub fn write_csv<R, I>(path: &Path, meta: &Meta, header: &[&str], rows: I) -> std::io::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (k, v) in meta.pairs() {
        writeln!(out, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    meta: &'a Meta,
    report: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, report: &T) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(&Wrapped { meta, report }).map_err(std::io::Error::other)?;
    s.push('\n');
    std::fs::write(path, s)
}

/// Reads the `# key=value` header of a CSV file written by [`write_csv`].
pub fn read_csv_meta(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}
