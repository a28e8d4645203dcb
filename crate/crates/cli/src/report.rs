//! Report envelope, CSV tables, output sinks and the on-disk table cache.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hlm_core::arith::ArithTable;
use serde::Serialize;
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the table cache directory.
pub const DATA_DIR_VAR: &str = "HLM_DATA_DIR";

#[derive(Debug, Serialize)]
pub struct Envelope<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub timestamp: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub seed: u64,
    pub result: &'a Value,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub header: String,
    pub rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Csv {
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }
}

/// What a command hands back for rendering.
#[derive(Debug)]
pub struct Output {
    pub n: Option<u64>,
    pub result: Value,
    pub csv: Csv,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn render_json(command: &str, seed: u64, out: &Output) -> String {
    let env = Envelope {
        command,
        version: VERSION,
        timestamp: timestamp(),
        n: out.n,
        seed,
        result: &out.result,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
    s.push('\n');
    s
}

/// `#` metadata line, header, rows.
pub fn render_csv(command: &str, seed: u64, out: &Output) -> String {
    let n = out.n.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
    let mut s = format!("# hlm {VERSION} command={command} N={n} seed={seed}\n{}\n", out.csv.header);
    for r in &out.csv.rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

fn cache_path(n: usize) -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_DIR_VAR)?;
    Some(PathBuf::from(dir).join(format!("table-{n}.bin")))
}

/// Sieve to `n`, reusing `$HLM_DATA_DIR/table-<n>.bin` when present.
pub fn load_table(n: usize) -> hlm_core::Result<ArithTable> {
    let Some(path) = cache_path(n) else {
        return ArithTable::build(n);
    };
    if let Ok(f) = File::open(&path) {
        if let Ok(t) = ArithTable::read_from(BufReader::new(f)) {
            if t.limit() >= n {
                return Ok(t);
            }
        }
    }
    let table = ArithTable::build(n)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    // Write then rename so concurrent readers never see a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    table.write_to(BufWriter::new(File::create(&tmp)?))?;
    std::fs::rename(&tmp, &path)?;
    Ok(table)
}
