//! `key=value` config files, merged into argv as long flags.

use std::ffi::OsString;
use std::path::Path;

/// Parse `key=value` lines; `#` starts a comment, underscores in keys
/// become hyphens.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: bad key {:?}", i + 1, k.trim()));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Result<Option<OsString>, String> {
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return argv.get(i + 1).cloned().map(Some).ok_or_else(|| "--config needs a path".to_string());
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Ok(Some(p.into()));
        }
    }
    Ok(None)
}

fn has_flag(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let eq = format!("--{key}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&eq)
    })
}

/// Append config entries not already given on the command line. `true`
/// adds a bare switch, `false` drops it.
pub fn inject(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("reading {}: {e}", Path::new(&path).display()))?;
    let mut out = argv.clone();
    for (key, value) in parse(&text)? {
        if has_flag(&argv, &key) {
            continue;
        }
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parse_lines() {
        let kv = parse("# sweep\nn = 100\np_max=50 # inline\n\nsup=true\n").unwrap();
        assert_eq!(kv, vec![("n".into(), "100".into()), ("p-max".into(), "50".into()), ("sup".into(), "true".into())]);
        assert!(parse("novalue").is_err());
        assert!(parse("config=x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "n=100\nk=3\nweighted=false\n").unwrap();
        let argv = os(&["hlm", "count", "--config", path.to_str().unwrap(), "--n", "20"]);
        let merged = inject(argv).unwrap();
        let s: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[5..], ["20", "--k", "3"]);
        assert!(inject(os(&["hlm", "count", "--config"])).is_err());
        assert_eq!(inject(os(&["hlm", "sieve"])).unwrap(), os(&["hlm", "sieve"]));
    }
}
