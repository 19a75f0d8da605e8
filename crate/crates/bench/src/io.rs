//! Instance lists, config resolution and CSV helpers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hhcr_core::{Instance, SolverConfig};

use crate::cli::ConfigArgs;

/// One entry of an instance list.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub path: PathBuf,
    pub ne: usize,
    pub nn: usize,
    pub name: String,
}

impl InstanceSpec {
    pub fn new(path: PathBuf, ne: usize, nn: usize, name: Option<String>) -> Self {
        let name = name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into())
        });
        InstanceSpec { path, ne, nn, name }
    }

    pub fn load(&self, rejection_cost: Option<f64>) -> Result<Instance> {
        let text = fs::read_to_string(&self.path).with_context(|| format!("reading {}", self.path.display()))?;
        Instance::parse(&text, self.ne, self.nn, rejection_cost)
            .with_context(|| format!("parsing {}", self.path.display()))
    }
}

/// Reads `path ne nn [name]` lines; `#` starts a comment. Relative paths
/// resolve against the list file's directory.
pub fn read_instance_list(list: &Path) -> Result<Vec<InstanceSpec>> {
    let text = fs::read_to_string(list).with_context(|| format!("reading {}", list.display()))?;
    let base = list.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 3 || f.len() > 4 {
            bail!("{}:{}: expected `path ne nn [name]`", list.display(), no + 1);
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .with_context(|| format!("{}:{}: `{s}` is not a count", list.display(), no + 1))
        };
        let path = Path::new(f[0]);
        let path = if path.is_absolute() {
            path.to_path_buf()
        } else {
            base.join(path)
        };
        out.push(InstanceSpec::new(
            path,
            parse(f[1])?,
            parse(f[2])?,
            f.get(3).map(|s| s.to_string()),
        ));
    }
    if out.is_empty() {
        bail!("{} lists no instances", list.display());
    }
    Ok(out)
}

/// Defaults, then the config file, then `--set` pairs, then explicit flags.
pub fn resolve_config(args: &ConfigArgs, mu: Option<f64>, lambda: Option<f64>) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_text(&text)
            .with_context(|| format!("config {}", path.display()))?;
    }
    for pair in &args.set {
        let (k, v) = pair
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
        cfg.set(k, v)?;
    }
    if let Some(r) = args.rejection_cost {
        cfg.rejection_cost = Some(r);
    }
    if let Some(m) = mu {
        cfg.mu = m;
    }
    if let Some(l) = lambda {
        cfg.lambda = l;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Shortest decimal form, e.g. `0.8`, `1`.
pub fn fmt_num(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        let dir = std::env::temp_dir().join(format!("hhcr-list-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let list = dir.join("list.txt");
        fs::write(&list, "# header\na.txt 2 3\n/abs/b.txt 4 5 bee # note\n\n").unwrap();
        let specs = read_instance_list(&list).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].path, dir.join("a.txt"));
        assert_eq!(specs[0].name, "a");
        assert_eq!(specs[1].name, "bee");
        assert_eq!((specs[1].ne, specs[1].nn), (4, 5));
        fs::write(&list, "a.txt 2\n").unwrap();
        assert!(read_instance_list(&list).is_err());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn config_precedence() {
        let args = ConfigArgs {
            config: None,
            set: vec!["lambda=0.3".into(), "N=7".into()],
            rejection_cost: Some(4.0),
        };
        let c = resolve_config(&args, None, Some(0.9)).unwrap();
        assert_eq!(c.lambda, 0.9);
        assert_eq!(c.population_size, 7);
        assert_eq!(c.rejection_cost, Some(4.0));
        let bad = ConfigArgs {
            config: None,
            set: vec!["lambda".into()],
            rejection_cost: None,
        };
        assert!(resolve_config(&bad, None, None).is_err());
    }

    #[test]
    fn numbers_are_short() {
        assert_eq!(fmt_num(0.8), "0.8");
        assert_eq!(fmt_num(1.0), "1");
    }
}
