//! Merges aggregate CSVs into one wide table for plotting tools.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::trace::fmt_f64;

/// Mean values below this are written as this, so log axes stay finite.
pub const PLOT_FLOOR: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq)]
pub struct PlotdataReport {
    pub output: PathBuf,
    pub columns: Vec<String>,
    pub rows: usize,
    /// Means raised to [`PLOT_FLOOR`].
    pub floored: usize,
}

struct Series {
    label: String,
    rows: Vec<(u64, f64, f64)>,
}

fn label_of(path: &Path) -> String {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    stem.strip_suffix("_aggregate").map(str::to_string).unwrap_or(stem)
}

fn read_series(path: &Path) -> Result<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: String| Error::invalid(format!("{}: {m}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name || h.trim().ends_with(&format!("_{name}")))
            .ok_or_else(|| bad(format!("no {name} column")))
    };
    let (ct, cm, cs) = (col("t")?, col("mean")?, col("stderr")?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let get = |c: usize| f.get(c).map(|s| s.trim()).ok_or_else(|| bad(format!("row {} is short", i + 1)));
        let num = |c: usize| -> Result<f64> {
            get(c)?
                .parse()
                .map_err(|_| bad(format!("row {}: not a number", i + 1)))
        };
        let t = get(ct)?
            .parse()
            .map_err(|_| bad(format!("row {}: bad t", i + 1)))?;
        rows.push((t, num(cm)?, num(cs)?));
    }
    Ok(Series {
        label: label_of(path),
        rows,
    })
}

/// Writes `t, <label>_mean, <label>_stderr, …` with one column pair per
/// input, labels taken from the file names. Inputs must share the same `t`
/// grid.
pub fn emit_plotdata(inputs: &[PathBuf], out: &Path) -> Result<PlotdataReport> {
    if inputs.is_empty() {
        return Err(Error::invalid("no input traces"));
    }
    let series = inputs.iter().map(|p| read_series(p)).collect::<Result<Vec<_>>>()?;
    let grid: Vec<u64> = series[0].rows.iter().map(|r| r.0).collect();
    for (s, path) in series.iter().zip(inputs).skip(1) {
        let ts: Vec<u64> = s.rows.iter().map(|r| r.0).collect();
        if ts != grid {
            let t = ts
                .iter()
                .zip(&grid)
                .find(|(a, b)| a != b)
                .map(|(a, _)| *a)
                .or_else(|| ts.get(grid.len()).or(grid.get(ts.len())).copied())
                .expect("grids differ");
            return Err(Error::invalid(format!(
                "recording grid of {} differs from {} first at t = {t}",
                path.display(),
                inputs[0].display()
            )));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in &series {
        if !seen.insert(s.label.as_str()) {
            return Err(Error::invalid(format!("duplicate series label {:?}", s.label)));
        }
    }

    let mut columns = vec!["t".to_string()];
    for s in &series {
        columns.push(format!("{}_mean", s.label));
        columns.push(format!("{}_stderr", s.label));
    }
    let mut text = columns.join(",");
    text.push('\n');
    let mut floored = 0;
    for (i, t) in grid.iter().enumerate() {
        write!(text, "{t}").unwrap();
        for s in &series {
            let (_, mut mean, se) = s.rows[i];
            if mean < PLOT_FLOOR {
                mean = PLOT_FLOOR;
                floored += 1;
            }
            write!(text, ",{},{}", fmt_f64(mean), fmt_f64(se)).unwrap();
        }
        text.push('\n');
    }
    writeln!(text, "# floored_to_{}: {floored}", fmt_f64(PLOT_FLOOR)).unwrap();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
    Ok(PlotdataReport {
        output: out.to_path_buf(),
        columns,
        rows: grid.len(),
        floored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn single_input_is_relabelled() {
        let d = tempfile::tempdir().unwrap();
        let body = "t,mean,stderr\n0,0.5,0.1\n10,0.25,0.05\n";
        let a = write(d.path(), "mwu_aggregate.csv", body);
        let out = d.path().join("plot.csv");
        let r = emit_plotdata(&[a], &out).unwrap();
        assert_eq!(r.columns, ["t", "mwu_mean", "mwu_stderr"]);
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,mwu_mean,mwu_stderr"));
        let rest: Vec<&str> = lines.collect();
        assert_eq!(rest[..2], ["0,0.5,0.1", "10,0.25,0.05"]);
        assert_eq!(rest[2], "# floored_to_1e-16: 0");
    }

    #[test]
    fn zeros_are_floored_and_counted() {
        let d = tempfile::tempdir().unwrap();
        let a = write(d.path(), "a_aggregate.csv", "t,mean,stderr\n0,1.0,0.0\n5,0.0,0.0\n");
        let b = write(d.path(), "b_aggregate.csv", "t,mean,stderr\n0,0.0,0.0\n5,1e-3,0.0\n");
        let out = d.path().join("o.csv");
        let r = emit_plotdata(&[a, b], &out).unwrap();
        assert_eq!(r.floored, 2);
        assert_eq!(r.columns.len(), 5);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("5,1e-16,0.0,0.001,0.0"));
        assert!(text.ends_with("# floored_to_1e-16: 2\n"));
    }

    #[test]
    fn grid_mismatch_names_first_t() {
        let d = tempfile::tempdir().unwrap();
        let a = write(d.path(), "a_aggregate.csv", "t,mean,stderr\n0,1,0\n5,1,0\n10,1,0\n");
        let b = write(d.path(), "b_aggregate.csv", "t,mean,stderr\n0,1,0\n6,1,0\n10,1,0\n");
        let c = write(d.path(), "c_aggregate.csv", "t,mean,stderr\n0,1,0\n5,1,0\n");
        let out = d.path().join("o.csv");
        let e = emit_plotdata(&[a.clone(), b], &out).unwrap_err().to_string();
        assert!(e.contains("t = 6"), "{e}");
        let e = emit_plotdata(&[a, c], &out).unwrap_err().to_string();
        assert!(e.contains("t = 10"), "{e}");
        assert!(emit_plotdata(&[], &out).is_err());
    }
}
