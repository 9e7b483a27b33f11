//! Output files: CSV with a header row and 17 significant digits, plus
//! bookkeeping of every file a run writes.

use std::path::{Path, PathBuf};

use multisense_core::{DVector, C64};

use crate::CliError;

/// Lossless round-trip formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes into one output directory and remembers what was written.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn record(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
    }

    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_path(self.path(name)).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>())
                .map_err(csv_err)?;
        }
        w.flush()?;
        self.record(name);
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.path(name), data)?;
        self.record(name);
        Ok(())
    }

    pub fn vector(&mut self, name: &str, v: &DVector<C64>) -> Result<(), CliError> {
        self.csv(
            name,
            &["index", "re", "im"],
            v.iter()
                .enumerate()
                .map(|(i, z)| vec![i.to_string(), fmt_f64(z.re), fmt_f64(z.im)]),
        )
    }
}

pub fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

/// Reads a header-led CSV into string records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Reads a complex vector from a CSV with `re` and `im` columns.
pub fn read_vector(path: &Path) -> Result<DVector<C64>, CliError> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{}: missing column '{name}'", path.display())))
    };
    let (re, im) = (col("re")?, col("im")?);
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("{}: bad number '{s}': {e}", path.display())))
    };
    let values = rows
        .iter()
        .map(|r| Ok(C64::new(parse(&r[re])?, parse(&r[im])?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(DVector::from_vec(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        let v = DVector::from_vec(vec![C64::new(0.1, -0.2), C64::new(1e-17, 3.0)]);
        out.vector("v.csv", &v).unwrap();
        assert_eq!(read_vector(&out.path("v.csv")).unwrap(), v);
        assert_eq!(out.written(), ["v.csv"]);
    }
}
