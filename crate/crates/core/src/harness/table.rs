use super::config::ResolvedConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ResolvedConfig,
    pub version: String,
    pub started: String,
    pub finished: String,
    /// Scalar results such as fitted slopes.
    #[serde(default)]
    pub summary: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<(String, Vec<f64>)>,
    pub metadata: Metadata,
}

impl ResultTable {
    pub fn new(columns: Vec<(String, Vec<f64>)>, metadata: Metadata) -> Result<ResultTable> {
        let t = ResultTable { columns, metadata };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        let n = self.rows();
        if let Some((name, _)) = self.columns.iter().find(|(_, c)| c.len() != n) {
            return Err(Error::Config {
                field: name.clone(),
                msg: "column length differs from the first column".into(),
            });
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.columns.iter().map(|c| c.0.as_str()))?;
        for i in 0..self.rows() {
            wr.write_record(self.columns.iter().map(|c| c.1[i].to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Write `<prefix>.csv` and `<prefix>.meta.json`; returns both paths.
    pub fn save(&self, prefix: &str) -> Result<(PathBuf, PathBuf)> {
        let csv_path = PathBuf::from(format!("{prefix}.csv"));
        let meta_path = PathBuf::from(format!("{prefix}.meta.json"));
        if let Some(dir) = Path::new(prefix).parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        std::fs::write(&meta_path, serde_json::to_string_pretty(&self.metadata)?)?;
        Ok((csv_path, meta_path))
    }

    /// Read a table back from its two files.
    pub fn load(prefix: &str) -> Result<ResultTable> {
        let meta: Metadata = serde_json::from_str(&std::fs::read_to_string(format!("{prefix}.meta.json"))?)?;
        let mut rd = csv::Reader::from_path(format!("{prefix}.csv"))?;
        let names: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for rec in rd.records() {
            let rec = rec?;
            for (c, field) in cols.iter_mut().zip(rec.iter()) {
                c.push(field.parse().map_err(|_| Error::Config {
                    field: "csv".into(),
                    msg: format!("not a number: {field}"),
                })?);
            }
        }
        ResultTable::new(names.into_iter().zip(cols).collect(), meta)
    }
}
