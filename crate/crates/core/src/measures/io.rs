use std::io::{Read, Write};

use super::EmpiricalMeasure;
use crate::error::{Error, Result};

impl EmpiricalMeasure {
    /// CSV with header `x1,...,xd`, one point per row, 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.dim()).map(|k| format!("x{k}")).collect();
        w.write_record(&header)?;
        for p in self.points() {
            w.write_record(p.iter().map(|x| format!("{x:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let dim = r.headers()?.len();
        let mut coords = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            if record.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: record.len(),
                });
            }
            for field in record.iter() {
                let x: f64 = field.trim().parse().map_err(|_| Error::Config {
                    field: format!("row {}", row + 1),
                    message: format!("`{field}` is not a number"),
                })?;
                coords.push(x);
            }
        }
        Self::new(dim, coords)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
