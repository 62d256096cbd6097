use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// A `time,<channel>,...` CSV table. Times need not be contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub channels: Vec<String>,
    pub times: Vec<i64>,
    pub values: DenseMatrix,
}

impl Table {
    pub fn from_reader<R: std::io::Read>(reader: R) -> std::result::Result<Self, TableError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut fields = headers.iter();
        match fields.next() {
            Some(h) if h.trim() == "time" => {}
            other => {
                return Err(TableError::Data(format!(
                    "first header column must be `time`, got {other:?}"
                )))
            }
        }
        let channels: Vec<String> = fields.map(|h| h.trim().to_string()).collect();
        if channels.is_empty() {
            return Err(TableError::Data("no channel columns".into()));
        }

        let mut times = Vec::new();
        let mut entries = Vec::new();
        let mut last: Option<i64> = None;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = line + 2;
            let t: i64 = record[0]
                .trim()
                .parse()
                .map_err(|_| TableError::Data(format!("row {row}: bad time `{}`", &record[0])))?;
            if let Some(prev) = last {
                if t <= prev {
                    return Err(TableError::Data(format!(
                        "row {row}: times must be strictly increasing ({t} after {prev})"
                    )));
                }
            }
            last = Some(t);
            times.push(t);
            for (c, field) in record.iter().skip(1).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    TableError::Data(format!("row {row}, column {}: bad value `{field}`", c + 1))
                })?;
                if !v.is_finite() {
                    return Err(TableError::Data(format!(
                        "row {row}, column {}: non-finite value",
                        c + 1
                    )));
                }
                entries.push(v);
            }
        }
        let values = DenseMatrix::new(times.len(), channels.len(), entries)
            .map_err(|e| TableError::Data(e.to_string()))?;
        Ok(Self {
            channels,
            times,
            values,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| e.at(path))
    }

    /// Writes the table; values use the shortest decimal form that parses
    /// back to the same `f64`.
    pub fn write_to<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header)?;
        for (t, row) in self.times.iter().zip(self.values.row_iter()) {
            let mut rec = Vec::with_capacity(row.len() + 1);
            rec.push(t.to_string());
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), &self.to_csv_bytes())
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.column(c)
    }
}

#[derive(Debug)]
pub enum TableError {
    Csv(csv::Error),
    Data(String),
}

impl From<csv::Error> for TableError {
    fn from(e: csv::Error) -> Self {
        TableError::Csv(e)
    }
}

impl TableError {
    fn at(self, path: &Path) -> Error {
        match self {
            TableError::Csv(source) => Error::Csv {
                path: path.to_path_buf(),
                source,
            },
            TableError::Data(msg) => Error::MalformedData(format!("{}: {msg}", path.display())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_writes_back() {
        let text = "time,a,b\n0,1.5,2\n1,-3,0.1\n";
        let t = Table::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.channels, vec!["a", "b"]);
        assert_eq!(t.times, vec![0, 1]);
        assert_eq!(t.values.row(1), &[-3.0, 0.1]);
        assert_eq!(String::from_utf8(t.to_csv_bytes()).unwrap(), text);
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = "time,a,b\n0,1,2\n1,3\n";
        assert!(matches!(
            Table::from_reader(text.as_bytes()),
            Err(TableError::Csv(_))
        ));
    }

    #[test]
    fn non_finite_rejected() {
        for bad in ["NaN", "inf", "-inf"] {
            let text = format!("time,a\n0,{bad}\n");
            assert!(matches!(
                Table::from_reader(text.as_bytes()),
                Err(TableError::Data(_))
            ));
        }
    }

    #[test]
    fn header_and_order_checked() {
        assert!(Table::from_reader("t,a\n0,1\n".as_bytes()).is_err());
        assert!(Table::from_reader("time\n0\n".as_bytes()).is_err());
        assert!(Table::from_reader("time,a\n1,1\n1,2\n".as_bytes()).is_err());
        assert!(Table::from_reader("time,a\nx,1\n".as_bytes()).is_err());
    }
}
