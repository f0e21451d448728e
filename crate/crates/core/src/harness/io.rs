use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

/// First line of every CSV the crate writes.
pub const CSV_SCHEMA_LINE: &str = "#schema=1";

/// CSV writer whose output starts with [`CSV_SCHEMA_LINE`].
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvOut<W> {
    pub fn new(mut sink: W, header: &[&str]) -> Result<Self> {
        writeln!(sink, "{CSV_SCHEMA_LINE}")?;
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Opens `path` for a schema-tagged CSV, creating parent directories.
pub fn csv_file(path: &Path, header: &[&str]) -> Result<CsvOut<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    CsvOut::new(BufWriter::new(File::create(path)?), header)
}

/// Full-precision float formatting for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}
