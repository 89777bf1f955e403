//! Result tables as CSV.

use std::io::Write;
use std::path::Path;

use super::{create_file, IoError};
use crate::experiment::ResultRow;

fn csv_err(e: csv::Error) -> IoError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => IoError::Stream(e),
        other => IoError::Stream(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_rows(w: &mut impl Write, rows: &[ResultRow]) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ResultRow::HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record(r.fields()).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<(), IoError> {
    let mut f = create_file(path.as_ref())?;
    write_rows(&mut f, rows)?;
    f.flush()?;
    Ok(())
}
