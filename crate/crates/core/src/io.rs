//! CSV plumbing: two-column inputs (`x,value`) and row outputs.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampled::SampledFunction;

/// Reads `x,value` rows; a first row that does not parse as numbers is taken
/// as a header.
pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Io(format!("{}: row {} needs two columns", path.display(), i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(v)) => out.push((x, v)),
            _ if i == 0 => continue,
            _ => return Err(Error::Io(format!("{}: row {} is not numeric", path.display(), i + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(out)
}

pub fn read_sampled(path: &Path) -> Result<SampledFunction> {
    let (xs, vs) = read_pairs(path)?.into_iter().unzip();
    SampledFunction::new(xs, vs)
}

/// Writes serializable rows with a header derived from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes plain numeric columns.
pub fn write_columns(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes pre-formatted text cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
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
    fn pairs_with_and_without_header() {
        let dir = std::env::temp_dir().join(format!("curvdim-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let a = dir.join("a.csv");
        std::fs::write(&a, "x,rho\n0,1\n0.5, 2\n").unwrap();
        assert_eq!(read_pairs(&a).unwrap(), vec![(0.0, 1.0), (0.5, 2.0)]);
        let b = dir.join("b.csv");
        std::fs::write(&b, "0,1\n1,3\n").unwrap();
        assert_eq!(read_sampled(&b).unwrap().eval(0.5), 2.0);
        let c = dir.join("c.csv");
        std::fs::write(&c, "0,1\nzz,3\n").unwrap();
        assert!(matches!(read_pairs(&c), Err(Error::Io(_))));
        let out = dir.join("out.csv");
        write_columns(&out, &["r", "v"], &[vec![0.0, 1.5]]).unwrap();
        assert_eq!(std::fs::read_to_string(&out).unwrap(), "r,v\n0,1.5\n");
        std::fs::remove_dir_all(dir).ok();
    }
}
