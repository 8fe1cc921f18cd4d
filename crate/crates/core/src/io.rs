//! CSV formats for datasets and grid functions.
//!
//! Datasets carry a header `x1[,x2[,x3]],y`; further named columns are
//! allowed and ignored. Grid functions are written one node per row as
//! `x1[,x2[,x3]],value` in row-major order (last axis fastest). Lines
//! starting with `#` are comments in both formats.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Interval};

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line: line as usize,
        message: message.into(),
    }
}

struct Table {
    header: Vec<String>,
    header_line: u64,
    /// (1-based line number, parsed cells)
    rows: Vec<(u64, Vec<f64>)>,
}

fn read_table(reader: impl Read) -> Result<Table> {
    let mut rdr = ReaderBuilder::new()
        .flexible(true)
        .quoting(false)
        .trim(Trim::All)
        .has_headers(false)
        .from_reader(reader);
    // comments are skipped here rather than by the reader so that reported
    // line numbers count every physical line
    let is_skipped = |rec: &StringRecord| {
        rec.iter().all(str::is_empty) || rec.get(0).is_some_and(|c| c.starts_with('#'))
    };
    let mut records = rdr.records();
    let (header, header_line) = loop {
        match records.next() {
            None => return Err(parse_err(1, "missing header row")),
            Some(r) => {
                let rec = r.map_err(csv_err)?;
                if is_skipped(&rec) {
                    continue;
                }
                let line = rec.position().map_or(1, |p| p.line());
                break (rec.iter().map(str::to_owned).collect::<Vec<_>>(), line);
            }
        }
    };
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_err(
                header_line,
                format!("column {} has an empty name", i + 1),
            ));
        }
        if header[..i].contains(name) {
            return Err(parse_err(header_line, format!("duplicate column '{name}'")));
        }
    }
    let mut rows = Vec::new();
    for r in records {
        let rec: StringRecord = r.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if is_skipped(&rec) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let mut cells = Vec::with_capacity(rec.len());
        for (name, cell) in header.iter().zip(rec.iter()) {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(line, format!("column '{name}': '{cell}' is not a number"))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!("column '{name}': non-finite value '{cell}'"),
                ));
            }
            cells.push(v);
        }
        rows.push((line, cells));
    }
    Ok(Table {
        header,
        header_line,
        rows,
    })
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => parse_err(line, format!("{other:?}")),
    }
}

/// Positions of the columns `x1..xp` followed by the response column.
fn locate_columns(table: &Table, response: &str) -> Result<(Vec<usize>, usize)> {
    let (header, line) = (&table.header, table.header_line);
    let find = |name: &str| header.iter().position(|h| h == name);
    let xcols: Vec<usize> = (1..=3).map_while(|k| find(&format!("x{k}"))).collect();
    if xcols.is_empty() {
        return Err(parse_err(line, "header has no 'x1' column"));
    }
    if let Some(k) = (xcols.len() + 1..=9).find(|k| find(&format!("x{k}")).is_some()) {
        return Err(parse_err(
            line,
            format!(
                "column 'x{k}' present but predictors must be x1..x{} with p <= 3",
                xcols.len()
            ),
        ));
    }
    let y = find(response)
        .ok_or_else(|| parse_err(line, format!("header has no '{response}' column")))?;
    Ok((xcols, y))
}

/// Reads a dataset; the domain defaults to the bounding box of the
/// predictors.
pub fn read_dataset(reader: impl Read, domain: Option<Vec<Interval>>) -> Result<Dataset> {
    let table = read_table(reader)?;
    let (xcols, ycol) = locate_columns(&table, "y")?;
    if table.rows.is_empty() {
        return Err(Error::InvalidDataset("no data rows".into()));
    }
    let xs = table
        .rows
        .iter()
        .map(|(_, r)| xcols.iter().map(|&c| r[c]).collect())
        .collect();
    let ys = table.rows.iter().map(|(_, r)| r[ycol]).collect();
    match domain {
        Some(d) => Dataset::new(xs, ys, d),
        None => Dataset::with_bounding_domain(xs, ys),
    }
}

pub fn parse_dataset_csv(path: impl AsRef<Path>, domain: Option<Vec<Interval>>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_dataset(file, domain)
}

fn write_number(out: &mut impl Write, v: f64) -> std::io::Result<()> {
    // `{}` on f64 prints the shortest representation that round-trips
    write!(out, "{v}")
}

pub fn write_dataset(data: &Dataset, mut out: impl Write) -> Result<()> {
    for k in 1..=data.dim() {
        write!(out, "x{k},")?;
    }
    writeln!(out, "y")?;
    for (x, y) in data.xs().iter().zip(data.ys()) {
        for v in x {
            write_number(&mut out, *v)?;
            write!(out, ",")?;
        }
        write_number(&mut out, *y)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Writes a grid function, optionally with extra value columns sharing its grid.
pub fn write_grid_columns(columns: &[(&str, &GridFunction)], mut out: impl Write) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::InvalidInput("no columns to write".into()));
    };
    if let Some((name, _)) = columns.iter().find(|(_, g)| !g.same_grid(first)) {
        return Err(Error::GridMismatch(format!(
            "column '{name}' lives on a different grid"
        )));
    }
    let grid = first.grid();
    for k in 1..=grid.dim() {
        write!(out, "x{k},")?;
    }
    let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(out, "{}", names.join(","))?;
    let values: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| c.1.values().iter().copied().collect())
        .collect();
    for (i, node) in grid.nodes().iter().enumerate() {
        for x in node {
            write_number(&mut out, *x)?;
            write!(out, ",")?;
        }
        for (j, col) in values.iter().enumerate() {
            if j > 0 {
                write!(out, ",")?;
            }
            write_number(&mut out, col[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_grid_function(f: &GridFunction, out: impl Write) -> Result<()> {
    write_grid_columns(&[("value", f)], out)
}

/// Reads a grid function, recovering the axes from the node coordinates.
pub fn read_grid_function(reader: impl Read) -> Result<GridFunction> {
    let table = read_table(reader)?;
    let (xcols, vcol) = locate_columns(&table, "value")?;
    let p = xcols.len();
    if table.rows.is_empty() {
        return Err(Error::InvalidGrid("no grid nodes".into()));
    }
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (_, row) in &table.rows {
        for (k, &c) in xcols.iter().enumerate() {
            if !axes[k].contains(&row[c]) {
                axes[k].push(row[c]);
            }
        }
    }
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
    }
    let grid = Arc::new(Grid::new(axes)?);
    if table.rows.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} rows do not form a full {:?} tensor grid",
            table.rows.len(),
            grid.shape()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for ((line, row), node) in table.rows.iter().zip(grid.nodes()) {
        if xcols.iter().zip(&node).any(|(&c, &x)| row[c] != x) {
            return Err(parse_err(*line, "nodes are not in row-major order"));
        }
        values.push(row[vcol]);
    }
    GridFunction::from_vec(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_file() {
        let d = read_dataset("x1,y\n0.1,2.0\n0.9,3.0".as_bytes(), None).unwrap();
        assert_eq!((d.dim(), d.len()), (1, 2));
        assert_eq!(d.ys(), &[2.0, 3.0]);
    }

    #[test]
    fn comments_extra_columns_and_column_order() {
        let text = "# toxicology layout\ny,events,x2,x1\n# between rows\n0.5,1,0,0\n0.7,2,1,1\n";
        let d = read_dataset(text.as_bytes(), None).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.xs()[1], vec![1.0, 1.0]);
        assert_eq!(d.ys(), &[0.5, 0.7]);
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_line() {
        let e = read_dataset("x1,y\n0.1,2.0\n0.5,inf\n".as_bytes(), None).unwrap_err();
        assert_eq!(line_of(e), 3);
        let e = read_dataset("x1,y\n0.1,2.0\n0.5\n".as_bytes(), None).unwrap_err();
        assert_eq!(line_of(e), 3);
        let e = read_dataset("x1,y\n0.1,abc\n".as_bytes(), None).unwrap_err();
        assert_eq!(line_of(e), 2);
        let e = read_dataset("x1,y\n0.1,NaN\n0.2,1\n".as_bytes(), None).unwrap_err();
        assert_eq!(line_of(e), 2);
        let e = read_dataset("#c\nx1,x1,y\n1,2,3\n".as_bytes(), None).unwrap_err();
        assert_eq!(line_of(e), 2);
        assert!(read_dataset("x2,y\n1,2\n".as_bytes(), None).is_err());
        assert!(read_dataset("x1,x2,x3,x4,y\n1,2,3,4,5\n".as_bytes(), None).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let d = Dataset::with_bounding_domain(
            vec![vec![0.1, 2.0], vec![0.3, 1.0], vec![1.0 / 3.0, 1.5]],
            vec![1.0, -2.5, 1e-17],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice(), None).unwrap();
        assert_eq!(back.xs(), d.xs());
        assert_eq!(back.ys(), d.ys());
    }

    #[test]
    fn grid_function_round_trip() {
        let g = Arc::new(Grid::new(vec![vec![0.0, 0.5, 1.0], vec![-1.0, 2.0]]).unwrap());
        let f = GridFunction::from_fn(g, |x| x[0] * 10.0 + x[1] / 3.0).unwrap();
        let mut buf = Vec::new();
        write_grid_function(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,value\n0,-1,"));
        let back = read_grid_function(buf.as_slice()).unwrap();
        assert_eq!(back.grid().axes(), f.grid().axes());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn grid_function_rejects_holes_and_disorder() {
        assert!(read_grid_function("x1,x2,value\n0,0,1\n0,1,1\n1,0,1\n".as_bytes()).is_err());
        let e =
            read_grid_function("x1,x2,value\n0,0,1\n1,0,1\n0,1,1\n1,1,1\n".as_bytes()).unwrap_err();
        assert_eq!(line_of(e), 3);
    }
}
