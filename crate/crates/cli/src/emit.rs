//! CSV and JSON writers for result tables.
//!
//! CSV numbers use 15 significant digits in scientific notation so the same
//! table always produces the same bytes. JSON numbers use the shortest
//! representation that parses back to the identical `f64`.

use carvesim::table::{Cell, Table};
use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        x.to_string()
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => format_number(*x),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// Config lines as `# key=value`, then the column header, then one line per row.
pub fn to_csv(table: &Table, echo: &[(String, String)]) -> Result<String, CliError> {
    let mut out = Vec::new();
    for (k, v) in echo {
        out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_field)).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// An array of row objects keyed by column name. Skipped cells become `null`.
pub fn to_json(table: &Table) -> Result<String, CliError> {
    let mut rows = Vec::with_capacity(table.len());
    for row in &table.rows {
        let mut obj = Map::new();
        for (name, cell) in table.columns.iter().zip(row) {
            if let Cell::Num(x) = cell {
                if !x.is_finite() {
                    return Err(CliError::Output(format!(
                        "column {name} holds {x}, which JSON cannot represent"
                    )));
                }
            }
            obj.insert(
                name.clone(),
                serde_json::to_value(cell).map_err(|e| CliError::Output(e.to_string()))?,
            );
        }
        rows.push(Value::Object(obj));
    }
    let mut s = serde_json::to_string_pretty(&rows).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses [`to_json`] output back into a table. Column order follows the
/// first row; an empty array gives a table without columns.
pub fn table_from_json(text: &str) -> Result<Table, CliError> {
    let bad = |m: String| CliError::Output(format!("JSON table: {m}"));
    let rows: Vec<Map<String, Value>> =
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let Some(first) = rows.first() else {
        return Ok(Table::default());
    };
    let mut table = Table::new(first.keys().cloned());
    for (i, obj) in rows.iter().enumerate() {
        if obj.len() != table.columns.len() {
            return Err(bad(format!(
                "row {i} has {} fields, expected {}",
                obj.len(),
                table.columns.len()
            )));
        }
        let row = table
            .columns
            .iter()
            .map(|c| {
                let v = obj
                    .get(c)
                    .ok_or_else(|| bad(format!("row {i} lacks column {c}")))?;
                serde_json::from_value(v.clone()).map_err(|e| bad(e.to_string()))
            })
            .collect::<Result<Vec<Cell>, _>>()?;
        table.push(row);
    }
    Ok(table)
}

pub fn render(
    table: &Table,
    echo: &[(String, String)],
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Csv => to_csv(table, echo),
        Format::Json => to_json(table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["a", "n", "status", "x"]);
        t.push(vec![
            0.1.into(),
            3usize.into(),
            "ok".into(),
            (1.0 / 3.0).into(),
        ]);
        t.push(vec![
            1e-300.into(),
            0usize.into(),
            "skipped".into(),
            Cell::Empty,
        ]);
        t.push(vec![(-0.0).into(), 7usize.into(), "ok".into(), 1.0.into()]);
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["a", "b"]);
        assert_eq!(to_csv(&t, &[]).unwrap(), "a,b\n");
        assert_eq!(to_json(&t).unwrap(), "[]\n");
    }

    #[test]
    fn one_row_csv() {
        let mut t = Table::new(["x", "status"]);
        t.push(vec![0.5.into(), "ok".into()]);
        let s = to_csv(&t, &[("cooperativity".into(), "20".into())]).unwrap();
        assert_eq!(s, "# cooperativity=20\nx,status\n5.00000000000000e-1,ok\n");
    }

    #[test]
    fn csv_keeps_fifteen_digits() {
        let s = format_number(1.0 / 3.0);
        assert_eq!(s, "3.33333333333333e-1");
        let back: f64 = s.parse().unwrap();
        assert!((back - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trips_exactly() {
        let t = sample();
        let back = table_from_json(&to_json(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            if let (Cell::Num(x), Cell::Num(y)) = (a, b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn json_rejects_non_finite() {
        let mut t = Table::new(["x"]);
        t.push(vec![f64::NAN.into()]);
        assert!(to_json(&t).is_err());
    }
}
