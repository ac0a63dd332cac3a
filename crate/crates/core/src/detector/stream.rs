use crate::{Error, Result};

pub const ALARM_CSV_HEADER: &str = "t,statistic,khat,fired";

/// Splits one CSV stream row into `dim` fields. Empty fields are `None`
/// and are only accepted when `allow_missing` is set.
pub fn parse_stream_row(
    line: &str,
    line_no: usize,
    dim: usize,
    allow_missing: bool,
) -> Result<Vec<Option<f64>>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: fields.len(),
        });
    }
    fields
        .iter()
        .map(|f| {
            if f.is_empty() {
                if allow_missing {
                    Ok(None)
                } else {
                    Err(Error::parse(line_no, "empty field outside missing-data mode"))
                }
            } else {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Some)
                    .ok_or_else(|| Error::parse(line_no, format!("bad value `{f}`")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        assert_eq!(
            parse_stream_row("1, 2.5,-3", 1, 3, false).unwrap(),
            vec![Some(1.0), Some(2.5), Some(-3.0)]
        );
        assert_eq!(
            parse_stream_row("1,,3", 1, 3, true).unwrap(),
            vec![Some(1.0), None, Some(3.0)]
        );
        assert!(parse_stream_row("1,,3", 1, 3, false).is_err());
        assert!(matches!(
            parse_stream_row("1,2", 1, 3, false),
            Err(Error::Dimension { .. })
        ));
        match parse_stream_row("1,x,3", 7, 3, false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }
}
