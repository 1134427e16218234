use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::types::PricePath;

/// Reads a `date,open` CSV: ISO-8601 dates in strictly increasing order and
/// positive decimal prices. Line numbers in errors count the header as line 1.
pub fn load_prices<R: Read>(source: R) -> Result<PricePath> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Data("price file is empty".into()));
    }
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != ["date", "open"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `date,open`, found `{}`", names.join(",")),
        });
    }

    let mut prices = Vec::new();
    let mut labels = Vec::new();
    let mut last_date: Option<NaiveDate> = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date `{}`: {e}", &rec[0]),
        })?;
        let price: f64 = rec[1].parse().map_err(|e| Error::Parse {
            line,
            message: format!("bad price `{}`: {e}", &rec[1]),
        })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::Data(format!(
                "line {line}: price must be positive, got {price}"
            )));
        }
        if let Some(prev) = last_date {
            if date <= prev {
                return Err(Error::Data(format!(
                    "line {line}: date {date} is not after {prev}"
                )));
            }
        }
        last_date = Some(date);
        prices.push(price);
        labels.push(rec[0].to_string());
    }
    if prices.is_empty() {
        return Err(Error::Data("price file has no rows".into()));
    }
    PricePath::with_labels(prices, labels)
}

pub fn load_prices_file(path: &Path) -> Result<PricePath> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    load_prices(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let p = load_prices("date,open\n2016-02-01,100.5".as_bytes()).unwrap();
        assert_eq!(p.prices(), &[100.5]);
        assert_eq!(p.labels().unwrap(), &["2016-02-01".to_string()]);
    }

    #[test]
    fn negative_price_is_data_error() {
        let r = load_prices("date,open\n2016-02-01,-3\n".as_bytes());
        assert!(matches!(r, Err(Error::Data(_))), "{r:?}");
    }

    #[test]
    fn malformed_rows_report_line() {
        let r = load_prices("date,open\n2016-02-01,1\n2016-02-02,abc\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { line: 3, .. })), "{r:?}");
        let r = load_prices("date,open\n2016-02-01,1\n2016-02-02\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { line: 3, .. })), "{r:?}");
        let r = load_prices("date,open\n02/01/2016,1\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { line: 2, .. })), "{r:?}");
        let r = load_prices("day,price\n2016-02-01,1\n".as_bytes());
        assert!(matches!(r, Err(Error::Parse { line: 1, .. })), "{r:?}");
    }

    #[test]
    fn empty_and_unordered() {
        assert!(matches!(load_prices("".as_bytes()), Err(Error::Data(_))));
        assert!(matches!(
            load_prices("date,open\n".as_bytes()),
            Err(Error::Data(_))
        ));
        let r = load_prices("date,open\n2016-02-02,1\n2016-02-01,2\n".as_bytes());
        assert!(matches!(r, Err(Error::Data(_))));
    }

    #[test]
    fn length_bookkeeping() {
        let mut text = String::from("date,open\n");
        let start = NaiveDate::from_ymd_opt(2016, 2, 1).unwrap();
        for i in 0..100 {
            text.push_str(&format!(
                "{},{}\n",
                start + chrono::Days::new(i),
                50.0 + i as f64
            ));
        }
        let p = load_prices(text.as_bytes()).unwrap();
        assert_eq!(p.len(), 100);
    }
}
