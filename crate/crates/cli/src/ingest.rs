//! Long-format CSV input: `series_id, period, value, x1, …, xN`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use hnbss::eval::{seasonal_row, SeasonalEncoding};
use hnbss::model::{GroupDataset, SeriesData};

use crate::error::{CliError, Result};

const PERIOD_COLUMNS: [&str; 3] = ["period", "period_index", "date"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    Index(i64),
    Date(NaiveDate),
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Index(i) => write!(f, "{i}"),
            Period::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

/// Series aligned on a common period axis. Cells absent from the file have
/// no value and no covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub ids: Vec<String>,
    pub periods: Vec<Period>,
    pub covariate_names: Vec<String>,
    /// `[series][period]`
    pub values: Vec<Vec<Option<u64>>>,
    pub covariates: Vec<Vec<Option<Vec<f64>>>>,
}

fn input_error(row: u64, column: &str, message: impl Into<String>) -> CliError {
    CliError::Input {
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn parse_period(text: &str, row: u64, column: &str) -> Result<Period> {
    let text = text.trim();
    if let Ok(i) = text.parse::<i64>() {
        return Ok(Period::Index(i));
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map(Period::Date)
        .map_err(|_| {
            input_error(
                row,
                column,
                format!("expected an integer index or YYYY-MM-DD date, got '{text}'"),
            )
        })
}

fn parse_value(text: &str, row: u64) -> Result<Option<u64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    text.parse::<u64>().map(Some).map_err(|_| {
        input_error(
            row,
            "value",
            format!("expected a non-negative integer or an empty cell, got '{text}'"),
        )
    })
}

/// Every integer between the smallest and largest index, or the regular
/// date grid when all dates share a common spacing.
fn build_axis(seen: &BTreeSet<Period>) -> Vec<Period> {
    let first = *seen.first().expect("non-empty axis");
    let last = *seen.last().expect("non-empty axis");
    match (first, last) {
        (Period::Index(a), Period::Index(b)) => (a..=b).map(Period::Index).collect(),
        (Period::Date(a), _) => {
            let days: Vec<i64> = seen
                .iter()
                .map(|p| match p {
                    Period::Date(d) => (*d - a).num_days(),
                    Period::Index(_) => unreachable!("mixed axes are rejected"),
                })
                .collect();
            let step = date_step(&days);
            match step {
                Some(s) if days.iter().all(|d| d % s == 0) => (0..=days[days.len() - 1] / s)
                    .map(|k| Period::Date(a + chrono::Duration::days(k * s)))
                    .collect(),
                _ => seen.iter().copied().collect(),
            }
        }
        _ => unreachable!("mixed axes are rejected"),
    }
}

fn date_step(days: &[i64]) -> Option<i64> {
    days.windows(2).map(|w| w[1] - w[0]).min()
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_table(file)
}

pub fn parse_table<R: std::io::Read>(input: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| input_error(1, "header", e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3
        || names[0] != "series_id"
        || !PERIOD_COLUMNS.contains(&names[1])
        || names[2] != "value"
    {
        return Err(input_error(
            1,
            "header",
            "expected columns series_id, period, value, then covariates",
        ));
    }
    let period_column = names[1].to_string();
    let covariate_names: Vec<String> = names[3..].iter().map(|s| s.to_string()).collect();

    let mut ids: Vec<String> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, Period), (Option<u64>, Vec<f64>)> = HashMap::new();
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            input_error(row, "record", e.to_string())
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(input_error(row, "series_id", "empty series id"));
        }
        let period = parse_period(&record[1], row, &period_column)?;
        if let Some(p) = seen.first() {
            if std::mem::discriminant(p) != std::mem::discriminant(&period) {
                return Err(input_error(
                    row,
                    &period_column,
                    "integer indices and dates cannot be mixed",
                ));
            }
        }
        let value = parse_value(&record[2], row)?;
        let x = covariate_names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let text = &record[3 + j];
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(input_error(
                        row,
                        name,
                        format!("expected a finite number, got '{text}'"),
                    )),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let l = *index_of.entry(id.clone()).or_insert_with(|| {
            ids.push(id.clone());
            ids.len() - 1
        });
        if cells.insert((l, period), (value, x)).is_some() {
            return Err(input_error(
                row,
                &period_column,
                format!("duplicate period {period} for series '{id}'"),
            ));
        }
        seen.insert(period);
    }
    if ids.is_empty() {
        return Err(input_error(2, "record", "no data rows"));
    }
    let periods = build_axis(&seen);
    let values = (0..ids.len())
        .map(|l| {
            periods
                .iter()
                .map(|p| cells.get(&(l, *p)).and_then(|c| c.0))
                .collect()
        })
        .collect();
    let covariates = (0..ids.len())
        .map(|l| {
            periods
                .iter()
                .map(|p| cells.get(&(l, *p)).map(|c| c.1.clone()))
                .collect()
        })
        .collect();
    Ok(Table {
        ids,
        periods,
        covariate_names,
        values,
        covariates,
    })
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    let mut header = vec![
        "series_id".to_string(),
        "period".to_string(),
        "value".to_string(),
    ];
    header.extend(table.covariate_names.iter().cloned());
    w.write_record(&header)?;
    for (l, id) in table.ids.iter().enumerate() {
        for (t, p) in table.periods.iter().enumerate() {
            let Some(x) = &table.covariates[l][t] else {
                if table.covariate_names.is_empty() && table.values[l][t].is_none() {
                    continue;
                }
                return Err(CliError::Output(format!(
                    "series '{id}' has no covariates at period {p}"
                )));
            };
            let mut rec = vec![
                id.clone(),
                p.to_string(),
                table.values[l][t].map_or(String::new(), |v| v.to_string()),
            ];
            rec.extend(x.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

impl Table {
    /// Table of a dataset on the index axis `1..=T`.
    pub fn from_dataset(data: &GroupDataset) -> Self {
        Self {
            ids: data.series().iter().map(|s| s.id.clone()).collect(),
            periods: (1..=data.n_periods() as i64).map(Period::Index).collect(),
            covariate_names: data.covariate_names().to_vec(),
            values: data.series().iter().map(|s| s.values.clone()).collect(),
            covariates: data
                .series()
                .iter()
                .map(|s| s.covariates.iter().map(|x| Some(x.clone())).collect())
                .collect(),
        }
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// Keeps the listed series, in the given order.
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        let idx = ids
            .iter()
            .map(|id| {
                self.position(id)
                    .ok_or_else(|| CliError::Config(format!("series '{id}' is not in the input")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ids: idx.iter().map(|&l| self.ids[l].clone()).collect(),
            periods: self.periods.clone(),
            covariate_names: self.covariate_names.clone(),
            values: idx.iter().map(|&l| self.values[l].clone()).collect(),
            covariates: idx.iter().map(|&l| self.covariates[l].clone()).collect(),
        })
    }

    /// Number of trailing periods with no value in any series.
    fn empty_tail(&self) -> usize {
        (0..self.periods.len())
            .rev()
            .take_while(|&t| self.values.iter().all(|v| v[t].is_none()))
            .count()
    }

    /// Appends `n` periods after the last one; only possible without
    /// covariate columns.
    fn extend(&mut self, n: usize) -> Result<()> {
        if !self.covariate_names.is_empty() {
            return Err(CliError::Config(format!(
                "forecasting needs covariates for {n} more periods; add rows with empty values for them"
            )));
        }
        let last = *self.periods.last().expect("non-empty axis");
        let step = match last {
            Period::Index(_) => 1,
            Period::Date(_) => {
                let days: Vec<i64> = self
                    .periods
                    .iter()
                    .map(|p| match (p, self.periods[0]) {
                        (Period::Date(d), Period::Date(a)) => (*d - a).num_days(),
                        _ => 0,
                    })
                    .collect();
                date_step(&days).ok_or_else(|| {
                    CliError::Config("cannot infer the date spacing from one period".into())
                })?
            }
        };
        for k in 1..=n as i64 {
            self.periods.push(match last {
                Period::Index(i) => Period::Index(i + k),
                Period::Date(d) => Period::Date(d + chrono::Duration::days(k * step)),
            });
        }
        for (v, x) in self.values.iter_mut().zip(self.covariates.iter_mut()) {
            v.resize(self.periods.len(), None);
            x.resize(self.periods.len(), Some(Vec::new()));
        }
        Ok(())
    }

    /// Dataset whose last `horizon` periods are forecast. Trailing periods
    /// without values serve as the horizon; without covariate columns the
    /// axis is extended when there are not enough of them. Seasonal columns
    /// are appended when requested.
    pub fn to_dataset(
        &self,
        horizon: usize,
        seasonal: Option<(usize, SeasonalEncoding)>,
    ) -> Result<(Self, GroupDataset)> {
        let mut table = self.clone();
        let tail = table.empty_tail();
        if tail < horizon {
            table.extend(horizon - tail)?;
        }
        let mut names = table.covariate_names.clone();
        if let Some((k, _)) = seasonal {
            names.extend((1..k).map(|j| format!("season_{j}")));
        }
        let mut series = Vec::with_capacity(table.ids.len());
        for (l, id) in table.ids.iter().enumerate() {
            let covariates = table.covariates[l]
                .iter()
                .enumerate()
                .map(|(t, x)| {
                    let mut row = match x {
                        Some(x) => x.clone(),
                        None if table.covariate_names.is_empty() => Vec::new(),
                        None => return Err(CliError::Config(format!(
                            "series '{id}' has no row for period {} and covariates are required",
                            table.periods[t]
                        ))),
                    };
                    if let Some((k, enc)) = seasonal {
                        row.extend(seasonal_row(t, k, enc));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            series.push(
                SeriesData::new(id.clone(), table.values[l].clone()).with_covariates(covariates),
            );
        }
        let data = GroupDataset::new(series, horizon)?.with_covariate_names(names)?;
        Ok((table, data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Table> {
        parse_table(text.as_bytes())
    }

    #[test]
    fn well_formed_two_series() {
        let t = parse(
            "series_id,period,value\na,1,3\na,2,0\na,3,1\na,4,2\nb,1,5\nb,2,4\nb,3,\nb,4,1\n",
        )
        .unwrap();
        let (_, d) = t.to_dataset(0, None).unwrap();
        assert_eq!((d.n_series(), d.n_periods()), (2, 4));
        assert_eq!(d.value(1, 2), None);
        assert_eq!(d.value(0, 0), Some(3));
    }

    #[test]
    fn negative_value_names_its_row() {
        let text = "series_id,period,value\na,1,1\na,2,1\na,3,1\na,4,1\na,5,1\na,6,-1\n";
        let err = parse(text).unwrap_err();
        assert_eq!(err.kind(), "input");
        assert!(err.to_string().starts_with("row 7, column value"), "{err}");
        assert!(parse("series_id,period,value\na,1,2.5\n").is_err());
    }

    #[test]
    fn rejects_duplicates_ragged_rows_and_bad_headers() {
        assert!(parse("series_id,period,value\na,1,1\na,1,2\n")
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert_eq!(
            parse("series_id,period,value,x1\na,1,1,0.5\na,2,1\n")
                .unwrap_err()
                .kind(),
            "input"
        );
        assert!(parse("id,period,value\na,1,1\n").is_err());
        assert!(parse("series_id,period,value\na,1,1\na,2020-01-01,1\n").is_err());
    }

    #[test]
    fn gaps_are_padded() {
        let t = parse("series_id,period,value\na,1,1\na,4,2\nb,2,3\n").unwrap();
        assert_eq!(t.periods.len(), 4);
        assert_eq!(t.values[0], vec![Some(1), None, None, Some(2)]);
        let t = parse("series_id,date,value\na,2024-01-01,1\na,2024-01-08,2\nb,2024-01-22,0\n")
            .unwrap();
        assert_eq!(t.periods.len(), 4);
        assert_eq!(t.periods[2].to_string(), "2024-01-15");
    }

    #[test]
    fn horizon_uses_empty_tail_or_extends() {
        let t = parse("series_id,period,value,x1\na,1,1,0.1\na,2,2,0.2\na,3,,0.3\n").unwrap();
        let (_, d) = t.to_dataset(1, None).unwrap();
        assert_eq!((d.n_periods(), d.n_train()), (3, 2));
        assert!(t.to_dataset(2, None).is_err());
        let t = parse("series_id,period,value\na,1,1\na,2,2\n").unwrap();
        let (ext, d) = t.to_dataset(3, None).unwrap();
        assert_eq!(d.n_periods(), 5);
        assert_eq!(ext.periods[4], Period::Index(5));
    }

    #[test]
    fn seasonal_columns_are_appended() {
        let t = parse("series_id,period,value\na,1,1\na,2,2\na,3,0\na,4,1\n").unwrap();
        let (_, d) = t
            .to_dataset(0, Some((4, SeasonalEncoding::Indicator)))
            .unwrap();
        assert_eq!(d.n_covariates(), 3);
        assert_eq!(d.x(0, 2), &[0.0, 1.0, 0.0]);
        assert_eq!(d.covariate_names()[0], "season_1");
    }

    #[test]
    fn write_then_read_is_lossless() {
        let text = "series_id,period,value,x1\na,1,3,0.1\na,2,,-2.5\nb,1,0,1e-3\nb,2,7,0.30000000000000004\n";
        let t = parse(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_table(&path, &t).unwrap();
        assert_eq!(read_table(&path).unwrap(), t);
    }
}
