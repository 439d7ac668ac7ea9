//! CSV readers and writers for every data file a scenario references or a run emits.
//!
//! Readers validate eagerly and report the file and line of the first violation. Time series must
//! have strictly increasing timestamps at a constant step; gaps and duplicates are rejected.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::engine::Baseload;
use crate::error::{Error, Result};
use crate::fleet::{AdoptionCurve, Catalog, EvModel};
use crate::grid::LoadSeries;
use crate::kpi::{round_to, ComparisonRow, KpiReport, Metric};
use crate::tariffs::{
    Co2IntensitySeries, DistributionTariff, HourlySeries, Season, SeasonCalendar, SpotPriceSeries,
    TouBand,
};
use crate::time::Timestamp;

pub const TIMESTAMP_HEADER: &str = "timestamp_iso8601";

pub const KPI_HEADER: [&str; 9] = [
    "experiment_id",
    "year",
    "overload_count",
    "avg_charging_cost",
    "avg_total_bill",
    "avg_total_co2",
    "dissatisfaction",
    "load_factor",
    "dso_revenue",
];

struct Rows {
    path: std::path::PathBuf,
    reader: csv::Reader<File>,
}

impl Rows {
    fn open(path: &Path, expected: &[&str]) -> Result<(Rows, csv::StringRecord)> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let header = reader
            .headers()
            .map_err(|e| Error::invalid_at(path, Some(1), e.to_string()))?
            .clone();
        for (i, want) in expected.iter().enumerate() {
            if header.get(i) != Some(want) {
                return Err(Error::invalid_at(
                    path,
                    Some(1),
                    format!(
                        "expected header column {} to be {want:?}, found {:?}",
                        i + 1,
                        header.get(i).unwrap_or("")
                    ),
                ));
            }
        }
        Ok((
            Rows {
                path: path.to_path_buf(),
                reader,
            },
            header,
        ))
    }

    /// Iterate records as `(line, record)`.
    fn each(&mut self, mut f: impl FnMut(usize, &csv::StringRecord) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {
                    let line = record.position().map(|p| p.line() as usize);
                    f(line.unwrap_or(0), &record).map_err(|e| match e {
                        Error::Validation {
                            file: None,
                            line: None,
                            message,
                        } => Error::Validation {
                            file: Some(self.path.clone()),
                            line,
                            message,
                        },
                        other => other.in_file(&self.path),
                    })?;
                }
                Err(e) => {
                    let line = e.position().map(|p| p.line() as usize);
                    return Err(Error::invalid_at(&self.path, line, e.to_string()));
                }
            }
        }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::invalid_at(&self.path, None, message)
    }
}

fn field<'a>(record: &'a csv::StringRecord, i: usize, name: &str) -> Result<&'a str> {
    record
        .get(i)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::invalid(format!("missing {name}")))
}

fn number(record: &csv::StringRecord, i: usize, name: &str) -> Result<f64> {
    let s = field(record, i, name)?;
    let v: f64 = s
        .parse()
        .map_err(|_| Error::invalid(format!("{name} {s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::invalid(format!("{name} {s:?} is not finite")));
    }
    Ok(v)
}

/// Tracks timestamp monotonicity and the constant step of a series.
#[derive(Default)]
struct Clock {
    start: Option<Timestamp>,
    prev: Option<Timestamp>,
    step: Option<i64>,
}

impl Clock {
    fn push(&mut self, t: Timestamp) -> Result<()> {
        if let Some(prev) = self.prev {
            let d = t - prev;
            if d == 0 {
                return Err(Error::invalid(format!("duplicate timestamp {t}")));
            }
            if d < 0 {
                return Err(Error::invalid(format!(
                    "timestamp {t} is earlier than {prev}"
                )));
            }
            match self.step {
                None => self.step = Some(d),
                Some(step) if step != d => {
                    return Err(Error::invalid(format!(
                        "gap between {prev} and {t}: expected a {step}-minute step"
                    )))
                }
                Some(_) => {}
            }
        } else {
            self.start = Some(t);
        }
        self.prev = Some(t);
        Ok(())
    }
}

/// Read a `timestamp_iso8601,<value>` series. Single-row files need `default_step`.
pub fn read_time_series(path: &Path, value_column: &str, default_step: i64) -> Result<LoadSeries> {
    let (mut rows, _) = Rows::open(path, &[TIMESTAMP_HEADER, value_column])?;
    let mut clock = Clock::default();
    let mut values = Vec::new();
    rows.each(|_, r| {
        clock.push(Timestamp::parse(field(r, 0, "timestamp")?)?)?;
        values.push(number(r, 1, value_column)?);
        Ok(())
    })?;
    let start = clock.start.ok_or_else(|| rows.fail("series has no rows"))?;
    Ok(LoadSeries::new(
        start,
        clock.step.unwrap_or(default_step),
        values,
    ))
}

fn read_hourly(path: &Path, value_column: &str) -> Result<HourlySeries> {
    let s = read_time_series(path, value_column, 60)?;
    if s.resolution != 60 {
        return Err(Error::invalid_at(
            path,
            None,
            format!("expected hourly rows, found a {}-minute step", s.resolution),
        ));
    }
    HourlySeries::new(s.start, s.values).map_err(|e| e.in_file(path))
}

pub fn read_spot_prices(path: &Path) -> Result<SpotPriceSeries> {
    Ok(SpotPriceSeries(read_hourly(path, "dkk_per_kwh")?))
}

pub fn read_co2_intensity(path: &Path) -> Result<Co2IntensitySeries> {
    Co2IntensitySeries::new(read_hourly(path, "kg_per_kwh")?).map_err(|e| e.in_file(path))
}

/// Wide baseload file: `timestamp_iso8601,<one kW column per household>`.
pub fn read_baseload(path: &Path, households: u32) -> Result<Baseload> {
    let (mut rows, header) = Rows::open(path, &[TIMESTAMP_HEADER])?;
    let columns = header.len() - 1;
    if columns != households as usize {
        return Err(Error::invalid_at(
            path,
            Some(1),
            format!("expected {households} household columns, found {columns}"),
        ));
    }
    let mut clock = Clock::default();
    let mut values = vec![Vec::new(); columns];
    rows.each(|_, r| {
        if r.len() != columns + 1 {
            return Err(Error::invalid(format!(
                "expected {} fields, found {}",
                columns + 1,
                r.len()
            )));
        }
        clock.push(Timestamp::parse(field(r, 0, "timestamp")?)?)?;
        for (i, column) in values.iter_mut().enumerate() {
            let v = number(r, i + 1, &header[i + 1])?;
            if v < 0.0 {
                return Err(Error::invalid(format!(
                    "negative load {v} for {}",
                    &header[i + 1]
                )));
            }
            column.push(v);
        }
        Ok(())
    })?;
    let start = clock.start.ok_or_else(|| rows.fail("series has no rows"))?;
    let step = clock.step.unwrap_or(60);
    Baseload::new(
        values
            .into_iter()
            .map(|v| LoadSeries::new(start, step, v))
            .collect(),
    )
    .map_err(|e| e.in_file(path))
}

pub fn read_catalog(path: &Path) -> Result<Catalog> {
    let (mut rows, _) = Rows::open(
        path,
        &["name", "battery_kwh", "max_rate_kw", "market_share"],
    )?;
    let mut models = Vec::new();
    rows.each(|_, r| {
        let model = EvModel::new(
            field(r, 0, "name")?,
            number(r, 1, "battery_kwh")?,
            number(r, 2, "max_rate_kw")?,
            number(r, 3, "market_share")?,
        );
        model.validate()?;
        models.push(model);
        Ok(())
    })?;
    Catalog::new(models).map_err(|e| e.in_file(path))
}

pub fn read_adoption_curve(path: &Path) -> Result<AdoptionCurve> {
    let (mut rows, _) = Rows::open(path, &["year", "cumulative_adopters"])?;
    let mut points = Vec::new();
    rows.each(|_, r| {
        let year = field(r, 0, "year")?;
        let year: i32 = year
            .parse()
            .map_err(|_| Error::invalid(format!("year {year:?} is not an integer")))?;
        let n = field(r, 1, "cumulative_adopters")?;
        let n: u32 = n.parse().map_err(|_| {
            Error::invalid(format!(
                "cumulative_adopters {n:?} is not a non-negative integer"
            ))
        })?;
        points.push((year, n));
        Ok(())
    })?;
    AdoptionCurve::new(points).map_err(|e| e.in_file(path))
}

/// Time-of-use bands: `season,start_hour,end_hour,dkk_per_kwh`, season `summer`, `winter` or
/// `all` (an empty season also means both).
pub fn read_tou_tariff(path: &Path, calendar: SeasonCalendar) -> Result<DistributionTariff> {
    let (mut rows, _) = Rows::open(path, &["season", "start_hour", "end_hour", "dkk_per_kwh"])?;
    let mut bands = Vec::new();
    rows.each(|_, r| {
        let season = match r.get(0).unwrap_or("") {
            "summer" => Some(Season::Summer),
            "winter" => Some(Season::Winter),
            "" | "all" => None,
            other => {
                return Err(Error::invalid(format!(
                    "unknown season {other:?}; valid: summer, winter, all"
                )))
            }
        };
        let hour = |i, name| -> Result<u32> {
            let s = field(r, i, name)?;
            s.parse()
                .map_err(|_| Error::invalid(format!("{name} {s:?} is not an hour")))
        };
        bands.push(TouBand {
            season,
            start_hour: hour(1, "start_hour")?,
            end_hour: hour(2, "end_hour")?,
            dkk_per_kwh: number(r, 3, "dkk_per_kwh")?,
        });
        Ok(())
    })?;
    DistributionTariff::time_of_use(bands, calendar).map_err(|e| e.in_file(path))
}

/// Fixed tariff file: `key = value` lines, `#` comments; the only key is `dkk_per_kwh`.
pub fn read_fixed_tariff(path: &Path) -> Result<DistributionTariff> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rate = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |m: String| Error::invalid_at(path, Some(i + 1), m);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected key = value, found {line:?}")))?;
        match key.trim() {
            "dkk_per_kwh" => {
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| at(format!("dkk_per_kwh {:?} is not a number", value.trim())))?;
                rate = Some(DistributionTariff::fixed(v).map_err(|e| e.in_file(path))?);
            }
            other => return Err(at(format!("unknown key {other:?}"))),
        }
    }
    rate.ok_or_else(|| Error::invalid_at(path, None, "missing dkk_per_kwh"))
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid_at(path, None, format!("{other:?}")),
    }
}

fn write_series_rows<'a>(
    path: &Path,
    value_column: &str,
    rows: impl Iterator<Item = (Timestamp, f64)> + 'a,
) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record([TIMESTAMP_HEADER, value_column])
        .map_err(&err)?;
    for (t, v) in rows {
        w.write_record([t.to_string(), v.to_string()])
            .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_load_series(path: &Path, series: &LoadSeries) -> Result<()> {
    write_series_rows(path, "load_kw", series.iter())
}

pub fn write_hourly(path: &Path, value_column: &str, series: &HourlySeries) -> Result<()> {
    let rows = series
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (series.start() + 60 * i as i64, *v));
    write_series_rows(path, value_column, rows)
}

pub fn write_baseload(path: &Path, baseload: &Baseload) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    let series = baseload.households();
    let mut header = vec![TIMESTAMP_HEADER.to_string()];
    header.extend((0..series.len()).map(|i| format!("hh{i}")));
    w.write_record(&header).map_err(&err)?;
    let total = baseload.total();
    for j in 0..total.len() {
        let mut row = vec![total.time_at(j).to_string()];
        row.extend(series.iter().map(|s| s.values[j].to_string()));
        w.write_record(&row).map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_catalog(path: &Path, catalog: &Catalog) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(["name", "battery_kwh", "max_rate_kw", "market_share"])
        .map_err(&err)?;
    for m in catalog.models() {
        w.write_record([
            m.name.clone(),
            m.battery_kwh.to_string(),
            m.max_rate_kw.to_string(),
            m.market_share.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_adoption_curve(path: &Path, curve: &AdoptionCurve) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(["year", "cumulative_adopters"])
        .map_err(&err)?;
    for (year, n) in curve.points() {
        w.write_record([year.to_string(), n.to_string()])
            .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_tou_tariff(path: &Path, bands: &[TouBand]) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(["season", "start_hour", "end_hour", "dkk_per_kwh"])
        .map_err(&err)?;
    for b in bands {
        let season = match b.season {
            Some(Season::Summer) => "summer",
            Some(Season::Winter) => "winter",
            None => "all",
        };
        w.write_record([
            season.to_string(),
            b.start_hour.to_string(),
            b.end_hour.to_string(),
            b.dkk_per_kwh.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_fixed_tariff(path: &Path, dkk_per_kwh: f64) -> Result<()> {
    std::fs::write(path, format!("dkk_per_kwh = {dkk_per_kwh}\n")).map_err(|e| Error::io(path, e))
}

fn format_metric(metric: Metric, value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.*}", metric.decimals(), round_to(v, metric.decimals())),
        None => "NA".to_string(),
    }
}

pub fn write_kpi_csv(path: &Path, rows: &[(String, KpiReport)]) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(KPI_HEADER).map_err(&err)?;
    for (id, report) in rows {
        let mut record = vec![id.clone(), report.year.to_string()];
        record.extend(Metric::ALL.iter().map(|&m| format_metric(m, report.get(m))));
        w.write_record(&record).map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a KPI CSV back; `NA` cells become `None`.
pub fn read_kpi_csv(path: &Path) -> Result<Vec<(String, KpiReport)>> {
    let (mut rows, _) = Rows::open(path, &KPI_HEADER)?;
    let mut out = Vec::new();
    rows.each(|_, r| {
        let opt = |i: usize, name: &str| -> Result<Option<f64>> {
            if r.get(i) == Some("NA") {
                Ok(None)
            } else {
                number(r, i, name).map(Some)
            }
        };
        let count = |i: usize, name: &str| -> Result<u64> {
            let s = field(r, i, name)?;
            s.parse()
                .map_err(|_| Error::invalid(format!("{name} {s:?} is not a non-negative integer")))
        };
        let year = field(r, 1, "year")?;
        let report = KpiReport {
            year: year
                .parse()
                .map_err(|_| Error::invalid(format!("year {year:?} is not an integer")))?,
            overload_count: count(2, "overload_count")?,
            avg_charging_cost_dkk_per_kwh: opt(3, "avg_charging_cost")?,
            avg_total_bill_dkk: opt(4, "avg_total_bill")?,
            avg_total_co2_kg: opt(5, "avg_total_co2")?,
            dissatisfaction_count: count(6, "dissatisfaction")?,
            load_factor: opt(7, "load_factor")?,
            dso_revenue_dkk: number(r, 8, "dso_revenue")?,
        };
        out.push((field(r, 0, "experiment_id")?.to_string(), report));
        Ok(())
    })?;
    Ok(out)
}

pub fn write_comparison_csv(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = create(path)?;
    let err = csv_err(path);
    w.write_record(["metric", "value", "baseline", "pct_difference"])
        .map_err(&err)?;
    for row in rows {
        let pct = match row.pct_difference {
            Some(p) => format!("{:.2}", round_to(p, 2)),
            None => "NA".to_string(),
        };
        w.write_record([
            row.metric.name().to_string(),
            format_metric(row.metric, row.value),
            format_metric(row.metric, row.baseline),
            pct,
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a small text file; used for manifests.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
