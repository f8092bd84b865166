//! Schedule CSV format.
//!
//! One row per scheduled quantity: `period,kind,name,mw` with 1-based
//! periods, `kind` in `non_agc | agc | wind | total_wind`, and `name`
//! matching the system file (`all` for the wind total). Values are written
//! with shortest round-trip formatting, so read-after-write reproduces the
//! schedule bit for bit.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DispatchProblem, DispatchSchedule};

#[derive(Serialize, Deserialize)]
struct Row {
    period: usize,
    kind: String,
    name: String,
    mw: f64,
}

/// Writes a schedule as CSV.
pub fn write_schedule_csv<W: Write>(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let emit = |w: &mut csv::Writer<W>, period, kind: &str, name: &str, mw| {
        w.serialize(Row {
            period,
            kind: kind.into(),
            name: name.into(),
            mw,
        })
        .map_err(|e| Error::Io(format!("schedule csv: {e}")))
    };
    for t in 0..schedule.periods() {
        for (i, u) in problem.non_agc.iter().enumerate() {
            emit(&mut w, t + 1, "non_agc", &u.name, schedule.non_agc[t][i])?;
        }
        for (j, u) in problem.agc.iter().enumerate() {
            emit(&mut w, t + 1, "agc", &u.name, schedule.agc[t][j])?;
        }
        for (k, f) in problem.wind_farms.iter().enumerate() {
            emit(&mut w, t + 1, "wind", &f.name, schedule.wind[t][k])?;
        }
        emit(&mut w, t + 1, "total_wind", "all", schedule.total_wind[t])?;
    }
    w.flush().map_err(|e| Error::Io(format!("schedule csv: {e}")))
}

/// Reads a schedule CSV back against its system description. Rows may come
/// in any order; every expected entry must appear exactly once.
pub fn read_schedule_csv<R: Read>(problem: &DispatchProblem, input: R) -> Result<DispatchSchedule> {
    let mut reader = csv::Reader::from_reader(input);
    let mut cells: HashMap<(usize, String, String), f64> = HashMap::new();
    for rec in reader.deserialize::<Row>() {
        let row = rec.map_err(|e| Error::Parse(format!("schedule csv: {e}")))?;
        if row.period == 0 || row.period > problem.periods() {
            return Err(Error::Parse(format!(
                "schedule csv: period {} outside 1..={}",
                row.period,
                problem.periods()
            )));
        }
        if !row.mw.is_finite() {
            return Err(Error::Parse(format!(
                "schedule csv: non-finite value for {}/{} in period {}",
                row.kind, row.name, row.period
            )));
        }
        let key = (row.period, row.kind, row.name);
        if cells.insert(key.clone(), row.mw).is_some() {
            return Err(Error::Parse(format!(
                "schedule csv: duplicate entry for {}/{} in period {}",
                key.1, key.2, key.0
            )));
        }
    }
    let mut take = |period: usize, kind: &str, name: &str| -> Result<f64> {
        cells
            .remove(&(period, kind.to_string(), name.to_string()))
            .ok_or_else(|| {
                Error::Parse(format!(
                    "schedule csv: missing entry for {kind}/{name} in period {period}"
                ))
            })
    };
    let t_count = problem.periods();
    let mut schedule = DispatchSchedule {
        non_agc: Vec::with_capacity(t_count),
        agc: Vec::with_capacity(t_count),
        wind: Vec::with_capacity(t_count),
        total_wind: Vec::with_capacity(t_count),
    };
    for t in 0..t_count {
        schedule.non_agc.push(
            problem
                .non_agc
                .iter()
                .map(|u| take(t + 1, "non_agc", &u.name))
                .collect::<Result<_>>()?,
        );
        schedule.agc.push(
            problem
                .agc
                .iter()
                .map(|u| take(t + 1, "agc", &u.name))
                .collect::<Result<_>>()?,
        );
        schedule.wind.push(
            problem
                .wind_farms
                .iter()
                .map(|f| take(t + 1, "wind", &f.name))
                .collect::<Result<_>>()?,
        );
        schedule.total_wind.push(take(t + 1, "total_wind", "all")?);
    }
    if let Some(((period, kind, name), _)) = cells.into_iter().next() {
        return Err(Error::Parse(format!(
            "schedule csv: unexpected entry {kind}/{name} in period {period}"
        )));
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_problem;

    fn awkward_schedule() -> DispatchSchedule {
        // Values that do not have short decimal expansions.
        DispatchSchedule {
            non_agc: vec![vec![100.0 / 3.0], vec![2.0_f64.sqrt() * 50.0]],
            agc: vec![vec![70.1234567890123, 50.0 / 7.0], vec![59.9, 41.0 / 3.0]],
            wind: vec![vec![40.25, 25.125], vec![1e-13, 59.999999999999]],
            total_wind: vec![65.375, 0.1 + 0.2],
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let p = small_problem();
        let schedule = awkward_schedule();
        let mut buf = Vec::new();
        write_schedule_csv(&p, &schedule, &mut buf).unwrap();
        let back = read_schedule_csv(&p, buf.as_slice()).unwrap();
        assert_eq!(schedule.non_agc, back.non_agc);
        assert_eq!(schedule.agc, back.agc);
        assert_eq!(schedule.wind, back.wind);
        assert_eq!(schedule.total_wind, back.total_wind);
    }

    #[test]
    fn reader_accepts_shuffled_rows() {
        let p = small_problem();
        let schedule = awkward_schedule();
        let mut buf = Vec::new();
        write_schedule_csv(&p, &schedule, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let header = lines.remove(0);
        lines.reverse();
        let shuffled = format!("{header}\n{}", lines.join("\n"));
        let back = read_schedule_csv(&p, shuffled.as_bytes()).unwrap();
        assert_eq!(schedule.total_wind, back.total_wind);
        assert_eq!(schedule.agc, back.agc);
    }

    #[test]
    fn reader_rejects_missing_duplicate_and_unknown_rows() {
        let p = small_problem();
        let schedule = awkward_schedule();
        let mut buf = Vec::new();
        write_schedule_csv(&p, &schedule, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let missing: String = text
            .lines()
            .filter(|l| !l.starts_with("2,agc,A2"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = read_schedule_csv(&p, missing.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("missing")), "{err}");

        let dup = format!("{text}1,agc,A1,12.0\n");
        let err = read_schedule_csv(&p, dup.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("duplicate")), "{err}");

        let unknown = format!("{text}1,agc,A9,12.0\n");
        let err = read_schedule_csv(&p, unknown.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("unexpected")), "{err}");

        let bad_period = format!("{text}7,agc,A1,12.0\n");
        let err = read_schedule_csv(&p, bad_period.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("period 7")), "{err}");
    }
}
