//! Dataset CSV: one row per sample.
//!
//! ```text
//! shape,freq_hz,stroke_amp_deg,pitch_amp_deg,run,cycle,t_s,stroke_deg,pitch_deg,stroke_state,thrust_n
//! ```
//!
//! Floats are written with 17 significant digits so a save/load round trip
//! is exact. Rows of a cycle must be contiguous and uniformly spaced in time.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{CycleSample, Dataset, StrokeCycle};
use crate::error::{Error, Result};
use crate::kinematics::{fmt_f64, KinematicSetting, KinematicState};

pub const CSV_COLUMNS: [&str; 11] = [
    "shape",
    "freq_hz",
    "stroke_amp_deg",
    "pitch_amp_deg",
    "run",
    "cycle",
    "t_s",
    "stroke_deg",
    "pitch_deg",
    "stroke_state",
    "thrust_n",
];

/// Relative tolerance (of the period) on per-cycle sample spacing.
const SPACING_TOL: f64 = 1e-9;

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for c in &dataset.cycles {
        for s in &c.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.shape,
                fmt_f64(c.setting.flap_frequency),
                fmt_f64(c.setting.stroke_amplitude),
                fmt_f64(c.setting.pitch_amplitude),
                c.run,
                c.cycle,
                fmt_f64(s.state.t),
                fmt_f64(s.state.stroke_angle),
                fmt_f64(s.state.pitch_angle),
                s.state.stroke_state,
                fmt_f64(s.thrust),
            )?;
        }
    }
    out.flush()
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, &path.display().to_string())
}

struct Row {
    shape: String,
    freq: f64,
    stroke_amp: f64,
    pitch_amp: f64,
    run: usize,
    cycle: usize,
    sample: CycleSample,
}

pub fn read_dataset<R: Read>(input: R, source: &str) -> Result<Dataset> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines().enumerate();
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: source.to_string(),
        line,
        reason,
    };
    let Some((_, header)) = lines.next() else {
        return Err(Error::Schema(format!("{source}: empty dataset file")));
    };
    let header = header.map_err(|e| Error::io(source, e))?;
    let names: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let mut index = [0usize; CSV_COLUMNS.len()];
    for (slot, col) in index.iter_mut().zip(CSV_COLUMNS) {
        *slot = names
            .iter()
            .position(|n| *n == col)
            .ok_or_else(|| Error::Schema(format!("{source}: missing column `{col}`")))?;
    }

    let mut rows: Vec<(usize, Row)> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(parse_err(
                line_no,
                format!("expected {} fields, found {}", names.len(), fields.len()),
            ));
        }
        let get = |k: usize| fields[index[k]];
        let float = |k: usize| -> Result<f64> {
            get(k)
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("column `{}`: {e}", CSV_COLUMNS[k])))
        };
        let int = |k: usize| -> Result<usize> {
            get(k)
                .parse::<usize>()
                .map_err(|e| parse_err(line_no, format!("column `{}`: {e}", CSV_COLUMNS[k])))
        };
        let stroke_state = match get(9) {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(parse_err(
                    line_no,
                    format!("column `stroke_state` must be 0 or 1, got `{other}`"),
                ))
            }
        };
        let shape = get(0).to_string();
        if shape.is_empty() {
            return Err(parse_err(line_no, "column `shape` is empty".into()));
        }
        rows.push((
            line_no,
            Row {
                shape,
                freq: float(1)?,
                stroke_amp: float(2)?,
                pitch_amp: float(3)?,
                run: int(4)?,
                cycle: int(5)?,
                sample: CycleSample {
                    state: KinematicState {
                        t: float(6)?,
                        stroke_angle: float(7)?,
                        pitch_angle: float(8)?,
                        stroke_state,
                    },
                    thrust: float(10)?,
                },
            },
        ));
    }

    let same_cycle = |a: &Row, b: &Row| {
        a.shape == b.shape
            && a.freq == b.freq
            && a.stroke_amp == b.stroke_amp
            && a.pitch_amp == b.pitch_amp
            && a.run == b.run
            && a.cycle == b.cycle
    };
    let mut cycles = Vec::new();
    for group in rows.chunk_by(|a, b| same_cycle(&a.1, &b.1)) {
        let (first_line, first) = &group[0];
        let setting =
            KinematicSetting::new(first.stroke_amp, first.pitch_amp, first.freq, group.len())
                .map_err(|e| parse_err(*first_line, e.to_string()))?;
        let period = setting.period();
        let dt = setting.dt();
        for w in group.windows(2) {
            let step = w[1].1.sample.state.t - w[0].1.sample.state.t;
            if (step - dt).abs() > SPACING_TOL * period {
                return Err(Error::Dataset(format!(
                    "{source}:{}: cycle {}/run{}/cycle{} is not uniformly sampled over one period \
                     (step {step}, expected {dt})",
                    w[1].0, first.shape, first.run, first.cycle
                )));
            }
        }
        cycles.push(StrokeCycle {
            shape: first.shape.clone(),
            setting,
            run: first.run,
            cycle: first.cycle,
            samples: group.iter().map(|(_, r)| r.sample).collect(),
        });
    }
    Ok(Dataset::new(cycles))
}
