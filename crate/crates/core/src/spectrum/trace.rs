use serde::Serialize;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

/// Analyzer output. Power is linear, relative to the unmodulated carrier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTrace {
    /// Hz.
    pub bin_centers: Vec<f64>,
    pub power: Vec<f64>,
    /// Equivalent noise bandwidth of one bin, Hz.
    pub resolution_bandwidth: f64,
    /// Mean noise power per Hz (same units as `power`), estimated from the
    /// bins that carry no line.
    pub noise_floor: f64,
    pub averages: usize,
    pub seed: Option<u64>,
}

impl SpectrumTrace {
    pub fn new(bin_centers: Vec<f64>, power: Vec<f64>, resolution_bandwidth: f64) -> Self {
        Self {
            bin_centers,
            power,
            resolution_bandwidth,
            noise_floor: 0.0,
            averages: 1,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.bin_centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_centers.is_empty()
    }

    pub(crate) fn retain(&mut self, keep: impl Fn(f64) -> bool) {
        let (f, p): (Vec<f64>, Vec<f64>) = self
            .bin_centers
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| keep(**f))
            .map(|(f, p)| (*f, *p))
            .unzip();
        self.bin_centers = f;
        self.power = p;
    }

    pub fn bin_spacing(&self) -> Option<f64> {
        (self.len() >= 2).then(|| self.bin_centers[1] - self.bin_centers[0])
    }

    /// Bins are equally spaced to 1e−9 relative.
    pub fn is_uniform(&self) -> bool {
        let Some(df) = self.bin_spacing() else {
            return true;
        };
        self.bin_centers
            .windows(2)
            .all(|w| ((w[1] - w[0]) - df).abs() <= 1e-9 * df.abs().max(1e-300))
    }

    pub fn power_db(&self) -> Vec<f64> {
        self.power.iter().map(|p| 10.0 * p.log10()).collect()
    }

    /// Index of the strongest bin.
    pub fn peak(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }

    /// Index of the bin closest to `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        self.bin_centers
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &c)| {
                let d = (c - f).abs();
                if d < best.1 {
                    (i, d)
                } else {
                    best
                }
            })
            .0
    }

    /// Mean bin power over all bins farther than `guard` bins from `center`.
    pub fn mean_excluding(&self, center: usize, guard: usize) -> f64 {
        let (sum, count) = self
            .power
            .iter()
            .enumerate()
            .filter(|(i, _)| i.abs_diff(center) > guard)
            .fold((0.0, 0usize), |(s, c), (_, p)| (s + p, c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }

    /// Peak bin over the mean of the bins more than `guard` bins away, dB.
    pub fn measured_snr_db(&self, guard: usize) -> f64 {
        let peak = self.peak();
        10.0 * (self.power[peak] / self.mean_excluding(peak, guard)).log10()
    }

    /// Noise density from the bins below ten times the median bin, which
    /// excludes the lines of a sparse spectrum.
    pub(crate) fn estimate_noise_floor(&mut self) {
        let mut sorted = self.power.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let (sum, count) = self
            .power
            .iter()
            .filter(|&&p| p <= 10.0 * median)
            .fold((0.0, 0usize), |(s, c), p| (s + p, c + 1));
        self.noise_floor = if count == 0 {
            0.0
        } else {
            sum / count as f64 / self.resolution_bandwidth
        };
    }

    /// CSV with `# key=value` header lines (rbw_hz, noise_floor_db, seed,
    /// averages) followed by the columns freq_hz, power_db. With
    /// `linear_column` a third column `power` holds the linear values, which
    /// survive non-positive entries that have no dB representation.
    pub fn write_csv<W: Write>(&self, mut out: W, linear_column: bool) -> Result<()> {
        writeln!(out, "# rbw_hz={}", self.resolution_bandwidth)?;
        writeln!(out, "# noise_floor_db={}", 10.0 * self.noise_floor.log10())?;
        match self.seed {
            Some(s) => writeln!(out, "# seed={s}")?,
            None => writeln!(out, "# seed=none")?,
        }
        writeln!(out, "# averages={}", self.averages)?;
        let mut w = csv::Writer::from_writer(out);
        if linear_column {
            w.write_record(["freq_hz", "power_db", "power"])?;
        } else {
            w.write_record(["freq_hz", "power_db"])?;
        }
        for (f, p) in self.bin_centers.iter().zip(&self.power) {
            let db = 10.0 * p.log10();
            if linear_column {
                w.write_record([f.to_string(), db.to_string(), p.to_string()])?;
            } else {
                w.write_record([f.to_string(), db.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut header = Vec::new();
        let mut body = String::new();
        for line in reader.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                header.push(rest.trim().to_string());
            } else {
                body.push_str(&line);
                body.push('\n');
            }
        }
        let mut trace = SpectrumTrace::new(Vec::new(), Vec::new(), f64::NAN);
        for h in &header {
            let Some((key, value)) = h.split_once('=') else {
                continue;
            };
            let value = value.trim();
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("header {key}: cannot parse {value:?}")))
            };
            match key.trim() {
                "rbw_hz" => trace.resolution_bandwidth = num()?,
                "noise_floor_db" => trace.noise_floor = 10f64.powf(num()? / 10.0),
                "seed" if value != "none" => {
                    trace.seed = Some(
                        value
                            .parse()
                            .map_err(|_| Error::Parse(format!("header seed: {value:?}")))?,
                    )
                }
                "averages" => trace.averages = num()? as usize,
                _ => {}
            }
        }
        if !(trace.resolution_bandwidth > 0.0) {
            return Err(Error::Parse("missing or invalid rbw_hz header".into()));
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let f_col = col("freq_hz").ok_or_else(|| Error::Parse("missing freq_hz column".into()))?;
        let linear = col("power");
        let db_col = col("power_db");
        if linear.is_none() && db_col.is_none() {
            return Err(Error::Parse("missing power_db column".into()));
        }
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("").trim();
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("cannot parse {s:?} as a number")))
            };
            trace.bin_centers.push(field(f_col)?);
            let p = match (linear, db_col) {
                (Some(i), _) => field(i)?,
                (None, Some(i)) => 10f64.powf(field(i)? / 10.0),
                (None, None) => unreachable!(),
            };
            trace.power.push(p);
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = SpectrumTrace::new(vec![1.0, 2.0, 3.0], vec![1e-3, 1.0, 2e-3], 1.0);
        t.seed = Some(7);
        t.averages = 3;
        t.estimate_noise_floor();
        for linear in [false, true] {
            let mut buf = Vec::new();
            t.write_csv(&mut buf, linear).unwrap();
            let back = SpectrumTrace::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back.bin_centers, t.bin_centers);
            assert_eq!(back.seed, Some(7));
            assert_eq!(back.averages, 3);
            for (a, b) in back.power.iter().zip(&t.power) {
                assert!((a / b - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_column_keeps_negative_values() {
        let t = SpectrumTrace::new(vec![1.0, 2.0], vec![-1e-3, 1.0], 1.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, true).unwrap();
        let back = SpectrumTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.power, t.power);
    }

    #[test]
    fn missing_rbw_is_rejected() {
        let text = "freq_hz,power_db\n1,0\n";
        assert!(SpectrumTrace::read_csv(text.as_bytes()).is_err());
    }
}
