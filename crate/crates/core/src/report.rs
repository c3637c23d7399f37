//! EFECT reports and sample files.
//!
//! Both are JSON documents. Numbers are written with enough digits to
//! round-trip, so reading a written document gives back the same bits. ECF
//! values use 17-digit scientific notation: every value then takes the same
//! space, whatever its magnitude.
//!
//! A report stores the ECFs of one half of an accepted sample, evaluated on
//! grids built from the statistics of the whole sample, together with the
//! accepted reproducibility statistics. Its size depends on the number of
//! variables, times and grid points, not on the sample size.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use crate::distribution::DistributionSpec;
use crate::ecf::{evaluate_ecf_set, EcfConfig, EcfGrid, EcfSet};
use crate::error::{Error, Result};
use crate::repro::ErrorStats;
use crate::sample::{split_indices, SimulationSample};

pub const REPORT_FORMAT_VERSION: &str = "efect-report/1";
pub const SAMPLE_FORMAT_VERSION: &str = "efect-sample/1";

/// ECF evaluations of one (variable, time) entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EcfRecord {
    pub tau_max: f64,
    #[serde(serialize_with = "fixed_width")]
    pub real_parts: Vec<f64>,
    #[serde(serialize_with = "fixed_width")]
    pub imag_parts: Vec<f64>,
}

fn fixed_width<S: serde::Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::{Error as _, SerializeSeq};
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        if !v.is_finite() {
            return Err(S::Error::custom("non-finite ECF value"));
        }
        let raw = serde_json::value::RawValue::from_string(format!("{v:.16e}")).map_err(S::Error::custom)?;
        seq.serialize_element(&raw)?;
    }
    seq.end()
}

/// Minimal supporting data for independently reproducing a simulation sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfectReport {
    pub format_version: String,
    pub variable_names: Vec<String>,
    pub simulation_times: Vec<f64>,
    /// Size of the accepted sample (twice the size of the reported subsample).
    pub sample_size: usize,
    pub error_mean: f64,
    pub error_stdev: f64,
    pub ecf_num_points: usize,
    pub ecf_num_periods: f64,
    /// One record per (variable, time), variable-major.
    pub ecf: Vec<EcfRecord>,
    pub input_sampling: Vec<DistributionSpec>,
    pub significant_figures: u32,
}

impl EfectReport {
    pub fn ecf_config(&self) -> EcfConfig {
        EcfConfig { num_periods: self.ecf_num_periods, num_points: self.ecf_num_points }
    }

    /// Transform-variable grids stored in the report.
    pub fn grid(&self) -> Result<EcfGrid> {
        EcfGrid::from_tau_max(
            self.ecf.iter().map(|r| r.tau_max).collect(),
            self.variable_names.len(),
            self.simulation_times.len(),
            self.ecf_config(),
        )
    }

    /// Reported ECF evaluations as an [`EcfSet`] on [`Self::grid`].
    pub fn ecf_set(&self) -> Result<EcfSet> {
        let values = self
            .ecf
            .iter()
            .flat_map(|r| r.real_parts.iter().zip(&r.imag_parts).map(|(&re, &im)| Complex64::new(re, im)))
            .collect();
        EcfSet::from_parts(self.grid()?, values)
    }

    /// Checks every structural and numerical invariant of the document.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: String| Err(Error::Schema(format!("{field}: {why}")));
        if self.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: self.format_version.clone(),
                expected: REPORT_FORMAT_VERSION.into(),
            });
        }
        if let Err(e) = SimulationSample::empty(self.variable_names.clone(), self.simulation_times.clone()) {
            return bad("variable_names/simulation_times", e.to_string());
        }
        if self.sample_size < 2 || self.sample_size % 2 != 0 {
            return bad("sample_size", format!("must be even and >= 2, got {}", self.sample_size));
        }
        if !(0.0..=2.0).contains(&self.error_mean) {
            return bad("error_mean", format!("must be in [0, 2], got {}", self.error_mean));
        }
        if !(self.error_stdev >= 0.0 && self.error_stdev.is_finite()) {
            return bad("error_stdev", format!("must be finite and >= 0, got {}", self.error_stdev));
        }
        if let Err(e) = self.ecf_config().validate() {
            return bad("ecf_num_points/ecf_num_periods", e.to_string());
        }
        if !(1..=17).contains(&self.significant_figures) {
            return bad("significant_figures", format!("must be in 1..=17, got {}", self.significant_figures));
        }
        let entries = self.variable_names.len() * self.simulation_times.len();
        if self.ecf.len() != entries {
            return bad("ecf", format!("expected {entries} records, got {}", self.ecf.len()));
        }
        let k = self.ecf_num_points;
        for (i, r) in self.ecf.iter().enumerate() {
            if !(r.tau_max.is_finite() && r.tau_max > 0.0) {
                return bad(&format!("ecf[{i}].tau_max"), format!("must be finite and > 0, got {}", r.tau_max));
            }
            if r.real_parts.len() != k || r.imag_parts.len() != k {
                return bad(&format!("ecf[{i}]"), format!("expected {k} real and imaginary parts"));
            }
            if r.real_parts[0] != 1.0 || r.imag_parts[0] != 0.0 {
                return bad(&format!("ecf[{i}]"), "value at tau = 0 must be 1 + 0i".into());
            }
            for (j, (re, im)) in r.real_parts.iter().zip(&r.imag_parts).enumerate() {
                let modulus = re.hypot(*im);
                if !(modulus <= 1.0 + 1e-12) {
                    return bad(&format!("ecf[{i}][{j}]"), format!("invariant violation: modulus {modulus} > 1"));
                }
            }
        }
        for (i, d) in self.input_sampling.iter().enumerate() {
            if let Err(e) = d.validate() {
                return bad(&format!("input_sampling[{i}]"), e.to_string());
            }
        }
        Ok(())
    }

    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        self.validate()?;
        serde_json::to_writer_pretty(writer, self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.to_writer(&mut buf)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        check_version(&value, REPORT_FORMAT_VERSION)?;
        let report: Self = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        report.validate()?;
        Ok(report)
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_json(&text)
    }
}

fn check_version(value: &serde_json::Value, expected: &str) -> Result<()> {
    match value.get("format_version") {
        None => Err(Error::Schema("missing field `format_version`".into())),
        Some(serde_json::Value::String(v)) if v == expected => Ok(()),
        Some(other) => Err(Error::UnsupportedVersion {
            found: other.as_str().map_or_else(|| other.to_string(), str::to_owned),
            expected: expected.into(),
        }),
    }
}

/// Packs an accepted sample into a report.
///
/// The first draw from `rng` picks the reported half; its ECFs are evaluated
/// on grids built from the whole sample, the grids the self-test used.
pub fn build_report<R: Rng + ?Sized>(
    sample: &SimulationSample,
    stats: &ErrorStats,
    ecf_config: EcfConfig,
    input_sampling: Vec<DistributionSpec>,
    significant_figures: u32,
    rng: &mut R,
) -> Result<EfectReport> {
    if stats.sample_size != sample.run_count() {
        return Err(Error::InvalidArgument(format!(
            "statistics are for {} runs but the sample has {}",
            stats.sample_size,
            sample.run_count()
        )));
    }
    let (half, _) = split_indices(sample.run_count(), rng)?;
    let grid = EcfGrid::for_sample(sample, ecf_config)?;
    let set = evaluate_ecf_set(&sample.select(&half), &grid)?;
    let ecf = set
        .entries()
        .zip(grid.tau_max_values())
        .map(|(entry, &tau_max)| EcfRecord {
            tau_max,
            real_parts: entry.iter().map(|z| z.re).collect(),
            imag_parts: entry.iter().map(|z| z.im).collect(),
        })
        .collect();
    let report = EfectReport {
        format_version: REPORT_FORMAT_VERSION.into(),
        variable_names: sample.variable_names().to_vec(),
        simulation_times: sample.times().to_vec(),
        sample_size: sample.run_count(),
        error_mean: stats.mean,
        error_stdev: stats.stdev,
        ecf_num_points: ecf_config.num_points,
        ecf_num_periods: ecf_config.num_periods,
        ecf,
        input_sampling,
        significant_figures,
    };
    report.validate()?;
    Ok(report)
}

pub fn write_report(report: &EfectReport, path: &Path) -> Result<()> {
    let text = report.to_json()?;
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn read_report(path: &Path) -> Result<EfectReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    EfectReport::from_json(&text)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDocument {
    format_version: String,
    variable_names: Vec<String>,
    times: Vec<f64>,
    runs: Vec<Vec<Vec<f64>>>,
}

pub fn sample_to_writer<W: Write>(sample: &SimulationSample, writer: W) -> Result<()> {
    let doc = SampleDocument {
        format_version: SAMPLE_FORMAT_VERSION.into(),
        variable_names: sample.variable_names().to_vec(),
        times: sample.times().to_vec(),
        runs: sample.to_runs(),
    };
    serde_json::to_writer(writer, &doc).map_err(|e| Error::Schema(e.to_string()))
}

pub fn sample_from_reader<R: Read>(reader: R) -> Result<SimulationSample> {
    let value: serde_json::Value =
        serde_json::from_reader(reader).map_err(|e| Error::Schema(e.to_string()))?;
    check_version(&value, SAMPLE_FORMAT_VERSION)?;
    let doc: SampleDocument = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    SimulationSample::from_runs(doc.variable_names, doc.times, &doc.runs)
}

pub fn write_sample(sample: &SimulationSample, path: &Path) -> Result<()> {
    let io = |source| Error::Io { path: path.into(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    sample_to_writer(sample, &mut w)?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

pub fn read_sample(path: &Path) -> Result<SimulationSample> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    sample_from_reader(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture_sample() -> SimulationSample {
        let runs: Vec<Vec<Vec<f64>>> = (0..6)
            .map(|r| {
                let r = r as f64;
                vec![vec![1.0, 1.0 + 0.1 * r, 2.0 * r], vec![5.0, 5.0 - r / 3.0, 0.3 * r * r]]
            })
            .collect();
        SimulationSample::from_runs(vec!["A".into(), "B".into()], vec![0.0, 1.0, 2.5], &runs).unwrap()
    }

    fn fixture_report() -> EfectReport {
        let s = fixture_sample();
        let stats = ErrorStats { mean: 0.4, stdev: 0.05, count: 12, sample_size: 6 };
        build_report(
            &s,
            &stats,
            EcfConfig::default(),
            vec![DistributionSpec::normal("beta", 0.3, 0.03)],
            6,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap()
    }

    #[test]
    fn report_round_trip() {
        let r = fixture_report();
        let back = EfectReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        for (a, b) in back.ecf.iter().zip(&r.ecf) {
            assert!(a.real_parts.iter().zip(&b.real_parts).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn report_fields_and_grids() {
        let r = fixture_report();
        assert_eq!(r.ecf.len(), 6);
        assert_eq!(r.sample_size, 6);
        // variable A at t = 0 is constant: fallback tau_max 2πm
        assert_eq!(r.ecf[0].tau_max, 6.0 * std::f64::consts::PI);
        let set = r.ecf_set().unwrap();
        assert!(set.entry(0, 0).iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn tau_max_from_full_sample_stdev() {
        // column with sample stdev exactly 2: {-2, -2, 2, 2} scaled so s = 2
        let runs: Vec<Vec<Vec<f64>>> = [-1.0, -1.0, 1.0, 1.0]
            .iter()
            .map(|&x: &f64| vec![vec![x * (3.0f64).sqrt()]])
            .collect();
        let s = SimulationSample::from_runs(vec!["x".into()], vec![0.0], &runs).unwrap();
        let stats = ErrorStats { mean: 0.1, stdev: 0.0, count: 10, sample_size: 4 };
        let r = build_report(&s, &stats, EcfConfig::default(), vec![], 6, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!((r.ecf[0].tau_max - 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_rejected() {
        let s = fixture_sample();
        let stats = ErrorStats { mean: 0.4, stdev: 0.05, count: 12, sample_size: 8 };
        assert!(build_report(&s, &stats, EcfConfig::default(), vec![], 6, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn missing_field_is_named() {
        let mut v: serde_json::Value = serde_json::from_str(&fixture_report().to_json().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("sample_size");
        let err = EfectReport::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(err.to_string().contains("sample_size"), "{err}");
    }

    #[test]
    fn corrupt_modulus_rejected() {
        let mut r = fixture_report();
        r.ecf[1].real_parts[5] = 1.5;
        r.ecf[1].imag_parts[5] = 0.0;
        let text = serde_json::to_string(&r).unwrap();
        let err = EfectReport::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("invariant violation"), "{err}");
    }

    #[test]
    fn unknown_version_rejected() {
        let mut r = fixture_report();
        r.format_version = "efect-report/99".into();
        let text = serde_json::to_string(&r).unwrap();
        assert!(matches!(EfectReport::from_json(&text), Err(Error::UnsupportedVersion { .. })));
    }

    #[test]
    fn sample_round_trip() {
        let s = fixture_sample().select(&[0, 1, 2]);
        let mut buf = Vec::new();
        sample_to_writer(&s, &mut buf).unwrap();
        let back = sample_from_reader(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_sample_documents_rejected() {
        let ragged = r#"{"format_version":"efect-sample/1","variable_names":["x"],"times":[0,1],"runs":[[[1,2]],[[1]]]}"#;
        assert!(sample_from_reader(ragged.as_bytes()).is_err());
        let nonfinite = r#"{"format_version":"efect-sample/1","variable_names":["x"],"times":[0],"runs":[[[null]]]}"#;
        assert!(sample_from_reader(nonfinite.as_bytes()).is_err());
        let dup = r#"{"format_version":"efect-sample/1","variable_names":["x","x"],"times":[0],"runs":[[[1],[2]]]}"#;
        assert!(sample_from_reader(dup.as_bytes()).is_err());
    }
}
