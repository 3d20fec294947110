//! CSV and SVG output for evaluation results.
//!
//! Reals are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces the values exactly and re-exporting identical
//! results gives identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bench::{BenchMode, BenchResult};
use super::{DetectorKind, DopplerMap, HarnessError, PdCurve, Result};
use crate::fsutil::atomic_write;

pub const PD_CURVE_HEADER: [&str; 7] = ["detector", "scenario", "doppler_bin", "snr_db", "pd", "trials", "ci95_halfwidth"];
pub const DOPPLER_HEADER: [&str; 5] = ["detector", "scenario", "doppler_bin", "snr_db", "pd"];
pub const BENCH_HEADER: [&str; 6] = ["detector", "mode", "mean_ms", "samples_per_snr", "snr_points", "reference_ms_from_paper"];
pub const THRESHOLD_HEADER: [&str; 6] = ["detector", "scenario", "doppler_bin", "lambda", "pfa_target", "calibration_size"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub detector: DetectorKind,
    pub scenario: String,
    pub doppler_bin: f64,
    pub lambda: f64,
    pub pfa_target: f64,
    pub calibration_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Results {
    pub pd_curves: Vec<PdCurve>,
    pub doppler_maps: Vec<DopplerMap>,
    pub bench: Option<BenchResult>,
    pub thresholds: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportedFiles {
    pub csv: Vec<PathBuf>,
    pub svg: Vec<PathBuf>,
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Parse(e.to_string()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    atomic_write(path, bytes).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

pub fn pd_curves_csv(curves: &[PdCurve]) -> Result<Vec<u8>> {
    let rows = curves.iter().flat_map(|c| {
        (0..c.len()).map(move |i| {
            vec![
                c.detector.name().to_string(),
                c.scenario.clone(),
                c.doppler_bin.to_string(),
                c.snr_grid_db[i].to_string(),
                c.pd[i].to_string(),
                c.trials_per_point.to_string(),
                c.ci95_halfwidth[i].to_string(),
            ]
        })
    });
    csv_bytes(&PD_CURVE_HEADER, rows)
}

pub fn doppler_maps_csv(maps: &[DopplerMap]) -> Result<Vec<u8>> {
    let rows = maps.iter().flat_map(|m| m.rows.iter()).flat_map(|c| {
        (0..c.len()).map(move |i| {
            vec![c.detector.name().to_string(), c.scenario.clone(), c.doppler_bin.to_string(), c.snr_grid_db[i].to_string(), c.pd[i].to_string()]
        })
    });
    csv_bytes(&DOPPLER_HEADER, rows)
}

pub fn bench_csv(bench: &BenchResult) -> Result<Vec<u8>> {
    let rows = bench.entries.iter().map(|e| {
        vec![
            e.detector.name().to_string(),
            e.mode.name().to_string(),
            e.mean_ms.to_string(),
            e.samples_per_snr.to_string(),
            e.snr_points.to_string(),
            e.reference_ms.map(|r| r.to_string()).unwrap_or_default(),
        ]
    });
    csv_bytes(&BENCH_HEADER, rows)
}

pub fn thresholds_csv(rows: &[ThresholdRow]) -> Result<Vec<u8>> {
    let rows = rows.iter().map(|t| {
        vec![
            t.detector.name().to_string(),
            t.scenario.clone(),
            t.doppler_bin.to_string(),
            t.lambda.to_string(),
            t.pfa_target.to_string(),
            t.calibration_size.to_string(),
        ]
    });
    csv_bytes(&THRESHOLD_HEADER, rows)
}

fn read_records(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(HarnessError::Parse(format!("{}: expected columns {header:?}, found {found:?}", path.display())));
    }
    r.records().map(|rec| rec.map_err(HarnessError::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let s = rec.get(i).ok_or_else(|| HarnessError::Parse(format!("missing column {i}")))?;
    s.parse().map_err(|_| HarnessError::Parse(format!("cannot parse `{s}` in column {i}")))
}

/// Groups consecutive rows by `(detector, scenario, bin)` into curves.
fn collect_curves(recs: &[csv::StringRecord], with_trials: bool) -> Result<Vec<PdCurve>> {
    let mut curves: Vec<PdCurve> = Vec::new();
    for rec in recs {
        let detector: DetectorKind = field::<String>(rec, 0)?.parse()?;
        let scenario: String = field(rec, 1)?;
        let bin: f64 = field(rec, 2)?;
        let same = curves.last().is_some_and(|c| c.detector == detector && c.scenario == scenario && c.doppler_bin.to_bits() == bin.to_bits());
        if !same {
            curves.push(PdCurve {
                detector,
                scenario,
                doppler_bin: bin,
                snr_grid_db: Vec::new(),
                pd: Vec::new(),
                trials_per_point: 0,
                ci95_halfwidth: Vec::new(),
            });
        }
        let c = curves.last_mut().expect("pushed above");
        c.snr_grid_db.push(field(rec, 3)?);
        c.pd.push(field(rec, 4)?);
        if with_trials {
            let trials: usize = field(rec, 5)?;
            if c.snr_grid_db.len() > 1 && trials != c.trials_per_point {
                return Err(HarnessError::Parse("trial count varies within one curve".into()));
            }
            c.trials_per_point = trials;
            c.ci95_halfwidth.push(field(rec, 6)?);
        }
    }
    Ok(curves)
}

pub fn read_pd_curves(path: &Path) -> Result<Vec<PdCurve>> {
    collect_curves(&read_records(path, &PD_CURVE_HEADER)?, true)
}

/// Doppler maps without trial counts or intervals (the CSV omits them).
pub fn read_doppler_maps(path: &Path) -> Result<Vec<DopplerMap>> {
    let mut maps: Vec<DopplerMap> = Vec::new();
    for row in collect_curves(&read_records(path, &DOPPLER_HEADER)?, false)? {
        match maps.iter_mut().find(|m| m.detector == row.detector && m.scenario == row.scenario) {
            Some(m) => m.rows.push(row),
            None => maps.push(DopplerMap { detector: row.detector, scenario: row.scenario.clone(), rows: vec![row] }),
        }
    }
    Ok(maps)
}

pub fn read_thresholds(path: &Path) -> Result<Vec<ThresholdRow>> {
    read_records(path, &THRESHOLD_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ThresholdRow {
                detector: field::<String>(rec, 0)?.parse()?,
                scenario: field(rec, 1)?,
                doppler_bin: field(rec, 2)?,
                lambda: field(rec, 3)?,
                pfa_target: field(rec, 4)?,
                calibration_size: field(rec, 5)?,
            })
        })
        .collect()
}

/// `(detector, mode, mean_ms, reference)` rows of a bench file.
pub fn read_bench(path: &Path) -> Result<Vec<(DetectorKind, BenchMode, f64, Option<f64>)>> {
    read_records(path, &BENCH_HEADER)?
        .iter()
        .map(|rec| {
            let mode = field::<String>(rec, 1)?;
            let reference = rec.get(5).filter(|s| !s.is_empty()).map(|s| s.parse().map_err(|_| HarnessError::Parse(s.to_string()))).transpose()?;
            Ok((
                field::<String>(rec, 0)?.parse()?,
                BenchMode::parse(&mode).ok_or_else(|| HarnessError::Parse(format!("unknown mode `{mode}`")))?,
                field(rec, 2)?,
                reference,
            ))
        })
        .collect()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#000000"];

fn colour(kind: DetectorKind) -> &'static str {
    PALETTE[DetectorKind::ALL.iter().position(|&k| k == kind).unwrap_or(0)]
}

fn slug(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

/// Pd-vs-SNR line plot; x spans at least `[-20, 20]` dB.
pub fn pd_curve_svg(curves: &[PdCurve], title: &str) -> String {
    let (w, h, ml, mr, mt, mb) = (640.0, 440.0, 60.0, 130.0, 36.0, 50.0);
    let lo = curves.iter().flat_map(|c| c.snr_grid_db.iter().copied()).fold(-20.0, f64::min);
    let hi = curves.iter().flat_map(|c| c.snr_grid_db.iter().copied()).fold(20.0, f64::max);
    let px = |x: f64| ml + (x - lo) / (hi - lo) * (w - ml - mr);
    let py = |y: f64| mt + (1.0 - y) * (h - mt - mb);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle">{title}</text>"#, (ml + w - mr) / 2.0);
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#ddd"/>"##, py(y), w - mr);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.1}</text>"#, ml - 6.0, py(y) + 4.0);
    }
    let mut x = (lo / 5.0).ceil() * 5.0;
    while x <= hi {
        let _ = writeln!(s, r##"<line x1="{0:.2}" y1="{mt}" x2="{0:.2}" y2="{1:.2}" stroke="#ddd"/>"##, px(x), h - mb);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x}</text>"#, px(x), h - mb + 16.0);
        x += 5.0;
    }
    let _ = writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, w - ml - mr, h - mt - mb);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#, (ml + w - mr) / 2.0, h - 12.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Pd</text>"#, h / 2.0, h / 2.0);
    for (k, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c.snr_grid_db.iter().zip(&c.pd).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let col = colour(c.detector);
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = mt + 14.0 + 18.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{0:.2}" y1="{ly:.2}" x2="{1:.2}" y2="{ly:.2}" stroke="{col}" stroke-width="2"/>"#, w - mr + 10.0, w - mr + 30.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, w - mr + 36.0, ly + 4.0, c.detector.name());
    }
    s.push_str("</svg>\n");
    s
}

fn heat(v: f64) -> String {
    // dark purple → teal → yellow
    let stops = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let v = v.clamp(0.0, 1.0) * 2.0;
    let i = (v.floor() as usize).min(1);
    let f = v - i as f64;
    let (a, b) = (stops[i], stops[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Bin × SNR heatmap of a Doppler map.
pub fn doppler_map_svg(map: &DopplerMap) -> String {
    let grid = map.snr_grid_db();
    let (cols, rows) = (grid.len().max(1), map.rows.len().max(1));
    let (ml, mt, cw, ch) = (60.0, 36.0, 14.0, 18.0);
    let (w, h) = (ml + cw * cols as f64 + 20.0, mt + ch * rows as f64 + 50.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{h:.0}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{ml}" y="20">{} Pd, {}</text>"#, map.detector.name(), map.scenario);
    for (r, row) in map.rows.iter().enumerate() {
        let y = mt + ch * r as f64;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 6.0, y + ch - 5.0, row.doppler_bin);
        for (c, &pd) in row.pd.iter().enumerate() {
            let _ = writeln!(s, r#"<rect x="{:.2}" y="{y:.2}" width="{cw}" height="{ch}" fill="{}"/>"#, ml + cw * c as f64, heat(pd));
        }
    }
    for (c, &snr) in grid.iter().enumerate() {
        if snr.rem_euclid(5.0) == 0.0 {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{snr}</text>"#, ml + cw * (c as f64 + 0.5), mt + ch * rows as f64 + 16.0);
        }
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#, ml + cw * cols as f64 / 2.0, h - 10.0);
    s.push_str("</svg>\n");
    s
}

/// Writes every non-empty artifact of `results` into `out_dir`.
pub fn export_results(results: &Results, out_dir: &Path) -> Result<ExportedFiles> {
    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let mut files = ExportedFiles::default();
    let put_csv = |name: &str, bytes: Vec<u8>, files: &mut ExportedFiles| -> Result<()> {
        let p = out_dir.join(name);
        write(&p, &bytes)?;
        files.csv.push(p);
        Ok(())
    };
    if !results.pd_curves.is_empty() {
        put_csv("pd_curve.csv", pd_curves_csv(&results.pd_curves)?, &mut files)?;
        let mut groups: BTreeMap<(String, u64), Vec<PdCurve>> = BTreeMap::new();
        for c in &results.pd_curves {
            groups.entry((c.scenario.clone(), c.doppler_bin.to_bits())).or_default().push(c.clone());
        }
        for ((scenario, bin), curves) in groups {
            let bin = f64::from_bits(bin);
            let p = out_dir.join(format!("pd_curve_{}_d{bin}.svg", slug(&scenario)));
            write(&p, pd_curve_svg(&curves, &format!("{scenario}, Doppler bin {bin}")).as_bytes())?;
            files.svg.push(p);
        }
    }
    if !results.doppler_maps.is_empty() {
        put_csv("doppler_map.csv", doppler_maps_csv(&results.doppler_maps)?, &mut files)?;
        for m in &results.doppler_maps {
            let p = out_dir.join(format!("doppler_map_{}_{}.svg", slug(m.detector.name()), slug(&m.scenario)));
            write(&p, doppler_map_svg(m).as_bytes())?;
            files.svg.push(p);
        }
    }
    if let Some(b) = &results.bench {
        put_csv("bench.csv", bench_csv(b)?, &mut files)?;
        let p = out_dir.join("bench_context.json");
        let json = serde_json::to_vec_pretty(b).map_err(|e| HarnessError::Parse(e.to_string()))?;
        write(&p, &json)?;
        files.csv.push(p);
    }
    if !results.thresholds.is_empty() {
        put_csv("thresholds.csv", thresholds_csv(&results.thresholds)?, &mut files)?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bench::BenchEntry;

    fn curve(kind: DetectorKind, bin: f64, n: usize) -> PdCurve {
        let grid: Vec<f64> = (0..n).map(|i| -20.0 + i as f64).collect();
        let counts: Vec<u64> = (0..n as u64).map(|i| (i * 131) % 5001).collect();
        PdCurve::from_counts(kind, "cGN+AWGN", bin, &grid, &counts, 5000)
    }

    #[test]
    fn pd_csv_round_trip_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let curves = vec![curve(DetectorKind::Mf, 0.0, 40), curve(DetectorKind::AnmfFp, 0.0, 40)];
        let files = export_results(&Results { pd_curves: curves.clone(), ..Default::default() }, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("pd_curve.csv")).unwrap();
        assert_eq!(text.lines().count(), 81);
        assert_eq!(text.lines().next().unwrap(), PD_CURVE_HEADER.join(","));
        assert_eq!(read_pd_curves(&dir.path().join("pd_curve.csv")).unwrap(), curves);
        assert_eq!(files.svg.len(), 1);
    }

    #[test]
    fn re_export_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let map = DopplerMap {
            detector: DetectorKind::Drfm,
            scenario: "cGN+AWGN".into(),
            rows: (0..16).map(|d| curve(DetectorKind::Drfm, d as f64, 4)).collect(),
        };
        let bench = BenchResult {
            entries: vec![BenchEntry {
                detector: DetectorKind::AnmfScm,
                mode: BenchMode::PerSample,
                per_snr_secs: vec![0.1, 0.2],
                mean_ms: 0.15,
                samples_per_snr: 1000,
                snr_points: 2,
                reference_ms: None,
            }],
            cpu_context: "test".into(),
        };
        let thresholds = vec![ThresholdRow {
            detector: DetectorKind::Mf,
            scenario: "cGN+AWGN".into(),
            doppler_bin: 0.0,
            lambda: 4.6,
            pfa_target: 0.01,
            calibration_size: 10_000,
        }];
        let results = Results { pd_curves: vec![curve(DetectorKind::Nmf, 0.0, 40)], doppler_maps: vec![map.clone()], bench: Some(bench), thresholds: thresholds.clone() };
        let fa = export_results(&results, a.path()).unwrap();
        export_results(&results, b.path()).unwrap();
        for p in fa.csv.iter().chain(&fa.svg) {
            let name = p.file_name().unwrap();
            assert_eq!(std::fs::read(p).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name:?}");
        }
        let back = read_doppler_maps(&a.path().join("doppler_map.csv")).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].rows.len(), 16);
        assert_eq!(back[0].rows[3].pd, map.rows[3].pd);
        assert_eq!(read_thresholds(&a.path().join("thresholds.csv")).unwrap(), thresholds);
        let rows = read_bench(&a.path().join("bench.csv")).unwrap();
        assert_eq!(rows, vec![(DetectorKind::AnmfScm, BenchMode::PerSample, 0.15, None)]);
        let svg = std::fs::read_to_string(a.path().join("doppler_map_drfm_cgnawgn.svg")).unwrap();
        assert_eq!(svg.matches("<rect x=").count(), 64);
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pd_curve.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_pd_curves(&p), Err(HarnessError::Parse(_))));
    }

    #[test]
    fn heat_endpoints() {
        assert_eq!(heat(0.0), "#440154");
        assert_eq!(heat(1.0), "#fde725");
        assert_eq!(heat(0.5), "#21918c");
    }
}
