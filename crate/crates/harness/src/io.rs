//! Result serialization: per-trial CSV, summary JSON, and binary PPM/PGM
//! debug dumps.
//!
//! CSV layout (one row per trial, header below): floats use the shortest
//! round-trip decimal form, booleans are `true`/`false`, and fields that do
//! not apply stay empty. The two timing columns are populated only when
//! requested, because wall-clock values would break the byte-for-byte
//! reproducibility of a seeded run.
//!
//! Image dumps are binary PPM (P6) for three-channel data and PGM (P5) for
//! single-channel data, 8 bits per sample, rows top to bottom.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use colorpose_core::colorcode::quantize;
use colorpose_core::image::Map;

use crate::scenario::{Summary, TrialResult};
use crate::HarnessError;

pub const CSV_HEADER: &str =
    "trial,add,add_s,add_s_prime,pass_add,pass_add_s_prime,n_corr,pnp_ms,pipeline_ms,failure";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the per-trial CSV. `include_timings` fills the `pnp_ms` and
/// `pipeline_ms` columns with measured wall time.
pub fn write_trials_csv(
    path: &Path,
    trials: &[TrialResult],
    include_timings: bool,
) -> Result<(), HarnessError> {
    let mut out = String::with_capacity(64 * (trials.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for t in trials {
        let (pnp_ms, pipeline_ms) = if include_timings {
            (
                fmt_opt(t.pnp_elapsed.map(|d| d.as_secs_f64() * 1e3)),
                Some(t.pipeline_elapsed.as_secs_f64() * 1e3)
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            )
        } else {
            (String::new(), String::new())
        };
        let eval = t.eval.as_ref();
        let row = [
            t.trial.to_string(),
            fmt_opt(eval.map(|e| e.add)),
            fmt_opt(eval.map(|e| e.add_s)),
            fmt_opt(eval.and_then(|e| e.add_s_prime)),
            fmt_opt_bool(eval.map(|e| e.pass_add)),
            fmt_opt_bool(eval.and_then(|e| e.pass_add_s_prime)),
            t.n_correspondences.to_string(),
            pnp_ms,
            pipeline_ms,
            t.failure.clone().unwrap_or_default(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn write_binary(path: &Path, header: String, pixels: &[u8]) -> Result<(), HarnessError> {
    let mut file = fs::File::create(path)?;
    file.write_all(header.as_bytes())?;
    file.write_all(pixels)?;
    Ok(())
}

/// Color-code image as binary PPM, quantized to 8 bits per channel.
pub fn write_ppm_colorcode(path: &Path, image: &Map<[f64; 3]>) -> Result<(), HarnessError> {
    let (w, h) = image.dims();
    let mut pixels = Vec::with_capacity(w * h * 3);
    for px in image.data() {
        pixels.extend_from_slice(&quantize(*px));
    }
    write_binary(path, format!("P6\n{w} {h}\n255\n"), &pixels)
}

/// Symmetry mask as binary PPM: -1 maps to 0, 0 to 128, +1 to 255.
pub fn write_ppm_symmetry(path: &Path, mask: &Map<[i8; 3]>) -> Result<(), HarnessError> {
    let (w, h) = mask.dims();
    let mut pixels = Vec::with_capacity(w * h * 3);
    for px in mask.data() {
        for &s in px {
            pixels.push(match s {
                -1 => 0u8,
                0 => 128,
                _ => 255,
            });
        }
    }
    write_binary(path, format!("P6\n{w} {h}\n255\n"), &pixels)
}

/// Binary mask as PGM: background 0, foreground 255.
pub fn write_pgm_mask(path: &Path, mask: &Map<bool>) -> Result<(), HarnessError> {
    let (w, h) = mask.dims();
    let pixels: Vec<u8> = mask.data().iter().map(|&m| if m { 255 } else { 0 }).collect();
    write_binary(path, format!("P5\n{w} {h}\n255\n"), &pixels)
}

/// Depth visualization as PGM: finite depths map linearly to 255 (nearest)
/// down to 1 (farthest); background stays 0.
pub fn write_pgm_depth(path: &Path, depth: &Map<f64>) -> Result<(), HarnessError> {
    let finite: Vec<f64> = depth.data().iter().copied().filter(|d| d.is_finite()).collect();
    let (near, far) = finite.iter().fold((f64::INFINITY, 0.0f64), |(n, f), &d| {
        (n.min(d), f.max(d))
    });
    let span = (far - near).max(1e-12);
    let (w, h) = depth.dims();
    let pixels: Vec<u8> = depth
        .data()
        .iter()
        .map(|&d| {
            if d.is_finite() {
                (255.0 - 254.0 * (d - near) / span).round() as u8
            } else {
                0
            }
        })
        .collect();
    write_binary(path, format!("P5\n{w} {h}\n255\n"), &pixels)
}

/// Benchmark rows as CSV.
pub fn write_bench_csv(path: &Path, rows: &[crate::bench::BenchRow]) -> Result<(), HarnessError> {
    let mut out =
        String::from("count,repeats,median_ms,mean_ms,mean_rotation_error_deg,mean_translation_error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.count,
            r.repeats,
            r.median_ms,
            r.mean_ms,
            r.mean_rotation_error_deg,
            r.mean_translation_error
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
