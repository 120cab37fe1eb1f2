//! The four CLI modes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;

use crackloc::forward::{add_noise, assemble_msr, MsrMatrix};
use crackloc::imaging::{
    compute_map, extract_peaks_with, predicted_map, scaled_centers, ImageMap, PeakOptions,
};
use crackloc::locate::{localization_error, locate_cracks, ImagingStage, SyntheticOracle};
use crackloc::spectral::{estimate_rank, svd};

use crate::config::{Mode, RunConfig};
use crate::output::{frequency_tag, msr_csv, write_json, write_map_csv, write_map_pgm};
use crate::report::{
    peak_docs, Evaluation, ImageReport, LocateReport, MapFiles, MapReport, ProbeDoc, RayDoc,
    SimulateReport, StageDoc,
};

/// Run `mode` and write its outputs into `out`, which is created if needed.
/// Returns the written file names in order.
pub fn run(mode: Mode, config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    if let Some(declared) = config.mode {
        if declared != mode {
            bail!("config declares mode `{declared}` but `{mode}` was requested");
        }
    }
    config.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let echo = RunConfig {
        mode: Some(mode),
        ..config.clone()
    };
    let mut runner = Runner {
        out,
        written: Vec::new(),
    };
    match mode {
        Mode::Simulate => runner.simulate(&echo)?,
        Mode::Image => runner.image(&echo)?,
        Mode::Predict => runner.predict(&echo)?,
        Mode::Locate => runner.locate(&echo)?,
    }
    Ok(runner.written)
}

struct Runner<'a> {
    out: &'a Path,
    written: Vec<PathBuf>,
}

impl Runner<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.written.push(p.clone());
        p
    }

    fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, value)
    }

    /// Raw CSV, max-normalized CSV and PGM for one map.
    fn map(&mut self, stem: &str, map: &ImageMap) -> Result<MapFiles> {
        let files = MapFiles {
            csv: format!("{stem}.csv"),
            normalized_csv: format!("{stem}_normalized.csv"),
            pgm: format!("{stem}.pgm"),
        };
        let p = self.path(&files.csv);
        write_map_csv(&p, map)?;
        let p = self.path(&files.normalized_csv);
        write_map_csv(&p, &map.normalized())?;
        let p = self.path(&files.pgm);
        write_map_pgm(&p, map)?;
        Ok(files)
    }

    fn simulate(&mut self, cfg: &RunConfig) -> Result<()> {
        let msr = measure(cfg)?;
        let dec = svd(&msr)?;
        let p = self.path("msr.csv");
        fs::write(&p, msr_csv(&msr)).with_context(|| format!("writing {}", p.display()))?;
        let report = SimulateReport {
            mode: Mode::Simulate,
            seed: cfg.seed,
            directions: cfg.directions,
            realized_snr_db: msr.realized_snr_db(),
            singular_values: dec.singular_values().to_vec(),
            estimated_rank: estimate_rank(dec.singular_values(), cfg.rank_threshold)?,
            symmetry_defect: msr.symmetry_defect(),
            msr_csv: "msr.csv".into(),
            config: cfg.clone(),
        };
        self.json("simulate.json", &report)
    }

    fn image(&mut self, cfg: &RunConfig) -> Result<()> {
        let msr = measure(cfg)?;
        let dec = svd(&msr)?;
        let rank = estimate_rank(dec.singular_values(), cfg.rank_threshold)?;
        info!("estimated rank {rank}");
        let grid = cfg.grid;
        let opts = PeakOptions {
            max_peaks: Some(rank),
            ..cfg.peak_options()
        };
        let mut maps = Vec::new();
        for &w in &cfg.omega_hat {
            let map = compute_map(&grid, w, &dec, rank, msr.directions())?;
            let peaks = extract_peaks_with(&map, &opts)?;
            let files = self.map(&format!("map_{}", frequency_tag(w)), &map)?;
            maps.push(MapReport {
                omega_hat: w,
                files,
                peaks: peak_docs(&peaks),
                scaled_centers: None,
            });
        }
        let report = ImageReport {
            mode: Mode::Image,
            seed: Some(cfg.seed),
            realized_snr_db: msr.realized_snr_db(),
            singular_values: Some(dec.singular_values().to_vec()),
            estimated_rank: Some(rank),
            maps,
            config: cfg.clone(),
        };
        self.json("image.json", &report)
    }

    fn predict(&mut self, cfg: &RunConfig) -> Result<()> {
        let scene = cfg.scene()?;
        let opts = PeakOptions {
            max_peaks: Some(scene.len()),
            ..cfg.peak_options()
        };
        let mut maps = Vec::new();
        for &w in &cfg.omega_hat {
            let map = predicted_map(&cfg.grid, w, &scene)?;
            let peaks = extract_peaks_with(&map, &opts)?;
            let files = self.map(&format!("predicted_{}", frequency_tag(w)), &map)?;
            maps.push(MapReport {
                omega_hat: w,
                files,
                peaks: peak_docs(&peaks),
                scaled_centers: Some(
                    scaled_centers(&scene, w)
                        .into_iter()
                        .map(Into::into)
                        .collect(),
                ),
            });
        }
        let report = ImageReport {
            mode: Mode::Predict,
            seed: None,
            realized_snr_db: None,
            singular_values: None,
            estimated_rank: None,
            maps,
            config: cfg.clone(),
        };
        self.json("predict.json", &report)
    }

    fn locate(&mut self, cfg: &RunConfig) -> Result<()> {
        let scene = cfg.scene()?;
        let truth = scene.crack_centers();
        let oracle = SyntheticOracle::new(scene.clone(), cfg.direction_set()?, cfg.snr(), cfg.seed);
        // one working frequency drives the pipeline
        let omega_hat = cfg.omega_hat[0];
        let result = locate_cracks(&oracle, omega_hat, &cfg.grid, &cfg.locate_config())
            .context("localization failed")?;

        let stage = |runner: &mut Self, name: &str, s: &ImagingStage| -> Result<StageDoc> {
            let files = runner.map(&format!("locate_{name}"), &s.map)?;
            Ok(StageDoc::new(s, files))
        };
        let initial = stage(self, "initial", &result.initial)?;
        let probe = match &result.probe {
            Some(p) => Some(ProbeDoc {
                location: p.probe.into(),
                rays: p.rays.iter().map(RayDoc::from).collect(),
                skipped_peaks: p.skipped_peaks.iter().map(|&v| v.into()).collect(),
                stage: stage(self, "probe", &p.imaging)?,
                probe_peak: (&p.probe_peak).into(),
            }),
            None => None,
        };
        let final_stage = if cfg.known_frequency {
            initial.clone()
        } else {
            stage(self, "final", &result.final_stage)?
        };
        let omega = scene.true_frequency();
        let initial_locations: Vec<_> = result.initial.peaks.iter().map(|p| p.location).collect();
        let report = LocateReport {
            mode: Mode::Locate,
            seed: cfg.seed,
            working_frequency: omega_hat,
            omega_est: result.estimate.omega_est,
            initial,
            probe,
            final_stage,
            centers: result.centers.iter().map(|&c| c.into()).collect(),
            evaluation: Evaluation {
                true_frequency: omega,
                frequency_relative_error: (result.estimate.omega_est - omega) / omega,
                initial_error: localization_error(&initial_locations, &truth),
                final_error: localization_error(&result.centers, &truth),
            },
            config: cfg.clone(),
        };
        info!(
            "omega_est {:.6} (true {:.6}), final error {:.5}",
            report.omega_est, omega, report.evaluation.final_error
        );
        self.json("report.json", &report)
    }
}

fn measure(cfg: &RunConfig) -> Result<MsrMatrix> {
    let clean = assemble_msr(&cfg.scene()?, &cfg.direction_set()?)?;
    Ok(add_noise(&clean, cfg.snr(), cfg.seed)?)
}
