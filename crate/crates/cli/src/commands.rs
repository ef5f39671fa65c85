use std::fs;
use std::path::{Path, PathBuf};

use freqseg::dataset::{generate_set, read_container, write_container, Sequence, SequenceSet};
use freqseg::engine::{rollout_with, EngineConfig, StepPhase};
use freqseg::metrics::{evaluate, evaluate_engine, mse, EvalReport};
use serde_json::json;

use crate::render::{montage, step_panels, write_gif, PANELS};
use crate::settings::Settings;
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn sibling_config(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".config");
    out.with_file_name(name)
}

fn load(path: &Path) -> Result<SequenceSet, CliError> {
    if !path.is_file() {
        return Err(CliError::Io(format!("no such container: {}", path.display())));
    }
    Ok(read_container(path)?)
}

fn engine_for(settings: &Settings, set: &SequenceSet) -> Result<EngineConfig, CliError> {
    let (h, w) = set
        .sequences
        .first()
        .and_then(|s| s.frames.first())
        .map(|f| f.dims())
        .ok_or_else(|| CliError::Io("container holds no frames".into()))?;
    settings.engine(h, w)
}

pub fn generate(settings: &Settings, out: &Path) -> Result<(), CliError> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(CliError::Io(format!("output directory {} does not exist", parent.display())));
        }
    }
    let options = settings.generate_options()?;
    let set = generate_set(settings.count, settings.seed, &options)?;
    write_container(&set, out)?;
    write_text(&sibling_config(out), &settings.render())?;
    for (i, s) in set.sequences.iter().enumerate() {
        let m = &s.meta;
        println!(
            "{i:4}  seed {:<6} {:<24} {:<28} v = ({:+.3}, {:+.3})  {:?}",
            m.rng_seed, m.sprite_id, m.background_id, m.velocity[0], m.velocity[1], m.motion_mode
        );
    }
    println!("wrote {} sequences to {}", set.len(), out.display());
    Ok(())
}

pub fn run(settings: &Settings, input: &Path, index: usize, out: &Path) -> Result<(), CliError> {
    let set = load(input)?;
    let seq: &Sequence = set.sequences.get(index).ok_or_else(|| {
        CliError::Usage(format!("sequence index {index} out of range ({} sequences)", set.len()))
    })?;
    let cfg = engine_for(settings, &set)?;
    if seq.frames.len() < cfg.seed_frames {
        return Err(CliError::Usage(format!(
            "sequence has {} frames, fewer than {} seed frames",
            seq.frames.len(),
            cfg.seed_frames
        )));
    }
    ensure_dir(out)?;
    write_text(&out.join("config.txt"), &settings.render())?;

    let mut rows = Vec::new();
    let mut log = String::new();
    let mut frame_index = 2;
    rollout_with(&seq.frames[..cfg.seed_frames], cfg.predict_frames, &cfg, |report| {
        let observed = seq.frames.get(frame_index);
        let loss = match (report.loss_mse, observed) {
            (Some(l), _) => Some(l),
            (None, Some(o)) => Some(mse(&report.predicted_frame, o)?),
            (None, None) => None,
        };
        let tag = match report.phase {
            StepPhase::Seed => "seed",
            StepPhase::ClosedLoop => "predict",
        };
        let line = match loss {
            Some(l) => format!("frame {frame_index:3} {tag:<8} mse {l:.6}"),
            None => format!("frame {frame_index:3} {tag:<8} mse n/a"),
        };
        println!("{line}");
        log.push_str(&line);
        log.push('\n');
        rows.push(
            step_panels(observed, &report.predicted_frame, &report.state_snapshot)?,
        );
        frame_index += 1;
        Ok(())
    })?;
    write_text(&out.join("losses.txt"), &log)?;

    let mut gif_frames = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let img = montage(std::slice::from_ref(row));
        let path = out.join(format!("step_{:03}.png", i + 2));
        img.save_with_format(&path, image::ImageFormat::Png)
            .map_err(|e| io_err(&path, e))?;
        gif_frames.push(img);
    }
    if !rows.is_empty() {
        let path = out.join("montage.png");
        montage(&rows)
            .save_with_format(&path, image::ImageFormat::Png)
            .map_err(|e| io_err(&path, e))?;
        write_gif(&gif_frames, &out.join("rollout.gif"), 250)?;
    }
    println!(
        "rendered {} steps ({} panels each) to {}",
        rows.len(),
        PANELS,
        out.display()
    );
    Ok(())
}

pub struct EvalMode {
    pub oracle: bool,
    pub ablate_phase_filter: bool,
}

pub fn eval(settings: &Settings, input: Option<&Path>, out: &Path, mode: EvalMode) -> Result<(), CliError> {
    let set = match input {
        Some(path) => load(path)?,
        None => generate_set(settings.count, settings.seed, &settings.generate_options()?)?,
    };
    let cfg = engine_for(settings, &set)?;
    let (seeds, horizon) = (cfg.seed_frames, cfg.predict_frames);
    if horizon == 0 {
        return Err(CliError::Usage("evaluation needs predict_frames >= 1".into()));
    }
    if let Some(s) = set.sequences.iter().find(|s| s.frames.len() < seeds + horizon) {
        return Err(CliError::Usage(format!(
            "sequence with {} frames cannot supply {seeds} seeds + {horizon} targets",
            s.frames.len()
        )));
    }
    ensure_dir(out)?;
    write_text(&out.join("config.txt"), &settings.render())?;

    let mut models: Vec<(String, EvalReport)> = Vec::new();
    if mode.oracle {
        let truths: Vec<Vec<_>> = set
            .sequences
            .iter()
            .map(|s| s.frames[seeds..seeds + horizon].to_vec())
            .collect();
        models.push(("Oracle".into(), evaluate(&truths, &truths, horizon)?));
    } else if mode.ablate_phase_filter {
        let on = EngineConfig { enable_phase_filter: true, ..cfg.clone() };
        let off = EngineConfig { enable_phase_filter: false, ..cfg };
        models.push(("Engine (phase filter)".into(), evaluate_engine(&set, &on)?));
        models.push(("Engine (no phase filter)".into(), evaluate_engine(&set, &off)?));
    } else {
        let name = if cfg.enable_phase_filter {
            "Engine"
        } else {
            "Engine (no phase filter)"
        };
        models.push((name.into(), evaluate_engine(&set, &cfg)?));
    }

    let rows: Vec<(&str, &EvalReport)> = models.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let table = EvalReport::table(&rows);
    let report = json!({
        "sequences": set.len(),
        "seed_frames": seeds,
        "predict_frames": horizon,
        "models": models
            .iter()
            .map(|(name, r)| Ok(json!({ "name": name, "report": serde_json::to_value(r).map_err(freqseg::Error::from)? })))
            .collect::<Result<Vec<_>, CliError>>()?,
    });
    let text = serde_json::to_string_pretty(&report).map_err(freqseg::Error::from)?;
    write_text(&out.join("report.json"), &(text + "\n"))?;
    write_text(&out.join("report.txt"), &table)?;
    print!("{table}");
    Ok(())
}
