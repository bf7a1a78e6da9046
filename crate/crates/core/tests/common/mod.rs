//! Synthetic two-day home used by the integration and acceptance tests.
//!
//! One motion event every minute, four sensors taking turns ON then OFF.
//! Activities start and end on whole hours; end markers ride on temperature
//! readings, which never become events.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use adl_core::ingest::TestSpec;
use adl_core::inventory::SensorInventory;
use adl_core::pipeline::{BackendKind, RunConfig};
use adl_core::prompt::{prompt_hash, PromptRenderer, DEFAULT_SYSTEM_TEMPLATE};
use adl_core::records;
use adl_core::segment::{segment, SegmentationParams};
use adl_core::time::Timestamp;

pub const HOUR: i64 = 3600;
pub const DAYS: i64 = 2;
pub const EVENTS: usize = (DAYS * 24 * 60) as usize;
pub const K: usize = 5;
pub const S: usize = 5;
/// Seconds from a whole hour back to the previous target: targets fall at 240 + 300m s.
pub const LAG: i64 = 240;

/// `(start hour, end hour, raw CASAS name)`; `None` is unannotated time.
pub const SCHEDULE: &[(i64, i64, Option<&str>)] = &[
    (0, 7, Some("Sleeping")),
    (7, 8, Some("Meal_Preparation")),
    (8, 9, Some("Eating")),
    (9, 12, Some("Relax")),
    (12, 13, None),
    (13, 18, Some("Work")),
    (18, 22, Some("Relax")),
    (22, 31, Some("Sleeping")),
    (31, 32, Some("Meal_Preparation")),
    (32, 33, Some("Eating")),
    (33, 36, Some("Relax")),
    (36, 37, None),
    (37, 42, Some("Work")),
    (42, 46, Some("Relax")),
    (46, 48, Some("Sleeping")),
];

pub fn canonical(raw: Option<&str>) -> &'static str {
    match raw {
        Some("Sleeping") => "sleeping",
        Some("Meal_Preparation") => "preparing meal",
        Some("Eating") => "eating",
        Some("Relax") => "relaxing",
        Some("Work") => "working",
        None => "other",
        Some(other) => panic!("unexpected activity {other}"),
    }
}

pub fn day0() -> Timestamp {
    Timestamp::parse("2011-06-01 00:00:00").unwrap()
}

/// Ground-truth label at `secs` after the start of the first day.
pub fn gt_label(secs: i64) -> &'static str {
    let block = SCHEDULE
        .iter()
        .find(|(s, e, _)| s * HOUR <= secs && secs < e * HOUR)
        .expect("inside the schedule");
    canonical(block.2)
}

pub fn synthetic_log() -> String {
    let base = day0();
    let line = |secs: i64, sensor: &str, value: &str, note: &str| {
        let t = base.plus_micros(secs * 1_000_000).format_casas();
        if note.is_empty() {
            format!("{t} {sensor} {value}\n")
        } else {
            format!("{t} {sensor} {value} {note}\n")
        }
    };
    let mut out = String::new();
    for i in 0..EVENTS as i64 {
        let secs = i * 60;
        for &(_, e, raw) in SCHEDULE {
            // the final block is left open and closes at the end of the data
            if let (Some(name), true) = (raw, e * HOUR == secs && e < DAYS * 24) {
                out.push_str(&line(secs, "T001", "21.5", &format!("{name} end")));
            }
        }
        let begin = SCHEDULE
            .iter()
            .find(|(s, _, raw)| s * HOUR == secs && raw.is_some())
            .map(|(_, _, raw)| format!("{} begin", raw.unwrap()))
            .unwrap_or_default();
        let sensor = format!("M00{}", (i / 2) % 4 + 1);
        let value = if i % 2 == 0 { "ON" } else { "OFF" };
        out.push_str(&line(secs, &sensor, value, &begin));
    }
    out
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Aruba catalog, synthetic data under `dir`, scripted backend reading `dir/script.json`.
pub fn synthetic_config(dir: &Path) -> RunConfig {
    let mut c = RunConfig::load(&workspace_root().join("configs/aruba.toml")).unwrap();
    let raw = dir.join("raw.log");
    std::fs::write(&raw, synthetic_log()).unwrap();
    c.dataset.raw = Some(raw);
    c.dataset.inventory = None;
    c.output_dir = dir.join("out");
    c.prepared_dir = None;
    c.recognition.cache = None;
    c.test = TestSpec::last(DAYS as u32);
    c.segmentation = SegmentationParams { k: K, s: S };
    c.recognition.tie_break = adl_core::confidence::TieBreakPolicy::SeededRandom { seed: 42 };
    c.backend.kind = BackendKind::Scripted;
    c.backend.script = Some(dir.join("script.json"));
    c.backend.http.model = "scripted".into();
    c
}

/// One entry per test window: `(window id, target seconds since day 0, prompt hash)`.
pub fn window_keys(config: &RunConfig) -> Vec<(u64, i64, String)> {
    let dir = config.prepared_dir();
    let events = records::read_events_csv(&dir.join("test_events.csv")).unwrap();
    let inventory = SensorInventory::load(&dir.join("inventory.toml")).unwrap();
    let renderer = PromptRenderer::new(DEFAULT_SYSTEM_TEMPLATE, config.utc_offset().unwrap());
    let params = SegmentationParams::new(config.segmentation.k, config.segmentation.s).unwrap();
    segment(&events, params)
        .map(|w| {
            let user = renderer.render_user_prompt(&w, &inventory).unwrap();
            let secs = (w.target().t.micros() - day0().micros()) / 1_000_000;
            (w.window_id, secs, prompt_hash(&user))
        })
        .collect()
}

pub fn answer(label: &str) -> String {
    format!("The recent events point to this activity.\n{{\"activity\": \"{label}\"}}")
}

/// Writes a script answering every window with `responses(target seconds)`.
pub fn write_script(config: &RunConfig, responses: impl Fn(i64) -> Vec<String>) -> BTreeMap<String, Vec<String>> {
    let script: BTreeMap<String, Vec<String>> = window_keys(config)
        .into_iter()
        .map(|(_, secs, key)| (key, responses(secs)))
        .collect();
    let path = config.backend.script.clone().unwrap();
    std::fs::write(&path, serde_json::to_string_pretty(&script).unwrap()).unwrap();
    script
}

/// Weighted F1 of the unanimous scenario in which every answer is the label
/// at the target time, except that the second day's work block is answered
/// "relaxing" when `work_day2_wrong`. Worked out by hand from the schedule:
/// every boundary is predicted `LAG` seconds late, and the first `LAG`
/// seconds are unscored. Each `(label, seconds)` gap removes that much
/// correctly predicted time of the class from scoring.
pub fn expected_weighted_f1(work_day2_wrong: bool, gaps: &[(&str, i64)]) -> f64 {
    let (h, d) = (HOUR as f64, LAG as f64);
    // per class: (label, support, true positives, predicted), in seconds
    let mut classes: Vec<(&str, f64, f64, f64)> = vec![
        ("sleeping", 18.0 * h - d, 18.0 * h - 3.0 * d, 18.0 * h - d),
        ("preparing meal", 2.0 * h, 2.0 * h - 2.0 * d, 2.0 * h),
        ("eating", 2.0 * h, 2.0 * h - 2.0 * d, 2.0 * h),
        ("other", 2.0 * h, 2.0 * h - 2.0 * d, 2.0 * h),
        ("relaxing", 14.0 * h, 14.0 * h - 4.0 * d, 14.0 * h),
        ("working", 10.0 * h, 10.0 * h - 2.0 * d, 10.0 * h),
    ];
    if work_day2_wrong {
        // relaxing runs on from 37 h + LAG, so the following relax block loses no lag
        classes[4] = ("relaxing", 14.0 * h, 14.0 * h - 3.0 * d, 19.0 * h);
        classes[5] = ("working", 10.0 * h, 5.0 * h - d, 5.0 * h);
    }
    for &(label, secs) in gaps {
        let c = classes.iter_mut().find(|c| c.0 == label).expect("known class");
        let g = secs as f64;
        (c.1, c.2, c.3) = (c.1 - g, c.2 - g, c.3 - g);
    }
    let total: f64 = classes.iter().map(|c| c.1).sum();
    let gap_total: i64 = gaps.iter().map(|g| g.1).sum();
    assert_eq!(total, 48.0 * h - d - gap_total as f64);
    classes.iter().map(|&(_, s, tp, p)| s * 2.0 * tp / (s + p)).sum::<f64>() / total
}
