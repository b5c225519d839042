use std::path::PathBuf;

use cint::config::{default_fine_spacing, known_keys};
use cint::{ConfigError, RunConfig};
use cint_core::Point;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const MINIMAL: &str = r#"
physics.lambda0 = 1.1e-5
physics.range = 800
physics.aperture = 16
physics.sigma = 2e-6
physics.bandwidth_frac = 0.2
sources.positions = [[0, 800], [0.001, 800.00001]]
array.receivers = 64
medium.seed = 1
noise.level = 0.05
noise.seed = 2
coarse.center = [0, 800]
coarse.spacing = [0.01, 2e-5]
coarse.shape = [13, 25]
"#;

#[test]
fn empty_file_lists_every_required_key() {
    match RunConfig::parse("# nothing here\n\n") {
        Err(ConfigError::Missing(keys)) => {
            assert_eq!(keys.len(), 13);
            for k in ["physics.lambda0", "sources.positions", "medium.seed", "noise.seed", "coarse.shape"] {
                assert!(keys.iter().any(|m| m == k), "{k} not listed");
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn duplicate_key_reports_both_lines() {
    let text = format!("{MINIMAL}medium.seed = 9\n");
    let err = RunConfig::parse(&text).unwrap_err();
    assert_eq!(err, ConfigError::Duplicate { key: "medium.seed".into(), first: 9, second: 15 });
    assert!(err.to_string().contains("9") && err.to_string().contains("15"));
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    let text = format!("{MINIMAL}noise.levle = 0.1\n");
    assert_eq!(RunConfig::parse(&text).unwrap_err(), ConfigError::UnknownKey { key: "noise.levle".into(), line: 15 });
}

#[test]
fn syntax_errors_carry_line_numbers() {
    let bad_value = format!("{MINIMAL}fine.shape = [61, \n");
    assert!(matches!(RunConfig::parse(&bad_value), Err(ConfigError::Syntax { line: 15, .. })));
    let no_equals = "physics.lambda0 1e-5\n";
    assert!(matches!(RunConfig::parse(no_equals), Err(ConfigError::Syntax { line: 1, .. })));
    let wrong_type = MINIMAL.replace("array.receivers = 64", "array.receivers = \"many\"");
    assert!(matches!(RunConfig::parse(&wrong_type), Err(ConfigError::Invalid { line: 8, .. })));
}

#[test]
fn comments_are_stripped_outside_strings() {
    let text = format!("{MINIMAL}output.dir = \"runs/#1\" # trailing comment\n");
    let cfg = RunConfig::parse(&text).unwrap();
    assert_eq!(cfg.output_dir.as_deref(), Some("runs/#1"));
}

#[test]
fn defaults_are_resolved() {
    let cfg = RunConfig::parse(MINIMAL).unwrap();
    assert_eq!(cfg.frequencies, 257);
    assert_eq!(cfg.fine_shape, [61, 61]);
    assert_eq!(cfg.fine_pixel(), default_fine_spacing(&cfg.physics));
    assert_eq!(cfg.tolerance(), cfg.fine_pixel());
    assert_eq!(cfg.sources[1], Point::planar(0.001, 800.00001));
}

#[test]
fn fine_pixel_units_scale_source_offsets() {
    let text = MINIMAL
        .replace("sources.positions = [[0, 800], [0.001, 800.00001]]", "sources.positions = [[0, 0], [3, -2]]")
        + "sources.unit = \"fine_pixel\"\nsources.origin = [0, 800]\n";
    let cfg = RunConfig::parse(&text).unwrap();
    let [px, pz] = cfg.fine_pixel();
    assert_eq!(cfg.sources, vec![Point::planar(0.0, 800.0), Point::planar(3.0 * px, 800.0 - 2.0 * pz)]);
}

#[test]
fn emitted_config_reloads_to_an_equal_value() {
    let mut all = RunConfig::parse(MINIMAL).unwrap();
    all.receiver_spacing = Some(0.25);
    all.medium_box = Some([-1.0, 0.0, 1.0, 4.0]);
    all.fine_spacing = Some([3e-4, 5e-6]);
    all.tolerance = Some([1.5e-4, 2e-6]);
    all.taper = Some(16.0 / 6.0);
    all.output_dir = Some("out dir".into());
    all.sources.push(Point::new(0.1, 0.2, 800.3));
    let mut cases = vec![RunConfig::parse(MINIMAL).unwrap(), all];
    for name in ["three_sources.cfg", "four_sources.cfg", "single_source.cfg"] {
        cases.push(RunConfig::load(&example(name)).unwrap());
    }
    for cfg in cases {
        let text = cfg.emit();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg, "{text}");
    }
}

#[test]
fn every_known_key_appears_in_a_full_emission() {
    let mut cfg = RunConfig::parse(MINIMAL).unwrap();
    cfg.receiver_spacing = Some(0.25);
    cfg.medium_box = Some([-1.0, 0.0, 1.0, 4.0]);
    cfg.fine_spacing = Some([3e-4, 5e-6]);
    cfg.tolerance = Some([1.5e-4, 2e-6]);
    cfg.taper = Some(2.0);
    cfg.output_dir = Some("o".into());
    let text = cfg.emit();
    // Source positions are emitted in absolute units, so these two keys
    // have no counterpart in the resolved form.
    for key in known_keys().filter(|k| !["sources.unit", "sources.origin"].contains(k)) {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key} missing");
    }
}

#[test]
fn invalid_values_are_rejected() {
    let zero_threshold = format!("{MINIMAL}peaks.fine_threshold = 0\n");
    assert!(matches!(RunConfig::parse(&zero_threshold), Err(ConfigError::Invalid { .. })));
    let negative_sigma = MINIMAL.replace("physics.sigma = 2e-6", "physics.sigma = -1");
    assert!(RunConfig::parse(&negative_sigma).is_err());
    let bad_unit = format!("{MINIMAL}sources.unit = \"furlong\"\n");
    assert!(matches!(RunConfig::parse(&bad_unit), Err(ConfigError::Invalid { .. })));
    let one_receiver = MINIMAL.replace("array.receivers = 64", "array.receivers = 1");
    assert!(RunConfig::parse(&one_receiver).is_err());
}
