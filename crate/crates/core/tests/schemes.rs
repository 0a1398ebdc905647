use std::path::{Path, PathBuf};

use qinfo_core::experiment::{experiment_information, ExperimentScheme};
use qinfo_core::Error;

fn schemes_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemes")
}

const MATCHED: &str = r#"{
  "rho_in": { "kind": "maximally_mixed", "dim": 2 },
  "extraction": { "flavor": "projective", "basis": { "kind": "computational", "dim": 2 } },
  "channel": { "kind": "identity", "dim": 2 },
  "readout": { "flavor": "projective", "basis": { "kind": "computational", "dim": 2 } }
}"#;

fn schema_error(text: &str) -> (String, String) {
    match ExperimentScheme::from_json(text, None) {
        Err(Error::Schema { path, message }) => (path, message),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn bundled_schemes_load() {
    for (name, bits) in [("matched.json", 1.0), ("depolarized.json", 0.0)] {
        let s = ExperimentScheme::load(&schemes_dir().join(name)).unwrap();
        assert!((experiment_information(&s).unwrap() - bits).abs() < 1e-12, "{name}");
    }
    for name in ["rotated_readout.json", "lambda_photon_count.json", "channel_file.json"] {
        let s = ExperimentScheme::load(&schemes_dir().join(name)).unwrap();
        let i = experiment_information(&s).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&i), "{name}: {i}");
    }
}

#[test]
fn inline_scheme_matches_file() {
    let s = ExperimentScheme::from_json(MATCHED, None).unwrap();
    assert_eq!(experiment_information(&s).unwrap(), 1.0);
    assert!(s.control_names().is_empty());
}

#[test]
fn unknown_kind_and_field_are_located() {
    let (path, msg) = schema_error(&MATCHED.replace("\"identity\"", "\"teleport\""));
    assert_eq!(path, "channel.kind");
    assert!(msg.contains("teleport") && msg.contains("line 4"), "{msg}");

    let (path, msg) = schema_error(&MATCHED.replace(
        "\"dim\": 2 },\n  \"readout\"",
        "\"dim\": 2, \"extra\": 1 },\n  \"readout\"",
    ));
    assert_eq!(path, "channel");
    assert!(msg.contains("extra"), "{msg}");
}

#[test]
fn malformed_json_is_a_schema_error() {
    let (_, msg) = schema_error("{ \"rho_in\": ");
    assert!(msg.contains("line 1"), "{msg}");
}

#[test]
fn control_references_are_checked() {
    let text = MATCHED.replace(
        "\"kind\": \"identity\", \"dim\": 2",
        "\"kind\": \"depolarizing\", \"p\": { \"control\": \"noise\" }",
    );
    assert!(matches!(
        ExperimentScheme::from_json(&text, None),
        Err(Error::UnknownControl(name)) if name == "noise"
    ));

    let with_control = text.replace(
        "\"readout\"",
        "\"controls\": [{ \"name\": \"noise\", \"min\": 0, \"max\": 1, \"value\": 1 }],\n  \"readout\"",
    );
    let s = ExperimentScheme::from_json(&with_control, None).unwrap();
    assert_eq!(s.default_values(), vec![1.0]);
    assert!(experiment_information(&s).unwrap().abs() < 1e-12);
    assert_eq!(s.instantiate(&[0.0]).unwrap().information().unwrap(), 1.0);
}

#[test]
fn unitary_flavor_needs_exactly_one_source() {
    let text = MATCHED
        .replace(
            "\"rho_in\": { \"kind\": \"maximally_mixed\", \"dim\": 2 }",
            "\"rho_in\": { \"kind\": \"diagonal\", \"probs\": [1, 0] }",
        )
        .replacen(
            "{ \"flavor\": \"projective\", \"basis\": { \"kind\": \"computational\", \"dim\": 2 } }",
            "{ \"flavor\": \"unitary\", \"rotations\": [0, 3.141592653589793] }",
            1,
        );
    let s = ExperimentScheme::from_json(&text, None).unwrap();
    assert!((experiment_information(&s).unwrap() - 1.0).abs() < 1e-12);

    let both = text.replace(
        "\"rotations\": [0, 3.141592653589793]",
        "\"rotations\": [0], \"unitaries\": [[[1, 0], [0, 0], [0, 0], [1, 0]]]",
    );
    assert!(ExperimentScheme::from_json(&both, None).is_err());
}

#[test]
fn relative_file_without_base_dir_fails_as_io() {
    let text = MATCHED.replace(
        "{ \"kind\": \"identity\", \"dim\": 2 }",
        "{ \"kind\": \"file\", \"path\": \"damping_channel.json\" }",
    );
    assert!(ExperimentScheme::from_json(&text, Some(&schemes_dir())).is_ok());
    assert!(matches!(
        ExperimentScheme::from_json(&text, Some(Path::new("/nonexistent"))),
        Err(Error::Io(_))
    ));
}
