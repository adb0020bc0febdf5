use hazardforge::cell::{scenario_to_json, BUILTIN_NAMES};
use hazardforge::{builtin_scenario, load_scenario, ScenarioError};

#[test]
fn builtins_round_trip_losslessly() {
    for name in BUILTIN_NAMES {
        let sc = builtin_scenario(name).unwrap();
        let text = scenario_to_json(&sc);
        let back = load_scenario(text.as_bytes()).unwrap();
        assert_eq!(back, sc, "{name}");
        assert_eq!(scenario_to_json(&back), text);
    }
}

#[test]
fn malformed_documents_are_parse_errors() {
    assert!(matches!(load_scenario(b"{"), Err(ScenarioError::Parse(_))));
    assert!(matches!(load_scenario(b"[]"), Err(ScenarioError::Parse(_))));
}

#[test]
fn unknown_builtin_is_named() {
    let err = builtin_scenario("s9").unwrap_err();
    assert!(err.to_string().contains("s9"));
}
