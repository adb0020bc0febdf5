use super::{load_scenario, Scenario, ScenarioError};

/// Shipped scenarios. The first four share one cell layout; `mini-cell` is a
/// small two-action test cell.
pub const BUILTIN_NAMES: [&str; 5] = [
    "s1-scanner-width",
    "s2-elbow-bay",
    "s3-fence-gap",
    "safe-baseline",
    "mini-cell",
];

fn builtin_document(name: &str) -> Option<&'static str> {
    Some(match name {
        "s1-scanner-width" => include_str!("../../scenarios/s1-scanner-width.json"),
        "s2-elbow-bay" => include_str!("../../scenarios/s2-elbow-bay.json"),
        "s3-fence-gap" => include_str!("../../scenarios/s3-fence-gap.json"),
        "safe-baseline" => include_str!("../../scenarios/safe-baseline.json"),
        "mini-cell" => include_str!("../../scenarios/mini-cell.json"),
        _ => return None,
    })
}

pub fn builtin_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let doc = builtin_document(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
    load_scenario(doc.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_NAMES {
            let s = builtin_scenario(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(
            builtin_scenario("s9-nothing"),
            Err(ScenarioError::UnknownBuiltin("s9-nothing".into()))
        );
    }
}
