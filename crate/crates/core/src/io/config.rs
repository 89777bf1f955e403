//! TOML experiment configuration.

use std::path::Path;

use super::{read_file, IoError};
use crate::experiment::ExperimentSpec;

/// Parses and validates a configuration. Missing keys take their defaults;
/// unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, IoError> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentSpec, IoError> {
    let bytes = read_file(path.as_ref())?;
    let text = std::str::from_utf8(&bytes).map_err(|_| IoError::Config("file is not UTF-8".into()))?;
    parse_config(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ExperimentKind;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(parse_config("").unwrap(), ExperimentSpec::default());
    }

    #[test]
    fn overrides_and_errors() {
        let s = parse_config("kind = \"resolution_sweep\"\nresolutions = [1.0, 2.0]\ntrials = 7\n").unwrap();
        assert_eq!(s.kind, ExperimentKind::ResolutionSweep);
        assert_eq!(s.resolutions, vec![1.0, 2.0]);
        assert_eq!(s.trials, 7);
        assert!(matches!(parse_config("trails = 3"), Err(IoError::Config(_))));
        assert!(matches!(parse_config("trials = \"x\""), Err(IoError::Config(_))));
        let e = parse_config("resolutions = [-1.0]").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("resolutions"), "{e}");
    }
}
