use orthomeasure::{Error, ErrorKind};

/// Failures surfaced as exit codes: 2 malformed input, 3 numerical
/// failure, 4 precondition violation.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Precondition => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "input",
            3 => "numerical",
            _ => "precondition",
        }
    }

    /// Name of the underlying error, e.g. `NotCP`.
    pub fn reason(&self) -> String {
        match self {
            CliError::Input(_) => "MalformedInput".into(),
            CliError::Core(e) => {
                let dbg = format!("{e:?}");
                let name = dbg.split(|ch: char| !ch.is_alphanumeric()).next().unwrap_or_default();
                name.replace("Cp", "CP")
            }
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
