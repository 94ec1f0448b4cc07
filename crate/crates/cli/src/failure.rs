use std::fmt::Display;
use std::process::ExitCode;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Usage,
    Data,
    Convergence,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Data => 3,
            Kind::Convergence => 4,
        }
    }
}

/// A failed command. Reported as one JSON line on stderr.
#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: Kind,
    exit_code: u8,
    message: &'a str,
}

impl Failure {
    pub fn usage(message: impl Display) -> Self {
        Failure { kind: Kind::Usage, message: message.to_string() }
    }

    pub fn data(message: impl Display) -> Self {
        Failure { kind: Kind::Data, message: message.to_string() }
    }

    pub fn convergence(message: impl Display) -> Self {
        Failure { kind: Kind::Convergence, message: message.to_string() }
    }

    pub fn report(&self) -> ExitCode {
        let line = ErrorLine {
            error: ErrorBody { kind: self.kind, exit_code: self.kind.exit_code(), message: &self.message },
        };
        eprintln!("{}", serde_json::to_string(&line).expect("error line serializes"));
        ExitCode::from(self.kind.exit_code())
    }
}

/// Library errors are data errors unless they reject a caller-chosen value.
impl From<entlr::Error> for Failure {
    fn from(e: entlr::Error) -> Self {
        match e {
            entlr::Error::WernerOutOfRange(_) | entlr::Error::InvalidArgument(_) => Failure::usage(e),
            _ => Failure::data(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;
