//! Command failures and their exit codes.

use std::fmt;

/// Exit code for invalid specifications, configuration or I/O problems.
pub const EXIT_SPEC: i32 = 2;
/// Exit code for a violated internal invariant or bound.
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Spec,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn spec(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Spec,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Invariant,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Spec => EXIT_SPEC,
            Kind::Invariant => EXIT_INVARIANT,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Spec => write!(f, "error: {}", self.message),
            Kind::Invariant => write!(f, "invariant violation: {}", self.message),
        }
    }
}

impl std::error::Error for Failure {}

impl From<resolv::Error> for Failure {
    fn from(e: resolv::Error) -> Self {
        match e {
            resolv::Error::InvariantViolation(_) => Failure::invariant(e.to_string()),
            other => Failure::spec(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let f = Failure::from(resolv::Error::InvariantViolation("bound".into()));
        assert_eq!(f.exit_code(), EXIT_INVARIANT);
        assert!(f.to_string().starts_with("invariant violation"));
        let f = Failure::from(resolv::FiniteDist::new(vec![0.5, 0.6]).unwrap_err());
        assert_eq!(f.exit_code(), EXIT_SPEC);
    }
}
