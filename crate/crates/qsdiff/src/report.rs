//! Check records returned by the verifiers.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    /// Experimental evidence for a statement that is not proved by the check.
    Evidence,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Evidence => "evidence",
        })
    }
}

/// One verified identity. Failed checks always carry a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub params: String,
    pub status: Status,
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>, params: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            params: params.into(),
            status: Status::Pass,
            witness: None,
        }
    }

    pub fn fail(
        name: impl Into<String>,
        params: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            params: params.into(),
            status: Status::Fail,
            witness: Some(witness.into()),
        }
    }

    pub fn evidence(
        name: impl Into<String>,
        params: impl Into<String>,
        note: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            params: params.into(),
            status: Status::Evidence,
            witness: Some(note.into()),
        }
    }

    /// Pass if `witness` is `None`, otherwise fail with it.
    pub fn from_witness(
        name: impl Into<String>,
        params: impl Into<String>,
        witness: Option<String>,
    ) -> Self {
        match witness {
            None => Check::pass(name, params),
            Some(w) => Check::fail(name, params, w),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// True when no check failed.
pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}
