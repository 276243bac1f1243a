use std::fmt;
use std::str::FromStr;

/// Interface methods, named as on the plugin wire protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    AttachLiterals,
    Simplify,
    OnLiteralTrue,
    OnLiteralsTrue,
    OnLiteralsUndefined,
    GetReasonForLiteral,
    CheckStableModel,
    GetReasonsForCheckFailure,
    OnConflict,
    OnLitInConflict,
    OnLearningConstraint,
    OnRestart,
    InitMinisat,
    FactorMinisat,
    SignMinisat,
    SelectLiteral,
}

impl Method {
    pub const ALL: [Method; 16] = [
        Method::AttachLiterals,
        Method::Simplify,
        Method::OnLiteralTrue,
        Method::OnLiteralsTrue,
        Method::OnLiteralsUndefined,
        Method::GetReasonForLiteral,
        Method::CheckStableModel,
        Method::GetReasonsForCheckFailure,
        Method::OnConflict,
        Method::OnLitInConflict,
        Method::OnLearningConstraint,
        Method::OnRestart,
        Method::InitMinisat,
        Method::FactorMinisat,
        Method::SignMinisat,
        Method::SelectLiteral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::AttachLiterals => "attachLiterals",
            Method::Simplify => "simplify",
            Method::OnLiteralTrue => "onLiteralTrue",
            Method::OnLiteralsTrue => "onLiteralsTrue",
            Method::OnLiteralsUndefined => "onLiteralsUndefined",
            Method::GetReasonForLiteral => "getReasonForLiteral",
            Method::CheckStableModel => "checkStableModel",
            Method::GetReasonsForCheckFailure => "getReasonsForCheckFailure",
            Method::OnConflict => "onConflict",
            Method::OnLitInConflict => "onLitInConflict",
            Method::OnLearningConstraint => "onLearningConstraint",
            Method::OnRestart => "onRestart",
            Method::InitMinisat => "initMinisat",
            Method::FactorMinisat => "factorMinisat",
            Method::SignMinisat => "signMinisat",
            Method::SelectLiteral => "selectLiteral",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    /// Methods only meaningful for heuristics.
    pub fn is_heuristic_only(self) -> bool {
        matches!(
            self,
            Method::OnConflict
                | Method::OnLitInConflict
                | Method::OnLearningConstraint
                | Method::OnRestart
                | Method::InitMinisat
                | Method::FactorMinisat
                | Method::SignMinisat
                | Method::SelectLiteral
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        // Alias names used for the same methods.
        let s = match s {
            "getReasonForCheckFailure" => "getReasonsForCheckFailure",
            "onUnrollLiterals" => "onLiteralsUndefined",
            other => other,
        };
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}
