//! Postcondition checks for values returned by extensions.

use crate::engine::Assignment;
use crate::program::Literal;

/// Checks a reason returned by `getReasonForLiteral` for `lit`.
///
/// The constraint must contain `~lit`, and every other literal must be true. When `lit` is on
/// the trail, the other literals must also precede it, otherwise the implication graph would
/// not be acyclic.
pub(crate) fn validate_reason(
    lit: Literal,
    reason: &[Literal],
    assignment: &Assignment,
    num_atoms: usize,
) -> Result<(), String> {
    check_known(reason, num_atoms)?;
    if !reason.contains(&lit.complement()) {
        return Err(format!(
            "reason for {} does not contain its negation {}",
            lit.to_signed(),
            lit.complement().to_signed()
        ));
    }
    let bound = assignment
        .is_true(lit)
        .then(|| assignment.position(lit.atom()));
    for &other in reason.iter().filter(|&&l| l != lit.complement()) {
        if !assignment.is_true(other) {
            return Err(format!(
                "reason for {} contains {} which is not true",
                lit.to_signed(),
                other.to_signed()
            ));
        }
        if let Some(bound) = bound {
            if assignment.position(other.atom()) >= bound {
                return Err(format!(
                    "reason for {} contains {} which was assigned after it",
                    lit.to_signed(),
                    other.to_signed()
                ));
            }
        }
    }
    Ok(())
}

/// Checks a constraint returned by `getReasonsForCheckFailure`: non-empty and fully true.
pub(crate) fn validate_failure_constraint(
    constraint: &[Literal],
    assignment: &Assignment,
    num_atoms: usize,
) -> Result<(), String> {
    check_known(constraint, num_atoms)?;
    if constraint.is_empty() {
        return Err("empty failure constraint".into());
    }
    if let Some(l) = constraint.iter().find(|&&l| !assignment.is_true(l)) {
        return Err(format!("failure constraint contains {} which is not true", l.to_signed()));
    }
    Ok(())
}

pub(crate) fn check_known(lits: &[Literal], num_atoms: usize) -> Result<(), String> {
    match lits.iter().find(|l| l.atom().index() > num_atoms) {
        Some(l) => Err(format!("literal {} names no program atom", l.to_signed())),
        None => Ok(()),
    }
}
