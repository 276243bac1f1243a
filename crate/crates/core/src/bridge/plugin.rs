use std::path::Path;

use serde_json::{json, Value};

use super::{BridgeConfig, BridgeError, PluginSession, Role, Transcript};
use crate::extension::{ExtResult, Heuristic, HeuristicDirective, Method, Priority, Propagator, SolverView};
use crate::program::{Atom, AtomTable, Literal, Sign};

/// A propagator or heuristic running in a plugin process.
///
/// Payloads, with literals as signed atom ids:
///
/// | method | params | result |
/// |---|---|---|
/// | `attachLiterals`, `simplify` | `{}` | `{"literals":[l..]}` |
/// | `onLiteralTrue` | `{"literal":l}` | `{"literals":[l..]}` |
/// | `onLiteralsTrue` | `{"literals":[l..]}` | `{"literals":[l..]}` |
/// | `onLiteralsUndefined` | `{"literals":[l..]}` | `{}` |
/// | `getReasonForLiteral` | `{"literal":l}` | `{"reason":[l..]}` |
/// | `checkStableModel` | `{"atoms":[id..]}` (true atoms) | `{"stable":bool}` |
/// | `getReasonsForCheckFailure` | `{}` | `{"constraints":[[l..]..]}` |
/// | `onConflict`, `onRestart` | `{}` | `{}` |
/// | `onLitInConflict` | `{"literal":l}` | `{}` |
/// | `onLearningConstraint` | `{"constraint":[l..]}` | `{}` |
/// | `initMinisat`, `factorMinisat` | `{}` | `{"values":[[id,n]..]}` |
/// | `signMinisat` | `{}` | `{"literals":[l..]}` (the sign of `l` is the polarity) |
/// | `selectLiteral` | `{}` | `{"kind":"choice","literal":l}`, `{"kind":"minisat","n":n}`, `{"kind":"unroll","literal":l}` or `{"kind":"restart"}` |
///
/// Methods missing from the plugin's capabilities are never sent; the host answers them
/// locally with the interface defaults. A plugin declaring `onLiteralTrue` runs as an eager
/// propagator, any other as a post propagator.
pub struct ScriptedPlugin {
    name: String,
    session: PluginSession,
}

impl ScriptedPlugin {
    pub fn spawn(
        command: &[String],
        role: Role,
        atoms: &AtomTable,
        config: &BridgeConfig,
        transcript: Option<Transcript>,
    ) -> Result<ScriptedPlugin, BridgeError> {
        let session = PluginSession::spawn(command, role, atoms, config, transcript)?;
        // Named after the script: the last argument naming a file, else the program.
        let name = command
            .iter()
            .rev()
            .find(|s| Path::new(s).is_file())
            .or(command.first())
            .and_then(|s| Path::new(s).file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "plugin".into());
        Ok(ScriptedPlugin { name, session })
    }

    /// Splits a command line on whitespace, as given to `--propagator-script`.
    pub fn split_command(line: &str) -> Vec<String> {
        line.split_whitespace().map(str::to_owned).collect()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> ScriptedPlugin {
        self.name = name.into();
        self
    }

    pub fn session(&self) -> &PluginSession {
        &self.session
    }

    pub fn shutdown(&mut self) {
        self.session.shutdown();
    }

    fn call(&mut self, method: Method, params: Value) -> Result<Value, BridgeError> {
        self.session.call(method.as_str(), params)
    }

    fn literals_of(&mut self, method: Method, params: Value, key: &str) -> ExtResult<Vec<Literal>> {
        let result = self.call(method, params)?;
        Ok(literals(result.get(key), &result)?)
    }
}

fn encode(lits: &[Literal]) -> Vec<i64> {
    lits.iter().map(|l| l.to_signed()).collect()
}

fn malformed(what: &str, result: &Value) -> BridgeError {
    BridgeError::ProtocolError { message: format!("expected {what}"), line: result.to_string() }
}

fn literal(v: &Value, result: &Value) -> Result<Literal, BridgeError> {
    v.as_i64()
        .filter(|x| i32::try_from(*x).is_ok())
        .and_then(Literal::from_signed)
        .ok_or_else(|| malformed("a nonzero 32-bit literal", result))
}

fn literals(v: Option<&Value>, result: &Value) -> Result<Vec<Literal>, BridgeError> {
    v.and_then(Value::as_array)
        .ok_or_else(|| malformed("an array of literals", result))?
        .iter()
        .map(|x| literal(x, result))
        .collect()
}

fn atom_values(result: &Value) -> Result<Vec<(Atom, u64)>, BridgeError> {
    let bad = || malformed("values as [[atom, n], ...]", result);
    result
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(bad)?
        .iter()
        .map(|pair| match pair.as_array().map(Vec::as_slice) {
            Some([a, n]) => match (a.as_u64().filter(|&a| a > 0 && a <= u32::MAX as u64), n.as_u64()) {
                (Some(a), Some(n)) => Ok((Atom::new(a as u32), n)),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        })
        .collect()
}

impl Propagator for ScriptedPlugin {
    fn name(&self) -> &str {
        &self.name
    }

    fn priority(&self) -> Priority {
        if self.session.supports(Method::OnLiteralTrue) {
            Priority::Eager
        } else {
            Priority::Post
        }
    }

    fn attach_literals(&mut self, _: &SolverView) -> ExtResult<Vec<Literal>> {
        if !self.session.supports(Method::AttachLiterals) {
            return Ok(Vec::new());
        }
        self.literals_of(Method::AttachLiterals, json!({}), "literals")
    }

    fn simplify(&mut self, _: &SolverView) -> ExtResult<Vec<Literal>> {
        if !self.session.supports(Method::Simplify) {
            return Ok(Vec::new());
        }
        self.literals_of(Method::Simplify, json!({}), "literals")
    }

    fn on_literal_true(&mut self, lit: Literal, _: &SolverView) -> ExtResult<Vec<Literal>> {
        if !self.session.supports(Method::OnLiteralTrue) {
            return Ok(Vec::new());
        }
        self.literals_of(Method::OnLiteralTrue, json!({ "literal": lit.to_signed() }), "literals")
    }

    fn on_literals_true(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<Vec<Literal>> {
        if !self.session.supports(Method::OnLiteralsTrue) {
            return Ok(Vec::new());
        }
        self.literals_of(Method::OnLiteralsTrue, json!({ "literals": encode(lits) }), "literals")
    }

    fn on_literals_undefined(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<()> {
        if self.session.supports(Method::OnLiteralsUndefined) {
            self.call(Method::OnLiteralsUndefined, json!({ "literals": encode(lits) }))?;
        }
        Ok(())
    }

    fn get_reason_for_literal(&mut self, lit: Literal, _: &SolverView) -> ExtResult<Vec<Literal>> {
        if !self.session.supports(Method::GetReasonForLiteral) {
            return Ok(Vec::new());
        }
        self.literals_of(Method::GetReasonForLiteral, json!({ "literal": lit.to_signed() }), "reason")
    }

    fn check_stable_model(&mut self, view: &SolverView) -> ExtResult<bool> {
        if !self.session.supports(Method::CheckStableModel) {
            return Ok(true);
        }
        let atoms: Vec<u32> = view.true_atoms().iter().map(|a| a.id()).collect();
        let result = self.call(Method::CheckStableModel, json!({ "atoms": atoms }))?;
        let stable = result.as_bool().or_else(|| result.get("stable").and_then(Value::as_bool));
        Ok(stable.ok_or_else(|| malformed("{\"stable\": bool}", &result))?)
    }

    fn get_reasons_for_check_failure(&mut self, _: &SolverView) -> ExtResult<Vec<Vec<Literal>>> {
        if !self.session.supports(Method::GetReasonsForCheckFailure) {
            return Ok(Vec::new());
        }
        let result = self.call(Method::GetReasonsForCheckFailure, json!({}))?;
        let list = result
            .get("constraints")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("an array of constraints", &result))?;
        Ok(list.iter().map(|c| literals(Some(c), &result)).collect::<Result<_, _>>()?)
    }
}

impl Heuristic for ScriptedPlugin {
    fn on_conflict(&mut self, _: &SolverView) -> ExtResult<()> {
        if self.session.supports(Method::OnConflict) {
            self.call(Method::OnConflict, json!({}))?;
        }
        Ok(())
    }

    fn on_lit_in_conflict(&mut self, lit: Literal, _: &SolverView) -> ExtResult<()> {
        if self.session.supports(Method::OnLitInConflict) {
            self.call(Method::OnLitInConflict, json!({ "literal": lit.to_signed() }))?;
        }
        Ok(())
    }

    fn on_learning_constraint(&mut self, lits: &[Literal], _: &SolverView) -> ExtResult<()> {
        if self.session.supports(Method::OnLearningConstraint) {
            self.call(Method::OnLearningConstraint, json!({ "constraint": encode(lits) }))?;
        }
        Ok(())
    }

    fn on_restart(&mut self, _: &SolverView) -> ExtResult<()> {
        if self.session.supports(Method::OnRestart) {
            self.call(Method::OnRestart, json!({}))?;
        }
        Ok(())
    }

    fn init_minisat(&mut self, _: &SolverView) -> ExtResult<Vec<(Atom, u64)>> {
        if !self.session.supports(Method::InitMinisat) {
            return Ok(Vec::new());
        }
        let result = self.call(Method::InitMinisat, json!({}))?;
        Ok(atom_values(&result)?)
    }

    fn factor_minisat(&mut self, _: &SolverView) -> ExtResult<Vec<(Atom, u64)>> {
        if !self.session.supports(Method::FactorMinisat) {
            return Ok(Vec::new());
        }
        let result = self.call(Method::FactorMinisat, json!({}))?;
        Ok(atom_values(&result)?)
    }

    fn sign_minisat(&mut self, _: &SolverView) -> ExtResult<Vec<(Atom, Sign)>> {
        if !self.session.supports(Method::SignMinisat) {
            return Ok(Vec::new());
        }
        let lits = self.literals_of(Method::SignMinisat, json!({}), "literals")?;
        Ok(lits.into_iter().map(|l| (l.atom(), l.sign())).collect())
    }

    fn select_literal(&mut self, _: &SolverView) -> ExtResult<HeuristicDirective> {
        if !self.session.supports(Method::SelectLiteral) {
            return Ok(HeuristicDirective::Minisat(0));
        }
        let result = self.call(Method::SelectLiteral, json!({}))?;
        let lit = || literal(result.get("literal").unwrap_or(&Value::Null), &result);
        let directive = match result.get("kind").and_then(Value::as_str) {
            Some("choice") => HeuristicDirective::Choice(lit()?),
            Some("unroll") => HeuristicDirective::Unroll(lit()?),
            Some("restart") => HeuristicDirective::Restart,
            Some("minisat") => HeuristicDirective::Minisat(
                result
                    .get("n")
                    .and_then(Value::as_u64)
                    .and_then(|n| u32::try_from(n).ok())
                    .ok_or_else(|| malformed("a non-negative n", &result))?,
            ),
            _ => return Err(malformed("a selectLiteral directive", &result).into()),
        };
        Ok(directive)
    }
}

impl Drop for ScriptedPlugin {
    fn drop(&mut self) {
        self.session.shutdown();
    }
}
