//! Built-in extensions: stable marriage propagators, a naive CASP checker and a VSIDS
//! heuristic.

pub mod casp;
pub mod marriage;
pub mod vsids;

pub use casp::{CaspError, CaspPropagator, CspSolution};
pub use marriage::{
    encode_stable_marriage, generate_sm_instance, EagerStableMarriage, LazyStableMarriage,
    PreferenceError, PreferenceTable,
};
pub use vsids::{Vsids, VSIDS_PERIOD};

/// Splits `pred(a,b,c)` into `("pred", ["a", "b", "c"])`. Commas nested in parentheses stay
/// inside their argument.
pub(crate) fn split_atom(name: &str) -> (&str, Vec<&str>) {
    let Some(open) = name.find('(') else {
        return (name, Vec::new());
    };
    if !name.ends_with(')') {
        return (name, Vec::new());
    }
    let inner = &name[open + 1..name.len() - 1];
    let mut args = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                args.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    args.push(&inner[start..]);
    (&name[..open], args)
}
