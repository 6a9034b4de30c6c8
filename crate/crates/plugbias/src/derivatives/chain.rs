//! Chain rule for `T(F) = g(S(F))`: derivative moments of `T` from the
//! partial derivatives of `g` and the integrated derivatives of `S`.

use crate::corrections::Pattern;
use crate::error::{invalid, Result};

use super::poly::SMoments;
use super::table::PartialDerivativeTable;

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

/// One chain-rule term: `mult * g_{i_1..i_k} S_{i_1..i_k}(args)`, summed
/// over all statistic indices. Letters are independent draws from `F`.
struct Term {
    mult: f64,
    args: &'static [&'static [usize]],
}

const fn t(mult: f64, args: &'static [&'static [usize]]) -> Term {
    Term { mult, args }
}

const A_2: &[Term] = &[t(1.0, &[&[A], &[A]]), t(1.0, &[&[A, A]])];

const A_3: &[Term] = &[
    t(1.0, &[&[A], &[A], &[A]]),
    t(3.0, &[&[A], &[A, A]]),
    t(1.0, &[&[A, A, A]]),
];

const A_4: &[Term] = &[
    t(1.0, &[&[A], &[A], &[A], &[A]]),
    t(6.0, &[&[A], &[A], &[A, A]]),
    t(4.0, &[&[A], &[A, A, A]]),
    t(3.0, &[&[A, A], &[A, A]]),
    t(1.0, &[&[A, A, A, A]]),
];

const A_22: &[Term] = &[
    t(1.0, &[&[A], &[A], &[B], &[B]]),
    t(1.0, &[&[A], &[A], &[B, B]]),
    t(1.0, &[&[B], &[B], &[A, A]]),
    t(4.0, &[&[A, B], &[A], &[B]]),
    t(2.0, &[&[A], &[A, B, B]]),
    t(2.0, &[&[B], &[A, A, B]]),
    t(1.0, &[&[A, A], &[B, B]]),
    t(2.0, &[&[A, B], &[A, B]]),
    t(1.0, &[&[A, A, B, B]]),
];

const A_23: &[Term] = &[
    t(1.0, &[&[A, A, B, B, B]]),
    // order 2
    t(2.0, &[&[A], &[A, B, B, B]]),
    t(3.0, &[&[B], &[A, A, B, B]]),
    t(1.0, &[&[A, A], &[B, B, B]]),
    t(6.0, &[&[A, B], &[A, B, B]]),
    t(3.0, &[&[B, B], &[A, A, B]]),
    // order 3
    t(1.0, &[&[A], &[A], &[B, B, B]]),
    t(3.0, &[&[B], &[B], &[A, A, B]]),
    t(6.0, &[&[A], &[B], &[A, B, B]]),
    t(6.0, &[&[A], &[A, B], &[B, B]]),
    t(3.0, &[&[B], &[A, A], &[B, B]]),
    t(6.0, &[&[B], &[A, B], &[A, B]]),
    // order 4
    t(1.0, &[&[A, A], &[B], &[B], &[B]]),
    t(6.0, &[&[A, B], &[A], &[B], &[B]]),
    t(3.0, &[&[B, B], &[B], &[A], &[A]]),
    // order 5
    t(1.0, &[&[A], &[A], &[B], &[B], &[B]]),
];

const A_222: &[Term] = &[
    t(1.0, &[&[A, A, B, B, C, C]]),
    // order 2
    t(6.0, &[&[A], &[A, B, B, C, C]]),
    t(3.0, &[&[A, A], &[B, B, C, C]]),
    t(12.0, &[&[A, B], &[A, B, C, C]]),
    t(6.0, &[&[A, A, B], &[B, C, C]]),
    t(4.0, &[&[A, B, C], &[A, B, C]]),
    // order 3
    t(3.0, &[&[A], &[A], &[B, B, C, C]]),
    t(12.0, &[&[A], &[B], &[A, B, C, C]]),
    t(12.0, &[&[A], &[A, C, C], &[B, B]]),
    t(24.0, &[&[A], &[A, B], &[B, C, C]]),
    t(24.0, &[&[A], &[B, C], &[A, B, C]]),
    t(1.0, &[&[A, A], &[B, B], &[C, C]]),
    t(6.0, &[&[A, A], &[B, C], &[B, C]]),
    t(8.0, &[&[A, B], &[B, C], &[C, A]]),
    // order 4
    t(12.0, &[&[A, A, B], &[B], &[C], &[C]]),
    t(8.0, &[&[A, B, C], &[A], &[B], &[C]]),
    t(3.0, &[&[A], &[A], &[B, B], &[C, C]]),
    t(6.0, &[&[A], &[A], &[B, C], &[B, C]]),
    t(12.0, &[&[A], &[B], &[A, B], &[C, C]]),
    t(24.0, &[&[A], &[B], &[A, C], &[B, C]]),
    // order 5
    t(3.0, &[&[A, A], &[B], &[B], &[C], &[C]]),
    t(12.0, &[&[A, B], &[A], &[B], &[C], &[C]]),
    // order 6
    t(1.0, &[&[A], &[A], &[B], &[B], &[C], &[C]]),
];

fn terms(pattern: Pattern) -> Result<&'static [Term]> {
    Ok(match pattern {
        Pattern::A2 => A_2,
        Pattern::A3 => A_3,
        Pattern::A4 => A_4,
        Pattern::A22 => A_22,
        Pattern::A23 => A_23,
        Pattern::A222 => A_222,
        other => return invalid(format!("no chain-rule expansion for T({})", other.label())),
    })
}

/// `T(pattern)` for `T = g(S)` in the one-sample case.
pub fn chain_bundle(g: &PartialDerivativeTable, s: &impl SMoments, pattern: Pattern) -> Result<f64> {
    if g.q() != s.q() {
        return invalid(format!("g has {} statistics, S has {}", g.q(), s.q()));
    }
    let q = g.q();
    let mut total = 0.0;
    for term in terms(pattern)? {
        let k = term.args.len();
        let mut idx = vec![0usize; k];
        loop {
            let gv = g.get(&idx)?;
            if gv != 0.0 {
                total += term.mult * gv * s.integral(&idx, term.args)?;
            }
            let mut pos = 0;
            while pos < k {
                idx[pos] += 1;
                if idx[pos] < q {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
    }
    Ok(total)
}

/// The six core bundle entries of `g(S)` via [`chain_bundle`].
pub fn chain_core_bundle(
    g: &PartialDerivativeTable,
    s: &impl SMoments,
) -> Result<crate::corrections::DerivativeBundle> {
    crate::corrections::DerivativeBundle::from_fn(g.value(), &Pattern::CORE, |p| chain_bundle(g, s, p))
}
