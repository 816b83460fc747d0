use crate::base::{TorusPoint, MAX_RETURN_N};
use crate::budget::Budget;
use crate::group::{GroupElement, GroupInstance};

use super::{Cocycle, CocycleError, SkewState};

/// Products longer than this are accumulated as a balanced tree.
pub const TREE_THRESHOLD: u64 = 1_000_000;

const POLL_EVERY: u64 = 1 << 14;

/// `f(n, x)`: the ordered product `f(T^{n-1}x)···f(Tx)·f(x)` for `n >= 1`,
/// the identity for `n = 0` and `f(-n, T^n x)⁻¹` for `n < 0`.
pub fn evaluate_cocycle(f: &Cocycle, n: i64, x: &TorusPoint) -> Result<GroupElement, CocycleError> {
    evaluate_cocycle_with_budget(f, n, x, &Budget::UNLIMITED)
}

/// [`evaluate_cocycle`] under a step budget. When the budget runs out the
/// error carries the product of the factors formed so far.
pub fn evaluate_cocycle_with_budget(
    f: &Cocycle,
    n: i64,
    x: &TorusPoint,
    budget: &Budget,
) -> Result<GroupElement, CocycleError> {
    f.check_point(x)?;
    if n.unsigned_abs() > MAX_RETURN_N {
        return Err(CocycleError::Invalid(format!("|n| = {} exceeds {MAX_RETURN_N}", n.unsigned_abs())));
    }
    if n >= 0 {
        forward_product(f, n as u64, x, budget)
    } else {
        let start = f.system.rotate_unchecked(x, n);
        let p = forward_product(f, n.unsigned_abs(), &start, budget)?;
        Ok(f.target.invert_unchecked(&p))
    }
}

fn forward_product(f: &Cocycle, n: u64, x: &TorusPoint, budget: &Budget) -> Result<GroupElement, CocycleError> {
    let g = &f.target;
    let mut y = x.clone();
    if n <= TREE_THRESHOLD {
        let mut acc = g.identity();
        for j in 0..n {
            if j % POLL_EVERY == 0 {
                budget.poll(j, n).map_err(|e| CocycleError::Budget {
                    partial: acc.clone(),
                    done: e.done,
                    requested: n,
                })?;
            }
            acc = g.compose_unchecked(&f.eval_unchecked(&y), &acc);
            y = f.system.step(&y);
        }
        return Ok(acc);
    }
    // Binary counter of blocks; the top of the stack holds the newest
    // factors, so merging puts it on the left.
    let mut stack: Vec<(u64, GroupElement)> = Vec::new();
    for j in 0..n {
        if j % POLL_EVERY == 0 {
            if let Err(e) = budget.poll(j, n) {
                return Err(CocycleError::Budget {
                    partial: fold_stack(g, &stack),
                    done: e.done,
                    requested: n,
                });
            }
        }
        let mut block = (1u64, f.eval_unchecked(&y));
        y = f.system.step(&y);
        while let Some((size, _)) = stack.last() {
            if *size != block.0 {
                break;
            }
            let (size, older) = stack.pop().expect("non-empty");
            block = (2 * size, g.compose_unchecked(&block.1, &older));
        }
        stack.push(block);
    }
    Ok(fold_stack(g, &stack))
}

fn fold_stack(g: &GroupInstance, stack: &[(u64, GroupElement)]) -> GroupElement {
    stack
        .iter()
        .rev()
        .fold(g.identity(), |acc, (_, block)| g.compose_unchecked(&acc, block))
}

/// `T_f^n (x, g) = (T^n x, f(n, x)·g)`.
pub fn skew_iterate(f: &Cocycle, s: &SkewState, n: i64) -> Result<SkewState, CocycleError> {
    f.target.check(&s.g)?;
    let v = evaluate_cocycle(f, n, &s.x)?;
    Ok(SkewState {
        x: f.system.rotate(&s.x, n)?,
        g: f.target.compose_unchecked(&v, &s.g),
    })
}

/// Applies `T_f` (or its inverse) `|n|` times.
pub fn skew_iterate_stepwise(f: &Cocycle, s: &SkewState, n: i64) -> Result<SkewState, CocycleError> {
    f.check_point(&s.x)?;
    f.target.check(&s.g)?;
    let g = &f.target;
    let mut st = s.clone();
    for _ in 0..n.unsigned_abs() {
        if n > 0 {
            st.g = g.compose_unchecked(&f.eval_unchecked(&st.x), &st.g);
            st.x = f.system.step(&st.x);
        } else {
            st.x = f.system.step_back(&st.x);
            st.g = g.compose_unchecked(&g.invert_unchecked(&f.eval_unchecked(&st.x)), &st.g);
        }
    }
    Ok(st)
}

/// Distance between `f(k, T^l x)·f(l, x)` and `f(k + l, x)`.
pub fn verify_cocycle_identity(f: &Cocycle, k: i64, l: i64, x: &TorusPoint) -> Result<f64, CocycleError> {
    let tlx = f.system.rotate(x, l)?;
    let lhs = f
        .target
        .compose_unchecked(&evaluate_cocycle(f, k, &tlx)?, &evaluate_cocycle(f, l, x)?);
    let rhs = evaluate_cocycle(f, k + l, x)?;
    Ok(f.target.distance_unchecked(&lhs, &rhs))
}

/// `f(n, y)` and `f(-n, y)` at a list of positive times.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedValues {
    pub forward: Vec<GroupElement>,
    pub backward: Vec<GroupElement>,
}

/// Values of the cocycle at `±n` for every `n` in `times` (ascending,
/// positive). Uses the closed form when `fast` is set and one exists;
/// otherwise runs one forward and one backward prefix scan up to the
/// largest time.
pub fn values_at_times(
    f: &Cocycle,
    y: &TorusPoint,
    times: &[u64],
    fast: bool,
    budget: &Budget,
) -> Result<SignedValues, CocycleError> {
    f.check_point(y)?;
    debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
    let Some(&max) = times.last() else {
        return Ok(SignedValues {
            forward: Vec::new(),
            backward: Vec::new(),
        });
    };
    if max > MAX_RETURN_N {
        return Err(CocycleError::Invalid(format!("time {max} exceeds {MAX_RETURN_N}")));
    }
    if fast && f.has_closed_form() {
        let forward = times.iter().map(|&n| f.closed_form(n as i64, y).expect("closed form")).collect();
        let backward = times.iter().map(|&n| f.closed_form(-(n as i64), y).expect("closed form")).collect();
        return Ok(SignedValues { forward, backward });
    }
    budget.admit(2 * max)?;
    let g = &f.target;
    let mut forward = Vec::with_capacity(times.len());
    let mut backward = Vec::with_capacity(times.len());
    let mut acc = g.identity();
    let mut back = g.identity();
    let mut fwd_pt = y.clone();
    let mut back_pt = y.clone();
    let mut next = 0usize;
    for j in 1..=max {
        if j % POLL_EVERY == 0 {
            budget.poll(2 * j, 2 * max)?;
        }
        // f(j, y) = f(T^{j-1} y)·f(j-1, y)
        acc = g.compose_unchecked(&f.eval_unchecked(&fwd_pt), &acc);
        fwd_pt = f.system.step(&fwd_pt);
        // f(-j, y) = f(T^{-j} y)⁻¹·f(-(j-1), y)
        back_pt = f.system.step_back(&back_pt);
        back = g.compose_unchecked(&g.invert_unchecked(&f.eval_unchecked(&back_pt)), &back);
        if times[next] == j {
            forward.push(acc.clone());
            backward.push(back.clone());
            next += 1;
        }
    }
    Ok(SignedValues { forward, backward })
}
