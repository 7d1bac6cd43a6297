//! Bit-vector arithmetic over formula nodes. Vectors are LSB first and all
//! operations are unsigned with the carry out discarded.

use super::store::{BitRef, NodeStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

pub fn zero_extend(bits: &[BitRef], width: usize) -> Vec<BitRef> {
    let mut v: Vec<BitRef> = bits.iter().copied().take(width).collect();
    v.resize(width, BitRef::ZERO);
    v
}

/// Sum of `a + b + carry_in` in `a.len()` bits, together with the carry out.
/// Both operands must have the same width.
pub fn add_with_carry(
    store: &mut NodeStore,
    a: &[BitRef],
    b: &[BitRef],
    carry_in: BitRef,
) -> (Vec<BitRef>, BitRef) {
    debug_assert_eq!(a.len(), b.len());
    let mut carry = carry_in;
    let mut sum = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        let t = store.xor2(x, y);
        sum.push(store.xor2(t, carry));
        let g = store.and2(x, y);
        let p = store.and2(carry, t);
        carry = store.or2(g, p);
    }
    (sum, carry)
}

pub fn negate(store: &mut NodeStore, a: &[BitRef]) -> Vec<BitRef> {
    let zero = vec![BitRef::ZERO; a.len()];
    sub(store, &zero, a).0
}

/// `a - b` as `a + !b + 1`; the returned flag is the carry, which is set
/// exactly when no borrow occurred (`a >= b`).
fn sub(store: &mut NodeStore, a: &[BitRef], b: &[BitRef]) -> (Vec<BitRef>, BitRef) {
    let nb: Vec<BitRef> = b.iter().map(|&x| store.not(x)).collect();
    add_with_carry(store, a, &nb, BitRef::ONE)
}

/// Applies `op` to `a` and `b` after zero-extending both to the wider width.
pub fn bitvec_arith(store: &mut NodeStore, op: ArithOp, a: &[BitRef], b: &[BitRef]) -> Vec<BitRef> {
    let w = a.len().max(b.len());
    let (a, b) = (zero_extend(a, w), zero_extend(b, w));
    match op {
        ArithOp::Add => add_with_carry(store, &a, &b, BitRef::ZERO).0,
        ArithOp::Sub => sub(store, &a, &b).0,
        ArithOp::Mul => {
            let mut acc = vec![BitRef::ZERO; w];
            for (i, &bi) in b.iter().enumerate() {
                let mut row = vec![BitRef::ZERO; w];
                for j in i..w {
                    row[j] = store.and2(a[j - i], bi);
                }
                acc = add_with_carry(store, &acc, &row, BitRef::ZERO).0;
            }
            acc
        }
    }
}

/// Unsigned comparison producing a single bit.
pub fn compare(store: &mut NodeStore, op: CmpOp, a: &[BitRef], b: &[BitRef]) -> BitRef {
    let w = a.len().max(b.len());
    let (a, b) = (zero_extend(a, w), zero_extend(b, w));
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            let xnors: Vec<BitRef> = a
                .iter()
                .zip(&b)
                .map(|(&x, &y)| {
                    let d = store.xor2(x, y);
                    store.not(d)
                })
                .collect();
            let eq = store.and(&xnors);
            if op == CmpOp::Eq {
                eq
            } else {
                store.not(eq)
            }
        }
        CmpOp::Lt | CmpOp::Ge => {
            let (_, no_borrow) = sub(store, &a, &b);
            if op == CmpOp::Ge {
                no_borrow
            } else {
                store.not(no_borrow)
            }
        }
        CmpOp::Gt | CmpOp::Le => {
            let (_, no_borrow) = sub(store, &b, &a);
            if op == CmpOp::Le {
                no_borrow
            } else {
                store.not(no_borrow)
            }
        }
    }
}

/// Logical shift by a concrete amount; only moves references around.
pub fn shift(a: &[BitRef], amount: usize, left: bool) -> Vec<BitRef> {
    let w = a.len();
    (0..w)
        .map(|i| {
            if left {
                if i >= amount {
                    a[i - amount]
                } else {
                    BitRef::ZERO
                }
            } else {
                i.checked_add(amount)
                    .filter(|&j| j < w)
                    .map_or(BitRef::ZERO, |j| a[j])
            }
        })
        .collect()
}
