//! Reverse-mode automatic differentiation on a per-thread Wengert tape.
//!
//! [`Ad`] is a `Copy` scalar carrying its forward value plus an index into
//! the active tape. Each arithmetic operation pushes one node holding its
//! parent indices and the local partial derivatives evaluated at the forward
//! values; [`gradients`] then performs a single reverse sweep.
//!
//! Operations whose operands are all constants (index-free) are folded and
//! never reach the tape, so mixing taped variables with plain constants is
//! cheap.
//!
//! The tape is thread-local: recordings on different threads are fully
//! independent, which is how minibatch members can differentiate in
//! parallel. Within one thread, the intended pattern is
//! [`reset`] -> create leaves with [`var`] -> run the generic kernel ->
//! [`gradients`].

use std::cell::RefCell;

use crate::scalar::Scalar;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    a: u32,
    b: u32,
    da: f64,
    db: f64,
}

thread_local! {
    static TAPE: RefCell<Vec<Node>> = const { RefCell::new(Vec::new()) };
}

/// Differentiable scalar: forward value plus tape index.
///
/// Values created by [`constant`] (or `Ad::from_f64`) carry no index and do
/// not contribute gradients.
#[derive(Clone, Copy, Debug)]
pub struct Ad {
    val: f64,
    idx: u32,
}

/// Clears the active thread's tape. Capacity is retained across resets.
pub fn reset() {
    TAPE.with(|t| t.borrow_mut().clear());
}

/// Number of nodes currently recorded on this thread's tape.
pub fn node_count() -> usize {
    TAPE.with(|t| t.borrow().len())
}

/// Creates a differentiable leaf on the active tape.
pub fn var(v: f64) -> Ad {
    Ad {
        val: v,
        idx: push(NONE, NONE, 0.0, 0.0),
    }
}

/// Creates a constant that never receives a gradient and occupies no tape
/// space.
pub fn constant(v: f64) -> Ad {
    Ad { val: v, idx: NONE }
}

fn push(a: u32, b: u32, da: f64, db: f64) -> u32 {
    TAPE.with(|t| {
        let mut tape = t.borrow_mut();
        let idx = tape.len();
        assert!(idx < NONE as usize, "tape overflow");
        tape.push(Node { a, b, da, db });
        idx as u32
    })
}

#[inline]
fn binary(a: Ad, b: Ad, val: f64, da: f64, db: f64) -> Ad {
    if a.idx == NONE && b.idx == NONE {
        return Ad { val, idx: NONE };
    }
    Ad {
        val,
        idx: push(a.idx, b.idx, da, db),
    }
}

#[inline]
fn unary(a: Ad, val: f64, da: f64) -> Ad {
    if a.idx == NONE {
        return Ad { val, idx: NONE };
    }
    Ad {
        val,
        idx: push(a.idx, NONE, da, 0.0),
    }
}

/// Adjoints of every tape node after a reverse sweep from one output.
pub struct Adjoints(Vec<f64>);

impl Adjoints {
    /// Gradient of the swept output with respect to `x`.
    pub fn wrt(&self, x: Ad) -> f64 {
        if x.idx == NONE {
            return 0.0;
        }
        self.0[x.idx as usize]
    }
}

/// Reverse sweep: returns d`y`/d(node) for every node recorded so far.
pub fn gradients(y: Ad) -> Adjoints {
    TAPE.with(|t| {
        let tape = t.borrow();
        let mut adj = vec![0.0; tape.len()];
        if y.idx != NONE {
            adj[y.idx as usize] = 1.0;
            for i in (0..=y.idx as usize).rev() {
                let g = adj[i];
                if g == 0.0 {
                    continue;
                }
                let n = tape[i];
                if n.a != NONE {
                    adj[n.a as usize] += n.da * g;
                }
                if n.b != NONE {
                    adj[n.b as usize] += n.db * g;
                }
            }
        }
        Adjoints(adj)
    })
}

impl std::ops::Add for Ad {
    type Output = Ad;
    fn add(self, rhs: Ad) -> Ad {
        binary(self, rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl std::ops::Sub for Ad {
    type Output = Ad;
    fn sub(self, rhs: Ad) -> Ad {
        binary(self, rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl std::ops::Mul for Ad {
    type Output = Ad;
    fn mul(self, rhs: Ad) -> Ad {
        binary(self, rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl std::ops::Div for Ad {
    type Output = Ad;
    fn div(self, rhs: Ad) -> Ad {
        // the forward value must round exactly like plain f64 division
        let val = self.val / rhs.val;
        let inv = 1.0 / rhs.val;
        binary(self, rhs, val, inv, -val * inv)
    }
}

impl std::ops::Neg for Ad {
    type Output = Ad;
    fn neg(self) -> Ad {
        unary(self, -self.val, -1.0)
    }
}

impl std::ops::Add<f64> for Ad {
    type Output = Ad;
    fn add(self, rhs: f64) -> Ad {
        unary(self, self.val + rhs, 1.0)
    }
}

impl std::ops::Sub<f64> for Ad {
    type Output = Ad;
    fn sub(self, rhs: f64) -> Ad {
        unary(self, self.val - rhs, 1.0)
    }
}

impl std::ops::Mul<f64> for Ad {
    type Output = Ad;
    fn mul(self, rhs: f64) -> Ad {
        unary(self, self.val * rhs, rhs)
    }
}

impl std::ops::Div<f64> for Ad {
    type Output = Ad;
    fn div(self, rhs: f64) -> Ad {
        unary(self, self.val / rhs, 1.0 / rhs)
    }
}

impl Scalar for Ad {
    fn from_f64(v: f64) -> Self {
        constant(v)
    }

    fn value(self) -> f64 {
        self.val
    }

    fn detach(self) -> Self {
        constant(self.val)
    }

    fn exp(self) -> Self {
        let e = self.val.exp();
        unary(self, e, e)
    }

    fn ln(self) -> Self {
        unary(self, self.val.ln(), 1.0 / self.val)
    }

    fn sin(self) -> Self {
        unary(self, self.val.sin(), self.val.cos())
    }

    fn cos(self) -> Self {
        unary(self, self.val.cos(), -self.val.sin())
    }

    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        unary(self, s, 0.5 / s)
    }

    fn abs(self) -> Self {
        let sign = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        unary(self, self.val.abs(), sign)
    }

    fn relu(self) -> Self {
        if self.val > 0.0 {
            unary(self, self.val, 1.0)
        } else {
            unary(self, 0.0, 0.0)
        }
    }
}
