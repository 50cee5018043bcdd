//! Symbolic replay of the reverse sweep: records `x -> w^T f'(x)` as a new
//! graph whose Jacobian is the Hessian of `sum_i w_i f_i`.

use crate::error::Result;
use crate::graph::{Arity, Graph, OpKind, Recorder, Var};

/// Adjoint of one node during symbolic replay. `Zero` means structurally
/// zero; a `Const` carries no dependence on `x` but is kept numerically.
#[derive(Clone, Copy)]
enum Adj<'r> {
    Zero,
    Const(f64),
    Var(Var<'r>),
}

/// A partial derivative: either a known constant or a recorded expression.
#[derive(Clone, Copy)]
enum Partial<'r> {
    Const(f64),
    Var(Var<'r>),
}

fn add<'r>(lhs: Adj<'r>, rhs: Adj<'r>) -> Adj<'r> {
    match (lhs, rhs) {
        (Adj::Zero, x) | (x, Adj::Zero) => x,
        (Adj::Const(a), Adj::Const(b)) => Adj::Const(a + b),
        (Adj::Const(c), Adj::Var(u)) | (Adj::Var(u), Adj::Const(c)) => {
            if c == 0.0 {
                Adj::Var(u)
            } else {
                Adj::Var(u + c)
            }
        }
        (Adj::Var(u), Adj::Var(w)) => Adj::Var(u + w),
    }
}

// A constant factor of zero still multiplies a variable expression: the
// node is kept so the structure matches the Hessian sparsity pattern.
fn scale<'r>(adj: Adj<'r>, p: Partial<'r>) -> Adj<'r> {
    match (adj, p) {
        (Adj::Zero, _) => Adj::Zero,
        (Adj::Const(a), Partial::Const(b)) => Adj::Const(a * b),
        (Adj::Const(c), Partial::Var(u)) | (Adj::Var(u), Partial::Const(c)) => {
            if c == 1.0 {
                Adj::Var(u)
            } else if c == -1.0 {
                Adj::Var(-u)
            } else {
                Adj::Var(u * c)
            }
        }
        (Adj::Var(u), Partial::Var(w)) => Adj::Var(u * w),
    }
}

fn partials<'r>(op: OpKind, a: Var<'r>, b: Var<'r>, vk: Var<'r>) -> (Partial<'r>, Partial<'r>) {
    use OpKind::*;
    use Partial::{Const as C, Var as V};
    match op {
        Add => (C(1.0), C(1.0)),
        Sub => (C(1.0), C(-1.0)),
        Mul => (V(b), V(a)),
        Div => (V(1.0 / b), V(-(vk / b))),
        Pow => (V(b * a.pow(b - 1.0)), V(vk * a.ln())),
        Neg => (C(-1.0), C(0.0)),
        Sin => (V(a.cos()), C(0.0)),
        Cos => (V(-a.sin()), C(0.0)),
        Exp => (V(vk), C(0.0)),
        Log => (V(1.0 / a), C(0.0)),
        Sqrt => (V(0.5 / vk), C(0.0)),
        AddConst(_) | SubConstR(_) | Copy => (C(1.0), C(0.0)),
        SubConstL(_) => (C(-1.0), C(0.0)),
        MulConst(c) => (C(c), C(0.0)),
        DivConstR(c) => (C(1.0 / c), C(0.0)),
        DivConstL(c) => (V((-c) / (a * a)), C(0.0)),
        PowConstExp(c) => (V(a.powf(c - 1.0) * c), C(0.0)),
        PowConstBase(c) => (V(vk * c.ln()), C(0.0)),
        Const(_) => (C(0.0), C(0.0)),
    }
}

/// Records the gradient of `g(x) = sum_i w_i f_i(x)` as a graph with `n`
/// independents and `n` dependents. The weights are baked in as constants.
///
/// Only adjoints that are structurally nonzero produce nodes; the result is
/// pruned of nodes that do not reach an output.
pub fn record_gradient_graph(g: &Graph, w: &[f64]) -> Result<Graph> {
    if w.len() != g.m() {
        return Err(crate::error::Error::Dimension(format!(
            "weights have length {}, expected {}",
            w.len(),
            g.m()
        )));
    }
    let rec = Recorder::new(g.n());
    let mut vars: Vec<Var<'_>> = rec.independents();
    vars.reserve(g.ell() - g.n());
    for k in g.n()..g.ell() {
        let node = g.node(k);
        let (a, b) = (vars[node.a as usize], vars[node.b as usize]);
        let v = match node.op {
            OpKind::Copy => a,
            OpKind::Const(c) => rec.constant(c),
            op if op.arity() == Arity::Unary => a.apply_unary(op),
            op => a.apply_binary(op, b),
        };
        vars.push(v);
    }

    let mut adj = vec![Adj::Zero; g.ell()];
    let first_dep = g.ell() - g.m();
    for (i, &wi) in w.iter().enumerate() {
        if wi != 0.0 {
            adj[first_dep + i] = add(adj[first_dep + i], Adj::Const(wi));
        }
    }
    for k in (g.n()..g.ell()).rev() {
        let bar = adj[k];
        if matches!(bar, Adj::Zero) {
            continue;
        }
        let node = g.node(k);
        let (ai, bi) = (node.a as usize, node.b as usize);
        let (d1, d2) = partials(node.op, vars[ai], vars[bi], vars[k]);
        match node.op.arity() {
            Arity::Nullary => {}
            Arity::Unary => adj[ai] = add(adj[ai], scale(bar, d1)),
            Arity::Binary => {
                adj[ai] = add(adj[ai], scale(bar, d1));
                adj[bi] = add(adj[bi], scale(bar, d2));
            }
        }
    }

    let outputs: Vec<Var<'_>> = adj[..g.n()]
        .iter()
        .map(|&x| match x {
            Adj::Zero => rec.constant(0.0),
            Adj::Const(c) => rec.constant(c),
            Adj::Var(u) => u,
        })
        .collect();
    Ok(rec.finish(&outputs)?.prune())
}
