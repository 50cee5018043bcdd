//! Fixtures shared by unit tests, integration tests and benches: the small
//! worked example and a seeded random graph generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{record, Arity, Graph, Node, OpKind};

/// `y1 = x1 + x2`, `y2 = x3 * (x1 + x2)`: seven nodes, two of them copies.
pub fn example1() -> Graph {
    record(3, |x| {
        let s = x[0] + x[1];
        vec![s, x[2] * s]
    })
    .expect("example graph records")
}

#[derive(Debug, Clone, Copy)]
pub struct RandomGraphConfig {
    pub max_n: usize,
    pub max_m: usize,
    pub max_ell: usize,
}

impl Default for RandomGraphConfig {
    fn default() -> Self {
        RandomGraphConfig {
            max_n: 20,
            max_m: 20,
            max_ell: 120,
        }
    }
}

/// Points at which every graph from [`random_graph`] with the same seed is
/// known to evaluate to finite values with finite partials.
pub const SAMPLE_POINTS: usize = 8;

const MAX_ABS: f64 = 20.0;
const MARGIN: f64 = 0.1;

/// The first `count` (at most [`SAMPLE_POINTS`]) checked points for `seed`.
pub fn sample_points(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(count <= SAMPLE_POINTS, "only {SAMPLE_POINTS} points are checked");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect())
        .collect()
}

fn random_op(rng: &mut ChaCha8Rng) -> OpKind {
    use OpKind::*;
    let c = (rng.gen_range(-2.0f64..2.0) * 8.0).round() / 8.0;
    let choices = [
        Add,
        Sub,
        Mul,
        Div,
        Pow,
        Neg,
        Sin,
        Cos,
        Exp,
        Log,
        Sqrt,
        AddConst(c),
        SubConstL(c),
        SubConstR(c),
        MulConst(c),
        DivConstL(c),
        DivConstR(if c == 0.0 { 0.5 } else { c }),
        PowConstExp(*[2.0, 3.0, 0.5, -1.0, 1.5].choose(rng).unwrap()),
        PowConstBase(*[0.5, 2.0, 3.0].choose(rng).unwrap()),
        Copy,
        Const(c),
    ];
    *choices.choose(rng).unwrap()
}

fn operands_ok(op: OpKind, a: f64, b: f64) -> bool {
    use OpKind::*;
    match op {
        Log | Sqrt => a >= MARGIN,
        Div => b.abs() >= MARGIN,
        DivConstL(_) => a.abs() >= MARGIN,
        Pow => a >= MARGIN && b.abs() <= 4.0,
        PowConstExp(c) if c.fract() != 0.0 || c < 0.0 => a >= MARGIN,
        _ => true,
    }
}

fn pick_operand(rng: &mut ChaCha8Rng, k: usize) -> usize {
    if rng.gen_bool(0.5) {
        rng.gen_range(k.saturating_sub(8)..k)
    } else {
        rng.gen_range(0..k)
    }
}

/// A seeded random graph with every operator kind represented over the
/// corpus. Nodes are only accepted when their operands stay away from
/// domain boundaries and their values stay bounded at [`sample_points`].
pub fn random_graph(seed: u64, cfg: &RandomGraphConfig) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=cfg.max_n);
    let m = rng.gen_range(1..=cfg.max_m);
    let budget = cfg.max_ell.saturating_sub(n + m).max(1);
    let ops = rng.gen_range(1..=budget);

    let points = sample_points(seed, n, SAMPLE_POINTS);
    let mut vals: Vec<Vec<f64>> = points;
    let mut nodes = Vec::with_capacity(ops + m);
    for k in n..n + ops {
        let mut chosen = None;
        for _ in 0..20 {
            let op = random_op(&mut rng);
            let (a, b) = match op.arity() {
                Arity::Nullary => (0, 0),
                Arity::Unary => {
                    let a = pick_operand(&mut rng, k);
                    (a, a)
                }
                Arity::Binary => (pick_operand(&mut rng, k), pick_operand(&mut rng, k)),
            };
            let good = vals.iter().all(|v| {
                let (u1, u2) = (v[a], v[b]);
                let y = op.apply(u1, u2);
                operands_ok(op, u1, u2)
                    && y.is_finite()
                    && y.abs() <= MAX_ABS
                    && op.partials(u1, u2, y).is_finite()
            });
            if good {
                chosen = Some(Node::new(op, a, b));
                break;
            }
        }
        let node = chosen.unwrap_or_else(|| {
            let a = pick_operand(&mut rng, k);
            Node::new(OpKind::Sin, a, a)
        });
        for v in vals.iter_mut() {
            let y = node.op.apply(v[node.a as usize], v[node.b as usize]);
            v.push(y);
        }
        nodes.push(node);
    }
    for _ in 0..m {
        let k = rng.gen_range(0..n + ops);
        nodes.push(Node::new(OpKind::Copy, k, k));
    }
    Graph::new(n, m, nodes).expect("generator emits valid graphs")
}
