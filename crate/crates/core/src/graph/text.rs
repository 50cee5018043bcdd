//! Line-based text form of a graph.
//!
//! ```text
//! graph <n> <m> <ell>
//! node <k> <tag> <a> <b> [<const>]
//! ```
//!
//! One `node` line per operator node in tape order, all indices 1-based.
//! Constants use the shortest decimal that round-trips an `f64`.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Graph, Node, OpKind};
use crate::error::{Error, Result};

impl Graph {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(24 * (self.nodes.len() + 1));
        let _ = writeln!(out, "graph {} {} {}", self.n, self.m, self.ell());
        for (offset, node) in self.nodes.iter().enumerate() {
            let k = self.n + offset + 1;
            let _ = write!(
                out,
                "node {k} {} {} {}",
                node.op.tag(),
                node.a as usize + 1,
                node.b as usize + 1
            );
            if let Some(c) = node.op.constant() {
                let _ = write!(out, " {c:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (line_no, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let fields: Vec<&str> = header.split_ascii_whitespace().collect();
        if fields.len() != 4 || fields[0] != "graph" {
            return Err(parse_err(line_no, "expected `graph <n> <m> <ell>`"));
        }
        let n: usize = field(line_no, fields[1], "n")?;
        let m: usize = field(line_no, fields[2], "m")?;
        let ell: usize = field(line_no, fields[3], "ell")?;
        if ell < n {
            return Err(parse_err(line_no, "ell smaller than n"));
        }

        let mut nodes = Vec::with_capacity(ell - n);
        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let k = n + nodes.len() + 1;
            if k > ell {
                return Err(parse_err(line_no, "more node lines than ell allows"));
            }
            nodes.push(parse_node(line_no, line, k)?);
        }
        if nodes.len() != ell - n {
            return Err(parse_err(
                text.lines().count().max(1),
                &format!("expected {} node lines, found {}", ell - n, nodes.len()),
            ));
        }
        Graph::new(n, m, nodes).map_err(|e| parse_err(1, &e.to_string()))
    }
}

fn parse_node(line_no: usize, line: &str, k: usize) -> Result<Node> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if !(5..=6).contains(&fields.len()) || fields[0] != "node" {
        return Err(parse_err(line_no, "expected `node <k> <tag> <a> <b> [<const>]`"));
    }
    let index: usize = field(line_no, fields[1], "k")?;
    if index != k {
        return Err(parse_err(line_no, &format!("expected node {k}, found {index}")));
    }
    let value = match fields.get(5) {
        Some(s) => Some(field::<f64>(line_no, s, "const")?),
        None => None,
    };
    let op = OpKind::from_tag(fields[2], value).ok_or_else(|| {
        parse_err(
            line_no,
            &format!("unknown op tag `{}` or wrong constant count", fields[2]),
        )
    })?;
    let a: usize = field(line_no, fields[3], "a")?;
    let b: usize = field(line_no, fields[4], "b")?;
    if a == 0 || b == 0 || a >= k || b >= k {
        return Err(parse_err(
            line_no,
            &format!("operand index out of range: a={a}, b={b} for node {k}"),
        ));
    }
    let node = Node::new(op, a - 1, b - 1);
    super::check_node(k - 1, &node).map_err(|msg| parse_err(line_no, &msg))?;
    Ok(node)
}

fn field<T: FromStr>(line: usize, s: &str, name: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, &format!("cannot parse {name} from `{s}`")))
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}
