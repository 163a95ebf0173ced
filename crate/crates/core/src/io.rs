//! Plain-text instance format.
//!
//! ```text
//! # comment
//! n K W B
//! costs c_0 ... c_{K-1}      # `inf` marks an unblockable label
//! seeds i_1 ... i_s
//! arcs m
//! tail head label            # m lines
//! scenario w t               # for w = 0..W
//! a_1 ... a_t                # omitted when t = 0
//! ```
//!
//! Writing is canonical, so load followed by save reproduces a saved file
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Arc, Instance, LabeledDigraph, ScenarioSet};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next non-empty line with comments stripped, split into tokens.
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(Error::parse(self.last + 1, "unexpected end of input"))
    }

    fn has_more(&mut self) -> bool {
        let rest = self.inner.clone();
        rest.into_iter()
            .any(|(_, raw)| !raw.split('#').next().unwrap_or("").trim().is_empty())
    }
}

fn num<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot read {what} from `{token}`")))
}

fn keyword(line: usize, tokens: &[&str], word: &str) -> Result<()> {
    if tokens.first() != Some(&word) {
        return Err(Error::parse(line, format!("expected `{word}`")));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);

    let (ln, head) = lines.next_tokens()?;
    if head.len() != 4 {
        return Err(Error::parse(ln, "header needs `n K W B`"));
    }
    let n: usize = num(ln, head[0], "node count")?;
    let k: usize = num(ln, head[1], "label count")?;
    let w: usize = num(ln, head[2], "scenario count")?;
    let budget: f64 = num(ln, head[3], "budget")?;

    let (ln, toks) = lines.next_tokens()?;
    keyword(ln, &toks, "costs")?;
    let costs = toks[1..]
        .iter()
        .map(|t| num::<f64>(ln, t, "cost"))
        .collect::<Result<Vec<_>>>()?;
    if costs.len() != k {
        return Err(Error::parse(
            ln,
            format!("expected {k} costs, found {}", costs.len()),
        ));
    }

    let (ln, toks) = lines.next_tokens()?;
    keyword(ln, &toks, "seeds")?;
    let seeds = toks[1..]
        .iter()
        .map(|t| num::<u32>(ln, t, "seed"))
        .collect::<Result<Vec<_>>>()?;

    let (ln, toks) = lines.next_tokens()?;
    keyword(ln, &toks, "arcs")?;
    if toks.len() != 2 {
        return Err(Error::parse(ln, "expected `arcs m`"));
    }
    let m: usize = num(ln, toks[1], "arc count")?;
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, t) = lines.next_tokens()?;
        if t.len() != 3 {
            return Err(Error::parse(ln, "arc line needs `tail head label`"));
        }
        arcs.push(Arc::new(
            num(ln, t[0], "tail")?,
            num(ln, t[1], "head")?,
            num(ln, t[2], "label")?,
        ));
    }
    let graph = LabeledDigraph::new(n, k, arcs)?;

    let mut live = Vec::with_capacity(w);
    for expected in 0..w {
        let (ln, t) = lines.next_tokens()?;
        keyword(ln, &t, "scenario")?;
        if t.len() != 3 {
            return Err(Error::parse(ln, "expected `scenario w t`"));
        }
        let index: usize = num(ln, t[1], "scenario index")?;
        if index != expected {
            return Err(Error::parse(
                ln,
                format!("expected scenario {expected}, found {index}"),
            ));
        }
        let count: usize = num(ln, t[2], "live arc count")?;
        let mut ids = Vec::with_capacity(count);
        while ids.len() < count {
            let (ln, t) = lines.next_tokens()?;
            for tok in t {
                ids.push(num::<u32>(ln, tok, "arc index")?);
            }
            if ids.len() > count {
                return Err(Error::parse(
                    ln,
                    format!("scenario {index} lists more than {count} arcs"),
                ));
            }
        }
        live.push(ids);
    }
    if lines.has_more() {
        return Err(Error::parse(
            lines.last + 1,
            "trailing content after the last scenario",
        ));
    }
    let scenarios = ScenarioSet::new(graph.arc_count(), live)?;
    Instance::new(graph, costs, budget, seeds, scenarios)
}

pub fn write_instance(instance: &Instance) -> String {
    let g = instance.graph();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {}",
        g.node_count(),
        g.label_count(),
        instance.scenario_count(),
        instance.budget()
    );
    out.push_str("costs");
    for c in instance.costs() {
        let _ = write!(out, " {c}");
    }
    out.push_str("\nseeds");
    for s in instance.seeds() {
        let _ = write!(out, " {s}");
    }
    let _ = writeln!(out, "\narcs {}", g.arc_count());
    for a in g.arcs() {
        let _ = writeln!(out, "{} {} {}", a.tail, a.head, a.label);
    }
    for (w, live) in instance.scenarios().iter().enumerate() {
        let _ = writeln!(out, "scenario {w} {}", live.len());
        if !live.is_empty() {
            let mut first = true;
            for a in live {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{a}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(instance))?;
    Ok(())
}
