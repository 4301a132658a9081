use serde_json::{json, Value};

use hoq_core::objects::Roles;
use hoq_core::projmap::{dense_budget, subset_name, OpMap};
use hoq_core::rational::q_fmt;
use hoq_core::Error;

pub fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn joined(ls: &[hoq_core::Label]) -> String {
    ls.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(", ")
}

pub fn roles_line(r: &Roles) -> String {
    format!("inputs: {}\noutputs: {}", joined(&r.inputs), joined(&r.outputs))
}

pub fn projector_line(p: &OpMap, tol: f64) -> Result<String, Error> {
    Ok(match p {
        OpMap::Symbolic(m) => format!("projector ({}): {m}", count(m.num_terms(), "term")),
        OpMap::Dense(d) => {
            let n = d.matrix().nrows();
            format!("projector: dense {n}x{n} supermatrix, rank {}", d.rank(tol.max(1e-12)))
        }
    })
}

pub fn projector_json(p: &OpMap, tol: f64) -> Result<Value, Error> {
    Ok(match p {
        OpMap::Symbolic(m) => json!({
            "kind": "subset",
            "display": m.to_string(),
            "terms": m.terms().into_iter().map(|(s, c)| json!({ "subset": s, "coeff": q_fmt(&c) })).collect::<Vec<_>>(),
        }),
        OpMap::Dense(d) => json!({
            "kind": "dense",
            "dim": d.matrix().nrows(),
            "rank": d.rank(tol.max(1e-12)),
            "budget": dense_budget(),
        }),
    })
}

/// `_34 - _234` from `(subset, "num/den")` pairs.
pub fn terms_line(terms: &[(Vec<hoq_core::Label>, String)]) -> String {
    let mut out = String::new();
    for (k, (s, c)) in terms.iter().enumerate() {
        let (neg, mag) = match c.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, c.as_str()),
        };
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if mag != "1" {
            out.push_str(mag);
            out.push('*');
        }
        out.push_str(&subset_name(s));
    }
    out
}

pub fn count(n: usize, what: &str) -> String {
    if n == 1 {
        format!("1 {what}")
    } else {
        format!("{n} {what}s")
    }
}
