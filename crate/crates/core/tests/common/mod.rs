#![allow(dead_code)]

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use logiceval::logic::{Formula, Term};
use rand::Rng;

const PREDS: [(&str, usize); 4] = [("P", 1), ("Q", 1), ("R", 0), ("S", 2)];
const CONSTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 3] = ["x", "y", "z"];

fn term<R: Rng>(rng: &mut R, bound: &[String]) -> Term {
    if !bound.is_empty() && rng.random_bool(0.6) {
        Term::Var(bound[rng.random_range(0..bound.len())].clone())
    } else {
        Term::Const(CONSTS[rng.random_range(0..CONSTS.len())].into())
    }
}

/// Random closed formula of nesting depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize, bound: &mut Vec<String>) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        if rng.random_bool(0.05) {
            return Formula::Falsum;
        }
        let (pred, arity) = PREDS[rng.random_range(0..PREDS.len())];
        let args = (0..arity).map(|_| term(rng, bound)).collect();
        return Formula::Atom { pred: pred.into(), args };
    }
    let b = |f: Formula| Box::new(f);
    match rng.random_range(0..6) {
        0 => Formula::Not(b(random_formula(rng, depth - 1, bound))),
        1 => Formula::And(b(random_formula(rng, depth - 1, bound)), b(random_formula(rng, depth - 1, bound))),
        2 => Formula::Or(b(random_formula(rng, depth - 1, bound)), b(random_formula(rng, depth - 1, bound))),
        3 => Formula::Implies(b(random_formula(rng, depth - 1, bound)), b(random_formula(rng, depth - 1, bound))),
        q => {
            let v = VARS[rng.random_range(0..VARS.len())].to_string();
            bound.push(v.clone());
            let body = random_formula(rng, depth - 1, bound);
            bound.pop();
            if q == 4 {
                Formula::ForAll(v, b(body))
            } else {
                Formula::Exists(v, b(body))
            }
        }
    }
}

pub fn depth_of(f: &Formula) -> usize {
    match f {
        Formula::Atom { .. } | Formula::Falsum => 0,
        Formula::Not(a) | Formula::ForAll(_, a) | Formula::Exists(_, a) => 1 + depth_of(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + depth_of(a).max(depth_of(b)),
    }
}

fn lit<R: Rng>(rng: &mut R, preds: &[&str], t: &str) -> String {
    let p = preds[rng.random_range(0..preds.len())];
    if rng.random_bool(0.3) {
        format!("¬{p}({t})")
    } else {
        format!("{p}({t})")
    }
}

/// A random monadic entailment problem over two constants, as formula text.
pub fn random_monadic_instance<R: Rng>(rng: &mut R) -> (Vec<String>, String) {
    let preds = ["A", "B", "C"];
    let c = |rng: &mut R| ["a", "b"][rng.random_range(0..2)];
    let n = rng.random_range(1..=3);
    let mut premises = Vec::new();
    for _ in 0..n {
        let k = c(rng);
        let p = match rng.random_range(0..8) {
            0 | 1 => lit(rng, &preds, k),
            2 | 3 => format!("∀x ({} → {})", lit(rng, &preds, "x"), lit(rng, &preds, "x")),
            4 => format!("∀x (({} ∧ {}) → {})", lit(rng, &preds, "x"), lit(rng, &preds, "x"), lit(rng, &preds, "x")),
            5 => {
                let k2 = c(rng);
                format!("{} ∨ {}", lit(rng, &preds, k), lit(rng, &preds, k2))
            }
            6 => format!("∃x {}", lit(rng, &preds, "x")),
            _ => format!("{} → {}", lit(rng, &preds, k), lit(rng, &preds, k)),
        };
        premises.push(p);
    }
    let k = c(rng);
    let conclusion = match rng.random_range(0..5) {
        0 | 1 => lit(rng, &preds, k),
        2 => format!("∃x {}", lit(rng, &preds, "x")),
        3 => format!("{} ∧ {}", lit(rng, &preds, k), lit(rng, &preds, k)),
        _ => {
            let k2 = c(rng);
            format!("{} ∨ {}", lit(rng, &preds, k), lit(rng, &preds, k2))
        }
    };
    (premises, conclusion)
}

/// Minimal HTTP endpoint that answers each prompt with the first canned reply
/// whose key occurs in it.
pub struct StubServer {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

impl StubServer {
    pub fn start(replies: Vec<(String, String)>) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let replies = Arc::new(replies);
        let h = hits.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (h, replies) = (h.clone(), replies.clone());
                thread::spawn(move || serve(stream, &h, &replies));
            }
        });
        StubServer { url, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn serve(stream: std::net::TcpStream, hits: &AtomicUsize, replies: &[(String, String)]) {
    let mut out = stream.try_clone().unwrap();
    let mut reader = BufReader::new(stream);
    loop {
        let mut headers = HashMap::new();
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        loop {
            let mut h = String::new();
            if reader.read_line(&mut h).unwrap_or(0) == 0 {
                return;
            }
            let h = h.trim_end();
            if h.is_empty() {
                break;
            }
            if let Some((k, v)) = h.split_once(':') {
                headers.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
        }
        let len: usize = headers.get("content-length").and_then(|v| v.parse().ok()).unwrap_or(0);
        let mut body = vec![0; len];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        hits.fetch_add(1, Ordering::SeqCst);
        let req: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let prompt = req["prompt"].as_str().unwrap_or("");
        let text = replies
            .iter()
            .find(|(k, _)| prompt.contains(k.as_str()))
            .map(|(_, r)| r.clone())
            .unwrap_or_default();
        let payload = serde_json::json!({"text": text, "usage": {"prompt_tokens": 10, "completion_tokens": 5}}).to_string();
        let resp = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{payload}",
            payload.len()
        );
        if out.write_all(resp.as_bytes()).is_err() {
            return;
        }
    }
}
