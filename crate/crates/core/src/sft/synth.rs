//! Synthetic gold problems with known proofs, for corpus construction and
//! fixtures. Depth is the number of proof steps that lead to the hypothesis;
//! depth 0 restates a given fact.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nl, Bucket, CorpusManifest, Glossary, GoldProblem};
use crate::bench::{DatasetKind, Label, Problem};
use crate::logic::formula::{and, atom, forall, implies, not, or, var_atom};
use crate::logic::rules::complement;
use crate::logic::{print_formula, Formula};
use crate::probing::seeded_hash;
use crate::proof::{parse_proof, Dialect, StepKind};

const ADJECTIVES: [&str; 64] = [
    "is a raised", "is a collotype", "is big", "is red", "is calm", "is a corsair", "is brittle", "is a wren",
    "is humid", "is a fandango", "is sour", "is a tumpline", "is hollow", "is a sabre", "is noisy", "is a kelpie",
    "is pale", "is a lorikeet", "is shiny", "is a dormer", "is bitter", "is a grommet", "is rough", "is a pennant",
    "is gentle", "is a quokka", "is narrow", "is a valise", "is silent", "is a mandolin", "is dusty", "is a parapet",
    "is ancient", "is a tinsel", "is fragile", "is a carafe", "is woolly", "is a bobbin", "is frozen", "is a gazebo",
    "is lucid", "is a ferret", "is stubborn", "is a lantern", "is crooked", "is a muffin", "is vivid", "is a sparrow",
    "is nimble", "is a pumice", "is rusty", "is a thimble", "is jagged", "is a wombat", "is fuzzy", "is a zither",
    "is mellow", "is a cobbler", "is sturdy", "is a harpoon", "is glossy", "is a puffin", "is tepid", "is a trellis",
];

const ENTITIES: [&str; 24] = [
    "this tablefork", "this corsair", "the wren", "the kelpie", "this sabre", "the lorikeet", "that dormer",
    "the grommet", "this pennant", "the quokka", "that valise", "the mandolin", "this parapet", "the carafe",
    "that bobbin", "the gazebo", "this ferret", "the lantern", "that sparrow", "the thimble", "this wombat",
    "the zither", "that cobbler", "the harpoon",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthSpec {
    pub dataset: DatasetKind,
    pub depth: u32,
    pub label: Label,
    pub distractors: usize,
    /// Insert one derivation nothing depends on.
    pub redundant_step: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ref {
    Fact(usize),
    Step(usize),
}

struct GStep {
    kind: StepKind,
    premises: Vec<Ref>,
    formula: Formula,
    label: Option<String>,
}

/// A literal `pred(t)` or `¬pred(t)`.
#[derive(Clone, Debug)]
struct Lit {
    pred: String,
    positive: bool,
}

impl Lit {
    fn on_var(&self) -> Formula {
        let a = var_atom(&self.pred, "x");
        if self.positive {
            a
        } else {
            not(a)
        }
    }

    fn on(&self, c: &str) -> Formula {
        let a = atom(&self.pred, &[c]);
        if self.positive {
            a
        } else {
            not(a)
        }
    }
}

struct Builder {
    facts: Vec<Formula>,
    steps: Vec<GStep>,
    glossary: Glossary,
    words: Vec<&'static str>,
    next_pred: usize,
    ints: usize,
    assumps: usize,
}

fn letter(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.insert(0, (b'A' + (i % 26) as u8) as char);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s
}

impl Builder {
    fn new(rng: &mut ChaCha8Rng) -> Builder {
        let mut words = ADJECTIVES.to_vec();
        words.shuffle(rng);
        Builder {
            facts: Vec::new(),
            steps: Vec::new(),
            glossary: Glossary::default(),
            words,
            next_pred: 0,
            ints: 0,
            assumps: 0,
        }
    }

    fn pred(&mut self) -> String {
        let p = letter(self.next_pred);
        let w = self.words[self.next_pred % self.words.len()];
        self.next_pred += 1;
        self.glossary.predicates.insert(p.clone(), w.to_string());
        p
    }

    fn fact(&mut self, f: Formula) -> Ref {
        self.facts.push(f);
        Ref::Fact(self.facts.len() - 1)
    }

    fn step(&mut self, kind: StepKind, premises: Vec<Ref>, formula: Formula) -> Ref {
        let label = match kind {
            StepKind::Assumption => {
                self.assumps += 1;
                Some(format!("assump{}", self.assumps))
            }
            StepKind::Contradiction => None,
            _ => {
                self.ints += 1;
                Some(format!("int{}", self.ints))
            }
        };
        self.steps.push(GStep {
            kind,
            premises,
            formula,
            label,
        });
        Ref::Step(self.steps.len() - 1)
    }

    /// Extends the chain from `cur` by one segment of at most `budget` steps.
    /// Returns the new current literal, its reference and the steps used.
    fn segment(&mut self, cur: &Lit, at: Ref, budget: u32, rng: &mut ChaCha8Rng) -> (Lit, Ref, u32) {
        let mut options = vec![0u8, 1, 5];
        if budget >= 2 {
            options.extend([2, 3]);
        }
        if budget >= 4 {
            options.push(6);
        }
        if !cur.positive {
            options.push(4);
        }
        let a = "a";
        match *options.choose(rng).expect("nonempty") {
            0 => {
                let q = Lit { pred: self.pred(), positive: true };
                let rule = self.fact(forall("x", implies(cur.on_var(), q.on_var())));
                let r = self.step(StepKind::Derivation, vec![at, rule], q.on(a));
                (q, r, 1)
            }
            1 => {
                let q = Lit { pred: self.pred(), positive: true };
                let rule = self.fact(implies(cur.on(a), q.on(a)));
                let r = self.step(StepKind::Derivation, vec![at, rule], q.on(a));
                (q, r, 1)
            }
            2 => {
                let side = Lit { pred: self.pred(), positive: true };
                let q = Lit { pred: self.pred(), positive: true };
                let side_fact = self.fact(side.on(a));
                let rule = self.fact(forall("x", implies(and(cur.on_var(), side.on_var()), q.on_var())));
                let conj = self.step(StepKind::Derivation, vec![at, side_fact], and(cur.on(a), side.on(a)));
                let r = self.step(StepKind::Derivation, vec![conj, rule], q.on(a));
                (q, r, 2)
            }
            3 => {
                let q = Lit { pred: self.pred(), positive: true };
                let s = Lit { pred: self.pred(), positive: true };
                let rule = self.fact(forall("x", implies(cur.on_var(), and(q.on_var(), s.on_var()))));
                let conj = self.step(StepKind::Derivation, vec![at, rule], and(q.on(a), s.on(a)));
                let r = self.step(StepKind::Derivation, vec![conj], q.on(a));
                (q, r, 2)
            }
            4 => {
                // cur is ¬P(a); from ∀x (Q(x) → P(x)) conclude ¬Q(a).
                let q = Lit { pred: self.pred(), positive: false };
                let pos = Lit { pred: cur.pred.clone(), positive: true };
                let rule = self.fact(forall("x", implies(var_atom(&q.pred, "x"), pos.on_var())));
                let r = self.step(StepKind::Derivation, vec![at, rule], q.on(a));
                (q, r, 1)
            }
            5 => {
                let q = Lit { pred: self.pred(), positive: true };
                let rule = self.fact(or(complement(&cur.on(a)), q.on(a)));
                let r = self.step(StepKind::Derivation, vec![at, rule], q.on(a));
                (q, r, 1)
            }
            _ => {
                // Assume Q(a), reach the complement of cur, discharge to ¬Q(a).
                let q = self.pred();
                let rule = self.fact(forall("x", implies(var_atom(&q, "x"), complement(&cur.on_var()))));
                let asm = self.step(StepKind::Assumption, vec![], atom(&q, &[a]));
                let clash = self.step(StepKind::Derivation, vec![asm, rule], complement(&cur.on(a)));
                let bot = self.step(StepKind::Contradiction, vec![clash, at], Formula::Falsum);
                let r = self.step(StepKind::ReductioDischarge, vec![asm, bot], not(atom(&q, &[a])));
                (Lit { pred: q, positive: false }, r, 4)
            }
        }
    }
}

fn render(b: &Builder, order: &[usize]) -> String {
    // order[i] = new position of fact i
    let label_of = |r: &Ref, steps: &[GStep]| -> String {
        match r {
            Ref::Fact(i) => format!("fact{}", order[*i] + 1),
            Ref::Step(j) => steps[*j].label.clone().unwrap_or_else(|| format!("step{}", j + 1)),
        }
    };
    let mut lines = Vec::new();
    for (k, s) in b.steps.iter().enumerate() {
        let refs = s.premises.iter().map(|r| label_of(r, &b.steps)).collect::<Vec<_>>().join(", ");
        let head = match s.kind {
            StepKind::Assumption => "Assume for contradiction:".to_string(),
            StepKind::Contradiction => format!("Contradiction from {refs}:"),
            StepKind::ReductioDischarge => format!("By reductio ad absurdum from {refs}:"),
            _ => format!("From {refs}, we derive:"),
        };
        let body = match &s.label {
            Some(l) => format!("{l}: {}", print_formula(&s.formula)),
            None => print_formula(&s.formula),
        };
        lines.push(format!("Step {}: {head}\n{body}", k + 1));
    }
    lines.join("\n")
}

/// Builds one gold problem. The same `(id, spec, seed)` always yields the
/// same problem.
pub fn synth_problem(id: &str, spec: &SynthSpec, seed: u64) -> GoldProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seeded_hash(id, seed));
    let mut b = Builder::new(&mut rng);
    let mut ents = ENTITIES.to_vec();
    ents.shuffle(&mut rng);
    b.glossary.constants.insert("a".into(), ents[0].into());
    b.glossary.constants.insert("b".into(), ents[1].into());

    let start = Lit { pred: b.pred(), positive: rng.random_bool(0.8) };
    let mut at = b.fact(start.on("a"));
    let mut cur = start;
    let mut boundaries = vec![0usize];

    let target_steps = match spec.label {
        Label::Unknown => spec.depth.max(1),
        _ => spec.depth,
    };
    if target_steps == 0 {
        at = b.step(StepKind::Derivation, vec![at], cur.on("a"));
    }
    let mut used = 0;
    while used < target_steps {
        let seg_budget = if spec.dataset == DatasetKind::ProntoQa { 1 } else { target_steps - used };
        let (next, r, n) = if spec.dataset == DatasetKind::ProntoQa {
            let q = Lit { pred: b.pred(), positive: rng.random_bool(0.7) };
            let rule = b.fact(forall("x", implies(cur.on_var(), q.on_var())));
            let r = b.step(StepKind::Derivation, vec![at, rule], q.on("a"));
            (q, r, 1)
        } else {
            b.segment(&cur, at, seg_budget, &mut rng)
        };
        cur = next;
        at = r;
        used += n;
        boundaries.push(b.steps.len());
    }

    // Distractor facts over fresh predicates.
    let mut pair = None;
    for k in 0..spec.distractors {
        let p = b.pred();
        let c = if k % 2 == 0 { "b" } else { "a" };
        if k == 0 {
            let q = b.pred();
            let src = b.fact(atom(&p, &["b"]));
            let rule = b.fact(forall("x", implies(var_atom(&p, "x"), var_atom(&q, "x"))));
            pair = Some((src, rule, q));
        } else if rng.random_bool(0.5) {
            b.fact(atom(&p, &[c]));
        } else {
            let q = b.pred();
            b.fact(forall("x", implies(var_atom(&p, "x"), not(var_atom(&q, "x")))));
        }
    }
    if spec.redundant_step && !b.steps.is_empty() {
        if let Some((src, rule, q)) = pair {
            // Insert at a segment boundary before the last step.
            let last = b.steps.len() - 1;
            let spots: Vec<usize> = boundaries.into_iter().filter(|&p| p <= last).collect();
            let pos = *spots.choose(&mut rng).expect("0 is a boundary");
            let step = GStep {
                kind: StepKind::Derivation,
                premises: vec![src, rule],
                formula: atom(&q, &["b"]),
                label: None,
            };
            b.steps.insert(pos, step);
            for s in b.steps.iter_mut() {
                for r in s.premises.iter_mut() {
                    if let Ref::Step(j) = r {
                        if *j >= pos {
                            *j += 1;
                        }
                    }
                }
            }
            // The inserted step's own premises are facts, so the shift above
            // left them alone.
            let mut n = 0;
            for s in b.steps.iter_mut() {
                if !matches!(s.kind, StepKind::Assumption | StepKind::Contradiction) {
                    n += 1;
                    s.label = Some(format!("int{n}"));
                }
            }
        }
    }

    let final_formula = cur.on("a");
    let hypothesis = match spec.label {
        Label::T => final_formula,
        Label::F => complement(&final_formula),
        Label::Unknown => {
            let z = b.pred();
            atom(&z, &["a"])
        }
    };
    if spec.label != Label::Unknown {
        let last = b.steps.last_mut().expect("at least one step");
        last.label = Some(if spec.label == Label::T { "hypothesis" } else { "¬hypothesis" }.into());
    }

    let mut order: Vec<usize> = (0..b.facts.len()).collect();
    order.shuffle(&mut rng);
    let mut facts = vec![Formula::Falsum; b.facts.len()];
    for (i, f) in b.facts.iter().enumerate() {
        facts[order[i]] = f.clone();
    }
    let mut chain = parse_proof(&render(&b, &order), Dialect::Symbolic);
    chain.problem_id = id.to_string();
    chain.final_label = Some(spec.label.answer());

    let g = &b.glossary;
    let say = |f: &Formula| nl::sentence(&g.render(f).expect("glossary covers generated symbols"));
    GoldProblem {
        problem: Problem {
            id: id.to_string(),
            dataset: spec.dataset,
            facts: facts.iter().map(say).collect(),
            facts_formula: Some(facts.iter().map(print_formula).collect()),
            hypothesis: say(&hypothesis),
            hypothesis_formula: Some(print_formula(&hypothesis)),
            label: spec.label,
            depth: Some(spec.depth),
            gold_proof: Some(chain),
        },
        glossary: b.glossary,
    }
}

/// A pool that exactly covers `manifest`, plus `extra` problems per bucket.
/// Labels alternate T/F within depth buckets.
pub fn synth_pool(manifest: &CorpusManifest, extra: usize, seed: u64) -> Vec<GoldProblem> {
    let mut out = Vec::with_capacity(manifest.total());
    let tag = manifest.dataset.name();
    for &(bucket, need) in &manifest.buckets {
        for k in 0..need + extra {
            let mut rng = ChaCha8Rng::seed_from_u64(seeded_hash(&format!("{tag}/{bucket}/{k}"), seed));
            let (depth, label) = match bucket {
                Bucket::Depth(d) => (d, if k % 2 == 0 { Label::T } else { Label::F }),
                Bucket::Unknown => (rng.random_range(1..=8), Label::Unknown),
            };
            let spec = SynthSpec {
                dataset: manifest.dataset,
                depth,
                label,
                distractors: rng.random_range(3..=6),
                redundant_step: depth > 0 && rng.random_bool(0.3),
            };
            let id = match bucket {
                Bucket::Depth(d) => format!("{tag}-d{d}-{k:05}"),
                Bucket::Unknown => format!("{tag}-u-{k:05}"),
            };
            out.push(synth_problem(&id, &spec, seed));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steps::{evaluate_chain, CheckerConfig, FactTable};

    fn verdict(g: &GoldProblem) -> crate::steps::ChainVerdict {
        let facts = FactTable::from_formulas(&g.fact_formulas().unwrap());
        evaluate_chain(g.chain().unwrap(), &facts, &CheckerConfig::default(), None)
    }

    #[test]
    fn letters() {
        assert_eq!(letter(0), "A");
        assert_eq!(letter(25), "Z");
        assert_eq!(letter(26), "AA");
        assert_eq!(letter(27), "AB");
    }

    #[test]
    fn generated_golds_are_valid_and_atomic() {
        for depth in 0..=15 {
            for (k, label) in [Label::T, Label::F, Label::Unknown].into_iter().enumerate() {
                let spec = SynthSpec {
                    dataset: DatasetKind::Fld,
                    depth,
                    label,
                    distractors: 4,
                    redundant_step: k == 1 && depth > 0,
                };
                let g = synth_problem(&format!("t{depth}-{k}"), &spec, 11);
                let c = g.chain().unwrap();
                assert!(!c.malformed, "{:?}", c.errors);
                g.check_glossary().unwrap();
                let v = verdict(&g);
                assert!(v.all_valid && v.all_atomic, "{}\n{:#?}", crate::proof::render_chain(c), v.steps);
            }
        }
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            dataset: DatasetKind::ProntoQa,
            depth: 3,
            label: Label::F,
            distractors: 3,
            redundant_step: false,
        };
        assert_eq!(synth_problem("x", &spec, 5), synth_problem("x", &spec, 5));
        assert_eq!(synth_problem("x", &spec, 5).chain().unwrap().len(), 3);
    }
}
