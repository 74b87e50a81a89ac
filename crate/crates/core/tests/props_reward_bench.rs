use logiceval::bench::{accuracy, accuracy_by_depth, build_prompt, DatasetKind, EvalRecord, Label, Problem, PromptMode, DEFAULT_DEPTH_BINS};
use logiceval::proof::{Answer, StepKind};
use logiceval::reward::{compute_reward, stepwise_inputs, RewardInputs, RewardMode, RewardWeights};
use logiceval::steps::{ChainVerdict, JudgeSource, StepVerdict, Verdict};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn inputs() -> impl Strategy<Value = RewardInputs> {
    (any::<bool>(), unit(), unit(), unit(), prop::option::of(unit())).prop_map(|(acc, v, r, a, c)| RewardInputs {
        r_acc: f64::from(acc),
        r_valid: v,
        r_relevant: r,
        r_atomic: a,
        r_css: c,
    })
}

fn weights() -> impl Strategy<Value = RewardWeights> {
    (0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64).prop_map(|(w_v, w_r, w_a, w_c)| RewardWeights { w_v, w_r, w_a, w_c })
}

fn get(x: &RewardInputs, k: usize) -> f64 {
    [x.r_valid, x.r_relevant, x.r_atomic, x.r_css.unwrap_or(0.0)][k]
}

fn set(x: &mut RewardInputs, k: usize, v: f64) {
    match k {
        0 => x.r_valid = v,
        1 => x.r_relevant = v,
        2 => x.r_atomic = v,
        _ => x.r_css = Some(v),
    }
}

fn chain(vs: Vec<(bool, bool, bool)>) -> ChainVerdict {
    let steps = vs
        .into_iter()
        .map(|(v, r, a)| StepVerdict {
            label: "int1".into(),
            kind: StepKind::Derivation,
            v: Verdict::from_bool(v),
            r: Verdict::from_bool(r),
            a: Verdict::from_bool(a),
            source: JudgeSource::Symbolic,
            premises: vec![],
            min_rule_count: None,
            note: None,
        })
        .collect();
    ChainVerdict::from_steps("p".into(), steps, false)
}

fn problem(i: usize, depth: u32) -> Problem {
    Problem {
        id: format!("p{i}"),
        dataset: DatasetKind::Fld,
        facts: vec![format!("fact {i}")],
        facts_formula: None,
        hypothesis: "h".into(),
        hypothesis_formula: None,
        label: Label::T,
        depth: Some(depth),
        gold_proof: None,
    }
}

fn record(i: usize, correct: bool) -> EvalRecord {
    EvalRecord {
        problem_id: format!("p{i}"),
        raw_output: String::new(),
        predicted: correct.then_some(Answer::Proved),
        gold: Label::T,
        correct,
        latency_ms: 0,
        prompt_tokens: None,
        completion_tokens: None,
        error: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn raising_a_component_never_lowers_reward(x in inputs(), w in weights(), k in 0usize..4, bump in unit()) {
        let base = compute_reward(&x, &w).unwrap();
        let mut y = x;
        let cur = get(&x, k);
        set(&mut y, k, cur + (1.0 - cur) * bump);
        prop_assert!(compute_reward(&y, &w).unwrap() >= base - TOL);
        if x.r_acc == 0.0 {
            let mut z = x;
            z.r_acc = 1.0;
            prop_assert!(compute_reward(&z, &w).unwrap() >= base);
        }
    }

    #[test]
    fn reward_is_linear_in_each_component(x in inputs(), w in weights(), k in 0usize..4, alpha in unit()) {
        let mut zero = x;
        set(&mut zero, k, 0.0);
        let mut scaled = x;
        set(&mut scaled, k, alpha * get(&x, k));
        let f0 = compute_reward(&zero, &w).unwrap();
        let f1 = compute_reward(&x, &w).unwrap();
        let fa = compute_reward(&scaled, &w).unwrap();
        prop_assert!((fa - f0 - alpha * (f1 - f0)).abs() < 1e-9);
    }

    #[test]
    fn fractional_dominates_all_or_nothing(steps in prop::collection::vec(any::<(bool, bool, bool)>(), 0..10)) {
        let c = chain(steps);
        let (fv, fr, fa) = stepwise_inputs(&c, RewardMode::Fractional);
        let (av, ar, aa) = stepwise_inputs(&c, RewardMode::AllOrNothing);
        prop_assert!(fv >= av && fr >= ar && fa >= aa);
    }

    #[test]
    fn accuracy_is_the_mean_and_bins_conserve(rows in prop::collection::vec((any::<bool>(), 0u32..20), 1..300)) {
        let problems: Vec<Problem> = rows.iter().enumerate().map(|(i, &(_, d))| problem(i, d)).collect();
        let records: Vec<EvalRecord> = rows.iter().enumerate().map(|(i, &(c, _))| record(i, c)).collect();
        let correct = rows.iter().filter(|r| r.0).count();
        let acc = accuracy(&records).unwrap();
        let mean = rows.iter().map(|r| f64::from(r.0)).sum::<f64>() / rows.len() as f64;
        prop_assert!((acc - mean).abs() <= f64::EPSILON * mean.max(1.0));
        let bins = accuracy_by_depth(&records, &problems, &DEFAULT_DEPTH_BINS).unwrap();
        let total: f64 = bins.iter().map(|b| b.count as f64 * b.accuracy.unwrap_or(0.0)).sum();
        prop_assert!((total - correct as f64).abs() < 1e-9);
        prop_assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), rows.len());
    }

    #[test]
    fn prompts_are_byte_stable(i in 0usize..1000, d in 0u32..20, cot in any::<bool>()) {
        let mode = if cot { PromptMode::Cot } else { PromptMode::Direct };
        let p = problem(i, d);
        prop_assert_eq!(build_prompt(&p, mode, &[]).unwrap(), build_prompt(&p.clone(), mode, &[]).unwrap());
    }
}
