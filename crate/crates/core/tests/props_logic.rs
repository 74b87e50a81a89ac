mod common;

use std::collections::BTreeSet;

use logiceval::logic::{
    alpha_eq, entails, normalize, parse_batch, parse_formula, print_formula, semantic_entails_bruteforce, Budget,
    EntailmentStatus, Formula, OracleOutcome, RuleApplication, RuleId,
};
use logiceval::logic::rules::verify_application;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_formula(&mut rng, 5, &mut Vec::new())
}

fn instance(seed: u64) -> (Vec<Formula>, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ps, c) = common::random_monadic_instance(&mut rng);
    (parse_batch(&ps).unwrap(), parse_formula(&c).unwrap())
}

/// Replays a derivation: each step must be a genuine rule instance whose
/// premises are available at that point. A trailing reductio makes its
/// assumption available to the steps before it.
fn replays(premises: &[Formula], derivation: &[RuleApplication], conclusion: &Formula) -> Result<(), String> {
    let mut known: Vec<Formula> = premises.to_vec();
    if let Some(last) = derivation.last().filter(|a| a.rule == RuleId::Reductio) {
        known.push(last.premises[0].clone());
    }
    let mut consts = BTreeSet::new();
    for f in premises.iter().chain(std::iter::once(conclusion)) {
        consts.extend(f.constants());
    }
    for (i, app) in derivation.iter().enumerate() {
        if !verify_application(app, &consts) {
            return Err(format!("step {i} is not an instance of {}", app.rule));
        }
        for p in &app.premises {
            if !known.contains(p) {
                return Err(format!("step {i} uses unavailable {}", print_formula(p)));
            }
        }
        known.push(app.conclusion.clone());
    }
    match derivation.last() {
        Some(last) if &last.conclusion == conclusion => Ok(()),
        Some(_) => Err("derivation ends elsewhere".into()),
        None if premises.contains(conclusion) => Ok(()),
        None => Err("empty derivation of a non-premise".into()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        let back = parse_formula(&print_formula(&f)).unwrap();
        prop_assert!(alpha_eq(&back, &f));
        prop_assert_eq!(normalize(&back), normalize(&f));
        let n = normalize(&f);
        prop_assert_eq!(parse_formula(&print_formula(&n)).unwrap(), n);
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let n = normalize(&formula(seed));
        prop_assert_eq!(normalize(&n), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn derivations_are_sound(seed in any::<u64>()) {
        let (premises, conclusion) = instance(seed);
        let v = entails(&premises, &conclusion, Budget::default()).unwrap();
        if let Some(d) = v.derivation() {
            prop_assert_eq!(v.status, EntailmentStatus::Valid);
            prop_assert_eq!(v.min_rule_count, Some(d.len()));
            if let Err(e) = replays(&premises, d, &conclusion) {
                return Err(TestCaseError::fail(e));
            }
            let oracle = semantic_entails_bruteforce(&premises, &conclusion, 3).unwrap();
            prop_assert!(!matches!(oracle, OracleOutcome::Countermodel(_)));
        }
    }

    #[test]
    fn definite_verdicts_agree_with_oracle(seed in any::<u64>()) {
        let (premises, conclusion) = instance(seed);
        let v = entails(&premises, &conclusion, Budget::default()).unwrap();
        let oracle = semantic_entails_bruteforce(&premises, &conclusion, 3).unwrap();
        match (v.status, oracle) {
            (EntailmentStatus::Valid, OracleOutcome::Countermodel(_)) => prop_assert!(false, "valid but countermodel"),
            (EntailmentStatus::Invalid, OracleOutcome::Entailed) => prop_assert!(false, "invalid but entailed"),
            _ => {}
        }
    }

    #[test]
    fn extra_premises_never_lengthen_derivations(seed in any::<u64>(), extra_seed in any::<u64>()) {
        let (premises, conclusion) = instance(seed);
        let (more, _) = instance(extra_seed);
        let base = entails(&premises, &conclusion, Budget::default()).unwrap();
        let Some(n) = base.min_rule_count else { return Ok(()) };
        let mut all = premises.clone();
        all.extend(more);
        let wider = entails(&all, &conclusion, Budget::default()).unwrap();
        if !wider.budget_exhausted {
            prop_assert!(wider.min_rule_count.is_some_and(|m| m <= n), "{:?} > {n}", wider.min_rule_count);
        }
    }
}
