#include <stdio.h>
#include <string.h>
#include "logiceval.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed at line %d: %s (%s)\n", __LINE__, #cond, le_last_error_message()); return 1; } } while (0)

int main(void) {
    LeFormula *p1 = NULL, *p2 = NULL, *goal = NULL, *bad = NULL;
    CHECK(le_formula_parse("Ax.(A(x) -> B(x))", &p1) == LE_STATUS_OK);
    CHECK(le_formula_parse("A(a)", &p2) == LE_STATUS_OK);
    CHECK(le_formula_parse("B(a)", &goal) == LE_STATUS_OK);
    CHECK(le_formula_parse("A(a) &", &bad) == LE_STATUS_PARSE_ERROR);
    CHECK(bad == NULL);
    CHECK(strlen(le_last_error_message()) > 0);

    char *text = NULL;
    CHECK(le_formula_print(p1, &text) == LE_STATUS_OK);
    printf("printed: %s\n", text);
    le_string_free(text);

    const LeFormula *prem[2] = {p1, p2};
    LeEntailment verdict;
    int64_t min_rules = 0;
    CHECK(le_entails(prem, 2, goal, le_default_budget(), &verdict, &min_rules) == LE_STATUS_OK);
    CHECK(verdict == LE_ENTAILMENT_VALID);
    CHECK(min_rules == 1);
    CHECK(le_entails(prem, 1, goal, le_default_budget(), &verdict, &min_rules) == LE_STATUS_OK);
    CHECK(verdict == LE_ENTAILMENT_INVALID);
    CHECK(min_rules == -1);

    LeAnswer ans;
    CHECK(le_extract_answer("so __PROVED__ then __DISPROVED__", &ans) == LE_STATUS_OK);
    CHECK(ans == LE_ANSWER_DISPROVED);
    CHECK(le_extract_answer(NULL, &ans) == LE_STATUS_NULL_POINTER);

    LeChain *chain = NULL;
    size_t len = 0;
    CHECK(le_chain_parse("Step 1: From fact1, fact2, we derive:\nhypothesis: B(a)", LE_DIALECT_SYMBOLIC, &chain) == LE_STATUS_OK);
    CHECK(le_chain_len(chain, &len) == LE_STATUS_OK);
    CHECK(len == 1);
    CHECK(le_chain_to_json(chain, &text) == LE_STATUS_OK);
    CHECK(strstr(text, "fact2") != NULL);
    le_string_free(text);
    le_chain_free(chain);

    LeRewardInputs in = {1.0, 0.5, 1.0, 0.0, 0.0, false};
    LeRewardWeights w = {1.0, 1.0, 1.0, 0.0};
    double total = 0.0;
    CHECK(le_compute_reward(&in, &w, &total) == LE_STATUS_OK);
    CHECK(total == 2.5);

    bool pred[4] = {true, false, true, true};
    bool lab[4] = {true, false, false, true};
    double ba = 0.0;
    CHECK(le_balanced_accuracy(pred, lab, 4, &ba) == LE_STATUS_OK);
    CHECK(ba == 0.75);

    bool correct[5] = {false, true, true, true, true};
    size_t lens[2] = {3, 2};
    double css = 0.0;
    CHECK(le_css_score(correct, lens, 2, LE_CSS_READING_SUFFIX, &css) == LE_STATUS_OK);
    CHECK(css == 1.0);

    le_formula_free(p1);
    le_formula_free(p2);
    le_formula_free(goal);
    printf("logiceval %s ok\n", le_version());
    return 0;
}
