"""Write the hand-labeled KC-coverage fixture set.

Each case bundles a worked example, one KC target, and hand-assigned
ground-truth flags: does the target pattern truly appear in the step code
(in_code) and is it truly discussed in the prose (in_text)? The labels were
assigned by reading each case, not by running the heuristic; the heuristic
is allowed to disagree on at most 2 of the 20.
"""

import json
import pathlib

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"

MOD = ["VAR", "%", "NUM"]                                   # v % 2
LEQ = ["VAR", "<=", "VAR"]                                  # i <= n
COMPOUND = ["VAR", ">", "NUM", "&&", "VAR", "<", "NUM"]     # x > 0 && y < 10
INCR = ["VAR", "=", "VAR", "+", "NUM"]                      # c = c + 1


def example(overview, steps):
    return {
        "question": "Practice problem on array processing.",
        "overview": overview,
        "steps": [{"explanation": e, "code": c} for e, c in steps],
    }


def case(name, ex, label, desc, supporter, in_text, in_code):
    return {
        "name": name,
        "example": ex,
        "target": {"kc_id": 0, "label": label, "description": desc, "supporter_tokens": supporter},
        "hand": {"in_text": in_text, "in_code": in_code},
    }


BASE_STEPS = [
    ("Declare a counter before the loop.", "int count = 0;"),
    ("Walk the array with an index.", "for (int i = 0; i < n; i++) { int v = arr[i]; }"),
    ("Return the final count.", "return count;"),
]

MOD_STEP = ("Test evenness with the modulo operator to check parity.",
            "if (v % 2 == 0) { count = count + 1; }")
MOD_STEP_SILENT = ("Update the counter when the test passes.",
                   "if (v % 2 == 0) { count = count + 1; }")
LEQ_STEP = ("Use an inclusive bound so the loop also visits the last index.",
            "for (int j = 0; j <= n; j++) { total = total + arr[j]; }")
LEQ_STEP_SILENT = ("Add each element to the running total.",
                   "for (int j = 0; j <= n; j++) { total = total + arr[j]; }")
COMPOUND_STEP = ("Combine both range checks into one compound condition.",
                 "if (x > 0 && y < 10) { hits = hits + 1; }")
PLAIN_STEP = ("Copy the element into a temporary.", "int t = arr[i];")


def main():
    cases = [
        # 1-4: modulo target, all four text/code combinations
        case("mod_text_code",
             example("We count even values using a modulo parity check.",
                     BASE_STEPS[:2] + [MOD_STEP, BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, True, True),
        case("mod_code_only",
             example("We count qualifying values in one pass.",
                     BASE_STEPS[:2] + [MOD_STEP_SILENT, BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, False, True),
        case("mod_text_only",
             example("The overview promises a modulo parity check of each value.",
                     BASE_STEPS[:2] + [PLAIN_STEP, BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, True, False),
        case("mod_absent",
             example("We sum the array in a single loop.", BASE_STEPS),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, False, False),
        # 5-8: inclusive-bound target
        case("leq_text_code",
             example("The loop uses an inclusive upper bound to cover every slot.",
                     [BASE_STEPS[0], LEQ_STEP, BASE_STEPS[2]]),
             "Inclusive upper bound", "The loop condition uses <= so the bound index is processed.",
             LEQ, True, True),
        case("leq_code_only",
             example("We accumulate a running total over the array.",
                     [BASE_STEPS[0], LEQ_STEP_SILENT, BASE_STEPS[2]]),
             "Inclusive upper bound", "The loop condition uses <= so the bound index is processed.",
             LEQ, False, True),
        case("leq_text_only",
             example("Watch the inclusive bound carefully when indexing.",
                     BASE_STEPS),
             "Inclusive upper bound", "The loop condition uses <= so the bound index is processed.",
             LEQ, True, False),
        case("leq_absent",
             example("Straightforward counting loop.", BASE_STEPS),
             "Inclusive upper bound", "The loop condition uses <= so the bound index is processed.",
             LEQ, False, False),
        # 9-12: compound condition target
        case("compound_text_code",
             example("We filter with a compound range condition on both variables.",
                     [BASE_STEPS[0], BASE_STEPS[1], COMPOUND_STEP, BASE_STEPS[2]]),
             "Compound range condition", "Two relational tests joined by && select in-range values.",
             COMPOUND, True, True),
        case("compound_code_only",
             example("We tally the qualifying pairs.",
                     [BASE_STEPS[0], BASE_STEPS[1],
                      ("Count the pair when the test passes.", COMPOUND_STEP[1]),
                      BASE_STEPS[2]]),
             "Compound range condition", "Two relational tests joined by && select in-range values.",
             COMPOUND, False, True),
        case("compound_text_only",
             example("A compound range condition guards the update.",
                     BASE_STEPS),
             "Compound range condition", "Two relational tests joined by && select in-range values.",
             COMPOUND, True, False),
        case("compound_absent",
             example("Plain pass over the data.", BASE_STEPS),
             "Compound range condition", "Two relational tests joined by && select in-range values.",
             COMPOUND, False, False),
        # 13-16: counter-increment target
        case("incr_text_code",
             example("Counter accumulation drives the whole solution.",
                     BASE_STEPS[:2] + [MOD_STEP, BASE_STEPS[2]]),
             "Counter accumulation pattern", "A counter variable is incremented inside the loop body.",
             INCR, True, True),
        case("incr_code_only",
             example("One pass with an early test.",
                     BASE_STEPS[:2] + [MOD_STEP_SILENT, BASE_STEPS[2]]),
             "Counter accumulation pattern", "A counter variable is incremented inside the loop body.",
             INCR, False, True),
        case("incr_text_only",
             example("Counter accumulation is explained but the code uses ++ instead.",
                     [BASE_STEPS[0], BASE_STEPS[1],
                      ("Bump the counter with the increment operator.",
                       "if (v % 2 == 0) { count++; }"),
                      BASE_STEPS[2]]),
             "Counter accumulation pattern", "A counter variable is incremented inside the loop body.",
             INCR, True, False),
        case("incr_absent",
             example("We only read values, never counting.",
                     [BASE_STEPS[0], BASE_STEPS[1],
                      ("Remember the largest element.", "if (v > best) { best = v; }"),
                      BASE_STEPS[2]]),
             "Counter accumulation pattern", "A counter variable is incremented inside the loop body.",
             INCR, False, False),
        # 17: unparseable step code -> in_code must be false
        case("unparseable_code",
             example("A modulo parity check appears in prose only.",
                     [BASE_STEPS[0],
                      ("This step's code is broken.", "if ((( {{{ not java"),
                      BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, True, False),
        # 18: paraphrased prose (no label words) but pattern in code
        case("paraphrase_prose",
             example("We keep only the values divisible by two.",
                     BASE_STEPS[:2] + [MOD_STEP_SILENT, BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, False, True),
        # 19: label words scattered across different steps
        case("split_mention",
             example("We process the array carefully.",
                     [("The parity of each value matters here.", "int v = arr[0];"),
                      ("Apply the modulo operator to the value.", "int r = v % 2;"),
                      BASE_STEPS[2]]),
             "Modulo parity check", "Uses % to test whether a value is even.",
             MOD, True, True),
        # 20: similar-but-different code (strict < instead of <=)
        case("near_miss_code",
             example("The loop stops strictly before the bound.", BASE_STEPS),
             "Inclusive upper bound", "The loop condition uses <= so the bound index is processed.",
             LEQ, False, False),
    ]
    assert len(cases) == 20
    path = FIXTURES / "coverage_cases.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cases, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(cases)} cases to {path}")


if __name__ == "__main__":
    main()
