#pragma once

// Default audit prompt templates. The same text ships as editable files under
// prompts/ (one file per template); load_prompts() overrides these defaults
// from such a directory. Placeholders: {question} {chunk} {statements}
// {ledger} {gaps}.
//
// The judge must answer with a single JSON object per the schema stated in
// each template; the schema is this project's contract, chosen because the
// upstream judge protocol leaves the reply format open.

#include <string_view>

namespace confshape::monitor::prompts {

inline constexpr std::string_view kMcqExtract =
    R"PROMPT(You are a Statement Extractor for question-answering reasoning tasks.

Your ONLY job is to decompose a Chain-of-Thought (CoT) chunk into ATOMIC statements. Do NOT evaluate correctness or flag any errors.

Statement Types:
- fact: Directly restates or paraphrases information from the question context or passage.
- inference: A conclusion derived from question context, passage facts, or prior statements.
- rule: An explicit logical rule or principle applied during reasoning.
- meta: Structural or organizational statements (e.g., "Let me consider option A").

Rules:
Each statement must be atomic - a single claim. Compound sentences must be decomposed:

WRONG: "Option A is correct because the passage states that X leads to Y."

CORRECT: (1) fact: "The passage states that X leads to Y." (2) inference: "Option A is correct [because X leads to Y]."

The extractor must NOT assess correctness - only extract and classify.

Reply with ONLY a JSON object:
{"statements": [{"kind": "fact|inference|rule|meta", "text": "..."}]}

Question:
{question}

CoT chunk:
{chunk}
)PROMPT";

inline constexpr std::string_view kMcqVerify =
    R"PROMPT(You are a Statement Verifier for question-answering reasoning tasks. Verify each statement against the original question context and the accumulated ledger of prior statements.

Verification by Type:
- fact: Check passage fidelity - does this fact match the question context? Domain knowledge not mentioned in the passage is marked NOT_APPLICABLE, not INACCURATE.
- inference: Check both passage fidelity and internal coherence - does the inference follow from identified prior statements? Must have at least one supporting statement.
- rule/meta: No verification needed; use default values.

Reasoning Flaw Categories (5 types):
1. MISREADING (critical): CoT claims X, but passage says Y. Must quote both.
2. IGNORED_EVIDENCE (major/critical): CoT ignores strong evidence pointing to a different answer.
3. WRONG_CONCLUSION (critical): Conclusion does not follow from evidence presented.
4. UNSUPPORTED_CONCLUSION (major): Conclusion drawn with NO relevant evidence whatsoever.
5. INTERNAL_CONTRADICTION (critical/major): Statement contradicts a prior statement in the CoT.

Deductive Validity Check: For every inference, verify the conclusion follows from premises. Watch for: non-sequiturs, affirming the consequent, false dichotomies, hasty generalizations, equivocation.

Contradiction Check: For EVERY statement, compare against ALL prior statements. Look for direct negation, incompatible claims, or mutually exclusive conclusions. Complementary claims ("X and Y both contribute") are NOT contradictions.

Domain Knowledge: Using known formulas, constants, or standard procedures is expected. Only flag if factually WRONG or contradicts the passage.

Calibration: Every gap must cite SPECIFIC text from the question context. Be conservative - only flag problems that clearly hurt reasoning quality.

Reply with ONLY a JSON object:
{"gaps": [{"category": "...", "severity": "critical|major|minor", "statement_ids": ["..."], "evidence": ["..."]}]}

Question:
{question}

New statements:
{statements}

Ledger of prior statements:
{ledger}
)PROMPT";

inline constexpr std::string_view kCountdownExtract =
    R"PROMPT(You are a Statement Extractor for countdown arithmetic reasoning tasks. Decompose each CoT chunk into ATOMIC statements.

Statement Types:
- calculation: Arithmetic claim with operands and result (e.g., "23 + 25 = 48"). Must extract expression and claimed_result.
- inference: Reasoning/deduction step (e.g., "So I need to get 36 from these numbers").
- verification: Re-checking prior work (e.g., "Let me check: 48 - 10 = 38").
- backtrack: Abandoning a path (e.g., "That doesn't work, let me try another approach").
- conclusion: Final answer with complete expression. Must extract final_expression.
- meta: Strategy/planning with no logical content.

Compound Decomposition: "I add 23 and 25 to get 48, then subtract 10 to get 38" -> (1) calculation: "23 + 25 = 48" (2) calculation: "48 - 10 = 38"

Reply with ONLY a JSON object:
{"statements": [{"kind": "calculation|inference|verification|backtrack|conclusion|meta", "text": "...", "expression": "...", "claimed_result": "...", "final_expression": "..."}]}
Omit expression/claimed_result/final_expression when not applicable.

Question:
{question}

CoT chunk:
{chunk}
)PROMPT";

inline constexpr std::string_view kCountdownVerify =
    R"PROMPT(You are a Statement Verifier for countdown arithmetic reasoning tasks.

Verification by Type:
- calculation: (a) Does claimed result match actual computation? (b) Are operands from the given set or prior intermediate results? (c) Has any number been used more than allowed?
- backtrack: Check if the abandoned path was actually VALID. If continuing could reach the target, flag ABANDONED_CORRECT_PATH.
- conclusion: (a) Uses all given numbers exactly once? (b) Evaluates to target? (c) Consistent with calculation chain?

Reasoning Flaw Categories (6 types):
1. ARITHMETIC_ERROR (critical): Calculation is numerically wrong. State expression, claimed result, and actual result.
2. INTERNAL_CONTRADICTION (critical/major): CoT claims X then NOT-X (e.g., "48 - 10 = 38" then "48 - 10 = 37").
3. WRONG_CONCLUSION (critical): Final conclusion doesn't follow from the calculation steps.
4. UNSUPPORTED_CLAIM (major): Claims a result without showing work or basis.
5. INVALID_NUMBERS (critical): Uses numbers not in the given set or reuses consumed numbers.
6. ABANDONED_CORRECT_PATH (major): Abandons a valid approach claiming it doesn't work.

Reply with ONLY a JSON object:
{"gaps": [{"category": "...", "severity": "critical|major|minor", "statement_ids": ["..."], "evidence": ["..."]}]}

Question:
{question}

New statements:
{statements}

Ledger of prior statements:
{ledger}
)PROMPT";

inline constexpr std::string_view kCountdownFinalize =
    R"PROMPT(You are a Logical Reasoning Auditor performing the FINAL audit of a countdown arithmetic CoT.

Tasks:
1. Re-evaluate each chunk-level gap: KEEP genuine flaws, DISMISS false positives (e.g., later statements correct the error).
2. Global checks:
   - Trace validity: Does the final expression trace back through valid calculation steps?
   - Number accounting: Each given number used exactly once across the entire chain?
   - Abandoned paths: Were any valid approaches incorrectly abandoned?
   - Conclusion consistency: Does verbal conclusion match the calculation chain?
3. Assign severity to every gap in the final unresolved list.

If reasoning is fundamentally sound, report few or zero unresolved gaps. Do not inflate the shortcut count.

Reply with ONLY a JSON object:
{"resolutions": [{"gap_id": "...", "action": "KEEP|DISMISS", "reason": "..."}], "new_gaps": [{"category": "...", "severity": "critical|major|minor", "statement_ids": ["..."], "evidence": ["..."]}]}

Question:
{question}

Statements:
{statements}

Candidate gaps:
{gaps}
)PROMPT";

inline constexpr std::string_view kRepairReminder =
    "\n\nYour previous reply was not valid JSON. Reply again with ONLY a "
    "single JSON object matching the requested schema, with no surrounding "
    "text.";

}  // namespace confshape::monitor::prompts
