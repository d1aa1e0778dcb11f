"""Scripted biography fixture: one long-form generation that decomposes into a
known 25-claim list, with two claim-check methods fully scripted."""

import json

ANDREW_SHUE_CLAIMS = [
    "Andrew Shue is an American actor.",
    "Andrew Shue is a producer.",
    "Andrew Shue is a former professional soccer player.",
    "Andrew Shue was born on January 20, 1967.",
    "Andrew Shue was born in South Orange, New Jersey, USA.",
    "Andrew Shue began his career as a professional soccer player.",
    "Andrew Shue played for the United States national soccer team.",
    "Andrew Shue played for the New York/New Jersey MetroStars in Major League Soccer.",
    "Andrew Shue suffered an injury that forced him to retire from professional soccer in 1994.",
    "Andrew Shue turned to acting after his soccer career.",
    "Andrew Shue began appearing in various television shows.",
    "Andrew Shue began appearing in films.",
    'Andrew Shue played the role of Andrew Clark in "The Breakfast Club" in 1985.',
    'Andrew Shue starred in "Mallrats" in 1995.',
    'Andrew Shue starred alongside Jason Lee in "Mallrats".',
    'Andrew Shue starred alongside Jeremy London in "Mallrats".',
    'From 1992 to 1996, Andrew Shue played the role of C.J. Lane in "The Adventures of Pete & Pete".',
    'From 1994 to 1999, Andrew Shue had a recurring role as Eddie Stevens in "Sister, Sister".',
    "Andrew Shue has worked as a producer.",
    "Andrew Shue has been involved in several business ventures.",
    "Andrew Shue has been involved in the development of the social networking site MySpace.",
    "Andrew Shue is married to Amy Robach.",
    "Amy Robach is a journalist.",
    "Amy Robach is a news anchor.",
    "Andrew Shue and Amy Robach have two daughters together.",
]

QUESTION = "Tell me a bio of Andrew Shue."

GENERATION = (
    "Andrew Shue is an American actor, producer, and former professional "
    "soccer player, born on January 20, 1967, in South Orange, New Jersey."
)


def claim_labels():
    """Even-indexed claims are labeled correct."""
    return {claim: 1 if i % 2 == 0 else 0 for i, claim in enumerate(ANDREW_SHUE_CLAIMS)}


def bio_rules():
    """Mock rules for: generation, decomposition, and both claim-check methods.

    AnswerClaimEntailment (1 question x 1 answer) answers with the claim text
    itself on correct claims (lexical ENTAIL -> 1.0) and with unrelated words
    on wrong claims (-> 0.0). QuestionAnswerGeneration wraps confidence; the
    re-answer carries a logprob that falls with the claim index, with the two
    label groups interleaved in score order.
    """
    labels = claim_labels()
    rules = []

    # specific prompts first: decomposition, probe questions, QA generation
    rules.append(
        {
            "kind": "chat",
            "match": {"user_contains": "Break the following text"},
            "response": {"text": json.dumps(ANDREW_SHUE_CLAIMS)},
        }
    )
    for i, claim in enumerate(ANDREW_SHUE_CLAIMS):
        probes = [f"Probe question {i} variant {v}?" for v in range(3)]
        rules.append(
            {
                "kind": "chat",
                "match": {"user_contains": ["would confirm the claim", claim]},
                "response": {"text": json.dumps(probes)},
            }
        )
        for probe in probes:
            for j in range(2):
                rules.append(
                    {
                        "kind": "sample",
                        "match": {"user_equals": probe, "sample_index": j},
                        "response": {
                            "text": claim if labels[claim] else "entirely unrelated words"
                        },
                    }
                )
        qa_question = f"Generated question {i}?"
        rules.append(
            {
                "kind": "chat",
                "match": {"user_contains": ["whose correct answer is exactly", claim]},
                "response": {"text": qa_question},
            }
        )
        rules.append(
            {
                "kind": "chat",
                "match": {"user_equals": qa_question},
                "response": {"tokens": [[claim, -0.05 * (i + 1)]]},
            }
        )
    # the bare biography question comes last: it matches broadly
    rules.append(
        {
            "kind": "chat",
            "match": {"user_contains": "Tell me a bio of Andrew Shue."},
            "response": {"text": GENERATION},
        }
    )
    return rules


def expected_scores():
    """(ace_score, qa_confidence_score, label) per claim, in claim order."""
    labels = claim_labels()
    out = []
    for i, claim in enumerate(ANDREW_SHUE_CLAIMS):
        label = labels[claim]
        out.append((1.0 if label else 0.0, -0.05 * (i + 1), label))
    return out
