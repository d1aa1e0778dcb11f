"""Methods that interrogate extra model calls: question paraphrasing, an
examiner dialogue, and a reviewer panel."""

from __future__ import annotations

from ..backends.base import ModelSpec
from ..backends.entailment import EntailmentProvider, LexicalEntailment
from ..errors import MethodFailure
from ..parsing import parse_string_array
from ..prompts import render
from ..textnorm import tokens as norm_tokens
from ..types import ChatMessage, TruthScore, last_user_content, replace_last_user
from .base import TruthMethod

_ARRAY_RETRY = "Output only the JSON array of strings, with no other text."


class SelfDetection(TruthMethod):
    """Re-asks the question in paraphrased forms and measures answer agreement."""

    method_id = "self_detection"

    def __init__(
        self,
        number_of_questions: int = 5,
        entailment: EntailmentProvider | None = None,
    ):
        super().__init__()
        if number_of_questions < 1:
            raise ValueError("number_of_questions must be >= 1")
        self.number_of_questions = number_of_questions
        self.entailment = entailment or LexicalEntailment()

    def _paraphrase(self, question, handle, config) -> list[str]:
        ask = [ChatMessage("user", render("paraphraser", question=question, count=self.number_of_questions))]
        reply = handle.chat_complete(ask, config, temperature=config.sampling_temperature)
        parsed = parse_string_array(reply.text)
        if parsed is None:
            retry = ask + [
                ChatMessage("assistant", reply.text or "(empty)"),
                ChatMessage("user", _ARRAY_RETRY),
            ]
            reply = handle.chat_complete(retry, config, temperature=config.sampling_temperature)
            parsed = parse_string_array(reply.text)
        if parsed is None:
            return []
        return [p for p in parsed if p][: self.number_of_questions]

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        question = last_user_content(messages)
        paraphrases = self._paraphrase(question, handle, config)
        if not paraphrases:
            raise MethodFailure("no usable paraphrases were generated")
        answers = []
        agreement = 0
        for paraphrase in paraphrases:
            answer = handle.chat_complete(replace_last_user(messages, paraphrase), config)
            answers.append(answer.text)
            if self.entailment.bidirectional_entail(question, answer.text, record.text):
                agreement += 1
        details = {
            "paraphrases": paraphrases,
            "answers": answers,
            "agreement": agreement,
        }
        if len(paraphrases) < self.number_of_questions:
            details["paraphrase_shortfall"] = self.number_of_questions - len(paraphrases)
        return TruthScore(self.method_id, agreement / len(paraphrases), details=details)


class CrossExamination(TruthMethod):
    """An examiner model interrogates the answer, then rules CORRECT or INCORRECT."""

    method_id = "cross_examination"

    def __init__(self, examiner: ModelSpec, rounds: int = 1):
        super().__init__()
        if rounds < 1:
            raise ValueError("rounds must be >= 1")
        self.examiner = examiner
        self.rounds = rounds

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        question = last_user_content(messages)
        examiner = handle.with_spec(self.examiner)
        exam: list[ChatMessage] = [
            ChatMessage("user", render("examiner", question=question, answer=record.text))
        ]
        transcript = []
        for _ in range(self.rounds):
            batch = examiner.chat_complete(exam, config, temperature=0.0)
            exam.append(ChatMessage("assistant", batch.text))
            followup = messages + [
                ChatMessage("assistant", record.text),
                ChatMessage("user", batch.text),
            ]
            reply = handle.chat_complete(followup, config)
            exam.append(ChatMessage("user", f"The examinee answered: {reply.text}"))
            transcript.append({"questions": batch.text, "answers": reply.text})

        verdict = self._verdict(examiner, exam, config)
        return TruthScore(
            self.method_id,
            1.0 if verdict == "correct" else 0.0,
            details={"verdict": verdict, "transcript": transcript},
        )

    def _verdict(self, examiner, exam, config) -> str:
        ask = exam + [ChatMessage("user", render("examiner_verdict"))]
        reply = examiner.chat_complete(ask, config, temperature=0.0)
        parsed = _parse_verdict(reply.text)
        if parsed is None:
            retry = ask + [
                ChatMessage("assistant", reply.text or "(empty)"),
                ChatMessage("user", render("examiner_verdict")),
            ]
            reply = examiner.chat_complete(retry, config, temperature=0.0)
            parsed = _parse_verdict(reply.text)
        if parsed is None:
            raise MethodFailure(f"no verdict in examiner reply: {reply.text!r}")
        return parsed


def _parse_verdict(text: str) -> str | None:
    # "incorrect" first: "correct" is a substring of it
    words = norm_tokens(text)
    for word in words:
        if word == "incorrect":
            return "incorrect"
        if word == "correct":
            return "correct"
    return None


class MultiLlmCollab(TruthMethod):
    """A reviewer panel votes ACCEPT or REJECT on the answer."""

    method_id = "multi_llm_collab"

    def __init__(self, reviewers: list[ModelSpec]):
        super().__init__()
        if not reviewers:
            raise ValueError("at least one reviewer is required")
        self.reviewers = list(reviewers)

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        question = last_user_content(messages)
        prompt = render("reviewer", question=question, answer=record.text)
        votes = []
        feedback = []
        for spec in self.reviewers:
            reply = handle.with_spec(spec).chat_complete(
                [ChatMessage("user", prompt)], config, temperature=0.0
            )
            vote = _parse_vote(reply.text)
            votes.append(vote)
            feedback.append(reply.text)
        accepts = sum(1 for v in votes if v == "accept")
        return TruthScore(
            self.method_id,
            accepts / len(votes),
            details={"votes": votes, "feedback": feedback},
        )


def _parse_vote(text: str) -> str:
    for word in norm_tokens(text):
        if word in ("accept", "reject"):
            return word
    return "reject-unparsed"  # an unreadable review counts as a rejection
