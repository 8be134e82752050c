import logging
import math
import re
from collections import Counter, defaultdict

import Levenshtein
import pandas as pd

from ..common.common_funcs import CommonFuncs
from ..common.types import KIND_CATEGORY, EditStats, ErrorKind, EvalReport, RetrievalReport
from ..exceptions import MetricsError

DEFAULT_K_VALUES = (1, 3, 5)
MIN_QUERY_TOKENS = 6
RETRIEVAL_VARIANTS = ("clean", "contaminated", "corrected")

_TERMS = re.compile(r"\w+")
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
# query streams sit above the document streams of the same seed
_QUERY_STREAM = 1 << 32
# first code point of supplementary private use area A, used to spell tokens as characters
_TOKEN_CODEPOINT = 0xF0000


def tokenizeTerms(text):
    return _TERMS.findall(text.lower())


class BM25:
    """Okapi BM25 index over a fixed list of ``(doc_id, text)`` documents."""

    def __init__(self, documents, k1=1.2, b=0.75):
        self.ids = [doc_id for doc_id, _ in documents]
        self.k1 = k1
        self.b = b
        self.tf = []
        self.doc_lengths = []
        self.df = defaultdict(int)
        for _, text in documents:
            terms = tokenizeTerms(text)
            self.tf.append(Counter(terms))
            self.doc_lengths.append(len(terms))
            for term in set(terms):
                self.df[term] += 1

        self.avgdl = sum(self.doc_lengths) / len(documents) if documents else 0.0
        n = len(documents)
        self.idf = {term: math.log((n - df + 0.5) / (df + 0.5) + 1) for term, df in self.df.items()}

    def score(self, query_terms, doc_index):
        tf = self.tf[doc_index]
        length = self.doc_lengths[doc_index]
        norm = self.k1 * (1 - self.b + self.b * (length / self.avgdl if self.avgdl else 0.0))
        score = 0.0
        for term in query_terms:
            count = tf.get(term, 0)
            if count:
                score += self.idf[term] * count * (self.k1 + 1) / (count + norm)
        return score

    def rank(self, query):
        """Document ids by descending score, ties by id."""

        terms = tokenizeTerms(query)
        scored = [(-self.score(terms, i), doc_id) for i, doc_id in enumerate(self.ids)]
        return [doc_id for _, doc_id in sorted(scored)]


class MetricsApi:
    def __init__(self, common_funcs: CommonFuncs):
        self.common_funcs = common_funcs


    def levenshtein(self, a, b):
        """Unit-cost edit statistics between two character sequences.

        Args:
            a (str): The source string.
            b (str): The target string.

        Returns:
            EditStats: The distance and the insertions, deletions and substitutions of a
            minimal edit script turning ``a`` into ``b``.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> toolkit.metrics.levenshtein("kitten", "sitting")
            EditStats(distance=3, insertions=1, deletions=0, substitutions=2)
        """

        counts = Counter(op for op, _, _ in Levenshtein.editops(a, b))
        return EditStats(
            distance=sum(counts.values()),
            insertions=counts["insert"],
            deletions=counts["delete"],
            substitutions=counts["replace"],
        )

    def _charDistance(self, hypothesis, reference):
        return Levenshtein.distance(hypothesis, reference)

    def _wordDistance(self, hypothesis_tokens, reference_tokens):
        codes = {}
        for token in reference_tokens + hypothesis_tokens:
            codes.setdefault(token, chr(_TOKEN_CODEPOINT + len(codes)))
        return Levenshtein.distance(
            "".join(codes[t] for t in hypothesis_tokens),
            "".join(codes[t] for t in reference_tokens),
        )

    def cer(self, hypothesis, reference):
        """Character error rate of ``hypothesis`` against ``reference``, whitespace normalized.

        Raises:
            MetricsError: Raised if the reference is empty.
        """

        reference = self.common_funcs.normalizeWhitespace(reference)
        if not reference:
            raise MetricsError("OCRRevise: Cannot compute CER against an empty reference.")
        hypothesis = self.common_funcs.normalizeWhitespace(hypothesis)
        return self._charDistance(hypothesis, reference) / len(reference)

    def wer(self, hypothesis, reference):
        """Word error rate of ``hypothesis`` against ``reference``.

        Raises:
            MetricsError: Raised if the reference has no words.
        """

        referenceTokens = reference.split()
        if not referenceTokens:
            raise MetricsError("OCRRevise: Cannot compute WER against an empty reference.")
        return self._wordDistance(hypothesis.split(), referenceTokens) / len(referenceTokens)

    def evaluationFrame(self, corrected, pairs):
        """Per-document edit distances before and after correction.

        Args:
            corrected (dict or iterable): Corrected texts keyed by pair id, or ``(id, text)`` items.
            pairs (iterable): The ParallelPairs the texts were corrected from.

        Returns:
            pandas.DataFrame: One row per pair, in pair order, indexed by id, with the
            reference lengths, the char and word distances before and after, and the
            per-document CER before and after.

        Raises:
            MetricsError: Raised if an id is unmatched on either side or a reference is empty.
        """

        corrected = dict(corrected.items() if hasattr(corrected, "items") else corrected)
        pairs = list(pairs)
        pairIds = [pair.id for pair in pairs]
        unmatched = sorted(set(corrected).symmetric_difference(pairIds))
        if unmatched:
            raise MetricsError("OCRRevise: Unmatched document ids: {ids}".format(ids=", ".join(unmatched)))

        rows = []
        for pair in pairs:
            reference = self.common_funcs.normalizeWhitespace(pair.clean)
            if not reference:
                raise MetricsError("OCRRevise: Pair {id} has an empty clean text.".format(id=pair.id))
            before = self.common_funcs.normalizeWhitespace(pair.contaminated)
            after = self.common_funcs.normalizeWhitespace(corrected[pair.id])
            referenceTokens = reference.split()
            rows.append(
                {
                    "id": pair.id,
                    "ref_chars": len(reference),
                    "ref_words": len(referenceTokens),
                    "char_dist_before": self._charDistance(before, reference),
                    "char_dist_after": self._charDistance(after, reference),
                    "word_dist_before": self._wordDistance(before.split(), referenceTokens),
                    "word_dist_after": self._wordDistance(after.split(), referenceTokens),
                }
            )

        frame = pd.DataFrame(
            rows,
            columns=[
                "id", "ref_chars", "ref_words",
                "char_dist_before", "char_dist_after", "word_dist_before", "word_dist_after",
            ],
        ).set_index("id")
        frame["cer_before"] = frame["char_dist_before"] / frame["ref_chars"]
        frame["cer_after"] = frame["char_dist_after"] / frame["ref_chars"]
        return frame

    def evaluatePairs(self, corrected, pairs):
        """Aggregates corpus CER and WER before and after correction.

        Rates are micro averages: total distance over total reference length. When the
        pairs' event logs show a single error category at work (as in a corpus built from
        ``singleCategoryProfile``), every active kind of it gets the corpus
        ``(cer_before, cer_after)``.

        Args:
            corrected (dict or iterable): Corrected texts keyed by pair id, or ``(id, text)`` items.
            pairs (iterable): The ParallelPairs.

        Returns:
            EvalReport: The report.

        Raises:
            MetricsError: Raised if there are no pairs or an id is unmatched.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> pairs = toolkit.pipeline.readPairs("pairs.jsonl")
            >>> report = toolkit.metrics.evaluatePairs({p.id: p.clean for p in pairs}, pairs)
            >>> report.cer_after
            0.0
        """

        pairs = list(pairs)
        if not pairs:
            raise MetricsError("OCRRevise: Nothing to evaluate.")
        frame = self.evaluationFrame(corrected, pairs)
        totals = frame.sum()

        cerBefore = totals["char_dist_before"] / totals["ref_chars"]
        cerAfter = totals["char_dist_after"] / totals["ref_chars"]
        active = sorted({event.kind for pair in pairs for event in pair.events}, key=lambda kind: kind.value)
        perType = {}
        if active and len({KIND_CATEGORY[kind] for kind in active}) == 1:
            perType = {kind.value: (float(cerBefore), float(cerAfter)) for kind in active}

        return EvalReport(
            cer_before=float(cerBefore),
            cer_after=float(cerAfter),
            wer_before=float(totals["word_dist_before"] / totals["ref_words"]),
            wer_after=float(totals["word_dist_after"] / totals["ref_words"]),
            per_error_type=perType,
            document_count=len(frame),
            improved_fraction=float((frame["char_dist_after"] < frame["char_dist_before"]).mean()),
        )

    def reportToFrame(self, report):
        """Tabulates an EvalReport, or a list of RetrievalReports, for display."""

        if isinstance(report, EvalReport):
            rows = {"CER": (report.cer_before, report.cer_after), "WER": (report.wer_before, report.wer_after)}
            for kind, pair in sorted(report.per_error_type.items()):
                rows["CER " + kind] = pair
            return pd.DataFrame.from_dict(rows, orient="index", columns=["before", "after"])

        reports = [report] if isinstance(report, RetrievalReport) else list(report)
        frame = pd.DataFrame(
            [
                dict({"variant": r.variant, "queries": r.query_count},
                     **{"recall@{0}".format(k): r.recall_at[k] for k in sorted(r.recall_at)})
                for r in reports
            ]
        )
        return frame.set_index("variant")

    def bm25Recall(self, documents, queries, k_values=DEFAULT_K_VALUES, variant="clean"):
        """Recall@K of BM25 retrieval with a single relevant document per query.

        Documents and queries are tokenized into lowercase word characters. Scores use
        k1 = 1.2, b = 0.75 and idf = ln((N - df + 0.5) / (df + 0.5) + 1); equal scores
        rank by document id.

        Args:
            documents (list): ``(doc_id, text)`` items to index.
            queries (list): ``(query_text, relevant_doc_id)`` items.
            k_values (iterable): The cut-offs. Defaults to (1, 3, 5).
            variant (str): Label of the indexed text: "clean", "contaminated" or "corrected".

        Returns:
            RetrievalReport: The recall at every cut-off.

        Raises:
            MetricsError: Raised if there are no documents or queries, or a relevant id is not indexed.
        """

        documents = list(documents)
        queries = list(queries)
        if not documents or not queries:
            raise MetricsError("OCRRevise: Retrieval needs at least one document and one query.")
        if variant not in RETRIEVAL_VARIANTS:
            raise MetricsError("OCRRevise: Unknown retrieval variant {0!r}.".format(variant))
        known = {doc_id for doc_id, _ in documents}
        unresolved = sorted({relevant for _, relevant in queries if relevant not in known})
        if unresolved:
            raise MetricsError("OCRRevise: Relevant documents not indexed: {ids}".format(ids=", ".join(unresolved)))

        kValues = sorted(set(k_values))
        index = BM25(documents)
        hits = Counter()
        for query, relevant in queries:
            rank = index.rank(query).index(relevant)
            for k in kValues:
                hits[k] += rank < k

        return RetrievalReport(
            recall_at={k: hits[k] / len(queries) for k in kValues},
            variant=variant,
            query_count=len(queries),
        )

    def synthesizeQueries(self, documents, master_seed=0):
        """Draws one query sentence of at least six tokens from every document.

        Sentences end at ".", "!" or "?" followed by whitespace. Document ``i`` draws from
        its own query stream of ``master_seed``, so the choice does not depend on the
        other documents.

        Args:
            documents (iterable): ``(doc_id, text)`` items or CleanDocuments.
            master_seed (int): The seed. Defaults to 0.

        Returns:
            list: ``(query_text, doc_id)`` items. Documents without an eligible sentence are
            skipped with a warning.
        """

        queries = []
        for index, document in enumerate(documents):
            docId, text = (document.id, document.text) if hasattr(document, "text") else document
            sentences = [
                self.common_funcs.normalizeWhitespace(sentence)
                for sentence in _SENTENCE_END.split(text)
            ]
            eligible = [sentence for sentence in sentences if len(sentence.split()) >= MIN_QUERY_TOKENS]
            if not eligible:
                logging.warning("OCRRevise: No sentence of {n} tokens in document {id}.".format(n=MIN_QUERY_TOKENS, id=docId))
                continue
            rng = self.common_funcs.deriveRng(master_seed, _QUERY_STREAM | index)
            queries.append((eligible[int(rng.integers(len(eligible)))], docId))
        return queries
