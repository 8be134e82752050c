import json
import logging
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import Levenshtein

from ..common.common_funcs import CommonFuncs
from ..common.types import (
    ConfusionTable,
    ContaminationProfile,
    Correction,
    ErrorCategory,
    Lexicon,
    NGramModel,
)
from ..exceptions import ModelError, ProfileFormatError
from ..layout.layout_api import LayoutApi

MODEL_FORMAT = "ocrrevise-bigram"
MODEL_VERSION = 1
MAX_UNKNOWN_SPAN = 20
DEFAULT_SPACING_PENALTY = 1.0
DEFAULT_UNKNOWN_CHAR_COST = 3.0

# score differences below this count as ties
_TIE = 1e-9
_AFFIXES = re.compile(r"^(\W*)(.*?)(\W*)$", re.DOTALL)

# Levenshtein.editops names the edit that turns the OCR token into the repair,
# so an inserted character undoes a deletion and vice versa.
_REPAIR_CATEGORY = {
    "replace": ErrorCategory.SUBSTITUTION.value,
    "insert": ErrorCategory.DELETION.value,
    "delete": ErrorCategory.INSERTION.value,
}


_worker = {}


def _initWorker(models, confusion, profile_hint, max_edits, only):
    common_funcs = CommonFuncs()
    _worker["api"] = CorrectorApi(common_funcs, LayoutApi(common_funcs), confusion)
    _worker["args"] = (models, confusion, profile_hint, max_edits, only)


def _correctOne(document):
    docId, text = document
    return docId, _worker["api"].correct(text, *_worker["args"])


class CorrectorApi:
    def __init__(self, common_funcs: CommonFuncs, layout_api: LayoutApi, confusion: ConfusionTable):
        self.common_funcs = common_funcs
        self.layout_api = layout_api
        self.confusion = confusion
        self._indexes = {}
        self._longest = {}


    def trainModels(self, corpus, smoothing_k=0.1):
        """Counts words and word bigrams over a clean corpus.

        Documents are tokenized on whitespace with case preserved. Bigrams run across
        line breaks but not across documents.

        Args:
            corpus (iterable): CleanDocuments (or plain strings).
            smoothing_k (float): The additive smoothing constant of the bigram model, greater than 0.

        Returns:
            tuple: The Lexicon and the NGramModel.

        Raises:
            ModelError: Raised if ``smoothing_k`` is not positive or the corpus has no tokens.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> lexicon, lm = toolkit.corrector.trainModels(["a b a"])
            >>> lexicon.entries
            {'a': 2, 'b': 1}
        """

        if not smoothing_k > 0:
            raise ModelError("OCRRevise: The smoothing constant must be positive, got {0}.".format(smoothing_k))

        unigrams = Counter()
        bigrams = Counter()
        documents = 0
        for document in corpus:
            tokens = getattr(document, "text", document).split()
            unigrams.update(tokens)
            bigrams.update(zip(tokens, tokens[1:]))
            documents += 1

        if not unigrams:
            raise ModelError("OCRRevise: Cannot train on an empty corpus.")

        logging.info(
            "OCRRevise: Trained on {docs} documents, {words} distinct words.".format(docs=documents, words=len(unigrams))
        )
        lexicon = Lexicon(entries=dict(unigrams), total=sum(unigrams.values()))
        return lexicon, NGramModel(unigrams=dict(unigrams), bigrams=dict(bigrams), k=smoothing_k)

    def saveModels(self, models, path):
        """Writes a lexicon and bigram model to a versioned JSON artifact."""

        lexicon, lm = models
        artifact = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "smoothing_k": lm.k,
            "unigrams": lexicon.entries,
            "bigrams": [[left, right, count] for (left, right), count in lm.bigrams.items()],
        }
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(artifact, f, ensure_ascii=False)
        except OSError:
            logging.error("OCRRevise: Could not write the model file {path}.".format(path=path))
            raise

    def loadModels(self, path):
        """Reads models written by ``saveModels``.

        Returns:
            tuple: The Lexicon and the NGramModel.

        Raises:
            ProfileFormatError: Raised if the file is not valid JSON or lacks a field.
            ModelError: Raised if the artifact has another format or version.
        """

        try:
            with open(path, encoding="utf-8") as f:
                artifact = json.load(f)
        except OSError:
            logging.error("OCRRevise: Could not read the model file {path}.".format(path=path))
            raise
        except json.JSONDecodeError as e:
            raise ProfileFormatError("OCRRevise: {path} is not valid JSON: {error}".format(path=path, error=e.msg))

        if not isinstance(artifact, dict) or artifact.get("format") != MODEL_FORMAT:
            raise ModelError("OCRRevise: {path} is not an OCRRevise model file.".format(path=path))
        if artifact.get("version") != MODEL_VERSION:
            raise ModelError(
                "OCRRevise: Unsupported model version {version} in {path}.".format(
                    version=artifact.get("version"), path=path
                )
            )

        try:
            unigrams = {str(word): int(count) for word, count in artifact["unigrams"].items()}
            bigrams = {(str(left), str(right)): int(count) for left, right, count in artifact["bigrams"]}
            smoothing_k = float(artifact["smoothing_k"])
        except (KeyError, TypeError, ValueError, AttributeError):
            raise ProfileFormatError("OCRRevise: {path} is missing model fields.".format(path=path))

        if not smoothing_k > 0 or not unigrams:
            raise ModelError("OCRRevise: {path} holds an invalid model.".format(path=path))
        lexicon = Lexicon(entries=unigrams, total=sum(unigrams.values()))
        return lexicon, NGramModel(unigrams=unigrams, bigrams=bigrams, k=smoothing_k)

    def deinterleaveBest(self, lines, lm, max_columns=3):
        """Picks the column count whose de-interleaving reads best under the bigram model.

        Every column count from 1 to ``max_columns`` is tried with balanced heights; each
        candidate is scored by its average per-token bigram log-probability. Ties go to
        the smaller column count.

        Args:
            lines (list): The section's lines as read.
            lm (NGramModel): The bigram model.
            max_columns (int): The largest column count to try. Defaults to 3.

        Returns:
            tuple: The restored lines (list) and the chosen column count (int).
        """

        lines = list(lines)
        bestLines, bestColumns = lines, 1
        bestScore = lm.averageScore(self._tokens(lines))
        for columns in range(2, max_columns + 1):
            if columns > len(lines):
                break
            heights = self.layout_api.balancedHeights(len(lines), columns)
            candidate = self.layout_api.invertColumnize(lines, heights)
            score = lm.averageScore(self._tokens(candidate))
            if score > bestScore + _TIE:
                bestLines, bestColumns, bestScore = candidate, columns, score
        return bestLines, bestColumns

    def _tokens(self, lines):
        return " ".join(lines).split()

    def segmentViterbi(
        self,
        text,
        lexicon,
        spacing_penalty=DEFAULT_SPACING_PENALTY,
        unknown_char_cost=DEFAULT_UNKNOWN_CHAR_COST,
        max_unknown_span=MAX_UNKNOWN_SPAN,
    ):
        """Re-segments text into words with a minimum-cost dynamic program.

        The text is stripped of whitespace and re-split. A known word costs the negative
        log of its add-one smoothed unigram probability; any other span costs
        ``unknown_char_cost`` per character and may be at most ``max_unknown_span``
        characters long, unless it is one of the observed tokens. Every position where the chosen segmentation
        disagrees with the observed spacing adds ``spacing_penalty``. Equal costs go to the
        segmentation with fewer disagreements.

        Args:
            text (str): The text to segment.
            lexicon (Lexicon): The known words.
            spacing_penalty (float): Cost of each disagreement with the observed spacing. Defaults to 1.0.
            unknown_char_cost (float): Cost per character of an unknown span. Defaults to 3.0.
            max_unknown_span (int): The longest unknown span that is not an observed token.
                An observed token is kept whole whatever its length, so long unknown tokens
                are never cut. Defaults to 20.

        Returns:
            str: The words joined with single spaces.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> from OCRRevise.common.types import Lexicon
            >>> toolkit = ocr.OCRRevise()
            >>> lexicon = Lexicon({"the": 100, "cat": 50, "theca": 1, "t": 1}, total=152)
            >>> toolkit.corrector.segmentViterbi("thecat", lexicon, spacing_penalty=0)
            'the cat'
        """

        tokens = text.split()
        chars = "".join(tokens)
        n = len(chars)
        if not n:
            return ""

        boundaries = set()
        tokenStarts = {}
        offset = 0
        for token in tokens:
            if offset:
                boundaries.add(offset)
            tokenStarts[offset + len(token)] = offset
            offset += len(token)

        # boundariesBefore[p] counts observed boundaries at positions 1..p
        boundariesBefore = [0] * (n + 1)
        for p in range(1, n + 1):
            boundariesBefore[p] = boundariesBefore[p - 1] + (p in boundaries)

        span = max(max_unknown_span, self._longestWord(lexicon))
        best = [None] * (n + 1)
        best[0] = (0.0, 0, 0)
        for end in range(1, n + 1):
            starts = list(range(max(0, end - span), end))
            if end in tokenStarts and tokenStarts[end] < end - span:
                starts.insert(0, tokenStarts[end])
            for start in starts:
                word = chars[start:end]
                if lexicon.knows(word):
                    cost = lexicon.cost(word)
                elif end - start <= max_unknown_span or tokenStarts.get(end) == start:
                    cost = unknown_char_cost * (end - start)
                else:
                    continue
                merged = boundariesBefore[end - 1] - boundariesBefore[start]
                split = 1 if start > 0 and start not in boundaries else 0
                disagreements = merged + split
                previousCost, previousDisagreements, _ = best[start]
                key = (previousCost + cost + spacing_penalty * disagreements, previousDisagreements + disagreements)
                if best[end] is None or key < best[end][:2]:
                    best[end] = key + (start,)

        words = []
        end = n
        while end > 0:
            start = best[end][2]
            words.append(chars[start:end])
            end = start
        return " ".join(reversed(words))

    def _longestWord(self, lexicon):
        key = id(lexicon)
        if key not in self._longest:
            self._longest[key] = (lexicon, max((len(word) for word in lexicon.entries), default=0))
        return self._longest[key][1]

    def repairToken(self, token, lexicon, confusion=None, max_edits=2):
        """Replaces an unknown token with the most likely lexicon word within ``max_edits``.

        Candidates are lexicon words within weighted edit distance ``max_edits``: a
        substitution between confusable characters costs 0.5, any other substitution,
        insertion, deletion or adjacent transposition costs 1. The candidate minimizing
        the edit cost plus the negative log unigram probability wins; ties go to the
        smaller edit cost, then to the lexicographically smaller word. Title-case and
        upper-case tokens are also tried lowercased, with their case restored.

        Args:
            token (str): The token to repair.
            lexicon (Lexicon): The known words.
            confusion (ConfusionTable): The confusable characters. Defaults to the API's table.
            max_edits (int): The edit budget, 1 or 2. Defaults to 2.

        Returns:
            str: The repaired token, or ``token`` itself if it is known, has no letter or
            digit, or has no candidate.

        Raises:
            ModelError: Raised if ``max_edits`` is not 1 or 2.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> from OCRRevise.common.types import Lexicon
            >>> toolkit = ocr.OCRRevise()
            >>> toolkit.corrector.repairToken("he1lo", Lexicon({"hello": 3}, total=3))
            'hello'
        """

        if max_edits not in (1, 2):
            raise ModelError("OCRRevise: max_edits must be 1 or 2, got {0}.".format(max_edits))
        if lexicon.knows(token) or not any(c.isalnum() for c in token):
            return token

        best = self._bestRepair(token, lexicon, confusion if confusion is not None else self.confusion, max_edits)
        return best[2] if best is not None else token

    def _bestRepair(self, token, lexicon, confusion, max_edits, allowed=None):
        best = self._bestCandidate(token, lexicon, confusion, max_edits, allowed)
        folded = token.lower()
        if folded != token and (token.isupper() or token[:1].isupper()):
            lowered = self._bestCandidate(folded, lexicon, confusion, max_edits, allowed)
            if lowered is not None:
                lowered = lowered[:2] + (self._restoreCase(lowered[2], token),)
                if best is None or lowered < best:
                    best = lowered
        return best

    def _restoreCase(self, word, pattern):
        if pattern.isupper():
            return word.upper()
        return word[:1].upper() + word[1:]

    def _bestCandidate(self, token, lexicon, confusion, max_edits, allowed=None):
        index, canonical = self._candidateIndex(lexicon, confusion)
        best = None
        seen = set()
        for key in self._deletes(token.translate(canonical), max_edits):
            for word in index.get(key, ()):
                if word in seen:
                    continue
                seen.add(word)
                edit = self.weightedDistance(token, word, confusion, limit=max_edits)
                if edit > max_edits:
                    continue
                if allowed is not None and set(self._repairEdits(token, word)) - {allowed}:
                    continue
                candidate = (edit + lexicon.cost(word), edit, word)
                if best is None or candidate < best:
                    best = candidate
        return best

    def _candidateIndex(self, lexicon, confusion):
        """Delete-neighbourhood index of the lexicon over confusion-folded spellings."""

        key = (id(lexicon), id(confusion))
        if key not in self._indexes:
            canonical = self._canonicalMap(confusion)
            index = {}
            for word in lexicon.entries:
                for variant in self._deletes(word.translate(canonical), 2):
                    index.setdefault(variant, []).append(word)
            # the lexicon and table are kept alongside so their ids stay valid
            self._indexes[key] = (lexicon, confusion, index, canonical)
        _, _, index, canonical = self._indexes[key]
        return index, canonical

    @staticmethod
    def _canonicalMap(confusion):
        parent = {}

        def find(char):
            while parent.get(char, char) != char:
                char = parent[char]
            return char

        for char, partners in confusion.entries.items():
            for partner in partners:
                left, right = find(char), find(partner)
                if left != right:
                    parent[max(left, right)] = min(left, right)
        return {ord(char): find(char) for char in parent}

    @staticmethod
    def _deletes(word, depth):
        found = {word}
        frontier = {word}
        for _ in range(depth):
            frontier = {w[:i] + w[i + 1:] for w in frontier for i in range(len(w))}
            found |= frontier
        return found

    def weightedDistance(self, a, b, confusion=None, limit=None):
        """Weighted edit distance between two strings, exact up to a cost of 2.

        Confusable substitutions cost 0.5; other substitutions, insertions, deletions and
        adjacent transpositions cost 1. A transposition may be combined with substitutions
        of the swapped characters or with one character inserted or deleted between them.
        If ``limit`` is given and the length difference alone exceeds it, that difference
        is returned.
        """

        confusion = confusion if confusion is not None else self.confusion
        n, m = len(a), len(b)
        if limit is not None and abs(n - m) > limit:
            return float(abs(n - m))

        def substitution(x, y):
            if x == y:
                return 0.0
            return 0.5 if confusion.confusable(x, y) else 1.0

        d = [[0.0] * (m + 1) for _ in range(n + 1)]
        for i in range(1, n + 1):
            d[i][0] = float(i)
        for j in range(1, m + 1):
            d[0][j] = float(j)

        for i in range(1, n + 1):
            for j in range(1, m + 1):
                cost = min(
                    d[i - 1][j] + 1.0,
                    d[i][j - 1] + 1.0,
                    d[i - 1][j - 1] + substitution(a[i - 1], b[j - 1]),
                )
                if i > 1 and j > 1 and a[i - 1] != a[i - 2]:
                    swapped = 1.0 + substitution(a[i - 1], b[j - 2]) + substitution(a[i - 2], b[j - 1])
                    cost = min(cost, d[i - 2][j - 2] + swapped)
                if i > 2 and j > 1 and a[i - 3] == b[j - 1] and a[i - 1] == b[j - 2]:
                    cost = min(cost, d[i - 3][j - 2] + 2.0)
                if i > 1 and j > 2 and a[i - 2] == b[j - 1] and a[i - 1] == b[j - 3]:
                    cost = min(cost, d[i - 2][j - 3] + 2.0)
                d[i][j] = cost
        return d[n][m]

    def correct(self, document, models, confusion=None, profile_hint=None, max_edits=2, only=None):
        """Revises an OCR'd document in three stages.

        1. Reading order: each block of non-blank lines is cut into sections and every
           section is de-interleaved under the column count that reads best, choosing
           section boundaries and column counts jointly by dynamic programming.
        2. Segmentation: each line is re-segmented with ``segmentViterbi``; a changed
           stretch is kept only when all of its new words are known.
        3. Repair: each unknown token is replaced by ``repairToken``'s choice, trying the
           token with and without surrounding punctuation.

        Segmentation and repair repeat on each line until neither changes it, so correcting
        a corrected document changes nothing further.

        Args:
            document (str): The OCR'd text, lines separated by newlines.
            models (tuple): The Lexicon and NGramModel from ``trainModels``.
            confusion (ConfusionTable): The confusable characters. Defaults to the API's table.
            profile_hint (ContaminationProfile): Section sizes and allowed column counts to
                search. Defaults to the default profile. A hint whose
                ``p_multicolumn_section`` is 0 turns stage 1 off.
            max_edits (int): The repair budget, 1 or 2. Defaults to 2.
            only (ErrorCategory or str): Runs a single-category corrector. "column_reading_order"
                runs stage 1 only and "segmentation" stage 2 only; any other category runs
                stage 3 only and accepts just the repairs made of edits of that category.
                Defaults to None, all stages.

        Returns:
            Correction: The corrected text, the column count chosen per section and the
            number of edits per error category.

        Raises:
            ModelError: Raised if ``only`` is not an error category.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> models = toolkit.corrector.trainModels(toolkit.pipeline.ingestCorpus("wiki.jsonl"))
            >>> toolkit.corrector.correct("the cat sat on teh mat", models).text
        """

        lexicon, lm = models
        confusion = confusion if confusion is not None else self.confusion
        hint = profile_hint if profile_hint is not None else ContaminationProfile()
        ordering, segmenting, repairing, allowed = self._stages(only)
        diagnostics = {category.value: 0 for category in ErrorCategory}
        repairs = {}

        def repair(token, category=None):
            if (token, category) not in repairs:
                repairs[(token, category)] = self._repairInContext(token, lexicon, confusion, max_edits, category)
            return repairs[(token, category)]

        lines = document.split("\n")
        ordered = []
        chosen = []
        i = 0
        while i < len(lines):
            if not lines[i].strip():
                ordered.append("")
                i += 1
                continue
            j = i
            while j < len(lines) and lines[j].strip():
                j += 1
            if ordering:
                block, columns = self._restoreReadingOrder(lines[i:j], lm, hint, repair)
            else:
                block, columns = lines[i:j], [1]
            ordered.extend(block)
            chosen.extend(columns)
            i = j
        diagnostics[ErrorCategory.COLUMN_READING_ORDER.value] = sum(1 for c in chosen if c > 1)

        out = []
        for line in ordered:
            # segmentation and repair repeat until the line is a fixpoint of both
            seen = set()
            while line not in seen:
                seen.add(line)
                words = line.split()
                if segmenting:
                    words, changes = self._segmentLine(line, lexicon)
                    diagnostics[ErrorCategory.SEGMENTATION.value] += changes
                if repairing:
                    repaired = []
                    for word in words:
                        fixed = repair(word, allowed)
                        if fixed != word:
                            for category, count in self._repairEdits(word, fixed).items():
                                diagnostics[category] += count
                        repaired.append(fixed)
                    words = repaired
                line = " ".join(words)
            out.append(line)

        return Correction(text="\n".join(out), chosen_columns_per_section=tuple(chosen), stage_diagnostics=diagnostics)

    def correctMany(self, documents, models, confusion=None, profile_hint=None, max_edits=2, jobs=1, only=None):
        """Corrects ``(doc_id, text)`` items, in parallel when ``jobs`` is above 1.

        ``only`` selects a single-category corrector, as in ``correct``.

        Yields:
            tuple: ``(doc_id, Correction)`` in input order.
        """

        confusion = confusion if confusion is not None else self.confusion
        self._stages(only)
        if jobs > 1:
            with ProcessPoolExecutor(
                max_workers=jobs,
                initializer=_initWorker,
                initargs=(models, confusion, profile_hint, max_edits, only),
            ) as pool:
                yield from pool.map(_correctOne, documents, chunksize=8)
        else:
            for docId, text in documents:
                yield docId, self.correct(text, models, confusion, profile_hint, max_edits, only)

    @staticmethod
    def _stages(only):
        """Returns which stages run and the repair category ``only`` restricts stage 3 to."""

        if only is None:
            return True, True, True, None
        try:
            category = ErrorCategory(only)
        except ValueError:
            raise ModelError("OCRRevise: Unknown error category {0!r}.".format(only))
        if category == ErrorCategory.COLUMN_READING_ORDER:
            return True, False, False, None
        if category == ErrorCategory.SEGMENTATION:
            return False, True, False, None
        return False, False, True, category.value

    @staticmethod
    def _repairEdits(token, repaired):
        """Counts the edits turning ``token`` into ``repaired`` by error category.

        A swap of two adjacent characters counts as one transposition when the two
        strings have the same length and the swaps explain them in no more edits than
        ``Levenshtein.editops``.
        """

        aligned = Counter()
        for op, _, _ in Levenshtein.editops(token, repaired):
            aligned[_REPAIR_CATEGORY[op]] += 1
        if len(token) != len(repaired):
            return aligned

        swapped = Counter()
        i = 0
        while i < len(token):
            if token[i] == repaired[i]:
                i += 1
            elif i + 1 < len(token) and token[i] == repaired[i + 1] and token[i + 1] == repaired[i]:
                swapped[ErrorCategory.TRANSPOSITION.value] += 1
                i += 2
            else:
                swapped[ErrorCategory.SUBSTITUTION.value] += 1
                i += 1
        return swapped if sum(swapped.values()) <= sum(aligned.values()) else aligned

    def _restoreReadingOrder(self, lines, lm, hint, repair):
        """Joint choice of section boundaries and column counts for one block.

        Only the bigrams across line breaks differ between hypotheses, so each line
        contributes its (repaired) first and last token. The first line of a de-interleaved
        section is always the section's first line as read, so the bigram into a section
        does not depend on its column count.
        """

        allowed = sorted(hint.allowed_columns) if hint.p_multicolumn_section > 0 else []
        if not allowed:
            return list(lines), [1]

        n = len(lines)
        first = [repair(line.split()[0]) for line in lines]
        last = [repair(line.split()[-1]) for line in lines]
        sizes = range(hint.section_lines_min, hint.section_lines_max + 1)

        # states[end][lastLine] = (score, reorders, back pointer)
        states = [dict() for _ in range(n + 1)]
        states[0][None] = (0.0, 0, None)
        orders = {}
        for start in range(n):
            if not states[start]:
                continue
            for end in sorted({min(start + size, n) for size in sizes}):
                length = end - start
                options = [1]
                if length >= 2 * allowed[0]:
                    options.extend(c for c in allowed if c <= length)
                for columns in options:
                    if (start, end, columns) not in orders:
                        indices = list(range(start, end))
                        if columns > 1:
                            indices = self.layout_api.invertColumnize(
                                indices, self.layout_api.balancedHeights(length, columns)
                            )
                        inner = sum(lm.logProb(last[indices[k]], first[indices[k + 1]]) for k in range(length - 1))
                        orders[(start, end, columns)] = (indices, inner)
                    indices, inner = orders[(start, end, columns)]
                    for previous, (score, reorders, _) in states[start].items():
                        entering = lm.logProb(last[previous], first[start]) if previous is not None else 0.0
                        key = (score + entering + inner, reorders + (columns > 1))
                        current = states[end].get(indices[-1])
                        if current is None or self._better(key, current):
                            states[end][indices[-1]] = key + ((start, previous, columns),)

        finalLast = None
        for lastLine, state in states[n].items():
            if finalLast is None or self._better(state, states[n][finalLast]):
                finalLast = lastLine

        sections = []
        end, lastLine = n, finalLast
        while end > 0:
            start, previous, columns = states[end][lastLine][2]
            sections.append((start, end, columns))
            end, lastLine = start, previous
        sections.reverse()

        restored = []
        for start, end, columns in sections:
            restored.extend(lines[k] for k in orders[(start, end, columns)][0])
        return restored, [columns for _, _, columns in sections]

    @staticmethod
    def _better(candidate, current):
        if candidate[0] > current[0] + _TIE:
            return True
        return abs(candidate[0] - current[0]) <= _TIE and candidate[1] < current[1]

    def _segmentLine(self, line, lexicon):
        observed = line.split()
        if not observed:
            return [], 0
        proposed = self.segmentViterbi(line, lexicon).split()
        if proposed == observed:
            return observed, 0

        words = []
        changes = 0
        region, replacement = [], []
        observedEnd = proposedEnd = 0
        i = j = 0
        while i < len(observed) or j < len(proposed):
            if j >= len(proposed) or (i < len(observed) and observedEnd <= proposedEnd):
                region.append(observed[i])
                observedEnd += len(observed[i])
                i += 1
            else:
                replacement.append(proposed[j])
                proposedEnd += len(proposed[j])
                j += 1
            if observedEnd == proposedEnd and region and replacement:
                if region != replacement and all(lexicon.knows(word) for word in replacement):
                    words.extend(replacement)
                    changes += len(region) - 1 + len(replacement) - 1
                else:
                    words.extend(region)
                region, replacement = [], []
        return words, changes

    def _repairInContext(self, token, lexicon, confusion, max_edits, allowed=None):
        if lexicon.knows(token) or not any(c.isalnum() for c in token):
            return token
        prefix, core, suffix = _AFFIXES.match(token).groups()
        if (prefix or suffix) and core and lexicon.knows(core):
            return token

        best = self._bestRepair(token, lexicon, confusion, max_edits, allowed)
        if (prefix or suffix) and any(c.isalnum() for c in core):
            inner = self._bestRepair(core, lexicon, confusion, max_edits, allowed)
            if inner is not None:
                inner = inner[:2] + (prefix + inner[2] + suffix,)
                if best is None or inner < best:
                    best = inner
        return best[2] if best is not None else token
